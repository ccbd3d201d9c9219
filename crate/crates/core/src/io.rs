//! WAV import/export and audio level measurement.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bands::{BandSpectrum, NUM_BANDS, P0};
use crate::error::{Error, Result};
use crate::rir::ImpulseResponse;
use crate::scene::Clip;

/// Decoded mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

/// Reads a mono PCM or float WAV file, scaling integer samples to [-1, 1).
pub fn read_wav_mono(path: impl AsRef<Path>) -> Result<Audio> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::ConfigNotFound(path.to_path_buf()));
    }
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::InvalidArgument(format!("{}: expected mono audio, found {} channels", path.display(), spec.channels)));
    }
    let samples = match spec.sample_format {
        hound::SampleFormat::Float => reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<Vec<_>, _>>()?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / f64::from(1u32 << (spec.bits_per_sample - 1));
            reader.samples::<i32>().map(|s| s.map(|v| f64::from(v) * scale)).collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(Audio { samples, sample_rate: f64::from(spec.sample_rate) })
}

/// Writes mono 32-bit float WAV.
pub fn write_wav_f32(path: impl AsRef<Path>, samples: &[f64], sample_rate: f64) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate.round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample(s as f32)?;
    }
    w.finalize()?;
    Ok(())
}

/// Text sidecar stored next to an RIR WAV as `<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RirSidecar {
    pub t0: f64,
    pub sample_rate: f64,
    pub provenance: String,
}

fn sidecar_path(wav: &Path) -> std::path::PathBuf {
    wav.with_extension("json")
}

/// Writes the response as 32-bit float WAV plus a JSON sidecar holding `t0`.
pub fn write_rir(path: impl AsRef<Path>, h: &ImpulseResponse, provenance: &str) -> Result<()> {
    let path = path.as_ref();
    write_wav_f32(path, &h.samples, h.sample_rate)?;
    let side = RirSidecar { t0: h.t0, sample_rate: h.sample_rate, provenance: provenance.to_string() };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side).expect("sidecar serializes"))?;
    Ok(())
}

/// Reads an RIR WAV; `t0` comes from the sidecar when one exists, else 0.
pub fn read_rir(path: impl AsRef<Path>) -> Result<ImpulseResponse> {
    let path = path.as_ref();
    let audio = read_wav_mono(path)?;
    let side = sidecar_path(path);
    let t0 = if side.is_file() {
        let text = std::fs::read_to_string(&side)?;
        let s: RirSidecar =
            serde_json::from_str(&text).map_err(|e| Error::Parse { path: side.display().to_string(), message: e.to_string() })?;
        s.t0
    } else {
        0.0
    };
    Ok(ImpulseResponse::new(audio.samples, audio.sample_rate).with_t0(t0))
}

/// Per-band level of a clip in dB SPL, reading samples as pascals at 1 m.
pub fn clip_band_levels(clip: &Clip) -> BandSpectrum {
    let h = ImpulseResponse::new(clip.samples.clone(), clip.sample_rate);
    let n = clip.samples.len().max(1) as f64;
    let mut db = [f64::NEG_INFINITY; NUM_BANDS];
    if let Ok(bands) = crate::sti::octave_filter(&h) {
        for (k, e) in bands.energies().iter().enumerate() {
            db[k] = 10.0 * (e / n / (P0 * P0)).log10();
        }
    }
    BandSpectrum::db(db)
}

/// Reads a noise spectrum CSV with columns `band_hz,level_db` (header optional).
pub fn read_noise_csv(path: impl AsRef<Path>) -> Result<BandSpectrum> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::ConfigNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut db = [f64::NEG_INFINITY; NUM_BANDS];
    let mut seen = [false; NUM_BANDS];
    for rec in reader.records() {
        let rec = rec?;
        let (Some(f), Some(l)) = (rec.get(0), rec.get(1)) else { continue };
        let (Ok(f), Ok(l)) = (f.parse::<f64>(), l.parse::<f64>()) else { continue };
        let k = crate::bands::BAND_CENTERS_HZ
            .iter()
            .position(|&c| (c - f).abs() < 1.0)
            .ok_or_else(|| Error::Parse { path: path.display().to_string(), message: format!("{f} Hz is not an octave band center") })?;
        db[k] = l;
        seen[k] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Parse { path: path.display().to_string(), message: "expected one row per octave band 125..8000 Hz".into() });
    }
    Ok(BandSpectrum::db(db))
}

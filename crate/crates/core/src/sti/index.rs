use std::fmt;

use serde::{Deserialize, Serialize};

use super::mtf::{MtfMatrix, NUM_MOD_FREQS};
use crate::bands::{BandSpectrum, NUM_BANDS};
use crate::error::{Error, Result};

/// Band weighting in thousandths, so the normalization `Σα − Σβ = 1` holds in
/// integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weighting {
    pub alpha_milli: [i32; NUM_BANDS],
    pub beta_milli: [i32; NUM_BANDS - 1],
}

impl Weighting {
    pub fn alpha(&self, k: usize) -> f64 {
        f64::from(self.alpha_milli[k]) / 1000.0
    }

    pub fn beta(&self, k: usize) -> f64 {
        f64::from(self.beta_milli[k]) / 1000.0
    }

    /// `Σα − Σβ` in thousandths; 1000 for a valid weighting.
    pub fn normalization_milli(&self) -> i32 {
        self.alpha_milli.iter().sum::<i32>() - self.beta_milli.iter().sum::<i32>()
    }
}

/// Male speech weights, IEC 60268-16 rev. 4.
pub const MALE: Weighting = Weighting {
    alpha_milli: [85, 127, 230, 233, 309, 224, 173],
    beta_milli: [85, 78, 65, 11, 47, 95],
};

/// Female speech weights, IEC 60268-16 rev. 4. The 125 Hz band is unused.
pub const FEMALE: Weighting = Weighting {
    alpha_milli: [0, 117, 223, 216, 328, 250, 194],
    beta_milli: [0, 99, 66, 62, 25, 76],
};

const _: () = {
    let mut a = 0;
    let mut b = 0;
    let mut k = 0;
    while k < NUM_BANDS {
        a += MALE.alpha_milli[k];
        if k + 1 < NUM_BANDS {
            b += MALE.beta_milli[k];
        }
        k += 1;
    }
    assert!(a - b == 1000, "male STI weights must satisfy sum(alpha) - sum(beta) = 1");
};

/// Apparent signal-to-noise ratios are clipped to ±15 dB.
const SNR_CLIP_DB: f64 = 15.0;

fn transmission_index(m: f64) -> f64 {
    let snr = if m >= 1.0 {
        SNR_CLIP_DB
    } else if m <= 0.0 {
        -SNR_CLIP_DB
    } else {
        (10.0 * (m / (1.0 - m)).log10()).clamp(-SNR_CLIP_DB, SNR_CLIP_DB)
    };
    (snr + SNR_CLIP_DB) / (2.0 * SNR_CLIP_DB)
}

/// Intelligibility category per IEC 60268-16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rating {
    #[serde(rename = "A+")]
    APlus,
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    U,
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rating::APlus => "A+",
            Rating::A => "A",
            Rating::B => "B",
            Rating::C => "C",
            Rating::D => "D",
            Rating::E => "E",
            Rating::F => "F",
            Rating::G => "G",
            Rating::H => "H",
            Rating::I => "I",
            Rating::J => "J",
            Rating::U => "U",
        };
        f.write_str(s)
    }
}

/// Lower bounds of categories A..J. Each category spans its nominal value ±0.02
/// (A: 0.74, B: 0.70, ..., J: 0.38); above 0.76 is A+, below 0.36 is U.
const CATEGORY_FLOORS: [(f64, Rating); 10] = [
    (0.72, Rating::A),
    (0.68, Rating::B),
    (0.64, Rating::C),
    (0.60, Rating::D),
    (0.56, Rating::E),
    (0.52, Rating::F),
    (0.48, Rating::G),
    (0.44, Rating::H),
    (0.40, Rating::I),
    (0.36, Rating::J),
];

pub fn sti_rating(sti: f64) -> Result<Rating> {
    if !(0.0..=1.0).contains(&sti) {
        return Err(Error::InvalidArgument(format!("STI {sti} outside [0, 1]")));
    }
    if sti > 0.76 {
        return Ok(Rating::APlus);
    }
    Ok(CATEGORY_FLOORS.iter().find(|(floor, _)| sti >= *floor).map(|(_, r)| *r).unwrap_or(Rating::U))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiResult {
    pub sti: f64,
    /// Modulation transfer index per band.
    pub mti: [f64; NUM_BANDS],
    pub rating: Rating,
    /// Band SNR that entered the modulation transfer, when known.
    pub snr: Option<BandSpectrum>,
    pub mtf: MtfMatrix,
}

/// Folds a modulation transfer matrix into the index.
pub fn sti_from_mtf(m: &MtfMatrix, weights: &Weighting) -> StiResult {
    let mti: [f64; NUM_BANDS] =
        std::array::from_fn(|k| m.m[k].iter().map(|&v| transmission_index(v)).sum::<f64>() / NUM_MOD_FREQS as f64);
    let mut sti = 0.0;
    for k in 0..NUM_BANDS {
        sti += weights.alpha(k) * mti[k];
        if k + 1 < NUM_BANDS {
            sti -= weights.beta(k) * (mti[k] * mti[k + 1]).sqrt();
        }
    }
    let sti = sti.clamp(0.0, 1.0);
    let rating = sti_rating(sti).expect("clamped");
    StiResult { sti, mti, rating, snr: None, mtf: *m }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_normalize_exactly() {
        assert_eq!(MALE.normalization_milli(), 1000);
        assert_eq!(FEMALE.normalization_milli(), 1000);
    }

    #[test]
    fn perfect_and_dead_channels() {
        assert_eq!(sti_from_mtf(&MtfMatrix::uniform(1.0), &MALE).sti, 1.0);
        assert_eq!(sti_from_mtf(&MtfMatrix::uniform(0.0), &MALE).sti, 0.0);
    }

    #[test]
    fn half_modulation_gives_half_index() {
        let r = sti_from_mtf(&MtfMatrix::uniform(0.5), &MALE);
        assert!((r.sti - 0.5).abs() < 1e-12);
        assert!(r.mti.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn ratings_for_reported_scores() {
        assert_eq!(sti_rating(0.6757).unwrap(), Rating::C);
        assert_eq!(sti_rating(0.5601).unwrap(), Rating::E);
        assert_eq!(sti_rating(0.30).unwrap(), Rating::U);
        assert!(sti_rating(1.2).is_err());
        assert_eq!(Rating::APlus.to_string(), "A+");
    }
}

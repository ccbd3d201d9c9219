//! Octave bands used throughout: 125 Hz to 8 kHz.

use serde::{Deserialize, Serialize};

pub const NUM_BANDS: usize = 7;

pub const BAND_CENTERS_HZ: [f64; NUM_BANDS] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

/// Reference sound pressure, 20 µPa.
pub const P0: f64 = 20e-6;

/// Lower and upper edge of octave band `k` (`fc/√2`, `fc·√2`).
pub fn band_edges(k: usize) -> (f64, f64) {
    let fc = BAND_CENTERS_HZ[k];
    (fc / std::f64::consts::SQRT_2, fc * std::f64::consts::SQRT_2)
}

/// Upper edge of the 8 kHz band, ≈ 11314 Hz.
pub fn highest_band_edge() -> f64 {
    band_edges(NUM_BANDS - 1).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandUnit {
    /// Linear intensity relative to `P0²`.
    Energy,
    /// Level in dB (re `P0` when it is a sound pressure level).
    Decibel,
    /// Dimensionless coefficient such as absorption.
    Coefficient,
}

/// One scalar per octave band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpectrum {
    pub values: [f64; NUM_BANDS],
    pub unit: BandUnit,
}

impl BandSpectrum {
    pub fn energy(values: [f64; NUM_BANDS]) -> Self {
        Self { values, unit: BandUnit::Energy }
    }

    pub fn db(values: [f64; NUM_BANDS]) -> Self {
        Self { values, unit: BandUnit::Decibel }
    }

    pub fn coefficients(values: [f64; NUM_BANDS]) -> Self {
        Self { values, unit: BandUnit::Coefficient }
    }

    pub fn zero_energy() -> Self {
        Self::energy([0.0; NUM_BANDS])
    }

    pub fn flat_db(level: f64) -> Self {
        Self::db([level; NUM_BANDS])
    }

    /// Converts a level spectrum to intensities; energies pass through.
    pub fn to_energy(&self) -> Self {
        match self.unit {
            BandUnit::Decibel => Self::energy(self.values.map(|l| 10f64.powf(l / 10.0))),
            _ => *self,
        }
    }

    /// Converts intensities to levels; zero intensity maps to `-inf`.
    pub fn to_db(&self) -> Self {
        match self.unit {
            BandUnit::Energy => Self::db(self.values.map(|e| 10.0 * e.log10())),
            _ => *self,
        }
    }

    /// Band-wise sum of two energy spectra.
    pub fn add_energy(&self, other: &Self) -> Self {
        let a = self.to_energy();
        let b = other.to_energy();
        Self::energy(std::array::from_fn(|k| a.values[k] + b.values[k]))
    }

    /// Band-wise product, e.g. a source intensity times a propagation gain.
    pub fn scale_energy(&self, gains: &Self) -> Self {
        let a = self.to_energy();
        Self::energy(std::array::from_fn(|k| a.values[k] * gains.values[k]))
    }

    pub fn mean(&self, bands: std::ops::Range<usize>) -> f64 {
        let n = bands.len() as f64;
        self.values[bands].iter().sum::<f64>() / n
    }
}

//! Sampled room impulse responses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled pressure response per unit impulse. Sample `i` sits at
/// time `t0 + i / sample_rate`; the direct path of a free-field source at
/// distance `d` has total sample weight `1/d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub t0: f64,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Self {
        Self { samples, sample_rate, t0: 0.0 }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Self::new(vec![0.0; len], sample_rate)
    }

    /// Unit impulse at `t = delay` (rounded to the nearest sample) in a buffer of `len` samples.
    pub fn delta(len: usize, sample_rate: f64, delay: f64) -> Self {
        let mut h = Self::zeros(len, sample_rate);
        let i = (delay * sample_rate).round() as usize;
        if i < len {
            h.samples[i] = 1.0;
        }
        h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }

    /// Index of the largest magnitude sample.
    pub fn peak_index(&self) -> Option<usize> {
        self.samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { samples: self.samples.iter().map(|x| x * s).collect(), ..*self }
    }

    /// Re-expresses the response on a grid starting at `t0`, padding with
    /// zeros or dropping leading samples. The shift is rounded to whole samples.
    pub fn aligned_to(&self, t0: f64) -> Self {
        let shift = ((self.t0 - t0) * self.sample_rate).round() as i64;
        let samples = if shift >= 0 {
            let mut s = vec![0.0; shift as usize];
            s.extend_from_slice(&self.samples);
            s
        } else {
            self.samples.iter().skip((-shift) as usize).copied().collect()
        };
        Self { samples, sample_rate: self.sample_rate, t0 }
    }

    pub fn resized(mut self, len: usize) -> Self {
        self.samples.resize(len, 0.0);
        self
    }

    pub fn check_same_rate(&self, other: &Self) -> Result<()> {
        if (self.sample_rate - other.sample_rate).abs() > 1e-9 {
            return Err(Error::SampleRateMismatch(self.sample_rate, other.sample_rate));
        }
        Ok(())
    }
}

//! Schroeder backward integration and reverberation-time fits.

/// Backward-integrated energy curve in dB re its value at the start.
/// Entries after the last nonzero energy are `-inf`.
pub fn schroeder_db(energy: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut curve = vec![0.0; energy.len()];
    for (i, e) in energy.iter().enumerate().rev() {
        acc += e;
        curve[i] = acc;
    }
    let total = curve.first().copied().unwrap_or(0.0);
    if total <= 0.0 {
        return vec![f64::NEG_INFINITY; energy.len()];
    }
    curve.iter().map(|&c| 10.0 * (c / total).log10()).collect()
}

/// Reverberation time from a least-squares line through the decay curve
/// between `start_db` and `end_db` (e.g. -5 and -25 for T20), extrapolated to -60 dB.
pub fn fit_t60(curve_db: &[f64], step: f64, start_db: f64, end_db: f64) -> Option<f64> {
    let i0 = curve_db.iter().position(|&v| v <= start_db)?;
    let i1 = curve_db.iter().position(|&v| v <= end_db)?;
    if i1 <= i0 + 1 {
        return None;
    }
    let n = (i1 - i0 + 1) as f64;
    let (mut sx, mut sy, mut sxy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
    for (i, &y) in curve_db.iter().enumerate().take(i1 + 1).skip(i0) {
        let x = i as f64 * step;
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope < 0.0).then(|| -60.0 / slope)
}

/// T20 of an energy sequence sampled every `step` seconds.
pub fn t20(energy: &[f64], step: f64) -> Option<f64> {
    fit_t60(&schroeder_db(energy), step, -5.0, -25.0)
}

/// T30 of an energy sequence sampled every `step` seconds.
pub fn t30(energy: &[f64], step: f64) -> Option<f64> {
    fit_t60(&schroeder_db(energy), step, -5.0, -35.0)
}

/// Number of leading samples that hold all but `drop_db` of the total energy.
pub fn truncation_point(energy: &[f64], drop_db: f64) -> usize {
    let curve = schroeder_db(energy);
    if curve.first().is_none_or(|v| v.is_infinite()) {
        return energy.len();
    }
    curve.iter().position(|&v| v < -drop_db).unwrap_or(energy.len())
}

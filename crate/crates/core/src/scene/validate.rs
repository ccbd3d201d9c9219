use std::fmt;

use serde::Serialize;

use super::Scene;
use crate::bands::highest_band_edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationCode {
    DanglingMaterial,
    CoefficientOutOfRange,
    InvalidBox,
    EmptyAir,
    BoxOutsideAir,
    SourceOutsideAir,
    NoiseOutsideAir,
    NegativeWeight,
    NoPositiveWeight,
    ClipAndSpectrum,
    MissingClip,
    SampleRateTooLow,
    InvalidPhysics,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Offending element, e.g. `listener_boxes[2]`.
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.code, self.element, self.message)
    }
}

/// Checks every scene invariant. An empty list means the scene is valid.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, element: String, message: String| out.push(Violation { code, element, message });

    for (i, t) in scene.mesh.triangles.iter().enumerate() {
        if t.material >= scene.materials.len() {
            push(ViolationCode::DanglingMaterial, format!("mesh.triangles[{i}]"), format!("material id {} does not exist", t.material));
        }
        if !t.triangle.v.iter().all(|p| p.is_finite()) {
            push(ViolationCode::NonFinite, format!("mesh.triangles[{i}]"), "non-finite vertex".into());
        }
    }

    for (i, m) in scene.materials.iter().enumerate() {
        for (kind, values) in [("absorption", &m.absorption), ("scattering", &m.scattering)] {
            for (k, &v) in values.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    push(
                        ViolationCode::CoefficientOutOfRange,
                        format!("materials[{i}].{kind}[{k}]"),
                        format!("{} {kind} coefficient {v} is outside [0, 1]", m.name),
                    );
                }
            }
        }
    }

    if scene.air.is_empty() {
        push(ViolationCode::EmptyAir, "air".into(), "no air boxes declared".into());
    }
    for (i, b) in scene.air.iter().enumerate() {
        if !b.is_valid() || b.volume() <= 0.0 {
            push(ViolationCode::InvalidBox, format!("air[{i}]"), "air box must have positive volume".into());
        }
    }

    for (i, b) in scene.listener_boxes.iter().enumerate() {
        if !b.is_valid() {
            push(ViolationCode::InvalidBox, format!("listener_boxes[{i}]"), "min exceeds max".into());
        } else if !scene.box_in_air(b) {
            push(ViolationCode::BoxOutsideAir, format!("listener_boxes[{i}]"), "listener box is not inside the air volume".into());
        }
    }

    for (i, s) in scene.sources.iter().enumerate() {
        let element = format!("sources[{i}]");
        if !s.region.is_valid() {
            push(ViolationCode::InvalidBox, element.clone(), "min exceeds max".into());
        } else if !scene.box_in_air(&s.region) {
            push(ViolationCode::SourceOutsideAir, element.clone(), "source region is not inside the air volume".into());
        }
        if !(s.weight >= 0.0) || !s.weight.is_finite() {
            push(ViolationCode::NegativeWeight, element.clone(), format!("weight {} must be finite and nonnegative", s.weight));
        }
        if s.clip.is_some() && s.spectrum.is_some() {
            push(ViolationCode::ClipAndSpectrum, element.clone(), "give either a clip or a spectrum, not both".into());
        }
        if let Some(c) = &s.clip {
            if !scene.clips.contains_key(c) {
                push(ViolationCode::MissingClip, element.clone(), format!("clip `{c}` was not loaded"));
            }
        }
        if s.spectrum.is_some_and(|sp| !sp.iter().all(|v| v.is_finite())) {
            push(ViolationCode::NonFinite, element, "non-finite spectrum level".into());
        }
    }
    if !scene.sources.is_empty() && scene.sources.iter().all(|s| !(s.weight > 0.0)) {
        push(ViolationCode::NoPositiveWeight, "sources".into(), "at least one source region needs a positive weight".into());
    }

    for (i, n) in scene.noise.iter().enumerate() {
        if !scene.in_air(n.position) {
            push(ViolationCode::NoiseOutsideAir, format!("noise[{i}]"), "noise source is not inside the air volume".into());
        }
        if !n.spectrum.iter().all(|v| v.is_finite()) {
            push(ViolationCode::NonFinite, format!("noise[{i}]"), "non-finite spectrum level".into());
        }
    }

    let p = &scene.physics;
    let min_fs = 2.0 * highest_band_edge();
    if !(p.sample_rate >= min_fs) {
        push(
            ViolationCode::SampleRateTooLow,
            "physics.sample_rate".into(),
            format!("{} Hz is below {min_fs:.1} Hz needed for the 8 kHz band", p.sample_rate),
        );
    }
    let positive = [
        ("speed_of_sound", p.speed_of_sound),
        ("crossover_hz", p.crossover_hz),
        ("wave_max_hz", p.wave_max_hz),
        ("points_per_wavelength", p.points_per_wavelength),
        ("bin_width", p.bin_width),
        ("rir_duration", p.rir_duration),
        ("listener_spacing", p.listener_spacing),
    ];
    for (name, v) in positive {
        if !(v > 0.0) || !v.is_finite() {
            push(ViolationCode::InvalidPhysics, format!("physics.{name}"), format!("{v} must be positive"));
        }
    }
    for (name, v) in [("rays", p.rays), ("sources_per_region", p.sources_per_region), ("max_cells", p.max_cells)] {
        if v == 0 {
            push(ViolationCode::InvalidPhysics, format!("physics.{name}"), "must be at least 1".into());
        }
    }
    out
}

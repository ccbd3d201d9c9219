use super::Material;

/// A handful of representative materials, usable by name alone in a config.
/// Absorption per octave band 125 Hz .. 8 kHz (the 8 kHz value repeats 4 kHz
/// where tables stop at 4 kHz).
pub fn starter_material(name: &str) -> Option<Material> {
    let (absorption, scattering) = match name {
        "concrete" => ([0.01, 0.01, 0.02, 0.02, 0.02, 0.03, 0.03], 0.05),
        "plaster" => ([0.013, 0.015, 0.02, 0.03, 0.04, 0.05, 0.05], 0.05),
        "drywall" => ([0.29, 0.10, 0.05, 0.04, 0.07, 0.09, 0.09], 0.05),
        "glass" => ([0.18, 0.06, 0.04, 0.03, 0.02, 0.02, 0.02], 0.02),
        "wood_floor" => ([0.15, 0.11, 0.10, 0.07, 0.06, 0.07, 0.07], 0.10),
        "tile_floor" => ([0.01, 0.01, 0.015, 0.02, 0.02, 0.02, 0.02], 0.05),
        "carpet" => ([0.02, 0.06, 0.14, 0.37, 0.60, 0.65, 0.65], 0.20),
        "acoustic_tile" => ([0.50, 0.70, 0.60, 0.70, 0.70, 0.50, 0.50], 0.20),
        "curtain" => ([0.07, 0.31, 0.49, 0.75, 0.70, 0.60, 0.60], 0.30),
        "furnished" => ([0.20, 0.25, 0.30, 0.35, 0.40, 0.40, 0.40], 0.50),
        _ => return None,
    };
    Some(Material::new(name, absorption, [scattering; crate::NUM_BANDS]))
}

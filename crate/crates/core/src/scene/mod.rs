//! Acoustic scene: geometry, materials, weighted speech sources, noise
//! sources and the boxes a receiver may be placed in.

mod config;
mod materials;
pub mod obj;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use config::{load_scene, load_scene_str, load_scene_unchecked, MeshDocument, SceneDocument};
pub use materials::starter_material;
pub use validate::{validate_scene, Violation, ViolationCode};

use crate::bands::{BandSpectrum, NUM_BANDS};
use crate::geometry::{covered_by_union, Aabb, Bvh, Triangle, Vec3};
use crate::sti::HearingModel;

/// Source level used when a region has neither a clip nor a spectrum, dB SPL at 1 m.
pub const DEFAULT_SOURCE_LEVEL_DB: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub absorption: [f64; NUM_BANDS],
    pub scattering: [f64; NUM_BANDS],
}

impl Material {
    pub fn new(name: impl Into<String>, absorption: [f64; NUM_BANDS], scattering: [f64; NUM_BANDS]) -> Self {
        Self { name: name.into(), absorption, scattering }
    }

    /// Same absorption and scattering in every band.
    pub fn uniform(name: impl Into<String>, absorption: f64, scattering: f64) -> Self {
        Self::new(name, [absorption; NUM_BANDS], [scattering; NUM_BANDS])
    }

    pub fn absorption_spectrum(&self) -> BandSpectrum {
        BandSpectrum::coefficients(self.absorption)
    }

    /// Mean absorption over the 125, 250 and 500 Hz bands (wave-solver band).
    pub fn low_band_absorption(&self) -> f64 {
        self.absorption[..3].iter().sum::<f64>() / 3.0
    }

    /// Mean scattering coefficient; rays share one direction across bands.
    pub fn mean_scattering(&self) -> f64 {
        self.scattering.iter().sum::<f64>() / NUM_BANDS as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshTriangle {
    pub triangle: Triangle,
    pub material: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub triangles: Vec<MeshTriangle>,
}

impl Mesh {
    pub fn push(&mut self, triangle: Triangle, material: usize) {
        self.triangles.push(MeshTriangle { triangle, material });
    }

    /// Planar quad `a b c d` as two triangles.
    pub fn push_quad(&mut self, a: Vec3, b: Vec3, c: Vec3, d: Vec3, material: usize) {
        self.push(Triangle::new(a, b, c), material);
        self.push(Triangle::new(a, c, d), material);
    }

    /// Axis-aligned rectangle in the plane `axis = at`, spanning `lo..hi` on the other two axes.
    pub fn push_rect(&mut self, axis: usize, at: f64, lo: [f64; 2], hi: [f64; 2], material: usize) {
        let (u, v) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let corner = |a: f64, b: f64| {
            let mut p = [0.0; 3];
            p[axis] = at;
            p[u] = a;
            p[v] = b;
            Vec3::from(p)
        };
        self.push_quad(corner(lo[0], lo[1]), corner(hi[0], lo[1]), corner(hi[0], hi[1]), corner(lo[0], hi[1]), material);
    }

    /// The six faces of a box, each with its own material: -x, +x, -y, +y, -z (floor), +z (ceiling).
    pub fn push_box_shell(&mut self, b: &Aabb, materials: [usize; 6]) {
        let (lo, hi) = (b.min, b.max);
        self.push_rect(0, lo.x, [lo.y, lo.z], [hi.y, hi.z], materials[0]);
        self.push_rect(0, hi.x, [lo.y, lo.z], [hi.y, hi.z], materials[1]);
        self.push_rect(1, lo.y, [lo.x, lo.z], [hi.x, hi.z], materials[2]);
        self.push_rect(1, hi.y, [lo.x, lo.z], [hi.x, hi.z], materials[3]);
        self.push_rect(2, lo.z, [lo.x, lo.y], [hi.x, hi.y], materials[4]);
        self.push_rect(2, hi.z, [lo.x, lo.y], [hi.x, hi.y], materials[5]);
    }

    pub fn bvh(&self) -> Bvh {
        Bvh::new(self.triangles.iter().map(|t| t.triangle).collect())
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.triangle.area()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRegion {
    #[serde(rename = "box")]
    pub region: Aabb,
    pub weight: f64,
    /// Mono WAV clip, path relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<String>,
    /// Source level per band, dB SPL at 1 m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<[f64; NUM_BANDS]>,
}

impl SourceRegion {
    pub fn new(region: Aabb, weight: f64) -> Self {
        Self { region, weight, clip: None, spectrum: None }
    }

    pub fn level(&self) -> BandSpectrum {
        BandSpectrum::db(self.spectrum.unwrap_or([DEFAULT_SOURCE_LEVEL_DB; NUM_BANDS]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSource {
    pub position: Vec3,
    /// dB SPL at 1 m per band.
    pub spectrum: [f64; NUM_BANDS],
}

impl NoiseSource {
    pub fn level(&self) -> BandSpectrum {
        BandSpectrum::db(self.spectrum)
    }
}

/// Solver and sampling settings. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// m/s.
    pub speed_of_sound: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Wave/geometric crossover frequency, Hz.
    pub crossover_hz: f64,
    /// Highest frequency the wave grid must resolve, Hz.
    pub wave_max_hz: f64,
    pub points_per_wavelength: f64,
    /// Set to false for geometric-only responses.
    pub wave: bool,
    pub rays: usize,
    pub max_order: usize,
    /// Energy histogram bin width, s.
    pub bin_width: f64,
    /// Length of every simulated response, s.
    pub rir_duration: f64,
    /// Upper bound on wave-grid nodes.
    pub max_cells: usize,
    /// Listener candidate spacing, m.
    pub listener_spacing: f64,
    pub sources_per_region: usize,
    pub hearing: HearingModel,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            speed_of_sound: 343.0,
            sample_rate: 32000.0,
            crossover_hz: 500.0,
            wave_max_hz: 500.0,
            points_per_wavelength: 8.0,
            wave: true,
            rays: 50_000,
            max_order: 2,
            bin_width: 1e-3,
            rir_duration: 1.0,
            max_cells: 40_000_000,
            listener_spacing: 0.1,
            sources_per_region: 4,
            hearing: HearingModel::STANDARD,
        }
    }
}

/// Mono audio at the scene sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

/// A loaded scene. Immutable after loading and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub mesh: Mesh,
    pub air: Vec<Aabb>,
    pub materials: Vec<Material>,
    pub sources: Vec<SourceRegion>,
    pub noise: Vec<NoiseSource>,
    pub listener_boxes: Vec<Aabb>,
    pub physics: Physics,
    /// Decoded clips keyed by the path written in the config.
    pub clips: BTreeMap<String, Clip>,
}

impl Scene {
    pub fn new(mesh: Mesh, air: Vec<Aabb>, materials: Vec<Material>) -> Self {
        Self {
            mesh,
            air,
            materials,
            sources: Vec::new(),
            noise: Vec::new(),
            listener_boxes: Vec::new(),
            physics: Physics::default(),
            clips: BTreeMap::new(),
        }
    }

    /// A closed rectangular room whose six faces share one material.
    pub fn shoebox(size: Vec3, material: Material) -> Self {
        let room = Aabb::new(Vec3::ZERO, size);
        let mut mesh = Mesh::default();
        mesh.push_box_shell(&room, [0; 6]);
        Self::new(mesh, vec![room], vec![material])
    }

    pub fn material_index(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name == name)
    }

    pub fn in_air(&self, p: Vec3) -> bool {
        self.air.iter().any(|b| b.contains(p))
    }

    pub fn box_in_air(&self, b: &Aabb) -> bool {
        covered_by_union(b, &self.air)
    }

    pub fn air_bounds(&self) -> Aabb {
        self.air.iter().fold(Aabb::empty(), |acc, b| acc.union(b))
    }

    /// Volume of the union of the air boxes, m³.
    pub fn air_volume(&self) -> f64 {
        let axis_cuts = |axis: usize| {
            let mut c: Vec<f64> = self.air.iter().flat_map(|b| [b.min[axis], b.max[axis]]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        };
        let (cx, cy, cz) = (axis_cuts(0), axis_cuts(1), axis_cuts(2));
        let mut volume = 0.0;
        for x in cx.windows(2) {
            for y in cy.windows(2) {
                for z in cz.windows(2) {
                    let mid = Vec3::new(0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1]), 0.5 * (z[0] + z[1]));
                    if self.in_air(mid) {
                        volume += (x[1] - x[0]) * (y[1] - y[0]) * (z[1] - z[0]);
                    }
                }
            }
        }
        volume
    }

    /// Level spectrum of source region `i`: measured from its clip when present.
    pub fn source_level(&self, i: usize) -> BandSpectrum {
        let region = &self.sources[i];
        match region.clip.as_ref().and_then(|c| self.clips.get(c)) {
            Some(clip) => crate::io::clip_band_levels(clip),
            None => region.level(),
        }
    }
}

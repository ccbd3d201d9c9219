//! High-band geometric acoustics: specular image sources for the early part
//! and stochastic ray tracing for the energy decay.

mod image;
mod synth;
mod trace;

pub use image::{image_paths, image_source_rir, ImagePath};
pub use synth::{band_partition, histogram_to_rir, render_paths, EARLY_WINDOW};
pub use trace::{detector_radius, trace_histogram, EnergyHistogram, KILL_ENERGY, MAX_PATH_TIME};

use crate::bands::NUM_BANDS;
use crate::error::Result;
use crate::geometry::{Bvh, Triangle, Vec3, GEOM_EPS};
use crate::rir::ImpulseResponse;
use crate::scene::Scene;

/// A set of coplanar triangles.
#[derive(Debug, Clone)]
pub struct Plane {
    /// Unit normal with its first nonzero component positive.
    pub normal: Vec3,
    /// `normal · x = offset` on the plane.
    pub offset: f64,
    pub triangles: Vec<usize>,
}

impl Plane {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }
}

/// Scene geometry prepared for repeated geometric queries.
#[derive(Debug, Clone)]
pub struct GeoContext {
    pub bvh: Bvh,
    pub planes: Vec<Plane>,
    pub absorption: Vec<[f64; NUM_BANDS]>,
    pub scattering: Vec<f64>,
    pub speed_of_sound: f64,
}

fn canonical_normal(t: &Triangle) -> Option<Vec3> {
    let n = t.area_normal();
    if n.length() < 1e-12 {
        return None;
    }
    let n = n.normalized();
    let flip = [n.x, n.y, n.z].into_iter().find(|v| v.abs() > 1e-9).is_some_and(|v| v < 0.0);
    Some(if flip { -n } else { n })
}

impl GeoContext {
    pub fn new(scene: &Scene) -> Self {
        let tris = &scene.mesh.triangles;
        let mut planes: Vec<Plane> = Vec::new();
        for (i, t) in tris.iter().enumerate() {
            let Some(n) = canonical_normal(&t.triangle) else { continue };
            let offset = n.dot(t.triangle.v[0]);
            let tol = 1e-6;
            match planes.iter_mut().find(|p| (p.normal - n).length() < tol && (p.offset - offset).abs() < tol) {
                Some(p) => p.triangles.push(i),
                None => planes.push(Plane { normal: n, offset, triangles: vec![i] }),
            }
        }
        Self {
            bvh: scene.mesh.bvh(),
            planes,
            absorption: tris.iter().map(|t| scene.materials[t.material].absorption).collect(),
            scattering: tris.iter().map(|t| scene.materials[t.material].mean_scattering()).collect(),
            speed_of_sound: scene.physics.speed_of_sound,
        }
    }

    /// Triangle of `plane` containing the on-plane point `p`.
    fn triangle_at(&self, plane: &Plane, p: Vec3) -> Option<usize> {
        plane
            .triangles
            .iter()
            .copied()
            .find(|&t| self.bvh.triangles()[t].contains_coplanar(p, GEOM_EPS.max(1e-9 * p.length())))
    }
}

/// Seed for one source/listener pair, derived from the run seed and the
/// exact coordinates so a pair always gets the same stream.
pub fn pair_seed(seed: u64, source: Vec3, listener: Vec3) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [source.x, source.y, source.z, listener.x, listener.y, listener.z] {
        h = splitmix(h ^ v.to_bits());
    }
    h
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Full high-band response for one pair: image sources up to the scene's
/// `max_order`, ray-traced late energy, and noise synthesis.
pub fn geometric_rir(scene: &Scene, ctx: &GeoContext, source: Vec3, listener: Vec3, seed: u64) -> Result<ImpulseResponse> {
    let p = &scene.physics;
    let paths = image_paths(ctx, source, listener, p.max_order);
    let hist = trace::trace_with(ctx, source, listener, p.rays, seed, p.bin_width, p.rir_duration)?;
    histogram_to_rir(&hist, &paths, p.sample_rate, seed)
}

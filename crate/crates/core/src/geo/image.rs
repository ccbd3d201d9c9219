use super::{GeoContext, Plane};
use crate::bands::NUM_BANDS;
use crate::geometry::Vec3;
use crate::rir::ImpulseResponse;
use crate::scene::Scene;

/// One specular path from source to listener.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePath {
    /// Arrival time, s.
    pub time: f64,
    /// Unfolded path length, m.
    pub distance: f64,
    /// Pressure amplitude per band: `(1/d)·Π√(1-α)`.
    pub amplitude: [f64; NUM_BANDS],
    /// Reflecting planes in order from the source.
    pub planes: Vec<usize>,
}

/// All visible image sources up to `max_order` reflections, sorted by arrival time.
pub fn image_paths(ctx: &GeoContext, source: Vec3, listener: Vec3, max_order: usize) -> Vec<ImagePath> {
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(max_order);
    let mut images = Vec::with_capacity(max_order);
    recurse(ctx, source, listener, max_order, &mut seq, &mut images, &mut out);
    out.sort_by(|a, b| a.time.total_cmp(&b.time).then_with(|| a.planes.cmp(&b.planes)));
    out
}

fn recurse(
    ctx: &GeoContext,
    source: Vec3,
    listener: Vec3,
    max_order: usize,
    seq: &mut Vec<usize>,
    images: &mut Vec<Vec3>,
    out: &mut Vec<ImagePath>,
) {
    if let Some(path) = validate(ctx, source, listener, seq, images) {
        out.push(path);
    }
    if seq.len() == max_order {
        return;
    }
    let last_image = images.last().copied().unwrap_or(source);
    for (pi, plane) in ctx.planes.iter().enumerate() {
        if seq.last() == Some(&pi) || plane.signed_distance(last_image).abs() < 1e-9 {
            continue;
        }
        seq.push(pi);
        images.push(plane.mirror(last_image));
        recurse(ctx, source, listener, max_order, seq, images, out);
        seq.pop();
        images.pop();
    }
}

/// Backtracks from the listener through the reflection sequence, checking
/// that every reflection point lies on a triangle and every leg is unoccluded.
/// A reflection point on an edge shared with a surface of another plane is
/// treated as occluded.
fn validate(ctx: &GeoContext, source: Vec3, listener: Vec3, seq: &[usize], images: &[Vec3]) -> Option<ImagePath> {
    let mut amplitude = [1.0; NUM_BANDS];
    let mut point = listener;
    let mut prev_plane: &[usize] = &[];
    for r in (0..seq.len()).rev() {
        let plane: &Plane = &ctx.planes[seq[r]];
        let target = images[r];
        let (d0, d1) = (plane.signed_distance(point), plane.signed_distance(target));
        if d0 * d1 >= 0.0 {
            return None;
        }
        let t = d0 / (d0 - d1);
        let hit = point + (target - point) * t;
        let tri = ctx.triangle_at(plane, hit)?;
        let skip: Vec<usize> = prev_plane.iter().chain(&plane.triangles).copied().collect();
        if ctx.bvh.closed_segment_blocked(point, hit, &skip) {
            return None;
        }
        for (a, alpha) in amplitude.iter_mut().zip(&ctx.absorption[tri]) {
            *a *= (1.0 - alpha).max(0.0).sqrt();
        }
        point = hit;
        prev_plane = &plane.triangles;
    }
    if ctx.bvh.closed_segment_blocked(point, source, prev_plane) {
        return None;
    }
    let image = images.last().copied().unwrap_or(source);
    let distance = image.distance(listener);
    if distance <= 0.0 {
        return None;
    }
    for a in &mut amplitude {
        *a /= distance;
    }
    Some(ImagePath { time: distance / ctx.speed_of_sound, distance, amplitude, planes: seq.to_vec() })
}

/// Image-source response: every visible path rendered as a band-weighted
/// impulse at the nearest sample, `t0 = 0`, `rir_duration` long.
pub fn image_source_rir(scene: &Scene, source: Vec3, listener: Vec3, max_order: usize) -> ImpulseResponse {
    let ctx = GeoContext::new(scene);
    let paths = image_paths(&ctx, source, listener, max_order);
    let len = (scene.physics.rir_duration * scene.physics.sample_rate).round() as usize;
    super::render_paths(&paths, scene.physics.sample_rate, len)
}

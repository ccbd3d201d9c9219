use crate::error::{Error, Result};
use crate::geometry::{Bvh, Vec3};
use crate::scene::Scene;

/// Points per wavelength below which dispersion error becomes noticeable.
pub const RECOMMENDED_PPW: f64 = 8.0;
/// Fraction of the 3-D Courant limit used for the time step.
pub const COURANT_SAFETY: f64 = 0.9;

/// Grid node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Air,
    /// Air node with at least one neighbor link cut by a surface; carries the
    /// material of the first cut link (`None` where the air box itself ends).
    Boundary(Option<usize>),
    Solid,
}

/// Neighbor offsets in the order -x, +x, -y, +y, -z, +z.
pub(super) const DIRECTIONS: [[i64; 3]; 6] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];

#[derive(Debug, Clone, Copy)]
pub(super) struct BoundaryNode {
    pub index: usize,
    /// Bit `d` set when the link in `DIRECTIONS[d]` is open.
    pub open: u8,
    pub open_count: f64,
    /// Sum over cut links of `λ / (2ξ)`.
    pub loss: f64,
}

/// Uniform cell-centred FDTD grid over the scene's air volume.
///
/// Node `(i, j, k)` sits at `origin + Δx·(i, j, k)` with `origin` half a cell
/// inside the air bounds. Storage carries one extra layer of solid nodes on
/// every side.
#[derive(Debug, Clone)]
pub struct SimGrid {
    /// Highest frequency the grid was sized for, Hz.
    pub f_max: f64,
    pub spacing: f64,
    pub dims: [usize; 3],
    pub dt: f64,
    pub c: f64,
    pub origin: Vec3,
    pub(super) padded: [usize; 3],
    pub(super) class: Vec<CellClass>,
    pub(super) interior: Vec<bool>,
    pub(super) boundary: Vec<BoundaryNode>,
    pub(super) solid: Vec<usize>,
}

/// Diffuse-field (Paris) absorption of a locally reacting surface with real
/// specific impedance `xi`.
pub fn random_incidence_absorption(xi: f64) -> f64 {
    if !xi.is_finite() {
        return 0.0;
    }
    let steps = 256;
    let h = std::f64::consts::FRAC_PI_2 / steps as f64;
    let f = |theta: f64| {
        let z = xi * theta.cos();
        let r = (z - 1.0) / (z + 1.0);
        (1.0 - r * r) * (2.0 * theta).sin()
    };
    let mut acc = f(0.0) + f(std::f64::consts::FRAC_PI_2);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Impedance with the largest diffuse-field absorption (about 0.951).
const XI_MAX_ABSORPTION: f64 = 1.566925;

/// Specific impedance whose diffuse-field absorption equals `alpha`, on the
/// high-impedance branch; infinite for rigid, [`XI_MAX_ABSORPTION`] when
/// `alpha` exceeds what a locally reacting surface can absorb.
pub fn impedance_from_absorption(alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return f64::INFINITY;
    }
    if alpha >= random_incidence_absorption(XI_MAX_ABSORPTION) {
        return XI_MAX_ABSORPTION;
    }
    let (mut lo, mut hi) = (XI_MAX_ABSORPTION.ln(), 1e9f64.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if random_incidence_absorption(mid.exp()) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

impl SimGrid {
    /// Courant number `cΔt/Δx`.
    pub fn courant(&self) -> f64 {
        self.c * self.dt / self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn air_node_count(&self) -> usize {
        self.class.iter().filter(|c| !matches!(c, CellClass::Solid)).count()
    }

    pub(super) fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        let [px, py, _] = self.padded;
        (i + 1) + px * ((j + 1) + py * (k + 1))
    }

    /// Position of grid node `(i, j, k)`.
    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn cell_class(&self, i: usize, j: usize, k: usize) -> CellClass {
        self.class[self.flat(i, j, k)]
    }

    pub(super) fn is_air_flat(&self, idx: usize) -> bool {
        !matches!(self.class[idx], CellClass::Solid)
    }

    /// Trilinear weights of the air nodes around `p`, renormalized to sum to 1.
    pub fn stencil(&self, p: Vec3) -> Result<Vec<(usize, f64)>> {
        let rel = (p - self.origin) / self.spacing;
        let base = [rel.x.floor(), rel.y.floor(), rel.z.floor()];
        let frac = [rel.x - base[0], rel.y - base[1], rel.z - base[2]];
        let mut out = Vec::with_capacity(8);
        for corner in 0..8 {
            let mut w = 1.0;
            let mut ijk = [0i64; 3];
            for a in 0..3 {
                let bit = (corner >> a) & 1;
                ijk[a] = base[a] as i64 + bit as i64;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w <= 0.0 || (0..3).any(|a| ijk[a] < 0 || ijk[a] >= self.dims[a] as i64) {
                continue;
            }
            let idx = self.flat(ijk[0] as usize, ijk[1] as usize, ijk[2] as usize);
            if self.is_air_flat(idx) {
                out.push((idx, w));
            }
        }
        let total: f64 = out.iter().map(|(_, w)| w).sum();
        if total < 1e-9 {
            return Err(Error::Grid(format!("point ({:.3}, {:.3}, {:.3}) has no air node nearby", p.x, p.y, p.z)));
        }
        for (_, w) in &mut out {
            *w /= total;
        }
        Ok(out)
    }
}

/// Builds the simulation grid for frequencies up to `f_max`.
pub fn build_grid(scene: &Scene, f_max: f64, points_per_wavelength: f64) -> Result<SimGrid> {
    if !(f_max > 0.0) || !(points_per_wavelength > 0.0) {
        return Err(Error::InvalidArgument(format!("f_max ({f_max}) and points per wavelength ({points_per_wavelength}) must be positive")));
    }
    if scene.air.is_empty() {
        return Err(Error::Grid("air volume is empty".into()));
    }
    if points_per_wavelength < RECOMMENDED_PPW {
        log::warn!("{points_per_wavelength:.2} points per wavelength is below the recommended {RECOMMENDED_PPW}; expect dispersion error");
    }
    let c = scene.physics.speed_of_sound;
    let spacing = c / (f_max * points_per_wavelength);
    let bounds = scene.air_bounds();
    let extent = bounds.extent();
    let dims = [0, 1, 2].map(|a| (extent[a] / spacing - 1e-9).ceil().max(0.0) as usize);
    if dims.contains(&0) {
        return Err(Error::Grid(format!("air volume is smaller than one cell of {spacing:.4} m")));
    }
    let padded = dims.map(|d| d + 2);
    let total: usize = padded.iter().product();
    if total > scene.physics.max_cells {
        return Err(Error::Grid(format!("{total} cells exceed the configured cap of {}", scene.physics.max_cells)));
    }
    let dt = COURANT_SAFETY * spacing / (c * 3f64.sqrt());
    let origin = bounds.min + Vec3::splat(0.5 * spacing);

    let mut grid = SimGrid {
        f_max,
        spacing,
        dims,
        dt,
        c,
        origin,
        padded,
        class: vec![CellClass::Solid; total],
        interior: vec![false; total],
        boundary: Vec::new(),
        solid: Vec::new(),
    };
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                if scene.in_air(grid.node_position(i, j, k)) {
                    let idx = grid.flat(i, j, k);
                    grid.class[idx] = CellClass::Air;
                }
            }
        }
    }
    classify_links(scene, &mut grid);
    Ok(grid)
}

fn classify_links(scene: &Scene, grid: &mut SimGrid) {
    let bvh: Bvh = scene.mesh.bvh();
    let lambda = grid.courant();
    let [px, py, _] = grid.padded;
    let stride = [1i64, px as i64, (px * py) as i64];
    let offset = |d: usize| DIRECTIONS[d].iter().zip(stride).map(|(o, s)| o * s).sum::<i64>();
    let xi: Vec<f64> = scene.materials.iter().map(|m| impedance_from_absorption(m.low_band_absorption())).collect();

    for k in 0..grid.dims[2] {
        for j in 0..grid.dims[1] {
            for i in 0..grid.dims[0] {
                let idx = grid.flat(i, j, k);
                if !grid.is_air_flat(idx) {
                    continue;
                }
                let here = grid.node_position(i, j, k);
                let mut open = 0u8;
                let mut loss = 0.0;
                let mut first_material: Option<usize> = None;
                for (d, dir) in DIRECTIONS.iter().enumerate() {
                    let nb = (idx as i64 + offset(d)) as usize;
                    let step = Vec3::new(dir[0] as f64, dir[1] as f64, dir[2] as f64) * grid.spacing;
                    let hit = bvh.intersect(here, step, 0.0, 1.0);
                    if hit.is_none() && grid.is_air_flat(nb) {
                        open |= 1 << d;
                        continue;
                    }
                    let material = hit.map(|h| scene.mesh.triangles[h.triangle].material);
                    first_material = first_material.or(material);
                    if let Some(m) = material {
                        loss += lambda / (2.0 * xi[m]);
                    }
                }
                if open == 0b11_1111 {
                    grid.interior[idx] = true;
                } else {
                    grid.class[idx] = CellClass::Boundary(first_material);
                    grid.boundary.push(BoundaryNode { index: idx, open, open_count: open.count_ones() as f64, loss });
                }
            }
        }
    }
    grid.solid = (0..grid.class.len()).filter(|&i| !grid.is_air_flat(i)).collect();
}

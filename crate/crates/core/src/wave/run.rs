use std::io::Write;

use super::grid::{SimGrid, DIRECTIONS};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// `a` with `a·e^(1-a) = 1e-3`: puts the pulse spectrum 60 dB under its peak at `f_max`.
const PULSE_SHAPE: f64 = 10.233413476451442;
/// Abort when |p| exceeds this multiple of the largest per-step injection.
const BLOWUP_FACTOR: f64 = 1e6;

/// Ricker pulse (negated second derivative of a Gaussian): zero mean and zero
/// net injected volume, so closed rooms do not drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub amplitude: f64,
    pub sigma: f64,
    /// Time of the pulse centre, s.
    pub delay: f64,
}

impl Pulse {
    /// Unit pulse whose spectrum is 60 dB down at `f_max` relative to its peak.
    pub fn band_limited(f_max: f64) -> Self {
        let sigma = (2.0 * PULSE_SHAPE).sqrt() / (2.0 * std::f64::consts::PI * f_max);
        Self { amplitude: 1.0, sigma, delay: 7.0 * sigma }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn value(&self, t: f64) -> f64 {
        let tau = (t - self.delay) / self.sigma;
        let tau2 = tau * tau;
        self.amplitude * (1.0 - tau2) * (-0.5 * tau2).exp()
    }

    /// Time after which the pulse is negligible.
    pub fn length(&self) -> f64 {
        2.0 * self.delay
    }
}

/// Pressure traces recorded at the probes, one sample per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveResult {
    pub traces: Vec<Vec<f64>>,
    pub dt: f64,
    pub source: Vec3,
    /// Pulse value at every step; a trace is this pulse convolved with the response.
    pub forcing: Vec<f64>,
}

/// Leapfrog state of one simulation; owns its pressure buffers.
pub struct WaveField<'g> {
    grid: &'g SimGrid,
    prev: Vec<f64>,
    cur: Vec<f64>,
    scratch: Vec<f64>,
    lambda2: f64,
    step: usize,
}

impl<'g> WaveField<'g> {
    pub fn new(grid: &'g SimGrid) -> Self {
        let n = grid.class.len();
        Self {
            grid,
            prev: vec![0.0; n],
            cur: vec![0.0; n],
            scratch: vec![0.0; grid.boundary.len()],
            lambda2: grid.courant().powi(2),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Current pressure interpolated at a stencil from [`SimGrid::stencil`].
    pub fn sample(&self, stencil: &[(usize, f64)]) -> f64 {
        stencil.iter().map(|&(i, w)| w * self.cur[i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.cur.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Advances one step, adding `amount` distributed over `inject` to the new field.
    pub fn advance(&mut self, inject: &[(usize, f64)], amount: f64) {
        let g = self.grid;
        let l2 = self.lambda2;
        let [px, py, pz] = g.padded;
        let plane = px * py;
        let offsets = DIRECTIONS.map(|d| d[0] as isize + d[1] as isize * px as isize + d[2] as isize * plane as isize);

        for (slot, b) in self.scratch.iter_mut().zip(&g.boundary) {
            let i = b.index;
            let mut sum = 0.0;
            for (d, off) in offsets.iter().enumerate() {
                if b.open & (1 << d) != 0 {
                    sum += self.cur[(i as isize + off) as usize];
                }
            }
            *slot = ((2.0 - b.open_count * l2) * self.cur[i] + l2 * sum - (1.0 - b.loss) * self.prev[i]) / (1.0 + b.loss);
        }

        let cur = &self.cur;
        let update_plane = |(z, next): (usize, &mut [f64])| {
            if z == 0 || z + 1 == pz {
                return;
            }
            let base = z * plane;
            for y in 1..py - 1 {
                let row = base + y * px;
                for x in 1..px - 1 {
                    let i = row + x;
                    let c = cur[i];
                    let lap = cur[i - 1] + cur[i + 1] + cur[i - px] + cur[i + px] + cur[i - plane] + cur[i + plane] - 6.0 * c;
                    let local = i - base;
                    next[local] = 2.0 * c - next[local] + l2 * lap;
                }
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.prev.par_chunks_mut(plane).enumerate().for_each(update_plane);
        }
        #[cfg(not(feature = "parallel"))]
        self.prev.chunks_mut(plane).enumerate().for_each(update_plane);

        for (v, b) in self.scratch.iter().zip(&g.boundary) {
            self.prev[b.index] = *v;
        }
        for &i in &g.solid {
            self.prev[i] = 0.0;
        }
        if amount != 0.0 {
            for &(i, w) in inject {
                self.prev[i] += w * amount;
            }
        }
        std::mem::swap(&mut self.prev, &mut self.cur);
        self.step += 1;
    }

    /// Discrete energy between the last two time levels; exactly conserved by
    /// the update in rigid rooms once forcing stops.
    pub fn energy(&self) -> f64 {
        let g = self.grid;
        let [px, py, _] = g.padded;
        let forward = [1usize, px, px * py];
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        let mut open_bits = vec![0u8; g.class.len()];
        for (i, &interior) in g.interior.iter().enumerate() {
            if interior {
                open_bits[i] = 0b11_1111;
            }
        }
        for b in &g.boundary {
            open_bits[b.index] = b.open;
        }
        for (i, &bits) in open_bits.iter().enumerate() {
            if !g.is_air_flat(i) {
                continue;
            }
            let dp = self.cur[i] - self.prev[i];
            kinetic += dp * dp;
            for (a, step) in forward.iter().enumerate() {
                if bits & (1 << (2 * a + 1)) != 0 {
                    let j = i + step;
                    potential += (self.cur[i] - self.cur[j]) * (self.prev[i] - self.prev[j]);
                }
            }
        }
        0.5 * kinetic + 0.5 * self.lambda2 * potential
    }
}

/// Converts a pressure-source waveform into per-step field increments: a
/// point source whose free-field pressure at distance r is `s(t - r/c) / r`.
fn injection_scale(grid: &SimGrid) -> f64 {
    4.0 * std::f64::consts::PI * grid.c * grid.c * grid.dt * grid.dt / grid.spacing.powi(3)
}

fn injection_stencil(grid: &SimGrid, emit_at: Vec3) -> Result<Vec<(usize, f64)>> {
    let mut stencil = grid.stencil(emit_at)?;
    for (i, w) in &mut stencil {
        if let Some(b) = grid.boundary.iter().find(|b| b.index == *i) {
            *w /= 1.0 + b.loss;
        }
    }
    Ok(stencil)
}

/// Runs the default band-limited pulse from `emit_at` for `duration` seconds.
pub fn run_wave(grid: &SimGrid, emit_at: Vec3, duration: f64, probes: &[Vec3]) -> Result<WaveResult> {
    run_wave_with(grid, emit_at, duration, probes, &Pulse::band_limited(grid.f_max))
}

pub fn run_wave_with(grid: &SimGrid, emit_at: Vec3, duration: f64, probes: &[Vec3], pulse: &Pulse) -> Result<WaveResult> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration {duration} must be positive")));
    }
    let inject = injection_stencil(grid, emit_at)?;
    let stencils = probes.iter().map(|&p| grid.stencil(p)).collect::<Result<Vec<_>>>()?;
    let steps = (duration / grid.dt).ceil() as usize;
    let scale = injection_scale(grid);
    let forcing: Vec<f64> = (0..steps).map(|n| pulse.value(n as f64 * grid.dt)).collect();
    let peak = forcing.iter().fold(0.0f64, |m, v| m.max(v.abs())) * scale;
    let limit = BLOWUP_FACTOR * peak;

    let mut field = WaveField::new(grid);
    let mut traces = vec![vec![0.0; steps]; probes.len()];
    for n in 0..steps.saturating_sub(1) {
        field.advance(&inject, scale * forcing[n]);
        for (trace, st) in traces.iter_mut().zip(&stencils) {
            trace[n + 1] = field.sample(st);
        }
        if n % 64 == 63 {
            let m = field.max_abs();
            if !m.is_finite() || (peak > 0.0 && m > limit) {
                return Err(Error::Unstable { step: n + 1, magnitude: m });
            }
        }
    }
    Ok(WaveResult { traces, dt: grid.dt, source: emit_at, forcing })
}

/// Pressure over the whole grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub dims: [usize; 3],
    pub spacing: f64,
    pub dt: f64,
    pub time: f64,
    /// x fastest, then y, then z.
    pub values: Vec<f32>,
}

/// Runs the default pulse from `emit_at` until `time` and captures the field.
pub fn field_snapshot(grid: &SimGrid, emit_at: Vec3, time: f64) -> Result<FieldSnapshot> {
    let pulse = Pulse::band_limited(grid.f_max);
    let inject = injection_stencil(grid, emit_at)?;
    let scale = injection_scale(grid);
    let steps = (time / grid.dt).round().max(0.0) as usize;
    let mut field = WaveField::new(grid);
    for n in 0..steps {
        field.advance(&inject, scale * pulse.value(n as f64 * grid.dt));
    }
    let [nx, ny, nz] = grid.dims;
    let mut values = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                values.push(field.cur[grid.flat(i, j, k)] as f32);
            }
        }
    }
    Ok(FieldSnapshot { dims: grid.dims, spacing: grid.spacing, dt: grid.dt, time: steps as f64 * grid.dt, values })
}

impl FieldSnapshot {
    /// Raw little-endian dump: magic `EPWF`, u32 version (1), u32 nx, ny, nz,
    /// f32 spacing, f32 dt, f32 time, then nx·ny·nz f32 pressures.
    pub fn write_raw(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(b"EPWF")?;
        w.write_all(&1u32.to_le_bytes())?;
        for d in self.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for v in [self.spacing, self.dt, self.time] {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

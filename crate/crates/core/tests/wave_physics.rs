use echoplace::dsp;
use echoplace::geo::{geometric_rir, GeoContext};
use echoplace::sti::octave_filter;
use echoplace::scene::{Material, Scene};
use echoplace::wave::{build_grid, deconvolve, run_wave, Pulse, WaveField, WaveSolver, WAVE_T0};
use echoplace::Vec3;

fn rigid(size: Vec3) -> Scene {
    Scene::shoebox(size, Material::uniform("rigid", 0.0, 0.0))
}

/// Frequency of the largest spectral peak of `x` (sampled every `dt`) in `lo..hi`,
/// refined by parabolic interpolation.
fn spectral_peak(x: &[f64], dt: f64, lo: f64, hi: f64) -> f64 {
    let n = dsp::next_pow2(x.len()) * 8;
    let spec = dsp::forward(x, n);
    let fs = 1.0 / dt;
    let k_lo = (lo / fs * n as f64) as usize;
    let k_hi = (hi / fs * n as f64) as usize;
    let mag = |k: usize| spec[k].norm();
    let k = (k_lo..=k_hi).max_by(|&a, &b| mag(a).total_cmp(&mag(b))).unwrap();
    let (a, b, c) = (mag(k - 1).ln(), mag(k).ln(), mag(k + 1).ln());
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + shift) * fs / n as f64
}

fn duct_mode(ppw: f64) -> f64 {
    let scene = rigid(Vec3::new(3.43, 0.3, 0.3));
    let grid = build_grid(&scene, 500.0, ppw).unwrap();
    let r = run_wave(&grid, Vec3::new(0.2, 0.15, 0.15), 2.0, &[Vec3::new(3.2, 0.15, 0.15)]).unwrap();
    spectral_peak(&r.traces[0], r.dt, 30.0, 75.0)
}

#[test]
fn rigid_duct_resonates_at_c_over_2l() {
    let f = duct_mode(8.0);
    assert!((f - 50.0).abs() / 50.0 < 0.02, "{f}");
    let finer = duct_mode(16.0);
    assert!((finer - f).abs() / f < 0.01, "{f} vs {finer}");
}

#[test]
fn free_field_arrival_is_r_over_c() {
    let scene = Scene::shoebox(Vec3::new(4.0, 4.0, 4.0), Material::uniform("anechoic", 1.0, 0.0));
    let grid = build_grid(&scene, 500.0, 8.0).unwrap();
    let src = Vec3::new(1.2, 2.0, 2.0);
    let probe = src + Vec3::new(1.715, 0.0, 0.0);
    let pulse = Pulse::band_limited(500.0);
    let r = run_wave(&grid, src, 0.1, &[probe]).unwrap();
    let peak = r.traces[0].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let arrival = peak as f64 * r.dt - pulse.delay;
    assert!((arrival - 0.005).abs() <= r.dt, "{arrival}");

    let fs = 32000.0;
    let h = deconvolve(&r.traces[0], &r.forcing, r.dt, 500.0, fs, WAVE_T0, 2400);
    let i = h.peak_index().unwrap();
    assert!((h.time_of(i) - 0.005).abs() <= r.dt, "{}", h.time_of(i));
}

#[test]
fn swapping_source_and_listener_keeps_the_response() {
    let mut scene = rigid(Vec3::new(2.0, 1.5, 1.2));
    scene.physics.rir_duration = 0.3;
    let solver = WaveSolver::new(&scene).unwrap();
    let a = Vec3::new(0.43, 0.61, 0.52);
    let b = Vec3::new(1.58, 1.07, 0.83);
    let ab = &solver.rirs(a, &[b]).unwrap()[0];
    let ba = &solver.rirs(b, &[a]).unwrap()[0];
    let diff: f64 = ab.samples.iter().zip(&ba.samples).map(|(x, y)| (x - y).powi(2)).sum();
    let rel = (diff / ab.energy()).sqrt();
    assert!(rel < 0.01, "{rel}");
}

#[test]
fn rigid_box_conserves_energy_and_stays_bounded() {
    let scene = rigid(Vec3::new(1.5, 1.2, 1.0));
    let grid = build_grid(&scene, 500.0, 8.0).unwrap();
    let pulse = Pulse::band_limited(500.0);
    let inject = grid.stencil(Vec3::new(0.4, 0.5, 0.3)).unwrap();
    let scale = 4.0 * std::f64::consts::PI * (grid.c * grid.dt).powi(2) / grid.spacing.powi(3);
    let mut field = WaveField::new(&grid);
    let steps = (1.0 / grid.dt) as usize;
    let settle = (pulse.length() / grid.dt).ceil() as usize;
    let mut reference = None;
    let mut max_p = 0.0f64;
    for n in 0..steps {
        field.advance(&inject, scale * pulse.value(n as f64 * grid.dt));
        max_p = max_p.max(field.max_abs());
        if n == settle {
            reference = Some(field.energy());
        }
        if n > settle && (n as f64 * grid.dt) <= 0.5 + pulse.length() {
            let e = field.energy();
            let e0 = reference.unwrap();
            assert!((e - e0).abs() <= 0.01 * e0, "step {n}: {e} vs {e0}");
        }
    }
    assert!(max_p <= 1e3 * scale, "{max_p}");
}

#[test]
fn coincident_source_and_listener_peaks_at_zero() {
    let mut scene = Scene::shoebox(Vec3::new(2.0, 2.0, 2.0), Material::uniform("m", 0.5, 0.1));
    scene.physics.rir_duration = 0.05;
    let p = Vec3::new(0.97, 1.03, 1.01);
    let h = &WaveSolver::new(&scene).unwrap().rirs(p, &[p]).unwrap()[0];
    let t = h.time_of(h.peak_index().unwrap());
    assert!(t.abs() < 0.5e-3, "{t}");
}

#[test]
fn wave_and_geometric_band_levels_agree() {
    let mut scene = Scene::shoebox(Vec3::new(4.0, 3.0, 2.5), Material::uniform("m", 0.3, 0.2));
    scene.physics.rir_duration = 0.4;
    scene.physics.rays = 4000;
    let (s, l) = (Vec3::new(1.2, 1.0, 1.2), Vec3::new(2.9, 2.1, 1.1));
    let wave = WaveSolver::new(&scene).unwrap().rirs(l, &[s]).unwrap().remove(0);
    let ctx = GeoContext::new(&scene);
    let geo = geometric_rir(&scene, &ctx, s, l, 4).unwrap();
    let gw = octave_filter(&wave).unwrap().gains();
    let gg = octave_filter(&geo).unwrap().gains();
    for k in 0..2 {
        let diff = 10.0 * (gw.values[k] / gg.values[k]).log10();
        assert!(diff.abs() < 3.0, "band {k}: wave {:.1} dB vs geometric {:.1} dB", 10.0 * gw.values[k].log10(), 10.0 * gg.values[k].log10());
    }
}

use echoplace::dsp::{butterworth2_highpass_power, butterworth2_lowpass_power};
use echoplace::hybrid::{convolve_clip, crossover_combine};
use echoplace::sti::{mtf, noise_factor, sti_for_source, sti_from_mtf, HearingModel, MtfMatrix, MALE};
use echoplace::{BandSpectrum, ImpulseResponse, NUM_BANDS};
use proptest::prelude::*;

const FS: f64 = 32000.0;

/// Exponentially decaying noise with reverberation time `t60`.
fn decaying(t60: f64, seed: u64, len: usize) -> ImpulseResponse {
    let mut s = seed | 1;
    let samples = (0..len)
        .map(|i| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let u = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            u * (-6.907755 * i as f64 / FS / t60).exp()
        })
        .collect();
    ImpulseResponse::new(samples, FS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_noise_never_raises_sti(t60 in 0.2f64..1.5, seed in 0u64..1000, n1 in 0.0f64..70.0, extra in 0.0f64..30.0) {
        let h = decaying(t60, seed, (0.8 * FS) as usize);
        let speech = BandSpectrum::flat_db(65.0);
        let quiet = sti_for_source(&h, &speech, &BandSpectrum::flat_db(n1).to_energy(), HearingModel::STANDARD).unwrap();
        let loud = sti_for_source(&h, &speech, &BandSpectrum::flat_db(n1 + extra).to_energy(), HearingModel::STANDARD).unwrap();
        prop_assert!(loud.sti <= quiet.sti + 1e-12);
    }

    #[test]
    fn noiseless_sti_ignores_response_amplitude(t60 in 0.2f64..1.5, seed in 0u64..1000, gain in 1e-3f64..1e3) {
        let h = decaying(t60, seed, (0.8 * FS) as usize);
        let a = echoplace::sti::sti_noiseless(&h).unwrap().sti;
        let b = echoplace::sti::sti_noiseless(&h.scaled(gain)).unwrap().sti;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn sti_lies_in_the_unit_interval(values in proptest::collection::vec(0.0f64..1.0, 14 * NUM_BANDS)) {
        let mut m = MtfMatrix::uniform(0.0);
        for (k, row) in m.m.iter_mut().enumerate() {
            row.copy_from_slice(&values[14 * k..14 * (k + 1)]);
        }
        let s = sti_from_mtf(&m, &MALE).sti;
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn noise_factor_is_monotone(a in -40.0f64..60.0, d in 0.0f64..20.0) {
        prop_assert!(noise_factor(a) <= noise_factor(a + d));
        prop_assert!((0.0..=1.0).contains(&noise_factor(a)));
    }

    #[test]
    fn longer_decay_transfers_less_modulation(t60 in 0.2f64..1.0, ratio in 1.2f64..3.0) {
        let env = |t: f64| -> Vec<f64> { (0..(2.0 * t * FS) as usize).map(|i| (-6.907755 * i as f64 / FS / t).exp()).collect() };
        let short = mtf(&env(t60), FS, f64::INFINITY);
        let long = mtf(&env(t60 * ratio), FS, f64::INFINITY);
        for (s, l) in short.iter().zip(&long) {
            prop_assert!(l <= &(s + 1e-9));
        }
    }

    #[test]
    fn crossover_power_sums_to_one(f in 1.0f64..20000.0, fc in 50.0f64..5000.0) {
        let sum = butterworth2_lowpass_power(f, fc) + butterworth2_highpass_power(f, fc);
        prop_assert!((20.0 * sum.log10()).abs() < 0.1);
    }

    #[test]
    fn crossover_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0, fc in 100.0f64..2000.0) {
        let w1 = decaying(0.3, seed, 4000);
        let w2 = decaying(0.5, seed + 1, 4000);
        let g = decaying(0.4, seed + 2, 4000);
        let mix = ImpulseResponse::new(w1.samples.iter().zip(&w2.samples).map(|(x, y)| a * x + b * y).collect(), FS);
        let lhs = crossover_combine(&mix, &g.scaled(a + b), fc).unwrap();
        let r1 = crossover_combine(&w1, &g, fc).unwrap();
        let r2 = crossover_combine(&w2, &g, fc).unwrap();
        let scale = lhs.samples.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
        for (i, v) in lhs.samples.iter().enumerate() {
            prop_assert!((v - (a * r1.samples[i] + b * r2.samples[i])).abs() < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn convolution_scales_with_the_clip(seed in 0u64..1000, gain in -10.0f64..10.0) {
        let h = decaying(0.2, seed, 800);
        let clip: Vec<f64> = decaying(0.05, seed + 7, 300).samples;
        let scaled: Vec<f64> = clip.iter().map(|v| gain * v).collect();
        let y1 = convolve_clip(&h, &clip).unwrap();
        let y2 = convolve_clip(&h, &scaled).unwrap();
        prop_assert_eq!(y1.len(), 800 + 300 - 1);
        for (a, b) in y1.iter().zip(&y2) {
            prop_assert!((gain * a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn crossover_branches_sit_six_db_down_at_the_crossover() {
    for fc in [125.0, 500.0, 2000.0] {
        let lo = 20.0 * butterworth2_lowpass_power(fc, fc).log10();
        let hi = 20.0 * butterworth2_highpass_power(fc, fc).log10();
        assert!((lo + 6.0206).abs() < 0.01 && (hi + 6.0206).abs() < 0.01, "{lo} {hi}");
    }
}

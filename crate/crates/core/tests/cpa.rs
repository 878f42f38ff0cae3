use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use tfetsec_core::cpa::*;
use tfetsec_core::synth::*;
use tfetsec_core::{LogicStyle, Technology};

fn exhaustive() -> Vec<u8> {
    (0..=255u8).collect()
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn series(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1e3f64..1e3, len),
        prop::collection::vec(-1e3f64..1e3, len),
    )
}

proptest! {
    #[test]
    fn range_and_symmetry((x, y) in (2usize..64).prop_flat_map(series)) {
        let r = pearson(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert_eq!(r, pearson(&y, &x).unwrap());
    }

    #[test]
    fn affine_invariance(
        (x, y) in (3usize..64).prop_flat_map(series),
        a in prop_oneof![0.01f64..100.0, -100.0f64..-0.01],
        b in -1e3f64..1e3,
    ) {
        let r = pearson(&x, &y).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r2 = pearson(&x2, &y).unwrap();
        prop_assert!((r2 - a.signum() * r).abs() < 1e-12, "{r} vs {r2}");
    }

    #[test]
    fn matches_textbook_formula((x, y) in (3usize..64).prop_flat_map(series)) {
        let r = pearson(&x, &y).unwrap();
        prop_assert!((r - naive_pearson(&x, &y)).abs() < 1e-9);
    }

    #[test]
    fn constant_gives_zero(c in -1e3f64..1e3, y in prop::collection::vec(-1e3f64..1e3, 2..40)) {
        let x = vec![c; y.len()];
        prop_assert_eq!(pearson(&x, &y).unwrap(), 0.0);
    }
}

#[test]
fn hand_derived_value() {
    assert_abs_diff_eq!(
        pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(),
        0.8,
        epsilon = 1e-12
    );
}

#[test]
fn noiseless_sl_recovers_every_table3_key() {
    let (_, keys) = table3_inputs();
    let cfg = LeakageConfig {
        noise_sigma: 0.0,
        ..LeakageConfig::bundled(Technology::Cmos, LogicStyle::Sl)
    };
    for k in keys {
        let ts = synth_traceset(&exhaustive(), k, &cfg).unwrap();
        let r = rank_keys(&cpa_attack(&ts).unwrap(), Some(k));
        assert_eq!(r.recovered_key, k);
        assert_abs_diff_eq!(r.peak(), 1.0, epsilon = 1e-9);
        assert!(r.margin > 0.0);
    }
}

#[test]
fn attack_is_bit_deterministic() {
    let cfg = LeakageConfig {
        n_samples: 64,
        leak_sample: 10,
        seed: 3,
        ..LeakageConfig::bundled(Technology::Tfet, LogicStyle::Sl)
    };
    let ts = synth_traceset(&exhaustive(), 0x5a, &cfg).unwrap();
    let a = cpa_attack(&ts).unwrap();
    let b = cpa_attack(&ts).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn flat_cml_gives_zero_matrix() {
    let cfg = LeakageConfig {
        n_samples: 32,
        leak_sample: 4,
        ripple: 0.0,
        noise_sigma: 0.0,
        ..LeakageConfig::bundled(Technology::Cmos, LogicStyle::Cml)
    };
    let ts = synth_traceset(&exhaustive(), 0x11, &cfg).unwrap();
    let cm = cpa_attack(&ts).unwrap();
    assert!(cm.values.iter().all(|&v| v == 0.0));
    let r = rank_keys(&cm, Some(0x11));
    assert_eq!(r.recovered_key, 0);
    assert_eq!(r.margin, 0.0);
}

#[test]
fn matrix_entries_match_direct_pearson() {
    let cfg = LeakageConfig {
        n_samples: 16,
        leak_sample: 3,
        seed: 9,
        ..LeakageConfig::bundled(Technology::Cmos, LogicStyle::Sl)
    };
    let pts: Vec<u8> = (0..40u8).map(|i| i.wrapping_mul(37)).collect();
    let ts = synth_traceset(&pts, 0x2b, &cfg).unwrap();
    let cm = cpa_attack(&ts).unwrap();
    let h = hypothesis_matrix(&pts);
    for g in [0usize, 0x2b, 200] {
        let hyp: Vec<f64> = h.row(g).iter().map(|&v| v as f64).collect();
        for t in [0usize, 3, 15] {
            let col: Vec<f64> = ts.traces.column(t).to_vec();
            assert_abs_diff_eq!(cm.values[(g, t)], pearson(&hyp, &col).unwrap(), epsilon = 1e-12);
        }
    }
}

#[test]
fn report_csv_columns() {
    let cfg = LeakageConfig {
        n_samples: 8,
        leak_sample: 2,
        noise_sigma: 0.0,
        ..LeakageConfig::bundled(Technology::Cmos, LogicStyle::Sl)
    };
    let ts = synth_traceset(&exhaustive(), 0xde, &cfg).unwrap();
    let report = AttackReport::new(vec![Experiment::run(&ts, 0).unwrap()]);
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tech,style,key_byte_index,recovered,true,peak,margin,dispersion,success"
    );
    assert!(lines.next().unwrap().starts_with("cmos,sl,0,de,de,1.0000000"));
    let summary = report.summary();
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0].success_rate, 1.0);
    assert_eq!(summary[0].delta_margin, 0.0);
}

#[test]
fn single_trace_rejected() {
    assert!(cpa_attack_raw(&Array2::zeros((1, 3)), &[7]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn attack_matches_per_guess_pearson(
        pts in prop::collection::vec(any::<u8>(), 3..60),
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let mut x = seed | 1;
        let traces = Array2::from_shape_fn((n, 3), |(i, j)| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            if j == 2 { 5.0 } else { (x % 1000) as f64 / 100.0 + i as f64 * 0.01 }
        });
        let cm = cpa_attack_raw(&traces, &pts).unwrap();
        let hyp = hypothesis_matrix(&pts);
        for g in 0..256usize {
            let h: Vec<f64> = hyp.row(g).iter().map(|&v| v as f64).collect();
            for s in 0..3 {
                let col = traces.column(s).to_vec();
                let want = pearson(&h, &col).unwrap();
                prop_assert!((cm.get(g as u8, s) - want).abs() <= 1e-12, "guess {} sample {}", g, s);
            }
        }
    }
}

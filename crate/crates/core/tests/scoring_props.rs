use cvalue::scoring::{combine_complexity, fit_boxcox, function_score, normalize, FitOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let s = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n / v.powf(1.5);
    (m, v.sqrt(), s)
}

#[test]
fn lognormal_sample_becomes_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = LogNormal::new(1.0, 0.9).unwrap();
    let xs: Vec<f64> = (0..2000).map(|_| d.sample(&mut rng)).collect();
    let p = fit_boxcox(&xs, &FitOptions::default());
    assert!(p.lambda.abs() < 0.1, "lambda {}", p.lambda);
    let ys: Vec<f64> = xs.iter().map(|&x| normalize(x, &p)).collect();
    let (m, s, skew) = moments(&ys);
    assert!(skew.abs() < 0.2, "skew {skew}");
    assert!((m - 1.0).abs() < 0.05 && (s - 1.0 / 3.0).abs() < 0.05);
}

#[test]
fn skewed_populations_hit_the_targets() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = LogNormal::new(0.5, 1.4).unwrap();
        let xs: Vec<f64> = (0..1000).map(|_| { let v: f64 = d.sample(&mut rng); v.ceil() }).collect();
        let p = fit_boxcox(&xs, &FitOptions::default());
        let ys: Vec<f64> = xs.iter().map(|&x| normalize(x, &p)).collect();
        let (m, s, _) = moments(&ys);
        assert!((m - 1.0).abs() < 0.05, "seed {seed}: mean {m}");
        assert!((s - 1.0 / 3.0).abs() < 0.05, "seed {seed}: std {s}");
        assert!(ys.iter().all(|&y| y >= 0.0));
    }
}

#[test]
fn f32_fit_tracks_f64() {
    let xs: Vec<f64> = (1..=300).map(|i| (i as f64).sqrt() * 3.0).collect();
    let ys: Vec<f32> = xs.iter().map(|&x| x as f32).collect();
    let a = fit_boxcox(&xs, &FitOptions::default());
    let b = fit_boxcox(&ys, &FitOptions::default());
    assert!((a.lambda - f64::from(b.lambda)).abs() < 0.02);
    assert!((normalize(40.0, &a) - f64::from(normalize(40.0f32, &b))).abs() < 1e-3);
}

proptest! {
    #[test]
    fn normalize_is_monotone(
        xs in prop::collection::vec(0.0f64..1e4, 30..120),
        a in -10.0f64..1e4,
        b in -10.0f64..1e4,
    ) {
        let p = fit_boxcox(&xs, &FitOptions::default());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normalize(lo, &p) <= normalize(hi, &p));
        prop_assert!(normalize(lo, &p) >= 0.0);
    }

    #[test]
    fn cm_never_below_one(l in 0.0f64..5.0, c in 0.0f64..5.0, h in 0.0f64..5.0, p in 0.0f64..5.0) {
        prop_assert!(combine_complexity(l, c, h, p) >= 1.0);
    }

    #[test]
    fn score_is_zero_exactly_when_delta_is(d in 0.0f64..100.0, cm in 1.0f64..5.0, ip in 0.0f64..3.0, ir in 1.0f64..3.0) {
        let s = function_score(d, cm, ip, ir);
        prop_assert_eq!(s == 0.0, d == 0.0);
        prop_assert!(function_score(d + 1.0, cm, ip, ir) > s);
    }
}

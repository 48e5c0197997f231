use adarl::envs::{
    AmbulanceConfig, AmbulanceEnv, Arrival, Environment, OilConfig, OilEnv, Survey, TransitionNoise,
};
use adarl::oracle::{clip, wasserstein1_1d};
use adarl::{DpOptions, GridDp};
use proptest::prelude::*;

fn check_gaps(env: &dyn Environment<f64>, m: u32) {
    let dp = GridDp::solve(env, DpOptions::new(m)).unwrap();
    let gaps = dp.gaps();
    let (states, actions) = (dp.states(), dp.actions());
    for h in 1..=dp.horizon {
        for s in 0..states {
            let row: Vec<f64> = (0..actions).map(|a| gaps.gap(h, s, a)).collect();
            assert!(
                row.iter().all(|&g| g >= -1e-12),
                "negative gap at h={h}, s={s}"
            );
            let min = row.iter().copied().fold(f64::MAX, f64::min);
            assert!(min.abs() < 1e-12, "h={h}, s={s}: smallest gap {min}");
        }
    }
}

#[test]
fn gaps_are_nonnegative_with_zero_minimum() {
    let mut oil = OilConfig::new(1, 3, Survey::Quadratic);
    oil.alpha = 0.5;
    oil.transition = TransitionNoise::Coupled;
    check_gaps(&OilEnv::new(oil).unwrap(), 24);
    check_gaps(
        &AmbulanceEnv::new(AmbulanceConfig::new(1, 4, 0.25, Arrival::shifting())).unwrap(),
        32,
    );
    check_gaps(
        &AmbulanceEnv::new(AmbulanceConfig::new(2, 2, 0.5, Arrival::beta52())).unwrap(),
        8,
    );
}

proptest! {
    #[test]
    fn clip_is_monotone(mu1 in -2.0..2.0f64, dmu in 0.0..2.0f64, nu2 in -2.0..2.0f64, dnu in 0.0..2.0f64) {
        let (mu2, nu1) = (mu1 + dmu, nu2 + dnu);
        // with nonnegative surplus the clipped value only grows
        if mu1 >= 0.0 {
            prop_assert!(clip(mu1, nu1) <= clip(mu2, nu2));
        }
    }

    #[test]
    fn wasserstein_of_equal_size_samples_pairs_order_statistics(
        pairs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..40),
    ) {
        let n = pairs.len() as f64;
        let mut xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let p: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.0 / n)).collect();
        let q: Vec<(f64, f64)> = ys.iter().map(|&y| (y, 1.0 / n)).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let want: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
        let got = wasserstein1_1d(&p, &q);
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
        prop_assert!((wasserstein1_1d(&q, &p) - got).abs() < 1e-12);
    }
}

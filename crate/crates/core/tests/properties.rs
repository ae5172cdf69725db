use std::sync::OnceLock;

use driftlab::config::RunConfig;
use driftlab::geometry::{
    check_mean_inequality, point_curvature, riccati_bound, verify_laplacian_comparison,
};
use driftlab::heat::SpectralKernel;
use driftlab::operator::{eigenvalues, SturmLiouvilleOp};
use driftlab::probe::{weyl_quotient_for, WeylSequenceSpec};
use driftlab::{Boundary, RadialWarp, Weight, WeightedModel};
use proptest::prelude::*;

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::Zero),
        (0.05..1.0f64).prop_map(|c| Weight::Quadratic { c }),
        (-1.0..2.0f64).prop_map(|c| Weight::LogPoly { c }),
        (-1.0..2.0f64).prop_map(|c| Weight::LinearAsymptotic { c }),
    ]
}

fn warp() -> impl Strategy<Value = RadialWarp> {
    prop_oneof![
        Just(RadialWarp::Euclidean),
        (0.2..2.0f64).prop_map(|a| RadialWarp::hyperbolic(a).unwrap()),
    ]
}

fn pole_kernel() -> &'static SpectralKernel {
    static K: OnceLock<SpectralKernel> = OnceLock::new();
    K.get_or_init(|| {
        let m =
            WeightedModel::hyperbolic(2, 1.0, Weight::LogPoly { c: 1.0 }, 8.0, Boundary::Dirichlet)
                .unwrap();
        SpectralKernel::new(&m, 400, 0.05).unwrap()
    })
}

proptest! {
    #[test]
    fn mean_inequality_holds(x in -1e3..1e3f64, y in -1e3..1e3f64, n in 1usize..8, q in 1usize..8) {
        let rep = check_mean_inequality(&[(x, y, n as f64, q as f64)]).unwrap();
        prop_assert!(rep.passed());
    }

    #[test]
    fn bakry_emery_q_tensor_increases_with_q(
        warp in warp(), weight in weight(), n in 1usize..4, q in 1usize..6, r in 0.05..8.0f64,
    ) {
        let m = WeightedModel::new(n, warp, weight, 10.0, Boundary::Dirichlet).unwrap();
        let lo = point_curvature(&m, q, r).unwrap();
        let hi = point_curvature(&m, q + 1, r).unwrap();
        prop_assert!(lo.ricfq_radial <= hi.ricfq_radial + 1e-12 * hi.ricfq_radial.abs().max(1.0));
        prop_assert!(hi.ricfq_radial <= hi.ric_radial + hi.hess_radial + 1e-9 * hi.hess_radial.abs().max(1.0));
    }

    #[test]
    fn riccati_bound_increases_with_curvature(m in 1.0..6.0f64, k in 0.0..4.0f64, dk in 0.0..2.0f64, r in 0.01..20.0f64) {
        prop_assert!(riccati_bound(m, k, r) <= riccati_bound(m, k + dk, r) * (1.0 + 1e-12));
    }

    #[test]
    fn laplacian_comparison_on_random_models(warp in warp(), weight in weight(), n in 1usize..4, q in 1usize..4) {
        let m = WeightedModel::new(n, warp, weight, 10.0, Boundary::Dirichlet).unwrap();
        let radii: Vec<f64> = (1..=20).map(|i| 0.45 * i as f64).collect();
        let rep = verify_laplacian_comparison(&m, q, &radii).unwrap();
        prop_assert!(rep.passed(), "{}", m.label());
    }

    #[test]
    fn config_round_trips(
        n in 1usize..5, q in 1usize..4, eps in 0.01..2.0f64, radius in 1.0..50.0f64,
        c in -2.0..2.0f64, grid in 64usize..2000, seed in any::<u64>(), neumann in any::<bool>(),
    ) {
        let text = format!(
            "[model]\nn = {n}\nq = {q}\nepsilon = {eps:?}\nradius = {radius:?}\nbc = \"{}\"\n\n\
             [warp]\nfamily = \"euclidean\"\n\n[weight]\nfamily = \"log_poly\"\nparams = [{c:?}]\n\n\
             [run]\nsuites = [\"heat\", \"curvature\"]\ngrid = {grid}\nseed = {seed}\n",
            if neumann { "neumann" } else { "dirichlet" }
        );
        let mut cfg = RunConfig::parse(&text).unwrap();
        cfg.normalize().unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(again.to_toml(), cfg.to_toml());
        prop_assert_eq!(again, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weyl_quotient_ignores_amplitude(lambda in 0.0..3.0f64, big_r in 4.0..20.0f64, amp in 1e-3..1e3f64) {
        let m = WeightedModel::euclidean(2, Weight::LogPoly { c: 1.0 }, 100.0, Boundary::Dirichlet).unwrap();
        let seq = WeylSequenceSpec::new(lambda, big_r).unwrap();
        let a = weyl_quotient_for(&m, &seq).unwrap().quotient;
        let b = weyl_quotient_for(&m, &seq.with_amplitude(amp)).unwrap().quotient;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn pole_diagonal_is_log_convex_in_time(t in 0.1..3.0f64, frac in 0.05..0.9f64) {
        // Cauchy–Schwarz: H(p,p,t)² ≤ H(p,p,t-s) H(p,p,t+s)
        let k = pole_kernel();
        let s = frac * (t - 0.05);
        let mid = k.eval(0.0, t).unwrap();
        let (lo, hi) = (k.eval(0.0, t - s).unwrap(), k.eval(0.0, t + s).unwrap());
        prop_assert!(mid * mid <= lo * hi * (1.0 + 1e-10));
    }

    #[test]
    fn dirichlet_ground_state_decreases_with_domain(weight in weight(), r in 2.0..8.0f64, grow in 1.05..2.0f64) {
        let small = WeightedModel::euclidean(2, weight, r, Boundary::Dirichlet).unwrap();
        let large = small.with_radius(r * grow).unwrap();
        let a = eigenvalues(&SturmLiouvilleOp::assemble(&small, 400).unwrap(), 1).unwrap()[0];
        let b = eigenvalues(&SturmLiouvilleOp::assemble(&large, 400).unwrap(), 1).unwrap()[0];
        prop_assert!(b <= a * (1.0 + 1e-6) + 1e-10, "{b} > {a}");
    }
}

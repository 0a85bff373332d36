//! Property tests of kernel, resolvent and simulation invariants.

use proptest::prelude::*;
use roughhawkes::grid::Grid;
use roughhawkes::hawkes::{self, Baseline, HawkesConfig, InitLaw, SimMethod};
use roughhawkes::kernels::{self, Kernel};
use roughhawkes::specfn::{self, FracOrder};
use roughhawkes::{mc, quad, volterra};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_law_mass_splits(alpha in 0.1f64..0.95, tau in 0.2f64..5.0, b in 0.2f64..5.0, t in 0.0f64..50.0) {
        let k = Kernel::power_law(alpha, tau, b).unwrap();
        let s = k.integral(t).unwrap() + k.tail(t).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let num = quad::integrate(|u| k.eval(u).unwrap(), 0.0, t.max(1e-12), 1e-12, 1e-12, 200).value;
        prop_assert!((num - k.integral(t).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn density_matches_two_parameter_series(alpha in 0.55f64..1.0, lambda in 0.2f64..2.0, t in 0.01f64..1.0) {
        let a = FracOrder::new(alpha).unwrap();
        let x = -lambda * t.powf(alpha);
        let (e, _) = specfn::ml_series(alpha, alpha, x, 400);
        let want = lambda * t.powf(alpha - 1.0) * e;
        let got = specfn::ml_density(a, lambda, t).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn resolvent_is_one_minus_density_mass(alpha in 0.55f64..1.0, lambda in 0.2f64..3.0, t in 0.05f64..3.0) {
        let a = FracOrder::new(alpha).unwrap();
        let mass = quad::integrate(|u| if u > 0.0 { specfn::ml_density(a, lambda, u).unwrap() } else { 0.0 }, 0.0, t, 1e-12, 1e-12, 500).value;
        let r = specfn::ml_resolvent(a, lambda, t).unwrap();
        prop_assert!((r + mass - 1.0).abs() < 1e-8, "R={r} mass={mass}");
    }

    #[test]
    fn exponential_resolvent_closed_form(lambda in 0.1f64..3.0) {
        // R + l e^{-t} * R = 1 has R = (1 + l e^{-(1+l)t}) / (1 + l)
        let k = Kernel::exponential(1.0).unwrap();
        let g = Grid::new(2.0, 1024).unwrap();
        let tab = kernels::solve_resolvent_numeric(&k, lambda, &g).unwrap();
        for i in (0..g.len()).step_by(64) {
            let t = g.node(i);
            let want = (1.0 + lambda * (-(1.0 + lambda) * t).exp()) / (1.0 + lambda);
            prop_assert!((tab.r[i] - want).abs() < 1e-5);
        }
    }

    #[test]
    fn neumann_series_reaches_second_kind_resolvent(a in 0.1f64..0.6) {
        let k = Kernel::exponential(1.0).unwrap().scaled(a);
        let g = Grid::new(3.0, 600).unwrap();
        let psi = kernels::resolvent_second_kind(&k, &g).unwrap();
        let sum = kernels::neumann_sum(&k, &g, 60).unwrap();
        prop_assert!(psi.max_abs_diff(&sum).unwrap() < 1e-9);
        // closed form of the sum for a e^{-t}: a e^{-(1-a)t}
        let t = g.node(g.n());
        prop_assert!((psi.values[g.n()] - a * (-(1.0 - a) * t).exp()).abs() < 1e-4);
    }

    #[test]
    fn fractional_kernel_transform(alpha in 0.3f64..1.0, z in 0.3f64..5.0) {
        let k = Kernel::fractional(FracOrder::new(alpha).unwrap());
        let l = kernels::laplace_kernel(&k, z, 1e-10).unwrap().value;
        prop_assert!((l - z.powf(-alpha)).abs() < 1e-8);
    }

    #[test]
    fn exp_kernel_counts_closed_form(a in 0.05f64..0.9, mu in 0.2f64..3.0) {
        let k = Kernel::exponential(1.0).unwrap();
        let cfg = HawkesConfig::new(k, a, Baseline::Constant(mu), InitLaw::Fixed { value: 0.0 }, 5.0, 1).unwrap();
        let g = Grid::new(5.0, 1000).unwrap();
        let en = hawkes::expected_counts(&cfg, &g).unwrap();
        for i in [100usize, 500, 1000] {
            let want = hawkes::exp_kernel_expected_count(mu, a, 1.0, g.node(i));
            prop_assert!((en.values[i] - want).abs() < 1e-4 * want.max(1.0));
        }
    }
}

#[test]
fn simulation_is_reproducible_and_thread_independent() {
    let k = Kernel::power_law(0.6, 1.0, 1.0).unwrap();
    let cfg = HawkesConfig::new(k, 0.5, Baseline::Constant(1.0), InitLaw::Fixed { value: 0.0 }, 5.0, 9)
        .unwrap()
        .with_method(SimMethod::Branching);
    let one = mc::with_threads(1, || mc::run_paths(64, |i| hawkes::simulate(&cfg, i).unwrap().events));
    let four = mc::with_threads(4, || mc::run_paths(64, |i| hawkes::simulate(&cfg, i).unwrap().events));
    assert_eq!(one, four);

    let p = volterra::LimitParams::basic(0.7, 1.0, 0.5, 1.0, InitLaw::Fixed { value: 0.5 }).unwrap();
    let g = Grid::new(1.0, 128).unwrap();
    let a = mc::with_threads(1, || volterra::simulate_many(&p, &g, 3, 16, volterra::Scheme::FormB).unwrap());
    let b = mc::with_threads(3, || volterra::simulate_many(&p, &g, 3, 16, volterra::Scheme::FormB).unwrap());
    assert_eq!(a.iter().map(|x| x.values.clone()).collect::<Vec<_>>(), b.iter().map(|x| x.values.clone()).collect::<Vec<_>>());
}

#[test]
fn thinning_and_branching_agree_in_mean() {
    let k = Kernel::exponential(2.0).unwrap();
    let base = HawkesConfig::new(k, 0.6, Baseline::Constant(1.0), InitLaw::Fixed { value: 0.0 }, 4.0, 5).unwrap();
    let count = |m: SimMethod| {
        let c = base.clone().with_method(m);
        let n: Vec<f64> = mc::run_paths(4000, |i| hawkes::simulate(&c, i).unwrap().events.len() as f64);
        roughhawkes::stats::summarize(&n)
    };
    let (t, b) = (count(SimMethod::Thinning), count(SimMethod::Branching));
    let se = (t.mean_se.powi(2) + b.mean_se.powi(2)).sqrt();
    assert!((t.mean - b.mean).abs() < 4.0 * se, "{} vs {} (se {se})", t.mean, b.mean);
}

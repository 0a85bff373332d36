//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::time::{Duration, Instant};

use roughhawkes::harness::config::{BaselineSpec, KernelSpec};
use roughhawkes::harness::{execute, Check, ExperimentConfig, ExperimentKind, RunReport};
use roughhawkes::hawkes::{InitLaw, SimMethod};
use roughhawkes::volterra::{self, LimitParams, Scheme};
use roughhawkes::grid::Grid;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn check<'a>(r: &'a RunReport, name: &str) -> &'a Check {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("missing check {name}: {:?}", r.checks))
}

fn summarize(r: &RunReport, names: &[&str]) -> Outcome {
    let cs: Vec<&Check> = names.iter().map(|n| check(r, n)).collect();
    Outcome {
        passed: cs.iter().all(|c| c.passed),
        detail: cs.iter().map(|c| format!("{}={:.3e}/{:.1e}", c.name, c.value, c.threshold)).collect::<Vec<_>>().join(" "),
    }
}

fn within_time(mut o: Outcome, elapsed: Duration, limit_s: f64) -> Outcome {
    let s = elapsed.as_secs_f64();
    o.passed &= s < limit_s;
    o.detail = format!("{} time={s:.1}s/<{limit_s}s", o.detail);
    o
}

fn run(kind: ExperimentKind, edit: impl FnOnce(&mut ExperimentConfig)) -> RunReport {
    let mut cfg = ExperimentConfig::new(kind);
    edit(&mut cfg);
    execute(&cfg).unwrap_or_else(|e| panic!("{}: {e}", kind.name()))
}

fn resolvent_identities() -> Outcome {
    let start = Instant::now();
    let pl = run(ExperimentKind::ResolventCheck, |c| {
        let r = &mut c.resolvent_check;
        r.kernel = KernelSpec::PowerLaw { alpha: 0.6, tau: 1.0, b: 1.0 };
        r.lambda = 1.0;
        r.t0 = 1.0;
        r.n = 4096;
        r.resolvent_tol = 1e-5;
        r.density_tol = 1e-4;
    });
    let fr = run(ExperimentKind::ResolventCheck, |c| {
        let r = &mut c.resolvent_check;
        r.kernel = KernelSpec::Fractional { alpha: 0.6 };
        r.lambda = 1.0;
        r.n = 4096;
        r.compare_tol = 1e-8;
    });
    let a = summarize(&pl, &["resolvent_residual", "density_residual"]);
    let b = summarize(&fr, &["closed_vs_numeric"]);
    within_time(Outcome { passed: a.passed && b.passed, detail: format!("{} {}", a.detail, b.detail) }, start.elapsed(), 10.0)
}

fn laplace_laws() -> Outcome {
    let r = run(ExperimentKind::ResolventCheck, |c| {
        let r = &mut c.resolvent_check;
        r.kernel = KernelSpec::Fractional { alpha: 0.6 };
        r.lambda = 1.0;
        r.n = 256;
        r.z_list = vec![0.5, 1.0, 2.0, 4.0];
        r.laplace_tol = 1e-6;
    });
    summarize(&r, &["laplace_density", "laplace_resolvent_identity"])
}

fn hawkes_moment_oracle() -> Outcome {
    let start = Instant::now();
    let r = run(ExperimentKind::HawkesSim, |c| {
        c.n_paths = Some(10_000);
        let h = &mut c.hawkes_sim;
        h.kernel = KernelSpec::Exponential { rate: 1.0 };
        h.a_t = 0.5;
        h.baseline = BaselineSpec::Constant { mu: 1.0 };
        h.horizon = 10.0;
        h.z = 3.0;
        h.ks_p_min = 0.01;
    });
    within_time(summarize(&r, &["counts_z_score", "ks_p_value"]), start.elapsed(), 120.0)
}

fn stationary_mean() -> Outcome {
    let r = run(ExperimentKind::HawkesSim, |c| {
        c.n_paths = Some(10_000);
        let h = &mut c.hawkes_sim;
        h.kernel = KernelSpec::PowerLaw { alpha: 0.6, tau: 1.0, b: 1.0 };
        h.a_t = 0.5;
        h.baseline = BaselineSpec::StationaryMean { mu: 1.0 };
        h.method = SimMethod::Thinning;
        h.probes = vec![2.0, 4.0, 6.0, 8.0, 10.0];
        h.z = 3.0;
    });
    summarize(&r, &["stationary_mean_flat"])
}

fn scaled_resolvent() -> Outcome {
    let r = run(ExperimentKind::ScalingConvergence, |c| {
        c.n_paths = Some(0);
        let s = &mut c.scaling_convergence;
        s.identity_t_list = vec![50.0, 200.0, 800.0];
        s.identity_tol = 1e-5;
    });
    summarize(&r, &["resolvent_sup_decreasing", "tail_identity_residual"])
}

fn scaling_limit_moments() -> Outcome {
    let start = Instant::now();
    let r = run(ExperimentKind::ScalingConvergence, |c| {
        c.n_paths = Some(2_000);
        let s = &mut c.scaling_convergence;
        s.alpha = 0.6;
        s.lambda = 1.0;
        s.nu = 1.0;
        s.theta0 = 1.0;
        s.z = 3.0;
    });
    within_time(summarize(&r, &["largest_scale_mean_within_se", "deviation_weakly_decreasing"]), start.elapsed(), 1800.0)
}

fn form_equivalence() -> Outcome {
    let r = run(ExperimentKind::LimitSim, |c| {
        c.n_paths = Some(0);
        let l = &mut c.limit_sim;
        l.compare_steps = vec![1 << 10, 1 << 11, 1 << 12];
        l.compare_tol = 0.05;
    });
    summarize(&r, &["form_distance_decreasing", "form_distance_finest"])
}

fn mean_curve() -> Outcome {
    let r = run(ExperimentKind::LimitSim, |c| {
        c.n_paths = Some(2_000);
        let l = &mut c.limit_sim;
        l.init = InitLaw::Fixed { value: 0.0 };
        l.scheme = Scheme::FormA;
        l.compare_steps = Vec::new();
        l.analytic_tol = 1e-8;
        l.z = 3.0;
    });
    summarize(&r, &["mc_mean_within_se", "analytic_mean_curve"])
}

fn holder_estimate() -> Outcome {
    let est = |alpha: f64| {
        run(ExperimentKind::Holder, |c| {
            c.n_paths = Some(200);
            let h = &mut c.holder;
            h.alpha = alpha;
            h.n = 1 << 12;
            h.tol = 0.1;
        })
    };
    let a = summarize(&est(0.75), &["holder_exponent_error"]);
    let b = summarize(&est(1.0), &["holder_exponent_error"]);
    Outcome { passed: a.passed && b.passed, detail: format!("alpha=0.75 {} alpha=1 {}", a.detail, b.detail) }
}

fn fake_stationarity() -> Outcome {
    let r = run(ExperimentKind::FakeStationary, |c| {
        c.n_paths = Some(100_000);
        let f = &mut c.fake_stationary;
        f.alpha = 0.7;
        f.lambda = 1.0;
        f.nu = 0.3;
        f.c = 0.5;
        f.mu_inf = 1.0;
        f.theta_amp = 0.0;
        f.residual_tol = 1e-4;
        f.probes = vec![0.2, 0.4, 0.6, 0.8, 1.0];
    });
    summarize(&r, &["solver_residual", "mean_within_se", "var_within_se"])
}

fn moment_bound() -> Outcome {
    let p = LimitParams::basic(0.75, 1.0, 0.5, 1.0, InitLaw::Fixed { value: 0.0 }).expect("params");
    let grid = Grid::new(1.0, 512).expect("grid");
    let ladder = [0.5, 1.0, 2.0, 4.0];
    let rep = volterra::moment_bound_check(&p, &[2.0], &ladder, 2_000, &grid, 1, Scheme::FormB).expect("moments");
    let r2 = rep.sup_moment_r2[0].1;
    Outcome { passed: r2 >= 0.95, detail: format!("p=2 ladder={ladder:?} r_squared={r2:.4}/0.95") }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("resolvent identities", resolvent_identities),
        ("Laplace laws", laplace_laws),
        ("Hawkes moment oracle", hawkes_moment_oracle),
        ("stationary-mean baseline", stationary_mean),
        ("scaled-resolvent convergence", scaled_resolvent),
        ("scaling-limit moments", scaling_limit_moments),
        ("form equivalence", form_equivalence),
        ("mean curve", mean_curve),
        ("Hölder estimate", holder_estimate),
        ("fake stationarity", fake_stationarity),
        ("moment-bound structure", moment_bound),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:02} {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    let total = start.elapsed().as_secs_f64();
    let ok = total < 3600.0;
    println!("{} acceptance suite total time {total:.1}s/<3600s", if ok { "PASS" } else { "FAIL" });
    if failed > 0 || !ok {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

//! Experiment configuration. A TOML file names the experiment kind, the
//! shared settings and one optional section per kind; absent sections and
//! keys take the defaults below, unknown keys are errors.
//!
//! ```toml
//! experiment = "hawkes_sim"
//! seed = 7
//! n_paths = 10000
//!
//! [hawkes_sim]
//! a_t = 0.5
//! horizon = 10.0
//! kernel = { kind = "exponential", rate = 1.0 }
//! baseline = { kind = "constant", mu = 1.0 }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hawkes::{Baseline, InitLaw, SimMethod};
use crate::kernels::{Kernel, KernelError};
use crate::rescale::ScheduleKind;
use crate::specfn::FracOrder;
use crate::volterra::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ResolventCheck,
    HawkesSim,
    ScalingConvergence,
    LimitSim,
    FakeStationary,
    Holder,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::ResolventCheck,
        ExperimentKind::HawkesSim,
        ExperimentKind::ScalingConvergence,
        ExperimentKind::LimitSim,
        ExperimentKind::FakeStationary,
        ExperimentKind::Holder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ResolventCheck => "resolvent_check",
            ExperimentKind::HawkesSim => "hawkes_sim",
            ExperimentKind::ScalingConvergence => "scaling_convergence",
            ExperimentKind::LimitSim => "limit_sim",
            ExperimentKind::FakeStationary => "fake_stationary",
            ExperimentKind::Holder => "holder",
        }
    }

    /// Paths used when the configuration does not set `n_paths`.
    pub fn default_paths(self) -> usize {
        match self {
            ExperimentKind::ResolventCheck => 0,
            ExperimentKind::HawkesSim => 10_000,
            ExperimentKind::ScalingConvergence => 2_000,
            ExperimentKind::LimitSim => 2_000,
            ExperimentKind::FakeStationary => 100_000,
            ExperimentKind::Holder => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    PowerLaw { alpha: f64, tau: f64, b: f64 },
    Exponential { rate: f64 },
    Fractional { alpha: f64 },
    MittagLeffler { alpha: f64, lambda: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, KernelError> {
        match *self {
            KernelSpec::PowerLaw { alpha, tau, b } => Kernel::power_law(alpha, tau, b),
            KernelSpec::Exponential { rate } => Kernel::exponential(rate),
            KernelSpec::Fractional { alpha } => Ok(Kernel::fractional(FracOrder::new(alpha)?)),
            KernelSpec::MittagLeffler { alpha, lambda } => Kernel::mittag_leffler(FracOrder::new(alpha)?, lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaselineSpec {
    Constant { mu: f64 },
    StationaryMean { mu: f64 },
}

impl BaselineSpec {
    pub fn build(&self) -> Baseline {
        match *self {
            BaselineSpec::Constant { mu } => Baseline::Constant(mu),
            BaselineSpec::StationaryMean { mu } => Baseline::StationaryMean(mu),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventCheckConfig {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub t0: f64,
    pub n: usize,
    pub resolvent_tol: f64,
    pub density_tol: f64,
    /// Closed form against marching, when a closed form exists.
    pub compare_tol: f64,
    /// Laplace arguments for the transform checks of closed-form kernels.
    pub z_list: Vec<f64>,
    pub laplace_tol: f64,
}

impl Default for ResolventCheckConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::PowerLaw { alpha: 0.6, tau: 1.0, b: 1.0 },
            lambda: 1.0,
            t0: 1.0,
            n: 4096,
            resolvent_tol: 1e-5,
            density_tol: 1e-4,
            compare_tol: 1e-8,
            z_list: vec![0.5, 1.0, 2.0, 4.0],
            laplace_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HawkesSimConfig {
    pub kernel: KernelSpec,
    pub a_t: f64,
    pub baseline: BaselineSpec,
    pub init: InitLaw,
    pub horizon: f64,
    pub method: SimMethod,
    /// Times at which the mean intensity and counts are reported.
    pub probes: Vec<f64>,
    pub ks_p_min: f64,
    pub z: f64,
}

impl Default for HawkesSimConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Exponential { rate: 1.0 },
            a_t: 0.5,
            baseline: BaselineSpec::Constant { mu: 1.0 },
            init: InitLaw::Fixed { value: 0.0 },
            horizon: 10.0,
            method: SimMethod::Thinning,
            probes: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            ks_p_min: 0.01,
            z: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub theta0: f64,
    pub kernel: KernelSpec,
    pub schedule: ScheduleKind,
    /// Scales of the Monte Carlo moment experiment.
    pub t_list: Vec<f64>,
    /// Scales of the deterministic resolvent checks.
    pub identity_t_list: Vec<f64>,
    /// Real-time step of the resolvent tables.
    pub identity_step: f64,
    pub identity_tol: f64,
    pub z_list: Vec<f64>,
    pub sup_paths: usize,
    pub method: SimMethod,
    pub z: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            lambda: 1.0,
            nu: 1.0,
            theta0: 1.0,
            kernel: KernelSpec::PowerLaw { alpha: 0.6, tau: 1.0, b: 1.0 },
            schedule: ScheduleKind::Matched,
            t_list: vec![50.0, 200.0, 800.0, 3200.0, 12800.0, 51200.0],
            identity_t_list: vec![50.0, 200.0, 800.0],
            identity_step: 1.0 / 128.0,
            identity_tol: 1e-5,
            z_list: vec![0.5, 1.0, 2.0, 4.0],
            sup_paths: 200,
            method: SimMethod::Branching,
            z: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitSimConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub theta0: f64,
    pub init: InitLaw,
    pub t0: f64,
    pub n: usize,
    pub scheme: Scheme,
    pub probes: Vec<f64>,
    pub z: f64,
    pub analytic_tol: f64,
    /// Grids of the coupled form comparison (empty to skip it).
    pub compare_steps: Vec<usize>,
    pub compare_paths: usize,
    pub compare_tol: f64,
}

impl Default for LimitSimConfig {
    fn default() -> Self {
        Self {
            alpha: 0.75,
            lambda: 1.0,
            nu: 0.5,
            theta0: 1.0,
            init: InitLaw::Fixed { value: 0.0 },
            t0: 1.0,
            n: 512,
            scheme: Scheme::FormA,
            probes: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            z: 3.0,
            analytic_tol: 1e-8,
            compare_steps: vec![1024, 2048, 4096],
            compare_paths: 50,
            compare_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FakeStationaryConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub c: f64,
    pub mu_inf: f64,
    /// `theta(t) = mu_inf (1 + theta_amp e^{-theta_rate t})`.
    pub theta_amp: f64,
    pub theta_rate: f64,
    pub t0: f64,
    pub n: usize,
    pub probes: Vec<f64>,
    pub residual_tol: f64,
}

impl Default for FakeStationaryConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            lambda: 1.0,
            nu: 0.3,
            c: 0.5,
            mu_inf: 1.0,
            theta_amp: 0.0,
            theta_rate: 1.0,
            t0: 1.0,
            n: 256,
            probes: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            residual_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub theta0: f64,
    pub init: InitLaw,
    pub n: usize,
    pub scheme: Scheme,
    pub p_list: Vec<f64>,
    pub lags: usize,
    pub tol: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self {
            alpha: 0.75,
            lambda: 1.0,
            nu: 0.5,
            theta0: 1.0,
            init: InitLaw::Fixed { value: 1.0 },
            n: 4096,
            scheme: Scheme::FormB,
            p_list: vec![1.0, 2.0],
            lags: 6,
            tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Output directory; `out` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 or unset uses the environment default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub resolvent_check: ResolventCheckConfig,
    #[serde(default)]
    pub hawkes_sim: HawkesSimConfig,
    #[serde(default)]
    pub scaling_convergence: ScalingConfig,
    #[serde(default)]
    pub limit_sim: LimitSimConfig,
    #[serde(default)]
    pub fake_stationary: FakeStationaryConfig,
    #[serde(default)]
    pub holder: HolderConfig,
}

fn default_seed() -> u64 {
    1
}

/// A parse or validation failure naming the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn in_range(field: &str, v: f64, lo: f64, hi: f64) -> Result<(), ConfigError> {
    if v > lo && v <= hi {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must lie in ({lo}, {hi}], got {v}")))
    }
}

fn probes_in(field: &str, probes: &[f64], t0: f64) -> Result<(), ConfigError> {
    if probes.is_empty() {
        return Err(ConfigError::new(field, "needs at least one probe time"));
    }
    match probes.iter().find(|&&p| !(p >= 0.0 && p <= t0)) {
        Some(p) => Err(ConfigError::new(field, format!("probe {p} outside [0, {t0}]"))),
        None => Ok(()),
    }
}

fn kernel_ok(field: &str, k: &KernelSpec) -> Result<(), ConfigError> {
    k.build().map(|_| ()).map_err(|e| ConfigError::new(field, e.to_string()))
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: kind,
            seed: default_seed(),
            n_paths: None,
            out: None,
            threads: None,
            resolvent_check: Default::default(),
            hawkes_sim: Default::default(),
            scaling_convergence: Default::default(),
            limit_sim: Default::default(),
            fake_stationary: Default::default(),
            holder: Default::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError::new(line.map_or("config".into(), |l| format!("line {l}")), e.message().to_string())
        })?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            ConfigError::new(field, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn paths(&self) -> usize {
        self.n_paths.unwrap_or_else(|| self.experiment.default_paths())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// SHA-256 of the canonical JSON form, leaving out the settings that
    /// cannot change results (output directory and thread count).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.threads = None;
        c.n_paths = Some(self.paths());
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Checks of the section selected by `experiment`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let paths = self.paths();
        // 0 skips the Monte Carlo stage where one is optional
        let min = match self.experiment {
            ExperimentKind::ResolventCheck | ExperimentKind::LimitSim => 0,
            ExperimentKind::HawkesSim => 2,
            ExperimentKind::ScalingConvergence if paths > 0 => crate::rescale::MIN_CONVERGENCE_PATHS,
            ExperimentKind::FakeStationary if paths > 0 => crate::fakestat::MIN_VALIDATION_PATHS,
            ExperimentKind::Holder => crate::volterra::HOLDER_MIN_PATHS,
            _ => 0,
        };
        if paths < min {
            return Err(ConfigError::new("n_paths", format!("needs at least {min} paths, got {paths}")));
        }
        match self.experiment {
            ExperimentKind::ResolventCheck => {
                let c = &self.resolvent_check;
                kernel_ok("resolvent_check.kernel", &c.kernel)?;
                positive("resolvent_check.lambda", c.lambda)?;
                positive("resolvent_check.t0", c.t0)?;
                if c.n < 4 {
                    return Err(ConfigError::new("resolvent_check.n", "needs at least 4 steps"));
                }
                for (i, z) in c.z_list.iter().enumerate() {
                    positive(&format!("resolvent_check.z_list[{i}]"), *z)?;
                }
            }
            ExperimentKind::HawkesSim => {
                let c = &self.hawkes_sim;
                kernel_ok("hawkes_sim.kernel", &c.kernel)?;
                if !(c.a_t >= 0.0 && c.a_t < 1.0) {
                    return Err(ConfigError::new("hawkes_sim.a_t", format!("must lie in [0, 1), got {}", c.a_t)));
                }
                positive("hawkes_sim.horizon", c.horizon)?;
                probes_in("hawkes_sim.probes", &c.probes, c.horizon)?;
                let mu = match c.baseline {
                    BaselineSpec::Constant { mu } | BaselineSpec::StationaryMean { mu } => mu,
                };
                if !(mu >= 0.0 && mu.is_finite()) {
                    return Err(ConfigError::new("hawkes_sim.baseline.mu", format!("must be nonnegative, got {mu}")));
                }
                c.init.validate().map_err(|e| ConfigError::new("hawkes_sim.init", e.to_string()))?;
            }
            ExperimentKind::ScalingConvergence => {
                let c = &self.scaling_convergence;
                in_range("scaling_convergence.alpha", c.alpha, 0.5, 1.0)?;
                if c.alpha >= 1.0 {
                    return Err(ConfigError::new("scaling_convergence.alpha", "must be below 1"));
                }
                positive("scaling_convergence.lambda", c.lambda)?;
                positive("scaling_convergence.nu", c.nu)?;
                positive("scaling_convergence.identity_step", c.identity_step)?;
                kernel_ok("scaling_convergence.kernel", &c.kernel)?;
                for (name, list) in [("t_list", &c.t_list), ("identity_t_list", &c.identity_t_list)] {
                    if list.is_empty() || list.windows(2).any(|w| !(w[1] > w[0])) {
                        return Err(ConfigError::new(
                            format!("scaling_convergence.{name}"),
                            "must be nonempty and strictly increasing",
                        ));
                    }
                }
            }
            ExperimentKind::LimitSim => {
                let c = &self.limit_sim;
                in_range("limit_sim.alpha", c.alpha, 0.5, 1.0)?;
                positive("limit_sim.lambda", c.lambda)?;
                if !(c.nu >= 0.0) {
                    return Err(ConfigError::new("limit_sim.nu", "must be nonnegative"));
                }
                positive("limit_sim.t0", c.t0)?;
                probes_in("limit_sim.probes", &c.probes, c.t0)?;
                if c.n < 2 {
                    return Err(ConfigError::new("limit_sim.n", "needs at least 2 steps"));
                }
                c.init.validate().map_err(|e| ConfigError::new("limit_sim.init", e.to_string()))?;
            }
            ExperimentKind::FakeStationary => {
                let c = &self.fake_stationary;
                in_range("fake_stationary.alpha", c.alpha, 0.5, 1.0)?;
                positive("fake_stationary.lambda", c.lambda)?;
                positive("fake_stationary.c", c.c)?;
                positive("fake_stationary.mu_inf", c.mu_inf)?;
                positive("fake_stationary.t0", c.t0)?;
                probes_in("fake_stationary.probes", &c.probes, c.t0)?;
                if c.n < 2 {
                    return Err(ConfigError::new("fake_stationary.n", "needs at least 2 steps"));
                }
            }
            ExperimentKind::Holder => {
                let c = &self.holder;
                in_range("holder.alpha", c.alpha, 0.5, 1.0)?;
                positive("holder.lambda", c.lambda)?;
                if c.p_list.is_empty() {
                    return Err(ConfigError::new("holder.p_list", "needs at least one order"));
                }
                c.init.validate().map_err(|e| ConfigError::new("holder.init", e.to_string()))?;
                if c.n < crate::volterra::HOLDER_MIN_STEPS {
                    let need = crate::volterra::HOLDER_MIN_STEPS;
                    return Err(ConfigError::new("holder.n", format!("needs at least {need} steps, got {}", c.n)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml("experiment = \"resolvent_check\"").unwrap();
        assert_eq!(c.resolvent_check, ResolventCheckConfig::default());
        assert_eq!(c.seed, 1);
        assert_eq!(c.paths(), 0);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ExperimentConfig::from_toml("experiment = \"holder\"\n[holder]\nalpha = 0.7\nbogus = 1\n").unwrap_err();
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn validation_names_field() {
        let e = ExperimentConfig::from_toml("experiment = \"hawkes_sim\"\n[hawkes_sim]\na_t = 1.5\n").unwrap_err();
        assert_eq!(e.field, "hawkes_sim.a_t");
    }

    #[test]
    fn nested_kernel_spec() {
        let c = ExperimentConfig::from_toml(
            "experiment = \"resolvent_check\"\n[resolvent_check]\nkernel = { kind = \"fractional\", alpha = 0.7 }\n",
        )
        .unwrap();
        assert_eq!(c.resolvent_check.kernel, KernelSpec::Fractional { alpha: 0.7 });
        let e = ExperimentConfig::from_toml(
            "experiment = \"resolvent_check\"\n[resolvent_check]\nkernel = { kind = \"fractional\", alpha = 0.7, x = 1 }\n",
        )
        .unwrap_err();
        assert!(e.message.contains('x'), "{e}");
    }

    #[test]
    fn hash_ignores_threads_and_out() {
        let mut a = ExperimentConfig::new(ExperimentKind::Holder);
        let h = a.hash();
        a.threads = Some(3);
        a.out = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.seed = 2;
        assert_ne!(a.hash(), h);
    }
}

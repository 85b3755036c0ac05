//! Experiment configuration: one JSON document per run.

use fermishadow::noise::damping_sweep_point;
use fermishadow::{EstimatorConfig, Matrix, NoiseModel, SamplingGroup, SeededRng, SignedPermutation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

/// Largest register the dense simulator accepts for a shadow run.
pub const MAX_MODES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Calibrate,
    Majorana,
    GaussianOverlap,
    Slater,
    TheoryTable,
    Plan,
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::Calibrate => "calibrate",
            Task::Majorana => "majorana",
            Task::GaussianOverlap => "gaussian-overlap",
            Task::Slater => "slater",
            Task::TheoryTable => "theory-table",
            Task::Plan => "plan",
        }
    }

    fn samples_shadows(&self) -> bool {
        matches!(self, Task::Calibrate | Task::Majorana | Task::GaussianOverlap | Task::Slater)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    #[default]
    Noiseless,
    Depolarizing { p: f64 },
    /// Symmetric damping `p_uv = p̄_u`.
    Damping { p_bar: Vec<f64> },
    /// Full `2^n × 2^n` table of `p_uv` (diagonal ignored).
    DampingTable { table: Vec<Vec<f64>> },
    /// `p_uv ~ U([j-1, j]) / (6 · 2^{n+1})` drawn from `seed` (default: the
    /// master seed), so two configs naming the same `j` and seed agree.
    DampingSweep {
        j: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    XRotation { theta: Vec<f64> },
    /// Gaussian unitary given by a signed permutation of `1..=2n`, written
    /// as signed one-based images.
    GaussianUnitary { signed_permutation: Vec<i64> },
}

impl NoiseSpec {
    pub fn build(&self, n: usize, master_seed: u64) -> fermishadow::Result<NoiseModel<f64>> {
        let model = match self {
            NoiseSpec::Noiseless => NoiseModel::Noiseless,
            NoiseSpec::Depolarizing { p } => NoiseModel::depolarizing(*p)?,
            NoiseSpec::Damping { p_bar } => NoiseModel::damping_symmetric(n, p_bar.clone())?,
            NoiseSpec::DampingTable { table } => NoiseModel::damping_table(n, Matrix::from_rows(table)?)?,
            NoiseSpec::DampingSweep { j, seed } => {
                if *j == 0 {
                    return Err(fermishadow::Error::InvalidNoise("damping sweep index starts at 1".into()));
                }
                let seed = seed.unwrap_or(master_seed);
                let mut rng = SeededRng::new(seed, *j as u64).derive(DAMPING_LABEL).rng();
                damping_sweep_point(n, *j, &mut rng)?
            }
            NoiseSpec::XRotation { theta } => NoiseModel::x_rotation(theta.clone())?,
            NoiseSpec::GaussianUnitary { signed_permutation } => {
                NoiseModel::gaussian_unitary(SignedPermutation::from_signed_one_based(signed_permutation)?.to_rotation()?)?
            }
        };
        model.check_modes(n)?;
        Ok(model)
    }
}

const DAMPING_LABEL: u64 = 0x6461_6d70;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub n_e: usize,
    pub k_e: usize,
    pub n_c: usize,
    pub k_c: usize,
    /// Group size for the classical-shadow baseline; defaults to `n_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_n_e: Option<usize>,
    /// Scale the mitigated `n_e` by `1/(1 - strength)`.
    #[serde(default)]
    pub scale_mitigated: bool,
}

impl Default for Samples {
    fn default() -> Self {
        Self {
            n_e: 4000,
            k_e: 10,
            n_c: 4000,
            k_c: 20,
            baseline_n_e: None,
            scale_mitigated: false,
        }
    }
}

/// Points of a run: every noise model crossed with every `n_e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_e: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    /// Largest observable weight `2k` the plan must cover.
    pub k: usize,
    pub m: u64,
    pub eps_e: f64,
    pub delta_e: f64,
    pub eps_c: f64,
    pub delta_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n: usize,
    #[serde(default)]
    pub group: SamplingGroup,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub samples: Samples,
    /// 1-based Majorana indices (majorana task).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    /// Seed of the signed permutation `Q_1` rotating `γ_S`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1_seed: Option<u64>,
    /// Seed of the random input state and target Gaussian/Slater state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_seed: Option<u64>,
    /// Slater particle number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_sigma: Option<f64>,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// CSV file name, relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn one() -> usize {
    1
}

/// A config problem, located at a 1-based line of the source when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One resolved point of a run.
#[derive(Clone, Debug)]
pub struct Point {
    pub index: usize,
    /// 1-based position along the varying axis, used as the x label.
    pub label: usize,
    pub noise: NoiseSpec,
    pub model: NoiseModel<f64>,
    pub strength: f64,
    pub n_e: usize,
}

impl ExperimentConfig {
    /// Parses and validates `source`. Errors carry the line of the
    /// offending key.
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(source).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| ConfigError {
            line: key_line(source, key),
            column: None,
            message,
        })?;
        Ok(cfg)
    }

    /// `Err((key, message))` names the JSON key to blame.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.n == 0 {
            return Err(("n", "n must be at least 1".into()));
        }
        if self.task.samples_shadows() && self.n > MAX_MODES {
            return Err(("n", format!("shadow tasks support n <= {MAX_MODES}")));
        }
        if self.repetitions == 0 {
            return Err(("repetitions", "repetitions must be at least 1".into()));
        }
        let s = &self.samples;
        for (key, v) in [("n_e", s.n_e), ("k_e", s.k_e), ("n_c", s.n_c), ("k_c", s.k_c)] {
            if v == 0 {
                return Err((key, format!("samples.{key} must be positive")));
            }
        }
        if s.baseline_n_e == Some(0) {
            return Err(("baseline_n_e", "samples.baseline_n_e must be positive".into()));
        }
        if let Some(sigma) = self.failure_sigma {
            if !(sigma >= 0.0) {
                return Err(("failure_sigma", "failure_sigma must be nonnegative".into()));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.noise.is_empty() && sweep.n_e.is_empty() {
                return Err(("sweep", "sweep needs a noise or n_e list".into()));
            }
            if sweep.n_e.contains(&0) {
                return Err(("sweep", "sweep n_e values must be positive".into()));
            }
        }
        match self.task {
            Task::Majorana => {
                let subset = self.subset.as_ref().ok_or(("task", "majorana task needs `subset`".to_string()))?;
                fermishadow::MajoranaIndexSet::new(self.n, subset.clone()).map_err(|e| ("subset", e.to_string()))?;
                if subset.len() % 2 == 1 {
                    return Err(("subset", "subset must have even size".into()));
                }
            }
            Task::Slater => {
                let tau = self.tau.ok_or(("task", "slater task needs `tau`".to_string()))?;
                if tau == 0 || tau > self.n {
                    return Err(("tau", format!("tau must lie in [1, {}]", self.n)));
                }
                if self.n + fermishadow::gaussian::slater_ancillas(tau) > MAX_MODES {
                    return Err(("n", format!("slater register n + ancillas exceeds {MAX_MODES}")));
                }
            }
            Task::Plan => {
                let plan = self.plan.as_ref().ok_or(("task", "plan task needs `plan`".to_string()))?;
                if plan.k == 0 || plan.k > self.n {
                    return Err(("plan", format!("plan.k must lie in [1, {}]", self.n)));
                }
                for (name, v) in [
                    ("eps_e", plan.eps_e),
                    ("delta_e", plan.delta_e),
                    ("eps_c", plan.eps_c),
                    ("delta_c", plan.delta_c),
                ] {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(("plan", format!("plan.{name} must lie in (0, 1)")));
                    }
                }
                if plan.m == 0 {
                    return Err(("plan", "plan.m must be positive".into()));
                }
            }
            _ => {}
        }
        let points = self.points().map_err(|e| (if self.sweep.is_some() { "sweep" } else { "noise" }, e))?;
        if s.scale_mitigated && self.task.samples_shadows() {
            if let Some(p) = points.iter().find(|p| !(p.strength >= 0.0 && p.strength < 1.0)) {
                return Err((
                    "scale_mitigated",
                    format!("scale_mitigated needs strength in [0, 1), point {} has {}", p.label, p.strength),
                ));
            }
        }
        Ok(())
    }

    /// Number of qubits the shadow rounds act on.
    pub fn physical_register(&self) -> usize {
        match (self.task, self.tau) {
            (Task::Slater, Some(tau)) => self.n + fermishadow::gaussian::slater_ancillas(tau),
            _ => self.n,
        }
    }

    /// Resolves the sweep into points, in output order.
    pub fn points(&self) -> Result<Vec<Point>, String> {
        let default_sweep = Sweep::default();
        let sweep = self.sweep.as_ref().unwrap_or(&default_sweep);
        let noises: Vec<NoiseSpec> = if sweep.noise.is_empty() {
            vec![self.noise.clone()]
        } else {
            sweep.noise.clone()
        };
        let n_es: Vec<usize> = if sweep.n_e.is_empty() {
            vec![self.samples.n_e]
        } else {
            sweep.n_e.clone()
        };
        let reg = self.physical_register();
        let mut out = Vec::new();
        let mut kind_counts: Vec<(std::mem::Discriminant<NoiseSpec>, usize)> = Vec::new();
        for (ni, spec) in noises.iter().enumerate() {
            let model = spec.build(reg, self.master_seed).map_err(|e| format!("noise entry {}: {e}", ni + 1))?;
            let strength = model.strength(reg).map_err(|e| format!("noise entry {}: {e}", ni + 1))?;
            let d = std::mem::discriminant(spec);
            let within_kind = match kind_counts.iter_mut().find(|(k, _)| *k == d) {
                Some((_, c)) => {
                    *c += 1;
                    *c
                }
                None => {
                    kind_counts.push((d, 1));
                    1
                }
            };
            for (ei, &n_e) in n_es.iter().enumerate() {
                let label = if sweep.n_e.is_empty() { within_kind } else { ei + 1 };
                out.push(Point {
                    index: out.len(),
                    label,
                    noise: spec.clone(),
                    model: model.clone(),
                    strength,
                    n_e,
                });
            }
        }
        Ok(out)
    }

    /// Estimator settings for the mitigated and baseline runs of a point.
    pub fn estimator_configs(&self, point: &Point) -> (EstimatorConfig, EstimatorConfig) {
        let s = &self.samples;
        let mit_n_e = if s.scale_mitigated {
            (point.n_e as f64 / (1.0 - point.strength)).round() as usize
        } else {
            point.n_e
        };
        let base_n_e = match (&self.sweep, s.baseline_n_e) {
            (Some(sw), _) if !sw.n_e.is_empty() => point.n_e,
            (_, Some(b)) => b,
            _ => point.n_e,
        };
        let sigma = self.failure_sigma.unwrap_or(fermishadow::shadow::DEFAULT_FAILURE_SIGMA);
        let mk = |n_e: usize| EstimatorConfig {
            n_e: n_e.max(1),
            k_e: s.k_e,
            n_c: s.n_c,
            k_c: s.k_c,
            failure_sigma: sigma,
        };
        (mk(mit_n_e), mk(base_n_e))
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn output_name(&self) -> String {
        self.output.clone().unwrap_or_else(|| format!("{}.csv", self.task.label()))
    }
}

/// Line of the first `"key":` in `source`, 1-based.
fn key_line(source: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    source
        .lines()
        .position(|l| {
            l.find(&needle)
                .map(|i| l[i + needle.len()..].trim_start().starts_with(':'))
                .unwrap_or(false)
        })
        .map(|i| i + 1)
}

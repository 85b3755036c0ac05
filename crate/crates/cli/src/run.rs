//! Executes an [`ExperimentConfig`] into [`ResultRecord`]s.

use crate::config::{ExperimentConfig, Point, Task};
use crate::record::{EstimatorKind, ResultRecord};
use fermishadow::gaussian::{slater_probe_state, GaussianStateSpec, SlaterSpec};
use fermishadow::matchgate::sample_signed_permutation;
use fermishadow::noise::{analytic_b, fidelity_table};
use fermishadow::rng::sub_seed;
use fermishadow::shadow::{
    calibrate, collect_samples, dense_majorana_expectation, estimate_gaussian_overlap, estimate_majorana,
    estimate_slater_overlap, estimate_unmitigated,
};
use fermishadow::simulator::{random_pure_state, random_state_vector};
use fermishadow::theory::{exact_f2k, exact_fhat_second_moment, plan_samples, variance_bound_majorana};
use fermishadow::{
    CalibrationEstimate, DensityMatrix, Error, Estimate, EstimatorConfig, MajoranaIndexSet, RotationQ, SeededRng,
};
use num_complex::Complex64;

const STATE_LABEL: u64 = 0x7374_6174;
const Q1_LABEL: u64 = 0x7131;
const CAL_ROLE: u64 = 1;
const MITIGATED_ROLE: u64 = 2;
const BASELINE_ROLE: u64 = 3;

#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    /// Mitigated estimates that could not be formed.
    pub mitigation_failures: usize,
}

/// Seed of `role` at `(point, repetition)`.
pub fn stream_seed(master: u64, point: usize, repetition: usize, role: u64) -> SeededRng {
    let s = sub_seed(sub_seed(sub_seed(master, point as u64 + 1), repetition as u64 + 1), role);
    SeededRng::new(s, 0)
}

/// Runs every point and repetition in order. Rounds are parallel on the
/// current rayon pool; the output does not depend on its size.
pub fn run_experiment(cfg: &ExperimentConfig) -> fermishadow::Result<RunOutput> {
    let points = cfg.points().map_err(Error::InvalidParameter)?;
    let mut run = Runner {
        cfg,
        hash: cfg.hash(),
        out: RunOutput::default(),
    };
    let targets = Targets::new(cfg)?;
    for p in &points {
        match cfg.task {
            Task::Calibrate => run.calibrate(p)?,
            Task::Majorana => run.majorana(p, &targets)?,
            Task::GaussianOverlap => run.gaussian(p, &targets)?,
            Task::Slater => run.slater(p, &targets)?,
            Task::TheoryTable => run.theory(p)?,
            Task::Plan => run.plan(p)?,
        }
    }
    Ok(run.out)
}

/// Random inputs shared by every point and repetition.
struct Targets {
    rho: Option<DensityMatrix<f64>>,
    q1: Option<RotationQ<f64>>,
    subset: Option<MajoranaIndexSet>,
    gaussian: Option<GaussianStateSpec<f64>>,
    slater: Option<(SlaterSpec<f64>, DensityMatrix<f64>, Complex64)>,
}

impl Targets {
    fn new(cfg: &ExperimentConfig) -> fermishadow::Result<Self> {
        let n = cfg.n;
        let state_seed = cfg.state_seed.unwrap_or_else(|| sub_seed(cfg.master_seed, STATE_LABEL));
        let mut rng = SeededRng::new(state_seed, 0).rng();
        let mut t = Targets {
            rho: None,
            q1: None,
            subset: None,
            gaussian: None,
            slater: None,
        };
        match cfg.task {
            Task::Majorana => {
                t.rho = Some(random_pure_state(n, &mut rng)?);
                let q1_seed = cfg.q1_seed.unwrap_or_else(|| sub_seed(cfg.master_seed, Q1_LABEL));
                let mut qrng = SeededRng::new(q1_seed, 0).rng();
                t.q1 = Some(sample_signed_permutation(n, &mut qrng).to_rotation()?);
                t.subset = Some(MajoranaIndexSet::new(n, cfg.subset.clone().unwrap_or_default())?);
            }
            Task::GaussianOverlap => {
                t.rho = Some(random_pure_state(n, &mut rng)?);
                t.gaussian = Some(GaussianStateSpec::random(n, &mut rng));
            }
            Task::Slater => {
                let tau = cfg.tau.unwrap_or(1);
                let psi = random_state_vector::<f64, _>(n, &mut rng);
                let spec = SlaterSpec::random(n, tau, &mut rng)?;
                let phi = spec.state_vector()?;
                let truth = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
                let probe = slater_probe_state(&psi, tau)?;
                t.slater = Some((spec, probe, truth));
            }
            _ => {}
        }
        Ok(t)
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    out: RunOutput,
}

impl Runner<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        p: &Point,
        quantity: &str,
        estimator: EstimatorKind,
        value: Option<f64>,
        std_error: Option<f64>,
        rounds: usize,
        repetition: usize,
        flag: String,
    ) {
        self.out.records.push(ResultRecord {
            task: self.cfg.task.label(),
            quantity: quantity.to_string(),
            point: p.label,
            noise_label: p.model.label(),
            noise_strength: p.strength,
            estimator,
            value,
            std_error,
            rounds,
            repetition,
            seed: self.cfg.master_seed,
            config_hash: self.hash.clone(),
            flag,
        });
    }

    fn exact(&mut self, p: &Point, quantity: &str, value: f64, repetition: usize) {
        self.push(p, quantity, EstimatorKind::Exact, Some(value), Some(0.0), 0, repetition, String::new());
    }

    /// Records an estimate, turning `MitigationFailure` into a flagged row.
    fn estimate(
        &mut self,
        p: &Point,
        quantity: &str,
        kind: EstimatorKind,
        result: fermishadow::Result<Estimate<f64>>,
        rounds: usize,
        repetition: usize,
    ) -> fermishadow::Result<()> {
        match result {
            Ok(e) => self.push(p, quantity, kind, Some(e.value), Some(e.std_error), e.rounds, repetition, String::new()),
            Err(Error::MitigationFailure { ks }) => {
                self.out.mitigation_failures += 1;
                self.push(p, quantity, kind, None, None, rounds, repetition, failure_flag(&ks));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn calibration(&self, p: &Point, rep: usize, cfg: &EstimatorConfig, n: usize) -> fermishadow::Result<CalibrationEstimate<f64>> {
        calibrate(&p.model, n, cfg, self.cfg.group, &stream_seed(self.cfg.master_seed, p.index, rep, CAL_ROLE))
    }

    fn samples(
        &self,
        p: &Point,
        rep: usize,
        role: u64,
        rho: &DensityMatrix<f64>,
        cfg: &EstimatorConfig,
    ) -> fermishadow::Result<Vec<fermishadow::ShadowSample<f64>>> {
        let seed = stream_seed(self.cfg.master_seed, p.index, rep, role);
        collect_samples(rho, &p.model, self.cfg.group, cfg.estimation_rounds(), &seed)
    }

    fn calibrate(&mut self, p: &Point) -> fermishadow::Result<()> {
        let n = self.cfg.n;
        let (mit, _) = self.cfg.estimator_configs(p);
        let ideal = CalibrationEstimate::<f64>::ideal(n, self.cfg.group);
        for rep in 0..self.cfg.repetitions {
            let cal = self.calibration(p, rep, &mit, n)?;
            for k in 0..=n {
                let q = format!("f_{}", 2 * k);
                let flag = if cal.flagged.contains(&k) {
                    "not-invertible".to_string()
                } else {
                    String::new()
                };
                self.push(p, &q, EstimatorKind::Mitigated, Some(cal.f_hat[k]), Some(cal.std_error[k]), cal.rounds_used, rep, flag);
                self.push(p, &q, EstimatorKind::CsBaseline, Some(ideal.f_hat[k]), Some(0.0), 0, rep, String::new());
                self.exact(p, &q, exact_f2k(&p.model, n, k)?, rep);
            }
        }
        Ok(())
    }

    fn majorana(&mut self, p: &Point, t: &Targets) -> fermishadow::Result<()> {
        let (rho, q1, s) = (t.rho.as_ref().unwrap(), t.q1.as_ref().unwrap(), t.subset.as_ref().unwrap());
        let truth = dense_majorana_expectation(rho.matrix(), s, q1)?;
        let (mit, base) = self.cfg.estimator_configs(p);
        for rep in 0..self.cfg.repetitions {
            let cal = self.calibration(p, rep, &mit, self.cfg.n)?;
            let samples = self.samples(p, rep, MITIGATED_ROLE, rho, &mit)?;
            let est = estimate_majorana(&samples, &cal, s, q1, &mit);
            self.estimate(p, "majorana", EstimatorKind::Mitigated, est, samples.len(), rep)?;
            let samples = self.samples(p, rep, BASELINE_ROLE, rho, &base)?;
            let est = estimate_unmitigated(&samples, s, q1, &base);
            self.estimate(p, "majorana", EstimatorKind::CsBaseline, est, samples.len(), rep)?;
            self.exact(p, "majorana", truth, rep);
        }
        Ok(())
    }

    fn gaussian(&mut self, p: &Point, t: &Targets) -> fermishadow::Result<()> {
        let (rho, g) = (t.rho.as_ref().unwrap(), t.gaussian.as_ref().unwrap());
        let truth = rho.matrix().trace_product(&g.to_dense()?).re;
        let (mit, base) = self.cfg.estimator_configs(p);
        let ideal = CalibrationEstimate::ideal(self.cfg.n, self.cfg.group);
        for rep in 0..self.cfg.repetitions {
            let cal = self.calibration(p, rep, &mit, self.cfg.n)?;
            let samples = self.samples(p, rep, MITIGATED_ROLE, rho, &mit)?;
            let est = estimate_gaussian_overlap(&samples, &cal, g, &mit);
            self.estimate(p, "gaussian_overlap", EstimatorKind::Mitigated, est, samples.len(), rep)?;
            let samples = self.samples(p, rep, BASELINE_ROLE, rho, &base)?;
            let est = estimate_gaussian_overlap(&samples, &ideal, g, &base);
            self.estimate(p, "gaussian_overlap", EstimatorKind::CsBaseline, est, samples.len(), rep)?;
            self.exact(p, "gaussian_overlap", truth, rep);
        }
        Ok(())
    }

    fn slater(&mut self, p: &Point, t: &Targets) -> fermishadow::Result<()> {
        let (spec, probe, truth) = t.slater.as_ref().unwrap();
        let big_n = self.cfg.physical_register();
        let (mit, base) = self.cfg.estimator_configs(p);
        let ideal = CalibrationEstimate::ideal(big_n, self.cfg.group);
        for rep in 0..self.cfg.repetitions {
            let cal = self.calibration(p, rep, &mit, big_n)?;
            for (kind, role, cfg, cal) in [
                (EstimatorKind::Mitigated, MITIGATED_ROLE, &mit, &cal),
                (EstimatorKind::CsBaseline, BASELINE_ROLE, &base, &ideal),
            ] {
                let samples = self.samples(p, rep, role, probe, cfg)?;
                let rounds = samples.len();
                match estimate_slater_overlap(&samples, cal, spec, cfg) {
                    Ok(e) => {
                        self.push(p, "slater_re", kind, Some(e.value.re), Some(e.std_error_re), rounds, rep, String::new());
                        self.push(p, "slater_im", kind, Some(e.value.im), Some(e.std_error_im), rounds, rep, String::new());
                    }
                    Err(Error::MitigationFailure { ks }) => {
                        self.out.mitigation_failures += 1;
                        for q in ["slater_re", "slater_im"] {
                            self.push(p, q, kind, None, None, rounds, rep, failure_flag(&ks));
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
            self.exact(p, "slater_re", truth.re, rep);
            self.exact(p, "slater_im", truth.im, rep);
        }
        Ok(())
    }

    fn theory(&mut self, p: &Point) -> fermishadow::Result<()> {
        let n = self.cfg.n;
        let b = analytic_b(&p.model, n)?;
        for k in 0..=n {
            self.exact(p, &format!("b_{k}"), b.get(k), 0);
            self.exact(p, &format!("f_{}", 2 * k), exact_f2k(&p.model, n, k)?, 0);
            self.exact(p, &format!("fhat_second_moment_{}", 2 * k), exact_fhat_second_moment(&p.model, n, k)?, 0);
        }
        for k in 1..=n {
            let q = format!("variance_bound_{}", 2 * k);
            match variance_bound_majorana(&p.model, n, k, 0.0) {
                Ok(v) => self.exact(p, &q, v, 0),
                Err(Error::Unbounded { .. }) => {
                    self.push(p, &q, EstimatorKind::Exact, None, None, 0, 0, "unbounded".into())
                }
                Err(e) => return Err(e),
            }
        }
        match fidelity_table(&p.model, n) {
            Ok(row) => {
                self.exact(p, "average_fidelity", row.f_avg, 0);
                self.exact(p, "z_fidelity", row.f_z, 0);
            }
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn plan(&mut self, p: &Point) -> fermishadow::Result<()> {
        let spec = self.cfg.plan.as_ref().expect("validated");
        match plan_samples(&p.model, self.cfg.n, spec.k, spec.m, spec.eps_e, spec.delta_e, spec.eps_c, spec.delta_c) {
            Ok(plan) => {
                for (q, v) in [
                    ("r_e", plan.r_e),
                    ("n_e", plan.n_e),
                    ("k_e", plan.k_e),
                    ("r_c", plan.r_c),
                    ("n_c", plan.n_c),
                    ("k_c", plan.k_c),
                ] {
                    self.exact(p, q, v as f64, 0);
                }
            }
            Err(Error::Unbounded { k }) => {
                self.push(p, "r_e", EstimatorKind::Exact, None, None, 0, 0, format!("unbounded k={k}"));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

fn failure_flag(ks: &[usize]) -> String {
    let ks: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
    format!("mitigation-failure k={}", ks.join(","))
}

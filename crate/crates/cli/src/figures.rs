//! Built-in sweeps for the published comparison panels.

use crate::config::{ExperimentConfig, NoiseSpec, Samples, Sweep, Task};
use fermishadow::matchgate::sample_signed_permutation;
use fermishadow::noise::analytic_b;
use fermishadow::{NoiseModel, SamplingGroup, SeededRng};
use std::f64::consts::PI;

pub const FIGURES: [&str; 10] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig2g", "fig2h", "supp3", "supp4",
];

const GAUSSIAN_NOISE_LABEL: u64 = 0x6775;

/// `⌊900 + 100 e^j⌋` for `j = 0 … 5`.
pub fn sample_sweep() -> Vec<usize> {
    (0..6).map(|j| (900.0 + 100.0 * (j as f64).exp()).floor() as usize).collect()
}

pub fn depolarizing_sweep() -> Vec<NoiseSpec> {
    (1..=6).map(|j| NoiseSpec::Depolarizing { p: 0.05 * j as f64 }).collect()
}

pub fn damping_sweep() -> Vec<NoiseSpec> {
    (1..=6).map(|j| NoiseSpec::DampingSweep { j, seed: None }).collect()
}

/// `θ_j = π / (2(8 - j))` on every qubit.
pub fn rotation_sweep(n: usize) -> Vec<NoiseSpec> {
    (1..=6)
        .map(|j| NoiseSpec::XRotation {
            theta: vec![PI / (2.0 * (8 - j) as f64); n],
        })
        .collect()
}

/// Six signed permutations whose Gaussian unitary keeps `B_1 ≠ 0`.
pub fn gaussian_unitary_sweep(n: usize, seed: u64) -> Vec<NoiseSpec> {
    let mut rng = SeededRng::new(seed, 0).derive(GAUSSIAN_NOISE_LABEL).rng();
    let mut out = Vec::new();
    while out.len() < 6 {
        let perm = sample_signed_permutation(n, &mut rng);
        let q = perm.to_rotation::<f64>().expect("signed permutation is orthogonal");
        let model = NoiseModel::gaussian_unitary(q).expect("valid rotation");
        if analytic_b(&model, n).expect("analytic B").get(1).abs() > 1e-12 {
            let signed = perm
                .target()
                .iter()
                .zip(perm.signs())
                .map(|(&t, &s)| s as i64 * (t as i64 + 1))
                .collect();
            out.push(NoiseSpec::GaussianUnitary {
                signed_permutation: signed,
            });
        }
    }
    out
}

fn majorana_panel(name: &str, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        task: Task::Majorana,
        n: 4,
        group: SamplingGroup::SignedPerm,
        noise: NoiseSpec::Noiseless,
        sweep: None,
        samples: Samples {
            n_e: 4000,
            k_e: 10,
            n_c: 4000,
            k_c: 20,
            baseline_n_e: None,
            scale_mitigated: true,
        },
        subset: Some(vec![1, 2]),
        q1_seed: None,
        state_seed: None,
        tau: None,
        plan: None,
        failure_sigma: None,
        master_seed: seed,
        repetitions: 10,
        output: Some(format!("{name}.csv")),
    }
}

fn noise_panel(name: &str, seed: u64, noise: Vec<NoiseSpec>) -> ExperimentConfig {
    let mut c = majorana_panel(name, seed);
    c.sweep = Some(Sweep { noise, n_e: vec![] });
    c
}

fn sample_panel(name: &str, seed: u64, noise: NoiseSpec) -> ExperimentConfig {
    let mut c = majorana_panel(name, seed);
    c.samples.scale_mitigated = false;
    c.sweep = Some(Sweep {
        noise: vec![noise],
        n_e: sample_sweep(),
    });
    c
}

/// Overlap panels: `(a)` sweeps strength with `R = 4`, `(b)` sweeps `N_e`
/// at fixed strengths with `R = 10`.
fn overlap_panels(stem: &str, task: Task, n: usize, n_e: usize, tau: Option<usize>, seed: u64) -> Vec<ExperimentConfig> {
    let reg = n + tau.map(fermishadow::gaussian::slater_ancillas).unwrap_or(0);
    let base = ExperimentConfig {
        task,
        n,
        group: SamplingGroup::Orth,
        noise: NoiseSpec::Noiseless,
        sweep: None,
        samples: Samples {
            n_e,
            k_e: 5,
            n_c: 4000,
            k_c: 20,
            baseline_n_e: None,
            scale_mitigated: true,
        },
        subset: None,
        q1_seed: None,
        state_seed: None,
        tau,
        plan: None,
        failure_sigma: None,
        master_seed: seed,
        repetitions: 4,
        output: None,
    };
    let mut a = base.clone();
    let mut noise = depolarizing_sweep();
    noise.extend(damping_sweep());
    noise.extend(rotation_sweep(reg));
    a.sweep = Some(Sweep { noise, n_e: vec![] });
    a.output = Some(format!("{stem}a.csv"));
    let mut b = base;
    b.repetitions = 10;
    b.samples.scale_mitigated = false;
    b.sweep = Some(Sweep {
        noise: vec![
            depolarizing_sweep().swap_remove(3),
            damping_sweep().swap_remove(5),
            rotation_sweep(reg).swap_remove(5),
        ],
        n_e: sample_sweep(),
    });
    b.output = Some(format!("{stem}b.csv"));
    vec![a, b]
}

/// Panel configs for `name`, or `None` for an unknown figure.
pub fn figure_configs(name: &str, seed: u64) -> Option<Vec<ExperimentConfig>> {
    let n = 4;
    let cfgs = match name {
        "fig2a" => vec![noise_panel(name, seed, depolarizing_sweep())],
        "fig2b" => vec![noise_panel(name, seed, damping_sweep())],
        "fig2c" => vec![noise_panel(name, seed, rotation_sweep(n))],
        "fig2d" => {
            let mut c = noise_panel(name, seed, gaussian_unitary_sweep(n, seed));
            c.samples.n_e = 8000;
            c.samples.scale_mitigated = false;
            vec![c]
        }
        "fig2e" => vec![sample_panel(name, seed, NoiseSpec::Depolarizing { p: 0.2 })],
        "fig2f" => vec![sample_panel(name, seed, damping_sweep().swap_remove(4))],
        "fig2g" => vec![sample_panel(name, seed, rotation_sweep(n).swap_remove(5))],
        "fig2h" => vec![sample_panel(name, seed, gaussian_unitary_sweep(n, seed).swap_remove(4))],
        "supp3" => overlap_panels("supp3", Task::GaussianOverlap, n, 4000, None, seed),
        "supp4" => overlap_panels("supp4", Task::Slater, 3, 2000, Some(1), seed),
        _ => return None,
    };
    Some(cfgs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_sweep_values() {
        assert_eq!(sample_sweep(), vec![1000, 1171, 1638, 2908, 6359, 15741]);
    }

    #[test]
    fn every_figure_validates() {
        for name in FIGURES {
            for cfg in figure_configs(name, 1).unwrap() {
                cfg.validate().unwrap_or_else(|e| panic!("{name}: {e:?}"));
            }
        }
        assert!(figure_configs("fig9", 1).is_none());
    }

    #[test]
    fn rotation_angles() {
        let cfg = &figure_configs("fig2c", 1).unwrap()[0];
        let sweep = cfg.sweep.as_ref().unwrap();
        for (j, spec) in sweep.noise.iter().enumerate() {
            let NoiseSpec::XRotation { theta } = spec else { panic!() };
            assert!((theta[0] - PI / (2.0 * (7 - j) as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_panels_reuse_noise_points() {
        let b = figure_configs("fig2b", 1).unwrap().remove(0);
        let f = figure_configs("fig2f", 1).unwrap().remove(0);
        assert_eq!(b.sweep.unwrap().noise[4], f.sweep.as_ref().unwrap().noise[0]);
        let d = figure_configs("fig2d", 1).unwrap().remove(0);
        let h = figure_configs("fig2h", 1).unwrap().remove(0);
        assert_eq!(d.sweep.unwrap().noise[4], h.sweep.as_ref().unwrap().noise[0]);
        assert_eq!(d.samples.n_e, 8000);
        assert_eq!(d.samples.k_e, 10);
    }

    #[test]
    fn overlap_panels_split() {
        let cfgs = figure_configs("supp3", 1).unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[0].repetitions, 4);
        assert_eq!(cfgs[1].repetitions, 10);
        assert_eq!(cfgs[0].points().unwrap().len(), 18);
        assert_eq!(cfgs[1].points().unwrap().len(), 18);
        let slater = figure_configs("supp4", 1).unwrap();
        assert_eq!(slater[0].physical_register(), 4);
    }
}

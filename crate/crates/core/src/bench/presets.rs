//! Built-in experiment grids.
//!
//! Each experiment comes in two dimension variants: `n = 512` measurements of
//! a `p = 256` signal, and the swapped underdetermined `n = 256`, `p = 512`.

use super::{Budgets, ExperimentConfig, Method, NoisePoint};
use crate::error::{Error, Result};
use crate::noise::NoiseFamily;

pub const DEFAULT_TRIALS: usize = 200;
/// Trial count of the original study.
pub const PAPER_TRIALS: usize = 2000;
pub const DEFAULT_SEED: u64 = 20_130_401;
pub const SPARSITY: usize = 8;
pub const AMPLITUDE: f64 = 10.0;
pub const STUDENT_T_DOFS: [f64; 8] = [1.0, 1.25, 1.5, 1.75, 2.0, 3.0, 4.0, 5.0];
pub const STUDENT_T_SNRS: [f64; 2] = [40.0, 20.0];

/// SNR sweep 20, 22, ..., 40 dB.
pub fn snr_sweep() -> Vec<f64> {
    (0..=10).map(|i| 20.0 + 2.0 * i as f64).collect()
}

fn methods() -> Vec<Method> {
    vec![Method::Iht, Method::hiht_c1(), Method::hiht_c2()]
}

fn base(name: &str, description: &str, n: usize, p: usize, noise: Vec<NoisePoint>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        description: description.to_string(),
        n,
        p,
        k: SPARSITY,
        amplitude: AMPLITUDE,
        num_trials: DEFAULT_TRIALS,
        master_seed: DEFAULT_SEED,
        fixed_matrix: false,
        methods: methods(),
        noise,
        budgets: Budgets::default(),
    }
}

fn sweep(family: NoiseFamily) -> Vec<NoisePoint> {
    snr_sweep().into_iter().map(|snr_db| NoisePoint { family, dof: None, snr_db }).collect()
}

fn student_t_grid() -> Vec<NoisePoint> {
    STUDENT_T_SNRS
        .iter()
        .flat_map(|&snr_db| {
            STUDENT_T_DOFS.iter().map(move |&dof| NoisePoint { family: NoiseFamily::StudentT, dof: Some(dof), snr_db })
        })
        .collect()
}

/// All built-in presets, literal dimensions first.
pub fn experiment_presets() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (suffix, n, p, dims) in [("", 512, 256, "n=512, p=256"), ("-swapped", 256, 512, "n=256, p=512")] {
        out.push(base(
            &format!("I-gaussian{suffix}"),
            &format!("Experiment I: Gaussian noise (scale = SD), SNR 20..40 dB step 2; {dims}, K=8, amplitude 10"),
            n,
            p,
            sweep(NoiseFamily::Gaussian),
        ));
        out.push(base(
            &format!("I-laplace{suffix}"),
            &format!("Experiment I: Laplace noise (scale = MeAD), SNR 20..40 dB step 2; {dims}, K=8, amplitude 10"),
            n,
            p,
            sweep(NoiseFamily::Laplace),
        ));
        out.push(base(
            &format!("II-studentT{suffix}"),
            &format!(
                "Experiment II: Student-t noise (scale = MAD), dof in {{1,1.25,1.5,1.75,2,3,4,5}} at SNR 40 and 20 dB; {dims}, K=8, amplitude 10"
            ),
            n,
            p,
            student_t_grid(),
        ));
    }
    out
}

/// Looks a preset up by name, ignoring ASCII case.
pub fn find_preset(name: &str) -> Result<ExperimentConfig> {
    experiment_presets()
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_grid_contents() {
        let presets = experiment_presets();
        assert_eq!(presets.len(), 6);
        for p in &presets {
            assert_eq!(p.k, 8);
            assert_eq!(p.amplitude, 10.0);
            assert_eq!(p.num_trials, DEFAULT_TRIALS);
            assert_eq!(p.methods.len(), 3);
            p.validate().unwrap();
        }
        let t = find_preset("II-studentT").unwrap();
        let dofs: Vec<f64> = t.noise.iter().filter(|p| p.snr_db == 40.0).map(|p| p.dof.unwrap()).collect();
        assert_eq!(dofs, STUDENT_T_DOFS);
        assert_eq!((t.n, t.p), (512, 256));
        let s = find_preset("ii-studentt-swapped").unwrap();
        assert_eq!((s.n, s.p), (256, 512));
        assert_eq!(find_preset("I-gaussian").unwrap().noise.len(), 11);
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(find_preset("III"), Err(Error::UnknownPreset(_))));
    }
}

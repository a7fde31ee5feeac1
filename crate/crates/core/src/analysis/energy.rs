use rayon::prelude::*;
use serde::Serialize;

use super::stats::{self, Fit};
use super::strong::MAX_BLOWUP_FRACTION;
use crate::interaction::{self, InteractionModel};
use crate::wiener::{self, NoiseSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyConfig {
    pub h: f64,
    pub t_end: f64,
    pub n_chains: usize,
    pub x0: [f64; 2],
    pub master_seed: u64,
    pub temperature: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            h: 0.01,
            t_end: 10.0,
            n_chains: 2000,
            x0: [0.0, 0.0],
            master_seed: 42,
            temperature: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `(nh, E[H(X_nh)])` at every step.
    pub mean_energy: Vec<(f64, f64)>,
    /// Least-squares line of the mean energy against time.
    pub fit: Fit,
    pub n_blowups: usize,
}

/// `(Q² + P²)/2`.
pub fn system_energy(x: &[f64]) -> f64 {
    0.5 * (x[0] * x[0] + x[1] * x[1])
}

/// Mean system energy `(Q₁² + P₁²)/2` along independent chains of a
/// two-dimensional model, and its growth rate.
pub fn energy_growth_test(model: &InteractionModel, cfg: &EnergyConfig) -> Result<EnergyReport> {
    if model.state_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: model.state_dim(),
            context: "energy test state",
        });
    }
    if cfg.n_chains == 0 {
        return Err(Error::config("n_chains must be positive"));
    }
    let spec = NoiseSpec::new(cfg.master_seed, model.noise_dim(), cfg.h, cfg.t_end, cfg.temperature)?;
    let per_chain: Vec<Option<Vec<f64>>> = (0..cfg.n_chains as u64)
        .into_par_iter()
        .map(|i| {
            let inc = wiener::sample_increments(&spec, i)?;
            match interaction::run_chain(model, cfg.h, &cfg.x0, &inc) {
                Ok(chain) => Ok(Some(chain.iter().map(system_energy).collect())),
                Err(Error::Blowup { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&Vec<f64>> = per_chain.iter().flatten().collect();
    let n_blowups = cfg.n_chains - ok.len();
    if n_blowups as f64 > MAX_BLOWUP_FRACTION * cfg.n_chains as f64 || ok.is_empty() {
        return Err(Error::ExperimentInvalid {
            h: cfg.h,
            blowups: n_blowups,
            paths: cfg.n_chains,
        });
    }
    let len = ok[0].len();
    let mut sums = vec![0.0; len];
    for energies in &ok {
        for (s, e) in sums.iter_mut().zip(energies.iter()) {
            *s += e;
        }
    }
    let count = ok.len() as f64;
    let mean_energy: Vec<(f64, f64)> = sums
        .iter()
        .enumerate()
        .map(|(n, s)| (n as f64 * cfg.h, s / count))
        .collect();
    Ok(EnergyReport {
        fit: stats::linear_fit(&mean_energy)?,
        mean_energy,
        n_blowups,
    })
}

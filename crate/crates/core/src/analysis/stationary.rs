use rayon::prelude::*;
use serde::Serialize;

use super::strong::MAX_BLOWUP_FRACTION;
use crate::interaction;
use crate::models::{self, DampedParams, ModelSpec};
use crate::reference::{lyapunov_stationary, LinearSDESpec};
use crate::wiener::{self, floor_steps, NoiseSpec};
use crate::{Error, Result};

/// Absolute slack added to the mean check, so a noise-free run is not failed by rounding.
const MEAN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryConfig {
    pub params: DampedParams,
    pub h: f64,
    pub t_end: f64,
    pub burn_in: f64,
    pub n_chains: usize,
    pub x0: [f64; 2],
    pub master_seed: u64,
    /// Allowed relative error of each variance.
    pub variance_tol: f64,
    /// Allowed distance of each mean from 0, in standard errors.
    pub mean_sigmas: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            params: DampedParams {
                friction: 1.0,
                temperature: 1.0,
            },
            h: 0.01,
            t_end: 200.0,
            burn_in: 100.0,
            n_chains: 200,
            x0: [1.0, 0.0],
            master_seed: 42,
            variance_tol: 0.15,
            mean_sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub mean: [f64; 2],
    /// Standard error of each mean, from the spread of per-chain time averages.
    pub mean_se: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Lyapunov covariance of the limit SDE.
    pub reference: [[f64; 2]; 2],
    /// Variance `T/f` of the Gibbs density `exp(−f(Q² + P²)/2T)`.
    pub gibbs_variance: f64,
    pub variance_ok: bool,
    pub mean_ok: bool,
    /// Both variances are also within tolerance of `T/f`.
    pub matches_gibbs_density: bool,
    pub passed: bool,
    pub n_samples: usize,
    pub n_blowups: usize,
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    if target == 0.0 {
        value.abs() < 1e-4
    } else {
        ((value - target) / target).abs() <= tol
    }
}

type ChainSums = ([f64; 2], [f64; 3], usize);

/// Runs independent damped chains and compares the pooled law on
/// `(burn_in, t_end]` with the stationary covariance of the limit SDE.
pub fn stationary_test(cfg: &StationaryConfig) -> Result<StationaryReport> {
    if !(cfg.t_end > cfg.burn_in && cfg.burn_in >= 0.0) {
        return Err(Error::config("need 0 <= burn_in < t_end"));
    }
    if cfg.n_chains == 0 {
        return Err(Error::config("n_chains must be positive"));
    }
    let model = models::damped_oscillator(cfg.params)?;
    let spec = NoiseSpec::new(cfg.master_seed, 2, cfg.h, cfg.t_end, cfg.params.temperature)?;
    let first = floor_steps(cfg.burn_in, cfg.h) + 1;

    // per chain: (sum x, sum x xᵀ as [xx, xy, yy], count)
    let per_chain: Vec<Option<ChainSums>> = (0..cfg.n_chains as u64)
        .into_par_iter()
        .map(|i| {
            let inc = wiener::sample_increments(&spec, i)?;
            let chain = match interaction::run_chain(&model, cfg.h, &cfg.x0, &inc) {
                Ok(c) => c,
                Err(Error::Blowup { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut s = [0.0; 2];
            let mut ss = [0.0; 3];
            let mut count = 0;
            for n in first..chain.len() {
                let x = chain.state(n);
                s[0] += x[0];
                s[1] += x[1];
                ss[0] += x[0] * x[0];
                ss[1] += x[0] * x[1];
                ss[2] += x[1] * x[1];
                count += 1;
            }
            Ok(Some((s, ss, count)))
        })
        .collect::<Result<_>>()?;

    let ok: Vec<_> = per_chain.iter().flatten().collect();
    let n_blowups = cfg.n_chains - ok.len();
    if n_blowups as f64 > MAX_BLOWUP_FRACTION * cfg.n_chains as f64 || ok.is_empty() {
        return Err(Error::ExperimentInvalid {
            h: cfg.h,
            blowups: n_blowups,
            paths: cfg.n_chains,
        });
    }
    let n_samples: usize = ok.iter().map(|c| c.2).sum();
    if n_samples == 0 {
        return Err(Error::config("no states after burn-in"));
    }
    let total = n_samples as f64;
    let mut mean = [0.0; 2];
    let mut second = [0.0; 3];
    for (s, ss, _) in &ok {
        mean[0] += s[0];
        mean[1] += s[1];
        for k in 0..3 {
            second[k] += ss[k];
        }
    }
    mean = [mean[0] / total, mean[1] / total];
    let covariance = [
        [second[0] / total - mean[0] * mean[0], second[1] / total - mean[0] * mean[1]],
        [second[1] / total - mean[0] * mean[1], second[2] / total - mean[1] * mean[1]],
    ];

    let mut mean_se = [0.0; 2];
    for (i, se) in mean_se.iter_mut().enumerate() {
        let chain_means: Vec<f64> = ok.iter().map(|c| c.0[i] / c.2 as f64).collect();
        *se = super::stats::mean_and_se(&chain_means).1;
    }

    let limit = LinearSDESpec::for_model(&ModelSpec::Damped(cfg.params));
    let c = lyapunov_stationary(&limit.drift, &limit.diffusion)?;
    let reference = [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]];
    let variance_ok = (0..2).all(|i| within(covariance[i][i], reference[i][i], cfg.variance_tol));
    let mean_ok = (0..2).all(|i| mean[i].abs() <= cfg.mean_sigmas * mean_se[i] + MEAN_FLOOR);
    let gibbs_variance = cfg.params.temperature / cfg.params.friction;
    let matches_gibbs_density = (0..2).all(|i| within(covariance[i][i], gibbs_variance, cfg.variance_tol));

    Ok(StationaryReport {
        mean,
        mean_se,
        covariance,
        reference,
        gibbs_variance,
        variance_ok,
        mean_ok,
        matches_gibbs_density,
        passed: variance_ok && mean_ok,
        n_samples,
        n_blowups,
    })
}

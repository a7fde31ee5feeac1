use rayon::prelude::*;
use serde::Serialize;

use super::stats::{self, Fit};
use super::strong::OracleKind;
use crate::interaction::{self, InteractionModel, Trajectory};
use crate::wiener::{self, integer_ratio, NoiseSpec};
use crate::{Error, Result};

/// Parameters of the increment-moment experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingConfig {
    /// Grid of the reference process; every time below must be a multiple of it.
    pub step: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub temperature: f64,
    /// State coordinate to measure; `None` uses the full Euclidean norm.
    pub component: Option<usize>,
    /// Time pairs `(s, t)` with `s ≤ t` for `E|X_t − X_s|²`.
    pub pairs: Vec<(f64, f64)>,
    /// Chain steps for the interpolation-gap moment.
    pub gap_steps: Vec<f64>,
    /// Horizon over which the interpolation gap is averaged.
    pub gap_horizon: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        let s = 0.5;
        Self {
            step: 2f64.powi(-12),
            n_paths: 2000,
            master_seed: 42,
            temperature: 1.0,
            component: None,
            pairs: (0..=10).map(|k| (s, s + 2f64.powi(-k))).collect(),
            gap_steps: (4..=9).map(|k| 2f64.powi(-k)).collect(),
            gap_horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    /// `(t − s, E|X_t − X_s|²)` for each configured pair.
    pub moments: Vec<(f64, f64)>,
    /// Log–log fit of the moments against the lag.
    pub fit: Fit,
    /// `(h, G(h))`, the time-averaged `E|X̄ʰ_t − X̄ʰ_{⌊t/h⌋h}|²` over the gap horizon.
    pub gap_moments: Vec<(f64, f64)>,
    pub gap_fit: Option<Fit>,
}

fn squared_gap(a: &[f64], b: &[f64], component: Option<usize>) -> f64 {
    match component {
        Some(i) => (a[i] - b[i]) * (a[i] - b[i]),
        None => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
    }
}

/// Time average of `|X̄ʰ_t − X̄ʰ_{⌊t/h⌋h}|²` over whole steps.
///
/// On step `n` the gap is `λ ΔX_n` with `λ` uniform in `[0, 1)`, so the
/// average of its square is `|ΔX_n|² / 3`.
fn mean_interpolation_gap(chain: &Trajectory, component: Option<usize>) -> f64 {
    let n = chain.len() - 1;
    let total: f64 = (0..n)
        .map(|i| squared_gap(chain.state(i + 1), chain.state(i), component))
        .sum();
    total / (3.0 * n as f64)
}

/// Second moments of the reference process over the configured time lags, and
/// the interpolation-gap moment of the scheme as a function of `h`.
///
/// The reference process (`oracle`) runs on `cfg.step`; chain runs use block
/// sums of the same increments.
pub fn increment_scaling_test(
    model: &InteractionModel,
    oracle: OracleKind,
    cfg: &ScalingConfig,
    x0: &[f64],
) -> Result<ScalingReport> {
    if cfg.n_paths == 0 {
        return Err(Error::config("n_paths must be positive"));
    }
    if let Some(i) = cfg.component {
        if i >= model.state_dim() {
            return Err(Error::config(format!("component {i} out of range")));
        }
    }
    let on_grid = |t: f64| -> Result<usize> {
        if t == 0.0 {
            return Ok(0);
        }
        integer_ratio(t, cfg.step).ok_or_else(|| Error::config(format!("time {t} is not on the grid of step {}", cfg.step)))
    };
    let mut pair_idx = Vec::with_capacity(cfg.pairs.len());
    for &(s, t) in &cfg.pairs {
        if !(0.0 <= s && s <= t) {
            return Err(Error::config(format!("pair ({s}, {t}) needs 0 <= s <= t")));
        }
        pair_idx.push((on_grid(s)?, on_grid(t)?));
    }
    let gap_n = on_grid(cfg.gap_horizon)?;
    let mut gap_factors = Vec::with_capacity(cfg.gap_steps.len());
    for &h in &cfg.gap_steps {
        let k = on_grid(h)?;
        if k == 0 || gap_n % k != 0 {
            return Err(Error::config(format!("gap horizon is not a multiple of h = {h}")));
        }
        gap_factors.push(k);
    }
    let n_steps = pair_idx.iter().map(|p| p.1).max().unwrap_or(0).max(gap_n).max(1);
    let spec = NoiseSpec::new(
        cfg.master_seed,
        model.noise_dim(),
        cfg.step,
        n_steps as f64 * cfg.step,
        cfg.temperature,
    )?;

    let per_path: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let fine = wiener::sample_increments(&spec, i)?;
            let process = oracle.trajectory(model, x0, &fine)?;
            let moments = pair_idx
                .iter()
                .map(|&(a, b)| squared_gap(process.state(b), process.state(a), cfg.component))
                .collect();
            let head = fine.truncated(gap_n);
            let gaps = gap_factors
                .iter()
                .zip(&cfg.gap_steps)
                .map(|(&k, &h)| {
                    let chain = interaction::run_chain(model, h, x0, &wiener::coarsen(&head, k)?)?;
                    Ok(mean_interpolation_gap(&chain, cfg.component))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((moments, gaps))
        })
        .collect::<Result<_>>()?;

    let m = cfg.n_paths as f64;
    let moments: Vec<(f64, f64)> = cfg
        .pairs
        .iter()
        .enumerate()
        .map(|(j, &(s, t))| (t - s, per_path.iter().map(|p| p.0[j]).sum::<f64>() / m))
        .collect();
    let gap_moments: Vec<(f64, f64)> = cfg
        .gap_steps
        .iter()
        .enumerate()
        .map(|(j, &h)| (h, per_path.iter().map(|p| p.1[j]).sum::<f64>() / m))
        .collect();
    Ok(ScalingReport {
        fit: stats::fit_rate(&moments)?,
        gap_fit: stats::fit_rate(&gap_moments).ok(),
        moments,
        gap_moments,
    })
}

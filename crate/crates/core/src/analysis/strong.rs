use rayon::prelude::*;
use serde::Serialize;

use super::stats::{self, Fit, Z_95};
use crate::interaction::{self, InteractionModel, Trajectory};
use crate::reference;
use crate::wiener::{self, integer_ratio, IncrementSequence, NoiseSpec};
use crate::{Error, Result};

/// Largest fraction of blown-up paths tolerated at any step size.
pub const MAX_BLOWUP_FRACTION: f64 = 0.01;

/// Grid and sampling parameters of a strong-error experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Horizon `τ` of the sup-error.
    pub tau: f64,
    /// Strictly decreasing step sizes, all in `(0, 1)`.
    pub h_list: Vec<f64>,
    pub n_paths: usize,
    pub p_list: Vec<f64>,
    pub master_seed: u64,
    /// Minimum ratio between the largest `h` and the oracle step.
    pub oracle_refinement: usize,
    /// Oracle step; defaults to `h_max / oracle_refinement`.
    pub oracle_step: Option<f64>,
    pub temperature: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            h_list: (4..=9).map(|k| 2f64.powi(-k)).collect(),
            n_paths: 2000,
            p_list: vec![2.0, 4.0],
            master_seed: 42,
            oracle_refinement: 64,
            oracle_step: None,
            temperature: 1.0,
        }
    }
}

/// Validated grid layout: the oracle step and every `h` as a multiple of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub finest: f64,
    pub n_fine: usize,
    pub factors: Vec<usize>,
}

impl ExperimentConfig {
    pub fn layout(&self) -> Result<GridLayout> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.h_list.is_empty() {
            return Err(Error::config("h_list is empty"));
        }
        if let Some(&h) = self.h_list.iter().find(|&&h| !(h > 0.0 && h < 1.0)) {
            return Err(Error::config(format!("h_list: every h must lie in (0, 1), got {h}")));
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("h_list must be strictly decreasing"));
        }
        if self.n_paths == 0 {
            return Err(Error::config("n_paths must be positive"));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
            return Err(Error::config("p_list: every p must be a finite number >= 1"));
        }
        if self.oracle_refinement < 64 {
            return Err(Error::config(format!(
                "oracle_refinement must be at least 64, got {}",
                self.oracle_refinement
            )));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("temperature must be nonnegative"));
        }
        let h_max = self.h_list[0];
        let finest = self.oracle_step.unwrap_or(h_max / self.oracle_refinement as f64);
        if !(finest > 0.0) {
            return Err(Error::config(format!("oracle_step must be positive, got {finest}")));
        }
        match integer_ratio(h_max, finest) {
            Some(k) if k >= self.oracle_refinement => {}
            _ => {
                return Err(Error::config(format!(
                    "oracle_step {finest} is not an integer fraction of h = {h_max} at least {}x finer",
                    self.oracle_refinement
                )))
            }
        }
        let mut factors = Vec::with_capacity(self.h_list.len());
        for &h in &self.h_list {
            let k = integer_ratio(h, finest).ok_or_else(|| {
                Error::config(format!("h_list: {h} is not a multiple of the oracle step {finest}"))
            })?;
            factors.push(k);
        }
        let n_fine = integer_ratio(self.tau, finest)
            .ok_or_else(|| Error::config(format!("tau {} is not a multiple of the oracle step {finest}", self.tau)))?;
        if let Some((&h, _)) = self.h_list.iter().zip(&factors).find(|(_, &k)| n_fine % k != 0) {
            return Err(Error::config(format!("tau {} is not a multiple of h = {h}", self.tau)));
        }
        Ok(GridLayout {
            finest,
            n_fine,
            factors,
        })
    }

    /// Stable text form used for hashing.
    pub fn canonical(&self) -> String {
        format!(
            "tau={:?};h_list={:?};n_paths={};p_list={:?};master_seed={};oracle_refinement={};oracle_step={:?};temperature={:?}",
            self.tau,
            self.h_list,
            self.n_paths,
            self.p_list,
            self.master_seed,
            self.oracle_refinement,
            self.oracle_step,
            self.temperature
        )
    }

    pub fn hash(&self) -> String {
        stats::sha256_hex(&self.canonical())
    }
}

/// Reference process the scheme is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    /// Closed-form charged-particle solution.
    ExactCharged { charge: f64, mass: f64 },
    /// Euler–Maruyama with the model's own `b` and `σ` on the oracle grid.
    Euler,
}

impl OracleKind {
    pub(crate) fn trajectory(&self, model: &InteractionModel, x0: &[f64], inc: &IncrementSequence) -> Result<Trajectory> {
        match *self {
            OracleKind::ExactCharged { charge, mass } => {
                let x0: [f64; 2] = x0.try_into().map_err(|_| Error::DimensionMismatch {
                    expected: 2,
                    actual: x0.len(),
                    context: "charged particle initial state",
                })?;
                reference::exact_charged_solution(charge, mass, x0, inc)
            }
            OracleKind::Euler => reference::euler_oracle(model, x0, inc),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::ExactCharged { .. } => "exact-charged",
            OracleKind::Euler => "euler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub h: f64,
    pub p: f64,
    /// `Ê[sup^p]^{1/p}`.
    pub error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Paths that entered the estimate.
    pub n_paths: usize,
    pub n_blowups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFitEntry {
    pub p: f64,
    pub fit: Option<Fit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub model: String,
    pub oracle: &'static str,
    pub master_seed: u64,
    pub config_hash: String,
    /// Sorted by `h` descending, then `p` ascending.
    pub rows: Vec<ErrorRow>,
    pub fits: Vec<RateFitEntry>,
}

impl ErrorReport {
    pub fn rows_for(&self, p: f64) -> Vec<ErrorRow> {
        self.rows.iter().filter(|r| r.p == p).copied().collect()
    }

    pub fn fit_for(&self, p: f64) -> Option<Fit> {
        self.fits.iter().find(|f| f.p == p).and_then(|f| f.fit)
    }

    /// Error decreases with `h`, except where consecutive confidence intervals overlap.
    pub fn monotone_within_ci(&self, p: f64) -> bool {
        self.rows_for(p)
            .windows(2)
            .all(|w| w[1].error <= w[0].error || w[1].ci_low <= w[0].ci_high)
    }
}

/// `sup_j |X_oracle(t_j) − X̄^h(t_j)|` over the oracle nodes, where the chain
/// at step `k·finest` is interpolated with exact integer weights.
fn sup_error(oracle: &Trajectory, chain: &Trajectory, k: usize) -> f64 {
    let m = oracle.dim();
    let mut diff = vec![0.0; m];
    let mut sup = 0.0f64;
    for (j, target) in oracle.iter().enumerate() {
        let (n, r) = (j / k, j % k);
        if r == 0 {
            for ((d, a), b) in diff.iter_mut().zip(target).zip(chain.state(n)) {
                *d = a - b;
            }
        } else {
            let w = r as f64 / k as f64;
            let (lo, hi) = (chain.state(n), chain.state(n + 1));
            for i in 0..m {
                diff[i] = target[i] - (lo[i] + w * (hi[i] - lo[i]));
            }
        }
        sup = sup.max(crate::linalg::norm(&diff));
    }
    sup
}

/// Per path: `Some(sup error)` for each `h`, or `None` if the chain or the oracle blew up.
fn path_errors(
    model: &InteractionModel,
    oracle: OracleKind,
    cfg: &ExperimentConfig,
    layout: &GridLayout,
    x0: &[f64],
    index: u64,
) -> Result<Vec<Option<f64>>> {
    let spec = NoiseSpec::new(
        cfg.master_seed,
        model.noise_dim(),
        layout.finest,
        layout.n_fine as f64 * layout.finest,
        cfg.temperature,
    )?;
    let fine = wiener::sample_increments(&spec, index)?;
    let reference = match oracle.trajectory(model, x0, &fine) {
        Ok(t) => t,
        Err(Error::Blowup { .. }) => return Ok(vec![None; layout.factors.len()]),
        Err(e) => return Err(e),
    };
    layout
        .factors
        .iter()
        .zip(&cfg.h_list)
        .map(|(&k, &h)| {
            let coarse = wiener::coarsen(&fine, k)?;
            debug_assert_eq!(coarse.len() * k, fine.len());
            match interaction::run_chain(model, h, x0, &coarse) {
                Ok(chain) => Ok(Some(sup_error(&reference, &chain, k))),
                Err(Error::Blowup { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Monte Carlo strong sup-error of the scheme against `oracle`, with common-path coupling.
///
/// Every path draws its finest increments once; each `h` consumes exactly
/// their block sums. Blown-up paths are excluded per `h` and counted; more
/// than [`MAX_BLOWUP_FRACTION`] of them invalidates the experiment.
///
/// Paths run in parallel on the current rayon pool. Results are collected in
/// path order and reduced sequentially, so the report does not depend on the
/// number of threads.
pub fn strong_error_experiment(
    model: &InteractionModel,
    oracle: OracleKind,
    cfg: &ExperimentConfig,
    x0: &[f64],
) -> Result<ErrorReport> {
    let layout = cfg.layout()?;
    if x0.len() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.state_dim(),
            actual: x0.len(),
            context: "initial state",
        });
    }
    let per_path: Vec<Vec<Option<f64>>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| path_errors(model, oracle, cfg, &layout, x0, i))
        .collect::<Result<_>>()?;

    let mut p_list = cfg.p_list.clone();
    p_list.sort_by(f64::total_cmp);
    p_list.dedup();

    let mut rows = Vec::with_capacity(cfg.h_list.len() * p_list.len());
    for (slot, &h) in cfg.h_list.iter().enumerate() {
        let sups: Vec<f64> = per_path.iter().filter_map(|errs| errs[slot]).collect();
        let blowups = cfg.n_paths - sups.len();
        if blowups as f64 > MAX_BLOWUP_FRACTION * cfg.n_paths as f64 || sups.is_empty() {
            return Err(Error::ExperimentInvalid {
                h,
                blowups,
                paths: cfg.n_paths,
            });
        }
        for &p in &p_list {
            let powers: Vec<f64> = sups.iter().map(|s| s.powf(p)).collect();
            let (mean, se) = stats::mean_and_se(&powers);
            let lo = (mean - Z_95 * se).max(0.0);
            let hi = mean + Z_95 * se;
            rows.push(ErrorRow {
                h,
                p,
                error: mean.powf(1.0 / p),
                ci_low: lo.powf(1.0 / p),
                ci_high: hi.powf(1.0 / p),
                n_paths: sups.len(),
                n_blowups: blowups,
            });
        }
    }

    let fits = p_list
        .iter()
        .map(|&p| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.p == p).map(|r| (r.h, r.error)).collect();
            RateFitEntry {
                p,
                fit: stats::fit_rate(&pts).ok(),
            }
        })
        .collect();

    Ok(ErrorReport {
        model: model.name().to_string(),
        oracle: oracle.name(),
        master_seed: cfg.master_seed,
        config_hash: cfg.hash(),
        rows,
        fits,
    })
}

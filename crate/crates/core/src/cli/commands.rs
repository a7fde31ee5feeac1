use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Command, RunConfig};
use super::CliError;
use crate::analysis::{
    self, energy_growth_test, increment_scaling_test, is_nonincreasing, shift_convergence_test, stationary_test,
    strong_error_experiment, EnergyConfig, OracleKind, ScalingConfig, StationaryConfig,
};
use crate::interaction::{self, validate_h1, validate_h4, PointSampler};
use crate::models::{self, DampedParams, ModelSpec};
use crate::wiener::{brownian_path, NoiseSpec};

/// One pass/fail criterion of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: threshold.into(),
            passed,
        }
    }
}

/// Everything a subcommand produces before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub checks: Vec<Check>,
    pub results: Value,
    pub plot: String,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub(super) fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Converge => converge(cfg),
        Command::Shift => shift(cfg),
        Command::Stationary => stationary(cfg),
        Command::Energy => energy(cfg),
        Command::Scaling => scaling(cfg),
        Command::Validate => validate(cfg),
        Command::FlowDemo => flow_demo(cfg),
    }
}

fn pair(cfg: &RunConfig, key: &str) -> [f64; 2] {
    let v = cfg.reals(key).unwrap_or_default();
    [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]
}

fn header(command: Command) -> String {
    format!("{}\n", super::csv_header(command))
}

fn oracle_for(spec: &ModelSpec) -> OracleKind {
    match *spec {
        ModelSpec::Charged(p) => OracleKind::ExactCharged {
            charge: p.charge,
            mass: p.mass,
        },
        _ => OracleKind::Euler,
    }
}

fn converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.model();
    let model = spec.build()?;
    let exp = cfg.experiment();
    let report = strong_error_experiment(&model, oracle_for(&spec), &exp, &pair(cfg, "x0"))?;

    let mut csv = header(Command::Converge);
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.h, r.p, r.error, r.ci_low, r.ci_high, r.n_paths, r.n_blowups
        );
    }

    let charged = matches!(spec, ModelSpec::Charged(_));
    let slope_min = cfg.real("slope_min").unwrap_or(if charged { 0.4 } else { 0.35 });
    let slope_max = cfg.real("slope_max").unwrap_or(if charged { 0.6 } else { f64::INFINITY });
    let r2_min = cfg.real("r2_min").unwrap_or(if charged { 0.98 } else { 0.0 });
    let mut checks = Vec::new();
    for entry in &report.fits {
        let p = entry.p;
        match entry.fit {
            Some(fit) => {
                let range = if slope_max.is_finite() {
                    format!("[{slope_min}, {slope_max}]")
                } else {
                    format!(">= {slope_min}")
                };
                checks.push(Check::new(
                    format!("slope_p{p}"),
                    fit.slope,
                    range,
                    fit.slope >= slope_min && fit.slope <= slope_max,
                ));
                if r2_min > 0.0 {
                    checks.push(Check::new(
                        format!("r2_p{p}"),
                        fit.r_squared,
                        format!(">= {r2_min}"),
                        fit.r_squared >= r2_min,
                    ));
                }
            }
            None => checks.push(Check::new(format!("slope_p{p}"), f64::NAN, "fit needs 3 step sizes", false)),
        }
        let monotone = report.monotone_within_ci(p);
        checks.push(Check::new(
            format!("monotone_p{p}"),
            if monotone { 1.0 } else { 0.0 },
            "error decreasing in h or confidence intervals overlap",
            monotone,
        ));
    }

    let mut plot = String::from(
        "set datafile separator ','\nset logscale xy\nset key left top\nset xlabel 'h'\nset ylabel 'strong sup-error'\n",
    );
    let mut sorted_p: Vec<f64> = report.fits.iter().map(|f| f.p).collect();
    sorted_p.sort_by(f64::total_cmp);
    let curves: Vec<String> = sorted_p
        .iter()
        .map(|p| {
            format!("'results.csv' every ::1 using ($2=={p}?$1:1/0):3:4:5 with yerrorlines title 'p = {p}'")
        })
        .collect();
    let _ = writeln!(plot, "plot {}", curves.join(", \\\n     "));

    Ok(Outcome {
        csv,
        checks,
        results: json!({
            "model": report.model,
            "oracle": report.oracle,
            "experiment_hash": report.config_hash,
            "fits": report.fits,
            "rows": report.rows,
        }),
        plot,
    })
}

type ShiftSeries = (f64, Vec<(f64, f64)>);

fn shift(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let times = cfg.reals("t").unwrap_or_default();
    let mut h_list = cfg.reals("h_list").unwrap_or_default();
    h_list.sort_by(|a, b| b.total_cmp(a));
    let n_terms = cfg.count("n_terms").unwrap_or(10);
    let step = cfg.real("step").unwrap_or(2f64.powi(-12));
    let paths = cfg.count("paths").unwrap_or(20);
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let h_max = h_list.first().copied().unwrap_or(step).max(step);
    let horizon = ((t_max + n_terms as f64 + 1.0) / h_max).ceil() * h_max;
    let noise = NoiseSpec::new(cfg.seed(), 1, step, horizon, 1.0).map_err(CliError::from)?;

    let per_path: Vec<Vec<ShiftSeries>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let omega = brownian_path(&noise, i)?;
            times
                .iter()
                .map(|&t| Ok((t, shift_convergence_test(&omega, t, &h_list, n_terms)?)))
                .collect::<crate::Result<Vec<_>>>()
        })
        .collect::<crate::Result<_>>()?;

    let mut csv = header(Command::Shift);
    let (mut monotone, mut decayed, mut cases) = (0usize, 0usize, 0usize);
    let mut worst_ratio = 0.0f64;
    for (i, per_t) in per_path.iter().enumerate() {
        for (t, values) in per_t {
            for (h, d) in values {
                let _ = writeln!(csv, "{i},{t},{h},{d}");
            }
            cases += 1;
            if is_nonincreasing(values, 1e-12) {
                monotone += 1;
            }
            let first = values.first().map(|v| v.1).unwrap_or(0.0);
            let last = values.last().map(|v| v.1).unwrap_or(0.0);
            let ratio = if first > 0.0 { last / first } else { 0.0 };
            worst_ratio = worst_ratio.max(ratio);
            if last < 0.25 * first || first == 0.0 {
                decayed += 1;
            }
        }
    }
    let checks = vec![
        Check::new(
            "nonincreasing_fraction",
            monotone as f64 / cases as f64,
            "1 (every path and t, slack 1e-12)",
            monotone == cases,
        ),
        Check::new(
            "worst_final_over_initial",
            worst_ratio,
            "< 0.25 for every path and t",
            decayed == cases,
        ),
    ];
    let plot = "set datafile separator ','\nset logscale xy\nset xlabel 'h'\nset ylabel 'D'\n\
                plot 'results.csv' every ::1 using 3:4 with points pt 7 ps 0.4 title 'D(shift, interpolated shift)'\n"
        .to_string();
    Ok(Outcome {
        csv,
        checks,
        results: json!({ "cases": cases, "nonincreasing": monotone, "decayed": decayed, "horizon": horizon }),
        plot,
    })
}

fn stationary(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = match cfg.model() {
        ModelSpec::Damped(p) => p,
        _ => unreachable!("validated at configuration"),
    };
    let base = StationaryConfig {
        params,
        h: cfg.real("step").unwrap_or(0.01),
        t_end: cfg.real("t_end").unwrap_or(200.0),
        burn_in: cfg.real("burn_in").unwrap_or(100.0),
        n_chains: cfg.count("paths").unwrap_or(200),
        x0: pair(cfg, "x0"),
        master_seed: cfg.seed(),
        ..Default::default()
    };
    let report = stationary_test(&base)?;
    let doubled = stationary_test(&StationaryConfig {
        params: DampedParams {
            temperature: 2.0 * params.temperature,
            ..params
        },
        ..base.clone()
    })?;

    let mut csv = header(Command::Stationary);
    let c = report.covariance;
    let r = report.reference;
    let _ = writeln!(csv, "mean_q,{},0,{}", report.mean[0], report.mean_se[0]);
    let _ = writeln!(csv, "mean_p,{},0,{}", report.mean[1], report.mean_se[1]);
    let _ = writeln!(csv, "var_q,{},{},", c[0][0], r[0][0]);
    let _ = writeln!(csv, "var_p,{},{},", c[1][1], r[1][1]);
    let _ = writeln!(csv, "cov_qp,{},{},", c[0][1], r[0][1]);

    let tol = base.variance_tol;
    let mut checks = Vec::new();
    for (i, name) in ["var_q_rel_error", "var_p_rel_error"].into_iter().enumerate() {
        let (v, target) = (c[i][i], r[i][i]);
        let check = if target == 0.0 {
            Check::new(name, v.abs(), "< 1e-4 (zero reference)", v.abs() < 1e-4)
        } else {
            let rel = (v - target).abs() / target;
            Check::new(name, rel, format!("<= {tol}"), rel <= tol)
        };
        checks.push(check);
    }
    for (i, name) in ["mean_q_in_se", "mean_p_in_se"].into_iter().enumerate() {
        let (m, se) = (report.mean[i].abs(), report.mean_se[i]);
        let z = if se > 0.0 { m / se } else { 0.0 };
        checks.push(Check::new(name, z, format!("<= {}", base.mean_sigmas), m <= base.mean_sigmas * se + 1e-9));
    }
    if params.temperature > 0.0 {
        for (i, name) in ["var_q_doubling_ratio", "var_p_doubling_ratio"].into_iter().enumerate() {
            let ratio = doubled.covariance[i][i] / c[i][i];
            checks.push(Check::new(name, ratio, format!("2 within {tol}"), (ratio / 2.0 - 1.0).abs() <= tol));
        }
    }
    checks.push(Check::new(
        "gibbs_t_over_f_rejected",
        report.gibbs_variance,
        format!("empirical variances differ from T/f by more than {tol}"),
        !report.matches_gibbs_density || params.temperature == 0.0,
    ));

    let plot = "set datafile separator ','\nset style data histograms\nset style fill solid 0.5\n\
                plot 'results.csv' every ::3::4 using 2:xtic(1) title 'empirical', '' every ::3::4 using 3 title 'Lyapunov'\n"
        .to_string();
    Ok(Outcome {
        csv,
        checks,
        results: json!({ "report": report, "doubled_temperature": doubled }),
        plot,
    })
}

fn energy(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.model();
    let model = spec.build()?;
    let temperature = spec.temperature();
    let ecfg = EnergyConfig {
        h: cfg.real("step").unwrap_or(0.01),
        t_end: cfg.real("t_end").unwrap_or(10.0),
        n_chains: cfg.count("paths").unwrap_or(2000),
        x0: pair(cfg, "x0"),
        master_seed: cfg.seed(),
        temperature,
    };
    let report = energy_growth_test(&model, &ecfg)?;
    let mut csv = header(Command::Energy);
    for (t, e) in &report.mean_energy {
        let _ = writeln!(csv, "{t},{e}");
    }
    let expected = 0.5 * temperature;
    let rel = if expected > 0.0 { (report.fit.slope - expected).abs() / expected } else { report.fit.slope.abs() };
    let checks = vec![Check::new(
        "slope",
        report.fit.slope,
        format!("{expected} within 10%"),
        rel <= 0.1 || (expected == 0.0 && rel < 1e-3),
    )];
    let plot = format!(
        "set datafile separator ','\nset xlabel 't'\nset ylabel 'E[H]'\n\
         plot 'results.csv' every ::1 using 1:2 with lines title 'mean energy', {expected}*x title 'rate T/2'\n"
    );
    Ok(Outcome {
        csv,
        checks,
        results: json!({ "fit": report.fit, "n_blowups": report.n_blowups }),
        plot,
    })
}

fn scaling(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.model();
    let model = spec.build()?;
    let s = cfg.real("s").unwrap_or(0.5);
    let lags = cfg.reals("lags").unwrap_or_default();
    let scfg = ScalingConfig {
        step: cfg.real("step").unwrap_or(2f64.powi(-12)),
        n_paths: cfg.count("paths").unwrap_or(2000),
        master_seed: cfg.seed(),
        temperature: spec.temperature(),
        component: matches!(spec, ModelSpec::Charged(_)).then_some(1),
        pairs: std::iter::once((s, s)).chain(lags.iter().map(|&l| (s, s + l))).collect(),
        gap_steps: cfg.reals("h_list").unwrap_or_default(),
        gap_horizon: cfg.real("tau").unwrap_or(1.0),
    };
    let report = increment_scaling_test(&model, oracle_for(&spec), &scfg, &pair(cfg, "x0"))?;
    let mut csv = header(Command::Scaling);
    for (lag, m) in &report.moments {
        let _ = writeln!(csv, "lag,{lag},{m}");
    }
    for (h, m) in &report.gap_moments {
        let _ = writeln!(csv, "gap,{h},{m}");
    }
    let slope = report.fit.slope;
    let mut checks = vec![Check::new("increment_slope", slope, "[0.95, 1.05]", (0.95..=1.05).contains(&slope))];
    match report.gap_fit {
        Some(fit) => checks.push(Check::new("gap_slope", fit.slope, "[0.9, 1.1]", (0.9..=1.1).contains(&fit.slope))),
        None => checks.push(Check::new("gap_slope", f64::NAN, "fit needs 3 step sizes", false)),
    }
    let plot = "set datafile separator ','\nset logscale xy\n\
                plot 'results.csv' using ((stringcolumn(1) eq 'lag') ? $2 : 1/0):3 with linespoints title 'E|X_t - X_s|^2 vs t - s', \\\n     \
                '' using ((stringcolumn(1) eq 'gap') ? $2 : 1/0):3 with linespoints title 'interpolation gap vs h'\n"
        .to_string();
    Ok(Outcome {
        csv,
        checks,
        results: json!({ "fit": report.fit, "gap_fit": report.gap_fit }),
        plot,
    })
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.model();
    let model = spec.build()?;
    let sampler = PointSampler {
        seed: cfg.seed(),
        ..Default::default()
    };
    let n = cfg.count("samples").unwrap_or(100_000);
    let h_list = cfg.reals("h_list").unwrap_or_default();
    let h1 = validate_h1(&model, &sampler, n)?;
    let h4 = validate_h4(&model, &h_list, &sampler, n)?;

    let mut csv = header(Command::Validate);
    let declared = h1.declared.map(|k| k.to_string()).unwrap_or_default();
    let _ = writeln!(csv, "H1,,{},{},{}", h1.estimate, declared, h1.violated);
    for (h, ratio) in &h4.per_step {
        let _ = writeln!(csv, "H4,{h},{ratio},{},{}", h4.declared.k2, *ratio > h4.declared.k2 * (1.0 + 1e-9) + 1e-12);
    }
    let checks = vec![
        Check::new("h1_estimate", h1.estimate, format!("<= declared K0 = {declared}"), !h1.violated),
        Check::new("h4_worst_ratio", h4.worst_ratio, format!("<= declared K2 = {}", h4.declared.k2), !h4.violated),
        Check::new(
            "h4_alpha_consistent",
            if h4.alpha_consistent { 1.0 } else { 0.0 },
            format!("|eta(h,x,0)| <= K2 h^{} |x|", h4.declared.alpha),
            h4.alpha_consistent,
        ),
    ];
    let plot = "set datafile separator ','\nset logscale x\nset xlabel 'h'\nset ylabel '|eta| / (h^alpha|x| + |y|)'\n\
                plot 'results.csv' every ::2 using 2:3 with linespoints title 'worst ratio', '' every ::2 using 2:4 with lines title 'declared K2'\n"
        .to_string();
    Ok(Outcome {
        csv,
        checks,
        results: json!({
            "model": model.name(),
            "h1": { "estimate": h1.estimate, "drift_ratio": h1.drift_ratio, "diffusion_ratio": h1.diffusion_ratio,
                    "declared": h1.declared, "pairs_used": h1.pairs_used },
            "h4": { "worst_ratio": h4.worst_ratio, "per_step": h4.per_step, "k2": h4.declared.k2,
                    "alpha": if h4.declared.alpha.is_finite() { json!(h4.declared.alpha) } else { json!("inf") },
                    "samples_used": h4.samples_used },
        }),
        plot,
    })
}

/// Largest one-step gap between the Taylor map and the exact flow, at step `h`.
fn taylor_gap(state: [f64; 4], rest_length: f64, h: f64) -> crate::Result<f64> {
    let model = models::harmonic(models::HarmonicParams { rest_length });
    let [q1, p1, q2, p2] = state;
    let stepped = interaction::step(&model, h, &[q1, p1], &[h * q2, h * p2])?;
    let exact = models::harmonic_exact_flow(state, rest_length, h);
    Ok((stepped[0] - exact[0]).hypot(stepped[1] - exact[1]))
}

fn flow_demo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.reals("state").unwrap_or_else(|| vec![1.0, 0.0, 0.0, 0.0]);
    let state = [s[0], s[1], s[2], s[3]];
    let l = cfg.real("rest_length").unwrap_or(0.0);
    let step = cfg.real("step").unwrap_or(0.01);
    let t_end = cfg.real("t_end").unwrap_or(10.0);
    let n = crate::wiener::steps_in(t_end, step);
    let h0 = models::hamiltonian_harmonic(state, l);
    let mut csv = header(Command::FlowDemo);
    let mut drift = 0.0f64;
    for k in 0..=n {
        let t = k as f64 * step;
        let x = models::harmonic_exact_flow(state, l, t);
        let e = models::hamiltonian_harmonic(x, l);
        let gap = if h0 != 0.0 { ((e - h0) / h0).abs() } else { e.abs() };
        drift = drift.max(gap);
        let _ = writeln!(csv, "{t},{},{},{},{},{e}", x[0], x[1], x[2], x[3]);
    }
    let steps: Vec<f64> = (0..6).map(|k| 0.1 * 2f64.powi(-k)).collect();
    let gaps: Vec<(f64, f64)> = steps
        .iter()
        .map(|&h| Ok((h, taylor_gap(state, l, h)?)))
        .collect::<crate::Result<_>>()?;
    let order = analysis::fit_rate(&gaps).map(|f| f.slope).unwrap_or(f64::NAN);
    let checks = vec![
        Check::new("energy_relative_drift", drift, "< 1e-9", drift < 1e-9),
        Check::new("taylor_order", order, "[2.8, 3.2]", (2.8..=3.2).contains(&order)),
    ];
    let plot = "set datafile separator ','\nset xlabel 't'\n\
                plot 'results.csv' every ::1 using 1:2 with lines title 'Q1', '' every ::1 using 1:4 with lines title 'Q2'\n"
        .to_string();
    Ok(Outcome {
        csv,
        checks,
        results: json!({ "taylor_gaps": gaps, "hamiltonian": h0 }),
        plot,
    })
}

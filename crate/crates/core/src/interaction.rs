//! The repeated-interaction scheme.
//!
//! One interaction of duration `h` maps the small system's state `x ∈ ℝ^m`
//! and one environment increment `y ∈ ℝ^d` to
//!
//! ```text
//! U(x, y) = x + σ(x) y + h b(x) + h η(h, x, y)
//! ```
//!
//! Iterating `U` over an [`IncrementSequence`] gives the Markov chain
//! ([`run_chain`]); interpolating it linearly in time gives a continuous
//! process ([`interpolate_process`]). Together with the interpolated shift of
//! the environment path this is the embedded dynamics `T̄_t` on `ℝ^m × Ω`
//! ([`embedded_dynamics`]).

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::wiener::{self, floor_steps, IncrementSequence, PiecewiseLinear, SamplePath};
use crate::{Error, Result};

type VectorField = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type RemainderFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// Declared bound `|η(h, x, y)| ≤ K₂ (h^α |x| + |y|)`; `alpha` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaBound {
    pub k2: f64,
    pub alpha: f64,
}

impl EtaBound {
    pub fn new(k2: f64, alpha: f64) -> Self {
        Self { k2, alpha }
    }

    /// `h^α |x| + |y|`, with `h^∞ = 0` for `h < 1`.
    pub fn scale(&self, h: f64, x_norm: f64, y_norm: f64) -> f64 {
        let hx = if x_norm == 0.0 { 0.0 } else { h.powf(self.alpha) * x_norm };
        hx + y_norm
    }
}

/// The triple `(σ, b, η)` defining `U^(h)`, plus the constants it is declared to satisfy.
///
/// `σ` writes an `m × d` matrix in row-major order. Models are immutable and
/// cheap to clone.
#[derive(Clone)]
pub struct InteractionModel {
    name: String,
    state_dim: usize,
    noise_dim: usize,
    diffusion: Arc<VectorField>,
    drift: Arc<VectorField>,
    remainder: Arc<RemainderFn>,
    lipschitz: Option<f64>,
    eta_bound: EtaBound,
}

impl fmt::Debug for InteractionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InteractionModel")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("noise_dim", &self.noise_dim)
            .field("lipschitz", &self.lipschitz)
            .field("eta_bound", &self.eta_bound)
            .finish_non_exhaustive()
    }
}

pub struct ModelBuilder {
    model: InteractionModel,
}

impl ModelBuilder {
    pub fn diffusion(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.model.diffusion = Arc::new(f);
        self
    }

    pub fn drift(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.model.drift = Arc::new(f);
        self
    }

    pub fn remainder(
        mut self,
        f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.model.remainder = Arc::new(f);
        self
    }

    pub fn lipschitz(mut self, k0: f64) -> Self {
        self.model.lipschitz = Some(k0);
        self
    }

    pub fn eta_bound(mut self, k2: f64, alpha: f64) -> Self {
        self.model.eta_bound = EtaBound::new(k2, alpha);
        self
    }

    pub fn build(self) -> Result<InteractionModel> {
        let m = &self.model;
        if m.state_dim == 0 || m.noise_dim == 0 {
            return Err(Error::config("model dimensions must be positive"));
        }
        if m.lipschitz.is_some_and(|k| !(k >= 0.0)) {
            return Err(Error::config("Lipschitz constant must be nonnegative"));
        }
        if !(m.eta_bound.k2 >= 0.0) || !(m.eta_bound.alpha > 0.0) {
            return Err(Error::config("eta bound needs K2 >= 0 and alpha > 0"));
        }
        Ok(self.model)
    }
}

impl InteractionModel {
    /// Starts a model whose coefficients are all zero until set.
    pub fn builder(name: impl Into<String>, state_dim: usize, noise_dim: usize) -> ModelBuilder {
        ModelBuilder {
            model: InteractionModel {
                name: name.into(),
                state_dim,
                noise_dim,
                diffusion: Arc::new(|_, out| out.fill(0.0)),
                drift: Arc::new(|_, out| out.fill(0.0)),
                remainder: Arc::new(|_, _, _, out| out.fill(0.0)),
                lipschitz: None,
                eta_bound: EtaBound::new(0.0, f64::INFINITY),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn eta_bound(&self) -> EtaBound {
        self.eta_bound
    }

    pub fn sigma(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim * self.noise_dim];
        (self.diffusion)(x, &mut out);
        out
    }

    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim];
        (self.drift)(x, &mut out);
        out
    }

    pub fn eta(&self, h: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim];
        (self.remainder)(h, x, y, &mut out);
        out
    }

    /// Same `σ` and `b` with `η ≡ 0`: the plain Euler–Maruyama scheme.
    pub fn without_remainder(&self) -> InteractionModel {
        InteractionModel {
            name: format!("{}-euler", self.name),
            remainder: Arc::new(|_, _, _, out| out.fill(0.0)),
            eta_bound: EtaBound::new(0.0, f64::INFINITY),
            ..self.clone()
        }
    }

    fn check_dims(&self, x: &[f64], y_dim: usize) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim,
                actual: x.len(),
                context: "state vector",
            });
        }
        if y_dim != self.noise_dim {
            return Err(Error::DimensionMismatch {
                expected: self.noise_dim,
                actual: y_dim,
                context: "noise vector",
            });
        }
        Ok(())
    }
}

/// Reusable scratch space for applying `U^(h)` in a loop.
pub(crate) struct Stepper<'a> {
    model: &'a InteractionModel,
    sigma: Vec<f64>,
    drift: Vec<f64>,
    eta: Vec<f64>,
    with_remainder: bool,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(model: &'a InteractionModel) -> Self {
        Self {
            model,
            sigma: vec![0.0; model.state_dim * model.noise_dim],
            drift: vec![0.0; model.state_dim],
            eta: vec![0.0; model.state_dim],
            with_remainder: true,
        }
    }

    /// Euler–Maruyama: ignores the model's `η`.
    pub(crate) fn euler(model: &'a InteractionModel) -> Self {
        Self {
            with_remainder: false,
            ..Self::new(model)
        }
    }

    /// Writes `U^(h)(x, y)` into `out`; returns `false` if any coordinate is non-finite.
    pub(crate) fn apply(&mut self, h: f64, x: &[f64], y: &[f64], out: &mut [f64]) -> bool {
        let m = self.model;
        (m.diffusion)(x, &mut self.sigma);
        (m.drift)(x, &mut self.drift);
        out.copy_from_slice(x);
        linalg::mat_vec_acc(&self.sigma, m.state_dim, m.noise_dim, y, out);
        if self.with_remainder {
            (m.remainder)(h, x, y, &mut self.eta);
            for ((o, b), e) in out.iter_mut().zip(&self.drift).zip(&self.eta) {
                *o += h * b + h * e;
            }
        } else {
            for (o, b) in out.iter_mut().zip(&self.drift) {
                *o += h * b;
            }
        }
        out.iter().all(|v| v.is_finite())
    }
}

/// One interaction: `x + σ(x)y + h b(x) + h η(h, x, y)`.
pub fn step(model: &InteractionModel, h: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::config(format!("step must be positive, got {h}")));
    }
    model.check_dims(x, y.len())?;
    let mut out = vec![0.0; model.state_dim];
    if Stepper::new(model).apply(h, x, y, &mut out) {
        Ok(out)
    } else {
        Err(Error::Blowup { step: 1 })
    }
}

/// States `X_0, X_h, X_2h, …` of a chain; entry 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    step: f64,
    dim: usize,
    states: Vec<f64>,
}

impl Trajectory {
    pub fn new(step: f64, dim: usize, states: Vec<f64>) -> Result<Self> {
        if dim == 0 || states.is_empty() || !states.len().is_multiple_of(dim) {
            return Err(Error::config("trajectory needs at least one state of positive dimension"));
        }
        Ok(Self { step, dim, states })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states (consumed increments + 1).
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.states.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.states
    }
}

fn chain_with(
    mut stepper: Stepper<'_>,
    model: &InteractionModel,
    h: f64,
    x0: &[f64],
    inc: &IncrementSequence,
) -> Result<Trajectory> {
    if !(h > 0.0) {
        return Err(Error::config(format!("step must be positive, got {h}")));
    }
    if (inc.step() - h).abs() > 1e-12 * h {
        return Err(Error::config(format!(
            "increment step {} does not match chain step {h}",
            inc.step()
        )));
    }
    model.check_dims(x0, inc.dim())?;
    let m = model.state_dim;
    let mut states = Vec::with_capacity((inc.len() + 1) * m);
    states.extend_from_slice(x0);
    let mut next = vec![0.0; m];
    for (n, y) in inc.iter().enumerate() {
        let x = &states[n * m..(n + 1) * m];
        if !stepper.apply(h, x, y, &mut next) {
            return Err(Error::Blowup { step: n + 1 });
        }
        states.extend_from_slice(&next);
    }
    Ok(Trajectory {
        step: h,
        dim: m,
        states,
    })
}

/// Iterates `U^(h)` from `x0` over every increment of `inc`.
pub fn run_chain(
    model: &InteractionModel,
    h: f64,
    x0: &[f64],
    inc: &IncrementSequence,
) -> Result<Trajectory> {
    chain_with(Stepper::new(model), model, h, x0, inc)
}

/// Plain Euler–Maruyama recursion `x + h b(x) + σ(x) y` over `inc`.
pub(crate) fn run_euler(model: &InteractionModel, x0: &[f64], inc: &IncrementSequence) -> Result<Trajectory> {
    chain_with(Stepper::euler(model), model, inc.step(), x0, inc)
}

/// Continuous-time process `X̄_t`: linear interpolation of the chain between `nh` and `(n+1)h`.
pub fn interpolate_process(traj: &Trajectory) -> PiecewiseLinear {
    PiecewiseLinear::uniform(traj.step, traj.dim, traj.states.clone())
}

/// Environment component `θ̄_t(ω)` of the embedded dynamics.
///
/// With `n = ⌊t/h⌋` and `λ = (t − nh)/h`, this is the nodewise combination
/// `(1 − λ)·φ_I(θ^n φ_P ω) + λ·φ_I(θ^{n+1} φ_P ω)` on the grid `{0, h, 2h, …}`,
/// where `θ` drops the first increment of a sequence.
pub fn interpolated_shift(omega: &SamplePath, h: f64, t: f64) -> Result<SamplePath> {
    if !(h > 0.0) || !(t >= 0.0) {
        return Err(Error::config(format!("need h > 0 and t >= 0, got h={h}, t={t}")));
    }
    if omega.horizon() < t + h - wiener::GRID_TOL * omega.horizon().max(1.0) {
        return Err(Error::OutOfDomain {
            t: t + h,
            horizon: omega.horizon(),
        });
    }
    let inc = wiener::phi_p(omega, h)?;
    let n = floor_steps(t, h);
    let lambda = ((t - n as f64 * h) / h).max(0.0);
    let lower = wiener::phi_i(&inc.skip(n));
    if lambda == 0.0 {
        return Ok(lower);
    }
    let upper = wiener::phi_i(&inc.skip(n + 1));
    let d = omega.dim();
    let len = upper.n_nodes();
    let grid: Vec<f64> = (0..len).map(|j| j as f64 * h).collect();
    let mut nodes = Vec::with_capacity(len * d);
    for j in 0..len {
        nodes.extend(
            lower
                .node(j)
                .iter()
                .zip(upper.node(j))
                .map(|(a, b)| (1.0 - lambda) * a + lambda * b),
        );
    }
    SamplePath::from_nodes(grid, d, nodes)
}

/// `T̄_t(x0, ω) = (X̄_t(φ_P ω), θ̄_t(ω))`.
pub fn embedded_dynamics(
    model: &InteractionModel,
    h: f64,
    x0: &[f64],
    omega: &SamplePath,
    t: f64,
) -> Result<(Vec<f64>, SamplePath)> {
    let shifted = interpolated_shift(omega, h, t)?;
    let inc = wiener::phi_p(omega, h)?;
    let n = floor_steps(t, h);
    let traj = run_chain(model, h, x0, &inc.truncated(n + 1))?;
    let state = interpolate_process(&traj).evaluate(t)?;
    Ok((state, shifted))
}

/// Source of random test points for the hypothesis validators.
///
/// Points are drawn in the box `[−radius, radius]^k`, with a log-uniform
/// magnitude factor so that small vectors are probed as often as large ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSampler {
    pub radius: f64,
    pub seed: u64,
}

impl Default for PointSampler {
    fn default() -> Self {
        Self {
            radius: 10.0,
            seed: 0x5eed,
        }
    }
}

impl PointSampler {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn point(&self, rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        let scale = self.radius * 10f64.powf(-4.0 * rng.random::<f64>());
        (0..dim).map(|_| scale * rng.random_range(-1.0..=1.0)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    /// Largest observed `|b(x) − b(y)| / |x − y|`.
    pub drift_ratio: f64,
    /// Largest observed `‖σ(x) − σ(y)‖ / |x − y|` (Hilbert–Schmidt norm).
    pub diffusion_ratio: f64,
    pub estimate: f64,
    pub declared: Option<f64>,
    pub violated: bool,
    pub pairs_used: usize,
}

/// Sampling estimate of the global Lipschitz constant of `b` and `σ`.
///
/// Half of the pairs are independent points, half are a point and a small
/// perturbation of it. Pairs with `x == y` are skipped.
pub fn validate_h1(model: &InteractionModel, sampler: &PointSampler, n_samples: usize) -> Result<LipschitzReport> {
    if n_samples < 2 {
        return Err(Error::config("validate_h1 needs at least 2 samples"));
    }
    let m = model.state_dim;
    let mut rng = sampler.rng(1);
    let (mut drift_ratio, mut diffusion_ratio) = (0.0f64, 0.0f64);
    let mut used = 0;
    for i in 0..n_samples {
        let x = sampler.point(&mut rng, m);
        let y = if i % 2 == 0 {
            sampler.point(&mut rng, m)
        } else {
            let eps = sampler.radius * 10f64.powf(-7.0 * rng.random::<f64>());
            x.iter().map(|v| v + eps * rng.random_range(-1.0..=1.0)).collect()
        };
        let gap = linalg::dist(&x, &y);
        if gap == 0.0 {
            continue;
        }
        used += 1;
        drift_ratio = drift_ratio.max(linalg::dist(&model.drift(&x), &model.drift(&y)) / gap);
        diffusion_ratio = diffusion_ratio.max(linalg::dist(&model.sigma(&x), &model.sigma(&y)) / gap);
    }
    if used == 0 {
        return Err(Error::DegenerateSamples);
    }
    let estimate = drift_ratio.max(diffusion_ratio);
    let violated = model
        .lipschitz
        .is_some_and(|k0| estimate > k0 * (1.0 + 1e-9) + 1e-12);
    Ok(LipschitzReport {
        drift_ratio,
        diffusion_ratio,
        estimate,
        declared: model.lipschitz,
        violated,
        pairs_used: used,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    /// Largest observed `|η(h,x,y)| / (h^α|x| + |y|)`, i.e. the smallest `K₂` consistent with the samples.
    pub worst_ratio: f64,
    /// Worst ratio per tested `h`.
    pub per_step: Vec<(f64, f64)>,
    pub declared: EtaBound,
    pub violated: bool,
    /// The `y = 0` probes satisfy `|η(h,x,0)| ≤ K₂ h^α |x|` at every tested `h`.
    pub alpha_consistent: bool,
    pub samples_used: usize,
}

/// Spot-checks `|η(h,x,y)| ≤ K₂ (h^α|x| + |y|)` with the model's declared `(K₂, α)`.
///
/// One sample in four is taken with `y = 0`; those isolate the `h^α|x|` term.
pub fn validate_h4(
    model: &InteractionModel,
    h_list: &[f64],
    sampler: &PointSampler,
    n_samples: usize,
) -> Result<RemainderReport> {
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(Error::config("validate_h4 needs step sizes in (0, 1)"));
    }
    let bound = model.eta_bound;
    let tol = |k2: f64| k2 * (1.0 + 1e-9) + 1e-12;
    let mut rng = sampler.rng(4);
    let mut per_step: Vec<(f64, f64)> = h_list.iter().map(|&h| (h, 0.0)).collect();
    let mut alpha_consistent = true;
    let mut used = 0;
    for i in 0..n_samples {
        let slot = i % h_list.len();
        let h = h_list[slot];
        let x = sampler.point(&mut rng, model.state_dim);
        let y = if i % 4 == 3 {
            vec![0.0; model.noise_dim]
        } else {
            sampler.point(&mut rng, model.noise_dim)
        };
        let eta = linalg::norm(&model.eta(h, &x, &y));
        let denom = bound.scale(h, linalg::norm(&x), linalg::norm(&y));
        let ratio = if denom > 0.0 {
            eta / denom
        } else if eta > 0.0 {
            f64::INFINITY
        } else {
            continue;
        };
        used += 1;
        if i % 4 == 3 && ratio > tol(bound.k2) {
            alpha_consistent = false;
        }
        per_step[slot].1 = per_step[slot].1.max(ratio);
    }
    let worst_ratio = per_step.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(RemainderReport {
        worst_ratio,
        per_step,
        declared: bound,
        violated: worst_ratio > tol(bound.k2),
        alpha_consistent,
        samples_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, ChargedParticleParams, HarmonicParams};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn charged() -> InteractionModel {
        models::charged_particle(ChargedParticleParams { charge: 1.0, mass: 1.0 }).unwrap()
    }

    #[test]
    fn charged_step_example() {
        let x = step(&charged(), 0.1, &[0.0, 0.0], &[0.5]).unwrap();
        assert!(close(&x, &[0.025, 0.5], 1e-15), "{x:?}");
    }

    #[test]
    fn zero_model_leaves_state_unchanged() {
        let model = InteractionModel::builder("zero", 3, 2).build().unwrap();
        let x = [1.0, -2.0, 3.5];
        assert_eq!(step(&model, 0.3, &x, &[0.7, -0.1]).unwrap(), x.to_vec());
    }

    #[test]
    fn harmonic_step_example() {
        let model = models::harmonic(HarmonicParams { rest_length: 0.0 });
        let x = step(&model, 0.1, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(close(&x, &[0.995, -0.1], 1e-15), "{x:?}");
    }

    #[test]
    fn step_reports_blowup_and_bad_dimensions() {
        let model = InteractionModel::builder("explode", 1, 1)
            .drift(|x, out| out[0] = x[0] * 1e300)
            .build()
            .unwrap();
        assert_eq!(step(&model, 0.5, &[1e10], &[0.0]), Err(Error::Blowup { step: 1 }));
        assert!(matches!(
            step(&model, 0.5, &[1.0, 2.0], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(step(&model, 0.0, &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn chain_blowup_carries_step_index() {
        let model = InteractionModel::builder("grow", 1, 1)
            .drift(|x, out| out[0] = x[0] * x[0])
            .build()
            .unwrap();
        let inc = IncrementSequence::zeros(1.0, 1, 20).unwrap();
        match run_chain(&model, 1.0, &[2.0], &inc) {
            Err(Error::Blowup { step }) => assert!(step > 5 && step <= 20, "step {step}"),
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn charged_chain_without_noise() {
        let inc = IncrementSequence::zeros(0.5, 1, 2).unwrap();
        let traj = run_chain(&charged(), 0.5, &[0.0, 1.0], &inc).unwrap();
        assert_eq!(traj.len(), 3);
        assert_eq!(traj.state(0), &[0.0, 1.0]);
        assert_eq!(traj.state(1), &[0.5, 1.0]);
        assert_eq!(traj.state(2), &[1.0, 1.0]);
    }

    #[test]
    fn empty_chain_is_initial_state() {
        let inc = IncrementSequence::zeros(0.5, 1, 0).unwrap();
        let traj = run_chain(&charged(), 0.5, &[0.3, 0.2], &inc).unwrap();
        assert_eq!(traj.as_slice(), &[0.3, 0.2]);
    }

    #[test]
    fn chain_rejects_mismatched_step() {
        let inc = IncrementSequence::zeros(0.25, 1, 4).unwrap();
        assert!(run_chain(&charged(), 0.5, &[0.0, 0.0], &inc).is_err());
    }

    #[test]
    fn interpolation_example() {
        let traj = Trajectory::new(1.0, 2, vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        let path = interpolate_process(&traj);
        assert_eq!(path.evaluate(0.25).unwrap(), vec![0.5, 0.5]);
        assert_eq!(path.evaluate(1.0).unwrap(), vec![2.0, 2.0]);
        assert_eq!(path.evaluate(0.5).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn embedded_dynamics_at_zero_and_on_grid() {
        let inc = IncrementSequence::new(0.25, 1, vec![0.5, -0.25, 1.0, 0.125, -0.5, 0.75]).unwrap();
        let omega = wiener::phi_i(&inc);
        let model = charged();
        let x0 = [0.1, -0.2];

        let (x, theta) = embedded_dynamics(&model, 0.25, &x0, &omega, 0.0).unwrap();
        assert_eq!(x, x0.to_vec());
        assert_eq!(theta, omega);

        let (x, theta) = embedded_dynamics(&model, 0.25, &x0, &omega, 0.5).unwrap();
        let traj = run_chain(&model, 0.25, &x0, &inc).unwrap();
        assert_eq!(x, traj.state(2).to_vec());
        assert_eq!(theta, wiener::phi_i(&inc.skip(2)));
    }

    #[test]
    fn interpolated_shift_off_grid_is_barycentre() {
        let inc = IncrementSequence::new(0.5, 1, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let omega = wiener::phi_i(&inc);
        // t = 0.75: n = 1, λ = 0.5; lower = φ_I(2, −1, 0.5), upper = φ_I(−1, 0.5)
        let theta = interpolated_shift(&omega, 0.5, 0.75).unwrap();
        assert_eq!(theta.grid(), &[0.0, 0.5, 1.0]);
        assert_eq!(theta.node(1), &[0.5 * 2.0 - 0.5 * 1.0]);
        assert_eq!(theta.node(2), &[0.5 * 1.0 + 0.5 * -0.5]);
        assert!(interpolated_shift(&omega, 0.5, 1.9).is_err());
    }

    #[test]
    fn h1_examples() {
        let sampler = PointSampler::default();
        let model = models::charged_particle(ChargedParticleParams { charge: 2.0, mass: 4.0 }).unwrap();
        let report = validate_h1(&model, &sampler, 2000).unwrap();
        assert!(report.estimate <= 0.25 && report.estimate > 0.25 * (1.0 - 1e-4), "{report:?}");
        assert!(!report.violated);
        assert_eq!(report.diffusion_ratio, 0.0);

        let constant = InteractionModel::builder("const", 2, 1)
            .drift(|_, out| out.copy_from_slice(&[1.0, 2.0]))
            .diffusion(|_, out| out.copy_from_slice(&[3.0, 4.0]))
            .lipschitz(0.0)
            .build()
            .unwrap();
        let report = validate_h1(&constant, &sampler, 100).unwrap();
        assert_eq!(report.estimate, 0.0);
        assert!(!report.violated);

        let harmonic = models::harmonic(HarmonicParams { rest_length: 0.3 });
        let report = validate_h1(&harmonic, &sampler, 2000).unwrap();
        assert!(report.estimate <= 1.0 + 1e-9 && report.estimate > 0.99);

        assert!(validate_h1(&harmonic, &sampler, 1).is_err());
    }

    #[test]
    fn h1_all_degenerate_pairs() {
        let sampler = PointSampler {
            radius: 0.0,
            seed: 1,
        };
        let model = charged();
        assert_eq!(validate_h1(&model, &sampler, 10), Err(Error::DegenerateSamples));
    }

    #[test]
    fn h4_examples() {
        let sampler = PointSampler::default();
        let hs = [0.5, 0.1, 0.01, 0.001];
        let model = models::charged_particle(ChargedParticleParams { charge: 3.0, mass: 2.0 }).unwrap();
        let report = validate_h4(&model, &hs, &sampler, 4000).unwrap();
        assert!(!report.violated && report.alpha_consistent);
        assert!((report.worst_ratio - 0.75).abs() < 1e-12, "{report:?}");

        let zero = InteractionModel::builder("zero", 2, 2).build().unwrap();
        let report = validate_h4(&zero, &hs, &sampler, 100).unwrap();
        assert!(!report.violated);
        assert_eq!(report.worst_ratio, 0.0);

        let harmonic = models::harmonic(HarmonicParams { rest_length: 0.0 });
        assert_eq!(harmonic.eta_bound().alpha, 1.0);
        let report = validate_h4(&harmonic, &hs, &sampler, 4000).unwrap();
        assert!(!report.violated && report.alpha_consistent, "{report:?}");

        assert!(validate_h4(&harmonic, &[1.5], &sampler, 10).is_err());
    }

    #[test]
    fn h4_flags_overstated_alpha() {
        let model = InteractionModel::builder("linear-eta", 1, 1)
            .remainder(|h, x, _, out| out[0] = h * x[0])
            .eta_bound(1.0, 2.0)
            .build()
            .unwrap();
        let report = validate_h4(&model, &[0.5, 0.01], &PointSampler::default(), 400).unwrap();
        assert!(report.violated);
        assert!(!report.alpha_consistent);
    }
}

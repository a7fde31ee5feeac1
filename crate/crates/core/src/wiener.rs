//! Brownian increments and the embedding of increment sequences into path space.
//!
//! An [`IncrementSequence`] is an element of the discrete environment: one
//! `d`-dimensional vector per interaction of length `h`. A [`SamplePath`] is a
//! continuous piecewise-linear path vanishing at the origin. The two are
//! related by [`phi_i`] (partial sums, linearly interpolated) and [`phi_p`]
//! (increments at the times `nh`), with `phi_p(phi_i(y), h) == y` bitwise.
//!
//! Sample paths keep their segment increments alongside the node values, so
//! projecting a path back onto its own grid (or onto an integer multiple of
//! it) re-reads stored increments rather than differencing rounded partial
//! sums.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg;
use crate::{Error, Result};

/// Relative tolerance used when snapping times to grid nodes and ratios to integers.
pub(crate) const GRID_TOL: f64 = 1e-9;

/// Returns `a / b` when it is a positive integer up to [`GRID_TOL`].
pub(crate) fn integer_ratio(a: f64, b: f64) -> Option<usize> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return None;
    }
    let r = a / b;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= GRID_TOL * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

/// `⌈horizon / step⌉`, treating ratios within [`GRID_TOL`] of an integer as exact.
pub fn steps_in(horizon: f64, step: f64) -> usize {
    let r = horizon / step;
    let k = r.round();
    if (r - k).abs() <= GRID_TOL * k.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// `⌊t / step⌋`, with the same snapping as [`steps_in`].
pub(crate) fn floor_steps(t: f64, step: f64) -> usize {
    let r = t / step;
    let k = r.round();
    if (r - k).abs() <= GRID_TOL * k.max(1.0) {
        k.max(0.0) as usize
    } else {
        r.floor().max(0.0) as usize
    }
}

/// Parameters of the environment noise.
///
/// Increments are i.i.d. `Normal(0, T·h)` per coordinate; the temperature `T`
/// rescales the environment states by `√T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub master_seed: u64,
    pub dim: usize,
    pub step: f64,
    pub horizon: f64,
    pub temperature: f64,
}

impl NoiseSpec {
    pub fn new(master_seed: u64, dim: usize, step: f64, horizon: f64, temperature: f64) -> Result<Self> {
        let spec = Self {
            master_seed,
            dim,
            step,
            horizon,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.dim == 0 {
            return Err(Error::config("noise dimension must be positive"));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::config(format!(
                "temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        steps_in(self.horizon, self.step)
    }
}

/// Per-interaction environment increments `(y_h, y_2h, …)` for a fixed step `h`.
///
/// Stored flat: increment `n` (0-based, covering `(nh, (n+1)h]`) occupies
/// `values[n*dim..(n+1)*dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSequence {
    step: f64,
    dim: usize,
    values: Vec<f64>,
}

impl IncrementSequence {
    pub fn new(step: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config(format!("step must be positive, got {step}")));
        }
        if dim == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: values.len() % dim,
                context: "increment values length is not a multiple of the dimension",
            });
        }
        Ok(Self { step, dim, values })
    }

    pub fn zeros(step: f64, dim: usize, len: usize) -> Result<Self> {
        Self::new(step, dim, vec![0.0; dim * len])
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of increments.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.len() as f64 * self.step
    }

    pub fn get(&self, n: usize) -> &[f64] {
        &self.values[n * self.dim..(n + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Discrete shift: drops the first `n` increments.
    pub fn skip(&self, n: usize) -> IncrementSequence {
        let n = n.min(self.len());
        Self {
            step: self.step,
            dim: self.dim,
            values: self.values[n * self.dim..].to_vec(),
        }
    }

    /// Keeps the first `n` increments.
    pub fn truncated(&self, n: usize) -> IncrementSequence {
        let n = n.min(self.len());
        Self {
            step: self.step,
            dim: self.dim,
            values: self.values[..n * self.dim].to_vec(),
        }
    }
}

/// Draws the increments of Brownian path number `path_index`.
///
/// The stream is ChaCha8 seeded from `master_seed` (via `seed_from_u64`) with
/// the ChaCha stream id set to `path_index`, so every path is an independent,
/// order-free substream. Normals come from the Ziggurat sampler of
/// `rand_distr::StandardNormal`, which only uses table lookups and IEEE
/// arithmetic on its fast path.
pub fn sample_increments(spec: &NoiseSpec, path_index: u64) -> Result<IncrementSequence> {
    spec.validate()?;
    let n = spec.n_steps();
    let scale = (spec.temperature * spec.step).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(path_index);
    let values = (0..n * spec.dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    IncrementSequence::new(spec.step, spec.dim, values)
}

/// Sums consecutive blocks of `factor` increments; the result has step `factor·h`.
pub fn coarsen(inc: &IncrementSequence, factor: usize) -> Result<IncrementSequence> {
    if factor == 0 || !inc.len().is_multiple_of(factor) {
        return Err(Error::NotDivisible {
            len: inc.len(),
            factor,
        });
    }
    if factor == 1 {
        return Ok(inc.clone());
    }
    let d = inc.dim;
    let mut values = Vec::with_capacity(inc.values.len() / factor);
    for block in inc.values.chunks_exact(d * factor) {
        let mut acc = block[..d].to_vec();
        for row in block[d..].chunks_exact(d) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        values.extend_from_slice(&acc);
    }
    IncrementSequence::new(inc.step * factor as f64, d, values)
}

/// Continuous piecewise-linear function on `[0, horizon]` given by its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    dim: usize,
    grid: Vec<f64>,
    nodes: Vec<f64>,
    /// `Some(g)` when `grid[i] == i as f64 * g` for every node.
    step: Option<f64>,
}

impl PiecewiseLinear {
    pub fn new(grid: Vec<f64>, dim: usize, nodes: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        if grid.is_empty() || grid[0] != 0.0 {
            return Err(Error::config("grid must start at 0"));
        }
        if nodes.len() != grid.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * dim,
                actual: nodes.len(),
                context: "nodes length must equal grid length times dimension",
            });
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::config("grid must be finite and strictly increasing"));
        }
        Ok(Self::new_unchecked(grid, dim, nodes))
    }

    fn new_unchecked(grid: Vec<f64>, dim: usize, nodes: Vec<f64>) -> Self {
        let step = if grid.len() >= 2 {
            let g = grid[1];
            grid.iter()
                .enumerate()
                .all(|(i, &t)| t == i as f64 * g)
                .then_some(g)
        } else {
            None
        };
        Self {
            dim,
            grid,
            nodes,
            step,
        }
    }

    pub(crate) fn uniform(step: f64, dim: usize, nodes: Vec<f64>) -> Self {
        let n = nodes.len() / dim;
        let grid = (0..n).map(|i| i as f64 * step).collect();
        Self {
            dim,
            grid,
            nodes,
            step: (n >= 2).then_some(step),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("grid is nonempty")
    }

    /// Uniform grid spacing, if the grid is `{0, g, 2g, …}` exactly.
    pub fn uniform_step(&self) -> Option<f64> {
        self.step
    }

    fn check_domain(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        let tol = GRID_TOL * horizon.max(1.0);
        if !t.is_finite() || t < -tol || t > horizon + tol {
            return Err(Error::OutOfDomain { t, horizon });
        }
        Ok(t.clamp(0.0, horizon))
    }

    /// Index `i` of the segment `[grid[i], grid[i+1])` containing `t`.
    fn segment(&self, t: f64) -> usize {
        let last = self.grid.len() - 1;
        let mut i = match self.step {
            Some(g) => ((t / g).floor() as usize).min(last),
            None => self.grid.partition_point(|&x| x <= t).saturating_sub(1),
        };
        while i > 0 && self.grid[i] > t {
            i -= 1;
        }
        while i < last && self.grid[i + 1] <= t {
            i += 1;
        }
        i
    }

    pub fn evaluate_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let t = self.check_domain(t)?;
        let i = self.segment(t);
        let a = self.node(i);
        if i + 1 == self.grid.len() || t == self.grid[i] {
            out.copy_from_slice(a);
            return Ok(());
        }
        let b = self.node(i + 1);
        let w = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + w * (y - x);
        }
        Ok(())
    }

    /// Linear interpolation between the nodes bracketing `t`; exact node values on the grid.
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(t, &mut out)?;
        Ok(out)
    }
}

/// Element of Wiener space restricted to a finite horizon: a continuous
/// piecewise-linear path with `ω(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    path: PiecewiseLinear,
    /// Segment increments, `increments[i] = node[i+1] - node[i]`.
    increments: Vec<f64>,
}

impl SamplePath {
    /// Path on the uniform grid `{0, h, 2h, …}` whose segment increments are `values`.
    pub fn from_increments(step: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        let inc = IncrementSequence::new(step, dim, values)?;
        Ok(Self::from_sequence(inc))
    }

    fn from_sequence(inc: IncrementSequence) -> Self {
        let d = inc.dim;
        let mut nodes = vec![0.0; d];
        nodes.reserve(inc.values.len());
        for (n, row) in inc.values.chunks_exact(d).enumerate() {
            for j in 0..d {
                let prev = nodes[n * d + j];
                nodes.push(prev + row[j]);
            }
        }
        Self {
            path: PiecewiseLinear::uniform(inc.step, d, nodes),
            increments: inc.values,
        }
    }

    /// Path through the given nodes; the first node must be the zero vector.
    pub fn from_nodes(grid: Vec<f64>, dim: usize, nodes: Vec<f64>) -> Result<Self> {
        let path = PiecewiseLinear::new(grid, dim, nodes)?;
        if path.node(0).iter().any(|&v| v != 0.0) {
            return Err(Error::config("sample paths must vanish at the origin"));
        }
        let increments = path
            .nodes
            .windows(2 * dim)
            .step_by(dim)
            .flat_map(|w| (0..dim).map(move |j| w[dim + j] - w[j]))
            .collect();
        Ok(Self { path, increments })
    }

    fn from_parts(grid: Vec<f64>, dim: usize, increments: Vec<f64>) -> Self {
        let mut nodes = vec![0.0; dim];
        nodes.reserve(increments.len());
        for (n, row) in increments.chunks_exact(dim).enumerate() {
            for j in 0..dim {
                let prev = nodes[n * dim + j];
                nodes.push(prev + row[j]);
            }
        }
        Self {
            path: PiecewiseLinear::new_unchecked(grid, dim, nodes),
            increments,
        }
    }

    pub fn dim(&self) -> usize {
        self.path.dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.path.grid
    }

    pub fn node(&self, i: usize) -> &[f64] {
        self.path.node(i)
    }

    pub fn n_nodes(&self) -> usize {
        self.path.n_nodes()
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon()
    }

    pub fn as_piecewise(&self) -> &PiecewiseLinear {
        &self.path
    }

    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        self.path.evaluate(t)
    }

    pub fn evaluate_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        self.path.evaluate_into(t, out)
    }

    /// `θ_t(ω)(s) = ω(t + s) − ω(t)`, defined on `[0, horizon − t]`.
    ///
    /// When `t` is a grid node the remaining segment increments are reused
    /// unchanged, so shifting a path built by [`phi_i`] by `nh` gives exactly
    /// `phi_i` of the sequence with its first `n` entries dropped.
    pub fn shift(&self, t: f64) -> Result<SamplePath> {
        let t = self.path.check_domain(t)?;
        let d = self.dim();
        let grid = &self.path.grid;
        let tol = GRID_TOL * self.horizon().max(1.0);
        let i = self.path.segment(t);

        if let Some(g) = self.path.step {
            if let Some(j) = snap_to_node(t, g) {
                let j = j.min(grid.len() - 1);
                return Ok(Self::from_sequence(IncrementSequence {
                    step: g,
                    dim: d,
                    values: self.increments[j * d..].to_vec(),
                }));
            }
        }
        let on_node = (t - grid[i]).abs() <= tol;
        let next = if on_node { i } else { i + 1 };
        if next >= grid.len() {
            return Ok(Self::from_parts(vec![0.0], d, Vec::new()));
        }
        let mut new_grid = Vec::with_capacity(grid.len() - next + 1);
        new_grid.push(0.0);
        let mut increments = Vec::with_capacity(self.increments.len());
        if !on_node {
            let start = self.path.evaluate(t)?;
            new_grid.push(grid[next] - t);
            increments.extend(self.path.node(next).iter().zip(&start).map(|(b, a)| b - a));
        }
        let origin = if on_node { grid[i] } else { t };
        new_grid.extend(grid[next + 1..].iter().map(|&g| g - origin));
        increments.extend_from_slice(&self.increments[next * d..]);
        Ok(Self::from_parts(new_grid, d, increments))
    }
}

fn snap_to_node(t: f64, g: f64) -> Option<usize> {
    if t == 0.0 {
        return Some(0);
    }
    integer_ratio(t, g)
}

/// `φ_I`: the piecewise-linear path whose increments at the times `nh` are `inc`.
pub fn phi_i(inc: &IncrementSequence) -> SamplePath {
    SamplePath::from_sequence(inc.clone())
}

/// `φ_P`: the increments `ω(nh) − ω((n−1)h)` for every `nh` inside the path's horizon.
pub fn phi_p(path: &SamplePath, h: f64) -> Result<IncrementSequence> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("step must be positive, got {h}")));
    }
    let horizon = path.horizon();
    let n = floor_steps(horizon, h);
    if n == 0 {
        return Err(Error::OutOfDomain { t: h, horizon });
    }
    let d = path.dim();
    if let Some(k) = path.path.step.and_then(|g| integer_ratio(h, g)) {
        if n * k <= path.increments.len() / d {
            let head = IncrementSequence {
                step: path.path.step.unwrap(),
                dim: d,
                values: path.increments[..n * k * d].to_vec(),
            };
            let mut coarse = coarsen(&head, k)?;
            coarse.step = h;
            return Ok(coarse);
        }
    }
    let mut values = Vec::with_capacity(n * d);
    let mut prev = vec![0.0; d];
    let mut cur = vec![0.0; d];
    for i in 1..=n {
        path.evaluate_into(i as f64 * h, &mut cur)?;
        values.extend(cur.iter().zip(&prev).map(|(b, a)| b - a));
        std::mem::swap(&mut prev, &mut cur);
    }
    IncrementSequence::new(h, d, values)
}

/// Brownian sample path number `path_index`: `φ_I` of its sampled increments.
pub fn brownian_path(spec: &NoiseSpec, path_index: u64) -> Result<SamplePath> {
    Ok(phi_i(&sample_increments(spec, path_index)?))
}

/// Default truncation level of [`metric_d`] for paths of the given horizon.
pub fn default_metric_terms(horizon: f64) -> usize {
    (horizon.ceil() as usize).max(10)
}

/// Truncated path metric `Σ_{n=1}^{N} 2^{−n} s_n / (1 + s_n)` with
/// `s_n = sup_{[0,n]} |a − b|`.
///
/// The omitted tail is at most `2^{−N}`. The difference of two piecewise-linear
/// paths is piecewise linear on the union of their grids, so each `s_n` is a
/// maximum over that union (plus the endpoint `n`) and carries no sampling error.
pub fn metric_d(a: &SamplePath, b: &SamplePath, n_terms: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
            context: "metric_d paths",
        });
    }
    if n_terms == 0 {
        return Err(Error::config("metric_d needs at least one term"));
    }
    let limit = n_terms as f64;
    for p in [a, b] {
        if p.horizon() < limit - GRID_TOL * limit {
            return Err(Error::OutOfDomain {
                t: limit,
                horizon: p.horizon(),
            });
        }
    }
    let mut times: Vec<f64> = a
        .grid()
        .iter()
        .chain(b.grid())
        .copied()
        .filter(|&t| t <= limit)
        .chain((1..=n_terms).map(|n| n as f64))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let d = a.dim();
    let mut va = vec![0.0; d];
    let mut vb = vec![0.0; d];
    let mut sup = 0.0f64;
    let mut next_term = 1usize;
    let mut total = 0.0;
    for &t in &times {
        a.evaluate_into(t, &mut va)?;
        b.evaluate_into(t, &mut vb)?;
        sup = sup.max(linalg::dist(&va, &vb));
        if t == next_term as f64 {
            total += 0.5f64.powi(next_term as i32) * sup / (1.0 + sup);
            next_term += 1;
        }
    }
    debug_assert_eq!(next_term, n_terms + 1);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(step: f64, values: &[f64]) -> IncrementSequence {
        IncrementSequence::new(step, 1, values.to_vec()).unwrap()
    }

    #[test]
    fn unit_horizon_unit_step_gives_one_increment() {
        let spec = NoiseSpec::new(7, 1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(sample_increments(&spec, 0).unwrap().len(), 1);
    }

    #[test]
    fn sampling_is_deterministic_per_path() {
        let spec = NoiseSpec::new(42, 2, 0.01, 1.0, 1.0).unwrap();
        let a = sample_increments(&spec, 3).unwrap();
        let b = sample_increments(&spec, 3).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = sample_increments(&spec, 4).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn invalid_noise_specs_are_rejected() {
        assert!(NoiseSpec::new(0, 1, 0.0, 1.0, 1.0).is_err());
        assert!(NoiseSpec::new(0, 1, 0.1, 0.0, 1.0).is_err());
        assert!(NoiseSpec::new(0, 1, 0.1, -1.0, 1.0).is_err());
        assert!(NoiseSpec::new(0, 1, 0.1, 1.0, -1.0).is_err());
    }

    #[test]
    fn step_count_snaps_near_integers() {
        assert_eq!(steps_in(1.0, 0.1), 10);
        assert_eq!(steps_in(0.3, 0.1), 3);
        assert_eq!(steps_in(1.05, 0.1), 11);
    }

    #[test]
    fn coarsen_sums_blocks() {
        let inc = seq(0.1, &[0.1, -0.2, 0.3, 0.4]);
        let two = coarsen(&inc, 2).unwrap();
        assert!((two.get(0)[0] + 0.1).abs() < 1e-15);
        assert!((two.get(1)[0] - 0.7).abs() < 1e-15);
        assert!((two.step() - 0.2).abs() < 1e-15);
        let four = coarsen(&inc, 4).unwrap();
        assert_eq!(four.len(), 1);
        assert!((four.get(0)[0] - 0.6).abs() < 1e-15);
        assert_eq!(coarsen(&inc, 1).unwrap(), inc);
        assert!(matches!(coarsen(&inc, 3), Err(Error::NotDivisible { len: 4, factor: 3 })));
        assert!(coarsen(&inc, 0).is_err());
    }

    #[test]
    fn phi_i_partial_sums_and_interpolation() {
        let path = phi_i(&seq(0.5, &[1.0, -1.0]));
        assert_eq!(path.evaluate(0.5).unwrap(), vec![1.0]);
        assert_eq!(path.evaluate(0.75).unwrap(), vec![0.5]);
        assert_eq!(path.evaluate(0.0).unwrap(), vec![0.0]);
        assert_eq!(path.evaluate(1.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn phi_p_of_linear_ramp() {
        let path = SamplePath::from_nodes(vec![0.0, 1.0], 1, vec![0.0, 1.0]).unwrap();
        let inc = phi_p(&path, 0.25).unwrap();
        assert_eq!(inc.as_slice(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn phi_p_of_zero_path_is_zero() {
        let path = phi_i(&IncrementSequence::zeros(0.1, 2, 10).unwrap());
        let inc = phi_p(&path, 0.2).unwrap();
        assert_eq!(inc.len(), 5);
        assert!(inc.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn phi_p_rejects_bad_steps() {
        let path = phi_i(&seq(0.5, &[1.0, 2.0]));
        assert!(phi_p(&path, 0.0).is_err());
        assert!(phi_p(&path, -1.0).is_err());
        assert!(phi_p(&path, 2.0).is_err());
    }

    #[test]
    fn phi_p_inverts_phi_i_bitwise() {
        let inc = seq(0.1, &[0.1, -0.2, 0.3, 0.4, 1e-17, 3.0e5]);
        assert_eq!(phi_p(&phi_i(&inc), 0.1).unwrap(), inc);
    }

    #[test]
    fn evaluate_examples() {
        let p = SamplePath::from_nodes(vec![0.0, 1.0], 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(p.evaluate(0.5).unwrap(), vec![0.5]);
        assert_eq!(p.evaluate(1.0).unwrap(), vec![1.0]);
        let q = SamplePath::from_nodes(vec![0.0, 1.0, 2.0], 1, vec![0.0, 2.0, -2.0]).unwrap();
        assert_eq!(q.evaluate(1.5).unwrap(), vec![0.0]);
        assert_eq!(q.evaluate(1.0).unwrap(), vec![2.0]);
        assert!(matches!(q.evaluate(2.5), Err(Error::OutOfDomain { .. })));
        assert!(q.evaluate(-0.1).is_err());
    }

    #[test]
    fn path_construction_checks_invariants() {
        assert!(SamplePath::from_nodes(vec![0.0, 1.0], 1, vec![1.0, 1.0]).is_err());
        assert!(SamplePath::from_nodes(vec![0.0, 0.0], 1, vec![0.0, 1.0]).is_err());
        assert!(SamplePath::from_nodes(vec![0.5, 1.0], 1, vec![0.0, 1.0]).is_err());
        assert!(SamplePath::from_nodes(vec![0.0, 1.0], 2, vec![0.0, 1.0]).is_err());
    }

    fn square_path() -> SamplePath {
        let grid: Vec<f64> = (0..=4096).map(|i| i as f64 / 1024.0).collect();
        let nodes = grid.iter().map(|t| t * t).collect();
        SamplePath::from_nodes(grid, 1, nodes).unwrap()
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let p = square_path();
        assert_eq!(p.shift(0.0).unwrap(), p);
    }

    #[test]
    fn shift_of_square_path() {
        let p = square_path();
        let s = p.shift(1.0).unwrap();
        assert!((s.horizon() - 3.0).abs() < 1e-12);
        assert_eq!(s.evaluate(2.0).unwrap(), vec![8.0]);
        assert_eq!(s.evaluate(0.0).unwrap(), vec![0.0]);
        assert!(p.shift(4.5).is_err());
    }

    #[test]
    fn shift_off_grid_vanishes_at_origin() {
        let p = square_path();
        let t = 0.3;
        let s = p.shift(t).unwrap();
        assert_eq!(s.node(0), &[0.0]);
        for u in [0.0, 0.1, 1.0, 2.5, 3.7] {
            let lhs = s.evaluate(u).unwrap()[0];
            let rhs = p.evaluate(t + u).unwrap()[0] - p.evaluate(t).unwrap()[0];
            assert!((lhs - rhs).abs() < 1e-9, "u={u}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn shift_composes() {
        let p = square_path();
        let twice = p.shift(1.0).unwrap().shift(1.0).unwrap();
        let once = p.shift(2.0).unwrap();
        assert_eq!(twice.n_nodes(), once.n_nodes());
        for (i, &t) in once.grid().iter().enumerate() {
            assert!((twice.grid()[i] - t).abs() < 1e-12);
            assert!((twice.node(i)[0] - once.node(i)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_examples() {
        let grid: Vec<f64> = (0..=20).map(f64::from).collect();
        let zero = SamplePath::from_nodes(grid.clone(), 1, vec![0.0; 21]).unwrap();
        assert_eq!(metric_d(&zero, &zero, 20).unwrap(), 0.0);

        // |a - b| == 1 away from the origin would violate ω(0) = 0, so use a
        // difference that jumps to 1 within the first 2^-30 and stays there.
        let mut g = vec![0.0, 2f64.powi(-30)];
        g.extend(grid[1..].iter());
        let mut nodes = vec![0.0];
        nodes.resize(g.len(), 1.0);
        let one = SamplePath::from_nodes(g, 1, nodes).unwrap();
        let d = metric_d(&one, &zero, 20).unwrap();
        let expected: f64 = (1..=20).map(|n| 0.5f64.powi(n) * 0.5).sum();
        assert!((d - expected).abs() < 1e-15);
        assert!((d - 0.4999995).abs() < 1e-6);
        assert_eq!(metric_d(&zero, &one, 20).unwrap(), d);
        assert!(metric_d(&one, &zero, 21).is_err());
    }
}

//! Ground-truth solutions for the limit SDEs.

use nalgebra::{DMatrix, DVector};

use crate::interaction::{self, InteractionModel, Trajectory};
use crate::models::ModelSpec;
use crate::wiener::IncrementSequence;
use crate::{Error, Result};

/// Exact solution of `dQ = P/m dt`, `dP = q dW` on the grid of `inc`.
///
/// The time integral of `P` is taken with the trapezoid rule, which is exact
/// for the piecewise-linear interpolant of `W`.
pub fn exact_charged_solution(
    charge: f64,
    mass: f64,
    x0: [f64; 2],
    inc: &IncrementSequence,
) -> Result<Trajectory> {
    if inc.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: inc.dim(),
            context: "charged particle noise",
        });
    }
    if !(mass > 0.0) {
        return Err(Error::config(format!("mass must be positive, got {mass}")));
    }
    let h = inc.step();
    let mut states = Vec::with_capacity(2 * (inc.len() + 1));
    states.extend_from_slice(&x0);
    let (mut q, mut p) = (x0[0], x0[1]);
    let mut w = 0.0;
    for y in inc.iter() {
        w += y[0];
        let p_next = x0[1] + charge * w;
        q += h * 0.5 * (p + p_next) / mass;
        p = p_next;
        states.push(q);
        states.push(p);
    }
    Trajectory::new(h, 2, states)
}

/// Euler–Maruyama with the coefficients of `model`, ignoring its remainder `η`.
pub fn euler_oracle(model: &InteractionModel, x0: &[f64], inc: &IncrementSequence) -> Result<Trajectory> {
    interaction::run_euler(model, x0, inc)
}

/// `dX = (A X + c) dt + Σ dW`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSDESpec {
    pub drift: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub diffusion: DMatrix<f64>,
}

impl LinearSDESpec {
    pub fn new(drift: DMatrix<f64>, offset: DVector<f64>, diffusion: DMatrix<f64>) -> Result<Self> {
        let m = drift.nrows();
        if drift.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: drift.ncols(),
                context: "drift matrix columns",
            });
        }
        if offset.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: offset.len(),
                context: "affine offset",
            });
        }
        if diffusion.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: diffusion.nrows(),
                context: "diffusion rows",
            });
        }
        Ok(Self { drift, offset, diffusion })
    }

    /// Limit SDE of one of the shipped models, noise scaled by `√T`.
    pub fn for_model(spec: &ModelSpec) -> Self {
        let scale = spec.temperature().sqrt();
        let (drift, offset, diffusion) = match *spec {
            ModelSpec::Charged(p) => (
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / p.mass, 0.0, 0.0]),
                DVector::zeros(2),
                DMatrix::from_row_slice(2, 1, &[0.0, p.charge]),
            ),
            ModelSpec::Harmonic(p) => (
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
                DVector::from_row_slice(&[0.0, -p.rest_length]),
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
            ),
            ModelSpec::Damped(p) => (
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -p.friction]),
                DVector::zeros(2),
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
            ),
        };
        Self {
            drift,
            offset,
            diffusion: diffusion * scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }
}

/// Mean and covariance at time `t`, integrated with classical RK4.
pub fn linear_sde_moments(
    spec: &LinearSDESpec,
    x0: &[f64],
    t: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = spec.dim();
    if x0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: x0.len(),
            context: "initial state",
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::config(format!("time must be nonnegative, got {t}")));
    }
    let mut mean = DVector::from_column_slice(x0);
    let mut cov = DMatrix::zeros(m, m);
    if t == 0.0 {
        return Ok((mean, cov));
    }
    let max_step = 1e-3 * t.max(1.0);
    let n = (t / max_step).ceil() as usize;
    let dt = t / n as f64;
    let a = &spec.drift;
    let at = a.transpose();
    let q = &spec.diffusion * spec.diffusion.transpose();
    let fm = |v: &DVector<f64>| a * v + &spec.offset;
    let fc = |c: &DMatrix<f64>| a * c + c * &at + &q;
    for _ in 0..n {
        let k1 = fm(&mean);
        let k2 = fm(&(&mean + &k1 * (0.5 * dt)));
        let k3 = fm(&(&mean + &k2 * (0.5 * dt)));
        let k4 = fm(&(&mean + &k3 * dt));
        mean += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);

        let l1 = fc(&cov);
        let l2 = fc(&(&cov + &l1 * (0.5 * dt)));
        let l3 = fc(&(&cov + &l2 * (0.5 * dt)));
        let l4 = fc(&(&cov + &l3 * dt));
        cov += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (dt / 6.0);
    }
    Ok((mean, cov))
}

/// Solves `A X + X Aᵀ = −Q` through the Kronecker form of the operator.
fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let m = a.nrows();
    let id = DMatrix::<f64>::identity(m, m);
    let op = id.kronecker(a) + a.kronecker(&id);
    let rhs = DVector::from_column_slice((-q).as_slice());
    let vec = op.lu().solve(&rhs)?;
    let x = DMatrix::from_column_slice(m, m, vec.as_slice());
    Some((&x + x.transpose()) * 0.5)
}

/// Stationary covariance `C` with `A C + C Aᵀ + Σ Σᵀ = 0`.
///
/// `A` is accepted as Hurwitz when `A X + X Aᵀ = −I` has a positive definite
/// solution.
pub fn lyapunov_stationary(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: a.ncols(),
            context: "drift matrix columns",
        });
    }
    if sigma.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: sigma.nrows(),
            context: "diffusion rows",
        });
    }
    let id = DMatrix::identity(m, m);
    let certificate = solve_lyapunov(a, &id).ok_or(Error::NotHurwitz)?;
    if !certificate.iter().all(|v| v.is_finite()) || certificate.cholesky().is_none() {
        return Err(Error::NotHurwitz);
    }
    let q = sigma * sigma.transpose();
    solve_lyapunov(a, &q).ok_or(Error::NotHurwitz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ChargedParticleParams, DampedParams};

    fn damped(f: f64, t: f64) -> LinearSDESpec {
        LinearSDESpec::for_model(&ModelSpec::Damped(DampedParams { friction: f, temperature: t }))
    }

    fn residual(a: &DMatrix<f64>, sigma: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
        (a * c + c * a.transpose() + sigma * sigma.transpose()).norm()
    }

    #[test]
    fn charged_noise_free() {
        let inc = IncrementSequence::zeros(0.1, 1, 10).unwrap();
        let traj = exact_charged_solution(2.0, 4.0, [1.0, 3.0], &inc).unwrap();
        for (n, s) in traj.iter().enumerate() {
            assert_eq!(s[1], 3.0);
            assert!((s[0] - (1.0 + 3.0 * n as f64 * 0.1 / 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn charged_rejects_wide_noise() {
        let inc = IncrementSequence::zeros(0.1, 2, 3).unwrap();
        assert!(exact_charged_solution(1.0, 1.0, [0.0, 0.0], &inc).is_err());
    }

    #[test]
    fn euler_geometric_decay() {
        let model = InteractionModel::builder("decay", 1, 1)
            .diffusion(|_, s| s[0] = 0.0)
            .drift(|x, b| b[0] = -x[0])
            .remainder(|_, _, y, e| e[0] = y[0])
            .build()
            .unwrap();
        let h = 0.125;
        let inc = IncrementSequence::zeros(h, 1, 16).unwrap();
        let traj = euler_oracle(&model, &[1.0], &inc).unwrap();
        for (n, s) in traj.iter().enumerate() {
            assert!((s[0] - (1.0 - h).powi(n as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_matches_step_without_remainder() {
        let model = crate::models::harmonic(crate::models::HarmonicParams { rest_length: 0.3 });
        let inc = IncrementSequence::new(0.05, 2, vec![0.2, -0.4]).unwrap();
        let traj = euler_oracle(&model, &[1.0, -0.5], &inc).unwrap();
        let one = interaction::step(&model.without_remainder(), 0.05, &[1.0, -0.5], &[0.2, -0.4]).unwrap();
        assert_eq!(traj.state(1), one.as_slice());
    }

    #[test]
    fn moments_at_time_zero() {
        let spec = damped(1.0, 1.0);
        let (mean, cov) = linear_sde_moments(&spec, &[0.4, -2.0], 0.0).unwrap();
        assert_eq!(mean.as_slice(), &[0.4, -2.0]);
        assert_eq!(cov, DMatrix::zeros(2, 2));
    }

    #[test]
    fn moments_charged_momentum_variance() {
        let spec = LinearSDESpec::for_model(&ModelSpec::Charged(ChargedParticleParams { charge: 1.5, mass: 2.0 }));
        let (_, cov) = linear_sde_moments(&spec, &[0.0, 0.0], 3.0).unwrap();
        assert!((cov[(1, 1)] - 1.5 * 1.5 * 3.0).abs() < 1e-10);
        // Var(Q) = q² t³ / (3m²)
        assert!((cov[(0, 0)] - 2.25 * 27.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn moments_pure_brownian() {
        let spec = LinearSDESpec::new(DMatrix::zeros(3, 3), DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
        let (_, cov) = linear_sde_moments(&spec, &[0.0; 3], 2.5).unwrap();
        assert!((cov - DMatrix::identity(3, 3) * 2.5).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_examples() {
        for (f, t, v) in [(1.0, 1.0, 0.5), (2.0, 4.0, 1.0)] {
            let spec = damped(f, t);
            let c = lyapunov_stationary(&spec.drift, &spec.diffusion).unwrap();
            let expected = DMatrix::from_diagonal_element(2, 2, v);
            assert!((&c - expected).norm() < 1e-12, "{c}");
            assert!(residual(&spec.drift, &spec.diffusion, &c) < 1e-10);
        }
        let spec = damped(1.0, 0.0);
        let c = lyapunov_stationary(&spec.drift, &spec.diffusion).unwrap();
        assert_eq!(c, DMatrix::zeros(2, 2));
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let harmonic = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sigma = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert_eq!(lyapunov_stationary(&harmonic, &sigma), Err(Error::NotHurwitz));
        let growing = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -1.0]);
        assert_eq!(lyapunov_stationary(&growing, &sigma), Err(Error::NotHurwitz));
    }

    #[test]
    fn lyapunov_general_stable() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -0.5, -0.3, 1.0, 0.0, -1.0, -2.0]);
        let sigma = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 0.2, 0.0, 1.0]);
        let c = lyapunov_stationary(&a, &sigma).unwrap();
        assert!(residual(&a, &sigma, &c) < 1e-10);
        assert!((&c - c.transpose()).norm() < 1e-14);
        assert!(c.symmetric_eigenvalues().iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn moments_converge_to_stationary() {
        let spec = damped(1.0, 1.0);
        // slowest decay rate of A is f/2
        let (_, cov) = linear_sde_moments(&spec, &[0.0, 0.0], 100.0).unwrap();
        let c = lyapunov_stationary(&spec.drift, &spec.diffusion).unwrap();
        assert!((&cov - &c).norm() / c.norm() < 1e-3);
    }
}

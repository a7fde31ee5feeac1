//! The three physical systems, written as repeated-interaction models.
//!
//! Every model consumes raw Brownian increments `y = ΔW`: the `1/h`
//! reinforcement of the environment states is already folded into the maps.
//! Temperature is not part of any map; it scales the increments at the noise
//! layer (see [`crate::wiener::NoiseSpec`]).

use serde::Serialize;

use crate::interaction::InteractionModel;
use crate::{Error, Result};

/// Particle of charge `q` and mass `m` driven by a fluctuating uniform field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargedParticleParams {
    pub charge: f64,
    pub mass: f64,
}

/// Unit masses joined by a unit spring of rest length `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicParams {
    pub rest_length: f64,
}

/// Harmonic pair (`l = 0`) with fluid friction `−f P₁` on the system side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedParams {
    pub friction: f64,
    pub temperature: f64,
}

/// State `(x, p)`, one-dimensional noise.
///
/// `σ = (0, q)ᵀ`, `b(x) = (x₂/m, 0)`, `η(h, x, y) = (q y / 2m, 0)`.
/// Declares `K₀ = 1/m` and `(K₂, α) = (|q|/2m, +∞)`.
pub fn charged_particle(params: ChargedParticleParams) -> Result<InteractionModel> {
    let ChargedParticleParams { charge, mass } = params;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::config(format!("mass must be positive, got {mass}")));
    }
    if !charge.is_finite() {
        return Err(Error::config(format!("charge must be finite, got {charge}")));
    }
    InteractionModel::builder("charged", 2, 1)
        .diffusion(move |_, s| {
            s[0] = 0.0;
            s[1] = charge;
        })
        .drift(move |x, b| {
            b[0] = x[1] / mass;
            b[1] = 0.0;
        })
        .remainder(move |_, _, y, e| {
            e[0] = charge * y[0] / (2.0 * mass);
            e[1] = 0.0;
        })
        .lipschitz(1.0 / mass)
        .eta_bound(charge.abs() / (2.0 * mass), f64::INFINITY)
        .build()
}

/// State `(Q₁, P₁)`, environment `(Q₂, P₂)` sampled from a 2-d Brownian increment.
///
/// `σ = [[0, 0], [1, 0]]`, `b(x) = (x₂, −(x₁ + l))` and
/// `η(h, x, y) = ½y − (h/2)(x₁ + l − y₂/3, x₂ + 2y₁/3)`, the Taylor
/// expansion of the exact pair flow truncated after the `h` term.
///
/// Declares `K₀ = 1` and `(K₂, α) = (5/6, 1)`. The remainder bound only holds
/// for `l = 0`: at `x = y = 0` the map leaves `η = (−hl/2, 0)`.
pub fn harmonic(params: HarmonicParams) -> InteractionModel {
    let l = params.rest_length;
    InteractionModel::builder("harmonic", 2, 2)
        .diffusion(|_, s| s.copy_from_slice(&[0.0, 0.0, 1.0, 0.0]))
        .drift(move |x, b| {
            b[0] = x[1];
            b[1] = -(x[0] + l);
        })
        .remainder(move |h, x, y, e| {
            e[0] = 0.5 * y[0] - 0.5 * h * (x[0] + l - y[1] / 3.0);
            e[1] = 0.5 * y[1] - 0.5 * h * (x[1] + 2.0 * y[0] / 3.0);
        })
        .lipschitz(1.0)
        .eta_bound(5.0 / 6.0, 1.0)
        .build()
        .expect("harmonic model constants are valid")
}

/// Damped oscillator: `b(x) = (x₂, −x₁ − f x₂)`, `σ = [[0, 0], [1, 0]]`.
///
/// `η` is the second-order Taylor remainder of the coupled flow
/// `Q̇₁ = P₁, Ṗ₁ = −fP₁ + Q₂ − Q₁, Q̇₂ = P₂, Ṗ₂ = Q₁ − Q₂` after substituting
/// the environment state `(Q₂, P₂) = y/h`:
///
/// ```text
/// η₁ = ½y₁ + (h/2)(−f x₂ − x₁) + (h/6)(y₂ − f y₁)
/// η₂ = ½(y₂ − f y₁) + (h/2)(f² x₂ + f x₁ − x₂) + (h/6)((f² − 2) y₁ − f y₂)
/// ```
///
/// At `f = 0` this is the harmonic remainder with `l = 0`.
pub fn damped_oscillator(params: DampedParams) -> Result<InteractionModel> {
    let DampedParams { friction: f, temperature } = params;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::config(format!("friction must be positive, got {f}")));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::config(format!(
            "temperature must be nonnegative, got {temperature}"
        )));
    }
    InteractionModel::builder("damped", 2, 2)
        .diffusion(|_, s| s.copy_from_slice(&[0.0, 0.0, 1.0, 0.0]))
        .drift(move |x, b| {
            b[0] = x[1];
            b[1] = -x[0] - f * x[1];
        })
        .remainder(move |h, x, y, e| {
            e[0] = 0.5 * y[0] + 0.5 * h * (-f * x[1] - x[0]) + h / 6.0 * (y[1] - f * y[0]);
            e[1] = 0.5 * (y[1] - f * y[0])
                + 0.5 * h * (f * f * x[1] + f * x[0] - x[1])
                + h / 6.0 * ((f * f - 2.0) * y[0] - f * y[1]);
        })
        .lipschitz(damped_lipschitz(f))
        .eta_bound(damped_k2(f), 1.0)
        .build()
}

/// Spectral norm of `[[0, 1], [−1, −f]]`.
fn damped_lipschitz(f: f64) -> f64 {
    let f2 = f * f;
    ((2.0 + f2 + f * (f2 + 4.0).sqrt()) / 2.0).sqrt()
}

/// `|η| ≤ (h/2)‖M‖|x| + (½‖N₀‖ + (h/6)‖N₁‖)|y|` with Frobenius norms, and `h < 1`.
fn damped_k2(f: f64) -> f64 {
    let f2 = f * f;
    let m = (1.0 + 2.0 * f2 + (f2 - 1.0) * (f2 - 1.0)).sqrt();
    let n0 = (2.0 + f2).sqrt();
    let n1 = (2.0 * f2 + 1.0 + (f2 - 2.0) * (f2 - 2.0)).sqrt();
    (0.5 * m).max(0.5 * n0 + n1 / 6.0)
}

/// Closed-form flow of the coupled harmonic pair, state `(Q₁, P₁, Q₂, P₂)`.
pub fn harmonic_exact_flow(state: [f64; 4], rest_length: f64, t: f64) -> [f64; 4] {
    let [q1, p1, q2, p2] = state;
    let l = rest_length;
    let r2 = std::f64::consts::SQRT_2;
    let (s, c) = (r2 * t).sin_cos();
    let p_sum = 0.5 * (p1 + p2);
    let p_diff = 0.5 * (p1 - p2);
    let offset = 0.5 * (q1 - q2 + l);
    let q1t = p_sum * t + 0.5 * (q1 + q2 - l) + offset * c + p_diff / r2 * s;
    let p1t = p_sum - r2 * offset * s + p_diff * c;
    let q2t = p_sum * t + 0.5 * (q1 + q2 + l) - offset * c - p_diff / r2 * s;
    let p2t = p_sum + r2 * offset * s - p_diff * c;
    [q1t, p1t, q2t, p2t]
}

/// `H = P₁²/2 + P₂²/2 + ½(Q₂ − Q₁ − l)²`.
pub fn hamiltonian_harmonic(state: [f64; 4], rest_length: f64) -> f64 {
    let [q1, p1, q2, p2] = state;
    let stretch = q2 - q1 - rest_length;
    0.5 * p1 * p1 + 0.5 * p2 * p2 + 0.5 * stretch * stretch
}

/// Named model choice with its parameters, as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Charged(ChargedParticleParams),
    Harmonic(HarmonicParams),
    Damped(DampedParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Charged(_) => "charged",
            ModelSpec::Harmonic(_) => "harmonic",
            ModelSpec::Damped(_) => "damped",
        }
    }

    pub fn build(&self) -> Result<InteractionModel> {
        match *self {
            ModelSpec::Charged(p) => charged_particle(p),
            ModelSpec::Harmonic(p) => Ok(harmonic(p)),
            ModelSpec::Damped(p) => damped_oscillator(p),
        }
    }

    /// Environment temperature; only the damped model carries one.
    pub fn temperature(&self) -> f64 {
        match self {
            ModelSpec::Damped(p) => p.temperature,
            _ => 1.0,
        }
    }
}

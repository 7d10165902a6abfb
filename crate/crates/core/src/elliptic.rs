//! Theta functions with characteristics and the σ family built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MIN_IM_TAU: f64 = 0.05;

/// Modular parameter, crossing parameter and series controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularSetup {
    pub tau: C64,
    pub eta: C64,
    pub series_tol: f64,
    pub n_max: u32,
    pub genericity_floor: f64,
}

/// Characteristics `(a, b)` of `θ[a;b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaChar {
    pub a: f64,
    pub b: f64,
}

impl ThetaChar {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

impl ModularSetup {
    pub const DEFAULT_SERIES_TOL: f64 = 1e-15;
    pub const DEFAULT_N_MAX: u32 = 60;
    pub const DEFAULT_FLOOR: f64 = 1e-8;

    pub fn new(tau: C64, eta: C64) -> Result<Self> {
        Self::with_controls(
            tau,
            eta,
            Self::DEFAULT_SERIES_TOL,
            Self::DEFAULT_N_MAX,
            Self::DEFAULT_FLOOR,
        )
    }

    pub fn with_controls(tau: C64, eta: C64, series_tol: f64, n_max: u32, genericity_floor: f64) -> Result<Self> {
        let s = Self {
            tau,
            eta,
            series_tol,
            n_max,
            genericity_floor,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.im >= MIN_IM_TAU) {
            return Err(Error::Validation(format!(
                "Im(tau) below {MIN_IM_TAU} (got {})",
                self.tau.im
            )));
        }
        if !(1..=200).contains(&self.n_max) {
            return Err(Error::Validation(format!(
                "n_max must lie in [1, 200], got {}",
                self.n_max
            )));
        }
        if !(self.series_tol > 0.0 && self.series_tol <= 1e-12) {
            return Err(Error::Validation(format!(
                "series_tol must lie in (0, 1e-12], got {}",
                self.series_tol
            )));
        }
        if !(self.genericity_floor >= 0.0) {
            return Err(Error::Validation("genericity_floor must be non-negative".into()));
        }
        Ok(())
    }

    pub fn sigma(&self, u: C64) -> Result<C64> {
        sigma(u, self)
    }

    pub fn sigma_char(&self, alpha1: u8, alpha2: u8, u: C64) -> Result<C64> {
        sigma_char(alpha1, alpha2, u, self)
    }

    pub fn theta_level2(&self, j: i64, u: C64) -> Result<C64> {
        theta_level2(j, u, self)
    }

    /// Rejects `value` as a denominator when it sits below the genericity floor.
    pub fn guard(&self, value: C64, what: &str) -> Result<C64> {
        if value.norm() < self.genericity_floor || !value.is_finite() {
            Err(Error::Singularity(format!(
                "{what} = {value:.3e} below genericity floor {:.1e}",
                self.genericity_floor
            )))
        } else {
            Ok(value)
        }
    }

    /// `σ(u)` checked against the genericity floor.
    pub fn sigma_nz(&self, u: C64, what: &str) -> Result<C64> {
        let s = self.sigma(u)?;
        self.guard(s, what)
    }
}

impl Default for ModularSetup {
    fn default() -> Self {
        Self {
            tau: C64::new(0.0, 1.0),
            eta: C64::new(0.31, 0.0),
            series_tol: Self::DEFAULT_SERIES_TOL,
            n_max: Self::DEFAULT_N_MAX,
            genericity_floor: Self::DEFAULT_FLOOR,
        }
    }
}

/// `Σ_n exp{iπ[(n+a)²τ' + 2(n+a)(u+b)]}`, summed outward from `n = 0`.
pub fn theta_char(ch: ThetaChar, u: C64, modular_tau: C64, setup: &ModularSetup) -> Result<C64> {
    if !(modular_tau.im >= MIN_IM_TAU) {
        return Err(Error::Domain(format!(
            "Im(tau) = {} below {MIN_IM_TAU}",
            modular_tau.im
        )));
    }
    if !u.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {u}")));
    }
    let z = u + ch.b;
    let term = |n: i64| -> C64 {
        let x = n as f64 + ch.a;
        (C64::i() * PI * (modular_tau * (x * x) + z * (2.0 * x))).exp()
    };
    // Past this index the Gaussian factor has turned over and terms only shrink.
    let peak = z.im.abs() / modular_tau.im + ch.a.abs() + 1.0;
    let mut sum = term(0);
    let n_max = setup.n_max as i64;
    for k in 1..=n_max {
        let tp = term(k);
        let tm = term(-k);
        sum += tp + tm;
        let thr = setup.series_tol * sum.norm().max(1.0);
        if tp.norm() <= thr && tm.norm() <= thr && (k as f64) > peak {
            return Ok(sum);
        }
        if k == n_max {
            return Err(Error::Convergence(format!(
                "last terms {:.2e}, {:.2e} above {:.1e} at |n| = {n_max} (u = {u})",
                tp.norm(),
                tm.norm(),
                thr
            )));
        }
    }
    Err(Error::Convergence(format!("n_max = {n_max} too small")))
}

/// `σ(u) = θ[½;½](u, τ)`.
pub fn sigma(u: C64, setup: &ModularSetup) -> Result<C64> {
    theta_char(ThetaChar::new(0.5, 0.5), u, setup.tau, setup)
}

/// `σ_α(u) = θ[½+α₁/2; ½+α₂/2](u, τ)`, with `α` read mod 2.
pub fn sigma_char(alpha1: u8, alpha2: u8, u: C64, setup: &ModularSetup) -> Result<C64> {
    let (a1, a2) = (alpha1 % 2, alpha2 % 2);
    if a1 == 0 && a2 == 0 {
        return sigma(u, setup);
    }
    let ch = ThetaChar::new(0.5 + a1 as f64 / 2.0, 0.5 + a2 as f64 / 2.0);
    theta_char(ch, u, setup.tau, setup)
}

/// Reduces `j` to `{1, 2}`; `θ⁽⁰⁾` is `θ⁽²⁾`.
pub fn reduce_level2_index(j: i64) -> i64 {
    (j - 1).rem_euclid(2) + 1
}

/// `θ⁽ʲ⁾(u) = θ[½ − j/2; ½](u, 2τ)`.
pub fn theta_level2(j: i64, u: C64, setup: &ModularSetup) -> Result<C64> {
    let j = reduce_level2_index(j);
    let ch = ThetaChar::new(0.5 - j as f64 / 2.0, 0.5);
    theta_char(ch, u, setup.tau * 2.0, setup)
}

/// Relative residual of the Riemann identity
/// `σ(u+x)σ(u−x)σ(v+y)σ(v−y) − σ(u+y)σ(u−y)σ(v+x)σ(v−x) = σ(u+v)σ(u−v)σ(x+y)σ(x−y)`.
pub fn riemann_residual(u: C64, v: C64, x: C64, y: C64, setup: &ModularSetup) -> Result<f64> {
    let s = |z: C64| sigma(z, setup);
    let lhs = s(u + x)? * s(u - x)? * s(v + y)? * s(v - y)? - s(u + y)? * s(u - y)? * s(v + x)? * s(v - x)?;
    let rhs = s(u + v)? * s(u - v)? * s(x + y)? * s(x - y)?;
    Ok((lhs - rhs).norm() / rhs.norm().max(1.0))
}

/// `|σ(−u) + σ(u)| / max(1, |σ(u)|)`.
pub fn oddness_residual(u: C64, setup: &ModularSetup) -> Result<f64> {
    let a = sigma(u, setup)?;
    let b = sigma(-u, setup)?;
    Ok((a + b).norm() / a.norm().max(1.0))
}

/// `|σ(u+1) + σ(u)| / max(1, |σ(u)|)`.
pub fn period_one_residual(u: C64, setup: &ModularSetup) -> Result<f64> {
    let a = sigma(u, setup)?;
    let b = sigma(u + 1.0, setup)?;
    Ok((a + b).norm() / a.norm().max(1.0))
}

/// `|σ(u+τ) + exp(−2iπ(u+τ/2))σ(u)|`, relative to the larger side.
pub fn period_tau_residual(u: C64, setup: &ModularSetup) -> Result<f64> {
    let a = sigma(u, setup)?;
    let b = sigma(u + setup.tau, setup)?;
    let rhs = -(C64::new(0.0, -2.0 * PI) * (u + setup.tau / 2.0)).exp() * a;
    Ok((b - rhs).norm() / b.norm().max(rhs.norm()).max(1.0))
}

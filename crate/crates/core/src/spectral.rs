//! Spectral data `{u_α}`, `{ξ_i}` with genericity guards and seeded draws.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryConfig;
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub u: Vec<C64>,
    pub xi: Vec<C64>,
}

/// Box for random draws: `re ∈ [−re, re]`, `im ∈ [−im, im]`; `margin` is
/// the minimum accepted magnitude of every guarded σ-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawSpec {
    pub re: f64,
    pub im: f64,
    pub margin: f64,
}

impl Default for DrawSpec {
    fn default() -> Self {
        Self {
            re: 0.4,
            im: 0.2,
            margin: 0.02,
        }
    }
}

const MAX_TRIES: usize = 10_000;

impl SpectralConfig {
    pub fn new(u: Vec<C64>, xi: Vec<C64>) -> Result<Self> {
        if u.len() != xi.len() {
            return Err(Error::Validation(format!(
                "{} spectral parameters u but {} inhomogeneities xi",
                u.len(),
                xi.len()
            )));
        }
        Ok(Self { u, xi })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// Drops `u_N` and `ξ_i` (0-based `i`).
    pub fn without(&self, i: usize) -> Self {
        let mut xi = self.xi.clone();
        xi.remove(i);
        Self {
            u: self.u[..self.u.len() - 1].to_vec(),
            xi,
        }
    }

    /// Every guarded σ-argument from the spectral data alone.
    fn guarded_arguments(&self, eta: C64) -> Vec<(C64, String)> {
        let mut out = Vec::new();
        for k in 0..self.xi.len() {
            for l in (k + 1)..self.xi.len() {
                out.extend(pair_args_xi(self.xi[k], self.xi[l], k, l));
            }
        }
        for a in 0..self.u.len() {
            for b in (a + 1)..self.u.len() {
                out.extend(pair_args_u(self.u[a], self.u[b], eta, a, b));
            }
            for (i, &x) in self.xi.iter().enumerate() {
                out.extend(cross_args(self.u[a], x, eta, a, i));
            }
        }
        out
    }

    pub fn validate(&self, setup: &ModularSetup) -> Result<()> {
        self.validate_with_floor(setup, setup.genericity_floor)
    }

    pub fn validate_with_floor(&self, setup: &ModularSetup, floor: f64) -> Result<()> {
        for (z, what) in self.guarded_arguments(setup.eta) {
            check(setup, z, floor, &what)?;
        }
        Ok(())
    }

    /// Seeded draw of `n` pairs with incremental rejection; `bc` adds the
    /// boundary-dependent guards on each `u`.
    pub fn random(
        n: usize,
        seed: u64,
        spec: &DrawSpec,
        setup: &ModularSetup,
        bc: Option<&BoundaryConfig>,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, &mut rng, spec, setup, bc)
    }

    pub fn random_with<R: Rng>(
        n: usize,
        rng: &mut R,
        spec: &DrawSpec,
        setup: &ModularSetup,
        bc: Option<&BoundaryConfig>,
    ) -> Result<Self> {
        let floor = spec.margin.max(setup.genericity_floor);
        let eta = setup.eta;
        let mut draw = |rng: &mut R| C64::new(rng.gen_range(-spec.re..=spec.re), rng.gen_range(-spec.im..=spec.im));
        let mut xi: Vec<C64> = Vec::with_capacity(n);
        for k in 0..n {
            let x = accept(rng, &mut draw, |x| {
                for (l, &y) in xi.iter().enumerate() {
                    for (z, what) in pair_args_xi(y, x, l, k) {
                        check(setup, z, floor, &what)?;
                    }
                }
                Ok(())
            })?;
            xi.push(x);
        }
        let mut u: Vec<C64> = Vec::with_capacity(n);
        for a in 0..n {
            let v = accept(rng, &mut draw, |v| {
                for (b, &w) in u.iter().enumerate() {
                    for (z, what) in pair_args_u(w, v, eta, b, a) {
                        check(setup, z, floor, &what)?;
                    }
                }
                for (i, &x) in xi.iter().enumerate() {
                    for (z, what) in cross_args(v, x, eta, a, i) {
                        check(setup, z, floor, &what)?;
                    }
                }
                if let Some(bc) = bc {
                    for (z, what) in bc.spectral_arguments(v) {
                        check(setup, z, floor, &what)?;
                    }
                }
                Ok(())
            })?;
            u.push(v);
        }
        Ok(Self { u, xi })
    }
}

fn check(setup: &ModularSetup, z: C64, floor: f64, what: &str) -> Result<()> {
    let s = setup.sigma(z)?;
    if s.norm() < floor {
        return Err(Error::Singularity(format!(
            "|sigma({what})| = {:.2e} below {floor:.1e}",
            s.norm()
        )));
    }
    Ok(())
}

fn accept<R, D, F>(rng: &mut R, draw: &mut D, ok: F) -> Result<C64>
where
    D: FnMut(&mut R) -> C64,
    F: Fn(C64) -> Result<()>,
{
    let mut last = None;
    for _ in 0..MAX_TRIES {
        let z = draw(rng);
        match ok(z) {
            Ok(()) => return Ok(z),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Singularity("no admissible draw".into())))
}

fn pair_args_xi(a: C64, b: C64, k: usize, l: usize) -> Vec<(C64, String)> {
    vec![(a - b, format!("xi{k}-xi{l}")), (a + b, format!("xi{k}+xi{l}"))]
}

fn pair_args_u(a: C64, b: C64, eta: C64, i: usize, j: usize) -> Vec<(C64, String)> {
    vec![
        (a - b, format!("u{i}-u{j}")),
        (a + b, format!("u{i}+u{j}")),
        (a - b + eta, format!("u{i}-u{j}+eta")),
        (b - a + eta, format!("u{j}-u{i}+eta")),
        (a + b + eta, format!("u{i}+u{j}+eta")),
    ]
}

fn cross_args(u: C64, x: C64, eta: C64, a: usize, i: usize) -> Vec<(C64, String)> {
    vec![
        (u - x, format!("u{a}-xi{i}")),
        (u + x, format!("u{a}+xi{i}")),
        (u - x + eta, format!("u{a}-xi{i}+eta")),
        (u + x + eta, format!("u{a}+xi{i}+eta")),
    ]
}

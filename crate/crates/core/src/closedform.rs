//! Closed forms of the normalized partition function: the symmetric
//! permutation sum, the single determinant, prefactors, the recursion and
//! the `B`/`F` function pair used in its proof.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryConfig;
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::oracle::partition_bruteforce;
use crate::oracle::vertex::size_guard;
use crate::scaled::ScaledComplex;
use crate::spectral::{DrawSpec, SpectralConfig};

pub const PERMSUM_MAX_N: usize = 9;
pub const DETERMINANT_MAX_N: usize = 512;
pub const BF_MAX_I: usize = 8;
pub const POLE_SCAN_MAX_I: usize = 6;
/// Pivot ratio from which a determinant is flagged as ill-conditioned.
pub const CONDITIONING_LIMIT: f64 = 1e6;
const PERMSUM_CHUNK: usize = 4096;
/// Seed of the reference draw used to calibrate the empirical prefactor.
pub const EMPIRICAL_REFERENCE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedRoute {
    Permsum,
    Determinant,
}

/// Normalized partition function together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedZ {
    pub value: ScaledComplex,
    pub n: usize,
    pub route: ClosedRoute,
    /// Largest over smallest pivot magnitude (determinant route only).
    pub pivot_ratio: Option<f64>,
    pub conditioning_warning: bool,
}

/// σ-tables shared by the permutation sum: `A[n][i]` (diagonal factor of
/// `u_n` paired with `ξ_i`), `G[n][j]` and `H[i][j]`.
struct Tables {
    a: Vec<Vec<C64>>,
    g: Vec<Vec<C64>>,
    h: Vec<Vec<C64>>,
}

fn boundary_factor(u: C64, x: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let eta = setup.eta;
    let s = |z: C64| setup.sigma(z);
    let (p, q) = (bc.lambda1 + bc.zeta, bc.lambda2 + bc.zeta);
    Ok(s(p - x)? * s(q + x)? * s(2.0 * u)? * s(eta)?
        / (setup.sigma_nz(p + u, "sigma(lambda1+zeta+u)")?
            * setup.sigma_nz(q + u, "sigma(lambda2+zeta+u)")?
            * setup.sigma_nz(u - x + eta, "sigma(u-xi+eta)")?
            * setup.sigma_nz(u + x, "sigma(u+xi)")?))
}

impl Tables {
    fn new(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<Self> {
        let n = spectral.n();
        let (u, xi) = (&spectral.u, &spectral.xi);
        let eta = setup.eta;
        let s = |z: C64| setup.sigma(z);
        let mut a = vec![vec![C64::new(0.0, 0.0); n]; n];
        let mut g = a.clone();
        let mut h = a.clone();
        for r in 0..n {
            for c in 0..n {
                a[r][c] = boundary_factor(u[r], xi[c], bc, setup)?;
                g[r][c] = s(u[r] - xi[c])? * s(u[r] + xi[c] + eta)?
                    / (setup.sigma_nz(u[r] - xi[c] + eta, "sigma(u-xi+eta)")?
                        * setup.sigma_nz(u[r] + xi[c], "sigma(u+xi)")?);
                if r != c {
                    h[r][c] = s(xi[r] - xi[c] + eta)? / setup.sigma_nz(xi[r] - xi[c], "sigma(xi_i-xi_j)")?;
                }
            }
        }
        Ok(Self { a, g, h })
    }

    fn term(&self, s: &[usize]) -> C64 {
        let n = s.len();
        let mut p = C64::new(1.0, 0.0);
        for i in 0..n {
            p *= self.a[i][s[i]];
            for k in (i + 1)..n {
                p *= self.g[i][s[k]] * self.h[s[i]][s[k]];
            }
        }
        p
    }
}

/// The `idx`-th permutation of `0..n` in lexicographic order.
fn nth_permutation(n: usize, mut idx: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut fact = vec![1usize; n + 1];
    for k in 1..=n {
        fact[k] = fact[k - 1] * k;
    }
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let q = idx / fact[k];
        idx %= fact[k];
        out.push(pool.remove(q));
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Pairwise tree sum, independent of how the leaves were computed.
fn tree_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => C64::new(0.0, 0.0),
        1 => xs[0],
        n => tree_sum(&xs[..n / 2]) + tree_sum(&xs[n / 2..]),
    }
}

/// Symmetric permutation-sum form of the normalized partition function.
pub fn normalized_z_permsum(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let n = spectral.n();
    size_guard(n, PERMSUM_MAX_N, "permsum")?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let t = Tables::new(spectral, bc, setup)?;
    let total: usize = (1..=n).product();
    let chunks = total.div_ceil(PERMSUM_CHUNK);
    let partial: Vec<C64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * PERMSUM_CHUNK;
            let len = PERMSUM_CHUNK.min(total - start);
            let mut p = nth_permutation(n, start);
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..len {
                acc += t.term(&p);
                if k + 1 < len {
                    next_permutation(&mut p);
                }
            }
            acc
        })
        .collect();
    Ok(tree_sum(&partial))
}

/// Partial-pivoting LU determinant with a scaled accumulator.
pub fn determinant(matrix: &[C64], n: usize) -> Result<(ScaledComplex, f64)> {
    if matrix.len() != n * n {
        return Err(Error::Validation("matrix is not n×n".into()));
    }
    let mut a = matrix.to_vec();
    let mut det = ScaledComplex::ONE;
    let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|r| (r, a[r * n + k].norm()))
            .fold((k, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if mag == 0.0 || !mag.is_finite() {
            return Err(Error::Singularity(format!("zero pivot in column {k}")));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = det.mul_c64(C64::new(-1.0, 0.0));
        }
        let p = a[k * n + k];
        pmax = pmax.max(mag);
        pmin = pmin.min(mag);
        det = det.mul_c64(p);
        for r in (k + 1)..n {
            let f = a[r * n + k] / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in (k + 1)..n {
                let x = a[k * n + c];
                a[r * n + c] -= f * x;
            }
        }
    }
    Ok((det, if n == 0 { 1.0 } else { pmax / pmin }))
}

/// `Π_{α,i} σ(u_α−ξ_i)σ(u_α+ξ_i+η) / (Π_{α>β} σ(u_α−u_β)σ(u_α+u_β+η) Π_{k<l} σ(ξ_k−ξ_l)σ(ξ_k+ξ_l))`.
fn cauchy_prefactor(u: &[C64], xi: &[C64], setup: &ModularSetup) -> Result<ScaledComplex> {
    let eta = setup.eta;
    let mut p = ScaledComplex::ONE;
    for &a in u {
        for &x in xi {
            p = p.mul_c64(setup.sigma(a - x)? * setup.sigma(a + x + eta)?);
        }
    }
    for a in 0..u.len() {
        for b in 0..a {
            p = p.div_c64(
                setup.sigma_nz(u[a] - u[b], "sigma(u_a-u_b)")?
                    * setup.sigma_nz(u[a] + u[b] + eta, "sigma(u_a+u_b+eta)")?,
            );
        }
    }
    for k in 0..xi.len() {
        for l in (k + 1)..xi.len() {
            p = p.div_c64(
                setup.sigma_nz(xi[k] - xi[l], "sigma(xi_k-xi_l)")?
                    * setup.sigma_nz(xi[k] + xi[l], "sigma(xi_k+xi_l)")?,
            );
        }
    }
    Ok(p)
}

fn cauchy_kernel(u: C64, x: C64, setup: &ModularSetup) -> Result<C64> {
    let eta = setup.eta;
    Ok(setup.sigma(eta)?
        / (setup.sigma_nz(u - x, "sigma(u-xi)")?
            * setup.sigma_nz(u + x + eta, "sigma(u+xi+eta)")?
            * setup.sigma_nz(u - x + eta, "sigma(u-xi+eta)")?
            * setup.sigma_nz(u + x, "sigma(u+xi)")?))
}

/// Single-determinant form of the normalized partition function.
pub fn normalized_z_determinant(
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
) -> Result<NormalizedZ> {
    let n = spectral.n();
    size_guard(n, DETERMINANT_MAX_N, "determinant")?;
    let (p, q) = (bc.lambda1 + bc.zeta, bc.lambda2 + bc.zeta);
    let mut m = Vec::with_capacity(n * n);
    let mut rows = Vec::with_capacity(n);
    for &u in &spectral.u {
        rows.push(
            setup.sigma(2.0 * u)?
                / (setup.sigma_nz(p + u, "sigma(lambda1+zeta+u)")? * setup.sigma_nz(q + u, "sigma(lambda2+zeta+u)")?),
        );
    }
    let cols: Vec<C64> = spectral
        .xi
        .iter()
        .map(|&x| Ok(setup.sigma(p - x)? * setup.sigma(q + x)?))
        .collect::<Result<_>>()?;
    for (a, &u) in spectral.u.iter().enumerate() {
        for (j, &x) in spectral.xi.iter().enumerate() {
            m.push(cauchy_kernel(u, x, setup)? * rows[a] * cols[j]);
        }
    }
    let (det, ratio) = determinant(&m, n)?;
    let value = cauchy_prefactor(&spectral.u, &spectral.xi, setup)?.mul(det);
    Ok(NormalizedZ {
        value,
        n,
        route: ClosedRoute::Determinant,
        pivot_ratio: Some(ratio),
        conditioning_warning: ratio >= CONDITIONING_LIMIT,
    })
}

/// `Π_{l,i} σ(u_i+ξ_l)/σ(u_i+ξ_l+η)`.
pub fn spectral_product(spectral: &SpectralConfig, setup: &ModularSetup) -> Result<ScaledComplex> {
    let eta = setup.eta;
    let mut p = ScaledComplex::ONE;
    for &u in &spectral.u {
        for &x in &spectral.xi {
            p = p.mul_c64(setup.sigma(u + x)? / setup.sigma_nz(u + x + eta, "sigma(u+xi+eta)")?);
        }
    }
    Ok(p)
}

/// The `λ`-dependent constant as printed, `M = N/2`:
/// `Π_{k=1}^{M} σ(λ₁₂+2kη)σ(λ₁₂−2kη+η) / (σ(λ₁₂+kη)σ(λ₁₂−kη+η))`.
pub fn printed_lambda_constant(n: usize, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    let (l, eta) = (bc.lambda12(), setup.eta);
    let mut p = C64::new(1.0, 0.0);
    for k in 1..=(n / 2) {
        let k = k as f64;
        p *= setup.sigma(l + 2.0 * k * eta)? * setup.sigma(l - 2.0 * k * eta + eta)?
            / (setup.sigma_nz(l + k * eta, "sigma(lambda12+k eta)")?
                * setup.sigma_nz(l - k * eta + eta, "sigma(lambda12-k eta+eta)")?);
    }
    Ok(p)
}

/// The `λ`-dependent constant reproduced by the contraction,
/// `Π_{k=0}^{N−1} σ(λ₂₁+(2k−N)η) / σ(λ₂₁+kη)`.
///
/// Evaluated after cancelling the common factors, which leaves
/// `σ(λ₂₁+jη)` for negative `j ≡ N (mod 2)` over `σ(λ₂₁+jη)` for
/// `0 ≤ j < N`, `j ≢ N (mod 2)`. The cancelled pairs can vanish together
/// for commensurate `λ₁₂`, `η` at large `N`.
pub fn derived_lambda_constant(n: usize, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let (l, eta) = (bc.lambda21(), setup.eta);
    let n = n as i64;
    let mut p = C64::new(1.0, 0.0);
    for j in (-n..0).step_by(2) {
        p *= setup.sigma(l + eta * j as f64)?;
    }
    for j in ((1 - n % 2)..n).step_by(2) {
        p /= setup.sigma_nz(l + eta * j as f64, &format!("sigma(lambda21{j:+}eta)"))?;
    }
    Ok(p)
}

/// Printed prefactor: printed constant times the spectral product.
pub fn prefactor(bc: &BoundaryConfig, spectral: &SpectralConfig, setup: &ModularSetup) -> Result<ScaledComplex> {
    Ok(spectral_product(spectral, setup)?.mul_c64(printed_lambda_constant(spectral.n(), bc, setup)?))
}

pub fn derived_prefactor(
    bc: &BoundaryConfig,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<ScaledComplex> {
    Ok(spectral_product(spectral, setup)?.mul_c64(derived_lambda_constant(spectral.n(), bc, setup)?))
}

/// `Z / (spectral product · 𝒵)` measured against the contraction oracle.
pub fn empirical_lambda_constant(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let z = ScaledComplex::from_c64(partition_bruteforce(spectral, bc, setup)?);
    let zn = normalized_z_determinant(spectral, bc, setup)?.value;
    Ok(z.div(spectral_product(spectral, setup)?.mul(zn)).to_c64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrefactorKind {
    /// Constant reproduced by the contraction; valid for every `N`.
    #[default]
    Derived,
    /// Constant as printed with `M = N/2`; even `N` only.
    Printed,
    /// Constant calibrated on a fixed reference draw of the same `N`.
    Empirical,
}

/// Full partition function: prefactor times the normalized value.
pub fn full_z(
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    route: ClosedRoute,
    kind: PrefactorKind,
) -> Result<ScaledComplex> {
    let zn = match route {
        ClosedRoute::Permsum => ScaledComplex::from_c64(normalized_z_permsum(spectral, bc, setup)?),
        ClosedRoute::Determinant => normalized_z_determinant(spectral, bc, setup)?.value,
    };
    let n = spectral.n();
    let c = match kind {
        PrefactorKind::Derived => derived_lambda_constant(n, bc, setup)?,
        PrefactorKind::Printed => printed_lambda_constant(n, bc, setup)?,
        PrefactorKind::Empirical => {
            if n == 0 {
                C64::new(1.0, 0.0)
            } else {
                let reference =
                    SpectralConfig::random(n, EMPIRICAL_REFERENCE_SEED, &DrawSpec::default(), setup, Some(bc))?;
                empirical_lambda_constant(&reference, bc, setup)?
            }
        }
    };
    Ok(spectral_product(spectral, setup)?.mul_c64(c).mul(zn))
}

/// Relative residual of the recursion in `u_N`, determinant route throughout.
pub fn recursion_residual(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<f64> {
    let n = spectral.n();
    if n == 0 {
        return Err(Error::Domain("recursion needs N >= 1".into()));
    }
    let eta = setup.eta;
    let s = |z: C64| setup.sigma(z);
    let (u, xi) = (&spectral.u, &spectral.xi);
    let un = u[n - 1];
    let lhs = normalized_z_determinant(spectral, bc, setup)?.value;
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let x = xi[i];
        let mut c = boundary_factor(un, x, bc, setup)?;
        for &ul in &u[..n - 1] {
            c *= s(ul - x)? * s(ul + x + eta)? / (s(ul - x + eta)? * s(ul + x)?);
        }
        for (j, &xj) in xi.iter().enumerate() {
            if j != i {
                c *= s(xj - x + eta)? / setup.sigma_nz(xj - x, "sigma(xi_j-xi_i)")?;
            }
        }
        terms.push(
            normalized_z_determinant(&spectral.without(i), bc, setup)?
                .value
                .mul_c64(c),
        );
    }
    let e = terms.iter().map(|t| t.exp2).max().unwrap_or(0);
    let rhs: C64 = terms
        .iter()
        .map(|t| t.mantissa * crate::scaled::ldexp(1.0, t.exp2 - e))
        .sum();
    Ok(ScaledComplex::rel_diff(&lhs, &ScaledComplex::new(rhs, e)))
}

fn first(spectral: &SpectralConfig, i: usize) -> SpectralConfig {
    SpectralConfig {
        u: spectral.u[..i].to_vec(),
        xi: spectral.xi[..i].to_vec(),
    }
}

/// `B_I`: the normalized partition function of the first `I` pairs with
/// its boundary factors divided out (permutation-sum route).
pub fn b_function(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let i = spectral.n();
    size_guard(i, BF_MAX_I, "B function")?;
    let (p, q) = (bc.lambda1 + bc.zeta, bc.lambda2 + bc.zeta);
    let mut f = C64::new(1.0, 0.0);
    for l in 0..i {
        let (u, x) = (spectral.u[l], spectral.xi[l]);
        f *= setup.sigma(p + u)? * setup.sigma(q + u)?
            / (setup.sigma_nz(p - x, "sigma(lambda1+zeta-xi)")?
                * setup.sigma_nz(q + x, "sigma(lambda2+zeta+xi)")?
                * setup.sigma_nz(2.0 * u, "sigma(2u)")?);
    }
    Ok(f * normalized_z_permsum(spectral, bc, setup)?)
}

/// `F_I`: Cauchy-type determinant with kernel `σ(η)/[σσσσ]`.
pub fn f_function(spectral: &SpectralConfig, setup: &ModularSetup) -> Result<C64> {
    let i = spectral.n();
    size_guard(i, BF_MAX_I, "F function")?;
    let mut m = Vec::with_capacity(i * i);
    for &u in &spectral.u {
        for &x in &spectral.xi {
            m.push(cauchy_kernel(u, x, setup)?);
        }
    }
    let (det, _) = determinant(&m, i)?;
    Ok(cauchy_prefactor(&spectral.u, &spectral.xi, setup)?.mul(det).to_c64())
}

/// `(B_I, F_I)` on the first `I` spectral pairs.
pub fn bf_pair(i: usize, spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<(C64, C64)> {
    if i == 0 || i > spectral.n().min(BF_MAX_I) {
        return Err(Error::Size(format!("I must lie in 1..={}", spectral.n().min(BF_MAX_I))));
    }
    let sub = first(spectral, i);
    Ok((b_function(&sub, bc, setup)?, f_function(&sub, setup)?))
}

fn with_last_u(spectral: &SpectralConfig, i: usize, u: C64) -> SpectralConfig {
    let mut s = first(spectral, i);
    s.u[i - 1] = u;
    s
}

/// Residue in `u_I` at `z` by a four-point ring average of radius `eps`.
pub fn ring_residue<F>(z: C64, eps: f64, mut f: F) -> Result<C64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..4 {
        let w = C64::from_polar(eps, PI / 2.0 * k as f64 + PI / 4.0);
        acc += w * f(z + w)?;
    }
    Ok(acc / 4.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueMatch {
    pub location: C64,
    pub label: String,
    pub res_b: C64,
    pub res_f: C64,
    pub rel_diff: f64,
}

/// Residues of `B_I` and `F_I` in `u_I` at `ξ_i − η` and `−ξ_i`.
pub fn residues(
    i: usize,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    eps: f64,
) -> Result<Vec<ResidueMatch>> {
    if i == 0 || i > spectral.n().min(BF_MAX_I) {
        return Err(Error::Size(format!("I must lie in 1..={}", spectral.n().min(BF_MAX_I))));
    }
    let eta = setup.eta;
    let mut out = Vec::new();
    for k in 0..i {
        let x = spectral.xi[k];
        for (z, label) in [(x - eta, format!("xi{}-eta", k + 1)), (-x, format!("-xi{}", k + 1))] {
            let rb = ring_residue(z, eps, |u| b_function(&with_last_u(spectral, i, u), bc, setup))?;
            let rf = ring_residue(z, eps, |u| f_function(&with_last_u(spectral, i, u), setup))?;
            out.push(ResidueMatch {
                location: z,
                label,
                rel_diff: (rb - rf).norm() / rb.norm().max(rf.norm()).max(1e-300),
                res_b: rb,
                res_f: rf,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleProbe {
    pub location: C64,
    pub label: String,
    /// `max|g|` on the small ring over `max|g|` on the large ring; near 1 for
    /// a regular point, near the radius ratio for a simple pole.
    pub growth: f64,
    pub is_regular: bool,
}

/// Ring radii used by [`pole_scan`].
pub const POLE_SCAN_RADII: (f64, f64) = (1e-3, 1e-5);
/// Values below this fraction of the pole scale count as roundoff.
pub const POLE_SCAN_NOISE: f64 = 1e-8;

/// `g` returns the probed value and a magnitude it was computed from, so
/// cancellation noise in a difference is not mistaken for growth.
fn ring_growth<F>(z: C64, mut g: F) -> Result<f64>
where
    F: FnMut(C64) -> Result<(C64, f64)>,
{
    let ring = |eps: f64, g: &mut F| -> Result<(f64, f64)> {
        let (mut m, mut scale): (f64, f64) = (0.0, 0.0);
        for k in 0..8 {
            let (v, s) = g(z + C64::from_polar(eps, PI / 4.0 * k as f64 + PI / 8.0))?;
            m = m.max(v.norm());
            scale = scale.max(s);
        }
        Ok((m, scale))
    };
    let (big, _) = ring(POLE_SCAN_RADII.0, &mut g)?;
    let (small, scale) = ring(POLE_SCAN_RADII.1, &mut g)?;
    Ok(small / big.max(POLE_SCAN_NOISE * scale).max(1e-300))
}

/// Probes `F_I − b_scale·B_I` in `u_I` near `ξ_i − η`, `−ξ_i`, and `F_I`
/// alone near the apparent points `u_l`, `−u_l − η` (`l < I`).
pub fn pole_scan_scaled(
    i: usize,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    b_scale: f64,
) -> Result<Vec<PoleProbe>> {
    if i == 0 || i > spectral.n().min(POLE_SCAN_MAX_I) {
        return Err(Error::Size(format!(
            "I must lie in 1..={}",
            spectral.n().min(POLE_SCAN_MAX_I)
        )));
    }
    let eta = setup.eta;
    let threshold = 10.0;
    let mut out = Vec::new();
    for k in 0..i {
        let x = spectral.xi[k];
        for (z, label) in [
            (x - eta, format!("F-B at xi{}-eta", k + 1)),
            (-x, format!("F-B at -xi{}", k + 1)),
        ] {
            let growth = ring_growth(z, |u| {
                let s = with_last_u(spectral, i, u);
                let f = f_function(&s, setup)?;
                Ok((f - b_function(&s, bc, setup)? * b_scale, f.norm()))
            })?;
            out.push(PoleProbe {
                location: z,
                label,
                growth,
                is_regular: growth < threshold,
            });
        }
    }
    for l in 0..i.saturating_sub(1) {
        let ul = spectral.u[l];
        for (z, label) in [
            (ul, format!("F at u{}", l + 1)),
            (-ul - eta, format!("F at -u{}-eta", l + 1)),
        ] {
            let growth = ring_growth(z, |u| Ok((f_function(&with_last_u(spectral, i, u), setup)?, 0.0)))?;
            out.push(PoleProbe {
                location: z,
                label,
                growth,
                is_regular: growth < threshold,
            });
        }
    }
    Ok(out)
}

pub fn pole_scan(
    i: usize,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
) -> Result<Vec<PoleProbe>> {
    pole_scan_scaled(i, spectral, bc, setup, 1.0)
}

/// Growth of `F_I` or `B_I` alone at a candidate pole, for contrast.
pub fn single_growth(
    i: usize,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    z: C64,
    use_b: bool,
) -> Result<f64> {
    ring_growth(z, |u| {
        let s = with_last_u(spectral, i, u);
        let v = if use_b {
            b_function(&s, bc, setup)?
        } else {
            f_function(&s, setup)?
        };
        Ok((v, 0.0))
    })
}

/// Worst of `|F(u_N+1) − F(u_N)|/|F|`, the same for `B`, and for
/// `f = F − B` relative to `|F|`.
pub fn periodicity_residual(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<f64> {
    let n = spectral.n();
    size_guard(n, BF_MAX_I, "periodicity check")?;
    if n == 0 {
        return Err(Error::Domain("periodicity needs N >= 1".into()));
    }
    let shifted = with_last_u(spectral, n, spectral.u[n - 1] + 1.0);
    let (f0, b0) = (f_function(spectral, setup)?, b_function(spectral, bc, setup)?);
    let (f1, b1) = (f_function(&shifted, setup)?, b_function(&shifted, bc, setup)?);
    let rf = (f1 - f0).norm() / f0.norm().max(1e-300);
    let rb = (b1 - b0).norm() / b0.norm().max(1e-300);
    let rd = ((f1 - b1) - (f0 - b0)).norm() / f0.norm().max(1e-300);
    Ok(rf.max(rb).max(rd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(n: usize, seed: u64) -> (ModularSetup, BoundaryConfig, SpectralConfig) {
        let s = ModularSetup::default();
        let bc = BoundaryConfig::default();
        let sp = SpectralConfig::random(n, seed, &DrawSpec::default(), &s, Some(&bc)).unwrap();
        (s, bc, sp)
    }

    #[test]
    fn permutation_helpers() {
        let mut p = nth_permutation(4, 0);
        for k in 1..24 {
            assert!(next_permutation(&mut p));
            assert_eq!(p, nth_permutation(4, k));
        }
        assert!(!next_permutation(&mut p));
    }

    #[test]
    fn determinant_of_small_matrices() {
        let m = [
            C64::new(2.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 3.0),
            C64::new(4.0, 0.0),
        ];
        let (d, _) = determinant(&m, 2).unwrap();
        assert!((d.to_c64() - (m[0] * m[3] - m[1] * m[2])).norm() < 1e-14);
        assert!(determinant(&[C64::new(0.0, 0.0); 4], 2).is_err());
    }

    #[test]
    fn routes_agree() {
        for n in 1..=4 {
            let (s, bc, sp) = draw(n, 60 + n as u64);
            let a = normalized_z_permsum(&sp, &bc, &s).unwrap();
            let b = normalized_z_determinant(&sp, &bc, &s).unwrap().value.to_c64();
            assert!((a - b).norm() / a.norm() < 1e-11, "N={n}");
        }
    }

    #[test]
    fn derived_prefactor_matches_contraction() {
        for n in 1..=3 {
            let (s, bc, sp) = draw(n, 80 + n as u64);
            let z = partition_bruteforce(&sp, &bc, &s).unwrap();
            let f = full_z(&sp, &bc, &s, ClosedRoute::Determinant, PrefactorKind::Derived)
                .unwrap()
                .to_c64();
            assert!((z - f).norm() / z.norm() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn reduced_constant_matches_product() {
        let s = ModularSetup::default();
        let bc = BoundaryConfig::new(C64::new(0.37, 0.05), C64::new(-0.19, 0.02), C64::new(0.1, 0.0));
        let (l, eta) = (bc.lambda21(), s.eta);
        for n in 0..=7usize {
            let mut p = C64::new(1.0, 0.0);
            for k in 0..n {
                p *= s.sigma(l + eta * (2.0 * k as f64 - n as f64)).unwrap() / s.sigma(l + eta * k as f64).unwrap();
            }
            let c = derived_lambda_constant(n, &bc, &s).unwrap();
            assert!((c - p).norm() / p.norm() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn odd_printed_prefactor_is_rejected() {
        let (s, bc, sp) = draw(3, 1);
        assert!(matches!(prefactor(&bc, &sp, &s), Err(Error::OddSize(3))));
    }

    #[test]
    fn empty_system() {
        let s = ModularSetup::default();
        let bc = BoundaryConfig::default();
        let sp = SpectralConfig::new(vec![], vec![]).unwrap();
        assert_eq!(normalized_z_permsum(&sp, &bc, &s).unwrap(), C64::new(1.0, 0.0));
        for kind in [PrefactorKind::Derived, PrefactorKind::Printed, PrefactorKind::Empirical] {
            assert_eq!(
                full_z(&sp, &bc, &s, ClosedRoute::Determinant, kind).unwrap().to_c64(),
                C64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn proof_steps() {
        let (s, bc, sp) = draw(5, 123);
        for n in 1..=5 {
            let sub = first(&sp, n);
            assert!(recursion_residual(&sub, &bc, &s).unwrap() < 1e-9, "recursion N={n}");
            let (b, f) = bf_pair(n, &sp, &bc, &s).unwrap();
            assert!((b - f).norm() / f.norm() < 1e-9, "B=F I={n}");
        }
        assert!(periodicity_residual(&first(&sp, 3), &bc, &s).unwrap() < 1e-9);
        for r in residues(3, &sp, &bc, &s, 1e-5).unwrap() {
            assert!(r.rel_diff < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn pole_scan_separates_regular_points() {
        let (s, bc, sp) = draw(3, 321);
        for p in pole_scan(3, &sp, &bc, &s).unwrap() {
            assert!(p.is_regular, "{p:?}");
        }
        let z = sp.xi[0] - s.eta;
        assert!(single_growth(3, &sp, &bc, &s, z, false).unwrap() > 10.0);
        let bad = pole_scan_scaled(3, &sp, &bc, &s, 1.01).unwrap();
        assert!(!bad[0].is_regular, "{:?}", bad[0]);
    }
}

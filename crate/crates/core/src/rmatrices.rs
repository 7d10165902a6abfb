//! Eight-vertex R-matrix, the dynamical SOS R-matrix, and residuals of the
//! relations they satisfy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::elliptic::{ModularSetup, C64};
use crate::error::Result;
use crate::operator::{
    apply_two_site, apply_two_site_with, label_bit, mat4_identity, mat4_mul, mat4_swap_sites, DenseOperator, Mat4, ZERO,
};

/// Point `m = m₁ε₁ + m₂ε₂` of the weight space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub m1: C64,
    pub m2: C64,
}

impl WeightVector {
    pub fn new(m1: C64, m2: C64) -> Self {
        Self { m1, m2 }
    }

    pub fn m12(&self) -> C64 {
        self.m1 - self.m2
    }

    pub fn m21(&self) -> C64 {
        self.m2 - self.m1
    }

    /// `ê₁ = (½, −½)`, `ê₂ = (−½, ½)`; `j` is 1 or 2.
    pub fn hat(j: usize) -> Self {
        let h = if j == 1 { 0.5 } else { -0.5 };
        Self::new(C64::new(h, 0.0), C64::new(-h, 0.0))
    }

    /// `self + coef·ê_j`.
    pub fn shift(&self, j: usize, coef: C64) -> Self {
        let h = Self::hat(j);
        Self::new(self.m1 + coef * h.m1, self.m2 + coef * h.m2)
    }

    /// `self − η·d·ê₁`; for a state with `n₁` label-1 and `n₂` label-2
    /// sites, `m − ηΣ ê = m − η(n₁ − n₂)ê₁`.
    pub fn minus_imbalance(&self, d: i64, eta: C64) -> Self {
        self.shift(1, -eta * d as f64)
    }

    /// Checks `|σ(m₁₂)|`, `|σ(m₁₂ ± η)|` against the floor.
    pub fn check_generic(&self, setup: &ModularSetup) -> Result<()> {
        setup.sigma_nz(self.m12(), "sigma(m12)")?;
        setup.sigma_nz(self.m12() + setup.eta, "sigma(m12+eta)")?;
        setup.sigma_nz(self.m12() - setup.eta, "sigma(m12-eta)")?;
        Ok(())
    }
}

/// `n₁ − n₂` over the listed positions of basis index `idx`.
pub fn imbalance(idx: usize, positions: &[usize], n: usize) -> i64 {
    positions
        .iter()
        .map(|&p| if label_bit(idx, p, n) == 0 { 1 } else { -1 })
        .sum()
}

/// `n₁ − n₂` over all sites of an `n`-site basis index.
pub fn total_imbalance(idx: usize, n: usize) -> i64 {
    n as i64 - 2 * idx.count_ones() as i64
}

/// Entries `(a, b, c, d)` of the eight-vertex R-matrix.
pub fn vertex_weights(u: C64, setup: &ModularSetup) -> Result<[C64; 4]> {
    let eta = setup.eta;
    let th = |j: i64, z: C64| setup.theta_level2(j, z);
    let se = setup.sigma(eta)?;
    let sue = setup.sigma_nz(u + eta, "sigma(u+eta)")?;
    let t1_0 = th(1, C64::new(0.0, 0.0))?;
    let d0 = t1_0 * th(0, eta)? * sue;
    let d1 = t1_0 * th(1, eta)? * sue;
    let (t1u, t0u, t1ue, t0ue) = (th(1, u)?, th(0, u)?, th(1, u + eta)?, th(0, u + eta)?);
    Ok([
        t1u * t0ue * se / d0,
        t0u * t1ue * se / d0,
        t1u * t1ue * se / d1,
        t0u * t0ue * se / d1,
    ])
}

/// Eight-vertex R-matrix as a raw 4×4 block.
pub fn vertex_r_mat(u: C64, setup: &ModularSetup) -> Result<Mat4> {
    let [a, b, c, d] = vertex_weights(u, setup)?;
    let z = ZERO;
    Ok([a, z, z, d, z, b, c, z, z, c, b, z, d, z, z, a])
}

/// Eight-vertex R-matrix on sites `(1, 2)`.
pub fn vertex_r(u: C64, setup: &ModularSetup) -> Result<DenseOperator> {
    DenseOperator::from_mat4(1, 2, &vertex_r_mat(u, setup)?)
}

/// SOS R-matrix as a raw 4×4 block.
pub fn sos_r_mat(u: C64, m: WeightVector, setup: &ModularSetup) -> Result<Mat4> {
    let sue = setup.sigma_nz(u + setup.eta, "sigma(u+eta)")?;
    let scaled = sos_r_scaled(u, m, setup)?;
    Ok(scaled.map(|x| x / sue))
}

/// `σ(u+η)·R(u;m)`, entire in `u`.
pub fn sos_r_scaled(u: C64, m: WeightVector, setup: &ModularSetup) -> Result<Mat4> {
    let eta = setup.eta;
    let s = |z: C64| setup.sigma(z);
    let su = s(u)?;
    let se = s(eta)?;
    let sue = s(u + eta)?;
    let mut r = [ZERO; 16];
    r[0] = sue;
    r[15] = sue;
    for (i, j) in [(0usize, 1usize), (1, 0)] {
        let mij = if i == 0 { m.m12() } else { -m.m12() };
        let smij = setup.sigma_nz(mij, "sigma(m_ij)")?;
        r[(2 * i + j) * 4 + 2 * i + j] = su * s(mij - eta)? / smij;
        r[(2 * j + i) * 4 + 2 * i + j] = se * s(u + mij)? / smij;
    }
    Ok(r)
}

/// SOS R-matrix on sites `(1, 2)`.
pub fn sos_r(u: C64, m: WeightVector, setup: &ModularSetup) -> Result<DenseOperator> {
    DenseOperator::from_mat4(1, 2, &sos_r_mat(u, m, setup)?)
}

/// SOS blocks `R(u; m − η d ê₁)` memoized by the imbalance `d`.
pub struct SosCache<'a> {
    u: C64,
    m: WeightVector,
    setup: &'a ModularSetup,
    blocks: HashMap<i64, Mat4>,
}

impl<'a> SosCache<'a> {
    pub fn new(u: C64, m: WeightVector, setup: &'a ModularSetup) -> Self {
        Self {
            u,
            m,
            setup,
            blocks: HashMap::new(),
        }
    }

    pub fn block(&mut self, d: i64) -> Result<Mat4> {
        if let Some(b) = self.blocks.get(&d) {
            return Ok(*b);
        }
        let b = sos_r_mat(self.u, self.m.minus_imbalance(d, self.setup.eta), self.setup)?;
        self.blocks.insert(d, b);
        Ok(b)
    }
}

/// Applies `R_{pa,pb}(u; m − ηΣ_{k∈spectators} h⁽ᵏ⁾)` to an `n`-site state.
pub fn apply_sos_dynamic(
    state: &mut [C64],
    n: usize,
    pa: usize,
    pb: usize,
    spectators: &[usize],
    u: C64,
    m: WeightVector,
    setup: &ModularSetup,
) -> Result<()> {
    let mut cache = SosCache::new(u, m, setup);
    apply_two_site_with(state, n, pa, pb, |base| cache.block(imbalance(base, spectators, n)))
}

/// Max magnitude of entries that change the total weight.
pub fn weight_conservation_violation(m: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4usize {
        for c in 0..4usize {
            if r.count_ones() != c.count_ones() {
                worst = worst.max(m[4 * r + c].norm());
            }
        }
    }
    worst
}

fn three_site<F>(act: F) -> Result<DenseOperator>
where
    F: FnMut(&mut Vec<C64>) -> Result<()>,
{
    DenseOperator::from_action(vec![1, 2, 3], act)
}

/// `R₁₂(u₁−u₂)R₁₃(u₁−u₃)R₂₃(u₂−u₃) = R₂₃R₁₃R₁₂`, normalized by the right side.
pub fn qybe_residual(u1: C64, u2: C64, u3: C64, setup: &ModularSetup) -> Result<f64> {
    let r12 = vertex_r_mat(u1 - u2, setup)?;
    let r13 = vertex_r_mat(u1 - u3, setup)?;
    let r23 = vertex_r_mat(u2 - u3, setup)?;
    let lhs = three_site(|s| {
        apply_two_site(s, 3, 1, 2, &r23);
        apply_two_site(s, 3, 0, 2, &r13);
        apply_two_site(s, 3, 0, 1, &r12);
        Ok(())
    })?;
    let rhs = three_site(|s| {
        apply_two_site(s, 3, 0, 1, &r12);
        apply_two_site(s, 3, 0, 2, &r13);
        apply_two_site(s, 3, 1, 2, &r23);
        Ok(())
    })?;
    lhs.rel_diff(&rhs)
}

/// Dynamical Yang-Baxter residual, normalized by the right side.
pub fn dybe_residual(u1: C64, u2: C64, u3: C64, m: WeightVector, setup: &ModularSetup) -> Result<f64> {
    m.check_generic(setup)?;
    let lhs = three_site(|s| {
        apply_sos_dynamic(s, 3, 1, 2, &[0], u2 - u3, m, setup)?;
        apply_sos_dynamic(s, 3, 0, 2, &[], u1 - u3, m, setup)?;
        apply_sos_dynamic(s, 3, 0, 1, &[2], u1 - u2, m, setup)
    })?;
    let rhs = three_site(|s| {
        apply_sos_dynamic(s, 3, 0, 1, &[], u1 - u2, m, setup)?;
        apply_sos_dynamic(s, 3, 0, 2, &[1], u1 - u3, m, setup)?;
        apply_sos_dynamic(s, 3, 1, 2, &[], u2 - u3, m, setup)
    })?;
    lhs.rel_diff(&rhs)
}

/// `max|R₁₂(u;m)R₂₁(−u;m) − id|`.
pub fn unitarity_residual(u: C64, m: WeightVector, setup: &ModularSetup) -> Result<f64> {
    let a = sos_r_mat(u, m, setup)?;
    let b = mat4_swap_sites(&sos_r_mat(-u, m, setup)?);
    let prod = mat4_mul(&a, &b);
    let id = mat4_identity();
    Ok(prod.iter().zip(&id).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Crossing residual with the standard parities `ε₁ = 1`, `ε₂ = −1`.
pub fn crossing_residual(u: C64, m: WeightVector, setup: &ModularSetup) -> Result<f64> {
    crossing_residual_with_parity(u, m, setup, -1.0)
}

/// Crossing residual with `ε₂` supplied, so a wrong parity can be exercised.
///
/// `σ(u)/σ(u+η)·R(−u−η)` is evaluated as `−σ(u+η)⁻¹·[σ(v+η)R(v)]_{v=−u−η}`,
/// which stays finite at `u = 0`.
pub fn crossing_residual_with_parity(u: C64, m: WeightVector, setup: &ModularSetup, eps2: f64) -> Result<f64> {
    m.check_generic(setup)?;
    let eta = setup.eta;
    let eps = [1.0, eps2];
    let bar = [1usize, 0];
    let lhs = sos_r_mat(u, m, setup)?;
    let sue = setup.sigma_nz(u + eta, "sigma(u+eta)")?;
    let sm21 = setup.sigma_nz(m.m21(), "sigma(m21)")?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..2usize {
        let mi = m.shift(i + 1, -eta);
        let rs = sos_r_scaled(-u - eta, mi, setup)?;
        let pre = -setup.sigma(mi.m21())? / (sue * sm21);
        for (k, l, j) in itertools3() {
            let left = lhs[(2 * k + l) * 4 + 2 * i + j];
            let right = pre * eps[l] * eps[j] * rs[(2 * bar[j] + k) * 4 + 2 * bar[l] + i];
            worst = worst.max((left - right).norm());
            scale = scale.max(left.norm());
        }
    }
    Ok(worst / scale.max(1e-300))
}

fn itertools3() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..8usize).map(|x| (x >> 2, (x >> 1) & 1, x & 1))
}

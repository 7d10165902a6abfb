//! Non-diagonal K-matrix, intertwiners and their duals, the face-vertex
//! correspondence and the domain-wall boundary states.

use serde::{Deserialize, Serialize};

use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::operator::{apply_one_site, apply_two_site, mat4_swap_sites, tensor_vectors, DenseOperator, Mat2, ZERO};
use crate::rmatrices::{sos_r_mat, vertex_r_mat, WeightVector};
use crate::spectral::SpectralConfig;

/// Boundary parameters `λ₁, λ₂, ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub lambda1: C64,
    pub lambda2: C64,
    pub zeta: C64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            lambda1: C64::new(0.41, 0.0),
            lambda2: C64::new(-0.23, 0.0),
            zeta: C64::new(0.17, 0.0),
        }
    }
}

impl BoundaryConfig {
    pub fn new(lambda1: C64, lambda2: C64, zeta: C64) -> Self {
        Self { lambda1, lambda2, zeta }
    }

    pub fn lambda(&self) -> WeightVector {
        WeightVector::new(self.lambda1, self.lambda2)
    }

    pub fn lambda12(&self) -> C64 {
        self.lambda1 - self.lambda2
    }

    pub fn lambda21(&self) -> C64 {
        self.lambda2 - self.lambda1
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.lambda2, self.lambda1, self.zeta)
    }

    /// `σ`-arguments that must stay away from zero for a spectral value `u`.
    pub fn spectral_arguments(&self, u: C64) -> Vec<(C64, String)> {
        let l = self.lambda1 + self.lambda2 - 0.5;
        vec![
            (self.lambda1 + self.zeta + u, "lambda1+zeta+u".into()),
            (self.lambda2 + self.zeta + u, "lambda2+zeta+u".into()),
            (l - u, "lambda1+lambda2-1/2-u".into()),
        ]
    }

    /// `|σ(λ₁₂ + kη)|` for `|k| ≤ 2N+2` plus the per-`u` guards.
    pub fn validate(&self, n: usize, spectral: Option<&SpectralConfig>, setup: &ModularSetup) -> Result<()> {
        let kmax = 2 * n as i64 + 2;
        for k in -kmax..=kmax {
            setup.sigma_nz(
                self.lambda12() + setup.eta * k as f64,
                &format!("sigma(lambda12{k:+}eta)"),
            )?;
        }
        if let Some(sp) = spectral {
            for &u in &sp.u {
                for (z, what) in self.spectral_arguments(u) {
                    setup.sigma_nz(z, &what)?;
                }
            }
        }
        Ok(())
    }
}

/// `σ(2u)/σ_α(u)` through the duplication formula, regular at `u = 0`.
fn double_over(alpha: (u8, u8), u: C64, setup: &ModularSetup) -> Result<C64> {
    const ALL: [(u8, u8); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let mut num = C64::new(2.0, 0.0);
    let mut den = C64::new(1.0, 0.0);
    for &(a1, a2) in &ALL {
        if (a1, a2) != (0, 0) {
            den *= setup.sigma_char(a1, a2, C64::new(0.0, 0.0))?;
        }
        if (a1, a2) != alpha {
            num *= setup.sigma_char(a1, a2, u)?;
        }
    }
    Ok(num / den)
}

/// Coefficients `(k₀, k_x, k_y, k_z)` of the K-matrix.
pub fn k_coefficients(u: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<[C64; 4]> {
    let l = bc.lambda1 + bc.lambda2 - 0.5;
    let a = bc.lambda1 + bc.zeta;
    let b = bc.lambda2 + bc.zeta;
    let den = 2.0
        * setup.sigma_nz(l - u, "sigma(-u+lambda1+lambda2-1/2)")?
        * setup.sigma_nz(a + u, "sigma(lambda1+zeta+u)")?
        * setup.sigma_nz(b + u, "sigma(lambda2+zeta+u)")?;
    let coef = |alpha: (u8, u8)| -> Result<C64> {
        let sc = |z: C64| setup.sigma_char(alpha.0, alpha.1, z);
        Ok(double_over(alpha, u, setup)? * sc(l)? * sc(a)? * sc(b)? / den)
    };
    Ok([coef((0, 0))?, coef((1, 0))?, C64::i() * coef((1, 1))?, coef((0, 1))?])
}

/// `K(u) = k₀ + k_x σˣ + k_y σʸ + k_z σᶻ` as a raw 2×2 block.
pub fn vertex_k_mat(u: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<Mat2> {
    let [k0, kx, ky, kz] = k_coefficients(u, bc, setup)?;
    let i = C64::i();
    Ok([k0 + kz, kx - i * ky, kx + i * ky, k0 - kz])
}

pub fn vertex_k(u: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<DenseOperator> {
    DenseOperator::from_mat2(0, &vertex_k_mat(u, bc, setup)?)
}

/// `R₁₂(u₁−u₂)K₁(u₁)R₂₁(u₁+u₂)K₂(u₂) = K₂(u₂)R₁₂(u₁+u₂)K₁(u₁)R₂₁(u₁−u₂)`.
pub fn re_residual(u1: C64, u2: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<f64> {
    let rm = vertex_r_mat(u1 - u2, setup)?;
    let rp = vertex_r_mat(u1 + u2, setup)?;
    let rm21 = mat4_swap_sites(&rm);
    let rp21 = mat4_swap_sites(&rp);
    let k1 = vertex_k_mat(u1, bc, setup)?;
    let k2 = vertex_k_mat(u2, bc, setup)?;
    let lhs = DenseOperator::from_action(vec![1, 2], |s| {
        apply_one_site(s, 2, 1, &k2);
        apply_two_site(s, 2, 0, 1, &rp21);
        apply_one_site(s, 2, 0, &k1);
        apply_two_site(s, 2, 0, 1, &rm);
        Ok(())
    })?;
    let rhs = DenseOperator::from_action(vec![1, 2], |s| {
        apply_two_site(s, 2, 0, 1, &rm21);
        apply_one_site(s, 2, 0, &k1);
        apply_two_site(s, 2, 0, 1, &rp);
        apply_one_site(s, 2, 1, &k2);
        Ok(())
    })?;
    lhs.rel_diff(&rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntertwinerKind {
    /// Column `φ_{m, m−ηĵ}(u)`.
    Column,
    /// Row `φ̄_{m, m−ηĵ}(u)`.
    DualBar,
    /// Row `φ̃_{m+ηĵ, m}(u)`.
    DualTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intertwiner {
    pub kind: IntertwinerKind,
    pub from_weight: WeightVector,
    /// 1 or 2.
    pub shift: usize,
    pub argument: C64,
    pub entries: [C64; 2],
}

impl Intertwiner {
    pub fn dot(&self, v: &[C64; 2]) -> C64 {
        self.entries[0] * v[0] + self.entries[1] * v[1]
    }
}

/// `φ_{m, m−ηĵ}(u)` with components `θ⁽ᵏ⁾(u + 2m_j)`.
pub fn intertwiner(m: WeightVector, j: usize, u: C64, setup: &ModularSetup) -> Result<Intertwiner> {
    if j != 1 && j != 2 {
        return Err(Error::Domain(format!("intertwiner shift must be 1 or 2, got {j}")));
    }
    let mj = if j == 1 { m.m1 } else { m.m2 };
    let z = u + 2.0 * mj;
    Ok(Intertwiner {
        kind: IntertwinerKind::Column,
        from_weight: m,
        shift: j,
        argument: u,
        entries: [setup.theta_level2(1, z)?, setup.theta_level2(2, z)?],
    })
}

/// Row-major 2×2 matrix whose columns are `φ_{m, m−ηê₁}(u)`, `φ_{m, m−ηê₂}(u)`.
pub fn intertwiner_matrix(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<Mat2> {
    let a = intertwiner(m, 1, u, setup)?.entries;
    let b = intertwiner(m, 2, u, setup)?.entries;
    Ok([a[0], b[0], a[1], b[1]])
}

fn det2(m: &Mat2) -> C64 {
    m[0] * m[3] - m[1] * m[2]
}

fn inverse2(m: &Mat2, setup: &ModularSetup) -> Result<Mat2> {
    let d = setup.guard(det2(m), "intertwiner determinant")?;
    Ok([m[3] / d, -m[1] / d, -m[2] / d, m[0] / d])
}

/// `det[φ_{m,m−ηê₁}(u), φ_{m,m−ηê₂}(u)] / (σ(u+m₁+m₂−½)σ(m₁₂))`, the
/// modular constant `C(τ)`.
pub fn intertwiner_det_ratio(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<C64> {
    let d = det2(&intertwiner_matrix(m, u, setup)?);
    let s = setup.sigma(u + m.m1 + m.m2 - 0.5)? * setup.sigma(m.m12())?;
    Ok(d / setup.guard(s, "sigma(u+m1+m2-1/2)sigma(m12)")?)
}

/// The dual rows at a weight `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualIntertwiners {
    /// `φ̄_{m, m−ηê_μ}(u)`, `μ = 1, 2`.
    pub bar: [Intertwiner; 2],
    /// `φ̃_{m+ηê_μ, m}(u)`, `μ = 1, 2`.
    pub tilde: [Intertwiner; 2],
}

/// Rows `φ̃_{m+ηê_μ, m}(u)`: the inverse of `[φ_{m+ηê₁, m}(u), φ_{m+ηê₂, m}(u)]`.
pub fn tilde_rows(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<[Intertwiner; 2]> {
    let a = intertwiner(m.shift(1, setup.eta), 1, u, setup)?.entries;
    let b = intertwiner(m.shift(2, setup.eta), 2, u, setup)?.entries;
    let inv = inverse2(&[a[0], b[0], a[1], b[1]], setup)?;
    Ok([0usize, 1].map(|mu| Intertwiner {
        kind: IntertwinerKind::DualTilde,
        from_weight: m,
        shift: mu + 1,
        argument: u,
        entries: [inv[2 * mu], inv[2 * mu + 1]],
    }))
}

/// Rows `φ̄_{m, m−ηê_μ}(u)`: the inverse of the intertwiner matrix at `m`.
pub fn bar_rows(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<[Intertwiner; 2]> {
    let inv = inverse2(&intertwiner_matrix(m, u, setup)?, setup)?;
    Ok([0usize, 1].map(|mu| Intertwiner {
        kind: IntertwinerKind::DualBar,
        from_weight: m,
        shift: mu + 1,
        argument: u,
        entries: [inv[2 * mu], inv[2 * mu + 1]],
    }))
}

pub fn dual_intertwiners(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<DualIntertwiners> {
    Ok(DualIntertwiners {
        bar: bar_rows(m, u, setup)?,
        tilde: tilde_rows(m, u, setup)?,
    })
}

/// Worst deviation of `φ̄_μ·φ_ν = δ_{μν}`, `φ̃_μ·φ_{m+ηê_ν,m} = δ_{μν}`
/// and of both completeness sums from the identity.
pub fn duality_residual(m: WeightVector, u: C64, setup: &ModularSetup) -> Result<f64> {
    let d = dual_intertwiners(m, u, setup)?;
    let cols = [intertwiner(m, 1, u, setup)?, intertwiner(m, 2, u, setup)?];
    let tcols = [
        intertwiner(m.shift(1, setup.eta), 1, u, setup)?,
        intertwiner(m.shift(2, setup.eta), 2, u, setup)?,
    ];
    let mut worst: f64 = 0.0;
    for mu in 0..2 {
        for nu in 0..2 {
            let delta = if mu == nu { 1.0 } else { 0.0 };
            worst = worst.max((d.bar[mu].dot(&cols[nu].entries) - delta).norm());
            worst = worst.max((d.tilde[mu].dot(&tcols[nu].entries) - delta).norm());
        }
    }
    for r in 0..2 {
        for c in 0..2 {
            let delta = if r == c { 1.0 } else { 0.0 };
            let sb: C64 = (0..2).map(|mu| cols[mu].entries[r] * d.bar[mu].entries[c]).sum();
            let st: C64 = (0..2).map(|mu| tcols[mu].entries[r] * d.tilde[mu].entries[c]).sum();
            worst = worst.max((sb - delta).norm()).max((st - delta).norm());
        }
    }
    Ok(worst)
}

fn kron2(a: &[C64; 2], b: &[C64; 2]) -> [C64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// `R̄(u₁−u₂)φ_{m,m−ηî}(u₁)⊗φ_{m−ηî,m−ηî−ηĵ}(u₂) =
/// Σ_{kl} R(u₁−u₂;m)^{kl}_{ij} φ_{m−ηl̂,m−ηl̂−ηk̂}(u₁)⊗φ_{m,m−ηl̂}(u₂)`.
pub fn face_vertex_residual(u1: C64, u2: C64, m: WeightVector, setup: &ModularSetup) -> Result<f64> {
    m.check_generic(setup)?;
    let eta = setup.eta;
    let rv = vertex_r_mat(u1 - u2, setup)?;
    let rf = sos_r_mat(u1 - u2, m, setup)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..2usize {
        for j in 0..2usize {
            let v = kron2(
                &intertwiner(m, i + 1, u1, setup)?.entries,
                &intertwiner(m.shift(i + 1, -eta), j + 1, u2, setup)?.entries,
            );
            let lhs: Vec<C64> = (0..4).map(|r| (0..4).map(|c| rv[4 * r + c] * v[c]).sum()).collect();
            let mut rhs = [ZERO; 4];
            for k in 0..2usize {
                for l in 0..2usize {
                    let w = rf[(2 * k + l) * 4 + 2 * i + j];
                    if w == ZERO {
                        continue;
                    }
                    let t = kron2(
                        &intertwiner(m.shift(l + 1, -eta), k + 1, u1, setup)?.entries,
                        &intertwiner(m, l + 1, u2, setup)?.entries,
                    );
                    for q in 0..4 {
                        rhs[q] += w * t[q];
                    }
                }
            }
            for q in 0..4 {
                worst = worst.max((lhs[q] - rhs[q]).norm());
                scale = scale.max(lhs[q].norm());
            }
        }
    }
    Ok(worst / scale.max(1e-300))
}

/// Diagonal face-type K: `(σ(λ₁+ζ−u)/σ(λ₁+ζ+u), σ(λ₂+ζ−u)/σ(λ₂+ζ+u))`.
pub fn face_k(bc: &BoundaryConfig, u: C64, setup: &ModularSetup) -> Result<[C64; 2]> {
    let a = bc.lambda1 + bc.zeta;
    let b = bc.lambda2 + bc.zeta;
    Ok([
        setup.sigma(a - u)? / setup.sigma_nz(a + u, "sigma(lambda1+zeta+u)")?,
        setup.sigma(b - u)? / setup.sigma_nz(b + u, "sigma(lambda2+zeta+u)")?,
    ])
}

/// `K(u) = Σ_i φ_{λ,λ−ηî}(u) k_i(u) φ̄_{λ,λ−ηî}(−u)`, as an entrywise residual.
pub fn k_factorization_residual(u: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<f64> {
    let k = vertex_k_mat(u, bc, setup)?;
    let rebuilt = k_from_face(u, bc, setup)?;
    let scale = k.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    Ok(k.iter().zip(&rebuilt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

/// The right side of the K factorization.
pub fn k_from_face(u: C64, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<Mat2> {
    let lam = bc.lambda();
    let fk = face_k(bc, u, setup)?;
    let bars = bar_rows(lam, -u, setup)?;
    let mut out = [ZERO; 4];
    for i in 0..2 {
        let col = intertwiner(lam, i + 1, u, setup)?.entries;
        for r in 0..2 {
            for c in 0..2 {
                out[2 * r + c] += col[r] * fk[i] * bars[i].entries[c];
            }
        }
    }
    Ok(out)
}

/// Domain-wall boundary states as per-site factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStates {
    /// `|Ω⁽²⁾(λ)⟩`: site `k` carries `φ_{λ−(k−1)ηê₂, λ−kηê₂}(ξ_k)`.
    pub omega2_ket: Vec<[C64; 2]>,
    /// `|Ω̄⁽¹⁾(λ)⟩`: bar site `i` carries `φ_{a_i, a_i−ηê₁}(−u_i)`, `a_i = λ+(2i−N)ηê₁`.
    pub omega1_bar_ket: Vec<[C64; 2]>,
    /// `⟨Ω⁽¹⁾(λ)|`: site `k` carries `φ̃_{λ−(k−1)ηê₁, λ−kηê₁}(ξ_k)`.
    pub omega1_bra: Vec<[C64; 2]>,
    /// `⟨Ω̄⁽²⁾(λ)|`: bar site `i` carries `φ̃_{m_i+ηê₂, m_i}(u_i)`, `m_i = λ+(2i−1−N)ηê₁`.
    pub omega2_bar_bra: Vec<[C64; 2]>,
}

impl BoundaryStates {
    pub fn omega2_ket_tensor(&self) -> Vec<C64> {
        tensor_vectors(&self.omega2_ket)
    }
    pub fn omega1_bar_ket_tensor(&self) -> Vec<C64> {
        tensor_vectors(&self.omega1_bar_ket)
    }
    pub fn omega1_bra_tensor(&self) -> Vec<C64> {
        tensor_vectors(&self.omega1_bra)
    }
    pub fn omega2_bar_bra_tensor(&self) -> Vec<C64> {
        tensor_vectors(&self.omega2_bar_bra)
    }
}

pub fn boundary_states(bc: &BoundaryConfig, spectral: &SpectralConfig, setup: &ModularSetup) -> Result<BoundaryStates> {
    let n = spectral.n();
    let lam = bc.lambda();
    let eta = setup.eta;
    let mut st = BoundaryStates {
        omega2_ket: Vec::with_capacity(n),
        omega1_bar_ket: Vec::with_capacity(n),
        omega1_bra: Vec::with_capacity(n),
        omega2_bar_bra: Vec::with_capacity(n),
    };
    for k in 1..=n {
        let xi = spectral.xi[k - 1];
        st.omega2_ket
            .push(intertwiner(lam.shift(2, -eta * (k as f64 - 1.0)), 2, xi, setup)?.entries);
        st.omega1_bra
            .push(tilde_rows(lam.shift(1, -eta * k as f64), xi, setup)?[0].entries);
    }
    for i in 1..=n {
        let u = spectral.u[i - 1];
        let mi = lam.shift(1, eta * (2.0 * i as f64 - 1.0 - n as f64));
        st.omega2_bar_bra.push(tilde_rows(mi, u, setup)?[1].entries);
        let ai = lam.shift(1, eta * (2.0 * i as f64 - n as f64));
        st.omega1_bar_ket.push(intertwiner(ai, 1, -u, setup)?.entries);
    }
    Ok(st)
}

//! Vertex-type double-row contraction and the configuration-sum oracle.

use crate::boundary::{boundary_states, vertex_k_mat, BoundaryConfig, BoundaryStates};
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::operator::{apply_one_site, apply_two_site, dot, DenseOperator, Mat2, Mat4, ZERO};
use crate::rmatrices::vertex_r_mat;
use crate::spectral::SpectralConfig;

pub const BRUTEFORCE_MAX_N: usize = 12;
pub const ENUMERATION_MAX_N: usize = 2;
/// Largest `N` for which dense `2^N`-dimensional operators are materialized.
pub const DENSE_MAX_N: usize = 8;

pub(crate) fn size_guard(n: usize, max: usize, what: &str) -> Result<()> {
    if n > max {
        return Err(Error::Size(format!("{what} limited to N ≤ {max}, got N = {n}")));
    }
    Ok(())
}

/// The blocks of one double row: `R̄(u+ξ_k)`, `K(u)`, `R̄(u−ξ_k)`.
struct DoubleRow {
    plus: Vec<Mat4>,
    k: Mat2,
    minus: Vec<Mat4>,
}

impl DoubleRow {
    fn new(u: C64, spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<Self> {
        Ok(Self {
            plus: spectral
                .xi
                .iter()
                .map(|x| vertex_r_mat(u + x, setup))
                .collect::<Result<_>>()?,
            k: vertex_k_mat(u, bc, setup)?,
            minus: spectral
                .xi
                .iter()
                .map(|x| vertex_r_mat(u - x, setup))
                .collect::<Result<_>>()?,
        })
    }

    /// `R̄_{a,N}(u−ξ_N)…R̄_{a,1}(u−ξ_1) K_a(u) R̄_{1,a}(u+ξ_1)…R̄_{N,a}(u+ξ_N)`.
    fn apply(&self, state: &mut [C64], n: usize, aux: usize, quantum: &[usize]) {
        for k in (0..quantum.len()).rev() {
            apply_two_site(state, n, aux, quantum[k], &self.plus[k]);
        }
        apply_one_site(state, n, aux, &self.k);
        for (k, &q) in quantum.iter().enumerate() {
            apply_two_site(state, n, aux, q, &self.minus[k]);
        }
    }
}

/// Double-row monodromy on the register `[aux = 0, 1, …, N]`.
pub fn double_row_monodromy(
    u: C64,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let n = spectral.n();
    size_guard(n, DENSE_MAX_N, "dense double-row monodromy")?;
    let row = DoubleRow::new(u, spectral, bc, setup)?;
    let quantum: Vec<usize> = (1..=n).collect();
    DenseOperator::from_action((0..=n as u32).collect(), |s| {
        row.apply(s, n + 1, 0, &quantum);
        Ok(())
    })
}

/// Residual of `R_{ij}(u_i−u_j)𝕋_i(u_i)R_{ji}(u_i+u_j)𝕋_j(u_j) =
/// 𝕋_j(u_j)R_{ij}(u_i+u_j)𝕋_i(u_i)R_{ji}(u_i−u_j)`.
pub fn exchange_residual(
    ui: C64,
    uj: C64,
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
) -> Result<f64> {
    let n = spectral.n();
    size_guard(n, DENSE_MAX_N - 2, "exchange relation check")?;
    let ti = DoubleRow::new(ui, spectral, bc, setup)?;
    let tj = DoubleRow::new(uj, spectral, bc, setup)?;
    let rm = vertex_r_mat(ui - uj, setup)?;
    let rp = vertex_r_mat(ui + uj, setup)?;
    let quantum: Vec<usize> = (2..n + 2).collect();
    let sites: Vec<u32> = (0..n as u32 + 2).collect();
    let w = n + 2;
    let lhs = DenseOperator::from_action(sites.clone(), |s| {
        tj.apply(s, w, 1, &quantum);
        apply_two_site(s, w, 1, 0, &rp);
        ti.apply(s, w, 0, &quantum);
        apply_two_site(s, w, 0, 1, &rm);
        Ok(())
    })?;
    let rhs = DenseOperator::from_action(sites, |s| {
        apply_two_site(s, w, 1, 0, &rm);
        ti.apply(s, w, 0, &quantum);
        apply_two_site(s, w, 0, 1, &rp);
        tj.apply(s, w, 1, &quantum);
        Ok(())
    })?;
    lhs.rel_diff(&rhs)
}

/// Domain-wall partition function by double-row contraction.
pub fn partition_bruteforce(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    size_guard(spectral.n(), BRUTEFORCE_MAX_N, "bruteforce")?;
    let states = boundary_states(bc, spectral, setup)?;
    partition_bruteforce_with_states(spectral, bc, setup, &states)
}

/// Same contraction with caller-supplied boundary vectors.
///
/// `⟨Ω⁽¹⁾| Π_{i=1..N} (⟨Ω̄⁽²⁾|_i 𝕋_i(u_i) |Ω̄⁽¹⁾⟩_i) |Ω⁽²⁾⟩`, bar site `N` innermost.
pub fn partition_bruteforce_with_states(
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    states: &BoundaryStates,
) -> Result<C64> {
    let n = spectral.n();
    size_guard(n, BRUTEFORCE_MAX_N, "bruteforce")?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let dim = 1usize << n;
    let quantum: Vec<usize> = (1..=n).collect();
    let mut v = states.omega2_ket_tensor();
    let mut w = vec![ZERO; 2 * dim];
    for i in (0..n).rev() {
        let row = DoubleRow::new(spectral.u[i], spectral, bc, setup)?;
        let col = states.omega1_bar_ket[i];
        let bra = states.omega2_bar_bra[i];
        for r in 0..dim {
            w[r] = col[0] * v[r];
            w[dim + r] = col[1] * v[r];
        }
        row.apply(&mut w, n + 1, 0, &quantum);
        for r in 0..dim {
            v[r] = bra[0] * w[r] + bra[1] * w[dim + r];
        }
    }
    Ok(dot(&states.omega1_bra_tensor(), &v))
}

/// Contraction value together with its spread under reversing the order of
/// the inhomogeneities. `Z` is symmetric in `{ξ}`, so the spread measures
/// cancellation error in the contraction itself.
pub fn partition_bruteforce_spread(
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
) -> Result<(C64, f64)> {
    let z = partition_bruteforce(spectral, bc, setup)?;
    let mut rev = spectral.clone();
    rev.xi.reverse();
    let w = partition_bruteforce(&rev, bc, setup)?;
    Ok((z, (z - w).norm() / z.norm().max(w.norm()).max(1e-300)))
}

/// Domain-wall partition function as an explicit sum over edge spins.
pub fn partition_enumeration(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    size_guard(spectral.n(), ENUMERATION_MAX_N, "enumeration")?;
    let states = boundary_states(bc, spectral, setup)?;
    partition_enumeration_with_states(spectral, bc, setup, &states)
}

/// Edge-spin sum with caller-supplied boundary vectors.
///
/// Bar line `i` carries edges `0..=2N+1`: its vertex with quantum line `k`
/// on the incoming half joins edges `N−k → N−k+1`, the reflection joins
/// `N → N+1`, and the outgoing vertex joins `N+k → N+k+1`. Quantum line `k`
/// carries edges `0..=2N`, crossing bar lines `N, …, 1` in turn, each twice.
pub fn partition_enumeration_with_states(
    spectral: &SpectralConfig,
    bc: &BoundaryConfig,
    setup: &ModularSetup,
    states: &BoundaryStates,
) -> Result<C64> {
    let n = spectral.n();
    size_guard(n, ENUMERATION_MAX_N, "enumeration")?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let aux_edges = 2 * n + 2;
    let q_edges = 2 * n + 1;
    let total = n * aux_edges + n * q_edges;
    let aux_edge = |i: usize, e: usize| i * aux_edges + e;
    let q_edge = |k: usize, e: usize| n * aux_edges + k * q_edges + e;

    struct Vertex {
        w: Mat4,
        a_in: usize,
        a_out: usize,
        q_in: usize,
        q_out: usize,
    }
    let mut vertices = Vec::new();
    let mut reflections = Vec::new();
    for i in 0..n {
        let u = spectral.u[i];
        let layer = n - 1 - i;
        for k in 0..n {
            let kk = k + 1;
            vertices.push(Vertex {
                w: vertex_r_mat(u + spectral.xi[k], setup)?,
                a_in: aux_edge(i, n - kk),
                a_out: aux_edge(i, n - kk + 1),
                q_in: q_edge(k, 2 * layer),
                q_out: q_edge(k, 2 * layer + 1),
            });
            vertices.push(Vertex {
                w: vertex_r_mat(u - spectral.xi[k], setup)?,
                a_in: aux_edge(i, n + kk),
                a_out: aux_edge(i, n + kk + 1),
                q_in: q_edge(k, 2 * layer + 1),
                q_out: q_edge(k, 2 * layer + 2),
            });
        }
        reflections.push((vertex_k_mat(u, bc, setup)?, aux_edge(i, n), aux_edge(i, n + 1)));
    }

    let mut z = ZERO;
    for cfg in 0u64..(1u64 << total) {
        let s = |e: usize| ((cfg >> e) & 1) as usize;
        let mut w = C64::new(1.0, 0.0);
        for i in 0..n {
            w *= states.omega1_bar_ket[i][s(aux_edge(i, 0))] * states.omega2_bar_bra[i][s(aux_edge(i, aux_edges - 1))];
        }
        for k in 0..n {
            w *= states.omega2_ket[k][s(q_edge(k, 0))] * states.omega1_bra[k][s(q_edge(k, q_edges - 1))];
        }
        if w == ZERO {
            continue;
        }
        for (kmat, ein, eout) in &reflections {
            w *= kmat[2 * s(*eout) + s(*ein)];
        }
        for v in &vertices {
            let x = v.w[4 * (2 * s(v.a_out) + s(v.q_out)) + 2 * s(v.a_in) + s(v.q_in)];
            if x == ZERO {
                w = ZERO;
                break;
            }
            w *= x;
        }
        z += w;
    }
    Ok(z)
}

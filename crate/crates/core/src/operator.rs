//! Dense operators on labeled registers of 2-dimensional sites, and the
//! local state-vector updates everything else is built from.
//!
//! Bit convention: the site at position 0 of a register is the most
//! significant bit; bit value 0 is basis label 1, bit value 1 is label 2.

use crate::elliptic::C64;
use crate::error::{Error, Result};

/// Row-major 4×4 block on two sites, index `2·label_a + label_b`.
pub type Mat4 = [C64; 16];
/// Row-major 2×2 block on one site.
pub type Mat2 = [C64; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn mat2_identity() -> Mat2 {
    [ONE, ZERO, ZERO, ONE]
}

pub fn mat4_identity() -> Mat4 {
    let mut m = [ZERO; 16];
    for k in 0..4 {
        m[5 * k] = ONE;
    }
    m
}

/// The flip `P(x⊗y) = y⊗x`.
pub fn mat4_permutation() -> Mat4 {
    let mut m = [ZERO; 16];
    m[0] = ONE;
    m[4 + 2] = ONE;
    m[8 + 1] = ONE;
    m[15] = ONE;
    m
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [ZERO; 16];
    for r in 0..4 {
        for k in 0..4 {
            let x = a[4 * r + k];
            if x == ZERO {
                continue;
            }
            for col in 0..4 {
                c[4 * r + col] += x * b[4 * k + col];
            }
        }
    }
    c
}

/// `P·m·P`, the same block with the two sites exchanged.
pub fn mat4_swap_sites(m: &Mat4) -> Mat4 {
    let sw = [0usize, 2, 1, 3];
    let mut out = [ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[4 * sw[r] + sw[c]] = m[4 * r + c];
        }
    }
    out
}

#[inline]
fn bit_of(pos: usize, n: usize) -> usize {
    1 << (n - 1 - pos)
}

/// Label bit (0 or 1) of the site at position `pos` in basis index `idx`.
#[inline]
pub fn label_bit(idx: usize, pos: usize, n: usize) -> usize {
    (idx >> (n - 1 - pos)) & 1
}

/// Applies a block to positions `pa`, `pb` of an `n`-site state. The block
/// may depend on the basis index of the spectators (bits `pa`, `pb` cleared).
pub fn apply_two_site_with<F>(state: &mut [C64], n: usize, pa: usize, pb: usize, mut block: F) -> Result<()>
where
    F: FnMut(usize) -> Result<Mat4>,
{
    debug_assert_eq!(state.len(), 1 << n);
    debug_assert!(pa != pb && pa < n && pb < n);
    let ba = bit_of(pa, n);
    let bb = bit_of(pb, n);
    let idx = [0, bb, ba, ba | bb];
    for base in 0..state.len() {
        if base & (ba | bb) != 0 {
            continue;
        }
        let v = [
            state[base],
            state[base | idx[1]],
            state[base | idx[2]],
            state[base | idx[3]],
        ];
        if v.iter().all(|x| *x == ZERO) {
            continue;
        }
        let m = block(base)?;
        for r in 0..4 {
            let row = &m[4 * r..4 * r + 4];
            state[base | idx[r]] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
    }
    Ok(())
}

pub fn apply_two_site(state: &mut [C64], n: usize, pa: usize, pb: usize, m: &Mat4) {
    apply_two_site_with(state, n, pa, pb, |_| Ok(*m)).expect("constant block cannot fail");
}

pub fn apply_one_site(state: &mut [C64], n: usize, p: usize, m: &Mat2) {
    let b = bit_of(p, n);
    for base in 0..state.len() {
        if base & b != 0 {
            continue;
        }
        let (x, y) = (state[base], state[base | b]);
        state[base] = m[0] * x + m[1] * y;
        state[base | b] = m[2] * x + m[3] * y;
    }
}

/// Tensor product of per-site 2-vectors, site 0 most significant.
pub fn tensor_vectors(factors: &[[C64; 2]]) -> Vec<C64> {
    let mut out = vec![ONE];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * 2);
        for x in &out {
            next.push(*x * f[0]);
            next.push(*x * f[1]);
        }
        out = next;
    }
    out
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Complex square matrix acting on an ordered register of site labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    sites: Vec<u32>,
    data: Vec<C64>,
}

impl DenseOperator {
    pub fn new(sites: Vec<u32>, data: Vec<C64>) -> Result<Self> {
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::Validation(format!("duplicate site labels in {sites:?}")));
        }
        let dim = 1usize << sites.len();
        if data.len() != dim * dim {
            return Err(Error::Validation(format!(
                "{} entries for {} sites (need {})",
                data.len(),
                sites.len(),
                dim * dim
            )));
        }
        Ok(Self { sites, data })
    }

    pub fn identity(sites: Vec<u32>) -> Result<Self> {
        let dim = 1usize << sites.len();
        let mut data = vec![ZERO; dim * dim];
        for k in 0..dim {
            data[k * dim + k] = ONE;
        }
        Self::new(sites, data)
    }

    pub fn from_mat4(a: u32, b: u32, m: &Mat4) -> Result<Self> {
        Self::new(vec![a, b], m.to_vec())
    }

    pub fn from_mat2(a: u32, m: &Mat2) -> Result<Self> {
        Self::new(vec![a], m.to_vec())
    }

    /// Materializes a linear map given as an in-place state update.
    pub fn from_action<F>(sites: Vec<u32>, mut act: F) -> Result<Self>
    where
        F: FnMut(&mut Vec<C64>) -> Result<()>,
    {
        let dim = 1usize << sites.len();
        let mut data = vec![ZERO; dim * dim];
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            col.iter_mut().for_each(|x| *x = ZERO);
            col[j] = ONE;
            act(&mut col)?;
            if col.len() != dim {
                return Err(Error::Validation("action changed the register size".into()));
            }
            for (i, x) in col.iter().enumerate() {
                data[i * dim + j] = *x;
            }
        }
        Self::new(sites, data)
    }

    pub fn sites(&self) -> &[u32] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: C64) {
        let d = self.dim();
        self.data[row * d + col] = v;
    }

    fn same_register(&self, other: &Self) -> Result<()> {
        if self.sites != other.sites {
            return Err(Error::Validation(format!(
                "register mismatch {:?} vs {:?}",
                self.sites, other.sites
            )));
        }
        Ok(())
    }

    /// `self · other` (other acts first).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_register(other)?;
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self::new(self.sites.clone(), out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_register(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::new(self.sites.clone(), data)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            sites: self.sites.clone(),
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        (0..d).map(|i| dot(&self.data[i * d..(i + 1) * d], v)).collect()
    }

    /// Row vector times operator.
    pub fn apply_left(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![ZERO; d];
        for i in 0..d {
            if v[i] == ZERO {
                continue;
            }
            for j in 0..d {
                out[j] += v[i] * self.data[i * d + j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_register(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max|self − other| / max|other|`.
    pub fn rel_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.max_abs_diff(other)? / other.max_abs().max(1e-300))
    }

    /// Same matrix, new site labels.
    pub fn relabel(&self, sites: Vec<u32>) -> Result<Self> {
        if sites.len() != self.sites.len() {
            return Err(Error::Validation("relabel must keep the site count".into()));
        }
        Self::new(sites, self.data.clone())
    }

    /// Tensors with identities so the operator acts on the larger register.
    pub fn embed(&self, register: &[u32]) -> Result<Self> {
        let n = register.len();
        let pos: Vec<usize> = self
            .sites
            .iter()
            .map(|s| {
                register
                    .iter()
                    .position(|r| r == s)
                    .ok_or_else(|| Error::Validation(format!("site {s} not in {register:?}")))
            })
            .collect::<Result<_>>()?;
        let k = self.sites.len();
        let dim = 1usize << n;
        let local = |idx: usize| -> usize {
            pos.iter()
                .enumerate()
                .fold(0, |acc, (q, &p)| acc | (label_bit(idx, p, n) << (k - 1 - q)))
        };
        let mask: usize = pos.iter().map(|&p| bit_of(p, n)).sum();
        let mut data = vec![ZERO; dim * dim];
        for col in 0..dim {
            let lc = local(col);
            let rest = col & !mask;
            for lr in 0..(1usize << k) {
                let v = self.get(lr, lc);
                if v == ZERO {
                    continue;
                }
                let mut row = rest;
                for (q, &p) in pos.iter().enumerate() {
                    if (lr >> (k - 1 - q)) & 1 == 1 {
                        row |= bit_of(p, n);
                    }
                }
                data[row * dim + col] = v;
            }
        }
        Self::new(register.to_vec(), data)
    }

    pub fn is_lower_triangular(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| ((i + 1)..d).all(|j| self.data[i * d + j] == ZERO))
    }

    /// Inverse of a lower-triangular operator by forward substitution.
    pub fn lower_triangular_inverse(&self) -> Result<Self> {
        let d = self.dim();
        let mut inv = vec![ZERO; d * d];
        for i in 0..d {
            let piv = self.get(i, i);
            if piv.norm() == 0.0 {
                return Err(Error::Singularity(format!("zero diagonal entry at {i}")));
            }
            for j in 0..=i {
                let mut s = if i == j { ONE } else { ZERO };
                for k in j..i {
                    s -= self.get(i, k) * inv[k * d + j];
                }
                inv[i * d + j] = s / piv;
            }
        }
        Self::new(self.sites.clone(), inv)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.data[i * d + j].norm() <= tol))
    }
}

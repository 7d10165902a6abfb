//! Drinfeld twist (F-matrix) of the SOS model at small `N`, and the
//! polarization-free forms of the twisted operators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryConfig;
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::operator::{label_bit, DenseOperator, ONE, ZERO};
use crate::oracle::vertex::size_guard;
use crate::oracle::{face_creation_operator, face_one_row_monodromy};
use crate::rmatrices::{apply_sos_dynamic, total_imbalance, WeightVector};
use crate::spectral::SpectralConfig;

pub const F_MATRIX_MAX_N: usize = 5;
pub const CREATION_CHECK_MAX_N: usize = 4;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// A permutation together with a reduced word `s_{β₁}…s_{β_p}`.
///
/// `perm[j]` is `s(j+1) − 1`; applying the adjacent swaps `β` (1-based
/// positions) in order to the identity sequence yields `perm`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationWord {
    pub perm: Vec<usize>,
    pub reduced_word: Vec<usize>,
}

fn inversions(p: &[usize]) -> usize {
    (0..p.len())
        .map(|i| ((i + 1)..p.len()).filter(|&j| p[i] > p[j]).count())
        .sum()
}

impl PermutationWord {
    pub fn from_perm(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &x in perm {
            if x >= n || seen[x] {
                return Err(Error::Validation(format!("{perm:?} is not a permutation")));
            }
            seen[x] = true;
        }
        let mut cur: Vec<usize> = (0..n).collect();
        let mut word = Vec::new();
        for pos in 0..n {
            let mut j = cur.iter().position(|&x| x == perm[pos]).expect("present");
            while j > pos {
                cur.swap(j - 1, j);
                word.push(j);
                j -= 1;
            }
        }
        Ok(Self {
            perm: perm.to_vec(),
            reduced_word: word,
        })
    }

    /// Rejects words that are not of minimal length.
    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut cur: Vec<usize> = (0..n).collect();
        for &b in word {
            if b == 0 || b >= n {
                return Err(Error::Validation(format!(
                    "transposition s_{b} out of range for N = {n}"
                )));
            }
            cur.swap(b - 1, b);
        }
        if inversions(&cur) != word.len() {
            return Err(Error::Validation(format!(
                "word {word:?} has length {} but the permutation has {} inversions",
                word.len(),
                inversions(&cur)
            )));
        }
        Ok(Self {
            perm: cur,
            reduced_word: word.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }
}

/// Applies `R^s_{seq}(l)` to a state on `N` sites; `seq` lists the spaces.
fn apply_r_s(
    state: &mut [C64],
    word: &[usize],
    seq: &[usize],
    l: WeightVector,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<()> {
    let n = seq.len();
    let mut cur = seq.to_vec();
    for &b in word {
        let i = b - 1;
        let (a, c) = (cur[i], cur[i + 1]);
        let u = spectral.xi[a] - spectral.xi[c];
        apply_sos_dynamic(state, n, a, c, &cur[..i], u, l, setup)?;
        cur.swap(i, i + 1);
    }
    Ok(())
}

/// `R^s_{seq}(l)` built by the composition rule: each elementary factor is
/// `R_{a,c}(ξ_a − ξ_c; l − ηΣ h)` over the spaces preceding the swap.
pub fn r_s_operator_on(
    word: &[usize],
    seq: &[usize],
    l: WeightVector,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let n = spectral.n();
    size_guard(n, F_MATRIX_MAX_N, "F-basis operators")?;
    DenseOperator::from_action((1..=n as u32).collect(), |v| {
        apply_r_s(v, word, seq, l, spectral, setup)
    })
}

pub fn r_s_operator(
    s: &PermutationWord,
    l: WeightVector,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let seq: Vec<usize> = (0..s.n()).collect();
    r_s_operator_on(&s.reduced_word, &seq, l, spectral, setup)
}

/// Basis states admitted by the starred sum for permutation `s`.
fn admitted(st: usize, s: &[usize], seq: &[usize]) -> bool {
    let n = s.len();
    let al = |space: usize| label_bit(st, space, n);
    (0..n.saturating_sub(1)).all(|i| {
        let x = al(seq[s[i]]);
        let y = al(seq[s[i + 1]]);
        if s[i + 1] > s[i] {
            y >= x
        } else {
            y > x
        }
    })
}

/// `F_{seq}(l) = Σ_s Σ* Π_j P^{s(j)}_{α_{s(j)}} R^s_{seq}(l)`.
pub fn f_matrix_on(
    seq: &[usize],
    l: WeightVector,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let n = spectral.n();
    size_guard(n, F_MATRIX_MAX_N, "F-matrix")?;
    if seq.len() != n {
        return Err(Error::Validation("space sequence length differs from N".into()));
    }
    let dim = 1usize << n;
    let perms = permutations(n);
    let terms: Vec<Vec<C64>> = perms
        .par_iter()
        .map(|s| -> Result<Vec<C64>> {
            let w = PermutationWord::from_perm(s)?;
            let rs = r_s_operator_on(&w.reduced_word, seq, l, spectral, setup)?;
            let mut out = vec![ZERO; dim * dim];
            for st in (0..dim).filter(|&st| admitted(st, s, seq)) {
                out[st * dim..(st + 1) * dim].copy_from_slice(&rs.data()[st * dim..(st + 1) * dim]);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut f = vec![ZERO; dim * dim];
    for t in &terms {
        for (a, b) in f.iter_mut().zip(t) {
            *a += b;
        }
    }
    DenseOperator::new((1..=n as u32).collect(), f)
}

pub fn f_matrix(l: WeightVector, spectral: &SpectralConfig, setup: &ModularSetup) -> Result<DenseOperator> {
    let seq: Vec<usize> = (0..spectral.n()).collect();
    f_matrix_on(&seq, l, spectral, setup)
}

/// Worst `|F_{s(1…N)}(l) R^s(l) − F(l)|` over all `s`, relative to `max|F|`.
pub fn factorizing_residual(l: WeightVector, spectral: &SpectralConfig, setup: &ModularSetup) -> Result<f64> {
    let n = spectral.n();
    let id: Vec<usize> = (0..n).collect();
    let f = f_matrix_on(&id, l, spectral, setup)?;
    let mut worst: f64 = 0.0;
    for s in permutations(n) {
        let w = PermutationWord::from_perm(&s)?;
        let rs = r_s_operator_on(&w.reduced_word, &id, l, spectral, setup)?;
        let fs = f_matrix_on(&s, l, spectral, setup)?;
        worst = worst.max(fs.mul(&rs)?.rel_diff(&f)?);
    }
    Ok(worst)
}

/// `max(‖F|2…2⟩ − |2…2⟩‖∞, ‖⟨1…1|F − ⟨1…1|‖∞)`.
pub fn extremal_invariance_residual(l: WeightVector, spectral: &SpectralConfig, setup: &ModularSetup) -> Result<f64> {
    let f = f_matrix(l, spectral, setup)?;
    let d = f.dim();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let e_last = if k == d - 1 { ONE } else { ZERO };
        let e_first = if k == 0 { ONE } else { ZERO };
        worst = worst.max((f.get(k, d - 1) - e_last).norm());
        worst = worst.max((f.get(0, k) - e_first).norm());
    }
    Ok(worst)
}

/// Single-site operators tensored in site order.
fn kron_sites(factors: &[[C64; 4]]) -> DenseOperator {
    let n = factors.len();
    let dim = 1usize << n;
    let mut data = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut x = ONE;
            for (p, f) in factors.iter().enumerate() {
                x *= f[2 * label_bit(r, p, n) + label_bit(c, p, n)];
                if x == ZERO {
                    break;
                }
            }
            data[r * dim + c] = x;
        }
    }
    DenseOperator::new((1..=n as u32).collect(), data).expect("consistent size")
}

const E12: [C64; 4] = [ZERO, ONE, ZERO, ZERO];

fn diag(a: C64, b: C64) -> [C64; 4] {
    [a, ZERO, ZERO, b]
}

/// `Σ_i c_i E₁₂⁽ⁱ⁾ ⊗_{j≠i} diag(d_ij, 1)`.
fn raising_sum<C, D>(n: usize, mut c: C, mut d: D) -> Result<DenseOperator>
where
    C: FnMut(usize) -> Result<C64>,
    D: FnMut(usize, usize) -> Result<C64>,
{
    let mut acc: Option<DenseOperator> = None;
    for i in 0..n {
        let mut f = Vec::with_capacity(n);
        for j in 0..n {
            f.push(if j == i { E12 } else { diag(d(i, j)?, ONE) });
        }
        let term = kron_sites(&f).scale(c(i)?);
        acc = Some(match acc {
            None => term,
            Some(a) => DenseOperator::new(
                a.sites().to_vec(),
                a.data().iter().zip(term.data()).map(|(x, y)| x + y).collect(),
            )?,
        });
    }
    Ok(acc.unwrap_or_else(|| DenseOperator::identity(vec![]).expect("empty register")))
}

/// Polarization-free `T̃_F(l|u)²₂`: `⊗ diag(σ(u−ξ_i)/σ(u−ξ_i+η), 1)` times
/// `σ(l₂₁−η)/σ(l₂₁−η+n₁η)` with `n₁` the number of label-1 sites.
pub fn twisted_t22_polarization_free(
    l: WeightVector,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let n = spectral.n();
    let eta = setup.eta;
    let f: Vec<[C64; 4]> = spectral
        .xi
        .iter()
        .map(|x| {
            Ok(diag(
                setup.sigma(u - x)? / setup.sigma_nz(u - x + eta, "sigma(u-xi+eta)")?,
                ONE,
            ))
        })
        .collect::<Result<_>>()?;
    let mut op = kron_sites(&f);
    let num = setup.sigma(l.m21() - eta)?;
    for st in 0..op.dim() {
        let n1 = n - st.count_ones() as usize;
        let g = num / setup.sigma_nz(l.m21() - eta + eta * n1 as f64, "sigma(l21-eta+n1 eta)")?;
        let v = op.get(st, st) * g;
        op.set(st, st, v);
    }
    Ok(op)
}

/// Polarization-free `T̃_F(l|u)²₁`.
pub fn twisted_t21_polarization_free(
    l: WeightVector,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let eta = setup.eta;
    let xi = &spectral.xi;
    let s = |z: C64| setup.sigma(z);
    let sl12 = setup.sigma_nz(l.m12(), "sigma(l12)")?;
    raising_sum(
        spectral.n(),
        |i| Ok(s(eta)? * s(u - xi[i] + l.m12())? / (s(u - xi[i] + eta)? * sl12)),
        |i, j| {
            Ok(s(u - xi[j])? * s(xi[i] - xi[j] + eta)?
                / (s(u - xi[j] + eta)? * setup.sigma_nz(xi[i] - xi[j], "sigma(xi_i-xi_j)")?))
        },
    )
}

/// Residuals of `F(l)T²₂F⁻¹(l−ηê₂)` and `F(l)T²₁F⁻¹(l−ηê₁)` against
/// their polarization-free forms, relative to `max(1, max|form|)`.
pub fn twisted_one_row_residuals(
    l: WeightVector,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<(f64, f64)> {
    let eta = setup.eta;
    let t = face_one_row_monodromy(l, u, spectral, setup)?;
    let f = f_matrix(l, spectral, setup)?;
    let f2 = f_matrix(l.shift(2, -eta), spectral, setup)?.lower_triangular_inverse()?;
    let f1 = f_matrix(l.shift(1, -eta), spectral, setup)?.lower_triangular_inverse()?;
    let t22 = f.mul(&t[1][1])?.mul(&f2)?;
    let t21 = f.mul(&t[1][0])?.mul(&f1)?;
    let p22 = twisted_t22_polarization_free(l, u, spectral, setup)?;
    let p21 = twisted_t21_polarization_free(l, u, spectral, setup)?;
    let rel = |a: &DenseOperator, b: &DenseOperator| -> Result<f64> { Ok(a.max_abs_diff(b)? / b.max_abs().max(1.0)) };
    Ok((rel(&t22, &p22)?, rel(&t21, &p21)?))
}

/// Weight-dependent scalar in front of the polarization-free creation sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CreationScalar {
    /// `σ(m₁₂)/σ(m₁ − λ₂)`, the form as printed.
    Printed,
    /// `σ(m₂₁)/σ(λ₂₁ + n₁η)`, the form the conjugated operator reproduces.
    Derived,
}

/// Polarization-free creation operator; column `st` carries the scalar
/// evaluated at the weight `m = λ − ηΣî` of the input state `st`.
pub fn creation_polarization_free(
    bc: &BoundaryConfig,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
    scalar: CreationScalar,
) -> Result<DenseOperator> {
    let n = spectral.n();
    let eta = setup.eta;
    let xi = &spectral.xi;
    let s = |z: C64| setup.sigma(z);
    let (a, b) = (bc.lambda1 + bc.zeta, bc.lambda2 + bc.zeta);
    let front = setup.sigma_nz(a + u, "sigma(lambda1+zeta+u)")? * setup.sigma_nz(b + u, "sigma(lambda2+zeta+u)")?;
    let mut op = raising_sum(
        n,
        |i| {
            Ok(s(a - xi[i])? * s(b + xi[i])? * s(2.0 * u)? * s(eta)?
                / (front * s(u - xi[i] + eta)? * setup.sigma_nz(u + xi[i], "sigma(u+xi)")?))
        },
        |i, j| {
            Ok(s(u - xi[j])? * s(u + xi[j] + eta)? * s(xi[i] - xi[j] + eta)?
                / (s(u - xi[j] + eta)? * s(u + xi[j])? * setup.sigma_nz(xi[i] - xi[j], "sigma(xi_i-xi_j)")?))
        },
    )?;
    let mut pre = ONE;
    for x in xi {
        pre *= s(u + x)? / setup.sigma_nz(u + x + eta, "sigma(u+xi+eta)")?;
    }
    let lam = bc.lambda();
    let dim = op.dim();
    for col in 0..dim {
        let d = total_imbalance(col, n);
        let m = lam.minus_imbalance(d, eta);
        let n1 = (n as i64 + d) / 2;
        let g = match scalar {
            CreationScalar::Printed => s(m.m12())? / setup.sigma_nz(m.m1 - bc.lambda2, "sigma(m1-lambda2)")?,
            CreationScalar::Derived => {
                s(m.m21())? / setup.sigma_nz(bc.lambda21() + eta * n1 as f64, "sigma(lambda21+n1 eta)")?
            }
        };
        for row in 0..dim {
            let v = op.get(row, col);
            if v != ZERO {
                op.set(row, col, v * g * pre);
            }
        }
    }
    Ok(op)
}

/// Residual between `F(λ)𝒯⁻_F(u)²₁F⁻¹(λ)` and the polarization-free sum,
/// restricted to the input sector of the `n_index`-th factor of the
/// partition function (`N − n_index` label-1 sites).
pub fn twisted_creation_residual(
    n_index: usize,
    bc: &BoundaryConfig,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
    scalar: CreationScalar,
) -> Result<f64> {
    let n = spectral.n();
    size_guard(n, CREATION_CHECK_MAX_N, "twisted creation check")?;
    if n_index == 0 || n_index > n {
        return Err(Error::Domain(format!("n_index must lie in 1..={n}, got {n_index}")));
    }
    let u = spectral.u[n_index - 1];
    let lam = bc.lambda();
    let f = f_matrix(lam, spectral, setup)?;
    let twisted = f
        .mul(&face_creation_operator(bc, u, spectral, setup)?)?
        .mul(&f.lower_triangular_inverse()?)?;
    let pf = creation_polarization_free(bc, u, spectral, setup, scalar)?;
    let n1 = n - n_index;
    let dim = pf.dim();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for col in (0..dim).filter(|&c| n - c.count_ones() as usize == n1) {
        for row in 0..dim {
            worst = worst.max((twisted.get(row, col) - pf.get(row, col)).norm());
            scale = scale.max(pf.get(row, col).norm());
        }
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DrawSpec;

    fn draw(n: usize, seed: u64) -> (ModularSetup, SpectralConfig) {
        let s = ModularSetup::default();
        let sp = SpectralConfig::random(n, seed, &DrawSpec::default(), &s, Some(&BoundaryConfig::default())).unwrap();
        (s, sp)
    }

    fn l0() -> WeightVector {
        WeightVector::new(C64::new(0.33, 0.01), C64::new(-0.12, 0.0))
    }

    #[test]
    fn permutation_enumeration() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(0).len(), 1);
    }

    #[test]
    fn words() {
        let w = PermutationWord::from_perm(&[2, 0, 1]).unwrap();
        assert_eq!(w.reduced_word.len(), 2);
        assert_eq!(
            PermutationWord::from_word(3, &w.reduced_word).unwrap().perm,
            vec![2, 0, 1]
        );
        assert!(PermutationWord::from_word(3, &[1, 1]).is_err());
        assert!(PermutationWord::from_perm(&[0, 0]).is_err());
    }

    #[test]
    fn f_matrix_properties_small() {
        let (s, sp) = draw(3, 5);
        let f = f_matrix(l0(), &sp, &s).unwrap();
        assert!(f.is_lower_triangular());
        assert!((0..8).all(|k| f.get(k, k).norm() > 1e-10));
        assert!(extremal_invariance_residual(l0(), &sp, &s).unwrap() < 1e-12);
        assert!(factorizing_residual(l0(), &sp, &s).unwrap() < 1e-11);
    }

    #[test]
    fn twisted_one_row_forms() {
        let (s, sp) = draw(2, 8);
        let (a, b) = twisted_one_row_residuals(l0(), C64::new(0.21, 0.04), &sp, &s).unwrap();
        assert!(a < 1e-11 && b < 1e-11, "{a} {b}");
    }

    #[test]
    fn derived_creation_form() {
        let (s, sp) = draw(2, 8);
        let bc = BoundaryConfig::default();
        for k in 1..=2 {
            let r = twisted_creation_residual(k, &bc, &sp, &s, CreationScalar::Derived).unwrap();
            assert!(r < 1e-11, "{r}");
        }
    }
}

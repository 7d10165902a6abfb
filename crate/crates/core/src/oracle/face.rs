//! Face-type route: one-row SOS monodromies and the double-row creation
//! operator built from them.

use crate::boundary::{face_k, BoundaryConfig};
use crate::elliptic::{ModularSetup, C64};
use crate::error::Result;
use crate::operator::{apply_two_site_with, DenseOperator, ZERO};
use crate::rmatrices::{imbalance, total_imbalance, SosCache, WeightVector};
use crate::spectral::SpectralConfig;

use super::vertex::{size_guard, DENSE_MAX_N};

pub const FACE_ROUTE_MAX_N: usize = 10;

/// `T_F(l|u) = R_{0N}(u−ξ_N; l−ηΣ_{k<N}h⁽ᵏ⁾)…R_{01}(u−ξ_1; l)` acting on
/// state vectors; the auxiliary space is site 0.
pub struct FaceRowMonodromy<'a> {
    n: usize,
    layers: Vec<SosCache<'a>>,
}

impl<'a> FaceRowMonodromy<'a> {
    pub fn new(l: WeightVector, u: C64, spectral: &SpectralConfig, setup: &'a ModularSetup) -> Self {
        Self {
            n: spectral.n(),
            layers: spectral.xi.iter().map(|x| SosCache::new(u - x, l, setup)).collect(),
        }
    }

    /// `T_F(l|u)^i_j v` with `i`, `j` in `{1, 2}`.
    pub fn apply(&mut self, i: usize, j: usize, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        let dim = 1usize << n;
        let mut w = vec![ZERO; 2 * dim];
        w[(j - 1) * dim..j * dim].copy_from_slice(v);
        let mut spectators = Vec::with_capacity(n);
        for (k, cache) in self.layers.iter_mut().enumerate() {
            let pos = k + 1;
            apply_two_site_with(&mut w, n + 1, 0, pos, |base| {
                cache.block(imbalance(base, &spectators, n + 1))
            })?;
            spectators.push(pos);
        }
        Ok(w[(i - 1) * dim..i * dim].to_vec())
    }
}

/// The four entries `T_F(l|u)^i_j` as dense operators on sites `1..=N`,
/// indexed `[i−1][j−1]`.
pub fn face_one_row_monodromy(
    l: WeightVector,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<[[DenseOperator; 2]; 2]> {
    let n = spectral.n();
    size_guard(n, DENSE_MAX_N, "dense face monodromy")?;
    let mut t = FaceRowMonodromy::new(l, u, spectral, setup);
    let sites: Vec<u32> = (1..=n as u32).collect();
    let mut entry = |i: usize, j: usize| {
        DenseOperator::from_action(sites.clone(), |v| {
            *v = t.apply(i, j, v)?;
            Ok(())
        })
    };
    Ok([[entry(1, 1)?, entry(1, 2)?], [entry(2, 1)?, entry(2, 2)?]])
}

/// Face-type double-row creation operator `𝒯⁻_F(m, λ|u)²₁`.
///
/// The dynamical label is the weight `m = λ − ηΣ_k î_k` of the basis state
/// the operator acts on, so one instance covers every weight sector.
pub struct FaceCreation<'a> {
    bc: BoundaryConfig,
    setup: &'a ModularSetup,
    n: usize,
    pre: C64,
    k: [C64; 2],
    t_u: FaceRowMonodromy<'a>,
    t_2: FaceRowMonodromy<'a>,
    t_1: FaceRowMonodromy<'a>,
}

impl<'a> FaceCreation<'a> {
    pub fn new(bc: &BoundaryConfig, u: C64, spectral: &SpectralConfig, setup: &'a ModularSetup) -> Result<Self> {
        let eta = setup.eta;
        let lam = bc.lambda();
        let mut pre = C64::new(1.0, 0.0) / setup.sigma_nz(bc.lambda21(), "sigma(lambda21)")?;
        for x in &spectral.xi {
            pre *= setup.sigma(u + x)? / setup.sigma_nz(u + x + eta, "sigma(u+xi+eta)")?;
        }
        let v = -u - eta;
        Ok(Self {
            bc: *bc,
            setup,
            n: spectral.n(),
            pre,
            k: face_k(bc, u, setup)?,
            t_u: FaceRowMonodromy::new(lam, u, spectral, setup),
            t_2: FaceRowMonodromy::new(lam.shift(2, eta), v, spectral, setup),
            t_1: FaceRowMonodromy::new(lam.shift(1, eta), v, spectral, setup),
        })
    }

    pub fn apply(&mut self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        let eta = self.setup.eta;
        let l21 = self.bc.lambda21();
        let mut w = v.to_vec();
        for (s, x) in w.iter_mut().enumerate() {
            if *x != ZERO {
                *x *= self.setup.sigma(l21 + eta * total_imbalance(s, n) as f64)?;
            }
        }
        let a = self.t_2.apply(2, 2, &w)?;
        let a = self.t_u.apply(2, 1, &a)?;
        let b = self.t_1.apply(2, 1, &w)?;
        let b = self.t_u.apply(2, 2, &b)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| self.pre * (self.k[0] * x - self.k[1] * y))
            .collect())
    }
}

/// Dense matrix of the creation operator on sites `1..=N`.
pub fn face_creation_operator(
    bc: &BoundaryConfig,
    u: C64,
    spectral: &SpectralConfig,
    setup: &ModularSetup,
) -> Result<DenseOperator> {
    let n = spectral.n();
    size_guard(n, DENSE_MAX_N, "dense creation operator")?;
    let mut op = FaceCreation::new(bc, u, spectral, setup)?;
    DenseOperator::from_action((1..=n as u32).collect(), |v| {
        *v = op.apply(v)?;
        Ok(())
    })
}

/// `⟨1,…,1| 𝒯⁻_F(u_1)²₁ … 𝒯⁻_F(u_N)²₁ |2,…,2⟩`.
pub fn partition_face_route(spectral: &SpectralConfig, bc: &BoundaryConfig, setup: &ModularSetup) -> Result<C64> {
    let n = spectral.n();
    size_guard(n, FACE_ROUTE_MAX_N, "face route")?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let dim = 1usize << n;
    let mut v = vec![ZERO; dim];
    v[dim - 1] = C64::new(1.0, 0.0);
    for &u in spectral.u.iter().rev() {
        v = FaceCreation::new(bc, u, spectral, setup)?.apply(&v)?;
    }
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::partition_bruteforce;
    use crate::spectral::DrawSpec;

    #[test]
    fn face_route_matches_contraction() {
        let s = ModularSetup::default();
        let bc = BoundaryConfig::default();
        for n in 1..=3 {
            let sp = SpectralConfig::random(n, 40 + n as u64, &DrawSpec::default(), &s, Some(&bc)).unwrap();
            let a = partition_bruteforce(&sp, &bc, &s).unwrap();
            let b = partition_face_route(&sp, &bc, &s).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-11, "N={n}: {a} vs {b}");
        }
    }

    #[test]
    fn monodromy_conserves_weight() {
        let s = ModularSetup::default();
        let sp = SpectralConfig::random(3, 2, &DrawSpec::default(), &s, None).unwrap();
        let l = BoundaryConfig::default().lambda();
        let t = face_one_row_monodromy(l, C64::new(0.2, 0.05), &sp, &s).unwrap();
        let t12 = &t[0][1];
        for r in 0..8usize {
            for c in 0..8usize {
                if r.count_ones() != c.count_ones() + 1 {
                    assert_eq!(t12.get(r, c), ZERO);
                }
            }
        }
    }
}

//! The named identity suite behind `identities` mode.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{with_threads, RunConfig};
use crate::boundary::{duality_residual, face_vertex_residual, k_factorization_residual, re_residual};
use crate::closedform::{
    bf_pair, full_z, normalized_z_determinant, normalized_z_permsum, periodicity_residual, pole_scan,
    recursion_residual, residues, ClosedRoute, PrefactorKind,
};
use crate::elliptic::{oddness_residual, period_one_residual, period_tau_residual, riemann_residual, C64};
use crate::error::Result;
use crate::fbasis::{
    extremal_invariance_residual, f_matrix, factorizing_residual, twisted_creation_residual, CreationScalar,
};
use crate::oracle::{partition_bruteforce, partition_enumeration, partition_face_route};
use crate::report::residual;
use crate::rmatrices::{crossing_residual_with_parity, dybe_residual, qybe_residual, unitarity_residual, WeightVector};
use crate::scaled::ScaledComplex;
use crate::spectral::SpectralConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_residual: f64,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("identity report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,max_residual,tol,samples,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:e},{:e},{},{}\n",
                c.name, c.max_residual, c.tol, c.samples, c.pass
            ));
        }
        out
    }
}

struct Suite<'a> {
    cfg: &'a RunConfig,
    checks: Vec<IdentityCheck>,
}

impl Suite<'_> {
    /// Records the worst of `samples` residuals; any error fails the check.
    fn check<I>(&mut self, name: &str, default_tol: f64, samples: I)
    where
        I: IntoIterator<Item = Result<f64>>,
    {
        let tol = self.cfg.tolerance(name, default_tol);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut error = None;
        for r in samples {
            count += 1;
            match r {
                Ok(x) if x.is_nan() => worst = f64::INFINITY,
                Ok(x) => worst = worst.max(x),
                Err(e) => {
                    error = Some(format!("{}: {e}", e.kind()));
                    break;
                }
            }
        }
        self.checks.push(IdentityCheck {
            name: name.into(),
            max_residual: worst,
            tol,
            samples: count,
            pass: error.is_none() && worst <= tol,
            error,
        });
    }
}

fn draw_c(rng: &mut ChaCha8Rng, re: f64, im: f64) -> C64 {
    C64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im))
}

fn draw_m(rng: &mut ChaCha8Rng) -> WeightVector {
    WeightVector::new(draw_c(rng, 0.5, 0.2), draw_c(rng, 0.5, 0.2))
}

fn rel(a: C64, b: C64) -> f64 {
    residual(&ScaledComplex::from_c64(a), &ScaledComplex::from_c64(b))
}

/// Runs the suite on the configured parameters; `cfg.draws` seeded samples
/// per local identity, one seeded draw per size for the global checks.
pub fn run_identities(cfg: &RunConfig) -> Result<IdentityReport> {
    cfg.validate()?;
    with_threads(cfg.resolved_threads()?, || run_suite(cfg))
}

fn run_suite(cfg: &RunConfig) -> IdentityReport {
    let s = &cfg.setup;
    let bc = &cfg.boundary;
    let mut suite = Suite {
        cfg,
        checks: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.draws.max(1);
    let mut args = |k: usize| -> Vec<Vec<C64>> {
        (0..d)
            .map(|_| (0..k).map(|_| draw_c(&mut rng, 0.5, 0.3)).collect())
            .collect()
    };

    let a4 = args(4);
    suite.check(
        "riemann",
        1e-12,
        a4.iter().map(|a| riemann_residual(a[0], a[1], a[2], a[3], s)),
    );
    suite.check("sigma_oddness", 1e-12, a4.iter().map(|a| oddness_residual(a[0], s)));
    suite.check(
        "sigma_period_one",
        1e-12,
        a4.iter().map(|a| period_one_residual(a[1], s)),
    );
    suite.check(
        "sigma_period_tau",
        1e-12,
        a4.iter().map(|a| period_tau_residual(a[2], s)),
    );

    let a3 = args(3);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let ms: Vec<WeightVector> = (0..d).map(|_| draw_m(&mut rng)).collect();
    suite.check("qybe", 1e-9, a3.iter().map(|a| qybe_residual(a[0], a[1], a[2], s)));
    suite.check(
        "dybe",
        1e-9,
        a3.iter().zip(&ms).map(|(a, &m)| dybe_residual(a[0], a[1], a[2], m, s)),
    );
    suite.check(
        "unitarity",
        1e-9,
        a3.iter().zip(&ms).map(|(a, &m)| unitarity_residual(a[0], m, s)),
    );
    let crossing_points = std::iter::once(C64::new(0.0, 0.0)).chain(a3.iter().map(|a| a[1]));
    suite.check(
        "crossing",
        1e-9,
        crossing_points
            .zip(ms.iter().cycle())
            .map(|(u, &m)| crossing_residual_with_parity(u, m, s, cfg.crossing_eps2)),
    );
    suite.check("reflection", 1e-9, a3.iter().map(|a| re_residual(a[0], a[1], bc, s)));
    suite.check(
        "face_vertex",
        1e-9,
        a3.iter().zip(&ms).map(|(a, &m)| face_vertex_residual(a[0], a[1], m, s)),
    );
    suite.check(
        "intertwiner_duality",
        1e-9,
        a3.iter().zip(&ms).map(|(a, &m)| duality_residual(m, a[2], s)),
    );
    let k_points = std::iter::once(C64::new(0.0, 0.0)).chain(a3.iter().map(|a| a[2]));
    suite.check(
        "k_factorization",
        1e-9,
        k_points.map(|u| k_factorization_residual(u, bc, s)),
    );

    let draw = |n: usize| SpectralConfig::random(n, cfg.seed.wrapping_add(n as u64), &cfg.draw, s, Some(bc));
    suite.check(
        "enumeration_vs_bruteforce",
        1e-10,
        (1..=2).map(|n| {
            let sp = draw(n)?;
            Ok(rel(
                partition_enumeration(&sp, bc, s)?,
                partition_bruteforce(&sp, bc, s)?,
            ))
        }),
    );
    suite.check(
        "face_vs_bruteforce",
        1e-9,
        (1..=3).map(|n| {
            let sp = draw(n)?;
            Ok(rel(
                partition_face_route(&sp, bc, s)?,
                partition_bruteforce(&sp, bc, s)?,
            ))
        }),
    );

    let l = bc.lambda();
    suite.check(
        "f_lower_triangular",
        0.0,
        (1..=3).map(|n| {
            Ok(if f_matrix(l, &draw(n)?, s)?.is_lower_triangular() {
                0.0
            } else {
                1.0
            })
        }),
    );
    suite.check(
        "f_factorizing",
        1e-10,
        (1..=3).map(|n| factorizing_residual(l, &draw(n)?, s)),
    );
    suite.check(
        "f_extremal_invariance",
        1e-10,
        (1..=3).map(|n| extremal_invariance_residual(l, &draw(n)?, s)),
    );
    let creation = |scalar: CreationScalar| {
        (1..=3usize).flat_map(move |n| (1..=n).map(move |k| twisted_creation_residual(k, bc, &draw(n)?, s, scalar)))
    };
    suite.check("twisted_creation", 1e-9, creation(CreationScalar::Derived));

    suite.check(
        "permsum_vs_determinant",
        1e-9,
        (1..=5).map(|n| {
            let sp = draw(n)?;
            Ok(rel(
                normalized_z_permsum(&sp, bc, s)?,
                normalized_z_determinant(&sp, bc, s)?.value.to_c64(),
            ))
        }),
    );
    suite.check(
        "full_z_vs_bruteforce",
        1e-9,
        (1..=4).map(|n| {
            let sp = draw(n)?;
            let z = full_z(&sp, bc, s, ClosedRoute::Determinant, PrefactorKind::Derived)?;
            Ok(residual(
                &z,
                &ScaledComplex::from_c64(partition_bruteforce(&sp, bc, s)?),
            ))
        }),
    );
    suite.check("recursion", 1e-9, (1..=5).map(|n| recursion_residual(&draw(n)?, bc, s)));
    suite.check(
        "b_equals_f",
        1e-9,
        (1..=5).map(|i| {
            let (b, f) = bf_pair(i, &draw(5)?, bc, s)?;
            Ok(rel(b, f))
        }),
    );
    let residue_matches = (|| -> Result<Vec<f64>> {
        Ok(residues(3, &draw(3)?, bc, s, 1e-5)?
            .into_iter()
            .map(|r| r.rel_diff)
            .collect())
    })();
    suite.check("residues", 1e-6, flatten(residue_matches));
    let probes = (|| -> Result<Vec<f64>> {
        Ok(pole_scan(3, &draw(3)?, bc, s)?
            .into_iter()
            .map(|p| if p.is_regular { 0.0 } else { p.growth })
            .collect())
    })();
    suite.check("pole_scan_regular", 0.0, flatten(probes));
    suite.check(
        "periodicity",
        1e-9,
        (1..=3).map(|n| periodicity_residual(&draw(n)?, bc, s)),
    );

    if cfg.include_printed {
        suite.check(
            "full_z_vs_bruteforce_printed",
            1e-9,
            [2usize, 4].into_iter().map(|n| {
                let sp = draw(n)?;
                let z = full_z(&sp, bc, s, ClosedRoute::Determinant, PrefactorKind::Printed)?;
                Ok(residual(
                    &z,
                    &ScaledComplex::from_c64(partition_bruteforce(&sp, bc, s)?),
                ))
            }),
        );
        suite.check("twisted_creation_printed", 1e-9, creation(CreationScalar::Printed));
    }

    let pass = suite.checks.iter().all(|c| c.pass);
    IdentityReport {
        seed: cfg.seed,
        checks: suite.checks,
        pass,
    }
}

fn flatten(r: Result<Vec<f64>>) -> Vec<Result<f64>> {
    match r {
        Ok(v) => v.into_iter().map(Ok).collect(),
        Err(e) => vec![Err(e)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_config;

    #[test]
    fn defaults_pass() {
        let cfg = parse_config("mode = \"identities\"\ndraws = 5\n").unwrap();
        let r = run_identities(&cfg).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn wrong_crossing_parity_fails() {
        let cfg = parse_config("mode = \"identities\"\ndraws = 3\ncrossing_eps2 = 1.0\n").unwrap();
        let r = run_identities(&cfg).unwrap();
        assert!(!r.get("crossing").unwrap().pass);
        assert!(!r.pass);
    }
}

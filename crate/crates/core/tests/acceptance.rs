//! Acceptance criteria, one test each. Every test prints a single
//! `criterion k ... PASS|FAIL` line with its sub-results before asserting.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ellipdw::boundary::{face_vertex_residual, k_factorization_residual, re_residual, BoundaryConfig};
use ellipdw::cli::{bench_draw, loglog_slope, parse_config, run_compare, run_identities, RunConfig};
use ellipdw::closedform::{
    bf_pair, empirical_lambda_constant, full_z, normalized_z_determinant, normalized_z_permsum, periodicity_residual,
    recursion_residual, residues, ClosedRoute, PrefactorKind,
};
use ellipdw::elliptic::{oddness_residual, period_one_residual, period_tau_residual, riemann_residual};
use ellipdw::fbasis::{
    extremal_invariance_residual, f_matrix, factorizing_residual, twisted_creation_residual, CreationScalar,
};
use ellipdw::oracle::{partition_bruteforce, partition_bruteforce_spread, partition_enumeration, partition_face_route};
use ellipdw::rmatrices::{crossing_residual, dybe_residual, qybe_residual, unitarity_residual, WeightVector};
use ellipdw::scaled::ScaledComplex;
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result, C64};

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    start: Instant,
    parts: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u32, name: &'static str, budget_secs: u64) -> Self {
        Self {
            id,
            name,
            budget: Duration::from_secs(budget_secs),
            start: Instant::now(),
            parts: Vec::new(),
        }
    }

    /// Worst residual of `samples` against `tol`; an error counts as a failure.
    fn max(&mut self, label: &str, tol: f64, samples: impl IntoIterator<Item = Result<f64>>) {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for r in samples {
            count += 1;
            match r {
                Ok(x) if x.is_finite() => worst = worst.max(x),
                Ok(_) => worst = f64::INFINITY,
                Err(e) => {
                    self.parts.push((format!("{label} error {e}"), false));
                    return;
                }
            }
        }
        self.parts
            .push((format!("{label} {worst:.1e}/{tol:.0e} ({count})"), worst <= tol));
    }

    fn flag(&mut self, label: String, ok: bool) {
        self.parts.push((label, ok));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        self.parts.push((
            format!("runtime {:.2}s/{}s", elapsed.as_secs_f64(), self.budget.as_secs()),
            elapsed <= self.budget,
        ));
        let pass = self.parts.iter().all(|p| p.1);
        let detail: Vec<String> = self
            .parts
            .iter()
            .map(|(l, ok)| if *ok { l.clone() } else { format!("{l} [FAIL]") })
            .collect();
        println!(
            "criterion {} {}: {} | {}",
            self.id,
            self.name,
            if pass { "PASS" } else { "FAIL" },
            detail.join("; ")
        );
        assert!(pass, "criterion {} failed", self.id);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.gen_range(-0.5..=0.5), r.gen_range(-0.3..=0.3))
}

fn weight(r: &mut ChaCha8Rng) -> WeightVector {
    WeightVector::new(
        C64::new(r.gen_range(-0.5..=0.5), r.gen_range(-0.2..=0.2)),
        C64::new(r.gen_range(-0.5..=0.5), r.gen_range(-0.2..=0.2)),
    )
}

fn defaults() -> (ModularSetup, BoundaryConfig) {
    (ModularSetup::default(), BoundaryConfig::default())
}

fn draw(n: usize, seed: u64) -> Result<SpectralConfig> {
    let (s, bc) = defaults();
    SpectralConfig::random(n, seed, &DrawSpec::default(), &s, Some(&bc))
}

fn rel(a: C64, b: C64) -> f64 {
    ScaledComplex::rel_diff(&ScaledComplex::from_c64(a), &ScaledComplex::from_c64(b))
}

#[test]
fn criterion_1_elliptic_identities() {
    let mut c = Criterion::new(1, "elliptic identities", 5);
    for (k, tau) in [C64::new(0.0, 1.0), C64::new(0.3, 0.9)].into_iter().enumerate() {
        let s = ModularSetup::new(tau, C64::new(0.31, 0.0)).unwrap();
        let mut r = rng(100 + k as u64);
        let pts: Vec<[C64; 4]> = (0..100)
            .map(|_| [point(&mut r), point(&mut r), point(&mut r), point(&mut r)])
            .collect();
        c.max(
            &format!("riemann tau={tau}"),
            1e-12,
            pts.iter().map(|p| riemann_residual(p[0], p[1], p[2], p[3], &s)),
        );
        c.max(
            &format!("oddness tau={tau}"),
            1e-12,
            pts.iter().map(|p| oddness_residual(p[0], &s)),
        );
        c.max(
            &format!("period 1 tau={tau}"),
            1e-12,
            pts.iter().map(|p| period_one_residual(p[1], &s)),
        );
        c.max(
            &format!("period tau tau={tau}"),
            1e-12,
            pts.iter().map(|p| period_tau_residual(p[2], &s)),
        );
    }
    c.finish();
}

#[test]
fn criterion_2_relations() {
    let mut c = Criterion::new(2, "relations", 30);
    let (s, bc) = defaults();
    let mut r = rng(200);
    let draws: Vec<([C64; 3], WeightVector)> = (0..50)
        .map(|_| ([point(&mut r), point(&mut r), point(&mut r)], weight(&mut r)))
        .collect();
    c.max(
        "qybe",
        1e-9,
        draws.iter().map(|(p, _)| qybe_residual(p[0], p[1], p[2], &s)),
    );
    c.max(
        "reflection",
        1e-9,
        draws.iter().map(|(p, _)| re_residual(p[0], p[1], &bc, &s)),
    );
    c.max(
        "dybe",
        1e-9,
        draws.iter().map(|(p, m)| dybe_residual(p[0], p[1], p[2], *m, &s)),
    );
    c.max(
        "unitarity",
        1e-9,
        draws.iter().map(|(p, m)| unitarity_residual(p[0], *m, &s)),
    );
    c.max(
        "crossing",
        1e-9,
        draws.iter().map(|(p, m)| crossing_residual(p[1], *m, &s)),
    );
    c.max(
        "face-vertex",
        1e-9,
        draws.iter().map(|(p, m)| face_vertex_residual(p[0], p[1], *m, &s)),
    );
    c.max(
        "k-factorization",
        1e-9,
        draws.iter().map(|(p, _)| k_factorization_residual(p[2], &bc, &s)),
    );
    c.finish();
}

#[test]
fn criterion_3_oracle_chain() {
    let mut c = Criterion::new(3, "oracle chain", 60);
    let (s, bc) = defaults();
    c.max(
        "enumeration=bruteforce N=1,2",
        1e-10,
        (1..=2).map(|n| {
            let sp = draw(n, 300 + n as u64)?;
            Ok(rel(
                partition_enumeration(&sp, &bc, &s)?,
                partition_bruteforce(&sp, &bc, &s)?,
            ))
        }),
    );
    c.max(
        "bruteforce=face N=1..3",
        1e-9,
        (1..=3).map(|n| {
            let sp = draw(n, 310 + n as u64)?;
            Ok(rel(
                partition_bruteforce(&sp, &bc, &s)?,
                partition_face_route(&sp, &bc, &s)?,
            ))
        }),
    );
    c.finish();
}

fn full_vs_bruteforce(n: usize, seed: u64, kind: PrefactorKind) -> Result<f64> {
    let (s, bc) = defaults();
    let sp = draw(n, seed)?;
    let z = full_z(&sp, &bc, &s, ClosedRoute::Determinant, kind)?;
    Ok(ScaledComplex::rel_diff(
        &z,
        &ScaledComplex::from_c64(partition_bruteforce(&sp, &bc, &s)?),
    ))
}

/// Worst self-consistency spread of the contraction oracle over `seeds`.
fn oracle_spread(n: usize, seeds: impl IntoIterator<Item = u64>) -> f64 {
    let (s, bc) = defaults();
    seeds
        .into_iter()
        .map(|k| {
            partition_bruteforce_spread(&draw(n, k).unwrap(), &bc, &s)
                .map(|r| r.1)
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_4_payload_equivalence() {
    let mut c = Criterion::new(4, "payload equivalence", 120);
    let (s, bc) = defaults();
    c.max(
        "permsum=determinant N=1..7",
        1e-9,
        (1..=7).map(|n| {
            let sp = draw(n, 400 + n as u64)?;
            Ok(rel(
                normalized_z_permsum(&sp, &bc, &s)?,
                normalized_z_determinant(&sp, &bc, &s)?.value.to_c64(),
            ))
        }),
    );
    let even = [2usize, 4, 6];
    let spread = even
        .iter()
        .map(|&n| oracle_spread(n, [410 + n as u64]))
        .fold(0.0, f64::max);
    // As stated: the closed-form prefactor with M = N/2.
    c.max(
        "full_Z printed prefactor N=2,4,6",
        1e-9,
        even.map(|n| full_vs_bruteforce(n, 410 + n as u64, PrefactorKind::Printed)),
    );
    c.max(
        &format!("full_Z derived prefactor N=2,4,6 (oracle spread {spread:.1e})"),
        1e-9,
        even.map(|n| full_vs_bruteforce(n, 410 + n as u64, PrefactorKind::Derived)),
    );
    for n in [1usize, 3, 5] {
        let seeds = || std::iter::once(420).chain((1..=10u64).map(|k| 420 + 17 * k));
        c.max(
            &format!(
                "empirical prefactor spread N={n} (oracle spread {:.1e})",
                oracle_spread(n, seeds())
            ),
            1e-8,
            (|| -> Result<Vec<Result<f64>>> {
                let reference = empirical_lambda_constant(&draw(n, 420)?, &bc, &s)?;
                Ok(seeds()
                    .skip(1)
                    .map(|k| Ok(rel(empirical_lambda_constant(&draw(n, k)?, &bc, &s)?, reference)))
                    .collect())
            })()
            .unwrap_or_else(|e| vec![Err(e)]),
        );
    }
    c.finish();
}

#[test]
fn criterion_5_proof_steps() {
    let mut c = Criterion::new(5, "proof steps", 120);
    let (s, bc) = defaults();
    c.max(
        "recursion N=1..5",
        1e-9,
        (1..=5).map(|n| recursion_residual(&draw(n, 500 + n as u64)?, &bc, &s)),
    );
    let sp5 = draw(5, 510).unwrap();
    c.max(
        "B=F I=1..5",
        1e-9,
        (1..=5).map(|i| {
            let (b, f) = bf_pair(i, &sp5, &bc, &s)?;
            Ok(rel(b, f))
        }),
    );
    c.max(
        "residues I=1..5",
        1e-6,
        (1..=5).flat_map(|i| match residues(i, &sp5, &bc, &s, 1e-5) {
            Ok(v) => v.into_iter().map(|m| Ok(m.rel_diff)).collect::<Vec<_>>(),
            Err(e) => vec![Err(e)],
        }),
    );
    c.max(
        "periodicity N=1..5",
        1e-9,
        (1..=5).map(|n| periodicity_residual(&draw(n, 520 + n as u64)?, &bc, &s)),
    );
    c.finish();
}

#[test]
fn criterion_6_fbasis() {
    let mut c = Criterion::new(6, "F-basis", 120);
    let (s, bc) = defaults();
    let l = bc.lambda();
    let sps: Vec<SpectralConfig> = (1..=4).map(|n| draw(n, 600 + n as u64).unwrap()).collect();
    let triangular = sps
        .iter()
        .all(|sp| f_matrix(l, sp, &s).map(|f| f.is_lower_triangular()).unwrap_or(false));
    c.flag("lower-triangular N=1..4".into(), triangular);
    c.max(
        "factorizing N=1..4",
        1e-10,
        sps.iter().map(|sp| factorizing_residual(l, sp, &s)),
    );
    c.max(
        "extremal invariance N=1..4",
        1e-10,
        sps.iter().map(|sp| extremal_invariance_residual(l, sp, &s)),
    );
    let creation = |scalar: CreationScalar| {
        sps.iter()
            .flat_map(move |sp| (1..=sp.n()).map(move |k| twisted_creation_residual(k, &bc, sp, &s, scalar)))
            .collect::<Vec<_>>()
    };
    // As stated: the creation operator with its printed scalar.
    c.max(
        "twisted creation printed scalar",
        1e-9,
        creation(CreationScalar::Printed),
    );
    c.max(
        "twisted creation derived scalar",
        1e-9,
        creation(CreationScalar::Derived),
    );
    c.finish();
}

fn time_route<F: FnMut()>(repeats: usize, mut f: F) -> f64 {
    (0..repeats)
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_7_performance() {
    let mut c = Criterion::new(7, "performance", 120);
    let (s, bc) = defaults();
    let cfg = parse_config("").unwrap();
    let box_ = bench_draw(&cfg);
    let mut points = Vec::new();
    for n in [32usize, 64, 128, 256] {
        let sp = SpectralConfig::random(n, 700, &box_, &s, Some(&bc)).unwrap();
        let t = time_route(if n < 256 { 3 } else { 1 }, || {
            normalized_z_determinant(&sp, &bc, &s).unwrap();
        });
        points.push((n, t));
    }
    let t256 = points[3].1;
    c.flag(format!("determinant N=256 {t256:.2}s/10s"), t256 < 10.0);
    let slope = loglog_slope(&points);
    c.flag(format!("log-log slope {slope:.2}/3.8"), slope <= 3.8);
    let perm = |n: usize| {
        let sp = SpectralConfig::random(n, 710, &box_, &s, Some(&bc)).unwrap();
        time_route(3, || {
            normalized_z_permsum(&sp, &bc, &s).unwrap();
        })
    };
    let ratio = perm(8) / perm(7);
    c.flag(format!("permsum t(8)/t(7) {ratio:.1}/6"), ratio >= 6.0);
    c.finish();
}

fn with_threads(text: &str, threads: usize) -> RunConfig {
    parse_config(&format!("{text}\nthreads = {threads}\n")).unwrap()
}

#[test]
fn criterion_8_determinism() {
    let mut c = Criterion::new(8, "determinism", 300);
    let base = "N = 7\nseed = 801";
    let reference = run_compare(&with_threads(base, 1)).unwrap();
    for t in [2usize, 8] {
        let other = run_compare(&with_threads(base, t)).unwrap();
        let mut worst: f64 = 0.0;
        let mut same = reference.routes.len() == other.routes.len() && reference.pass == other.pass;
        for (name, a) in &reference.routes {
            let b = &other.routes[name];
            same &= a.status == b.status;
            if let (Some(x), Some(y)) = (&a.scaled, &b.scaled) {
                worst = worst.max(ScaledComplex::rel_diff(x, y));
            }
        }
        for (pair, a) in &reference.residuals {
            worst = worst.max((a - other.residuals[pair]).abs());
        }
        c.flag(
            format!("compare 1 vs {t} threads {worst:.1e}/1e-12"),
            same && worst <= 1e-12,
        );
    }
    let ids = "mode = \"identities\"\ndraws = 5\nseed = 802";
    let reference = run_identities(&with_threads(ids, 1)).unwrap();
    for t in [2usize, 8] {
        let other = run_identities(&with_threads(ids, t)).unwrap();
        let same =
            reference.checks.len() == other.checks.len()
                && reference.checks.iter().zip(&other.checks).all(|(a, b)| {
                    a.name == b.name && a.pass == b.pass && (a.max_residual - b.max_residual).abs() <= 1e-12
                });
        c.flag(format!("identities 1 vs {t} threads"), same);
    }
    c.finish();
}

//! Configuration, route orchestration and report emission for the
//! `compare`, `identities` and `bench` modes.

mod config;
mod identities;

use std::time::Instant;

use rayon::ThreadPoolBuilder;
use serde::{Deserialize, Serialize};

pub use config::{parse_config, Mode, OutputFormat, RunConfig, DEFAULT_DRAWS, DEFAULT_SEED, DEFAULT_TOL, THREADS_ENV};
pub use identities::{run_identities, IdentityCheck, IdentityReport};

use crate::error::{Error, Result};
use crate::report::{csv_field, PartitionReport, ReportParams, Route, RouteOutcome};
use crate::spectral::DrawSpec;

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Validation(format!("cannot build a pool of {t} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Evaluates every requested route and the pairwise residuals.
pub fn run_compare(cfg: &RunConfig) -> Result<PartitionReport> {
    cfg.validate()?;
    let spectral = cfg.spectral_for(cfg.n)?;
    let routes = cfg.compare_routes();
    with_threads(cfg.resolved_threads()?, || {
        let outcomes = routes
            .iter()
            .map(|&r| {
                (
                    r,
                    RouteOutcome::run(|| r.evaluate(&spectral, &cfg.boundary, &cfg.setup, cfg.prefactor)),
                )
            })
            .collect();
        let params = ReportParams::new(&spectral, &cfg.boundary, &cfg.setup, cfg.seed, cfg.tol, cfg.prefactor);
        PartitionReport::build(params, outcomes)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub route: String,
    pub n: usize,
    /// Fastest of the configured repeats.
    pub seconds: f64,
    /// Value rounded to 10 significant digits.
    pub digest: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub pass: bool,
}

impl BenchReport {
    pub fn seconds(&self, route: Route, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.route == route.name() && r.n == n)
            .map(|r| r.seconds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("route,n,seconds,digest,status\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.route,
                r.n,
                r.seconds,
                r.digest,
                csv_field(&r.status)
            ));
        }
        out
    }
}

/// Draw box used by the benchmark: wider than the default and only the
/// genericity floor as margin, so large `N` can still be placed.
pub fn bench_draw(cfg: &RunConfig) -> DrawSpec {
    DrawSpec {
        re: cfg.draw.re.max(0.45),
        im: cfg.draw.im.max(0.25),
        margin: cfg.setup.genericity_floor,
    }
}

/// Times each configured route over the `N` sweep.
pub fn run_bench(cfg: &RunConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let routes = cfg.bench_routes();
    let draw = bench_draw(cfg);
    with_threads(cfg.resolved_threads()?, || {
        let mut rows = Vec::new();
        for &route in &routes {
            for &n in &cfg.n_sweep {
                let spectral = match &cfg.spectral {
                    Some(s) if s.n() == n => Ok(s.clone()),
                    _ => crate::spectral::SpectralConfig::random(n, cfg.seed, &draw, &cfg.setup, Some(&cfg.boundary)),
                };
                let row = match spectral {
                    Err(e) => BenchRow {
                        route: route.name().into(),
                        n,
                        seconds: 0.0,
                        digest: String::new(),
                        status: format!("{}: {e}", e.kind()),
                    },
                    Ok(sp) => {
                        let mut best = f64::INFINITY;
                        let mut last = None;
                        for _ in 0..cfg.repeats {
                            let t0 = Instant::now();
                            let r = route.evaluate(&sp, &cfg.boundary, &cfg.setup, cfg.prefactor);
                            best = best.min(t0.elapsed().as_secs_f64());
                            let failed = r.is_err();
                            last = Some(r);
                            if failed {
                                break;
                            }
                        }
                        match last.expect("at least one repeat") {
                            Ok(v) => BenchRow {
                                route: route.name().into(),
                                n,
                                seconds: best,
                                digest: v.digest(10),
                                status: "ok".into(),
                            },
                            Err(e) => BenchRow {
                                route: route.name().into(),
                                n,
                                seconds: best,
                                digest: String::new(),
                                status: format!("{}: {e}", e.kind()),
                            },
                        }
                    }
                };
                rows.push(row);
            }
        }
        let pass = rows.iter().all(|r| r.status == "ok");
        BenchReport {
            seed: cfg.seed,
            rows,
            pass,
        }
    })
}

/// Least-squares slope of `log t` against `log N`.
pub fn loglog_slope(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_defaults_pass() {
        let cfg = parse_config("N = 2").unwrap();
        let r = run_compare(&cfg).unwrap();
        assert_eq!(r.routes.len(), 5);
        assert!(r.pass, "{}", r.to_json());
        assert_eq!(r.residuals.len(), 10);
    }

    #[test]
    fn singular_boundary_is_reported_per_route() {
        // λ₁₂ = η puts a zero in the boundary factor σ(λ₁₂ − η).
        let cfg = parse_config("N = 2\n[params]\nlambda1 = 0.41\nlambda2 = 0.1\n").unwrap();
        let r = run_compare(&cfg).unwrap();
        assert!(!r.pass);
        for name in ["face", "permsum"] {
            assert!(
                r.routes[name].status.starts_with("SingularityError"),
                "{name}: {}",
                r.routes[name].status
            );
        }
    }

    #[test]
    fn bench_rows_and_digest() {
        let cfg =
            parse_config("mode = \"bench\"\nroutes = [\"determinant\", \"permsum\"]\n[bench]\nn_sweep = [2, 3]\n")
                .unwrap();
        let r = run_bench(&cfg).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.to_csv().lines().count(), 5);
        let d: Vec<&BenchRow> = r.rows.iter().filter(|x| x.n == 3).collect();
        assert_eq!(d[0].digest, d[1].digest);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = [4usize, 8, 16].iter().map(|&n| (n, (n as f64).powi(3))).collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }
}

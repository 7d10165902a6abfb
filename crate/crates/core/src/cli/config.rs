//! Run configuration: a TOML document with optional `[params]`, `[draw]`,
//! `[bench]` and `[tolerances]` tables. Complex values are `[re, im]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryConfig;
use crate::closedform::PrefactorKind;
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::report::Route;
use crate::spectral::{DrawSpec, SpectralConfig};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_DRAWS: usize = 20;
pub const THREADS_ENV: &str = "ELLIPDW_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Compare,
    Identities,
    Bench,
    SingleRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Parse(format!(
                "unknown output format `{s}` (expected json or csv)"
            ))),
        }
    }
}

/// A complex number given as `[re, im]` or as a plain real.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum ComplexIn {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexIn> for C64 {
    fn from(c: ComplexIn) -> Self {
        match c {
            ComplexIn::Real(x) => C64::new(x, 0.0),
            ComplexIn::Pair([a, b]) => C64::new(a, b),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    tau: Option<ComplexIn>,
    eta: Option<ComplexIn>,
    lambda1: Option<ComplexIn>,
    lambda2: Option<ComplexIn>,
    zeta: Option<ComplexIn>,
    u: Option<Vec<ComplexIn>>,
    xi: Option<Vec<ComplexIn>>,
    series_tol: Option<f64>,
    n_max: Option<u32>,
    genericity_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDraw {
    re: Option<f64>,
    im: Option<f64>,
    margin: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBench {
    n_sweep: Option<Vec<usize>>,
    repeats: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    #[serde(rename = "N", alias = "n")]
    n: Option<usize>,
    seed: Option<u64>,
    routes: Option<Vec<Route>>,
    output: Option<OutputFormat>,
    tol: Option<f64>,
    prefactor: Option<PrefactorKind>,
    draws: Option<usize>,
    include_printed: Option<bool>,
    crossing_eps2: Option<f64>,
    threads: Option<usize>,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    draw: RawDraw,
    #[serde(default)]
    bench: RawBench,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
    /// Requested routes; empty means "every route admissible at `n`".
    pub routes: Vec<Route>,
    pub output: OutputFormat,
    pub tol: f64,
    pub prefactor: PrefactorKind,
    pub setup: ModularSetup,
    pub boundary: BoundaryConfig,
    /// Explicit spectral data; drawn from `seed` and `draw` when absent.
    pub spectral: Option<SpectralConfig>,
    pub draw: DrawSpec,
    pub n_sweep: Vec<usize>,
    pub repeats: usize,
    /// Seeded samples per identity check.
    pub draws: usize,
    pub include_printed: bool,
    /// Parity `ε₂` used by the crossing check; anything but −1 is a
    /// deliberately wrong input.
    pub crossing_eps2: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Compare,
            n: 2,
            seed: DEFAULT_SEED,
            routes: Vec::new(),
            output: OutputFormat::Json,
            tol: DEFAULT_TOL,
            prefactor: PrefactorKind::Derived,
            setup: ModularSetup::default(),
            boundary: BoundaryConfig::default(),
            spectral: None,
            draw: DrawSpec::default(),
            n_sweep: Vec::new(),
            repeats: 1,
            draws: DEFAULT_DRAWS,
            include_printed: false,
            crossing_eps2: -1.0,
            tolerances: BTreeMap::new(),
            threads: None,
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
    let d = RunConfig::default();
    let p = raw.params;
    let c = |x: Option<ComplexIn>, default: C64| x.map(C64::from).unwrap_or(default);
    let setup = ModularSetup {
        tau: c(p.tau, d.setup.tau),
        eta: c(p.eta, d.setup.eta),
        series_tol: p.series_tol.unwrap_or(d.setup.series_tol),
        n_max: p.n_max.unwrap_or(d.setup.n_max),
        genericity_floor: p.genericity_floor.unwrap_or(d.setup.genericity_floor),
    };
    let boundary = BoundaryConfig::new(
        c(p.lambda1, d.boundary.lambda1),
        c(p.lambda2, d.boundary.lambda2),
        c(p.zeta, d.boundary.zeta),
    );
    let spectral = match (p.u, p.xi) {
        (None, None) => None,
        (Some(u), Some(xi)) => Some(SpectralConfig::new(
            u.into_iter().map(C64::from).collect(),
            xi.into_iter().map(C64::from).collect(),
        )?),
        _ => {
            return Err(Error::Validation(
                "params.u and params.xi must be given together".into(),
            ))
        }
    };
    let n = match (&spectral, raw.n) {
        (Some(s), Some(n)) if s.n() != n => {
            return Err(Error::Validation(format!("N = {n} but {} spectral pairs given", s.n())));
        }
        (Some(s), _) => s.n(),
        (None, n) => n.unwrap_or(d.n),
    };
    let draw = DrawSpec {
        re: raw.draw.re.unwrap_or(d.draw.re),
        im: raw.draw.im.unwrap_or(d.draw.im),
        margin: raw.draw.margin.unwrap_or(d.draw.margin),
    };
    let cfg = RunConfig {
        mode: raw.mode.unwrap_or_default(),
        n,
        seed: raw.seed.unwrap_or(d.seed),
        routes: raw.routes.unwrap_or_default(),
        output: raw.output.unwrap_or_default(),
        tol: raw.tol.unwrap_or(d.tol),
        prefactor: raw.prefactor.unwrap_or_default(),
        setup,
        boundary,
        spectral,
        draw,
        n_sweep: raw.bench.n_sweep.unwrap_or_default(),
        repeats: raw.bench.repeats.unwrap_or(d.repeats),
        draws: raw.draws.unwrap_or(d.draws),
        include_printed: raw.include_printed.unwrap_or(false),
        crossing_eps2: raw.crossing_eps2.unwrap_or(d.crossing_eps2),
        tolerances: raw.tolerances,
        threads: raw.threads,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every guard that can be decided before running anything.
    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::Validation(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.draw.re > 0.0 && self.draw.im >= 0.0 && self.draw.margin >= 0.0) {
            return Err(Error::Validation("draw box needs re > 0, im >= 0, margin >= 0".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Validation("bench.repeats must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Validation("threads must be at least 1".into()));
        }
        if let Some(s) = &self.spectral {
            s.validate(&self.setup)?;
        }
        match self.mode {
            Mode::Bench => {
                if self.n_sweep.is_empty() {
                    return Err(Error::Validation("bench needs a non-empty n_sweep".into()));
                }
                for &n in &self.n_sweep {
                    for r in self.bench_routes() {
                        r.check_size(n)?;
                    }
                }
            }
            Mode::SingleRoute if self.routes.len() != 1 => {
                return Err(Error::Validation(format!(
                    "single-route mode needs exactly one route, got {}",
                    self.routes.len()
                )));
            }
            _ => {
                for r in &self.routes {
                    r.check_size(self.n)?;
                }
            }
        }
        Ok(())
    }

    /// Routes to run in compare mode.
    pub fn compare_routes(&self) -> Vec<Route> {
        if self.routes.is_empty() {
            Route::ALL.into_iter().filter(|r| self.n <= r.max_n()).collect()
        } else {
            self.routes.clone()
        }
    }

    pub fn bench_routes(&self) -> Vec<Route> {
        if self.routes.is_empty() {
            vec![Route::Determinant]
        } else {
            self.routes.clone()
        }
    }

    /// Explicit spectral data, or a seeded draw of size `n`.
    pub fn spectral_for(&self, n: usize) -> Result<SpectralConfig> {
        match &self.spectral {
            Some(s) if s.n() == n => Ok(s.clone()),
            _ => SpectralConfig::random(n, self.seed, &self.draw, &self.setup, Some(&self.boundary)),
        }
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }

    /// Worker count from the config, else from `ELLIPDW_THREADS`.
    pub fn resolved_threads(&self) -> Result<Option<usize>> {
        if self.threads.is_some() {
            return Ok(self.threads);
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Ok(Some(t)),
                _ => Err(Error::Validation(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                ))),
            },
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_fills_defaults() {
        let cfg = parse_config("mode = \"compare\"\nN = 2\nseed = 7\n").unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.setup.tau, C64::new(0.0, 1.0));
        assert_eq!(cfg.setup.eta, C64::new(0.31, 0.0));
        assert_eq!(cfg.boundary, BoundaryConfig::default());
        assert_eq!(cfg.compare_routes(), Route::ALL.to_vec());
    }

    #[test]
    fn guards_are_reported() {
        let e = parse_config("[params]\ntau = [0, 0.01]\n").unwrap_err();
        assert!(matches!(e, Error::Validation(_)));
        assert!(e.to_string().contains("Im(tau) below 0.05"), "{e}");
        let e = parse_config("routes = [\"permsum\"]\nN = 12\n").unwrap_err();
        assert!(e.to_string().contains("permsum limited to N ≤ 9"), "{e}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_config("N = 2\nseed = \"seven\"\n").unwrap_err();
        assert!(matches!(e, Error::Parse(_)));
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_config("colour = 3").is_err());
    }

    #[test]
    fn explicit_spectral_data() {
        let cfg = parse_config("[params]\nu = [[0.1, 0.02], 0.2]\nxi = [[0.05, -0.01], [-0.13, 0.04]]\n").unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.spectral_for(2).unwrap().u[1], C64::new(0.2, 0.0));
        assert!(parse_config("N = 3\n[params]\nu = [0.1]\nxi = [0.2]\n").is_err());
    }
}

//! Route dispatch and the partition-function report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryConfig;
use crate::closedform::{full_z, ClosedRoute, PrefactorKind, DETERMINANT_MAX_N, PERMSUM_MAX_N};
use crate::elliptic::{ModularSetup, C64};
use crate::error::{Error, Result};
use crate::oracle::vertex::{BRUTEFORCE_MAX_N, ENUMERATION_MAX_N};
use crate::oracle::{partition_bruteforce, partition_enumeration, partition_face_route, FACE_ROUTE_MAX_N};
use crate::scaled::ScaledComplex;
use crate::spectral::SpectralConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Enumeration,
    Bruteforce,
    Face,
    Permsum,
    Determinant,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::Enumeration,
        Route::Bruteforce,
        Route::Face,
        Route::Permsum,
        Route::Determinant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::Enumeration => "enumeration",
            Route::Bruteforce => "bruteforce",
            Route::Face => "face",
            Route::Permsum => "permsum",
            Route::Determinant => "determinant",
        }
    }

    pub fn max_n(self) -> usize {
        match self {
            Route::Enumeration => ENUMERATION_MAX_N,
            Route::Bruteforce => BRUTEFORCE_MAX_N,
            Route::Face => FACE_ROUTE_MAX_N,
            Route::Permsum => PERMSUM_MAX_N,
            Route::Determinant => DETERMINANT_MAX_N,
        }
    }

    pub fn check_size(self, n: usize) -> Result<()> {
        if n > self.max_n() {
            return Err(Error::Validation(format!(
                "{} limited to N ≤ {}, got N = {n}",
                self.name(),
                self.max_n()
            )));
        }
        Ok(())
    }

    /// Full partition function by this route. The closed-form routes use
    /// `kind` for the prefactor.
    pub fn evaluate(
        self,
        spectral: &SpectralConfig,
        bc: &BoundaryConfig,
        setup: &ModularSetup,
        kind: PrefactorKind,
    ) -> Result<ScaledComplex> {
        let plain = |z: Result<C64>| z.map(ScaledComplex::from_c64);
        match self {
            Route::Enumeration => plain(partition_enumeration(spectral, bc, setup)),
            Route::Bruteforce => plain(partition_bruteforce(spectral, bc, setup)),
            Route::Face => plain(partition_face_route(spectral, bc, setup)),
            Route::Permsum => full_z(spectral, bc, setup, ClosedRoute::Permsum, kind),
            Route::Determinant => full_z(spectral, bc, setup, ClosedRoute::Determinant, kind),
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            Error::Parse(format!(
                "unknown route `{s}` (expected one of enumeration, bruteforce, face, permsum, determinant)"
            ))
        })
    }
}

/// `|a − b| / max(|a|, |b|, 1e-300)`.
pub fn residual(a: &ScaledComplex, b: &ScaledComplex) -> f64 {
    ScaledComplex::rel_diff(a, b)
}

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    /// `None` when the route failed or the value leaves the `f64` range.
    pub value: Option<[f64; 2]>,
    pub seconds: f64,
    /// `"ok"` or the error tag followed by its message.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log10_abs: Option<f64>,
    #[serde(skip)]
    pub scaled: Option<ScaledComplex>,
}

impl RouteOutcome {
    pub fn run<F>(f: F) -> Self
    where
        F: FnOnce() -> Result<ScaledComplex>,
    {
        let t0 = Instant::now();
        let r = f();
        let seconds = t0.elapsed().as_secs_f64();
        match r {
            Ok(v) => {
                let z = v.to_c64();
                let finite = z.is_finite() && (v.is_zero() || z.norm() > 0.0);
                Self {
                    value: finite.then(|| pair(z)),
                    seconds,
                    status: "ok".into(),
                    log10_abs: (!finite).then(|| v.log10_abs()),
                    scaled: Some(v),
                }
            }
            Err(e) => Self {
                value: None,
                seconds,
                status: format!("{}: {e}", e.kind()),
                log10_abs: None,
                scaled: None,
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.scaled.is_some()
    }
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: usize,
    pub seed: u64,
    pub tau: [f64; 2],
    pub eta: [f64; 2],
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub zeta: [f64; 2],
    pub u: Vec<[f64; 2]>,
    pub xi: Vec<[f64; 2]>,
    pub tol: f64,
    pub prefactor: PrefactorKind,
}

impl ReportParams {
    pub fn new(
        spectral: &SpectralConfig,
        bc: &BoundaryConfig,
        setup: &ModularSetup,
        seed: u64,
        tol: f64,
        prefactor: PrefactorKind,
    ) -> Self {
        Self {
            n: spectral.n(),
            seed,
            tau: pair(setup.tau),
            eta: pair(setup.eta),
            lambda1: pair(bc.lambda1),
            lambda2: pair(bc.lambda2),
            zeta: pair(bc.zeta),
            u: spectral.u.iter().copied().map(pair).collect(),
            xi: spectral.xi.iter().copied().map(pair).collect(),
            tol,
            prefactor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub params: ReportParams,
    pub routes: BTreeMap<String, RouteOutcome>,
    /// Keyed `"a/b"` for every pair of routes that both succeeded.
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

impl PartitionReport {
    pub fn build(params: ReportParams, outcomes: Vec<(Route, RouteOutcome)>) -> Self {
        let mut residuals = BTreeMap::new();
        for (i, (ra, a)) in outcomes.iter().enumerate() {
            for (rb, b) in &outcomes[i + 1..] {
                if let (Some(x), Some(y)) = (&a.scaled, &b.scaled) {
                    residuals.insert(format!("{ra}/{rb}"), residual(x, y));
                }
            }
        }
        let pass = !outcomes.is_empty()
            && outcomes.iter().all(|(_, o)| o.is_ok())
            && residuals.values().all(|&r| r <= params.tol);
        Self {
            params,
            routes: outcomes.into_iter().map(|(r, o)| (r.name().to_string(), o)).collect(),
            residuals,
            pass,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per route.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("route,status,re,im,log10_abs,seconds\n");
        for (name, o) in &self.routes {
            let (re, im) = o.value.map(|[a, b]| (a.to_string(), b.to_string())).unwrap_or_default();
            let l = o.log10_abs.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{name},{},{re},{im},{l},{}\n",
                csv_field(&o.status),
                o.seconds
            ));
        }
        out
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.name().parse::<Route>().unwrap(), r);
        }
        assert!("magic".parse::<Route>().is_err());
        let e = Route::Permsum.check_size(12).unwrap_err();
        assert!(e.to_string().contains("permsum limited to N ≤ 9"));
    }

    #[test]
    fn failed_route_fails_report() {
        let ok = RouteOutcome::run(|| Ok(ScaledComplex::from_c64(C64::new(1.0, 0.0))));
        let bad = RouteOutcome::run(|| Err(Error::Singularity("x".into())));
        assert!(bad.status.starts_with("SingularityError"));
        let sp = SpectralConfig::new(vec![], vec![]).unwrap();
        let params = ReportParams::new(
            &sp,
            &BoundaryConfig::default(),
            &ModularSetup::default(),
            7,
            1e-9,
            PrefactorKind::Derived,
        );
        let r = PartitionReport::build(params, vec![(Route::Bruteforce, ok), (Route::Face, bad)]);
        assert!(!r.pass);
        assert!(r.residuals.is_empty());
        assert_eq!(r.to_csv().lines().count(), 3);
    }
}

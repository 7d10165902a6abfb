//! The f64 engine against an independent 256-bit evaluation of the defining
//! theta sums, and against values frozen from that evaluation.

use astro_float::{BigFloat, Consts, RoundingMode};
use ellipdw::boundary::BoundaryConfig;
use ellipdw::closedform::{
    derived_lambda_constant, full_z, normalized_z_determinant, normalized_z_permsum, ClosedRoute, PrefactorKind,
};
use ellipdw::oracle::{partition_bruteforce, partition_face_route};
use ellipdw::rmatrices::vertex_weights;
use ellipdw::spectral::SpectralConfig;
use ellipdw::{ModularSetup, C64};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;
const TERMS: i64 = 40;

#[derive(Clone)]
struct Hc {
    re: BigFloat,
    im: BigFloat,
}

struct Hp {
    cc: Consts,
    pi: BigFloat,
}

impl Hp {
    fn new() -> Self {
        let mut cc = Consts::new().expect("constants cache");
        let pi = cc.pi(P, RM);
        Self { cc, pi }
    }

    fn c(&self, z: C64) -> Hc {
        Hc {
            re: BigFloat::from_f64(z.re, P),
            im: BigFloat::from_f64(z.im, P),
        }
    }

    fn f(x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn add(a: &Hc, b: &Hc) -> Hc {
        Hc {
            re: a.re.add(&b.re, P, RM),
            im: a.im.add(&b.im, P, RM),
        }
    }

    fn sub(a: &Hc, b: &Hc) -> Hc {
        Hc {
            re: a.re.sub(&b.re, P, RM),
            im: a.im.sub(&b.im, P, RM),
        }
    }

    fn mul(a: &Hc, b: &Hc) -> Hc {
        Hc {
            re: a.re.mul(&b.re, P, RM).sub(&a.im.mul(&b.im, P, RM), P, RM),
            im: a.re.mul(&b.im, P, RM).add(&a.im.mul(&b.re, P, RM), P, RM),
        }
    }

    fn div(a: &Hc, b: &Hc) -> Hc {
        let den = b.re.mul(&b.re, P, RM).add(&b.im.mul(&b.im, P, RM), P, RM);
        let conj = Hc {
            re: b.re.clone(),
            im: Self::f(0.0).sub(&b.im, P, RM),
        };
        let n = Self::mul(a, &conj);
        Hc {
            re: n.re.div(&den, P, RM),
            im: n.im.div(&den, P, RM),
        }
    }

    fn scale(a: &Hc, x: f64) -> Hc {
        let x = Self::f(x);
        Hc {
            re: a.re.mul(&x, P, RM),
            im: a.im.mul(&x, P, RM),
        }
    }

    /// `Σ_{|n| ≤ 40} exp{iπ(n+a)²τ + 2iπ(n+a)(u+b)}`.
    fn theta(&mut self, a: f64, b: f64, u: &Hc, tau: &Hc) -> Hc {
        let w = Self::add(
            u,
            &Hc {
                re: Self::f(b),
                im: Self::f(0.0),
            },
        );
        let mut sum = Hc {
            re: Self::f(0.0),
            im: Self::f(0.0),
        };
        for n in -TERMS..=TERMS {
            let x = Self::f(n as f64 + a);
            let x2 = x.mul(&x, P, RM);
            // exponent = π[−x²τ_i − 2x w_i] + iπ[x²τ_r + 2x w_r]
            let two_x = x.mul(&Self::f(2.0), P, RM);
            let re = x2.mul(&tau.im, P, RM).add(&two_x.mul(&w.im, P, RM), P, RM);
            let re = Self::f(0.0).sub(&re, P, RM).mul(&self.pi, P, RM);
            let im = x2
                .mul(&tau.re, P, RM)
                .add(&two_x.mul(&w.re, P, RM), P, RM)
                .mul(&self.pi, P, RM);
            let mag = re.exp(P, RM, &mut self.cc);
            let term = Hc {
                re: mag.mul(&im.cos(P, RM, &mut self.cc), P, RM),
                im: mag.mul(&im.sin(P, RM, &mut self.cc), P, RM),
            };
            sum = Self::add(&sum, &term);
        }
        sum
    }

    fn sigma(&mut self, u: &Hc, tau: &Hc) -> Hc {
        self.theta(0.5, 0.5, u, tau)
    }

    fn to_c64(z: &Hc) -> C64 {
        let p = |x: &BigFloat| x.to_string().parse::<f64>().expect("decimal output");
        C64::new(p(&z.re), p(&z.im))
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn rel_strict(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

fn points() -> Vec<C64> {
    vec![
        C64::new(0.21, -0.07),
        C64::new(-0.43, 0.18),
        C64::new(0.9, 0.35),
        C64::new(1.7, -0.6),
        C64::new(-2.31, 0.02),
    ]
}

fn taus() -> [C64; 2] {
    [C64::new(0.0, 1.0), C64::new(0.3, 0.9)]
}

#[test]
fn sigma_family_matches_high_precision() {
    let mut hp = Hp::new();
    for tau in taus() {
        let s = ModularSetup::new(tau, C64::new(0.31, 0.0)).unwrap();
        let t = hp.c(tau);
        let t2 = Hp::scale(&t, 2.0);
        for u in points() {
            let hu = hp.c(u);
            let want = Hp::to_c64(&hp.sigma(&hu, &t));
            assert!(rel(s.sigma(u).unwrap(), want) < 1e-13, "sigma({u}) at tau={tau}");
            for (a1, a2) in [(1u8, 0u8), (0, 1), (1, 1)] {
                let want = Hp::to_c64(&hp.theta(0.5 + a1 as f64 / 2.0, 0.5 + a2 as f64 / 2.0, &hu, &t));
                assert!(
                    rel(s.sigma_char(a1, a2, u).unwrap(), want) < 1e-13,
                    "sigma_{a1}{a2}({u})"
                );
            }
            for j in [1i64, 2] {
                let want = Hp::to_c64(&hp.theta(0.5 - j as f64 / 2.0, 0.5, &hu, &t2));
                assert!(rel(s.theta_level2(j, u).unwrap(), want) < 1e-13, "theta^({j})({u})");
            }
        }
    }
}

/// Eight-vertex weights from the 256-bit theta sums.
fn hp_vertex_weights(hp: &mut Hp, u: C64, eta: C64, tau: C64) -> [C64; 4] {
    let t2 = Hp::scale(&hp.c(tau), 2.0);
    let t = hp.c(tau);
    let (hu, he) = (hp.c(u), hp.c(eta));
    let hue = Hp::add(&hu, &he);
    let zero = hp.c(C64::new(0.0, 0.0));
    let th1 = |hp: &mut Hp, z: &Hc| hp.theta(0.0, 0.5, z, &t2);
    let th0 = |hp: &mut Hp, z: &Hc| hp.theta(0.5, 0.5, z, &t2);
    let se = hp.sigma(&he, &t);
    let sue = hp.sigma(&hue, &t);
    let t1_0 = th1(hp, &zero);
    let d0 = Hp::mul(&Hp::mul(&t1_0, &th0(hp, &he)), &sue);
    let d1 = Hp::mul(&Hp::mul(&t1_0, &th1(hp, &he)), &sue);
    let (t1u, t0u, t1ue, t0ue) = (th1(hp, &hu), th0(hp, &hu), th1(hp, &hue), th0(hp, &hue));
    let w = |x: &Hc, y: &Hc, d: &Hc| Hp::to_c64(&Hp::div(&Hp::mul(&Hp::mul(x, y), &se), d));
    [
        w(&t1u, &t0ue, &d0),
        w(&t0u, &t1ue, &d0),
        w(&t1u, &t1ue, &d1),
        w(&t0u, &t0ue, &d1),
    ]
}

#[test]
fn vertex_weights_match_high_precision() {
    let mut hp = Hp::new();
    for tau in taus() {
        let s = ModularSetup::new(tau, C64::new(0.31, 0.0)).unwrap();
        for u in points() {
            let got = vertex_weights(u, &s).unwrap();
            let want = hp_vertex_weights(&mut hp, u, s.eta, tau);
            for k in 0..4 {
                assert!(rel(got[k], want[k]) < 1e-12, "weight {k} at u={u}, tau={tau}");
            }
        }
    }
}

struct Fixture {
    setup: ModularSetup,
    bc: BoundaryConfig,
    u: Vec<C64>,
    xi: Vec<C64>,
}

#[allow(clippy::approx_constant)]
fn fixture() -> Fixture {
    Fixture {
        setup: ModularSetup::default(),
        bc: BoundaryConfig::default(),
        u: vec![C64::new(0.137, 0.041), C64::new(-0.262, 0.093)],
        xi: vec![C64::new(0.071, -0.058), C64::new(0.318, 0.112)],
    }
}

/// Permutation sum for the normalized partition function and the full
/// value with the derived prefactor, all in 256-bit arithmetic.
fn hp_partition(hp: &mut Hp, fx: &Fixture, n: usize) -> (C64, C64) {
    let t = hp.c(fx.setup.tau);
    let eta = hp.c(fx.setup.eta);
    let p = hp.c(fx.bc.lambda1 + fx.bc.zeta);
    let q = hp.c(fx.bc.lambda2 + fx.bc.zeta);
    let u: Vec<Hc> = fx.u[..n].iter().map(|&z| hp.c(z)).collect();
    let xi: Vec<Hc> = fx.xi[..n].iter().map(|&z| hp.c(z)).collect();
    let mut s = |z: &Hc| hp.sigma(z, &t);
    let add = Hp::add;
    let sub = Hp::sub;
    let mul = Hp::mul;
    let div = Hp::div;

    let mut a = vec![vec![]; n];
    let mut g = vec![vec![]; n];
    let mut h = vec![vec![]; n];
    for r in 0..n {
        for c in 0..n {
            let num = mul(
                &mul(&s(&sub(&p, &xi[c])), &s(&add(&q, &xi[c]))),
                &mul(&s(&Hp::scale(&u[r], 2.0)), &s(&eta)),
            );
            let den = mul(
                &mul(&s(&add(&p, &u[r])), &s(&add(&q, &u[r]))),
                &mul(&s(&add(&sub(&u[r], &xi[c]), &eta)), &s(&add(&u[r], &xi[c]))),
            );
            a[r].push(div(&num, &den));
            let gn = mul(&s(&sub(&u[r], &xi[c])), &s(&add(&add(&u[r], &xi[c]), &eta)));
            let gd = mul(&s(&add(&sub(&u[r], &xi[c]), &eta)), &s(&add(&u[r], &xi[c])));
            g[r].push(div(&gn, &gd));
            let hh = if r == c {
                Hc {
                    re: Hp::f(0.0),
                    im: Hp::f(0.0),
                }
            } else {
                div(&s(&add(&sub(&xi[r], &xi[c]), &eta)), &s(&sub(&xi[r], &xi[c])))
            };
            h[r].push(hh);
        }
    }
    let perms: Vec<Vec<usize>> = if n == 1 {
        vec![vec![0]]
    } else {
        vec![vec![0, 1], vec![1, 0]]
    };
    let mut zn = Hc {
        re: Hp::f(0.0),
        im: Hp::f(0.0),
    };
    for sp in perms {
        let mut term = Hc {
            re: Hp::f(1.0),
            im: Hp::f(0.0),
        };
        for i in 0..n {
            term = mul(&term, &a[i][sp[i]]);
            for k in (i + 1)..n {
                term = mul(&term, &mul(&g[i][sp[k]], &h[sp[i]][sp[k]]));
            }
        }
        zn = add(&zn, &term);
    }

    // Derived constant: N=1 → σ(λ₂₁−η)/σ(λ₂₁); N=2 → σ(λ₁₂+2η)/σ(λ₁₂−η).
    let l12 = hp.c(fx.bc.lambda12());
    let mut s = |z: &Hc| hp.sigma(z, &t);
    let c = if n == 1 {
        let l21 = sub(
            &Hc {
                re: Hp::f(0.0),
                im: Hp::f(0.0),
            },
            &l12,
        );
        div(&s(&sub(&l21, &eta)), &s(&l21))
    } else {
        div(&s(&add(&l12, &Hp::scale(&eta, 2.0))), &s(&sub(&l12, &eta)))
    };
    let mut full = mul(&c, &zn);
    for ui in &u {
        for x in &xi {
            full = mul(&full, &div(&s(&add(ui, x)), &s(&add(&add(ui, x), &eta))));
        }
    }
    (Hp::to_c64(&zn), Hp::to_c64(&full))
}

fn spectral(fx: &Fixture, n: usize) -> SpectralConfig {
    SpectralConfig::new(fx.u[..n].to_vec(), fx.xi[..n].to_vec()).unwrap()
}

// Values of the 256-bit evaluation above, rounded to 17 significant digits.
const FROZEN_SIGMA_021_M007_TAU_I: C64 = C64::new(-0.5705488783851173, 0.16021089672873196);
const FROZEN_ZN1: C64 = C64::new(-0.02962680523434876, -0.9851790783450591);
const FROZEN_Z1: C64 = C64::new(-0.01058991469887895, -0.10236105172623301);
const FROZEN_ZN2: C64 = C64::new(2.2110037380662613, 1.101023907241532);
const FROZEN_Z2: C64 = C64::new(0.11418894204987604, 1.5635240938845218);

#[test]
fn sigma_matches_frozen_value() {
    let s = ModularSetup::default();
    assert!(rel_strict(s.sigma(C64::new(0.21, -0.07)).unwrap(), FROZEN_SIGMA_021_M007_TAU_I) < 1e-14);
}

#[test]
fn normalized_partition_matches_frozen_values() {
    let fx = fixture();
    for (n, want) in [(1, FROZEN_ZN1), (2, FROZEN_ZN2)] {
        let sp = spectral(&fx, n);
        let p = normalized_z_permsum(&sp, &fx.bc, &fx.setup).unwrap();
        let d = normalized_z_determinant(&sp, &fx.bc, &fx.setup).unwrap().value.to_c64();
        assert!(rel_strict(p, want) < 1e-12, "permsum N={n}: {p}");
        assert!(rel_strict(d, want) < 1e-12, "determinant N={n}: {d}");
    }
}

#[test]
fn full_partition_matches_frozen_values() {
    let fx = fixture();
    for (n, want) in [(1, FROZEN_Z1), (2, FROZEN_Z2)] {
        let sp = spectral(&fx, n);
        let bf = partition_bruteforce(&sp, &fx.bc, &fx.setup).unwrap();
        let face = partition_face_route(&sp, &fx.bc, &fx.setup).unwrap();
        let z = full_z(&sp, &fx.bc, &fx.setup, ClosedRoute::Determinant, PrefactorKind::Derived)
            .unwrap()
            .to_c64();
        assert!(rel_strict(bf, want) < 1e-11, "bruteforce N={n}: {bf}");
        assert!(rel_strict(face, want) < 1e-11, "face N={n}: {face}");
        assert!(rel_strict(z, want) < 1e-11, "closed form N={n}: {z}");
    }
}

#[test]
fn derived_constant_matches_high_precision() {
    let mut hp = Hp::new();
    let fx = fixture();
    for n in 1..=2 {
        let (zn, full) = hp_partition(&mut hp, &fx, n);
        let mut want = full / zn;
        for u in &fx.u[..n] {
            for x in &fx.xi[..n] {
                let (a, b) = (
                    fx.setup.sigma(u + x).unwrap(),
                    fx.setup.sigma(u + x + fx.setup.eta).unwrap(),
                );
                want *= b / a;
            }
        }
        let got = derived_lambda_constant(n, &fx.bc, &fx.setup).unwrap();
        assert!(rel_strict(got, want) < 1e-12, "N={n}: {got} vs {want}");
    }
}

/// Regenerates the frozen literals above.
#[test]
#[ignore]
fn print_frozen_values() {
    let mut hp = Hp::new();
    let fx = fixture();
    let t = hp.c(fx.setup.tau);
    let su = hp.c(C64::new(0.21, -0.07));
    println!("sigma {:?}", Hp::to_c64(&hp.sigma(&su, &t)));
    for n in 1..=2 {
        println!("N={n} {:?}", hp_partition(&mut hp, &fx, n));
    }
}

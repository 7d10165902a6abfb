//! Complex numbers with a separate binary exponent, for products that leave
//! the `f64` range at large `N`.

use serde::{Deserialize, Serialize};

use crate::elliptic::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub mantissa: C64,
    pub exp2: i64,
}

/// `x·2^e` without intermediate overflow of the power.
pub fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut y = x;
    while e > 1000 {
        y *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        y *= 2f64.powi(-1000);
        e += 1000;
    }
    y * 2f64.powi(e as i32)
}

impl ScaledComplex {
    pub const ONE: Self = Self {
        mantissa: C64::new(1.0, 0.0),
        exp2: 0,
    };

    pub fn new(mantissa: C64, exp2: i64) -> Self {
        let mut s = Self { mantissa, exp2 };
        s.normalize();
        s
    }

    pub fn from_c64(z: C64) -> Self {
        Self::new(z, 0)
    }

    fn normalize(&mut self) {
        let r = self.mantissa.norm();
        if r == 0.0 || !r.is_finite() {
            if r == 0.0 {
                self.exp2 = 0;
            }
            return;
        }
        let e = r.log2().floor() as i64;
        self.mantissa = C64::new(ldexp(self.mantissa.re, -e), ldexp(self.mantissa.im, -e));
        self.exp2 += e;
    }

    pub fn mul_c64(self, z: C64) -> Self {
        Self::new(self.mantissa * z, self.exp2)
    }

    pub fn div_c64(self, z: C64) -> Self {
        Self::new(self.mantissa / z, self.exp2)
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(self.mantissa * o.mantissa, self.exp2 + o.exp2)
    }

    pub fn div(self, o: Self) -> Self {
        Self::new(self.mantissa / o.mantissa, self.exp2 - o.exp2)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// Nearest `f64` value; may be infinite or zero when out of range.
    pub fn to_c64(&self) -> C64 {
        C64::new(ldexp(self.mantissa.re, self.exp2), ldexp(self.mantissa.im, self.exp2))
    }

    pub fn log10_abs(&self) -> f64 {
        self.mantissa.norm().log10() + self.exp2 as f64 * std::f64::consts::LOG10_2
    }

    /// `|a − b| / max(|a|, |b|, 1e-300)` computed on aligned mantissas.
    pub fn rel_diff(a: &Self, b: &Self) -> f64 {
        if a.is_zero() && b.is_zero() {
            return 0.0;
        }
        let e = if a.is_zero() {
            b.exp2
        } else if b.is_zero() {
            a.exp2
        } else {
            a.exp2.max(b.exp2)
        };
        let x = a.mantissa * ldexp(1.0, a.exp2 - e);
        let y = b.mantissa * ldexp(1.0, b.exp2 - e);
        (x - y).norm() / x.norm().max(y.norm()).max(1e-300)
    }

    /// Rounds the value to `digits` significant decimal digits, as text.
    pub fn digest(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let z = self.to_c64();
        if z.is_finite() && z.norm() > 1e-300 {
            return format!("{:.*e}{:+.*e}i", digits - 1, z.re, digits - 1, z.im);
        }
        let l = self.log10_abs();
        let e10 = l.floor();
        let m = self.mantissa / self.mantissa.norm() * 10f64.powf(l - e10);
        format!("({:.*}{:+.*}i)e{}", digits - 1, m.re, digits - 1, m.im, e10 as i64)
    }
}

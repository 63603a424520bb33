//! Exact field arithmetic: arbitrary-precision rationals and prime fields.
//!
//! Every scalar carries its field tag so mixed-field arithmetic is caught
//! immediately instead of producing garbage.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Which exact field a computation runs over.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum FieldCfg {
    /// The rational numbers.
    Q,
    /// The prime field with the given modulus.
    Fp(u64),
}

impl FieldCfg {
    pub fn zero(self) -> Scalar {
        match self {
            FieldCfg::Q => Scalar::Q(BigRational::zero()),
            FieldCfg::Fp(p) => Scalar::Fp { p, v: 0 },
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            FieldCfg::Q => Scalar::Q(BigRational::one()),
            FieldCfg::Fp(p) => Scalar::Fp { p, v: 1 },
        }
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            FieldCfg::Q => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            FieldCfg::Fp(p) => {
                let m = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, v: m }
            }
        }
    }

    /// num/den as a field element. `den` must be nonzero (and invertible mod p).
    pub fn from_ratio(self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        &self.from_i64(num) * &self.from_i64(den).inv()
    }
}

impl fmt::Display for FieldCfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldCfg::Q => write!(f, "QQ"),
            FieldCfg::Fp(p) => write!(f, "Fp {p}"),
        }
    }
}

/// An element of the active field. Rationals are kept in lowest terms with
/// positive denominator (BigRational maintains that invariant).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, v: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldCfg {
        match self {
            Scalar::Q(_) => FieldCfg::Q,
            Scalar::Fp { p, .. } => FieldCfg::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Scalar {
        match self {
            Scalar::Q(r) => {
                assert!(!r.is_zero(), "inverse of zero");
                Scalar::Q(r.recip())
            }
            Scalar::Fp { p, v } => {
                assert!(*v != 0, "inverse of zero");
                Scalar::Fp { p: *p, v: mod_inv(*v, *p) }
            }
        }
    }

    /// True when the rational is in lowest terms with positive denominator.
    /// Prime-field elements are trivially normalized.
    pub fn is_normalized(&self) -> bool {
        match self {
            Scalar::Q(r) => {
                use num_integer::Integer;
                r.denom().is_positive()
                    && r.numer().gcd(r.denom()).is_one()
                    || r.numer().is_zero() && r.denom().is_one()
            }
            Scalar::Fp { p, v } => v < p,
        }
    }
}

fn check_same(a: &Scalar, b: &Scalar) {
    assert_eq!(a.field(), b.field(), "mixed-field arithmetic");
}

impl<'a> Add<&'a Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        check_same(self, rhs);
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                Scalar::Fp { p: *p, v: (a + b) % p }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        check_same(self, rhs);
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a - b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                Scalar::Fp { p: *p, v: (a + p - b) % p }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        check_same(self, rhs);
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: ((*a as u128 * *b as u128) % *p as u128) as u64,
            },
            _ => unreachable!(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: (p - v) % p },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p); p is prime
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "not invertible mod p");
    old_s.rem_euclid(p as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let f = FieldCfg::Q;
        let a = f.from_ratio(2, 3);
        assert!((&a + &(-&a)).is_zero());
        assert!((&a * &a.inv()).is_one());
        assert!(a.is_normalized());
    }

    #[test]
    fn prime_field_inverse() {
        let f = FieldCfg::Fp(32003);
        for n in [1i64, 2, 7, 32002] {
            let a = f.from_i64(n);
            assert!((&a * &a.inv()).is_one());
        }
    }

    #[test]
    fn from_ratio_over_fp() {
        let f = FieldCfg::Fp(7);
        let half = f.from_ratio(1, 2);
        assert_eq!(&half + &half, f.one());
    }

    #[test]
    #[should_panic]
    fn mixed_fields_rejected() {
        let _ = &FieldCfg::Q.one() + &FieldCfg::Fp(5).one();
    }
}

//! Exact rational scalars for coefficient recovery and root counting.
//!
//! Products of six or more f64-sized values overflow the f64 exponent budget
//! for ill-scaled inputs and, worse, lose the sign information that root
//! counting depends on. Arbitrary-precision rationals make every add and
//! multiply exact; f64 inputs convert losslessly since every finite f64 is a
//! dyadic rational.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Lossless conversion; panics on NaN or infinity, which never arise from
/// finite tracker endpoints.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_f64(x).expect("finite f64 converts exactly to a rational")
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().expect("rational fits in f64 range")
}

pub fn rat_zero() -> Rat {
    Rat::from_integer(BigInt::from(0))
}

pub fn rat_one() -> Rat {
    Rat::from_integer(BigInt::from(1))
}

/// Complex number with exact rational parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn zero() -> Self {
        CRat {
            re: rat_zero(),
            im: rat_zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: rat_one(),
            im: rat_zero(),
        }
    }

    pub fn from_c64(z: Complex64) -> Self {
        CRat {
            re: rat_from_f64(z.re),
            im: rat_from_f64(z.im),
        }
    }

    pub fn from_real(x: &Rat) -> Self {
        CRat {
            re: x.clone(),
            im: rat_zero(),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn add(&self, other: &CRat) -> CRat {
        CRat {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &CRat) -> CRat {
        CRat {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn mul(&self, other: &CRat) -> CRat {
        CRat {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn neg(&self) -> CRat {
        CRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// |re| + |im| as f64, cheap magnitude proxy for residue checks.
    pub fn l1_norm_f64(&self) -> f64 {
        rat_to_f64(&self.re.abs()) + rat_to_f64(&self.im.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip_is_exact() {
        for &x in &[0.1, -13.571, 1e-300, 2f64.powi(60) + 1.0] {
            assert_eq!(rat_to_f64(&rat_from_f64(x)), x);
        }
    }

    #[test]
    fn complex_product_matches_f64() {
        let a = CRat::from_c64(Complex64::new(3.5, -2.25));
        let b = CRat::from_c64(Complex64::new(-1.125, 4.0));
        let p = a.mul(&b);
        let q = Complex64::new(3.5, -2.25) * Complex64::new(-1.125, 4.0);
        // exact dyadic inputs, so the product is itself exact in f64
        assert_eq!(p.to_c64(), q);
    }

    #[test]
    fn cancellation_is_exact() {
        let a = CRat::from_c64(Complex64::new(0.1, 0.2));
        let d = a.sub(&a);
        assert!(d.is_zero());
        assert_eq!(d.l1_norm_f64(), 0.0);
    }
}

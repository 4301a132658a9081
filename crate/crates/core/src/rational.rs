//! Exact rational helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_one() -> Q {
    Q::one()
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` or just `num` for integers.
pub fn q_fmt(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_parts(x: &Q) -> Option<(i64, i64)> {
    Some((x.numer().to_i64()?, x.denom().to_i64()?))
}

pub fn q_abs(x: &Q) -> Q {
    x.abs()
}

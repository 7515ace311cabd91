//! Exact rational and directed-rounding interval arithmetic.
//!
//! Every irrational quantity in the crate is carried as a [`RealEnclosure`]
//! with dyadic endpoints; strict inequalities are settled through
//! [`certified_compare`] with precision escalation.

mod dyadic;
mod enclosure;
mod functions;

pub use dyadic::{Dir, Dyadic, DyadicParseError};
pub use enclosure::{certified_compare, Certified, NumError, PrecisionPolicy, RealEnclosure};
pub use functions::{exp, interval_ops, ln, pow, sin, sqrt, sqrt_int, BinOp};

use num_bigint::BigInt;
use num_traits::Signed;

/// Exact rational carrier for integer-linear forms.
pub type BigRational = num_rational::BigRational;

/// Enclosure of an exact rational at the given precision.
pub fn enclosure_of_rational(r: &BigRational, bits: u32) -> RealEnclosure {
    RealEnclosure::from_ratio(r.numer(), r.denom(), bits)
}

/// True when the exact rational lies inside the enclosure.
pub fn encloses_rational(e: &RealEnclosure, r: &BigRational) -> bool {
    let d = e.lo();
    // lo <= r  <=>  lo.mant * denom <= numer * 2^... ; compare via rational cross products
    dyadic_cmp_rational(d, r) <= std::cmp::Ordering::Equal
        && dyadic_cmp_rational(e.hi(), r) >= std::cmp::Ordering::Equal
}

/// Exact comparison of a dyadic against a rational.
pub fn dyadic_cmp_rational(d: &Dyadic, r: &BigRational) -> std::cmp::Ordering {
    // d = m * 2^e ; compare m * 2^e * denom vs numer
    let mut lhs = d.mant() * r.denom();
    let mut rhs = r.numer().clone();
    if d.exp() >= 0 {
        lhs <<= d.exp() as u64;
    } else {
        rhs <<= (-d.exp()) as u64;
    }
    lhs.cmp(&rhs)
}

/// Dyadic value of a big integer times 2^k (convenience for window bounds).
pub fn int_times_pow2(v: i64, k: i64) -> Dyadic {
    Dyadic::from_bigint(BigInt::from(v)).mul_pow2(k)
}

/// Exact squared Euclidean norm of a 2-vector.
pub fn norm2_sq(a: &BigInt, b: &BigInt) -> BigInt {
    a * a + b * b
}

/// Exact absolute value helper.
pub fn big_abs(v: &BigInt) -> BigInt {
    v.abs()
}

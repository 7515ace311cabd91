//! Exact dyadic rationals: `mant * 2^exp` with an arbitrary-size mantissa.
//!
//! Addition and multiplication are exact; precision is controlled
//! explicitly through [`Dyadic::round`] with a stated direction.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

/// Rounding direction for precision-limited operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Down => Dir::Up,
            Dir::Up => Dir::Down,
        }
    }
}

/// An exact dyadic rational `mant * 2^exp`, normalized so that the
/// mantissa is odd or zero (zero is stored as `0 * 2^0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
        } else if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    /// 2^k as a dyadic.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Number of bits in the mantissa.
    pub fn mant_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// floor(log2 |v|) for nonzero v.
    pub fn log2_floor(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.exp + self.mant.bits() as i64 - 1
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Value times 2^k, exact.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Round to at most `bits` mantissa bits in direction `dir`.
    pub fn round(&self, bits: u32, dir: Dir) -> Dyadic {
        let nbits = self.mant.bits();
        if nbits <= bits as u64 {
            return self.clone();
        }
        let drop = (nbits - bits as u64) as i64;
        let m = match dir {
            Dir::Down => floor_shr(&self.mant, drop as u64),
            Dir::Up => -floor_shr(&(-&self.mant), drop as u64),
        };
        Dyadic::new(m, self.exp + drop)
    }

    /// Directed division: a quotient q with q <= a/b (Down) or q >= a/b (Up),
    /// carrying `bits` significant bits. The divisor must be nonzero.
    pub fn div(&self, other: &Dyadic, bits: u32, dir: Dir) -> Dyadic {
        assert!(!other.is_zero(), "division by zero dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        // Scale the numerator so the integer quotient has > bits bits.
        let shift = (other.mant.bits() as i64 + bits as i64 + 2)
            - (self.mant.bits() as i64)
            + 1;
        let shift = shift.max(0) as u64;
        let num = &self.mant << shift;
        let q = match dir {
            Dir::Down => floor_div(&num, &other.mant),
            Dir::Up => -floor_div(&(-num), &other.mant),
        };
        Dyadic::new(q, self.exp - other.exp - shift as i64).round(bits + 1, dir)
    }

    /// Floor of the value as a BigInt.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shr(&self.mant, (-self.exp) as u64)
        }
    }

    /// Nearest integer; half-way cases round toward +infinity.
    pub fn round_int(&self) -> BigInt {
        self.add(&Dyadic::new(BigInt::one(), -1)).floor_int()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let lg = self.log2_floor();
        if lg < -1060 {
            return 0.0;
        }
        if lg > 1020 {
            return if self.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let nbits = self.mant.bits();
        let (top, shift) = if nbits > 62 {
            let s = nbits - 62;
            (floor_shr(&self.mant, s), s as i64)
        } else {
            (self.mant.clone(), 0)
        };
        let t: f64 = i64::try_from(&top).map(|v| v as f64).unwrap_or(0.0);
        t * 2f64.powi((self.exp + shift) as i32)
    }

    /// Exact decimal representation. Dyadic rationals always terminate.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let mag = self.mant.abs();
        let s = if self.exp >= 0 {
            let v: BigInt = mag << self.exp as u64;
            v.to_string()
        } else {
            let k = (-self.exp) as u64;
            let scaled: BigInt = mag * BigInt::from(5u32).pow(k as u32);
            let digits = scaled.to_string();
            if digits.len() as u64 > k {
                let split = digits.len() - k as usize;
                format!("{}.{}", &digits[..split], &digits[split..])
            } else {
                let pad = k as usize - digits.len();
                format!("0.{}{}", "0".repeat(pad), digits)
            }
        };
        if neg {
            format!("-{}", s)
        } else {
            s
        }
    }

    /// Parse an exact decimal string. Fails when the value is not a dyadic
    /// rational (i.e. the reduced denominator has a factor of 5).
    pub fn from_decimal_str(s: &str) -> Result<Dyadic, DyadicParseError> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(DyadicParseError::Empty);
        }
        let digits: String = format!("{}{}", int_part, frac_part);
        let num: BigInt = digits.parse().map_err(|_| DyadicParseError::BadDigit)?;
        let k = frac_part.len() as u32;
        // value = num / 10^k = num / (2^k 5^k); must cancel the 5^k.
        let five_k = BigInt::from(5u32).pow(k);
        let (q, r) = num_integer::Integer::div_rem(&num, &five_k);
        if !r.is_zero() {
            return Err(DyadicParseError::NotDyadic);
        }
        let val = Dyadic::new(q, -(k as i64));
        Ok(if neg { val.neg() } else { val })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DyadicParseError {
    #[error("empty decimal string")]
    Empty,
    #[error("invalid decimal digit")]
    BadDigit,
    #[error("value is not a dyadic rational")]
    NotDyadic,
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mant.sign(), other.mant.sign()) {
            (Sign::Minus, Sign::NoSign) | (Sign::Minus, Sign::Plus) | (Sign::NoSign, Sign::Plus) => {
                return Ordering::Less
            }
            (Sign::Plus, Sign::NoSign) | (Sign::Plus, Sign::Minus) | (Sign::NoSign, Sign::Minus) => {
                return Ordering::Greater
            }
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        match self.sub(other).mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

/// Shift right rounding toward negative infinity.
fn floor_shr(v: &BigInt, shift: u64) -> BigInt {
    if v.is_negative() {
        // BigInt >> truncates toward zero for the magnitude representation;
        // compute floor explicitly.
        let mask_bits = shift;
        let shifted = -((-v) >> mask_bits);
        let back: BigInt = &shifted << mask_bits;
        if &back == v {
            shifted
        } else {
            shifted - 1
        }
    } else {
        v >> shift
    }
}

/// Integer division rounding toward negative infinity.
fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::div_floor(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalization_strips_trailing_zeros() {
        let x = d(8, 0);
        assert_eq!(x.mant(), &BigInt::from(1));
        assert_eq!(x.exp(), 3);
    }

    #[test]
    fn exact_ring_ops() {
        let a = d(3, -1); // 1.5
        let b = d(5, -2); // 1.25
        assert_eq!(a.add(&b), d(11, -2));
        assert_eq!(a.sub(&b), d(1, -2));
        assert_eq!(a.mul(&b), d(15, -3));
    }

    #[test]
    fn round_directions() {
        let x = d(0b10101, 0); // 21
        assert_eq!(x.round(3, Dir::Down), d(20, 0));
        assert_eq!(x.round(3, Dir::Up), d(24, 0)); // ceil to 3 mantissa bits
        let y = d(-0b10101, 0);
        assert_eq!(y.round(3, Dir::Down), d(-24, 0));
        assert_eq!(y.round(3, Dir::Up), d(-20, 0));
    }

    #[test]
    fn directed_division_brackets_quotient() {
        let a = d(1, 0);
        let b = d(3, 0);
        let lo = a.div(&b, 30, Dir::Down);
        let hi = a.div(&b, 30, Dir::Up);
        assert!(lo < hi);
        // 3*lo <= 1 <= 3*hi exactly
        assert!(lo.mul(&b) <= a);
        assert!(hi.mul(&b) >= a);
        assert!(hi.sub(&lo) < Dyadic::pow2(-25));
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        for x in [d(1, -4), d(-7, -10), d(3, 5), Dyadic::zero(), d(123456789, -20)] {
            let s = x.to_decimal_string();
            let back = Dyadic::from_decimal_str(&s).unwrap();
            assert_eq!(back, x, "failed for {}", s);
        }
        assert_eq!(
            Dyadic::from_decimal_str("0.1"),
            Err(DyadicParseError::NotDyadic)
        );
    }

    #[test]
    fn floor_and_round_int() {
        assert_eq!(d(-3, -1).floor_int(), BigInt::from(-2)); // -1.5
        assert_eq!(d(-3, -1).round_int(), BigInt::from(-1));
        assert_eq!(d(7, -1).round_int(), BigInt::from(4)); // 3.5 rounds up
        assert_eq!(d(5, -1).floor_int(), BigInt::from(2));
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(d(3, -1).to_f64(), 1.5);
        assert_eq!(d(-1, -2).to_f64(), -0.25);
        assert_eq!(Dyadic::pow2(-2000).to_f64(), 0.0);
    }
}

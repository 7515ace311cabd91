//! Interval arithmetic with dyadic endpoints and outward rounding.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dyadic::{Dir, Dyadic};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NumError {
    #[error("divisor interval straddles zero")]
    DivisorStraddlesZero,
    #[error("negative base with fractional power")]
    NegativeBaseFractionalPower,
    #[error("interval too wide: {0}")]
    IntervalTooWide(String),
    #[error("precision exhausted at {max_bits} bits: {context}")]
    PrecisionExhausted { max_bits: u32, context: String },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Controls precision escalation for certified comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub max_bits: u32,
    pub escalation_factor: u32,
}

impl PrecisionPolicy {
    pub fn new(start_bits: u32, max_bits: u32) -> Self {
        assert!(start_bits >= 32);
        assert!(max_bits >= start_bits);
        PrecisionPolicy { start_bits, max_bits, escalation_factor: 2 }
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start_bits: 64, max_bits: 1 << 14, escalation_factor: 2 }
    }
}

/// A closed interval `[lo, hi]` of dyadic rationals guaranteed to contain
/// the real value it stands for, together with the working precision used
/// to produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealEnclosure {
    lo: Dyadic,
    hi: Dyadic,
    bits: u32,
}

impl RealEnclosure {
    pub fn new(lo: Dyadic, hi: Dyadic, bits: u32) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        RealEnclosure { lo, hi, bits }
    }

    pub fn exact(v: Dyadic, bits: u32) -> Self {
        RealEnclosure { lo: v.clone(), hi: v, bits }
    }

    pub fn from_int(v: i64, bits: u32) -> Self {
        Self::exact(Dyadic::from_int(v), bits)
    }

    pub fn from_bigint(v: &BigInt, bits: u32) -> Self {
        Self::exact(Dyadic::from_bigint(v.clone()), bits)
    }

    /// Enclosure of the exact rational p/q.
    pub fn from_ratio(p: &BigInt, q: &BigInt, bits: u32) -> Self {
        assert!(!q.is_zero());
        let (p, q) = if q.is_negative() { (-p, -q) } else { (p.clone(), q.clone()) };
        let pd = Dyadic::from_bigint(p);
        let qd = Dyadic::from_bigint(q);
        RealEnclosure {
            lo: pd.div(&qd, bits, Dir::Down),
            hi: pd.div(&qd, bits, Dir::Up),
            bits,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_dyadic(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains(&self, other: &RealEnclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Certified strict order: true only when every point of `self` is
    /// below every point of `other`.
    pub fn definitely_lt(&self, other: &RealEnclosure) -> bool {
        self.hi < other.lo
    }

    pub fn definitely_gt(&self, other: &RealEnclosure) -> bool {
        self.lo > other.hi
    }

    /// True when `self <= other` holds for every pair of points.
    pub fn definitely_le(&self, other: &RealEnclosure) -> bool {
        self.hi <= other.lo
    }

    pub fn with_bits(&self, bits: u32) -> RealEnclosure {
        RealEnclosure {
            lo: self.lo.round(bits + 2, Dir::Down),
            hi: self.hi.round(bits + 2, Dir::Up),
            bits,
        }
    }

    fn out(lo: Dyadic, hi: Dyadic, bits: u32) -> RealEnclosure {
        RealEnclosure {
            lo: lo.round(bits + 2, Dir::Down),
            hi: hi.round(bits + 2, Dir::Up),
            bits,
        }
    }

    pub fn neg(&self) -> RealEnclosure {
        RealEnclosure { lo: self.hi.neg(), hi: self.lo.neg(), bits: self.bits }
    }

    pub fn abs(&self) -> RealEnclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            RealEnclosure { lo: Dyadic::zero(), hi: m, bits: self.bits }
        }
    }

    pub fn add(&self, other: &RealEnclosure) -> RealEnclosure {
        let bits = self.bits.max(other.bits);
        Self::out(self.lo.add(&other.lo), self.hi.add(&other.hi), bits)
    }

    pub fn sub(&self, other: &RealEnclosure) -> RealEnclosure {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RealEnclosure) -> RealEnclosure {
        let bits = self.bits.max(other.bits);
        let cands = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Self::out(lo, hi, bits)
    }

    pub fn mul_pow2(&self, k: i64) -> RealEnclosure {
        RealEnclosure {
            lo: self.lo.mul_pow2(k),
            hi: self.hi.mul_pow2(k),
            bits: self.bits,
        }
    }

    pub fn div(&self, other: &RealEnclosure) -> Result<RealEnclosure, NumError> {
        if other.contains_zero() {
            return Err(NumError::DivisorStraddlesZero);
        }
        let bits = self.bits.max(other.bits);
        let q = |a: &Dyadic, b: &Dyadic, dir: Dir| a.div(b, bits + 2, dir);
        let cands_lo = [
            q(&self.lo, &other.lo, Dir::Down),
            q(&self.lo, &other.hi, Dir::Down),
            q(&self.hi, &other.lo, Dir::Down),
            q(&self.hi, &other.hi, Dir::Down),
        ];
        let cands_hi = [
            q(&self.lo, &other.lo, Dir::Up),
            q(&self.lo, &other.hi, Dir::Up),
            q(&self.hi, &other.lo, Dir::Up),
            q(&self.hi, &other.hi, Dir::Up),
        ];
        let lo = cands_lo.iter().min().unwrap().clone();
        let hi = cands_hi.iter().max().unwrap().clone();
        Ok(Self::out(lo, hi, bits))
    }

    pub fn recip(&self) -> Result<RealEnclosure, NumError> {
        RealEnclosure::from_int(1, self.bits).div(self)
    }

    /// Integer power by repeated interval squaring.
    pub fn powi(&self, n: i64) -> Result<RealEnclosure, NumError> {
        if n == 0 {
            return Ok(RealEnclosure::from_int(1, self.bits));
        }
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut base = self.clone();
        let mut acc: Option<RealEnclosure> = None;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc.unwrap())
    }

    /// Enclosure of the distance to the nearest integer, valid for every
    /// point of `self`. Requires width < 1/4.
    pub fn nearest_int_dist(&self) -> Result<RealEnclosure, NumError> {
        let quarter = Dyadic::new(BigInt::from(1), -2);
        if self.width() >= quarter {
            return Err(NumError::IntervalTooWide(format!(
                "width {} >= 1/4",
                self.width()
            )));
        }
        let half = Dyadic::new(BigInt::from(1), -1);
        let n_lo = Dyadic::from_bigint(self.lo.round_int());
        let n_hi = Dyadic::from_bigint(self.hi.round_int());
        let (lo, hi) = if n_lo == n_hi {
            let a = self.lo.sub(&n_lo);
            let b = self.hi.sub(&n_lo);
            if !a.is_positive() && !b.is_negative() {
                (Dyadic::zero(), a.abs().max(b.abs()))
            } else {
                let (x, y) = (a.abs(), b.abs());
                (x.clone().min(y.clone()), x.max(y))
            }
        } else {
            // A half-integer lies inside; the max distance is exactly 1/2.
            let a = self.lo.sub(&n_lo).abs();
            let b = self.hi.sub(&n_hi).abs();
            (a.min(b), half.clone())
        };
        let hi = hi.min(half);
        Ok(RealEnclosure { lo, hi, bits: self.bits })
    }

    pub fn to_f64_mid(&self) -> f64 {
        self.midpoint().to_f64()
    }
}

/// Outcome of a certified comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certified {
    Less,
    Greater,
    /// The operands could not be separated at the maximum precision; they
    /// are equal or indistinguishable.
    EqualOrInconclusive,
}

/// Compare two quantities, recomputing them at escalating precision via
/// `refiner` until the enclosures separate or `policy.max_bits` is hit.
pub fn certified_compare<F>(
    a: &RealEnclosure,
    b: &RealEnclosure,
    policy: &PrecisionPolicy,
    mut refiner: F,
) -> Certified
where
    F: FnMut(u32) -> (RealEnclosure, RealEnclosure),
{
    if a.definitely_lt(b) {
        return Certified::Less;
    }
    if a.definitely_gt(b) {
        return Certified::Greater;
    }
    let mut bits = policy.start_bits;
    loop {
        let (ra, rb) = refiner(bits);
        if ra.definitely_lt(&rb) {
            return Certified::Less;
        }
        if ra.definitely_gt(&rb) {
            return Certified::Greater;
        }
        if bits >= policy.max_bits {
            return Certified::EqualOrInconclusive;
        }
        bits = (bits.saturating_mul(policy.escalation_factor.max(2))).min(policy.max_bits);
    }
}

#[derive(Serialize, Deserialize)]
struct EnclosureRepr {
    lo: String,
    hi: String,
    bits: u32,
}

impl Serialize for RealEnclosure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EnclosureRepr {
            lo: self.lo.to_decimal_string(),
            hi: self.hi.to_decimal_string(),
            bits: self.bits,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealEnclosure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = EnclosureRepr::deserialize(deserializer)?;
        let lo = Dyadic::from_decimal_str(&repr.lo).map_err(D::Error::custom)?;
        let hi = Dyadic::from_decimal_str(&repr.hi).map_err(D::Error::custom)?;
        if lo > hi {
            return Err(D::Error::custom("enclosure endpoints out of order"));
        }
        Ok(RealEnclosure { lo, hi, bits: repr.bits })
    }
}

//! Exact integer-lattice primitives on ℤ² and ℤ³: primitivity, completeness
//! of rank-2 sublattices, basis completion with projection control,
//! covolumes, and the angle/sign tests of conditions (i), (iv), (v).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{sin, sqrt_int, BigRational, NumError, RealEnclosure};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("rationally dependent input vectors")]
    DependentInput,
    #[error("pair does not generate a complete sublattice")]
    IncompletePair,
    #[error("no basis completion found inside the requested box")]
    NoVectorInBox,
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Serialize big integers as decimal strings so state files are portable
/// and exact.
pub mod serde_bigint {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        BigInt::from_str(&raw).map_err(|e| D::Error::custom(format!("bad integer: {e}")))
    }
}

/// A point of ℤ³, ordered (m₀, m₁, m₂); m₀ multiplies the 1 of (1, α₁, α₂).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntVec3 {
    #[serde(with = "serde_bigint")]
    pub m0: BigInt,
    #[serde(with = "serde_bigint")]
    pub m1: BigInt,
    #[serde(with = "serde_bigint")]
    pub m2: BigInt,
}

/// The "cutten" projection (m₁, m₂) of a construction vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntVec2 {
    #[serde(with = "serde_bigint")]
    pub m1: BigInt,
    #[serde(with = "serde_bigint")]
    pub m2: BigInt,
}

impl IntVec3 {
    pub fn new(m0: i64, m1: i64, m2: i64) -> Self {
        IntVec3 {
            m0: BigInt::from(m0),
            m1: BigInt::from(m1),
            m2: BigInt::from(m2),
        }
    }

    pub fn from_bigints(m0: BigInt, m1: BigInt, m2: BigInt) -> Self {
        IntVec3 { m0, m1, m2 }
    }

    pub fn is_zero(&self) -> bool {
        self.m0.is_zero() && self.m1.is_zero() && self.m2.is_zero()
    }

    pub fn cutten(&self) -> IntVec2 {
        IntVec2 {
            m1: self.m1.clone(),
            m2: self.m2.clone(),
        }
    }

    pub fn norm_sq(&self) -> BigInt {
        &self.m0 * &self.m0 + &self.m1 * &self.m1 + &self.m2 * &self.m2
    }

    pub fn dot(&self, other: &IntVec3) -> BigInt {
        &self.m0 * &other.m0 + &self.m1 * &other.m1 + &self.m2 * &other.m2
    }

    pub fn cross(&self, other: &IntVec3) -> IntVec3 {
        IntVec3 {
            m0: &self.m1 * &other.m2 - &self.m2 * &other.m1,
            m1: &self.m2 * &other.m0 - &self.m0 * &other.m2,
            m2: &self.m0 * &other.m1 - &self.m1 * &other.m0,
        }
    }

    pub fn add(&self, other: &IntVec3) -> IntVec3 {
        IntVec3 {
            m0: &self.m0 + &other.m0,
            m1: &self.m1 + &other.m1,
            m2: &self.m2 + &other.m2,
        }
    }

    pub fn sub(&self, other: &IntVec3) -> IntVec3 {
        IntVec3 {
            m0: &self.m0 - &other.m0,
            m1: &self.m1 - &other.m1,
            m2: &self.m2 - &other.m2,
        }
    }

    pub fn scale(&self, k: &BigInt) -> IntVec3 {
        IntVec3 {
            m0: k * &self.m0,
            m1: k * &self.m1,
            m2: k * &self.m2,
        }
    }

    pub fn neg(&self) -> IntVec3 {
        IntVec3 {
            m0: -&self.m0,
            m1: -&self.m1,
            m2: -&self.m2,
        }
    }
}

impl IntVec2 {
    pub fn new(m1: i64, m2: i64) -> Self {
        IntVec2 {
            m1: BigInt::from(m1),
            m2: BigInt::from(m2),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m1.is_zero() && self.m2.is_zero()
    }

    pub fn norm_sq(&self) -> BigInt {
        &self.m1 * &self.m1 + &self.m2 * &self.m2
    }

    /// Certified enclosure of the Euclidean norm.
    pub fn norm(&self, bits: u32) -> RealEnclosure {
        sqrt_int(&self.norm_sq(), bits)
    }
}

/// A rank-2 sublattice of ℤ³ given by an ordered basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sublattice2in3 {
    pub basis_a: IntVec3,
    pub basis_b: IntVec3,
}

impl Sublattice2in3 {
    pub fn new(basis_a: IntVec3, basis_b: IntVec3) -> Result<Self, LatticeError> {
        if basis_a.cross(&basis_b).is_zero() {
            return Err(LatticeError::DependentInput);
        }
        Ok(Sublattice2in3 { basis_a, basis_b })
    }
}

/// det(n, a, b) by cofactor expansion; equals n · (a × b).
pub fn det3(n: &IntVec3, a: &IntVec3, b: &IntVec3) -> BigInt {
    n.dot(&a.cross(b))
}

/// True iff the coordinates of `v` have gcd 1.
pub fn is_primitive(v: &IntVec3) -> Result<bool, LatticeError> {
    if v.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    let g = v.m0.gcd(&v.m1).gcd(&v.m2);
    Ok(g.is_one())
}

/// True iff ℤ³ ∩ span(a, b) = ⟨a, b⟩_ℤ, i.e. a × b is primitive.
pub fn is_complete_pair(a: &IntVec3, b: &IntVec3) -> Result<bool, LatticeError> {
    let c = a.cross(b);
    if c.is_zero() {
        return Err(LatticeError::DependentInput);
    }
    is_primitive(&c)
}

/// Extended gcd producing x·c0 + y·c1 + z·c2 = gcd for three integers.
fn egcd3(c0: &BigInt, c1: &BigInt, c2: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    let e1 = c0.extended_gcd(c1); // e1.gcd = x*c0 + y*c1
    let e2 = e1.gcd.extended_gcd(c2); // e2.gcd = u*g1 + z*c2
    let x = &e2.x * &e1.x;
    let y = &e2.x * &e1.y;
    let z = e2.y.clone();
    (e2.gcd, x, y, z)
}

/// Complete the pair (a, b) to a basis of ℤ³ with max(|n₁|, |n₂|) ≤ bound.
///
/// The completion is found by solving n · (a × b) = ±1 with an extended
/// gcd and then translating n by ⟨a, b⟩_ℤ so its (n₁, n₂) projection lands
/// near the origin of the projected lattice.
pub fn complete_to_basis(
    a: &IntVec3,
    b: &IntVec3,
    bound: &BigInt,
) -> Result<IntVec3, LatticeError> {
    let center1 = -bound / 2u32;
    let center2 = center1.clone();
    let n = complete_to_basis_near(a, b, &center1, &center2)?;
    if n.m1.abs() <= *bound && n.m2.abs() <= *bound {
        Ok(n)
    } else {
        Err(LatticeError::NoVectorInBox)
    }
}

/// Complete (a, b) to a basis of ℤ³ with the projection (n₁, n₂) as close
/// to the target point (t₁, t₂) as the projected lattice ⟨ā, b̄⟩ allows.
/// Shifting by lattice vectors preserves |det| = 1, so the projection can
/// be placed in any fundamental cell around the target.
pub fn complete_to_basis_near(
    a: &IntVec3,
    b: &IntVec3,
    t1: &BigInt,
    t2: &BigInt,
) -> Result<IntVec3, LatticeError> {
    if !is_complete_pair(a, b)? {
        return Err(LatticeError::IncompletePair);
    }
    let c = a.cross(b);
    let (g, x, y, z) = egcd3(&c.m0, &c.m1, &c.m2);
    debug_assert!(g.abs().is_one());
    let sign = if g.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut n = IntVec3 {
        m0: &sign * &x,
        m1: &sign * &y,
        m2: &sign * &z,
    };
    debug_assert!(det3(&n, a, b).abs().is_one());

    // Reduce the projection toward the target with rational least squares
    // on the projected basis, then polish with exact single-vector steps.
    let d1 = &n.m1 - t1;
    let d2 = &n.m2 - t2;
    let gram_aa = &a.m1 * &a.m1 + &a.m2 * &a.m2;
    let gram_bb = &b.m1 * &b.m1 + &b.m2 * &b.m2;
    let gram_ab = &a.m1 * &b.m1 + &a.m2 * &b.m2;
    let det = &gram_aa * &gram_bb - &gram_ab * &gram_ab;
    if !det.is_zero() {
        let rhs_a = &a.m1 * &d1 + &a.m2 * &d2;
        let rhs_b = &b.m1 * &d1 + &b.m2 * &d2;
        let p = rounded_ratio(&(&gram_bb * &rhs_a - &gram_ab * &rhs_b), &det);
        let q = rounded_ratio(&(&gram_aa * &rhs_b - &gram_ab * &rhs_a), &det);
        n = n.sub(&a.scale(&p)).sub(&b.scale(&q));
    }
    // Polish with exact coordinate descent: against each basis vector in
    // turn subtract the optimal integer multiple (Gauss-style reduction).
    // Unit-step greedy walks are linear in the residual and blow up for
    // anisotropic projected bases; optimal steps converge geometrically.
    for _ in 0..256 {
        let mut moved = false;
        for v in [a, b] {
            let gram = &v.m1 * &v.m1 + &v.m2 * &v.m2;
            if gram.is_zero() {
                continue;
            }
            let e1 = &n.m1 - t1;
            let e2 = &n.m2 - t2;
            let k = rounded_ratio(&(&v.m1 * &e1 + &v.m2 * &e2), &gram);
            if !k.is_zero() {
                n = n.sub(&v.scale(&k));
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    debug_assert!(det3(&n, a, b).abs().is_one());
    Ok(n)
}

fn rounded_ratio(num: &BigInt, den: &BigInt) -> BigInt {
    // round(num/den) with ties toward +inf, exact in integers
    let den_pos = den.abs();
    let num_adj = if den.is_negative() { -num } else { num.clone() };
    (num_adj * BigInt::from(2) + &den_pos).div_floor(&(&den_pos * BigInt::from(2)))
}

/// |u₁v₂ − u₂v₁|; zero signals rational dependence.
pub fn covolume2(u: &IntVec2, v: &IntVec2) -> BigInt {
    (&u.m1 * &v.m2 - &u.m2 * &v.m1).abs()
}

/// True iff the acute angle between the lines spanned by u and v is at
/// least `threshold` (radians, in (0, 3/2]). Decided exactly by comparing
/// the rational sin² of the angle against a certified enclosure of
/// sin²(threshold), escalating precision on ties.
pub fn angle_at_least(
    u: &IntVec2,
    v: &IntVec2,
    threshold: &RealEnclosure,
) -> Result<bool, LatticeError> {
    if u.is_zero() || v.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    if !threshold.lo().is_positive()
        || *threshold.hi() > crate::numerics::Dyadic::new(BigInt::from(3), -1)
    {
        return Err(NumError::Domain("angle threshold must lie in (0, 3/2]".into()).into());
    }
    let cross = &u.m1 * &v.m2 - &u.m2 * &v.m1;
    let sin2 = BigRational::new(&cross * &cross, u.norm_sq() * v.norm_sq());

    let mut bits = threshold.bits().max(64);
    let max_bits = 1u32 << 14;
    loop {
        let s = sin(&threshold.with_bits(bits))?;
        let s2 = s.mul(&s);
        let cmp_lo = crate::numerics::dyadic_cmp_rational(s2.lo(), &sin2);
        let cmp_hi = crate::numerics::dyadic_cmp_rational(s2.hi(), &sin2);
        if cmp_hi == std::cmp::Ordering::Less {
            return Ok(true); // sin²(angle) > sin²(threshold)
        }
        if cmp_lo == std::cmp::Ordering::Greater {
            return Ok(false);
        }
        if cmp_lo == std::cmp::Ordering::Equal && cmp_hi == std::cmp::Ordering::Equal {
            // exact tie: the angle equals the threshold; ≥ holds
            return Ok(true);
        }
        if bits >= max_bits {
            return Err(NumError::PrecisionExhausted {
                max_bits,
                context: "angle comparison at threshold".into(),
            }
            .into());
        }
        bits *= 2;
    }
}

/// True iff m₁ · m₂ < 0 strictly.
pub fn opposite_signs(u: &IntVec2) -> bool {
    (&u.m1 * &u.m2).is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&IntVec3::new(1, 1, -1)).unwrap());
        assert!(!is_primitive(&IntVec3::new(2, 4, 6)).unwrap());
        assert!(!is_primitive(&IntVec3::new(0, 0, 5)).unwrap());
        assert!(matches!(
            is_primitive(&IntVec3::new(0, 0, 0)),
            Err(LatticeError::ZeroVector)
        ));
    }

    #[test]
    fn completeness_examples() {
        assert!(is_complete_pair(&IntVec3::new(1, 0, 0), &IntVec3::new(0, 1, 0)).unwrap());
        assert!(!is_complete_pair(&IntVec3::new(2, 0, 0), &IntVec3::new(0, 2, 0)).unwrap());
        let a = IntVec3::new(1, 1, -1);
        let b = IntVec3::new(0, 1, 1);
        assert_eq!(a.cross(&b), IntVec3::new(2, -1, 1));
        assert!(is_complete_pair(&a, &b).unwrap());
        assert!(matches!(
            is_complete_pair(&IntVec3::new(1, 2, 3), &IntVec3::new(2, 4, 6)),
            Err(LatticeError::DependentInput)
        ));
    }

    /// Membership of p in ⟨a,b⟩_ℤ by exact rational solve.
    fn in_lattice(p: &IntVec3, a: &IntVec3, b: &IntVec3) -> bool {
        // p = x a + y b; use a pair of coordinates with nonzero minor
        let c = a.cross(b);
        let pairs = [
            ((&a.m1, &a.m2), (&b.m1, &b.m2), (&p.m1, &p.m2), &c.m0),
            ((&a.m2, &a.m0), (&b.m2, &b.m0), (&p.m2, &p.m0), &c.m1),
            ((&a.m0, &a.m1), (&b.m0, &b.m1), (&p.m0, &p.m1), &c.m2),
        ];
        for ((a1, a2), (b1, b2), (p1, p2), minor) in pairs {
            if minor.is_zero() {
                continue;
            }
            // Cramer: x = (p1 b2 - p2 b1)/minor, y = (a1 p2 - a2 p1)/minor
            let xn = p1 * b2 - p2 * b1;
            let yn = a1 * p2 - a2 * p1;
            if !(&xn % minor).is_zero() || !(&yn % minor).is_zero() {
                return false;
            }
            let x = &xn / minor;
            let y = &yn / minor;
            return a.scale(&x).add(&b.scale(&y)) == *p;
        }
        unreachable!("independent vectors have a nonzero minor");
    }

    /// Brute-force completeness oracle: every ℤ³ point of the rational span
    /// inside a box must belong to the sublattice.
    fn complete_oracle(a: &IntVec3, b: &IntVec3, extent: i64) -> bool {
        let c = a.cross(b);
        for x in -extent..=extent {
            for y in -extent..=extent {
                for z in -extent..=extent {
                    let p = IntVec3::new(x, y, z);
                    if p.is_zero() {
                        continue;
                    }
                    if !p.dot(&c).is_zero() {
                        continue; // not in the span
                    }
                    if !in_lattice(&p, a, b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn completeness_matches_bruteforce_oracle() {
        let cases = [
            (IntVec3::new(1, 1, -1), IntVec3::new(0, 1, 1)),
            (IntVec3::new(2, 0, 0), IntVec3::new(0, 2, 0)),
            (IntVec3::new(1, 2, 3), IntVec3::new(0, 1, 2)),
            (IntVec3::new(2, 1, 0), IntVec3::new(1, 0, 3)),
            (IntVec3::new(3, 1, 2), IntVec3::new(1, 1, 0)),
            (IntVec3::new(2, 2, 0), IntVec3::new(0, 2, 2)),
            (IntVec3::new(4, 2, 1), IntVec3::new(2, 1, 1)),
        ];
        for (a, b) in cases {
            if a.cross(&b).is_zero() {
                continue;
            }
            assert_eq!(
                is_complete_pair(&a, &b).unwrap(),
                complete_oracle(&a, &b, 8),
                "disagreement at a={a:?} b={b:?}"
            );
        }
    }

    #[test]
    fn basis_completion_examples() {
        let n = complete_to_basis(
            &IntVec3::new(1, 0, 0),
            &IntVec3::new(0, 1, 0),
            &BigInt::from(1),
        )
        .unwrap();
        assert!(det3(&n, &IntVec3::new(1, 0, 0), &IntVec3::new(0, 1, 0))
            .abs()
            .is_one());
        assert!(n.m1.abs() <= BigInt::one() && n.m2.abs() <= BigInt::one());

        let a = IntVec3::new(1, 1, -1);
        let b = IntVec3::new(0, 1, 1);
        let n = complete_to_basis(&a, &b, &BigInt::from(2)).unwrap();
        assert!(det3(&n, &a, &b).abs().is_one());
        assert!(n.m1.abs() <= BigInt::from(2) && n.m2.abs() <= BigInt::from(2));

        assert!(matches!(
            complete_to_basis(&IntVec3::new(2, 0, 0), &IntVec3::new(0, 2, 0), &BigInt::from(5)),
            Err(LatticeError::IncompletePair)
        ));
    }

    #[test]
    fn basis_completion_targets_box() {
        let a = IntVec3::new(1, 3, -2);
        let b = IntVec3::new(0, 2, 5);
        for (t1, t2) in [(0i64, 0i64), (100, -40), (-7, 3), (1000, 1000)] {
            let n =
                complete_to_basis_near(&a, &b, &BigInt::from(t1), &BigInt::from(t2)).unwrap();
            assert!(det3(&n, &a, &b).abs().is_one());
            // the projection lands within a fundamental-cell diameter of the target
            let d1 = &n.m1 - BigInt::from(t1);
            let d2 = &n.m2 - BigInt::from(t2);
            let dist2 = &d1 * &d1 + &d2 * &d2;
            let cell = a.cutten().norm_sq() + b.cutten().norm_sq();
            assert!(dist2 <= cell, "dist² {dist2} vs cell bound {cell}");
        }
    }

    #[test]
    fn covolume_examples() {
        assert_eq!(
            covolume2(&IntVec2::new(1, -1), &IntVec2::new(1, 1)),
            BigInt::from(2)
        );
        assert_eq!(
            covolume2(&IntVec2::new(1, 0), &IntVec2::new(0, 1)),
            BigInt::one()
        );
        assert_eq!(
            covolume2(&IntVec2::new(3, 6), &IntVec2::new(1, 2)),
            BigInt::zero()
        );
    }

    fn quarter() -> RealEnclosure {
        RealEnclosure::exact(crate::numerics::Dyadic::pow2(-2), 96)
    }

    #[test]
    fn angle_examples() {
        // π/4 between (1,−1) and (1,0)
        assert!(angle_at_least(&IntVec2::new(1, -1), &IntVec2::new(1, 0), &quarter()).unwrap());
        // nearly parallel: sin² = 1/10001 < sin²(1/4) ≈ 0.06120
        assert!(
            !angle_at_least(&IntVec2::new(100, -1), &IntVec2::new(1, 0), &quarter()).unwrap()
        );
        // orthogonal
        assert!(angle_at_least(&IntVec2::new(1, -1), &IntVec2::new(1, 1), &quarter()).unwrap());
        // zero vector errors
        assert!(matches!(
            angle_at_least(&IntVec2::new(0, 0), &IntVec2::new(1, 0), &quarter()),
            Err(LatticeError::ZeroVector)
        ));
    }

    #[test]
    fn angle_sin2_value_frozen() {
        // sin(1/4) = 0.24740395925452292960... so sin² ≈ 0.0612087; the pair
        // below sits just on each side of the threshold
        // sin² for (4,1) vs (1,0): 1/17 ≈ 0.0588 < 0.06120 → angle < 1/4
        assert!(!angle_at_least(&IntVec2::new(4, 1), &IntVec2::new(1, 0), &quarter()).unwrap());
        // sin² for (39,10) vs (1,0): 100/1621 ≈ 0.06169 > 0.06120 → angle ≥ 1/4
        assert!(angle_at_least(&IntVec2::new(39, 10), &IntVec2::new(1, 0), &quarter()).unwrap());
    }

    #[test]
    fn sign_examples() {
        assert!(opposite_signs(&IntVec2::new(1, -1)));
        assert!(!opposite_signs(&IntVec2::new(2, 3)));
        assert!(!opposite_signs(&IntVec2::new(0, 5)));
    }

    proptest! {
        /// complete_to_basis_near output always has |det| = 1 for complete pairs.
        #[test]
        fn completion_det_is_unit(
            a0 in -6i64..6, a1 in -6i64..6, a2 in -6i64..6,
            b0 in -6i64..6, b1 in -6i64..6, b2 in -6i64..6,
            t1 in -50i64..50, t2 in -50i64..50,
        ) {
            let a = IntVec3::new(a0, a1, a2);
            let b = IntVec3::new(b0, b1, b2);
            prop_assume!(!a.cross(&b).is_zero());
            prop_assume!(is_complete_pair(&a, &b).unwrap());
            let n = complete_to_basis_near(&a, &b, &BigInt::from(t1), &BigInt::from(t2)).unwrap();
            prop_assert!(det3(&n, &a, &b).abs().is_one());
        }

        /// covolume2 is invariant under unimodular changes of basis.
        #[test]
        fn covolume_unimodular_invariance(
            u1 in -20i64..20, u2 in -20i64..20,
            v1 in -20i64..20, v2 in -20i64..20,
            p in -5i64..5, q in -5i64..5,
        ) {
            let u = IntVec2::new(u1, u2);
            let v = IntVec2::new(v1, v2);
            // (u, v) -> (u + p v, v) and (u, v + q u): both unimodular
            let u_shift = IntVec2 { m1: &u.m1 + BigInt::from(p) * &v.m1, m2: &u.m2 + BigInt::from(p) * &v.m2 };
            let v_shift = IntVec2 { m1: &v.m1 + BigInt::from(q) * &u.m1, m2: &v.m2 + BigInt::from(q) * &u.m2 };
            prop_assert_eq!(covolume2(&u_shift, &v), covolume2(&u, &v));
            prop_assert_eq!(covolume2(&u, &v_shift), covolume2(&u, &v));
            prop_assert_eq!(covolume2(&v, &u), covolume2(&u, &v));
        }

        /// angle_at_least is symmetric and invariant under negating either side.
        #[test]
        fn angle_symmetry(
            u1 in -30i64..30, u2 in -30i64..30,
            v1 in -30i64..30, v2 in -30i64..30,
        ) {
            let u = IntVec2::new(u1, u2);
            let v = IntVec2::new(v1, v2);
            prop_assume!(!u.is_zero() && !v.is_zero());
            let t = quarter();
            let base = angle_at_least(&u, &v, &t).unwrap();
            prop_assert_eq!(angle_at_least(&v, &u, &t).unwrap(), base);
            let nu = IntVec2 { m1: -&u.m1, m2: -&u.m2 };
            let nv = IntVec2 { m1: -&v.m1, m2: -&v.m2 };
            prop_assert_eq!(angle_at_least(&nu, &v, &t).unwrap(), base);
            prop_assert_eq!(angle_at_least(&u, &nv, &t).unwrap(), base);
        }

        /// Completeness test agrees with the brute-force span oracle.
        #[test]
        fn completeness_oracle_agreement(
            a0 in -4i64..4, a1 in -4i64..4, a2 in -4i64..4,
            b0 in -4i64..4, b1 in -4i64..4, b2 in -4i64..4,
        ) {
            let a = IntVec3::new(a0, a1, a2);
            let b = IntVec3::new(b0, b1, b2);
            prop_assume!(!a.cross(&b).is_zero());
            prop_assert_eq!(is_complete_pair(&a, &b).unwrap(), complete_oracle(&a, &b, 6));
        }
    }
}

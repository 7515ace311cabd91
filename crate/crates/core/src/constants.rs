//! The algebraic constants of the construction: the quartic root σ, the
//! derived exponents τ and ω, the golden ratio φ, and the auxiliary
//! functions g(γ) and C(Γ, γ), all with certified enclosures.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::numerics::{
    sqrt_int, BigRational, Dyadic, NumError, RealEnclosure,
};

/// σ, τ = (1+σ²)/(2σ), ω = τ+1, φ = (1+√5)/2 and the gap t = στ − ω.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicConstants {
    pub sigma: RealEnclosure,
    pub tau: RealEnclosure,
    pub omega: RealEnclosure,
    pub phi: RealEnclosure,
    /// στ − ω, strictly positive; drives the layer index growth.
    pub t_gap: RealEnclosure,
}

/// The quartic x⁴ − 2x² − 4x + 1 whose largest real root is σ, evaluated
/// exactly at a dyadic point.
pub fn quartic_at(x: &Dyadic) -> Dyadic {
    let x2 = x.mul(x);
    let x4 = x2.mul(&x2);
    x4.sub(&x2.mul_pow2(1))
        .sub(&x.mul(&Dyadic::from_int(4)))
        .add(&Dyadic::one())
}

/// Isolate the largest real root of the quartic by exact sign bisection on
/// [1, 2]. The returned enclosure carries a sign-change certificate:
/// the quartic is negative at `lo` and positive at `hi`, exactly.
pub fn solve_sigma(bits: u32) -> RealEnclosure {
    assert!(bits >= 32);
    let mut lo = Dyadic::from_int(1); // P(1) = -4 < 0
    let mut hi = Dyadic::from_int(2); // P(2) = 1 > 0
    for _ in 0..(bits + 4) {
        let mid = lo.add(&hi).mul_pow2(-1);
        let v = quartic_at(&mid);
        if v.is_negative() {
            lo = mid;
        } else if v.is_positive() {
            hi = mid;
        } else {
            // exact dyadic root; impossible for this quartic but handled
            lo = mid.clone();
            hi = mid;
            break;
        }
    }
    RealEnclosure::new(lo, hi, bits)
}

/// Exact certificate that the quartic has no root above the returned σ
/// enclosure: a Sturm-sequence root count on (hi(σ), 16] equal to zero.
pub fn no_root_above(sigma: &RealEnclosure) -> bool {
    let p = vec![
        BigRational::one(),                               // 1
        BigRational::from_integer(BigInt::from(-4)),      // -4x
        BigRational::from_integer(BigInt::from(-2)),      // -2x^2
        BigRational::zero(),                              // 0x^3
        BigRational::one(),                               // x^4
    ];
    let a = dyadic_to_rational(sigma.hi());
    let b = BigRational::from_integer(BigInt::from(16));
    sturm_root_count(&p, &a, &b) == 0
}

fn dyadic_to_rational(d: &Dyadic) -> BigRational {
    if d.exp() >= 0 {
        BigRational::from_integer(d.mant() << d.exp() as u64)
    } else {
        BigRational::new(d.mant().clone(), BigInt::one() << (-d.exp()) as u64)
    }
}

fn poly_eval(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = &acc * x + c;
    }
    acc
}

fn poly_derivative(p: &[BigRational]) -> Vec<BigRational> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn poly_rem(num: &[BigRational], den: &[BigRational]) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = num.to_vec();
    let dd = den.len() - 1;
    let lead = den.last().unwrap();
    while r.len() - 1 >= dd && r.iter().any(|c| !c.is_zero()) {
        while r.last().map(|c| c.is_zero()).unwrap_or(false) && r.len() > 1 {
            r.pop();
        }
        if r.len() - 1 < dd {
            break;
        }
        let shift = r.len() - 1 - dd;
        let factor = r.last().unwrap() / lead;
        for (i, c) in den.iter().enumerate() {
            let idx = i + shift;
            let delta = &factor * c;
            r[idx] = &r[idx] - &delta;
        }
        while r.last().map(|c| c.is_zero()).unwrap_or(false) && r.len() > 1 {
            r.pop();
        }
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    r
}

/// Number of distinct real roots of `p` in the half-open interval (a, b].
fn sturm_root_count(p: &[BigRational], a: &BigRational, b: &BigRational) -> usize {
    let mut chain: Vec<Vec<BigRational>> = vec![p.to_vec(), poly_derivative(p)];
    loop {
        let n = chain.len();
        let r = poly_rem(&chain[n - 2], &chain[n - 1]);
        if r.iter().all(|c| c.is_zero()) {
            break;
        }
        let neg: Vec<BigRational> = r.iter().map(|c| -c).collect();
        if neg.len() == 1 {
            chain.push(neg);
            break;
        }
        chain.push(neg);
    }
    let variations = |x: &BigRational| {
        let signs: Vec<i8> = chain
            .iter()
            .map(|q| {
                let v = poly_eval(q, x);
                if v.is_zero() {
                    0
                } else if v.is_negative() {
                    -1
                } else {
                    1
                }
            })
            .filter(|s| *s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    variations(a) - variations(b)
}

/// Enclosure of φ = (1 + √5)/2.
pub fn golden_ratio(bits: u32) -> RealEnclosure {
    let sqrt5 = sqrt_int(&BigInt::from(5), bits + 8);
    sqrt5
        .add(&RealEnclosure::from_int(1, bits + 8))
        .mul_pow2(-1)
        .with_bits(bits)
}

impl AlgebraicConstants {
    /// Compute all constants at the requested precision and certify the
    /// identities the later inequality chains rely on:
    /// στ − 1 > τ strictly, τ + 1/(στ−1) = σ within interval width, and
    /// στ − ω > 0 strictly.
    pub fn derive(bits: u32) -> Result<AlgebraicConstants, NumError> {
        assert!(bits >= 64);
        let mut wp = bits + 32;
        let max_wp = (bits + 32) * 16;
        loop {
            let c = Self::compute_raw(wp, bits);
            if c.certificates_hold(bits) {
                return Ok(c);
            }
            if wp >= max_wp {
                return Err(NumError::PrecisionExhausted {
                    max_bits: max_wp,
                    context: "constant identity certificates".into(),
                });
            }
            wp *= 2;
        }
    }

    fn compute_raw(wp: u32, bits: u32) -> AlgebraicConstants {
        let sigma = solve_sigma(wp);
        let one = RealEnclosure::from_int(1, wp);
        let tau = one
            .add(&sigma.mul(&sigma))
            .div(&sigma.mul_pow2(1))
            .expect("sigma > 0");
        let omega = tau.add(&one);
        let phi = golden_ratio(wp);
        let t_gap = sigma.mul(&tau).sub(&omega);
        AlgebraicConstants {
            sigma: sigma.with_bits(bits.max(wp)),
            tau,
            omega,
            phi,
            t_gap,
        }
    }

    fn certificates_hold(&self, bits: u32) -> bool {
        let one = RealEnclosure::from_int(1, self.sigma.bits());
        let st_minus_1 = self.st_minus_1();
        // (a) στ − 1 > τ
        if !st_minus_1.definitely_gt(&self.tau) {
            return false;
        }
        // (b) τ + 1/(στ−1) = σ within 2^(−bits+8)
        let lhs = match st_minus_1.div(&one) {
            Ok(_) => self
                .tau
                .add(&one.div(&st_minus_1).expect("στ−1 > τ > 1")),
            Err(_) => return false,
        };
        let diff = lhs.sub(&self.sigma).abs();
        if *diff.hi() > Dyadic::pow2(-(bits as i64) + 8) {
            return false;
        }
        // (c) στ − ω > 0
        if !self.t_gap.lo().is_positive() {
            return false;
        }
        // (d) φ² = φ + 1 within width
        let d = self.phi.mul(&self.phi).sub(&self.phi).sub(&one).abs();
        if *d.hi() > Dyadic::pow2(-(bits as i64) + 8) {
            return false;
        }
        true
    }

    /// στ − 1, the exponent of the norm growth law.
    pub fn st_minus_1(&self) -> RealEnclosure {
        self.sigma
            .mul(&self.tau)
            .sub(&RealEnclosure::from_int(1, self.sigma.bits()))
    }
}

/// g(γ) = φ + (2φ − 2)/(φ²γ − 2), strictly decreasing, g(2) = 2.
pub fn g_of_gamma(gamma: &RealEnclosure) -> Result<RealEnclosure, NumError> {
    // The hypothesis range is γ >= 2, but the expression itself is finite
    // whenever φ²γ > 2; evaluating slightly below 2 supports comparisons
    // against exponents like σ ≈ 1.947.
    let bits = gamma.bits().max(64);
    let phi = golden_ratio(bits + 16);
    let two_e = RealEnclosure::from_int(2, bits + 16);
    let den = phi.mul(&phi).mul(gamma).sub(&two_e);
    if !den.lo().is_positive() {
        return Err(NumError::Domain("g(γ) requires φ²γ > 2".into()));
    }
    let num = phi.mul_pow2(1).sub(&two_e);
    Ok(phi.add(&num.div(&den)?).with_bits(bits))
}

/// C(Γ, γ) = 2¹⁸ · Γ^((φ−φ²)/(φ²γ−2)). Since φ − φ² = −1 exactly, the
/// exponent is −1/(φ²γ−2). γ is taken explicitly because the exponent
/// depends on it.
pub fn c_of_gamma_big(
    big_gamma: &RealEnclosure,
    gamma: &RealEnclosure,
) -> Result<RealEnclosure, NumError> {
    let two = Dyadic::from_int(2);
    if gamma.lo() < &two {
        return Err(NumError::Domain("C(Γ, γ) requires γ >= 2".into()));
    }
    if !big_gamma.lo().is_positive() || big_gamma.hi() > &Dyadic::one() {
        return Err(NumError::Domain("C(Γ, γ) requires Γ in (0, 1]".into()));
    }
    let bits = big_gamma.bits().max(gamma.bits()).max(64);
    let wp = bits + 16;
    let phi = golden_ratio(wp);
    let two_e = RealEnclosure::from_int(2, wp);
    let den = phi.mul(&phi).mul(gamma).sub(&two_e);
    let exponent = RealEnclosure::from_int(-1, wp).div(&den)?;
    let power = crate::numerics::pow(&big_gamma.with_bits(wp), &exponent)?;
    Ok(power.mul_pow2(18).with_bits(bits))
}

/// Result bundle for the `constants` CLI subcommand.
#[derive(Debug, Serialize)]
pub struct ConstantsReport {
    pub bits: u32,
    pub sigma: RealEnclosure,
    pub tau: RealEnclosure,
    pub omega: RealEnclosure,
    pub phi: RealEnclosure,
    pub t_gap: RealEnclosure,
    pub sigma_sign_change_certificate: bool,
    pub no_root_above_sigma: bool,
    pub st_minus_1_exceeds_tau: bool,
    pub root_identity_within_width: bool,
    pub g_of_2: RealEnclosure,
}

pub fn constants_report(bits: u32) -> Result<ConstantsReport, NumError> {
    let c = AlgebraicConstants::derive(bits)?;
    let sigma = &c.sigma;
    let sign_cert = quartic_at(sigma.lo()).is_negative() && quartic_at(sigma.hi()).is_positive();
    let st1 = c.st_minus_1();
    let one = RealEnclosure::from_int(1, sigma.bits());
    let ident = c
        .tau
        .add(&one.div(&st1).expect("στ−1 positive"))
        .sub(sigma)
        .abs();
    let g2 = g_of_gamma(&RealEnclosure::from_int(2, bits))?;
    Ok(ConstantsReport {
        bits,
        sigma: c.sigma.clone(),
        tau: c.tau.clone(),
        omega: c.omega.clone(),
        phi: c.phi.clone(),
        t_gap: c.t_gap.clone(),
        sigma_sign_change_certificate: sign_cert,
        no_root_above_sigma: no_root_above(sigma),
        st_minus_1_exceeds_tau: st1.definitely_gt(&c.tau),
        root_identity_within_width: *ident.hi() <= Dyadic::pow2(-(bits as i64) + 8),
        g_of_2: g2,
    })
}

//! Certified elementary functions on enclosures.
//!
//! Only the operations the inequality checks actually need: square root,
//! exp, ln, real and integer powers, and sine on [0, 3/2] (for the angle
//! threshold). Every result is outward-rounded.

use num_bigint::BigInt;

use super::dyadic::{Dir, Dyadic};
use super::enclosure::{NumError, RealEnclosure};

/// Binary operations of the generic interval-op entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Generic dispatcher matching the library's operation table.
pub fn interval_ops(
    a: &RealEnclosure,
    b: &RealEnclosure,
    op: BinOp,
) -> Result<RealEnclosure, NumError> {
    match op {
        BinOp::Add => Ok(a.add(b)),
        BinOp::Sub => Ok(a.sub(b)),
        BinOp::Mul => Ok(a.mul(b)),
        BinOp::Div => a.div(b),
        BinOp::Pow => pow(a, b),
    }
}

/// x^y. Integer point exponents use repeated squaring and accept any base;
/// fractional exponents require a strictly positive base.
pub fn pow(x: &RealEnclosure, y: &RealEnclosure) -> Result<RealEnclosure, NumError> {
    if y.is_point() && y.lo().exp() >= 0 {
        let n = y.lo().floor_int();
        if let Ok(small) = i64::try_from(&n) {
            return x.powi(small);
        }
    }
    if !x.lo().is_positive() {
        return Err(NumError::NegativeBaseFractionalPower);
    }
    let lnx = ln(x)?;
    Ok(exp(&y.mul(&lnx)))
}

/// Square root; requires a non-negative lower endpoint.
pub fn sqrt(x: &RealEnclosure) -> Result<RealEnclosure, NumError> {
    if x.lo().is_negative() {
        return Err(NumError::Domain("sqrt of interval with negative points".into()));
    }
    let bits = x.bits();
    Ok(RealEnclosure::new(
        sqrt_point(x.lo(), bits, Dir::Down),
        sqrt_point(x.hi(), bits, Dir::Up),
        bits,
    ))
}

/// Enclosure of sqrt(n) for a non-negative integer.
pub fn sqrt_int(n: &BigInt, bits: u32) -> RealEnclosure {
    sqrt(&RealEnclosure::from_bigint(n, bits)).expect("non-negative integer")
}

fn sqrt_point(d: &Dyadic, bits: u32, dir: Dir) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    debug_assert!(d.is_positive());
    let target = 2 * (bits as u64 + 4);
    let mut shift = target.saturating_sub(d.mant_bits());
    if (d.exp() - shift as i64) % 2 != 0 {
        shift += 1;
    }
    let scaled: BigInt = d.mant() << shift;
    let root = scaled.sqrt(); // floor
    let half_exp = (d.exp() - shift as i64) / 2;
    match dir {
        Dir::Down => Dyadic::new(root, half_exp),
        Dir::Up => Dyadic::new(root + 1, half_exp),
    }
}

/// Working-precision interval used inside series evaluation.
#[derive(Clone)]
struct Ival {
    lo: Dyadic,
    hi: Dyadic,
}

impl Ival {
    fn point(d: &Dyadic) -> Ival {
        Ival { lo: d.clone(), hi: d.clone() }
    }

    fn from_int(v: i64) -> Ival {
        Ival::point(&Dyadic::from_int(v))
    }

    fn add(&self, o: &Ival, wp: u32) -> Ival {
        Ival {
            lo: self.lo.add(&o.lo).round(wp, Dir::Down),
            hi: self.hi.add(&o.hi).round(wp, Dir::Up),
        }
    }

    fn mul(&self, o: &Ival, wp: u32) -> Ival {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        Ival {
            lo: c.iter().min().unwrap().round(wp, Dir::Down),
            hi: c.iter().max().unwrap().round(wp, Dir::Up),
        }
    }

    fn div_int(&self, k: i64, wp: u32) -> Ival {
        let d = Dyadic::from_int(k);
        debug_assert!(k > 0);
        Ival {
            lo: self.lo.div(&d, wp, Dir::Down),
            hi: self.hi.div(&d, wp, Dir::Up),
        }
    }

    fn abs_hi(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }
}

/// exp of an enclosure (monotone, endpoint-wise).
pub fn exp(x: &RealEnclosure) -> RealEnclosure {
    let bits = x.bits();
    RealEnclosure::new(
        exp_point(x.lo(), bits, Dir::Down),
        exp_point(x.hi(), bits, Dir::Up),
        bits,
    )
}

fn exp_point(d: &Dyadic, bits: u32, dir: Dir) -> Dyadic {
    let wp = bits + 40;
    if d.is_zero() {
        return Dyadic::one();
    }
    // Halve the argument until |r| <= 1/2, then square back.
    let k = (d.log2_floor() + 2).max(0) as i64;
    let r = d.mul_pow2(-k);
    debug_assert!(r.abs() <= Dyadic::new(BigInt::from(1), -1));
    let rv = Ival::point(&r);
    let mut term = Ival::from_int(1);
    let mut sum = Ival::from_int(1);
    let mut i: i64 = 1;
    let tol = Dyadic::pow2(-(wp as i64));
    loop {
        term = term.mul(&rv, wp).div_int(i, wp);
        sum = sum.add(&term, wp);
        if term.abs_hi() < tol {
            break;
        }
        i += 1;
    }
    // |r| <= 1/2 so the tail after the last added term is below its size.
    let tail = term.abs_hi();
    let mut res = Ival {
        lo: sum.lo.sub(&tail).round(wp, Dir::Down),
        hi: sum.hi.add(&tail).round(wp, Dir::Up),
    };
    for _ in 0..k {
        res = res.mul(&res.clone(), wp);
    }
    match dir {
        Dir::Down => res.lo.round(bits + 2, Dir::Down),
        Dir::Up => res.hi.round(bits + 2, Dir::Up),
    }
}

/// ln of an enclosure; requires a strictly positive lower endpoint.
pub fn ln(x: &RealEnclosure) -> Result<RealEnclosure, NumError> {
    if !x.lo().is_positive() {
        return Err(NumError::Domain("ln of interval with non-positive points".into()));
    }
    let bits = x.bits();
    Ok(RealEnclosure::new(
        ln_point(x.lo(), bits, Dir::Down),
        ln_point(x.hi(), bits, Dir::Up),
        bits,
    ))
}

fn ln_point(d: &Dyadic, bits: u32, dir: Dir) -> Dyadic {
    debug_assert!(d.is_positive());
    let wp = bits + 40;
    // d = f * 2^g with f in [1, 2)
    let g = d.log2_floor();
    let f = d.mul_pow2(-g);
    let ln_f = atanh_based_ln(&Ival::point(&f), wp);
    let res = if g == 0 {
        ln_f
    } else {
        let l2 = ln2(wp);
        let gl2 = Ival {
            lo: l2.lo.mul(&Dyadic::from_int(g)),
            hi: l2.hi.mul(&Dyadic::from_int(g)),
        };
        let gl2 = if g < 0 { Ival { lo: gl2.hi.clone(), hi: gl2.lo.clone() } } else { gl2 };
        ln_f.add(&gl2, wp)
    };
    match dir {
        Dir::Down => res.lo.round(bits + 2, Dir::Down),
        Dir::Up => res.hi.round(bits + 2, Dir::Up),
    }
}

/// ln(f) for f in [1, 2] via 2*atanh((f-1)/(f+1)); u stays in [0, 1/3].
fn atanh_based_ln(f: &Ival, wp: u32) -> Ival {
    let one = Ival::from_int(1);
    let num = Ival {
        lo: f.lo.sub(&one.lo).round(wp, Dir::Down),
        hi: f.hi.sub(&one.hi).round(wp, Dir::Up),
    };
    let den = f.add(&one, wp);
    let u = Ival {
        lo: num.lo.div(&den.hi, wp, Dir::Down).max(Dyadic::zero()),
        hi: num.hi.div(&den.lo, wp, Dir::Up),
    };
    atanh_series(&u, wp)
}

/// 2*atanh(u) for u in [0, 1/2); terms are positive and shrink by u^2.
fn atanh_series(u: &Ival, wp: u32) -> Ival {
    let usq = u.mul(u, wp);
    let mut pow = u.clone();
    let mut sum = u.clone();
    let mut k: i64 = 1;
    let tol = Dyadic::pow2(-(wp as i64) - 2);
    loop {
        pow = pow.mul(&usq, wp);
        let term = pow.div_int(2 * k + 1, wp);
        sum = sum.add(&term, wp);
        if term.abs_hi() < tol {
            // positive tail below the last term
            sum = Ival {
                lo: sum.lo,
                hi: sum.hi.add(&term.abs_hi()).round(wp, Dir::Up),
            };
            break;
        }
        k += 1;
    }
    Ival {
        lo: sum.lo.mul_pow2(1),
        hi: sum.hi.mul_pow2(1),
    }
}

/// Enclosure of ln 2 at working precision.
fn ln2(wp: u32) -> Ival {
    let third = Dyadic::one();
    let den = Dyadic::from_int(3);
    let u = Ival {
        lo: third.div(&den, wp, Dir::Down),
        hi: third.div(&den, wp, Dir::Up),
    };
    atanh_series(&u, wp)
}

/// sin on [0, 3/2], where it is monotone increasing.
pub fn sin(x: &RealEnclosure) -> Result<RealEnclosure, NumError> {
    let three_halves = Dyadic::new(BigInt::from(3), -1);
    if x.lo().is_negative() || *x.hi() > three_halves {
        return Err(NumError::Domain("sin restricted to [0, 3/2]".into()));
    }
    let bits = x.bits();
    Ok(RealEnclosure::new(
        sin_point(x.lo(), bits, Dir::Down).max(Dyadic::zero()),
        sin_point(x.hi(), bits, Dir::Up),
        bits,
    ))
}

fn sin_point(d: &Dyadic, bits: u32, dir: Dir) -> Dyadic {
    let wp = bits + 40;
    let xv = Ival::point(d);
    let xsq = xv.mul(&xv, wp);
    let mut term = xv.clone();
    let mut sum = xv;
    let mut k: i64 = 1;
    let tol = Dyadic::pow2(-(wp as i64) - 2);
    loop {
        // next term: t *= -x^2 / ((2k)(2k+1))
        term = term.mul(&xsq, wp).div_int(2 * k * (2 * k + 1), wp);
        term = Ival { lo: term.hi.neg(), hi: term.lo.neg() };
        sum = sum.add(&term, wp);
        if term.abs_hi() < tol {
            let t = term.abs_hi();
            sum = Ival {
                lo: sum.lo.sub(&t).round(wp, Dir::Down),
                hi: sum.hi.add(&t).round(wp, Dir::Up),
            };
            break;
        }
        k += 1;
    }
    match dir {
        Dir::Down => sum.lo.round(bits + 2, Dir::Down),
        Dir::Up => sum.hi.round(bits + 2, Dir::Up),
    }
}

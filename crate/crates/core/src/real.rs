//! Outward-rounded interval reals on dyadic big-integer endpoints.
//!
//! A `Real` holds `[lo, hi] * 2^-prec`. Every operation rounds the lower end
//! down and the upper end up, so the true value always stays enclosed.
//! Transcendentals (`exp`, `ln`) use Taylor and atanh series with explicit
//! tail bounds.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{ceil_q, floor_q, fmt_sci, Q};

/// Precision ladder for retrying undecided comparisons.
pub const PRECISIONS: [u32; 3] = [128, 256, 512];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn shr_ceil(x: &BigInt, s: u32) -> BigInt {
    -((-x) >> s as usize)
}

fn rescale(x: &BigInt, from: u32, to: u32, up: bool) -> BigInt {
    match to.cmp(&from) {
        Ordering::Equal => x.clone(),
        Ordering::Greater => x << (to - from) as usize,
        Ordering::Less if up => shr_ceil(x, from - to),
        Ordering::Less => x >> (from - to) as usize,
    }
}

impl Real {
    pub fn from_q(v: &Q, prec: u32) -> Real {
        let s = Q::from_integer(BigInt::one() << prec as usize);
        let scaled = v * s;
        Real { lo: floor_q(&scaled), hi: ceil_q(&scaled), prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Real {
        let m = BigInt::from(v) << prec as usize;
        Real { lo: m.clone(), hi: m, prec }
    }

    pub fn zero(prec: u32) -> Real {
        Real::from_i64(0, prec)
    }

    pub fn one(prec: u32) -> Real {
        Real::from_i64(1, prec)
    }

    pub fn from_bounds(lo: &Q, hi: &Q, prec: u32) -> Real {
        let a = Real::from_q(lo, prec);
        let b = Real::from_q(hi, prec);
        Real { lo: a.lo, hi: b.hi, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Real {
        Real { lo: rescale(&self.lo, self.prec, prec, false), hi: rescale(&self.hi, self.prec, prec, true), prec }
    }

    fn align(&self, other: &Real) -> (Real, Real) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn lo_q(&self) -> Q {
        Q::new(self.lo.clone(), BigInt::one() << self.prec as usize)
    }

    pub fn hi_q(&self) -> Q {
        Q::new(self.hi.clone(), BigInt::one() << self.prec as usize)
    }

    pub fn mid_q(&self) -> Q {
        Q::new(&self.lo + &self.hi, BigInt::one() << (self.prec as usize + 1))
    }

    pub fn width_q(&self) -> Q {
        Q::new(&self.hi - &self.lo, BigInt::one() << self.prec as usize)
    }

    pub fn mid_f64(&self) -> f64 {
        let s = &self.lo + &self.hi;
        let bits = s.bits() as i64;
        let shift = (bits - 62).max(0);
        let m = (&s >> shift as usize).to_f64().unwrap_or(0.0);
        m * 2f64.powi((shift - self.prec as i64 - 1) as i32)
    }

    /// log2 of the width, or `None` for a point interval.
    pub fn width_log2(&self) -> Option<i64> {
        let w = &self.hi - &self.lo;
        if w.is_zero() {
            None
        } else {
            Some(w.bits() as i64 - self.prec as i64)
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Ordering if the enclosures are disjoint (or both are the same point).
    pub fn cmp_decided(&self, other: &Real) -> Option<Ordering> {
        let (a, b) = self.align(other);
        if a.hi < b.lo {
            Some(Ordering::Less)
        } else if a.lo > b.hi {
            Some(Ordering::Greater)
        } else if a.lo == a.hi && b.lo == b.hi && a.lo == b.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_q(&self, v: &Q) -> Option<Ordering> {
        if self.hi_q() < *v {
            Some(Ordering::Less)
        } else if self.lo_q() > *v {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && self.lo_q() == *v {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Real {
        Real { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn add(&self, other: &Real) -> Real {
        let (a, b) = self.align(other);
        Real { lo: &a.lo + &b.lo, hi: &a.hi + &b.hi, prec: a.prec }
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.add(&other.neg())
    }

    pub fn add_q(&self, v: &Q) -> Real {
        self.add(&Real::from_q(v, self.prec))
    }

    pub fn mul(&self, other: &Real) -> Real {
        let (a, b) = self.align(other);
        let p = a.prec;
        let c = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let mn = c.iter().min().unwrap();
        let mx = c.iter().max().unwrap();
        Real { lo: mn >> p as usize, hi: shr_ceil(mx, p), prec: p }
    }

    pub fn mul_q(&self, v: &Q) -> Real {
        self.mul(&Real::from_q(v, self.prec))
    }

    pub fn mul_i64(&self, k: i64) -> Real {
        let k = BigInt::from(k);
        if k.is_negative() {
            Real { lo: &self.hi * &k, hi: &self.lo * &k, prec: self.prec }
        } else {
            Real { lo: &self.lo * &k, hi: &self.hi * &k, prec: self.prec }
        }
    }

    pub fn sqr(&self) -> Real {
        let m = self.mul(self);
        if self.contains_zero() {
            Real { lo: BigInt::zero(), hi: m.hi, prec: m.prec }
        } else {
            m
        }
    }

    /// Quotient, or `None` when the divisor encloses zero.
    pub fn div(&self, other: &Real) -> Option<Real> {
        if other.contains_zero() {
            return None;
        }
        let (a, b) = self.align(other);
        let p = a.prec as usize;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for x in [&a.lo, &a.hi] {
            for y in [&b.lo, &b.hi] {
                let n = x << p;
                let f = n.div_floor(y);
                let c = -((-&n).div_floor(y));
                lo = Some(match lo {
                    Some(l) if l <= f => l,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(h) if h >= c => h,
                    _ => c,
                });
            }
        }
        Some(Real { lo: lo.unwrap(), hi: hi.unwrap(), prec: a.prec })
    }

    pub fn div_i64(&self, k: i64) -> Real {
        self.div(&Real::from_i64(k, self.prec)).expect("nonzero divisor")
    }

    pub fn abs(&self) -> Real {
        if self.lo.is_negative() && self.hi.is_positive() {
            let h = (-&self.lo).max(self.hi.clone());
            Real { lo: BigInt::zero(), hi: h, prec: self.prec }
        } else if self.hi.is_negative() || (self.hi.is_zero() && self.lo.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn sqrt(&self) -> Real {
        let p = self.prec as usize;
        let lo = if self.lo.is_positive() { (&self.lo << p).sqrt() } else { BigInt::zero() };
        let hi = if self.hi.is_positive() {
            let n = &self.hi << p;
            let r = n.sqrt();
            if &r * &r == n {
                r
            } else {
                r + 1
            }
        } else {
            BigInt::zero()
        };
        Real { lo, hi, prec: self.prec }
    }

    pub fn max(&self, other: &Real) -> Real {
        let (a, b) = self.align(other);
        Real { lo: a.lo.max(b.lo), hi: a.hi.max(b.hi), prec: a.prec }
    }

    pub fn min(&self, other: &Real) -> Real {
        let (a, b) = self.align(other);
        Real { lo: a.lo.min(b.lo), hi: a.hi.min(b.hi), prec: a.prec }
    }

    pub fn powi(&self, k: u32) -> Real {
        let mut out = Real::one(self.prec);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.sqr();
            e >>= 1;
        }
        out
    }

    pub fn exp(&self) -> Real {
        let lo = exp_point(&self.lo, self.prec).lo;
        let hi = exp_point(&self.hi, self.prec).hi;
        Real { lo, hi, prec: self.prec }
    }

    /// Natural logarithm, or `None` unless the value is certainly positive.
    pub fn ln(&self) -> Option<Real> {
        if !self.is_positive() {
            return None;
        }
        let lo = ln_point(&self.lo, self.prec).lo;
        let hi = ln_point(&self.hi, self.prec).hi;
        Some(Real { lo, hi, prec: self.prec })
    }

    /// `self^e` for a rational exponent, for certainly positive values.
    pub fn pow_q(&self, e: &Q) -> Option<Real> {
        Some(self.ln()?.mul_q(e).exp())
    }

    pub fn ceil_decided(&self) -> Option<BigInt> {
        let c_lo = ceil_q(&self.lo_q());
        let c_hi = ceil_q(&self.hi_q());
        (c_lo == c_hi).then_some(c_lo)
    }

    pub fn floor_decided(&self) -> Option<BigInt> {
        let f_lo = floor_q(&self.lo_q());
        let f_hi = floor_q(&self.hi_q());
        (f_lo == f_hi).then_some(f_lo)
    }

    /// Midpoint in scientific notation with `sig` significant digits.
    pub fn to_sci(&self, sig: usize) -> String {
        fmt_sci(&self.mid_q(), sig)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(20))
    }
}

fn guard(prec: u32) -> u32 {
    prec + 40
}

/// Enclosure of `exp(m * 2^-prec)` at precision `prec`.
fn exp_point(m: &BigInt, prec: u32) -> Real {
    if m.is_zero() {
        return Real::one(prec);
    }
    let mag = m.bits() as i64 - prec as i64;
    let s = (mag + 2).max(0) as u32;
    let w = guard(prec) + s + m.bits().min(4096) as u32 / 4;
    // z = m * 2^-(prec + s), exact at precision w.
    let z = Real { lo: m << (w - prec - s) as usize, hi: m << (w - prec - s) as usize, prec: w };
    let tiny = BigInt::one();
    let mut sum = Real::one(w);
    let mut term = Real::one(w);
    let mut k = 1i64;
    loop {
        term = term.mul(&z).div_i64(k);
        sum = sum.add(&term);
        let t = term.abs();
        if t.hi <= tiny || k > 10_000 {
            // |z| <= 1/2, so the tail is at most the last term.
            let pad = &t.hi + 1;
            sum = Real { lo: &sum.lo - &pad, hi: &sum.hi + &pad, prec: w };
            break;
        }
        k += 1;
    }
    for _ in 0..s {
        sum = sum.sqr();
    }
    sum.with_prec(prec)
}

fn atanh_series(z: &Real) -> Real {
    // z^(2i+1)/(2i+1) for |z| <= 1/3; tail below twice the last term.
    let w = z.prec;
    let z2 = z.sqr();
    let mut pow = z.clone();
    let mut sum = z.clone();
    let mut i = 1i64;
    loop {
        pow = pow.mul(&z2);
        let term = pow.div_i64(2 * i + 1);
        sum = sum.add(&term);
        let t = term.abs();
        if t.hi <= BigInt::one() || i > 100_000 {
            let pad = &t.hi + 1;
            sum = Real { lo: &sum.lo - &pad, hi: &sum.hi + &pad, prec: w };
            return sum;
        }
        i += 1;
    }
}

static LN2_CACHE: Mutex<Option<HashMap<u32, Real>>> = Mutex::new(None);

/// Enclosure of ln 2 at precision `w`.
pub fn ln2(w: u32) -> Real {
    if let Some(v) = LN2_CACHE.lock().unwrap().as_ref().and_then(|c| c.get(&w)) {
        return v.clone();
    }
    let third = Real::one(w + 8).div_i64(3);
    let v = atanh_series(&third).mul_i64(2).with_prec(w);
    LN2_CACHE.lock().unwrap().get_or_insert_with(HashMap::new).insert(w, v.clone());
    v
}

/// Enclosure of `ln(m * 2^-prec)` for `m > 0`.
fn ln_point(m: &BigInt, prec: u32) -> Real {
    let b = m.bits() as i64;
    let k = b - prec as i64;
    let w = guard(prec) + (k.unsigned_abs().max(1) as f64).log2().ceil() as u32;
    // y = m * 2^-b in [1/2, 1), exact at precision w.
    let y = if (w as i64) >= b {
        let v = m << (w as i64 - b) as usize;
        Real { lo: v.clone(), hi: v, prec: w }
    } else {
        let sh = (b - w as i64) as u32;
        Real { lo: m >> sh as usize, hi: shr_ceil(m, sh), prec: w }
    };
    let one = Real::one(w);
    let z = y.sub(&one).div(&y.add(&one)).expect("positive");
    let lny = atanh_series(&z).mul_i64(2);
    let out = lny.add(&ln2(w).mul_i64(k));
    out.with_prec(prec)
}

/// Enclosure of e.
pub fn e_const(prec: u32) -> Real {
    Real::one(prec).exp()
}

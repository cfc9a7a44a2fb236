//! Exact rational helpers: parsing, rounding, integer roots and comparisons of
//! rational powers.

use std::cmp::Ordering;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `num/den`, a plain integer, or a finite decimal such as `-0.125`.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let n = BigInt::from_str(&digits).map_err(|e| format!("bad decimal {s:?}: {e}"))?;
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(s).map(Q::from_integer).map_err(|e| format!("bad rational {s:?}: {e}"))
}

/// Canonical `num/den` rendering used in every serialized artifact.
pub fn fmt_q(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn floor_q(v: &Q) -> BigInt {
    v.numer().div_floor(v.denom())
}

pub fn ceil_q(v: &Q) -> BigInt {
    -((-v.numer()).div_floor(v.denom()))
}

/// Nearest integer, ties rounded down.
pub fn round_q(v: &Q) -> BigInt {
    let half = q(1, 2);
    ceil_q(&(v - half))
}

/// Distance to the nearest integer.
pub fn dist_to_z(v: &Q) -> Q {
    let f = v - Q::from_integer(floor_q(v));
    let g = Q::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

/// Scientific notation with `sig` significant digits, e.g. `6.1094e-3`.
pub fn fmt_sci(v: &Q, sig: usize) -> String {
    if v.is_zero() {
        return "0".into();
    }
    let neg = v.is_negative();
    let a = v.abs();
    let sig = sig.max(1);
    // Estimate the decimal exponent, then correct it exactly.
    let est = (a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2;
    let mut e = est.floor() as i64;
    let pow10 = |k: i64| -> Q {
        if k >= 0 {
            Q::from_integer(BigInt::from(10).pow(k as u32))
        } else {
            Q::new(BigInt::one(), BigInt::from(10).pow((-k) as u32))
        }
    };
    while a >= pow10(e + 1) {
        e += 1;
    }
    while a < pow10(e) {
        e -= 1;
    }
    let scaled = &a * pow10(sig as i64 - 1 - e);
    let mut mant = round_q(&scaled);
    if Q::from_integer(mant.clone()) >= pow10(sig as i64) {
        mant /= 10;
        e += 1;
    }
    let digits = mant.to_string();
    let (head, tail) = digits.split_at(1);
    let body = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    format!("{}{}e{}", if neg { "-" } else { "" }, body, e)
}

pub fn pow_q(v: &Q, k: u32) -> Q {
    Q::new(v.numer().pow(k), v.denom().pow(k))
}

pub fn to_f64(v: &Q) -> f64 {
    if let Some(x) = v.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Scale down huge numerators and denominators before converting.
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let shift_n = (nb - 900).max(0) as usize;
    let shift_d = (db - 900).max(0) as usize;
    let n = (v.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (v.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// Smallest integer `n >= 0` with `n^k >= x`, for `x >= 0`.
pub fn ceil_root(x: &Q, k: u32) -> BigInt {
    assert!(k >= 1);
    if !x.is_positive() {
        return BigInt::zero();
    }
    let fits = |n: &BigInt| -> bool { Q::from_integer(n.pow(k)) >= *x };
    // Integer k-th root of ceil(x) is within one of the answer.
    let c = ceil_q(x);
    let mut n = c.nth_root(k);
    while n > BigInt::zero() && fits(&(&n - 1)) {
        n -= 1;
    }
    while !fits(&n) {
        n += 1;
    }
    n
}

/// Largest integer `n >= 0` with `n^k < x`, or `None` when `x <= 0`.
pub fn floor_root_strict(x: &Q, k: u32) -> Option<BigInt> {
    if !x.is_positive() {
        return None;
    }
    Some(ceil_root(x, k) - 1)
}

/// Decides `x < k * m^(-a/b)` exactly for `x >= 0`, `k > 0`, `m >= 1`.
pub fn below_scaled_power(x: &Q, k: &Q, m: u64, a: u32, b: u32) -> bool {
    debug_assert!(!x.is_negative() && k.is_positive() && m >= 1 && b >= 1);
    let lhs = pow_q(x, b) * Q::from_integer(BigInt::from(m).pow(a));
    lhs < pow_q(k, b)
}

/// Upper rational bound `ceil(v * 2^bits) / 2^bits`.
pub fn dyadic_up(v: &Q, bits: u32) -> Q {
    let s = BigInt::one() << bits;
    Q::new(ceil_q(&(v * Q::from_integer(s.clone()))), s)
}

/// Lower rational bound `floor(v * 2^bits) / 2^bits`.
pub fn dyadic_down(v: &Q, bits: u32) -> Q {
    let s = BigInt::one() << bits;
    Q::new(floor_q(&(v * Q::from_integer(s.clone()))), s)
}

/// Rounds `v > 0` down to a dyadic rational with about `sig` significant bits.
pub fn round_down_sig(v: &Q, sig: u32) -> Q {
    assert!(v.is_positive());
    let e = v.numer().bits() as i64 - v.denom().bits() as i64;
    let bits = (sig as i64 - e).max(0) as u32;
    dyadic_down(v, bits)
}

/// Bracket for `m^(s/t)`: dyadic rationals `lo <= m^(s/t) <= hi` with
/// denominators `2^bits`; equal when the power is an exact dyadic.
pub fn root_bracket(m: u64, s: u32, t: u32, bits: u32) -> (Q, Q) {
    // m^(s/t) * 2^bits = (m^s * 2^(bits*t))^(1/t)
    let big = BigInt::from(m).pow(s) << (bits as usize * t as usize);
    let x = Q::from_integer(big);
    let hi = ceil_root(&x, t);
    let lo = if Q::from_integer(hi.pow(t)) == x { hi.clone() } else { &hi - 1 };
    let den = BigInt::one() << bits;
    (Q::new(lo, den.clone()), Q::new(hi, den))
}

/// Positive real number written as a product of rational powers
/// `prod base_k ^ exp_k`, compared exactly via integer powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerProduct {
    pub factors: Vec<(Q, Ratio<i64>)>,
}

impl PowerProduct {
    pub fn new(factors: Vec<(Q, Ratio<i64>)>) -> Self {
        PowerProduct { factors }
    }

    pub fn is_zero(&self) -> bool {
        self.factors.iter().any(|(b, e)| b.is_zero() && e.is_positive())
    }

    /// Decimal approximation, for reports only.
    pub fn approx(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut log = 0.0;
        for (b, e) in &self.factors {
            if e.is_zero() {
                continue;
            }
            log += ln_q(b) * (*e.numer() as f64) / (*e.denom() as f64);
        }
        log.exp()
    }

    pub fn cmp_exact(&self, other: &PowerProduct) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let mut d: i64 = 1;
        for (_, e) in self.factors.iter().chain(other.factors.iter()) {
            d = d.lcm(e.denom());
        }
        // self / other compared with 1, after raising to the power d.
        let mut num = BigRational::one();
        let mut den = BigRational::one();
        let mut push = |b: &Q, e: i64| {
            if e > 0 {
                num *= pow_q(b, e as u32);
            } else if e < 0 {
                den *= pow_q(b, (-e) as u32);
            }
        };
        for (b, e) in &self.factors {
            push(b, (e * d).to_integer());
        }
        for (b, e) in &other.factors {
            push(b, -(e * d).to_integer());
        }
        num.cmp(&den)
    }
}

fn ln_q(v: &Q) -> f64 {
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let n = (v.numer().abs() >> (nb - 60).max(0) as usize).to_f64().unwrap_or(1.0);
    let d = (v.denom() >> (db - 60).max(0) as usize).to_f64().unwrap_or(1.0);
    n.ln() - d.ln() + ((nb - 60).max(0) - (db - 60).max(0)) as f64 * std::f64::consts::LN_2
}

/// Exact `a^(s/t)` versus `b` for positive rationals.
pub fn cmp_rational_power(a: &Q, s: u32, t: u32, b: &Q) -> Ordering {
    pow_q(a, s).cmp(&pow_q(b, t))
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

//! `max_i |mφ_i(x) − θ_i(x)|_ℤ^{1/r_i} · |m|`, kept exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::curve::{CurveModel, ShiftField};
use crate::rational::{dist_to_z, qi, round_q, PowerProduct, Q};
use crate::weight::Weight;

/// Quality of `x` at one denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quality {
    pub m: i64,
    pub value: PowerProduct,
    /// 1-based component attaining the maximum.
    pub i: usize,
    /// Nearest integers `p_i` to `mφ_i(x) − θ_i(x)`.
    pub p: Vec<BigInt>,
}

fn exponent(r: &Q) -> Ratio<i64> {
    Ratio::new(r.denom().to_i64().expect("weight denominator"), r.numer().to_i64().expect("weight numerator"))
}

pub fn quality(curve: &CurveModel, shift: &ShiftField, weight: &Weight, x: &Q, m: i64) -> Quality {
    assert!(m != 0, "quality needs m != 0");
    let phi = curve.eval(x);
    let mq = qi(m);
    let abs_m = qi(m.abs());
    let mut best: Option<(PowerProduct, usize)> = None;
    let mut p = Vec::with_capacity(phi.len());
    for (k, ph) in phi.iter().enumerate() {
        let y = &mq * ph - shift.components()[k].eval(x);
        p.push(round_q(&y));
        let v = PowerProduct::new(vec![
            (dist_to_z(&y), exponent(weight.r(k + 1))),
            (abs_m.clone(), Ratio::from_integer(1)),
        ]);
        if best.as_ref().is_none_or(|(b, _)| v.cmp_exact(b) == Ordering::Greater) {
            best = Some((v, k + 1));
        }
    }
    let (value, i) = best.expect("curve has components");
    Quality { m, value, i, p }
}

/// Minimum of the quality over `M0 < |m| <= Q`, with its argmin; ties go to
/// the smallest `|m|`, then to positive `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub value: PowerProduct,
    pub m: i64,
}

fn better(a: Quality, b: Quality) -> Quality {
    match a.value.cmp_exact(&b.value) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if (a.m.abs(), -a.m.signum()) <= (b.m.abs(), -b.m.signum()) {
                a
            } else {
                b
            }
        }
    }
}

pub fn bad_constant_estimate(
    curve: &CurveModel,
    shift: &ShiftField,
    weight: &Weight,
    x: &Q,
    q_bound: u64,
    m0: u64,
) -> Estimate {
    assert!(q_bound > m0, "need Q > M0");
    let best = ((m0 + 1)..=q_bound)
        .into_par_iter()
        .flat_map_iter(|m| [m as i64, -(m as i64)])
        .map(|m| quality(curve, shift, weight, x, m))
        .reduce_with(better)
        .expect("nonempty range");
    Estimate { value: best.value, m: best.m }
}

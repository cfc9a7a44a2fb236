//! Flow rates, the lattice minimum ξ and the small constants λ₁, k₁, c.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::curve::{three_pow, CurveModel, ShiftField};
use crate::error::{ConstantsError, LatticeError};
use crate::interval::RationalInterval;
use crate::lattice::flow::{dani_matrix, FlowMatrix, FlowParams};
use crate::lattice::svp::{shortest_nonzero, LatticeBasis};
use crate::lattice::EscapeScales;
use crate::measure::{r_alpha_admissible, MeasureOracle};
use crate::rational::{max_q, pow_q, q, qi, round_down_sig, PowerProduct, Q};
use crate::real::{e_const, Real, PRECISIONS};
use crate::weight::Weight;

/// `β = ln R/(1+r₁)`, `β' = ln R/(1+1/n)`, `ε = r_n/(8n)`.
#[derive(Clone, Debug)]
pub struct Exponents {
    pub ln_r: Real,
    pub beta: Real,
    pub beta_prime: Real,
    pub epsilon: Q,
}

pub fn derive_exponents_from_ln(ln_r: &Real, weight: &Weight) -> Exponents {
    let prec = ln_r.prec();
    let n = weight.n() as i64;
    let beta = ln_r.div(&Real::from_q(&(qi(1) + weight.r1()), prec)).expect("positive");
    let beta_prime = ln_r.div(&Real::from_q(&(qi(1) + q(1, n)), prec)).expect("positive");
    let epsilon = weight.rn() / qi(8 * n);
    Exponents { ln_r: ln_r.clone(), beta, beta_prime, epsilon }
}

pub fn derive_exponents(r: u64, weight: &Weight, prec: u32) -> Exponents {
    let ln_r = Real::from_q(&Q::from_integer(BigInt::from(r)), prec).ln().expect("R >= 2");
    derive_exponents_from_ln(&ln_r, weight)
}

/// Fixed 64-bit dyadic approximation of the golden fraction (√5−1)/2, used
/// to offset sample grids away from rationals with small denominators.
pub fn golden_offset() -> Q {
    Q::new(BigInt::from(11400714819323198485u64), BigInt::one() << 64)
}

/// `samples` points equally spaced by `|I|/samples`, shifted off the
/// endpoints by the golden fraction of a step.
pub fn xi_sample_points(i0: &RationalInterval, samples: usize) -> Vec<Q> {
    let step = i0.length() / qi(samples.max(1) as i64);
    let g = golden_offset();
    (0..samples.max(1)).map(|k| i0.left() + &step * (qi(k as i64) + &g)).collect()
}

/// Shortest-vector norm of `a(βt)u(φ(x))ℤ^{n+1}`, refining precision.
pub fn flow_minimum(curve: &CurveModel, weight: &Weight, ln_r: &Real, x: &Q, t: &Q) -> Result<Real, LatticeError> {
    let mut last = None;
    for &prec in PRECISIONS.iter() {
        let beta = derive_exponents_from_ln(&ln_r.with_prec(prec), weight).beta;
        let tt = beta.mul_q(t);
        let a = dani_matrix(FlowParams::A { t: &tt, weight }, prec)?;
        let phi: Vec<Real> = curve.eval(x).iter().map(|v| Real::from_q(v, prec)).collect();
        let u = dani_matrix(FlowParams::U { x: &phi }, prec)?;
        let g = FlowMatrix::product(&[a, u])?;
        match shortest_nonzero(&LatticeBasis::new(g, "a(βt)u(φ(x))")) {
            Ok(sv) => return Ok(sv.norm),
            Err(e @ LatticeError::PrecisionExhausted(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Result of the ξ estimate with its witness.
#[derive(Clone, Debug)]
pub struct XiEstimate {
    pub xi: Q,
    pub raw_min: Real,
    pub argmin: (Q, Q),
    pub capped: bool,
}

/// `min` of the flow minimum over sampled `x ∈ I₀` and `t = k/8 ∈ (0, q_max]`,
/// capped at `(n+1)/e·(1−10⁻⁶)`; returned as a rational lower bound.
pub fn estimate_xi(
    curve: &CurveModel,
    weight: &Weight,
    ln_r: &Real,
    i0: &RationalInterval,
    q_max: usize,
    samples: usize,
) -> Result<XiEstimate, ConstantsError> {
    let xs = xi_sample_points(i0, samples);
    let ts: Vec<Q> = (1..=8 * q_max.max(1) as i64).map(|k| q(k, 8)).collect();
    let pairs: Vec<(Q, Q)> = xs.iter().flat_map(|x| ts.iter().map(move |t| (x.clone(), t.clone()))).collect();
    let norms: Vec<Result<Real, LatticeError>> =
        pairs.par_iter().map(|(x, t)| flow_minimum(curve, weight, ln_r, x, t)).collect();
    let mut best: Option<(Real, usize)> = None;
    for (i, r) in norms.into_iter().enumerate() {
        let r = r?;
        let better = match &best {
            None => true,
            Some((b, _)) => r.lo_q() < b.lo_q(),
        };
        if better {
            best = Some((r, i));
        }
    }
    let (raw, idx) = best.ok_or(ConstantsError::DegenerateXi)?;
    let lo = raw.lo_q();
    if !lo.is_positive() {
        return Err(ConstantsError::DegenerateXi);
    }
    let n1 = (weight.n() + 1) as i64;
    let cap_real = Real::from_i64(n1, 256).div(&e_const(256)).unwrap().mul_q(&(qi(1) - q(1, 1_000_000)));
    let cap = round_down_sig(&cap_real.lo_q(), 64);
    let (xi, capped) = if lo >= cap { (cap, true) } else { (round_down_sig(&lo, 64), false) };
    Ok(XiEstimate { xi, raw_min: raw, argmin: pairs[idx].clone(), capped })
}

#[derive(Clone, Debug)]
pub struct ConstantSheet {
    pub r: u64,
    pub weight: Weight,
    pub i0: RationalInterval,
    pub ln_r: Real,
    pub beta: Real,
    pub beta_prime: Real,
    pub epsilon: Q,
    pub xi: Q,
    pub lambda1: u64,
    pub k1: Real,
    /// `k₁^{1+r₁}`
    pub k1_pow: Real,
    pub f0: Q,
    pub d: Vec<Q>,
    /// Rational lower bound of the defining expression, used everywhere.
    pub c: Q,
    pub c_real: Real,
    pub measure_c: Q,
    pub alpha: Q,
}

fn r_pow(r: u64, k: i64) -> Q {
    let p = Q::from_integer(BigInt::from(r).pow(k.unsigned_abs() as u32));
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Names of the admissibility inequalities, as reported in errors.
pub const INEQ_K1: &str = "k₁^{1+r₁} < R^{−λ₁}";
pub const INEQ_I0: &str = "R > 1/|I₀|";
pub const INEQ_ALPHA: &str = "R^α ≥ 21C²";

#[allow(clippy::too_many_arguments)]
pub fn derive_small_constants(
    r: u64,
    weight: &Weight,
    i0: &RationalInterval,
    xi: &Q,
    f0: &Q,
    d: &[Q],
    measure: &dyn MeasureOracle,
) -> Result<ConstantSheet, ConstantsError> {
    let n = weight.n();
    if !xi.is_positive() {
        return Err(ConstantsError::DegenerateXi);
    }
    let mut failed = Vec::new();
    if !r_alpha_admissible(measure, r) {
        failed.push(INEQ_ALPHA.to_string());
    }
    if Q::from_integer(BigInt::from(r)) * i0.length() <= Q::one() {
        failed.push(INEQ_I0.to_string());
    }
    let mut last = None;
    for &prec in PRECISIONS.iter() {
        let ex = derive_exponents(r, weight, prec);
        let n1 = Real::from_i64(n as i64 + 1, prec);
        let ratio = n1.div(&Real::from_q(xi, prec)).unwrap();
        let lam = ratio.ln().unwrap().div(&ex.beta.mul_q(weight.rn())).unwrap();
        // An exact integer never separates from its enclosure; any larger
        // λ₁ also satisfies the defining inequality, so fall back to ⌈hi⌉.
        let lambda1 = match lam.ceil_decided() {
            Some(v) => v,
            None if prec == *PRECISIONS.last().unwrap() => crate::rational::ceil_q(&lam.hi_q()),
            None => continue,
        };
        let lambda1 = lambda1.to_u64().unwrap_or(0).max(1);
        let xr = Real::from_q(&(xi / qi(n as i64 + 1)), prec);
        let k1 = xr.mul(&ex.beta.mul_i64(lambda1 as i64).neg().exp());
        let one_r1 = qi(1) + weight.r1();
        let k1_pow = xr.pow_q(&one_r1).unwrap().mul_q(&r_pow(r, -(lambda1 as i64)));
        let dmax = d.iter().skip(1).cloned().fold(Q::zero(), |a, b| max_q(&a, &b));
        let d1 = &d[0];
        let denom = qi(200 * n as i64) * (f0 + dmax) * pow_q(&(qi(1) + d1), 2) * r_pow(r, 4);
        let c_real = k1_pow.mul_q(&(d1 / denom));
        if !c_real.is_positive() {
            last = Some(LatticeError::PrecisionExhausted("c not certainly positive".into()));
            continue;
        }
        let k1_ok = match k1_pow.cmp_q(&r_pow(r, -(lambda1 as i64))) {
            Some(Ordering::Less) => true,
            Some(_) => false,
            None => {
                last = Some(LatticeError::Undecidable(INEQ_K1.into()));
                continue;
            }
        };
        if !k1_ok {
            failed.insert(0, INEQ_K1.to_string());
        }
        if !failed.is_empty() {
            return Err(ConstantsError::RInadmissible { failed });
        }
        let c = round_down_sig(&c_real.lo_q(), 64);
        return Ok(ConstantSheet {
            r,
            weight: weight.clone(),
            i0: i0.clone(),
            ln_r: ex.ln_r,
            beta: ex.beta,
            beta_prime: ex.beta_prime,
            epsilon: ex.epsilon,
            xi: xi.clone(),
            lambda1,
            k1,
            k1_pow,
            f0: f0.clone(),
            d: d.to_vec(),
            c,
            c_real,
            measure_c: measure.c(),
            alpha: measure.alpha(),
        });
    }
    Err(ConstantsError::Lattice(last.unwrap()))
}

/// Full derivation from the curve, shift and base interval.
pub fn derive_sheet(
    curve: &CurveModel,
    shift: &ShiftField,
    weight: &Weight,
    i0: &RationalInterval,
    r: u64,
    measure: &dyn MeasureOracle,
    q_max: usize,
    xi_samples: usize,
) -> Result<(ConstantSheet, XiEstimate), ConstantsError> {
    let ex = derive_exponents(r, weight, PRECISIONS[0]);
    let est = estimate_xi(curve, weight, &ex.ln_r, i0, q_max, xi_samples)?;
    let dilated = i0.dilate(&three_pow(curve.n() + 1));
    let f0 = curve.f0_on(&dilated);
    let sheet = derive_small_constants(r, weight, i0, &est.xi, &f0, shift.lipschitz(), measure)?;
    Ok((sheet, est))
}

impl ConstantSheet {
    pub fn n(&self) -> usize {
        self.weight.n()
    }

    pub fn escape_scales(&self) -> EscapeScales {
        EscapeScales { weight: self.weight.clone(), ln_r: self.ln_r.clone(), epsilon: self.epsilon.clone() }
    }

    /// `2c|I₀|⁻¹`, the level-band constant.
    pub fn band_constant(&self) -> Q {
        qi(2) * &self.c / self.i0.length()
    }

    /// `17|I₀|⁻¹d₁`; only denominators above it are considered.
    pub fn m_threshold(&self) -> Q {
        qi(17) * &self.d[0] / self.i0.length()
    }

    /// The certified floor `(c/4)^{1/r_n}`.
    pub fn floor(&self) -> PowerProduct {
        let rn = self.weight.rn();
        let e = Ratio::new(rn.denom().to_i64().unwrap(), rn.numer().to_i64().unwrap());
        PowerProduct::new(vec![(&self.c / qi(4), e)])
    }
}

//! Escape test: does `b(β'l)a(β(q+1))z(x)u(φ(x))ℤ^{n+1}` leave `K_{e^{-εβl}}`
//! for some sampled `x` in an interval?

use crate::curve::CurveModel;
use crate::error::LatticeError;
use crate::interval::RationalInterval;
use crate::lattice::flow::{dani_matrix, FlowMatrix, FlowParams};
use crate::lattice::svp::{in_compact, LatticeBasis};
use crate::rational::{qi, Q};
use crate::real::{Real, PRECISIONS};
use crate::weight::Weight;

/// Flow rates and the compactness exponent used by the escape test.
#[derive(Clone, Debug)]
pub struct EscapeScales {
    pub weight: Weight,
    /// `ln R`, or any positive enclosure in test mode.
    pub ln_r: Real,
    pub epsilon: Q,
}

impl EscapeScales {
    pub fn beta(&self, prec: u32) -> Real {
        self.ln_r.with_prec(prec).div(&Real::from_q(&(qi(1) + self.weight.r1()), prec)).unwrap()
    }

    pub fn beta_prime(&self, prec: u32) -> Real {
        let n = self.weight.n() as i64;
        self.ln_r.with_prec(prec).div(&Real::from_q(&(qi(1) + Q::new(1.into(), n.into())), prec)).unwrap()
    }
}

/// Per-(q, l) data shared by every sample point.
pub struct EscapeKernel<'a> {
    curve: &'a CurveModel,
    weight: &'a Weight,
    q: usize,
    l: usize,
    scales: &'a EscapeScales,
    levels: Vec<(u32, FlowMatrix, Real)>,
}

impl<'a> EscapeKernel<'a> {
    pub fn new(curve: &'a CurveModel, scales: &'a EscapeScales, q: usize, l: usize) -> Self {
        EscapeKernel { curve, weight: &scales.weight, q, l, scales, levels: Vec::new() }
    }

    fn level(&mut self, prec: u32) -> Result<(FlowMatrix, Real), LatticeError> {
        if let Some((_, d, eps)) = self.levels.iter().find(|(p, _, _)| *p == prec) {
            return Ok((d.clone(), eps.clone()));
        }
        let beta = self.scales.beta(prec);
        let beta_p = self.scales.beta_prime(prec);
        let t_a = beta.mul_i64(self.q as i64 + 1);
        let t_b = beta_p.mul_i64(self.l as i64);
        let a = dani_matrix(FlowParams::A { t: &t_a, weight: self.weight }, prec)?;
        let b = dani_matrix(FlowParams::B { t: &t_b, n: self.weight.n() }, prec)?;
        let d = b.mul(&a)?;
        let eps = beta.mul_q(&self.scales.epsilon).mul_i64(self.l as i64).neg().exp();
        self.levels.push((prec, d.clone(), eps.clone()));
        Ok((d, eps))
    }

    /// The lattice `b(β'l)a(β(q+1))z(x)u(φ(x))ℤ^{n+1}` at precision `prec`.
    pub fn basis_at(&mut self, x: &Q, prec: u32) -> Result<LatticeBasis, LatticeError> {
        let (d, _) = self.level(prec)?;
        let xr = Real::from_q(x, prec);
        let phi: Vec<Real> = self.curve.eval(x).iter().map(|v| Real::from_q(v, prec)).collect();
        let u = dani_matrix(FlowParams::U { x: &phi }, prec)?;
        let z = dani_matrix(FlowParams::Z { x: &xr, curve: self.curve }, prec)?;
        let g = FlowMatrix::product(&[d, z, u])?;
        Ok(LatticeBasis::new(g, format!("b(β'·{})a(β·{})z(x)u(φ(x))", self.l, self.q + 1)))
    }

    /// Whether the lattice at `x` lies outside `K_{e^{-εβl}}`, refining the
    /// precision on undecided comparisons.
    pub fn escapes_at(&mut self, x: &Q) -> Result<bool, LatticeError> {
        let mut last = None;
        for &prec in PRECISIONS.iter() {
            let (_, eps) = self.level(prec)?;
            let basis = self.basis_at(x, prec)?;
            match in_compact(&basis, &eps) {
                Ok(inside) => return Ok(!inside),
                Err(e @ (LatticeError::Undecidable(_) | LatticeError::PrecisionExhausted(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap())
    }
}

/// `samples` equally spaced points of `iv`, endpoints included.
pub fn sample_points(iv: &RationalInterval, samples: usize) -> Vec<Q> {
    if samples <= 1 {
        return vec![iv.midpoint()];
    }
    let step = iv.length() / qi(samples as i64 - 1);
    (0..samples).map(|k| iv.left() + &step * qi(k as i64)).collect()
}

pub fn escape_witness(
    curve: &CurveModel,
    iv: &RationalInterval,
    l: usize,
    q: usize,
    scales: &EscapeScales,
    samples: usize,
) -> Result<bool, LatticeError> {
    let mut kernel = EscapeKernel::new(curve, scales, q, l);
    for x in sample_points(iv, samples) {
        if kernel.escapes_at(&x)? {
            return Ok(true);
        }
    }
    Ok(false)
}

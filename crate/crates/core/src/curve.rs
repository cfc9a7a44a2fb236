//! Polynomial curves `x ↦ (x, φ₂(x), …, φₙ(x))`, shift fields and base
//! interval selection.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::interval::RationalInterval;
use crate::measure::MeasureOracle;
use crate::poly::Poly;
use crate::rational::{fmt_q, max_q, min_q, q, Q};

/// Open rational interval `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub a: Q,
    pub b: Q,
}

impl Domain {
    pub fn new(a: Q, b: Q) -> Result<Self, CoreError> {
        if a >= b {
            return Err(CoreError::InvalidInterval { left: fmt_q(&a), right: fmt_q(&b) });
        }
        Ok(Domain { a, b })
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.a < *x && *x < self.b
    }

    pub fn midpoint(&self) -> Q {
        (&self.a + &self.b) / Q::from_integer(BigInt::from(2))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModel {
    components: Vec<Poly>,
    domain: Domain,
}

fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    for r in rows.iter_mut() {
        r.resize(cols, Q::zero());
    }
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = &rows[i][col] / &pivot;
                for k in col..cols {
                    let v = &rows[rank][k] * &f;
                    rows[i][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn build_curve(components: Vec<Poly>, domain: Domain) -> Result<CurveModel, CoreError> {
    if components.is_empty() {
        return Err(CoreError::DimensionMismatch { what: "curve".into(), expected: 1, found: 0 });
    }
    if components[0] != Poly::identity() {
        return Err(CoreError::FirstComponentNotIdentity);
    }
    let mut rows = vec![vec![Q::one()]];
    rows.extend(components.iter().map(|p| p.coeffs().to_vec()));
    let expected = components.len() + 1;
    let r = rank(rows);
    if r < expected {
        return Err(CoreError::Degenerate { rank: r, expected });
    }
    Ok(CurveModel { components, domain })
}

impl CurveModel {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `φ_i`, 1-based.
    pub fn phi(&self, i: usize) -> &Poly {
        &self.components[i - 1]
    }

    pub fn eval(&self, x: &Q) -> Vec<Q> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn derivatives(&self) -> Vec<Poly> {
        self.components.iter().map(Poly::derivative).collect()
    }

    /// `1 + max_i sup |φ_i'|` over `iv`, via coefficient envelopes.
    pub fn f0_on(&self, iv: &RationalInterval) -> Q {
        let mut m = Q::zero();
        for d in self.derivatives() {
            m = max_q(&m, &d.abs_envelope(iv));
        }
        Q::one() + m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftField {
    components: Vec<Poly>,
    lipschitz: Vec<Q>,
}

/// Floor used when a component's derivative bound vanishes.
pub fn lipschitz_floor() -> Q {
    q(1, 1000)
}

impl ShiftField {
    /// Derives `d_i = max(sup |θ_i'|, 10⁻³)` on `on`, or checks supplied
    /// constants by sampling; either way 1000 random pairs are verified.
    pub fn derive(
        components: Vec<Poly>,
        n: usize,
        on: &RationalInterval,
        supplied: Option<Vec<Q>>,
    ) -> Result<ShiftField, CoreError> {
        if components.len() != n {
            return Err(CoreError::DimensionMismatch { what: "shift".into(), expected: n, found: components.len() });
        }
        let lipschitz = match supplied {
            Some(d) => {
                if d.len() != n {
                    return Err(CoreError::DimensionMismatch { what: "lipschitz".into(), expected: n, found: d.len() });
                }
                if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !v.is_positive()) {
                    return Err(CoreError::NonPositiveEntry { index: i + 1, value: fmt_q(v) });
                }
                d
            }
            None => components.iter().map(|p| max_q(&p.derivative().abs_envelope(on), &lipschitz_floor())).collect(),
        };
        let field = ShiftField { components, lipschitz };
        field.check_lipschitz(on, 1000, 0)?;
        Ok(field)
    }

    pub fn check_lipschitz(&self, on: &RationalInterval, pairs: usize, seed: u64) -> Result<(), CoreError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = on.length();
        let scale = 1i64 << 30;
        let sample = |rng: &mut ChaCha8Rng| on.left() + &len * q(rng.gen_range(0..=scale), scale);
        for _ in 0..pairs {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            for (i, (p, d)) in self.components.iter().zip(&self.lipschitz).enumerate() {
                let lhs = (p.eval(&x) - p.eval(&y)).abs();
                if lhs > d * (&x - &y).abs() {
                    return Err(CoreError::LipschitzViolated { component: i + 1, x: fmt_q(&x), y: fmt_q(&y) });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `θ_i`, 1-based.
    pub fn theta(&self, i: usize) -> &Poly {
        &self.components[i - 1]
    }

    /// `d_i`, 1-based.
    pub fn d(&self, i: usize) -> &Q {
        &self.lipschitz[i - 1]
    }

    pub fn lipschitz(&self) -> &[Q] {
        &self.lipschitz
    }
}

/// `3^k` as a rational.
pub fn three_pow(k: usize) -> Q {
    Q::from_integer(BigInt::from(3).pow(k as u32))
}

/// Largest `I₀` centred at `x₀` with `3^(n+1)|I₀| <= dist(x₀, ∂U)` and
/// `3|I₀| <= min(ρ₀, 1)`, then checks `R > 1/|I₀|`.
pub fn select_base_interval(
    curve: &CurveModel,
    r: u64,
    measure: &dyn MeasureOracle,
    center: Option<&Q>,
) -> Result<RationalInterval, CoreError> {
    let dom = curve.domain();
    let x0 = center.cloned().unwrap_or_else(|| dom.midpoint());
    if !dom.contains(&x0) {
        return Err(CoreError::NoAdmissibleInterval { reason: format!("center {} outside U", fmt_q(&x0)) });
    }
    let dist = min_q(&(&x0 - &dom.a), &(&dom.b - &x0));
    let by_measure = min_q(&measure.rho0(), &Q::one()) / three_pow(1);
    let by_domain = dist / three_pow(curve.n() + 1);
    let len = min_q(&by_measure, &by_domain);
    if Q::from_integer(BigInt::from(r)) * &len <= Q::one() {
        return Err(CoreError::NoAdmissibleInterval {
            reason: format!("R = {r} does not exceed 1/|I₀| with |I₀| = {}", fmt_q(&len)),
        });
    }
    Ok(RationalInterval::centered(&x0, &(len / Q::from_integer(BigInt::from(2)))))
}

//! Ahlfors-regular measures queried on intervals.

use num_bigint::BigInt;

use crate::interval::RationalInterval;
use crate::rational::{pow_q, Q};

/// Measure μ with `C⁻¹ρ^α <= μ(B(x,ρ)) <= Cρ^α` for `ρ <= ρ₀`.
pub trait MeasureOracle: Send + Sync {
    fn name(&self) -> &'static str;
    fn c(&self) -> Q;
    fn alpha(&self) -> Q;
    fn rho0(&self) -> Q;
    fn measure(&self, iv: &RationalInterval) -> Q;
    fn is_lebesgue(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
pub struct Lebesgue {
    pub rho0: Q,
}

impl Lebesgue {
    pub fn new(rho0: Q) -> Self {
        Lebesgue { rho0 }
    }
}

impl MeasureOracle for Lebesgue {
    fn name(&self) -> &'static str {
        "lebesgue"
    }
    fn c(&self) -> Q {
        Q::from_integer(1.into())
    }
    fn alpha(&self) -> Q {
        Q::from_integer(1.into())
    }
    fn rho0(&self) -> Q {
        self.rho0.clone()
    }
    fn measure(&self, iv: &RationalInterval) -> Q {
        iv.length()
    }
    fn is_lebesgue(&self) -> bool {
        true
    }
}

/// `k` times Lebesgue measure, Ahlfors regular with `C = max(k, 1/k)`.
#[derive(Clone, Debug)]
pub struct ScaledLebesgue {
    pub k: Q,
    pub rho0: Q,
}

impl MeasureOracle for ScaledLebesgue {
    fn name(&self) -> &'static str {
        "scaled-lebesgue"
    }
    fn c(&self) -> Q {
        if self.k >= Q::from_integer(1.into()) {
            self.k.clone()
        } else {
            self.k.recip()
        }
    }
    fn alpha(&self) -> Q {
        Q::from_integer(1.into())
    }
    fn rho0(&self) -> Q {
        self.rho0.clone()
    }
    fn measure(&self, iv: &RationalInterval) -> Q {
        &self.k * iv.length()
    }
}

fn exp_parts(alpha: &Q) -> (u32, u32) {
    use num_traits::ToPrimitive;
    (alpha.numer().to_u32().expect("alpha numerator"), alpha.denom().to_u32().expect("alpha denominator"))
}

/// `μ(I) < (3C)⁻¹|I|^α`, decided exactly.
pub fn measure_deficient(m: &dyn MeasureOracle, iv: &RationalInterval) -> bool {
    let (s, t) = exp_parts(&m.alpha());
    let mu = m.measure(iv);
    let three_c = m.c() * Q::from_integer(BigInt::from(3));
    // mu^t (3C)^t < |I|^s
    let lhs = pow_q(&mu, t) * pow_q(&three_c, t);
    let deficient = lhs < pow_q(&iv.length(), s);
    if m.is_lebesgue() {
        assert!(!deficient, "Lebesgue measure cannot be deficient on {iv}");
    }
    deficient
}

/// `R^α >= 21C²`, decided exactly.
pub fn r_alpha_admissible(m: &dyn MeasureOracle, r: u64) -> bool {
    let (s, t) = exp_parts(&m.alpha());
    let c2 = m.c() * m.c() * Q::from_integer(BigInt::from(21));
    Q::from_integer(BigInt::from(r).pow(s)) >= pow_q(&c2, t)
}

//! Univariate polynomials with rational coefficients.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::interval::RationalInterval;
use crate::rational::{fmt_q, max_q, parse_q, Q};
use crate::real::Real;

/// Coefficients in ascending powers; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Q) -> Poly {
        Poly::new(vec![c])
    }

    pub fn identity() -> Poly {
        Poly::new(vec![Q::zero(), Q::from_integer(1.into())])
    }

    pub fn monomial(k: usize) -> Poly {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::from_integer(1.into());
        Poly::new(c)
    }

    /// Whitespace-separated ascending coefficients, e.g. `1/3 1/11`.
    pub fn parse(s: &str) -> Result<Poly, String> {
        let coeffs = s.split_whitespace().map(parse_q).collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err("polynomial needs at least one coefficient".into());
        }
        Ok(Poly::new(coeffs))
    }

    pub fn to_config(&self) -> String {
        if self.coeffs.is_empty() {
            return "0/1".into();
        }
        self.coeffs.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_real(&self, x: &Real) -> Real {
        let mut acc = Real::zero(x.prec());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add_q(c);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::rational::to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer((k as i64).into())).collect())
    }

    /// `sum |a_k| B^k` with `B = max(|left|, |right|)`: bounds `|p|` on `iv`.
    pub fn abs_envelope(&self, iv: &RationalInterval) -> Q {
        let b = max_q(&iv.left().abs(), &iv.right().abs());
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &b + c.abs();
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

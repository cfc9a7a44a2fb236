//! Mahler's transference for a system of linear forms and its transpose.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::OracleError;
use crate::rational::{ceil_q, ceil_root, pow_q, q, qi, Q};

/// Forms `L_0 … L_n` in `u_0 … u_n` (row `i` holds the coefficients of
/// `L_i`) with bounds `T_0 … T_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferInstance {
    pub forms: Vec<Vec<Q>>,
    pub bounds: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferReport {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub det: Q,
    /// `ι^n = ΠT_i / |d|`
    pub iota_pow: Q,
    /// Rows of the transposed system `L′`.
    pub dual: Vec<Vec<Q>>,
}

fn det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    d
}

fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(p, c);
        let piv = a[c][c].clone();
        for k in 0..2 * n {
            a[c][k] /= &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn apply(row: &[Q], v: &[i64]) -> Q {
    row.iter().zip(v).map(|(c, &x)| c * qi(x)).sum()
}

impl TransferInstance {
    pub fn n(&self) -> usize {
        self.forms.len() - 1
    }

    fn validate(&self) -> Result<(), OracleError> {
        let d = self.forms.len();
        if d < 2 || self.forms.iter().any(|r| r.len() != d) || self.bounds.len() != d {
            return Err(OracleError::Malformed("need n+1 forms in n+1 variables and n+1 bounds, n >= 1".into()));
        }
        if self.bounds.iter().any(|t| !t.is_positive()) {
            return Err(OracleError::Malformed("bounds must be positive".into()));
        }
        Ok(())
    }

    pub fn det(&self) -> Q {
        det(&self.forms)
    }

    /// `L′ = (L⁻¹)ᵀ`, so that `Σ L_i(u) L′_i(v) = Σ u_i v_i`.
    pub fn dual(&self) -> Result<Vec<Vec<Q>>, OracleError> {
        let inv = inverse(&self.forms).ok_or(OracleError::Singular)?;
        let d = inv.len();
        Ok((0..d).map(|i| (0..d).map(|j| inv[j][i].clone()).collect()).collect())
    }

    pub fn iota_pow(&self) -> Result<Q, OracleError> {
        let d = self.det();
        if d.is_zero() {
            return Err(OracleError::Singular);
        }
        Ok(self.bounds.iter().fold(Q::one(), |a, t| a * t) / d.abs())
    }

    pub fn primal_ok(&self, u: &[i64]) -> bool {
        u.iter().any(|&x| x != 0) && self.forms.iter().zip(&self.bounds).all(|(row, t)| apply(row, u).abs() <= *t)
    }

    /// `|L′_0(v)| <= nι/T_0` and `|L′_i(v)| <= ι/T_i`, decided as
    /// `(|L′_i(v)| T_i / k_i)^n <= ι^n`.
    pub fn dual_ok(&self, dual: &[Vec<Q>], iota_pow: &Q, v: &[i64]) -> bool {
        let n = self.n() as u32;
        v.iter().any(|&x| x != 0)
            && dual.iter().zip(&self.bounds).enumerate().all(|(i, (row, t))| {
                let k = if i == 0 { qi(n as i64) } else { Q::one() };
                pow_q(&(apply(row, v).abs() * t / k), n) <= *iota_pow
            })
    }

    /// A box half-width `B` whose cube contains the whole dual region:
    /// `v = Lᵀw` with `|w_i|` at most the dual bounds.
    pub fn dual_box_bound(&self) -> Result<i64, OracleError> {
        let n = self.n() as u32;
        let scale: BigInt = BigInt::one() << 64u32;
        let ip = self.iota_pow()?;
        let iota_up = Q::new(ceil_root(&(ip * Q::from_integer(scale.pow(n))), n), scale);
        let d = self.forms.len();
        let b: Vec<Q> = self
            .bounds
            .iter()
            .enumerate()
            .map(|(i, t)| if i == 0 { qi(n as i64) * &iota_up / t } else { &iota_up / t })
            .collect();
        let mut best = 0i64;
        for j in 0..d {
            let s: Q = (0..d).map(|i| self.forms[i][j].abs() * &b[i]).sum();
            best = best.max(ceil_q(&s).try_into().map_err(|_| OracleError::Malformed("dual region too large".into()))?);
        }
        Ok(best)
    }
}

/// Nonzero integer vectors of `[−b, b]^d` in shells of growing sup norm.
fn first_in_box(d: usize, b: i64, mut pred: impl FnMut(&[i64]) -> bool) -> Option<Vec<i64>> {
    for r in 1..=b {
        let mut v = vec![-r; d];
        loop {
            if v.iter().any(|x| x.abs() == r) && pred(&v) {
                return Some(v);
            }
            let mut k = 0;
            while k < d && v[k] == r {
                v[k] = -r;
                k += 1;
            }
            if k == d {
                break;
            }
            v[k] += 1;
        }
    }
    None
}

/// Finds a primal solution in `[−b, b]^{n+1}`, then a dual one in the same
/// box, and checks `Lᵀ L′ = I` exactly.
pub fn transference_check(inst: &TransferInstance, b: i64) -> Result<TransferReport, OracleError> {
    inst.validate()?;
    let det = inst.det();
    if det.is_zero() {
        return Err(OracleError::Singular);
    }
    let dual = inst.dual()?;
    let d = dual.len();
    for i in 0..d {
        for j in 0..d {
            let s: Q = (0..d).map(|k| &inst.forms[k][i] * &dual[k][j]).sum();
            let want = if i == j { Q::one() } else { Q::zero() };
            assert_eq!(s, want, "bilinear identity fails at ({i},{j})");
        }
    }
    let iota_pow = inst.iota_pow()?;
    let u = first_in_box(d, b, |u| inst.primal_ok(u)).ok_or(OracleError::NoPrimalSolution)?;
    let v = first_in_box(d, b, |v| inst.dual_ok(&dual, &iota_pow, v)).ok_or(OracleError::SearchExhausted)?;
    Ok(TransferReport { u, v, det, iota_pow, dual })
}

/// A random nonsingular system with coefficients in `[−3, 3]` and a planted
/// primal solution.
pub fn planted_instance<R: Rng>(rng: &mut R, n: usize) -> (TransferInstance, Vec<i64>) {
    let d = n + 1;
    loop {
        let forms: Vec<Vec<Q>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let den = rng.gen_range(1..=3);
                        q(rng.gen_range(-3 * den..=3 * den), den)
                    })
                    .collect()
            })
            .collect();
        if det(&forms).is_zero() {
            continue;
        }
        let u: Vec<i64> = loop {
            let u: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
            if u.iter().any(|&x| x != 0) {
                break u;
            }
        };
        let bounds = forms.iter().map(|row| apply(row, &u).abs() + q(rng.gen_range(1..=8), 8)).collect();
        return (TransferInstance { forms, bounds }, u);
    }
}

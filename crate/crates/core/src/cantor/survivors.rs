//! The survivor recursion `t′_q = R − h′_{q,q} − Σ_j h′_{q−j,q} / Π_{i≤j} t′_{q−i}`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::cantor::LedgerRow;
use crate::rational::{pow_q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorReport {
    /// `t′₀, t′₁, …`, stopping after the first non-positive value.
    pub t: Vec<Q>,
    /// Every computed `t′_q` is positive and the recursion covers all rows.
    pub criterion_met: bool,
}

/// Runs the recursion on `h′_{p,q} = rows[q].h_prime[p]`.
pub fn survivor_counts(r: u32, rows: &[LedgerRow]) -> SurvivorReport {
    let table: Vec<Vec<u64>> = rows.iter().map(|row| row.h_prime.iter().map(|&v| v as u64).collect()).collect();
    survivor_recursion(r as u64, &table)
}

/// Same recursion on a bare table, `table[q][p] = h′_{p,q}` for `p <= q`.
pub fn survivor_recursion(r: u64, table: &[Vec<u64>]) -> SurvivorReport {
    let mut t: Vec<Q> = Vec::with_capacity(table.len());
    for (q, row) in table.iter().enumerate() {
        let at = |p: usize| qi(row.get(p).copied().unwrap_or(0) as i64);
        let mut v = qi(r as i64) - at(q);
        let mut prod = qi(1);
        for j in 1..=q {
            prod *= &t[q - j];
            v -= at(q - j) / &prod;
        }
        let stop = !v.is_positive();
        t.push(v);
        if stop {
            return SurvivorReport { t, criterion_met: false };
        }
    }
    SurvivorReport { t, criterion_met: true }
}

/// `Π t′_q`, the guaranteed number of survivors after all rows; zero once
/// some `t′_q <= 0`.
pub fn guaranteed_survivors(report: &SurvivorReport) -> Q {
    if !report.criterion_met {
        return qi(0);
    }
    report.t.iter().fold(qi(1), |a, b| a * b)
}

/// `t >= (6C)^{−2}R^α`, exactly, for `α = s/u`.
pub fn meets_induction_floor(t: &Q, r: u64, measure_c: &Q, alpha: &Q) -> bool {
    if !t.is_positive() {
        return false;
    }
    let s = alpha.numer().to_u32().expect("alpha numerator");
    let u = alpha.denom().to_u32().expect("alpha denominator");
    // (36C² t)^u >= R^s
    let lhs = pow_q(&(qi(36) * measure_c * measure_c * t), u);
    lhs.cmp(&Q::from_integer(BigInt::from(r).pow(s))) != Ordering::Less
}

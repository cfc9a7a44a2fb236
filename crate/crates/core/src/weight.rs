use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::CoreError;
use crate::rational::{fmt_q, Q};

/// Weight vector `r_1 >= … >= r_n > 0` summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    entries: Vec<Q>,
    frac: Vec<(u32, u32)>,
}

pub fn validate_weights(raw: &[Q]) -> Result<Weight, CoreError> {
    if raw.is_empty() {
        return Err(CoreError::EmptyWeight);
    }
    for (i, r) in raw.iter().enumerate() {
        if !r.is_positive() {
            return Err(CoreError::NonPositiveEntry { index: i + 1, value: fmt_q(r) });
        }
    }
    let sum: Q = raw.iter().sum();
    if !sum.is_one() {
        return Err(CoreError::SumNotOne { sum: fmt_q(&sum) });
    }
    let mut entries = raw.to_vec();
    entries.sort_by(|a, b| b.cmp(a));
    let mut frac = Vec::with_capacity(entries.len());
    for (i, r) in entries.iter().enumerate() {
        let s = r.numer().to_u32().ok_or(CoreError::WeightTooFine { index: i + 1 })?;
        let t = r.denom().to_u32().ok_or(CoreError::WeightTooFine { index: i + 1 })?;
        if t > 1 << 16 {
            return Err(CoreError::WeightTooFine { index: i + 1 });
        }
        frac.push((s, t));
    }
    Ok(Weight { entries, frac })
}

impl Weight {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// `r_i`, 1-based.
    pub fn r(&self, i: usize) -> &Q {
        &self.entries[i - 1]
    }

    pub fn r1(&self) -> &Q {
        &self.entries[0]
    }

    pub fn rn(&self) -> &Q {
        self.entries.last().unwrap()
    }

    /// `(s, t)` with `r_i = s/t` in lowest terms, 1-based.
    pub fn frac(&self, i: usize) -> (u32, u32) {
        self.frac[i - 1]
    }

    pub fn entries(&self) -> &[Q] {
        &self.entries
    }

    pub fn is_zero_free(&self) -> bool {
        self.entries.iter().all(|r| !r.is_zero())
    }
}

//! Closed intervals with exact rational endpoints.

use std::fmt;

use num_bigint::BigInt;

use crate::error::CoreError;
use crate::rational::{fmt_q, max_q, min_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalInterval {
    left: Q,
    right: Q,
}

impl RationalInterval {
    pub fn new(left: Q, right: Q) -> Result<Self, CoreError> {
        if left > right {
            return Err(CoreError::InvalidInterval { left: fmt_q(&left), right: fmt_q(&right) });
        }
        Ok(RationalInterval { left, right })
    }

    pub fn centered(center: &Q, radius: &Q) -> Self {
        RationalInterval { left: center - radius, right: center + radius }
    }

    pub fn left(&self) -> &Q {
        &self.left
    }

    pub fn right(&self) -> &Q {
        &self.right
    }

    pub fn length(&self) -> Q {
        &self.right - &self.left
    }

    pub fn midpoint(&self) -> Q {
        (&self.left + &self.right) / Q::from_integer(BigInt::from(2))
    }

    /// Same center, `k` times the length.
    pub fn dilate(&self, k: &Q) -> Self {
        let half = self.length() * k / Q::from_integer(BigInt::from(2));
        RationalInterval::centered(&self.midpoint(), &half)
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.left <= *x && *x <= self.right
    }

    pub fn contains_interval(&self, other: &RationalInterval) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    /// Closed-closed intersection test.
    pub fn meets(&self, other: &RationalInterval) -> bool {
        self.left <= other.right && other.left <= self.right
    }

    /// Whether this closed interval meets the open interior of `other`.
    pub fn meets_interior(&self, other: &RationalInterval) -> bool {
        other.left < other.right && self.left < other.right && other.left < self.right
    }

    pub fn intersect(&self, other: &RationalInterval) -> Option<Self> {
        let l = max_q(&self.left, &other.left);
        let r = min_q(&self.right, &other.right);
        (l <= r).then_some(RationalInterval { left: l, right: r })
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance_to(&self, x: &Q) -> Q {
        if *x < self.left {
            &self.left - x
        } else if *x > self.right {
            x - &self.right
        } else {
            Q::from_integer(0.into())
        }
    }

    /// The `k`-th of `r` equal closed children, `0 <= k < r`.
    pub fn child(&self, k: u32, r: u32) -> Self {
        let step = self.length() / Q::from_integer(BigInt::from(r));
        let left = &self.left + &step * Q::from_integer(BigInt::from(k));
        let right = if k + 1 == r { self.right.clone() } else { &left + &step };
        RationalInterval { left, right }
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_q(&self.left), fmt_q(&self.right))
    }
}

/// Splits `iv` into `r` consecutive closed intervals of equal exact length.
pub fn partition(iv: &RationalInterval, r: u32) -> Vec<RationalInterval> {
    assert!(r >= 2, "partition arity must be at least 2");
    (0..r).map(|k| iv.child(k, r)).collect()
}

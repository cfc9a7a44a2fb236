//! Checks a certificate's claim: every banded denominator `m` keeps the
//! point's quality above the floor `(c/4)^{1/r_n}`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::cantor::certificate::Certificate;
use crate::error::{ConfigError, OracleError};
use crate::oracle::quality::{quality, Quality};
use crate::rational::{floor_q, fmt_q, PowerProduct, Q};

/// Largest range the verifier scans.
pub const MAX_VERIFY_RANGE: u64 = 50_000_000;

/// Tables longer than this are summarized in the serialized report.
pub const TABLE_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QualityReport {
    pub point: Q,
    /// Scanned `m_lower < m <= m_upper`.
    pub m_lower: Q,
    pub m_upper: u64,
    pub floor: PowerProduct,
    /// Smallest quality in range, if the range is nonempty.
    pub worst: Option<Quality>,
    pub failures: Vec<Quality>,
    /// One entry per scanned `m`, ascending.
    pub table: Vec<Quality>,
}

impl QualityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// `CertificateBroken` at the first failing `m`.
    pub fn into_result(self) -> Result<QualityReport, OracleError> {
        match self.failures.first() {
            None => Ok(self),
            Some(f) => Err(OracleError::CertificateBroken {
                m: f.m as u64,
                value: format!("{:.6e}", f.value.approx()),
                floor: format!("{:.6e}", self.floor.approx()),
            }),
        }
    }

    /// Key-value lines for the certificate's report section.
    pub fn to_section(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("verdict".to_string(), if self.pass() { "pass" } else { "fail" }.to_string()),
            ("point".into(), fmt_q(&self.point)),
            ("range".into(), format!("({}, {}]", fmt_q(&self.m_lower), self.m_upper)),
            ("scope".into(), "finitely many banded denominators; no claim beyond m_upper".into()),
            ("floor_decimal".into(), format!("{:.12e}", self.floor.approx())),
            ("checked".into(), self.table.len().to_string()),
        ];
        if let Some(w) = &self.worst {
            out.push(("worst_m".into(), w.m.to_string()));
            out.push(("worst_i".into(), w.i.to_string()));
            out.push(("worst_value_decimal".into(), format!("{:.12e}", w.value.approx())));
        }
        for f in &self.failures {
            let p: Vec<String> = f.p.iter().map(BigInt::to_string).collect();
            out.push((format!("failure_m{}", f.m), format!("i={} p={}", f.i, p.join(","))));
        }
        if self.table.len() <= TABLE_LIMIT {
            for t in &self.table {
                out.push((format!("m{}", t.m), format!("{:.6e};i={}", t.value.approx(), t.i)));
            }
        }
        out
    }
}

fn malformed(e: ConfigError) -> OracleError {
    OracleError::Malformed(e.to_string())
}

pub fn verify_certificate(cert: &Certificate) -> Result<QualityReport, OracleError> {
    let curve = cert.curve_model().map_err(malformed)?;
    let shift = cert.shift_field().map_err(malformed)?;
    let weight = cert.weight().map_err(malformed)?;
    let floor = cert.floor().map_err(malformed)?;
    if !cert.chain.last().is_some_and(|iv| iv.contains(&cert.point)) {
        return Err(OracleError::Malformed("point is outside the last chain interval".into()));
    }
    let lo = floor_q(&cert.m_lower).to_i64().map(|v| v.max(0) as u64 + 1);
    let hi = cert.m_max.to_u64();
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if hi < lo || hi - lo < MAX_VERIFY_RANGE => (lo, hi),
        _ => return Err(OracleError::Malformed(format!("denominator range up to {} is too large", cert.m_max))),
    };
    let table: Vec<Quality> =
        (lo..=hi).into_par_iter().map(|m| quality(&curve, &shift, &weight, &cert.point, m as i64)).collect();
    let failures: Vec<Quality> =
        table.iter().filter(|t| t.value.cmp_exact(&floor) == Ordering::Less).cloned().collect();
    let worst = table.iter().cloned().reduce(|a, b| if b.value.cmp_exact(&a.value) == Ordering::Less { b } else { a });
    Ok(QualityReport {
        point: cert.point.clone(),
        m_lower: cert.m_lower.clone(),
        m_upper: hi,
        floor,
        worst,
        failures,
        table,
    })
}

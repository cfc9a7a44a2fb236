//! The emitted proof object and its sectioned text format.
//!
//! Every rational is written as `num/den`; decimals appear only as
//! informational companions. Serialization is canonical, so identical runs
//! give identical bytes and `parse` inverts `serialize`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::cantor::survivors::{guaranteed_survivors, meets_induction_floor, survivor_counts};
use crate::cantor::{extract_point, CantorState, LedgerRow};
use crate::constants::ConstantSheet;
use crate::curve::{build_curve, CurveModel, Domain, ShiftField};
use crate::dangerous::WindowContext;
use crate::error::{CantorError, ConfigError};
use crate::interval::RationalInterval;
use crate::poly::Poly;
use crate::rational::{fmt_q, parse_q, qi, PowerProduct, Q};
use crate::real::Real;
use crate::weight::{validate_weights, Weight};

pub const FORMAT: &str = "bad-cantor-certificate/1";

const COUNTING_MET: &str = "counting criterion met";
const COUNTING_NOT_MET: &str = "counting criterion not met; survivor exhibited constructively";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub config_hash: String,
    pub r: u64,
    pub weights: Vec<Q>,
    pub i0: RationalInterval,
    pub c: Q,
    pub d: Vec<Q>,
    /// Informational constants, in output order.
    pub constants: Vec<(String, String)>,
    pub domain: Domain,
    pub curve: Vec<Poly>,
    pub shift: Vec<Poly>,
    pub chain: Vec<RationalInterval>,
    pub point: Q,
    pub q_max: usize,
    /// Denominators claimed are `m_lower < m <= m_max`.
    pub m_lower: Q,
    pub m_max: BigInt,
    /// One row per step, plus a final row holding only the alive count.
    pub ledger: Vec<LedgerRow>,
    pub counting: Vec<(String, String)>,
    /// Filled by the verifier.
    pub report: Vec<(String, String)>,
}

/// A user-supplied `(C₀′, η₀′)` pair tested against measured `h′_{p,q}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitParams {
    pub c0: Q,
    pub eta0: Q,
}

impl Certificate {
    pub fn weight(&self) -> Result<Weight, ConfigError> {
        validate_weights(&self.weights).map_err(|e| ConfigError::Certificate(e.to_string()))
    }

    pub fn curve_model(&self) -> Result<CurveModel, ConfigError> {
        build_curve(self.curve.clone(), self.domain.clone()).map_err(|e| ConfigError::Certificate(e.to_string()))
    }

    /// The shift with the recorded Lipschitz constants.
    pub fn shift_field(&self) -> Result<ShiftField, ConfigError> {
        let on = self.i0.dilate(&crate::curve::three_pow(self.curve.len() + 1));
        ShiftField::derive(self.shift.clone(), self.curve.len(), &on, Some(self.d.clone()))
            .map_err(|e| ConfigError::Certificate(e.to_string()))
    }

    /// The claimed floor `(c/4)^{1/r_n}`.
    pub fn floor(&self) -> Result<PowerProduct, ConfigError> {
        let w = self.weight()?;
        let rn = w.rn();
        let e = Ratio::new(rn.denom().to_i64().unwrap(), rn.numer().to_i64().unwrap());
        Ok(PowerProduct::new(vec![(&self.c / qi(4), e)]))
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: &str| {
            let _ = writeln!(s, "{k}={v}");
        };
        let join = |v: &[Q]| v.iter().map(fmt_q).collect::<Vec<_>>().join(",");
        let iv = |i: &RationalInterval| format!("{},{}", fmt_q(i.left()), fmt_q(i.right()));

        s.push_str("[header]\n");
        kv(&mut s, "format", FORMAT);
        kv(&mut s, "config_hash", &self.config_hash);

        s.push_str("\n[constants]\n");
        kv(&mut s, "R", &self.r.to_string());
        kv(&mut s, "weights", &join(&self.weights));
        kv(&mut s, "I0", &iv(&self.i0));
        kv(&mut s, "c", &fmt_q(&self.c));
        kv(&mut s, "d", &join(&self.d));
        for (k, v) in &self.constants {
            kv(&mut s, k, v);
        }

        s.push_str("\n[curve]\n");
        kv(&mut s, "domain", &format!("{},{}", fmt_q(&self.domain.a), fmt_q(&self.domain.b)));
        for (i, p) in self.curve.iter().enumerate() {
            kv(&mut s, &format!("phi{}", i + 1), &p.to_config());
        }

        s.push_str("\n[shift]\n");
        for (i, p) in self.shift.iter().enumerate() {
            kv(&mut s, &format!("theta{}", i + 1), &p.to_config());
        }

        s.push_str("\n[chain]\n");
        for c in &self.chain {
            let _ = writeln!(s, "{}", iv(c));
        }

        s.push_str("\n[point]\n");
        kv(&mut s, "x", &fmt_q(&self.point));
        kv(&mut s, "q_max", &self.q_max.to_string());
        kv(&mut s, "m_lower_exclusive", &fmt_q(&self.m_lower));
        kv(&mut s, "m_max", &self.m_max.to_string());

        s.push_str("\n[floor]\n");
        if let Ok(w) = self.weight() {
            let base = &self.c / qi(4);
            kv(&mut s, "base", &fmt_q(&base));
            kv(&mut s, "exponent", &fmt_q(&w.rn().recip()));
            let dec = Real::from_q(&base, 256).pow_q(&w.rn().recip()).map(|v| v.to_sci(40)).unwrap_or_default();
            kv(&mut s, "decimal", &dec);
        }

        s.push_str("\n[ledger]\n");
        s.push_str(
            "q,tracked,alive_children,removed_measure,removed_lattice,removed_dangerous,windows,max_hits_per_window,max_v,max_j,h_prime,h,f\n",
        );
        for row in &self.ledger {
            s.push_str(&ledger_line(row));
            s.push('\n');
        }

        s.push_str("\n[windows]\n");
        for row in self.ledger.iter().filter(|r| !r.h_prime.is_empty()) {
            let _ = writeln!(s, "{}\t{}\t{}", row.q, row.windows, row.removed_dangerous);
        }

        s.push_str("\n[counting]\n");
        for (k, v) in &self.counting {
            kv(&mut s, k, v);
        }

        if !self.report.is_empty() {
            s.push_str("\n[report]\n");
            for (k, v) in &self.report {
                kv(&mut s, k, v);
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Certificate, ConfigError> {
        let sections = split_sections(text)?;
        let get_section = |name: &str| -> Result<&Vec<String>, ConfigError> {
            sections
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v)
                .ok_or_else(|| ConfigError::Certificate(format!("missing section [{name}]")))
        };
        let header = pairs(get_section("header")?)?;
        let format = lookup(&header, "format")?;
        if format != FORMAT {
            return Err(ConfigError::Certificate(format!("unsupported format {format:?}")));
        }
        let config_hash = lookup(&header, "config_hash")?;

        let consts = pairs(get_section("constants")?)?;
        let r: u64 = lookup(&consts, "R")?.parse().map_err(|e| bad("R", e))?;
        let weights = q_list(&lookup(&consts, "weights")?)?;
        let i0 = q_interval(&lookup(&consts, "I0")?)?;
        let c = q_one(&lookup(&consts, "c")?)?;
        let d = q_list(&lookup(&consts, "d")?)?;
        let typed = ["R", "weights", "I0", "c", "d"];
        let constants = consts.into_iter().filter(|(k, _)| !typed.contains(&k.as_str())).collect();

        let curve_kv = pairs(get_section("curve")?)?;
        let dom = q_list(&lookup(&curve_kv, "domain")?)?;
        if dom.len() != 2 {
            return Err(ConfigError::Certificate("domain needs two endpoints".into()));
        }
        let domain =
            Domain::new(dom[0].clone(), dom[1].clone()).map_err(|e| ConfigError::Certificate(e.to_string()))?;
        let curve = indexed_polys(&curve_kv, "phi")?;
        let shift = indexed_polys(&pairs(get_section("shift")?)?, "theta")?;

        let chain = get_section("chain")?.iter().map(|l| q_interval(l)).collect::<Result<Vec<_>, _>>()?;

        let pt = pairs(get_section("point")?)?;
        let point = q_one(&lookup(&pt, "x")?)?;
        let q_max: usize = lookup(&pt, "q_max")?.parse().map_err(|e| bad("q_max", e))?;
        let m_lower = q_one(&lookup(&pt, "m_lower_exclusive")?)?;
        let m_max: BigInt = lookup(&pt, "m_max")?.parse().map_err(|e| bad("m_max", e))?;

        let ledger_lines = get_section("ledger")?;
        let ledger = ledger_lines.iter().skip(1).map(|l| parse_ledger_line(l)).collect::<Result<Vec<_>, _>>()?;

        let counting = pairs(get_section("counting")?)?;
        let report = match sections.iter().find(|(n, _)| n == "report") {
            Some((_, lines)) => pairs(lines)?,
            None => Vec::new(),
        };

        Ok(Certificate {
            config_hash,
            r,
            weights,
            i0,
            c,
            d,
            constants,
            domain,
            curve,
            shift,
            chain,
            point,
            q_max,
            m_lower,
            m_max,
            ledger,
            counting,
            report,
        })
    }
}

fn bad(key: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Certificate(format!("{key}: {e}"))
}

fn q_one(s: &str) -> Result<Q, ConfigError> {
    parse_q(s).map_err(ConfigError::Certificate)
}

fn q_list(s: &str) -> Result<Vec<Q>, ConfigError> {
    s.split(',').map(q_one).collect()
}

fn q_interval(s: &str) -> Result<RationalInterval, ConfigError> {
    let v = q_list(s)?;
    if v.len() != 2 {
        return Err(ConfigError::Certificate(format!("interval {s:?} needs two endpoints")));
    }
    RationalInterval::new(v[0].clone(), v[1].clone()).map_err(|e| ConfigError::Certificate(e.to_string()))
}

fn split_sections(text: &str) -> Result<Vec<(String, Vec<String>)>, ConfigError> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push((name.to_string(), Vec::new()));
        } else if let Some((_, lines)) = out.last_mut() {
            lines.push(line.to_string());
        } else {
            return Err(ConfigError::Certificate(format!("content before first section: {line:?}")));
        }
    }
    Ok(out)
}

fn pairs(lines: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    lines
        .iter()
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| ConfigError::Certificate(format!("expected key=value, got {l:?}")))
        })
        .collect()
}

fn lookup(kv: &[(String, String)], key: &str) -> Result<String, ConfigError> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| ConfigError::Certificate(format!("missing key {key:?}")))
}

fn indexed_polys(kv: &[(String, String)], prefix: &str) -> Result<Vec<Poly>, ConfigError> {
    let mut out = Vec::new();
    for i in 1.. {
        match kv.iter().find(|(k, _)| *k == format!("{prefix}{i}")) {
            Some((_, v)) => out.push(Poly::parse(v).map_err(ConfigError::Certificate)?),
            None => break,
        }
    }
    Ok(out)
}

fn usize_list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, ConfigError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| x.parse().map_err(|e| bad("ledger", e))).collect()
}

fn ledger_line(r: &LedgerRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.q,
        r.tracked,
        r.alive_children,
        r.removed_measure,
        r.removed_lattice,
        r.removed_dangerous,
        r.windows,
        r.max_hits_per_window,
        r.max_v_per_grandparent,
        r.max_j_per_v,
        usize_list(&r.h_prime),
        usize_list(&r.h),
        usize_list(&r.f)
    )
}

fn parse_ledger_line(line: &str) -> Result<LedgerRow, ConfigError> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 13 {
        return Err(ConfigError::Certificate(format!("ledger row has {} fields: {line:?}", f.len())));
    }
    let n = |k: usize| f[k].parse::<usize>().map_err(|e| bad("ledger", e));
    Ok(LedgerRow {
        q: n(0)?,
        tracked: n(1)?,
        alive_children: n(2)?,
        removed_measure: n(3)?,
        removed_lattice: n(4)?,
        removed_dangerous: n(5)?,
        windows: n(6)?,
        max_hits_per_window: n(7)?,
        max_v_per_grandparent: n(8)?,
        max_j_per_v: n(9)?,
        h_prime: parse_usize_list(f[10])?,
        h: parse_usize_list(f[11])?,
        f: parse_usize_list(f[12])?,
    })
}

/// Checks measured `h′_{p,q} <= C₀′ R^{α(1−η₀′)(q−p+1)}` for `p < q`,
/// returning the first violation.
fn fit_violation(rows: &[LedgerRow], r: u64, alpha: &Q, fit: &FitParams) -> Option<(usize, usize)> {
    let e = alpha * (qi(1) - &fit.eta0);
    let prec = 256;
    let ln_r = Real::from_i64(r as i64, prec).ln()?;
    for row in rows {
        for (p, &h) in row.h_prime.iter().enumerate().take(row.q) {
            let k = (row.q - p + 1) as i64;
            let bound = Real::from_q(&fit.c0, prec).mul(&ln_r.mul_q(&e).mul_i64(k).exp());
            if bound.cmp_q(&qi(h as i64)) == Some(std::cmp::Ordering::Less) {
                return Some((p, row.q));
            }
        }
    }
    None
}

/// Builds the certificate for a finished run.
pub fn emit_certificate(
    state: &CantorState,
    sheet: &ConstantSheet,
    curve: &CurveModel,
    shift: &ShiftField,
    config_hash: &str,
    fit: Option<&FitParams>,
) -> Result<Certificate, CantorError> {
    let (point, chain) = extract_point(state)?;
    let q_max = state.q;
    let ctx = WindowContext::from_sheet(sheet);
    // Level q windows were processed at step q, for q < q_max.
    let m_max = if q_max >= 1 { ctx.band_ceiling(q_max - 1) } else { BigInt::from(0) };

    let mut ledger = state.ledger.clone();
    ledger.push(LedgerRow { q: q_max, tracked: state.alive.len(), ..Default::default() });

    let dec = |r: &Real| r.to_sci(40);
    let constants = vec![
        ("n".to_string(), sheet.n().to_string()),
        ("ln_R".into(), dec(&sheet.ln_r)),
        ("beta".into(), dec(&sheet.beta)),
        ("beta_prime".into(), dec(&sheet.beta_prime)),
        ("epsilon".into(), fmt_q(&sheet.epsilon)),
        ("xi".into(), fmt_q(&sheet.xi)),
        ("lambda1".into(), sheet.lambda1.to_string()),
        ("k1".into(), dec(&sheet.k1)),
        ("k1_pow".into(), dec(&sheet.k1_pow)),
        ("f0".into(), fmt_q(&sheet.f0)),
        ("c_decimal".into(), dec(&sheet.c_real)),
        ("measure_C".into(), fmt_q(&sheet.measure_c)),
        ("alpha".into(), fmt_q(&sheet.alpha)),
    ];

    let surv = survivor_counts(state.r, &state.ledger);
    let mut counting = vec![
        ("t_prime".to_string(), surv.t.iter().map(fmt_q).collect::<Vec<_>>().join(",")),
        ("status".into(), if surv.criterion_met { COUNTING_MET } else { COUNTING_NOT_MET }.to_string()),
        ("guaranteed_survivors".into(), fmt_q(&guaranteed_survivors(&surv))),
        (
            "induction_floor_met".into(),
            (surv.criterion_met
                && surv.t.iter().all(|t| meets_induction_floor(t, sheet.r, &sheet.measure_c, &sheet.alpha)))
            .to_string(),
        ),
        ("proof_expectation_failures".into(), state.proof_failures.len().to_string()),
    ];
    for (i, f) in state.proof_failures.iter().enumerate() {
        counting.push((format!("failure{}", i + 1), f.clone()));
    }
    if let Some(fit) = fit {
        counting.push(("fit_C0".into(), fmt_q(&fit.c0)));
        counting.push(("fit_eta0".into(), fmt_q(&fit.eta0)));
        let v = fit_violation(&state.ledger, sheet.r, &sheet.alpha, fit);
        counting.push((
            "fit".into(),
            match v {
                None => "fits".into(),
                Some((p, q)) => format!("violated at p={p} q={q}"),
            },
        ));
    }

    Ok(Certificate {
        config_hash: config_hash.to_string(),
        r: sheet.r,
        weights: sheet.weight.entries().to_vec(),
        i0: sheet.i0.clone(),
        c: sheet.c.clone(),
        d: sheet.d.clone(),
        constants,
        domain: curve.domain().clone(),
        curve: curve.components().to_vec(),
        shift: shift.components().to_vec(),
        chain,
        point,
        q_max,
        m_lower: sheet.m_threshold(),
        m_max,
        ledger,
        counting,
        report: Vec::new(),
    })
}

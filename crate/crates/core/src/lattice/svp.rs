//! Shortest nonzero vectors of low-dimensional lattices.
//!
//! The basis is first reduced with floating-point LLL rounds on interval
//! midpoints; every round applies an exact integer transform, so the reduced
//! basis always generates the same lattice. Gram–Schmidt data of the reduced
//! basis is then computed with interval arithmetic and a Fincke–Pohst search
//! lists every coefficient vector inside a slightly inflated radius. Candidate
//! norms are finally evaluated with interval arithmetic.

use num_bigint::BigInt;

use crate::error::LatticeError;
use crate::lattice::flow::FlowMatrix;
use crate::rational::to_f64;
use crate::real::Real;

/// Columns generate the lattice `gℤ^d`.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    pub g: FlowMatrix,
    pub provenance: String,
}

impl LatticeBasis {
    pub fn new(g: FlowMatrix, provenance: impl Into<String>) -> Self {
        LatticeBasis { g, provenance: provenance.into() }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn prec(&self) -> u32 {
        self.g.rows[0][0].prec()
    }
}

#[derive(Clone, Debug)]
pub struct ShortestVector {
    /// Coefficients with respect to the input basis; first nonzero entry positive.
    pub coeffs: Vec<i128>,
    /// Enclosure of the minimal norm over all nonzero lattice vectors.
    pub norm: Real,
    pub norm_sq: Real,
}

const MAX_DIM: usize = 6;
const LLL_DELTA: f64 = 0.99;

type Cols = Vec<Vec<f64>>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt_f64(b: &Cols) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = b.len();
    let mut mu = vec![vec![0.0; d]; d];
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut bn = vec![0.0; d];
    for i in 0..d {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if bn[j] > 0.0 { dot(&b[i], &bstar[j]) / bn[j] } else { 0.0 };
            for k in 0..v.len() {
                v[k] -= mu[i][j] * bstar[j][k];
            }
        }
        bn[i] = dot(&v, &v);
        bstar.push(v);
    }
    (mu, bn)
}

/// Floating LLL; returns the unimodular transform as coefficient columns.
fn lll_f64(b: &mut Cols) -> Result<Vec<Vec<i128>>, LatticeError> {
    let d = b.len();
    let mut u: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| i128::from(i == j)).collect()).collect();
    let mut k = 1;
    let mut iters = 0;
    while k < d && iters < 2000 {
        iters += 1;
        let (mut mu, _) = gram_schmidt_f64(b);
        for j in (0..k).rev() {
            let r = mu[k][j].round();
            if r != 0.0 && r.is_finite() {
                if r.abs() > 1e30 {
                    return Err(LatticeError::PrecisionExhausted("reduction multiplier overflow".into()));
                }
                let ri = r as i128;
                for t in 0..b[k].len() {
                    b[k][t] -= r * b[j][t];
                }
                for t in 0..d {
                    u[k][t] =
                        u[k][t].checked_sub(ri.checked_mul(u[j][t]).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
                for t in 0..=j {
                    let sub = if t == j { r } else { r * mu[j][t] };
                    mu[k][t] -= sub;
                }
            }
        }
        let (mu, bn) = gram_schmidt_f64(b);
        if bn[k] >= (LLL_DELTA - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(u)
}

fn overflow() -> LatticeError {
    LatticeError::PrecisionExhausted("coefficient overflow".into())
}

fn combine(cols: &[Vec<Real>], coeffs: &[i128]) -> Vec<Real> {
    let d = cols[0].len();
    let prec = cols[0][0].prec();
    let mut out = vec![Real::zero(prec); d];
    for (c, col) in coeffs.iter().zip(cols) {
        if *c == 0 {
            continue;
        }
        let cb = Real::from_q(&crate::rational::Q::from_integer(BigInt::from(*c)), prec);
        for (o, v) in out.iter_mut().zip(col) {
            *o = o.add(&v.mul(&cb));
        }
    }
    out
}

fn norm_sq(v: &[Real]) -> Real {
    let prec = v[0].prec();
    v.iter().fold(Real::zero(prec), |acc, x| acc.add(&x.sqr()))
}

fn compose(u: &[Vec<i128>], w: &[Vec<i128>]) -> Result<Vec<Vec<i128>>, LatticeError> {
    // New column k = sum_j w[k][j] * old column j, old column j = u[j].
    let d = u.len();
    let mut out = vec![vec![0i128; d]; d];
    for k in 0..d {
        for j in 0..d {
            if w[k][j] == 0 {
                continue;
            }
            for t in 0..d {
                let p = w[k][j].checked_mul(u[j][t]).ok_or_else(overflow)?;
                out[k][t] = out[k][t].checked_add(p).ok_or_else(overflow)?;
            }
        }
    }
    Ok(out)
}

/// Largest log-ratio of row scales reduced in one stage.
const STAGE_SPAN: f64 = 8.0;

/// Reduced columns (as intervals) and the transform to the input basis.
///
/// Flow matrices have rows of wildly different size. Floating LLL cannot
/// reduce such a basis directly, so the rows are first scaled to unit size
/// and the scaling is then removed in stages, each stage starting from the
/// transform found by the previous one. Only the last stage, with no
/// scaling, determines the output.
fn reduce(basis: &LatticeBasis) -> Result<(Vec<Vec<Real>>, Vec<Vec<i128>>), LatticeError> {
    let d = basis.dim();
    let orig: Vec<Vec<Real>> = (0..d).map(|j| basis.g.column(j)).collect();
    let row_logs: Vec<f64> =
        (0..d).map(|i| basis.g.rows[i].iter().map(|v| v.mid_f64().powi(2)).sum::<f64>().sqrt().ln()).collect();
    let finite = row_logs.iter().all(|l| l.is_finite());
    let spread = if finite {
        row_logs.iter().cloned().fold(f64::MIN, f64::max) - row_logs.iter().cloned().fold(f64::MAX, f64::min)
    } else {
        0.0
    };
    let stages = ((spread / STAGE_SPAN).ceil() as usize).max(1);
    let mut total: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| i128::from(i == j)).collect()).collect();
    let mut cols = orig.clone();
    for k in 1..=stages {
        let s = k as f64 / stages as f64;
        let scale: Vec<f64> =
            row_logs.iter().map(|l| if k == stages || !finite { 1.0 } else { ((s - 1.0) * l).exp() }).collect();
        for _round in 0..12 {
            let mut mids: Cols =
                cols.iter().map(|c| c.iter().zip(&scale).map(|(v, f)| v.mid_f64() * f).collect()).collect();
            let w = lll_f64(&mut mids)?;
            let is_id = w.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == i128::from(i == j)));
            if is_id {
                break;
            }
            total = compose(&total, &w)?;
            cols = total.iter().map(|c| combine(&orig, c)).collect();
        }
    }
    Ok((cols, total))
}

/// Interval Gram–Schmidt: returns `(mu, |b*_i|²)`.
fn gram_schmidt_real(cols: &[Vec<Real>]) -> Result<(Vec<Vec<Real>>, Vec<Real>), LatticeError> {
    let d = cols.len();
    let prec = cols[0][0].prec();
    let dotr = |a: &[Real], b: &[Real]| a.iter().zip(b).fold(Real::zero(prec), |acc, (x, y)| acc.add(&x.mul(y)));
    let mut mu = vec![vec![Real::zero(prec); d]; d];
    let mut bstar: Vec<Vec<Real>> = Vec::with_capacity(d);
    let mut bn: Vec<Real> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dotr(&cols[i], &bstar[j])
                .div(&bn[j])
                .ok_or_else(|| LatticeError::PrecisionExhausted("Gram–Schmidt pivot encloses zero".into()))?;
            for k in 0..v.len() {
                v[k] = v[k].sub(&m.mul(&bstar[j][k]));
            }
            mu[i][j] = m;
        }
        let n = dotr(&v, &v);
        if !n.is_positive() {
            return Err(LatticeError::PrecisionExhausted("Gram–Schmidt norm not certainly positive".into()));
        }
        bn.push(n);
        bstar.push(v);
    }
    Ok((mu, bn))
}

/// All nonzero `x` (up to sign) with `|Σ x_i b_i|² <= r2`, by Fincke–Pohst.
fn enumerate(mu: &[Vec<f64>], bn: &[f64], r2: f64, limit: usize) -> Result<Vec<Vec<i64>>, LatticeError> {
    let d = bn.len();
    let mut out = Vec::new();
    let mut x = vec![0i64; d];
    fn rec(
        level: usize,
        partial: f64,
        x: &mut Vec<i64>,
        mu: &[Vec<f64>],
        bn: &[f64],
        r2: f64,
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) -> bool {
        let d = bn.len();
        let mut c = 0.0;
        for j in level + 1..d {
            c -= x[j] as f64 * mu[j][level];
        }
        let room = r2 - partial;
        if room < 0.0 {
            return true;
        }
        let span = (room / bn[level]).sqrt();
        let lo = (c - span).ceil() as i64;
        let hi = (c + span).floor() as i64;
        for v in lo..=hi {
            x[level] = v;
            let diff = v as f64 - c;
            let p = partial + diff * diff * bn[level];
            if p > r2 {
                continue;
            }
            if level == 0 {
                if x.iter().any(|&t| t != 0) {
                    let first = x.iter().find(|&&t| t != 0).copied().unwrap();
                    if first > 0 {
                        out.push(x.clone());
                        if out.len() > limit {
                            return false;
                        }
                    }
                }
            } else if !rec(level - 1, p, x, mu, bn, r2, out, limit) {
                return false;
            }
        }
        x[level] = 0;
        true
    }
    if !rec(d - 1, 0.0, &mut x, mu, bn, r2, &mut out, limit) {
        return Err(LatticeError::PrecisionExhausted("enumeration produced too many candidates".into()));
    }
    Ok(out)
}

pub fn shortest_nonzero(basis: &LatticeBasis) -> Result<ShortestVector, LatticeError> {
    let d = basis.dim();
    if !(1..=MAX_DIM).contains(&d) {
        return Err(LatticeError::DimensionMismatch(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    let (cols, total) = reduce(basis)?;
    let (mu_r, bn_r) = gram_schmidt_real(&cols)?;
    let mu: Vec<Vec<f64>> = mu_r.iter().map(|r| r.iter().map(Real::mid_f64).collect()).collect();
    let bn: Vec<f64> = bn_r.iter().map(|b| to_f64(&b.lo_q()) * (1.0 - 1e-12)).collect();
    if bn.iter().any(|&b| b <= 0.0 || !b.is_finite()) {
        return Err(LatticeError::PrecisionExhausted("degenerate Gram–Schmidt data".into()));
    }
    // Radius from the shortest reduced column, inflated to absorb rounding.
    let col_norms: Vec<Real> = cols.iter().map(|c| norm_sq(c)).collect();
    let r2 = col_norms.iter().map(|n| to_f64(&n.hi_q())).fold(f64::INFINITY, f64::min);
    let r2 = r2 * (1.0 + 1e-9) + 1e-300;
    let cands = enumerate(&mu, &bn, r2, 100_000)?;
    if cands.is_empty() {
        return Err(LatticeError::PrecisionExhausted("enumeration found no candidate".into()));
    }
    let mut best: Option<(Real, Vec<i128>)> = None;
    let mut min_lo: Option<Real> = None;
    for x in &cands {
        let xi: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        let v = combine(&cols, &xi);
        let n2 = norm_sq(&v);
        min_lo = Some(match min_lo {
            Some(m) => m.min(&n2),
            None => n2.clone(),
        });
        let better = match &best {
            None => true,
            Some((b, _)) => n2.mid_q() < b.mid_q(),
        };
        if better {
            // Coefficients with respect to the input basis.
            let mut c = vec![0i128; d];
            for (k, &xk) in xi.iter().enumerate() {
                for t in 0..d {
                    c[t] = c[t].checked_add(xk.checked_mul(total[k][t]).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
            }
            if let Some(first) = c.iter().find(|&&t| t != 0) {
                if *first < 0 {
                    c.iter_mut().for_each(|t| *t = -*t);
                }
            }
            best = Some((n2, c));
        }
    }
    let (_, coeffs) = best.unwrap();
    // min over candidates of each endpoint encloses the true minimum.
    let norm_sq = min_lo.unwrap();
    Ok(ShortestVector { coeffs, norm: norm_sq.sqrt(), norm_sq })
}

/// Whether the shortest nonzero vector has norm at least `eps`.
pub fn in_compact(basis: &LatticeBasis, eps: &Real) -> Result<bool, LatticeError> {
    let sv = shortest_nonzero(basis)?;
    let eps2 = eps.sqr();
    match sv.norm_sq.cmp_decided(&eps2) {
        Some(std::cmp::Ordering::Less) => Ok(false),
        Some(_) => Ok(true),
        None => Err(LatticeError::Undecidable(format!(
            "shortest norm {} within precision of {}",
            sv.norm.to_sci(12),
            eps.to_sci(12)
        ))),
    }
}

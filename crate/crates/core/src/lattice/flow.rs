//! Flow and unipotent matrices in SL(n+1, ℝ) with interval entries.

use std::fmt;

use crate::curve::CurveModel;
use crate::error::LatticeError;
use crate::real::Real;
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    A,
    B,
    U,
    U1,
    Z,
    Identity,
    Product,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlowKind::A => "a",
            FlowKind::B => "b",
            FlowKind::U => "u",
            FlowKind::U1 => "u1",
            FlowKind::Z => "z",
            FlowKind::Identity => "id",
            FlowKind::Product => "product",
        };
        f.write_str(s)
    }
}

/// Parameters for [`dani_matrix`].
pub enum FlowParams<'a> {
    /// `a(t) = diag(e^t, e^{-r_1 t}, …, e^{-r_n t})`
    A { t: &'a Real, weight: &'a Weight },
    /// `b(t) = diag(e^{-t/n}, e^t, e^{-t/n}, …, e^{-t/n})`
    B { t: &'a Real, n: usize },
    /// `u(x)`: identity with `x` in the first row
    U { x: &'a [Real] },
    /// `u_1(y)`: identity with `y_2, …, y_n` in the second row
    U1 { y: &'a [Real], n: usize },
    /// `z(x) = u_1(φ̂'(x))`
    Z { x: &'a Real, curve: &'a CurveModel },
}

/// Square matrix, row-major.
#[derive(Clone, Debug)]
pub struct FlowMatrix {
    pub kind: FlowKind,
    pub rows: Vec<Vec<Real>>,
}

pub fn dani_matrix(params: FlowParams<'_>, prec: u32) -> Result<FlowMatrix, LatticeError> {
    match params {
        FlowParams::A { t, weight } => {
            let mut diag = vec![t.exp()];
            for r in weight.entries() {
                diag.push(t.mul_q(r).neg().exp());
            }
            Ok(FlowMatrix::diagonal(FlowKind::A, diag))
        }
        FlowParams::B { t, n } => {
            if n == 0 {
                return Err(LatticeError::DimensionMismatch("b(t) needs n >= 1".into()));
            }
            let small = t.div_i64(n as i64).neg().exp();
            let mut diag = vec![small.clone(), t.exp()];
            diag.extend(std::iter::repeat_n(small, n - 1));
            Ok(FlowMatrix::diagonal(FlowKind::B, diag))
        }
        FlowParams::U { x } => {
            let mut m = FlowMatrix::identity(x.len() + 1, prec);
            m.kind = FlowKind::U;
            for (j, v) in x.iter().enumerate() {
                m.rows[0][j + 1] = v.clone();
            }
            Ok(m)
        }
        FlowParams::U1 { y, n } => {
            if y.len() + 1 != n {
                return Err(LatticeError::DimensionMismatch(format!(
                    "u1 expects {} entries, got {}",
                    n.saturating_sub(1),
                    y.len()
                )));
            }
            let mut m = FlowMatrix::identity(n + 1, prec);
            m.kind = FlowKind::U1;
            for (j, v) in y.iter().enumerate() {
                m.rows[1][j + 2] = v.clone();
            }
            Ok(m)
        }
        FlowParams::Z { x, curve } => {
            let n = curve.n();
            let y: Vec<Real> = curve.derivatives().iter().skip(1).map(|p| p.eval_real(x)).collect();
            let mut m = dani_matrix(FlowParams::U1 { y: &y, n }, prec)?;
            m.kind = FlowKind::Z;
            Ok(m)
        }
    }
}

impl FlowMatrix {
    pub fn identity(d: usize, prec: u32) -> FlowMatrix {
        let rows =
            (0..d).map(|i| (0..d).map(|j| if i == j { Real::one(prec) } else { Real::zero(prec) }).collect()).collect();
        FlowMatrix { kind: FlowKind::Identity, rows }
    }

    pub fn diagonal(kind: FlowKind, diag: Vec<Real>) -> FlowMatrix {
        let d = diag.len();
        let prec = diag[0].prec();
        let mut m = FlowMatrix::identity(d, prec);
        m.kind = kind;
        for (i, v) in diag.into_iter().enumerate() {
            m.rows[i][i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn mul(&self, other: &FlowMatrix) -> Result<FlowMatrix, LatticeError> {
        let d = self.dim();
        if other.dim() != d {
            return Err(LatticeError::DimensionMismatch(format!("{}x{} times {}x{}", d, d, other.dim(), other.dim())));
        }
        let prec = self.rows[0][0].prec();
        let mut rows = vec![vec![Real::zero(prec); d]; d];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = Real::zero(prec);
                for k in 0..d {
                    if self.rows[i][k] == Real::zero(prec) || other.rows[k][j] == Real::zero(prec) {
                        continue;
                    }
                    acc = acc.add(&self.rows[i][k].mul(&other.rows[k][j]));
                }
                *cell = acc;
            }
        }
        Ok(FlowMatrix { kind: FlowKind::Product, rows })
    }

    /// Product of a sequence, left to right.
    pub fn product(ms: &[FlowMatrix]) -> Result<FlowMatrix, LatticeError> {
        let mut it = ms.iter();
        let mut acc = it.next().ok_or_else(|| LatticeError::DimensionMismatch("empty product".into()))?.clone();
        for m in it {
            acc = acc.mul(m)?;
        }
        Ok(acc)
    }

    /// Determinant by cofactor expansion (dimension at most 6).
    pub fn det(&self) -> Real {
        fn rec(rows: &[Vec<Real>], cols: &[usize]) -> Real {
            let prec = rows[0][0].prec();
            if cols.len() == 1 {
                return rows[0][cols[0]].clone();
            }
            let mut acc = Real::zero(prec);
            for (k, &c) in cols.iter().enumerate() {
                if rows[0][c] == Real::zero(prec) {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = rows[0][c].mul(&rec(&rows[1..], &rest));
                acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
        let cols: Vec<usize> = (0..self.dim()).collect();
        rec(&self.rows, &cols)
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Real> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    /// Largest entrywise deviation from the identity, as an upper bound.
    pub fn identity_defect(&self) -> f64 {
        let prec = self.rows[0][0].prec();
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { Real::one(prec) } else { Real::zero(prec) };
                let dev = v.sub(&target).abs();
                worst = worst.max(crate::rational::to_f64(&dev.hi_q()));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, Domain};
    use crate::poly::Poly;
    use crate::rational::{q, qi};
    use crate::weight::validate_weights;

    const P: u32 = 128;

    fn w22() -> Weight {
        validate_weights(&[q(1, 2), q(1, 2)]).unwrap()
    }

    #[test]
    fn a_zero_is_identity() {
        let w = w22();
        let a = dani_matrix(FlowParams::A { t: &Real::zero(P), weight: &w }, P).unwrap();
        assert!(a.identity_defect() == 0.0);
    }

    #[test]
    fn a_ln2_entries() {
        let w = w22();
        let t = Real::from_i64(2, P).ln().unwrap();
        let a = dani_matrix(FlowParams::A { t: &t, weight: &w }, P).unwrap();
        assert!((a.rows[0][0].mid_f64() - 2.0).abs() < 1e-30);
        assert!((a.rows[1][1].mid_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((a.rows[2][2].mid_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((a.det().mid_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn z_at_origin_of_parabola() {
        let c = build_curve(vec![Poly::identity(), Poly::monomial(2)], Domain::new(qi(-1), qi(1)).unwrap()).unwrap();
        let z = dani_matrix(FlowParams::Z { x: &Real::zero(P), curve: &c }, P).unwrap();
        assert_eq!(z.identity_defect(), 0.0);
        let z = dani_matrix(FlowParams::Z { x: &Real::from_q(&q(1, 3), P), curve: &c }, P).unwrap();
        assert!(z.identity_defect() > 0.0);
    }

    #[test]
    fn dimension_checks() {
        let y = vec![Real::one(P)];
        assert!(dani_matrix(FlowParams::U1 { y: &y, n: 3 }, P).is_err());
        assert!(dani_matrix(FlowParams::U1 { y: &y, n: 2 }, P).is_ok());
        let a = FlowMatrix::identity(2, P);
        let b = FlowMatrix::identity(3, P);
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn group_law_and_unimodularity() {
        let w = validate_weights(&[q(2, 3), q(1, 3)]).unwrap();
        let s = Real::from_q(&q(7, 5), P);
        let t = Real::from_q(&q(-3, 4), P);
        let a = |x: &Real| dani_matrix(FlowParams::A { t: x, weight: &w }, P).unwrap();
        let lhs = a(&s).mul(&a(&t)).unwrap();
        let rhs = a(&s.add(&t));
        for i in 0..3 {
            let d = lhs.rows[i][i].sub(&rhs.rows[i][i]).abs();
            assert!(crate::rational::to_f64(&d.hi_q()) < 1e-30);
        }
        assert!(a(&s).mul(&a(&s.neg())).unwrap().identity_defect() < 1e-30);
        let x = vec![Real::from_q(&q(1, 3), P), Real::from_q(&q(-5, 7), P)];
        let u = dani_matrix(FlowParams::U { x: &x }, P).unwrap();
        let b = dani_matrix(FlowParams::B { t: &s, n: 2 }, P).unwrap();
        let g = FlowMatrix::product(&[b, a(&t), u]).unwrap();
        assert!((g.det().mid_f64() - 1.0).abs() < 1e-25);
    }
}

//! Dangerous shifted rationals `(p₁+θ₁)/m`, their subgrids and windows.
//!
//! For each denominator `m` the base interval is cut into `m⋆` subgrid
//! cells of equal rational length (the last one shorter). A window is the
//! set of points of one cell within `c/(2m^{1+r₁})` of the frozen shifted
//! rational; the construction avoids its fourfold dilate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::constants::ConstantSheet;
use crate::curve::{three_pow, CurveModel, ShiftField};
use crate::error::DangerousError;
use crate::interval::RationalInterval;
use crate::rational::{
    below_scaled_power, ceil_q, ceil_root, floor_q, fmt_q, max_q, min_q, pow_q, qi, root_bracket, Q,
};
use crate::weight::Weight;

/// Bits of the dyadic brackets used for `m^{r₁}`.
pub const ROOT_BITS: u32 = 64;

/// Default cap on the number of `(m, p₁)` candidates a single scan may visit.
pub const DEFAULT_SCAN_LIMIT: u64 = 20_000_000;

/// The constants window geometry depends on.
#[derive(Clone, Debug)]
pub struct WindowContext {
    pub c: Q,
    pub i0: RationalInterval,
    pub d: Vec<Q>,
    pub f0: Q,
    pub weight: Weight,
    pub r: u64,
}

impl WindowContext {
    pub fn from_sheet(s: &ConstantSheet) -> Self {
        WindowContext {
            c: s.c.clone(),
            i0: s.i0.clone(),
            d: s.d.clone(),
            f0: s.f0.clone(),
            weight: s.weight.clone(),
            r: s.r,
        }
    }

    pub fn n(&self) -> usize {
        self.weight.n()
    }

    /// `17|I₀|⁻¹d₁`
    pub fn m_threshold(&self) -> Q {
        qi(17) * &self.d[0] / self.i0.length()
    }

    /// `2c|I₀|⁻¹`
    pub fn band_constant(&self) -> Q {
        qi(2) * &self.c / self.i0.length()
    }

    fn r_pow(&self, k: usize) -> Q {
        Q::from_integer(BigInt::from(self.r).pow(k as u32))
    }

    /// Smallest `m >= 1` with `m^{1+r₁} >= x`.
    fn first_m_reaching(&self, x: &Q) -> BigInt {
        let (s, t) = self.weight.frac(1);
        ceil_root(&pow_q(x, t), s + t).max(BigInt::one())
    }

    /// Integers `m` of level `q`, above the threshold, as `[lo, hi)`.
    pub fn band_range(&self, q: usize) -> (BigInt, BigInt) {
        let a = self.band_constant();
        let lo = self.first_m_reaching(&(&a * self.r_pow(q + 1)));
        let hi = self.first_m_reaching(&(&a * self.r_pow(q + 2)));
        let above: BigInt = floor_q(&self.m_threshold()) + BigInt::one();
        (lo.max(above.clone()), hi.max(above))
    }

    /// The level whose band contains `m`, if `m` lies in any band.
    pub fn level_of(&self, m: u64) -> Option<usize> {
        let a = self.band_constant();
        let (s, t) = self.weight.frac(1);
        let mp = Q::from_integer(BigInt::from(m).pow(s + t));
        let reaches = |q: usize| mp >= pow_q(&(&a * self.r_pow(q + 1)), t);
        if !reaches(1) {
            return None;
        }
        let mut q = 1;
        while reaches(q + 1) {
            q += 1;
        }
        Some(q)
    }

    /// Largest `m` whose level is at most `q`, i.e. `m^{1+r₁} < 2c|I₀|⁻¹R^{q+2}`.
    pub fn band_ceiling(&self, q: usize) -> BigInt {
        self.first_m_reaching(&(self.band_constant() * self.r_pow(q + 2))) - 1
    }

    /// `x < k / m^{1+r₁}`, exactly.
    fn below_r1(&self, x: &Q, k: &Q, m: u64) -> bool {
        let (s, t) = self.weight.frac(1);
        below_scaled_power(x, k, m, s + t, t)
    }

    /// `x < k / m^{1+r_i}`, exactly.
    fn below_ri(&self, x: &Q, k: &Q, m: u64, i: usize) -> bool {
        let (s, t) = self.weight.frac(i);
        below_scaled_power(x, k, m, s + t, t)
    }
}

/// One cell `I₀^{j,m}` of the subgrid, with its frozen shift value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgridCell {
    pub j: BigInt,
    pub interval: RationalInterval,
    pub center: Q,
    pub theta1_frozen: Q,
}

/// The partition of `I₀` into `m⋆` cells of length `c|I₀|/(2d₁ρ)`, where
/// `ρ >= m^{r₁}` is a 64-bit dyadic upper bracket.
#[derive(Clone, Debug)]
pub struct SubgridSpec {
    pub m: u64,
    pub rho_lo: Q,
    pub rho_hi: Q,
    pub cell_len: Q,
    pub count: BigInt,
    i0: RationalInterval,
}

pub fn subgrid(ctx: &WindowContext, m: u64) -> Result<SubgridSpec, DangerousError> {
    let threshold = ctx.m_threshold();
    if Q::from_integer(BigInt::from(m)) <= threshold {
        return Err(DangerousError::MTooSmall { m, threshold: fmt_q(&threshold) });
    }
    let (s, t) = ctx.weight.frac(1);
    let (rho_lo, rho_hi) = root_bracket(m, s, t, ROOT_BITS);
    let cell_len = &ctx.c * ctx.i0.length() / (qi(2) * &ctx.d[0] * &rho_hi);
    let count = ceil_q(&(ctx.i0.length() / &cell_len));
    Ok(SubgridSpec { m, rho_lo, rho_hi, cell_len, count, i0: ctx.i0.clone() })
}

impl SubgridSpec {
    pub fn cell_interval(&self, j: &BigInt) -> RationalInterval {
        let l = self.i0.left() + &self.cell_len * Q::from_integer(j - 1);
        let r = min_q(&(&l + &self.cell_len), self.i0.right());
        RationalInterval::new(l, r).expect("cell inside I₀")
    }

    pub fn cell(&self, j: &BigInt, shift: &ShiftField) -> SubgridCell {
        let interval = self.cell_interval(j);
        let center = interval.midpoint();
        let theta1_frozen = shift.theta(1).eval(&center);
        SubgridCell { j: j.clone(), interval, center, theta1_frozen }
    }

    /// Index of the half-open cell containing `x`, clamped to `[1, m⋆]`.
    pub fn cell_index(&self, x: &Q) -> BigInt {
        let raw: BigInt = floor_q(&((x - self.i0.left()) / &self.cell_len)) + BigInt::one();
        raw.max(BigInt::one()).min(self.count.clone())
    }

    /// Half-open membership; the last cell is closed.
    pub fn cell_contains(&self, j: &BigInt, x: &Q) -> bool {
        let iv = self.cell_interval(j);
        iv.left() <= x && (x < iv.right() || (j == &self.count && x == iv.right()))
    }

    /// Every cell; only sensible for small `m⋆`.
    pub fn cells(&self, shift: &ShiftField) -> Vec<SubgridCell> {
        let n = self.count.to_u64().expect("small subgrid");
        (1..=n).map(|j| self.cell(&BigInt::from(j), shift)).collect()
    }

    /// Inner rational bound on `c/(2m^{1+r₁})`.
    pub fn tilde_radius(&self, c: &Q) -> Q {
        c / (qi(2) * qi(self.m as i64) * &self.rho_hi)
    }

    /// Outer rational bound on `2c/m^{1+r₁}`.
    pub fn cover_radius(&self, c: &Q) -> Q {
        qi(2) * c / (qi(self.m as i64) * &self.rho_lo)
    }
}

/// A dangerous rational `p/m` attached to subgrid cell `j` at level `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DangerousWindow {
    pub q: usize,
    pub m: u64,
    pub p: Vec<BigInt>,
    pub j: BigInt,
    /// `(p₁+θ₁^{j,m})/m`
    pub center: Q,
    pub cell: RationalInterval,
    /// Rational inner bound of `Δ̃`, clipped to the cell.
    pub tilde: RationalInterval,
    /// Rational outer bound of `4Δ̃`, clipped to `I₀`; treated as open.
    pub cover: RationalInterval,
}

impl DangerousWindow {
    pub fn key(&self) -> (u64, Vec<BigInt>) {
        (self.m, self.p.clone())
    }

    /// Whether `x` lies in `Δ̃`, decided exactly.
    pub fn in_tilde(&self, ctx: &WindowContext, sg: &SubgridSpec, x: &Q) -> bool {
        sg.cell_contains(&self.j, x) && ctx.below_r1(&(x - &self.center).abs(), &(&ctx.c / qi(2)), self.m)
    }

    /// Whether `x` lies in `Δ`: `|x − (p₁+θ₁(x))/m| < c/m^{1+r₁}` within the cell.
    pub fn in_delta(&self, ctx: &WindowContext, sg: &SubgridSpec, shift: &ShiftField, x: &Q) -> bool {
        let y = (Q::from_integer(self.p[0].clone()) + shift.theta(1).eval(x)) / qi(self.m as i64);
        sg.cell_contains(&self.j, x) && ctx.below_r1(&(x - y).abs(), &ctx.c, self.m)
    }

    /// Whether `x` lies in the exact `4Δ̃` about the centre, inside `I₀`.
    pub fn in_cover_exact(&self, ctx: &WindowContext, x: &Q) -> bool {
        ctx.i0.contains(x) && ctx.below_r1(&(x - &self.center).abs(), &(qi(2) * &ctx.c), self.m)
    }

    /// Whether `x` lies in the open ball of radius `c/m^{1+r₁}` about the centre.
    pub fn in_double_tilde(&self, ctx: &WindowContext, sg: &SubgridSpec, x: &Q) -> bool {
        sg.cell_contains(&self.j, x) && ctx.below_r1(&(x - &self.center).abs(), &ctx.c, self.m)
    }

    /// Tab-separated row: q, m, p, j, tilde, cover.
    pub fn to_row(&self) -> String {
        let p: Vec<String> = self.p.iter().map(|v| v.to_string()).collect();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.q,
            self.m,
            p.join(","),
            self.j,
            fmt_q(self.tilde.left()),
            fmt_q(self.tilde.right()),
            fmt_q(self.cover.left()),
            fmt_q(self.cover.right())
        )
    }
}

/// `4Δ̃` of a window as an explicit rational interval.
pub fn cover_window(w: &DangerousWindow) -> RationalInterval {
    w.cover.clone()
}

/// Builds the window for `(m, p₁, j)` if `Δ̃` is nonempty, without the
/// membership test on the remaining coordinates.
pub fn window_geometry(
    ctx: &WindowContext,
    sg: &SubgridSpec,
    shift: &ShiftField,
    p1: &BigInt,
    j: &BigInt,
) -> Option<(SubgridCell, Q, RationalInterval, RationalInterval)> {
    if j < &BigInt::one() || j > &sg.count {
        return None;
    }
    let cell = sg.cell(j, shift);
    let center = (Q::from_integer(p1.clone()) + &cell.theta1_frozen) / qi(sg.m as i64);
    let dist = cell.interval.distance_to(&center);
    if !ctx.below_r1(&dist, &(&ctx.c / qi(2)), sg.m) {
        return None;
    }
    let rt = sg.tilde_radius(&ctx.c);
    let tl = max_q(&(&center - &rt), cell.interval.left());
    let tr = min_q(&(&center + &rt), cell.interval.right());
    // The true Δ̃ is nonempty; the inner bound may still miss the cell.
    let tilde = if tl <= tr {
        RationalInterval::new(tl, tr).unwrap()
    } else {
        let near = if center < *cell.interval.left() { cell.interval.left() } else { cell.interval.right() };
        RationalInterval::new(near.clone(), near.clone()).unwrap()
    };
    let rc = sg.cover_radius(&ctx.c);
    let cl = max_q(&(&center - &rc), ctx.i0.left());
    let cr = min_q(&(&center + &rc), ctx.i0.right());
    let cover = RationalInterval::new(cl, cr).ok()?;
    Some((cell, center, tilde, cover))
}

/// Integer vectors `(p₂,…,p_n)` with `|φᵢ(y) − (pᵢ+θᵢ(y))/m| < (f₀+dᵢ)c/m^{1+rᵢ}`,
/// or none when `y` leaves `3^{n+1}I₀`.
pub fn v_completions(ctx: &WindowContext, curve: &CurveModel, shift: &ShiftField, m: u64, y: &Q) -> Vec<Vec<BigInt>> {
    let n = ctx.n();
    if !ctx.i0.dilate(&three_pow(n + 1)).contains(y) {
        return Vec::new();
    }
    let mq = qi(m as i64);
    let mut out: Vec<Vec<BigInt>> = vec![Vec::new()];
    for i in 2..=n {
        let v = &mq * curve.phi(i).eval(y) - shift.theta(i).eval(y);
        let k = (&ctx.f0 + &ctx.d[i - 1]) * &ctx.c;
        // |v − pᵢ|/m < k/m^{1+rᵢ}  ⟺  |v − pᵢ| < k/m^{rᵢ}; k/m^{rᵢ} <= k.
        let lo = floor_q(&(&v - &k));
        let hi = ceil_q(&(&v + &k));
        let mut ok = Vec::new();
        let mut p = lo;
        while p <= hi {
            let diff = (&v - Q::from_integer(p.clone())).abs() / &mq;
            if ctx.below_ri(&diff, &k, m, i) {
                ok.push(p.clone());
            }
            p += 1;
        }
        out = out
            .into_iter()
            .flat_map(|pre| {
                ok.iter().map(move |pi| {
                    let mut v = pre.clone();
                    v.push(pi.clone());
                    v
                })
            })
            .collect();
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Bounds of `θ₁` over `I₀` from the Lipschitz constant.
fn theta1_range(ctx: &WindowContext, shift: &ShiftField) -> (Q, Q) {
    let t = shift.theta(1);
    if t.is_constant() {
        let v = t.eval(&Q::zero());
        return (v.clone(), v);
    }
    let mid = ctx.i0.midpoint();
    let spread = &ctx.d[0] * ctx.i0.length() / qi(2);
    let v = t.eval(&mid);
    (&v - &spread, &v + spread)
}

/// Windows of denominator `m` whose cover meets the interior of some
/// interval of `region` (sorted, disjoint), tagged with level `q`.
pub fn windows_for_m(
    ctx: &WindowContext,
    curve: &CurveModel,
    shift: &ShiftField,
    q: usize,
    m: u64,
    region: &[RationalInterval],
) -> Result<Vec<DangerousWindow>, DangerousError> {
    let sg = subgrid(ctx, m)?;
    let (tmin, tmax) = theta1_range(ctx, shift);
    let mq = qi(m as i64);
    let rc = sg.cover_radius(&ctx.c);
    let mut seen: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    let mut out = Vec::new();
    for k in region {
        let lo = ceil_q(&(&mq * (k.left() - &rc) - &tmax));
        let hi = floor_q(&(&mq * (k.right() + &rc) - &tmin));
        let mut p1 = lo;
        while p1 <= hi {
            for j in candidate_cells(ctx, &sg, shift, &p1) {
                if !seen.insert((p1.clone(), j.clone())) {
                    continue;
                }
                let Some((_, center, tilde, cover)) = window_geometry(ctx, &sg, shift, &p1, &j) else {
                    continue;
                };
                for rest in v_completions(ctx, curve, shift, m, &center) {
                    let mut p = vec![p1.clone()];
                    p.extend(rest);
                    out.push(DangerousWindow {
                        q,
                        m,
                        p,
                        j: j.clone(),
                        center: center.clone(),
                        cell: sg.cell_interval(&j),
                        tilde: tilde.clone(),
                        cover: cover.clone(),
                    });
                }
            }
            p1 += 1;
        }
    }
    out.retain(|w| region.iter().any(|k| k.meets_interior(&w.cover)));
    out.sort_by(|a, b| (&a.p, &a.j).cmp(&(&b.p, &b.j)));
    Ok(out)
}

/// Cells whose frozen centre can lie within a window radius: the fixed
/// point of `j ↦ cell((p₁+θ₁(x₀ʲ))/m)` and its neighbours.
fn candidate_cells(ctx: &WindowContext, sg: &SubgridSpec, shift: &ShiftField, p1: &BigInt) -> Vec<BigInt> {
    let t = shift.theta(1);
    let mq = qi(sg.m as i64);
    let mut y = (Q::from_integer(p1.clone()) + t.eval(&ctx.i0.midpoint())) / &mq;
    let mut j = sg.cell_index(&y);
    if !t.is_constant() {
        for _ in 0..8 {
            let x0 = sg.cell_interval(&j).midpoint();
            y = (Q::from_integer(p1.clone()) + t.eval(&x0)) / &mq;
            let next = sg.cell_index(&y);
            if next == j {
                break;
            }
            j = next;
        }
    }
    let two = BigInt::from(2);
    let lo = (&j - &two).max(BigInt::one());
    let hi = (&j + &two).min(sg.count.clone());
    let mut out = Vec::new();
    let mut k = lo;
    while k <= hi {
        out.push(k.clone());
        k += 1;
    }
    out
}

/// Windows at level `q` whose cover meets `region`, sorted by `(m, p, j)`.
pub fn enumerate_near(
    ctx: &WindowContext,
    curve: &CurveModel,
    shift: &ShiftField,
    q: usize,
    region: &[RationalInterval],
    scan_limit: u64,
) -> Result<Vec<DangerousWindow>, DangerousError> {
    if q == 0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = ctx.band_range(q);
    if lo >= hi {
        return Ok(Vec::new());
    }
    let count = &hi - &lo;
    let per_m: BigInt = region
        .iter()
        .map(|k| ceil_q(&(k.length() * Q::from_integer(hi.clone()))) + 3)
        .fold(BigInt::zero(), |a, b| a + b);
    let work = &count * per_m;
    let (Some(lo), Some(hi)) = (lo.to_u64(), hi.to_u64()) else {
        return Err(DangerousError::BandTooLarge { q, count: count.to_string() });
    };
    if work > BigInt::from(scan_limit) {
        return Err(DangerousError::BandTooLarge { q, count: count.to_string() });
    }
    let per: Vec<Result<Vec<DangerousWindow>, DangerousError>> =
        (lo..hi).into_par_iter().map(|m| windows_for_m(ctx, curve, shift, q, m, region)).collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Every window at level `q` over all of `I₀`.
pub fn enumerate_level(
    ctx: &WindowContext,
    curve: &CurveModel,
    shift: &ShiftField,
    q: usize,
) -> Result<Vec<DangerousWindow>, DangerousError> {
    enumerate_near(ctx, curve, shift, q, std::slice::from_ref(&ctx.i0), DEFAULT_SCAN_LIMIT)
}

/// Cells hit by window covers.
#[derive(Clone, Debug, Default)]
pub struct HitMarks {
    /// Indices into the cell list, ascending.
    pub marked: Vec<usize>,
    /// For each window, the indices of the cells its cover meets.
    pub per_window: Vec<Vec<usize>>,
}

impl HitMarks {
    pub fn max_hits_per_window(&self) -> usize {
        self.per_window.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Marks the closed `cells` (sorted by left endpoint, disjoint interiors)
/// meeting the open cover of some window.
pub fn mark_hits(windows: &[DangerousWindow], cells: &[RationalInterval]) -> HitMarks {
    debug_assert!(cells.windows(2).all(|w| w[0].left() <= w[1].left()));
    let mut marked = BTreeSet::new();
    let mut per_window = Vec::with_capacity(windows.len());
    for w in windows {
        let start = cells.partition_point(|c| c.right() <= w.cover.left());
        let mut hits = Vec::new();
        for (k, c) in cells.iter().enumerate().skip(start) {
            if c.left() >= w.cover.right() {
                break;
            }
            if c.meets_interior(&w.cover) {
                hits.push(k);
                marked.insert(k);
            }
        }
        per_window.push(hits);
    }
    HitMarks { marked: marked.into_iter().collect(), per_window }
}

/// Reduces `x` modulo 1 into `[0, 1)`; used by brute-force cross-checks.
pub fn frac_part(x: &Q) -> Q {
    let f = floor_q(x);
    x - Q::from_integer(f)
}

/// `m` divides `a`?  Small helper for tests of homogeneous windows.
pub fn divides(m: u64, a: &BigInt) -> bool {
    a.is_multiple_of(&BigInt::from(m))
}

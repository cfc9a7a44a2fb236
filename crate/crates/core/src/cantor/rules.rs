//! Removal rules applied to the children of one generation.

use rayon::prelude::*;

use crate::cantor::{Cause, Node, StepContext};
use crate::dangerous::{enumerate_near, mark_hits, DangerousWindow, HitMarks};
use crate::error::CantorError;
use crate::interval::RationalInterval;
use crate::lattice::{sample_points, EscapeKernel};
use crate::measure::measure_deficient;

/// Classes assigned by one rule: for each child, the removal class `p` and
/// its cause, if any.
#[derive(Clone, Debug, Default)]
pub struct RuleOutcome {
    pub class: Vec<Option<(usize, Cause)>>,
    pub windows: Vec<DangerousWindow>,
    pub hits: Option<HitMarks>,
}

pub trait RemovalRule: Send + Sync {
    fn name(&self) -> &'static str;
    fn classify(&self, step: &StepContext<'_>, children: &[Node]) -> Result<RuleOutcome, CantorError>;
}

/// Cells whose measure falls below `(3C)⁻¹|I|^α`, at `p = q`.
pub struct MeasureRule;

impl RemovalRule for MeasureRule {
    fn name(&self) -> &'static str {
        "measure"
    }

    fn classify(&self, step: &StepContext<'_>, children: &[Node]) -> Result<RuleOutcome, CantorError> {
        let class = children
            .iter()
            .map(|c| measure_deficient(step.measure, &c.interval).then_some((step.q, Cause::Measure)))
            .collect();
        Ok(RuleOutcome { class, ..Default::default() })
    }
}

/// Removal classes of the escape condition at step `q`, in priority order:
/// `p = 0` with `max(1, q/8) <= l <= q/4`, then `p = q − 4l` for `l < q/8`
/// by increasing `p`.
pub fn lattice_schedule(q: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    let zero: Vec<usize> = (1..=q / 4).filter(|&l| 8 * l >= q).collect();
    if !zero.is_empty() {
        out.push((0, zero));
    }
    let mut rest: Vec<usize> = (1..=q / 4).filter(|&l| 8 * l < q).collect();
    rest.reverse();
    for l in rest {
        out.push((q - 4 * l, vec![l]));
    }
    out
}

/// Cells where a sampled lattice leaves `K_{e^{−εβl}}`.
pub struct LatticeEscapeRule;

impl RemovalRule for LatticeEscapeRule {
    fn name(&self) -> &'static str {
        "lattice-escape"
    }

    fn classify(&self, step: &StepContext<'_>, children: &[Node]) -> Result<RuleOutcome, CantorError> {
        let schedule = lattice_schedule(step.q);
        if schedule.is_empty() {
            return Ok(RuleOutcome { class: vec![None; children.len()], ..Default::default() });
        }
        let scales = step.sheet.escape_scales();
        let results: Vec<Result<Option<(usize, Cause)>, CantorError>> = children
            .par_iter()
            .map_init(
                || {
                    schedule
                        .iter()
                        .map(|(_, ls)| ls.iter().map(|&l| EscapeKernel::new(step.curve, &scales, step.q, l)).collect())
                        .collect::<Vec<Vec<EscapeKernel<'_>>>>()
                },
                |kernels, child| {
                    let xs = sample_points(&child.interval, step.escape_samples);
                    for ((p, ls), ks) in schedule.iter().zip(kernels.iter_mut()) {
                        for (l, k) in ls.iter().zip(ks.iter_mut()) {
                            for x in &xs {
                                if k.escapes_at(x)? {
                                    return Ok(Some((*p, Cause::LatticeEscape { l: *l })));
                                }
                            }
                        }
                    }
                    Ok(None)
                },
            )
            .collect();
        let class = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(RuleOutcome { class, ..Default::default() })
    }
}

/// Cells meeting the cover of a level-`q` window, at `p = q − 1`.
pub struct DangerousWindowRule;

/// Sorted union of closed intervals, merging touching neighbours.
pub fn merge_region(ivs: &[RationalInterval]) -> Vec<RationalInterval> {
    let mut sorted: Vec<RationalInterval> = ivs.to_vec();
    sorted.sort();
    let mut out: Vec<RationalInterval> = Vec::new();
    for iv in sorted {
        if let Some(last) = out.last_mut() {
            if iv.left() <= last.right() {
                if iv.right() > last.right() {
                    *last = RationalInterval::new(last.left().clone(), iv.right().clone()).unwrap();
                }
                continue;
            }
        }
        out.push(iv);
    }
    out
}

impl RemovalRule for DangerousWindowRule {
    fn name(&self) -> &'static str {
        "dangerous-window"
    }

    fn classify(&self, step: &StepContext<'_>, children: &[Node]) -> Result<RuleOutcome, CantorError> {
        if step.q == 0 {
            return Ok(RuleOutcome { class: vec![None; children.len()], ..Default::default() });
        }
        let cells: Vec<RationalInterval> = children.iter().map(|c| c.interval.clone()).collect();
        let region = merge_region(step.parents);
        let windows = enumerate_near(step.window_ctx, step.curve, step.shift, step.q, &region, step.scan_limit)?;
        let hits = mark_hits(&windows, &cells);
        let mut class = vec![None; children.len()];
        for &k in &hits.marked {
            class[k] = Some((step.q - 1, Cause::DangerousHit));
        }
        Ok(RuleOutcome { class, windows, hits: Some(hits) })
    }
}

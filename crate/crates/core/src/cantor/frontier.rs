//! Which alive intervals the engine keeps tracking.

use crate::cantor::Node;
use crate::error::CantorError;

pub trait FrontierPolicy: Send + Sync {
    fn name(&self) -> String;
    fn select(&self, generation: usize, alive: Vec<Node>) -> Result<Vec<Node>, CantorError>;
}

/// Track every alive interval, failing past `limit`.
pub struct FullFrontier {
    pub limit: usize,
}

impl FrontierPolicy for FullFrontier {
    fn name(&self) -> String {
        "full".into()
    }

    fn select(&self, generation: usize, alive: Vec<Node>) -> Result<Vec<Node>, CantorError> {
        if alive.len() > self.limit {
            return Err(CantorError::FrontierTooLarge { generation, count: alive.len(), limit: self.limit });
        }
        Ok(alive)
    }
}

/// Keep `width` evenly spaced alive intervals in left-to-right order.
pub struct BeamFrontier {
    pub width: usize,
}

impl FrontierPolicy for BeamFrontier {
    fn name(&self) -> String {
        format!("beam:{}", self.width)
    }

    fn select(&self, _generation: usize, alive: Vec<Node>) -> Result<Vec<Node>, CantorError> {
        let n = alive.len();
        if n <= self.width {
            return Ok(alive);
        }
        let keep: Vec<usize> = (0..self.width).map(|i| i * n / self.width).collect();
        let mut k = 0;
        Ok(alive
            .into_iter()
            .enumerate()
            .filter_map(|(i, node)| {
                if k < keep.len() && keep[k] == i {
                    k += 1;
                    Some(node)
                } else {
                    None
                }
            })
            .collect())
    }
}

/// Keep `width` alive intervals spread over as many lineages as possible:
/// candidates are interleaved round-robin across subtrees at every depth,
/// so siblings, whose lattices nearly coincide, are taken last.
pub struct DiverseFrontier {
    pub width: usize,
}

fn interleave(alive: &[Node], idx: Vec<usize>, depth: usize) -> Vec<usize> {
    if idx.len() <= 1 || depth >= alive[idx[0]].path.len() {
        return idx;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match groups.last_mut() {
            Some(g) if alive[g[0]].path[depth] == alive[i].path[depth] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let ordered: Vec<Vec<usize>> = groups.into_iter().map(|g| interleave(alive, g, depth + 1)).collect();
    let longest = ordered.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::new();
    for k in 0..longest {
        for g in &ordered {
            if let Some(&i) = g.get(k) {
                out.push(i);
            }
        }
    }
    out
}

impl FrontierPolicy for DiverseFrontier {
    fn name(&self) -> String {
        format!("diverse:{}", self.width)
    }

    fn select(&self, _generation: usize, alive: Vec<Node>) -> Result<Vec<Node>, CantorError> {
        if alive.len() <= self.width {
            return Ok(alive);
        }
        let mut keep = interleave(&alive, (0..alive.len()).collect(), 0);
        keep.truncate(self.width);
        keep.sort_unstable();
        let mut k = 0;
        Ok(alive
            .into_iter()
            .enumerate()
            .filter_map(|(i, node)| {
                if k < keep.len() && keep[k] == i {
                    k += 1;
                    Some(node)
                } else {
                    None
                }
            })
            .collect())
    }
}

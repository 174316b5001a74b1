//! Finite search for ε-chains returning to a probe point.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inclusion::integrate;
use crate::linalg::{self, norm};
use crate::scalar::Scalar;
use crate::setvalued::{SelectorStrategy, SetValuedMap, VectorField};

#[derive(Debug, Clone)]
pub struct ChainSearch<T> {
    pub eps: T,
    /// Minimum duration of every chain segment.
    pub t_min: T,
    pub dt: T,
    pub strategy: SelectorStrategy<T>,
    /// Maximum number of integrated segments.
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainOutcome<T> {
    /// Constructive evidence: segment start points of a chain whose last
    /// segment ends within `eps` of the probe.
    Found { starts: Vec<Vec<T>>, end_distance: T },
    /// The budget or the reachable cells ran out; no claim of absence.
    Exhausted { explored: usize, best_distance: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    pub probe: Vec<T>,
    pub outcome: ChainOutcome<T>,
}

impl<T> ChainReport<T> {
    pub fn found(&self) -> bool {
        matches!(self.outcome, ChainOutcome::Found { .. })
    }
}

struct Node<T> {
    /// Start of the segment that produced this node (after its jump).
    start: Vec<T>,
    end: Vec<T>,
    parent: Option<usize>,
}

#[derive(PartialEq)]
struct Entry {
    score: f64,
    id: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on score, ties broken by insertion order.
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Jump vectors of length `0.9 ε`: toward the probe, along ± axes, along the
/// sign diagonals (up to dimension 3), plus no jump.
fn jumps<T: Scalar>(x: &[T], probe: &[T], eps: T) -> Vec<Vec<T>> {
    let d = x.len();
    let r = eps * T::lit(0.9);
    let mut out = vec![linalg::zeros(d)];
    let to = linalg::sub(probe, x);
    let nt = norm(&to);
    if nt > T::zero() {
        out.push(linalg::scale(r.min(nt) / nt, &to));
    }
    for i in 0..d {
        for s in [T::one(), -T::one()] {
            out.push(linalg::scale(s * r, &linalg::unit_vector(d, i)));
        }
    }
    if (2..=3).contains(&d) {
        let k = r / T::from_usize(d).unwrap_or_else(T::one).sqrt();
        for mask in 0..(1usize << d) {
            out.push((0..d).map(|i| if (mask >> i) & 1 == 1 { k } else { -k }).collect());
        }
    }
    out
}

fn cell<T: Scalar>(x: &[T], size: T) -> Vec<i64> {
    x.iter()
        .map(|&v| (v / size).floor().to_i64().unwrap_or(i64::MAX))
        .collect()
}

/// Best-first search, per probe, for an ε-chain of segments of duration
/// `t_min` that starts within ε of the probe and returns within ε of it.
/// Probes are independent; each search is deterministic.
pub fn epsilon_chain_diagnostic<T: Scalar>(
    map: &SetValuedMap<T>,
    hbar: Option<&VectorField<T>>,
    probes: &[Vec<T>],
    search: &ChainSearch<T>,
) -> Result<Vec<ChainReport<T>>> {
    if !(search.eps > T::zero()) || !(search.t_min > T::zero()) {
        return Err(Error::InvalidParameter("ε and T_min must be positive".into()));
    }
    probes
        .iter()
        .map(|p| search_one(map, hbar, p, search).map(|outcome| ChainReport { probe: p.clone(), outcome }))
        .collect()
}

fn search_one<T: Scalar>(
    map: &SetValuedMap<T>,
    hbar: Option<&VectorField<T>>,
    probe: &[T],
    search: &ChainSearch<T>,
) -> Result<ChainOutcome<T>> {
    let eps = search.eps;
    let cell_size = eps / T::lit(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut nodes: Vec<Node<T>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut explored = 0usize;
    let mut best = T::infinity();

    // The virtual root: the first segment starts within ε of the probe.
    let mut frontier: Vec<(Option<usize>, Vec<T>)> = vec![(None, probe.to_vec())];
    loop {
        for (parent, from) in frontier.drain(..) {
            for j in jumps(&from, probe, eps) {
                if explored >= search.budget {
                    return Ok(ChainOutcome::Exhausted { explored, best_distance: best });
                }
                let start = linalg::add(&from, &j);
                if parent.is_none() && linalg::dist(&start, probe) >= eps {
                    continue;
                }
                let path = integrate(map, hbar, &start, search.dt, search.t_min, &search.strategy, &mut rng)?;
                explored += 1;
                let end = path.final_state().to_vec();
                let dist = linalg::dist(&end, probe);
                best = best.min(dist);
                let id = nodes.len();
                nodes.push(Node { start, end: end.clone(), parent });
                if dist <= eps {
                    let mut starts = Vec::new();
                    let mut cur = Some(id);
                    while let Some(c) = cur {
                        starts.push(nodes[c].start.clone());
                        cur = nodes[c].parent;
                    }
                    starts.reverse();
                    return Ok(ChainOutcome::Found { starts, end_distance: dist });
                }
                if seen.insert(cell(&end, cell_size)) {
                    heap.push(Entry { score: dist.as_f64(), id });
                }
            }
        }
        match heap.pop() {
            Some(Entry { id, .. }) => frontier.push((Some(id), nodes[id].end.clone())),
            None => return Ok(ChainOutcome::Exhausted { explored, best_distance: best }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn search(budget: usize) -> ChainSearch<f64> {
        ChainSearch { eps: 0.1, t_min: 1.0, dt: 1e-2, strategy: SelectorStrategy::LeastNorm, budget }
    }

    #[test]
    fn equilibrium_is_found_immediately() {
        let h: VectorField<f64> = Arc::new(|x: &[f64]| vec![-x[0]]);
        let r = epsilon_chain_diagnostic(&SetValuedMap::zero(1), Some(&h), &[vec![0.0]], &search(100)).unwrap();
        assert!(r[0].found());
    }

    #[test]
    fn decaying_direction_is_exhausted() {
        let h: VectorField<f64> = Arc::new(|x: &[f64]| vec![-x[0]]);
        let r = epsilon_chain_diagnostic(&SetValuedMap::zero(1), Some(&h), &[vec![5.0]], &search(2000)).unwrap();
        assert!(!r[0].found());
    }
}

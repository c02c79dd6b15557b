use super::{scc_decompose, Digraph};
use crate::charpoly::traces_exact;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use serde::Serialize;
use std::collections::VecDeque;

/// Limits for cycle enumeration. The number of simple cycles can grow
/// exponentially with the length bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleBudget {
    pub max_stored: usize,
    pub max_steps: u64,
}

impl Default for CycleBudget {
    fn default() -> Self {
        CycleBudget {
            max_stored: 1_000_000,
            max_steps: 2_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleInventory {
    pub max_length: usize,
    /// `counts[l]` is the number of simple cycles of length `l`; index 0 is unused.
    pub counts: Vec<u64>,
    /// Canonical vertex tuples, smallest vertex first, when storage was requested.
    pub cycles: Option<Vec<Vec<usize>>>,
}

impl CycleInventory {
    pub fn count(&self, len: usize) -> u64 {
        self.counts.get(len).copied().unwrap_or(0)
    }

    /// Σ_{l | k} l·S_l, the closed walks of length k that trace a simple cycle.
    pub fn cycle_walks(&self, k: usize) -> u64 {
        (1..=k.min(self.max_length))
            .filter(|l| k.is_multiple_of(*l))
            .map(|l| l as u64 * self.count(l))
            .sum()
    }
}

/// Counts and stores all simple directed cycles of length at most `max_length`.
pub fn enumerate_cycles(g: &Digraph, max_length: usize) -> Result<CycleInventory> {
    enumerate_cycles_with(g, max_length, true, CycleBudget::default())
}

/// Each cycle is found once, from its smallest vertex, by a depth-bounded
/// search over larger vertices of the same strongly connected component.
/// Branches that cannot return to the start within the length bound are cut
/// using reverse BFS distances.
pub fn enumerate_cycles_with(
    g: &Digraph,
    max_length: usize,
    store: bool,
    budget: CycleBudget,
) -> Result<CycleInventory> {
    if max_length == 0 {
        return Err(Error::Parameter(
            "cycle length bound must be at least 1".into(),
        ));
    }
    let n = g.n();
    let of = scc_decompose(g).membership(n);
    let rev = g.transpose();
    let mut counts = vec![0u64; max_length + 1];
    let mut stored: Vec<Vec<usize>> = Vec::new();
    let mut steps: u64 = 0;

    let mut dist = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();

    for s in 0..n {
        if g.has_edge(s, s) {
            counts[1] += 1;
            if store {
                push_cycle(&mut stored, vec![s], budget)?;
            }
        }
        if max_length < 2 {
            continue;
        }
        // Distances to s along edges inside the component, vertices > s only.
        for &v in &touched {
            dist[v] = usize::MAX;
        }
        touched.clear();
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            if dist[v] + 1 >= max_length {
                continue;
            }
            for &u in rev.successors(v) {
                let u = u as usize;
                if u > s && of[u] == of[s] && dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    touched.push(u);
                    queue.push_back(u);
                }
            }
        }
        if touched.len() == 1 {
            continue;
        }

        path.push(s);
        on_path[s] = true;
        frames.push((s, 0));
        while let Some(frame) = frames.last_mut() {
            let (v, pos) = *frame;
            let succ = g.successors(v);
            if pos == succ.len() {
                frames.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            frame.1 += 1;
            steps += 1;
            if steps > budget.max_steps {
                return Err(Error::Budget(format!(
                    "cycle search exceeded {} steps",
                    budget.max_steps
                )));
            }
            let w = succ[pos] as usize;
            let len = path.len();
            if w == s {
                if len >= 2 {
                    counts[len] += 1;
                    if store {
                        push_cycle(&mut stored, path.clone(), budget)?;
                    }
                }
                continue;
            }
            if w < s || on_path[w] || dist[w] == usize::MAX || len + dist[w] > max_length {
                continue;
            }
            path.push(w);
            on_path[w] = true;
            frames.push((w, 0));
        }
    }

    if store {
        stored.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    }
    Ok(CycleInventory {
        max_length,
        counts,
        cycles: store.then_some(stored),
    })
}

fn push_cycle(stored: &mut Vec<Vec<usize>>, cycle: Vec<usize>, budget: CycleBudget) -> Result<()> {
    if stored.len() >= budget.max_stored {
        return Err(Error::Budget(format!(
            "more than {} cycles to store",
            budget.max_stored
        )));
    }
    stored.push(cycle);
    Ok(())
}

/// tr(A^k) split into closed walks around a single simple cycle (`cycles`)
/// and all other closed walks (`rest`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSplit {
    pub k: usize,
    pub trace: BigInt,
    pub cycles: BigInt,
    pub rest: BigInt,
}

pub fn trace_decomposition(g: &Digraph, k: usize) -> Result<TraceSplit> {
    trace_decomposition_with(g, k, CycleBudget::default())
}

pub fn trace_decomposition_with(g: &Digraph, k: usize, budget: CycleBudget) -> Result<TraceSplit> {
    let inventory = enumerate_cycles_with(g, k, false, budget)?;
    let cycles = BigInt::from(inventory.cycle_walks(k));
    let trace = traces_exact(g, k)?.swap_remove(k - 1);
    let rest = &trace - &cycles;
    if rest.sign() == num_bigint::Sign::Minus {
        return Err(Error::Consistency(format!(
            "tr(A^{k}) = {trace} is smaller than its cycle part {cycles}"
        )));
    }
    Ok(TraceSplit {
        k,
        trace,
        cycles,
        rest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_loop() {
        let g = Digraph::from_edges(3, [(0, 0)]).unwrap();
        let inv = enumerate_cycles(&g, 5).unwrap();
        assert_eq!(inv.count(1), 1);
        assert!((2..=5).all(|l| inv.count(l) == 0));
        let split = trace_decomposition(&g, 5).unwrap();
        assert_eq!(split.cycles, BigInt::from(1));
        assert_eq!(split.rest, BigInt::from(0));
    }

    #[test]
    fn two_cycle_at_fourth_power() {
        let g = Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let split = trace_decomposition(&g, 4).unwrap();
        assert_eq!(split.trace, BigInt::from(2));
        assert_eq!(split.cycles, BigInt::from(2));
        assert_eq!(split.rest, BigInt::from(0));
    }

    #[test]
    fn complete_graph_counts() {
        // C(4,2) two-cycles and C(4,3)·2 three-cycles.
        let inv = enumerate_cycles(&Digraph::complete(4), 3).unwrap();
        assert_eq!(&inv.counts[1..], &[4, 6, 8]);
        let stored = inv.cycles.unwrap();
        assert_eq!(stored.len(), 18);
        assert!(stored.contains(&vec![0, 2, 1]) && stored.contains(&vec![0, 1, 2]));
    }

    #[test]
    fn stored_cycles_are_canonical() {
        let g = crate::graph::sample_digraph(25, 2.5, 3).unwrap();
        let inv = enumerate_cycles(&g, 6).unwrap();
        for c in inv.cycles.as_ref().unwrap() {
            assert_eq!(c[0], *c.iter().min().unwrap());
            let mut sorted = c.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), c.len());
            for i in 0..c.len() {
                assert!(g.has_edge(c[i], c[(i + 1) % c.len()]));
            }
        }
        for l in 1..=6 {
            let stored = inv
                .cycles
                .as_ref()
                .unwrap()
                .iter()
                .filter(|c| c.len() == l)
                .count();
            assert_eq!(stored as u64, inv.count(l));
        }
    }

    #[test]
    fn storage_cap_is_enforced() {
        let budget = CycleBudget {
            max_stored: 10,
            max_steps: u64::MAX,
        };
        let err = enumerate_cycles_with(&Digraph::complete(5), 4, true, budget).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
        // Counting alone is not limited by the storage cap.
        assert!(enumerate_cycles_with(&Digraph::complete(5), 4, false, budget).is_ok());
    }

    #[test]
    fn step_cap_is_enforced() {
        let budget = CycleBudget {
            max_stored: usize::MAX,
            max_steps: 100,
        };
        let err = enumerate_cycles_with(&Digraph::complete(8), 8, false, budget).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
    }

    #[test]
    fn zero_length_bound_rejected() {
        assert!(enumerate_cycles(&Digraph::empty(2), 0).is_err());
    }
}

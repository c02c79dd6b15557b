use super::Digraph;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Single vertex without a loop.
    Trivial,
    /// Every vertex has exactly one in-edge and one out-edge inside the component.
    PureCycle,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SccDecomposition {
    /// Components in reverse topological order of the condensation: no edge
    /// leaves a component towards a later one.
    pub components: Vec<Vec<usize>>,
    pub kinds: Vec<ComponentKind>,
    pub is_acyclic: bool,
}

impl SccDecomposition {
    /// Vertex → component index.
    pub fn membership(&self, n: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n];
        for (c, comp) in self.components.iter().enumerate() {
            for &v in comp {
                of[v] = c;
            }
        }
        of
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = (&[usize], ComponentKind)> + '_ {
        self.components
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k != ComponentKind::Trivial)
            .map(|(c, k)| (c.as_slice(), *k))
    }

    /// Total size of the nontrivial components; bounds the number of nonzero eigenvalues.
    pub fn cyclic_vertex_count(&self) -> usize {
        self.nontrivial().map(|(c, _)| c.len()).sum()
    }

    pub fn only_cycles(&self) -> bool {
        self.kinds.iter().all(|k| *k != ComponentKind::General)
    }
}

/// Tarjan's algorithm with an explicit stack.
pub fn scc_decompose(g: &Digraph) -> SccDecomposition {
    const UNSEEN: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    // (vertex, next successor position)
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0usize;
    let mut components = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        frames.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }

    let mut of = vec![0usize; n];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            of[v] = c;
        }
    }
    let kinds: Vec<ComponentKind> = components
        .iter()
        .enumerate()
        .map(|(c, comp)| classify(g, comp, c, &of))
        .collect();
    let is_acyclic = kinds.iter().all(|k| *k == ComponentKind::Trivial);
    SccDecomposition {
        components,
        kinds,
        is_acyclic,
    }
}

fn classify(g: &Digraph, comp: &[usize], c: usize, of: &[usize]) -> ComponentKind {
    if comp.len() == 1 && !g.has_edge(comp[0], comp[0]) {
        return ComponentKind::Trivial;
    }
    // Strong connectivity forces in-degree ≥ 1, so out-degree exactly 1
    // everywhere means the internal edges form one cycle.
    let single_out = comp.iter().all(|&v| {
        g.successors(v)
            .iter()
            .filter(|&&w| of[w as usize] == c)
            .count()
            == 1
    });
    if single_out {
        ComponentKind::PureCycle
    } else {
        ComponentKind::General
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_acyclic() {
        let s = scc_decompose(&Digraph::empty(4));
        assert_eq!(s.components.len(), 4);
        assert!(s.kinds.iter().all(|k| *k == ComponentKind::Trivial));
        assert!(s.is_acyclic);
    }

    #[test]
    fn three_cycle_plus_isolated() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let s = scc_decompose(&g);
        let mut found: Vec<_> = s
            .components
            .iter()
            .cloned()
            .zip(s.kinds.iter().copied())
            .collect();
        found.sort();
        assert_eq!(
            found,
            vec![
                (vec![0, 1, 2], ComponentKind::PureCycle),
                (vec![3], ComponentKind::Trivial)
            ]
        );
        assert!(!s.is_acyclic);
    }

    #[test]
    fn loop_is_pure_cycle_and_chord_is_general() {
        let g = Digraph::from_edges(2, [(0, 0)]).unwrap();
        let s = scc_decompose(&g);
        assert_eq!(s.kinds[s.membership(2)[0]], ComponentKind::PureCycle);
        assert!(!s.is_acyclic);

        let g = Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
        let s = scc_decompose(&g);
        assert_eq!(s.kinds, vec![ComponentKind::General]);
    }

    #[test]
    fn order_is_block_triangular() {
        // 0 → 1 → 2 ⇄ 3, with a loop at 0.
        let g = Digraph::from_edges(4, [(0, 0), (0, 1), (1, 2), (2, 3), (3, 2)]).unwrap();
        let s = scc_decompose(&g);
        let of = s.membership(4);
        for (i, j) in g.edges() {
            assert!(of[i] >= of[j], "edge {i}->{j} goes forward in the order");
        }
    }

    #[test]
    fn long_path_does_not_overflow_stack() {
        let n = 200_000;
        let g = Digraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap();
        let s = scc_decompose(&g);
        assert_eq!(s.components.len(), n);
        assert!(s.is_acyclic);
    }
}

#[cfg(test)]
mod properties {
    use crate::graph::{sample_digraph, scc_decompose};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn components_partition_and_order_the_condensation(n in 1usize..40, d in 0.0f64..3.0, seed: u64) {
            let g = sample_digraph(n, d.min(n as f64), seed).unwrap();
            let scc = scc_decompose(&g);
            let comp = scc.membership(n);
            let mut seen = vec![0; n];
            for c in &scc.components {
                for &v in c {
                    seen[v] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
            // Edges never point from a component to a later one.
            for (i, j) in g.edges() {
                prop_assert!(comp[i] >= comp[j]);
            }
        }
    }
}

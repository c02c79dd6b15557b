//! Sparse Bernoulli digraphs and their cycle structure.
//!
//! Vertices are `0..n` in memory. The text edge-list format is 1-based.

mod cycles;
mod scc;

pub use cycles::{enumerate_cycles, trace_decomposition, CycleBudget, CycleInventory, TraceSplit};
pub use scc::{scc_decompose, ComponentKind, SccDecomposition};

use crate::error::{param, Error, Result};
use crate::rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Above this many vertices (and for p below [`GEOMETRIC_MAX_P`]) sampling
/// walks the n² grid by geometric jumps instead of drawing every pair.
pub const PER_PAIR_MAX_N: usize = 256;
pub const GEOMETRIC_MAX_P: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    /// One Bernoulli draw per ordered pair, row-major.
    PerPair,
    /// Geometric gaps between successive edges in row-major order.
    Geometric,
}

impl SamplingMethod {
    pub fn auto(n: usize, p: f64) -> Self {
        if n <= PER_PAIR_MAX_N || p >= GEOMETRIC_MAX_P {
            SamplingMethod::PerPair
        } else {
            SamplingMethod::Geometric
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub d: f64,
    pub p: f64,
    pub seed: u64,
    pub method: SamplingMethod,
}

/// Directed graph in compressed sparse row form, loops allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    record: Option<SampleRecord>,
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        Digraph {
            n,
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            record: None,
        }
    }

    /// Every ordered pair, loops included.
    pub fn complete(n: usize) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(n * n);
        offsets.push(0);
        for _ in 0..n {
            targets.extend(0..n as u32);
            offsets.push(targets.len());
        }
        Digraph {
            n,
            offsets,
            targets,
            record: None,
        }
    }

    /// Builds a digraph from 0-based `(source, target)` pairs. Duplicates are merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return param(format!("edge ({i}, {j}) out of range for n = {n}"));
            }
            lists[i].push(j as u32);
        }
        Ok(Self::from_lists(lists))
    }

    fn from_lists(mut lists: Vec<Vec<u32>>) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in lists.iter_mut() {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Digraph {
            n,
            offsets,
            targets,
            record: None,
        }
    }

    /// Dense 0/1 matrix input, row `i` column `j` meaning an edge i → j.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return param("adjacency matrix is not square");
            }
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 => edges.push((i, j)),
                    _ => return param(format!("entry ({i}, {j}) is not 0/1")),
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn record(&self) -> Option<&SampleRecord> {
        self.record.as_ref()
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.successors(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn loop_count(&self) -> usize {
        (0..self.n).filter(|&v| self.has_edge(v, v)).count()
    }

    /// Number of ordered pairs (i, j) with both i → j and j → i; a loop counts once.
    /// This is tr(A²).
    pub fn reciprocal_pairs(&self) -> usize {
        self.edges().filter(|&(i, j)| self.has_edge(j, i)).count()
    }

    /// 0-based edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.successors(i).iter().map(move |&j| (i, j as usize)))
    }

    /// Induced subgraph on `vertices`, relabelled by position in the slice.
    pub fn induced(&self, vertices: &[usize]) -> Digraph {
        let mut local = vec![u32::MAX; self.n];
        for (pos, &v) in vertices.iter().enumerate() {
            local[v] = pos as u32;
        }
        let lists = vertices
            .iter()
            .map(|&v| {
                self.successors(v)
                    .iter()
                    .filter_map(|&w| match local[w as usize] {
                        u32::MAX => None,
                        l => Some(l),
                    })
                    .collect()
            })
            .collect();
        Self::from_lists(lists)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Digraph> {
        if perm.len() != self.n {
            return param("permutation length differs from n");
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return param("not a permutation");
            }
        }
        Self::from_edges(self.n, self.edges().map(|(i, j)| (perm[i], perm[j])))
    }

    pub fn transpose(&self) -> Digraph {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); self.n];
        for (i, j) in self.edges() {
            lists[j].push(i as u32);
        }
        Self::from_lists(lists)
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.n]; self.n];
        for (i, j) in self.edges() {
            m[i][j] = 1;
        }
        m
    }

    /// Edge-list text: `n m` then one 1-based `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edge_count());
        for (i, j) in self.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Digraph> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let (i, j) = parse_pair(line)?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Parse(format!(
                    "vertex out of range in line {line:?}"
                )));
            }
            edges.push((i - 1, j - 1));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        let g = Self::from_edges(n, edges)?;
        if g.edge_count() != m {
            return Err(Error::Parse("duplicate edges".into()));
        }
        Ok(g)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("expected two integers in {line:?}")))?
            .parse()
            .map_err(|e| Error::Parse(format!("{e} in {line:?}")))
    };
    let a = next()?;
    let b = next()?;
    Ok((a, b))
}

/// Samples the adjacency structure of an n×n matrix with iid Bernoulli(d/n) entries.
pub fn sample_digraph(n: usize, d: f64, seed: u64) -> Result<Digraph> {
    let p = check_density(n, d)?;
    sample_digraph_with(n, d, seed, SamplingMethod::auto(n, p))
}

pub fn sample_digraph_with(n: usize, d: f64, seed: u64, method: SamplingMethod) -> Result<Digraph> {
    let p = check_density(n, d)?;
    let mut rng = rng::stream(seed);
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
    match method {
        SamplingMethod::PerPair => {
            if p >= 1.0 {
                for list in lists.iter_mut() {
                    list.extend(0..n as u32);
                }
            } else if p > 0.0 {
                // P(next_u64 < threshold) = threshold / 2^64.
                let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
                for list in lists.iter_mut() {
                    for j in 0..n as u32 {
                        if rng.next_u64() < threshold {
                            list.push(j);
                        }
                    }
                }
            }
        }
        SamplingMethod::Geometric => {
            if p >= 1.0 {
                for list in lists.iter_mut() {
                    list.extend(0..n as u32);
                }
            } else if p > 0.0 {
                let cells = (n as u128) * (n as u128);
                let log_q = (-p).ln_1p();
                let mut pos: u128 = 0;
                loop {
                    let gap = (rng::unit_open_closed(&mut rng).ln() / log_q).floor();
                    if !(gap < cells as f64) {
                        break;
                    }
                    pos += gap as u128;
                    if pos >= cells {
                        break;
                    }
                    lists[(pos / n as u128) as usize].push((pos % n as u128) as u32);
                    pos += 1;
                }
            }
        }
    }
    let mut g = Digraph::from_lists(lists);
    g.record = Some(SampleRecord { d, p, seed, method });
    Ok(g)
}

fn check_density(n: usize, d: f64) -> Result<f64> {
    if n == 0 {
        return param("n must be positive");
    }
    if !(d >= 0.0) || d > n as f64 {
        return param(format!("mean degree d = {d} must lie in [0, n = {n}]"));
    }
    Ok(d / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_empty() {
        for seed in 0..5 {
            let g = sample_digraph(5, 0.0, seed).unwrap();
            assert_eq!(g.edge_count(), 0);
        }
    }

    #[test]
    fn full_density_is_complete() {
        let g = sample_digraph(3, 3.0, 11).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert_eq!(g, {
            let mut c = Digraph::complete(3);
            c.record = g.record.clone();
            c
        });
    }

    #[test]
    fn density_out_of_range() {
        assert!(matches!(
            sample_digraph(4, 5.0, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            sample_digraph(4, -0.1, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            sample_digraph(4, f64::NAN, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn reproducible() {
        for method in [SamplingMethod::PerPair, SamplingMethod::Geometric] {
            let a = sample_digraph_with(300, 2.0, 42, method).unwrap();
            let b = sample_digraph_with(300, 2.0, 42, method).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, sample_digraph_with(300, 2.0, 43, method).unwrap());
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = sample_digraph(40, 3.0, 5).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with(&format!("40 {}\n", g.edge_count())));
        let h = Digraph::from_edge_list(&text).unwrap();
        assert_eq!(h.to_dense(), g.to_dense());
    }

    #[test]
    fn edge_list_rejects_bad_input() {
        assert!(Digraph::from_edge_list("").is_err());
        assert!(Digraph::from_edge_list("2 1\n0 1\n").is_err());
        assert!(Digraph::from_edge_list("2 2\n1 2\n").is_err());
        assert!(Digraph::from_edge_list("2 2\n1 2\n1 2\n").is_err());
        assert!(Digraph::from_edge_list("2 1\n1 x\n").is_err());
    }

    #[test]
    fn induced_and_transpose() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 3)]).unwrap();
        let h = g.induced(&[2, 3]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 1)]);
        let t = g.transpose();
        assert!(t.has_edge(1, 0) && t.has_edge(3, 2) && t.has_edge(3, 3));
        assert_eq!(t.edge_count(), g.edge_count());
        assert_eq!(g.loop_count(), 1);
        assert_eq!(g.reciprocal_pairs(), 1);
    }
}

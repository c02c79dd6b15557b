//! Eigenvalues of sampled adjacency matrices, block by strongly connected component.

mod qr;
mod roots;

pub use qr::{
    dense_eigenvalues, faer_eigenvalues, qr_eigenvalues, DenseMatrix, OWN_QR_MAX_N, SWEEPS_PER_EIGENVALUE,
};
pub use roots::{aberth, poly_roots, secular_eigenvalues, squarefree_factors};

use crate::charpoly::{secular_polynomial, ArithmeticMode};
use crate::error::{Error, Result};
use crate::graph::{scc_decompose, ComponentKind, Digraph};
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// General blocks up to this size get their zero eigenvalues counted exactly
/// from the block's secular polynomial instead of trusting QR near zero.
pub const EXACT_ZERO_MAX_BLOCK: usize = 64;

/// e^{2πij/l} with gcd(j, l) = 1 (or (1, 0) for the eigenvalue 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootLabel {
    pub l: usize,
    pub j: usize,
}

impl RootLabel {
    pub fn reduced(l: usize, j: usize) -> Self {
        let j = j % l;
        let g = j.gcd(&l);
        RootLabel { l: l / g, j: j / g }
    }

    pub fn value(&self) -> Complex64 {
        match (self.l, self.j) {
            (1, 0) => Complex64::new(1.0, 0.0),
            (2, 1) => Complex64::new(-1.0, 0.0),
            (4, 1) => Complex64::new(0.0, 1.0),
            (4, 3) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, TAU * self.j as f64 / self.l as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    #[serde(serialize_with = "complex_pair")]
    pub value: Complex64,
    pub multiplicity: usize,
    pub label: Option<RootLabel>,
}

/// Eigenvalues of an n×n matrix. Zeros are kept as a count; every other
/// eigenvalue is an entry, labelled when it is known exactly to be a root of unity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: usize,
    pub entries: Vec<SpectrumEntry>,
    pub zero_multiplicity: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    re: f64,
    im: f64,
    multiplicity: usize,
    exact_l: Option<usize>,
    exact_j: Option<usize>,
}

impl Spectrum {
    /// Unlabelled spectrum; exact zeros go to the zero count.
    pub fn from_values(values: &[Complex64]) -> Self {
        let zero_multiplicity = values.iter().filter(|v| **v == Complex64::new(0.0, 0.0)).count();
        let entries = values
            .iter()
            .filter(|v| **v != Complex64::new(0.0, 0.0))
            .map(|&value| SpectrumEntry { value, multiplicity: 1, label: None })
            .collect();
        Spectrum { n: values.len(), entries, zero_multiplicity }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.zero_multiplicity + self.entries.iter().map(|e| e.multiplicity).sum::<usize>()
    }

    /// All n eigenvalues, repeated by multiplicity, zeros last.
    pub fn values(&self) -> Vec<Complex64> {
        let mut out = self.nonzero_values();
        out.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), self.zero_multiplicity));
        out
    }

    pub fn nonzero_values(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }

    pub fn exact_roots(&self) -> Vec<(RootLabel, usize)> {
        self.entries.iter().filter_map(|e| e.label.map(|l| (l, e.multiplicity))).collect()
    }

    pub fn label_multiplicity(&self, label: RootLabel) -> usize {
        self.entries.iter().filter(|e| e.label == Some(label)).map(|e| e.multiplicity).sum()
    }

    pub fn all_nonzero_labelled(&self) -> bool {
        self.entries.iter().all(|e| e.label.is_some())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        // Unlabelled numeric zeros go into the single zero row, which is how they read back.
        let mut zeros = self.zero_multiplicity;
        for e in &self.entries {
            if e.value == Complex64::new(0.0, 0.0) && e.label.is_none() {
                zeros += e.multiplicity;
                continue;
            }
            w.serialize(CsvRow {
                re: e.value.re,
                im: e.value.im,
                multiplicity: e.multiplicity,
                exact_l: e.label.map(|l| l.l),
                exact_j: e.label.map(|l| l.j),
            })
            .map_err(io)?;
        }
        if zeros > 0 || self.entries.is_empty() {
            w.serialize(CsvRow { re: 0.0, im: 0.0, multiplicity: zeros, exact_l: None, exact_j: None })
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut zero_multiplicity = 0;
        for row in r.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            let label = match (row.exact_l, row.exact_j) {
                (Some(l), Some(j)) if l > 0 => Some(RootLabel::reduced(l, j)),
                (None, None) => None,
                _ => return Err(Error::Parse("exact_l and exact_j must be given together".into())),
            };
            if row.re == 0.0 && row.im == 0.0 && label.is_none() {
                zero_multiplicity += row.multiplicity;
            } else {
                entries.push(SpectrumEntry { value: Complex64::new(row.re, row.im), multiplicity: row.multiplicity, label });
            }
        }
        let n = zero_multiplicity + entries.iter().map(|e| e.multiplicity).sum::<usize>();
        Ok(Spectrum { n, entries, zero_multiplicity })
    }
}

/// Spectrum through the block-triangular structure of the SCC condensation:
/// trivial components give 0, a pure ℓ-cycle gives the ℓ-th roots of unity
/// (labelled), general components go through dense QR.
pub fn block_eigenvalues(g: &Digraph) -> Result<Spectrum> {
    let scc = scc_decompose(g);
    let mut zero_multiplicity = 0;
    let mut labels: BTreeMap<RootLabel, usize> = BTreeMap::new();
    let mut numeric = Vec::new();
    for (comp, kind) in scc.components.iter().zip(&scc.kinds) {
        match kind {
            ComponentKind::Trivial => zero_multiplicity += 1,
            ComponentKind::PureCycle => {
                let l = comp.len();
                for j in 0..l {
                    *labels.entry(RootLabel::reduced(l, j)).or_insert(0) += 1;
                }
            }
            ComponentKind::General => {
                let sub = g.induced(comp);
                let (values, zeros) = general_block(&sub).map_err(|e| match e {
                    Error::NonConvergence { context, detail } => Error::NonConvergence {
                        context: format!("{context} (component of size {} containing vertex {})", comp.len(), comp[0] + 1),
                        detail,
                    },
                    other => other,
                })?;
                zero_multiplicity += zeros;
                numeric.extend(values);
            }
        }
    }
    let mut entries: Vec<SpectrumEntry> = labels
        .into_iter()
        .map(|(label, multiplicity)| SpectrumEntry { value: label.value(), multiplicity, label: Some(label) })
        .collect();
    entries.extend(numeric.into_iter().map(|value| SpectrumEntry { value, multiplicity: 1, label: None }));
    Ok(Spectrum { n: g.n(), entries, zero_multiplicity })
}

fn general_block(sub: &Digraph) -> Result<(Vec<Complex64>, usize)> {
    let k = sub.n();
    let mut m = DenseMatrix::zeros(k);
    for (i, j) in sub.edges() {
        m.set(i, j, 1.0);
    }
    let mut values = dense_eigenvalues(&m)?;
    if k > EXACT_ZERO_MAX_BLOCK {
        return Ok((values, 0));
    }
    let nonzero = secular_polynomial(sub, ArithmeticMode::Exact)?.degree();
    let zeros = k - nonzero;
    values.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Ok((values.split_off(zeros), zeros))
}

fn complex_pair<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn complex_list<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    #[serde(serialize_with = "complex_pair")]
    pub lambda1: Complex64,
    pub lambda2_modulus: f64,
    pub spectral_radius: f64,
    #[serde(serialize_with = "complex_list")]
    pub esd_points: Vec<Complex64>,
}

/// λ₁ is the eigenvalue of largest modulus (largest real part among ties);
/// λ₂ is the second entry of the multiset ordered by modulus.
pub fn spectral_summary(s: &Spectrum, rescale: Option<f64>) -> EigenReport {
    let mut values = s.values();
    values.sort_by(|a, b| {
        b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im))
    });
    let zero = Complex64::new(0.0, 0.0);
    let lambda1 = values.first().copied().unwrap_or(zero);
    let lambda2_modulus = values.get(1).map_or(0.0, |z| z.norm());
    let scale = rescale.unwrap_or(1.0);
    EigenReport {
        lambda1,
        lambda2_modulus,
        spectral_radius: lambda1.norm(),
        esd_points: s.values().into_iter().map(|z| z / scale).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub matched: usize,
    pub max_distance: f64,
    #[serde(serialize_with = "complex_list")]
    pub unmatched_left: Vec<Complex64>,
    #[serde(serialize_with = "complex_list")]
    pub unmatched_right: Vec<Complex64>,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.unmatched_left.is_empty() && self.unmatched_right.is_empty()
    }
}

fn modulus_then_argument(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg()))
}

/// Pairs two eigenvalue multisets: left values in (modulus, argument) order
/// each take the nearest unused right value within `tol`.
pub fn match_multisets(left: &[Complex64], right: &[Complex64], tol: f64) -> MatchReport {
    let mut a = left.to_vec();
    let mut b = right.to_vec();
    a.sort_by(modulus_then_argument);
    b.sort_by(modulus_then_argument);
    let mut used = vec![false; b.len()];
    let mut unmatched_left = Vec::new();
    let mut matched = 0;
    let mut max_distance: f64 = 0.0;
    for x in a {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((j, dist)) if dist <= tol => {
                used[j] = true;
                matched += 1;
                max_distance = max_distance.max(dist);
            }
            _ => unmatched_left.push(x),
        }
    }
    let unmatched_right = b.iter().zip(&used).filter(|(_, u)| !**u).map(|(z, _)| *z).collect();
    MatchReport { matched, max_distance, unmatched_left, unmatched_right }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::{minor_sum_secular, newton_secular, traces, ArithmeticMode};
    use crate::graph::sample_digraph;

    #[test]
    fn empty_digraph_is_all_zero() {
        let s = block_eigenvalues(&Digraph::empty(5)).unwrap();
        assert_eq!(s.zero_multiplicity, 5);
        assert!(s.entries.is_empty());
        assert_eq!(spectral_summary(&s, None).lambda1, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn four_cycle_with_isolated_vertices() {
        let g = Digraph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let s = block_eigenvalues(&g).unwrap();
        assert_eq!(s.zero_multiplicity, 3);
        let labels: Vec<_> = s.exact_roots();
        assert_eq!(
            labels,
            vec![
                (RootLabel { l: 1, j: 0 }, 1),
                (RootLabel { l: 2, j: 1 }, 1),
                (RootLabel { l: 4, j: 1 }, 1),
                (RootLabel { l: 4, j: 3 }, 1)
            ]
        );
        assert_eq!(s.total_multiplicity(), 7);
        let back = Spectrum::from_csv(&s.to_csv().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn summary_of_small_spectrum() {
        let s = Spectrum::from_values(&[2.0.into(), 1.0.into(), 0.0.into()]);
        let r = spectral_summary(&s, Some(2.0));
        assert_eq!(r.lambda1, Complex64::new(2.0, 0.0));
        assert_eq!(r.lambda2_modulus, 1.0);
        assert_eq!(r.esd_points.len(), 3);
        assert!(r.esd_points.contains(&Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn blocks_agree_with_polynomial_roots() {
        for seed in 0..5 {
            let g = sample_digraph(30, 2.0, seed).unwrap();
            let s = block_eigenvalues(&g).unwrap();
            let scc = scc_decompose(&g);
            let t = traces(&g, scc.cyclic_vertex_count(), ArithmeticMode::Exact).unwrap();
            let q = newton_secular(&t, g.n()).unwrap();
            let mut from_roots = secular_eigenvalues(&q).unwrap();
            from_roots.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), g.n() - q.degree()));
            let report = match_multisets(&s.values(), &from_roots, 1e-8);
            assert!(report.all_matched(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn inverted_roots_match_blocks_for_small_graph() {
        let g = sample_digraph(10, 2.5, 3).unwrap();
        let q = minor_sum_secular(&g).unwrap();
        if q.degree() == 0 {
            return;
        }
        let inverted: Vec<Complex64> = poly_roots(&q).unwrap().iter().map(|r| r.inv()).collect();
        let s = block_eigenvalues(&g).unwrap();
        assert!(match_multisets(&s.nonzero_values(), &inverted, 1e-6).all_matched());
    }

    #[test]
    fn trace_identities() {
        let g = sample_digraph(100, 3.0, 9).unwrap();
        let v = block_eigenvalues(&g).unwrap().values();
        let t1: Complex64 = v.iter().sum();
        let t2: Complex64 = v.iter().map(|z| z * z).sum();
        assert!((t1.re - g.loop_count() as f64).abs() < 1e-6 * (1.0 + g.loop_count() as f64));
        let tr2 = g.reciprocal_pairs() as f64;
        assert!((t2.re - tr2).abs() < 1e-6 * (1.0 + tr2), "{t2} vs {tr2}");
    }

    #[test]
    fn labels_are_reduced() {
        assert_eq!(RootLabel::reduced(6, 4), RootLabel { l: 3, j: 2 });
        assert_eq!(RootLabel::reduced(5, 0), RootLabel { l: 1, j: 0 });
    }

    #[test]
    fn csv_rejects_half_labels() {
        assert!(Spectrum::from_csv("re,im,multiplicity,exact_l,exact_j\n1,0,1,1,\n").is_err());
    }
}

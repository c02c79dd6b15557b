//! Monte Carlo trials over sampled digraphs or limit fields, and the
//! statistical comparisons run on their output.
//!
//! Trial `t` of a plan is driven by `derive_seed(master_seed, t)`, and rows
//! are collected in trial order, so a table does not depend on the thread
//! count.

mod pmf;
mod presets;
mod stats;

pub use pmf::{pmf_X, poisson_pmf, Pmf};
pub use presets::{experiment_presets, run_preset, Preset, PresetName, PresetRun};
pub use stats::{
    bootstrap_tv_se, compare_distributions, ks_one_sample, ks_two_sample, mean, mean_check, two_sample_mean_check,
    variance, variance_check, EmpiricalDist, Reference, StatReport, Statistic, Threshold,
};

use crate::charpoly::{secular_polynomial, traces_exact, ArithmeticMode};
use crate::error::{param, Error, Result};
use crate::graph::{enumerate_cycles, sample_digraph, scc_decompose, Digraph};
use crate::limit::{sample_Zd, secular_limit_coefficients, FieldSampler, PoissonCycleField};
use crate::rng::derive_seed;
use crate::spectra::{block_eigenvalues, spectral_summary, RootLabel, Spectrum};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Tail probability used when a limit-field plan leaves the length open (d < 1).
pub const FIELD_TAIL_EPS: f64 = 1e-12;

/// Mean degree as a function of n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DegreeRule {
    Constant { d: f64 },
    /// d_n = scale · n^exponent
    Power { scale: f64, exponent: f64 },
}

impl DegreeRule {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            DegreeRule::Constant { d } => d,
            DegreeRule::Power { scale, exponent } => scale * (n as f64).powf(exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Digraph { n: usize, degree: DegreeRule },
    /// Cycle fields of length `length`; `None` picks the length from [`FIELD_TAIL_EPS`] (d < 1 only).
    LimitField { d: f64, length: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement {
    /// tr1..trK, or X_1..X_K on a field.
    Traces { k: usize },
    Nilpotent,
    Lambda1,
    Lambda2Modulus,
    /// Multiplicity of the eigenvalue 1, whether the graph has only cycle
    /// components, and whether every nonzero eigenvalue carries a label.
    UnitRootMultiplicities,
    /// S_1..S_L (simple cycles of each length), or Y_1..Y_L on a field.
    CycleCounts { l: usize },
    /// α_k = tr(A^k)/d^{k/2} − d^{k/2}
    StandardizedTraces { k: usize },
    /// c_0..c_K
    SecularCoefficients { k: usize },
}

impl Measurement {
    pub fn columns(&self) -> Vec<String> {
        match *self {
            Measurement::Traces { k } => (1..=k).map(|i| format!("tr{i}")).collect(),
            Measurement::Nilpotent => vec!["nilpotent".into()],
            Measurement::Lambda1 => vec!["lambda1_re".into(), "lambda1_im".into(), "lambda1_abs".into()],
            Measurement::Lambda2Modulus => vec!["lambda2_abs".into()],
            Measurement::UnitRootMultiplicities => {
                vec!["mult_one".into(), "only_cycles".into(), "all_labelled".into()]
            }
            Measurement::CycleCounts { l } => (1..=l).map(|i| format!("s{i}")).collect(),
            Measurement::StandardizedTraces { k } => (1..=k).map(|i| format!("alpha{i}")).collect(),
            Measurement::SecularCoefficients { k } => (0..=k).map(|i| format!("c{i}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub experiment: String,
    pub source: Source,
    pub trials: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

/// One row per trial, one column per measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrialTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parameter(format!("no column {name:?} in {}", self.experiment)))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn distribution(&self, name: &str) -> Result<EmpiricalDist> {
        Ok(EmpiricalDist::from_samples(&self.column(name)?))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(std::iter::once("trial").chain(self.columns.iter().map(String::as_str))).map_err(io)?;
        for (t, row) in self.rows.iter().enumerate() {
            w.write_record(std::iter::once(t.to_string()).chain(row.iter().map(|x| x.to_string()))).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Per-trial state; the spectrum is computed at most once.
struct Trial {
    graph: Option<Digraph>,
    field: Option<PoissonCycleField>,
    spectrum: Option<Spectrum>,
    degree: f64,
}

impl Trial {
    fn spectrum(&mut self) -> Result<&Spectrum> {
        if self.spectrum.is_none() {
            self.spectrum = Some(block_eigenvalues(self.graph.as_ref().expect("digraph trial"))?);
        }
        Ok(self.spectrum.as_ref().expect("just computed"))
    }

    fn measure(&mut self, m: &Measurement, row: &mut Vec<f64>) -> Result<()> {
        if let Some(field) = &self.field {
            return measure_field(field, m, row);
        }
        let g = self.graph.as_ref().expect("digraph trial");
        let d = self.degree;
        match *m {
            Measurement::Traces { k } => {
                row.extend(traces_exact(g, k)?.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)));
            }
            Measurement::Nilpotent => row.push(if scc_decompose(g).is_acyclic { 1.0 } else { 0.0 }),
            Measurement::StandardizedTraces { k } => {
                let t = traces_exact(g, k)?;
                for (i, tr) in t.iter().enumerate() {
                    let half = d.powf((i + 1) as f64 / 2.0);
                    row.push(tr.to_f64().unwrap_or(f64::NAN) / half - half);
                }
            }
            Measurement::CycleCounts { l } => {
                let inv = enumerate_cycles(g, l)?;
                row.extend((1..=l).map(|i| inv.count(i) as f64));
            }
            Measurement::SecularCoefficients { k } => {
                let q = secular_polynomial(g, ArithmeticMode::Exact)?;
                let c = q.to_f64();
                row.extend((0..=k).map(|i| c.get(i).copied().unwrap_or(0.0)));
            }
            Measurement::UnitRootMultiplicities => {
                let only_cycles = scc_decompose(g).only_cycles();
                let s = self.spectrum()?;
                let one = RootLabel { l: 1, j: 0 };
                let numeric = s
                    .entries
                    .iter()
                    .filter(|e| e.label.is_none() && (e.value - 1.0).norm() < 1e-8)
                    .map(|e| e.multiplicity)
                    .sum::<usize>();
                let labelled = s.all_nonzero_labelled();
                row.push((s.label_multiplicity(one) + numeric) as f64);
                row.push(if only_cycles { 1.0 } else { 0.0 });
                row.push(if labelled { 1.0 } else { 0.0 });
            }
            Measurement::Lambda1 => {
                let r = spectral_summary(self.spectrum()?, None);
                row.extend([r.lambda1.re, r.lambda1.im, r.lambda1.norm()]);
            }
            Measurement::Lambda2Modulus => {
                let r = spectral_summary(self.spectrum()?, None);
                row.push(r.lambda2_modulus);
            }
        }
        Ok(())
    }
}

fn measure_field(field: &PoissonCycleField, m: &Measurement, row: &mut Vec<f64>) -> Result<()> {
    let big = |l: usize| -> Result<f64> {
        if l > field.len() {
            return Err(Error::Truncation(format!("Y_{l} requested from a field of length {}", field.len())));
        }
        Ok(field.y_f64(l))
    };
    match *m {
        Measurement::Traces { k } => {
            for i in 1..=k {
                let mut x = 0.0;
                for l in (1..=i).filter(|l| i % l == 0) {
                    x += l as f64 * big(l)?;
                }
                row.push(x);
            }
        }
        Measurement::CycleCounts { l } => {
            for i in 1..=l {
                row.push(big(i)?);
            }
        }
        Measurement::SecularCoefficients { k } => {
            let c = secular_limit_coefficients(field, k)?;
            row.extend((0..=k).map(|i| c.c_f64(i)));
        }
        Measurement::UnitRootMultiplicities => {
            let z = sample_Zd(field)?;
            row.extend([z.multiplicity(RootLabel { l: 1, j: 0 }) as f64, 1.0, 1.0]);
        }
        other => return param(format!("{other:?} is not defined on a limit field")),
    }
    Ok(())
}

/// Runs every trial of `plan`, recording `measurements` in order.
pub fn run_trials(plan: &TrialPlan, measurements: &[Measurement]) -> Result<TrialTable> {
    if plan.trials == 0 {
        return param("a plan needs at least one trial");
    }
    if measurements.is_empty() {
        return param("no measurements requested");
    }
    let sampler = match &plan.source {
        Source::LimitField { d, length } => Some(FieldSampler::new(*d, FIELD_TAIL_EPS, *length)?),
        Source::Digraph { n, degree } => {
            let d = degree.at(*n);
            if !(d >= 0.0 && d <= *n as f64) {
                return param(format!("degree rule gives d = {d} at n = {n}"));
            }
            None
        }
    };
    let one = |t: usize| -> Result<Vec<f64>> {
        let seed = derive_seed(plan.master_seed, t as u64);
        let mut trial = match (&plan.source, &sampler) {
            (Source::Digraph { n, degree }, _) => {
                let d = degree.at(*n);
                Trial { graph: Some(sample_digraph(*n, d, seed)?), field: None, spectrum: None, degree: d }
            }
            (Source::LimitField { d, .. }, Some(s)) => {
                Trial { graph: None, field: Some(s.sample(seed)), spectrum: None, degree: *d }
            }
            (Source::LimitField { .. }, None) => unreachable!("sampler built above"),
        };
        let mut row = Vec::new();
        for m in measurements {
            trial.measure(m, &mut row)?;
        }
        Ok(row)
    };
    let results: Vec<Result<Vec<f64>>> = (0..plan.trials).into_par_iter().map(one).collect();
    let mut rows = Vec::with_capacity(plan.trials);
    let mut indices = Vec::new();
    let mut first = None;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                indices.push(t);
                first.get_or_insert(e);
            }
        }
    }
    if let Some(first) = first {
        return Err(Error::Trials { total: plan.trials, indices, first: Box::new(first) });
    }
    Ok(TrialTable {
        experiment: plan.experiment.clone(),
        columns: measurements.iter().flat_map(Measurement::columns).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(source: Source, trials: usize) -> TrialPlan {
        TrialPlan { experiment: "test".into(), source, trials, master_seed: 5, output: None }
    }

    #[test]
    fn empty_graphs_are_nilpotent() {
        let p = plan(Source::Digraph { n: 50, degree: DegreeRule::Constant { d: 0.0 } }, 100);
        let t = run_trials(&p, &[Measurement::Nilpotent, Measurement::Traces { k: 2 }]).unwrap();
        assert_eq!(t.columns, ["nilpotent", "tr1", "tr2"]);
        assert!(t.rows.iter().all(|r| r == &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn tables_are_reproducible() {
        let p = plan(Source::Digraph { n: 60, degree: DegreeRule::Constant { d: 1.5 } }, 40);
        let m = [Measurement::Traces { k: 3 }, Measurement::Lambda1, Measurement::UnitRootMultiplicities];
        let a = run_trials(&p, &m).unwrap();
        let b = run_trials(&p, &m).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn field_traces_match_divisor_sums() {
        let p = plan(Source::LimitField { d: 2.0, length: Some(6) }, 20);
        let t = run_trials(&p, &[Measurement::CycleCounts { l: 6 }, Measurement::Traces { k: 6 }]).unwrap();
        for r in &t.rows {
            assert_eq!(r[6 + 5], r[0] + 2.0 * r[1] + 3.0 * r[2] + 6.0 * r[5]);
        }
        assert!(run_trials(&p, &[Measurement::Lambda1]).is_err());
    }

    #[test]
    fn probability_of_no_cycles_of_length_one_or_two() {
        // P(X_2 = 0) → exp(−d − d²/2)
        let d: f64 = 0.8;
        let p = plan(Source::LimitField { d, length: None }, 100_000);
        let t = run_trials(&p, &[Measurement::Traces { k: 2 }]).unwrap();
        let zero: Vec<f64> = t.column("tr2").unwrap().iter().map(|&x| if x == 0.0 { 1.0 } else { 0.0 }).collect();
        let r = mean_check("p0", &zero, (-d - d * d / 2.0).exp(), 3.0);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn failures_are_aggregated_with_indices() {
        let p = plan(Source::LimitField { d: 2.0, length: Some(3) }, 4);
        match run_trials(&p, &[Measurement::CycleCounts { l: 5 }]) {
            Err(Error::Trials { total: 4, indices, .. }) => assert_eq!(indices, [0, 1, 2, 3]),
            other => panic!("{other:?}"),
        }
    }
}

use super::stats::{
    compare_distributions, mean, mean_check, two_sample_mean_check, variance_check, Reference, StatReport, Statistic,
    Threshold,
};
use super::{pmf_X, poisson_pmf, run_trials, DegreeRule, Measurement, Source, TrialPlan, TrialTable};
use crate::error::{Error, Result};
use crate::moments::{moment_targets, MomentTarget};
use crate::rng::derive_seed;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::str::FromStr;

pub const DEFAULT_MASTER_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    TracePoisson,
    Nilpotency,
    EigSparse,
    PhiN,
    SecularMc,
    CycleFactorial,
    TraceGaussian,
    EigGaussian,
}

impl PresetName {
    pub const ALL: [PresetName; 8] = [
        PresetName::TracePoisson,
        PresetName::Nilpotency,
        PresetName::EigSparse,
        PresetName::PhiN,
        PresetName::SecularMc,
        PresetName::CycleFactorial,
        PresetName::TraceGaussian,
        PresetName::EigGaussian,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::TracePoisson => "trace_poisson",
            PresetName::Nilpotency => "nilpotency",
            PresetName::EigSparse => "eig_sparse",
            PresetName::PhiN => "phi_n",
            PresetName::SecularMc => "secular_mc",
            PresetName::CycleFactorial => "cycle_factorial",
            PresetName::TraceGaussian => "trace_gaussian",
            PresetName::EigGaussian => "eig_gaussian",
        }
    }
}

impl FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown preset {s:?}")))
    }
}

/// A trial plan with its measurements, plus the limit-field sample its
/// targets are drawn from when no closed form is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: PresetName,
    pub plan: TrialPlan,
    pub measurements: Vec<Measurement>,
    pub reference: Option<(TrialPlan, Vec<Measurement>)>,
}

impl Preset {
    /// Reseeds the plan and its reference sample.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.plan.master_seed = seed;
        if let Some((r, _)) = &mut self.reference {
            r.master_seed = reference_seed(seed);
        }
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.plan.trials = trials;
        self
    }

    /// Graph size of a digraph plan.
    pub fn with_n(mut self, n_new: usize) -> Self {
        if let Source::Digraph { n, .. } = &mut self.plan.source {
            *n = n_new;
        }
        self
    }

    /// Mean degree of the plan and of its reference fields.
    pub fn with_d(mut self, d_new: f64) -> Self {
        let set = |s: &mut Source| match s {
            Source::Digraph { degree, .. } => *degree = DegreeRule::Constant { d: d_new },
            Source::LimitField { d, .. } => *d = d_new,
        };
        set(&mut self.plan.source);
        if let Some((r, _)) = &mut self.reference {
            set(&mut r.source);
        }
        self
    }
}

fn reference_seed(master: u64) -> u64 {
    derive_seed(master, u64::MAX)
}

fn digraph(name: PresetName, n: usize, d: f64, trials: usize) -> TrialPlan {
    TrialPlan {
        experiment: name.as_str().into(),
        source: Source::Digraph { n, degree: DegreeRule::Constant { d } },
        trials,
        master_seed: DEFAULT_MASTER_SEED,
        output: None,
    }
}

fn fields(name: PresetName, d: f64, length: Option<usize>, trials: usize, seed: u64) -> TrialPlan {
    TrialPlan {
        experiment: format!("{}_reference", name.as_str()),
        source: Source::LimitField { d, length },
        trials,
        master_seed: seed,
        output: None,
    }
}

/// Default configuration of a named experiment.
pub fn experiment_presets(name: &str) -> Result<Preset> {
    use Measurement::*;
    let name: PresetName = name.parse()?;
    let seed = reference_seed(DEFAULT_MASTER_SEED);
    let (plan, measurements, reference) = match name {
        PresetName::TracePoisson => (
            digraph(name, 1000, 0.7, 10_000),
            vec![Traces { k: 3 }],
            Some((fields(name, 0.7, None, 100_000, seed), vec![Traces { k: 3 }])),
        ),
        PresetName::Nilpotency => (digraph(name, 1000, 0.5, 2000), vec![Nilpotent], None),
        PresetName::EigSparse => (digraph(name, 2000, 2.0, 20), vec![Lambda1, Lambda2Modulus], None),
        PresetName::PhiN => (
            digraph(name, 1000, 0.5, 2000),
            vec![UnitRootMultiplicities],
            Some((fields(name, 0.5, None, 100_000, seed), vec![UnitRootMultiplicities])),
        ),
        PresetName::SecularMc => {
            let mut plan = fields(name, 1.5, Some(4), 1_000_000, DEFAULT_MASTER_SEED);
            plan.experiment = name.as_str().into();
            (plan, vec![SecularCoefficients { k: 4 }], None)
        }
        PresetName::CycleFactorial => (digraph(name, 2000, 1.2, 10_000), vec![CycleCounts { l: 2 }], None),
        PresetName::TraceGaussian => (digraph(name, 10_000, 30.0, 2000), vec![StandardizedTraces { k: 2 }], None),
        PresetName::EigGaussian => (digraph(name, 4000, 50.0, 10), vec![Lambda1, Lambda2Modulus], None),
    };
    Ok(Preset { name, plan, measurements, reference })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetRun {
    pub name: PresetName,
    pub reports: Vec<StatReport>,
    pub pass: bool,
}

impl PresetRun {
    pub fn report(&self, name: &str) -> Option<&StatReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn to_json_lines(&self) -> String {
        self.reports.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

fn plan_degree(plan: &TrialPlan) -> (usize, f64) {
    match plan.source {
        Source::Digraph { n, degree } => (n, degree.at(n)),
        Source::LimitField { d, length } => (length.unwrap_or(0), d),
    }
}

fn count_report(name: &str, hits: usize, trials: usize, fraction: f64) -> StatReport {
    let min = (fraction * trials as f64).ceil();
    StatReport::new(name, Statistic::Count, hits as f64, min, None, trials, Threshold::AtLeast { min })
}

/// Runs a preset and evaluates its targets. The run passes when every report does.
pub fn run_preset(preset: &Preset) -> Result<PresetRun> {
    let table = run_trials(&preset.plan, &preset.measurements)?;
    let reference: Option<TrialTable> = match &preset.reference {
        Some((plan, m)) => Some(run_trials(plan, m)?),
        None => None,
    };
    let (n, d) = plan_degree(&preset.plan);
    let mut reports = Vec::new();
    match preset.name {
        PresetName::TracePoisson => {
            let reference = reference.as_ref().expect("reference sample");
            let t: Vec<Vec<f64>> = (1..=3).map(|k| table.column(&format!("tr{k}"))).collect::<Result<_>>()?;
            reports.push(compare_distributions(
                "tv_tr1_poisson",
                &table.distribution("tr1")?,
                Reference::Pmf(&poisson_pmf(d, 60)),
                0.02,
            )?);
            for k in [2usize, 3] {
                let limit = 0.03;
                reports.push(compare_distributions(
                    &format!("tv_tr{k}_pmf_x"),
                    &table.distribution(&format!("tr{k}"))?,
                    Reference::Pmf(&pmf_X(d, k, 40 * k)?.probabilities),
                    limit,
                )?);
            }
            let product: Vec<f64> = t[0].iter().zip(&t[1]).map(|(a, b)| a * b).collect();
            let x1 = reference.column("tr1")?;
            let x2 = reference.column("tr2")?;
            let limit_product: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
            reports.push(two_sample_mean_check("mean_tr1_tr2_vs_limit", &product, &limit_product, 3.0));
            // Cov(X_i, X_j) = Σ_{ℓ | i, ℓ | j} ℓ d^ℓ
            for (i, j) in [(1usize, 2usize), (1, 3), (2, 3)] {
                let target: f64 = (1..=i.min(j)).filter(|l| i % l == 0 && j % l == 0).map(|l| l as f64 * d.powi(l as i32)).sum();
                let (mi, mj) = (mean(&t[i - 1]), mean(&t[j - 1]));
                let centred: Vec<f64> = t[i - 1].iter().zip(&t[j - 1]).map(|(a, b)| (a - mi) * (b - mj)).collect();
                reports.push(mean_check(&format!("cov_tr{i}_tr{j}"), &centred, target, 3.0));
            }
        }
        PresetName::Nilpotency => {
            let flags = table.column("nilpotent")?;
            let frac = mean(&flags);
            let se = (frac * (1.0 - frac) / flags.len() as f64).sqrt();
            reports.push(StatReport::new(
                "nilpotent_fraction",
                Statistic::Fraction,
                frac,
                (1.0 - d).max(0.0),
                Some(se),
                flags.len(),
                Threshold::Interval { lo: 1.0 - d - 0.03, hi: 1.0 - d + 0.03 },
            ));
        }
        PresetName::EigSparse | PresetName::EigGaussian => {
            let re = table.column("lambda1_re")?;
            let im = table.column("lambda1_im")?;
            let abs1 = table.column("lambda1_abs")?;
            let abs2 = table.column("lambda2_abs")?;
            let trials = abs2.len();
            let sqrt_d = d.sqrt();
            if preset.name == PresetName::EigGaussian {
                let hits = abs2.iter().filter(|&&a| (a / sqrt_d - 1.0).abs() < 0.1).count();
                reports.push(count_report("lambda2_near_sqrt_d", hits, trials, 0.8));
                reports.push(StatReport::new(
                    "mean_lambda1_over_d",
                    Statistic::Mean,
                    mean(&abs1) / d,
                    1.0,
                    None,
                    trials,
                    Threshold::Informational,
                ));
            } else if d > 1.0 {
                let hits1 = re.iter().zip(&im).filter(|(r, i)| ((*r - d).powi(2) + i.powi(2)).sqrt() < 0.15).count();
                reports.push(count_report("lambda1_near_d", hits1, trials, 0.9));
                let hits2 = abs2.iter().filter(|&&a| a < sqrt_d + 0.1).count();
                reports.push(count_report("lambda2_below_sqrt_d", hits2, trials, 0.9));
            } else {
                // No limit law is known here; record the moduli only.
                for (name, x) in [("mean_lambda1_abs", &abs1), ("mean_lambda2_abs", &abs2)] {
                    reports.push(StatReport::new(name, Statistic::Mean, mean(x), 0.0, None, trials, Threshold::Informational));
                }
            }
        }
        PresetName::PhiN => {
            let reference = reference.as_ref().expect("reference sample");
            reports.push(compare_distributions(
                "tv_mult_one_limit",
                &table.distribution("mult_one")?,
                Reference::Empirical(&reference.distribution("mult_one")?),
                0.05,
            )?);
            let only = table.column("only_cycles")?;
            let labelled = table.column("all_labelled")?;
            let cycles_only = only.iter().filter(|&&x| x == 1.0).count();
            let ok = only.iter().zip(&labelled).filter(|(&o, &l)| o == 1.0 && l == 1.0).count();
            let frac = if cycles_only == 0 { 1.0 } else { ok as f64 / cycles_only as f64 };
            reports.push(StatReport::new(
                "labelled_when_cycles_only",
                Statistic::Fraction,
                frac,
                1.0,
                None,
                cycles_only,
                Threshold::AtLeast { min: 1.0 },
            ));
        }
        PresetName::SecularMc => {
            let c: Vec<Vec<f64>> = (0..=4).map(|k| table.column(&format!("c{k}"))).collect::<Result<_>>()?;
            reports.push(mean_check("mean_c1", &c[1], -d, 3.0));
            reports.push(mean_check("mean_c2", &c[2], 0.0, 3.0));
            reports.push(mean_check("mean_c3", &c[3], 0.0, 3.0));
            for k in 1..=4 {
                let sq: Vec<f64> = c[k].iter().map(|x| x * x).collect();
                reports.push(mean_check(&format!("mean_c{k}_sq"), &sq, d.powi(k as i32) + d.powi(k as i32 + 1), 3.0));
            }
        }
        PresetName::CycleFactorial => {
            let s1 = table.column("s1")?;
            let s2 = table.column("s2")?;
            let exact = |lengths: Vec<usize>, powers: Vec<usize>| -> Result<f64> {
                let d = BigRational::from_float(d).ok_or_else(|| Error::Parameter("d must be finite".into()))?;
                Ok(moment_targets(&MomentTarget::LoopsoupExact { n, d, lengths, powers })?.to_f64())
            };
            let falling = |x: &[f64]| -> Vec<f64> { x.iter().map(|s| s * (s - 1.0)).collect() };
            let target22 = exact(vec![2], vec![2])?;
            reports.push(mean_check("factorial_s2_2_vs_exact", &falling(&s2), target22, 3.0));
            let limit = (d * d / 2.0).powi(2);
            reports.push(StatReport::new(
                "exact_s2_2_vs_limit",
                Statistic::RelativeError,
                (target22 / limit - 1.0).abs(),
                0.0,
                None,
                0,
                Threshold::Below { limit: 0.02 },
            ));
            reports.push(mean_check("factorial_s1_2_vs_exact", &falling(&s1), exact(vec![1], vec![2])?, 3.0));
            let mixed: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a * b).collect();
            reports.push(mean_check("product_s1_s2_vs_exact", &mixed, exact(vec![1, 2], vec![1, 1])?, 3.0));
        }
        PresetName::TraceGaussian => {
            let a1 = table.column("alpha1")?;
            let a2 = table.column("alpha2")?;
            let normal = Normal::standard();
            let cdf = |x: f64| normal.cdf(x);
            reports.push(compare_distributions("ks_alpha1_normal", &table.distribution("alpha1")?, Reference::Cdf(&cdf), 0.04)?);
            reports.push(mean_check("mean_alpha2", &a2, 1.0, 3.0));
            reports.push(variance_check("variance_alpha2", &a2, 2.0, 3.0));
            reports.push(mean_check("mean_alpha1", &a1, 0.0, 3.0));
            reports.push(variance_check("variance_alpha1", &a1, 1.0, 3.0));
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    let run = PresetRun { name: preset.name, reports, pass };
    if let Some(path) = &preset.plan.output {
        std::fs::write(path, run.to_json_lines()).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
    }
    Ok(run)
}

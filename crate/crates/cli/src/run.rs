//! Fully resolved run records. Each one is what a subcommand's flags or
//! config file resolve to, is stored verbatim in the manifest, and is all
//! that [`Run::execute`] needs.

use std::path::PathBuf;

use mixrad::bregman::{finite_diff_check, mixup_smoothing, SMOOTHING_CSV_HEADER};
use mixrad::complexity::{
    exact_rademacher_linear, generalization_gap_report, linear_mixup_upper_bound, linear_reduction_bound,
    linear_upper_bound, mc_rademacher_linear, nn_mixup_upper_bound, nn_reduction_bound, nn_upper_bound,
    write_reports_csv, BoundKind, Center, Components, GapVariant,
};
use mixrad::data::read_features_csv;
use mixrad::harness::{
    gap_vs_alpha, gen_gaussian, sweep_fig1, sweep_fig2, write_csv, BlobSpec, Fig1Grid, Fig2Grid, ModelSpec,
    TrainConfig,
};
use mixrad::seed::derive_seed;
use mixrad::{
    BoundReport, DataMatrix, Error, ExpFamily, FamilyKind, LinearClass, MixWeight, NetworkClass, Result,
};
use serde::{Deserialize, Serialize};

pub const RESULTS: &str = "results.csv";

/// What a run produced. `failures` counts jobs that diverged but were
/// recorded rather than aborting the run.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failures: usize,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self { artifacts, failures: 0 }
    }
}

/// One output file: name relative to the output directory, and its bytes.
#[derive(Debug)]
pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

fn csv_artifact(name: &'static str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Artifact> {
    let mut bytes = Vec::new();
    write(&mut bytes)?;
    Ok(Artifact { name, bytes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    File { path: PathBuf },
    Gaussian { n: usize, d: usize, sigma2: f64 },
}

impl DataSource {
    fn load(&self, seed: Option<u64>) -> Result<DataMatrix> {
        match self {
            Self::File { path } => read_features_csv(path),
            Self::Gaussian { n, d, sigma2 } => {
                let seed = seed.ok_or_else(|| Error::InvalidInput("generated data needs --seed".into()))?;
                gen_gaussian(*n, *d, *sigma2, derive_seed(seed, DATA_TAG))
            }
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::Gaussian { .. })
    }
}

const DATA_TAG: u64 = 1;
const MC_TAG: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRun {
    pub data: DataSource,
    pub cap_lambda: f64,
    pub lam: Option<f64>,
    pub draws: Option<usize>,
    pub exact: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterSpec {
    SampleMean,
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnRun {
    pub data: DataSource,
    pub depth: u32,
    pub frob: f64,
    pub lam: Option<f64>,
    pub center: CenterSpec,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapRun {
    pub rad: f64,
    pub n: usize,
    pub delta: f64,
    pub variant: GapVariant,
}

fn default_cap_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Run {
    pub grid: Fig1Grid,
    #[serde(default = "default_cap_lambda")]
    pub cap_lambda: f64,
    pub lam: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Run {
    pub grid: Fig2Grid,
    pub depth: u32,
    pub frob: f64,
    pub lam: f64,
    pub seed: u64,
}

fn default_n_seeds() -> u64 {
    10
}
fn default_model() -> ModelSpec {
    TrainConfig::standard(0).model
}
fn default_epochs() -> usize {
    TrainConfig::standard(0).epochs
}
fn default_learning_rate() -> f64 {
    TrainConfig::standard(0).learning_rate
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapAlphaRun {
    #[serde(default)]
    pub data: BlobSpec,
    pub alphas: Vec<f64>,
    /// Seeds `seed, seed + 1, ..., seed + n_seeds - 1`.
    #[serde(default = "default_n_seeds")]
    pub n_seeds: u64,
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BregmanRun {
    pub family: FamilyKind,
    pub theta: f64,
    pub lam: f64,
    pub draws: usize,
    pub seed: u64,
    pub h: f64,
}

/// Every runnable command; the serde tag doubles as the manifest's `command`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "resolved_config")]
pub enum Run {
    #[serde(rename = "radbound linear")]
    Linear(LinearRun),
    #[serde(rename = "radbound nn")]
    Nn(NnRun),
    #[serde(rename = "radbound gap")]
    Gap(GapRun),
    #[serde(rename = "sweep fig1")]
    Fig1(Fig1Run),
    #[serde(rename = "sweep fig2")]
    Fig2(Fig2Run),
    #[serde(rename = "sweep gap-alpha")]
    GapAlpha(GapAlphaRun),
    #[serde(rename = "bregman")]
    Bregman(BregmanRun),
}

impl Run {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Linear(r) => r.seed,
            Self::Nn(r) => r.seed,
            Self::Gap(_) => None,
            Self::Fig1(r) => Some(r.seed),
            Self::Fig2(r) => Some(r.seed),
            Self::GapAlpha(r) => Some(r.seed),
            Self::Bregman(r) => Some(r.seed),
        }
    }

    /// Rejects runs that would need randomness without a seed.
    pub fn check_seed(&self) -> Result<()> {
        let needs = match self {
            Self::Linear(r) => r.data.is_random() || r.draws.is_some(),
            Self::Nn(r) => r.data.is_random(),
            _ => false,
        };
        if needs && self.seed().is_none() {
            return Err(Error::InvalidInput("this run draws random numbers; pass --seed explicitly".into()));
        }
        Ok(())
    }

    /// Computes the run's artifacts; the first one is `results.csv`.
    pub fn execute(&self) -> Result<Outcome> {
        self.check_seed()?;
        let artifacts = match self {
            Self::Linear(r) => r.execute(),
            Self::Nn(r) => r.execute(),
            Self::Gap(r) => {
                let report = generalization_gap_report(r.rad, r.n, r.delta, r.variant)?;
                Ok(vec![reports_artifact(&[report])?])
            }
            Self::Fig1(r) => {
                let rows =
                    sweep_fig1(&r.grid, &LinearClass::new(r.cap_lambda)?, MixWeight::new(r.lam)?, r.seed)?;
                Ok(vec![csv_artifact(RESULTS, |w| write_csv(w, &rows))?])
            }
            Self::Fig2(r) => {
                let cls = NetworkClass::new(r.depth, r.frob)?;
                let rows = sweep_fig2(&r.grid, &cls, MixWeight::new(r.lam)?, r.seed)?;
                Ok(vec![csv_artifact(RESULTS, |w| write_csv(w, &rows))?])
            }
            Self::GapAlpha(r) => return r.execute(),
            Self::Bregman(r) => r.execute(),
        };
        artifacts.map(Outcome::from)
    }
}

fn reports_artifact(reports: &[BoundReport]) -> Result<Artifact> {
    csv_artifact(RESULTS, |w| write_reports_csv(w, reports))
}

impl LinearRun {
    fn execute(&self) -> Result<Vec<Artifact>> {
        let data = self.data.load(self.seed)?;
        let cls = LinearClass::new(self.cap_lambda)?;
        let mut reports = vec![linear_upper_bound(&data, &cls)];
        if let Some(lam) = self.lam {
            let lam = MixWeight::new(lam)?;
            reports.push(linear_mixup_upper_bound(&data, &cls, lam));
            reports.push(linear_reduction_bound(&data, &cls, lam));
        }
        if let Some(draws) = self.draws {
            let seed = derive_seed(self.seed.unwrap_or_default(), MC_TAG);
            let est = mc_rademacher_linear(&data, &cls, draws, seed)?;
            reports.push(est.to_report(data.rows(), data.cols(), &cls));
        }
        if self.exact {
            let value = exact_rademacher_linear(&data, &cls)?;
            reports.push(BoundReport {
                bound: BoundKind::RademacherExact,
                components: Components {
                    n: Some(data.rows()),
                    d: Some(data.cols()),
                    cap_lambda: Some(cls.cap_lambda()),
                    ..Default::default()
                },
                value,
            });
        }
        Ok(vec![reports_artifact(&reports)?])
    }
}

impl NnRun {
    fn execute(&self) -> Result<Vec<Artifact>> {
        let data = self.data.load(self.seed)?;
        let cls = NetworkClass::new(self.depth, self.frob)?;
        let mut reports = vec![nn_upper_bound(&data, &cls)];
        if let Some(lam) = self.lam {
            let lam = MixWeight::new(lam)?;
            let center = match &self.center {
                CenterSpec::SampleMean => Center::SampleMean,
                CenterSpec::Given(c) => Center::Given(c.clone()),
            };
            reports.push(nn_mixup_upper_bound(&data, &cls, lam));
            reports.push(nn_reduction_bound(&data, &cls, lam, &center)?);
        }
        Ok(vec![reports_artifact(&reports)?])
    }
}

impl GapAlphaRun {
    fn execute(&self) -> Result<Outcome> {
        let seeds: Vec<u64> = (0..self.n_seeds).map(|k| self.seed.wrapping_add(k)).collect();
        let cfg = TrainConfig {
            model: self.model,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            mixup: None,
            seed: self.seed,
        };
        let sweep = gap_vs_alpha(&self.data, &self.alphas, &seeds, &cfg)?;
        for f in &sweep.failures {
            eprintln!("warning: alpha {} seed {} failed: {}", f.alpha, f.seed_id, f.message);
        }
        Ok(Outcome {
            artifacts: vec![
                csv_artifact(RESULTS, |w| write_csv(w, &sweep.rows))?,
                csv_artifact("summary.csv", |w| write_csv(w, &sweep.summary))?,
            ],
            failures: sweep.failures.len(),
        })
    }
}

impl BregmanRun {
    fn execute(&self) -> Result<Vec<Artifact>> {
        let fam = ExpFamily::new(self.family, self.theta)?;
        let report = mixup_smoothing(&fam, MixWeight::new(self.lam)?, self.draws, self.seed)?;
        let fd = finite_diff_check(&fam, self.h)?;
        csv_artifact(RESULTS, |w| {
            let mut out = csv::Writer::from_writer(w);
            let mut header: Vec<&str> = SMOOTHING_CSV_HEADER.to_vec();
            header.extend(["fd_h", "fd_grad_err", "fd_hess_err"]);
            out.write_record(header)?;
            let mut rec = report.csv_record();
            rec.extend([self.h.to_string(), fd.grad_err.to_string(), fd.hess_err.to_string()]);
            out.write_record(rec)?;
            out.flush()?;
            Ok(())
        })
        .map(|a| vec![a])
    }
}

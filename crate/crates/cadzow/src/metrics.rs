//! Error metrics, trace analysis and the multi-trial experiment runner.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::make_plan;
use crate::seismic::{process_volume, SeismicOptions};
use crate::signals::{
    add_noise, gen_dirac_fourier, gen_linear_events, gen_spectral, sample_mask, DiracParams,
    SampleMask,
};
use crate::solvers::{run, SolverOptions, SolverRun, Variant};
use crate::tensor::ComplexTensor;

/// Relative Euclidean error `||z - x|| / ||x||` (the literature calls this
/// MSE even though it is neither squared nor a mean).
pub fn mse(z: &ComplexTensor, x: &ComplexTensor) -> Result<f64> {
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(Error::DegenerateSignal("reference signal is zero".into()));
    }
    Ok(z.distance(x)? / x_norm)
}

/// Entrywise relative error `|z_i - x_i| / |x_i|`; entries where `x_i = 0`
/// are undefined and flagged as `None`.
pub fn componentwise_mse(z: &ComplexTensor, x: &ComplexTensor) -> Result<Vec<Option<f64>>> {
    if z.dims() != x.dims() {
        return Err(Error::Shape(format!(
            "dims {:?} vs {:?}",
            z.dims(),
            x.dims()
        )));
    }
    Ok(z.data()
        .iter()
        .zip(x.data())
        .map(|(&zi, &xi)| {
            let m = xi.norm();
            if m == 0.0 {
                None
            } else {
                Some((zi - xi).norm() / m)
            }
        })
        .collect())
}

/// Mean of the defined entries; `None` when every entry is undefined.
pub fn componentwise_mean(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// True iff the traced MSE at the last iteration is strictly below the
/// MSE at the first iteration.
pub fn positive_test(run: &SolverRun) -> Result<bool> {
    let first = run
        .trace
        .first()
        .and_then(|r| r.mse)
        .ok_or_else(|| Error::InvalidArgument("trace carries no MSE values".into()))?;
    let last = run
        .trace
        .last()
        .and_then(|r| r.mse)
        .ok_or_else(|| Error::InvalidArgument("trace carries no MSE values".into()))?;
    Ok(last < first)
}

/// Which synthetic family a batch draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Spectrally sparse signals, denoised/recovered in the time domain.
    Spectral,
    /// Dirac streams, denoised in the Fourier domain (`dims = [B]`, B odd).
    DiracFourier,
    /// Linear-event volumes (`dims = [time, spatial...]`), processed per
    /// frequency slice.
    LinearEvents,
}

impl GeneratorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorKind::Spectral => "spectral",
            GeneratorKind::DiracFourier => "dirac",
            GeneratorKind::LinearEvents => "linear-events",
        }
    }
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "spectral" => Ok(GeneratorKind::Spectral),
            "dirac" | "dirac-fourier" => Ok(GeneratorKind::DiracFourier),
            "linear-events" => Ok(GeneratorKind::LinearEvents),
            other => Err(Error::InvalidArgument(format!("unknown generator `{other}`"))),
        }
    }
}

/// One batch: a generator, a noise/sampling regime, termination settings
/// and the variants to compare on identical instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub generator: GeneratorKind,
    pub dims: Vec<usize>,
    pub rank: usize,
    /// Relative noise level; 0 disables noise.
    pub eps: f64,
    /// Observed fraction; `None` means fully observed.
    pub fraction: Option<f64>,
    /// `None` runs exactly `max_iter` iterations.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub alpha: f64,
    pub variants: Vec<Variant>,
    pub trials: usize,
}

/// One row of a [`TrialTable`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRow {
    pub variant: Variant,
    pub dims: Vec<usize>,
    pub r: usize,
    pub eps: f64,
    pub fraction: Option<f64>,
    pub seed: u64,
    /// `None` for error rows.
    pub mse: Option<f64>,
    pub iterations: usize,
    pub wall_time_seconds: f64,
    /// Positive-test outcome when an MSE trace was available.
    pub positive: Option<bool>,
    /// Failure description for error rows.
    pub error: Option<String>,
}

/// Results of a batch, one row per (variant, instance).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrialTable {
    pub rows: Vec<TrialRow>,
}

impl TrialTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn variant_rows(&self, variant: Variant) -> impl Iterator<Item = &TrialRow> {
        self.rows.iter().filter(move |r| r.variant == variant)
    }

    /// Mean MSE over the successful rows of one variant.
    pub fn mean_mse(&self, variant: Variant) -> Option<f64> {
        mean(self.variant_rows(variant).filter_map(|r| r.mse))
    }

    pub fn mean_iterations(&self, variant: Variant) -> Option<f64> {
        mean(
            self.variant_rows(variant)
                .filter(|r| r.error.is_none())
                .map(|r| r.iterations as f64),
        )
    }

    pub fn mean_wall_time(&self, variant: Variant) -> Option<f64> {
        mean(
            self.variant_rows(variant)
                .filter(|r| r.error.is_none())
                .map(|r| r.wall_time_seconds),
        )
    }

    /// Fraction of rows passing the positive test, over rows that have one.
    pub fn positive_portion(&self, variant: Variant) -> Option<f64> {
        mean(
            self.variant_rows(variant)
                .filter_map(|r| r.positive)
                .map(|p| if p { 1.0 } else { 0.0 }),
        )
    }

    /// CSV with one header row; `dims` is `x`-separated; optional fields
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("variant,dims,r,eps,fraction,seed,mse,iterations,wall_time_seconds\n");
        for row in &self.rows {
            let dims = row
                .dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x");
            let fraction = row.fraction.map(|f| f.to_string()).unwrap_or_default();
            let mse = row.mse.map(|m| format!("{m:.16e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.6}",
                row.variant, dims, row.r, row.eps, fraction, row.seed, mse, row.iterations,
                row.wall_time_seconds
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trial rows serialize")
    }
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = it.collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Derives the per-trial seed from the master seed. Trials are streamed
/// off one ChaCha key so any subset is reproducible in isolation.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial + 1);
    rng
}

struct TrialOutcome {
    mse: Option<f64>,
    iterations: usize,
    wall_time_seconds: f64,
    positive: Option<bool>,
    error: Option<String>,
}

/// Runs every (variant, instance) pair of the batch.
///
/// Deterministic given the config and master seed (wall times aside):
/// instance `t` is drawn from stream `t+1` of a ChaCha key, and every
/// variant sees the identical instance. Failures become error rows instead
/// of aborting the batch. `jobs > 1` distributes trials over that many
/// threads; rows are assembled in trial order regardless of completion
/// order.
pub fn run_trials(config: &ExperimentConfig, master_seed: u64, jobs: usize) -> Result<TrialTable> {
    if config.variants.is_empty() {
        return Err(Error::InvalidArgument("no variants selected".into()));
    }
    if config.dims.is_empty() {
        return Err(Error::Shape("empty dims".into()));
    }
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    let jobs = jobs.max(1).min(config.trials.max(1));

    let run_one = |trial: u64| -> Vec<TrialOutcome> {
        match run_single_trial(config, master_seed, trial) {
            Ok(outcomes) => outcomes,
            Err(e) => config
                .variants
                .iter()
                .map(|_| TrialOutcome {
                    mse: None,
                    iterations: 0,
                    wall_time_seconds: 0.0,
                    positive: None,
                    error: Some(e.to_string()),
                })
                .collect(),
        }
    };

    let per_trial: Vec<Vec<TrialOutcome>> = if jobs <= 1 {
        trials.iter().map(|&t| run_one(t)).collect()
    } else {
        std::thread::scope(|scope| {
            let chunks: Vec<Vec<u64>> = (0..jobs)
                .map(|j| trials.iter().copied().skip(j).step_by(jobs).collect())
                .collect();
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .into_iter()
                            .map(|t| (t, run_one(t)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            let mut collected: Vec<(u64, Vec<TrialOutcome>)> = handles
                .into_iter()
                .flat_map(|h| h.join().expect("trial worker panicked"))
                .collect();
            collected.sort_by_key(|(t, _)| *t);
            collected.into_iter().map(|(_, o)| o).collect()
        })
    };

    let mut table = TrialTable::default();
    for (trial, outcomes) in per_trial.into_iter().enumerate() {
        for (variant, outcome) in config.variants.iter().zip(outcomes) {
            table.rows.push(TrialRow {
                variant: *variant,
                dims: config.dims.clone(),
                r: config.rank,
                eps: config.eps,
                fraction: config.fraction,
                seed: trial as u64,
                mse: outcome.mse,
                iterations: outcome.iterations,
                wall_time_seconds: outcome.wall_time_seconds,
                positive: outcome.positive,
                error: outcome.error,
            });
        }
    }
    Ok(table)
}

/// Draws one instance and runs every variant on it.
fn run_single_trial(
    config: &ExperimentConfig,
    master_seed: u64,
    trial: u64,
) -> Result<Vec<TrialOutcome>> {
    let mut rng = trial_rng(master_seed, trial);
    let (truth, observed, mask) = draw_instance(config, &mut rng)?;

    let outcomes = config
        .variants
        .iter()
        .map(|&variant| {
            let result = if config.generator == GeneratorKind::LinearEvents {
                run_seismic_trial(config, variant, &truth, &observed, mask.as_ref())
            } else {
                run_solver_trial(config, variant, &truth, &observed, mask.as_ref())
            };
            match result {
                Ok(o) => o,
                Err(e) => TrialOutcome {
                    mse: None,
                    iterations: 0,
                    wall_time_seconds: 0.0,
                    positive: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(outcomes)
}

fn draw_instance(
    config: &ExperimentConfig,
    rng: &mut impl Rng,
) -> Result<(ComplexTensor, ComplexTensor, Option<SampleMask>)> {
    let truth = match config.generator {
        GeneratorKind::Spectral => gen_spectral(&config.dims, config.rank, rng)?.0,
        GeneratorKind::DiracFourier => {
            if config.dims.len() != 1 {
                return Err(Error::Shape(format!(
                    "dirac batches are 1D, got dims {:?}",
                    config.dims
                )));
            }
            let params = DiracParams::sample(config.rank, config.dims[0], rng)?;
            gen_dirac_fourier(&params)?.0
        }
        GeneratorKind::LinearEvents => {
            if config.dims.len() < 2 {
                return Err(Error::Shape(format!(
                    "linear-event batches need [time, spatial...], got dims {:?}",
                    config.dims
                )));
            }
            gen_linear_events(&config.dims[1..], config.dims[0], config.rank, rng)?.0
        }
    };
    let noisy = if config.eps > 0.0 {
        add_noise(&truth, config.eps, rng)?
    } else {
        truth.clone()
    };
    let mask = match config.fraction {
        None => None,
        Some(fraction) => {
            // For event volumes the mask lives on the spatial grid: a
            // missing trace is missing for all time samples.
            let mask_dims = if config.generator == GeneratorKind::LinearEvents {
                &config.dims[1..]
            } else {
                &config.dims[..]
            };
            Some(sample_mask(mask_dims, fraction, rng)?)
        }
    };
    let observed = match (&mask, config.generator) {
        (None, _) => noisy,
        (Some(m), GeneratorKind::LinearEvents) => {
            let spatial_total: usize = config.dims[1..].iter().product();
            let mut out = noisy;
            for n in 0..spatial_total {
                if !m.is_observed(n) {
                    for t in 0..config.dims[0] {
                        out.data_mut()[t * spatial_total + n] = Complex64::default();
                    }
                }
            }
            out
        }
        (Some(m), _) => m.project(&noisy)?,
    };
    Ok((truth, observed, mask))
}

fn run_solver_trial(
    config: &ExperimentConfig,
    variant: Variant,
    truth: &ComplexTensor,
    observed: &ComplexTensor,
    mask: Option<&SampleMask>,
) -> Result<TrialOutcome> {
    let plan = make_plan(&config.dims, None)?;
    let opts = SolverOptions::new(variant, config.rank)
        .with_tol(config.tol)
        .with_max_iter(config.max_iter)
        .with_alpha(config.alpha);
    let solver_run = run(observed, &plan, &opts, mask, Some(truth))?;
    Ok(TrialOutcome {
        mse: Some(mse(&solver_run.z, truth)?),
        iterations: solver_run.iterations,
        wall_time_seconds: solver_run.wall_time_seconds,
        positive: positive_test(&solver_run).ok(),
        error: None,
    })
}

fn run_seismic_trial(
    config: &ExperimentConfig,
    variant: Variant,
    truth: &ComplexTensor,
    observed: &ComplexTensor,
    mask: Option<&SampleMask>,
) -> Result<TrialOutcome> {
    let mut opts = SeismicOptions::new(variant, config.rank, config.max_iter);
    opts.alpha = config.alpha;
    if let Some(tol) = config.tol {
        opts.tol = tol;
    }
    let start = Instant::now();
    let z = process_volume(observed, &opts, mask)?;
    let wall = start.elapsed().as_secs_f64();
    Ok(TrialOutcome {
        mse: Some(mse(&z, truth)?),
        iterations: config.max_iter,
        wall_time_seconds: wall,
        positive: None,
        error: None,
    })
}

//! The four rank-reduction iterations and a run harness with convergence
//! tracing, masked recovery and optional ground-truth tracking.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{dehankelize_lowrank, hankelize_dense, HankelPlan};
use crate::lowrank::{projected_truncated_svd, tangent_components, truncated_svd, FactorTriple};
use crate::signals::SampleMask;
use crate::tensor::ComplexTensor;

/// Which of the four iterations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Alternating projections with a dense truncated SVD per step.
    Cadzow,
    /// Tangent-space-restricted truncation; never materializes the matrix.
    FastCadzow,
    /// Skew-diagonally re-weighted gradient step, dense SVD.
    Gradient,
    /// Re-weighted gradient step with the tangent-space truncation.
    FastGradient,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Cadzow,
        Variant::FastCadzow,
        Variant::Gradient,
        Variant::FastGradient,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Cadzow => "cadzow",
            Variant::FastCadzow => "fast_cadzow",
            Variant::Gradient => "gradient",
            Variant::FastGradient => "fast_gradient",
        }
    }

    pub fn is_gradient(&self) -> bool {
        matches!(self, Variant::Gradient | Variant::FastGradient)
    }

    pub fn is_fast(&self) -> bool {
        matches!(self, Variant::FastCadzow | Variant::FastGradient)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cadzow" => Ok(Variant::Cadzow),
            "fast_cadzow" => Ok(Variant::FastCadzow),
            "gradient" => Ok(Variant::Gradient),
            "fast_gradient" => Ok(Variant::FastGradient),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

/// Run configuration shared by all variants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub variant: Variant,
    pub rank: usize,
    /// Relative-change stopping tolerance; `None` runs exactly `max_iter`
    /// iterations.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Data-consistency weight for masked recovery; 1 pins observed
    /// entries exactly.
    pub alpha: f64,
}

impl SolverOptions {
    pub fn new(variant: Variant, rank: usize) -> Self {
        Self {
            variant,
            rank,
            tol: Some(1e-6),
            max_iter: 500,
            alpha: 0.8,
        }
    }

    pub fn with_tol(mut self, tol: Option<f64>) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn validate(&self, plan: &HankelPlan) -> Result<()> {
        let min_dim = plan.rows().min(plan.cols());
        if self.rank == 0 || self.rank >= min_dim {
            return Err(Error::Rank(format!(
                "rank {} for a {}x{} Hankel matrix",
                self.rank,
                plan.rows(),
                plan.cols()
            )));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance {t} not positive")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha {} not in (0, 1]",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Anchor for the tangent-space truncation.
pub enum Anchor {
    /// No usable anchor yet: take a full truncated SVD (one plain SSA step).
    Full,
    /// Reuse the factors of the previous iterate.
    Factors(FactorTriple),
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `||z_{k+1} - z_k|| / ||z_k||`.
    pub rel_change: f64,
    /// `||z - x|| / ||x||` against the ground truth, when given.
    pub mse: Option<f64>,
    /// Cumulative wall time at the end of this iteration.
    pub seconds: f64,
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub z: ComplexTensor,
    /// True when the tolerance was met (or the fixed iteration count
    /// completed); false when `max_iter` was exhausted under a tolerance.
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<IterRecord>,
    pub wall_time_seconds: f64,
}

/// One classical step: `z <- H_pinv T_r H z` with a dense truncated SVD.
pub fn cadzow_step(z: &ComplexTensor, plan: &HankelPlan, r: usize) -> Result<ComplexTensor> {
    let h = hankelize_dense(z, plan)?;
    let f = truncated_svd(h.as_ref(), r)?;
    dehankelize_lowrank(&f, plan)
}

/// One fast step: truncate within the tangent space at `anchor`, never
/// forming the Hankel matrix. Returns the new signal and the factors to
/// anchor the next step.
pub fn fast_cadzow_step(
    z: &ComplexTensor,
    plan: &HankelPlan,
    r: usize,
    anchor: &Anchor,
) -> Result<(ComplexTensor, FactorTriple)> {
    let f = match anchor {
        Anchor::Full => {
            let h = hankelize_dense(z, plan)?;
            truncated_svd(h.as_ref(), r)?
        }
        Anchor::Factors(prev) => {
            let tc = tangent_components(prev, z, plan)?;
            projected_truncated_svd(&tc, prev, r)?
        }
    };
    let out = dehankelize_lowrank(&f, plan)?;
    Ok((out, f))
}

/// Re-weighted residual correction: `z + (1/D) . (y - z)` with `D` the
/// skew-diagonal multiplicities. Undoes the implicit diagonal weighting of
/// the averaging pseudoinverse.
fn reweighted_input(z: &ComplexTensor, y: &ComplexTensor, plan: &HankelPlan) -> Result<ComplexTensor> {
    if z.dims() != y.dims() {
        return Err(Error::Shape(format!(
            "iterate dims {:?} vs data dims {:?}",
            z.dims(),
            y.dims()
        )));
    }
    let data = z
        .data()
        .iter()
        .zip(y.data())
        .zip(plan.weights())
        .map(|((&zi, &yi), &w)| zi + (yi - zi) / w as f64)
        .collect();
    ComplexTensor::new(z.dims().to_vec(), data)
}

/// One gradient step: the classical step applied to the re-weighted input.
pub fn gradient_step(
    z: &ComplexTensor,
    y: &ComplexTensor,
    plan: &HankelPlan,
    r: usize,
) -> Result<ComplexTensor> {
    cadzow_step(&reweighted_input(z, y, plan)?, plan, r)
}

/// One fast gradient step: the tangent-space step applied to the
/// re-weighted input.
pub fn fast_gradient_step(
    z: &ComplexTensor,
    y: &ComplexTensor,
    plan: &HankelPlan,
    r: usize,
    anchor: &Anchor,
) -> Result<(ComplexTensor, FactorTriple)> {
    fast_cadzow_step(&reweighted_input(z, y, plan)?, plan, r, anchor)
}

/// Blends the observed data back in: `u + alpha * P_Omega(y - u)`.
fn blend_mask(u: &mut ComplexTensor, y: &ComplexTensor, mask: &SampleMask, alpha: f64) {
    let yd = y.data();
    let ud = u.data_mut();
    for &i in mask.indices() {
        ud[i] += alpha * (yd[i] - ud[i]);
    }
}

/// Runs a full solve on data `y`.
///
/// Without a mask this is denoising: the iterate starts at `y` and each
/// step is one pass of the chosen variant. With a mask it is recovery: the
/// iterate starts at `P_Omega(y)` and observed entries are blended back
/// after each step with weight `alpha`. Gradient variants reject masks —
/// the re-weighting has no meaning for unobserved entries.
///
/// When `truth` is given every trace row carries the relative error
/// against it.
pub fn run(
    y: &ComplexTensor,
    plan: &HankelPlan,
    opts: &SolverOptions,
    mask: Option<&SampleMask>,
    truth: Option<&ComplexTensor>,
) -> Result<SolverRun> {
    opts.validate(plan)?;
    if y.dims() != plan.dims() {
        return Err(Error::Shape(format!(
            "data dims {:?} vs plan dims {:?}",
            y.dims(),
            plan.dims()
        )));
    }
    if !y.all_finite() {
        return Err(Error::Numerical("input contains non-finite entries".into()));
    }
    if opts.variant.is_gradient() && mask.is_some() {
        return Err(Error::UnsupportedCombination(
            "gradient variants do not support sampling masks".into(),
        ));
    }
    if let Some(x) = truth {
        if x.dims() != y.dims() {
            return Err(Error::Shape(format!(
                "truth dims {:?} vs data dims {:?}",
                x.dims(),
                y.dims()
            )));
        }
        if x.norm() == 0.0 {
            return Err(Error::DegenerateSignal("ground truth is zero".into()));
        }
    }

    let start = Instant::now();
    let mut z = match mask {
        Some(m) => m.project(y)?,
        None => y.clone(),
    };
    let mut anchor = Anchor::Full;
    let mut trace = Vec::new();
    let mut converged = opts.tol.is_none();

    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        let mut next = match opts.variant {
            Variant::Cadzow => cadzow_step(&z, plan, opts.rank)?,
            Variant::Gradient => gradient_step(&z, y, plan, opts.rank)?,
            Variant::FastCadzow => {
                let (out, f) = fast_cadzow_step(&z, plan, opts.rank, &anchor)?;
                anchor = Anchor::Factors(f);
                out
            }
            Variant::FastGradient => {
                let (out, f) = fast_gradient_step(&z, y, plan, opts.rank, &anchor)?;
                anchor = Anchor::Factors(f);
                out
            }
        };
        if let Some(m) = mask {
            blend_mask(&mut next, y, m, opts.alpha);
        }
        if !next.all_finite() {
            return Err(Error::Numerical(format!(
                "iterate became non-finite at iteration {k}"
            )));
        }
        let prev_norm = z.norm();
        let diff = next.distance(&z)?;
        let rel_change = if prev_norm > 0.0 { diff / prev_norm } else { diff };
        z = next;
        iterations = k;
        trace.push(IterRecord {
            iter: k,
            rel_change,
            mse: truth.map(|x| z.distance(x).unwrap() / x.norm()),
            seconds: start.elapsed().as_secs_f64(),
        });
        if let Some(tol) = opts.tol {
            if rel_change <= tol {
                converged = true;
                break;
            }
        }
    }

    Ok(SolverRun {
        z,
        converged,
        iterations,
        trace,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::{dehankelize, make_plan};
    use crate::lowrank::tangent_project_dense;
    use num_complex::Complex64;
    use crate::signals::{add_noise, gen_spectral, sample_mask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
        a.distance(b).unwrap() / b.norm().max(1e-300)
    }

    #[test]
    fn cadzow_step_fixed_point_on_rank2_signal() {
        // An arithmetic progression has Hankel rank 2, so one step is a no-op.
        let z = ComplexTensor::from_real(vec![5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let plan = make_plan(&[5], None).unwrap();
        let out = cadzow_step(&z, &plan, 2).unwrap();
        assert!(rel_err(&out, &z) < 1e-12);
    }

    #[test]
    fn all_variants_agree_on_first_iteration() {
        // At z = y the gradient correction vanishes and the Full anchor is a
        // plain SVD, so the four first iterates coincide.
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let (x, _) = gen_spectral(&[48], 3, &mut rng).unwrap();
        let y = add_noise(&x, 0.5, &mut rng).unwrap();
        let plan = make_plan(&[48], None).unwrap();
        let r = 3;

        let a = cadzow_step(&y, &plan, r).unwrap();
        let (b, _) = fast_cadzow_step(&y, &plan, r, &Anchor::Full).unwrap();
        let c = gradient_step(&y, &y, &plan, r).unwrap();
        let (d, _) = fast_gradient_step(&y, &y, &plan, r, &Anchor::Full).unwrap();
        assert!(rel_err(&b, &a) < 1e-12);
        assert!(rel_err(&c, &a) < 1e-12);
        assert!(rel_err(&d, &a) < 1e-12);
    }

    #[test]
    fn fast_step_matches_dense_tangent_oracle() {
        // Second iteration: anchor at the factors of the first iterate, then
        // compare with H_pinv T_r P_T H z computed densely.
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let (x, _) = gen_spectral(&[40], 3, &mut rng).unwrap();
        let y = add_noise(&x, 0.3, &mut rng).unwrap();
        let plan = make_plan(&[40], None).unwrap();
        let r = 3;

        let h0 = hankelize_dense(&y, &plan).unwrap();
        let f0 = truncated_svd(h0.as_ref(), r).unwrap();
        let z1 = dehankelize_lowrank(&f0, &plan).unwrap();

        let (z2_fast, _) = fast_cadzow_step(&z1, &plan, r, &Anchor::Factors(f0.clone())).unwrap();

        let h1 = hankelize_dense(&z1, &plan).unwrap();
        let projected = tangent_project_dense(h1.as_ref(), &f0).unwrap();
        let f1 = truncated_svd(projected.as_ref(), r).unwrap();
        let z2_dense = dehankelize(f1.reconstruct().as_ref(), &plan).unwrap();

        assert!(rel_err(&z2_fast, &z2_dense) < 1e-10);
    }

    #[test]
    fn gradient_reweighting_identity() {
        // With y = z + D . e the correction adds exactly e.
        let plan = make_plan(&[6], None).unwrap();
        let z = ComplexTensor::from_real(vec![6], &[1.0; 6]).unwrap();
        let e = [0.5, -0.25, 0.125, 1.0, -1.0, 2.0];
        let y_data: Vec<Complex64> = z
            .data()
            .iter()
            .zip(&e)
            .zip(plan.weights())
            .map(|((&zi, &ei), &w)| zi + ei * w as f64)
            .collect();
        let y = ComplexTensor::new(vec![6], y_data).unwrap();
        let g = reweighted_input(&z, &y, &plan).unwrap();
        for ((gi, zi), ei) in g.data().iter().zip(z.data()).zip(&e) {
            assert!((gi - (zi + ei)).norm() < 1e-14);
        }
    }

    #[test]
    fn run_converges_on_noiseless_low_rank_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let (x, _) = gen_spectral(&[64], 4, &mut rng).unwrap();
        let plan = make_plan(&[64], None).unwrap();
        for variant in Variant::ALL {
            let opts = SolverOptions::new(variant, 4).with_tol(Some(1e-12));
            let run_out = run(&x, &plan, &opts, None, Some(&x)).unwrap();
            assert!(run_out.converged, "{variant} did not converge");
            assert!(run_out.iterations <= 5, "{variant}: {}", run_out.iterations);
            assert!(rel_err(&run_out.z, &x) < 1e-10, "{variant}");
            assert_eq!(run_out.trace.len(), run_out.iterations);
            let last = run_out.trace.last().unwrap();
            assert!(last.rel_change <= 1e-12);
            assert!(last.mse.unwrap() < 1e-10);
        }
    }

    #[test]
    fn run_recovers_masked_signal_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let (x, _) = gen_spectral(&[64], 2, &mut rng).unwrap();
        let plan = make_plan(&[64], None).unwrap();
        let mask = sample_mask(&[64], 0.6, &mut rng).unwrap();
        for variant in [Variant::Cadzow, Variant::FastCadzow] {
            let opts = SolverOptions::new(variant, 2)
                .with_tol(Some(1e-10))
                .with_alpha(1.0);
            let out = run(&x, &plan, &opts, Some(&mask), Some(&x)).unwrap();
            assert!(out.converged, "{variant}");
            assert!(rel_err(&out.z, &x) < 1e-8, "{variant}: {}", rel_err(&out.z, &x));
            // alpha = 1 pins observed entries at every iteration.
            for &i in mask.indices() {
                assert!((out.z.data()[i] - x.data()[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_variants_reject_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let (x, _) = gen_spectral(&[32], 2, &mut rng).unwrap();
        let plan = make_plan(&[32], None).unwrap();
        let mask = sample_mask(&[32], 0.5, &mut rng).unwrap();
        for variant in [Variant::Gradient, Variant::FastGradient] {
            let opts = SolverOptions::new(variant, 2);
            match run(&x, &plan, &opts, Some(&mask), None) {
                Err(Error::UnsupportedCombination(_)) => {}
                other => panic!("expected UnsupportedCombination, got {other:?}"),
            }
        }
    }

    #[test]
    fn fixed_iteration_mode_runs_exact_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let (x, _) = gen_spectral(&[48], 3, &mut rng).unwrap();
        let y = add_noise(&x, 0.5, &mut rng).unwrap();
        let plan = make_plan(&[48], None).unwrap();
        let opts = SolverOptions::new(Variant::FastGradient, 3)
            .with_tol(None)
            .with_max_iter(7);
        let out = run(&y, &plan, &opts, None, Some(&x)).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 7);
        assert_eq!(out.trace.len(), 7);
        for (i, rec) in out.trace.iter().enumerate() {
            assert_eq!(rec.iter, i + 1);
            assert!(rec.seconds >= 0.0);
        }
    }

    #[test]
    fn unmet_tolerance_reports_not_converged() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let (x, _) = gen_spectral(&[48], 3, &mut rng).unwrap();
        let y = add_noise(&x, 0.5, &mut rng).unwrap();
        let plan = make_plan(&[48], None).unwrap();
        let opts = SolverOptions::new(Variant::Cadzow, 3)
            .with_tol(Some(1e-15))
            .with_max_iter(3);
        let out = run(&y, &plan, &opts, None, None).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn invalid_options_rejected() {
        let plan = make_plan(&[16], None).unwrap();
        let y = ComplexTensor::from_real(vec![16], &[1.0; 16]).unwrap();
        let bad_rank = SolverOptions::new(Variant::Cadzow, 9);
        assert!(matches!(run(&y, &plan, &bad_rank, None, None), Err(Error::Rank(_))));
        let bad_alpha = SolverOptions::new(Variant::Cadzow, 2).with_alpha(0.0);
        assert!(matches!(
            run(&y, &plan, &bad_alpha, None, None),
            Err(Error::InvalidArgument(_))
        ));
        let bad_tol = SolverOptions::new(Variant::Cadzow, 2).with_tol(Some(-1.0));
        assert!(matches!(
            run(&y, &plan, &bad_tol, None, None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_finite_input_rejected() {
        let plan = make_plan(&[8], None).unwrap();
        let mut y = ComplexTensor::from_real(vec![8], &[1.0; 8]).unwrap();
        y.data_mut()[3] = Complex64::new(f64::NAN, 0.0);
        let opts = SolverOptions::new(Variant::Cadzow, 2);
        assert!(matches!(run(&y, &plan, &opts, None, None), Err(Error::Numerical(_))));
    }

    #[test]
    fn variant_parse_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("fast-cadzow".parse::<Variant>().unwrap(), Variant::FastCadzow);
        assert!("ssa".parse::<Variant>().is_err());
    }
}

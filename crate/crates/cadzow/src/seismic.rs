//! Frequency-domain processing of seismic event volumes.
//!
//! Each temporal-frequency slice of a volume of linear events has a
//! low-rank spatial block-Hankel matrix, so denoising and missing-trace
//! recovery reduce to one structured low-rank problem per frequency slice,
//! followed by an inverse transform.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hankel::{hankelize_dense, make_plan, HankelPlan};
use crate::lowrank::truncated_svd;
use crate::signals::SampleMask;
use crate::solvers::{cadzow_step, fast_cadzow_step, run, Anchor, SolverOptions, Variant};
use crate::tensor::ComplexTensor;

/// Per-slice solver configuration.
#[derive(Debug, Clone)]
pub struct SeismicOptions {
    pub variant: Variant,
    /// Rank cap: the number of events.
    pub rank: usize,
    /// Fixed per-slice iteration count for denoising.
    pub iterations: usize,
    /// Relative-change tolerance per continuation stage for recovery.
    pub tol: f64,
    /// Data-consistency weight for trace recovery.
    pub alpha: f64,
}

impl SeismicOptions {
    pub fn new(variant: Variant, rank: usize, iterations: usize) -> Self {
        Self {
            variant,
            rank,
            iterations,
            tol: 1e-10,
            alpha: 1.0,
        }
    }
}

/// Noise-only slices have their top singular value near the noise floor;
/// keeping only components this factor above the floor drops them.
const NOISE_GATE: f64 = 1.2;
/// Iteration caps for the recovery continuation stages.
const STAGE_ITER: usize = 100;
const FINAL_ITER: usize = 500;

/// Denoises or completes a `[time, spatial...]` volume slice by slice.
///
/// Without a mask this is denoising: the per-slice noise floor is
/// estimated from the median top singular value across slices, each slice
/// is truncated at its number of above-floor components (capped at
/// `rank`, noise-only slices are zeroed), and the chosen variant runs for
/// the fixed iteration count.
///
/// `trace_mask` lives on the spatial grid; a masked trace is missing for
/// all time samples. Recovery solves each slice by rank continuation: the
/// target rank is ramped from 1 to `rank`, each stage iterating with
/// observed entries blended back (weight `alpha`) until the relative
/// change drops below `tol`. Ramping keeps the early iterations
/// well-conditioned at low frequencies where the events' spatial
/// wavenumbers nearly coincide.
///
/// Real input yields real output: only the frequencies `0..=T/2` are
/// solved and the rest are filled by conjugate symmetry.
pub fn process_volume(
    y: &ComplexTensor,
    opts: &SeismicOptions,
    trace_mask: Option<&SampleMask>,
) -> Result<ComplexTensor> {
    if y.ndim() < 2 {
        return Err(Error::Shape(format!(
            "volume needs a time axis plus spatial axes, got {:?}",
            y.dims()
        )));
    }
    let t_len = y.dims()[0];
    let spatial: Vec<usize> = y.dims()[1..].to_vec();
    let spatial_total: usize = spatial.iter().product();
    if let Some(m) = trace_mask {
        if m.dims() != spatial.as_slice() {
            return Err(Error::Shape(format!(
                "trace mask dims {:?} vs spatial dims {:?}",
                m.dims(),
                spatial
            )));
        }
        if opts.variant.is_gradient() {
            return Err(Error::UnsupportedCombination(
                "gradient variants do not support sampling masks".into(),
            ));
        }
    }
    let plan = make_plan(&spatial, None)?;
    if opts.rank == 0 || opts.rank >= plan.rows().min(plan.cols()) {
        return Err(Error::Rank(format!(
            "rank {} for a {}x{} spatial Hankel matrix",
            opts.rank,
            plan.rows(),
            plan.cols()
        )));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(t_len);
    let inv = planner.plan_fft_inverse(t_len);
    let mut scratch =
        vec![Complex64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];

    // Temporal FFT per trace.
    let mut spectrum = vec![Complex64::default(); t_len * spatial_total];
    let mut line = vec![Complex64::default(); t_len];
    for n in 0..spatial_total {
        for t in 0..t_len {
            line[t] = y.data()[t * spatial_total + n];
        }
        fwd.process_with_scratch(&mut line, &mut scratch);
        for t in 0..t_len {
            spectrum[t * spatial_total + n] = line[t];
        }
    }

    let real_input = y.is_real();
    let solve_upto = if real_input { t_len / 2 } else { t_len - 1 };
    let slices: Vec<ComplexTensor> = (0..=solve_upto)
        .map(|m| {
            ComplexTensor::new(
                spatial.clone(),
                spectrum[m * spatial_total..(m + 1) * spatial_total].to_vec(),
            )
        })
        .collect::<Result<_>>()?;

    let mut out_spectrum = vec![Complex64::default(); t_len * spatial_total];
    let solved: Vec<Option<ComplexTensor>> = match trace_mask {
        None => denoise_slices(&slices, &plan, opts)?,
        Some(mask) => slices
            .iter()
            .map(|s| recover_slice(s, &plan, opts, mask))
            .collect::<Result<_>>()?,
    };
    for (m, out) in solved.into_iter().enumerate() {
        let out = match out {
            Some(z) => z,
            None => continue,
        };
        out_spectrum[m * spatial_total..(m + 1) * spatial_total].copy_from_slice(out.data());
        if real_input && m != 0 && m != t_len - m {
            // Conjugate-symmetric fill keeps the inverse transform real.
            let mirror = t_len - m;
            for n in 0..spatial_total {
                out_spectrum[mirror * spatial_total + n] = out.data()[n].conj();
            }
        }
    }

    // Inverse temporal FFT per trace.
    let mut out = vec![Complex64::default(); t_len * spatial_total];
    let scale = 1.0 / t_len as f64;
    for n in 0..spatial_total {
        for t in 0..t_len {
            line[t] = out_spectrum[t * spatial_total + n];
        }
        inv.process_with_scratch(&mut line, &mut scratch);
        for t in 0..t_len {
            let v = line[t] * scale;
            out[t * spatial_total + n] = if real_input { Complex64::new(v.re, 0.0) } else { v };
        }
    }
    ComplexTensor::new(y.dims().to_vec(), out)
}

/// Leading `rank` singular values of the slice's block-Hankel matrix.
fn leading_singular_values(slice: &ComplexTensor, plan: &HankelPlan, rank: usize) -> Result<Vec<f64>> {
    let h = hankelize_dense(slice, plan)?;
    let f = truncated_svd(h.as_ref(), rank)?;
    Ok(f.s().to_vec())
}

fn denoise_slices(
    slices: &[ComplexTensor],
    plan: &HankelPlan,
    opts: &SeismicOptions,
) -> Result<Vec<Option<ComplexTensor>>> {
    let spectra: Vec<Vec<f64>> = slices
        .iter()
        .map(|s| leading_singular_values(s, plan, opts.rank))
        .collect::<Result<_>>()?;
    // Signal occupies a minority band of frequencies, so the median top
    // singular value across slices estimates the per-slice noise floor.
    let mut tops: Vec<f64> = spectra.iter().map(|s| s[0]).collect();
    tops.sort_by(|a, b| a.partial_cmp(b).expect("singular values are finite"));
    let floor = tops[tops.len() / 2];

    slices
        .iter()
        .zip(&spectra)
        .map(|(slice, sv)| {
            let r_eff = sv.iter().take_while(|&&s| s >= NOISE_GATE * floor).count();
            if r_eff == 0 {
                return Ok(None);
            }
            let solver_opts = SolverOptions::new(opts.variant, r_eff)
                .with_tol(None)
                .with_max_iter(opts.iterations);
            Ok(Some(run(slice, plan, &solver_opts, None, None)?.z))
        })
        .collect()
}

fn recover_slice(
    slice: &ComplexTensor,
    plan: &HankelPlan,
    opts: &SeismicOptions,
    mask: &SampleMask,
) -> Result<Option<ComplexTensor>> {
    if slice.norm() == 0.0 {
        return Ok(None);
    }
    let mut z = mask.project(slice)?;
    for stage_rank in 1..=opts.rank {
        let cap = if stage_rank == opts.rank { FINAL_ITER } else { STAGE_ITER };
        let mut anchor = Anchor::Full;
        for _ in 0..cap {
            let mut next = match opts.variant {
                Variant::Cadzow => cadzow_step(&z, plan, stage_rank)?,
                Variant::FastCadzow => {
                    let (out, f) = fast_cadzow_step(&z, plan, stage_rank, &anchor)?;
                    anchor = Anchor::Factors(f);
                    out
                }
                _ => unreachable!("gradient variants rejected earlier"),
            };
            let yd = slice.data();
            let nd = next.data_mut();
            for &i in mask.indices() {
                nd[i] += opts.alpha * (yd[i] - nd[i]);
            }
            if !next.all_finite() {
                return Err(Error::Numerical("recovery iterate became non-finite".into()));
            }
            let prev_norm = z.norm();
            let diff = next.distance(&z)?;
            z = next;
            if diff <= opts.tol * prev_norm.max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    Ok(Some(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{add_noise, gen_linear_events, sample_mask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
        a.distance(b).unwrap() / b.norm()
    }

    fn drop_traces(vol: &ComplexTensor, mask: &SampleMask) -> ComplexTensor {
        let spatial_total: usize = vol.dims()[1..].iter().product();
        let t_len = vol.dims()[0];
        let mut out = vol.clone();
        for n in 0..spatial_total {
            if !mask.is_observed(n) {
                for t in 0..t_len {
                    out.data_mut()[t * spatial_total + n] = Complex64::default();
                }
            }
        }
        out
    }

    #[test]
    fn identity_on_clean_single_event() {
        // One event gives rank-1 frequency slices; the solver leaves them
        // nearly unchanged (up to the wavelet containment error).
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let (vol, _) = gen_linear_events(&[6, 6], 96, 1, &mut rng).unwrap();
        let opts = SeismicOptions::new(Variant::FastCadzow, 1, 5);
        let out = process_volume(&vol, &opts, None).unwrap();
        assert!(out.is_real());
        assert!(rel_err(&out, &vol) < 1e-3, "{}", rel_err(&out, &vol));
    }

    #[test]
    fn denoising_reduces_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let (vol, _) = gen_linear_events(&[6, 6], 128, 2, &mut rng).unwrap();
        let noisy = add_noise(&vol, 1.0, &mut rng).unwrap();
        let opts = SeismicOptions::new(Variant::FastGradient, 2, 10);
        let out = process_volume(&noisy, &opts, None).unwrap();
        let before = rel_err(&noisy, &vol);
        let after = rel_err(&out, &vol);
        assert!(after < 0.3 * before, "before {before}, after {after}");
    }

    #[test]
    fn recovers_missing_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let (vol, _) = gen_linear_events(&[6, 6], 96, 2, &mut rng).unwrap();
        let mask = sample_mask(&[6, 6], 0.5, &mut rng).unwrap();
        let observed = drop_traces(&vol, &mask);
        let opts = SeismicOptions::new(Variant::FastCadzow, 2, 10);
        let out = process_volume(&observed, &opts, Some(&mask)).unwrap();
        assert!(rel_err(&out, &vol) < 1e-3, "{}", rel_err(&out, &vol));
        assert!(rel_err(&observed, &vol) > 0.3);
    }

    #[test]
    fn recovery_observed_traces_pinned() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let (vol, _) = gen_linear_events(&[5, 5], 96, 1, &mut rng).unwrap();
        let mask = sample_mask(&[5, 5], 0.6, &mut rng).unwrap();
        let observed = drop_traces(&vol, &mask);
        let opts = SeismicOptions::new(Variant::Cadzow, 1, 10);
        let out = process_volume(&observed, &opts, Some(&mask)).unwrap();
        assert!(rel_err(&out, &vol) < 1e-3);
    }

    #[test]
    fn gradient_variant_rejected_for_recovery() {
        let vol = ComplexTensor::zeros(&[16, 4, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let mask = sample_mask(&[4, 4], 0.5, &mut rng).unwrap();
        let opts = SeismicOptions::new(Variant::FastGradient, 1, 5);
        match process_volume(&vol, &opts, Some(&mask)) {
            Err(Error::UnsupportedCombination(_)) => {}
            other => panic!("expected UnsupportedCombination, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let flat = ComplexTensor::zeros(&[16]);
        let opts = SeismicOptions::new(Variant::Cadzow, 1, 3);
        assert!(process_volume(&flat, &opts, None).is_err());

        let vol = ComplexTensor::zeros(&[8, 4, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let wrong_mask = sample_mask(&[5, 5], 0.5, &mut rng).unwrap();
        assert!(process_volume(&vol, &opts, Some(&wrong_mask)).is_err());

        let big_rank = SeismicOptions::new(Variant::Cadzow, 9, 3);
        assert!(matches!(process_volume(&vol, &big_rank, None), Err(Error::Rank(_))));
    }
}

//! Frequency-domain denoising and trace recovery of a synthetic volume of
//! linear seismic events.
//!
//! Each temporal-frequency slice of the volume has a low-rank spatial
//! block-Hankel matrix (rank = number of events), so both tasks reduce to
//! per-slice structured low-rank problems.
//!
//! Run with: cargo run --release --example seismic_events

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cadzow::seismic::{process_volume, SeismicOptions};
use cadzow::signals::{add_noise, gen_linear_events, sample_mask};
use cadzow::solvers::Variant;
use cadzow::ComplexTensor;

fn rel_err(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
    a.distance(b).unwrap() / b.norm()
}

fn main() -> cadzow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spatial = [8usize, 8];
    let time_len = 256;
    let n_events = 3;
    let (clean, params) = gen_linear_events(&spatial, time_len, n_events, &mut rng)?;
    println!(
        "volume: {}x{}x{} time samples, {} events, slownesses {:?}",
        spatial[0], spatial[1], time_len, n_events, params.slownesses
    );

    // Denoising at 100% relative noise.
    let noisy = add_noise(&clean, 1.0, &mut rng)?;
    let opts = SeismicOptions::new(Variant::FastCadzow, n_events, 10);
    let denoised = process_volume(&noisy, &opts, None)?;
    println!(
        "denoise  eps=1.0: input MSE {:.4}, output MSE {:.4}",
        rel_err(&noisy, &clean),
        rel_err(&denoised, &clean)
    );

    // Recovery from half the traces (a missing trace is missing for all
    // time samples).
    let mask = sample_mask(&spatial, 0.5, &mut rng)?;
    let spatial_total: usize = spatial.iter().product();
    let mut observed = clean.clone();
    for n in 0..spatial_total {
        if !mask.is_observed(n) {
            for t in 0..time_len {
                observed.data_mut()[t * spatial_total + n] = Complex64::default();
            }
        }
    }
    let recovered = process_volume(&observed, &opts, Some(&mask))?;
    println!(
        "recover  50% traces: input MSE {:.4}, output MSE {:.2e}",
        rel_err(&observed, &clean),
        rel_err(&recovered, &clean)
    );
    Ok(())
}

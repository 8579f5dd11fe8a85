//! Recover a spectrally sparse signal from 50% of its samples.
//!
//! Observed entries are pinned (alpha = 1) and the rank-reduction iteration
//! fills the rest; with a noiseless signal the recovery is exact to
//! working precision.
//!
//! Run with: cargo run --release --example missing_entries

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cadzow::hankel::make_plan;
use cadzow::metrics::mse;
use cadzow::signals::{gen_spectral, sample_mask};
use cadzow::solvers::{run, SolverOptions, Variant};

fn main() -> cadzow::Result<()> {
    let n = 512;
    let r = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (clean, _) = gen_spectral(&[n], r, &mut rng)?;
    let mask = sample_mask(&[n], 0.5, &mut rng)?;
    println!("N={n}, rank {r}, {} of {} samples observed", mask.len(), n);

    let observed = mask.project(&clean)?;
    println!("masked-input MSE {:.4e}", mse(&observed, &clean)?);

    let plan = make_plan(&[n], None)?;
    for variant in [Variant::Cadzow, Variant::FastCadzow] {
        let opts = SolverOptions::new(variant, r)
            .with_tol(Some(1e-10))
            .with_alpha(1.0);
        let out = run(&clean, &plan, &opts, Some(&mask), Some(&clean))?;
        println!(
            "{variant:<12} MSE {:.4e}  iterations {:>3}  converged {}",
            mse(&out.z, &clean)?,
            out.iterations,
            out.converged
        );
    }
    Ok(())
}

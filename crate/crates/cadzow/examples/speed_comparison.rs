//! Wall-time comparison of the dense-SVD baseline against the
//! tangent-space fast variant at a size where the dense SVD dominates.
//!
//! Both run the same fixed number of iterations on the same input; the
//! fast variant replaces the L x K SVD with FFT products plus a 2r x 2r
//! SVD from the second iteration on.
//!
//! Run with: cargo run --release --example speed_comparison

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cadzow::hankel::make_plan;
use cadzow::metrics::mse;
use cadzow::signals::{add_noise, gen_spectral};
use cadzow::solvers::{run, SolverOptions, Variant};

fn main() -> cadzow::Result<()> {
    let n = 4096;
    let r = 10;
    let iters = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (clean, _) = gen_spectral(&[n], r, &mut rng)?;
    let noisy = add_noise(&clean, 0.5, &mut rng)?;
    let plan = make_plan(&[n], None)?;
    println!("N={n}, rank {r}, {iters} fixed iterations (matrix {}x{})", plan.rows(), plan.cols());

    let mut times = Vec::new();
    for variant in [Variant::Cadzow, Variant::FastCadzow] {
        let opts = SolverOptions::new(variant, r).with_tol(None).with_max_iter(iters);
        let out = run(&noisy, &plan, &opts, None, None)?;
        println!(
            "{variant:<12} wall {:>7.3}s  MSE {:.4e}",
            out.wall_time_seconds,
            mse(&out.z, &clean)?
        );
        times.push(out.wall_time_seconds);
    }
    println!("speedup: {:.1}x", times[0] / times[1]);
    Ok(())
}

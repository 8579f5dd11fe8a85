//! The fast Hankel operator paths: matrix-vector products and low-rank
//! de-hankelization in O(N log N) via FFT correlation, without ever
//! materializing the L x K matrix.
//!
//! Compares the implicit products against the dense matrix and times a
//! truncated SVD computed from a randomized sketch that only touches the
//! fast paths.
//!
//! Run with: cargo run --release --example fast_operators

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cadzow::hankel::{hankel_matvec, hankelize_dense, make_plan};
use cadzow::lowrank::{randomized_lowrank, truncated_svd};
use cadzow::signals::{add_noise, gen_spectral};

fn main() -> cadzow::Result<()> {
    let n = 4096;
    let r = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (clean, _) = gen_spectral(&[n], r, &mut rng)?;
    let z = add_noise(&clean, 0.5, &mut rng)?;
    let plan = make_plan(&[n], None)?;
    println!("N={n}: Hankel matrix is {}x{}", plan.rows(), plan.cols());

    // Implicit vs dense product on a random vector.
    let x: Vec<Complex64> = (0..plan.cols())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let t0 = Instant::now();
    let fast = hankel_matvec(&z, &x, &plan)?;
    let t_fast = t0.elapsed();
    let t0 = Instant::now();
    let dense = hankelize_dense(&z, &plan)?;
    let mut slow = vec![Complex64::default(); plan.rows()];
    for i in 0..plan.rows() {
        for (j, xj) in x.iter().enumerate() {
            slow[i] += dense[(i, j)] * xj;
        }
    }
    let t_dense = t0.elapsed();
    let err: f64 = fast
        .iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / slow.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    println!("matvec: fast {t_fast:?} vs dense {t_dense:?}, relative error {err:.2e}");

    // Randomized rank-r factors from sketch products vs the dense SVD.
    let t0 = Instant::now();
    let sketch = randomized_lowrank(&z, &plan, r, 2, &mut rng)?;
    let t_sketch = t0.elapsed();
    let t0 = Instant::now();
    let exact = truncated_svd(dense.as_ref(), r)?;
    let t_svd = t0.elapsed();
    println!("sketch SVD {t_sketch:?} vs dense SVD {t_svd:?}");
    println!("leading singular values (sketch vs dense):");
    for i in 0..r.min(5) {
        println!("  {:.6e}  {:.6e}", sketch.s()[i], exact.s()[i]);
    }
    Ok(())
}

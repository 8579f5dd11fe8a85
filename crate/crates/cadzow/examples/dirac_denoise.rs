//! Denoise the Fourier coefficients of a stream of Diracs.
//!
//! A bandlimited observation of r Diracs has Fourier coefficients whose
//! Hankel matrix has rank r, so rank reduction cleans them up; the Dirac
//! locations and weights survive the round trip.
//!
//! Run with: cargo run --release --example dirac_denoise

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cadzow::hankel::make_plan;
use cadzow::metrics::mse;
use cadzow::signals::{add_noise, gen_dirac_fourier, DiracParams};
use cadzow::solvers::{run, SolverOptions, Variant};

fn main() -> cadzow::Result<()> {
    let r = 7;
    let bandwidth = 71;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = DiracParams::sample(r, bandwidth, &mut rng)?;
    println!("{r} Diracs, bandwidth {bandwidth}:");
    for (w, t) in params.weights.iter().zip(&params.locations) {
        println!("  weight {w:.3} at t = {t:.4}");
    }

    let (fourier, _time) = gen_dirac_fourier(&params)?;
    let noisy = add_noise(&fourier, 0.1, &mut rng)?;
    println!("\nnoisy Fourier-coefficient MSE {:.4e}", mse(&noisy, &fourier)?);

    let plan = make_plan(&[bandwidth], None)?;
    for variant in [Variant::Cadzow, Variant::FastCadzow] {
        let opts = SolverOptions::new(variant, r).with_tol(Some(1e-6));
        let out = run(&noisy, &plan, &opts, None, Some(&fourier))?;
        println!(
            "{variant:<12} MSE {:.4e}  iterations {:>3}",
            mse(&out.z, &fourier)?,
            out.iterations
        );
    }
    Ok(())
}

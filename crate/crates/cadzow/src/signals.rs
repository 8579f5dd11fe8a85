//! Synthetic ground-truth generators, the additive noise model, and random
//! sampling masks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{decode_index, ComplexTensor};

/// Parameters of a spectrally sparse signal: one frequency vector and one
/// complex amplitude per harmonic.
#[derive(Debug, Clone)]
pub struct SpectralParams {
    /// Normalized frequencies in `[0, 1)`, one d-vector per harmonic.
    pub frequencies: Vec<Vec<f64>>,
    /// Complex amplitudes, nonzero.
    pub amplitudes: Vec<Complex64>,
}

/// Generates a random spectrally sparse signal of Hankel rank `r`.
///
/// Frequencies are uniform on `[0, 1)` per dimension; the amplitude modulus
/// is `1 + 10^{0.5 c}` with `c` uniform on `[0, 1]` and a uniform phase.
pub fn gen_spectral(
    dims: &[usize],
    r: usize,
    rng: &mut impl Rng,
) -> Result<(ComplexTensor, SpectralParams)> {
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Shape(format!("invalid extents {dims:?}")));
    }
    let params = SpectralParams {
        frequencies: (0..r)
            .map(|_| dims.iter().map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect(),
        amplitudes: (0..r)
            .map(|_| {
                let c: f64 = rng.gen_range(0.0..=1.0);
                let modulus = 1.0 + 10f64.powf(0.5 * c);
                let phase = rng.gen_range(0.0..2.0 * PI);
                Complex64::from_polar(modulus, phase)
            })
            .collect(),
    };
    Ok((spectral_signal(dims, &params)?, params))
}

/// Evaluates `x[n] = sum_j d_j exp(i 2 pi f_j . n)` on the sample grid.
pub fn spectral_signal(dims: &[usize], params: &SpectralParams) -> Result<ComplexTensor> {
    let n: usize = dims.iter().product();
    let mut data = vec![Complex64::default(); n];
    let mut coords = vec![0usize; dims.len()];
    for (flat, slot) in data.iter_mut().enumerate() {
        decode_index(flat, dims, &mut coords);
        for (f, d) in params.frequencies.iter().zip(&params.amplitudes) {
            let phase: f64 = f
                .iter()
                .zip(&coords)
                .map(|(&fd, &nd)| fd * nd as f64)
                .sum();
            *slot += d * Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
    }
    ComplexTensor::new(dims.to_vec(), data)
}

/// A periodic Dirac stream: weights, locations, sinc bandwidth and the
/// number of time samples.
#[derive(Debug, Clone)]
pub struct DiracParams {
    /// Real weights `x_j`.
    pub weights: Vec<f64>,
    /// Locations `t_j` in `[0, 1)`.
    pub locations: Vec<f64>,
    /// Odd sinc-kernel bandwidth `B`.
    pub bandwidth: usize,
    /// Number of equally spaced time samples `N`.
    pub samples: usize,
}

impl DiracParams {
    /// Draws `r` Diracs with weights uniform on `[0.5, 1.5]` and locations
    /// uniform on `[0, 1)`, sampled at `N = B` points.
    pub fn sample(r: usize, bandwidth: usize, rng: &mut impl Rng) -> Result<Self> {
        let p = Self {
            weights: (0..r).map(|_| rng.gen_range(0.5..1.5)).collect(),
            locations: (0..r).map(|_| rng.gen_range(0.0..1.0)).collect(),
            bandwidth,
            samples: bandwidth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {} must be odd",
                self.bandwidth
            )));
        }
        let r = self.weights.len();
        if r == 0 || r != self.locations.len() {
            return Err(Error::InvalidArgument(
                "weights and locations must be nonempty and of equal length".into(),
            ));
        }
        if r > (self.bandwidth - 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "{} Diracs exceed (B-1)/2 = {}",
                r,
                (self.bandwidth - 1) / 2
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        Ok(())
    }
}

/// The Dirichlet kernel `sin(pi B t) / (B sin(pi t))`, with the removable
/// singularity at integer `t` evaluated as its limit 1 (B odd).
pub fn dirichlet(t: f64, bandwidth: usize) -> f64 {
    let b = bandwidth as f64;
    let frac = t - t.round();
    if frac.abs() < 1e-12 {
        1.0
    } else {
        (PI * b * t).sin() / (b * (PI * t).sin())
    }
}

/// Fourier coefficients `x_hat_k = sum_j x_j e^{-i 2 pi k t_j}` over the
/// centered window `k = -(B-1)/2 ... (B-1)/2`, and the sinc-filtered time
/// samples `y_n = sum_j x_j phi(n/N - t_j)`.
///
/// With `N = B` the two are consistent under the plain DFT:
/// `x_hat_k = sum_n y_n e^{-i 2 pi k n / N}`.
pub fn gen_dirac_fourier(p: &DiracParams) -> Result<(ComplexTensor, ComplexTensor)> {
    p.validate()?;
    let b = p.bandwidth;
    let half = (b as i64 - 1) / 2;
    let mut fourier = Vec::with_capacity(b);
    for k in -half..=half {
        let mut c = Complex64::default();
        for (&x, &t) in p.weights.iter().zip(&p.locations) {
            c += x * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * t);
        }
        fourier.push(c);
    }
    let n = p.samples;
    let step = 1.0 / n as f64;
    let mut time = Vec::with_capacity(n);
    for i in 0..n {
        let mut y = 0.0;
        for (&x, &t) in p.weights.iter().zip(&p.locations) {
            y += x * dirichlet(i as f64 * step - t, b);
        }
        time.push(Complex64::new(y, 0.0));
    }
    Ok((
        ComplexTensor::new(vec![b], fourier)?,
        ComplexTensor::new(vec![n], time)?,
    ))
}

/// Parameters of a synthetic volume of linear plane-wave events.
#[derive(Debug, Clone)]
pub struct LinearEventParams {
    /// Spatial extents (the volume layout is `[time, spatial...]`).
    pub spatial_dims: Vec<usize>,
    pub time_len: usize,
    /// Per-event amplitude.
    pub amplitudes: Vec<f64>,
    /// Per-event onset time in samples at the spatial origin.
    pub onsets: Vec<f64>,
    /// Per-event slowness vector: time shift in samples per spatial step.
    pub slownesses: Vec<Vec<f64>>,
    /// Per-event Ricker peak frequency in cycles per time sample.
    pub peak_freqs: Vec<f64>,
}

impl LinearEventParams {
    pub fn sample(
        spatial_dims: &[usize],
        time_len: usize,
        n_events: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if n_events == 0 {
            return Err(Error::InvalidArgument("need at least one event".into()));
        }
        if spatial_dims.is_empty() || spatial_dims.iter().any(|&d| d == 0) || time_len == 0 {
            return Err(Error::Shape("invalid event volume extents".into()));
        }
        // The wavelet must stay inside the time window for every trace:
        // clipping at the window edges breaks the rank-1 separability of
        // the frequency slices. Beyond `3.5/(pi*f_p)` samples the Ricker
        // envelope is below 5e-6, the moveout across the grid is capped at
        // 20% of the window, and onsets keep both clear of the edges. The
        // peak frequency floor scales with the window so short windows get
        // proportionally shorter wavelets.
        let t = time_len as f64;
        let fp_lo = (4.0 / t).max(0.018);
        let fp_hi = (6.0 / t).max(0.028);
        let delay_budget = 0.2 * t;
        let d = spatial_dims.len() as f64;
        let peak_freqs: Vec<f64> = (0..n_events).map(|_| rng.gen_range(fp_lo..fp_hi)).collect();
        let mut onsets = Vec::with_capacity(n_events);
        for &fp in &peak_freqs {
            let margin = 3.5 / (PI * fp);
            let lo = margin + delay_budget;
            let hi = t - margin - delay_budget;
            if hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "time window {time_len} too short for contained events"
                )));
            }
            onsets.push(rng.gen_range(lo..hi));
        }
        Ok(Self {
            spatial_dims: spatial_dims.to_vec(),
            time_len,
            amplitudes: (0..n_events)
                .map(|_| rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect(),
            onsets,
            slownesses: (0..n_events)
                .map(|_| {
                    spatial_dims
                        .iter()
                        .map(|&ext| {
                            // Dip magnitudes bounded away from zero keep the
                            // per-slice exponentials distinguishable.
                            let slim = delay_budget / (d * (ext.max(2) - 1) as f64);
                            let mag = rng.gen_range(0.4 * slim..slim);
                            if rng.gen_bool(0.5) {
                                mag
                            } else {
                                -mag
                            }
                        })
                        .collect()
                })
                .collect(),
            peak_freqs,
        })
    }

    pub fn n_events(&self) -> usize {
        self.amplitudes.len()
    }

    /// The same volume restricted to a single event.
    pub fn event(&self, idx: usize) -> Self {
        Self {
            spatial_dims: self.spatial_dims.clone(),
            time_len: self.time_len,
            amplitudes: vec![self.amplitudes[idx]],
            onsets: vec![self.onsets[idx]],
            slownesses: vec![self.slownesses[idx].clone()],
            peak_freqs: vec![self.peak_freqs[idx]],
        }
    }
}

fn ricker(t: f64, peak_freq: f64) -> f64 {
    let a = PI * peak_freq * t;
    let a2 = a * a;
    (1.0 - 2.0 * a2) * (-a2).exp()
}

/// Evaluates the plane-wave event volume; real-valued, `[time, spatial...]`.
pub fn linear_event_volume(params: &LinearEventParams) -> Result<ComplexTensor> {
    let mut dims = vec![params.time_len];
    dims.extend_from_slice(&params.spatial_dims);
    let spatial_total: usize = params.spatial_dims.iter().product();
    let mut data = vec![Complex64::default(); params.time_len * spatial_total];
    let mut coords = vec![0usize; params.spatial_dims.len()];
    for n in 0..spatial_total {
        decode_index(n, &params.spatial_dims, &mut coords);
        for e in 0..params.n_events() {
            let delay: f64 = params.slownesses[e]
                .iter()
                .zip(&coords)
                .map(|(&s, &c)| s * c as f64)
                .sum();
            let tau = params.onsets[e] + delay;
            for t in 0..params.time_len {
                data[t * spatial_total + n].re +=
                    params.amplitudes[e] * ricker(t as f64 - tau, params.peak_freqs[e]);
            }
        }
    }
    ComplexTensor::new(dims, data)
}

/// Draws event parameters and evaluates the volume.
pub fn gen_linear_events(
    spatial_dims: &[usize],
    time_len: usize,
    n_events: usize,
    rng: &mut impl Rng,
) -> Result<(ComplexTensor, LinearEventParams)> {
    let params = LinearEventParams::sample(spatial_dims, time_len, n_events, rng)?;
    Ok((linear_event_volume(&params)?, params))
}

/// Adds Gaussian noise scaled so that `||noise|| = eps * ||x||` exactly.
///
/// The noise is circularly-symmetric complex for complex signals and real
/// for real signals.
pub fn add_noise(x: &ComplexTensor, eps: f64, rng: &mut impl Rng) -> Result<ComplexTensor> {
    if eps < 0.0 {
        return Err(Error::InvalidArgument(format!("noise level {eps} < 0")));
    }
    if eps == 0.0 {
        return Ok(x.clone());
    }
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(Error::DegenerateSignal(
            "cannot scale noise relative to a zero signal".into(),
        ));
    }
    let normal = StandardNormal;
    let real_only = x.is_real();
    let mut w: Vec<Complex64> = (0..x.len())
        .map(|_| {
            let re: f64 = normal.sample(rng);
            let im: f64 = if real_only { 0.0 } else { normal.sample(rng) };
            Complex64::new(re, im)
        })
        .collect();
    let w_norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = eps * x_norm / w_norm;
    for (noise, &orig) in w.iter_mut().zip(x.data()) {
        *noise = orig + *noise * scale;
    }
    ComplexTensor::new(x.dims().to_vec(), w)
}

/// Set of observed multi-indices and its complement semantics.
#[derive(Debug, Clone)]
pub struct SampleMask {
    dims: Vec<usize>,
    indices: Vec<usize>,
    observed: Vec<bool>,
}

impl SampleMask {
    /// Builds a mask from flat row-major indices; duplicates and
    /// out-of-bounds entries are rejected.
    pub fn from_indices(dims: &[usize], mut indices: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        indices.sort_unstable();
        let mut observed = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of bounds for {n} entries"
                )));
            }
            if observed[i] {
                return Err(Error::InvalidArgument(format!("duplicate index {i}")));
            }
            observed[i] = true;
        }
        Ok(Self {
            dims: dims.to_vec(),
            indices,
            observed,
        })
    }

    pub fn full(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            indices: (0..n).collect(),
            observed: vec![true; n],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_observed(&self, flat: usize) -> bool {
        self.observed[flat]
    }

    /// `P_Omega`: zeroes every unobserved entry.
    pub fn project(&self, x: &ComplexTensor) -> Result<ComplexTensor> {
        if x.dims() != self.dims.as_slice() {
            return Err(Error::Shape(format!(
                "mask dims {:?} vs tensor dims {:?}",
                self.dims,
                x.dims()
            )));
        }
        let data = x
            .data()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { v } else { Complex64::default() })
            .collect();
        ComplexTensor::new(self.dims.clone(), data)
    }

    /// Encodes the mask as a 0/1 tensor (for file interchange).
    pub fn to_tensor(&self) -> ComplexTensor {
        let data = self
            .observed
            .iter()
            .map(|&o| Complex64::new(if o { 1.0 } else { 0.0 }, 0.0))
            .collect();
        ComplexTensor::new(self.dims.clone(), data).expect("mask dims are valid")
    }

    /// Reads a mask back from a 0/1 tensor; any nonzero entry is observed.
    pub fn from_tensor(t: &ComplexTensor) -> Self {
        let indices = t
            .data()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() != 0.0)
            .map(|(i, _)| i)
            .collect();
        Self::from_indices(t.dims(), indices).expect("indices from enumerate are valid")
    }
}

/// Draws `floor(fraction * N)` observed indices uniformly without
/// replacement.
pub fn sample_mask(dims: &[usize], fraction: f64, rng: &mut impl Rng) -> Result<SampleMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} not in (0, 1]"
        )));
    }
    let n: usize = dims.iter().product();
    let count = ((fraction * n as f64).floor() as usize).min(n);
    let indices = rand::seq::index::sample(rng, n, count).into_vec();
    SampleMask::from_indices(dims, indices)
}

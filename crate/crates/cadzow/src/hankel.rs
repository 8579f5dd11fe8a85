//! The Hankelization operator `H`, its averaging pseudoinverse, and fast
//! FFT-based implicit Hankel matrix products.
//!
//! For a 1D signal `z` of length `N` and a split `L + K - 1 = N`, `H z` is
//! the `L x K` matrix with entry `(i, j) = z[i + j]`. For d-dimensional
//! signals the construction is the multi-fold (block) Hankel matrix: rows
//! are indexed row-major by `(i_1, ..., i_d)` over the `L_i` extents,
//! columns by `(j_1, ..., j_d)` over the `K_i` extents, and the entry is
//! `z[i_1 + j_1, ..., i_d + j_d]`.
//!
//! Dense materialization ([`hankelize_dense`]) costs `O(L K)` memory and is
//! meant for the baseline solver and oracle checks. The fast paths
//! ([`HankelProduct`], [`dehankelize_lowrank`]) evaluate products with `H z`
//! and skew-diagonal averages of rank-r factors through multi-dimensional
//! FFT convolutions in `O(N log N)` without forming the matrix.

use std::sync::Arc;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lowrank::FactorTriple;
use crate::tensor::{decode_index, strides_of, ComplexTensor};

/// Per-dimension window split with derived matrix dimensions and the
/// skew-diagonal multiplicity (weight) tensor.
#[derive(Clone)]
pub struct HankelPlan {
    dims: Vec<usize>,
    splits: Vec<(usize, usize)>,
    rows: usize,
    cols: usize,
    weights: Vec<u64>,
    fft_sizes: Vec<usize>,
    fft_fwd: Vec<Arc<dyn Fft<f64>>>,
    fft_inv: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for HankelPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HankelPlan")
            .field("dims", &self.dims)
            .field("splits", &self.splits)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

/// 1D weight sequence: `w_a` counts the entries on the `a`-th skew-diagonal
/// of an `L x K` matrix.
fn weights_1d(l: usize, k: usize) -> Vec<u64> {
    let n = l + k - 1;
    (0..n)
        .map(|a| (a.min(l - 1).min(k - 1).min(n - 1 - a) + 1) as u64)
        .collect()
}

impl HankelPlan {
    /// Builds a plan for the given signal extents.
    ///
    /// When `splits` is `None` the approximately-square default
    /// `L_i = ceil((N_i + 1) / 2)` is used for every dimension.
    pub fn new(dims: &[usize], splits: Option<&[(usize, usize)]>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidPlan(format!("invalid extents {dims:?}")));
        }
        let splits: Vec<(usize, usize)> = match splits {
            Some(s) => {
                if s.len() != dims.len() {
                    return Err(Error::InvalidPlan(format!(
                        "{} splits for {} dimensions",
                        s.len(),
                        dims.len()
                    )));
                }
                for (&(l, k), &n) in s.iter().zip(dims) {
                    if l == 0 || k == 0 || l + k - 1 != n {
                        return Err(Error::InvalidPlan(format!(
                            "split ({l}, {k}) inconsistent with extent {n}"
                        )));
                    }
                }
                s.to_vec()
            }
            None => dims
                .iter()
                .map(|&n| {
                    let l = (n + 2) / 2;
                    (l, n - l + 1)
                })
                .collect(),
        };

        // nD weights are products of the per-dimension 1D weight sequences.
        let per_dim: Vec<Vec<u64>> = splits.iter().map(|&(l, k)| weights_1d(l, k)).collect();
        let total: usize = dims.iter().product();
        let mut weights = vec![1u64; total];
        let strides = strides_of(dims);
        let mut coords = vec![0usize; dims.len()];
        for (flat, w) in weights.iter_mut().enumerate() {
            decode_index(flat, dims, &mut coords);
            let _ = &strides;
            *w = coords.iter().zip(&per_dim).map(|(&a, wd)| wd[a]).product();
        }

        let fft_sizes: Vec<usize> = dims.iter().map(|&n| n.next_power_of_two()).collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = fft_sizes
            .iter()
            .map(|&m| planner.plan_fft_forward(m))
            .collect();
        let fft_inv = fft_sizes
            .iter()
            .map(|&m| planner.plan_fft_inverse(m))
            .collect();

        Ok(Self {
            rows: splits.iter().map(|s| s.0).product(),
            cols: splits.iter().map(|s| s.1).product(),
            dims: dims.to_vec(),
            splits,
            weights,
            fft_sizes,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn splits(&self) -> &[(usize, usize)] {
        &self.splits
    }

    /// Total number of matrix rows `L = prod L_i`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Total number of matrix columns `K = prod K_i`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Skew-diagonal multiplicities, laid out like the signal.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Signal length `N = prod N_i`.
    pub fn signal_len(&self) -> usize {
        self.weights.len()
    }

    fn row_extents(&self) -> Vec<usize> {
        self.splits.iter().map(|s| s.0).collect()
    }

    fn col_extents(&self) -> Vec<usize> {
        self.splits.iter().map(|s| s.1).collect()
    }

    fn fft_len(&self) -> usize {
        self.fft_sizes.iter().product()
    }

    fn check_signal(&self, z: &ComplexTensor) -> Result<()> {
        if z.dims() != self.dims.as_slice() {
            return Err(Error::Shape(format!(
                "signal dims {:?} do not match plan dims {:?}",
                z.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    /// In-place FFT of an `fft_sizes`-shaped row-major buffer along every axis.
    fn fft_nd(&self, buf: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(buf.len(), self.fft_len());
        let sizes = &self.fft_sizes;
        let total = buf.len();
        let mut scratch = Vec::new();
        let mut line = Vec::new();
        for axis in 0..sizes.len() {
            let m = sizes[axis];
            if m == 1 {
                continue;
            }
            let fft = if inverse {
                &self.fft_inv[axis]
            } else {
                &self.fft_fwd[axis]
            };
            scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
            let stride: usize = sizes[axis + 1..].iter().product();
            let block = stride * m;
            if stride == 1 {
                for chunk in buf.chunks_exact_mut(m) {
                    fft.process_with_scratch(chunk, &mut scratch);
                }
            } else {
                line.resize(m, Complex64::default());
                for base in (0..total).step_by(block) {
                    for off in 0..stride {
                        for (t, slot) in line.iter_mut().enumerate() {
                            *slot = buf[base + off + t * stride];
                        }
                        fft.process_with_scratch(&mut line, &mut scratch);
                        for (t, &v) in line.iter().enumerate() {
                            buf[base + off + t * stride] = v;
                        }
                    }
                }
            }
        }
    }

    /// Embeds a `src_dims`-shaped tensor into the zero-initialized FFT buffer.
    ///
    /// With `negate` the entry at coordinates `(c_1, ..., c_d)` lands at
    /// `((-c_1) mod M_1, ...)`, which turns circular convolution into the
    /// correlation needed by the Hankel products.
    fn scatter(
        &self,
        src: &[Complex64],
        src_dims: &[usize],
        negate: bool,
        conj: bool,
    ) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.fft_len()];
        let fft_strides = strides_of(&self.fft_sizes);
        let mut coords = vec![0usize; src_dims.len()];
        for (flat, &v) in src.iter().enumerate() {
            decode_index(flat, src_dims, &mut coords);
            let mut pos = 0usize;
            for ((&c, &m), &s) in coords.iter().zip(&self.fft_sizes).zip(&fft_strides) {
                let c = if negate && c != 0 { m - c } else { c };
                pos += c * s;
            }
            buf[pos] = if conj { v.conj() } else { v };
        }
        buf
    }

    /// Extracts the `out_dims`-shaped corner of the FFT buffer.
    fn gather(&self, buf: &[Complex64], out_dims: &[usize]) -> Vec<Complex64> {
        let total: usize = out_dims.iter().product();
        let fft_strides = strides_of(&self.fft_sizes);
        let mut out = vec![Complex64::default(); total];
        let mut coords = vec![0usize; out_dims.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            decode_index(flat, out_dims, &mut coords);
            let pos: usize = coords.iter().zip(&fft_strides).map(|(&c, &s)| c * s).sum();
            *slot = buf[pos];
        }
        out
    }
}

/// Convenience wrapper over [`HankelPlan::new`].
pub fn make_plan(dims: &[usize], splits: Option<&[(usize, usize)]>) -> Result<HankelPlan> {
    HankelPlan::new(dims, splits)
}

/// Materializes `H z` as a dense `L x K` matrix.
///
/// `O(L K)` memory; intended for the baseline solver and as the oracle for
/// the fast paths.
pub fn hankelize_dense(z: &ComplexTensor, plan: &HankelPlan) -> Result<Mat<Complex64>> {
    plan.check_signal(z)?;
    let row_ext = plan.row_extents();
    let col_ext = plan.col_extents();
    let strides = z.strides();
    let data = z.data();
    let d = plan.dims.len();
    let mut ri = vec![0usize; d];
    let mut ci = vec![0usize; d];
    let mut out = Mat::zeros(plan.rows, plan.cols);
    for i in 0..plan.rows {
        decode_index(i, &row_ext, &mut ri);
        for j in 0..plan.cols {
            decode_index(j, &col_ext, &mut ci);
            let flat: usize = ri
                .iter()
                .zip(&ci)
                .zip(&strides)
                .map(|((&a, &b), &s)| (a + b) * s)
                .sum();
            out[(i, j)] = data[flat];
        }
    }
    Ok(out)
}

/// The averaging pseudoinverse: each signal entry is the mean of the matrix
/// entries whose (block, inner) index pairs sum to its multi-index.
pub fn dehankelize(z: MatRef<'_, Complex64>, plan: &HankelPlan) -> Result<ComplexTensor> {
    if z.nrows() != plan.rows || z.ncols() != plan.cols {
        return Err(Error::Shape(format!(
            "matrix is {}x{}, plan expects {}x{}",
            z.nrows(),
            z.ncols(),
            plan.rows,
            plan.cols
        )));
    }
    let row_ext = plan.row_extents();
    let col_ext = plan.col_extents();
    let strides = strides_of(&plan.dims);
    let d = plan.dims.len();
    let mut ri = vec![0usize; d];
    let mut ci = vec![0usize; d];
    // Centered accumulation: averaging deviations from the first entry seen
    // on each skew-diagonal keeps H-dagger an exact left inverse of H
    // (identical entries average to themselves with no rounding).
    let mut first = vec![Complex64::default(); plan.signal_len()];
    let mut seen = vec![false; plan.signal_len()];
    let mut acc = vec![Complex64::default(); plan.signal_len()];
    for i in 0..plan.rows {
        decode_index(i, &row_ext, &mut ri);
        for j in 0..plan.cols {
            decode_index(j, &col_ext, &mut ci);
            let flat: usize = ri
                .iter()
                .zip(&ci)
                .zip(&strides)
                .map(|((&a, &b), &s)| (a + b) * s)
                .sum();
            let v = z[(i, j)];
            if seen[flat] {
                acc[flat] += v - first[flat];
            } else {
                first[flat] = v;
                seen[flat] = true;
            }
        }
    }
    for ((v, f), &w) in acc.iter_mut().zip(&first).zip(&plan.weights) {
        *v = f + *v / w as f64;
    }
    ComplexTensor::new(plan.dims.clone(), acc)
}

/// Implicit products with `H z`, sharing one forward transform of `z`
/// across repeated matrix-vector multiplications.
pub struct HankelProduct<'p> {
    plan: &'p HankelPlan,
    z_hat: Vec<Complex64>,
}

impl<'p> HankelProduct<'p> {
    pub fn new(z: &ComplexTensor, plan: &'p HankelPlan) -> Result<Self> {
        plan.check_signal(z)?;
        let mut z_hat = plan.scatter(z.data(), &plan.dims, false, false);
        plan.fft_nd(&mut z_hat, false);
        Ok(Self { plan, z_hat })
    }

    /// `(H z) v` for a length-`K` vector, via FFT correlation.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let plan = self.plan;
        if v.len() != plan.cols {
            return Err(Error::Shape(format!(
                "vector length {} != K = {}",
                v.len(),
                plan.cols
            )));
        }
        let mut buf = plan.scatter(v, &plan.col_extents(), true, false);
        plan.fft_nd(&mut buf, false);
        let scale = 1.0 / plan.fft_len() as f64;
        for (b, &zh) in buf.iter_mut().zip(&self.z_hat) {
            *b *= zh * scale;
        }
        plan.fft_nd(&mut buf, true);
        Ok(plan.gather(&buf, &plan.row_extents()))
    }

    /// `(H z)^* u` for a length-`L` vector; adjoint of [`Self::apply`].
    pub fn apply_adjoint(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let plan = self.plan;
        if u.len() != plan.rows {
            return Err(Error::Shape(format!(
                "vector length {} != L = {}",
                u.len(),
                plan.rows
            )));
        }
        let mut buf = plan.scatter(u, &plan.row_extents(), true, true);
        plan.fft_nd(&mut buf, false);
        let scale = 1.0 / plan.fft_len() as f64;
        for (b, &zh) in buf.iter_mut().zip(&self.z_hat) {
            *b *= zh * scale;
        }
        plan.fft_nd(&mut buf, true);
        let mut out = plan.gather(&buf, &plan.col_extents());
        for v in &mut out {
            *v = v.conj();
        }
        Ok(out)
    }
}

/// `(H z) v` without materializing the matrix.
pub fn hankel_matvec(
    z: &ComplexTensor,
    v: &[Complex64],
    plan: &HankelPlan,
) -> Result<Vec<Complex64>> {
    HankelProduct::new(z, plan)?.apply(v)
}

/// `(H z)^* u` without materializing the matrix.
pub fn hankel_adjoint_matvec(
    z: &ComplexTensor,
    u: &[Complex64],
    plan: &HankelPlan,
) -> Result<Vec<Complex64>> {
    HankelProduct::new(z, plan)?.apply_adjoint(u)
}

/// Averaging pseudoinverse of `U diag(S) V^*` computed from the factors.
///
/// Per rank-one term the skew-diagonal sums are the convolution of the
/// corresponding `U` and conjugated `V` columns, accumulated in the spectral
/// domain so only one inverse transform is needed.
pub fn dehankelize_lowrank(f: &FactorTriple, plan: &HankelPlan) -> Result<ComplexTensor> {
    if f.u().nrows() != plan.rows || f.v().nrows() != plan.cols {
        return Err(Error::Shape(format!(
            "factors are {}x{} / {}x{}, plan expects L = {}, K = {}",
            f.u().nrows(),
            f.u().ncols(),
            f.v().nrows(),
            f.v().ncols(),
            plan.rows,
            plan.cols
        )));
    }
    let row_ext = plan.row_extents();
    let col_ext = plan.col_extents();
    let mut acc = vec![Complex64::default(); plan.fft_len()];
    let mut ucol = vec![Complex64::default(); plan.rows];
    let mut vcol = vec![Complex64::default(); plan.cols];
    for j in 0..f.rank() {
        for (i, slot) in ucol.iter_mut().enumerate() {
            *slot = f.u()[(i, j)];
        }
        for (i, slot) in vcol.iter_mut().enumerate() {
            *slot = f.v()[(i, j)];
        }
        let mut bu = plan.scatter(&ucol, &row_ext, false, false);
        plan.fft_nd(&mut bu, false);
        let mut bv = plan.scatter(&vcol, &col_ext, false, true);
        plan.fft_nd(&mut bv, false);
        let s = f.s()[j];
        for ((a, &u), &v) in acc.iter_mut().zip(&bu).zip(&bv) {
            *a += u * v * s;
        }
    }
    let scale = 1.0 / plan.fft_len() as f64;
    for a in &mut acc {
        *a *= scale;
    }
    plan.fft_nd(&mut acc, true);
    let mut out = plan.gather(&acc, &plan.dims);
    for (v, &w) in out.iter_mut().zip(&plan.weights) {
        *v /= w as f64;
    }
    ComplexTensor::new(plan.dims.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowrank::truncated_svd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ct1(vals: &[f64]) -> ComplexTensor {
        ComplexTensor::from_real(vec![vals.len()], vals).unwrap()
    }

    fn random_tensor(dims: &[usize], rng: &mut impl Rng) -> ComplexTensor {
        let n: usize = dims.iter().product();
        let data = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexTensor::new(dims.to_vec(), data).unwrap()
    }

    #[test]
    fn default_split_and_weights_1d() {
        let plan = make_plan(&[5], None).unwrap();
        assert_eq!(plan.splits(), &[(3, 3)]);
        assert_eq!(plan.rows(), 3);
        assert_eq!(plan.cols(), 3);
        assert_eq!(plan.weights(), &[1, 2, 3, 2, 1]);
    }

    #[test]
    fn degenerate_single_sample() {
        let plan = make_plan(&[1], None).unwrap();
        assert_eq!(plan.splits(), &[(1, 1)]);
        assert_eq!(plan.weights(), &[1]);
    }

    #[test]
    fn weights_2d_are_products() {
        let plan = make_plan(&[3, 3], None).unwrap();
        assert_eq!(plan.rows(), 4);
        assert_eq!(plan.cols(), 4);
        assert_eq!(plan.weights(), &[1, 2, 1, 2, 4, 2, 1, 2, 1]);
    }

    #[test]
    fn weights_2d_match_brute_force_enumeration() {
        // Count (block, inner) index pairs directly.
        let dims = [4usize, 5];
        let plan = make_plan(&dims, None).unwrap();
        let (l1, k1) = plan.splits()[0];
        let (l2, k2) = plan.splits()[1];
        let mut counts = vec![0u64; 20];
        for i1 in 0..l1 {
            for j1 in 0..k1 {
                for i2 in 0..l2 {
                    for j2 in 0..k2 {
                        counts[(i1 + j1) * 5 + (i2 + j2)] += 1;
                    }
                }
            }
        }
        assert_eq!(plan.weights(), counts.as_slice());
    }

    #[test]
    fn invalid_split_rejected() {
        assert!(make_plan(&[5], Some(&[(2, 2)])).is_err());
        assert!(make_plan(&[5], Some(&[(0, 6)])).is_err());
        assert!(make_plan(&[], None).is_err());
    }

    #[test]
    fn weight_sum_equals_matrix_size() {
        for dims in [vec![7], vec![4, 6], vec![3, 3, 5]] {
            let plan = make_plan(&dims, None).unwrap();
            let total: u64 = plan.weights().iter().sum();
            assert_eq!(total, (plan.rows() * plan.cols()) as u64);
        }
    }

    #[test]
    fn hankelize_1d_matches_definition() {
        let z = ct1(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let plan = make_plan(&[5], None).unwrap();
        let h = hankelize_dense(&z, &plan).unwrap();
        let expect = [[1.0, 2.0, 3.0], [2.0, 3.0, 4.0], [3.0, 4.0, 5.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)].re, expect[i][j]);
                assert_eq!(h[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn constant_signal_gives_rank_one_hankel() {
        let c = Complex64::new(2.5, -1.0);
        let z = ComplexTensor::new(vec![3], vec![c; 3]).unwrap();
        let plan = make_plan(&[3], None).unwrap();
        let h = hankelize_dense(&z, &plan).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h[(i, j)], c);
            }
        }
    }

    #[test]
    fn hankelize_2d_matches_brute_force() {
        let z = ct1(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let z = ComplexTensor::new(vec![3, 3], z.into_data()).unwrap();
        let plan = make_plan(&[3, 3], None).unwrap();
        let h = hankelize_dense(&z, &plan).unwrap();
        assert_eq!(h.nrows(), 4);
        assert_eq!(h.ncols(), 4);
        // Entry ((i1,i2),(j1,j2)) = z[i1+j1, i2+j2], rows/cols row-major.
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let val = h[(i1 * 2 + i2, j1 * 2 + j2)];
                        assert_eq!(val.re, ((i1 + j1) * 3 + (i2 + j2)) as f64);
                    }
                }
            }
        }
    }

    #[test]
    fn dehankelize_worked_example() {
        let plan = make_plan(&[5], None).unwrap();
        let z = Mat::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j + 1) as f64, 0.0));
        let out = dehankelize(z.as_ref(), &plan).unwrap();
        let expect = [1.0, 3.0, 5.0, 7.0, 9.0];
        for (v, e) in out.data().iter().zip(expect) {
            assert!((v.re - e).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn dehankelize_left_inverse_of_hankelize() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dims in [vec![9usize], vec![4, 5], vec![3, 4, 3]] {
            let z = random_tensor(&dims, &mut rng);
            let plan = make_plan(&dims, None).unwrap();
            let h = hankelize_dense(&z, &plan).unwrap();
            let back = dehankelize(h.as_ref(), &plan).unwrap();
            assert_eq!(back, z);
        }
    }

    #[test]
    fn dehankelize_2d_matches_brute_force_averaging() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = make_plan(&[3, 3], None).unwrap();
        let m = Mat::from_fn(4, 4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let out = dehankelize(m.as_ref(), &plan).unwrap();
        let mut acc = vec![Complex64::default(); 9];
        let mut cnt = vec![0f64; 9];
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let a = (i1 + j1) * 3 + (i2 + j2);
                        acc[a] += m[(i1 * 2 + i2, j1 * 2 + j2)];
                        cnt[a] += 1.0;
                    }
                }
            }
        }
        for ((o, a), c) in out.data().iter().zip(&acc).zip(&cnt) {
            assert!((o - a / *c).norm() < 1e-14);
        }
    }

    #[test]
    fn matvec_basis_vector_extracts_column() {
        let z = ct1(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let plan = make_plan(&[5], None).unwrap();
        let mut e0 = vec![Complex64::default(); 3];
        e0[0] = Complex64::new(1.0, 0.0);
        let col = hankel_matvec(&z, &e0, &plan).unwrap();
        for (c, e) in col.iter().zip([1.0, 2.0, 3.0]) {
            assert!((c.re - e).abs() < 1e-12);
            assert!(c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn matvec_row_sums() {
        let z = ct1(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let plan = make_plan(&[5], None).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 3];
        let out = hankel_matvec(&z, &ones, &plan).unwrap();
        for (c, e) in out.iter().zip([6.0, 9.0, 12.0]) {
            assert!((c.re - e).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_basis_vector_extracts_conjugate_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = random_tensor(&[7], &mut rng);
        let plan = make_plan(&[7], None).unwrap();
        let mut e0 = vec![Complex64::default(); plan.rows()];
        e0[0] = Complex64::new(1.0, 0.0);
        let out = hankel_adjoint_matvec(&z, &e0, &plan).unwrap();
        for (j, v) in out.iter().enumerate() {
            assert!((v - z.data()[j].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_products_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dims in [vec![257usize], vec![12, 17], vec![5, 6, 7]] {
            let z = random_tensor(&dims, &mut rng);
            let plan = make_plan(&dims, None).unwrap();
            let h = hankelize_dense(&z, &plan).unwrap();
            let v: Vec<Complex64> = (0..plan.cols())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let u: Vec<Complex64> = (0..plan.rows())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();

            let fast = hankel_matvec(&z, &v, &plan).unwrap();
            for (i, f) in fast.iter().enumerate() {
                let dense: Complex64 = (0..plan.cols()).map(|j| h[(i, j)] * v[j]).sum();
                assert!((f - dense).norm() <= 1e-10 * (1.0 + dense.norm()));
            }

            let fast = hankel_adjoint_matvec(&z, &u, &plan).unwrap();
            for (j, f) in fast.iter().enumerate() {
                let dense: Complex64 = (0..plan.rows()).map(|i| h[(i, j)].conj() * u[i]).sum();
                assert!((f - dense).norm() <= 1e-10 * (1.0 + dense.norm()));
            }
        }
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = [6usize, 9];
        let z = random_tensor(&dims, &mut rng);
        let plan = make_plan(&dims, None).unwrap();
        let v: Vec<Complex64> = (0..plan.cols())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let u: Vec<Complex64> = (0..plan.rows())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let hv = hankel_matvec(&z, &v, &plan).unwrap();
        let hu = hankel_adjoint_matvec(&z, &u, &plan).unwrap();
        let lhs: Complex64 = hv.iter().zip(&u).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = v.iter().zip(&hu).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() <= 1e-10 * z.norm());
    }

    #[test]
    fn lowrank_dehankelize_constant_matrix() {
        let plan = make_plan(&[5], None).unwrap();
        let s3 = 1.0 / 3f64.sqrt();
        let u = Mat::from_fn(3, 1, |_, _| Complex64::new(s3, 0.0));
        let v = Mat::from_fn(3, 1, |_, _| Complex64::new(s3, 0.0));
        let f = FactorTriple::from_parts(u, vec![3.0], v).unwrap();
        let out = dehankelize_lowrank(&f, &plan).unwrap();
        for c in out.data() {
            assert!((c.re - 1.0).abs() < 1e-12);
            assert!(c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn lowrank_dehankelize_full_rank_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z = random_tensor(&[11], &mut rng);
        let plan = make_plan(&[11], None).unwrap();
        let h = hankelize_dense(&z, &plan).unwrap();
        let f = truncated_svd(h.as_ref(), plan.cols().min(plan.rows())).unwrap();
        let back = dehankelize_lowrank(&f, &plan).unwrap();
        assert!(back.distance(&z).unwrap() <= 1e-10 * z.norm());
    }

    #[test]
    fn lowrank_dehankelize_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dims = [127usize];
        let plan = make_plan(&dims, None).unwrap();
        let (l, k) = (plan.rows(), plan.cols());
        let a = Mat::from_fn(l, 3, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let b = Mat::from_fn(k, 3, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let s = vec![3.0, 2.0, 1.0];
        let f = FactorTriple::from_parts(a.clone(), s.clone(), b.clone()).unwrap();
        let fast = dehankelize_lowrank(&f, &plan).unwrap();
        let mut dense = Mat::<Complex64>::zeros(l, k);
        for j in 0..3 {
            for r in 0..l {
                for c in 0..k {
                    dense[(r, c)] += a[(r, j)] * s[j] * b[(c, j)].conj();
                }
            }
        }
        let oracle = dehankelize(dense.as_ref(), &plan).unwrap();
        assert!(fast.distance(&oracle).unwrap() <= 1e-10 * oracle.norm());
    }

    #[test]
    fn shape_errors() {
        let plan = make_plan(&[5], None).unwrap();
        let z = ct1(&[1.0, 2.0, 3.0]);
        assert!(hankelize_dense(&z, &plan).is_err());
        let z5 = ct1(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(hankel_matvec(&z5, &[Complex64::default(); 2], &plan).is_err());
        assert!(hankel_adjoint_matvec(&z5, &[Complex64::default(); 4], &plan).is_err());
        let m = Mat::<Complex64>::zeros(2, 2);
        assert!(dehankelize(m.as_ref(), &plan).is_err());
    }
}

//! Rank-r truncation machinery: dense truncated SVD, the tangent-space
//! projection with its QR-plus-2rx2r-SVD reduction, and a randomized SVD
//! baseline.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, HankelProduct};
use crate::tensor::ComplexTensor;

/// Rank-r factorization `U diag(S) V^*` with orthonormal `U`, `V` columns
/// and nonincreasing nonnegative singular values.
#[derive(Debug, Clone)]
pub struct FactorTriple {
    u: Mat<Complex64>,
    s: Vec<f64>,
    v: Mat<Complex64>,
}

impl FactorTriple {
    /// Assembles a triple from raw parts, checking only shape consistency.
    /// Orthonormality is the caller's responsibility.
    pub fn from_parts(u: Mat<Complex64>, s: Vec<f64>, v: Mat<Complex64>) -> Result<Self> {
        if u.ncols() != s.len() || v.ncols() != s.len() {
            return Err(Error::Shape(format!(
                "factor ranks disagree: U has {} cols, V has {}, S has {}",
                u.ncols(),
                v.ncols(),
                s.len()
            )));
        }
        Ok(Self { u, s, v })
    }

    pub fn u(&self) -> MatRef<'_, Complex64> {
        self.u.as_ref()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn v(&self) -> MatRef<'_, Complex64> {
        self.v.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Dense `U diag(S) V^*`; for tests and small problems only.
    pub fn reconstruct(&self) -> Mat<Complex64> {
        let scaled = Mat::from_fn(self.u.nrows(), self.rank(), |i, j| self.u[(i, j)] * self.s[j]);
        &scaled * self.v.adjoint()
    }
}

/// Components of a tangent-space element `U G V^* + U B^* + C V^*`.
///
/// `B` and `C` have columns orthogonal to the anchor's row and column
/// subspaces respectively.
#[derive(Debug, Clone)]
pub struct TangentComponents {
    /// `U^* (H z) V`, r x r.
    pub g: Mat<Complex64>,
    /// `(I - V V^*) (H z)^* U`, K x r.
    pub b: Mat<Complex64>,
    /// `(I - U U^*) (H z) V`, L x r.
    pub c: Mat<Complex64>,
}

fn svd_of(z: MatRef<'_, Complex64>) -> Result<faer::linalg::solvers::Svd<Complex64>> {
    z.thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed to converge: {e:?}")))
}

/// Best rank-r approximation via the truncated SVD (Eckart-Young).
pub fn truncated_svd(z: MatRef<'_, Complex64>, r: usize) -> Result<FactorTriple> {
    let min_dim = z.nrows().min(z.ncols());
    if r == 0 || r > min_dim {
        return Err(Error::Rank(format!(
            "rank {} for a {}x{} matrix",
            r,
            z.nrows(),
            z.ncols()
        )));
    }
    let svd = svd_of(z)?;
    let s_full = svd.S().column_vector();
    let u = svd.U().subcols(0, r).to_owned();
    let v = svd.V().subcols(0, r).to_owned();
    let s = (0..r).map(|i| s_full[i].re).collect();
    FactorTriple::from_parts(u, s, v)
}

/// Computes `G`, `B`, `C` for the projection of `H z` onto the tangent
/// space at `anchor`, using only fast Hankel products on the `r` factor
/// columns.
pub fn tangent_components(
    anchor: &FactorTriple,
    z: &ComplexTensor,
    plan: &HankelPlan,
) -> Result<TangentComponents> {
    if anchor.u.nrows() != plan.rows() || anchor.v.nrows() != plan.cols() {
        return Err(Error::Shape(format!(
            "anchor factors {}x{} / {}x{} vs plan {}x{}",
            anchor.u.nrows(),
            anchor.u.ncols(),
            anchor.v.nrows(),
            anchor.v.ncols(),
            plan.rows(),
            plan.cols()
        )));
    }
    let r = anchor.rank();
    let hp = HankelProduct::new(z, plan)?;

    let mut hv = Mat::<Complex64>::zeros(plan.rows(), r);
    let mut col = vec![Complex64::default(); plan.cols().max(plan.rows())];
    for j in 0..r {
        for i in 0..plan.cols() {
            col[i] = anchor.v[(i, j)];
        }
        let out = hp.apply(&col[..plan.cols()])?;
        for (i, v) in out.into_iter().enumerate() {
            hv[(i, j)] = v;
        }
    }
    let mut hu = Mat::<Complex64>::zeros(plan.cols(), r);
    for j in 0..r {
        for i in 0..plan.rows() {
            col[i] = anchor.u[(i, j)];
        }
        let out = hp.apply_adjoint(&col[..plan.rows()])?;
        for (i, v) in out.into_iter().enumerate() {
            hu[(i, j)] = v;
        }
    }

    let g = anchor.u.adjoint() * &hv;
    let b = &hu - &anchor.v * (anchor.v.adjoint() * &hu);
    let c = &hv - &anchor.u * (anchor.u.adjoint() * &hv);
    Ok(TangentComponents { g, b, c })
}

/// Top-r SVD of the tangent-space element `U G V^* + U B^* + C V^*`.
///
/// `B` and `C` are QR-factored, the problem collapses to the SVD of the
/// 2r x 2r matrix `[[G, R1^*], [R2, 0]]`, and the singular vectors are
/// rotated back through the augmented orthonormal bases. Cost
/// `O(N r^2 + r^3)`.
pub fn projected_truncated_svd(
    tc: &TangentComponents,
    anchor: &FactorTriple,
    r: usize,
) -> Result<FactorTriple> {
    if r != anchor.rank() {
        return Err(Error::Rank(format!(
            "rank {} does not match anchor rank {}",
            r,
            anchor.rank()
        )));
    }
    if tc.b.nrows() != anchor.v.nrows() || tc.c.nrows() != anchor.u.nrows() {
        return Err(Error::Shape("tangent components inconsistent with anchor".into()));
    }

    // Householder QR keeps Q orthonormal even when B or C is rank deficient.
    let qr_b = tc.b.qr();
    let q1 = qr_b.compute_thin_Q();
    let r1 = qr_b.thin_R().to_owned();
    let qr_c = tc.c.qr();
    let q2 = qr_c.compute_thin_Q();
    let r2 = qr_c.thin_R().to_owned();

    let m = Mat::from_fn(2 * r, 2 * r, |i, j| {
        match (i < r, j < r) {
            (true, true) => tc.g[(i, j)],
            (true, false) => r1[(j - r, i)].conj(),
            (false, true) => r2[(i - r, j)],
            (false, false) => Complex64::default(),
        }
    });
    let svd = svd_of(m.as_ref())?;
    let s_full = svd.S().column_vector();
    let s: Vec<f64> = (0..r).map(|i| s_full[i].re).collect();

    let l = anchor.u.nrows();
    let k = anchor.v.nrows();
    let aug_u = Mat::from_fn(l, 2 * r, |i, j| {
        if j < r {
            anchor.u[(i, j)]
        } else {
            q2[(i, j - r)]
        }
    });
    let aug_v = Mat::from_fn(k, 2 * r, |i, j| {
        if j < r {
            anchor.v[(i, j)]
        } else {
            q1[(i, j - r)]
        }
    });
    let u = &aug_u * svd.U().subcols(0, r);
    let v = &aug_v * svd.V().subcols(0, r);
    FactorTriple::from_parts(u, s, v)
}

/// Dense orthogonal projection onto the tangent space at `anchor`:
/// `U U^* Z + Z V V^* - U U^* Z V V^*`. Oracle/testing path.
pub fn tangent_project_dense(z: MatRef<'_, Complex64>, anchor: &FactorTriple) -> Result<Mat<Complex64>> {
    if z.nrows() != anchor.u.nrows() || z.ncols() != anchor.v.nrows() {
        return Err(Error::Shape(format!(
            "matrix {}x{} vs anchor {}x{}",
            z.nrows(),
            z.ncols(),
            anchor.u.nrows(),
            anchor.v.nrows()
        )));
    }
    let uz = anchor.u.adjoint() * z;
    let zv = z * &anchor.v;
    let uzv = anchor.u.adjoint() * &zv;
    Ok(&anchor.u * &uz + &zv * anchor.v.adjoint() - &anchor.u * (&uzv * anchor.v.adjoint()))
}

/// Randomized rank-r approximation of `H z` from a K x 2r Gaussian sketch
/// with `q` power iterations, all products through the fast Hankel paths.
pub fn randomized_lowrank(
    z: &ComplexTensor,
    plan: &HankelPlan,
    r: usize,
    q: usize,
    rng: &mut impl Rng,
) -> Result<FactorTriple> {
    if q > 2 {
        return Err(Error::InvalidArgument(format!("power iterations q = {q} > 2")));
    }
    if r == 0 || 2 * r > plan.rows().min(plan.cols()) {
        return Err(Error::Rank(format!(
            "rank {} with sketch width {} for a {}x{} matrix",
            r,
            2 * r,
            plan.rows(),
            plan.cols()
        )));
    }
    let hp = HankelProduct::new(z, plan)?;
    let w = 2 * r;
    let normal = StandardNormal;

    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(w);
    for _ in 0..w {
        let sketch: Vec<Complex64> = (0..plan.cols())
            .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
            .collect();
        cols.push(hp.apply(&sketch)?);
    }
    for _ in 0..q {
        for c in &mut cols {
            let back = hp.apply_adjoint(c)?;
            *c = hp.apply(&back)?;
        }
    }
    let y = Mat::from_fn(plan.rows(), w, |i, j| cols[j][i]);
    let q_mat = y.qr().compute_thin_Q();

    // B = Q^* H = (H^* Q)^*, a 2r x K matrix.
    let mut qcol = vec![Complex64::default(); plan.rows()];
    let mut hq = Mat::<Complex64>::zeros(plan.cols(), w);
    for j in 0..w {
        for i in 0..plan.rows() {
            qcol[i] = q_mat[(i, j)];
        }
        let out = hp.apply_adjoint(&qcol)?;
        for (i, v) in out.into_iter().enumerate() {
            hq[(i, j)] = v;
        }
    }
    let b = hq.adjoint().to_owned();
    let svd = svd_of(b.as_ref())?;
    let s_full = svd.S().column_vector();
    let u = &q_mat * svd.U().subcols(0, r);
    let v = svd.V().subcols(0, r).to_owned();
    let s = (0..r).map(|i| s_full[i].re).collect();
    FactorTriple::from_parts(u, s, v)
}

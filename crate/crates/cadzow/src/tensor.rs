//! n-dimensional complex tensors in row-major order.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex-valued tensor of arbitrary dimension.
///
/// The signal domain object for 1D/2D/3D/... data. Data is stored row-major:
/// the last dimension varies fastest. Real signals are stored with zero
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("invalid extents {dims:?}")));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "extents {:?} imply {} entries, got {}",
                dims,
                n,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_real(dims: Vec<usize>, values: &[f64]) -> Result<Self> {
        Self::new(dims, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Row-major strides for the tensor extents.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// True when every entry has a zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|c| c.im == 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `||self - other||`, checking shapes first.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Row-major strides for a list of extents.
pub fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Decodes a flat row-major index into multi-index coordinates.
pub fn decode_index(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

//! Dense row-major tensors of 64-bit floats.
//!
//! The container is deliberately dumb: shape plus flat data, with just
//! enough accessors for the differentiation graph and the optimizer. All
//! arithmetic lives in the graph operations so every computation is
//! recorded for the backward sweep.

use crate::error::{Error, Result};

/// A dense row-major array of f64 values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from a shape and matching flat data.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Length {
                what: "tensor data",
                expected,
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    /// All-zero tensor of the given shape.
    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; numel],
        }
    }

    /// Rank-1 tensor wrapping a single value.
    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// The sole element of a one-element tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(Error::NonScalarRoot {
                shape: self.shape.clone(),
            });
        }
        Ok(self.data[0])
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Reinterprets the data under a new shape with the same element count.
    pub fn reshaped(&self, shape: Vec<usize>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::ShapeMismatch {
                op: "reshape",
                lhs: self.shape.clone(),
                rhs: shape,
            });
        }
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_element_count() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        let err = Tensor::new(vec![2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, Error::Length { expected: 6, got: 5, .. }));
    }

    #[test]
    fn item_requires_a_single_element() {
        assert_eq!(Tensor::scalar(4.25).item().unwrap(), 4.25);
        let t = Tensor::zeros(vec![2, 2]);
        let err = t.item().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 2]"), "unexpected message: {msg}");
    }

    #[test]
    fn reshape_preserves_data_and_rejects_bad_counts() {
        let t = Tensor::new(vec![2, 3], (0..6).map(|i| i as f64).collect()).unwrap();
        let r = t.reshaped(vec![3, 2]).unwrap();
        assert_eq!(r.data(), t.data());
        assert_eq!(r.shape(), &[3, 2]);
        assert!(t.reshaped(vec![4, 2]).is_err());
    }

    #[test]
    fn finiteness_probe_sees_nan_and_infinity() {
        let mut t = Tensor::zeros(vec![3]);
        assert!(t.all_finite());
        t.data_mut()[1] = f64::NAN;
        assert!(!t.all_finite());
        t.data_mut()[1] = f64::INFINITY;
        assert!(!t.all_finite());
    }
}

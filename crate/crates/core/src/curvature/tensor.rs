use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayBase, Data, Dimension};
use serde::Serialize;

/// Dense row-major tensor for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.data)
    }

    /// Index tuples in row-major order, paired with the values.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.data.iter().enumerate().map(move |(flat, &v)| {
            let mut idx = vec![0; self.shape.len()];
            let mut rest = flat;
            for (slot, &dim) in idx.iter_mut().zip(&self.shape).rev() {
                *slot = rest % dim;
                rest /= dim;
            }
            (idx, v)
        })
    }
}

impl<S: Data<Elem = f64>, D: Dimension> From<&ArrayBase<S, D>> for Tensor {
    fn from(a: &ArrayBase<S, D>) -> Self {
        Tensor {
            shape: a.shape().to_vec(),
            data: a.iter().copied().collect(),
        }
    }
}

impl From<&DMatrix<f64>> for Tensor {
    fn from(m: &DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        Tensor {
            shape: vec![r, c],
            data: (0..r)
                .flat_map(|i| (0..c).map(move |j| m[(i, j)]))
                .collect(),
        }
    }
}

impl From<&DVector<f64>> for Tensor {
    fn from(v: &DVector<f64>) -> Self {
        Tensor {
            shape: vec![v.len()],
            data: v.iter().copied().collect(),
        }
    }
}

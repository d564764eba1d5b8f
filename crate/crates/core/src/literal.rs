//! JSON matrix literal: `{ "dim": n, "re": [[..]], "im": [[..]] }`, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityMatrix, HermitianOperator};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixLiteral {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| part(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Validates the shape; a missing `im` block means a real matrix.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidInput(
                "matrix literal: dim must be >= 1".into(),
            ));
        }
        let check = |name: &str, rows: &[Vec<f64>]| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "matrix literal: `{name}` must be a {n}x{n} array"
                )));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "matrix literal: `{name}` has non-finite entries"
                )));
            }
            Ok(())
        };
        check("re", &self.re)?;
        if !self.im.is_empty() {
            check("im", &self.im)?;
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let im = if self.im.is_empty() {
                0.0
            } else {
                self.im[i][j]
            };
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

impl From<&HermitianOperator> for MatrixLiteral {
    fn from(a: &HermitianOperator) -> Self {
        Self::from_matrix(a.matrix())
    }
}

impl From<&DensityMatrix> for MatrixLiteral {
    fn from(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix())
    }
}

//! Thin least-squares wrapper over nalgebra used by the regression-based
//! forecasters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `min ||X b - y||` by SVD. Errors when the design matrix is rank
/// deficient.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let cols = x.ncols();
    let svd = x.clone().svd(true, true);
    let eps = 1e-9 * svd.singular_values.max().max(1.0);
    if svd.rank(eps) < cols {
        return Err(Error::SingularRegression(format!(
            "design matrix rank {} below {} columns",
            svd.rank(eps),
            cols
        )));
    }
    svd.solve(y, eps)
        .map_err(|e| Error::SingularRegression(e.to_string()))
}

/// Builds a design matrix from column vectors.
pub fn design(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = columns.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let ones = vec![1.0; 10];
        let y = DVector::from_iterator(10, t.iter().map(|v| 2.0 * v + 1.0));
        let x = design(&[ones, t]);
        let b = least_squares(&x, &y).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-9);
        assert!((b[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_errors() {
        let c = vec![1.0, 2.0, 3.0, 4.0];
        let x = design(&[c.clone(), c]);
        let y = DVector::from_element(4, 1.0);
        assert!(matches!(
            least_squares(&x, &y),
            Err(Error::SingularRegression(_))
        ));
    }
}

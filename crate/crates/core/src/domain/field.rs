use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};

/// One finite real value per grid node.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::invalid(format!(
                "field length {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite field value {v}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let n = grid.node_count();
        Self::new(grid, vec![c; n])
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.node_count()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.grid.as_ref() == other.grid.as_ref()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` over all nodes; fields must share the grid.
    pub fn sup_diff(&self, other: &ScalarField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "sup_diff requires fields on the same grid".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        Self::new(self.grid.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nonfinite() {
        let g = Arc::new(Grid::new_1d(0.0, 1.0, 5).unwrap());
        assert!(ScalarField::new(g.clone(), vec![0.0; 4]).is_err());
        assert!(ScalarField::new(g.clone(), vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ScalarField::new(g, vec![0.0; 5]).is_ok());
    }

    #[test]
    fn sup_diff_requires_same_grid() {
        let g1 = Arc::new(Grid::new_1d(0.0, 1.0, 5).unwrap());
        let g2 = Arc::new(Grid::new_1d(0.0, 2.0, 5).unwrap());
        let f1 = ScalarField::constant(g1, 1.0).unwrap();
        let f2 = ScalarField::constant(g2, 1.0).unwrap();
        assert!(f1.sup_diff(&f2).is_err());
    }
}

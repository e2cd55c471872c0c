use super::grid::Grid;
use crate::error::{Error, Result};

/// Dirichlet data: one value per boundary node, aligned with the ascending
/// node-index order of `Grid::boundary()`. The Lipschitz constant over
/// boundary node pairs is computed exhaustively at construction.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    values: Vec<f64>,
    lipschitz: f64,
}

impl BoundaryData {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.boundary_count() {
            return Err(Error::invalid(format!(
                "boundary data length {} does not match boundary node count {}",
                values.len(),
                grid.boundary_count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite boundary value {v}")));
        }
        let lipschitz = lipschitz_scan(grid, &values);
        Ok(BoundaryData { values, lipschitz })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.boundary_count()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.boundary().map(|idx| f(grid.coords(idx))).collect();
        Self::new(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exhaustive max of |f(x)-f(y)| / |x-y| over boundary node pairs.
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    /// Checks |f(x)-f(y)| <= l * |x-y| for every boundary pair.
    pub fn satisfies_lipschitz(&self, l: f64) -> bool {
        self.lipschitz <= l + 1e-12 * (1.0 + l)
    }

    /// Scatters boundary values into a node-length buffer; interior entries
    /// are left untouched.
    pub fn scatter(&self, grid: &Grid, buffer: &mut [f64]) {
        for (k, idx) in grid.boundary().enumerate() {
            buffer[idx] = self.values[k];
        }
    }
}

fn lipschitz_scan(grid: &Grid, values: &[f64]) -> f64 {
    let nodes: Vec<usize> = grid.boundary().collect();
    let mut best = 0.0f64;
    for (a, &ia) in nodes.iter().enumerate() {
        let ca = grid.coords(ia);
        for (&ib, &vb) in nodes[a + 1..].iter().zip(&values[a + 1..]) {
            let cb = grid.coords(ib);
            let dx = ca[0] - cb[0];
            let dy = ca[1] - cb[1];
            let dist = (dx * dx + dy * dy).sqrt();
            let ratio = (values[a] - vb).abs() / dist;
            if ratio > best {
                best = ratio;
            }
        }
    }
    best
}

/// Exhaustive boundary Lipschitz constant; free-function spelling of
/// [`BoundaryData::lipschitz_constant`].
pub fn lipschitz_constant(f: &BoundaryData, _grid: &Grid) -> f64 {
    f.lipschitz_constant()
}

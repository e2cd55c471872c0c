use crate::error::{Error, Result};

/// Uniform tensor lattice over an interval (1D) or an axis-aligned rectangle
/// (2D). Nodes are indexed x-fastest: `idx = i + j * n`.
///
/// The same node count `n >= 3` is used per axis, so a 2D grid has `n*n`
/// nodes. Spacing is `(upper - lower) / (n - 1)` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    n: usize,
    h: [f64; 2],
}

impl Grid {
    pub fn new_1d(lower: f64, upper: f64, n: usize) -> Result<Self> {
        Self::new(1, [lower, 0.0], [upper, 0.0], n)
    }

    pub fn new_2d(lower: [f64; 2], upper: [f64; 2], n: usize) -> Result<Self> {
        Self::new(2, lower, upper, n)
    }

    fn new(dim: usize, lower: [f64; 2], upper: [f64; 2], n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("need at least 3 nodes per axis, got {n}")));
        }
        let mut h = [0.0; 2];
        for a in 0..dim {
            if !lower[a].is_finite() || !upper[a].is_finite() {
                return Err(Error::invalid("grid corners must be finite"));
            }
            if !(upper[a] > lower[a]) {
                return Err(Error::invalid(format!(
                    "upper corner must exceed lower corner on axis {a}"
                )));
            }
            h[a] = (upper[a] - lower[a]) / (n - 1) as f64;
        }
        Ok(Grid { dim, lower, upper, n, h })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        match self.dim {
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    /// Largest axis spacing; the default gradient floor and slack scales.
    pub fn h_max(&self) -> f64 {
        match self.dim {
            1 => self.h[0],
            _ => self.h[0].max(self.h[1]),
        }
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        let wx = self.upper[0] - self.lower[0];
        match self.dim {
            1 => wx,
            _ => {
                let wy = self.upper[1] - self.lower[1];
                (wx * wx + wy * wy).sqrt()
            }
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && (self.dim == 1 || j < self.n));
        i + j * self.n
    }

    #[inline]
    pub fn axis_indices(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.axis_indices(idx);
        match self.dim {
            1 => [self.lower[0] + self.h[0] * i as f64, 0.0],
            _ => [
                self.lower[0] + self.h[0] * i as f64,
                self.lower[1] + self.h[1] * j as f64,
            ],
        }
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.axis_indices(idx);
        match self.dim {
            1 => i == 0 || i == self.n - 1,
            _ => i == 0 || i == self.n - 1 || j == 0 || j == self.n - 1,
        }
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        !self.is_boundary(idx)
    }

    /// Interior node indices in ascending order.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&idx| self.is_interior(idx))
    }

    /// Boundary node indices in ascending order. `BoundaryData` values are
    /// aligned with this ordering.
    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&idx| self.is_boundary(idx))
    }

    pub fn boundary_count(&self) -> usize {
        match self.dim {
            1 => 2,
            _ => 4 * (self.n - 1),
        }
    }

    /// Neighbors of a node with Euclidean distances: the two axis neighbors
    /// in 1D; the 4 axis neighbors plus 4 diagonals in 2D. Nodes on the
    /// boundary get whatever subset exists.
    pub fn neighbors(&self, idx: usize) -> Vec<(usize, f64)> {
        let (i, j) = self.axis_indices(idx);
        let mut out = Vec::with_capacity(8);
        match self.dim {
            1 => {
                if i > 0 {
                    out.push((idx - 1, self.h[0]));
                }
                if i + 1 < self.n {
                    out.push((idx + 1, self.h[0]));
                }
            }
            _ => {
                let hd = (self.h[0] * self.h[0] + self.h[1] * self.h[1]).sqrt();
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ni = i as i64 + di;
                        let nj = j as i64 + dj;
                        if ni < 0 || nj < 0 || ni >= self.n as i64 || nj >= self.n as i64 {
                            continue;
                        }
                        let d = if di == 0 {
                            self.h[1]
                        } else if dj == 0 {
                            self.h[0]
                        } else {
                            hd
                        };
                        out.push((self.index(ni as usize, nj as usize), d));
                    }
                }
            }
        }
        out
    }

    /// Grid with halved spacing over the same box: `n -> 2(n-1)+1`.
    pub fn refined(&self) -> Grid {
        Grid::new(self.dim, self.lower, self.upper, 2 * (self.n - 1) + 1)
            .expect("refining a valid grid cannot fail")
    }
}

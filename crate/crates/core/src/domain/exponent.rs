use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};

/// How an exponent field was constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentKind {
    Constant,
    ExponentialLinear,
    Tabulated,
}

/// Variable exponent p(x) > 0 together with its logarithmic gradient.
///
/// The gradient of ln p is stored explicitly so that the perturbation norm
/// driving every stability bound is exact rather than a finite-difference
/// approximation. For the analytic kinds the stored gradient agrees with
/// centered differences of ln p to O(h^2), which `grad_consistency_error`
/// measures.
#[derive(Clone, Debug)]
pub struct ExponentField {
    grid: Arc<Grid>,
    p: Vec<f64>,
    grad_ln_p: Vec<[f64; 2]>,
    kind: ExponentKind,
}

impl ExponentField {
    pub fn constant(grid: Arc<Grid>, p0: f64) -> Result<Self> {
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(Error::invalid(format!("exponent must be positive, got {p0}")));
        }
        let n = grid.node_count();
        Ok(ExponentField {
            grid,
            p: vec![p0; n],
            grad_ln_p: vec![[0.0, 0.0]; n],
            kind: ExponentKind::Constant,
        })
    }

    /// p(x) = p0 * exp(<delta, x>), so grad ln p is the constant `delta` and
    /// its sup norm is |delta| exactly.
    pub fn exponential(grid: Arc<Grid>, p0: f64, delta: [f64; 2]) -> Result<Self> {
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(Error::invalid(format!("exponent must be positive, got {p0}")));
        }
        if !delta[0].is_finite() || !delta[1].is_finite() {
            return Err(Error::invalid("perturbation vector must be finite"));
        }
        if delta == [0.0, 0.0] {
            let mut field = Self::constant(grid, p0)?;
            field.kind = ExponentKind::Constant;
            return Ok(field);
        }
        let n = grid.node_count();
        let mut p = Vec::with_capacity(n);
        for idx in 0..n {
            let c = grid.coords(idx);
            p.push(p0 * (delta[0] * c[0] + delta[1] * c[1]).exp());
        }
        Ok(ExponentField {
            grid,
            p,
            grad_ln_p: vec![delta; n],
            kind: ExponentKind::ExponentialLinear,
        })
    }

    /// Explicit tables for p and grad ln p; positivity is enforced here and
    /// re-checkable at any time via `check_positive`.
    pub fn tabulated(grid: Arc<Grid>, p: Vec<f64>, grad_ln_p: Vec<[f64; 2]>) -> Result<Self> {
        if p.len() != grid.node_count() || grad_ln_p.len() != grid.node_count() {
            return Err(Error::invalid(
                "exponent tables must have one entry per grid node",
            ));
        }
        if let Some(v) = p.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!("exponent must be positive, got {v}")));
        }
        if grad_ln_p.iter().any(|g| !g[0].is_finite() || !g[1].is_finite()) {
            return Err(Error::invalid("grad ln p table must be finite"));
        }
        Ok(ExponentField {
            grid,
            p,
            grad_ln_p,
            kind: ExponentKind::Tabulated,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> ExponentKind {
        self.kind
    }

    #[inline]
    pub fn p(&self, idx: usize) -> f64 {
        self.p[idx]
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn grad_ln_p(&self, idx: usize) -> [f64; 2] {
        self.grad_ln_p[idx]
    }

    pub fn p_min(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// max over nodes of the Euclidean norm of grad ln p.
    pub fn sup_norm_grad_ln_p(&self) -> f64 {
        self.grad_ln_p
            .iter()
            .fold(0.0f64, |m, g| m.max((g[0] * g[0] + g[1] * g[1]).sqrt()))
    }

    /// Positivity is a construction invariant; this re-checks it.
    pub fn check_positive(&self) -> bool {
        self.p.iter().all(|&v| v > 0.0 && v.is_finite())
    }

    /// Max over interior nodes of |stored grad ln p - centered FD of ln p|.
    pub fn grad_consistency_error(&self) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let n = g.n_per_axis();
        let mut worst = 0.0f64;
        for idx in g.interior() {
            let stored = self.grad_ln_p[idx];
            let fd_x = (self.p[idx + 1].ln() - self.p[idx - 1].ln()) / (2.0 * h[0]);
            let mut err = (fd_x - stored[0]).abs();
            if g.dim() == 2 {
                let fd_y = (self.p[idx + n].ln() - self.p[idx - n].ln()) / (2.0 * h[1]);
                err = err.max((fd_y - stored[1]).abs());
            }
            worst = worst.max(err);
        }
        worst
    }
}

/// Canonical perturbation family for the stability experiments:
/// p(x) = p0 * exp(<delta, x>) with grad ln p identically `delta`.
pub fn make_exponential_exponent(grid: Arc<Grid>, p0: f64, delta: [f64; 2]) -> Result<ExponentField> {
    ExponentField::exponential(grid, p0, delta)
}

//! Pointwise discrete evaluation of the infinity-Laplacian, the
//! variable-exponent drift term and their sum.
//!
//! These are measurement operators built from centered differences; the
//! monotone update rules used for solving live in `solvers`. The logarithm
//! in the drift term is evaluated without regularization: the product
//! s^3 ln s is continuous at s = 0 and the zero-gradient branch returns an
//! exact 0, so no NaN or infinity can escape for finite fields.

use crate::domain::{ExponentField, ScalarField};
use crate::error::{Error, Result};

/// All pointwise quantities evaluated at one interior node.
#[derive(Clone, Copy, Debug)]
pub struct OperatorSample {
    pub node: usize,
    pub gradient: [f64; 2],
    pub grad_norm: f64,
    pub infinity_laplacian: f64,
    pub variable_term: f64,
    pub total: f64,
}

fn require_interior(u: &ScalarField, node: usize) -> Result<()> {
    if node >= u.grid().node_count() {
        return Err(Error::invalid(format!("node {node} out of range")));
    }
    if u.grid().is_boundary(node) {
        return Err(Error::NotInterior(node));
    }
    Ok(())
}

/// Centered difference gradient, (u(x + h e) - u(x - h e)) / 2h per axis.
pub fn gradient_centered(u: &ScalarField, node: usize) -> Result<[f64; 2]> {
    require_interior(u, node)?;
    Ok(gradient_unchecked(u, node))
}

#[inline]
fn gradient_unchecked(u: &ScalarField, node: usize) -> [f64; 2] {
    let g = u.grid();
    let h = g.spacing();
    let v = u.values();
    let gx = (v[node + 1] - v[node - 1]) / (2.0 * h[0]);
    if g.dim() == 1 {
        [gx, 0.0]
    } else {
        let n = g.n_per_axis();
        let gy = (v[node + n] - v[node - n]) / (2.0 * h[1]);
        [gx, gy]
    }
}

/// Sum over i,j of u_xi u_xj u_xixj with centered first and second
/// differences; the mixed derivative uses the 4-point centered stencil.
pub fn infinity_laplacian(u: &ScalarField, node: usize) -> Result<f64> {
    require_interior(u, node)?;
    Ok(infinity_laplacian_unchecked(u, node))
}

#[inline]
fn infinity_laplacian_unchecked(u: &ScalarField, node: usize) -> f64 {
    let g = u.grid();
    let h = g.spacing();
    let v = u.values();
    let grad = gradient_unchecked(u, node);
    let uxx = (v[node + 1] - 2.0 * v[node] + v[node - 1]) / (h[0] * h[0]);
    if g.dim() == 1 {
        return grad[0] * grad[0] * uxx;
    }
    let n = g.n_per_axis();
    let uyy = (v[node + n] - 2.0 * v[node] + v[node - n]) / (h[1] * h[1]);
    let uxy = (v[node + 1 + n] - v[node + 1 - n] - v[node - 1 + n] + v[node - 1 - n])
        / (4.0 * h[0] * h[1]);
    grad[0] * grad[0] * uxx + 2.0 * grad[0] * grad[1] * uxy + grad[1] * grad[1] * uyy
}

/// The drift summand |grad u|^2 ln|grad u| <grad u, grad ln p>; exactly 0
/// when the centered gradient vanishes.
pub fn variable_term(u: &ScalarField, pfield: &ExponentField, node: usize) -> Result<f64> {
    require_interior(u, node)?;
    check_same_grid(u, pfield)?;
    Ok(variable_term_unchecked(u, pfield, node))
}

#[inline]
fn variable_term_unchecked(u: &ScalarField, pfield: &ExponentField, node: usize) -> f64 {
    let grad = gradient_unchecked(u, node);
    let norm2 = grad[0] * grad[0] + grad[1] * grad[1];
    if norm2 == 0.0 {
        return 0.0;
    }
    let norm = norm2.sqrt();
    let q = pfield.grad_ln_p(node);
    norm2 * norm.ln() * (grad[0] * q[0] + grad[1] * q[1])
}

fn check_same_grid(u: &ScalarField, pfield: &ExponentField) -> Result<()> {
    if u.grid().as_ref() != pfield.grid().as_ref() {
        return Err(Error::GridMismatch(
            "field and exponent live on different grids".into(),
        ));
    }
    Ok(())
}

/// Full variable-exponent operator at one node; `total` is exactly the sum
/// of the two parts.
pub fn infinity_x_laplacian(
    u: &ScalarField,
    pfield: &ExponentField,
    node: usize,
) -> Result<OperatorSample> {
    require_interior(u, node)?;
    check_same_grid(u, pfield)?;
    let gradient = gradient_unchecked(u, node);
    let grad_norm = (gradient[0] * gradient[0] + gradient[1] * gradient[1]).sqrt();
    let inf = infinity_laplacian_unchecked(u, node);
    let var = variable_term_unchecked(u, pfield, node);
    Ok(OperatorSample {
        node,
        gradient,
        grad_norm,
        infinity_laplacian: inf,
        variable_term: var,
        total: inf + var,
    })
}

/// Sup over interior nodes of |infinity_x_laplacian.total|; the residual a
/// candidate solution leaves in the equation.
pub fn sup_interior_residual(u: &ScalarField, pfield: &ExponentField) -> Result<f64> {
    check_same_grid(u, pfield)?;
    let mut worst = 0.0f64;
    for node in u.grid().interior() {
        let s = infinity_x_laplacian(u, pfield, node)?;
        worst = worst.max(s.total.abs());
    }
    Ok(worst)
}

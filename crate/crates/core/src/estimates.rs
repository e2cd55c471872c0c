//! Evaluators for the stability bounds, the near-optimal epsilon selections
//! behind them, and the doubling-of-variables probe.
//!
//! The generic constants in the bounds are not pinned by any theory; they
//! enter through [`BoundParams`], whose values are calibrated once from
//! measured data by the harness and then held fixed. What the evaluators
//! guarantee is the *shape*: a perturbation bound
//! C1 g + C2 g^(1/5) |ln(c g)| for the one-exponent comparison, and
//! Const / |ln d|^kappa for the two-exponent one.

use serde::{Deserialize, Serialize};

use crate::domain::ScalarField;
use crate::error::{Error, Result};
use crate::numeric;

/// Constants entering the bound evaluators. `c` is the generic constant with
/// C_eps = c (1 + eps); `a` multiplies the linear-in-epsilon term (the
/// domain-diameter coefficient of the optimization); `scale` is the single
/// calibrated multiplier for the one-exponent bound; `two_exp_const` and
/// `kappa` parameterize the two-exponent bound; `b` is the measured sandwich
/// constant.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundParams {
    pub c: f64,
    pub a: f64,
    pub f_sup: f64,
    pub f_lip: f64,
    pub kappa: f64,
    pub b: f64,
    pub scale: f64,
    pub two_exp_const: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            c: 1.0,
            a: 1.0,
            f_sup: 1.0,
            f_lip: 1.0,
            kappa: 2.0,
            b: 1.0,
            scale: 1.0,
            two_exp_const: 1.0,
        }
    }
}

/// The doubling comparison term:
/// C_eps^3 |u2+|^2 eps^-4 ln(C_eps / eps) |grad ln p1| with C_eps = c(1+eps).
pub fn doubling_bound(epsilon: f64, c: f64, u2plus_sup: f64, grad_ln_p_sup: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("doubling_bound needs eps > 0 and c > 0"));
    }
    if !(u2plus_sup >= 0.0) || !(grad_ln_p_sup >= 0.0) {
        return Err(Error::invalid("norms must be nonnegative"));
    }
    let c_eps = c * (1.0 + epsilon);
    if !(epsilon < c_eps) {
        return Err(Error::invalid(format!(
            "need eps < C_eps for a positive logarithm (eps {epsilon}, C_eps {c_eps})"
        )));
    }
    Ok(c_eps.powi(3) * u2plus_sup * u2plus_sup * epsilon.powi(-4) * (c_eps / epsilon).ln()
        * grad_ln_p_sup)
}

/// Near-optimal epsilon for the one-exponent bound, with the majorant value
/// at that epsilon.
///
/// For a <= (c+1)^5 * grad the balance has no root below 1 and eps = 1 gives
/// a majorant linear in grad; otherwise eps solves
/// ((c + eps)/eps)^5 grad = a by bisection, which yields the
/// grad^(1/5) |ln| majorant. The two branches join continuously.
pub fn choose_epsilon_one_exp(grad_ln_p_sup: f64, a: f64, c: f64) -> Result<(f64, f64)> {
    if !(grad_ln_p_sup > 0.0) || !(a > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("choose_epsilon_one_exp needs positive arguments"));
    }
    let switch = (c + 1.0).powi(5) * grad_ln_p_sup;
    if a <= switch {
        let majorant = (c + 1.0).powi(5) * (1.0 + (c + 1.0).ln()) * grad_ln_p_sup;
        return Ok((1.0, majorant));
    }
    let ratio = a / grad_ln_p_sup;
    let eps = numeric::bisect(1e-30, 1.0, |e| ((c + e) / e).powi(5) * grad_ln_p_sup - a)?;
    let majorant = eps * a * (1.0 + ratio.ln() / 5.0);
    Ok((eps, majorant))
}

/// The one-exponent stability bound assembled from the epsilon selection and
/// the doubling term: scale * (2 * doubling_bound + eps * a). Returns 0 at
/// grad = 0 (the constant-exponent limit).
pub fn one_exponent_bound(grad_ln_p_sup: f64, params: &BoundParams) -> Result<f64> {
    if !(grad_ln_p_sup >= 0.0) {
        return Err(Error::invalid("grad norm must be nonnegative"));
    }
    if grad_ln_p_sup == 0.0 {
        return Ok(0.0);
    }
    let (eps, _) = choose_epsilon_one_exp(grad_ln_p_sup, params.a, params.c)?;
    let u2plus_sup = params.f_sup + eps * params.a;
    let doubling = doubling_bound(eps, params.c, u2plus_sup, grad_ln_p_sup)?;
    Ok(params.scale * (2.0 * doubling + eps * params.a))
}

/// The two-exponent bound Const / |ln d|^kappa for 0 < d < 1.
pub fn two_exponent_bound(delta_grad: f64, params: &BoundParams) -> Result<f64> {
    if !(delta_grad > 0.0 && delta_grad < 1.0) {
        return Err(Error::invalid(format!(
            "two-exponent bound needs 0 < delta < 1, got {delta_grad}"
        )));
    }
    Ok(params.two_exp_const / (-delta_grad.ln()).powf(params.kappa))
}

/// Epsilon for the two-exponent comparison: the root of
/// exp(K / eps) * delta = eps^(kappa + 2) with K = (1 + grad_p2) * v2_sup.
/// Asymptotically eps ~ K / |ln delta| as delta -> 0.
pub fn choose_epsilon_two_exp(
    delta_grad: f64,
    grad_ln_p2_sup: f64,
    v2_sup: f64,
    kappa: f64,
) -> Result<f64> {
    if !(delta_grad > 0.0 && delta_grad < 1.0) {
        return Err(Error::invalid("need 0 < delta < 1"));
    }
    if !(kappa > 0.0) || !(grad_ln_p2_sup >= 0.0) || !(v2_sup >= 0.0) {
        return Err(Error::invalid("need kappa > 0 and nonnegative norms"));
    }
    let k = (1.0 + grad_ln_p2_sup) * v2_sup;
    if k == 0.0 {
        // degenerate: the exponential factor is identically 1
        return Ok(delta_grad.powf(1.0 / (kappa + 2.0)));
    }
    let g = |eps: f64| (k / eps).exp() * delta_grad - eps.powf(kappa + 2.0);
    if !(g(1.0) < 0.0) {
        return Err(Error::NoRoot(format!(
            "exp(K) * delta = {:e} >= 1: the perturbation delta = {delta_grad:e} is too large \
             for this balance; use a smaller delta",
            k.exp() * delta_grad
        )));
    }
    numeric::bisect(1e-12, 1.0, g)
}

/// Exhaustive doubling-of-variables probe result.
#[derive(Clone, Copy, Debug)]
pub struct DoublingResult {
    pub j: f64,
    /// max over node pairs of u1(x) - w2(y) - (j/2)|x - y|^2.
    pub m_j: f64,
    pub x_index: usize,
    pub y_index: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// max over nodes of u1 - w2 (the diagonal), so m_j >= sigma always.
    pub sigma: f64,
    pub distance: f64,
    pub j_dist: f64,
}

/// Pair cap: the probe is a verification instrument, not a production path.
const MAX_PAIRS: usize = 100_000;

/// Maximizes u1(x) - w2(y) - (j/2)|x-y|^2 over all node pairs by exhaustive
/// scan; ties resolve to the lexicographically smallest index pair.
pub fn doubling_probe(u1: &ScalarField, w2: &ScalarField, j: f64) -> Result<DoublingResult> {
    if !u1.same_grid(w2) {
        return Err(Error::GridMismatch(
            "doubling probe needs both fields on one grid".into(),
        ));
    }
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::invalid("j must be positive and finite"));
    }
    let grid = u1.grid();
    let n = grid.node_count();
    if n * n > MAX_PAIRS {
        return Err(Error::invalid(format!(
            "probe capped at {MAX_PAIRS} pairs; grid has {} (= {n}^2)",
            n * n
        )));
    }
    let coords: Vec<[f64; 2]> = (0..n).map(|i| grid.coords(i)).collect();
    let a = u1.values();
    let b = w2.values();
    let mut best = f64::NEG_INFINITY;
    let mut bx = 0usize;
    let mut by = 0usize;
    let mut sigma = f64::NEG_INFINITY;
    for x in 0..n {
        sigma = sigma.max(a[x] - b[x]);
        let cx = coords[x];
        for y in 0..n {
            let dx = cx[0] - coords[y][0];
            let dy = cx[1] - coords[y][1];
            let val = a[x] - b[y] - 0.5 * j * (dx * dx + dy * dy);
            if val > best {
                best = val;
                bx = x;
                by = y;
            }
        }
    }
    let dx = coords[bx][0] - coords[by][0];
    let dy = coords[bx][1] - coords[by][1];
    let distance = (dx * dx + dy * dy).sqrt();
    Ok(DoublingResult {
        j,
        m_j: best,
        x_index: bx,
        y_index: by,
        x: coords[bx],
        y: coords[by],
        sigma,
        distance,
        j_dist: j * distance,
    })
}

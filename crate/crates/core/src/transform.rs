//! The approximation of the identity g(t) = ln(1 + A(exp(alpha t) - 1)) / alpha
//! and the strict-supersolution margins it buys.
//!
//! For A > 1 the transform bends a supersolution into a strict one; the
//! margin mu comes in two flavors: the fixed-alpha form and the
//! variable-exponent form where alpha is tied to 1/epsilon. Two printed
//! inequalities in the source material for g and g' do not hold as written
//! (they are dimensionally inconsistent with g being near the identity); the
//! corrected forms, which the construction actually uses, are:
//!
//! * 0 < g(t) - t < (ln A)/alpha <= (A - 1)/alpha   for t > 0, A > 1
//! * (A-1) e^(-alpha t) / A < g'(t) - 1 <= A - 1
//!
//! together with the exact identity g''/g' = -alpha (g' - 1).

use crate::domain::ScalarField;
use crate::error::{Error, Result};
use crate::operators;

/// Parameters (A, alpha) of the transform; A = 1 is the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformParams {
    a: f64,
    alpha: f64,
}

impl TransformParams {
    pub fn new(a: f64, alpha: f64) -> Result<Self> {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Error::invalid(format!("transform needs A >= 1, got {a}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("transform needs alpha > 0, got {alpha}")));
        }
        Ok(TransformParams { a, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The absorption argument that keeps constants tame needs A <= 2; larger
    /// values are permitted but worth a warning upstream.
    pub fn exceeds_absorption_range(&self) -> bool {
        self.a > 2.0
    }
}

/// g(t) for t >= 0. Strictly increasing, g(t) >= t, g(0) = 0.
/// For alpha * t > 30 the shifted log form avoids overflow.
pub fn g_eval(t: f64, prm: &TransformParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("g is applied to t >= 0, got {t}")));
    }
    if prm.a == 1.0 {
        return Ok(t); // the formula collapses to the identity
    }
    let x = prm.alpha * t;
    if x > 30.0 {
        // ln(1 + A(e^x - 1)) = x + ln(A - (A - 1) e^-x)
        Ok(t + (prm.a - (prm.a - 1.0) * (-x).exp()).ln() / prm.alpha)
    } else {
        Ok((prm.a * x.exp_m1()).ln_1p() / prm.alpha)
    }
}

/// (g'(t), g''(t)); g'' comes from the identity g''/g' = -alpha (g' - 1).
pub fn g_derivatives(t: f64, prm: &TransformParams) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("g is applied to t >= 0, got {t}")));
    }
    if prm.a == 1.0 {
        return Ok((1.0, 0.0));
    }
    let x = prm.alpha * t;
    let g1 = if x > 30.0 {
        prm.a / (prm.a - (prm.a - 1.0) * (-x).exp())
    } else {
        prm.a * x.exp() / (1.0 + prm.a * x.exp_m1())
    };
    let g2 = -prm.alpha * (g1 - 1.0) * g1;
    Ok((g1, g2))
}

/// Nodewise g; the input must be nonnegative (shift by a constant first;
/// the comparison arguments always allow it).
pub fn g_apply(v: &ScalarField, prm: &TransformParams) -> Result<ScalarField> {
    if let Some(bad) = v.values().iter().find(|x| **x < 0.0) {
        return Err(Error::invalid(format!(
            "g_apply needs a nonnegative field (found {bad}); shift by a constant first"
        )));
    }
    let vals: Result<Vec<f64>> = v.values().iter().map(|&t| g_eval(t, prm)).collect();
    ScalarField::new(v.grid().clone(), vals?)
}

/// Strict-supersolution margin with free alpha:
/// mu = alpha (A-1) A^-1 exp(-alpha v_sup) eps^4.
pub fn mu_strict(prm: &TransformParams, epsilon: f64, v_sup: f64) -> Result<f64> {
    if !(prm.a > 1.0) {
        return Err(Error::invalid("mu needs A > 1 (A = 1 leaves no margin)"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("mu needs eps > 0"));
    }
    if !(v_sup >= 0.0) {
        return Err(Error::invalid("v_sup must be nonnegative"));
    }
    Ok(prm.alpha * (prm.a - 1.0) / prm.a * (-prm.alpha * v_sup).exp() * epsilon.powi(4))
}

/// The normalized form with alpha = 1 / v_sup:
/// mu = (A-1) eps^4 / (A e v_sup).
pub fn mu_strict_normalized(a: f64, epsilon: f64, v_sup: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::invalid("mu needs A > 1"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("mu needs eps > 0"));
    }
    if !(v_sup > 0.0) {
        return Err(Error::invalid("the normalized form needs v_sup > 0"));
    }
    Ok((a - 1.0) * epsilon.powi(4) / (a * std::f64::consts::E * v_sup))
}

/// Variable-exponent margin and its implied alpha. Fixing
/// alpha = (1 + grad_ln_p_sup) / eps makes the bracket in the drifted
/// calculation equal -1, which yields
/// mu = eps^3 (A-1) A^-1 exp(-(1 + grad_ln_p_sup) v_sup / eps).
#[derive(Clone, Copy, Debug)]
pub struct TwoExponentMargin {
    pub mu: f64,
    pub alpha: f64,
}

pub fn mu_strict_two_exponent(a: f64, epsilon: f64, v_sup: f64, grad_ln_p_sup: f64) -> Result<TwoExponentMargin> {
    if !(a > 1.0) {
        return Err(Error::invalid("mu needs A > 1"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("mu needs eps > 0"));
    }
    if !(v_sup >= 0.0) || !(grad_ln_p_sup >= 0.0) {
        return Err(Error::invalid("norms must be nonnegative"));
    }
    let alpha = (1.0 + grad_ln_p_sup) / epsilon;
    let mu = epsilon.powi(3) * (a - 1.0) / a * (-(1.0 + grad_ln_p_sup) * v_sup / epsilon).exp();
    Ok(TwoExponentMargin { mu, alpha })
}

/// Result of checking that a field is a discrete strict supersolution.
#[derive(Clone, Debug)]
pub struct SupersolutionReport {
    /// Max over interior nodes of the discrete infinity-Laplacian.
    pub max_interior_value: f64,
    /// The pass threshold, -mu + slack.
    pub threshold: f64,
    pub passed: bool,
    /// Nodes where the operator exceeds the threshold, with their values.
    pub violations: Vec<(usize, f64)>,
}

/// Discrete surrogate for "Delta_inf w <= -mu in the viscosity sense":
/// evaluates the centered discrete infinity-Laplacian at every interior node
/// and requires max <= -mu + slack.
pub fn strict_supersolution_check(
    w: &ScalarField,
    mu: f64,
    slack: f64,
) -> Result<SupersolutionReport> {
    if !(mu > 0.0) {
        return Err(Error::invalid("mu must be positive"));
    }
    let threshold = -mu + slack;
    let mut max_val = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for node in w.grid().interior() {
        let v = operators::infinity_laplacian(w, node)?;
        if v > max_val {
            max_val = v;
        }
        if v > threshold {
            violations.push((node, v));
        }
    }
    Ok(SupersolutionReport {
        max_interior_value: max_val,
        threshold,
        passed: violations.is_empty(),
        violations,
    })
}

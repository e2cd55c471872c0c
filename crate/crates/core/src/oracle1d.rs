//! Exact 1D two-point solutions via the first integral |u'(x)|^p(x) = C.
//!
//! On an interval the solution with u(a) = fa, u(b) = fb has
//! u'(x) = sign * C^(1/p(x)) with the constant C fixed by matching the
//! boundary gap: the map C -> integral of C^(1/p) is strictly increasing, so
//! C is found by bisection with Simpson quadrature. This is the independent
//! ground truth against which the grid solvers are validated.

use std::sync::Arc;

use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::numeric;

/// Exact solution sampled on a uniform grid.
#[derive(Clone, Debug)]
pub struct FirstIntegralSolution {
    /// The stream-line constant C >= 0.
    pub c: f64,
    /// Sign of u': -1, 0 or +1.
    pub sign: i8,
    /// Sample abscissae (the grid nodes).
    pub nodes: Vec<f64>,
    /// u at the sample abscissae.
    pub values: Vec<f64>,
    pub field: ScalarField,
}

/// Solves the two-point problem u(a) = fa, u(b) = fb for a positive
/// continuous exponent p on [a, b].
pub fn solve_first_integral(
    p: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    n_nodes: usize,
    quad_tol: f64,
) -> Result<FirstIntegralSolution> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("need a finite interval with a < b"));
    }
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::invalid("boundary values must be finite"));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let grid = Arc::new(Grid::new_1d(a, b, n_nodes)?);
    let nodes: Vec<f64> = (0..n_nodes).map(|i| grid.coords(i)[0]).collect();

    if fa == fb {
        let field = ScalarField::constant(grid, fa)?;
        return Ok(FirstIntegralSolution {
            c: 0.0,
            sign: 0,
            nodes,
            values: field.values().to_vec(),
            field,
        });
    }

    // Presample p for positivity and for the bracketing exponent range.
    let samples = 1024usize;
    let mut p_min = f64::INFINITY;
    let mut p_max = f64::NEG_INFINITY;
    for k in 0..=samples {
        let x = a + (b - a) * k as f64 / samples as f64;
        let v = p(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "exponent must be positive on [a, b]; p({x}) = {v}"
            )));
        }
        p_min = p_min.min(v);
        p_max = p_max.max(v);
    }

    let target = (fb - fa).abs();
    let sign: i8 = if fb > fa { 1 } else { -1 };
    let gap_len = b - a;
    let mean_slope = target / gap_len;

    let integral = |c: f64| -> Result<f64> {
        let lnc = c.ln();
        numeric::integrate(|x| (lnc / p(x)).exp(), a, b, (quad_tol * 0.1).min(1e-13))
    };

    // Constant-exponent solutions bound C between m^p_min and m^p_max.
    let mut lo = mean_slope.powf(p_min).min(mean_slope.powf(p_max));
    let mut hi = mean_slope.powf(p_min).max(mean_slope.powf(p_max));
    if lo == hi {
        lo *= 0.5;
        hi *= 2.0;
    }
    let mut widen = 0;
    while integral(lo)? > target {
        lo *= 0.5;
        widen += 1;
        if widen > 200 {
            return Err(Error::NoRoot("lower bracket for C not found".into()));
        }
    }
    widen = 0;
    while integral(hi)? < target {
        hi *= 2.0;
        widen += 1;
        if widen > 200 {
            return Err(Error::NoRoot("upper bracket for C not found".into()));
        }
    }

    // Bisection is deterministic and the map is strictly increasing in C.
    let mut clo = lo;
    let mut chi = hi;
    for _ in 0..numeric::BISECT_ITERATIONS {
        let mid = 0.5 * (clo + chi);
        if mid <= clo || mid >= chi {
            break;
        }
        if integral(mid)? < target {
            clo = mid;
        } else {
            chi = mid;
        }
    }
    let c = 0.5 * (clo + chi);

    // Cumulative integral cell by cell, then scatter onto the nodes.
    let lnc = c.ln();
    let cell_tol = (quad_tol / (n_nodes - 1) as f64).min(1e-13);
    let mut values = Vec::with_capacity(n_nodes);
    values.push(fa);
    let mut acc = 0.0;
    for k in 1..n_nodes {
        let cell =
            numeric::integrate(|x| (lnc / p(x)).exp(), nodes[k - 1], nodes[k], cell_tol)?;
        acc += cell;
        values.push(fa + f64::from(sign) * acc);
    }
    let field = ScalarField::new(grid, values.clone())?;
    Ok(FirstIntegralSolution {
        c,
        sign,
        nodes,
        values,
        field,
    })
}

/// Exact sup-norm distance between the solutions for two exponents with the
/// same boundary values, evaluated on `samples` uniform points.
pub fn stability_1d_exact(
    p1: impl Fn(f64) -> f64,
    p2: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    samples: usize,
    quad_tol: f64,
) -> Result<f64> {
    let u1 = solve_first_integral(p1, a, b, fa, fb, samples, quad_tol)?;
    let u2 = solve_first_integral(p2, a, b, fa, fb, samples, quad_tol)?;
    u1.field.sup_diff(&u2.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_boundary_values_give_constant() {
        let sol = solve_first_integral(|_| 2.0, 0.0, 1.0, 0.7, 0.7, 17, 1e-12).unwrap();
        assert_eq!(sol.c, 0.0);
        assert_eq!(sol.sign, 0);
        assert!(sol.values.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn unit_mean_slope_forces_c_one_for_any_exponent() {
        // fb - fa = b - a makes C = 1 and u affine regardless of p
        let sol =
            solve_first_integral(|x| 2.0 + x.sin().abs(), 0.0, 1.0, 0.25, 1.25, 33, 1e-12)
                .unwrap();
        assert!((sol.c - 1.0).abs() < 1e-9);
        for (x, v) in sol.nodes.iter().zip(&sol.values) {
            assert!((v - (0.25 + x)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_exponent_gives_power_constant_and_affine_solution() {
        let p0 = 3.0;
        let sol = solve_first_integral(|_| p0, 0.0, 2.0, 0.0, 1.0, 33, 1e-12).unwrap();
        let m: f64 = 0.5; // |fb-fa|/(b-a)
        assert!((sol.c - m.powf(p0)).abs() < 1e-10);
        for (x, v) in sol.nodes.iter().zip(&sol.values) {
            assert!((v - 0.5 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn affine_exponent_bisection_residual() {
        let p = |x: f64| 2.0 + x;
        let sol = solve_first_integral(p, 0.0, 1.0, 0.0, 0.5, 65, 1e-12).unwrap();
        // residual of the matching condition
        let lnc = sol.c.ln();
        let total = numeric::integrate(|x| (lnc / p(x)).exp(), 0.0, 1.0, 1e-14).unwrap();
        assert!((total - 0.5).abs() < 1e-11, "residual {}", (total - 0.5).abs());
        // endpoint hit
        assert!((sol.values[64] - 0.5).abs() < 1e-10);
        // monotone increasing
        for w in sol.values.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn swapping_endpoints_reflects_values() {
        let p = |x: f64| 2.0 + x;
        let fwd = solve_first_integral(p, 0.0, 1.0, 0.1, 0.6, 33, 1e-12).unwrap();
        let bwd = solve_first_integral(p, 0.0, 1.0, 0.6, 0.1, 33, 1e-12).unwrap();
        assert_eq!(fwd.sign, 1);
        assert_eq!(bwd.sign, -1);
        assert!((fwd.c - bwd.c).abs() < 1e-12);
        for (vf, vb) in fwd.values.iter().zip(&bwd.values) {
            assert!((vf + vb - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_exponents_have_zero_distance() {
        let d = stability_1d_exact(|_| 2.0, |_| 2.0, 0.0, 1.0, 0.0, 0.5, 65, 1e-12).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn unit_slope_degeneracy_kills_the_difference() {
        let d = stability_1d_exact(
            |_| 2.0,
            |x| 2.0 + 0.4 * x,
            0.0,
            1.0,
            0.0,
            1.0,
            65,
            1e-12,
        )
        .unwrap();
        assert!(d < 1e-9, "both solutions are the same line, got {d}");
    }

    #[test]
    fn exact_differences_shrink_with_the_perturbation() {
        let mut prev = f64::INFINITY;
        for delta in [0.4, 0.2, 0.1, 0.05] {
            let d = stability_1d_exact(
                |_| 2.0,
                move |x| 2.0 + delta * x,
                0.0,
                1.0,
                0.0,
                0.5,
                129,
                1e-12,
            )
            .unwrap();
            assert!(d > 0.0 && d < prev, "delta {delta}: {d} !< {prev}");
            prev = d;
        }
    }

    #[test]
    fn sampled_oracle_residual_decreases_under_refinement() {
        // the exact solution satisfies the equation, so the discrete
        // pointwise operator applied to its samples must shrink with h
        use crate::domain::ExponentField;
        let mut prev = f64::INFINITY;
        for n in [65usize, 129, 257] {
            let sol = solve_first_integral(|x| 2.0 + x, 0.0, 1.0, 0.0, 0.5, n, 1e-12).unwrap();
            let grid = sol.field.grid().clone();
            let p: Vec<f64> = (0..n).map(|i| 2.0 + grid.coords(i)[0]).collect();
            let grad: Vec<[f64; 2]> = (0..n)
                .map(|i| [1.0 / (2.0 + grid.coords(i)[0]), 0.0])
                .collect();
            let pf = ExponentField::tabulated(grid, p, grad).unwrap();
            let residual = crate::operators::sup_interior_residual(&sol.field, &pf).unwrap();
            assert!(
                residual < prev / 1.5,
                "residual {residual} at n {n} not shrinking (prev {prev})"
            );
            prev = residual;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn c_increases_with_the_boundary_gap(gap1 in 0.05f64..0.4, extra in 0.05f64..0.5) {
            let gap2 = gap1 + extra;
            let p = |x: f64| 2.0 + 0.5 * x;
            let s1 = solve_first_integral(p, 0.0, 1.0, 0.0, gap1, 17, 1e-11).unwrap();
            let s2 = solve_first_integral(p, 0.0, 1.0, 0.0, gap2, 17, 1e-11).unwrap();
            prop_assert!(s2.c > s1.c);
        }
    }
}

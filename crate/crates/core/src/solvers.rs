//! Dirichlet solvers for the infinity-Laplacian and its variable-exponent
//! form, plus the upper and lower auxiliary equations that sandwich the
//! solution between eikonal-constrained super- and subsolutions.
//!
//! Every solver is a Jacobi (simultaneous) fixed-point iteration of a
//! monotone node update over the axis-and-diagonal neighbor set:
//!
//! * midpoint:  u(x) <- (max_N u + min_N u) / 2
//! * drift:     the variable-exponent form solves
//!              midpoint - u + (h^2/2) ln(max(|grad u|, floor)) <grad u, grad ln p> = 0
//!              with per-axis upwind differences in the directional part;
//!              written as the convex average
//!              u <- (midpoint + sum_a lambda_a u_upwind,a) / (1 + sum_a lambda_a),
//!              which keeps every neighbor coefficient nonnegative and the
//!              sweep a contraction (the additive form feeds the
//!              checkerboard mode and diverges)
//! * upper:     max(core update, min over neighbors of u(y) + eps d)
//! * lower:     min(core update, max over neighbors of u(y) - eps d)
//!
//! The upper update enforces the discrete descending slope >= eps while
//! staying superharmonic; the lower update is its mirror image. For eps = 0
//! both collapse bitwise onto the unconstrained update. Updates read only
//! the previous sweep's buffer, so results are bit-identical regardless of
//! thread count, and sweeping several schemes in lockstep from the same
//! initialization preserves their pointwise ordering exactly: the midpoint
//! and cone updates are monotone in every neighbor value even in floating
//! point, and the cones only widen them. (The drift weights carry a ln|grad u|
//! factor that makes the variable-exponent update monotone only up to an
//! O(h) defect; the lockstep ordering is still checked, not assumed, by the
//! harness.)

use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{BoundaryData, ExponentField, Grid, ScalarField};
use crate::error::{Error, Result};

/// Below this many interior nodes a sweep runs serially; parallel and serial
/// sweeps produce identical bits.
const PARALLEL_THRESHOLD: usize = 2048;

/// Solver parameters. `epsilon` is the auxiliary-equation margin; the
/// gradient floor regularizes ln|grad u| inside the drift term only.
#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub gradient_floor: f64,
    pub relaxation: f64,
}

impl SolveConfig {
    /// Scale-free defaults: tolerance 1e-9 * (span of f + 1), gradient floor
    /// equal to the grid spacing, no relaxation.
    pub fn recommended(grid: &Grid, f: &BoundaryData) -> Self {
        SolveConfig {
            epsilon: 0.0,
            tolerance: 1e-9 * (f.span() + 1.0),
            max_iterations: 2_000_000,
            gradient_floor: grid.h_max(),
            relaxation: 1.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if !(self.gradient_floor > 0.0) {
            return Err(Error::invalid("gradient floor must be positive"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid("relaxation must lie in (0, 1]"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Outcome of one solve. Boundary values of `field` equal the Dirichlet data
/// exactly; `final_residual` is the sup-norm of the last Jacobi update.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub field: ScalarField,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

/// The three lockstep solutions u- <= u <= u+ (ordering exact nodewise).
#[derive(Clone, Debug)]
pub struct SandwichResult {
    pub lower: SolveResult,
    pub middle: SolveResult,
    pub upper: SolveResult,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AuxKind {
    None,
    Upper,
    Lower,
}

#[derive(Clone, Copy)]
struct Scheme<'a> {
    aux: AuxKind,
    pfield: Option<&'a ExponentField>,
}

struct Workspace {
    grid: Arc<Grid>,
    interior: Vec<u32>,
    /// Flattened neighbor lists (2D only): 8 slots per interior node.
    nbr_idx: Vec<u32>,
    nbr_dist: Vec<f64>,
    inv_2h: [f64; 2],
    inv_h: [f64; 2],
    h0: f64,
    h2_half: f64,
    step: [usize; 2],
}

impl Workspace {
    fn build(grid: &Arc<Grid>) -> Self {
        let interior: Vec<u32> = grid.interior().map(|i| i as u32).collect();
        let mut nbr_idx = Vec::new();
        let mut nbr_dist = Vec::new();
        if grid.dim() == 2 {
            nbr_idx.reserve(interior.len() * 8);
            nbr_dist.reserve(interior.len() * 8);
            for &node in &interior {
                let nbrs = grid.neighbors(node as usize);
                debug_assert_eq!(nbrs.len(), 8);
                for &(idx, d) in &nbrs {
                    nbr_idx.push(idx as u32);
                    nbr_dist.push(d);
                }
            }
        }
        let h = grid.spacing();
        let hm = grid.h_max();
        Workspace {
            interior,
            nbr_idx,
            nbr_dist,
            inv_2h: [0.5 / h[0], if grid.dim() == 2 { 0.5 / h[1] } else { 0.0 }],
            inv_h: [1.0 / h[0], if grid.dim() == 2 { 1.0 / h[1] } else { 0.0 }],
            h0: h[0],
            h2_half: 0.5 * hm * hm,
            step: [1, grid.n_per_axis()],
            grid: grid.clone(),
        }
    }
}

/// Folds the upwinded drift into the midpoint value as a convex average:
/// (mid + sum lambda_a u_up,a) / (1 + sum lambda_a) with
/// lambda_a = (h^2/2) |s q_a| / h_a, s = ln(max(|grad u|, floor)).
/// The fixed point solves mid - u + (h^2/2) s <q, D_upwind u> = 0.
#[inline]
fn drifted_core(
    ws: &Workspace,
    u: &[f64],
    node: usize,
    pf: &ExponentField,
    floor: f64,
    mid: f64,
) -> f64 {
    let dim = ws.grid.dim();
    let q = pf.grad_ln_p(node);
    // centered gradient for the magnitude inside the logarithm
    let gx = (u[node + 1] - u[node - 1]) * ws.inv_2h[0];
    let norm2 = if dim == 1 {
        gx * gx
    } else {
        let gy = (u[node + ws.step[1]] - u[node - ws.step[1]]) * ws.inv_2h[1];
        gx * gx + gy * gy
    };
    let s = norm2.sqrt().max(floor).ln();
    let mut numerator = mid;
    let mut denominator = 1.0;
    for axis in 0..dim {
        let coeff = s * q[axis];
        if coeff == 0.0 {
            continue;
        }
        let step = ws.step[axis];
        // drift pulls toward the upwind neighbor
        let upwind = if coeff > 0.0 { u[node + step] } else { u[node - step] };
        let lambda = ws.h2_half * coeff.abs() * ws.inv_h[axis];
        numerator += lambda * upwind;
        denominator += lambda;
    }
    numerator / denominator
}

#[inline]
fn node_update(ws: &Workspace, scheme: &Scheme<'_>, cfg: &SolveConfig, u: &[f64], slot: usize) -> f64 {
    let node = ws.interior[slot] as usize;
    // at eps = 0 the slope constraints are vacuous; the aux equations
    // coincide with the unconstrained one by code path
    let aux = if cfg.epsilon == 0.0 { AuxKind::None } else { scheme.aux };
    let val = if ws.grid.dim() == 1 {
        let a = u[node - 1];
        let b = u[node + 1];
        let (mn, mx) = if a < b { (a, b) } else { (b, a) };
        let mid = 0.5 * (mx + mn);
        let core = match scheme.pfield {
            Some(pf) => drifted_core(ws, u, node, pf, cfg.gradient_floor, mid),
            None => mid,
        };
        match aux {
            AuxKind::None => core,
            AuxKind::Upper => core.max(mn + cfg.epsilon * ws.h0),
            AuxKind::Lower => core.min(mx - cfg.epsilon * ws.h0),
        }
    } else {
        let base = slot * 8;
        let mut mx = f64::NEG_INFINITY;
        let mut mn = f64::INFINITY;
        for k in 0..8 {
            let v = u[ws.nbr_idx[base + k] as usize];
            if v > mx {
                mx = v;
            }
            if v < mn {
                mn = v;
            }
        }
        let mid = 0.5 * (mx + mn);
        let core = match scheme.pfield {
            Some(pf) => drifted_core(ws, u, node, pf, cfg.gradient_floor, mid),
            None => mid,
        };
        match aux {
            AuxKind::None => core,
            AuxKind::Upper => {
                // enforce descending slope >= eps: u >= min_y (u(y) + eps d)
                let mut cone = f64::INFINITY;
                for k in 0..8 {
                    let c = u[ws.nbr_idx[base + k] as usize] + cfg.epsilon * ws.nbr_dist[base + k];
                    if c < cone {
                        cone = c;
                    }
                }
                core.max(cone)
            }
            AuxKind::Lower => {
                let mut cone = f64::NEG_INFINITY;
                for k in 0..8 {
                    let c = u[ws.nbr_idx[base + k] as usize] - cfg.epsilon * ws.nbr_dist[base + k];
                    if c > cone {
                        cone = c;
                    }
                }
                core.min(cone)
            }
        }
    };
    if cfg.relaxation == 1.0 {
        val
    } else {
        (1.0 - cfg.relaxation) * u[node] + cfg.relaxation * val
    }
}

/// Transfinite (Coons) interpolation of the boundary data, clamped to the
/// boundary range so the comparison bounds hold from iteration zero. Linear
/// interpolation in 1D.
fn initial_guess(grid: &Grid, f: &BoundaryData) -> Vec<f64> {
    let mut vals = vec![0.0; grid.node_count()];
    f.scatter(grid, &mut vals);
    let n = grid.n_per_axis();
    let (fmin, fmax) = (f.min(), f.max());
    match grid.dim() {
        1 => {
            let left = vals[0];
            let right = vals[n - 1];
            for i in 1..n - 1 {
                let s = i as f64 / (n - 1) as f64;
                vals[i] = (1.0 - s) * left + s * right;
            }
        }
        _ => {
            let c00 = vals[grid.index(0, 0)];
            let c10 = vals[grid.index(n - 1, 0)];
            let c01 = vals[grid.index(0, n - 1)];
            let c11 = vals[grid.index(n - 1, n - 1)];
            for j in 1..n - 1 {
                let t = j as f64 / (n - 1) as f64;
                let left = vals[grid.index(0, j)];
                let right = vals[grid.index(n - 1, j)];
                for i in 1..n - 1 {
                    let s = i as f64 / (n - 1) as f64;
                    let bottom = vals[grid.index(i, 0)];
                    let top = vals[grid.index(i, n - 1)];
                    let coons = (1.0 - s) * left + s * right + (1.0 - t) * bottom + t * top
                        - ((1.0 - s) * (1.0 - t) * c00
                            + s * (1.0 - t) * c10
                            + (1.0 - s) * t * c01
                            + s * t * c11);
                    vals[grid.index(i, j)] = coons.clamp(fmin, fmax);
                }
            }
        }
    }
    vals
}

fn check_inputs(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    pfield: Option<&ExponentField>,
    cfg: &SolveConfig,
) -> Result<()> {
    cfg.validate()?;
    if f.values().len() != grid.boundary_count() {
        return Err(Error::invalid("boundary data does not match the grid"));
    }
    if let Some(pf) = pfield {
        if pf.grid().as_ref() != grid.as_ref() {
            return Err(Error::GridMismatch(
                "exponent field lives on a different grid".into(),
            ));
        }
    }
    Ok(())
}

/// Runs any number of schemes in lockstep from the same initialization until
/// every scheme's sweep update falls below the tolerance. Lockstep sweeps
/// keep the exact nodewise ordering between schemes.
fn run_jacobi(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    schemes: &[Scheme<'_>],
    cfg: &SolveConfig,
) -> Result<Vec<SolveResult>> {
    let ws = Workspace::build(grid);
    let init = initial_guess(grid, f);
    let k = schemes.len();
    let mut old: Vec<Vec<f64>> = (0..k).map(|_| init.clone()).collect();
    let mut new: Vec<Vec<f64>> = (0..k).map(|_| init.clone()).collect();
    let mut scratch: Vec<Vec<f64>> = (0..k).map(|_| vec![0.0; ws.interior.len()]).collect();
    let mut last_delta = vec![f64::INFINITY; k];
    let parallel = ws.interior.len() >= PARALLEL_THRESHOLD;

    let mut iterations = 0usize;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut all_converged = true;
        for (s, scheme) in schemes.iter().enumerate() {
            let u = &old[s];
            let buf = &mut scratch[s];
            if parallel {
                (0..ws.interior.len())
                    .into_par_iter()
                    .map(|slot| node_update(&ws, scheme, cfg, u, slot))
                    .collect_into_vec(buf);
            } else {
                for slot in 0..ws.interior.len() {
                    buf[slot] = node_update(&ws, scheme, cfg, u, slot);
                }
            }
            // scatter and measure the update serially: deterministic max
            let target = &mut new[s];
            let mut delta = 0.0f64;
            for (slot, &node) in ws.interior.iter().enumerate() {
                let node = node as usize;
                let nv = buf[slot];
                let d = (nv - u[node]).abs();
                if d > delta {
                    delta = d;
                }
                target[node] = nv;
            }
            last_delta[s] = delta;
            if delta >= cfg.tolerance {
                all_converged = false;
            }
        }
        for s in 0..k {
            std::mem::swap(&mut old[s], &mut new[s]);
        }
        if all_converged {
            break;
        }
    }

    let converged_all = last_delta.iter().all(|&d| d < cfg.tolerance);
    old.into_iter()
        .enumerate()
        .map(|(s, values)| {
            Ok(SolveResult {
                field: ScalarField::new(grid.clone(), values)?,
                iterations,
                final_residual: last_delta[s],
                converged: converged_all || last_delta[s] < cfg.tolerance,
            })
        })
        .collect()
}

fn run_single(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    scheme: Scheme<'_>,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    Ok(run_jacobi(grid, f, &[scheme], cfg)?.pop().expect("one scheme"))
}

/// Fixed point of the midpoint update; the discrete infinity-harmonic
/// solution with the given boundary values.
pub fn solve_infinity_harmonic(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_inputs(grid, f, None, cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::None, pfield: None }, cfg)
}

/// Variable-exponent solve in the normalized form: midpoint update plus the
/// upwinded drift correction. For a constant exponent this coincides with
/// `solve_infinity_harmonic`.
pub fn solve_infinity_x(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    pfield: &ExponentField,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_inputs(grid, f, Some(pfield), cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::None, pfield: Some(pfield) }, cfg)
}

/// Upper auxiliary equation: the infinity-superharmonic majorant whose
/// descending difference quotients stay >= epsilon.
pub fn solve_upper(grid: &Arc<Grid>, f: &BoundaryData, cfg: &SolveConfig) -> Result<SolveResult> {
    check_inputs(grid, f, None, cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::Upper, pfield: None }, cfg)
}

/// Lower auxiliary equation, mirror image of `solve_upper`.
pub fn solve_lower(grid: &Arc<Grid>, f: &BoundaryData, cfg: &SolveConfig) -> Result<SolveResult> {
    check_inputs(grid, f, None, cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::Lower, pfield: None }, cfg)
}

/// Upper auxiliary equation with the variable-exponent operator.
pub fn solve_upper_x(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    pfield: &ExponentField,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_inputs(grid, f, Some(pfield), cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::Upper, pfield: Some(pfield) }, cfg)
}

/// Lower auxiliary equation with the variable-exponent operator.
pub fn solve_lower_x(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    pfield: &ExponentField,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_inputs(grid, f, Some(pfield), cfg)?;
    run_single(grid, f, Scheme { aux: AuxKind::Lower, pfield: Some(pfield) }, cfg)
}

/// Solves u-, u and u+ in lockstep: every sweep updates all three fields, so
/// the pointwise ordering u- <= u <= u+ holds exactly at every node of the
/// returned fields. Pass an exponent field for the variable-exponent
/// variants of all three equations.
pub fn solve_sandwich(
    grid: &Arc<Grid>,
    f: &BoundaryData,
    pfield: Option<&ExponentField>,
    cfg: &SolveConfig,
) -> Result<SandwichResult> {
    check_inputs(grid, f, pfield, cfg)?;
    let schemes = [
        Scheme { aux: AuxKind::Lower, pfield },
        Scheme { aux: AuxKind::None, pfield },
        Scheme { aux: AuxKind::Upper, pfield },
    ];
    let mut results = run_jacobi(grid, f, &schemes, cfg)?;
    let upper = results.pop().expect("three schemes");
    let middle = results.pop().expect("three schemes");
    let lower = results.pop().expect("three schemes");
    Ok(SandwichResult { lower, middle, upper })
}

/// Max over adjacent node pairs of |u(x) - u(y)| / |x - y|; the discrete
/// counterpart of the gradient bound carried by the auxiliary solutions.
pub fn max_difference_quotient(u: &ScalarField) -> f64 {
    let grid = u.grid();
    let v = u.values();
    let mut best = 0.0f64;
    for idx in 0..grid.node_count() {
        for (nb, d) in grid.neighbors(idx) {
            if nb > idx {
                let q = (v[idx] - v[nb]).abs() / d;
                if q > best {
                    best = q;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new_1d(0.0, 1.0, n).unwrap())
    }

    fn square(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], n).unwrap())
    }

    fn ramp(grid: &Grid) -> BoundaryData {
        BoundaryData::from_fn(grid, |c| c[0]).unwrap()
    }

    #[test]
    fn harmonic_1d_ramp_is_linear() {
        for n in [9, 33, 129] {
            let g = line(n);
            let f = ramp(&g);
            let cfg = SolveConfig::recommended(&g, &f);
            let r = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
            assert!(r.converged);
            for idx in 0..g.node_count() {
                let x = g.coords(idx)[0];
                assert!((r.field.value(idx) - x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn harmonic_constant_data() {
        let g = square(17);
        let f = BoundaryData::constant(&g, 2.5).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let r = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        for &v in r.field.values() {
            assert_eq!(v, 2.5);
        }
    }

    #[test]
    fn harmonic_2d_plane_is_exact_fixed_point() {
        let g = square(33);
        let f = ramp(&g);
        let cfg = SolveConfig::recommended(&g, &f);
        let r = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        assert!(r.converged);
        for idx in 0..g.node_count() {
            let x = g.coords(idx)[0];
            assert!((r.field.value(idx) - x).abs() < 1e-6);
        }
    }

    #[test]
    fn boundary_values_exact() {
        let g = square(17);
        let f = BoundaryData::from_fn(&g, |c| (3.0 * c[0]).sin() + c[1]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let r = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        for (k, idx) in g.boundary().enumerate() {
            assert_eq!(r.field.value(idx), f.values()[k]);
        }
    }

    #[test]
    fn infinity_x_constant_exponent_matches_harmonic() {
        let g = square(17);
        let f = BoundaryData::from_fn(&g, |c| (c[0] - 0.4).abs() + 0.5 * c[1]).unwrap();
        let p = ExponentField::constant(g.clone(), 3.0).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let a = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        let b = solve_infinity_x(&g, &f, &p, &cfg).unwrap();
        assert!(a.field.sup_diff(&b.field).unwrap() <= 2.0 * cfg.tolerance);
    }

    #[test]
    fn infinity_x_constant_boundary_stays_constant() {
        let g = line(33);
        let f = BoundaryData::constant(&g, 1.0).unwrap();
        let p = ExponentField::exponential(g.clone(), 2.0, [0.5, 0.0]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let r = solve_infinity_x(&g, &f, &p, &cfg).unwrap();
        for &v in r.field.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infinity_x_matches_oracle_affine_exponent() {
        // p(x) = 2 + x, boundary 0 -> 0.5; the first-integral oracle is the
        // ground truth
        let n = 129;
        let g = line(n);
        let f = BoundaryData::new(&g, vec![0.0, 0.5]).unwrap();
        let p_vals: Vec<f64> = (0..g.node_count()).map(|i| 2.0 + g.coords(i)[0]).collect();
        let grads: Vec<[f64; 2]> = (0..g.node_count())
            .map(|i| [1.0 / (2.0 + g.coords(i)[0]), 0.0])
            .collect();
        let p = ExponentField::tabulated(g.clone(), p_vals, grads).unwrap();
        let cfg = SolveConfig::recommended(&g, &f).with_tolerance(1e-12);
        let r = solve_infinity_x(&g, &f, &p, &cfg).unwrap();
        assert!(r.converged);
        let oracle =
            crate::oracle1d::solve_first_integral(|x| 2.0 + x, 0.0, 1.0, 0.0, 0.5, n, 1e-12)
                .unwrap();
        let err = r.field.sup_diff(&oracle.field).unwrap();
        assert!(err <= 5e-3, "solver vs oracle: {err}");
    }

    #[test]
    fn aux_with_zero_epsilon_is_bitwise_harmonic() {
        let g = square(17);
        let f = BoundaryData::from_fn(&g, |c| (c[0] - 0.3).abs() * 0.7 + 0.1 * c[1]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let h = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        let up = solve_upper(&g, &f, &cfg).unwrap();
        let lo = solve_lower(&g, &f, &cfg).unwrap();
        assert_eq!(h.field.values(), up.field.values());
        assert_eq!(h.field.values(), lo.field.values());
    }

    #[test]
    fn aux_cones_for_zero_boundary_data() {
        // f = 0: u+ is the cone eps * dist(x, boundary), u- its negative
        let g = line(41);
        let f = BoundaryData::constant(&g, 0.0).unwrap();
        let eps = 0.1;
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(eps);
        let up = solve_upper(&g, &f, &cfg).unwrap();
        let lo = solve_lower(&g, &f, &cfg).unwrap();
        let h = g.h_max();
        for idx in 0..g.node_count() {
            let x = g.coords(idx)[0];
            let cone = eps * x.min(1.0 - x);
            assert!((up.field.value(idx) - cone).abs() <= 2.0 * h, "upper cone");
            assert!((lo.field.value(idx) + cone).abs() <= 2.0 * h, "lower cone");
        }
        let gap = up.field.sup_diff(&lo.field).unwrap();
        assert!((gap - eps).abs() <= 2.0 * h + 1e-9);
    }

    #[test]
    fn aux_inactive_constraint_keeps_ramp() {
        // |u'| = 1 >= eps, so the gradient constraint never binds
        let g = line(33);
        let f = ramp(&g);
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(0.5);
        let up = solve_upper(&g, &f, &cfg).unwrap();
        for idx in 0..g.node_count() {
            let x = g.coords(idx)[0];
            assert!((up.field.value(idx) - x).abs() < 1e-8);
        }
    }

    #[test]
    fn aux_x_constant_exponent_is_bitwise_aux() {
        let g = line(33);
        let f = BoundaryData::constant(&g, 0.0).unwrap();
        let p = ExponentField::constant(g.clone(), 2.0).unwrap();
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(0.2);
        let a = solve_upper(&g, &f, &cfg).unwrap();
        let b = solve_upper_x(&g, &f, &p, &cfg).unwrap();
        assert_eq!(a.field.values(), b.field.values());
        let c = solve_lower(&g, &f, &cfg).unwrap();
        let d = solve_lower_x(&g, &f, &p, &cfg).unwrap();
        assert_eq!(c.field.values(), d.field.values());
    }

    #[test]
    fn aux_x_zero_epsilon_is_bitwise_infinity_x() {
        let g = line(33);
        let f = BoundaryData::new(&g, vec![0.0, 0.5]).unwrap();
        let p = ExponentField::exponential(g.clone(), 2.0, [0.4, 0.0]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let a = solve_infinity_x(&g, &f, &p, &cfg).unwrap();
        let b = solve_upper_x(&g, &f, &p, &cfg).unwrap();
        assert_eq!(a.field.values(), b.field.values());
    }

    #[test]
    fn sandwich_ordering_exact_and_gap_bounded() {
        let g = square(33);
        let f = BoundaryData::from_fn(&g, |c| 0.4 * (c[0] - 0.45).abs() + 0.2 * c[1]).unwrap();
        let l = f.lipschitz_constant();
        for eps in [0.05, 0.2] {
            let cfg = SolveConfig::recommended(&g, &f).with_epsilon(eps);
            let s = solve_sandwich(&g, &f, None, &cfg).unwrap();
            for idx in 0..g.node_count() {
                assert!(s.lower.field.value(idx) <= s.middle.field.value(idx));
                assert!(s.middle.field.value(idx) <= s.upper.field.value(idx));
            }
            let gap = s.upper.field.sup_diff(&s.lower.field).unwrap();
            let bound = eps * g.diameter() + 10.0 * g.h_max() * (l + eps);
            assert!(gap <= bound, "eps {eps}: gap {gap} > bound {bound}");
        }
    }

    #[test]
    fn maximum_principle_with_aux_slack() {
        let g = square(17);
        let f = BoundaryData::from_fn(&g, |c| 0.3 * c[0] + 0.1 * (c[1] - 0.5).abs()).unwrap();
        let l = f.lipschitz_constant();
        let eps = 0.1;
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(eps);
        let s = solve_sandwich(&g, &f, None, &cfg).unwrap();
        let slack = 10.0 * g.h_max() * (l + eps);
        let upper_cap = f.max() + eps * g.diameter() + slack;
        for idx in 0..g.node_count() {
            let u = s.middle.field.value(idx);
            let up = s.upper.field.value(idx);
            assert!(u >= f.min() - 1e-12);
            assert!(u <= up + 1e-15);
            assert!(up <= upper_cap);
        }
    }

    #[test]
    fn translation_covariance_within_tolerance() {
        let g = line(33);
        let f = BoundaryData::new(&g, vec![0.2, 0.9]).unwrap();
        let shifted = BoundaryData::new(&g, vec![0.2 + 3.0, 0.9 + 3.0]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let a = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        let b = solve_infinity_harmonic(&g, &shifted, &cfg).unwrap();
        let moved = a.field.map(|v| v + 3.0).unwrap();
        assert!(moved.sup_diff(&b.field).unwrap() <= 4.0 * cfg.tolerance);
    }

    #[test]
    fn scaling_covariance_constant_exponent() {
        let g = square(17);
        let f = BoundaryData::from_fn(&g, |c| (c[0] - 0.5).abs() + 0.2 * c[1]).unwrap();
        let lam = 2.0;
        let scaled = BoundaryData::from_fn(&g, |c| lam * ((c[0] - 0.5).abs() + 0.2 * c[1])).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        let cfg2 = SolveConfig::recommended(&g, &scaled);
        let a = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        let b = solve_infinity_harmonic(&g, &scaled, &cfg2).unwrap();
        let scaled_a = a.field.map(|v| lam * v).unwrap();
        assert!(scaled_a.sup_diff(&b.field).unwrap() <= 4.0 * lam * cfg.tolerance);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let g = square(49); // above the parallel threshold
        let f = BoundaryData::from_fn(&g, |c| (c[0] - 0.3).abs() * 0.5 + 0.3 * c[1]).unwrap();
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(0.1);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| solve_upper(&g, &f, &cfg)).unwrap();
        let r4 = pool4.install(|| solve_upper(&g, &f, &cfg)).unwrap();
        assert_eq!(r1.field.values(), r4.field.values());
        assert_eq!(r1.iterations, r4.iterations);
    }

    #[test]
    fn nonconvergence_is_flagged_not_fatal() {
        let g = square(33);
        let f = BoundaryData::from_fn(&g, |c| (c[0] - 0.5).abs()).unwrap();
        let mut cfg = SolveConfig::recommended(&g, &f);
        cfg.max_iterations = 3;
        let r = solve_infinity_harmonic(&g, &f, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn mismatched_exponent_grid_rejected() {
        let g = line(17);
        let f = ramp(&g);
        let other = line(33);
        let p = ExponentField::constant(other, 2.0).unwrap();
        let cfg = SolveConfig::recommended(&g, &f);
        assert!(matches!(
            solve_infinity_x(&g, &f, &p, &cfg),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn difference_quotient_of_cone() {
        let g = line(41);
        let f = BoundaryData::constant(&g, 0.0).unwrap();
        let eps = 0.25;
        let cfg = SolveConfig::recommended(&g, &f).with_epsilon(eps);
        let up = solve_upper(&g, &f, &cfg).unwrap();
        let q = max_difference_quotient(&up.field);
        assert!((q - eps).abs() < 1e-6);
    }

    // update-rule monotonicity, checked by bumping one neighbor
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn updates_monotone_in_each_neighbor(
            seed in 0u64..500,
            bump in 1e-6f64..0.5,
            nbr_pick in 0usize..8,
            kind in 0usize..3,
        ) {
            let g = square(7);
            let f = BoundaryData::from_fn(&g, |c| (c[0] * 2.1 + seed as f64).sin() * 0.3).unwrap();
            let ws = Workspace::build(&g);
            let mut vals = initial_guess(&g, &f);
            // roughen the interior deterministically
            for (k, v) in vals.iter_mut().enumerate() {
                *v += ((k as f64 * 0.7 + seed as f64) .sin()) * 0.1;
            }
            let cfg = SolveConfig::recommended(&g, &f).with_epsilon(0.1);
            let aux = [AuxKind::None, AuxKind::Upper, AuxKind::Lower][kind];
            let scheme = Scheme { aux, pfield: None };
            let slot = ws.interior.len() / 2;
            let base = node_update(&ws, &scheme, &cfg, &vals, slot);
            let nbr = ws.nbr_idx[slot * 8 + nbr_pick] as usize;
            let mut bumped = vals.clone();
            bumped[nbr] += bump;
            let after = node_update(&ws, &scheme, &cfg, &bumped, slot);
            prop_assert!(after >= base, "{aux:?}: {after} < {base}");
        }

        #[test]
        fn drift_update_quasi_monotone(
            seed in 0u64..200,
            bump in 1e-4f64..0.3,
            nbr_pick in 0usize..2,
        ) {
            // the ln|grad u| factor makes the drifted update monotone only up
            // to an O(h * |grad ln p|) defect
            let g = line(17);
            let f = BoundaryData::new(&g, vec![0.0, 0.5]).unwrap();
            let p = ExponentField::exponential(g.clone(), 2.0, [0.5, 0.0]).unwrap();
            let ws = Workspace::build(&g);
            let mut vals = initial_guess(&g, &f);
            for (k, v) in vals.iter_mut().enumerate() {
                *v += ((k as f64 * 1.3 + seed as f64).sin()) * 0.05;
            }
            let cfg = SolveConfig::recommended(&g, &f);
            let scheme = Scheme { aux: AuxKind::None, pfield: Some(&p) };
            let slot = ws.interior.len() / 2;
            let node = ws.interior[slot] as usize;
            let base = node_update(&ws, &scheme, &cfg, &vals, slot);
            let nbr = if nbr_pick == 0 { node - 1 } else { node + 1 };
            let mut bumped = vals.clone();
            bumped[nbr] += bump;
            let after = node_update(&ws, &scheme, &cfg, &bumped, slot);
            let slack = g.h_max() * 0.5 * bump;
            prop_assert!(after >= base - slack, "{after} < {base} - {slack}");
        }

        #[test]
        fn discrete_comparison_principle(lift in 0.0f64..0.5, seed in 0u64..100) {
            let g = line(17);
            let f1 = BoundaryData::from_fn(&g, |c| (c[0] + seed as f64).sin() * 0.3).unwrap();
            let f2 = BoundaryData::new(
                &g,
                f1.values().iter().map(|v| v + lift).collect(),
            ).unwrap();
            let cfg = SolveConfig::recommended(&g, &f1);
            let a = solve_infinity_harmonic(&g, &f1, &cfg).unwrap();
            let b = solve_infinity_harmonic(&g, &f2, &cfg).unwrap();
            for idx in 0..g.node_count() {
                prop_assert!(a.field.value(idx) <= b.field.value(idx) + 4.0 * cfg.tolerance);
            }
        }
    }
}

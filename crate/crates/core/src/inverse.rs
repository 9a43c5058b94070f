//! The nodal limit function and potential reconstruction.
//!
//! Scaled nodal deviations converge to a limit function,
//!
//! ```text
//! f̂(t) = (μₙ⁰)²·[tₙʲ - (j-½)π/μₙ⁰] → f(t),   j = jₙ(t),
//! ```
//!
//! whose closed form splits on the delay:
//!
//! ```text
//! f(t) = (B + U⁺(0))·t/π - α₁⁺/α₂⁺ - ½∫₀ᵗ q(τ)dτ     Δ ≡ 0,
//! f(t) = B·t/π - α₁⁺/α₂⁺                              Δ ≠ 0 on (0, π),
//! ```
//!
//! with B = β₁⁺/β₂⁺ + α₁⁺/α₂⁺. For the zero-delay branch the potential
//! follows from the limit function,
//!
//! ```text
//! q(t) = (2/π)[U⁺(0) + f(π) - f(0)] - 2f'(t),
//! ```
//!
//! where U⁺(0) = ½∫₀^π q must be supplied by the caller: f(π) - f(0) = B
//! identically, so the mean of q cancels and cannot be read off nodal
//! data at this order.

use crate::asymptotics::{integrate_q_weighted, panels_for};
use crate::expr::EvalError;
use crate::nodal::{node_index_fn, NodalSet};
use crate::problem::ProblemSpec;
use crate::spectrum::mu_seed;
use std::f64::consts::PI;
use thiserror::Error;

/// Which closed-form branch of the limit function applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayBranch {
    DeltaZero,
    DeltaNonzero,
}

/// Sampled estimate of the limit function.
#[derive(Debug, Clone)]
pub struct LimitFunctionEstimate {
    /// Ascending sample points in [0, π].
    pub grid: Vec<f64>,
    pub f_hat: Vec<f64>,
    /// Largest nodal-set index magnitude used.
    pub source_n: u32,
    pub branch: DelayBranch,
    /// Grid points beyond the last node and similar soft issues.
    pub diagnostics: Vec<String>,
}

/// Reconstructed potential on a grid.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub grid: Vec<f64>,
    pub q_hat: Vec<f64>,
    /// The caller-supplied U⁺(0) = ½∫₀^π q.
    pub u_plus_zero: f64,
    /// Width of the moving least-squares derivative stencil.
    pub stencil: usize,
    /// Endpoint values of f from one-sided quadratic extrapolation.
    pub f_at_zero: f64,
    pub f_at_pi: f64,
}

/// Inverse-problem failures.
#[derive(Debug, Error)]
pub enum InverseError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no nodal sets supplied")]
    EmptySets,
    #[error("nodal set for index {0} has no nodes")]
    EmptyNodes(String),
    #[error("the delay vanishes on part of (0, pi) but not all of it; no closed-form branch applies")]
    MixedDelay,
    #[error("reconstruction requires the zero-delay branch")]
    WrongBranch,
    #[error("stencil of {stencil} exceeds the {points}-point grid")]
    StencilTooLarge { stencil: usize, points: usize },
}

/// Decide the closed-form branch by sampling the delay on the open
/// interval; a delay that is zero somewhere but not everywhere is refused.
pub fn delay_branch(spec: &ProblemSpec) -> Result<DelayBranch, InverseError> {
    if spec.delay_is_zero() {
        return Ok(DelayBranch::DeltaZero);
    }
    const GRID: usize = 4097;
    let tol = 1e-12;
    let mut zeros = 0usize;
    let mut positives = 0usize;
    for k in 1..GRID {
        let t = PI * k as f64 / GRID as f64;
        let d = spec.delay.eval(t)?;
        if d.abs() <= tol {
            zeros += 1;
        } else {
            positives += 1;
        }
    }
    match (zeros, positives) {
        (_, 0) => Ok(DelayBranch::DeltaZero),
        (0, _) => Ok(DelayBranch::DeltaNonzero),
        _ => Err(InverseError::MixedDelay),
    }
}

/// Scaled nodal deviation from one nodal set at one point: the node taken
/// is the one just above t (j = jₙ(t) + 1, clamped to the node count).
fn f_hat_at(ns: &NodalSet, t: f64) -> f64 {
    let mu0 = mu_seed(ns.index);
    let j = (node_index_fn(ns, t) + 1).min(ns.nodes.len());
    mu0 * mu0 * (ns.nodes[j - 1] - (j as f64 - 0.5) * PI / mu0)
}

/// Estimate the limit function on `grid` from the supplied nodal sets,
/// using the largest available index; with `richardson` the two largest
/// indices are combined under an O(1/n) remainder model.
pub fn estimate_limit_function(
    spec: &ProblemSpec,
    sets: &[NodalSet],
    grid: &[f64],
    richardson: bool,
) -> Result<LimitFunctionEstimate, InverseError> {
    if sets.is_empty() {
        return Err(InverseError::EmptySets);
    }
    for ns in sets {
        if ns.nodes.is_empty() {
            return Err(InverseError::EmptyNodes(ns.index.to_string()));
        }
    }
    let branch = delay_branch(spec)?;
    let mut ordered: Vec<&NodalSet> = sets.iter().collect();
    ordered.sort_by_key(|ns| ns.index.magnitude);
    let hi = *ordered.last().unwrap();
    let lo = if ordered.len() >= 2 {
        ordered[ordered.len() - 2]
    } else {
        hi
    };
    let use_richardson = richardson && lo.index != hi.index;

    let mut diagnostics = Vec::new();
    let mut beyond = 0usize;
    let f_hat: Vec<f64> = grid
        .iter()
        .map(|&t| {
            if t > *hi.nodes.last().unwrap() {
                beyond += 1;
            }
            let v_hi = f_hat_at(hi, t);
            if use_richardson {
                let v_lo = f_hat_at(lo, t);
                let (nh, nl) = (hi.index.magnitude as f64, lo.index.magnitude as f64);
                (nh * v_hi - nl * v_lo) / (nh - nl)
            } else {
                v_hi
            }
        })
        .collect();
    if beyond > 0 {
        diagnostics.push(format!(
            "{beyond} grid point(s) lie beyond the last node of index {}; the last node was reused",
            hi.index
        ));
    }
    Ok(LimitFunctionEstimate {
        grid: grid.to_vec(),
        f_hat,
        source_n: hi.index.magnitude,
        branch,
        diagnostics,
    })
}

/// Closed-form limit function at t.
pub fn limit_function_exact(spec: &ProblemSpec, t: f64) -> Result<f64, InverseError> {
    let b = spec.beta1_plus / spec.beta2_plus + spec.alpha1_plus / spec.alpha2_plus;
    let ratio = spec.alpha1_plus / spec.alpha2_plus;
    match delay_branch(spec)? {
        DelayBranch::DeltaZero => {
            let u0 = 0.5 * integrate_q_weighted(spec, 0.0, PI, panels_for(0.0), |_| 1.0)?;
            let half_int =
                0.5 * integrate_q_weighted(spec, 0.0, t, panels_for(0.0).max(16), |_| 1.0)?;
            Ok((b + u0) * t / PI - ratio - half_int)
        }
        DelayBranch::DeltaNonzero => Ok(b * t / PI - ratio),
    }
}

/// Least-squares quadratic a + b·x + c·x² through (ts - t0, ys); returns
/// (a, b, c). Exact for three points.
fn quad_fit(ts: &[f64], ys: &[f64], t0: f64) -> (f64, f64, f64) {
    let (mut m0, mut m1, mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
    for (&t, &y) in ts.iter().zip(ys) {
        let x = t - t0;
        let x2 = x * x;
        m0 += 1.0;
        m1 += x;
        m2 += x2;
        m3 += x2 * x;
        m4 += x2 * x2;
        r0 += y;
        r1 += y * x;
        r2 += y * x2;
    }
    let det = m0 * (m2 * m4 - m3 * m3) - m1 * (m1 * m4 - m3 * m2) + m2 * (m1 * m3 - m2 * m2);
    let a = (r0 * (m2 * m4 - m3 * m3) - m1 * (r1 * m4 - m3 * r2) + m2 * (r1 * m3 - m2 * r2)) / det;
    let b = (m0 * (r1 * m4 - r2 * m3) - r0 * (m1 * m4 - m3 * m2) + m2 * (m1 * r2 - r1 * m2)) / det;
    let c = (m0 * (m2 * r2 - r1 * m3) - m1 * (m1 * r2 - r1 * m2) + r0 * (m1 * m3 - m2 * m2)) / det;
    (a, b, c)
}

/// Evaluate the one-sided quadratic through the three grid points nearest
/// `at`.
fn extrapolate(grid: &[f64], values: &[f64], near: usize, at: f64) -> f64 {
    let n = grid.len();
    let window = if near == 0 { 0..3 } else { n - 3..n };
    let (a, b, c) = quad_fit(&grid[window.clone()], &values[window], at);
    // x = 0 at the evaluation point.
    let _ = (b, c);
    a
}

/// Reconstruct the potential from a zero-delay-branch limit function
/// estimate: f' by a moving least-squares quadratic over `stencil`
/// nearest grid points, endpoints by one-sided quadratic extrapolation.
pub fn reconstruct_potential(
    f: &LimitFunctionEstimate,
    u_plus_zero: f64,
    stencil: usize,
) -> Result<ReconstructionResult, InverseError> {
    if f.branch != DelayBranch::DeltaZero {
        return Err(InverseError::WrongBranch);
    }
    let n = f.grid.len();
    if stencil > n || stencil < 3 {
        return Err(InverseError::StencilTooLarge { stencil, points: n });
    }
    let f_at_zero = extrapolate(&f.grid, &f.f_hat, 0, 0.0);
    let f_at_pi = extrapolate(&f.grid, &f.f_hat, n - 1, PI);
    let constant = (2.0 / PI) * (u_plus_zero + f_at_pi - f_at_zero);

    let q_hat: Vec<f64> = (0..n)
        .map(|i| {
            // Window of `stencil` nearest indices, clamped at the ends.
            let half = stencil / 2;
            let lo = i.saturating_sub(half).min(n - stencil);
            let window = lo..lo + stencil;
            let (_, b, _) = quad_fit(&f.grid[window.clone()], &f.f_hat[window], f.grid[i]);
            constant - 2.0 * b
        })
        .collect();

    Ok(ReconstructionResult {
        grid: f.grid.clone(),
        q_hat,
        u_plus_zero,
        stencil,
        f_at_zero,
        f_at_pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarFn;
    use crate::integrate::SolverControl;
    use crate::nodal::find_nodes;
    use crate::presets;
    use crate::spectrum::{find_eigenvalue, SpectralIndex};

    fn exact_estimate(spec: &ProblemSpec, points: usize) -> LimitFunctionEstimate {
        let grid: Vec<f64> = (1..points)
            .map(|k| PI * k as f64 / points as f64)
            .collect();
        let f_hat = grid
            .iter()
            .map(|&t| limit_function_exact(spec, t).unwrap())
            .collect();
        LimitFunctionEstimate {
            grid,
            f_hat,
            source_n: 0,
            branch: DelayBranch::DeltaZero,
            diagnostics: Vec::new(),
        }
    }

    fn nodal_sets(spec: &ProblemSpec, ns: &[u32]) -> Vec<NodalSet> {
        let ctl = SolverControl::default();
        ns.iter()
            .map(|&n| {
                let rec = find_eigenvalue(spec, SpectralIndex::pos(n), 0.25, &ctl).unwrap();
                find_nodes(spec, &rec, &ctl).unwrap()
            })
            .collect()
    }

    #[test]
    fn branch_detection() {
        assert_eq!(delay_branch(&presets::example2()).unwrap(), DelayBranch::DeltaZero);
        assert_eq!(
            delay_branch(&presets::example1()).unwrap(),
            DelayBranch::DeltaNonzero
        );
        // Zero on [0, 1], positive beyond: no closed-form branch applies.
        let mut spec = presets::example1();
        spec.delay = ScalarFn::from_expr("(abs(t-1) + (t-1))/4").unwrap();
        assert!(matches!(delay_branch(&spec), Err(InverseError::MixedDelay)));
    }

    #[test]
    fn exact_limit_values() {
        // Zero-delay branch at the endpoints of the q = eᵗ instance.
        let spec = presets::example2();
        let f0 = limit_function_exact(&spec, 0.0).unwrap();
        assert!((f0 - (-3.0 / 7.0)).abs() < 1e-12, "{f0}");
        let fpi = limit_function_exact(&spec, PI).unwrap();
        // (B + U⁺(0))·1 - 3/7 - ½∫₀^π eᵗ = B - 3/7 = 1.
        assert!((fpi - 1.0).abs() < 1e-9, "{fpi}");
        // Nonzero-delay branch is a pure line; flat when α₁⁺ = β₁⁺ = 0.
        for t in [0.3, 1.0, 2.5] {
            assert_eq!(limit_function_exact(&presets::example1(), t).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_closure_exponential() {
        // Exact-f feed reproduces q = eᵗ: the reconstruction formula is an
        // algebraic identity given the closed-form limit function.
        let spec = presets::e2flat();
        let est = exact_estimate(&spec, 16_000);
        let u0 = (PI.exp() - 1.0) / 2.0;
        let rec = reconstruct_potential(&est, u0, 5).unwrap();
        let mut sup = 0.0f64;
        for (t, q) in rec.grid.iter().zip(&rec.q_hat) {
            if *t < 0.05 || *t > PI - 0.05 {
                continue;
            }
            sup = sup.max((q - t.exp()).abs());
        }
        assert!(sup <= 1e-6, "interior sup {sup}");
    }

    #[test]
    fn identity_closure_linear() {
        // q = t with Δ ≡ 0: the limit function is quadratic, so the
        // moving quadratic derivative is exact.
        let mut spec = presets::example1();
        spec.delay = ScalarFn::constant(0.0);
        let est = exact_estimate(&spec, 4_000);
        let rec = reconstruct_potential(&est, PI * PI / 4.0, 5).unwrap();
        let mut sup = 0.0f64;
        for (t, q) in rec.grid.iter().zip(&rec.q_hat) {
            if *t < 0.05 || *t > PI - 0.05 {
                continue;
            }
            sup = sup.max((q - t).abs());
        }
        assert!(sup <= 1e-6, "interior sup {sup}");
    }

    #[test]
    fn estimated_limit_tracks_exact() {
        // Nodal data from the α₁⁺ = β₁⁺ = 0 exponential instance.
        let spec = presets::e2flat();
        let sets = nodal_sets(&spec, &[100]);
        let grid = sets[0].nodes.clone();
        let est = estimate_limit_function(&spec, &sets, &grid, false).unwrap();
        assert_eq!(est.source_n, 100);
        assert_eq!(est.branch, DelayBranch::DeltaZero);
        let mut sup = 0.0f64;
        let mut fmax = 0.0f64;
        for (t, fh) in est.grid.iter().zip(&est.f_hat) {
            if *t < 0.1 * PI || *t > 0.9 * PI {
                continue;
            }
            let fe = limit_function_exact(&spec, *t).unwrap();
            fmax = fmax.max(fe.abs());
            sup = sup.max((fh - fe).abs());
        }
        assert!(sup <= 0.1 * (1.0 + fmax), "sup {sup} vs max |f| {fmax}");
        // Endpoint difference recovers B = 0 for this instance.
        let spread = est.f_hat.last().unwrap() - est.f_hat.first().unwrap();
        let exact_spread = limit_function_exact(&spec, PI).unwrap()
            - limit_function_exact(&spec, 0.0).unwrap();
        assert!((spread - exact_spread).abs() < 0.2, "spread {spread} vs {exact_spread}");
    }

    #[test]
    fn nonzero_delay_estimates_flatten() {
        // Second-branch flatness: the scaled deviations shrink with n.
        let spec = presets::example1();
        let sets = nodal_sets(&spec, &[20, 40]);
        let grid: Vec<f64> = (1..40).map(|k| PI * k as f64 / 40.0).collect();
        let sup = |set: &NodalSet| {
            let est = estimate_limit_function(&spec, std::slice::from_ref(set), &grid, false)
                .unwrap();
            est.f_hat.iter().fold(0.0f64, |a, v| a.max(v.abs()))
        };
        let (s20, s40) = (sup(&sets[0]), sup(&sets[1]));
        assert!(s40 < s20, "sup at n=40 {s40} not below n=20 {s20}");
    }

    #[test]
    fn richardson_uses_two_levels() {
        let spec = presets::e2flat();
        let sets = nodal_sets(&spec, &[60, 100]);
        let grid: Vec<f64> = (1..60).map(|k| PI * k as f64 / 60.0).collect();
        let plain = estimate_limit_function(&spec, &sets, &grid, false).unwrap();
        let extr = estimate_limit_function(&spec, &sets, &grid, true).unwrap();
        assert_eq!(plain.source_n, extr.source_n);
        assert_ne!(plain.f_hat, extr.f_hat);
    }

    #[test]
    fn error_paths() {
        let spec = presets::e2flat();
        assert!(matches!(
            estimate_limit_function(&spec, &[], &[1.0], false),
            Err(InverseError::EmptySets)
        ));
        let est = exact_estimate(&spec, 100);
        assert!(matches!(
            reconstruct_potential(&est, 1.0, 1000),
            Err(InverseError::StencilTooLarge { .. })
        ));
        let mut wrong = est;
        wrong.branch = DelayBranch::DeltaNonzero;
        assert!(matches!(
            reconstruct_potential(&wrong, 1.0, 5),
            Err(InverseError::WrongBranch)
        ));
    }
}

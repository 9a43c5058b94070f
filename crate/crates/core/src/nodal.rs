//! Eigenfunction nodal points, numerically and asymptotically.
//!
//! For an eigen-root μₙ the nodes tₙʲ are the zeros of the shooting
//! solution φ(·, μₙ) in (0, π). They are found by dense sampling plus
//! bisection, and independently estimated by the large-n formulas
//!
//! ```text
//! tₙʲ = (j-½)π[1/μₙ⁰ - (B + U⁺(μₙ⁰))/((μₙ⁰)³π)]
//!       + α₁⁺/(μₙ⁰T₀) + α₂⁺/(2μₙ⁰T₀)·∫₀^{jπ/n} q cos(μₙ⁰Δ)     j ≤ ⌊n/2⌋,
//! tₙʲ = (j-½)π[ … same bracket … ]
//!       + (1/(μₙ⁰)²)(α₁⁺/α₂⁺ + ½∫₀^{jπ/n} q cos(μₙ⁰Δ))          j > ⌊n/2⌋,
//! ```
//!
//! with B = β₁⁺/β₂⁺ + α₁⁺/α₂⁺ and the T-factor
//!
//! ```text
//! T(μ, t) = μα₂⁺ + α₂⁻ - (α₂⁺/2)∫₀ᵗ q sin(μΔ)
//!           - (α₂⁻/2μ)∫₀ᵗ q sin(μΔ) + (α₁⁺/2μ)∫₀ᵗ q cos(μΔ)
//! ```
//!
//! evaluated at T₀ = T(μₙ⁰, jπ/n).

use crate::asymptotics::{oscillatory_integrals, truncated};
use crate::expr::EvalError;
use crate::integrate::{eval_solution, shoot, SolveError, SolverControl};
use crate::problem::ProblemSpec;
use crate::spectrum::{mu_seed, EigenvalueRecord, Sign, SpectralIndex};
use std::f64::consts::PI;
use thiserror::Error;

/// Nodes of one eigenfunction with refinement residuals.
#[derive(Debug, Clone)]
pub struct NodalSet {
    pub index: SpectralIndex,
    pub mu: f64,
    /// Strictly ascending zeros of φ(·, μ) in (0, π).
    pub nodes: Vec<f64>,
    /// |φ(tₙʲ)| relative to the local oscillation amplitude, per node.
    pub residuals: Vec<f64>,
    /// Count-mismatch and other soft observations.
    pub diagnostics: Vec<String>,
}

/// Nodal-module failures.
#[derive(Debug, Error)]
pub enum NodalError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the T-factor is undefined at mu = 0")]
    ZeroMu,
    #[error("node finding needs a positive real root, got {0}")]
    NotPositiveReal(String),
    #[error("asymptotic node formulas need index +n with n >= 10, got {0}")]
    IndexTooSmall(SpectralIndex),
    #[error("node number j = {j} outside 1..={n}")]
    JOutOfRange { j: usize, n: u32 },
}

/// Find all zeros of φ(·, μₙ) in the open interval (0, π): sample on a
/// grid of step π/(20(1+μ)), then bisect each sign change to 10⁻¹² width.
pub fn find_nodes(
    spec: &ProblemSpec,
    rec: &EigenvalueRecord,
    control: &SolverControl,
) -> Result<NodalSet, NodalError> {
    if rec.root.im != 0.0 || rec.root.re <= 0.0 {
        return Err(NodalError::NotPositiveReal(rec.root.to_string()));
    }
    let mu = rec.root.re;
    let sol = shoot(spec, mu, control)?;
    let phi = |t: f64| -> Result<f64, NodalError> { Ok(eval_solution(&sol, t)?.0) };

    let steps = (20.0 * (1.0 + mu)).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| PI * k as f64 / steps as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| phi(t)).collect::<Result<_, _>>()?;

    let mut nodes = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..steps {
        if !((values[k] < 0.0) != (values[k + 1] < 0.0)) {
            continue;
        }
        let (mut a, mut b, mut fa) = (grid[k], grid[k + 1], values[k]);
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = phi(mid)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if (fa < 0.0) != (fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        let node = 0.5 * (a + b);
        if node <= 0.0 || node >= PI {
            continue;
        }
        // Local amplitude: the largest |φ| within a half-period around the
        // node, from the already-sampled grid.
        let half_period = PI / mu;
        let amplitude = grid
            .iter()
            .zip(&values)
            .filter(|(&t, _)| (t - node).abs() <= half_period)
            .map(|(_, &v)| v.abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        nodes.push(node);
        residuals.push(phi(node)?.abs() / amplitude);
    }

    let mut diagnostics = Vec::new();
    let expected = mu.round() as i64;
    if (nodes.len() as i64 - expected).abs() > 1 {
        diagnostics.push(format!(
            "node count {} differs from round(mu) = {expected} by more than 1",
            nodes.len()
        ));
    }
    Ok(NodalSet {
        index: rec.index,
        mu,
        nodes,
        residuals,
        diagnostics,
    })
}

/// The T-factor T(μ, t), as displayed above.
pub fn t_factor(spec: &ProblemSpec, mu: f64, t: f64) -> Result<f64, NodalError> {
    if mu == 0.0 {
        return Err(NodalError::ZeroMu);
    }
    let dl = |tau: f64| spec.delay.eval(tau);
    let i_s = truncated(spec, t, mu, |tau| (mu * dl(tau).unwrap_or(0.0)).sin())?;
    let i_c = truncated(spec, t, mu, |tau| (mu * dl(tau).unwrap_or(0.0)).cos())?;
    Ok(mu * spec.alpha2_plus + spec.alpha2_minus
        - 0.5 * spec.alpha2_plus * i_s
        - spec.alpha2_minus / (2.0 * mu) * i_s
        + spec.alpha1_plus / (2.0 * mu) * i_c)
}

/// Asymptotic node location tₙʲ for index +n (n ≥ 10), 1 ≤ j ≤ n. The two
/// branches split at ⌊n/2⌋; the q-integrals run to jπ/n with the bare
/// index magnitude n in the upper limit.
pub fn nodal_asymptotic(spec: &ProblemSpec, n: SpectralIndex, j: usize) -> Result<f64, NodalError> {
    if n.sign != Sign::Pos || n.magnitude < 10 {
        return Err(NodalError::IndexTooSmall(n));
    }
    let nm = n.magnitude;
    if j < 1 || j as u32 > nm {
        return Err(NodalError::JOutOfRange { j, n: nm });
    }
    let mu0 = mu_seed(n);
    let b = spec.beta1_plus / spec.beta2_plus + spec.alpha1_plus / spec.alpha2_plus;
    let osc = oscillatory_integrals(spec, mu0)?;
    let bracket = (j as f64 - 0.5) * PI * (1.0 / mu0 - (b + osc.u_plus) / (mu0.powi(3) * PI));
    let tj = j as f64 * PI / nm as f64;
    let dl = |tau: f64| spec.delay.eval(tau);
    let i_c = truncated(spec, tj, mu0, |tau| (mu0 * dl(tau).unwrap_or(0.0)).cos())?;
    if j as u32 <= nm / 2 {
        let t0 = t_factor(spec, mu0, tj)?;
        Ok(bracket + spec.alpha1_plus / (mu0 * t0) + spec.alpha2_plus / (2.0 * mu0 * t0) * i_c)
    } else {
        Ok(bracket + (spec.alpha1_plus / spec.alpha2_plus + 0.5 * i_c) / (mu0 * mu0))
    }
}

/// Largest 1-based j with tₙʲ ≤ t; 0 when t lies before the first node.
pub fn node_index_fn(ns: &NodalSet, t: f64) -> usize {
    ns.nodes.partition_point(|&node| node <= t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{integrate_q_weighted, panels_for};
    use crate::presets;
    use crate::spectrum::find_eigenvalue;
    use num_complex::Complex64;

    fn record(index: SpectralIndex, mu: f64) -> EigenvalueRecord {
        EigenvalueRecord {
            index,
            seed: mu_seed(index),
            estimate: mu,
            root: Complex64::new(mu, 0.0),
            residual: 0.0,
            method: crate::spectrum::RootMethod::Bisection,
            iterations: 0,
        }
    }

    #[test]
    fn t0_nodes_are_cosine_zeros() {
        let ctl = SolverControl::default().refined(8.0);
        let rec = find_eigenvalue(&presets::t0(), SpectralIndex::pos(40), 0.25, &ctl).unwrap();
        let ns = find_nodes(&presets::t0(), &rec, &ctl).unwrap();
        assert_eq!(ns.nodes.len(), 39);
        assert!((ns.nodes[0] - PI / 78.0).abs() < 1e-9, "first {}", ns.nodes[0]);
        assert!((ns.nodes[0] - 0.0402768).abs() < 1e-6);
        for (j, node) in ns.nodes.iter().enumerate() {
            let exact = (j as f64 + 0.5) * PI / 39.0;
            assert!((node - exact).abs() < 1e-9, "node {j}: {node} vs {exact}");
        }
        for r in &ns.residuals {
            assert!(*r <= 1e-8 * (1.0 + ns.mu), "residual {r}");
        }
        assert!(ns.diagnostics.is_empty(), "{:?}", ns.diagnostics);
    }

    #[test]
    fn t1_nodes_at_omega_ten() {
        // ω = 10 ⇒ μ = √99; φ ∝ cos(10t) has ten zeros in (0, π).
        let ctl = SolverControl::default().refined(4.0);
        let rec = record(SpectralIndex::pos(11), 99.0f64.sqrt());
        let ns = find_nodes(&presets::t1(), &rec, &ctl).unwrap();
        assert_eq!(ns.nodes.len(), 10);
        for (j, node) in ns.nodes.iter().enumerate() {
            let exact = (j as f64 + 0.5) * PI / 10.0;
            assert!((node - exact).abs() < 1e-8, "node {j}: {node} vs {exact}");
        }
    }

    #[test]
    fn example2_node_structure() {
        let ctl = SolverControl::default();
        let rec = find_eigenvalue(&presets::example2(), SpectralIndex::pos(40), 0.25, &ctl).unwrap();
        let ns = find_nodes(&presets::example2(), &rec, &ctl).unwrap();
        assert!(
            (38..=40).contains(&ns.nodes.len()),
            "count {}",
            ns.nodes.len()
        );
        let bound = PI / ns.mu;
        for gap in ns.nodes.windows(2) {
            let g = gap[1] - gap[0];
            assert!(g > 0.8 * bound && g < 1.2 * bound, "gap {g} vs π/μ = {bound}");
        }
        for r in &ns.residuals {
            assert!(*r <= 1e-8 * (1.0 + ns.mu));
        }
    }

    #[test]
    fn example1_interlacing() {
        let ctl = SolverControl::default();
        let rec = find_eigenvalue(&presets::example1(), SpectralIndex::pos(30), 0.25, &ctl).unwrap();
        let ns = find_nodes(&presets::example1(), &rec, &ctl).unwrap();
        let bound = PI / ns.mu;
        for gap in ns.nodes.windows(2) {
            let g = gap[1] - gap[0];
            assert!(g > 0.8 * bound && g < 1.2 * bound);
        }
    }

    #[test]
    fn complex_or_negative_roots_are_refused() {
        let ctl = SolverControl::default();
        let mut rec = record(SpectralIndex::pos(12), -5.0);
        assert!(matches!(
            find_nodes(&presets::t0(), &rec, &ctl),
            Err(NodalError::NotPositiveReal(_))
        ));
        rec.root = Complex64::new(5.0, 0.3);
        assert!(find_nodes(&presets::t0(), &rec, &ctl).is_err());
    }

    #[test]
    fn t_factor_values() {
        // q ≡ 0 leaves only μα₂⁺.
        assert_eq!(t_factor(&presets::t0(), 39.0, 1.3).unwrap(), 39.0);
        // Zero delay kills the sine integrals: 39·7 + 4 + (3/78)(e^π - 1).
        let v = t_factor(&presets::example2(), 39.0, PI).unwrap();
        let exact = 273.0 + 4.0 + 3.0 / 78.0 * (PI.exp() - 1.0);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        assert!((v - 277.8515652).abs() < 1e-6);
        assert!(matches!(
            t_factor(&presets::t0(), 0.0, 1.0),
            Err(NodalError::ZeroMu)
        ));
    }

    #[test]
    fn t_factor_quadrature_is_converged() {
        // Recompute with doubled panels; agreement pins the panel policy.
        let spec = presets::example1();
        let (mu, t) = (39.0, 1.0);
        let v = t_factor(&spec, mu, t).unwrap();
        let panels = 2 * ((panels_for(mu) as f64 * t / PI).ceil() as usize).max(16);
        let i_s = integrate_q_weighted(&spec, 0.0, t, panels, |tau| {
            (mu * spec.delay.eval(tau).unwrap()).sin()
        })
        .unwrap();
        let i_c = integrate_q_weighted(&spec, 0.0, t, panels, |tau| {
            (mu * spec.delay.eval(tau).unwrap()).cos()
        })
        .unwrap();
        let oracle = mu * spec.alpha2_plus + spec.alpha2_minus
            - 0.5 * spec.alpha2_plus * i_s
            - spec.alpha2_minus / (2.0 * mu) * i_s
            + spec.alpha1_plus / (2.0 * mu) * i_c;
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn asymptotic_nodes_t0_both_branches() {
        // All corrections vanish: tⱼ = (j-½)π/39 from either branch.
        let t1 = nodal_asymptotic(&presets::t0(), SpectralIndex::pos(40), 1).unwrap();
        assert!((t1 - PI / 78.0).abs() < 1e-12);
        let t39 = nodal_asymptotic(&presets::t0(), SpectralIndex::pos(40), 39).unwrap();
        assert!((t39 - 38.5 * PI / 39.0).abs() < 1e-12);
        // Domain checks.
        assert!(nodal_asymptotic(&presets::t0(), SpectralIndex::pos(9), 1).is_err());
        assert!(nodal_asymptotic(&presets::t0(), SpectralIndex::neg(40), 1).is_err());
        assert!(nodal_asymptotic(&presets::t0(), SpectralIndex::pos(40), 0).is_err());
        assert!(nodal_asymptotic(&presets::t0(), SpectralIndex::pos(40), 41).is_err());
    }

    #[test]
    fn asymptotic_matches_numeric_example2() {
        let ctl = SolverControl::default();
        let spec = presets::example2();
        let rec = find_eigenvalue(&spec, SpectralIndex::pos(40), 0.25, &ctl).unwrap();
        let ns = find_nodes(&spec, &rec, &ctl).unwrap();
        let ta = nodal_asymptotic(&spec, SpectralIndex::pos(40), 35).unwrap();
        let gap = (ta - ns.nodes[34]).abs();
        assert!(gap <= 5e-3, "asymptotic {ta} vs numeric {} (gap {gap})", ns.nodes[34]);
    }

    #[test]
    fn asymptotic_matches_numeric_example1() {
        let ctl = SolverControl::default();
        let spec = presets::example1();
        let rec = find_eigenvalue(&spec, SpectralIndex::pos(40), 0.25, &ctl).unwrap();
        let ns = find_nodes(&spec, &rec, &ctl).unwrap();
        let ta = nodal_asymptotic(&spec, SpectralIndex::pos(40), 5).unwrap();
        let gap = (ta - ns.nodes[4]).abs();
        assert!(gap <= 5e-3, "asymptotic {ta} vs numeric {} (gap {gap})", ns.nodes[4]);
    }

    #[test]
    fn node_index_lookup() {
        let ctl = SolverControl::default().refined(4.0);
        let rec = find_eigenvalue(&presets::t0(), SpectralIndex::pos(40), 0.25, &ctl).unwrap();
        let ns = find_nodes(&presets::t0(), &rec, &ctl).unwrap();
        assert_eq!(node_index_fn(&ns, 0.05), 1);
        assert_eq!(node_index_fn(&ns, 0.0), 0);
        assert_eq!(node_index_fn(&ns, PI), ns.nodes.len());
    }
}

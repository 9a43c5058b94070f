//! The characteristic function Ξ(μ) and eigenvalue location.
//!
//! Squares of the roots of
//!
//! ```text
//! Ξ(μ) = (μβ₁⁺ + β₁⁻)·φ(π, μ) - (μβ₂⁺ + β₂⁻)·φ'(π, μ)
//! ```
//!
//! are the eigenvalues of the boundary value problem. Away from the origin
//! the roots are indexed by the zeros of the comparison function
//! Ξ₀(μ) = μ³α₂⁺β₂⁺/∏δᵢ·sin(μπ), whose nonzero roots give the seeds
//! μₙ⁰ = n−1 (n ≥ 1) and n+1 (n ≤ −1); near the origin Ξ₀ has a 4-fold
//! zero and the four indices ±0, ±1 are resolved by a brute-force scan
//! instead.

use crate::asymptotics::{mu_asymptotic, AsymptoticsError};
use crate::integrate::{shoot, SolveError, SolverControl};
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

/// Sign half of a doubly-infinite index (the index set carries distinct
/// `+0` and `-0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Pos,
}

/// Signed eigenvalue index n ∈ {…, -1, -0, +0, +1, …}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpectralIndex {
    pub sign: Sign,
    pub magnitude: u32,
}

impl SpectralIndex {
    pub fn pos(magnitude: u32) -> Self {
        SpectralIndex {
            sign: Sign::Pos,
            magnitude,
        }
    }
    pub fn neg(magnitude: u32) -> Self {
        SpectralIndex {
            sign: Sign::Neg,
            magnitude,
        }
    }
    /// Sort key: ascending along the real line, `-0` before `+0`.
    pub fn order_key(self) -> (i64, i64) {
        match self.sign {
            Sign::Neg => (-(self.magnitude as i64), -1),
            Sign::Pos => (self.magnitude as i64, 1),
        }
    }
}

impl fmt::Display for SpectralIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Neg => '-',
            Sign::Pos => '+',
        };
        write!(f, "{s}{}", self.magnitude)
    }
}

/// Seed μₙ⁰: the zeros of Ξ₀ assigned to the index set; the four indices
/// ±0, ±1 all seed at 0.
pub fn mu_seed(n: SpectralIndex) -> f64 {
    match (n.sign, n.magnitude) {
        (_, 0) | (_, 1) => 0.0,
        (Sign::Pos, m) => (m - 1) as f64,
        (Sign::Neg, m) => -((m - 1) as f64),
    }
}

/// How a root was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    Bisection,
    Secant,
    ComplexSecant,
    SmallRootScan,
}

impl fmt::Display for RootMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootMethod::Bisection => "bisection",
            RootMethod::Secant => "secant",
            RootMethod::ComplexSecant => "complex-secant",
            RootMethod::SmallRootScan => "small-root-scan",
        })
    }
}

/// A located eigen-root with its provenance.
#[derive(Debug, Clone)]
pub struct EigenvalueRecord {
    pub index: SpectralIndex,
    pub seed: f64,
    /// Asymptotic estimate used to center the search (the seed itself for
    /// scan-located roots).
    pub estimate: f64,
    pub root: Complex64,
    pub residual: f64,
    pub method: RootMethod,
    pub iterations: usize,
}

impl EigenvalueRecord {
    /// Residual bound |Ξ(μ)| ≤ 10⁻⁸(1+|μ|³) that accepted roots satisfy.
    pub fn residual_bound(&self) -> f64 {
        residual_bound(self.root.norm())
    }
}

fn residual_bound(mu_abs: f64) -> f64 {
    1e-8 * (1.0 + mu_abs.powi(3))
}

/// Result of the near-origin scan: the four assigned records plus every
/// distinct root found in the window.
#[derive(Debug, Clone)]
pub struct SmallRootScan {
    pub records: Vec<EigenvalueRecord>,
    /// All distinct real roots found in (-bound, bound), ascending.
    pub found: Vec<f64>,
    pub diagnostics: Vec<String>,
}

/// Spectrum-level failures.
#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("index {index}: no convergence (estimate {estimate}, best residual {best_residual:.3e})")]
    NoConvergence {
        index: SpectralIndex,
        estimate: f64,
        best_residual: f64,
    },
}

/// Characteristic function via the shooting solution. With `S = f64` the
/// result is exactly real; complex μ uses the complex integrator.
pub fn xi<S: Scalar>(
    spec: &ProblemSpec,
    mu: S,
    control: &SolverControl,
) -> Result<S, SolveError> {
    let sol = shoot(spec, mu, control)?;
    let (y, yp) = sol.end_state();
    let left = mu.scale(spec.beta1_plus) + S::from_re(spec.beta1_minus);
    let right = mu.scale(spec.beta2_plus) + S::from_re(spec.beta2_minus);
    Ok(left * y - right * yp)
}

/// Comparison function Ξ₀(μ) = μ³·α₂⁺β₂⁺/∏δᵢ·sin(μπ).
pub fn xi0<S: Scalar>(spec: &ProblemSpec, mu: S) -> S {
    let c = spec.alpha2_plus * spec.beta2_plus / spec.delta_product();
    (mu * mu * mu).scale(c) * mu.scale(PI).sin()
}

/// Bisection on a bracketing interval; returns (root, iterations).
fn bisect(
    spec: &ProblemSpec,
    control: &SolverControl,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
) -> Result<(f64, usize), SolveError> {
    let mut iterations = 0;
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval at floating resolution
        }
        let fm = xi(spec, mid, control)?;
        iterations += 1;
        if fm == 0.0 {
            return Ok((mid, iterations));
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok((0.5 * (a + b), iterations))
}

/// Complex secant iteration on Ξ; accepts when the residual bound holds.
fn complex_secant(
    spec: &ProblemSpec,
    control: &SolverControl,
    z0: Complex64,
    z1: Complex64,
) -> Result<Option<(Complex64, f64, usize)>, SolveError> {
    let mut a = z0;
    let mut b = z1;
    let mut fa = xi(spec, a, control)?;
    let mut fb = xi(spec, b, control)?;
    for k in 1..=80 {
        let denom = fb - fa;
        if denom.norm() == 0.0 {
            return Ok(None);
        }
        let c = b - fb * (b - a) / denom;
        let fc = xi(spec, c, control)?;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if fb.norm() <= residual_bound(b.norm()) && (b - a).norm() <= 1e-10 * (1.0 + b.norm()) {
            return Ok(Some((b, fb.norm(), k)));
        }
    }
    // Accept a residual-only pass after the iteration budget.
    if fb.norm() <= residual_bound(b.norm()) {
        return Ok(Some((b, fb.norm(), 80)));
    }
    Ok(None)
}

/// Locate the eigen-root for index `n` near the asymptotic estimate.
///
/// A sign-change bracket of half-width `radius` (doubled up to 4× on
/// failure) is refined by bisection; if no bracket is found, a complex
/// secant from the estimate is tried. Indices seeded at 0 are outside this
/// routine's domain — use [`scan_small_roots`].
pub fn find_eigenvalue(
    spec: &ProblemSpec,
    n: SpectralIndex,
    radius: f64,
    control: &SolverControl,
) -> Result<EigenvalueRecord, SpectrumError> {
    let seed = mu_seed(n);
    let estimate = mu_asymptotic(spec, n)?;
    let mut best_residual = f64::INFINITY;
    for r in [radius, 2.0 * radius, 4.0 * radius] {
        let (a, b) = (estimate - r, estimate + r);
        let fa = xi(spec, a, control)?;
        let fb = xi(spec, b, control)?;
        if (fa < 0.0) != (fb < 0.0) {
            let (root, iterations) = bisect(spec, control, a, b, fa)?;
            let residual = xi(spec, root, control)?.abs();
            best_residual = best_residual.min(residual);
            if residual <= residual_bound(root.abs()) {
                return Ok(EigenvalueRecord {
                    index: n,
                    seed,
                    estimate,
                    root: Complex64::new(root, 0.0),
                    residual,
                    method: RootMethod::Bisection,
                    iterations,
                });
            }
        }
    }
    if let Some((root, residual, iterations)) = complex_secant(
        spec,
        control,
        Complex64::new(estimate, 0.0),
        Complex64::new(estimate, 0.01),
    )? {
        let root = if root.im.abs() <= 1e-10 * (1.0 + root.re.abs()) {
            Complex64::new(root.re, 0.0)
        } else {
            root
        };
        return Ok(EigenvalueRecord {
            index: n,
            seed,
            estimate,
            root,
            residual,
            method: RootMethod::ComplexSecant,
            iterations,
        });
    }
    Err(SpectrumError::NoConvergence {
        index: n,
        estimate,
        best_residual,
    })
}

/// Scan Ξ over [-bound, bound] (step 10⁻³), refine sign changes by
/// bisection, detect degenerate near-zero clusters (|Ξ|/(1+|μ|³) below
/// 10⁻⁸ without a sign change), and assign the four indices -1, -0, +0,
/// +1 to the four roots closest to the origin, counting a degenerate
/// cluster with multiplicity. Ties between ±μ resolve toward the negative
/// one.
pub fn scan_small_roots(
    spec: &ProblemSpec,
    bound: f64,
    control: &SolverControl,
) -> Result<SmallRootScan, SpectrumError> {
    const STEP: f64 = 1e-3;
    const CLUSTER_TOL: f64 = 1e-8;
    let count = (2.0 * bound / STEP).round() as usize;
    let grid: Vec<f64> = (0..=count).map(|k| -bound + k as f64 * STEP).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&m| xi(spec, m, control))
        .collect::<Result<_, _>>()?;

    let mut diagnostics = Vec::new();
    // Simple roots from sign changes.
    let mut simple = Vec::new();
    for k in 0..count {
        // Exact zeros at grid points are left to the cluster detector, so a
        // high-multiplicity root that happens to sit on the grid is not
        // miscounted as simple.
        if values[k] != 0.0 && values[k + 1] != 0.0 && (values[k] < 0.0) != (values[k + 1] < 0.0) {
            let (root, _) = bisect(spec, control, grid[k], grid[k + 1], values[k])?;
            simple.push(root);
        }
    }
    // Degenerate clusters: runs of scaled-tiny |Ξ| without a sign change.
    let scaled: Vec<f64> = grid
        .iter()
        .zip(&values)
        .map(|(&m, &v)| v.abs() / (1.0 + m.abs().powi(3)))
        .collect();
    let mut clusters = Vec::new();
    let mut k = 0;
    while k <= count {
        if scaled[k] < CLUSTER_TOL {
            let start = k;
            while k + 1 <= count && scaled[k + 1] < CLUSTER_TOL {
                k += 1;
            }
            let lo = grid[start];
            let hi = grid[k];
            let contains_simple = simple.iter().any(|&r| r >= lo - STEP && r <= hi + STEP);
            if !contains_simple {
                // Center of the run, by minimum scaled value.
                let center = (start..=k)
                    .min_by(|&i, &j| scaled[i].partial_cmp(&scaled[j]).unwrap())
                    .map(|i| grid[i])
                    .unwrap();
                diagnostics.push(format!(
                    "degenerate root cluster around mu = {center:.6} (width {:.3e}, no sign change); treated with multiplicity up to 4",
                    hi - lo
                ));
                clusters.push(center);
            }
        }
        k += 1;
    }

    let mut found: Vec<f64> = simple.iter().chain(clusters.iter()).copied().collect();
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());

    if found.is_empty() {
        return Err(SpectrumError::NoConvergence {
            index: SpectralIndex::pos(0),
            estimate: 0.0,
            best_residual: scaled
                .iter()
                .fold(f64::INFINITY, |acc, &s| acc.min(s)),
        });
    }

    // Candidate multiset: simple roots once, clusters with multiplicity 4.
    let mut candidates: Vec<f64> = simple.clone();
    for &c in &clusters {
        candidates.extend([c; 4]);
    }
    // Closest to the origin first; exact ± ties pick the negative root.
    candidates.sort_by(|a, b| {
        (a.abs(), a.signum())
            .partial_cmp(&(b.abs(), b.signum()))
            .unwrap()
    });
    let mut four: Vec<f64> = candidates.iter().take(4).copied().collect();
    while four.len() < 4 {
        diagnostics.push(format!(
            "only {} root(s) found in (-{bound}, {bound}); padding with the nearest",
            four.len()
        ));
        four.push(four[four.len() - 1]);
    }
    if simple.len() + clusters.len() != 4 {
        diagnostics.push(format!(
            "found {} distinct root(s) in (-{bound}, {bound}), expected 4",
            simple.len() + clusters.len()
        ));
    }
    four.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let indices = [
        SpectralIndex::neg(1),
        SpectralIndex::neg(0),
        SpectralIndex::pos(0),
        SpectralIndex::pos(1),
    ];
    let mut records = Vec::with_capacity(4);
    for (idx, &root) in indices.iter().zip(&four) {
        let residual = xi(spec, root, control)?.abs();
        records.push(EigenvalueRecord {
            index: *idx,
            seed: 0.0,
            estimate: 0.0,
            root: Complex64::new(root, 0.0),
            residual,
            method: RootMethod::SmallRootScan,
            iterations: 0,
        });
    }
    Ok(SmallRootScan {
        records,
        found,
        diagnostics,
    })
}

/// |Ξ'(μₙ)| by central difference, as a simplicity check; simple roots
/// should clear 10⁻⁶·(1+|μₙ|²).
pub fn verify_simplicity(
    spec: &ProblemSpec,
    rec: &EigenvalueRecord,
    control: &SolverControl,
) -> Result<f64, SolveError> {
    let h = 1e-6 * (1.0 + rec.root.norm());
    if rec.root.im == 0.0 {
        let fp = xi(spec, rec.root.re + h, control)?;
        let fm = xi(spec, rec.root.re - h, control)?;
        Ok(((fp - fm) / (2.0 * h)).abs())
    } else {
        let dh = Complex64::new(h, 0.0);
        let fp = xi(spec, rec.root + dh, control)?;
        let fm = xi(spec, rec.root - dh, control)?;
        Ok(((fp - fm) / (2.0 * h)).norm())
    }
}

/// Locate many eigen-roots in parallel; the output order matches the
/// input order regardless of worker count. Indices seeded at 0 are
/// resolved by one shared scan.
pub fn sweep(
    spec: &ProblemSpec,
    indices: &[SpectralIndex],
    radius: f64,
    control: &SolverControl,
) -> Vec<Result<EigenvalueRecord, SpectrumError>> {
    let needs_scan = indices.iter().any(|n| mu_seed(*n) == 0.0);
    let scan = if needs_scan {
        Some(scan_small_roots(spec, 2.5, control))
    } else {
        None
    };
    indices
        .par_iter()
        .map(|&n| {
            if mu_seed(n) == 0.0 {
                match scan.as_ref().unwrap() {
                    Ok(s) => Ok(s
                        .records
                        .iter()
                        .find(|r| r.index == n)
                        .expect("scan assigns all four near-origin indices")
                        .clone()),
                    Err(_) => Err(SpectrumError::NoConvergence {
                        index: n,
                        estimate: 0.0,
                        best_residual: f64::INFINITY,
                    }),
                }
            } else {
                find_eigenvalue(spec, n, radius, control)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn ctl() -> SolverControl {
        SolverControl::default()
    }

    #[test]
    fn index_display_and_order() {
        assert_eq!(SpectralIndex::pos(40).to_string(), "+40");
        assert_eq!(SpectralIndex::neg(0).to_string(), "-0");
        let mut v = vec![
            SpectralIndex::pos(1),
            SpectralIndex::neg(2),
            SpectralIndex::pos(0),
            SpectralIndex::neg(0),
        ];
        v.sort_by_key(|n| n.order_key());
        assert_eq!(
            v.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            ["-2", "-0", "+0", "+1"]
        );
    }

    #[test]
    fn seeds() {
        assert_eq!(mu_seed(SpectralIndex::pos(40)), 39.0);
        assert_eq!(mu_seed(SpectralIndex::neg(5)), -4.0);
        assert_eq!(mu_seed(SpectralIndex::pos(0)), 0.0);
        assert_eq!(mu_seed(SpectralIndex::neg(0)), 0.0);
        assert_eq!(mu_seed(SpectralIndex::pos(1)), 0.0);
        assert_eq!(mu_seed(SpectralIndex::neg(1)), 0.0);
        assert_eq!(mu_seed(SpectralIndex::pos(2)), 1.0);
    }

    #[test]
    fn xi_t0_closed_form() {
        let v = xi(&presets::t0(), 0.5, &ctl()).unwrap();
        assert!((v - 0.125).abs() < 1e-9, "xi = {v}");
        let v = xi(&presets::t0(), 1.0, &ctl()).unwrap();
        assert!(v.abs() < 1e-9, "xi(1) = {v}");
    }

    #[test]
    fn xi_matches_xi0_on_t0() {
        let fine = ctl().refined(16.0);
        for k in 0..=25 {
            let mu = 0.2 + (50.0 - 0.2) * k as f64 / 25.0;
            let a = xi(&presets::t0(), mu, &fine).unwrap();
            let b = xi0(&presets::t0(), mu);
            let scale = 1.0 + mu.powi(3);
            assert!((a - b).abs() / scale <= 1e-8, "mu={mu}: {a} vs {b}");
        }
    }

    #[test]
    fn xi0_values() {
        assert_eq!(xi0(&presets::t0(), 0.5), 0.125);
        assert!(xi0(&presets::example2(), 1.0).abs() < 1e-15);
        assert!((xi0(&presets::example2(), 0.5) - 0.0546875).abs() < 1e-15);
    }

    #[test]
    fn xi_cross_oracle_example2() {
        // Shooting-based Ξ against a Picard-backed evaluation.
        let spec = presets::example2();
        let mu = 10.0;
        let a = xi(&spec, mu, &ctl()).unwrap();
        let pic = crate::integrate::picard_solve(&spec, mu, 8, 80_000).unwrap();
        let (y, yp) = pic.end_state();
        let b = (mu * spec.beta1_plus + spec.beta1_minus) * y
            - (mu * spec.beta2_plus + spec.beta2_minus) * yp;
        assert!((a - b).abs() / b.abs() <= 1e-5, "{a} vs {b}");
    }

    #[test]
    fn find_t0_eigenvalue() {
        let rec = find_eigenvalue(&presets::t0(), SpectralIndex::pos(40), 0.25, &ctl().refined(8.0))
            .unwrap();
        assert_eq!(rec.method, RootMethod::Bisection);
        assert!((rec.root.re - 39.0).abs() <= 1e-9, "root {}", rec.root);
        assert_eq!(rec.root.im, 0.0);
        assert!(rec.residual <= rec.residual_bound());
    }

    #[test]
    fn find_t1_eigenvalue() {
        // Roots of μ²ω·sin(ωπ) with ω = √(μ²+1): μ = √(k²-1).
        let rec = find_eigenvalue(&presets::t1(), SpectralIndex::pos(40), 0.25, &ctl().refined(8.0))
            .unwrap();
        let exact = (39.0f64 * 39.0 - 1.0).sqrt();
        assert!(
            (rec.root.re - exact).abs() <= 1e-7,
            "root {} vs {exact}",
            rec.root.re
        );
    }

    #[test]
    fn find_example2_eigenvalue() {
        let rec =
            find_eigenvalue(&presets::example2(), SpectralIndex::pos(40), 0.25, &ctl()).unwrap();
        assert!((rec.estimate - 38.8979716).abs() < 1e-6);
        assert!((rec.root.re - rec.estimate).abs() <= 0.01, "root {}", rec.root.re);
        assert!(rec.residual <= rec.residual_bound());
    }

    #[test]
    fn negative_indices_mirror_positive_for_even_xi() {
        // T1's Ξ is even in μ, so the -n root is the negative of the +n root.
        let c = ctl();
        let p = find_eigenvalue(&presets::t1(), SpectralIndex::pos(12), 0.25, &c).unwrap();
        let m = find_eigenvalue(&presets::t1(), SpectralIndex::neg(12), 0.25, &c).unwrap();
        assert!((p.root.re + m.root.re).abs() < 1e-8);
    }

    #[test]
    fn scan_t0_reports_degenerate_origin() {
        let scan = scan_small_roots(&presets::t0(), 2.5, &ctl()).unwrap();
        assert_eq!(scan.records.len(), 4);
        for rec in &scan.records {
            assert!(rec.root.re.abs() < 1e-5, "assigned root {}", rec.root.re);
            assert_eq!(rec.method, RootMethod::SmallRootScan);
        }
        assert!(scan
            .diagnostics
            .iter()
            .any(|d| d.contains("degenerate") && d.contains("multiplicity")));
        // The window also contains the simple roots ±1, ±2.
        for target in [-2.0, -1.0, 1.0, 2.0] {
            assert!(
                scan.found.iter().any(|r| (r - target).abs() < 1e-6),
                "missing {target} in {:?}",
                scan.found
            );
        }
    }

    #[test]
    fn scan_t1_finds_sqrt3() {
        let scan = scan_small_roots(&presets::t1(), 2.5, &ctl()).unwrap();
        let s3 = 3.0f64.sqrt();
        for target in [-s3, s3] {
            assert!(
                scan.found.iter().any(|r| (r - target).abs() < 1e-6),
                "missing {target} in {:?}",
                scan.found
            );
        }
        // The assigned four all sit at the degenerate origin root.
        for rec in &scan.records {
            assert!(rec.root.re.abs() < 1e-5);
        }
    }

    #[test]
    fn scan_example1_frozen_roots() {
        // Frozen against an independent sign-change scan at step 1e-4: only
        // three real roots live in the window, so the scan pads and says so.
        let scan = scan_small_roots(&presets::example1(), 2.5, &ctl()).unwrap();
        let expected = [-1.979478230738, 1.060385964321, 2.198756770716];
        assert_eq!(scan.found.len(), 3, "found {:?}", scan.found);
        for (got, want) in scan.found.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert_eq!(scan.records.len(), 4);
        for rec in &scan.records {
            assert!(rec.residual <= rec.residual_bound());
        }
        assert!(scan.diagnostics.iter().any(|d| d.contains("padding")));
        assert!(scan.diagnostics.iter().any(|d| d.contains("expected 4")));
    }

    #[test]
    fn simplicity_t0() {
        let c = ctl().refined(4.0);
        let rec = find_eigenvalue(&presets::t0(), SpectralIndex::pos(40), 0.25, &c).unwrap();
        let d = verify_simplicity(&presets::t0(), &rec, &c).unwrap();
        // |d/dμ (μ³ sin μπ)| at 39 = 39³π.
        assert!((d - 39.0f64.powi(3) * PI).abs() <= 1.0, "|Xi'| = {d}");
        let rec1 = EigenvalueRecord {
            index: SpectralIndex::pos(2),
            seed: 1.0,
            estimate: 1.0,
            root: Complex64::new(1.0, 0.0),
            residual: 0.0,
            method: RootMethod::Bisection,
            iterations: 0,
        };
        let d1 = verify_simplicity(&presets::t0(), &rec1, &c).unwrap();
        assert!((d1 - PI).abs() < 1e-4, "|Xi'(1)| = {d1}");
    }

    #[test]
    fn simplicity_example2() {
        let rec =
            find_eigenvalue(&presets::example2(), SpectralIndex::pos(40), 0.25, &ctl()).unwrap();
        let d = verify_simplicity(&presets::example2(), &rec, &ctl()).unwrap();
        assert!(d > 1e-6 * (1.0 + rec.root.norm_sqr()), "|Xi'| = {d}");
    }

    #[test]
    fn complex_secant_recovers_a_real_root() {
        // Start well off the real axis; the T0 root at 39 is recovered.
        let c = ctl().refined(4.0);
        let got = complex_secant(
            &presets::t0(),
            &c,
            Complex64::new(39.2, 0.05),
            Complex64::new(39.15, -0.02),
        )
        .unwrap();
        let (root, residual, _) = got.expect("secant converges");
        assert!((root - Complex64::new(39.0, 0.0)).norm() < 1e-6, "root {root}");
        assert!(residual <= residual_bound(root.norm()));
    }

    #[test]
    fn sweep_is_order_stable_and_matches_serial() {
        let spec = presets::t1();
        let indices: Vec<SpectralIndex> = (3..10).map(SpectralIndex::pos).collect();
        let par: Vec<f64> = sweep(&spec, &indices, 0.25, &ctl())
            .into_iter()
            .map(|r| r.unwrap().root.re)
            .collect();
        let ser: Vec<f64> = indices
            .iter()
            .map(|&n| find_eigenvalue(&spec, n, 0.25, &ctl()).unwrap().root.re)
            .collect();
        assert_eq!(par, ser);
        for (k, root) in par.iter().enumerate() {
            let kk = (k + 3 - 1) as f64; // seed of index k+3
            assert!((root - (kk * kk - 1.0).sqrt()).abs() < 1e-6);
        }
    }
}

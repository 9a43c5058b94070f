//! Built-in problem instances: the two worked examples plus closed-form
//! trivia used throughout the test suite.

use crate::expr::ScalarFn;
use crate::problem::ProblemSpec;
use std::f64::consts::FRAC_PI_2;

/// Worked example 1: q(t) = t with delay Δ(t) = t/2, one transmission
/// point θ₁ = 1 with unit jump, boundary conditions
/// y(0) + 8y'(0) + μy'(0) = 0 and y(π) + 0.1·y'(π) + μy'(π) = 0.
pub fn example1() -> ProblemSpec {
    ProblemSpec {
        theta: vec![1.0],
        delta: vec![1.0],
        alpha1_minus: 1.0,
        alpha1_plus: 0.0,
        alpha2_minus: -8.0,
        alpha2_plus: -1.0,
        beta1_minus: 1.0,
        beta1_plus: 0.0,
        beta2_minus: -0.1,
        beta2_plus: -1.0,
        q: ScalarFn::from_expr("t").unwrap(),
        delay: ScalarFn::from_expr("t/2").unwrap(),
    }
}

/// Worked example 2: q(t) = eᵗ without delay, transmission points
/// θ = (1.5, 2) with jumps δ = (2, 8), boundary conditions
/// (3μ+2)y(0) − (7μ+4)y'(0) = 0 and (μ−5)y(π) − (μ+0.3)y'(π) = 0.
pub fn example2() -> ProblemSpec {
    ProblemSpec {
        theta: vec![1.5, 2.0],
        delta: vec![2.0, 8.0],
        alpha1_minus: 2.0,
        alpha1_plus: 3.0,
        alpha2_minus: 4.0,
        alpha2_plus: 7.0,
        beta1_minus: -5.0,
        beta1_plus: 1.0,
        beta2_minus: 0.3,
        beta2_plus: 1.0,
        q: ScalarFn::from_expr("exp(t)").unwrap(),
        delay: ScalarFn::constant(0.0),
    }
}

/// Example 2's geometry and potential with the μ-linear boundary weights
/// α₁⁺, β₁⁺ removed. With α₁⁺ = β₁⁺ = 0 the printed nodal limit-function
/// formulas are internally consistent, so this is the round-trip
/// reconstruction instance.
pub fn e2flat() -> ProblemSpec {
    let mut spec = example2();
    spec.alpha1_plus = 0.0;
    spec.beta1_plus = 0.0;
    spec
}

/// Trivial instance T0: q ≡ 0, Δ ≡ 0, one interior point θ₁ = π/2 with
/// unit jump. The shooting solution is φ(t) = μcos(μt) and the
/// characteristic function is Ξ(μ) = μ³ sin(μπ).
pub fn t0() -> ProblemSpec {
    ProblemSpec {
        theta: vec![FRAC_PI_2],
        delta: vec![1.0],
        alpha1_minus: 0.0,
        alpha1_plus: 0.0,
        alpha2_minus: 0.0,
        alpha2_plus: 1.0,
        beta1_minus: 0.0,
        beta1_plus: 0.0,
        beta2_minus: 0.0,
        beta2_plus: 1.0,
        q: ScalarFn::constant(0.0),
        delay: ScalarFn::constant(0.0),
    }
}

/// T1 = T0 with q ≡ 1: φ(t) = μcos(ωt) with ω = √(μ²+1) and
/// Ξ(μ) = μ²ω sin(ωπ); positive roots are √(k²−1).
pub fn t1() -> ProblemSpec {
    let mut spec = t0();
    spec.q = ScalarFn::constant(1.0);
    spec
}

/// T2 = T0 with α₁⁺ = 1, a minimal instance whose trace series is not
/// identically zero.
pub fn t2() -> ProblemSpec {
    let mut spec = t0();
    spec.alpha1_plus = 1.0;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate;

    #[test]
    fn all_presets_validate() {
        for spec in [example1(), example2(), e2flat(), t0(), t1(), t2()] {
            assert!(validate(&spec).pass);
        }
    }

    #[test]
    fn delay_detection() {
        assert!(!example1().delay_is_zero());
        assert!(example2().delay_is_zero());
        assert!(t0().delay_is_zero());
    }
}

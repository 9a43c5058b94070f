//! Forward integration of the delayed Sturm-Liouville equation.
//!
//! [`shoot`] integrates the initial value problem
//!
//! ```text
//! y'' + q(t) y(t - Δ(t)) + μ² y = 0,
//! y(0) = μα₂⁺ + α₂⁻,   y'(0) = μα₁⁺ + α₁⁻,
//! ```
//!
//! across the segments of `[0, π]` with the method of steps (delayed values
//! are read from the already-built dense output), dividing the state by δᵢ
//! at each transmission point. The stepper is the classical 4th-order
//! Runge-Kutta with a fixed step per segment; dense output is a C¹ cubic
//! Hermite in both `y` and `y'`.
//!
//! [`picard_solve`] is an independent oracle: it iterates the equivalent
//! Volterra integral equations with trapezoidal quadrature and shares no
//! code with the stepper.

use crate::expr::EvalError;
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;
use std::f64::consts::PI;
use thiserror::Error;

/// Tuning knobs for the fixed-step integrator.
#[derive(Debug, Clone)]
pub struct SolverControl {
    /// Base step; the actual step also shrinks with |μ|.
    pub h_max: f64,
    /// Oscillation guard: the step is scaled by c_osc·π/(1+|μ|) when that
    /// is below 1, giving at least ~c_osc steps per oscillation period.
    pub c_osc: f64,
    /// Convergence tolerance of the per-step fixed-point iteration used
    /// when the delayed argument lands inside the current step.
    pub tol_step: f64,
    /// Cap on those fixed-point sweeps.
    pub max_step_iters: usize,
}

impl Default for SolverControl {
    fn default() -> Self {
        SolverControl {
            h_max: PI / 2000.0,
            c_osc: 8.0,
            tol_step: 1e-12,
            max_step_iters: 5,
        }
    }
}

impl SolverControl {
    /// A finer-stepped control: `h_max` divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        SolverControl {
            h_max: self.h_max / factor,
            ..self.clone()
        }
    }

    /// Step size used for a given μ modulus.
    pub fn step_for(&self, mu_abs: f64) -> f64 {
        let osc = self.c_osc * PI / (1.0 + mu_abs);
        if osc < 1.0 {
            self.h_max * osc
        } else {
            self.h_max
        }
    }
}

/// Integration failures.
#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("coefficient evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("delayed argument t - delay(t) = {s} < 0 at t = {t}")]
    NegativeDelayedArgument { t: f64, s: f64 },
    #[error("t = {0} outside the solution range")]
    OutOfRange(f64),
    #[error("invalid solver control: {0}")]
    BadControl(String),
    #[error("mu = 0 is outside the Picard solver's domain (kernels carry 1/mu)")]
    ZeroMu,
    #[error("iteration count must be at least 1")]
    BadIterations,
}

/// One segment of the solution: nodes with state, first and second
/// derivatives (the latter from the differential equation, for C¹ dense
/// output of `y'`).
#[derive(Debug, Clone)]
pub struct Segment<S> {
    pub a: f64,
    pub b: f64,
    pub ts: Vec<f64>,
    pub y: Vec<S>,
    pub yp: Vec<S>,
    pub ypp: Vec<S>,
}

impl<S: Scalar> Segment<S> {
    /// Cubic-Hermite value and derivative inside this segment.
    fn eval(&self, t: f64) -> (S, S) {
        let n = self.ts.len();
        // Locate the step containing t.
        let k = match self
            .ts
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => return (self.y[i], self.yp[i]),
            Err(_) if n == 1 => return (self.y[0], self.yp[0]),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let h = self.ts[k + 1] - self.ts[k];
        let s = (t - self.ts[k]) / h;
        let y = hermite(s, h, self.y[k], self.y[k + 1], self.yp[k], self.yp[k + 1]);
        let yp = hermite(s, h, self.yp[k], self.yp[k + 1], self.ypp[k], self.ypp[k + 1]);
        (y, yp)
    }
}

/// Cubic Hermite on [0,1] with values v0,v1 and derivatives (w.r.t. t,
/// step h) d0,d1.
fn hermite<S: Scalar>(s: f64, h: f64, v0: S, v1: S, d0: S, d1: S) -> S {
    let s2 = s * s;
    let s3 = s2 * s;
    v0.scale(2.0 * s3 - 3.0 * s2 + 1.0)
        + d0.scale((s3 - 2.0 * s2 + s) * h)
        + v1.scale(-2.0 * s3 + 3.0 * s2)
        + d1.scale((s3 - s2) * h)
}

/// The full trajectory over [0, π] with jumps at the interior points.
/// Stored values are post-jump at every segment start, so delayed-value
/// lookups need no jump adjustment.
#[derive(Debug, Clone)]
pub struct PiecewiseSolution<S> {
    pub segments: Vec<Segment<S>>,
}

impl<S: Scalar> PiecewiseSolution<S> {
    /// Final state (y(π), y'(π)).
    pub fn end_state(&self) -> (S, S) {
        let seg = self.segments.last().unwrap();
        (*seg.y.last().unwrap(), *seg.yp.last().unwrap())
    }

    /// Left-limit state at the end of segment `i` (pre-jump at θᵢ₊₁).
    pub fn left_limit(&self, i: usize) -> (S, S) {
        let seg = &self.segments[i];
        (*seg.y.last().unwrap(), *seg.yp.last().unwrap())
    }

    fn segment_index(&self, t: f64) -> Result<usize, SolveError> {
        let first = self.segments.first().ok_or(SolveError::OutOfRange(t))?;
        let last = self.segments.last().unwrap();
        if t < first.a - 1e-12 || t > last.b + 1e-12 {
            return Err(SolveError::OutOfRange(t));
        }
        // Rightmost segment whose start does not exceed t: interior points
        // resolve to the post-jump side.
        let mut i = self.segments.len() - 1;
        while i > 0 && t < self.segments[i].a {
            i -= 1;
        }
        Ok(i)
    }
}

/// Dense-output evaluation; at an interior point θᵢ this returns the right
/// (post-jump) state.
pub fn eval_solution<S: Scalar>(
    sol: &PiecewiseSolution<S>,
    t: f64,
) -> Result<(S, S), SolveError> {
    let i = sol.segment_index(t)?;
    let seg = &sol.segments[i];
    Ok(seg.eval(t.clamp(seg.a, seg.b)))
}

// ---------------------------------------------------------------------------
// Shooting integrator

struct Integrator<'a, S: Scalar> {
    spec: &'a ProblemSpec,
    mu2: S,
    delay_zero: bool,
    /// Segments committed so far (current one included, growing in place).
    segments: Vec<Segment<S>>,
}

impl<'a, S: Scalar> Integrator<'a, S> {
    /// History value y(s) from committed nodes; `s` must not exceed the
    /// last committed node time.
    fn history_y(&self, s: f64) -> S {
        let mut i = self.segments.len() - 1;
        while i > 0 && s < self.segments[i].a {
            i -= 1;
        }
        let seg = &self.segments[i];
        let last = *seg.ts.last().unwrap();
        seg.eval(s.min(last)).0
    }

    /// Right-hand side y'' = -(q(t)·y(t-Δ(t)) + μ²·y). `stage_y` is the
    /// current stage value of y; `provisional` covers delayed arguments
    /// inside the not-yet-committed step.
    fn rhs(
        &self,
        t: f64,
        stage_y: S,
        provisional: &Provisional<S>,
        used_provisional: &mut bool,
    ) -> Result<S, SolveError> {
        let qv = self.spec.q.eval(t)?;
        let delayed = if self.delay_zero {
            stage_y
        } else {
            let d = self.spec.delay.eval(t)?;
            let s = t - d;
            if s < -1e-12 {
                return Err(SolveError::NegativeDelayedArgument { t, s });
            }
            let s = s.max(0.0);
            if s <= provisional.t0 {
                self.history_y(s)
            } else {
                *used_provisional = true;
                provisional.eval_y(s)
            }
        };
        Ok(-(delayed.scale(qv) + self.mu2 * stage_y))
    }
}

/// Local cubic-Hermite interpolant over the step being integrated, built
/// from the committed left state and the provisional right state.
struct Provisional<S> {
    t0: f64,
    h: f64,
    y0: S,
    yp0: S,
    y1: S,
    yp1: S,
}

impl<S: Scalar> Provisional<S> {
    fn eval_y(&self, s: f64) -> S {
        let x = ((s - self.t0) / self.h).clamp(0.0, 1.0);
        hermite(x, self.h, self.y0, self.y1, self.yp0, self.yp1)
    }
}

/// Integrate from t = 0 with an arbitrary initial state. [`shoot`] wraps
/// this with the μ-dependent boundary-form initial state; tests use it
/// directly (e.g. to verify linearity in the initial data).
pub fn integrate_with_initial_state<S: Scalar>(
    spec: &ProblemSpec,
    mu: S,
    y0: S,
    yp0: S,
    control: &SolverControl,
) -> Result<PiecewiseSolution<S>, SolveError> {
    if !(control.h_max > 0.0) || !(control.c_osc >= 1.0) || !(control.tol_step > 0.0) {
        return Err(SolveError::BadControl(format!(
            "h_max = {}, c_osc = {}, tol_step = {}",
            control.h_max, control.c_osc, control.tol_step
        )));
    }
    let h_target = control.step_for(mu.abs());
    let boundaries = spec.boundaries();
    let mut integ = Integrator {
        spec,
        mu2: mu * mu,
        delay_zero: spec.delay_is_zero(),
        segments: Vec::with_capacity(boundaries.len() - 1),
    };

    let mut y = y0;
    let mut yp = yp0;
    for i in 0..boundaries.len() - 1 {
        let (a, b) = (boundaries[i], boundaries[i + 1]);
        if i > 0 {
            // Transmission: divide the state by δᵢ (stored values are
            // post-jump).
            let inv = 1.0 / spec.delta[i - 1];
            y = y.scale(inv);
            yp = yp.scale(inv);
        }
        let n = ((b - a) / h_target).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        integ.segments.push(Segment {
            a,
            b,
            ts: Vec::with_capacity(n + 1),
            y: Vec::with_capacity(n + 1),
            yp: Vec::with_capacity(n + 1),
            ypp: Vec::with_capacity(n + 1),
        });
        // Commit the segment-start node.
        push_node(&mut integ, a, a, y, yp, y, yp)?;
        for k in 0..n {
            let t0 = a + k as f64 * h;
            let t1 = if k + 1 == n { b } else { a + (k + 1) as f64 * h };
            let (py, pyp) = (y, yp);
            let (ny, nyp) = rk4_step(&mut integ, t0, t1 - t0, y, yp, control)?;
            y = ny;
            yp = nyp;
            push_node(&mut integ, t0, t1, py, pyp, y, yp)?;
        }
    }
    Ok(PiecewiseSolution {
        segments: integ.segments,
    })
}

/// Commit a node at `t`: store (y, y') and the equation-derived y''.
///
/// Computing y'' needs the delayed value y(t - Δ(t)). That argument may
/// fall inside the step (t_prev, t] just taken, whose y'' entry does not
/// exist yet, so the step's own converged Hermite interpolant is passed in
/// for that range; older times go through the regular history lookup.
fn push_node<S: Scalar>(
    integ: &mut Integrator<S>,
    t_prev: f64,
    t: f64,
    y_prev: S,
    yp_prev: S,
    y: S,
    yp: S,
) -> Result<(), SolveError> {
    {
        let seg = integ.segments.last_mut().unwrap();
        seg.ts.push(t);
        seg.y.push(y);
        seg.yp.push(yp);
    }
    let h = t - t_prev;
    let prov = Provisional {
        t0: t_prev,
        h: if h > 0.0 { h } else { 1.0 },
        y0: y_prev,
        yp0: yp_prev,
        y1: y,
        yp1: yp,
    };
    let mut unused = false;
    let ypp = integ.rhs(t, y, &prov, &mut unused)?;
    integ.segments.last_mut().unwrap().ypp.push(ypp);
    Ok(())
}

/// One classical RK4 step with fixed-point handling of delayed arguments
/// that land inside the step itself.
fn rk4_step<S: Scalar>(
    integ: &mut Integrator<S>,
    t0: f64,
    h: f64,
    y0: S,
    yp0: S,
    control: &SolverControl,
) -> Result<(S, S), SolveError> {
    let mut prov = Provisional {
        t0,
        h,
        y0,
        yp0,
        y1: y0,
        yp1: yp0,
    };
    let mut result = (y0, yp0);
    for _ in 0..=control.max_step_iters {
        let mut used_provisional = false;
        let half = 0.5 * h;
        // k1
        let a1 = integ.rhs(t0, y0, &prov, &mut used_provisional)?;
        let k1 = (yp0, a1);
        // k2
        let y_mid = y0 + k1.0.scale(half);
        let yp_mid = yp0 + k1.1.scale(half);
        let a2 = integ.rhs(t0 + half, y_mid, &prov, &mut used_provisional)?;
        let k2 = (yp_mid, a2);
        // k3
        let y_mid = y0 + k2.0.scale(half);
        let yp_mid = yp0 + k2.1.scale(half);
        let a3 = integ.rhs(t0 + half, y_mid, &prov, &mut used_provisional)?;
        let k3 = (yp_mid, a3);
        // k4
        let y_end = y0 + k3.0.scale(h);
        let yp_end = yp0 + k3.1.scale(h);
        let a4 = integ.rhs(t0 + h, y_end, &prov, &mut used_provisional)?;
        let k4 = (yp_end, a4);

        let y1 = y0 + (k1.0 + k2.0.scale(2.0) + k3.0.scale(2.0) + k4.0).scale(h / 6.0);
        let yp1 = yp0 + (k1.1 + k2.1.scale(2.0) + k3.1.scale(2.0) + k4.1).scale(h / 6.0);

        let change = (y1 - prov.y1).abs() + (yp1 - prov.yp1).abs();
        let scale = 1.0 + y1.abs() + yp1.abs();
        result = (y1, yp1);
        prov.y1 = y1;
        prov.yp1 = yp1;
        if !used_provisional || change <= control.tol_step * scale {
            break;
        }
    }
    Ok(result)
}

/// Shooting solution φ(·, μ): the initial value problem with
/// y(0) = μα₂⁺ + α₂⁻ and y'(0) = μα₁⁺ + α₁⁻.
pub fn shoot<S: Scalar>(
    spec: &ProblemSpec,
    mu: S,
    control: &SolverControl,
) -> Result<PiecewiseSolution<S>, SolveError> {
    let y0 = mu.scale(spec.alpha2_plus) + S::from_re(spec.alpha2_minus);
    let yp0 = mu.scale(spec.alpha1_plus) + S::from_re(spec.alpha1_minus);
    integrate_with_initial_state(spec, mu, y0, yp0, control)
}

// ---------------------------------------------------------------------------
// Picard (successive approximation) oracle

/// Solve the equivalent Volterra integral equations by successive
/// approximation with trapezoidal quadrature on a uniform per-segment
/// grid. Independent of the RK4 path; used as a cross-validation oracle.
///
/// On the first segment the iteration is
///
/// ```text
/// y_{k+1}(t) = y(0)cos(μt) + y'(0)/μ·sin(μt)
///              - (1/μ)∫₀ᵗ q(τ) sin μ(t-τ) y_k(τ-Δ(τ)) dτ,
/// ```
///
/// and on later segments the same form anchored at θᵢ with the jumped
/// state. Segments are solved in order, each iterated `iterations` times.
pub fn picard_solve<S: Scalar>(
    spec: &ProblemSpec,
    mu: S,
    iterations: usize,
    nodes_per_segment: usize,
) -> Result<PiecewiseSolution<S>, SolveError> {
    if mu.abs() == 0.0 {
        return Err(SolveError::ZeroMu);
    }
    if iterations < 1 {
        return Err(SolveError::BadIterations);
    }
    let n = nodes_per_segment.max(2);
    let boundaries = spec.boundaries();
    let delay_zero = spec.delay_is_zero();
    let mut segments: Vec<Segment<S>> = Vec::with_capacity(boundaries.len() - 1);

    let mut base_y = mu.scale(spec.alpha2_plus) + S::from_re(spec.alpha2_minus);
    let mut base_yp = mu.scale(spec.alpha1_plus) + S::from_re(spec.alpha1_minus);

    for i in 0..boundaries.len() - 1 {
        let (a, b) = (boundaries[i], boundaries[i + 1]);
        if i > 0 {
            let inv = 1.0 / spec.delta[i - 1];
            base_y = base_y.scale(inv);
            base_yp = base_yp.scale(inv);
        }
        let h = (b - a) / (n - 1) as f64;
        let ts: Vec<f64> = (0..n)
            .map(|k| if k + 1 == n { b } else { a + k as f64 * h })
            .collect();
        let qs: Vec<f64> = ts.iter().map(|&t| spec.q.eval(t)).collect::<Result<_, _>>()?;
        let (sin_loc, cos_loc): (Vec<S>, Vec<S>) = ts
            .iter()
            .map(|&t| {
                let arg = mu.scale(t - a);
                (arg.sin(), arg.cos())
            })
            .unzip();
        // Kernel-free part and its derivative.
        let base: Vec<S> = (0..n)
            .map(|k| base_y * cos_loc[k] + (base_yp / mu) * sin_loc[k])
            .collect();
        let base_d: Vec<S> = (0..n)
            .map(|k| base_yp * cos_loc[k] - base_y * mu * sin_loc[k])
            .collect();

        // Delayed arguments per node (s = τ - Δ(τ)).
        let delayed_arg: Vec<f64> = if delay_zero {
            ts.clone()
        } else {
            ts.iter()
                .map(|&t| {
                    let d = spec.delay.eval(t)?;
                    let s = t - d;
                    if s < -1e-12 {
                        return Err(SolveError::NegativeDelayedArgument { t, s });
                    }
                    Ok(s.max(0.0))
                })
                .collect::<Result<_, _>>()?
        };

        let mut cur: Vec<S> = base.clone();
        let mut ca = vec![S::ZERO; n];
        let mut cb = vec![S::ZERO; n];
        for _ in 0..iterations {
            // w(τ) = y_k(τ - Δ(τ)), read from earlier segments or the
            // previous iterate on this one (linear interpolation).
            let w: Vec<S> = (0..n)
                .map(|k| lookup_linear(&segments, &ts, &cur, a, delayed_arg[k]))
                .collect();
            // Cumulative trapezoid of q·cos(μ(τ-a))·w and q·sin(μ(τ-a))·w.
            ca[0] = S::ZERO;
            cb[0] = S::ZERO;
            for k in 0..n - 1 {
                let hk = ts[k + 1] - ts[k];
                let fa0 = (cos_loc[k] * w[k]).scale(qs[k]);
                let fa1 = (cos_loc[k + 1] * w[k + 1]).scale(qs[k + 1]);
                let fb0 = (sin_loc[k] * w[k]).scale(qs[k]);
                let fb1 = (sin_loc[k + 1] * w[k + 1]).scale(qs[k + 1]);
                ca[k + 1] = ca[k] + (fa0 + fa1).scale(0.5 * hk);
                cb[k + 1] = cb[k] + (fb0 + fb1).scale(0.5 * hk);
            }
            // sin μ(t-τ) = sin μ(t-a)cos μ(τ-a) - cos μ(t-a)sin μ(τ-a).
            for k in 0..n {
                cur[k] = base[k] - (sin_loc[k] * ca[k] - cos_loc[k] * cb[k]) / mu;
            }
        }
        // Analytic derivative of the integral representation (the boundary
        // term of the Volterra kernel vanishes at τ = t).
        let w: Vec<S> = (0..n)
            .map(|k| lookup_linear(&segments, &ts, &cur, a, delayed_arg[k]))
            .collect();
        ca[0] = S::ZERO;
        cb[0] = S::ZERO;
        for k in 0..n - 1 {
            let hk = ts[k + 1] - ts[k];
            let fa0 = (cos_loc[k] * w[k]).scale(qs[k]);
            let fa1 = (cos_loc[k + 1] * w[k + 1]).scale(qs[k + 1]);
            let fb0 = (sin_loc[k] * w[k]).scale(qs[k]);
            let fb1 = (sin_loc[k + 1] * w[k + 1]).scale(qs[k + 1]);
            ca[k + 1] = ca[k] + (fa0 + fa1).scale(0.5 * hk);
            cb[k + 1] = cb[k] + (fb0 + fb1).scale(0.5 * hk);
        }
        let yp: Vec<S> = (0..n)
            .map(|k| base_d[k] - (cos_loc[k] * ca[k] + sin_loc[k] * cb[k]))
            .collect();
        let ypp: Vec<S> = (0..n)
            .map(|k| -((w[k]).scale(qs[k]) + cur[k] * mu * mu))
            .collect();

        base_y = *cur.last().unwrap();
        base_yp = *yp.last().unwrap();
        segments.push(Segment {
            a,
            b,
            ts,
            y: cur.clone(),
            yp,
            ypp,
        });
    }
    Ok(PiecewiseSolution { segments })
}

/// Linear interpolation of y(s) over the completed segments or the current
/// in-progress grid (whose segment starts at `cur_a`).
fn lookup_linear<S: Scalar>(
    done: &[Segment<S>],
    cur_ts: &[f64],
    cur_y: &[S],
    cur_a: f64,
    s: f64,
) -> S {
    if s >= cur_a {
        return interp_linear(cur_ts, cur_y, s);
    }
    let mut i = done.len() - 1;
    while i > 0 && s < done[i].a {
        i -= 1;
    }
    interp_linear(&done[i].ts, &done[i].y, s)
}

fn interp_linear<S: Scalar>(ts: &[f64], ys: &[S], s: f64) -> S {
    let n = ts.len();
    if s <= ts[0] {
        return ys[0];
    }
    if s >= ts[n - 1] {
        return ys[n - 1];
    }
    let k = match ts.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i - 1,
    };
    let w = (s - ts[k]) / (ts[k + 1] - ts[k]);
    ys[k].scale(1.0 - w) + ys[k + 1].scale(w)
}

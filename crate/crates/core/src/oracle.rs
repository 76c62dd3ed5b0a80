//! Independent numerics used to check the closed forms: adaptive Simpson
//! quadrature, a classical fixed-step RK4 integrator, and the two-level
//! Lindblad generator written directly in terms of σ±.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::linalg::Matrix2;
use crate::params::PhysicalConstants;
use crate::spin_bloch::{nbar, DensityMatrix2, SpinBathSpec};

/// Function-evaluation budget of [`integrate_adaptive`].
pub const MAX_EVALUATIONS: usize = 10_000_000;
/// Bound on trace/Hermiticity/eigenvalue excursions along an RK4 Lindblad run.
pub const TRAJECTORY_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Simpson<'a, F> {
    f: &'a F,
    evaluations: usize,
    error: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        if self.evaluations >= MAX_EVALUATIONS {
            return Err(Error::NonConvergence {
                evaluations: self.evaluations,
            });
        }
        self.evaluations += 1;
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Numerical(format!("integrand is {y} at x = {x}")))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // Stop on tolerance, on recursion depth, or once the interval no longer
        // resolves in floating point.
        if delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH || lm <= a || rm >= b {
            self.error += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// ∫_a^b f by adaptive interval bisection with Simpson's rule and Richardson
/// correction. The error estimate sums the per-interval |S₂ − S₁|/15.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("need finite a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let mut s = Simpson {
        f: &f,
        evaluations: 0,
        error: 0.0,
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (s.eval(a)?, s.eval(m)?, s.eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = s.refine(a, b, fa, fm, fb, whole, tol, 0)?;
    Ok(QuadratureResult {
        value,
        error_estimate: s.error,
        evaluations: s.evaluations,
    })
}

/// dρ/dt = (γ/2)(1+n̄)(2σ₋ρσ₊ − σ₊σ₋ρ − ρσ₊σ₋) + (γ/2)n̄(2σ₊ρσ₋ − σ₋σ₊ρ − ρσ₋σ₊).
pub fn lindblad_rhs(spec: &SpinBathSpec, rho: &Matrix2, constants: &PhysicalConstants) -> Matrix2 {
    let n = nbar(spec.omega(), spec.temperature(), constants);
    let (sp, sm) = (Matrix2::SIGMA_PLUS, Matrix2::SIGMA_MINUS);
    let rho = *rho;
    let emission = (sm * rho * sp) * 2.0 - sp * sm * rho - rho * sp * sm;
    let absorption = (sp * rho * sm) * 2.0 - sm * sp * rho - rho * sm * sp;
    emission * (0.5 * spec.gamma() * (1.0 + n)) + absorption * (0.5 * spec.gamma() * n)
}

/// Samples of an integrated trajectory, including the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<V> {
    pub times: Vec<f64>,
    pub states: Vec<V>,
    /// Step actually used: `t_end / ceil(t_end / dt)`.
    pub step: f64,
}

impl<V> Trajectory<V> {
    pub fn last(&self) -> (f64, &V) {
        (*self.times.last().unwrap(), self.states.last().unwrap())
    }
}

/// Classical fourth-order Runge–Kutta with a fixed step no larger than `dt`
/// that lands exactly on `t_end`.
pub fn integrate_rk4<V, F>(rhs: F, initial: V, t_end: f64, dt: f64) -> Result<Trajectory<V>>
where
    V: Copy + Add<Output = V> + Mul<f64, Output = V>,
    F: Fn(f64, V) -> V,
{
    integrate_rk4_checked(rhs, initial, t_end, dt, |_, _| Ok(()))
}

/// [`integrate_rk4`] with a check run on every accepted state.
pub fn integrate_rk4_checked<V, F, C>(
    rhs: F,
    initial: V,
    t_end: f64,
    dt: f64,
    check: C,
) -> Result<Trajectory<V>>
where
    V: Copy + Add<Output = V> + Mul<f64, Output = V>,
    F: Fn(f64, V) -> V,
    C: Fn(f64, &V) -> Result<()>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step must be > 0, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be >= 0, got {t_end}")));
    }
    let steps = if t_end == 0.0 {
        0
    } else {
        (t_end / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let h = if steps == 0 { dt } else { t_end / steps as f64 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = initial;
    check(0.0, &y)?;
    times.push(0.0);
    states.push(y);
    for i in 0..steps {
        let t = h * i as f64;
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * h, y + k1 * (0.5 * h));
        let k3 = rhs(t + 0.5 * h, y + k2 * (0.5 * h));
        let k4 = rhs(t + h, y + k3 * h);
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t_next = if i + 1 == steps { t_end } else { h * (i + 1) as f64 };
        check(t_next, &y)?;
        times.push(t_next);
        states.push(y);
    }
    Ok(Trajectory {
        times,
        states,
        step: h,
    })
}

/// RK4 solution of the raw Lindblad equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    pub step: f64,
}

impl LindbladTrajectory {
    pub fn last_state(&self) -> (f64, &DensityMatrix2) {
        (*self.times.last().unwrap(), self.states.last().unwrap())
    }
}

/// Integrates [`lindblad_rhs`] from `initial`. Fails if a state drifts outside the
/// density-matrix bounds by more than [`TRAJECTORY_TOL`], which signals a step
/// that is too large.
pub fn integrate_lindblad(
    spec: &SpinBathSpec,
    initial: &DensityMatrix2,
    t_end: f64,
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<LindbladTrajectory> {
    let traj = integrate_rk4_checked(
        |_, rho: Matrix2| lindblad_rhs(spec, &rho, constants),
        *initial.matrix(),
        t_end,
        dt,
        |t, rho| {
            DensityMatrix2::with_tolerance(*rho, TRAJECTORY_TOL, TRAJECTORY_TOL)
                .map(|_| ())
                .map_err(|e| Error::Invariant(format!("at t = {t}: {e}; reduce the step")))
        },
    )?;
    let states = traj
        .states
        .into_iter()
        .map(|m| DensityMatrix2::with_tolerance(m, TRAJECTORY_TOL, TRAJECTORY_TOL))
        .collect::<Result<Vec<_>>>()?;
    Ok(LindbladTrajectory {
        times: traj.times,
        states,
        step: traj.step,
    })
}

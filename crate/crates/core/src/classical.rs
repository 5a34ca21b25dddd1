//! Modified Emden oscillator `x'' + k x x' + omega^2 x + k^2 x^3 / 9 = 0` and
//! its branched Hamiltonians
//! `H^± = -3p (k x^2/9 + omega^2/k) ∓ sqrt(-2p)`, `p < 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::ClassicalError;
use crate::model::Branch;
use crate::polyalgebra::{isochronous_g, Polynomial};
use crate::quadrature::adaptive_simpson;

pub const OVERFLOW_LIMIT: f64 = 1e8;
/// Integration aborts once `p` is within this distance of zero.
pub const P_ZERO_GUARD: f64 = 1e-12;
pub const P_INFINITY_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdenParams {
    pub omega: f64,
    pub k: f64,
}

impl EmdenParams {
    pub fn new(omega: f64, k: f64) -> Result<Self, ClassicalError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(ClassicalError::Config(format!("omega must be positive, got {omega}")));
        }
        if !k.is_finite() {
            return Err(ClassicalError::Config(format!("k must be finite, got {k}")));
        }
        Ok(Self { omega, k })
    }

    /// `2 pi / omega`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `3 omega^2 / k + k x^2 / 3`, the offset between `u` and `v`.
    fn u_offset(&self, x: f64) -> f64 {
        3.0 * self.omega * self.omega / self.k + self.k * x * x / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianState {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub branch: Branch,
}

/// One sample of a Hamiltonian trajectory with the energy along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianPoint {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub h: f64,
}

fn step_count(t_end: f64, dt: f64, params: &EmdenParams) -> Result<usize, ClassicalError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(ClassicalError::Config(format!("t_end must be positive, got {t_end}")));
    }
    let max_dt = params.period() / 200.0;
    if !(dt > 0.0 && dt <= max_dt * (1.0 + 1e-12)) {
        return Err(ClassicalError::Config(format!(
            "dt must be in (0, T/200 = {max_dt}], got {dt}"
        )));
    }
    Ok((t_end / dt - 1e-9).ceil().max(1.0) as usize)
}

fn emden_rhs(params: &EmdenParams, x: f64, v: f64) -> (f64, f64) {
    let (w, k) = (params.omega, params.k);
    (v, -k * x * v - w * w * x - k * k * x * x * x / 9.0)
}

/// Fixed-step RK4 from `t = 0` to `t_end`; the step is shrunk so that an
/// integer number of steps lands on `t_end`.
pub fn integrate_emden(
    x0: f64,
    v0: f64,
    params: &EmdenParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<ClassicalState>, ClassicalError> {
    let steps = step_count(t_end, dt, params)?;
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (x0, v0);
    out.push(ClassicalState { t: 0.0, x, v });
    for i in 1..=steps {
        let (k1x, k1v) = emden_rhs(params, x, v);
        let (k2x, k2v) = emden_rhs(params, x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        let (k3x, k3v) = emden_rhs(params, x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        let (k4x, k4v) = emden_rhs(params, x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let t = i as f64 * h;
        if !(x.abs() <= OVERFLOW_LIMIT && v.is_finite()) {
            return Err(ClassicalError::Overflow { t });
        }
        out.push(ClassicalState { t, x, v });
    }
    Ok(out)
}

/// Mean time between successive maxima of `x`, or of minima when fewer
/// than two maxima fall inside the trajectory.
///
/// Extrema are the sign changes of `v`, located by cubic interpolation
/// through the four surrounding samples. Three sign changes always contain
/// two of the same kind.
pub fn detect_period(trajectory: &[ClassicalState]) -> Result<f64, ClassicalError> {
    const NEEDED: usize = 3;
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 0..trajectory.len().saturating_sub(1) {
        let (a, b) = (&trajectory[i], &trajectory[i + 1]);
        if a.v > 0.0 && b.v <= 0.0 {
            maxima.push(crossing_time(trajectory, i));
        } else if a.v <= 0.0 && b.v > 0.0 {
            minima.push(crossing_time(trajectory, i));
        }
    }
    let found = maxima.len() + minima.len();
    if found < NEEDED {
        return Err(ClassicalError::InsufficientCrossings { found, needed: NEEDED });
    }
    let times = if maxima.len() >= 2 { &maxima } else { &minima };
    Ok((times[times.len() - 1] - times[0]) / (times.len() - 1) as f64)
}

/// Zero of the cubic through `v` at samples `i-1 ..= i+2` (clamped at the
/// ends) inside `[t_i, t_{i+1}]`.
fn crossing_time(tr: &[ClassicalState], i: usize) -> f64 {
    let start = i.saturating_sub(1).min(tr.len().saturating_sub(4));
    let pts = &tr[start..(start + 4).min(tr.len())];
    let cubic = |t: f64| -> f64 {
        let mut acc = 0.0;
        for (j, pj) in pts.iter().enumerate() {
            let mut w = pj.v;
            for (m, pm) in pts.iter().enumerate() {
                if m != j {
                    w *= (t - pm.t) / (pj.t - pm.t);
                }
            }
            acc += w;
        }
        acc
    };
    let (mut lo, mut hi) = (tr[i].t, tr[i + 1].t);
    let mut flo = tr[i].v;
    if tr[i + 1].v == 0.0 {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = cubic(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `u = v + 3 omega^2 / k + k x^2 / 3`; Hamilton's equation gives
/// `u = ± 1/sqrt(-2p)` on `H^±`.
pub fn branch_variable(state: &ClassicalState, params: &EmdenParams) -> f64 {
    state.v + params.u_offset(state.x)
}

fn require_positive_k(params: &EmdenParams) -> Result<(), ClassicalError> {
    if !(params.k > 0.0) {
        return Err(ClassicalError::Config(format!(
            "the branched Hamiltonians need k > 0, got {}",
            params.k
        )));
    }
    Ok(())
}

/// `p = -1/(2u^2)`, branch plus for `u > 0`.
pub fn emden_to_canonical(state: &ClassicalState, params: &EmdenParams) -> Result<HamiltonianState, ClassicalError> {
    require_positive_k(params)?;
    let u = branch_variable(state, params);
    if u == 0.0 || !(1.0 / (u * u)).is_finite() {
        return Err(ClassicalError::SingularMap { x: state.x, v: state.v });
    }
    Ok(HamiltonianState {
        t: state.t,
        x: state.x,
        p: -1.0 / (2.0 * u * u),
        branch: if u > 0.0 { Branch::Plus } else { Branch::Minus },
    })
}

/// `H^±(x, p)`.
pub fn hamiltonian(x: f64, p: f64, branch: Branch, params: &EmdenParams) -> f64 {
    let (w, k) = (params.omega, params.k);
    -3.0 * p * (k * x * x / 9.0 + w * w / k) - branch.sign() * (-2.0 * p).sqrt()
}

/// `(dx/dt, dp/dt) = (dH/dp, -dH/dx)`.
pub fn hamiltonian_rhs(x: f64, p: f64, branch: Branch, params: &EmdenParams) -> (f64, f64) {
    let (w, k) = (params.omega, params.k);
    let xdot = -(k * x * x / 3.0 + 3.0 * w * w / k) + branch.sign() / (-2.0 * p).sqrt();
    let pdot = 2.0 * k / 3.0 * p * x;
    (xdot, pdot)
}

/// RK4 on the branch fixed by `state`. Stops with
/// [`ClassicalError::BranchBoundary`] when `p` approaches `0` or diverges.
pub fn integrate_hamiltonian(
    state: &HamiltonianState,
    params: &EmdenParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<HamiltonianPoint>, ClassicalError> {
    require_positive_k(params)?;
    let steps = step_count(t_end, dt, params)?;
    let h = t_end / steps as f64;
    let branch = state.branch;
    let boundary = |t: f64, p: f64| -> Result<(), ClassicalError> {
        if p > -P_ZERO_GUARD || p.abs() > P_INFINITY_GUARD || !p.is_finite() {
            Err(ClassicalError::BranchBoundary { t, p })
        } else {
            Ok(())
        }
    };
    let (mut x, mut p) = (state.x, state.p);
    boundary(state.t, p)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(HamiltonianPoint {
        t: state.t,
        x,
        p,
        h: hamiltonian(x, p, branch, params),
    });
    for i in 1..=steps {
        let t = state.t + i as f64 * h;
        let (k1x, k1p) = hamiltonian_rhs(x, p, branch, params);
        let p2 = p + 0.5 * h * k1p;
        boundary(t, p2)?;
        let (k2x, k2p) = hamiltonian_rhs(x + 0.5 * h * k1x, p2, branch, params);
        let p3 = p + 0.5 * h * k2p;
        boundary(t, p3)?;
        let (k3x, k3p) = hamiltonian_rhs(x + 0.5 * h * k2x, p3, branch, params);
        let p4 = p + h * k3p;
        boundary(t, p4)?;
        let (k4x, k4p) = hamiltonian_rhs(x + h * k3x, p4, branch, params);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        boundary(t, p)?;
        if !(x.abs() <= OVERFLOW_LIMIT) {
            return Err(ClassicalError::Overflow { t });
        }
        out.push(HamiltonianPoint {
            t,
            x,
            p,
            h: hamiltonian(x, p, branch, params),
        });
    }
    Ok(out)
}

/// Damping law `f` in `x'' + f(x) x' + g(x) = 0`.
#[derive(Clone)]
pub enum ForceLaw {
    Polynomial(Polynomial),
    Callable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ForceLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForceLaw::Polynomial(p) => write!(f, "Polynomial({p})"),
            ForceLaw::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

/// The restoring force `g(x) = omega^2 x + I(x)^2 / x^3`,
/// `I(x) = int_0^x t f(t) dt`, that makes `x'' + f x' + g = 0` isochronous.
#[derive(Debug, Clone)]
pub struct IsochronousG {
    omega: f64,
    law: ForceLaw,
    exact: Option<Polynomial>,
}

impl IsochronousG {
    /// Exact `g` when `f` was a polynomial.
    pub fn exact(&self) -> Option<&Polynomial> {
        self.exact.as_ref()
    }

    pub fn eval(&self, x: f64) -> Result<f64, ClassicalError> {
        if let Some(g) = &self.exact {
            return Ok(g.eval_f64(x));
        }
        let ForceLaw::Callable(f) = &self.law else {
            unreachable!("polynomial laws carry an exact g")
        };
        if x == 0.0 {
            return Ok(0.0);
        }
        let integrand = |t: f64| t * f(t);
        // int_0^x for x < 0 is minus the integral over [x, 0]
        let i = if x > 0.0 {
            adaptive_simpson(integrand, 0.0, x, 1e-12, 40)
        } else {
            adaptive_simpson(integrand, x, 0.0, 1e-12, 40).map(|v| -v)
        }
        .map_err(|_| ClassicalError::NonIntegrable { x })?;
        let g = self.omega * self.omega * x + i * i / (x * x * x);
        if !g.is_finite() {
            return Err(ClassicalError::NonIntegrable { x });
        }
        Ok(g)
    }
}

pub fn isochronicity_condition_g(f: ForceLaw, omega: f64) -> Result<IsochronousG, ClassicalError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(ClassicalError::Config(format!("omega must be positive, got {omega}")));
    }
    let exact = match &f {
        ForceLaw::Polynomial(p) => {
            let w2 = BigRational::from_f64(omega * omega)
                .ok_or_else(|| ClassicalError::Config(format!("omega^2 = {} is not representable", omega * omega)))?;
            Some(isochronous_g(p, &w2).map_err(|e| ClassicalError::Config(e.to_string()))?)
        }
        ForceLaw::Callable(_) => None,
    };
    Ok(IsochronousG { omega, law: f, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalgebra::int;

    fn params(omega: f64, k: f64) -> EmdenParams {
        EmdenParams::new(omega, k).unwrap()
    }

    #[test]
    fn harmonic_limit() {
        let p = params(10.0, 0.0);
        let t = p.period();
        let tr = integrate_emden(1.0, 0.0, &p, t, t / 2000.0).unwrap();
        for s in &tr {
            assert!((s.x - (10.0 * s.t).cos()).abs() < 1e-8);
        }
        let tr = integrate_emden(1.0, 0.0, &p, 3.0 * t, t / 2000.0).unwrap();
        assert!((detect_period(&tr).unwrap() - t).abs() < 1e-8 * t);
    }

    #[test]
    fn step_validation() {
        let p = params(10.0, 1.0);
        let t = p.period();
        assert!(integrate_emden(1.0, 0.0, &p, t, t / 100.0).is_err());
        assert!(integrate_emden(1.0, 0.0, &p, -1.0, t / 1000.0).is_err());
        assert!(integrate_emden(1.0, 0.0, &p, t, 0.0).is_err());
        assert!(EmdenParams::new(0.0, 1.0).is_err());
        // dt that does not divide t_end is shortened
        let tr = integrate_emden(1.0, 0.0, &p, t, t / 300.5).unwrap();
        assert_eq!(tr.len(), 302);
        assert!((tr.last().unwrap().t - t).abs() < 1e-15);
    }

    #[test]
    fn overflow_guard() {
        let p = params(1.0, 1.0);
        let err = integrate_emden(-1e7, -1e9, &p, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, ClassicalError::Overflow { .. }));
    }

    #[test]
    fn bounded_and_isochronous() {
        for (omega, k) in [(10.0, 1.0), (1.0, 0.1)] {
            let p = params(omega, k);
            let t = p.period();
            for amp in [0.1, 1.0, 5.0] {
                let tr = integrate_emden(amp, 0.0, &p, 4.0 * t, t / 2000.0).unwrap();
                assert!(tr.iter().all(|s| s.x.abs() <= 1.01 * amp));
                let period = detect_period(&tr).unwrap();
                assert!(
                    (period - t).abs() <= 1e-5 * t,
                    "omega={omega} k={k} amp={amp}: {period}"
                );
            }
        }
    }

    #[test]
    fn constant_trajectory_has_no_period() {
        let tr: Vec<_> = (0..100)
            .map(|i| ClassicalState {
                t: i as f64,
                x: 1.0,
                v: 0.0,
            })
            .collect();
        assert!(matches!(
            detect_period(&tr),
            Err(ClassicalError::InsufficientCrossings { found: 0, needed: 3 })
        ));
    }

    #[test]
    fn canonical_map() {
        let p = params(10.0, 1.0);
        let s = ClassicalState { t: 0.0, x: 1.0, v: 0.0 };
        let u = branch_variable(&s, &p);
        assert!((u - (300.0 + 1.0 / 3.0)).abs() < 1e-12);
        let h = emden_to_canonical(&s, &p).unwrap();
        assert_eq!(h.branch, Branch::Plus);
        assert!(h.p < 0.0);
        for (x, v) in [(1.0, 0.0), (0.3, -5.0), (-2.0, 40.0), (0.0, -400.0)] {
            let s = ClassicalState { t: 0.0, x, v };
            let h = emden_to_canonical(&s, &p).unwrap();
            assert!(h.p < 0.0);
            let (xdot, _) = hamiltonian_rhs(x, h.p, h.branch, &p);
            assert!((xdot - v).abs() <= 1e-12 * v.abs().max(1.0), "x={x} v={v}: {xdot}");
        }
        assert_eq!(
            emden_to_canonical(
                &ClassicalState {
                    t: 0.0,
                    x: 0.0,
                    v: -300.0
                },
                &p
            ),
            Err(ClassicalError::SingularMap { x: 0.0, v: -300.0 })
        );
        assert!(emden_to_canonical(&s, &params(10.0, 0.0)).is_err());
    }

    #[test]
    fn hamiltonian_matches_emden() {
        let p = params(10.0, 1.0);
        let t = p.period();
        let dt = t / 2000.0;
        let emden = integrate_emden(1.0, 0.0, &p, t, dt).unwrap();
        let start = emden_to_canonical(&emden[0], &p).unwrap();
        let ham = integrate_hamiltonian(&start, &p, t, dt).unwrap();
        assert_eq!(ham.len(), emden.len());
        let sup = emden
            .iter()
            .zip(&ham)
            .fold(0.0f64, |m, (a, b)| m.max((a.x - b.x).abs()));
        assert!(sup <= 1e-6, "sup {sup}");
        let h0 = ham[0].h;
        let drift = ham.iter().fold(0.0f64, |m, s| m.max((s.h - h0).abs())) / h0.abs();
        assert!(drift <= 1e-9, "drift {drift}");
        // branch never changes along an orbit with u > 0
        assert!(emden.iter().all(|s| branch_variable(s, &p) > 0.0));
        for s in &emden {
            assert_eq!(emden_to_canonical(s, &p).unwrap().branch, Branch::Plus);
        }
    }

    #[test]
    fn minus_branch_flow() {
        // u < 0 needs v < -(3 omega^2/k + k x^2/3)
        let p = params(1.0, 1.0);
        let s = ClassicalState {
            t: 0.0,
            x: 0.0,
            v: -10.0,
        };
        let h = emden_to_canonical(&s, &p).unwrap();
        assert_eq!(h.branch, Branch::Minus);
        let (xdot, _) = hamiltonian_rhs(h.x, h.p, h.branch, &p);
        assert!((xdot + 10.0).abs() < 1e-12);
    }

    #[test]
    fn branch_boundary_reported() {
        let p = params(1.0, 1.0);
        let s = HamiltonianState {
            t: 0.0,
            x: 0.0,
            p: -1e-13,
            branch: Branch::Plus,
        };
        assert!(matches!(
            integrate_hamiltonian(&s, &p, 1.0, 1e-3),
            Err(ClassicalError::BranchBoundary { .. })
        ));
    }

    #[test]
    fn g_from_polynomials() {
        let k = 3.0;
        let f = ForceLaw::Polynomial(Polynomial::monomial(int(3), 1));
        let g = isochronicity_condition_g(f, 10.0).unwrap();
        assert_eq!(g.exact().unwrap().to_string(), "100*x + x^3");
        assert!((g.eval(2.0).unwrap() - (200.0 + k * k * 8.0 / 9.0)).abs() < 1e-12);
        let g0 = isochronicity_condition_g(ForceLaw::Polynomial(Polynomial::zero()), 10.0).unwrap();
        assert_eq!(g0.exact().unwrap(), &Polynomial::monomial(int(100), 1));
    }

    #[test]
    fn g_from_callable_matches_exact() {
        let (k, b, omega) = (1.5, -0.5, 2.0);
        let g = isochronicity_condition_g(ForceLaw::Callable(Arc::new(move |x| k * x + b)), omega).unwrap();
        assert!(g.exact().is_none());
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        for x in [-2.0, -0.3, 0.7, 3.0] {
            let want = k * k / 9.0 * x * x * x + k * b / 3.0 * x * x + (omega * omega + b * b / 4.0) * x;
            assert!((g.eval(x).unwrap() - want).abs() < 1e-10 * want.abs().max(1.0), "x={x}");
        }
        let bad = isochronicity_condition_g(ForceLaw::Callable(Arc::new(|x: f64| 1.0 / (x - 0.5))), 1.0).unwrap();
        assert!(matches!(bad.eval(1.0), Err(ClassicalError::NonIntegrable { .. })));
    }

    #[test]
    fn period_from_minima_when_maxima_sit_on_the_ends() {
        // starting at rest at a maximum over exactly two periods leaves one
        // interior maximum but two minima
        let p = params(10.0, 1.0);
        let t = p.period();
        let tr = integrate_emden(1.0, 0.0, &p, 2.0 * t, t / 2000.0).unwrap();
        assert!(((detect_period(&tr).unwrap() - t) / t).abs() < 1e-9);
    }
}

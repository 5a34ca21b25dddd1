//! Finite-difference solver for the half-line problems.
//!
//! All linear algebra happens in the `lambda` variable; energies are
//! converted through [`EnergyMap`](crate::model::EnergyMap) only when a
//! [`Spectrum`] is assembled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::model::{isotonic_exact_energy, lambda_potential, ModelParams};

pub const MIN_GRID_POINTS: usize = 500;
pub const DEFAULT_GRID_POINTS: usize = 4000;
pub const MAX_LEVELS: usize = 20;

/// Uniform grid on `[0, xi_max]` with `n_points` intervals.
///
/// Interior nodes are `xi_i = i h` for `i = 1..n_points-1`; both ends carry
/// Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xi_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(xi_max: f64, n_points: usize) -> Result<Self, SolverError> {
        let grid = Self { xi_max, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.xi_max > 0.0 && self.xi_max.is_finite()) {
            return Err(SolverError::Config(format!(
                "xi_max must be positive and finite, got {}",
                self.xi_max
            )));
        }
        if self.n_points < MIN_GRID_POINTS {
            return Err(SolverError::Config(format!(
                "n_points must be at least {MIN_GRID_POINTS}, got {}",
                self.n_points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.xi_max / self.n_points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Number of unknowns, `n_points - 1`.
    pub fn interior_len(&self) -> usize {
        self.n_points - 1
    }

    pub fn refined(&self) -> Self {
        Self {
            xi_max: self.xi_max,
            n_points: 2 * self.n_points,
        }
    }
}

/// Symmetric tridiagonal matrix. `off[i]` couples unknowns `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        // pivots that vanish are nudged to a tiny negative value
        let guard = f64::EPSILON * self.norm_bound();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 {
                self.off[i - 1] * self.off[i - 1] / d
            } else {
                0.0
            };
            d = self.diag[i] - x - coupling;
            if d.abs() < guard {
                d = -guard;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Second-order central differences for `-d^2/dxi^2 + V_eff + k/(24 omega^2)`
/// on the interior nodes, so that the eigenvalues are `lambda`.
pub fn discretize(params: &ModelParams, grid: &Grid) -> Result<Tridiagonal, SolverError> {
    params.validate()?;
    grid.validate()?;
    let h = grid.step();
    let inv_h2 = 1.0 / (h * h);
    let m = grid.interior_len();
    let mut diag = Vec::with_capacity(m);
    for i in 1..=m {
        diag.push(2.0 * inv_h2 + lambda_potential(params, grid.node(i))?);
    }
    Ok(Tridiagonal {
        diag,
        off: vec![-inv_h2; m - 1],
    })
}

/// Errors with [`SolverError::DomainTooSmall`] when the potential at `xi_max`
/// (in the `lambda` form) is below `lambda_max`.
pub fn check_domain(params: &ModelParams, grid: &Grid, lambda_max: f64) -> Result<(), SolverError> {
    let potential = lambda_potential(params, grid.xi_max)?;
    if potential < lambda_max {
        return Err(SolverError::DomainTooSmall { potential, lambda_max });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionConfig {
    /// Absolute tolerance on `lambda`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 200,
        }
    }
}

/// The `index`-th (0-based) eigenvalue of `t` inside `[lo, hi]`.
pub fn bisect_eigenvalue(
    t: &Tridiagonal,
    index: usize,
    mut lo: f64,
    mut hi: f64,
    cfg: &BisectionConfig,
) -> Result<f64, SolverError> {
    for _ in 0..cfg.max_iterations {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= cfg.tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if t.count_below(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(SolverError::BisectionNonConvergence {
        level: index,
        iterations: cfg.max_iterations,
    })
}

/// Lowest `n_levels` eigenvalues in increasing order; levels are bisected in parallel.
pub fn lowest_eigenvalues(t: &Tridiagonal, n_levels: usize, cfg: &BisectionConfig) -> Result<Vec<f64>, SolverError> {
    if n_levels > t.len() {
        return Err(SolverError::Config(format!(
            "{n_levels} levels requested from a {}-dimensional operator",
            t.len()
        )));
    }
    let (lo, hi) = t.gershgorin();
    let values = (0..n_levels)
        .into_par_iter()
        .map(|i| bisect_eigenvalue(t, i, lo, hi, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 1..values.len() {
        if values[i] <= values[i - 1] {
            return Err(SolverError::NonMonotone { level: i });
        }
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FiniteDifference,
    ParabolicCylinder,
    Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub xi_max: f64,
    pub n_points: usize,
    pub richardson: bool,
}

/// Energies `E_n` (not `lambda`) of one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub params: ModelParams,
    pub method: Method,
    pub energies: Vec<f64>,
    /// Present for finite-difference spectra.
    pub grid_meta: Option<GridMeta>,
    /// Per-level error estimate; present only with Richardson extrapolation.
    pub est_error: Option<Vec<f64>>,
}

/// Observed convergence order in `h` of the Dirichlet finite-difference
/// eigenvalues.
///
/// With `s = sqrt(eps)` the eigenfunctions behave like `xi^(1/2 + s)` at the
/// origin. At `eps = 1/4` the inverse-square term vanishes and the scheme is
/// second order; otherwise the error decays like `h^(2s)`, capped at 2.
pub fn richardson_order(epsilon: f64) -> f64 {
    if epsilon == 0.25 {
        2.0
    } else {
        (2.0 * epsilon.sqrt()).clamp(0.5, 2.0)
    }
}

pub fn solve_levels(
    params: &ModelParams,
    grid: &Grid,
    n_levels: usize,
    richardson: bool,
) -> Result<Spectrum, SolverError> {
    solve_levels_with(params, grid, n_levels, richardson, &BisectionConfig::default())
}

pub fn solve_levels_with(
    params: &ModelParams,
    grid: &Grid,
    n_levels: usize,
    richardson: bool,
    cfg: &BisectionConfig,
) -> Result<Spectrum, SolverError> {
    if n_levels == 0 || n_levels > MAX_LEVELS {
        return Err(SolverError::Config(format!(
            "n_levels must be in 1..={MAX_LEVELS}, got {n_levels}"
        )));
    }
    if params.epsilon < 0.25 && richardson {
        log::warn!(
            "epsilon = {} < 1/4: Richardson order {} is heuristic",
            params.epsilon,
            richardson_order(params.epsilon)
        );
    }
    let solve = |g: &Grid| -> Result<Vec<f64>, SolverError> {
        let t = discretize(params, g)?;
        lowest_eigenvalues(&t, n_levels, cfg)
    };

    let (lambdas, est_error) = if richardson {
        let fine = grid.refined();
        let (coarse, fine) = rayon::join(|| solve(grid), || solve(&fine));
        let (coarse, fine) = (coarse?, fine?);
        let denom = 2f64.powf(richardson_order(params.epsilon)) - 1.0;
        let lambdas: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| f + (f - c) / denom).collect();
        // reported in E, hence the factor 4
        let err = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| 4.0 * (f - c).abs() / denom)
            .collect();
        (lambdas, Some(err))
    } else {
        (solve(grid)?, None)
    };

    check_domain(params, grid, *lambdas.last().expect("n_levels >= 1"))?;
    for i in 1..lambdas.len() {
        if lambdas[i] <= lambdas[i - 1] {
            return Err(SolverError::NonMonotone { level: i });
        }
    }
    let map = params.energy_map();
    Ok(Spectrum {
        params: *params,
        method: Method::FiniteDifference,
        energies: lambdas.iter().map(|&l| map.energy_of_lambda(l)).collect(),
        grid_meta: Some(GridMeta {
            xi_max: grid.xi_max,
            n_points: grid.n_points,
            richardson,
        }),
        est_error,
    })
}

/// Grid reaching well past the turning point of level `n_levels + 4`:
/// `xi_max = xi0 + (8/omega) sqrt(2 lambda_est)`, so that `V_eff(xi_max)` is
/// about twice `lambda_est`.
pub fn default_domain(params: &ModelParams, n_levels: usize) -> Grid {
    let e = isotonic_exact_energy(n_levels + 4, params.omega, params.epsilon);
    let lambda_est = params.energy_map().lambda_of_energy(e);
    Grid {
        xi_max: params.xi0() + 8.0 / params.omega * (2.0 * lambda_est).sqrt(),
        n_points: DEFAULT_GRID_POINTS,
    }
}

/// Samples of one eigenfunction on every grid node, boundaries included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionTable {
    pub grid: Grid,
    pub n: usize,
    /// Finite-difference eigenvalue on this grid (no extrapolation).
    pub lambda: f64,
    pub energy: f64,
    pub values: Vec<f64>,
    pub norm: bool,
    pub nodes: usize,
}

impl EigenfunctionTable {
    pub fn xi(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.grid.node(i))
    }

    /// Trapezoid `int phi^2 dxi`.
    pub fn l2_norm_sq(&self) -> f64 {
        trapezoid_sq(&self.values, self.grid.step())
    }
}

fn trapezoid_sq(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().map(|v| v * v).sum();
    h * (inner + 0.5 * (values[0] * values[0] + values[n - 1] * values[n - 1]))
}

/// Sign changes, ignoring samples below `1e-8` of the peak magnitude.
pub fn count_nodes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-8 * peak;
    let mut nodes = 0;
    let mut last_sign = 0.0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

const INVERSE_ITERATION_MAX: usize = 30;
const INVERSE_ITERATION_TOL: f64 = 1e-12;

/// Level `n` by inverse iteration at its bisected eigenvalue.
///
/// The result is normalized to unit trapezoid norm and signed so that the
/// first lobe away from the origin is positive.
pub fn eigenfunction(params: &ModelParams, grid: &Grid, n: usize) -> Result<EigenfunctionTable, SolverError> {
    let t = discretize(params, grid)?;
    if n >= t.len() {
        return Err(SolverError::Config(format!(
            "level {n} is beyond the grid dimension {}",
            t.len()
        )));
    }
    let (lo, hi) = t.gershgorin();
    let lambda = bisect_eigenvalue(&t, n, lo, hi, &BisectionConfig::default())?;
    check_domain(params, grid, lambda)?;
    let h = grid.step();

    let m = t.len();
    // deterministic start vector with some weight on every mode
    let mut x: Vec<f64> = (0..m)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin())
        .collect();
    normalize(&mut x, h);
    let solver = ShiftedLu::factor(&t, lambda);
    let mut converged = false;
    for _ in 0..INVERSE_ITERATION_MAX {
        let mut y = solver.solve(&x);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InverseIterationStagnation { level: n });
        }
        normalize(&mut y, h);
        // compare up to sign
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let change = x.iter().zip(&y).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let peak = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        x = y;
        if change <= INVERSE_ITERATION_TOL * peak {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SolverError::InverseIterationStagnation { level: n });
    }

    let mut values = Vec::with_capacity(m + 2);
    values.push(0.0);
    values.extend_from_slice(&x);
    values.push(0.0);
    let peak = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if let Some(first) = values.iter().find(|v| v.abs() > 1e-6 * peak) {
        if *first < 0.0 {
            values.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let nodes = count_nodes(&values);
    if nodes != n {
        log::warn!("eigenfunction {n} has {nodes} interior sign changes");
    }
    Ok(EigenfunctionTable {
        grid: *grid,
        n,
        lambda,
        energy: params.energy_map().energy_of_lambda(lambda),
        values,
        norm: true,
        nodes,
    })
}

fn normalize(x: &mut [f64], h: f64) {
    let norm = (h * x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// LU factorization of `T - sigma I` with partial pivoting.
///
/// Row `i` of `U` has entries at columns `i, i+1, i+2`.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &Tridiagonal, sigma: f64) -> Self {
        let m = t.len();
        let tiny = f64::EPSILON * t.norm_bound();
        let mut u0 = vec![0.0; m];
        let mut u1 = vec![0.0; m];
        let mut u2 = vec![0.0; m];
        let mut mult = vec![0.0; m];
        let mut swapped = vec![false; m];

        // current working row i: (a, b, c) at columns i, i+1, i+2
        let mut a = t.diag[0] - sigma;
        let mut b = if m > 1 { t.off[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..m {
            if i + 1 == m {
                u0[i] = if a.abs() < tiny { tiny } else { a };
                break;
            }
            // next row i+1: (sub, diag, super) at columns i, i+1, i+2
            let sub = t.off[i];
            let d = t.diag[i + 1] - sigma;
            let sup = if i + 2 < m { t.off[i + 1] } else { 0.0 };
            if sub.abs() > a.abs() {
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = d;
                u2[i] = sup;
                let l = a / sub;
                mult[i] = l;
                a = b - l * d;
                b = c - l * sup;
            } else {
                let piv = if a.abs() < tiny { tiny } else { a };
                u0[i] = piv;
                u1[i] = b;
                u2[i] = c;
                let l = sub / piv;
                mult[i] = l;
                a = d - l * b;
                b = sup - l * c;
            }
            c = 0.0;
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..m.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = y[i];
            if i + 1 < m {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < m {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

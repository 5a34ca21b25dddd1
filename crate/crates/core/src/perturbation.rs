//! First-order `O(sqrt k)` corrections on the isotonic basis.
//!
//! The displacement `xi0` enters the potential linearly as
//! `∓ omega^2 xi0 xi / 32 = ∓ sqrt(k/24) xi / 4` (in `lambda` units), so the
//! first-order shift of `E` is `∓ sqrt(k/24) <xi>_n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{Method, Spectrum};
use crate::error::PerturbationError;
use crate::model::{isotonic_eigenfunction, isotonic_exact_energy, Branch, ModelParams};
use crate::quadrature::adaptive_simpson;
use crate::specfun::{gamma, log_gamma};

/// Largest level accepted by the closed sums.
pub const MAX_CLOSED_LEVEL: usize = 60;
/// Condition number above which the double sum logs a warning.
pub const CONDITION_WARNING: f64 = 1e12;

fn check_inputs(n: usize, epsilon: f64, omega: f64) -> Result<(), PerturbationError> {
    if n > MAX_CLOSED_LEVEL {
        return Err(PerturbationError::LevelTooHigh {
            n,
            max: MAX_CLOSED_LEVEL,
        });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(PerturbationError::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(PerturbationError::InvalidParameter(format!("omega = {omega}")));
    }
    Ok(())
}

/// `<xi>_n = int_0^inf xi phi_n^2 dxi` for the normalized isotonic state.
///
/// Uses the Laguerre connection `L_n^s = sum_m (-1/2)_(n-m)/(n-m)! L_m^(s+1/2)`,
/// which turns the moment into a sum of positive terms:
///
/// ```text
/// <xi>_n = (omega/8)^(-1/2) n!/Gamma(n+s+1)
///          * sum_m [(-1/2)_(n-m)/(n-m)!]^2 Gamma(m+s+3/2)/m!
/// ```
pub fn first_moment_closed(n: usize, epsilon: f64, omega: f64) -> Result<f64, PerturbationError> {
    check_inputs(n, epsilon, omega)?;
    let s = epsilon.sqrt();
    // ratios by recurrence: w_m = Gamma(m+s+3/2) / (m! Gamma(s+3/2)),
    // front = n! Gamma(s+3/2) / Gamma(n+s+1), c_j = (-1/2)_j / j!
    let mut c = vec![1.0f64; n + 1];
    let mut w = vec![1.0f64; n + 1];
    let mut front = gamma(s + 1.5)? / gamma(s + 1.0)?;
    for j in 1..=n {
        let jf = j as f64;
        c[j] = c[j - 1] * (jf - 1.5) / jf;
        w[j] = w[j - 1] * (jf + s + 0.5) / jf;
        front *= jf / (jf + s);
    }
    let sum: f64 = (0..=n).map(|m| c[n - m] * c[n - m] * w[m]).sum();
    Ok((omega / 8.0).powf(-0.5) * front * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleSumReport {
    pub value: f64,
    /// `sum |term| / |sum term|`; relative error is about this times `1e-16`.
    pub condition: f64,
}

/// The moment from the alternating double sum over `j, l`:
///
/// ```text
/// (omega/8)^(-1/2) n!/Gamma(n+s+1) [(s+1)_n/n!]^2
///   * sum_{j,l} (-n)_j (-n)_l / [(s+1)_j (s+1)_l] Gamma(s+3/2+j+l) / (j! l!)
/// ```
///
/// Terms are formed in log-magnitude/sign form and added with Neumaier
/// summation. Cancellation is severe beyond `n ~ 8`; see `condition`.
pub fn first_moment_double_sum(n: usize, epsilon: f64, omega: f64) -> Result<DoubleSumReport, PerturbationError> {
    check_inputs(n, epsilon, omega)?;
    let s = epsilon.sqrt();
    let nf = n as f64;
    let lg_s1 = log_gamma(s + 1.0)?;
    let lg_n1 = log_gamma(nf + 1.0)?;
    // log of (-1)^j (-n)_j / j! / (s+1)_j = C(n, j) / (s+1)_j, sign (-1)^j
    let mut half = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let jf = j as f64;
        let log_binom = lg_n1 - log_gamma(jf + 1.0)? - log_gamma(nf - jf + 1.0)?;
        let log_poch = log_gamma(s + 1.0 + jf)? - lg_s1;
        half.push(log_binom - log_poch);
    }
    // n!/Gamma(n+s+1) * [(s+1)_n/n!]^2 = Gamma(n+s+1) / (n! Gamma(s+1)^2)
    let log_front = -0.5 * (omega / 8.0).ln() + log_gamma(nf + s + 1.0)? - lg_n1 - 2.0 * lg_s1;

    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut abs_sum = 0.0f64;
    for j in 0..=n {
        for l in 0..=n {
            let mag = (log_front + half[j] + half[l] + log_gamma(s + 1.5 + (j + l) as f64)?).exp();
            let term = if (j + l) % 2 == 0 { mag } else { -mag };
            abs_sum += mag;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
    }
    let value = sum + comp;
    let condition = abs_sum / value.abs();
    if condition > CONDITION_WARNING {
        log::warn!("first-moment double sum at n = {n}: condition number {condition:.3e}, result unreliable");
    }
    Ok(DoubleSumReport { value, condition })
}

/// Cut-off with `omega xi^2 / 8 = 50 + 5n`, where the Gaussian tail of
/// `xi phi_n^2` is negligible at double precision.
pub fn quadrature_cutoff(n: usize, omega: f64) -> f64 {
    (8.0 * (50.0 + 5.0 * n as f64) / omega).sqrt()
}

/// The moment by adaptive Simpson quadrature of `xi phi_n(xi)^2`.
pub fn first_moment_quadrature(n: usize, epsilon: f64, omega: f64) -> Result<f64, PerturbationError> {
    if !(epsilon >= 0.0 && omega > 0.0) {
        return Err(PerturbationError::InvalidParameter(format!(
            "epsilon = {epsilon}, omega = {omega}"
        )));
    }
    let cut = quadrature_cutoff(n, omega);
    let value = adaptive_simpson(
        |x| x * isotonic_eigenfunction(n, omega, epsilon, x).powi(2),
        0.0,
        cut,
        1e-13,
        50,
    )?;
    Ok(value)
}

/// `3 omega^3 / (n_max + sqrt eps)`.
pub fn smallness_bound(omega: f64, epsilon: f64, n_max: usize) -> f64 {
    3.0 * omega.powi(3) / (n_max as f64 + epsilon.sqrt())
}

/// Margin encoding "k much smaller than the bound".
pub const SMALLNESS_MARGIN: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub n: usize,
    pub branch: Branch,
    pub e0: f64,
    pub moment: f64,
    pub delta: f64,
    pub e1: f64,
    /// `k <= smallness_bound(omega, eps, n) / 100`.
    pub valid: bool,
    /// `k / smallness_bound(omega, eps, n)`.
    pub smallness_ratio: f64,
}

impl PerturbationResult {
    /// Shift on the plus branch; the minus branch carries its negative.
    pub fn delta_plus(&self) -> f64 {
        self.branch.sign() * self.delta
    }

    pub fn e1_plus(&self) -> f64 {
        self.e0 + self.delta_plus()
    }

    pub fn e1_minus(&self) -> f64 {
        self.e0 - self.delta_plus()
    }
}

/// First-order energies `omega(2n + sqrt eps + 1) ∓ sqrt(k/24) <xi>_n` for
/// `n < n_levels` on the branch of `params`.
pub fn corrected_energies(params: &ModelParams, n_levels: usize) -> Result<Vec<PerturbationResult>, PerturbationError> {
    params
        .validate()
        .map_err(|e| PerturbationError::InvalidParameter(e.to_string()))?;
    let ModelParams {
        omega,
        k,
        epsilon,
        branch,
    } = *params;
    (0..n_levels)
        .into_par_iter()
        .map(|n| {
            let moment = first_moment_closed(n, epsilon, omega)?;
            let e0 = isotonic_exact_energy(n, omega, epsilon);
            let delta = -branch.sign() * (k / 24.0).sqrt() * moment;
            let bound = smallness_bound(omega, epsilon, n);
            Ok(PerturbationResult {
                n,
                branch,
                e0,
                moment,
                delta,
                e1: e0 + delta,
                valid: k <= bound / SMALLNESS_MARGIN,
                smallness_ratio: k / bound,
            })
        })
        .collect()
}

pub fn perturbation_spectrum(params: &ModelParams, n_levels: usize) -> Result<Spectrum, PerturbationError> {
    let results = corrected_energies(params, n_levels)?;
    Ok(Spectrum {
        params: *params,
        method: Method::Perturbation,
        energies: results.iter().map(|r| r.e1).collect(),
        grid_meta: None,
        est_error: None,
    })
}

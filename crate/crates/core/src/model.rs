//! Physical parameters, the branched effective potentials and the exact
//! `k = 0` (isotonic) solution.
//!
//! The branched pair `H^±` reduces, after the change of variable to `xi`, to
//! the half-line problem
//!
//! ```text
//! -phi'' + [ omega^2 (xi ∓ xi0)^2 / 64 + (eps - 1/4) / xi^2 - k / (24 omega^2) ] phi = (E/4) phi
//! ```
//!
//! with `xi0 = sqrt(k/6) * 4 / omega^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::specfun::{hermite_with_scale, laguerre_assoc, log_gamma};

/// Relative threshold for declaring `H_n(arg)` a zero.
pub const HERMITE_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// `+1` for the plus branch, `-1` for the minus branch.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn both() -> [Branch; 2] {
        [Branch::Plus, Branch::Minus]
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Plus => f.write_str("plus"),
            Branch::Minus => f.write_str("minus"),
        }
    }
}

impl FromStr for Branch {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(ModelError::InvalidParameter(format!("unknown branch {other:?}"))),
        }
    }
}

/// Parameter set of one branched half-line problem.
///
/// `epsilon` is the ordering aggregate `4 alpha gamma`; the individual
/// ordering parameters are not kept. With `k = 0` the branch is irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub k: f64,
    pub epsilon: f64,
    pub branch: Branch,
}

impl ModelParams {
    pub fn new(omega: f64, k: f64, epsilon: f64, branch: Branch) -> Result<Self, ModelError> {
        let params = Self {
            omega,
            k,
            epsilon,
            branch,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "k must be non-negative and finite, got {}",
                self.k
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "epsilon must be non-negative and finite, got {}",
                self.epsilon
            )));
        }
        if self.epsilon < 0.25 {
            log::warn!(
                "epsilon = {} < 1/4: the inverse-square term is attractive and singular",
                self.epsilon
            );
        }
        Ok(())
    }

    pub fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }

    pub fn sqrt_eps(&self) -> f64 {
        self.epsilon.sqrt()
    }

    /// Distance of the harmonic center from the origin, `sqrt(k/6) 4 / omega^2`.
    pub fn xi0(&self) -> f64 {
        (self.k / 6.0).sqrt() * 4.0 / (self.omega * self.omega)
    }

    /// Signed center of the displaced oscillator: `+xi0` or `-xi0`.
    pub fn center(&self) -> f64 {
        self.branch.sign() * self.xi0()
    }

    pub fn energy_map(&self) -> EnergyMap {
        EnergyMap {
            omega: self.omega,
            k: self.k,
        }
    }

    /// Constant shift `k / (24 omega^2)` between `lambda` and `E/4`.
    pub fn lambda_shift(&self) -> f64 {
        self.k / (24.0 * self.omega * self.omega)
    }
}

/// Affine maps between the energy `E` and the spectral variables
/// `lambda = E/4 + k/(24 omega^2)` and `mu = E/omega + k/(6 omega^3) - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMap {
    pub omega: f64,
    pub k: f64,
}

impl EnergyMap {
    pub fn lambda_of_energy(&self, energy: f64) -> f64 {
        energy / 4.0 + self.k / (24.0 * self.omega * self.omega)
    }

    pub fn energy_of_lambda(&self, lambda: f64) -> f64 {
        4.0 * (lambda - self.k / (24.0 * self.omega * self.omega))
    }

    pub fn mu_of_energy(&self, energy: f64) -> f64 {
        energy / self.omega + self.k / (6.0 * self.omega.powi(3)) - 0.5
    }

    pub fn energy_of_mu(&self, mu: f64) -> f64 {
        self.omega * (mu + 0.5) - self.k / (6.0 * self.omega * self.omega)
    }
}

/// `omega^2 (xi - center)^2 / 64 + (eps - 1/4) / xi^2 - k / (24 omega^2)`.
pub fn displaced_isotonic_potential(omega: f64, k: f64, epsilon: f64, center: f64, xi: f64) -> f64 {
    let d = xi - center;
    omega * omega * d * d / 64.0 + (epsilon - 0.25) / (xi * xi) - k / (24.0 * omega * omega)
}

/// Effective potential `V_eff^±(xi)` of the selected branch.
pub fn effective_potential(params: &ModelParams, xi: f64) -> Result<f64, ModelError> {
    if !(xi > 0.0) {
        return Err(ModelError::Domain(format!("xi must be positive, got {xi}")));
    }
    Ok(displaced_isotonic_potential(
        params.omega,
        params.k,
        params.epsilon,
        params.center(),
        xi,
    ))
}

/// Potential of the `lambda` form of the eigenproblem,
/// `V_eff + k/(24 omega^2)`: the constant shift is carried by `lambda`
/// instead, so eigenvalues of `-d^2/dxi^2 + lambda_potential` are `lambda`.
pub fn lambda_potential(params: &ModelParams, xi: f64) -> Result<f64, ModelError> {
    Ok(effective_potential(params, xi)? + params.lambda_shift())
}

/// Outcome of [`hermite_truncation_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationScan {
    /// `sqrt(omega xi0^2 / 8)`.
    pub argument: f64,
    /// `true` when `xi0 = 0`, in which case every odd degree qualifies.
    pub degenerate: bool,
    pub levels: Vec<usize>,
}

/// Degrees `n <= n_max` for which `H_n(sqrt(omega xi0^2 / 8))` vanishes, i.e.
/// for which the `eps = 1/4` problem has a Hermite-polynomial bound state.
/// `epsilon` is ignored.
pub fn hermite_truncation_scan(params: &ModelParams, n_max: usize) -> Result<TruncationScan, ModelError> {
    let xi0 = params.xi0();
    let argument = (params.omega * xi0 * xi0 / 8.0).sqrt();
    let mut levels = Vec::new();
    for n in 0..=n_max {
        let (value, scale) = hermite_with_scale(n, argument)?;
        if value.abs() <= HERMITE_ZERO_TOL * scale {
            levels.push(n);
        }
    }
    Ok(TruncationScan {
        argument,
        degenerate: xi0 == 0.0,
        levels,
    })
}

/// Exact `k = 0` level `omega (2n + sqrt(eps) + 1)`.
pub fn isotonic_exact_energy(n: usize, omega: f64, epsilon: f64) -> f64 {
    omega * (2.0 * n as f64 + epsilon.sqrt() + 1.0)
}

/// Normalized `k = 0` eigenfunction
/// `N_n xi^(1/2 + s) exp(-omega xi^2 / 16) L_n^s(omega xi^2 / 8)`, `s = sqrt(eps)`.
///
/// Unit `L^2` norm on `(0, inf)` and positive slope at the origin.
pub fn isotonic_eigenfunction(n: usize, omega: f64, epsilon: f64, xi: f64) -> f64 {
    if xi <= 0.0 {
        return 0.0;
    }
    let s = epsilon.sqrt();
    let log_norm = isotonic_log_norm(n, omega, s);
    let t = omega * xi * xi / 8.0;
    let envelope = (log_norm + (0.5 + s) * xi.ln() - 0.5 * t).exp();
    envelope * laguerre_assoc(n, s, t)
}

/// `ln N_n` with `N_n^2 = 2 (omega/8)^(s+1) n! / Gamma(n + s + 1)`.
pub(crate) fn isotonic_log_norm(n: usize, omega: f64, s: f64) -> f64 {
    let nf = n as f64;
    // arguments are >= 1, so log_gamma cannot fail
    let lg_n = log_gamma(nf + 1.0).unwrap_or(0.0);
    let lg_ns = log_gamma(nf + s + 1.0).unwrap_or(0.0);
    0.5 * (std::f64::consts::LN_2 + (s + 1.0) * (omega / 8.0).ln() + lg_n - lg_ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;
    use proptest::prelude::*;

    fn table_params(epsilon: f64, branch: Branch) -> ModelParams {
        ModelParams::new(10.0, 1.0, epsilon, branch).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(0.0, 1.0, 0.25, Branch::Plus).is_err());
        assert!(ModelParams::new(10.0, -1.0, 0.25, Branch::Plus).is_err());
        assert!(ModelParams::new(10.0, 1.0, -0.1, Branch::Plus).is_err());
        assert!(ModelParams::new(10.0, 1.0, f64::NAN, Branch::Plus).is_err());
        // attractive inverse-square term is accepted (with a warning)
        assert!(ModelParams::new(10.0, 1.0, 0.1, Branch::Plus).is_ok());
        assert!(ModelParams::new(10.0, 0.0, 0.5, Branch::Minus).is_ok());
    }

    #[test]
    fn xi0_definition() {
        let p = table_params(0.25, Branch::Plus);
        assert!((p.xi0() - (1.0f64 / 6.0).sqrt() * 0.04).abs() < 1e-16);
        assert_eq!(ModelParams::new(3.0, 0.0, 0.5, Branch::Plus).unwrap().xi0(), 0.0);
        assert_eq!(p.center(), p.xi0());
        assert_eq!(p.with_branch(Branch::Minus).center(), -p.xi0());
    }

    #[test]
    fn json_round_trip() {
        let p = table_params(0.5, Branch::Minus);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"omega":10.0,"k":1.0,"epsilon":0.5,"branch":"minus"}"#);
        let back: ModelParams = serde_json::from_str(r#"{"omega":10,"k":1,"epsilon":0.5,"branch":"minus"}"#).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ModelParams>(r#"{"omega":10,"k":1,"epsilon":0.5,"branch":"up"}"#).is_err());
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("plus".parse::<Branch>().unwrap(), Branch::Plus);
        assert_eq!("Minus".parse::<Branch>().unwrap(), Branch::Minus);
        assert!("both".parse::<Branch>().is_err());
    }

    #[test]
    fn potential_examples() {
        // eps = 1/4, k = 0: pure oscillator
        let p = ModelParams::new(10.0, 0.0, 0.25, Branch::Plus).unwrap();
        for &xi in &[0.1, 1.0, 3.5] {
            let v = effective_potential(&p, xi).unwrap();
            assert!((v - 100.0 * xi * xi / 64.0).abs() < 1e-14);
        }
        // minimum of the plus branch sits at xi0
        let p = table_params(0.25, Branch::Plus);
        let v = effective_potential(&p, p.xi0()).unwrap();
        assert!((v + 1.0 / 2400.0).abs() < 1e-18);
        // eps = 1/2, xi = 1: term by term
        let xi0 = (1.0f64 / 6.0).sqrt() * 0.04;
        for (branch, center) in [(Branch::Plus, xi0), (Branch::Minus, -xi0)] {
            let p = table_params(0.5, branch);
            let want = 100.0 * (1.0 - center) * (1.0 - center) / 64.0 + 0.25 / 1.0 - 1.0 / 2400.0;
            assert!((effective_potential(&p, 1.0).unwrap() - want).abs() < 1e-15);
        }
        assert!(
            (effective_potential(&table_params(0.5, Branch::Plus), 1.0).unwrap() - 1.761_468_963_692_017).abs() < 1e-14
        );
        assert!(
            (effective_potential(&table_params(0.5, Branch::Minus), 1.0).unwrap() - 1.863_531_036_307_983).abs()
                < 1e-14
        );
    }

    #[test]
    fn lambda_form_drops_the_shift() {
        let p = table_params(0.25, Branch::Plus);
        assert_eq!(lambda_potential(&p, p.xi0()).unwrap(), 0.0);
        let p = table_params(0.5, Branch::Minus);
        let d = lambda_potential(&p, 1.3).unwrap() - effective_potential(&p, 1.3).unwrap();
        assert!((d - 1.0 / 2400.0).abs() < 1e-16);
    }

    #[test]
    fn potential_rejects_nonpositive_xi() {
        let p = table_params(0.5, Branch::Plus);
        assert!(effective_potential(&p, 0.0).is_err());
        assert!(effective_potential(&p, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn plus_equals_minus_with_negated_center(xi in 1e-3f64..20.0, k in 0.0f64..100.0, eps in 0.0f64..3.0) {
            let p = ModelParams::new(10.0, k, eps, Branch::Plus).unwrap();
            let plus = effective_potential(&p, xi).unwrap();
            // minus branch evaluated with xi0 -> -xi0 puts the center back at +xi0
            let minus_negated = displaced_isotonic_potential(p.omega, p.k, p.epsilon, -(-p.xi0()), xi);
            prop_assert_eq!(plus, minus_negated);
        }

        #[test]
        fn energy_map_round_trip(e in -1e4f64..1e4, omega in 0.1f64..50.0, k in 0.0f64..10.0) {
            let m = EnergyMap { omega, k };
            let back = m.energy_of_lambda(m.lambda_of_energy(e));
            prop_assert!((back - e).abs() <= 1e-14 * e.abs().max(1.0));
            let back = m.energy_of_mu(m.mu_of_energy(e));
            prop_assert!((back - e).abs() <= 1e-13 * e.abs().max(1.0));
        }
    }

    #[test]
    fn energy_map_links_mu_and_lambda() {
        let m = EnergyMap { omega: 10.0, k: 1.0 };
        let e = 14.793_621_397_3;
        // mu = 4 lambda / omega - 1/2
        let lhs = m.mu_of_energy(e);
        let rhs = 4.0 * m.lambda_of_energy(e) / 10.0 - 0.5;
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn truncation_scan_degenerate() {
        let p = ModelParams::new(10.0, 0.0, 0.25, Branch::Plus).unwrap();
        let scan = hermite_truncation_scan(&p, 9).unwrap();
        assert!(scan.degenerate);
        assert_eq!(scan.levels, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn truncation_scan_hits_second_hermite_zero() {
        // k = 3 omega^3 / 2 puts the argument at 1/sqrt(2), the positive root of H_2
        let p = ModelParams::new(10.0, 1500.0, 0.25, Branch::Plus).unwrap();
        let scan = hermite_truncation_scan(&p, 50).unwrap();
        assert!((scan.argument - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(scan.levels, vec![2]);
        assert!(!scan.degenerate);
    }

    #[test]
    fn truncation_scan_empty_for_table_parameters() {
        let scan = hermite_truncation_scan(&table_params(0.25, Branch::Plus), 50).unwrap();
        assert!((scan.argument - 0.04 * (10.0f64 / 48.0).sqrt()).abs() < 1e-16);
        assert!(scan.levels.is_empty());
        assert!(hermite_truncation_scan(&table_params(0.25, Branch::Plus), 201).is_err());
    }

    #[test]
    fn truncation_scan_at_most_one_level() {
        for i in 1..=12 {
            for j in 1..=25 {
                let omega = 0.5 * i as f64;
                let k = 0.37 * (j * j) as f64;
                let p = ModelParams::new(omega, k, 0.25, Branch::Plus).unwrap();
                let scan = hermite_truncation_scan(&p, 60).unwrap();
                assert!(scan.levels.len() <= 1, "omega={omega} k={k}: {:?}", scan.levels);
            }
        }
    }

    #[test]
    fn isotonic_energies() {
        assert_eq!(isotonic_exact_energy(0, 10.0, 0.25), 15.0);
        assert_eq!(isotonic_exact_energy(2, 10.0, 0.25), 55.0);
        let e0 = isotonic_exact_energy(0, 10.0, 0.5);
        assert!((e0 - 10.0 * (1.0 + 0.5f64.sqrt())).abs() < 1e-14);
        // midpoint of the eps = 1/2 ground-state pair
        let mid = 0.5 * (16.848_680_53 + 17.292_509_39);
        assert!((e0 - mid).abs() < 1e-3);
    }

    fn integrate(f: impl Fn(f64) -> f64) -> f64 {
        adaptive_simpson(f, 0.0, 12.0, 1e-13, 50).unwrap()
    }

    #[test]
    fn isotonic_eigenfunctions_orthonormal() {
        let (omega, eps) = (10.0, 0.5);
        assert_eq!(isotonic_eigenfunction(3, omega, eps, 0.0), 0.0);
        for n in 0..=5 {
            let norm = integrate(|x| isotonic_eigenfunction(n, omega, eps, x).powi(2));
            assert!((norm - 1.0).abs() < 1e-10, "n={n}: {norm}");
        }
        let overlap =
            integrate(|x| isotonic_eigenfunction(0, omega, eps, x) * isotonic_eigenfunction(1, omega, eps, x));
        assert!(overlap.abs() < 1e-10);
        let overlap =
            integrate(|x| isotonic_eigenfunction(2, omega, eps, x) * isotonic_eigenfunction(5, omega, eps, x));
        assert!(overlap.abs() < 1e-10);
    }

    #[test]
    fn isotonic_node_count_and_slope() {
        for &eps in &[0.25, 0.5, 1.0] {
            for n in 0..=5 {
                let mut nodes = 0;
                let mut prev = isotonic_eigenfunction(n, 10.0, eps, 1e-3);
                assert!(prev > 0.0, "positive slope at the origin");
                for i in 2..=8000 {
                    let v = isotonic_eigenfunction(n, 10.0, eps, i as f64 * 1e-3);
                    if v.abs() < 1e-12 {
                        continue;
                    }
                    if v * prev < 0.0 {
                        nodes += 1;
                    }
                    prev = v;
                }
                assert_eq!(nodes, n, "eps={eps} n={n}");
            }
        }
    }
}

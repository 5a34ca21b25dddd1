//! `eps = 1/4` spectrum from the zeros in `mu` of `D_mu(∓ sqrt(omega/4) xi0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{Method, Spectrum};
use crate::error::QuantizeError;
use crate::model::ModelParams;
use crate::specfun::{parabolic_cylinder_d, SpecFunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationRoot {
    pub n: usize,
    pub mu: f64,
    pub energy: f64,
    pub bracket: (f64, f64),
    /// `|D_mu(z)|` at the returned `mu`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizeConfig {
    pub scan_step: f64,
    pub mu_tol: f64,
    /// Upper end of the scan; `2 n_levels + 2` when `None`.
    pub mu_max: Option<f64>,
    pub specfun: SpecFunConfig,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        Self {
            scan_step: 0.25,
            mu_tol: 1e-12,
            mu_max: None,
            specfun: SpecFunConfig::default(),
        }
    }
}

impl QuantizeConfig {
    pub fn validate(&self) -> Result<(), QuantizeError> {
        if !(self.scan_step > 0.0 && self.scan_step <= 1.0) {
            return Err(QuantizeError::Config(format!(
                "scan_step must be in (0, 1], got {}",
                self.scan_step
            )));
        }
        if !(self.mu_tol > 0.0 && self.mu_tol < self.scan_step) {
            return Err(QuantizeError::Config(format!("mu_tol out of range: {}", self.mu_tol)));
        }
        if let Some(m) = self.mu_max {
            if !(m > 0.0 && m.is_finite()) {
                return Err(QuantizeError::Config(format!("mu_max must be positive, got {m}")));
            }
        }
        self.specfun.validate()?;
        Ok(())
    }
}

/// Argument of the boundary condition, `-sqrt(omega/4) xi0` on the plus
/// branch and `+sqrt(omega/4) xi0` on the minus branch.
pub fn boundary_argument(params: &ModelParams) -> f64 {
    -params.branch.sign() * (params.omega / 4.0).sqrt() * params.xi0()
}

pub fn quantize_pcf(params: &ModelParams, n_levels: usize) -> Result<Vec<QuantizationRoot>, QuantizeError> {
    quantize_pcf_with(params, n_levels, &QuantizeConfig::default())
}

pub fn quantize_pcf_with(
    params: &ModelParams,
    n_levels: usize,
    cfg: &QuantizeConfig,
) -> Result<Vec<QuantizationRoot>, QuantizeError> {
    if params.epsilon != 0.25 {
        return Err(QuantizeError::UnsupportedEpsilon(params.epsilon));
    }
    if let Err(e) = params.validate() {
        return Err(QuantizeError::Config(e.to_string()));
    }
    let mut roots = quantize_at(boundary_argument(params), n_levels, cfg)?;
    let map = params.energy_map();
    for r in &mut roots {
        r.energy = map.energy_of_mu(r.mu);
    }
    Ok(roots)
}

/// The first `n_levels` zeros of `mu -> D_mu(z)` on `mu >= 0`.
///
/// `energy` is left at `mu + 1/2` (units of `omega`, no shift); callers
/// holding model parameters convert it.
pub fn quantize_at(z: f64, n_levels: usize, cfg: &QuantizeConfig) -> Result<Vec<QuantizationRoot>, QuantizeError> {
    cfg.validate()?;
    let mu_max = cfg.mu_max.unwrap_or(2.0 * n_levels as f64 + 2.0);
    let d = |mu: f64| parabolic_cylinder_d(mu, z, &cfg.specfun);

    enum Hit {
        Exact(f64),
        Bracket(f64, f64, f64, f64),
    }
    let mut hits = Vec::new();
    let steps = (mu_max / cfg.scan_step).round() as usize;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let mu = i as f64 * cfg.scan_step;
        let val = d(mu)?;
        if val == 0.0 {
            hits.push(Hit::Exact(mu));
            prev = None;
            continue;
        }
        if let Some((mu_prev, val_prev)) = prev {
            if val_prev.signum() != val.signum() {
                hits.push(Hit::Bracket(mu_prev, mu, val_prev, val));
            }
        }
        prev = Some((mu, val));
    }
    if hits.len() < n_levels {
        return Err(QuantizeError::TooFewRoots {
            found: hits.len(),
            requested: n_levels,
            mu_max,
        });
    }
    hits.truncate(n_levels);

    let refined = hits
        .par_iter()
        .map(|hit| match *hit {
            Hit::Exact(mu) => Ok((mu, (mu, mu), 0.0)),
            Hit::Bracket(lo, hi, flo, fhi) => refine(&d, lo, hi, flo, fhi, cfg.mu_tol),
        })
        .collect::<Result<Vec<_>, QuantizeError>>()?;

    Ok(refined
        .into_iter()
        .enumerate()
        .map(|(n, (mu, bracket, residual))| QuantizationRoot {
            n,
            mu,
            energy: mu + 0.5,
            bracket,
            residual,
        })
        .collect())
}

type Refined = (f64, (f64, f64), f64);

/// Bisection to `tol`, then one secant step inside the final bracket.
fn refine<F>(d: &F, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64, tol: f64) -> Result<Refined, QuantizeError>
where
    F: Fn(f64) -> Result<f64, crate::error::SpecFunError>,
{
    let bracket = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = d(mid)?;
        if fm == 0.0 {
            return Ok((mid, bracket, 0.0));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let mut best = if flo.abs() <= fhi.abs() {
        (lo, flo.abs())
    } else {
        (hi, fhi.abs())
    };
    let secant = lo - flo * (hi - lo) / (fhi - flo);
    if secant > lo && secant < hi {
        let fs = d(secant)?.abs();
        if fs < best.1 {
            best = (secant, fs);
        }
    }
    Ok((best.0, bracket, best.1))
}

/// Roots packaged as a [`Spectrum`].
pub fn pcf_spectrum(params: &ModelParams, n_levels: usize) -> Result<Spectrum, QuantizeError> {
    let roots = quantize_pcf(params, n_levels)?;
    Ok(Spectrum {
        params: *params,
        method: Method::ParabolicCylinder,
        energies: roots.iter().map(|r| r.energy).collect(),
        grid_meta: None,
        est_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Branch;

    fn params(k: f64, branch: Branch) -> ModelParams {
        ModelParams::new(10.0, k, 0.25, branch).unwrap()
    }

    #[test]
    fn harmonic_limit_hits_odd_orders() {
        let roots = quantize_pcf(&params(0.0, Branch::Plus), 4).unwrap();
        for (n, r) in roots.iter().enumerate() {
            assert_eq!(r.mu, 2.0 * n as f64 + 1.0);
            assert_eq!(r.residual, 0.0);
            assert!((r.energy - 10.0 * (2.0 * n as f64 + 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn table_parameters_ground_state() {
        // mpmath: findroot(lambda m: pcfd(m, -sqrt(2.5) * xi0), 0.98)
        let roots = quantize_pcf(&params(1.0, Branch::Plus), 6).unwrap();
        assert!((roots[0].mu - 0.979_528_806_394).abs() < 1e-11);
        assert!((roots[0].energy - 14.793_621_397_3).abs() < 1e-9);
        let plus = [
            14.7936213973,
            34.6906520077,
            54.6134043159,
            74.5490277492,
            94.4926972235,
            114.441999344,
        ];
        for (r, want) in roots.iter().zip(plus) {
            assert!((r.energy - want).abs() < 1e-8);
            assert!(r.residual <= 1e-10);
            assert!(r.bracket.0 <= r.mu && r.mu <= r.bracket.1);
        }
        let minus = [
            15.2056499062,
            35.3086920152,
            55.3859536449,
            75.4503349811,
            95.5066676664,
            115.557366698,
        ];
        let roots = quantize_pcf(&params(1.0, Branch::Minus), 6).unwrap();
        for (r, want) in roots.iter().zip(minus) {
            assert!((r.energy - want).abs() < 1e-8);
        }
    }

    #[test]
    fn roots_interlace_even_integers() {
        for branch in Branch::both() {
            let roots = quantize_pcf(&params(1.0, branch), 8).unwrap();
            for (n, r) in roots.iter().enumerate() {
                assert!(r.mu > 2.0 * n as f64 && r.mu < 2.0 * n as f64 + 2.0);
                assert_eq!(r.n, n);
            }
            for w in roots.windows(2) {
                assert!(w[1].mu > w[0].mu);
            }
        }
    }

    #[test]
    fn branch_symmetry() {
        let p = params(3.0, Branch::Plus);
        let z = boundary_argument(&p);
        assert!(z < 0.0);
        assert_eq!(boundary_argument(&p.with_branch(Branch::Minus)), -z);
        let cfg = QuantizeConfig::default();
        let plus = quantize_pcf(&p, 5).unwrap();
        let minus_mirrored = quantize_at(-boundary_argument(&p.with_branch(Branch::Minus)), 5, &cfg).unwrap();
        for (a, b) in plus.iter().zip(&minus_mirrored) {
            assert_eq!(a.mu, b.mu);
        }
    }

    #[test]
    fn rejects_other_epsilon() {
        let p = ModelParams::new(10.0, 1.0, 0.5, Branch::Plus).unwrap();
        assert_eq!(quantize_pcf(&p, 3), Err(QuantizeError::UnsupportedEpsilon(0.5)));
    }

    #[test]
    fn scan_range_exhausted() {
        let cfg = QuantizeConfig {
            mu_max: Some(3.5),
            ..QuantizeConfig::default()
        };
        let err = quantize_pcf_with(&params(1.0, Branch::Plus), 3, &cfg).unwrap_err();
        assert_eq!(
            err,
            QuantizeError::TooFewRoots {
                found: 2,
                requested: 3,
                mu_max: 3.5
            }
        );
    }

    #[test]
    fn config_validation() {
        let bad = QuantizeConfig {
            scan_step: 0.0,
            ..QuantizeConfig::default()
        };
        assert!(quantize_at(0.1, 2, &bad).is_err());
        let bad = QuantizeConfig {
            mu_tol: 1.0,
            ..QuantizeConfig::default()
        };
        assert!(quantize_at(0.1, 2, &bad).is_err());
    }

    #[test]
    fn spectrum_wrapper() {
        let s = pcf_spectrum(&params(1.0, Branch::Minus), 3).unwrap();
        assert_eq!(s.method, Method::ParabolicCylinder);
        assert_eq!(s.energies.len(), 3);
        assert!(s.grid_meta.is_none());
    }
}

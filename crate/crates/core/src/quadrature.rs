//! Adaptive Simpson quadrature.

use crate::error::QuadratureError;

const INITIAL_PANELS: usize = 64;

/// Integrates `f` over `[a, b]` to a relative tolerance `rel_tol`.
///
/// The interval is first split into a fixed number of panels; a coarse
/// composite estimate fixes the absolute tolerance, which is then shared
/// between panels in proportion to their width. Each panel is refined by
/// recursive bisection with the Lyness acceptance test `|S2 - S1| <= 15 tol`
/// and a Richardson correction on acceptance.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, max_depth: usize) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadratureError::Interval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };

    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    let mut coarse_abs = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (eval(lo)?, eval(mid)?, eval(hi)?);
        let s = simpson(lo, hi, flo, fmid, fhi);
        coarse += s;
        coarse_abs += (hi - lo) * (flo.abs() + 4.0 * fmid.abs() + fhi.abs()) / 6.0;
        panels.push((lo, hi, flo, fmid, fhi, s));
    }
    // A vanishing integral with a non-vanishing integrand still needs a scale.
    let scale = if coarse.abs() > 1e-3 * coarse_abs {
        coarse.abs()
    } else {
        coarse_abs
    };
    if scale == 0.0 {
        return Ok(0.0);
    }
    let abs_tol = rel_tol * scale;

    let mut total = 0.0;
    let mut compensation = 0.0;
    for (lo, hi, flo, fmid, fhi, s) in panels {
        let tol = abs_tol * (hi - lo) / (b - a);
        let part = refine(&eval, lo, hi, flo, fmid, fhi, s, tol, max_depth).map_err(|e| match e {
            QuadratureError::DepthExceeded { x, .. } => QuadratureError::DepthExceeded { max_depth, x },
            other => other,
        })?;
        // Neumaier summation across panels
        let t = total + part;
        if total.abs() >= part.abs() {
            compensation += (total - t) + part;
        } else {
            compensation += (part - t) + total;
        }
        total = t;
    }
    Ok(total + compensation)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

#[allow(clippy::too_many_arguments)]
fn refine<E>(
    eval: &E,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, QuadratureError>
where
    E: Fn(f64) -> Result<f64, QuadratureError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadratureError::DepthExceeded { max_depth: 0, x: m });
    }
    let l = refine(eval, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = refine(eval, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_gaussians() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-14, 40).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let g = adaptive_simpson(|x: f64| (-x * x).exp(), 0.0, 10.0, 1e-13, 40).unwrap();
        assert!((g - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_with_zero_mean() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, 2.0 * std::f64::consts::PI, 1e-12, 40).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10, 30),
            Err(QuadratureError::NonFinite { .. })
        ));
        assert!(matches!(
            adaptive_simpson(|x| x, 1.0, 0.0, 1e-10, 30),
            Err(QuadratureError::Interval { .. })
        ));
        assert!(matches!(
            adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, 1e-15, 3),
            Err(QuadratureError::DepthExceeded { .. })
        ));
    }
}

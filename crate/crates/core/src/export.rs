//! Deterministic JSON and CSV output.
//!
//! Every float is rounded to 12 significant digits so that repeated runs
//! produce byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::classical::{ClassicalState, HamiltonianPoint};
use crate::eigensolver::{EigenfunctionTable, Spectrum};
use crate::perturbation::PerturbationResult;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text for the 12-digit rounding; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with keys in sorted order and floats at 12 significant digits.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn eigenfunction_csv(table: &EigenfunctionTable) -> String {
    let mut out = String::from("xi,phi\n");
    for (x, v) in table.xi().zip(&table.values) {
        let _ = writeln!(out, "{},{}", fmt_sig(x), fmt_sig(*v));
    }
    out
}

/// One row per level and branch: `branch,n,energy,est_error`.
pub fn spectrum_csv(spectra: &[Spectrum]) -> String {
    let mut out = String::from("branch,n,energy,est_error\n");
    for s in spectra {
        for (n, e) in s.energies.iter().enumerate() {
            let err = s
                .est_error
                .as_ref()
                .and_then(|v| v.get(n))
                .map(|&x| fmt_sig(x))
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", s.params.branch, n, fmt_sig(*e), err);
        }
    }
    out
}

pub fn perturbation_csv(results: &[PerturbationResult]) -> String {
    let mut out = String::from("n,e0,delta_plus,e1_plus,e1_minus\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_sig(r.e0),
            fmt_sig(r.delta_plus()),
            fmt_sig(r.e1_plus()),
            fmt_sig(r.e1_minus())
        );
    }
    out
}

pub fn emden_csv(trajectory: &[ClassicalState]) -> String {
    let mut out = String::from("t,x,v\n");
    for s in trajectory {
        let _ = writeln!(out, "{},{},{}", fmt_sig(s.t), fmt_sig(s.x), fmt_sig(s.v));
    }
    out
}

pub fn hamiltonian_csv(trajectory: &[HamiltonianPoint]) -> String {
    let mut out = String::from("t,x,p,H\n");
    for s in trajectory {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(s.t),
            fmt_sig(s.x),
            fmt_sig(s.p),
            fmt_sig(s.h)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Branch, ModelParams};
    use crate::perturbation::corrected_energies;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(16.848783040123456), 16.8487830401);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.5e-20), "2.5e-20");
        assert_eq!(fmt_sig(15.0), "15");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn json_is_stable() {
        let p = ModelParams::new(10.0, 1.0, 0.5, Branch::Plus).unwrap();
        let r = corrected_energies(&p, 2).unwrap();
        let a = to_stable_json(&r).unwrap();
        let b = to_stable_json(&corrected_energies(&p, 2).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"e1\": 16.8491532889"));
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v[0]["branch"], "plus");
    }

    #[test]
    fn perturbation_csv_layout() {
        let p = ModelParams::new(10.0, 1.0, 0.5, Branch::Minus).unwrap();
        let csv = perturbation_csv(&corrected_energies(&p, 1).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,e0,delta_plus,e1_plus,e1_minus"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row[0], 0.0);
        assert!((row[3] - 16.8491532889).abs() < 1e-9);
        assert!((row[4] - 17.2929823349).abs() < 1e-9);
        assert!(row[2] < 0.0);
    }

    #[test]
    fn trajectory_csv_headers() {
        let s = [ClassicalState { t: 0.0, x: 1.0, v: 0.0 }];
        assert_eq!(emden_csv(&s), "t,x,v\n0,1,0\n");
        let h = [HamiltonianPoint {
            t: 0.5,
            x: 1.0,
            p: -2.0,
            h: 3.0,
        }];
        assert_eq!(hamiltonian_csv(&h), "t,x,p,H\n0.5,1,-2,3\n");
    }
}

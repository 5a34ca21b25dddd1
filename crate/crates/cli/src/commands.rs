use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use log::info;
use qhspec_core::classical::branch_variable;
use qhspec_core::eigensolver::DEFAULT_GRID_POINTS;
use qhspec_core::export::{
    eigenfunction_csv, emden_csv, fmt_sig, hamiltonian_csv, perturbation_csv, spectrum_csv, to_stable_json,
};
use qhspec_core::polyalgebra::{chiellini_exponents, Exponents};
use qhspec_core::quantize::{boundary_argument, quantize_pcf_with, QuantizeConfig};
use qhspec_core::reference::max_deviation;
use qhspec_core::{
    chiellini_check, corrected_energies, default_domain, detect_period, emden_to_canonical, integrate_emden,
    integrate_hamiltonian, isochronous_g, reference_table, solve_levels, uniqueness_scan, BigRational, Branch,
    ClassicalState, EmdenParams, Grid, Method, ModelParams, Polynomial, QuantizationRoot, Spectrum,
};
use serde::Serialize;

use crate::error::CliError;
use crate::{
    BranchArg, ClassicalArgs, EigenfunctionArgs, Format, OutputArgs, PerturbArgs, PolycheckArgs, QuantizeArgs,
    SpectrumArgs, TableArgs,
};

fn branches(b: BranchArg) -> Vec<Branch> {
    match b {
        BranchArg::Plus => vec![Branch::Plus],
        BranchArg::Minus => vec![Branch::Minus],
        BranchArg::Both => Branch::both().to_vec(),
    }
}

fn model(omega: f64, k: f64, eps: f64, branch: Branch) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(omega, k, eps, branch)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    emit(&to_stable_json(value)?, out)
}

fn grid_for(params: &ModelParams, levels: usize, grid_n: Option<usize>, xi_max: Option<f64>) -> Result<Grid, CliError> {
    let auto = default_domain(params, levels);
    let grid = Grid::new(xi_max.unwrap_or(auto.xi_max), grid_n.unwrap_or(DEFAULT_GRID_POINTS))?;
    Ok(grid)
}

#[allow(clippy::too_many_arguments)]
fn fd_spectra(
    omega: f64,
    k: f64,
    eps: f64,
    which: &[Branch],
    levels: usize,
    grid_n: Option<usize>,
    xi_max: Option<f64>,
    richardson: bool,
) -> Result<Vec<Spectrum>, CliError> {
    let run = |branch: Branch| -> Result<Spectrum, CliError> {
        let params = model(omega, k, eps, branch)?;
        let grid = grid_for(&params, levels, grid_n, xi_max)?;
        info!("{branch} branch: xi_max = {}, N = {}", grid.xi_max, grid.n_points);
        Ok(solve_levels(&params, &grid, levels, richardson)?)
    };
    // one thread per branch; the solver parallelizes over levels inside
    std::thread::scope(|s| {
        let handles: Vec<_> = which.iter().map(|&b| s.spawn(move || run(b))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

fn spectrum_table(spectra: &[Spectrum]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>3}", "n");
    for sp in spectra {
        let _ = write!(s, "  {:>20}", format!("E_n ({})", sp.params.branch));
        if sp.est_error.is_some() {
            let _ = write!(s, "  {:>10}", "est_err");
        }
    }
    s.push('\n');
    let levels = spectra.iter().map(|sp| sp.energies.len()).max().unwrap_or(0);
    for n in 0..levels {
        let _ = write!(s, "{n:>3}");
        for sp in spectra {
            let _ = write!(s, "  {:>20}", fmt_sig(sp.energies[n]));
            if let Some(err) = &sp.est_error {
                let _ = write!(s, "  {:>10.2e}", err[n]);
            }
        }
        s.push('\n');
    }
    s
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let spectra = fd_spectra(
        a.model.omega,
        a.model.k,
        a.eps,
        &branches(a.branch),
        a.levels,
        a.grid_n,
        a.xi_max,
        a.richardson,
    )?;
    write_spectra(&spectra, &a.output)
}

fn write_spectra(spectra: &[Spectrum], output: &OutputArgs) -> Result<(), CliError> {
    let out = output.out.as_deref();
    match output.format {
        Format::Table => emit(&spectrum_table(spectra), out),
        Format::Json => emit_json(spectra, out),
        Format::Csv => emit(&spectrum_csv(spectra), out),
    }
}

#[derive(Serialize)]
struct QuantizeOutput {
    branch: Branch,
    z: f64,
    roots: Vec<QuantizationRoot>,
}

pub fn quantize(a: &QuantizeArgs) -> Result<(), CliError> {
    let cfg = QuantizeConfig {
        scan_step: a.scan_step,
        ..QuantizeConfig::default()
    };
    let mut results = Vec::new();
    for branch in branches(a.branch) {
        let params = model(a.model.omega, a.model.k, 0.25, branch)?;
        let roots = quantize_pcf_with(&params, a.levels, &cfg)?;
        results.push(QuantizeOutput {
            branch,
            z: boundary_argument(&params),
            roots,
        });
    }
    let out = a.output.out.as_deref();
    match a.output.format {
        Format::Json => emit_json(&results, out),
        Format::Csv => {
            let mut s = String::from("branch,n,mu,energy,residual\n");
            for r in &results {
                for root in &r.roots {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        r.branch,
                        root.n,
                        fmt_sig(root.mu),
                        fmt_sig(root.energy),
                        fmt_sig(root.residual)
                    );
                }
            }
            emit(&s, out)
        }
        Format::Table => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(s, "{} branch, z = {}", r.branch, fmt_sig(r.z));
                let _ = writeln!(s, "{:>3}  {:>20}  {:>20}  {:>10}", "n", "mu", "E_n", "|D|");
                for root in &r.roots {
                    let _ = writeln!(
                        s,
                        "{:>3}  {:>20}  {:>20}  {:>10.2e}",
                        root.n,
                        fmt_sig(root.mu),
                        fmt_sig(root.energy),
                        root.residual
                    );
                }
            }
            emit(&s, out)
        }
    }
}

pub fn perturb(a: &PerturbArgs) -> Result<(), CliError> {
    let params = model(a.model.omega, a.model.k, a.eps, Branch::Plus)?;
    let results = corrected_energies(&params, a.levels)?;
    if results.iter().any(|r| !r.valid) {
        log::warn!("k is not small against the level-dependent bound for some levels; see smallness_ratio");
    }
    let out = a.output.out.as_deref();
    match a.output.format {
        Format::Json => emit_json(&results, out),
        Format::Csv => emit(&perturbation_csv(&results), out),
        Format::Table => {
            let mut s = format!(
                "{:>3}  {:>16}  {:>16}  {:>16}  {:>16}\n",
                "n", "E0", "delta+", "E1 (+)", "E1 (-)"
            );
            for r in &results {
                let _ = writeln!(
                    s,
                    "{:>3}  {:>16}  {:>16}  {:>16}  {:>16}",
                    r.n,
                    fmt_sig(r.e0),
                    fmt_sig(r.delta_plus()),
                    fmt_sig(r.e1_plus()),
                    fmt_sig(r.e1_minus())
                );
            }
            emit(&s, out)
        }
    }
}

#[derive(Serialize)]
struct PeriodRow {
    amplitude: f64,
    period: f64,
    expected: f64,
    relative_error: f64,
}

pub fn classical(a: &ClassicalArgs) -> Result<(), CliError> {
    let params = EmdenParams::new(a.model.omega, a.model.k)?;
    if a.amplitudes.is_empty() {
        return Err(CliError::Input("no amplitudes given".into()));
    }
    if a.periods.is_nan() || a.periods <= 0.0 {
        return Err(CliError::Input(format!("periods must be positive, got {}", a.periods)));
    }
    if a.steps_per_period == 0 {
        return Err(CliError::Input("steps-per-period must be positive".into()));
    }
    let t = params.period();
    let dt = t / a.steps_per_period as f64;
    let t_end = a.periods * t;
    let mut rows = Vec::new();
    for (i, &x0) in a.amplitudes.iter().enumerate() {
        let traj = integrate_emden(x0, 0.0, &params, t_end, dt)?;
        let period = detect_period(&traj)?;
        rows.push(PeriodRow {
            amplitude: x0,
            period,
            expected: t,
            relative_error: (period - t).abs() / t,
        });
        if i == 0 {
            if let Some(path) = &a.trajectory {
                emit(&emden_csv(&traj), Some(path))?;
            }
            if let Some(path) = &a.hamiltonian {
                let start = ClassicalState { t: 0.0, x: x0, v: 0.0 };
                info!("branch variable u = {}", branch_variable(&start, &params));
                let state = emden_to_canonical(&start, &params)?;
                let ham = integrate_hamiltonian(&state, &params, t_end, dt)?;
                emit(&hamiltonian_csv(&ham), Some(path))?;
            }
        }
    }
    let out = a.output.out.as_deref();
    match a.output.format {
        Format::Json => emit_json(&rows, out),
        Format::Csv => {
            let mut s = String::from("amplitude,period,expected,relative_error\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt_sig(r.amplitude),
                    fmt_sig(r.period),
                    fmt_sig(r.expected),
                    fmt_sig(r.relative_error)
                );
            }
            emit(&s, out)
        }
        Format::Table => {
            let mut s = format!("2 pi / omega = {}\n", fmt_sig(t));
            let _ = writeln!(s, "{:>10}  {:>18}  {:>10}", "x0", "period", "rel. err");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>10}  {:>18}  {:>10.2e}",
                    fmt_sig(r.amplitude),
                    fmt_sig(r.period),
                    r.relative_error
                );
            }
            emit(&s, out)
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let p = Polynomial::parse_with(s.trim(), &HashMap::new())?;
    if !p.is_constant() {
        return Err(CliError::Input(format!("expected a rational number, got {s:?}")));
    }
    Ok(p.coeff(0))
}

fn parse_params(items: &[String]) -> Result<HashMap<String, BigRational>, CliError> {
    let mut map = HashMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--param expects NAME=VALUE, got {item:?}")))?;
        map.insert(name.trim().to_string(), parse_rational(value)?);
    }
    Ok(map)
}

fn exponents_text(e: &Exponents) -> String {
    match e {
        Exponents::Rational { lo, hi } => format!("ell = {lo}, {hi}"),
        Exponents::Real { lo, hi } => format!("ell = {}, {}", fmt_sig(*lo), fmt_sig(*hi)),
        Exponents::Complex { re, im } => format!("ell = {} +/- {}i (complex)", fmt_sig(*re), fmt_sig(*im)),
    }
}

#[derive(Serialize)]
struct PolycheckOutput {
    #[serde(flatten)]
    report: qhspec_core::ChielliniReport,
    exponents: Option<Exponents>,
    scan: Option<qhspec_core::UniquenessReport>,
}

pub fn polycheck(a: &PolycheckArgs) -> Result<(), CliError> {
    let params = parse_params(&a.param)?;
    let f = Polynomial::parse_with(&a.poly, &params)?;
    let omega_sq = parse_rational(&a.omega_sq)?;
    let g = isochronous_g(&f, &omega_sq)?;
    let report = chiellini_check(&f, &g)?;
    let exponents = report.chiellini_constant.as_ref().map(chiellini_exponents);
    let scan = match a.scan_degree {
        Some(d) => {
            let samples = a
                .samples
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            Some(uniqueness_scan(d, &samples, &omega_sq)?)
        }
        None => None,
    };
    let out = a.output.out.as_deref();
    if a.output.format == Format::Json {
        return emit_json(
            &PolycheckOutput {
                report,
                exponents,
                scan,
            },
            out,
        );
    }
    let mut s = String::new();
    match (&report.chiellini_constant, &exponents) {
        (Some(l), Some(e)) => {
            let _ = writeln!(s, "compatible, L = {l}");
            let _ = writeln!(s, "{}", exponents_text(e));
        }
        _ => {
            let _ = writeln!(s, "incompatible");
            let _ = writeln!(s, "least-squares L = {}", report.least_squares_constant);
            let _ = writeln!(s, "residual = {}", report.residual);
        }
    }
    let _ = writeln!(s, "f(x) = {}", report.f);
    let _ = writeln!(s, "g(x) = {}", report.g);
    if let Some(scan) = &scan {
        let _ = writeln!(
            s,
            "scan to degree {}: {} checked, {} compatible non-constant, {} constant excluded",
            scan.max_degree,
            scan.checked,
            scan.compatible.len(),
            scan.excluded_constant.len()
        );
        for f in &scan.compatible {
            let _ = writeln!(s, "  {f}");
        }
        let _ = writeln!(s, "only multiples of x: {}", scan.only_multiples_of_x);
    }
    emit(&s, out)
}

pub fn eigenfunction(a: &EigenfunctionArgs) -> Result<(), CliError> {
    let branch = match a.branch {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
        BranchArg::Both => return Err(CliError::Input("eigenfunction needs --branch plus or minus".into())),
    };
    let params = model(a.model.omega, a.model.k, a.eps, branch)?;
    let grid = grid_for(&params, a.n + 1, a.grid_n, a.xi_max)?;
    let table = qhspec_core::eigenfunction(&params, &grid, a.n)?;
    info!("E_{} = {}, {} interior nodes", a.n, table.energy, table.nodes);
    emit(&eigenfunction_csv(&table), a.out.as_deref())
}

#[derive(Serialize)]
struct TableRow {
    n: usize,
    plus: f64,
    plus_reference: f64,
    minus: f64,
    minus_reference: f64,
}

#[derive(Serialize)]
struct TableReport {
    id: u32,
    title: String,
    method: Method,
    rows: Vec<TableRow>,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

pub fn table(a: &TableArgs) -> Result<(), CliError> {
    let t = reference_table(a.which).ok_or_else(|| CliError::Input(format!("no table {}", a.which)))?;
    let levels = t.levels();
    let (plus, minus) = match t.method {
        Method::FiniteDifference => {
            let spectra = fd_spectra(t.omega, t.k, t.epsilon, &Branch::both(), levels, None, None, true)?;
            (spectra[0].energies.clone(), spectra[1].energies.clone())
        }
        Method::ParabolicCylinder => {
            let cfg = QuantizeConfig::default();
            let mut out = Vec::new();
            for b in Branch::both() {
                let roots = quantize_pcf_with(&t.params(b), levels, &cfg)?;
                out.push(roots.iter().map(|r| r.energy).collect::<Vec<_>>());
            }
            (out[0].clone(), out[1].clone())
        }
        Method::Perturbation => {
            let results = corrected_energies(&t.params(Branch::Plus), levels)?;
            (
                results.iter().map(|r| r.e1_plus()).collect(),
                results.iter().map(|r| r.e1_minus()).collect(),
            )
        }
    };
    let deviation = max_deviation(t, &plus, &minus);
    let report = TableReport {
        id: t.id,
        title: t.title.clone(),
        method: t.method,
        rows: (0..levels)
            .map(|n| TableRow {
                n,
                plus: plus[n],
                plus_reference: t.plus[n],
                minus: minus[n],
                minus_reference: t.minus[n],
            })
            .collect(),
        max_deviation: deviation,
        tolerance: t.tolerance,
        pass: deviation <= t.tolerance,
    };
    if a.format == Format::Json {
        emit_json(&report, None)?;
    } else {
        let mut s = format!(
            "table {}: {} (omega = {}, k = {}, eps = {})\n",
            t.id, t.title, t.omega, t.k, t.epsilon
        );
        let _ = writeln!(
            s,
            "{:>3}  {:>16}  {:>14}  {:>9}  {:>16}  {:>14}  {:>9}",
            "n", "E+ computed", "E+ reference", "diff", "E- computed", "E- reference", "diff"
        );
        for r in &report.rows {
            let _ = writeln!(
                s,
                "{:>3}  {:>16.10}  {:>14}  {:>9.2e}  {:>16.10}  {:>14}  {:>9.2e}",
                r.n,
                r.plus,
                r.plus_reference,
                r.plus - r.plus_reference,
                r.minus,
                r.minus_reference,
                r.minus - r.minus_reference
            );
        }
        let _ = writeln!(
            s,
            "max |diff| = {:.3e} (tolerance {:e}): {}",
            deviation,
            t.tolerance,
            if report.pass { "PASS" } else { "FAIL" }
        );
        emit(&s, None)?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::TableDeviation {
            table: t.id,
            deviation,
            tolerance: t.tolerance,
        })
    }
}

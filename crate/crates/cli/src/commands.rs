use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use nlmetro_core::dynamics::{dephasing_derivative, evolve_dephasing, fidelity, purity};
use nlmetro_core::oracle::{
    default_step, finite_difference_drho, integrate_adaptive, MasterEquationProblem,
    ORACLE_SITE_LIMIT,
};
use nlmetro_core::qfi::{analytic_qfi, qcrb, qfi_pair_report, spectral_qfi};
use nlmetro_core::scaling::{
    ising_max_variance_timescales, ising_seminorm_asymptotic, ising_seminorm_exact, kappa,
    optimal_interrogation, sensitivity_bound,
};
use nlmetro_core::verify::{
    check_bound_sandwich, check_eigen_self_test, check_joint_term, check_oracle_equivalence,
    check_sandwich_and_joint, check_spectrum_structure, default_corpus, sandwich_corpus,
    spectrum_corpus, CheckResult, VerifyReport, ORACLE_TOL, SANDWICH_SLACK,
};
use nlmetro_core::{
    Couplings, DensityMatrix, HamiltonianSpec, LindbladSpec, Param, ProbeSpec, ScalingSeries,
    TimescaleReport, TwoLevelProbe,
};

use crate::config::{require, CorpusChoice, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::model::{self, Setup};
use crate::output::{Cell, Report, Table};

/// Relative agreement required between oracle finite-difference QFIs and
/// the spectral ones; the absolute floor covers t → 0.
pub const ORACLE_QFI_RTOL: f64 = 1e-6;
pub const ORACLE_QFI_ATOL: f64 = 1e-9;

/// Dimension of the random matrix in the eigensolver self-test.
const EIGEN_SELF_TEST_DIM: usize = 64;

/// Expected fitted slope and tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeAssertion {
    pub expected: f64,
    pub tolerance: f64,
}

impl std::str::FromStr for SlopeAssertion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected <slope>:<tol>, got `{s}`"))?;
        let expected: f64 = a.trim().parse().map_err(|_| format!("bad slope `{a}`"))?;
        let tolerance: f64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad tolerance `{b}`"))?;
        if !expected.is_finite() || !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(format!(
                "need a finite slope and a positive tolerance, got `{s}`"
            ));
        }
        Ok(Self {
            expected,
            tolerance,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub oracle: bool,
    pub seed: u64,
    pub assert_slope: Option<SlopeAssertion>,
    pub slope_param: Param,
}

fn param_name(p: Param) -> &'static str {
    match p {
        Param::X1 => "x1",
        Param::X2 => "x2",
    }
}

fn seed_hex(seed: u64) -> String {
    format!("{seed:#x}")
}

fn field<T>(r: nlmetro_core::Result<T>, name: &str) -> Result<T> {
    r.map_err(|e| CliError::config(name, e))
}

fn specs(cfg: &ScenarioConfig) -> Result<(HamiltonianSpec, LindbladSpec, ProbeSpec)> {
    Ok((
        require(cfg.hamiltonian.clone(), "hamiltonian")?,
        require(cfg.lindblad.clone(), "lindblad")?,
        require(cfg.probe.clone(), "probe")?,
    ))
}

fn validate_specs(n: usize, h: &HamiltonianSpec, l: &LindbladSpec, p: &ProbeSpec) -> Result<()> {
    field(h.validate(n), "hamiltonian")?;
    field(l.validate(n), "lindblad")?;
    field(p.validate(), "probe")
}

struct QfiRow {
    t: f64,
    qfi_x1: f64,
    qfi_x2: f64,
    f12: f64,
    lower: f64,
    upper: f64,
    c_m: f64,
    c_big_m: f64,
    fidelity: f64,
    purity: f64,
    qcrb_x1: f64,
    qcrb_x2: f64,
    analytic: Option<(f64, f64)>,
    oracle: Option<OracleRow>,
}

struct OracleRow {
    state_diff: f64,
    qfi_x1: f64,
    qfi_x2: f64,
}

/// QFI of both couplings, the bounds on `F_x1`, fidelity and purity on a time grid.
pub fn qfi(cfg: &ScenarioConfig, opts: &Options) -> Result<Report> {
    cfg.only(
        "qfi",
        &[
            "n_sites",
            "hamiltonian",
            "lindblad",
            "probe",
            "two_level",
            "x1",
            "x2",
            "hbar",
            "total_time",
            "repetitions",
            "times",
        ],
    )?;
    let c = cfg.couplings()?;
    let (setup, probe, n) = match cfg.two_level {
        Some(tl) => {
            for (name, set) in [
                ("n_sites", cfg.n_sites.is_some()),
                ("hamiltonian", cfg.hamiltonian.is_some()),
                ("lindblad", cfg.lindblad.is_some()),
                ("probe", cfg.probe.is_some()),
            ] {
                if set {
                    return Err(CliError::config(name, "cannot be combined with two_level"));
                }
            }
            let probe = field(TwoLevelProbe::new(tl.eps, tl.lambda_sq, c), "two_level")?;
            (Setup::two_level(tl.eps, tl.lambda_sq)?, Some(probe), 1)
        }
        None => {
            let n = cfg.single_n()?;
            let (h, l, p) = specs(cfg)?;
            validate_specs(n, &h, &l, &p)?;
            (Setup::dense(n, &h, &l, &p)?, None, n)
        }
    };
    if opts.oracle && n > ORACLE_SITE_LIMIT {
        return Err(CliError::config(
            "n_sites",
            format!("--oracle integrates the dense master equation, which stops at {ORACLE_SITE_LIMIT} sites"),
        ));
    }
    let ts = setup.timescales(&c);
    let times = cfg.resolve_times(&ts)?;
    let total_time = match cfg.total_time {
        Some(_) => Some(cfg.total_time()?),
        None => None,
    };
    let repetitions = cfg.repetitions()?;
    // ν = T/t when only the total time is fixed.
    let nu = |t: f64| match (repetitions, total_time) {
        (Some(r), _) => r,
        (None, Some(total)) => total / t,
        (None, None) => 1.0,
    };
    let problem = if opts.oracle {
        Some(MasterEquationProblem::from_diagonals(
            &setup.diag,
            c.x1,
            c.x2,
            c.hbar,
        )?)
    } else {
        None
    };

    let rows = times
        .par_iter()
        .map(|&t| -> Result<QfiRow> {
            let rho = evolve_dephasing(&setup.rho0, &setup.rates, &c, t)?;
            let d1 = dephasing_derivative(&rho, &setup.rates, &c, t, Param::X1)?;
            let d2 = dephasing_derivative(&rho, &setup.rates, &c, t, Param::X2)?;
            let pair = qfi_pair_report(&rho, &d1, &d2, &setup.diag, t, c.hbar, nu(t))?;
            let oracle = match &problem {
                Some(p) => Some(oracle_row(p, &setup.rho0, &rho, &c, t)?),
                None => None,
            };
            Ok(QfiRow {
                t,
                qfi_x1: pair.x1.qfi,
                qfi_x2: pair.qfi_x2,
                f12: pair.f12,
                lower: pair.x1.lower_bound,
                upper: pair.x1.upper_bound,
                c_m: pair.x1.c_m,
                c_big_m: pair.x1.c_big_m,
                fidelity: fidelity(&rho, &setup.rho0)?,
                purity: purity(&rho),
                qcrb_x1: pair.x1.qcrb,
                qcrb_x2: qcrb(pair.qfi_x2, nu(t)),
                analytic: probe.map(|pr| {
                    (
                        analytic_qfi(&pr, Param::X1, t),
                        analytic_qfi(&pr, Param::X2, t),
                    )
                }),
                oracle,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec![
        "t", "qfi_x1", "qfi_x2", "f12", "lower", "upper", "c_m", "c_M", "fidelity", "purity",
        "qcrb_x1", "qcrb_x2",
    ];
    if probe.is_some() {
        columns.extend(["analytic_qfi_x1", "analytic_qfi_x2"]);
    }
    if opts.oracle {
        columns.extend(["oracle_state_diff", "oracle_qfi_x1", "oracle_qfi_x2"]);
    }
    let mut table = Table::new(&columns);
    for r in &rows {
        let mut cells: Vec<Cell> = [
            r.t, r.qfi_x1, r.qfi_x2, r.f12, r.lower, r.upper, r.c_m, r.c_big_m, r.fidelity,
            r.purity, r.qcrb_x1, r.qcrb_x2,
        ]
        .into_iter()
        .map(Cell::from)
        .collect();
        if let Some((a1, a2)) = r.analytic {
            cells.extend([a1.into(), a2.into()]);
        }
        if let Some(o) = &r.oracle {
            cells.extend([o.state_diff.into(), o.qfi_x1.into(), o.qfi_x2.into()]);
        }
        table.push(cells);
    }

    let sandwich_violation = rows
        .iter()
        .map(|r| {
            let slack = SANDWICH_SLACK * r.upper.abs().max(1.0);
            (r.lower - r.qfi_x1 - slack)
                .max(r.qfi_x1 - r.upper - slack)
                .max(0.0)
        })
        .fold(0.0, f64::max);
    let mut passed = sandwich_violation == 0.0;
    let peak = |get: fn(&QfiRow) -> f64| {
        let best = rows
            .iter()
            .max_by(|a, b| get(a).total_cmp(&get(b)))
            .expect("nonempty grid");
        json!({ "t": best.t, "value": get(best) })
    };
    let analytic = probe.map(|_| {
        let dev = |pick: fn(&QfiRow) -> (f64, f64)| {
            rows.iter()
                .map(|r| rel_dev(pick(r).0, pick(r).1))
                .fold(0.0, f64::max)
        };
        json!({
            "max_rel_dev_x1": dev(|r| (r.qfi_x1, r.analytic.unwrap().0)),
            "max_rel_dev_x2": dev(|r| (r.qfi_x2, r.analytic.unwrap().1)),
        })
    });
    let oracle = if opts.oracle {
        fn o(r: &QfiRow) -> &OracleRow {
            r.oracle.as_ref().expect("oracle rows")
        }
        let state = rows.iter().map(|r| o(r).state_diff).fold(0.0, f64::max);
        let excess = |exact: f64, fd: f64| {
            if fd.is_nan() {
                0.0
            } else {
                (fd - exact).abs() / (ORACLE_QFI_RTOL * exact.abs() + ORACLE_QFI_ATOL)
            }
        };
        let worst1 = rows
            .iter()
            .map(|r| excess(r.qfi_x1, o(r).qfi_x1))
            .fold(0.0, f64::max);
        let worst2 = rows
            .iter()
            .map(|r| excess(r.qfi_x2, o(r).qfi_x2))
            .fold(0.0, f64::max);
        let ok = state <= ORACLE_TOL && worst1 <= 1.0 && worst2 <= 1.0;
        passed &= ok;
        Some(json!({
            "max_state_diff": state,
            "state_tolerance": ORACLE_TOL,
            "qfi_x1_error_ratio": worst1,
            "qfi_x2_error_ratio": worst2,
            "qfi_x2_checked": rows.iter().any(|r| !o(r).qfi_x2.is_nan()),
            "qfi_rtol": ORACLE_QFI_RTOL,
            "qfi_atol": ORACLE_QFI_ATOL,
            "passed": ok,
        }))
    } else {
        None
    };
    let summary = json!({
        "command": "qfi",
        "mode": if probe.is_some() { "two_level" } else { "dense" },
        "n_sites": n,
        "couplings": c,
        "timescales": ts.as_ref().ok(),
        "total_time": total_time,
        "repetitions": repetitions,
        "seed": seed_hex(opts.seed),
        "points": rows.len(),
        "peak_qfi_x1": peak(|r| r.qfi_x1),
        "peak_qfi_x2": peak(|r| r.qfi_x2),
        "max_abs_f12": rows.iter().map(|r| r.f12.abs()).fold(0.0, f64::max),
        "max_sandwich_violation": sandwich_violation,
        "analytic": analytic,
        "oracle": oracle,
        "passed": passed,
    });
    let status = format!(
        "qfi: {} points, {}",
        rows.len(),
        if passed {
            "all checks passed"
        } else {
            "CHECK FAILED"
        }
    );
    Ok(Report {
        table,
        summary,
        passed,
        status,
    })
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Dense integration of the same dynamics, and central-difference QFIs
/// computed from it.
fn oracle_row(
    problem: &MasterEquationProblem,
    rho0: &DensityMatrix,
    exact: &DensityMatrix,
    c: &Couplings,
    t: f64,
) -> Result<OracleRow> {
    let at = |p: &MasterEquationProblem| -> nlmetro_core::Result<DensityMatrix> {
        Ok(integrate_adaptive(p, rho0, &[t], None)?.remove(0))
    };
    let rho = at(problem)?;
    let d1 = finite_difference_drho(
        |v| {
            let mut p = problem.clone();
            p.x1 = v;
            at(&p)
        },
        c.x1,
        default_step(c.x1),
    )?;
    // The x2 stencil must stay at nonnegative rates.
    let h2 = default_step(c.x2);
    let qfi_x2 = if c.x2 > 2.0 * h2 {
        let d2 = finite_difference_drho(
            |v| {
                let mut p = problem.clone();
                p.rates.iter_mut().for_each(|r| *r = v);
                at(&p)
            },
            c.x2,
            h2,
        )?;
        spectral_qfi(&rho, &d2)?
    } else {
        f64::NAN
    };
    Ok(OracleRow {
        state_diff: rho.matrix().max_abs_diff(exact.matrix()),
        qfi_x1: spectral_qfi(&rho, &d1)?,
        qfi_x2,
    })
}

#[derive(Debug, Clone, Serialize)]
struct FitSummary {
    slope: f64,
    stderr: f64,
    intercept: f64,
    max_abs_residual: f64,
    window: (f64, f64),
    points: usize,
}

fn fit(samples: Vec<(f64, f64)>, window: Option<(f64, f64)>) -> Result<FitSummary> {
    let series = match window {
        Some((lo, hi)) => ScalingSeries::with_window(samples, lo, hi),
        None => ScalingSeries::new(samples),
    }
    .map_err(|e| CliError::config("fit_window", e))?;
    let (lo, hi) = series.fit_window;
    let inside: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.0 >= lo && s.0 <= hi)
        .map(|s| (s.0.ln(), s.1.ln()))
        .collect();
    let m = inside.len() as f64;
    let intercept = (inside.iter().map(|s| s.1).sum::<f64>()
        - series.fitted_slope * inside.iter().map(|s| s.0).sum::<f64>())
        / m;
    let max_abs_residual = inside
        .iter()
        .map(|s| (s.1 - intercept - series.fitted_slope * s.0).abs())
        .fold(0.0, f64::max);
    Ok(FitSummary {
        slope: series.fitted_slope,
        stderr: series.slope_stderr,
        intercept,
        max_abs_residual,
        window: series.fit_window,
        points: inside.len(),
    })
}

/// Applies `--assert-slope` to the selected fit.
fn assertion(opts: &Options, x1: &FitSummary, x2: &FitSummary) -> (bool, Value) {
    match opts.assert_slope {
        None => (true, Value::Null),
        Some(a) => {
            let observed = match opts.slope_param {
                Param::X1 => x1.slope,
                Param::X2 => x2.slope,
            };
            let ok = (observed - a.expected).abs() <= a.tolerance;
            (
                ok,
                json!({
                    "param": param_name(opts.slope_param),
                    "expected": a.expected,
                    "tolerance": a.tolerance,
                    "observed": observed,
                    "passed": ok,
                }),
            )
        }
    }
}

fn slope_status(
    command: &str,
    x1: &FitSummary,
    x2: &FitSummary,
    assert: &Value,
    passed: bool,
) -> String {
    let mut s = format!(
        "{command}: slope x1 = {:.4} ± {:.1e}, slope x2 = {:.4} ± {:.1e}",
        x1.slope, x1.stderr, x2.slope, x2.stderr
    );
    if !assert.is_null() {
        s.push_str(if passed {
            "; assertion passed"
        } else {
            "; ASSERTION FAILED"
        });
    }
    s
}

struct SweepRow {
    n: usize,
    method: model::Method,
    ts: TimescaleReport,
    delta_x1: f64,
    delta_x2: f64,
}

/// Sensitivity bounds at the optimal interrogation time over `n_range`,
/// with fitted scaling exponents.
pub fn sweep(cfg: &ScenarioConfig, opts: &Options) -> Result<Report> {
    cfg.only(
        "sweep",
        &[
            "n_range",
            "hamiltonian",
            "lindblad",
            "probe",
            "x1",
            "x2",
            "hbar",
            "total_time",
            "fit_window",
        ],
    )?;
    let ns = cfg.n_list(5)?;
    let c = cfg.couplings()?;
    let total = cfg.total_time()?;
    let window = cfg.fit_window()?;
    let (h, l, p) = specs(cfg)?;
    for &n in &ns {
        validate_specs(n, &h, &l, &p)?;
    }
    let rows = ns
        .par_iter()
        .map(|&n| -> Result<SweepRow> {
            let (ts, method) = model::timescales(n, &h, &l, &p, &c)?;
            Ok(SweepRow {
                n,
                method,
                ts,
                delta_x1: sensitivity_bound(&ts, total, Param::X1, c.x1)?,
                delta_x2: sensitivity_bound(&ts, total, Param::X2, c.x2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["n", "method", "tau_z", "tau_d", "delta_x1", "delta_x2"]);
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.method.as_str().into(),
            r.ts.tau_z.into(),
            r.ts.tau_d.into(),
            r.delta_x1.into(),
            r.delta_x2.into(),
        ]);
    }
    let x1 = fit(
        rows.iter().map(|r| (r.n as f64, r.delta_x1)).collect(),
        window,
    )?;
    let x2 = fit(
        rows.iter().map(|r| (r.n as f64, r.delta_x2)).collect(),
        window,
    )?;
    let (passed, assert) = assertion(opts, &x1, &x2);
    let status = slope_status("sweep", &x1, &x2, &assert, passed);
    let summary = json!({
        "command": "sweep",
        "couplings": c,
        "total_time": total,
        "seed": seed_hex(opts.seed),
        "points": rows.len(),
        "slopes": { "x1": x1, "x2": x2 },
        "assertion": assert,
        "passed": passed,
    });
    Ok(Report {
        table,
        summary,
        passed,
        status,
    })
}

/// Zeno and decoherence times, optimal interrogation times and bounds per
/// register size, without fitting.
pub fn timescales(cfg: &ScenarioConfig, opts: &Options) -> Result<Report> {
    cfg.only(
        "timescales",
        &[
            "n_sites",
            "n_range",
            "hamiltonian",
            "lindblad",
            "probe",
            "x1",
            "x2",
            "hbar",
            "total_time",
        ],
    )?;
    let ns = cfg.n_list(1)?;
    let c = cfg.couplings()?;
    let total = cfg.total_time()?;
    let (h, l, p) = specs(cfg)?;
    for &n in &ns {
        validate_specs(n, &h, &l, &p)?;
    }
    let (mu1, mu2) = (
        optimal_interrogation(Param::X1),
        optimal_interrogation(Param::X2),
    );
    let rows = ns
        .par_iter()
        .map(|&n| model::timescales(n, &h, &l, &p, &c).map(|r| (n, r)))
        .collect::<nlmetro_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "n",
        "method",
        "tau_z",
        "tau_d",
        "variance_h",
        "sum_variance_l",
        "t_opt_x1",
        "t_opt_x2",
        "delta_x1",
        "delta_x2",
    ]);
    for (n, (ts, method)) in &rows {
        let bound = |which, x| sensitivity_bound(ts, total, which, x).unwrap_or(f64::NAN);
        table.push(vec![
            (*n).into(),
            method.as_str().into(),
            ts.tau_z.into(),
            ts.tau_d.into(),
            ts.variance_h.into(),
            ts.sum_variance_l.into(),
            (mu1 * ts.tau_d).into(),
            (mu2 * ts.tau_d).into(),
            bound(Param::X1, c.x1).into(),
            bound(Param::X2, c.x2).into(),
        ]);
    }
    let summary = json!({
        "command": "timescales",
        "couplings": c,
        "total_time": total,
        "seed": seed_hex(opts.seed),
        "points": rows.len(),
        "mu": { "x1": mu1, "x2": mu2 },
        "kappa": { "x1": kappa(Param::X1), "x2": kappa(Param::X2) },
        "passed": true,
    });
    Ok(Report {
        table,
        summary,
        passed: true,
        status: format!("timescales: {} rows", rows.len()),
    })
}

struct IsingRow {
    n: usize,
    seminorm: f64,
    argmax: usize,
    asymptotic: f64,
    ts: TimescaleReport,
    delta_x1: f64,
    delta_x2: f64,
}

/// Long-range Ising chain under uncorrelated p-body dephasing with the
/// domain-wall max-variance probe; no basis is built, so n can be large.
pub fn ising(cfg: &ScenarioConfig, opts: &Options) -> Result<Report> {
    cfg.only(
        "ising",
        &[
            "n_sites",
            "n_range",
            "hamiltonian",
            "lindblad",
            "probe",
            "x1",
            "x2",
            "hbar",
            "total_time",
            "fit_window",
        ],
    )?;
    let alpha = match require(cfg.hamiltonian.clone(), "hamiltonian")? {
        HamiltonianSpec::LongRangeIsing { alpha } => alpha,
        _ => {
            return Err(CliError::config(
                "hamiltonian",
                "`ising` needs kind long_range_ising",
            ))
        }
    };
    let p = match require(cfg.lindblad.clone(), "lindblad")? {
        LindbladSpec::UncorrelatedPBody { p } => p,
        _ => {
            return Err(CliError::config(
                "lindblad",
                "`ising` needs kind uncorrelated_p_body",
            ))
        }
    };
    if !matches!(cfg.probe, None | Some(ProbeSpec::IsingMaxVariance)) {
        return Err(CliError::config(
            "probe",
            "`ising` uses the ising_max_variance probe",
        ));
    }
    let ns = cfg.n_list(1)?;
    let c = cfg.couplings()?;
    let total = cfg.total_time()?;
    let window = cfg.fit_window()?;
    for &n in &ns {
        if n < 2 {
            return Err(CliError::config(
                "n_range",
                "the Ising chain needs at least two sites",
            ));
        }
        field(
            HamiltonianSpec::LongRangeIsing { alpha }.validate(n),
            "hamiltonian",
        )?;
        field(
            LindbladSpec::UncorrelatedPBody { p }.validate(n),
            "lindblad",
        )?;
    }
    if opts.assert_slope.is_some() && ns.len() < 5 {
        return Err(CliError::config(
            "n_range",
            "--assert-slope needs at least 5 register sizes",
        ));
    }
    let rows = ns
        .par_iter()
        .map(|&n| -> Result<IsingRow> {
            let (seminorm, argmax) = ising_seminorm_exact(n, alpha)?;
            let ts = ising_max_variance_timescales(n, alpha, p, &c)?;
            Ok(IsingRow {
                n,
                seminorm,
                argmax,
                asymptotic: ising_seminorm_asymptotic(n, alpha).unwrap_or(f64::NAN),
                delta_x1: sensitivity_bound(&ts, total, Param::X1, c.x1)?,
                delta_x2: sensitivity_bound(&ts, total, Param::X2, c.x2)?,
                ts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "n",
        "seminorm_exact",
        "argmax_q",
        "seminorm_asymptotic",
        "asymptotic_ratio",
        "tau_z",
        "tau_d",
        "delta_x1",
        "delta_x2",
    ]);
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.seminorm.into(),
            r.argmax.into(),
            r.asymptotic.into(),
            (r.asymptotic / r.seminorm).into(),
            r.ts.tau_z.into(),
            r.ts.tau_d.into(),
            r.delta_x1.into(),
            r.delta_x2.into(),
        ]);
    }
    let (passed, slopes, assert, status) = if rows.len() >= 5 {
        let x1 = fit(
            rows.iter().map(|r| (r.n as f64, r.delta_x1)).collect(),
            window,
        )?;
        let x2 = fit(
            rows.iter().map(|r| (r.n as f64, r.delta_x2)).collect(),
            window,
        )?;
        let (passed, assert) = assertion(opts, &x1, &x2);
        let status = slope_status("ising", &x1, &x2, &assert, passed);
        (passed, json!({ "x1": x1, "x2": x2 }), assert, status)
    } else {
        (
            true,
            Value::Null,
            Value::Null,
            format!("ising: {} rows", rows.len()),
        )
    };
    let summary = json!({
        "command": "ising",
        "alpha": alpha,
        "p": p,
        "couplings": c,
        "total_time": total,
        "seed": seed_hex(opts.seed),
        "points": rows.len(),
        "argmax_is_half_chain": rows.iter().all(|r| r.argmax == r.n / 2),
        "slopes": slopes,
        "assertion": assert,
        "passed": passed,
    });
    Ok(Report {
        table,
        summary,
        passed,
        status,
    })
}

/// Oracle-equivalence, bound-sandwich, joint-term and spectrum-structure
/// suites, plus the eigensolver self-test seeded by `--seed`.
pub fn verify(cfg: &ScenarioConfig, opts: &Options) -> Result<Report> {
    cfg.only("verify", &["scenarios", "corpus", "spectrum", "fault"])?;
    if cfg.scenarios.is_some() && cfg.corpus.is_some() {
        return Err(CliError::config(
            "corpus",
            "give scenarios or corpus, not both",
        ));
    }
    let corpus = match (&cfg.scenarios, cfg.corpus.unwrap_or_default()) {
        (Some(s), _) => s.clone(),
        (None, CorpusChoice::Default) => default_corpus()?,
        (None, CorpusChoice::Sandwich) => sandwich_corpus()?,
    };
    for (i, s) in corpus.iter().enumerate() {
        field(s.validate(), &format!("scenarios[{i}]"))?;
    }
    if let Some(f) = cfg.fault {
        if !(f.eps_scale.is_finite()) {
            return Err(CliError::config("fault", "eps_scale must be finite"));
        }
    }
    let fault = cfg.fault;
    let per_scenario = corpus
        .par_iter()
        .map(|s| -> nlmetro_core::Result<Vec<CheckResult>> {
            let oracle = check_oracle_equivalence(s)?;
            let (sandwich, joint) = match fault {
                Some(_) => (check_bound_sandwich(s, fault)?, check_joint_term(s)?),
                None => check_sandwich_and_joint(s)?,
            };
            Ok(vec![oracle, sandwich, joint])
        })
        .collect::<nlmetro_core::Result<Vec<_>>>()?;
    let mut checks: Vec<CheckResult> = per_scenario.into_iter().flatten().collect();
    if cfg.spectrum.unwrap_or(true) {
        let spectrum = spectrum_corpus()
            .par_iter()
            .map(|&(n, p)| check_spectrum_structure(n, p, 1.0))
            .collect::<nlmetro_core::Result<Vec<_>>>()?;
        checks.extend(spectrum);
    }
    checks.push(check_eigen_self_test(EIGEN_SELF_TEST_DIM, opts.seed)?);
    let report = VerifyReport::new(checks);

    let mut table = Table::new(&[
        "suite",
        "scenario",
        "passed",
        "metric",
        "tolerance",
        "detail",
    ]);
    for ch in &report.checks {
        table.push(vec![
            suite_name(ch).as_str().into(),
            ch.scenario.as_str().into(),
            ch.passed.into(),
            ch.metric.into(),
            ch.tolerance.into(),
            ch.detail.as_str().into(),
        ]);
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let summary = json!({
        "command": "verify",
        "seed": seed_hex(opts.seed),
        "scenarios": corpus.len(),
        "checks": report.checks.len(),
        "failed": failed,
        "fault": fault,
        "passed": report.passed,
        "results": report.checks,
    });
    let status = if report.passed {
        format!("verify: {} checks passed", report.checks.len())
    } else {
        let first = report.checks.iter().find(|c| !c.passed).expect("a failure");
        format!(
            "verify: {failed} of {} checks FAILED; first: {} {} ({})",
            report.checks.len(),
            suite_name(first),
            first.scenario,
            first.detail
        )
    };
    Ok(Report {
        table,
        summary,
        passed: report.passed,
        status,
    })
}

fn suite_name(c: &CheckResult) -> String {
    match serde_json::to_value(c.suite) {
        Ok(Value::String(s)) => s,
        _ => format!("{:?}", c.suite),
    }
}

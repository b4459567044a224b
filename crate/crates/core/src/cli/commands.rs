use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::Value;

use super::table::{write_outputs, Cell, Table};
use super::{Cli, CliError, Command, EngineArg, Family, Form, Outcome, PairArgs, PhantomArg, PhantomArgs, Psi};
use crate::abel::{fractional_residual_check, indicator_infeasibility, residual_check};
use crate::error::Error;
use crate::kernels::{psi_eval, Dims, KernelValue, PiecewiseRadialKernel, ProfileFamily, RadialProfile};
use crate::numerics::{gamma_half, log_spaced, QuadratureSpec};
use crate::transforms::{
    backproject_mc, backproject_reduced, convolve_oracle, invert_sweep, Engine, Phantom, Schedule,
};

pub(super) fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let global = &cli.global;
    let (table, passed, summary) = match &cli.command {
        Command::Kernel { pair, grid } => {
            let grid = resolve_grid(
                grid.grid.as_ref().map(|g| g.0.as_slice()),
                grid.r_min,
                grid.r_max,
                grid.samples,
            )?;
            kernel_table(pair, &grid)?
        }
        Command::Residual {
            pair,
            grid,
            form,
            quad_tol,
        } => {
            let grid = resolve_grid(
                grid.grid.as_ref().map(|g| g.0.as_slice()),
                grid.r_min,
                grid.r_max,
                grid.samples,
            )?;
            residual_table(pair, &grid, *form, *quad_tol, global.tol.unwrap_or(1e-6))?
        }
        Command::Identity {
            pair,
            phantom,
            a,
            points,
            engine,
            samples,
            quad_tol,
        } => {
            let run = IdentityRun {
                a: *a,
                engine: *engine,
                samples: *samples,
                seed: global.seed,
                quad_tol: *quad_tol,
                tol: global.tol.unwrap_or(1e-4),
            };
            identity_table(pair, phantom, points, &run)?
        }
        Command::Invert {
            pair,
            phantom,
            x,
            a_start,
            factor,
            steps,
            engine,
            samples,
            quad_tol,
        } => {
            let schedule = Schedule::new(*a_start, *factor, *steps)?;
            let engine = match engine {
                EngineArg::Reduced => Engine::Reduced,
                EngineArg::Mc => Engine::MonteCarlo {
                    samples: *samples,
                    seed: global.seed,
                },
            };
            invert_table(
                pair,
                phantom,
                x.as_ref().map(|x| x.0.as_slice()),
                schedule,
                engine,
                *quad_tol,
                global.tol,
            )?
        }
        Command::Infeasible { n, k, n_max } => infeasible_table(n.zip(*k), *n_max, global.tol.unwrap_or(1e-10))?,
    };
    let out = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("kplane-{}.{}", cli.command.name(), global.format.extension())));
    let manifest = write_outputs(
        &table,
        global.format,
        &out,
        cli.command.name(),
        parameters(cli),
        global.seed,
    )?;
    Ok(Outcome {
        passed,
        summary,
        output: out,
        manifest,
    })
}

/// Command arguments flattened into one map, plus the global flags.
fn parameters(cli: &Cli) -> BTreeMap<String, Value> {
    let mut map = BTreeMap::new();
    fn flatten(map: &mut BTreeMap<String, Value>, v: Value) {
        if let Value::Object(obj) = v {
            for (key, value) in obj {
                if value.is_object() {
                    flatten(map, value);
                } else {
                    map.insert(key.replace('_', "-"), value);
                }
            }
        }
    }
    if let Ok(Value::Object(outer)) = serde_json::to_value(&cli.command) {
        for (_, inner) in outer {
            flatten(&mut map, inner);
        }
    }
    map.insert("format".into(), serde_json::json!(cli.global.format));
    map.insert("tol".into(), serde_json::json!(cli.global.tol));
    map
}

fn resolve_grid(explicit: Option<&[f64]>, r_min: f64, r_max: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if let Some(grid) = explicit {
        if grid.iter().any(|&r| !(r > 0.0)) {
            return Err(CliError::Usage("grid values must be positive".into()));
        }
        return Ok(grid.to_vec());
    }
    if !(r_min > 0.0) {
        return Err(CliError::Usage(format!(
            "--r-min must be positive for a log-spaced grid, got {r_min}"
        )));
    }
    if !(r_max > r_min) || !r_max.is_finite() {
        return Err(CliError::Usage(format!("--r-max must exceed --r-min, got {r_max}")));
    }
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    Ok(log_spaced(r_min, r_max, samples))
}

struct Pair {
    dims: Dims,
    family: Family,
    kernel: PiecewiseRadialKernel,
    profile: RadialProfile,
}

impl Pair {
    fn family_name(&self) -> &'static str {
        match self.family {
            Family::TheoremA => "theoremA",
            Family::TheoremB => "theoremB",
        }
    }

    fn psi_name(&self) -> &'static str {
        match self.profile.family {
            ProfileFamily::IndicatorBall => "indicator",
            ProfileFamily::PowerTail { .. } => "power-tail",
        }
    }

    fn describe(&self, table: Table) -> Table {
        table
            .meta("family", self.family_name())
            .meta("psi", self.psi_name())
            .meta("n", self.dims.n())
            .meta("k", self.dims.k())
            .meta("ell", self.dims.ell())
            .meta("lambda", self.profile.lambda)
    }
}

/// Builds the (w, ψ) pair, refusing the indicator mollifier when k ≥ 2.
fn resolve_pair(args: &PairArgs) -> Result<Pair, CliError> {
    let dims = Dims::new(args.n, args.k)?;
    let family = args.family.unwrap_or(if dims.k() == 1 {
        Family::TheoremA
    } else {
        Family::TheoremB
    });
    if args.psi == Some(Psi::Indicator) && dims.k() >= 2 {
        let c = indicator_infeasibility(dims)?;
        return Err(CliError::Usage(format!(
            "the indicator mollifier admits no locally integrable kernel for k = {} >= 2 \
             (obstruction constant {c:.10})",
            dims.k()
        )));
    }
    let kernel = match family {
        Family::TheoremA if dims.k() != 1 => {
            return Err(CliError::Usage(format!("theoremA needs k = 1, got k = {}", dims.k())))
        }
        Family::TheoremA => PiecewiseRadialKernel::theorem_a(dims.n())?,
        Family::TheoremB => PiecewiseRadialKernel::theorem_b(dims),
    };
    let profile = match args.psi {
        None => kernel.matching_profile(),
        Some(Psi::Indicator) => RadialProfile::indicator(dims),
        Some(Psi::PowerTail) => RadialProfile::power_tail(dims),
    };
    Ok(Pair {
        dims,
        family,
        kernel,
        profile,
    })
}

fn build_phantom(args: &PhantomArgs, n: usize) -> Result<Phantom, CliError> {
    Ok(match args.phantom {
        PhantomArg::Gaussian => Phantom::gaussian(n, args.sigma)?,
        PhantomArg::Ball => Phantom::ball(n, args.radius, args.height)?,
    })
}

fn check_point(x: &[f64], n: usize) -> Result<(), CliError> {
    if x.len() != n {
        return Err(CliError::Usage(format!(
            "point {x:?} has {} coordinates, expected {n}",
            x.len()
        )));
    }
    Ok(())
}

fn spec(tol: f64) -> Result<QuadratureSpec, CliError> {
    QuadratureSpec::new(tol, tol).map_err(|e| CliError::Usage(format!("--quad-tol: {e}")))
}

fn kernel_table(args: &PairArgs, grid: &[f64]) -> Result<(Table, bool, String), CliError> {
    let pair = resolve_pair(args)?;
    let mut table = pair.describe(Table::new(vec!["r", "w", "psi"]));
    for &r in grid {
        let w = match pair.kernel.eval(r)? {
            KernelValue::Finite(v) => v,
            KernelValue::Unbounded => f64::INFINITY,
        };
        table.push(vec![r.into(), w.into(), psi_eval(&pair.profile, r)?.into()]);
    }
    let summary = format!(
        "{} kernel, n = {}, k = {}: {} rows, lambda = {}",
        pair.family_name(),
        pair.dims.n(),
        pair.dims.k(),
        grid.len(),
        pair.profile.lambda
    );
    Ok((table, true, summary))
}

fn residual_table(
    args: &PairArgs,
    grid: &[f64],
    form: Form,
    quad_tol: f64,
    tol: f64,
) -> Result<(Table, bool, String), CliError> {
    let pair = resolve_pair(args)?;
    let spec = spec(quad_tol)?;
    let report = match form {
        Form::Abel => residual_check(&pair.kernel, &pair.profile, pair.dims, grid, &spec)?,
        Form::Fractional => fractional_residual_check(&pair.kernel, &pair.profile, pair.dims, grid, &spec)?,
    };
    let passed = report.passes(tol);
    let mut table = pair
        .describe(Table::new(vec!["r", "lhs", "rhs", "abs_err"]))
        .meta(
            "form",
            match form {
                Form::Abel => "abel",
                Form::Fractional => "fractional",
            },
        )
        .meta("tol", tol)
        .meta("max_abs_err", report.max_abs_err)
        .meta("max_rel_err", report.max_rel_err)
        .meta("missing", report.missing());
    for (((r, l), rhs), err) in report
        .grid
        .iter()
        .zip(&report.lhs)
        .zip(&report.rhs)
        .zip(report.abs_errors())
    {
        table.push(vec![(*r).into(), (*l).into(), (*rhs).into(), err.into()]);
    }
    let mut summary = format!(
        "max abs residual {:.3e} over {} points ({} missing), tolerance {tol:e}: {}",
        report.max_abs_err,
        report.grid.len(),
        report.missing(),
        if passed { "pass" } else { "FAIL" }
    );
    for (r, f) in report.grid.iter().zip(&report.failures) {
        if let Some(f) = f {
            summary.push_str(&format!("\n  r = {r}: {f}"));
        }
    }
    Ok((table, passed, summary))
}

struct IdentityRun {
    a: f64,
    engine: EngineArg,
    samples: usize,
    seed: u64,
    quad_tol: Option<f64>,
    tol: f64,
}

fn coords(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn identity_table(
    args: &PairArgs,
    phantom_args: &PhantomArgs,
    points: &[super::RealList],
    run: &IdentityRun,
) -> Result<(Table, bool, String), CliError> {
    let pair = resolve_pair(args)?;
    let n = pair.dims.n();
    let phantom = build_phantom(phantom_args, n)?;
    if !(run.a > 0.0) || !run.a.is_finite() {
        return Err(CliError::Usage(format!("--a must be positive, got {}", run.a)));
    }
    let points: Vec<Vec<f64>> = if points.is_empty() {
        [0.0, 0.5, 1.5]
            .iter()
            .map(|&r| {
                let mut x = vec![0.0; n];
                x[0] = r;
                x
            })
            .collect()
    } else {
        points.iter().map(|p| p.0.clone()).collect()
    };
    for x in &points {
        check_point(x, n)?;
    }
    let quad_tol = run.quad_tol.unwrap_or(match run.engine {
        EngineArg::Reduced => 1e-8,
        EngineArg::Mc => 1e-7,
    });
    let spec = spec(quad_tol)?;
    // Each point: (backprojection, standard error, convolution, truncation bound).
    let rows: Vec<Result<(f64, f64, f64, f64), Error>> = points
        .par_iter()
        .map(|x| {
            let (bp, se) = match run.engine {
                EngineArg::Reduced => (backproject_reduced(&pair.kernel, &phantom, x, run.a, &spec)?, 0.0),
                EngineArg::Mc => {
                    let m = backproject_mc(&pair.kernel, &phantom, x, run.a, run.samples, run.seed, &spec)?;
                    (m.estimate, m.std_error)
                }
            };
            let conv = convolve_oracle(&phantom, &pair.profile, x, run.a, &spec)?;
            Ok((bp, se, conv.value, conv.truncation_bound))
        })
        .collect();
    let mut table = pair
        .describe(Table::new(vec![
            "x",
            "backprojection",
            "std_error",
            "convolution",
            "abs_diff",
            "allowed",
            "status",
        ]))
        .meta("a", run.a)
        .meta(
            "engine",
            match run.engine {
                EngineArg::Reduced => "reduced",
                EngineArg::Mc => "mc",
            },
        );
    let mut passed = true;
    let mut max_diff: f64 = 0.0;
    let mut notes = Vec::new();
    for (x, row) in points.iter().zip(rows) {
        match row {
            Ok((bp, se, conv, trunc)) => {
                let diff = (bp - conv).abs();
                // Monte Carlo: three standard errors plus the inner quadrature error.
                let allowed = match run.engine {
                    EngineArg::Reduced => run.tol + trunc,
                    EngineArg::Mc => 3.0 * se + 10.0 * quad_tol * conv.abs().max(1.0) + trunc,
                };
                let ok = diff <= allowed;
                passed &= ok;
                max_diff = max_diff.max(diff);
                table.push(vec![
                    coords(x).into(),
                    bp.into(),
                    se.into(),
                    conv.into(),
                    diff.into(),
                    allowed.into(),
                    if ok { "pass" } else { "fail" }.into(),
                ]);
            }
            Err(e @ Error::Domain(_)) | Err(e @ Error::Unsupported(_)) => return Err(e.into()),
            Err(e) => {
                passed = false;
                notes.push(format!("\n  x = ({}): {e}", coords(x)));
                table.push(vec![
                    coords(x).into(),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    e.to_string().into(),
                ]);
            }
        }
    }
    let summary = format!(
        "identity at a = {}: max |backprojection - convolution| = {max_diff:.3e} over {} points: {}{}",
        run.a,
        points.len(),
        if passed { "pass" } else { "FAIL" },
        notes.concat()
    );
    Ok((table, passed, summary))
}

fn invert_table(
    args: &PairArgs,
    phantom_args: &PhantomArgs,
    x: Option<&[f64]>,
    schedule: Schedule,
    engine: Engine,
    quad_tol: Option<f64>,
    tol: Option<f64>,
) -> Result<(Table, bool, String), CliError> {
    let pair = resolve_pair(args)?;
    let n = pair.dims.n();
    let phantom = build_phantom(phantom_args, n)?;
    let x = match x {
        Some(x) => x.to_vec(),
        None => {
            let mut x = vec![0.0; n];
            x[0] = 0.5;
            x
        }
    };
    check_point(&x, n)?;
    let default_tol = match engine {
        Engine::Reduced => 1e-8,
        Engine::MonteCarlo { .. } => 1e-7,
    };
    let spec = spec(quad_tol.unwrap_or(default_tol))?;
    let sweep = invert_sweep(&phantom, &pair.kernel, &pair.profile, &x, schedule, engine, &spec)?;
    let mut table = pair
        .describe(Table::new(vec![
            "a",
            "estimate",
            "std_error",
            "abs_err",
            "observed_order",
            "status",
        ]))
        .meta("x", coords(&x))
        .meta("target", sweep.target);
    for i in 0..sweep.schedule.len() {
        table.push(vec![
            sweep.schedule[i].into(),
            sweep.estimates[i].into(),
            sweep.std_errors[i].into(),
            sweep.errors[i].into(),
            sweep.observed_orders[i].into(),
            sweep.failures[i].clone().unwrap_or_else(|| "ok".into()).into(),
        ]);
    }
    let failed_steps = sweep.failures.iter().filter(|f| f.is_some()).count();
    let final_rel = sweep.final_relative_error();
    let within = match (tol, final_rel) {
        (None, _) => true,
        (Some(t), Some(e)) => e <= t,
        (Some(_), None) => false,
    };
    let passed = failed_steps == 0 && within;
    let summary = format!(
        "f(x) = {}, final relative error {}, {} failed steps{}",
        sweep.target,
        final_rel.map_or("n/a".to_string(), |e| format!("{e:.3e}")),
        failed_steps,
        if passed { "" } else { ": FAIL" }
    );
    Ok((table, passed, summary))
}

fn infeasible_table(case: Option<(usize, usize)>, n_max: usize, tol: f64) -> Result<(Table, bool, String), CliError> {
    let cases: Vec<(usize, usize)> = match case {
        Some(c) => vec![c],
        None => {
            if n_max < 3 {
                return Err(CliError::Usage(format!("--n-max must be at least 3, got {n_max}")));
            }
            (3..=n_max).flat_map(|n| (2..n).map(move |k| (n, k))).collect()
        }
    };
    let mut table = Table::new(vec!["n", "k", "constant", "closed_form", "abs_diff"]).meta("tol", tol);
    let mut passed = true;
    let mut lines = Vec::new();
    for (n, k) in cases {
        let dims = Dims::new(n, k)?;
        let c = indicator_infeasibility(dims)?;
        let exact = -gamma_half(n - k) / gamma_half(n);
        let diff = (c - exact).abs();
        passed &= c != 0.0 && diff <= tol;
        lines.push(format!("n = {n}, k = {k}: obstruction constant {c:.12}"));
        table.push(vec![n.into(), k.into(), c.into(), exact.into(), diff.into()]);
    }
    Ok((table, passed, lines.join("\n")))
}

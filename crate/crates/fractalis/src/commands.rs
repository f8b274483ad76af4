//! The subcommands. Each returns the process exit code.

use std::fs::File;
use std::io::{BufWriter, Write};

use fractalis_core::approx::{epsilon_approximate, ApproxSettings};
use fractalis_core::lp::{lp_norm, lp_norm_samples, lp_perturbation_gap, QuadratureRule};
use fractalis_core::operator::{sample_fractal, OperatorSpec};
use fractalis_core::{EvalReport, FractalConfig, GridFunction, Result as CoreResult, UniformGrid};
use rayon::prelude::*;

use crate::config::{Model, RunConfig};
use crate::error::CliError;
use crate::output::{number, write_surface};
use crate::verify::{verify_alpha, verify_fif, VerifySettings};
use crate::CommonArgs;

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    RunConfig::load(&args.config)
}

fn tolerance(args: &CommonArgs, cfg: &RunConfig) -> Result<f64, CliError> {
    let tol = args.tol.unwrap_or(cfg.run.tolerance);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::usage(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn p_values(args: &CommonArgs, cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let p = args.p.clone().unwrap_or_else(|| cfg.run.p.clone());
    if let Some(bad) = p.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return Err(CliError::usage(format!("p must be finite and at least 1, got {bad}")));
    }
    Ok(p)
}

fn alpha_model(model: Model, command: &str) -> Result<crate::config::AlphaModel, CliError> {
    match model {
        Model::Alpha(m) => Ok(m),
        Model::Fif(_) => Err(CliError::usage(format!("`{command}` needs a [fields] table"))),
    }
}

/// Evaluate on every grid point in parallel, preserving row order.
fn par_eval<F>(grid: &UniformGrid, eval: F) -> Result<Vec<EvalReport>, CliError>
where
    F: Fn(&[f64]) -> CoreResult<EvalReport> + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|i| eval(&grid.point(i)))
        .collect::<CoreResult<Vec<_>>>()
        .map_err(CliError::analytic)
}

fn emit_surface(
    args: &CommonArgs,
    grid: &UniformGrid,
    reports: &[EvalReport],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let bounds: Vec<f64> = reports.iter().map(|r| r.error_bound).collect();
    match &args.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write_surface(&mut file, grid, &values, &bounds)?;
            file.flush()?;
        }
        None => write_surface(out, grid, &values, &bounds)?,
    }
    Ok(())
}

pub fn surface(args: &CommonArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = load(args)?;
    let tol = tolerance(args, &cfg)?;
    let model = cfg.model()?;
    let domain = cfg.domain()?;
    let resolution = cfg.resolution(args.resolution.as_deref(), domain.dim())?;
    let grid = UniformGrid::new(domain, resolution).map_err(CliError::config)?;
    let reports = match model {
        Model::Alpha(m) => {
            let fractal = m.config()?;
            fractal.depth_for(tol).map_err(CliError::analytic)?;
            par_eval(&grid, |p| fractal.eval(p, tol))?
        }
        Model::Fif(data) => par_eval(&grid, |p| data.eval(p, tol))?,
    };
    emit_surface(args, &grid, &reports, out)?;
    Ok(0)
}

fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::usage(format!("bad point `{text}`: {e}")))?;
    if coords.len() != dim {
        return Err(CliError::usage(format!(
            "point `{text}` has {} coordinates, the box has {dim}",
            coords.len()
        )));
    }
    Ok(coords)
}

pub fn eval(args: &CommonArgs, points: &[String], out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = load(args)?;
    let tol = tolerance(args, &cfg)?;
    let model = cfg.model()?;
    let dim = cfg.domain()?.dim();
    let points = points
        .iter()
        .map(|p| parse_point(p, dim))
        .collect::<Result<Vec<_>, _>>()?;
    let fractal = match &model {
        Model::Alpha(m) => Some(m.config()?),
        Model::Fif(_) => None,
    };
    for p in &points {
        let report = match (&fractal, &model) {
            (Some(f), _) => f.eval(p, tol),
            (None, Model::Fif(data)) => data.eval(p, tol),
            (None, Model::Alpha(_)) => unreachable!("alpha models always build a configuration"),
        }
        .map_err(CliError::analytic)?;
        let coords: Vec<String> = p.iter().map(|&x| number(x)).collect();
        writeln!(
            out,
            "{}, {}, {}",
            coords.join(","),
            number(report.value),
            number(report.error_bound)
        )?;
    }
    Ok(0)
}

pub fn verify(args: &CommonArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = load(args)?;
    let tol = tolerance(args, &cfg)?;
    let settings = VerifySettings {
        points: cfg.run.admission_points,
        tol,
        seed: args.seed.unwrap_or(cfg.run.seed),
        p: p_values(args, &cfg)?,
    };
    let report = match cfg.model()? {
        Model::Alpha(m) => {
            let fractal = m.config()?;
            verify_alpha(&m, &fractal, &settings)
        }
        Model::Fif(data) => verify_fif(&data, tol),
    };
    report.write(out)?;
    Ok(if report.pass() { 0 } else { 1 })
}

/// Degree vectors with entries up to `max`, ordered by total degree; for
/// three or more axes only equal degrees.
fn degree_schedule(dim: usize, max: usize) -> Vec<Vec<usize>> {
    if dim > 2 {
        return (0..=max).map(|m| vec![m; dim]).collect();
    }
    let mut all: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..dim {
        all = all
            .into_iter()
            .flat_map(|prefix| {
                (0..=max).map(move |m| {
                    let mut v = prefix.clone();
                    v.push(m);
                    v
                })
            })
            .collect();
    }
    all.sort_by_key(|v| (v.iter().sum::<usize>(), *v.iter().max().unwrap_or(&0), v.clone()));
    all
}

pub fn approx(args: &CommonArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = load(args)?;
    let tol = tolerance(args, &cfg)?;
    let epsilon = args
        .epsilon
        .or(cfg.run.epsilon)
        .ok_or_else(|| CliError::usage("approx needs --epsilon or run.epsilon"))?;
    if !(epsilon > 0.0) {
        return Err(CliError::usage(format!("epsilon must be positive, got {epsilon}")));
    }
    let net = cfg.net()?;
    let fields = cfg
        .fields
        .as_ref()
        .ok_or_else(|| CliError::usage("approx needs a [fields] table with `f`"))?;
    let f = fractalis_core::parse_field(&fields.f, net.dim())
        .map_err(|e| CliError::usage(format!("expression `f` = \"{}\": {e}", fields.f)))?;
    let op = match cfg.operator_spec(&net)? {
        Some(op) => op,
        None => OperatorSpec::blend(1.0).map_err(CliError::config)?,
    };
    let dim = net.dim();
    let max_degree = cfg.run.max_degree;
    let settings = ApproxSettings {
        schedule: degree_schedule(dim, max_degree),
        fit_resolution: vec![(2 * max_degree + 3).max(if dim > 2 { 17 } else { 41 }); dim],
        check_points: cfg.run.admission_points,
        tol,
    };
    let result = epsilon_approximate(&f, epsilon, &net, &op, &settings).map_err(CliError::analytic)?;
    writeln!(out, "degrees {:?}", result.degrees)?;
    writeln!(out, "alpha {}", number(result.alpha))?;
    writeln!(out, "fit_error {}", number(result.fit_error))?;
    writeln!(out, "fractal_gap {}", number(result.fractal_gap))?;
    writeln!(out, "fractal_gap_bound {}", number(result.fractal_gap_bound))?;
    writeln!(out, "achieved {}", number(result.achieved))?;
    writeln!(out, "epsilon {}", number(epsilon))?;
    writeln!(out, "pass {}", result.pass)?;
    if args.out.is_some() {
        let resolution = cfg.resolution(args.resolution.as_deref(), dim)?;
        let grid = UniformGrid::new(net.domain().clone(), resolution).map_err(CliError::config)?;
        let config = &result.config;
        let reports = par_eval(&grid, |p| config.eval(p, tol))?;
        emit_surface(args, &grid, &reports, out)?;
    }
    Ok(if result.pass { 0 } else { 1 })
}

fn fractal_lp(cfg: &FractalConfig, p: f64, rule: &QuadratureRule, tol: f64) -> CoreResult<f64> {
    let samples: GridFunction = sample_fractal(cfg, rule.grid(), tol)?;
    lp_norm_samples(samples.values(), p, rule)
}

pub fn norms(args: &CommonArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = load(args)?;
    let tol = tolerance(args, &cfg)?;
    let ps = p_values(args, &cfg)?;
    let model = alpha_model(cfg.model()?, "norms")?;
    let fractal = model.config()?;
    let dim = model.net.dim();
    let resolution = cfg.resolution(args.resolution.as_deref(), dim)?;
    let min_points = resolution.iter().copied().max().unwrap_or(101);
    let rule = QuadratureRule::for_net(&model.net, min_points).map_err(CliError::config)?;
    let gap = fractalis_core::field::difference(fractal.germ().clone(), fractal.base().clone())
        .map_err(CliError::config)?;
    let mut all = true;
    writeln!(
        out,
        "{:>6}  {:>24}  {:>24}  {:>24}  {:>24}  {:>24}  pass",
        "p", "|f|_p", "|f^a|_p", "|f^a - f|_p", "|f - s|_p", "bound"
    )?;
    for p in ps {
        let run = || -> CoreResult<_> {
            let f_norm = lp_norm(fractal.germ().as_ref(), p, &rule)?;
            let fa_norm = fractal_lp(&fractal, p, &rule, tol)?;
            let base = lp_norm(gap.as_ref(), p, &rule)?;
            let check = lp_perturbation_gap(&fractal, p, &rule, tol)?;
            Ok((f_norm, fa_norm, base, check))
        };
        let (f_norm, fa_norm, base, check) = run().map_err(CliError::analytic)?;
        all &= check.pass;
        writeln!(
            out,
            "{:>6}  {:>24}  {:>24}  {:>24}  {:>24}  {:>24}  {}",
            p,
            number(f_norm),
            number(fa_norm),
            number(check.lhs),
            number(base),
            number(check.rhs),
            if check.pass { "yes" } else { "NO" }
        )?;
    }
    Ok(if all { 0 } else { 1 })
}

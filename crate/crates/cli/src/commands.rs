use std::fmt;

use mtf_core::krylov::{precond_compare, CompareConfig, GmresConfig, KrylovError};
use mtf_core::linalg::LinalgError;
use mtf_core::modal::{coercivity_scan, default_n_max, spectrum_scan, ModalError, RhsModel, Variant};
use mtf_core::scenarios::{get_scenario, load_custom, Scenario, ScenarioError};
use mtf_core::selftest::{run_selftest, Fault, SelftestConfig};
use mtf_core::symbols::{accumulation_points, AccumulationSet, AccumulationVariant, SymbolError};
use serde::Serialize;

use crate::output::{emit_summary, float, print, write_csv, write_json};
use crate::{Format, RunArgs, SelftestArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Check(String),
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Check(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Check(m) | CliError::NonConvergence(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SymbolError> for CliError {
    fn from(e: SymbolError) -> Self {
        match e {
            SymbolError::UnknownVariant(_) | SymbolError::InvalidMedium(_) => CliError::Usage(e.to_string()),
            SymbolError::Linalg(LinalgError::NoConvergence { .. }) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Check(e.to_string()),
        }
    }
}

impl From<ModalError> for CliError {
    fn from(e: ModalError) -> Self {
        match e {
            ModalError::Symbol(s) => s.into(),
            ModalError::InvalidGrid(_) | ModalError::UnknownVariant(_) | ModalError::UnknownModel(_) => {
                CliError::Usage(e.to_string())
            }
            ModalError::Linalg(LinalgError::NoConvergence { .. }) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Check(e.to_string()),
        }
    }
}

impl From<KrylovError> for CliError {
    fn from(e: KrylovError) -> Self {
        match e {
            KrylovError::Modal(m) => m.into(),
            KrylovError::InvalidRestart => CliError::Usage(e.to_string()),
            _ => CliError::Check(e.to_string()),
        }
    }
}

fn scenario(args: &RunArgs) -> Result<Scenario, CliError> {
    match (&args.scenario, &args.custom) {
        (Some(name), None) => Ok(get_scenario(name)?),
        (None, Some(path)) => Ok(load_custom(path)?),
        _ => Err(CliError::Usage("one of --scenario or --custom is required".into())),
    }
}

fn n_max(args: &RunArgs, scenario: &Scenario) -> Result<usize, CliError> {
    match args.nmax {
        Some(0) => Err(CliError::Usage("--nmax must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(default_n_max(&scenario.media)),
    }
}

fn single_variant(args: &RunArgs) -> Result<&str, CliError> {
    match args.variant.as_slice() {
        [] => Ok("mtf"),
        [v] => Ok(v.as_str()),
        _ => Err(CliError::Usage("this command takes a single --variant".into())),
    }
}

#[derive(Serialize)]
struct Pair {
    mu: f64,
    epsilon: f64,
}

#[derive(Serialize)]
struct Point {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct AccumSummary {
    variant: String,
    lambdas: Pair,
    upsilons: Pair,
    points: Vec<Point>,
}

impl AccumSummary {
    fn new(set: &AccumulationSet, scale: f64) -> Self {
        Self {
            variant: set.variant.to_string(),
            lambdas: Pair {
                mu: set.lambdas.0,
                epsilon: set.lambdas.1,
            },
            upsilons: Pair {
                mu: set.upsilons.0,
                epsilon: set.upsilons.1,
            },
            points: set
                .points
                .iter()
                .map(|z| Point {
                    re: z.re * scale,
                    im: z.im * scale,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    scenario: String,
    variant: String,
    n_max: usize,
    scaling: f64,
    rows: usize,
    min_modulus: f64,
    final_hausdorff: Option<f64>,
    accumulation: Option<AccumSummary>,
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    eig_index: usize,
    re: f64,
    im: f64,
    dist_to_accum: f64,
}

pub fn spectrum(args: &RunArgs) -> Result<(), CliError> {
    let scenario = scenario(args)?;
    let n_max = n_max(args, &scenario)?;
    let variant: Variant = single_variant(args)?.parse()?;
    let report = spectrum_scan(&scenario.media, variant, n_max)?;
    let scale = if args.scaled {
        variant.normalization(&scenario.media).unwrap_or(1.0)
    } else {
        1.0
    };
    let rows: Vec<SpectrumRow> = report
        .modes
        .iter()
        .flat_map(|m| {
            m.eigenvalues.iter().zip(&m.distances).enumerate().map(move |(k, (z, d))| SpectrumRow {
                n: m.n,
                eig_index: k,
                re: z.re * scale,
                im: z.im * scale,
                dist_to_accum: d * scale,
            })
        })
        .collect();
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => write_csv(
            out,
            &["n", "eig_index", "re", "im", "dist_to_accum"],
            rows.iter().map(|r| {
                vec![r.n.to_string(), r.eig_index.to_string(), float(r.re), float(r.im), float(r.dist_to_accum)]
            }),
        )?,
        Format::Json => write_json(out, &rows)?,
    }
    let summary = SpectrumSummary {
        scenario: scenario.name.clone(),
        variant: variant.to_string(),
        n_max,
        scaling: scale,
        rows: rows.len(),
        min_modulus: report.min_modulus * scale,
        final_hausdorff: report.modes.last().and_then(|m| m.hausdorff).map(|h| h * scale),
        accumulation: report.accumulation.as_ref().map(|a| AccumSummary::new(a, scale)),
    };
    emit_summary(out, &summary)
}

pub fn accum(args: &RunArgs) -> Result<(), CliError> {
    let scenario = scenario(args)?;
    let variant: AccumulationVariant = single_variant(args)?.parse()?;
    let set = accumulation_points(&scenario.media, variant);
    let summary = AccumSummary::new(&set, 1.0);
    print(&serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    if let Some(path) = args.out.as_deref() {
        write_json(Some(path), &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GmresEntry {
    variant: String,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    max_gram_defect: f64,
}

#[derive(Serialize)]
struct GmresSummary {
    scenario: String,
    n_max: usize,
    restart: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    model: String,
    multiplicity: bool,
    variants: Vec<GmresEntry>,
}

#[derive(Serialize)]
struct ResidualRow {
    variant: String,
    iteration: usize,
    relative_residual: f64,
}

pub fn gmres(args: &RunArgs) -> Result<(), CliError> {
    let scenario = scenario(args)?;
    let n_max = n_max(args, &scenario)?;
    if !(args.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let variants: Vec<Variant> = if args.variant.is_empty() {
        CompareConfig::default().variants
    } else {
        args.variant.iter().map(|v| v.parse()).collect::<Result<_, _>>()?
    };
    let model: RhsModel = args.model.parse()?;
    let config = CompareConfig {
        gmres: GmresConfig {
            restart: args.restart,
            tol: args.tol,
            max_iter: args.max_iter,
        },
        model,
        seed: args.seed,
        with_multiplicity: args.multiplicity,
        variants,
    };
    let results = precond_compare(&scenario.media, n_max, &config)?;
    let rows: Vec<ResidualRow> = results
        .iter()
        .flat_map(|(v, r)| {
            r.residual_history.iter().enumerate().map(move |(k, &res)| ResidualRow {
                variant: v.to_string(),
                iteration: k,
                relative_residual: res,
            })
        })
        .collect();
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => write_csv(
            out,
            &["variant", "iteration", "relative_residual"],
            rows.iter()
                .map(|r| vec![r.variant.clone(), r.iteration.to_string(), float(r.relative_residual)]),
        )?,
        Format::Json => write_json(out, &rows)?,
    }
    let summary = GmresSummary {
        scenario: scenario.name.clone(),
        n_max,
        restart: args.restart,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        model: model.tag().to_string(),
        multiplicity: args.multiplicity,
        variants: results
            .iter()
            .map(|(v, r)| GmresEntry {
                variant: v.to_string(),
                iterations: r.iterations,
                converged: r.converged,
                final_residual: r.final_residual,
                max_gram_defect: r.max_gram_defect,
            })
            .collect(),
    };
    emit_summary(out, &summary)?;
    let stalled: Vec<String> = results
        .iter()
        .filter(|(_, r)| !r.converged)
        .map(|(v, _)| v.to_string())
        .collect();
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "GMRes did not reach {} within {} iterations for: {}",
            args.tol,
            args.max_iter,
            stalled.join(", ")
        )))
    }
}

pub fn coercivity(args: &RunArgs) -> Result<(), CliError> {
    let scenario = scenario(args)?;
    let n_max = n_max(args, &scenario)?;
    let rows = coercivity_scan(&scenario.media, n_max)?;
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => write_csv(
            out,
            &["n", "quotient_exact", "quotient_asymptotic"],
            rows.iter().map(|r| vec![r.n.to_string(), float(r.exact), float(r.asymptotic)]),
        ),
        Format::Json => write_json(out, &rows),
    }
}

pub fn selftest(args: &SelftestArgs) -> Result<(), CliError> {
    let fault = match args.inject_fault.as_deref() {
        None => None,
        Some(tag) => Some(Fault::from_tag(tag).ok_or_else(|| CliError::Usage(format!("unknown fault `{tag}`")))?),
    };
    let report = run_selftest(&SelftestConfig {
        fault,
        ..SelftestConfig::default()
    })?;
    if args.json {
        print(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
    } else {
        for c in &report.checks {
            print(&format!(
                "{} {:<14} max_defect={:.3e} tol={:e} worst=[{}]",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_defect,
                c.tolerance,
                c.worst_case
            ))?;
        }
    }
    if report.passed {
        Ok(())
    } else {
        let names: Vec<&str> = report.failing().map(|c| c.name).collect();
        Err(CliError::Check(format!("failing checks: {}", names.join(", "))))
    }
}

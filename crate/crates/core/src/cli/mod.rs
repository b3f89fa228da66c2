//! Command-line surface: argument parsing, the check/compute/report pipeline
//! and the exit-code contract.
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success                                             |
//! | 2    | unreadable or malformed input, bad flags            |
//! | 3    | an admissibility check failed                       |
//! | 4    | numerical failure (singular system, eigen-solve)    |

mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::bernoulli::{closed_form_decomposition, BernoulliPair};
use crate::decomposition::{build_component_subspaces, decompose, ComponentBasisSet, Decomposition};
use crate::distribution::{
    check_assumption1, check_strict_nesting, validate_pmf, Assumption1Report, NestingReport,
    PairSelection, Problem, SupportAtoms,
};
use crate::error::Error;
use crate::hilbert::{
    check_assumption2, feshchenko_matrix, weighted_norm, Assumption2Report, FeshchenkoMatrix,
    Verification, DEFAULT_EPS_PD, DEFAULT_TOL,
};
use crate::indices::{evaluation_explanation, variance_report, IndexRow, SensitivityReport};
use crate::lattice::SubsetMask;

pub use render::{format_f64, to_csv, to_json, to_table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "hoeffding", version, about = "Exact generalized Hoeffding decomposition for discrete dependent inputs")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Rank, orthogonality and reconstruction tolerance [env: HO_TOL] [default: 1e-10].
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,

    /// Positive-definiteness threshold on the smallest eigenvalue of Δ.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_PD, value_parser = positive)]
    pub eps_pd: f64,

    /// Check every subset pair for non-perfect functional dependence, whatever the input count.
    #[arg(long, global = true, default_value_t = false)]
    pub exhaustive: bool,

    /// Skip admissibility checks; reports are stamped `unverified`.
    #[arg(long, global = true, default_value_t = false)]
    pub skip_checks: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Validate the law and run the admissibility checks.
    Check(InputArgs),
    /// Friedrichs-angle matrix Δ over all subsets.
    Angles(InputArgs),
    /// Orthocanonical components of the model.
    Decompose(InputArgs),
    /// Sensitivity indices.
    Indices {
        #[command(flatten)]
        input: InputArgs,
        /// Index families to report (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        which: Vec<Family>,
    },
    /// Per-subset attribution of the model value at one grid cell.
    Explain {
        #[command(flatten)]
        input: InputArgs,
        /// 0-based level indices, one per input.
        #[arg(long, value_delimiter = ',', required = true)]
        cell: Vec<usize>,
    },
    /// Closed-form decomposition for two Bernoulli inputs.
    Bernoulli {
        #[arg(long)]
        q1: f64,
        #[arg(long)]
        q2: f64,
        /// E[X1 X2].
        #[arg(long)]
        rho: f64,
        /// Model values G00,G01,G10,G11.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        g: Vec<f64>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input JSON file with the inputs, their joint law and the model table.
    pub input: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Structural,
    Correlative,
    Pure,
    Dependence,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

impl RunConfig {
    /// `--tol`, else `HO_TOL`, else the default.
    pub fn tolerance(&self) -> Result<f64, Failure> {
        if let Some(t) = self.tol {
            return Ok(t);
        }
        match std::env::var("HO_TOL") {
            Ok(s) => positive(&s).map_err(|e| Failure::input(format!("HO_TOL: {e}"))),
            Err(_) => Ok(DEFAULT_TOL),
        }
    }
}

/// A failed run: exit code plus a diagnostic for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    fn assumption(message: impl Into<String>) -> Self {
        Failure { code: EXIT_ASSUMPTION, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularSystem { .. }
            | Error::ReconstructionFailed { .. }
            | Error::DimensionMismatch { .. }
            | Error::EigenFailure(_)
            | Error::DegenerateTilde
            | Error::NotProductForm { .. } => EXIT_NUMERICAL,
            Error::Assumption1NotVerified => EXIT_ASSUMPTION,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Output of a successful (or check-failing) run.
pub struct Outcome {
    pub text: String,
    /// Set when the report was produced but a check failed.
    pub failure: Option<Failure>,
}

/// Runs one command and returns the process exit code. Reports go to the
/// output file or standard output; diagnostics go to standard error.
pub fn run(config: &RunConfig) -> i32 {
    let failure = match execute(config) {
        Ok(outcome) => {
            if let Err(f) = emit(config, &outcome.text) {
                Some(f)
            } else {
                outcome.failure
            }
        }
        Err(f) => Some(f),
    };
    match failure {
        None => EXIT_OK,
        Some(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), Failure> {
    match &config.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::input(format!("cannot write to standard output: {e}")))
        }
    }
}

/// Runs the pipeline without touching the filesystem beyond reading the input.
pub fn execute(config: &RunConfig) -> Result<Outcome, Failure> {
    match &config.command {
        Command::Check(input) => check_command(config, input),
        Command::Angles(input) => angles_command(config, input),
        Command::Decompose(input) => decompose_command(config, input),
        Command::Indices { input, which } => indices_command(config, input, which),
        Command::Explain { input, cell } => explain_command(config, input, cell),
        Command::Bernoulli { q1, q2, rho, g } => bernoulli_command(config, *q1, *q2, *rho, g),
    }
}

fn load(input: &InputArgs) -> Result<(Problem, SupportAtoms), Failure> {
    let text = fs::read_to_string(&input.input)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", input.input.display())))?;
    let problem = Problem::from_json(&text)?;
    let support = validate_pmf(&problem.pmf)?;
    Ok((problem, support))
}

fn unsupported(command: &str, format: Format) -> Failure {
    let name = match format {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Table => "table",
    };
    Failure::input(format!("`{command}` has no {name} output"))
}

fn json_text<T: Serialize>(value: &T) -> Result<String, Failure> {
    to_json(value).map_err(|e| Failure::input(format!("cannot serialize report: {e}")))
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, Failure> {
    to_csv(header, rows).map_err(|e| Failure::input(format!("cannot write CSV: {e}")))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Checks {
    pub assumption1: Assumption1Report,
    pub strict_nesting: NestingReport,
    /// Absent when Assumption 1 fails, since Δ is then undefined.
    pub assumption2: Option<Assumption2Report>,
    #[serde(skip)]
    pub delta: Option<FeshchenkoMatrix>,
}

impl Checks {
    pub fn run(support: &SupportAtoms, config: &RunConfig) -> Result<Self, Failure> {
        let selection = if config.exhaustive { PairSelection::Exhaustive } else { PairSelection::Auto };
        let assumption1 = check_assumption1(support, selection);
        let strict_nesting = check_strict_nesting(support);
        let delta = if assumption1.pass {
            Some(feshchenko_matrix(support, Verification::Checked(&assumption1), config.tolerance()?)?)
        } else {
            None
        };
        let assumption2 = delta.as_ref().map(|d| check_assumption2(d, config.eps_pd));
        Ok(Checks { assumption1, strict_nesting, assumption2, delta })
    }

    pub fn pass(&self) -> bool {
        self.assumption1.pass
            && self.strict_nesting.pass
            && self.assumption2.as_ref().is_some_and(|a| a.pass)
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (a, b) in &self.assumption1.violations {
            out.push(format!("assumption 1 violated: σ{a} ∩ σ{b} ≠ σ{}", a.intersection(*b)));
        }
        for (b, a) in &self.strict_nesting.failures {
            out.push(format!("strict nesting fails: σ{a} does not strictly refine σ{b}"));
        }
        if let Some(a2) = &self.assumption2 {
            if !a2.pass {
                out.push(format!(
                    "assumption 2 violated: smallest eigenvalue of Δ is {} (threshold {})",
                    format_f64(a2.min_eigenvalue),
                    format_f64(a2.eps)
                ));
            }
        }
        out
    }

    fn failure(&self) -> Failure {
        Failure::assumption(self.diagnostics().join("\n       "))
    }
}

/// Runs the checks unless skipped; a failing check aborts with exit code 3.
fn gate(support: &SupportAtoms, config: &RunConfig) -> Result<Option<Checks>, Failure> {
    if config.skip_checks {
        return Ok(None);
    }
    let checks = Checks::run(support, config)?;
    if !checks.pass() {
        return Err(checks.failure());
    }
    Ok(Some(checks))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckReport<'a> {
    command: &'static str,
    inputs: usize,
    atoms: usize,
    pass: bool,
    #[serde(flatten)]
    checks: &'a Checks,
}

fn check_command(config: &RunConfig, input: &InputArgs) -> Result<Outcome, Failure> {
    let (_, support) = load(input)?;
    let checks = Checks::run(&support, config)?;
    let pass = checks.pass();
    let text = match config.format {
        Format::Json => json_text(&CheckReport {
            command: "check",
            inputs: support.d(),
            atoms: support.n(),
            pass,
            checks: &checks,
        })?,
        Format::Table => {
            let verdict = |ok: bool| if ok { "pass" } else { "fail" };
            let mut s = format!("assumption1: {}\n", verdict(checks.assumption1.pass));
            s += &format!("strictNesting: {}\n", verdict(checks.strict_nesting.pass));
            match &checks.assumption2 {
                Some(a2) => {
                    s += &format!("assumption2: {}\n", verdict(a2.pass));
                    s += &format!("minEigenvalue: {:?}\n", a2.min_eigenvalue);
                }
                None => s += "assumption2: not evaluated\n",
            }
            for (a, b) in &checks.assumption1.violations {
                s += &format!("violation: {a} {b}\n");
            }
            for (b, a) in &checks.strict_nesting.failures {
                s += &format!("nestingFailure: {b} {a}\n");
            }
            s
        }
        Format::Csv => return Err(unsupported("check", config.format)),
    };
    let failure = (!pass).then(|| checks.failure());
    Ok(Outcome { text, failure })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AnglesReport<'a> {
    command: &'static str,
    unverified: bool,
    checks: Option<&'a Checks>,
    delta: &'a FeshchenkoMatrix,
    assumption2: Assumption2Report,
}

fn angles_command(config: &RunConfig, input: &InputArgs) -> Result<Outcome, Failure> {
    let (_, support) = load(input)?;
    let checks = if config.skip_checks {
        None
    } else {
        let checks = Checks::run(&support, config)?;
        if !(checks.assumption1.pass && checks.strict_nesting.pass) {
            return Err(checks.failure());
        }
        Some(checks)
    };
    let delta = match checks.as_ref().and_then(|c| c.delta.clone()) {
        Some(d) => d,
        None => feshchenko_matrix(&support, Verification::Skipped, config.tolerance()?)?,
    };
    let labels: Vec<String> = delta.subsets.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = delta
        .entries
        .row_iter()
        .zip(&labels)
        .map(|(r, l)| std::iter::once(l.clone()).chain(r.iter().map(|v| format_f64(*v))).collect())
        .collect();
    let header: Vec<String> = std::iter::once("subset".to_string()).chain(labels.iter().cloned()).collect();
    let text = match config.format {
        Format::Json => json_text(&AnglesReport {
            command: "angles",
            unverified: config.skip_checks,
            checks: checks.as_ref(),
            assumption2: check_assumption2(&delta, config.eps_pd),
            delta: &delta,
        })?,
        Format::Csv => csv_text(&header, &rows)?,
        Format::Table => to_table(&header, &rows),
    };
    Ok(Outcome { text, failure: None })
}

struct Pipeline {
    support: SupportAtoms,
    model: Vec<f64>,
    checks: Option<Checks>,
    bases: ComponentBasisSet,
    dec: Decomposition,
}

fn pipeline(config: &RunConfig, input: &InputArgs) -> Result<Pipeline, Failure> {
    let (problem, support) = load(input)?;
    let g = support.restrict(&problem.model)?;
    let checks = gate(&support, config)?;
    let bases = build_component_subspaces(&support, config.tolerance()?)?;
    let dec = decompose(&bases, &g, config.tolerance()?)?;
    Ok(Pipeline { support, model: problem.model, checks, bases, dec })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AtomEntry {
    cell: Vec<usize>,
    weight: f64,
    model: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ComponentEntry {
    subset: SubsetMask,
    dim: usize,
    coefficient_norm: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DecomposeReport<'a> {
    command: &'static str,
    unverified: bool,
    checks: Option<&'a Checks>,
    inputs: Vec<&'a str>,
    atoms: Vec<AtomEntry>,
    model_variance: f64,
    condition_number: Option<f64>,
    reconstruction_residual: f64,
    components: Vec<ComponentEntry>,
    warnings: Vec<String>,
}

fn decompose_command(config: &RunConfig, input: &InputArgs) -> Result<Outcome, Failure> {
    if config.format != Format::Json {
        return Err(unsupported("decompose", config.format));
    }
    let p = pipeline(config, input)?;
    let g = p.dec.model();
    let atoms = (0..p.support.n())
        .map(|i| AtomEntry {
            cell: p.support.coords(i).to_vec(),
            weight: p.support.weights()[i],
            model: g[i],
        })
        .collect();
    let mut warnings = Vec::new();
    let components = p
        .dec
        .subsets()
        .into_iter()
        .map(|a| {
            let dim = p.bases.dim(a);
            if dim == 0 {
                warnings.push(format!("component space for {a} is zero-dimensional"));
            }
            let coefficient_norm = match p.dec.coefficients(a) {
                Some(c) => c.iter().map(|x| x * x).sum::<f64>().sqrt(),
                None => weighted_norm(p.dec.component(a), p.dec.weights()),
            };
            ComponentEntry { subset: a, dim, coefficient_norm, values: p.dec.component(a).to_vec() }
        })
        .collect();
    let report = DecomposeReport {
        command: "decompose",
        unverified: config.skip_checks,
        checks: p.checks.as_ref(),
        inputs: p.support.inputs().iter().map(|i| i.name.as_str()).collect(),
        atoms,
        model_variance: p.dec.total_variance,
        condition_number: p.dec.condition_number,
        reconstruction_residual: p.dec.reconstruction_residual,
        components,
        warnings,
    };
    Ok(Outcome { text: json_text(&report)?, failure: None })
}

const FAMILY_COLUMNS: [(Family, &[&str]); 4] = [
    (Family::Structural, &["structural"]),
    (Family::Correlative, &["correlative"]),
    (Family::Pure, &["pureInteraction", "pureInteractionNormalized"]),
    (Family::Dependence, &["dependenceEffect"]),
];

fn row_values(row: &IndexRow, family: Family) -> Vec<Option<f64>> {
    match family {
        Family::Structural => vec![Some(row.structural)],
        Family::Correlative => vec![Some(row.correlative)],
        Family::Pure => vec![Some(row.pure_interaction), row.pure_interaction_normalized],
        Family::Dependence => vec![Some(row.dependence_effect)],
    }
}

fn selected_families(which: &[Family]) -> Vec<Family> {
    if which.is_empty() {
        FAMILY_COLUMNS.iter().map(|(f, _)| *f).collect()
    } else {
        let mut w = which.to_vec();
        w.sort();
        w.dedup();
        w
    }
}

fn index_rows(report: &SensitivityReport, families: &[Family]) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut header = Vec::new();
    for (f, cols) in FAMILY_COLUMNS.iter() {
        if families.contains(f) {
            header.extend(cols.iter().map(|c| c.to_string()));
        }
    }
    let rows = report
        .rows
        .iter()
        .map(|r| families.iter().flat_map(|f| row_values(r, *f)).collect())
        .collect();
    (header, rows)
}

fn indices_command(config: &RunConfig, input: &InputArgs, which: &[Family]) -> Result<Outcome, Failure> {
    let p = pipeline(config, input)?;
    let report = variance_report(&p.support, &p.bases, &p.dec, &p.model, config.tolerance()?)?;
    let families = selected_families(which);
    let (columns, values) = index_rows(&report, &families);

    let text = match config.format {
        Format::Json => {
            let mut out = Map::new();
            out.insert("command".into(), "indices".into());
            out.insert("unverified".into(), config.skip_checks.into());
            out.insert("checks".into(), serde_json::to_value(&p.checks).map_err(|e| Failure::input(e.to_string()))?);
            out.insert("modelVariance".into(), report.model_variance.into());
            if families.contains(&Family::Structural) || families.contains(&Family::Correlative) {
                out.insert("sumStructural".into(), report.sum_structural.into());
                out.insert("sumCorrelative".into(), report.sum_correlative.into());
                out.insert("identityResidual".into(), report.identity_residual.into());
                out.insert("structuralCrossCheck".into(), report.structural_cross_check.into());
                out.insert("correlativeCrossCheck".into(), report.correlative_cross_check.into());
            }
            let rows: Vec<Value> = report
                .rows
                .iter()
                .zip(&values)
                .map(|(r, vals)| {
                    let mut m = Map::new();
                    m.insert("subset".into(), serde_json::to_value(r.subset).expect("subset serializes"));
                    for (c, v) in columns.iter().zip(vals) {
                        m.insert(c.clone(), v.map_or(Value::Null, Value::from));
                    }
                    Value::Object(m)
                })
                .collect();
            out.insert("rows".into(), Value::Array(rows));
            out.insert("warnings".into(), serde_json::to_value(&report.warnings).expect("strings serialize"));
            json_text(&Value::Object(out))?
        }
        Format::Csv | Format::Table => {
            let header: Vec<String> = std::iter::once("subset".to_string()).chain(columns).collect();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .zip(&values)
                .map(|(r, vals)| {
                    std::iter::once(r.subset.to_string())
                        .chain(vals.iter().map(|v| v.map_or(String::new(), format_f64)))
                        .collect()
                })
                .collect();
            if config.format == Format::Csv {
                csv_text(&header, &rows)?
            } else {
                let mut t = to_table(&header, &rows);
                t += &format!("\nmodelVariance: {}\n", format_f64(report.model_variance));
                for w in &report.warnings {
                    t += &format!("warning: {w}\n");
                }
                t
            }
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(Outcome { text, failure: None })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Attribution {
    subset: SubsetMask,
    value: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExplainReport<'a> {
    command: &'static str,
    unverified: bool,
    checks: Option<&'a Checks>,
    cell: &'a [usize],
    model_value: f64,
    total: f64,
    attribution: Vec<Attribution>,
}

fn explain_command(config: &RunConfig, input: &InputArgs, cell: &[usize]) -> Result<Outcome, Failure> {
    let p = pipeline(config, input)?;
    let shape = p.support.shape();
    if cell.len() != shape.len() || cell.iter().zip(shape).any(|(c, s)| c >= s) {
        return Err(Failure::input(format!(
            "cell {cell:?} does not index a grid of shape {shape:?}"
        )));
    }
    let parts = evaluation_explanation(&p.dec, &p.support, cell)?;
    let model_value = p.dec.model()[p.support.atom_of(cell).expect("explained cell is supported")];
    let total = parts.iter().map(|(_, v)| v).sum();
    let text = match config.format {
        Format::Json => json_text(&ExplainReport {
            command: "explain",
            unverified: config.skip_checks,
            checks: p.checks.as_ref(),
            cell,
            model_value,
            total,
            attribution: parts.iter().map(|&(subset, value)| Attribution { subset, value }).collect(),
        })?,
        Format::Csv | Format::Table => {
            let header = vec!["subset".to_string(), "value".to_string()];
            let rows: Vec<Vec<String>> =
                parts.iter().map(|(a, v)| vec![a.to_string(), format_f64(*v)]).collect();
            if config.format == Format::Csv {
                csv_text(&header, &rows)?
            } else {
                to_table(&header, &rows) + &format!("\nmodelValue: {}\n", format_f64(model_value))
            }
        }
    };
    Ok(Outcome { text, failure: None })
}

fn bernoulli_command(config: &RunConfig, q1: f64, q2: f64, rho: f64, g: &[f64]) -> Result<Outcome, Failure> {
    let g: [f64; 4] = g
        .try_into()
        .map_err(|_| Failure::input(format!("--g needs exactly 4 values, got {}", g.len())))?;
    let pair = BernoulliPair::new(q1, q2, rho)?;
    let dec = closed_form_decomposition(&pair, g)?;
    let indices = dec.indices(g)?;

    let text = match config.format {
        Format::Json => {
            let mut out = Map::new();
            out.insert("command".into(), "bernoulli".into());
            out.insert("correlation".into(), pair.correlation().into());
            let body = serde_json::to_value(&dec).map_err(|e| Failure::input(e.to_string()))?;
            if let Value::Object(m) = body {
                out.extend(m);
            }
            out.insert("model".into(), serde_json::to_value(g).expect("floats serialize"));
            out.insert("indices".into(), serde_json::to_value(&indices).map_err(|e| Failure::input(e.to_string()))?);
            json_text(&Value::Object(out))?
        }
        Format::Table => {
            let labels = ["[]", "[1]", "[2]", "[1,2]"];
            let header: Vec<String> = ["subset", "component00", "component01", "component10", "component11", "structural", "correlative", "pureInteraction", "dependenceEffect"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let comps = dec.components.ordered();
            let rows: Vec<Vec<String>> = (0..4)
                .map(|k| {
                    std::iter::once(labels[k].to_string())
                        .chain(comps[k].iter().map(|v| format_f64(*v)))
                        .chain(
                            [
                                indices.structural[k],
                                indices.correlative[k],
                                indices.pure_interaction[k],
                                indices.dependence_effect[k],
                            ]
                            .iter()
                            .map(|v| format_f64(*v)),
                        )
                        .collect()
                })
                .collect();
            let c = dec.coefficients;
            to_table(&header, &rows)
                + &format!(
                    "\ne: {}\nalpha: {}\nbeta: {}\ndelta: {}\nmodelVariance: {}\n",
                    format_f64(c.e),
                    format_f64(c.alpha),
                    format_f64(c.beta),
                    format_f64(c.delta),
                    format_f64(indices.model_variance)
                )
        }
        Format::Csv => return Err(unsupported("bernoulli", config.format)),
    };
    Ok(Outcome { text, failure: None })
}

//! Command-line front end.
//!
//! Every subcommand resolves its flags into a [`RunConfig`] first. With
//! `--output PATH` the config is written next to the artifact as
//! `PATH.config.json`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoupler::{decouple, Assumption, DecoupleOptions};
use crate::diag::{asymptotic_coefficients, DiagonalCoefficients, DiskProblem};
use crate::error::{Error, Result};
use crate::forward::{leading_eigenvalues, solve, Geometry, DEFAULT_PENCIL_MARGIN};
use crate::io::{self, SCHEMA_VERSION};
use crate::periodic::PeriodicFunction;
use crate::sequences::{build_model_sequence, decay_order, merge, ComponentModel, DecayFit, SpectrumSequence};
use crate::symbol::JetFunction;

pub const THREADS_ENV: &str = "DTN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dtn-spectra", version, about = "Dirichlet-to-Neumann spectra: forward solvers, asymptotics, decoupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward spectrum from an exact oracle.
    Solve(SolveArgs),
    /// Asymptotic coefficients s_1..s_N over one or more λ values.
    Coeffs(CoeffsArgs),
    /// Model sequences jα + Σ s_n j^{-n}.
    Predict(PredictArgs),
    /// Log-log decay of oracle minus model.
    Verify(VerifyArgs),
    /// Recover lengths and invariants from a merged spectrum.
    Decouple(DecoupleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeometryKind {
    Disk,
    Annulus,
    Radial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AssumptionArg {
    None,
    Sphere,
    Flat,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Artifact path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Overrides the format implied by the output extension.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long, value_enum, default_value = "disk")]
    pub geometry: GeometryKind,
    #[arg(long)]
    pub lambda: f64,
    /// Inner radius R of the annulus R < r < 1.
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// const, const:V or radial:C0,C1,... for τ(r) = Σ c_k r^k.
    #[arg(long)]
    pub tau: Option<TauSpec>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Modes 0..=N.
    #[arg(long, conflicts_with = "count", required_unless_present = "count")]
    pub n_max: Option<usize>,
    /// The smallest COUNT eigenvalues.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_PENCIL_MARGIN)]
    pub margin: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value = "const")]
    pub tau: TauSpec,
    /// const, const:V or trig:A0,A1,B1,A2,B2,... for A0 + Σ A_k cos kx + B_k sin kx.
    #[arg(long, default_value = "const")]
    pub rho: RhoSpec,
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "lambda_grid")]
    pub lambda: Vec<f64>,
    /// START:STOP:COUNT, evenly spaced and inclusive.
    #[arg(long, conflicts_with = "lambda", allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// A coefficient file written by `coeffs` for a single λ.
    #[arg(long)]
    pub coeffs: Vec<PathBuf>,
    /// ALPHA:S1,S2,... with an optional xMULT suffix, e.g. 1.5:-0.3,0.2x2.
    #[arg(long, allow_hyphen_values = true)]
    pub component: Vec<ComponentSpec>,
    #[arg(long)]
    pub j_max: usize,
    /// Truncation order; defaults to all given coefficients.
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Oracle modes 0..=N.
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
    /// Sorted positions FROM:TO of the decay fit; defaults to the upper 90%.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PENCIL_MARGIN)]
    pub margin: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecoupleArgs {
    /// Spectrum as CSV or JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, value_enum, default_value = "none")]
    pub assumption: AssumptionArg,
    /// τ is not identically 1: report lengths and s_n only.
    #[arg(long)]
    pub non_constant_potential: bool,
    #[arg(long)]
    pub min_entries: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coefficients", rename_all = "lowercase")]
pub enum TauSpec {
    Const(f64),
    Radial(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RhoSpec {
    Const { value: f64 },
    Trig { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSpec(pub ComponentModel);

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect()
}

impl FromStr for TauSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "const" => Ok(TauSpec::Const(1.0)),
            Some(("const", v)) => v.trim().parse().map(TauSpec::Const).map_err(|e| format!("bad constant: {e}")),
            Some(("radial", list)) => {
                let c = parse_list(list)?;
                if c.is_empty() {
                    return Err("radial profile needs at least one coefficient".into());
                }
                Ok(TauSpec::Radial(c))
            }
            _ => Err(format!("expected const, const:V or radial:C0,C1,..., got {s:?}")),
        }
    }
}

impl FromStr for RhoSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "const" => Ok(RhoSpec::Const { value: 1.0 }),
            Some(("const", v)) => v
                .trim()
                .parse()
                .map(|value| RhoSpec::Const { value })
                .map_err(|e| format!("bad constant: {e}")),
            Some(("trig", list)) => {
                let c = parse_list(list)?;
                let Some((&a0, rest)) = c.split_first() else {
                    return Err("trig needs at least A0".into());
                };
                if rest.len() % 2 != 0 {
                    return Err("trig coefficients come in cos/sin pairs after A0".into());
                }
                Ok(RhoSpec::Trig {
                    a0,
                    cos: rest.iter().step_by(2).copied().collect(),
                    sin: rest.iter().skip(1).step_by(2).copied().collect(),
                })
            }
            _ => Err(format!("expected const, const:V or trig:A0,A1,B1,..., got {s:?}")),
        }
    }
}

impl FromStr for ComponentSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (body, mult) = match s.rsplit_once('x') {
            Some((b, m)) => (b, m.trim().parse::<usize>().map_err(|e| format!("bad multiplicity: {e}"))?),
            None => (s, 1),
        };
        let (alpha, coeffs) = body.split_once(':').unwrap_or((body, ""));
        let alpha: f64 = alpha.trim().parse().map_err(|e| format!("bad alpha: {e}"))?;
        if !(alpha > 0.0 && alpha.is_finite()) || mult == 0 {
            return Err("alpha must be positive and multiplicity at least 1".into());
        }
        Ok(ComponentSpec(ComponentModel::new(alpha, parse_list(coeffs)?).with_multiplicity(mult)))
    }
}

impl TauSpec {
    fn jet(&self, order: usize) -> JetFunction {
        match self {
            TauSpec::Const(v) => JetFunction::constant(*v, order),
            TauSpec::Radial(c) => JetFunction::from_radial_polynomial(c).padded(order),
        }
    }
}

impl RhoSpec {
    fn function(&self) -> PeriodicFunction {
        match self {
            RhoSpec::Const { value } => PeriodicFunction::constant(*value),
            RhoSpec::Trig { a0, cos, sin } => PeriodicFunction::from_real_trig(*a0, cos, sin),
        }
    }
}

/// Flags after validation; written next to every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum RunConfig {
    Solve {
        geometry: Geometry,
        lambda: f64,
        n_max: Option<usize>,
        count: Option<usize>,
        margin: f64,
        format: Format,
    },
    Coeffs {
        tau: TauSpec,
        rho: RhoSpec,
        lambda: Vec<f64>,
        order: usize,
        jet_order: usize,
        format: Format,
    },
    Predict {
        components: Vec<ComponentModel>,
        order: usize,
        j_max: usize,
        format: Format,
    },
    Verify {
        geometry: Geometry,
        lambda: f64,
        order: usize,
        n_max: usize,
        window: Option<(usize, usize)>,
        margin: f64,
    },
    Decouple {
        input: PathBuf,
        options: DecoupleOptions,
    },
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    schema_version: u32,
    version: &'a str,
    #[serde(flatten)]
    run: &'a RunConfig,
}

/// Exit status per error group: 2 configuration, 3 decoupler, 4 numerical, 5 i/o.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Unsupported(_) => 2,
        Error::WindowTooSmall { .. }
        | Error::InsufficientData(_)
        | Error::HorizonTooSmall { .. }
        | Error::Ambiguous { .. }
        | Error::Degenerate(_) => 3,
        Error::NonRealMean { .. }
        | Error::InsufficientJetOrder { .. }
        | Error::JetOrderExceeded { .. }
        | Error::NonPositiveWeight { .. }
        | Error::UnsupportedDepth { .. }
        | Error::NotDiagonal { .. }
        | Error::MissingComponent { .. }
        | Error::InversionFailed { .. }
        | Error::Pencil { .. } => 4,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => 5,
    }
}

/// Sizes the global rayon pool from `DTN_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Error::Config(format!("{THREADS_ENV} must be at least 1")));
    }
    // A second call (e.g. from tests) finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn resolve_format(out: &OutputArgs, default: Format) -> Format {
    out.format.unwrap_or(match &out.output {
        Some(p) if io::is_json(p) => Format::Json,
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => default,
    })
}

fn resolve_geometry(g: &GeometryArgs) -> Result<Geometry> {
    if !g.lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be finite, got {}", g.lambda)));
    }
    let unit_tau = matches!(g.tau, None | Some(TauSpec::Const(1.0)));
    match g.geometry {
        GeometryKind::Disk => match &g.tau {
            _ if unit_tau => Ok(Geometry::DiskConstant),
            Some(TauSpec::Const(v)) => Ok(Geometry::DiskRadial { tau: vec![*v] }),
            Some(TauSpec::Radial(_)) => Err(Error::Config("a radial τ needs --geometry radial".into())),
            None => unreachable!(),
        },
        GeometryKind::Annulus => {
            if !unit_tau {
                return Err(Error::Config("the annulus oracle supports τ ≡ 1 only".into()));
            }
            match g.inner_radius {
                Some(r) if r > 0.0 && r < 1.0 => Ok(Geometry::AnnulusConstant { inner_radius: r }),
                Some(r) => Err(Error::Config(format!("inner radius must lie in (0, 1), got {r}"))),
                None => Err(Error::Config("--geometry annulus needs --inner-radius".into())),
            }
        }
        GeometryKind::Radial => match &g.tau {
            Some(TauSpec::Radial(c)) => Ok(Geometry::DiskRadial { tau: c.clone() }),
            Some(TauSpec::Const(v)) => Ok(Geometry::DiskRadial { tau: vec![*v] }),
            None => Err(Error::Config("--geometry radial needs --tau radial:C0,C1,...".into())),
        },
    }
}

fn lambda_values(a: &CoeffsArgs) -> Result<Vec<f64>> {
    let values = match &a.lambda_grid {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(':').collect();
            let [start, stop, count] = parts[..] else {
                return Err(Error::Config(format!("--lambda-grid expects START:STOP:COUNT, got {spec:?}")));
            };
            let bad = |e: &dyn std::fmt::Display| Error::Config(format!("--lambda-grid {spec:?}: {e}"));
            let start: f64 = start.parse().map_err(|e| bad(&e))?;
            let stop: f64 = stop.parse().map_err(|e| bad(&e))?;
            let count: usize = count.parse().map_err(|e| bad(&e))?;
            match count {
                0 => return Err(Error::Config("--lambda-grid count must be at least 1".into())),
                1 => vec![start],
                _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
            }
        }
        None => a.lambda.clone(),
    };
    if values.is_empty() || values.iter().any(|l| !l.is_finite()) {
        return Err(Error::Config("lambda values must be finite and non-empty".into()));
    }
    Ok(values)
}

fn parse_window(spec: &str) -> Result<(usize, usize)> {
    let parsed = spec
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((a, b)) if a < b => Ok((a, b)),
        _ => Err(Error::Config(format!("--window expects FROM:TO with FROM < TO, got {spec:?}"))),
    }
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> Result<Self> {
        Ok(match cmd {
            Command::Solve(a) => RunConfig::Solve {
                geometry: resolve_geometry(&a.geometry)?,
                lambda: a.geometry.lambda,
                n_max: a.n_max,
                count: a.count,
                margin: a.margin,
                format: resolve_format(&a.out, Format::Csv),
            },
            Command::Coeffs(a) => {
                if a.order == 0 {
                    return Err(Error::Config("--order must be at least 1".into()));
                }
                RunConfig::Coeffs {
                    tau: a.tau.clone(),
                    rho: a.rho.clone(),
                    lambda: lambda_values(a)?,
                    order: a.order,
                    jet_order: a.order + 4,
                    format: resolve_format(&a.out, Format::Json),
                }
            }
            Command::Predict(a) => {
                let mut components = Vec::new();
                for path in &a.coeffs {
                    let doc: CoeffsDocument = serde_json::from_reader(fs::File::open(path)?)?;
                    io::check_version(doc.schema_version)?;
                    let [row] = &doc.rows[..] else {
                        return Err(Error::Config(format!("{} holds {} λ values; predict needs one", path.display(), doc.rows.len())));
                    };
                    components.push(ComponentModel::new(1.0 / doc.length, row.s.clone()));
                }
                components.extend(a.component.iter().map(|c| c.0.clone()));
                if components.is_empty() {
                    return Err(Error::Config("predict needs --coeffs or --component".into()));
                }
                let available = components.iter().map(|c| c.s.len()).min().unwrap_or(0);
                let order = a.order.unwrap_or(available);
                if order > available {
                    return Err(Error::Config(format!("--order {order} exceeds the {available} coefficients given")));
                }
                RunConfig::Predict {
                    components,
                    order,
                    j_max: a.j_max,
                    format: resolve_format(&a.out, Format::Csv),
                }
            }
            Command::Verify(a) => {
                let geometry = resolve_geometry(&a.geometry)?;
                if a.order == 0 {
                    return Err(Error::Config("--order must be at least 1".into()));
                }
                if matches!(geometry, Geometry::AnnulusConstant { .. }) && a.order > 2 {
                    return Err(Error::Unsupported("annulus models are known to order 2".into()));
                }
                RunConfig::Verify {
                    geometry,
                    lambda: a.geometry.lambda,
                    order: a.order,
                    n_max: a.n_max,
                    window: a.window.as_deref().map(parse_window).transpose()?,
                    margin: a.margin,
                }
            }
            Command::Decouple(a) => {
                let mut options = DecoupleOptions {
                    order: a.order,
                    constant_potential: !a.non_constant_potential,
                    assumption: match a.assumption {
                        AssumptionArg::None => Assumption::None,
                        AssumptionArg::Sphere => Assumption::Sphere,
                        AssumptionArg::Flat => Assumption::Flat,
                    },
                    ..DecoupleOptions::default()
                };
                if let Some(m) = a.min_entries {
                    options.min_entries = m;
                }
                RunConfig::Decouple {
                    input: a.input.clone(),
                    options,
                }
            }
        })
    }
}

/// One λ row of a `coeffs` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffsRow {
    pub lambda: f64,
    pub s: Vec<f64>,
}

/// JSON layout of `coeffs`. A single λ is flattened to top-level `lambda` and `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffsDocument {
    pub schema_version: u32,
    pub length: f64,
    pub rows: Vec<CoeffsRow>,
}

#[derive(Serialize, Deserialize)]
struct CoeffsJson {
    schema_version: u32,
    #[serde(rename = "L")]
    length: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<Vec<CoeffsRow>>,
}

impl Serialize for CoeffsDocument {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let single = self.rows.len() == 1;
        CoeffsJson {
            schema_version: self.schema_version,
            length: self.length,
            lambda: single.then(|| self.rows[0].lambda),
            s: single.then(|| self.rows[0].s.clone()),
            rows: (!single).then(|| self.rows.clone()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CoeffsDocument {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = CoeffsJson::deserialize(de)?;
        let rows = match (j.rows, j.s) {
            (Some(rows), _) => rows,
            (None, Some(s)) => vec![CoeffsRow {
                lambda: j.lambda.unwrap_or(f64::NAN),
                s,
            }],
            (None, None) => return Err(serde::de::Error::custom("coefficient file needs `s` or `rows`")),
        };
        Ok(CoeffsDocument {
            schema_version: j.schema_version,
            length: j.length,
            rows,
        })
    }
}

/// `verify` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub geometry: Geometry,
    pub lambda: f64,
    pub order: usize,
    pub models: Vec<ComponentModel>,
    pub window: (usize, usize),
    pub fit: DecayFit,
}

/// Artifact text for a resolved config.
pub fn execute(config: &RunConfig) -> Result<Artifact> {
    match config {
        RunConfig::Solve {
            geometry,
            lambda,
            n_max,
            count,
            margin,
            format,
        } => {
            let s = match (n_max, count) {
                (Some(n), _) => solve(*lambda, geometry, *n, *margin)?,
                (None, Some(c)) => leading_eigenvalues(*lambda, geometry, *c, *margin)?,
                (None, None) => return Err(Error::Config("solve needs --n-max or --count".into())),
            };
            Artifact::spectrum(&s, *format)
        }
        RunConfig::Coeffs {
            tau,
            rho,
            lambda,
            order,
            jet_order,
            format,
        } => {
            let tau_jet = tau.jet(*jet_order);
            let rho_fn = rho.function();
            let table: Vec<DiagonalCoefficients> = lambda
                .par_iter()
                .map(|&l| {
                    let problem = DiskProblem {
                        lambda: l,
                        tau: tau_jet.clone(),
                        rho: rho_fn.clone(),
                    };
                    asymptotic_coefficients(&problem, *order)
                })
                .collect::<Result<_>>()?;
            let doc = CoeffsDocument {
                schema_version: SCHEMA_VERSION,
                length: table[0].length,
                rows: table.iter().map(|c| CoeffsRow { lambda: c.lambda, s: c.s.clone() }).collect(),
            };
            match format {
                Format::Json => Artifact::json(&doc),
                Format::Csv => {
                    let mut text = format!("# schema_version: {SCHEMA_VERSION}\nlambda,L");
                    for n in 1..=*order {
                        let _ = write!(text, ",s{n}");
                    }
                    text.push('\n');
                    for row in &doc.rows {
                        let _ = write!(text, "{},{}", row.lambda, doc.length);
                        for s in &row.s {
                            let _ = write!(text, ",{s}");
                        }
                        text.push('\n');
                    }
                    Ok(Artifact::text(text))
                }
            }
        }
        RunConfig::Predict {
            components,
            order,
            j_max,
            format,
        } => {
            let parts: Vec<SpectrumSequence> = components
                .iter()
                .enumerate()
                .map(|(i, c)| build_model_sequence(c, *order, *j_max).with_component(i))
                .collect();
            Artifact::spectrum(&merge(&parts), *format)
        }
        RunConfig::Verify {
            geometry,
            lambda,
            order,
            n_max,
            window,
            margin,
        } => Artifact::json(&verify(geometry, *lambda, *order, *n_max, *window, *margin)?),
        RunConfig::Decouple { input, options } => {
            let spectrum = io::read_spectrum(input)?;
            let report = decouple(&spectrum, options)?;
            let mut a = Artifact::json(&report)?;
            a.summary = Some(report.summary());
            Ok(a)
        }
    }
}

/// Component models for a geometry: the symbol engine for disks, the closed
/// forms for the annulus circles.
pub fn geometry_models(geometry: &Geometry, lambda: f64, order: usize) -> Result<Vec<ComponentModel>> {
    let problem = |tau: JetFunction| DiskProblem {
        lambda,
        tau,
        rho: PeriodicFunction::constant(1.0),
    };
    Ok(match geometry {
        Geometry::DiskConstant => vec![asymptotic_coefficients(&problem(JetFunction::constant(1.0, order + 4)), order)?.model()],
        Geometry::DiskRadial { tau } => {
            let jet = JetFunction::from_radial_polynomial(tau).padded(order + 4);
            vec![asymptotic_coefficients(&problem(jet), order)?.model()]
        }
        Geometry::AnnulusConstant { inner_radius: r } => {
            if order > 2 {
                return Err(Error::Unsupported("annulus models are known to order 2".into()));
            }
            let outer = [-lambda / 2.0, lambda / 2.0];
            let inner = [-lambda * r / 2.0, -lambda * r / 2.0];
            vec![
                ComponentModel::new(1.0, outer[..order].to_vec()),
                ComponentModel::new(1.0 / r, inner[..order].to_vec()),
            ]
        }
    })
}

pub fn verify(
    geometry: &Geometry,
    lambda: f64,
    order: usize,
    n_max: usize,
    window: Option<(usize, usize)>,
    margin: f64,
) -> Result<VerifyReport> {
    let oracle = solve(lambda, geometry, n_max, margin)?;
    let models = geometry_models(geometry, lambda, order)?;
    let parts: Vec<SpectrumSequence> = models.iter().map(|m| build_model_sequence(m, order, n_max)).collect();
    let model = merge(&parts);
    let window = window.unwrap_or((oracle.len() / 10, oracle.len()));
    let fit = decay_order(&oracle, &model, window.0..window.1)?;
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        geometry: geometry.clone(),
        lambda,
        order,
        models,
        window,
        fit,
    })
}

/// Bytes for the main output, plus an optional text summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub body: Vec<u8>,
    pub summary: Option<String>,
}

impl Artifact {
    fn text(body: String) -> Self {
        Self {
            body: body.into_bytes(),
            summary: None,
        }
    }

    fn json<T: Serialize>(value: &T) -> Result<Self> {
        let mut body = Vec::new();
        io::write_json(value, &mut body)?;
        Ok(Self { body, summary: None })
    }

    fn spectrum(s: &SpectrumSequence, format: Format) -> Result<Self> {
        let mut body = Vec::new();
        match format {
            Format::Csv => io::write_spectrum_csv(s, &mut body)?,
            Format::Json => io::write_spectrum_json(s, &mut body)?,
        }
        Ok(Self { body, summary: None })
    }
}

pub fn config_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

fn output_of(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Solve(a) => a.out.output.as_deref(),
        Command::Coeffs(a) => a.out.output.as_deref(),
        Command::Predict(a) => a.out.output.as_deref(),
        Command::Verify(a) => a.out.output.as_deref(),
        Command::Decouple(a) => a.out.output.as_deref(),
    }
}

/// Runs one parsed command. Artifacts go to `--output` or `stdout`; the
/// decouple summary goes to `stdout` with `--output` and to `stderr` without.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = RunConfig::from_command(&cli.command)?;
    let artifact = execute(&config)?;
    match output_of(&cli.command) {
        Some(path) => {
            fs::write(path, &artifact.body)?;
            let mut cfg = Vec::new();
            io::write_json(
                &ResolvedConfig {
                    schema_version: SCHEMA_VERSION,
                    version: env!("CARGO_PKG_VERSION"),
                    run: &config,
                },
                &mut cfg,
            )?;
            fs::write(config_path(path), cfg)?;
            if let Some(s) = &artifact.summary {
                stdout.write_all(s.as_bytes())?;
            }
        }
        None => {
            stdout.write_all(&artifact.body)?;
            if let Some(s) = &artifact.summary {
                stderr.write_all(s.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = init_threads().and_then(|_| run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

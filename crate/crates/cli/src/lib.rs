//! Command line front end: read a CSV series, fit the ensemble, write JSON or
//! CSV plot data.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use spaghetti_core::{
    band, build_ensemble, default_grid_bounds, linear_grid, Ensemble, FitConfig, SpaghettiError,
    SpaghettiFunction, TimeSeries, DEFAULT_GRID_COUNT,
};
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("parse error at line {line}: {text:?} ({reason})")]
    Parse {
        line: u64,
        text: String,
        reason: String,
    },

    #[error("invalid arguments: {0}")]
    Config(String),

    #[error(transparent)]
    Fit(#[from] SpaghettiError),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 1 for bad input or settings, 2 for numerical failure inside a fit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fit(e) if !e.is_input_error() => 2,
            CliError::Output(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `x,y` lines; one leading header line is allowed when its first
/// field is not a number. Points are sorted by x.
pub fn parse_csv(path: &Path) -> Result<TimeSeries, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_str(&text)
}

pub fn parse_csv_str(text: &str) -> Result<TimeSeries, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 1;
        let record = record.map_err(|e| CliError::Parse {
            line: e.position().map_or(line, |p| p.line()),
            text: String::new(),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(line, |p| p.line());
        let raw = record.iter().collect::<Vec<_>>().join(",");
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::Parse {
                line,
                text: raw,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let field = |k: usize| {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    line,
                    text: raw.clone(),
                    reason: format!("field {} is not a finite number", k + 1),
                })
        };
        points.push((field(0)?, field(1)?));
    }
    Ok(TimeSeries::from_unsorted(points)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitItem {
    Functions,
    Band,
    Comparators,
    All,
}

/// Which sections of the document are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub functions: bool,
    pub band: bool,
    pub comparators: bool,
}

impl Emit {
    pub const ALL: Emit = Emit {
        functions: true,
        band: true,
        comparators: true,
    };

    pub fn from_items(items: &[EmitItem]) -> Self {
        let mut e = Emit {
            functions: false,
            band: false,
            comparators: false,
        };
        for item in items {
            match item {
                EmitItem::Functions => e.functions = true,
                EmitItem::Band => e.band = true,
                EmitItem::Comparators => e.comparators = true,
                EmitItem::All => e = Emit::ALL,
            }
        }
        e
    }

    fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.functions {
            v.push("functions");
        }
        if self.band {
            v.push("band");
        }
        if self.comparators {
            v.push("comparators");
        }
        v
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spaghetti",
    version,
    about = "Fit leave-one-out spaghetti functions to a short time series"
)]
pub struct Args {
    /// CSV file of x,y rows (optional header line)
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// First grid point [default: first x - span/2]
    #[arg(long, allow_hyphen_values = true)]
    pub grid_start: Option<f64>,
    /// Last grid point [default: last x + span/2]
    #[arg(long, allow_hyphen_values = true)]
    pub grid_end: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_COUNT)]
    pub grid_count: usize,
    #[arg(long, default_value_t = FitConfig::default().lambda_lo)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = FitConfig::default().lambda_hi)]
    pub lambda_hi: f64,
    #[arg(long, default_value_t = FitConfig::default().lambda_points_per_decade)]
    pub lambda_ppd: usize,
    #[arg(long, default_value_t = FitConfig::default().sigma_lo_factor)]
    pub sigma_lo_factor: f64,
    #[arg(long, default_value_t = FitConfig::default().sigma_hi_factor)]
    pub sigma_hi_factor: f64,
    #[arg(long, default_value_t = FitConfig::default().refine_iterations)]
    pub refine: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub emit: Vec<EmitItem>,
}

/// Explicit grid bounds; `None` means derived from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub count: usize,
}

impl GridSpec {
    fn resolve(&self, series: &TimeSeries) -> Result<Vec<f64>, CliError> {
        let (ds, de) = default_grid_bounds(series);
        let (start, end) = (self.start.unwrap_or(ds), self.end.unwrap_or(de));
        if !start.is_finite() || !end.is_finite() || start >= end {
            return Err(CliError::Config(format!(
                "grid start {start} must be finite and below grid end {end}"
            )));
        }
        Ok(linear_grid(start, end, self.count))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub grid: GridSpec,
    pub fit: FitConfig,
    pub emit: Emit,
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let cfg = RunConfig {
            input_path: args.input,
            output_path: args.output,
            format: args.format,
            grid: GridSpec {
                start: args.grid_start,
                end: args.grid_end,
                count: args.grid_count,
            },
            fit: FitConfig {
                lambda_lo: args.lambda_lo,
                lambda_hi: args.lambda_hi,
                lambda_points_per_decade: args.lambda_ppd,
                sigma_lo_factor: args.sigma_lo_factor,
                sigma_hi_factor: args.sigma_hi_factor,
                refine_iterations: args.refine,
                ..FitConfig::default()
            },
            emit: Emit::from_items(&args.emit),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.count < 2 {
            return Err(CliError::Config(format!(
                "grid count must be at least 2, got {}",
                self.grid.count
            )));
        }
        if self.format == OutputFormat::Csv && !self.emit.band {
            return Err(CliError::Config(
                "csv output carries only the band; include `band` in --emit".into(),
            ));
        }
        self.fit.validate()?;
        Ok(())
    }
}

/// Reads, fits and renders; the rendered document is returned, not written.
pub fn render(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let series = parse_csv(&cfg.input_path)?;
    let xs = cfg.grid.resolve(&series)?;
    let ensemble = build_ensemble(&series, &cfg.fit)?;
    Ok(match cfg.format {
        OutputFormat::Json => render_json(cfg, &ensemble, &xs)?,
        OutputFormat::Csv => render_band_csv(&ensemble, &xs),
    })
}

/// Runs the tool and returns the process exit code; errors go to stderr.
pub fn run(cfg: &RunConfig) -> i32 {
    match render(cfg).and_then(|doc| write_output(cfg.output_path.as_deref(), &doc)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("spaghetti: {e}");
            e.exit_code()
        }
    }
}

/// Full entry point: argument parsing included.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_args(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("spaghetti: {e}");
            e.exit_code()
        }
    }
}

fn write_output(path: Option<&Path>, doc: &str) -> Result<(), CliError> {
    let res = match path {
        Some(p) => fs::write(p, doc).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(doc.as_bytes())
            .map_err(|e| e.to_string()),
    };
    res.map_err(CliError::Output)
}

/// A float rendered with 17 significant digits, e.g. `-5.0000000000000000e-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl fmt::Display for Sig17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn nums(v: &[f64]) -> Vec<Sig17> {
    v.iter().copied().map(Sig17).collect()
}

#[derive(Serialize)]
struct Document {
    points: Vec<[Sig17; 2]>,
    functions: Option<Vec<FunctionRecord>>,
    band: Option<BandRecord>,
    comparators: Option<ComparatorsRecord>,
    config: ConfigRecord,
    version: &'static str,
}

#[derive(Serialize)]
struct FunctionRecord {
    left_out: usize,
    a: Sig17,
    b: Sig17,
    sigma: Sig17,
    lambda: Sig17,
    centers: Vec<Sig17>,
    weights: Vec<Sig17>,
    values: Vec<Sig17>,
}

#[derive(Serialize)]
struct BandRecord {
    xs: Vec<Sig17>,
    mu: Vec<Sig17>,
    s: Vec<Sig17>,
    lower: Vec<Sig17>,
    upper: Vec<Sig17>,
    median: Vec<Sig17>,
}

#[derive(Serialize)]
struct LineRecord {
    a: Sig17,
    b: Sig17,
    values: Vec<Sig17>,
}

#[derive(Serialize)]
struct InterpolatorRecord {
    a: Sig17,
    b: Sig17,
    sigma: Sig17,
    centers: Vec<Sig17>,
    weights: Vec<Sig17>,
    roughness: Sig17,
    values: Vec<Sig17>,
}

#[derive(Serialize)]
struct ComparatorsRecord {
    g: LineRecord,
    h: InterpolatorRecord,
}

#[derive(Serialize)]
struct GridRecord {
    start: Sig17,
    end: Sig17,
    count: usize,
}

#[derive(Serialize)]
struct ConfigRecord {
    grid: GridRecord,
    lambda_lo: Sig17,
    lambda_hi: Sig17,
    lambda_points_per_decade: usize,
    sigma_lo_factor: Sig17,
    sigma_hi_factor: Sig17,
    sigma_grid_points: usize,
    refine_iterations: usize,
    emit: Vec<&'static str>,
}

fn values(f: &SpaghettiFunction, xs: &[f64]) -> Vec<Sig17> {
    xs.iter().map(|&x| Sig17(f.evaluate(x))).collect()
}

fn render_json(cfg: &RunConfig, e: &Ensemble, xs: &[f64]) -> Result<String, CliError> {
    let functions = cfg.emit.functions.then(|| {
        e.functions
            .iter()
            .map(|f| FunctionRecord {
                left_out: f.left_out.unwrap_or_default(),
                a: Sig17(f.line.a),
                b: Sig17(f.line.b),
                sigma: Sig17(f.sigma()),
                lambda: Sig17(f.lambda),
                centers: nums(f.basis.centers()),
                weights: nums(&f.weights),
                values: values(f, xs),
            })
            .collect()
    });
    let band = cfg.emit.band.then(|| {
        let b = band(e, xs);
        BandRecord {
            xs: nums(&b.xs),
            mu: nums(&b.mu),
            s: nums(&b.s),
            lower: nums(&b.lower),
            upper: nums(&b.upper),
            median: nums(&b.median),
        }
    });
    let comparators = cfg.emit.comparators.then(|| {
        let (g, h) = (&e.comparators.g, &e.comparators.h);
        ComparatorsRecord {
            g: LineRecord {
                a: Sig17(g.a),
                b: Sig17(g.b),
                values: xs.iter().map(|&x| Sig17(g.eval(x))).collect(),
            },
            h: InterpolatorRecord {
                a: Sig17(h.line.a),
                b: Sig17(h.line.b),
                sigma: Sig17(h.sigma()),
                centers: nums(h.basis.centers()),
                weights: nums(&h.weights),
                roughness: Sig17(h.roughness()),
                values: values(h, xs),
            },
        }
    });
    let doc = Document {
        points: e
            .series
            .points()
            .iter()
            .map(|&(x, y)| [Sig17(x), Sig17(y)])
            .collect(),
        functions,
        band,
        comparators,
        config: ConfigRecord {
            grid: GridRecord {
                start: Sig17(xs[0]),
                end: Sig17(xs[xs.len() - 1]),
                count: xs.len(),
            },
            lambda_lo: Sig17(cfg.fit.lambda_lo),
            lambda_hi: Sig17(cfg.fit.lambda_hi),
            lambda_points_per_decade: cfg.fit.lambda_points_per_decade,
            sigma_lo_factor: Sig17(cfg.fit.sigma_lo_factor),
            sigma_hi_factor: Sig17(cfg.fit.sigma_hi_factor),
            sigma_grid_points: cfg.fit.sigma_grid_points,
            refine_iterations: cfg.fit.refine_iterations,
            emit: cfg.emit.names(),
        },
        version: VERSION,
    };
    let mut out =
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

pub const BAND_CSV_HEADER: &str = "x,mu,s,lower,upper,median";

fn render_band_csv(e: &Ensemble, xs: &[f64]) -> String {
    let b = band(e, xs);
    let mut out = String::with_capacity(xs.len() * 140);
    out.push_str(BAND_CSV_HEADER);
    out.push('\n');
    for k in 0..b.len() {
        let row = [
            b.xs[k],
            b.mu[k],
            b.s[k],
            b.lower[k],
            b.upper[k],
            b.median[k],
        ];
        let cells: Vec<String> = row.iter().map(|&v| Sig17(v).to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

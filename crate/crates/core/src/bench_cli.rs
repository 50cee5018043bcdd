//! Benchmark harness: one run appends one CSV row.
//!
//! CSV columns, header written once per file:
//!
//! ```text
//! implement,problem,coloring,optimize,setup,reverse,onepass,n,m,nnz,visits,sec
//! ```
//!
//! `sec` is the minimum over `--repeat` runs of the wall time of one
//! evaluation. With `--setup` the timed region also covers sparsity,
//! coloring, subgraph construction and pruning.

use std::ffi::OsString;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

use crate::drivers::{
    sparse_hessian_with_stats, sparse_jacobian_with_stats, ColoringChoice, DriverStats, Method,
    MethodConfig, PreparedHessian, PreparedJacobian, SparseMatrixValues,
};
use crate::error::{Error, Result};
use crate::problems::{self, ProblemKind, ProblemSpec};

pub const CSV_HEADER: [&str; 12] = [
    "implement", "problem", "coloring", "optimize", "setup", "reverse", "onepass", "n", "m", "nnz",
    "visits", "sec",
];

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::ALL
        .into_iter()
        .find(|m| m.token() == s)
        .ok_or_else(|| format!("expected one of forward-compressed, reverse-compressed, subgraph; got '{s}'"))
}

fn parse_coloring(s: &str) -> std::result::Result<ColoringChoice, String> {
    match s {
        "greedy" => Ok(ColoringChoice::Greedy),
        "none" => Ok(ColoringChoice::None),
        _ => Err(format!("expected greedy or none; got '{s}'")),
    }
}

/// Sparse Jacobian / Hessian timing run.
#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "bench", version, about = "Time one sparse derivative method on a built-in problem")]
pub struct RunConfig {
    /// matvec, chain, grid or banded
    #[arg(long)]
    pub problem: String,
    /// n for matvec/chain/banded, grid side p for grid
    #[arg(long)]
    pub size: usize,
    /// forward-compressed, reverse-compressed or subgraph
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// greedy or none; defaults to greedy, or none for subgraph
    #[arg(long, value_parser = parse_coloring)]
    pub coloring: Option<ColoringChoice>,
    /// Remove dead nodes before setup
    #[arg(long)]
    pub optimize: bool,
    /// Include setup in the timed region
    #[arg(long)]
    pub setup: bool,
    /// Propagate all colors in one pass (compressed methods only)
    #[arg(long)]
    pub onepass: bool,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// CSV file to append to
    #[arg(long)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(problem: &str, size: usize, method: Method, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            problem: problem.into(),
            size,
            method,
            coloring: None,
            optimize: false,
            setup: false,
            onepass: false,
            repeat: 1,
            out: out.into(),
        }
    }

    pub fn method_config(&self) -> Result<MethodConfig> {
        let mut cfg = MethodConfig::new(self.method);
        if let Some(c) = self.coloring {
            cfg.coloring = c;
        }
        cfg.onepass = self.onepass;
        cfg.optimize = self.optimize;
        cfg.validate()?;
        if self.repeat == 0 {
            return Err(Error::Config("repeat must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub implement: Method,
    pub problem: String,
    pub coloring: ColoringChoice,
    pub optimize: bool,
    pub setup: bool,
    pub reverse: bool,
    pub onepass: bool,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub visits: usize,
    pub sec: f64,
}

impl CsvRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.implement.token().into(),
            self.problem.clone(),
            self.coloring.token().into(),
            self.optimize.to_string(),
            self.setup.to_string(),
            self.reverse.to_string(),
            self.onepass.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.nnz.to_string(),
            self.visits.to_string(),
            format!("{:.9}", self.sec),
        ]
    }
}

fn evaluate(spec: &ProblemSpec, cfg: MethodConfig, setup: bool, prepared: &Prepared) -> Result<(SparseMatrixValues, DriverStats)> {
    match (spec.kind, setup, prepared) {
        (ProblemKind::Jacobian, true, _) => sparse_jacobian_with_stats(&spec.graph, &spec.x0, cfg),
        (ProblemKind::Hessian, true, _) => sparse_hessian_with_stats(&spec.graph, &spec.x0, &spec.w, cfg),
        (_, false, Prepared::Jacobian(p)) => p.jacobian_with_stats(&spec.x0),
        (_, false, Prepared::Hessian(p)) => p.hessian_with_stats(&spec.x0),
        (_, false, Prepared::Nothing) => unreachable!("prepared before timing"),
    }
}

enum Prepared {
    Nothing,
    Jacobian(PreparedJacobian),
    Hessian(PreparedHessian),
}

/// Times one configuration without writing anything.
pub fn measure(cfg: &RunConfig) -> Result<CsvRow> {
    let mcfg = cfg.method_config()?;
    let spec = problems::by_name(&cfg.problem, cfg.size)?;
    let prepared = if cfg.setup {
        Prepared::Nothing
    } else {
        match spec.kind {
            ProblemKind::Jacobian => Prepared::Jacobian(PreparedJacobian::new(&spec.graph, mcfg)?),
            ProblemKind::Hessian => Prepared::Hessian(PreparedHessian::new(&spec.graph, &spec.w, mcfg)?),
        }
    };
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..cfg.repeat {
        let start = Instant::now();
        let out = evaluate(&spec, mcfg, cfg.setup, &prepared)?;
        best = best.min(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    let (values, stats) = last.expect("repeat >= 1");
    Ok(CsvRow {
        implement: cfg.method,
        problem: spec.name.into(),
        coloring: mcfg.coloring,
        optimize: cfg.optimize,
        setup: cfg.setup,
        reverse: cfg.method.is_reverse(),
        onepass: cfg.onepass,
        n: spec.n,
        m: spec.m,
        nnz: values.nnz(),
        visits: stats.visits,
        sec: best,
    })
}

/// Appends `row` to `path`, writing the header first if the file is new or
/// empty.
pub fn append_row(path: &Path, row: &CsvRow) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", path.display()));
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let empty = file.metadata().map_err(io)?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let csv_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    if empty {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    w.write_record(row.fields()).map_err(csv_err)?;
    w.flush().map_err(io)
}

/// Measures `cfg` and appends the row to `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<CsvRow> {
    let row = measure(cfg)?;
    append_row(&cfg.out, &row)?;
    Ok(row)
}

/// CLI entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cfg) {
        Ok(row) => {
            println!("{}", row.fields().join(","));
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub visits: usize,
    pub sec: f64,
}

/// One setup-included evaluation per size, recording sweep visits and time.
pub fn scaling_report(problem: &str, sizes: &[usize], method: Method) -> Result<Vec<ScalingRow>> {
    sizes
        .iter()
        .map(|&size| {
            let mut cfg = RunConfig::new(problem, size, method, PathBuf::new());
            cfg.setup = true;
            let row = measure(&cfg)?;
            Ok(ScalingRow {
                n: row.n,
                visits: row.visits,
                sec: row.sec,
            })
        })
        .collect()
}

/// `rows[k + 1].value / rows[k].value` for consecutive rows.
pub fn growth_ratios(rows: &[ScalingRow], value: impl Fn(&ScalingRow) -> f64) -> Vec<f64> {
    rows.windows(2).map(|w| value(&w[1]) / value(&w[0])).collect()
}

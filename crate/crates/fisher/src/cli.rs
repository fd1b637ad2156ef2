//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fisher_core::QuadratureSpec;

use crate::commands::{self, GeodesicRequest, Grid, KlRequest, MetricChoice};
use crate::error::{CliError, CliResult};
use crate::model::AnyModel;
use crate::output::{Document, Format};
use crate::reproduce;

#[derive(Debug, Parser)]
#[command(name = "fisher", version, about = "Generalised Fisher information toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub abs_tol: f64,

    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,

    /// Truncation multiplier for unbounded supports.
    #[arg(long, global = true, default_value_t = 12.0)]
    pub trunc_k: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn quadrature(&self) -> CliResult<QuadratureSpec> {
        let spec = QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            trunc_k: self.trunc_k,
            ..QuadratureSpec::default()
        };
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Distribution, e.g. `normal:mu=0,sigma=1` or `exponential:rate=2`.
    #[arg(long, default_value = "normal:mu=0,sigma=1")]
    pub dist: String,

    /// Parameter by name or index (defaults to the first).
    #[arg(long)]
    pub param: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> CliResult<(AnyModel, usize)> {
        let model: AnyModel = self.dist.parse()?;
        let idx = match &self.param {
            Some(p) => model.param_index(p)?,
            None => 0,
        };
        Ok((model, idx))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar hierarchy members I_n and the generating functional.
    Hierarchy {
        #[command(flatten)]
        model: ModelArgs,
        /// Orders as a range `1..4` or a list `1,3`.
        #[arg(long, default_value = "1..4", value_parser = parse_orders)]
        orders: Orders,
        /// Generating-functional parameters (comma-separated).
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Terms kept in the hierarchy series.
        #[arg(long, default_value_t = 8)]
        nmax: u32,
    },
    /// Generalised Cramér-Rao inequality with the identity estimator.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "1..4", value_parser = parse_orders)]
        order: Orders,
    },
    /// Kullback-Leibler divergence under a parameter shift.
    Kl {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        shift: f64,
        /// Density power q of the two-parameter divergence.
        #[arg(long, requires = "qprime")]
        q: Option<f64>,
        /// Log power q' of the two-parameter divergence.
        #[arg(long, requires = "q")]
        qprime: Option<f64>,
        /// Shifts to sweep (comma-separated); reports the D/Delta^2 limit.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sweep: Vec<f64>,
        /// Also report the Fisher matrix as the Hessian of the divergence.
        #[arg(long)]
        hessian: bool,
    },
    /// Matrix hierarchy [I_n] over all parameters.
    Matrix {
        #[arg(long, default_value = "normal:mu=0,sigma=1")]
        dist: String,
        #[arg(long, default_value = "1..2", value_parser = parse_orders)]
        order: Orders,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        nmax: u32,
    },
    /// Curvature of a metric over a grid of the (mu, sigma) half-plane.
    Curvature {
        /// `i1`, `i1-unscaled`, `i2` or `numeric:<n>`.
        #[arg(long, default_value = "i1")]
        metric: MetricChoice,
        /// Family of the numeric metric.
        #[arg(long, default_value = "normal")]
        dist: String,
        /// Grid size `NxM`.
        #[arg(long, default_value = "5x5", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.5)]
        y_min: f64,
        #[arg(long, default_value_t = 4.0)]
        y_max: f64,
    },
    /// Geodesic from an initial state `x,y,dx,dy`.
    Geodesic {
        #[arg(long, default_value = "i1-unscaled")]
        metric: MetricChoice,
        #[arg(long, default_value = "normal")]
        dist: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        start: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Keep every n-th state of the path in the output.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Recompute every regression claim and report pass/fail.
    Reproduce,
}

/// Hierarchy orders, parsed from `a..b` (inclusive) or `a,b,c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orders(pub Vec<u32>);

pub fn parse_orders(s: &str) -> Result<Orders, String> {
    let orders: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u32, u32) = (
            a.trim().parse().map_err(|_| format!("bad range start in '{s}'"))?,
            b.trim().parse().map_err(|_| format!("bad range end in '{s}'"))?,
        );
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| format!("bad order '{t}'")))
            .collect::<Result<_, _>>()?
    };
    if orders.is_empty() || orders.contains(&0) {
        return Err(format!("orders must be a non-empty set of integers >= 1, got '{s}'"));
    }
    Ok(Orders(orders))
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like NxM, got '{s}'"))?;
    match (a.trim().parse::<usize>(), b.trim().parse::<usize>()) {
        (Ok(nx), Ok(ny)) if nx > 0 && ny > 0 => Ok((nx, ny)),
        _ => Err(format!("grid must look like NxM with positive sizes, got '{s}'")),
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<Document> {
    let spec = cli.global.quadrature()?;
    match &cli.command {
        Command::Hierarchy {
            model,
            orders,
            lambda,
            nmax,
        } => {
            let (m, i) = model.resolve()?;
            commands::hierarchy(&m, i, &orders.0, lambda, *nmax, &spec)
        }
        Command::Bound { model, order } => {
            let (m, i) = model.resolve()?;
            commands::bound(&m, i, &order.0, &spec)
        }
        Command::Kl {
            model,
            shift,
            q,
            qprime,
            sweep,
            hessian,
        } => {
            let (m, i) = model.resolve()?;
            let req = KlRequest {
                param: i,
                shift: *shift,
                two_param: q.zip(*qprime),
                sweep: sweep.clone(),
                hessian: *hessian,
            };
            commands::kl_divergence(&m, &req, &spec)
        }
        Command::Matrix {
            dist,
            order,
            lambda,
            nmax,
        } => commands::matrix(&dist.parse()?, &order.0, lambda, *nmax, &spec),
        Command::Curvature {
            metric,
            dist,
            grid,
            x_min,
            x_max,
            y_min,
            y_max,
        } => {
            let grid = Grid {
                nx: grid.0,
                ny: grid.1,
                x_range: (*x_min, *x_max),
                y_range: (*y_min, *y_max),
            };
            commands::curvature_grid(*metric, &dist.parse()?, &grid, &spec)
        }
        Command::Geodesic {
            metric,
            dist,
            start,
            length,
            step,
            every,
        } => {
            let start: [f64; 4] = start.as_slice().try_into().map_err(|_| {
                CliError::Usage(format!("--start needs exactly four values x,y,dx,dy, got {}", start.len()))
            })?;
            let req = GeodesicRequest {
                metric: *metric,
                start,
                length: *length,
                step: *step,
                every: *every,
            };
            commands::geodesic_path(&dist.parse()?, &req, &spec)
        }
        Command::Reproduce => {
            let report = reproduce::run(&spec);
            let doc = report.to_document();
            let failed = report.failures().count();
            if failed > 0 {
                // the document is still written; the exit status carries the failure
                emit(&doc, &cli.global)?;
                for c in report.failures() {
                    eprintln!("claim {} failed: expected {} got {}", c.id, c.expected, c.computed);
                }
                return Err(CliError::ClaimsFailed {
                    failed,
                    total: report.claims.len(),
                });
            }
            Ok(doc)
        }
    }
}

fn emit(doc: &Document, global: &GlobalArgs) -> CliResult<()> {
    let text = doc.render(global.format)?;
    match &global.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on computation failure, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|doc| emit(&doc, &cli.global)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fisher: {e}");
            e.exit_code()
        }
    }
}


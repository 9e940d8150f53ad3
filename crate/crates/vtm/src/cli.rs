//! The `vtm` command line.
//!
//! Exit codes: 0 success, 1 numerical failure during setup, 2 usage or
//! input error, 3 divergence, 4 iteration limit.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vtm_core::report::StopReason;
use vtm_core::vtm::{build_preconditioner_with, Pairing, PreconditionerSpec};
use vtm_core::{LinearSystem, Sequential};

use crate::bench::{self, BenchPlan};
use crate::error::{read_file, write_file, FormatError};
use crate::mm::{self, Symmetry};
use crate::parallel::Parallel;
use crate::partition_io;
use crate::solver::{self, InterfaceChoice, Method, SolveConfig};
use crate::systems::{Meta, Source, META_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "vtm", version, about = "Virtual transmission method solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test system as A.mtx, b.mtx and meta.json.
    Gen(GenArgs),
    /// Tear a system and write the partition and admittance blocks.
    Tear(TearArgs),
    /// Solve with VTM or a baseline.
    Solve(SolveArgs),
    /// Report the 2-part convergence analysis as JSON.
    Analyze(AnalyzeArgs),
    /// Run a benchmark sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Grid2d,
    Grid3d,
    Opamp,
    Netlist,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub nz: Option<usize>,
    /// Node count of a random network.
    #[arg(long, default_value_t = 500)]
    pub nodes: usize,
    #[arg(long, default_value_t = vtm_core::netgen::DEFAULT_BRANCH_G)]
    pub branch: f64,
    #[arg(long, default_value_t = vtm_core::netgen::DEFAULT_GROUND_G)]
    pub ground: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Netlist to assemble (with `--kind netlist`).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Vtm,
    Jacobi,
    Gs,
    Sgs,
    Sor,
    Ssor,
    Bj,
    Obj,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Vtm => Method::Vtm,
            MethodArg::Jacobi => Method::Jacobi,
            MethodArg::Gs => Method::Gs,
            MethodArg::Sgs => Method::Sgs,
            MethodArg::Sor => Method::Sor,
            MethodArg::Ssor => Method::Ssor,
            MethodArg::Bj => Method::Bj,
            MethodArg::Obj => Method::Obj,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PrecondArg {
    Scalar,
    Diag,
    Ob,
    Wob,
    Sca,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PairingArg {
    Matched,
    PerEnd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Bfs,
    Geometric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchedulerArg {
    Seq,
    Par,
}

/// Where the system comes from.
#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Matrix Market file, or a generator name such as `grid2d:40x40`.
    #[arg(long)]
    pub matrix: String,
    /// Right-hand side; seeded from `--seed` when absent.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl SystemArgs {
    fn load(&self) -> Result<LinearSystem, CliError> {
        let mut src = Source::parse(&self.matrix, self.seed)?;
        if let Source::File { rhs, .. } = &mut src {
            rhs.clone_from(&self.rhs);
        } else if self.rhs.is_some() {
            return Err(CliError::Usage("--rhs only applies to matrix files".into()));
        }
        let sys = src.build()?;
        log::info!("{}: n = {}, nnz = {}, symmetric = {}", sys.tag, sys.n(), sys.a.nnz(), sys.symmetric);
        Ok(sys)
    }
}

/// Partition and preconditioner selection shared by tear, solve and analyze.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 2)]
    pub parts: usize,
    #[arg(long, value_enum, default_value_t = PrecondArg::Ob)]
    pub precond: PrecondArg,
    /// Scale of `scalar` (default 1) and `wob` (default 0.5).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// SCA neighbourhood depth.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// SCA relative drop tolerance.
    #[arg(long, default_value_t = 0.01)]
    pub drop: f64,
    #[arg(long, value_enum, default_value_t = PairingArg::Matched)]
    pub pairing: PairingArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// Interfacial nodes, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub interface: Vec<usize>,
    /// Manual admittance `node=value` (1-based node) for that node's wires;
    /// the node becomes interfacial.
    #[arg(long = "wire-w", value_parser = parse_wire_w)]
    pub wire_w: Vec<(usize, f64)>,
    #[arg(long, default_value_t = vtm_core::report::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

fn parse_wire_w(s: &str) -> Result<(usize, f64), String> {
    let (n, v) = s.split_once('=').ok_or_else(|| format!("expected node=value, got '{s}'"))?;
    let node: usize = n.trim().parse().map_err(|_| format!("bad node '{n}'"))?;
    let value: f64 = v.trim().parse().map_err(|_| format!("bad value '{v}'"))?;
    if node == 0 {
        return Err("nodes are 1-based".into());
    }
    Ok((node, value))
}

fn zero_based(nodes: &[usize], n: usize) -> Result<Vec<usize>, CliError> {
    nodes
        .iter()
        .map(
            |&v| {
                if v == 0 || v > n {
                    Err(CliError::Usage(format!("node {v} is outside 1..={n}")))
                } else {
                    Ok(v - 1)
                }
            },
        )
        .collect()
}

impl ConfigArgs {
    fn precond(&self) -> PreconditionerSpec {
        match self.precond {
            PrecondArg::Scalar => PreconditionerSpec::ScalarIdentity { alpha: self.alpha.unwrap_or(1.0) },
            PrecondArg::Diag => PreconditionerSpec::Diagonal,
            PrecondArg::Ob => PreconditionerSpec::OverlappedBlock,
            PrecondArg::Wob => PreconditionerSpec::WeightedOverlappedBlock { alpha: self.alpha.unwrap_or(0.5) },
            PrecondArg::Sca => PreconditionerSpec::SchurApprox { depth: self.depth, drop: self.drop },
        }
    }

    fn config(&self, n: usize) -> Result<SolveConfig, CliError> {
        let wire_nodes: Vec<usize> = self.wire_w.iter().map(|&(v, _)| v).collect();
        let wire_nodes = zero_based(&wire_nodes, n)?;
        Ok(SolveConfig {
            parts: self.parts,
            precond: self.precond(),
            pairing: match self.pairing {
                PairingArg::Matched => Pairing::Matched,
                PairingArg::PerEnd => Pairing::PerEnd,
            },
            tol: self.tol,
            max_iter: self.max_iter,
            interface_choice: match self.strategy {
                StrategyArg::Auto => InterfaceChoice::Auto,
                StrategyArg::Bfs => InterfaceChoice::Bfs,
                StrategyArg::Geometric => InterfaceChoice::Geometric,
            },
            interface: zero_based(&self.interface, n)?,
            wire_w: wire_nodes.into_iter().zip(self.wire_w.iter().map(|&(_, w)| w)).collect(),
            ..SolveConfig::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct TearArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory for partition.txt and the admittance blocks.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Vtm)]
    pub method: MethodArg,
    #[arg(long, default_value_t = vtm_core::baselines::DEFAULT_OMEGA)]
    pub omega: f64,
    /// OBJ overlap beyond the shared interface, in graph layers.
    #[arg(long, default_value_t = 0)]
    pub overlap: usize,
    /// Partition file written by `vtm tear`.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Seq)]
    pub scheduler: SchedulerArg,
    /// Worker threads of the parallel scheduler (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Solution vector (Matrix Market array).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Report JSON; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Systems: generator names or Matrix Market files, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub matrix: Vec<String>,
    /// Part counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub parts: Vec<usize>,
    /// Methods such as `vtm_ob,bj,gs`; all of them when absent.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.01)]
    pub drop: f64,
    #[arg(long, default_value_t = vtm_core::baselines::DEFAULT_OMEGA)]
    pub omega: f64,
    #[arg(long, default_value_t = 0)]
    pub overlap: usize,
    #[arg(long, value_enum, default_value_t = PairingArg::Matched)]
    pub pairing: PairingArg,
    #[arg(long, default_value_t = vtm_core::report::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Configurations run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Compute the convergence factor of 2-part VTM rows.
    #[arg(long)]
    pub cf: bool,
    /// Write 0 in the seconds column so the CSV is reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Core(c) => c.into(),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<vtm_core::Error> for CliError {
    fn from(e: vtm_core::Error) -> Self {
        use vtm_core::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::InvalidLabels(_)
            | E::DimensionMismatch { .. }
            | E::NonFinite(_)
            | E::InvalidStructure(_) => Self::Usage(e.to_string()),
            other => Self::Failure(other.to_string()),
        }
    }
}

fn json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
    match path {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

fn cmd_gen(a: &GenArgs) -> Result<i32, CliError> {
    let (b, g) = (a.branch, a.ground);
    let src = match a.kind {
        Kind::Grid2d => {
            Source::Grid2d { nx: a.nx.unwrap_or(100), ny: a.ny.unwrap_or(100), branch: b, ground: g, seed: a.seed }
        }
        Kind::Grid3d => Source::Grid3d {
            nx: a.nx.unwrap_or(30),
            ny: a.ny.unwrap_or(30),
            nz: a.nz.unwrap_or(30),
            branch: b,
            ground: g,
            seed: a.seed,
        },
        Kind::Opamp => Source::Opamp,
        Kind::Random => Source::Random { nodes: a.nodes, seed: a.seed },
        Kind::Netlist => Source::Netlist {
            file: a.file.clone().ok_or_else(|| CliError::Usage("--kind netlist needs --file".into()))?,
        },
    };
    let sys = src.build()?;
    ensure_dir(&a.out)?;
    let sym = if sys.symmetric { Symmetry::Symmetric } else { Symmetry::General };
    write_file(&a.out.join("A.mtx"), &mm::write_matrix(&sys.a, sym))?;
    write_file(&a.out.join("b.mtx"), &mm::write_vector(&sys.b))?;
    json(&Meta::new(&src, &sys, "A.mtx", "b.mtx"), Some(&a.out.join(META_FILE)))?;
    println!("{}: n = {}, nnz = {} -> {}", sys.tag, sys.n(), sys.a.nnz(), a.out.display());
    Ok(EXIT_OK)
}

fn cmd_tear(a: &TearArgs) -> Result<i32, CliError> {
    let sys = a.system.load()?;
    let cfg = a.config.config(sys.n())?;
    let p = solver::partition_for(&sys, &cfg)?;
    let w = build_preconditioner_with(&cfg.precond, cfg.pairing, &p)?.with_overrides(&p, &cfg.wire_w)?;
    ensure_dir(&a.out)?;
    write_file(&a.out.join("partition.txt"), &partition_io::write_partition(&p))?;
    let files = partition_io::write_admittances(&a.out, &w)?;
    let sizes: Vec<usize> = p.subdomains.iter().map(|s| s.len()).collect();
    println!(
        "{} parts {:?}, {} interfacial nodes, {} wires, {} admittance files -> {}",
        p.n_parts(),
        sizes,
        p.interface().len(),
        p.wires.len(),
        files.len(),
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_solve(a: &SolveArgs) -> Result<i32, CliError> {
    let sys = a.system.load()?;
    let mut cfg = a.config.config(sys.n())?;
    cfg.method = a.method.into();
    cfg.omega = a.omega;
    cfg.overlap = a.overlap;
    let partition = match &a.partition {
        Some(path) => Some(partition_io::load_partition(&sys, &partition_io::parse_partition(&read_file(path)?)?)?),
        None => None,
    };
    let out = match a.scheduler {
        SchedulerArg::Seq => solver::run_with(&sys, &cfg, partition, &Sequential)?,
        SchedulerArg::Par => {
            let par = Parallel::new(a.threads).map_err(|e| CliError::Failure(e.to_string()))?;
            solver::run_with(&sys, &cfg, partition, &par)?
        }
    };
    log::info!("{} {}: {:?} after {} iterations", out.method.name(), out.precond, out.stop, out.iterations);
    if let Some(path) = &a.out {
        write_file(path, &mm::write_vector(&out.x))?;
    }
    json(&out, a.report.as_deref())?;
    Ok(match out.stop {
        StopReason::Converged => EXIT_OK,
        StopReason::Diverged => EXIT_DIVERGED,
        StopReason::MaxIterations => EXIT_MAX_ITER,
    })
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<i32, CliError> {
    let sys = a.system.load()?;
    let cfg = a.config.config(sys.n())?;
    let rep = solver::analyze(&sys, &cfg)?;
    json(&rep, a.report.as_deref())?;
    Ok(EXIT_OK)
}

fn bench_cells(a: &BenchArgs) -> Result<Vec<SolveConfig>, CliError> {
    let base = SolveConfig {
        omega: a.omega,
        overlap: a.overlap,
        tol: a.tol,
        max_iter: a.max_iter,
        pairing: match a.pairing {
            PairingArg::Matched => Pairing::Matched,
            PairingArg::PerEnd => Pairing::PerEnd,
        },
        ..SolveConfig::default()
    };
    let all = bench::default_cells(&base, a.alpha, a.depth, a.drop);
    if a.methods.is_empty() {
        return Ok(all);
    }
    let mut cells = Vec::new();
    for m in &a.methods {
        let cell = match m.as_str() {
            "vtm_scalar" => {
                SolveConfig { precond: PreconditionerSpec::ScalarIdentity { alpha: a.alpha }, ..base.clone() }
            }
            _ => all
                .iter()
                .find(|c| {
                    let name = if c.method == Method::Vtm {
                        format!("vtm_{}", c.precond.name())
                    } else {
                        c.method.name().into()
                    };
                    name == *m
                })
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("unknown method '{m}'")))?,
        };
        cells.push(cell);
    }
    Ok(cells)
}

fn cmd_bench(a: &BenchArgs) -> Result<i32, CliError> {
    let names: Vec<&String> = a.matrix.iter().filter(|m| !m.trim().is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::Usage("no matrices given".into()));
    }
    if a.parts.is_empty() || a.parts.contains(&0) {
        return Err(CliError::Usage("part counts must be positive".into()));
    }
    let systems: Vec<LinearSystem> =
        names.iter().map(|m| Source::parse(m, a.seed).and_then(|s| s.build())).collect::<Result<_, _>>()?;
    let plan = BenchPlan { cells: bench_cells(a)?, parts: a.parts.clone(), cf: a.cf, timing: !a.no_timing };
    let rows = bench::run(&systems, &plan, a.jobs).map_err(|e| CliError::Failure(e.to_string()))?;
    let csv = bench::to_csv(&rows);
    match &a.out {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(if rows.iter().any(|r| r.converged) { EXIT_OK } else { EXIT_FAILURE })
}

/// Runs the command line on `args` (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Tear(a) => cmd_tear(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Installs the `VTM_LOG` controlled logger (default `warn`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("VTM_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

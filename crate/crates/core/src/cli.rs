//! Command-line front end shared by the `taylor-lcu` binary and tests.
//!
//! Subcommands: `simulate`, `analytic`, `sweep`, `resources`, `bliss`. Each
//! writes one table of flat records as CSV or JSON. Exit status is 0 on
//! success, 1 for usage errors and 2 for runtime failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bliss::{self, FermionicOperator, ShiftFamily};
use crate::circuits::{build_w_tilde, build_w_tilde_order, build_w_unary, CircuitPlan};
use crate::error::{Error, Result};
use crate::hamiltonian::{ceil_log2, Hamiltonian};
use crate::oracle;
use crate::output::{emit, Format, Record};
use crate::resources::{resource_row, ResourceRow};
use crate::sampler::{run_shots, CostModel};
use crate::statevector::{check_normalized, STATE_CAP};
use crate::c64;

#[derive(Debug, Parser)]
#[command(name = "taylor-lcu", version, about = "Truncated Taylor series LCU simulation, analytics and resource counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample shots of one circuit and report success statistics.
    Simulate(SimulateArgs),
    /// Closed-form success probabilities and runtimes.
    Analytic(AnalyticArgs),
    /// Sampled vs analytic success probability for increasing truncation order.
    Sweep(SweepArgs),
    /// Gate counts of both circuit families.
    Resources(ResourcesArgs),
    /// Minimize ‖α‖₁ of a fermionic Hamiltonian with the particle-number shift.
    Bliss(BlissArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CircuitChoice {
    #[default]
    Wtilde,
    Wunary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FormatChoice {
    #[default]
    Csv,
    Json,
}

impl From<FormatChoice> for Format {
    fn from(f: FormatChoice) -> Self {
        match f {
            FormatChoice::Csv => Format::Csv,
            FormatChoice::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    Scalar,
    Diagonal,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct HamiltonianArgs {
    /// Hamiltonian JSON file.
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    pub hamiltonian: Option<PathBuf>,
    /// Built-in model.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Sites of the model.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Ising coupling.
    #[arg(long = "J", default_value_t = 1.0)]
    pub j: f64,
    /// Transverse field.
    #[arg(long = "h", default_value_t = 0.5)]
    pub h: f64,
    /// Initial system state: 2^n lines of `re im` (default |0…0⟩).
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatChoice::Csv)]
    pub format: FormatChoice,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    /// Cost of one uncontrolled block encoding.
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// Cost of one controlled block encoding.
    #[arg(long = "d-ctrl", default_value_t = 1.0)]
    pub d_ctrl: f64,
    /// Cost of one measurement.
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    /// Width of the binary k-register; `K = 2^κ − 1`.
    #[arg(long, conflicts_with = "order")]
    pub kappa: Option<usize>,
    /// Truncation order `K`.
    #[arg(long = "K", id = "order", value_name = "K")]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub hamiltonian: HamiltonianArgs,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[command(flatten)]
    pub order: OrderArgs,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CircuitChoice::Wtilde)]
    pub circuit: CircuitChoice,
    #[command(flatten)]
    pub cost: CostArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub hamiltonian: HamiltonianArgs,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[command(flatten)]
    pub order: OrderArgs,
    #[arg(long, value_enum, default_value_t = CircuitChoice::Wtilde)]
    pub circuit: CircuitChoice,
    #[command(flatten)]
    pub cost: CostArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub hamiltonian: HamiltonianArgs,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Largest κ for `wtilde` (rows κ = 1..=max).
    #[arg(long = "kappa-max", conflicts_with = "k_max")]
    pub kappa_max: Option<usize>,
    /// Largest K for `wunary` (rows K = 1..=max).
    #[arg(long = "K-max", id = "k_max", value_name = "K")]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CircuitChoice::Wtilde)]
    pub circuit: CircuitChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ResourcesArgs {
    #[command(flatten)]
    pub hamiltonian: HamiltonianArgs,
    /// Rows for K = 1..=max in both families.
    #[arg(long = "K-max", value_name = "K", default_value_t = 7)]
    pub k_max: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BlissArgs {
    /// Integral file (`NORB=… NELEC=…` header, then `value i j k l` lines).
    #[arg(long, value_name = "FILE")]
    pub integrals: PathBuf,
    /// Override the electron count from the file header.
    #[arg(long)]
    pub nelec: Option<usize>,
    #[arg(long, value_enum, default_value_t = FamilyChoice::Full)]
    pub family: FamilyChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Errors split by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

type CmdResult<T> = std::result::Result<T, Failure>;

impl HamiltonianArgs {
    fn load(&self) -> CmdResult<Arc<Hamiltonian>> {
        let h = match (&self.hamiltonian, self.model) {
            (Some(path), None) => Hamiltonian::load(path)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?,
            (None, Some(Model::Ising)) => Hamiltonian::ising(self.n, self.j, self.h)?,
            (None, None) => return usage("give either --hamiltonian FILE or --model ising"),
            (Some(_), Some(_)) => return usage("--hamiltonian and --model are mutually exclusive"),
        };
        Ok(Arc::new(h))
    }

    fn initial_state(&self, n: usize) -> CmdResult<Vec<c64>> {
        if n > STATE_CAP {
            return Err(Error::ResourceLimit { what: "system state", qubits: n, cap: STATE_CAP }.into());
        }
        match &self.state {
            Some(path) => Ok(read_state(path, n)?),
            None => {
                let mut v = vec![c64::new(0.0, 0.0); 1 << n];
                v[0] = c64::new(1.0, 0.0);
                Ok(v)
            }
        }
    }
}

/// Reads `2^n` lines of `re im`; blank lines and `#` comments are skipped.
pub fn read_state(path: &Path, n: usize) -> Result<Vec<c64>> {
    let text = fs::read_to_string(path)?;
    let mut amps = Vec::with_capacity(1 << n);
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: no + 1, message: format!("{e}") })?;
        if parts.len() != 2 {
            return Err(Error::Parse { line: no + 1, message: "expected two reals: re im".into() });
        }
        amps.push(c64::new(parts[0], parts[1]));
    }
    if amps.len() != 1 << n {
        return Err(Error::LayoutMismatch(format!("state file has {} amplitudes, need {}", amps.len(), 1 << n)));
    }
    check_normalized(&amps)?;
    Ok(amps)
}

impl CostArgs {
    fn model(&self) -> CmdResult<CostModel> {
        CostModel::new(self.d, self.d_ctrl, self.m).or_else(|e| usage(e.to_string()))
    }
}

/// Resolves `(K, κ)` from `--kappa`/`--K`; for `W̃` the order must be `2^κ − 1`.
fn resolve_order(order: &OrderArgs, circuit: CircuitChoice) -> CmdResult<(usize, Option<usize>)> {
    match (order.kappa, order.order, circuit) {
        (Some(k), None, CircuitChoice::Wtilde) if (1..=20).contains(&k) => Ok(((1 << k) - 1, Some(k))),
        (Some(k), None, CircuitChoice::Wunary) if (1..=5).contains(&k) => Ok(((1 << k) - 1, None)),
        (Some(k), None, _) => usage(format!("--kappa {k} out of range")),
        (None, Some(big_k), CircuitChoice::Wtilde) => {
            let kappa = ceil_log2(big_k + 1);
            if big_k == 0 || (1usize << kappa) - 1 != big_k {
                return usage(format!("wtilde needs K = 2^κ − 1, got K = {big_k}"));
            }
            Ok((big_k, Some(kappa)))
        }
        (None, Some(big_k), CircuitChoice::Wunary) if big_k >= 1 => Ok((big_k, None)),
        (None, Some(big_k), _) => usage(format!("K must be at least 1, got {big_k}")),
        (None, None, _) => usage("give --kappa or --K"),
        (Some(_), Some(_), _) => usage("--kappa and --K are mutually exclusive"),
    }
}

fn build(h: &Arc<Hamiltonian>, tau: f64, order: usize, kappa: Option<usize>) -> Result<CircuitPlan> {
    match kappa {
        Some(k) => build_w_tilde(h.clone(), tau, k),
        None => build_w_unary(h.clone(), tau, order),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRecord {
    pub circuit: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa: Option<usize>,
    pub tau: f64,
    pub seed: u64,
    pub shots: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub abort_histogram: String,
    pub mean_cost: f64,
    pub cost_per_success: f64,
}

impl Record for SimulateRecord {
    const COLUMNS: &'static [&'static str] = &[
        "circuit",
        "K",
        "kappa",
        "tau",
        "seed",
        "shots",
        "successes",
        "p_hat",
        "stderr",
        "abort_histogram",
        "mean_cost",
        "cost_per_success",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRecord {
    pub circuit: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa: Option<usize>,
    pub tau: f64,
    pub alpha_norm: f64,
    pub beta_norm: f64,
    pub lambda0: f64,
    pub p1: f64,
    pub p_hk: f64,
    pub spectral_bound: f64,
    pub p_success: f64,
    pub runtime_midmeasure: f64,
    pub runtime_success: f64,
    pub runtime_deferred: f64,
    pub runtime_bound: f64,
}

impl Record for AnalyticRecord {
    const COLUMNS: &'static [&'static str] = &[
        "circuit",
        "K",
        "kappa",
        "tau",
        "alpha_norm",
        "beta_norm",
        "lambda0",
        "p1",
        "p_hk",
        "spectral_bound",
        "p_success",
        "runtime_midmeasure",
        "runtime_success",
        "runtime_deferred",
        "runtime_bound",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa: Option<usize>,
    pub shots: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub p_analytic: f64,
}

impl Record for SweepRow {
    const COLUMNS: &'static [&'static str] = &["K", "kappa", "shots", "successes", "p_hat", "stderr", "p_analytic"];
}

impl Record for ResourceRow {
    const COLUMNS: &'static [&'static str] = &["family", "K", "kappa", "qubits", "two_qubit", "measurements"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlissRecord {
    pub n_orb: usize,
    pub n_electrons: usize,
    pub alpha_norm_before: f64,
    pub alpha_norm_after: f64,
    pub terms_before: usize,
    pub terms_after: usize,
    pub p_before: f64,
    pub p_after: f64,
    pub xi0: f64,
    pub xi_diagonal: String,
    pub family: &'static str,
    pub sweeps: usize,
    pub converged: bool,
}

impl Record for BlissRecord {
    const COLUMNS: &'static [&'static str] = &[
        "n_orb",
        "n_electrons",
        "alpha_norm_before",
        "alpha_norm_after",
        "terms_before",
        "terms_after",
        "p_before",
        "p_after",
        "xi0",
        "xi_diagonal",
        "family",
        "sweeps",
        "converged",
    ];
}

fn check_shots(shots: u64) -> CmdResult<()> {
    if shots == 0 {
        return usage("--shots must be at least 1");
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> CmdResult<Vec<SimulateRecord>> {
    check_shots(a.shots)?;
    let (order, kappa) = resolve_order(&a.order, a.circuit)?;
    let cost = a.cost.model()?;
    let h = a.hamiltonian.load()?;
    let psi = a.hamiltonian.initial_state(h.n_qubits())?;
    let plan = build(&h, a.tau, order, kappa)?;
    let stats = run_shots(&plan, &psi, a.shots, a.seed, &cost)?;
    let (p_hat, stderr) = stats.estimate();
    Ok(vec![SimulateRecord {
        circuit: plan.family.name(),
        k: order,
        kappa,
        tau: a.tau,
        seed: a.seed,
        shots: stats.shots,
        successes: stats.successes,
        p_hat,
        stderr,
        abort_histogram: stats.histogram_string(),
        mean_cost: stats.mean_cost_per_shot(),
        cost_per_success: stats.cost_per_success(),
    }])
}

pub fn analytic(a: &AnalyticArgs) -> CmdResult<Vec<AnalyticRecord>> {
    let (order, kappa) = resolve_order(&a.order, a.circuit)?;
    let cost = a.cost.model()?;
    let h = a.hamiltonian.load()?;
    let psi = a.hamiltonian.initial_state(h.n_qubits())?;
    let taylor = crate::circuits::TaylorCoefficients::new(a.tau, h.l1_norm(), order)?;
    let chain = oracle::chain_probabilities(&h, &psi, order)?;
    let mut padded = chain.clone();
    padded.resize(order, 0.0);
    let d_ctrl = cost.d_ctrl + cost.m;
    Ok(vec![AnalyticRecord {
        circuit: match a.circuit {
            CircuitChoice::Wtilde => "wtilde",
            CircuitChoice::Wunary => "wunary",
        },
        k: order,
        kappa,
        tau: a.tau,
        alpha_norm: h.l1_norm(),
        beta_norm: taylor.beta_norm,
        lambda0: oracle::spectral_info(&h)?.lambda0,
        p1: chain[0],
        p_hk: oracle::success_prob_hk(&h, &psi, order)?,
        spectral_bound: oracle::spectral_lower_bound(&h, order)?,
        p_success: oracle::success_prob_wtilde(&h, &psi, a.tau, order)?,
        runtime_midmeasure: oracle::expected_runtime_midmeasure(&padded, cost.d + cost.m)?,
        runtime_success: oracle::total_runtime_success(&padded, cost.d + cost.m)?,
        runtime_deferred: oracle::total_runtime_deferred(&padded, cost.d + cost.m)?,
        runtime_bound: oracle::runtime_upper_bound(&h, &psi, a.tau, order, d_ctrl)?,
    }])
}

pub fn sweep(a: &SweepArgs) -> CmdResult<Vec<SweepRow>> {
    check_shots(a.shots)?;
    let h = a.hamiltonian.load()?;
    let psi = a.hamiltonian.initial_state(h.n_qubits())?;
    let points: Vec<(usize, Option<usize>)> = match (a.circuit, a.kappa_max, a.k_max) {
        (CircuitChoice::Wtilde, Some(m), None) if (1..=20).contains(&m) => {
            (1..=m).map(|k| ((1usize << k) - 1, Some(k))).collect()
        }
        (CircuitChoice::Wtilde, None, None) => (1..=3).map(|k| ((1usize << k) - 1, Some(k))).collect(),
        (CircuitChoice::Wunary, None, Some(m)) if m >= 1 => (1..=m).map(|k| (k, None)).collect(),
        (CircuitChoice::Wunary, None, None) => (1..=3).map(|k| (k, None)).collect(),
        (CircuitChoice::Wtilde, _, Some(_)) => return usage("wtilde sweeps take --kappa-max"),
        (CircuitChoice::Wunary, Some(_), _) => return usage("wunary sweeps take --K-max"),
        _ => return usage("sweep bound must be at least 1"),
    };
    let mut rows = Vec::with_capacity(points.len());
    for (order, kappa) in points {
        let plan = build(&h, a.tau, order, kappa)?;
        let stats = run_shots(&plan, &psi, a.shots, a.seed, &CostModel::default())?;
        let (p_hat, stderr) = stats.estimate();
        rows.push(SweepRow {
            k: order,
            kappa,
            shots: stats.shots,
            successes: stats.successes,
            p_hat,
            stderr,
            p_analytic: oracle::success_prob_wtilde(&h, &psi, a.tau, order)?,
        });
    }
    Ok(rows)
}

pub fn resources(a: &ResourcesArgs) -> CmdResult<Vec<ResourceRow>> {
    if a.k_max == 0 || a.k_max > 20 {
        return usage("--K-max must be in 1..=20");
    }
    let h = a.hamiltonian.load()?;
    let mut rows = Vec::new();
    for k in 1..=a.k_max {
        rows.push(resource_row(&build_w_tilde_order(h.clone(), 0.05, k)?)?);
    }
    for k in 1..=a.k_max {
        rows.push(resource_row(&build_w_unary(h.clone(), 0.05, k)?)?);
    }
    Ok(rows)
}

pub fn run_bliss(a: &BlissArgs) -> CmdResult<Vec<BlissRecord>> {
    let (f, file_ne) = FermionicOperator::load_integrals(&a.integrals)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.integrals.display())))?;
    let ne = a.nelec.unwrap_or(file_ne);
    if ne > f.n_orb {
        return usage(format!("--nelec {ne} exceeds {} orbitals", f.n_orb));
    }
    let family = match a.family {
        FamilyChoice::Scalar => ShiftFamily::Scalar,
        FamilyChoice::Diagonal => ShiftFamily::Diagonal,
        FamilyChoice::Full => ShiftFamily::Full,
    };
    let before = f.jordan_wigner()?;
    let out = bliss::optimize_bliss_with(&f, ne, &bliss::BlissOptions { family, ..Default::default() })?;
    let psi = bliss::lowest_occupation_state(f.n_orb, ne);
    let p_after = match &out.hamiltonian {
        Some(h) => oracle::success_prob_hk(h, &psi, 1)?,
        None => f64::NAN,
    };
    Ok(vec![BlissRecord {
        n_orb: f.n_orb,
        n_electrons: ne,
        alpha_norm_before: before.l1_norm(),
        alpha_norm_after: out.final_norm,
        terms_before: before.len(),
        terms_after: out.hamiltonian.as_ref().map_or(0, Hamiltonian::len),
        p_before: oracle::success_prob_hk(&before, &psi, 1)?,
        p_after,
        xi0: out.params.xi0,
        xi_diagonal: (0..f.n_orb).map(|i| format!("{}", out.params.xi[(i, i)].re)).collect::<Vec<_>>().join(";"),
        family: match out.family {
            ShiftFamily::Scalar => "scalar",
            ShiftFamily::Diagonal => "diagonal",
            ShiftFamily::Full => "full",
        },
        sweeps: out.sweeps,
        converged: out.converged,
    }])
}

/// Runs a parsed command and writes its table.
pub fn run(cli: &Cli) -> CmdResult<()> {
    match &cli.command {
        Command::Simulate(a) => write(&simulate(a)?, &a.output),
        Command::Analytic(a) => write(&analytic(a)?, &a.output),
        Command::Sweep(a) => write(&sweep(a)?, &a.output),
        Command::Resources(a) => write(&resources(a)?, &a.output),
        Command::Bliss(a) => write(&run_bliss(a)?, &a.output),
    }
}

fn write<T: Record>(rows: &[T], out: &OutputArgs) -> CmdResult<()> {
    Ok(emit(rows, out.format.into(), out.out.as_deref())?)
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(f) => {
            let mut err = std::io::stderr().lock();
            let _ = match &f {
                Failure::Usage(m) => writeln!(err, "error: {m}"),
                Failure::Runtime(e) => writeln!(err, "error: {e}"),
            };
            f.exit_code()
        }
    }
}

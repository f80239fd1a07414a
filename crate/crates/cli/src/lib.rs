//! Command-line front end: argument parsing, file formats, reports,
//! manifests and plot data.

pub mod manifest;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;
use torsionlab_core::hermitian::{iota_embed, AnyFormMatrix, HermitianError};
use torsionlab_core::homology::{growth_scan, heegaard_homology, GrowthScan, HomologyError};
use torsionlab_core::mahler::{build_k_alpha, kronecker_zero_test, mahler_measure, MahlerError};
use torsionlab_core::walks::{proximality_probe, run_walk, WalkConfig, WalkConfigFile, WalkError, WalkReport};
use torsionlab_core::{LaurentPoly, Mat, RingError};

use crate::manifest::{manifest_path, ExperimentManifest};

pub const THREADS_ENV: &str = "TORSIONLAB_THREADS";

const SCHEMA_HELP: &str = "\
input formats (see docs/schema-v1.md):
  poly      [[exponent, \"coefficient\"], ...]          e.g. [[0, \"-2\"], [1, \"1\"]] for t - 2
  matrix    {\"g\": 3, \"ring\": \"laurent\" | {\"cyclic\": q}, \"rows\": [[poly, ...], ...]}
  binf      [[poly, ...], ...]                          square matrix over Z[t, t^-1]
  heegaard  [[int, ...], ...]                           2g x 2g symplectic integer matrix
  walk      {\"g\": 3, \"generators\": \"bundled\" | [matrix, ...], \"n_steps\": 64,
             \"n_trials\": 1000, \"master_seed\": 1, \"q_list\": [3], ...}";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or input files: exit code 2.
    #[error("{0}")]
    Input(String),
    /// Failure inside a computation or while writing output: exit code 1.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<MahlerError> for CliError {
    fn from(e: MahlerError) -> Self {
        match e {
            MahlerError::ZeroPolynomial | MahlerError::InvalidParameter(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<HermitianError> for CliError {
    fn from(e: HermitianError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RingError> for CliError {
    fn from(e: RingError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<HomologyError> for CliError {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Mahler(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Mahler(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "torsionlab", version, about = "Torsion growth in cyclic covers and random Torelli walks")]
pub struct Cli {
    /// Override the master seed of randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (capped by TORSIONLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file or directory; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mahler measures and cyclotomic tests.
    #[command(subcommand)]
    Mahler(MahlerCmd),
    /// Matrices preserving the Reidemeister form.
    #[command(subcommand)]
    Rep(RepCmd),
    /// Torsion homology of cyclic covers.
    #[command(subcommand)]
    Torsion(TorsionCmd),
    /// Homology of a Heegaard splitting from its symplectic action.
    Heegaard {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Random-walk experiments.
    #[command(subcommand)]
    Walk(WalkCmd),
}

#[derive(Debug, Subcommand)]
pub enum MahlerCmd {
    Eval {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = torsionlab_core::mahler::DEFAULT_TOL)]
        tol: f64,
    },
    Kronecker {
        #[arg(long)]
        poly: PathBuf,
    },
    Kalpha {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        mmax: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum RepCmd {
    CheckForm {
        file: PathBuf,
    },
    Block {
        file: PathBuf,
    },
    Iota {
        file: PathBuf,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        root: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum TorsionCmd {
    Scan {
        #[arg(long)]
        binf: PathBuf,
        #[arg(long)]
        qmax: usize,
        #[arg(long, default_value_t = 1)]
        qmin: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Full scan report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Plot-data CSV.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WalkCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    Probe {
        #[arg(long)]
        config: PathBuf,
        /// Probe only this cover degree instead of every entry of q_list.
        #[arg(long)]
        q: Option<usize>,
    },
}

/// Parse `args` (program name first), run the command and return the exit
/// code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            eprintln!("\n{SCHEMA_HELP}");
            return 2;
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("torsionlab: {e}");
            if let CliError::Input(_) = e {
                eprintln!("\n{SCHEMA_HELP}");
            }
            e.exit_code()
        }
    }
}

/// Thread count from `--threads` and the environment cap.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    let n = match (flag, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if n == Some(0) {
        return Err(CliError::Input("thread count must be positive".into()));
    }
    Ok(n)
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| run_command(cli, argv))
}

fn run_command(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    match &cli.command {
        Command::Mahler(cmd) => mahler_cmd(cli, argv, cmd),
        Command::Rep(cmd) => rep_cmd(cli, argv, cmd),
        Command::Torsion(TorsionCmd::Scan {
            binf,
            qmax,
            qmin,
            stride,
            report,
            plot,
        }) => torsion_scan(cli, argv, binf, *qmin, *qmax, *stride, report.as_deref(), plot.as_deref()),
        Command::Heegaard { matrix } => {
            let phi = read_int_matrix(matrix)?;
            let report = heegaard_homology(&phi)?;
            emit_json(cli, argv, "heegaard", json!({ "matrix": matrix }), &[matrix.as_path()], &report)
        }
        Command::Walk(WalkCmd::Run { config }) => walk_run(cli, argv, config),
        Command::Walk(WalkCmd::Probe { config, q }) => walk_probe(cli, argv, config, *q),
    }
}

// ---------------------------------------------------------------------------
// I/O helpers
// ---------------------------------------------------------------------------

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read_int_matrix(path: &Path) -> Result<Mat<BigInt>, CliError> {
    let raw: Vec<Vec<serde_json::Value>> = read_json(path)?;
    let rows = raw
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|v| {
                    let s = match &v {
                        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                        serde_json::Value::String(s) => s.clone(),
                        _ => return Err(CliError::Input(format!("{}: expected an integer, got {v}", path.display()))),
                    };
                    s.trim()
                        .parse::<BigInt>()
                        .map_err(|_| CliError::Input(format!("{}: bad integer {s:?}", path.display())))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    check_rectangular(&rows, path)?;
    Ok(Mat::from_rows(rows))
}

fn check_rectangular<T>(rows: &[Vec<T>], path: &Path) -> Result<(), CliError> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::Input(format!("{}: expected a nonempty rectangular matrix", path.display())));
    }
    Ok(())
}

/// Print `value` as JSON, or write it to `--out` with a manifest.
fn emit_json<T: Serialize>(
    cli: &Cli,
    argv: &[String],
    command: &str,
    params: serde_json::Value,
    inputs: &[&Path],
    value: &T,
) -> Result<(), CliError> {
    let text = to_json(value)?;
    match &cli.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(out) => {
            write_file(out, text.as_bytes())?;
            ExperimentManifest::new(argv, command, params, cli.seed)
                .with_inputs(inputs)?
                .write(&manifest_path(out, false), std::slice::from_ref(out))
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn mahler_cmd(cli: &Cli, argv: &[String], cmd: &MahlerCmd) -> Result<(), CliError> {
    match cmd {
        MahlerCmd::Eval { poly, tol } => {
            let p: LaurentPoly = read_json(poly)?;
            let r = mahler_measure(&p, *tol)?;
            emit_json(cli, argv, "mahler eval", json!({ "poly": poly, "tol": tol }), &[poly.as_path()], &r)
        }
        MahlerCmd::Kronecker { poly } => {
            let p: LaurentPoly = read_json(poly)?;
            let f = kronecker_zero_test(&p)?;
            let out = json!({ "mahler_zero": f.is_some(), "factorization": f });
            emit_json(cli, argv, "mahler kronecker", json!({ "poly": poly }), &[poly.as_path()], &out)
        }
        MahlerCmd::Kalpha { alpha, mmax } => {
            let k = build_k_alpha(*alpha, *mmax)?;
            emit_json(cli, argv, "mahler kalpha", json!({ "alpha": alpha, "mmax": mmax }), &[], &k)
        }
    }
}

fn rep_cmd(cli: &Cli, argv: &[String], cmd: &RepCmd) -> Result<(), CliError> {
    match cmd {
        RepCmd::CheckForm { file } => {
            let m: AnyFormMatrix = read_json(file)?;
            let torelli_like = match &m {
                AnyFormMatrix::Laurent(m) => m.is_torelli_like(),
                AnyFormMatrix::Cyclic(m) => m.is_torelli_like(),
            };
            let out = json!({
                "g": m.genus(),
                "ring": m.ring(),
                "form_preserved": m.check_form_preserved(),
                "torelli_like": torelli_like,
            });
            emit_json(cli, argv, "rep check-form", json!({ "file": file }), &[file.as_path()], &out)
        }
        RepCmd::Block { file } => {
            let m: AnyFormMatrix = read_json(file)?;
            let det = match &m {
                AnyFormMatrix::Laurent(m) => m.bottom_left_block().det(),
                AnyFormMatrix::Cyclic(m) => m.bottom_left_block().det().lift(),
            };
            let out = json!({ "g": m.genus(), "ring": m.ring(), "rows": m.bottom_left_rows(), "det": det });
            emit_json(cli, argv, "rep block", json!({ "file": file }), &[file.as_path()], &out)
        }
        RepCmd::Iota { file, q, root } => {
            let m: AnyFormMatrix = read_json(file)?;
            let (reduced, q) = match (&m, q) {
                (AnyFormMatrix::Laurent(_), None) => {
                    return Err(CliError::Input("--q is required for matrices over the Laurent ring".into()))
                }
                (AnyFormMatrix::Laurent(m), Some(q)) => (m.reduce_mod_q(*q)?, *q),
                (AnyFormMatrix::Cyclic(m), None) => (m.clone(), m.modulus()),
                (AnyFormMatrix::Cyclic(m), Some(q)) if *q == m.modulus() => (m.clone(), *q),
                (AnyFormMatrix::Cyclic(m), Some(q)) => {
                    return Err(CliError::Input(format!("matrix is over Z[Z/{}], not Z[Z/{q}]", m.modulus())))
                }
            };
            let a = iota_embed(&reduced, *root)?;
            let re: Vec<Vec<f64>> = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)].re).collect()).collect();
            let im: Vec<Vec<f64>> = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)].im).collect()).collect();
            let out = json!({
                "q": q,
                "root_index": root,
                "re": re,
                "im": im,
                "form_residual": torsionlab_core::hermitian::complex_form_residual(&a),
            });
            emit_json(cli, argv, "rep iota", json!({ "file": file, "q": q, "root": root }), &[file.as_path()], &out)
        }
    }
}

#[derive(Debug, Serialize)]
struct ScanRow<'a> {
    q: usize,
    torsion_order: &'a str,
    betti: usize,
    log_torsion_over_q: f64,
}

/// Table of a growth scan: `q, torsion_order, betti, log_torsion_over_q`.
pub fn scan_csv(scan: &GrowthScan) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["q", "torsion_order", "betti", "log_torsion_over_q"])
        .map_err(|e| CliError::Internal(e.to_string()))?;
    for r in &scan.reports {
        let order = r.torsion_order.to_string();
        w.serialize(ScanRow {
            q: r.q,
            torsion_order: &order,
            betti: r.betti,
            log_torsion_over_q: r.log_torsion_over_q,
        })
        .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[allow(clippy::too_many_arguments)]
fn torsion_scan(
    cli: &Cli,
    argv: &[String],
    binf: &Path,
    qmin: usize,
    qmax: usize,
    stride: usize,
    report: Option<&Path>,
    plot: Option<&Path>,
) -> Result<(), CliError> {
    if qmin == 0 || stride == 0 || qmin > qmax {
        return Err(CliError::Input("need 1 <= qmin <= qmax and stride >= 1".into()));
    }
    let rows: Vec<Vec<LaurentPoly>> = read_json(binf)?;
    check_rectangular(&rows, binf)?;
    let b = Mat::from_rows(rows);
    let qs: Vec<usize> = (qmin..=qmax).step_by(stride).collect();
    let scan = growth_scan(&b, &qs)?;
    let csv_text = scan_csv(&scan)?;

    let mut outputs = Vec::new();
    if let Some(path) = report {
        write_file(path, to_json(&scan)?.as_bytes())?;
        outputs.push(path.to_path_buf());
    }
    if let Some(path) = plot {
        let text = plot::emit_plot_data(&plot::growth_rows(&scan)).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(path, text.as_bytes())?;
        outputs.push(path.to_path_buf());
    }
    let summary = json!({
        "verdict": scan.verdict,
        "determinant": scan.determinant,
        "log_measure": scan.mahler.as_ref().map(|m| m.log_measure),
        "last_window_mad": scan.last_window_mad,
        "tail_decreasing": (!scan.deviations.is_empty()).then(|| scan.tail_decreasing()),
    });
    let params = json!({ "binf": binf, "qmin": qmin, "qmax": qmax, "stride": stride });
    match &cli.out {
        None => {
            print!("{csv_text}");
            if !outputs.is_empty() {
                eprint!("{}", to_json(&summary)?);
            }
        }
        Some(out) => {
            write_file(out, csv_text.as_bytes())?;
            outputs.insert(0, out.clone());
            print!("{}", to_json(&summary)?);
        }
    }
    if let Some(anchor) = cli.out.as_deref().or(report).or(plot) {
        ExperimentManifest::new(argv, "torsion scan", params, cli.seed)
            .with_inputs(&[binf])?
            .write(&manifest_path(anchor, false), &outputs)?;
    }
    Ok(())
}

fn load_walk_config(path: &Path, seed: Option<u64>) -> Result<(WalkConfigFile, WalkConfig), CliError> {
    let mut file: WalkConfigFile = read_json(path)?;
    if let Some(s) = seed {
        file.master_seed = s;
    }
    let config = WalkConfig::from_file(&file)?;
    Ok((file, config))
}

/// `q, n, L_n_mean, L_n_var, frac_mahler_positive, frac_below_<delta>...`
pub fn series_csv(report: &WalkReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let deltas: Vec<f64> = report.hyperplane.first().map(|h| h.deltas.clone()).unwrap_or_default();
    let mut header: Vec<String> = ["q", "n", "L_n_mean", "L_n_var", "frac_mahler_positive"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(deltas.iter().map(|d| format!("frac_below_{d:e}")));
    w.write_record(&header).map_err(|e| CliError::Internal(e.to_string()))?;
    for (ly, hp) in report.lyapunov.iter().zip(&report.hyperplane) {
        for (k, p) in ly.points.iter().enumerate() {
            let mut rec = vec![
                ly.q.to_string(),
                p.n.to_string(),
                p.mean.to_string(),
                p.variance.to_string(),
                report.mahler[k].fraction_positive.to_string(),
            ];
            rec.extend(hp.points[k].fractions.iter().map(|f| f.to_string()));
            w.write_record(&rec).map_err(|e| CliError::Internal(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn walk_run(cli: &Cli, argv: &[String], config_path: &Path) -> Result<(), CliError> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| CliError::Input("walk run needs --out DIR".into()))?;
    let (file, config) = load_walk_config(config_path, cli.seed)?;
    let report = run_walk(&config)?;

    fs::create_dir_all(out).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out.display())))?;
    let report_path = out.join("report.json");
    let series_path = out.join("series.csv");
    let plot_path = out.join("plot.csv");
    write_file(&report_path, to_json(&report)?.as_bytes())?;
    write_file(&series_path, series_csv(&report)?.as_bytes())?;
    let plot_text = plot::emit_plot_data(&plot::walk_rows(&report)).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&plot_path, plot_text.as_bytes())?;

    let params = serde_json::to_value(&file).map_err(|e| CliError::Internal(e.to_string()))?;
    ExperimentManifest::new(argv, "walk run", params, Some(config.master_seed))
        .with_inputs(&[config_path])?
        .write(&manifest_path(out, true), &[report_path, series_path, plot_path])
}

fn walk_probe(cli: &Cli, argv: &[String], config_path: &Path, q: Option<usize>) -> Result<(), CliError> {
    let (file, config) = load_walk_config(config_path, cli.seed)?;
    let qs = match q {
        Some(q) if q < 3 => return Err(CliError::Input("cover degree must be at least 3".into())),
        Some(q) => vec![q],
        None => config.q_list.clone(),
    };
    let reports = qs
        .iter()
        .map(|&q| proximality_probe(&config, q))
        .collect::<Result<Vec<_>, _>>()?;
    let params = json!({ "config": file, "q": q });
    emit_json(cli, argv, "walk probe", params, &[config_path], &reports)
}

//! The `ellvc` command line.
//!
//! Exit codes: 0 success, 1 usage or internal error, 2 refuted or
//! infeasible, 3 verification failure or indeterminate oracle result.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::cert::{bits, parse_bits, Certificate, CertificateFile, OracleResult, Verification};
use crate::error::{Error, Result};
use crate::gmm::{build_mixture_shatter_witness, verify_mixture_shattering};
use crate::lifting::lift_dimension;
use crate::points::PointSet;
use crate::realizability::{LabeledPointSet, Oracle, Realizability};
use crate::shattering::{build_shatter_witness, find_unrealizable_labeling, shatter_coefficient, verify_shattering, ShatterMode};
use crate::Tolerances;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_REFUTED: u8 = 2;
pub const EXIT_UNVERIFIED: u8 = 3;

pub const MAX_VCDIM_DIM: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "ellvc", version, about = "Certified shattering witnesses and refutations for ellipsoids")]
pub struct Cli {
    /// Worker threads for subset enumeration (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Feasibility threshold on the oracle margin.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print (d² + 3d)/2 and optionally certify both bounds.
    Vcdim(VcdimArgs),
    /// Build a shattered set with one witness ellipsoid per subset.
    Witness(WitnessArgs),
    /// Find a labeling of B + 1 points that no ellipsoid cuts out.
    Refute(RefuteArgs),
    /// Decide whether an ellipsoid cuts out the labeled subset.
    Oracle(OracleArgs),
    /// Build a set shattered by level sets of Gaussian mixtures.
    GmmShatter(GmmArgs),
    /// Count realizable labelings by subset size (CSV).
    ShatterFn(ShatterFnArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VcdimArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub certify: bool,
    /// Random (B + 1)-point sets to refute when certifying.
    #[arg(long, default_value_t = 0)]
    pub refute_trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the shatter-witness certificate.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RefuteArgs {
    /// Point-set JSON file.
    #[arg(long, conflicts_with = "dim")]
    pub points: Option<PathBuf>,
    /// Draw B + 1 uniform points in [−1, 1]^d instead.
    #[arg(long, required_unless_present = "points")]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// One 0/1 character per point, point 0 first.
    #[arg(long)]
    pub labels: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GmmArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub components: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShatterFnArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
}

/// Parses `args` and runs the command, writing reports to `out` and
/// diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Verification(_) | Error::OracleDisagreement { .. } => EXIT_UNVERIFIED,
                _ => EXIT_ERROR,
            }
        }
    }
}

pub fn main() -> ExitCode {
    let code = run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    configure_threads(cli.threads)?;
    let mut tol = Tolerances::default();
    if let Some(t) = cli.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be a nonnegative number, got {t}")));
        }
        tol.feasibility = t;
    }
    match &cli.command {
        Command::Vcdim(a) => vcdim(a, &tol, out),
        Command::Witness(a) => witness(a, &tol, out),
        Command::Refute(a) => refute(a, &tol, out),
        Command::Oracle(a) => oracle(a, &tol, out),
        Command::GmmShatter(a) => gmm_shatter(a, &tol, out),
        Command::ShatterFn(a) => shatter_fn(a, &tol, out),
        Command::Verify(a) => verify(a, out),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<()> {
    if threads > 0 {
        // A pool may already exist when several commands run in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) -> Result<()> {
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", path.display())));
    }
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_certificate(path: Option<&Path>, file: &CertificateFile) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, file.to_json()?).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

fn report(out: &mut dyn Write, line: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::InvalidInput(format!("cannot write report: {e}")))
}

fn check_dim(d: usize, max: usize) -> Result<()> {
    if d == 0 || d > max {
        return Err(Error::InvalidInput(format!("--dim must be in 1..={max}, got {d}")));
    }
    Ok(())
}

fn vcdim(a: &VcdimArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    check_dim(a.dim, MAX_VCDIM_DIM)?;
    let b = lift_dimension(a.dim);
    report(out, b)?;
    if !a.certify {
        return Ok(EXIT_OK);
    }
    let mut passed = true;
    match build_shatter_witness(a.dim, a.seed, tol).and_then(|w| w.verify(tol).map(|_| w)) {
        Ok(w) => {
            let r = verify_shattering(&w.points, ShatterMode::Witness(&w))?;
            passed &= r.shattered;
            report(out, format_args!("lower bound: {} of {} subsets of {b} points certified (delta {:e})", r.realized, r.total, w.delta))?;
            write_certificate(a.out.as_deref(), &CertificateFile::new(Certificate::ShatterWitness(w), Some(a.seed), *tol))?;
        }
        Err(e) => {
            passed = false;
            report(out, format_args!("lower bound: FAILED ({e})"))?;
        }
    }
    let mut refuted = 0;
    for trial in 0..a.refute_trials {
        let seed = a.seed.wrapping_add(trial);
        let pts = PointSet::random_uniform(a.dim, b + 1, seed)?;
        match find_unrealizable_labeling(&pts, tol) {
            Ok(_) => refuted += 1,
            Err(e) => report(out, format_args!("upper bound: seed {seed} FAILED ({e})"))?,
        }
    }
    if a.refute_trials > 0 {
        passed &= refuted == a.refute_trials;
        report(out, format_args!("upper bound: {refuted} of {} random {}-point sets refuted", a.refute_trials, b + 1))?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_UNVERIFIED })
}

fn witness(a: &WitnessArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    let w = build_shatter_witness(a.dim, a.seed, tol)?;
    w.verify(tol)?;
    report(out, format_args!("{} points, {} subsets certified, delta {:e}", w.points.len(), w.subsets.len(), w.delta))?;
    write_certificate(a.out.as_deref(), &CertificateFile::new(Certificate::ShatterWitness(w), Some(a.seed), *tol))?;
    Ok(EXIT_OK)
}

fn refute(a: &RefuteArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    let (pts, seed) = match (&a.points, a.dim) {
        (Some(path), _) => (read_points(path)?, None),
        (None, Some(d)) => (PointSet::random_uniform(d, lift_dimension(d) + 1, a.seed)?, Some(a.seed)),
        (None, None) => return Err(Error::InvalidInput("need --points or --dim".into())),
    };
    let c = find_unrealizable_labeling(&pts, tol)?;
    report(out, format_args!("refuted: labeling {} ({:?}), oracle margin {:e}", bits(c.labeling, pts.len()), c.kind, c.confirmation.lp_margin))?;
    write_certificate(a.out.as_deref(), &CertificateFile::new(Certificate::Refutation(c), seed, *tol))?;
    Ok(EXIT_REFUTED)
}

fn oracle(a: &OracleArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    let pts = read_points(&a.points)?;
    let labels = parse_bits(&a.labels, pts.len())?;
    let l = LabeledPointSet::new(pts.clone(), labels)?;
    let result = Oracle::new(*tol).decide(&l)?;
    let code = match &result {
        Realizability::Realizable(c) => {
            report(out, format_args!("realizable: margin {:e}", c.margin))?;
            EXIT_OK
        }
        r if r.is_indeterminate(tol) => {
            report(out, format_args!("indeterminate: margin {:e}", r.lp_margin()))?;
            EXIT_UNVERIFIED
        }
        r => {
            report(out, format_args!("infeasible: margin {:e}", r.lp_margin()))?;
            EXIT_REFUTED
        }
    };
    write_certificate(a.out.as_deref(), &CertificateFile::new(Certificate::OracleResult(OracleResult { points: pts, labels, result }), None, *tol))?;
    Ok(code)
}

fn gmm_shatter(a: &GmmArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    let w = build_mixture_shatter_witness(a.dim, a.components, a.seed, tol)?;
    let r = verify_mixture_shattering(&w, tol);
    report(out, format_args!("|U| = {}, {} subsets certified", r.points, r.total))?;
    report(
        out,
        format_args!(
            "spacing {} after {} doublings, q {:e}, delta {:e}, min margins in {:e} out {:e}, max correction {:e}",
            w.spacing.spacing, w.spacing.doublings, w.separation.q, w.separation.delta, r.min_in_margin, r.min_out_margin, r.max_excess
        ),
    )?;
    let ok = r.shattered;
    write_certificate(a.out.as_deref(), &CertificateFile::new(Certificate::MixtureWitness(w), Some(a.seed), *tol))?;
    Ok(if ok { EXIT_OK } else { EXIT_UNVERIFIED })
}

fn shatter_fn(a: &ShatterFnArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<u8> {
    let pts = read_points(&a.points)?;
    let c = shatter_coefficient(&pts, &Oracle::new(*tol))?;
    let mut csv = String::from("subset_size,realizable,total\n");
    for s in &c.by_size {
        csv.push_str(&format!("{},{},{}\n", s.subset_size, s.realizable, s.total));
    }
    match &a.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| io_err(path, e))?,
        None => out.write_all(csv.as_bytes()).map_err(|e| Error::InvalidInput(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let text = std::fs::read_to_string(&a.file).map_err(|e| io_err(&a.file, e))?;
    let file = CertificateFile::from_json(&text)?;
    match file.verify()? {
        Verification::Passed(msg) => {
            report(out, format_args!("{}: verified, {msg}", file.certificate.kind()))?;
            Ok(EXIT_OK)
        }
        Verification::Failed(msg) => {
            report(out, format_args!("{}: FAILED, {msg}", file.certificate.kind()))?;
            Ok(EXIT_UNVERIFIED)
        }
    }
}

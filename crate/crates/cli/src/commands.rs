//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use maxjsr::geometry::hausdorff;
use maxjsr::jsr::{
    aggregate, barabanov_nonexistence, barabanov_norm, finiteness_product, jsr_bounds, verify_barabanov,
    verify_extremal,
};
use maxjsr::oracles::{generate, InstanceSpec};
use maxjsr::regularity::{probe_matrix_regularity, probe_set_regularity, ProbeWitness, DEFAULT_PAIRS};
use maxjsr::spectral::{frobenius_form, is_irreducible};
use maxjsr::suite::{invariant_suite, CheckOutcome, CheckStatus, Tally};
use maxjsr::{Error, MatrixSet, MaxMatrix, Tolerance, WeightedMaxNorm};

use crate::cert::{
    self, BarabanovPayload, BoundsClaim, Certificate, Diagnostic, FinitenessPayload, HausdorffPayload, JsrPayload,
    Kind, MuPayload, MuProof, NonexistencePayload, Obstruction, ProbeCenter, ProbePayload,
};
use crate::setfile::SetFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "maxjsr", version, about = "Max-algebraic spectral radius and joint spectral radius")]
pub struct Cli {
    /// Print the certificate as JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Numerical tolerance.
    #[arg(long, global = true, value_name = "T")]
    tol: Option<f64>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximal cycle geometric mean of one matrix.
    Mu {
        file: PathBuf,
        /// Member name; `S` selects the aggregate when no member has that name.
        #[arg(long, value_name = "NAME")]
        matrix: Option<String>,
        /// Also print a critical cycle.
        #[arg(long)]
        witness: bool,
    },
    /// Joint spectral radius of the set.
    Jsr {
        file: PathBuf,
        /// Also print the product bracket at this depth.
        #[arg(long, value_name = "M")]
        bounds: Option<u32>,
    },
    /// Construct and verify a Barabanov norm.
    Barabanov {
        file: PathBuf,
        /// Number of sampled vectors for the Barabanov check.
        #[arg(long, value_name = "N", default_value_t = 256)]
        verify: usize,
    },
    /// A product of length at most n attaining the joint spectral radius.
    Finiteness { file: PathBuf },
    /// Hausdorff distance between two sets.
    Hausdorff { left: PathBuf, right: PathBuf },
    /// Look for an eigenvector that rules out a Barabanov norm.
    Nonexistence { file: PathBuf },
    /// Run the invariant suite on the file and on random instances.
    Check {
        file: PathBuf,
        /// Number of additional random instances.
        #[arg(long, value_name = "K", default_value_t = 10)]
        seeds: u64,
    },
    /// Sampled Hölder quotient of μ near a matrix or set.
    Probe {
        file: PathBuf,
        /// Probe one member instead of the whole set.
        #[arg(long, value_name = "NAME")]
        matrix: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_PAIRS)]
        pairs: usize,
    },
    /// Re-check a certificate without re-running the computation.
    VerifyCert { file: PathBuf },
}

/// What a command prints and how it exits.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn error(code: i32, message: impl std::fmt::Display) -> Outcome {
        Outcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

struct Ctx {
    json: bool,
    tol: Tolerance,
    seed: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let tol = match cli.tol.map(Tolerance::new).transpose() {
        Ok(t) => t,
        Err(e) => return Outcome::error(EXIT_PARSE, e),
    };
    let ctx = Ctx { json: cli.json, tol: tol.unwrap_or_default(), seed: cli.seed };
    let result = match cli.command {
        Command::Mu { file, matrix, witness } => cmd_mu(&ctx, &file, matrix.as_deref(), witness),
        Command::Jsr { file, bounds } => cmd_jsr(&ctx, &file, bounds),
        Command::Barabanov { file, verify } => cmd_barabanov(&ctx, &file, verify),
        Command::Finiteness { file } => cmd_finiteness(&ctx, &file),
        Command::Hausdorff { left, right } => cmd_hausdorff(&ctx, &left, &right),
        Command::Nonexistence { file } => cmd_nonexistence(&ctx, &file),
        Command::Check { file, seeds } => cmd_check(&ctx, &file, seeds),
        Command::Probe { file, matrix, radius, alpha, pairs } => {
            cmd_probe(&ctx, &file, matrix.as_deref(), radius, alpha, pairs)
        }
        Command::VerifyCert { file } => cmd_verify(&file, tol),
    };
    result.unwrap_or_else(|f| f)
}

type CmdResult = Result<Outcome, Outcome>;

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::error(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(SetFile, MatrixSet), Outcome> {
    let text = read(path)?;
    let file = SetFile::parse(&text).map_err(|e| Outcome::error(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let set = file.to_set().map_err(|e| Outcome::error(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((file, set))
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::EmptyDimension
        | Error::InvalidEntry { .. }
        | Error::NonPositiveWeight { .. }
        | Error::InvalidPermutation { .. }
        | Error::EmptySet
        | Error::DuplicateName(_)
        | Error::UnknownMember(_)
        | Error::MemberCountMismatch { .. }
        | Error::InvalidParameter(_) => EXIT_PARSE,
        Error::BudgetExceeded { .. }
        | Error::DimensionGuard { .. }
        | Error::UniquenessUnknown { .. }
        | Error::ToleranceFailure(_)
        | Error::RetryExhausted(_) => EXIT_GUARD,
        Error::Divergent { .. }
        | Error::Reducible { .. }
        | Error::DegenerateSpectrum
        | Error::NothingToCertify
        | Error::NotDifferentiable
        | Error::InterpolationReducible { .. } => EXIT_HYPOTHESIS,
    }
}

/// Maps a library error to an exit; hypothesis violations print a diagnostic
/// certificate for the set's aggregate.
fn fail(ctx: &Ctx, kind: Kind, s: &MaxMatrix, e: Error) -> Outcome {
    let code = exit_code(&e);
    let mut out = Outcome::error(code, &e);
    if code == EXIT_HYPOTHESIS {
        let form = frobenius_form(s);
        let diagnostic = Diagnostic {
            error: e.to_string(),
            aggregate: s.clone(),
            frobenius_form: (form.classes.len() > 1).then_some(form),
            mu_proof: MuProof::build(s, ctx.tol).ok(),
        };
        out.stdout = Certificate::refusal(kind, ctx.tol, diagnostic).to_json() + "\n";
    }
    out
}

fn emit(ctx: &Ctx, cert: &Certificate, human: String) -> Outcome {
    Outcome::ok(if ctx.json { cert.to_json() + "\n" } else { human })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// 1-based cycle notation, e.g. `1 → 2 → 3 → 1`.
fn fmt_cycle(c: &[usize]) -> String {
    match c.first() {
        None => "none".into(),
        Some(first) => {
            let mut parts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            parts.push((first + 1).to_string());
            parts.join(" → ")
        }
    }
}

fn fmt_matrix(a: &MaxMatrix) -> String {
    let mut s = String::new();
    for row in a.rows() {
        let _ = writeln!(s, "  {}", fmt_vec(row));
    }
    s
}

fn cmd_mu(ctx: &Ctx, path: &Path, name: Option<&str>, witness: bool) -> CmdResult {
    let (_, psi) = load(path)?;
    let (label, a) = match name {
        None => psi.members()[0].clone(),
        Some(n) => match psi.get(n) {
            Some(a) => (n.to_string(), a.clone()),
            None if n == "S" => ("S".to_string(), aggregate(&psi)),
            None => return Err(Outcome::error(EXIT_PARSE, Error::UnknownMember(n.into()))),
        },
    };
    let proof = MuProof::build(&a, ctx.tol).map_err(|e| fail(ctx, Kind::Mu, &a, e))?;
    let mut human = format!("μ({label}) = {}\n", proof.mu);
    if witness {
        let _ = writeln!(human, "witness: {}", fmt_cycle(&proof.witness_cycle));
    }
    let cert = Certificate::new(Kind::Mu, ctx.tol, &MuPayload { matrix: label, rows: a, proof });
    Ok(emit(ctx, &cert, human))
}

fn members_product(psi: &MatrixSet, word: &[usize]) -> MaxMatrix {
    word.iter().fold(MaxMatrix::identity(psi.n()), |p, &w| p.max_mul(&psi.members()[w].1).expect("uniform dimension"))
}

fn word_names(psi: &MatrixSet, word: &[usize]) -> String {
    word.iter().map(|&w| psi.members()[w].0.as_str()).collect::<Vec<_>>().join(" ⊗ ")
}

fn cmd_jsr(ctx: &Ctx, path: &Path, depth: Option<u32>) -> CmdResult {
    let (file, psi) = load(path)?;
    let s = aggregate(&psi);
    let proof = MuProof::build(&s, ctx.tol).map_err(|e| fail(ctx, Kind::Jsr, &s, e))?;
    let mut human = format!("μ(Ψ) = {}\n", proof.mu);
    let bounds = match depth {
        None => None,
        Some(m) => {
            let nu = if is_irreducible(&s) && proof.mu > 0.0 {
                barabanov_norm(&psi, ctx.tol).map_err(|e| fail(ctx, Kind::Jsr, &s, e))?
            } else {
                WeightedMaxNorm::uniform(psi.n())
            };
            let b = jsr_bounds(&psi, m, &nu).map_err(|e| fail(ctx, Kind::Jsr, &s, e))?;
            let low = members_product(&psi, &b.lower_word);
            let lower_proof = MuProof::build(&low, ctx.tol).map_err(|e| fail(ctx, Kind::Jsr, &s, e))?;
            let _ = writeln!(human, "depth {m}: {} <= μ(Ψ) <= {}", b.lower, b.upper);
            let _ = writeln!(human, "lower attained by {}", word_names(&psi, &b.lower_word));
            let _ = writeln!(human, "upper attained by {}", word_names(&psi, &b.upper_word));
            Some(BoundsClaim { bounds: b, weights: nu.weights().as_slice().to_vec(), lower_proof })
        }
    };
    let cert = Certificate::new(Kind::Jsr, ctx.tol, &JsrPayload { set: file, aggregate: s, proof, bounds });
    Ok(emit(ctx, &cert, human))
}

fn cmd_barabanov(ctx: &Ctx, path: &Path, samples: usize) -> CmdResult {
    let (file, psi) = load(path)?;
    let s = aggregate(&psi);
    let f = |e| fail(ctx, Kind::Barabanov, &s, e);
    let nu = barabanov_norm(&psi, ctx.tol).map_err(f)?;
    let jsr = MuProof::build(&s, ctx.tol).map_err(f)?;
    let extremal = verify_extremal(&psi, &nu, ctx.tol).map_err(f)?;
    let barabanov = verify_barabanov(&psi, &nu, samples, ctx.seed, ctx.tol).map_err(f)?;
    let weights = nu.weights().as_slice().to_vec();
    let mut human = format!("μ(Ψ) = {}\nweights v = {}\n", jsr.mu, fmt_vec(&weights));
    let _ = writeln!(human, "extremal: {}", if extremal.holds { "yes" } else { "no" });
    let _ = writeln!(
        human,
        "Barabanov: {} on {samples} samples (seed {})",
        if barabanov.holds { "verified" } else { "failed" },
        ctx.seed
    );
    let payload = BarabanovPayload {
        set: file,
        aggregate: s,
        jsr,
        weights,
        samples,
        seed: ctx.seed,
        extremal: extremal.holds,
        barabanov: barabanov.holds,
    };
    let cert = Certificate::new(Kind::Barabanov, ctx.tol, &payload);
    let mut out = emit(ctx, &cert, human);
    if !(extremal.holds && barabanov.holds) {
        out.code = EXIT_REJECTED;
        if let Some(x) = barabanov.counterexample.or(extremal.counterexample) {
            out.stderr = format!("error: norm check failed at x = {}\n", fmt_vec(&x));
        }
    }
    Ok(out)
}

fn cmd_finiteness(ctx: &Ctx, path: &Path) -> CmdResult {
    let (file, psi) = load(path)?;
    let s = aggregate(&psi);
    let f = |e| fail(ctx, Kind::Finiteness, &s, e);
    let c = finiteness_product(&psi, ctx.tol).map_err(f)?;
    let jsr = MuProof::build(&s, ctx.tol).map_err(f)?;
    let product_proof = MuProof::build(&c.product, ctx.tol).map_err(f)?;
    let regions: Vec<usize> = c.region_cycle.clone();
    let mut human = format!("μ(Ψ) = {}\nk = {}\n", jsr.mu, c.k);
    let _ = writeln!(human, "region cycle: {}", fmt_cycle(&regions));
    let _ = writeln!(human, "matrices A_1..A_k: {}", c.matrix_names.join(", "));
    let _ = writeln!(human, "product A_k ⊗ ··· ⊗ A_1:\n{}", fmt_matrix(&c.product).trim_end());
    let _ = writeln!(human, "μ(product)^(1/k) = {}", product_proof.mu.powf(1.0 / c.k as f64));
    let payload = FinitenessPayload {
        set: file,
        aggregate: s.clone(),
        jsr,
        region_cycle: c.region_cycle,
        matrix_names: c.matrix_names,
        k: c.k,
        product: c.product,
        product_proof,
    };
    let cert = Certificate::new(Kind::Finiteness, ctx.tol, &payload);
    Ok(emit(ctx, &cert, human))
}

fn cmd_hausdorff(ctx: &Ctx, left: &Path, right: &Path) -> CmdResult {
    let (lf, a) = load(left)?;
    let (rf, b) = load(right)?;
    let r = hausdorff(&a, &b).map_err(|e| Outcome::error(exit_code(&e), e))?;
    let human = format!(
        "H = {}\nattained at {} member {}\n",
        r.distance,
        serde_json::to_value(r.argmax_side).expect("serialises").as_str().unwrap_or("?"),
        r.argmax_member
    );
    let payload = HausdorffPayload {
        left: lf,
        right: rf,
        distance: r.distance,
        argmax_side: r.argmax_side,
        argmax_member: r.argmax_member,
    };
    let cert = Certificate::new(Kind::Hausdorff, ctx.tol, &payload);
    Ok(emit(ctx, &cert, human))
}

fn cmd_nonexistence(ctx: &Ctx, path: &Path) -> CmdResult {
    let (file, psi) = load(path)?;
    let s = aggregate(&psi);
    let f = |e| fail(ctx, Kind::Nonexistence, &s, e);
    let jsr = MuProof::build(&s, ctx.tol).map_err(f)?;
    let witness = barabanov_nonexistence(&psi, ctx.tol).map_err(f)?;
    let form = frobenius_form(&s);
    let mut human = format!("μ(Ψ) = {}\nclasses: {}\n", jsr.mu, form.classes.len());
    let (obstruction, weights) = match witness {
        Some(w) => {
            let nodes: Vec<usize> = w.class_nodes.iter().map(|i| i + 1).collect();
            let _ = writeln!(
                human,
                "no Barabanov norm: class {} (nodes {nodes:?}) gives S ⊗ x = {} x with x = {}",
                w.class + 1,
                w.eigenvalue,
                fmt_vec(w.vector.as_slice())
            );
            let o = Obstruction {
                class: w.class,
                class_nodes: w.class_nodes,
                eigenvalue: w.eigenvalue,
                vector: w.vector.into_vec(),
            };
            (Some(o), None)
        }
        None if is_irreducible(&s) => {
            let nu = barabanov_norm(&psi, ctx.tol).map_err(f)?;
            let v = nu.weights().as_slice().to_vec();
            let _ = writeln!(human, "S is irreducible; Barabanov norm weights v = {}", fmt_vec(&v));
            (None, Some(v))
        }
        None => {
            human.push_str("no obstruction found\n");
            (None, None)
        }
    };
    let payload = NonexistencePayload {
        set: file,
        aggregate: s,
        jsr,
        frobenius_form: form,
        obstruction,
        barabanov_weights: weights,
    };
    let cert = Certificate::new(Kind::Nonexistence, ctx.tol, &payload);
    Ok(emit(ctx, &cert, human))
}

#[derive(Serialize)]
struct CheckReport {
    instance: String,
    tally: Tally,
    outcomes: Vec<CheckOutcome>,
}

fn cmd_check(ctx: &Ctx, path: &Path, seeds: u64) -> CmdResult {
    let (_, psi) = load(path)?;
    let mut reports = vec![CheckReport {
        instance: path.display().to_string(),
        tally: Tally::default(),
        outcomes: invariant_suite(&psi, ctx.seed, ctx.tol),
    }];
    for k in 0..seeds {
        let seed = ctx.seed.wrapping_add(k + 1);
        let spec = InstanceSpec::new(psi.n(), psi.len(), seed).density(0.6);
        let random = generate(&spec).map_err(|e| Outcome::error(exit_code(&e), e))?;
        reports.push(CheckReport {
            instance: format!("random seed {seed}"),
            tally: Tally::default(),
            outcomes: invariant_suite(&random, seed, ctx.tol),
        });
    }
    let mut total = Tally::default();
    let mut human = String::new();
    for r in &mut reports {
        r.tally = Tally::of(&r.outcomes);
        total.pass += r.tally.pass;
        total.fail += r.tally.fail;
        total.skip += r.tally.skip;
        let _ = writeln!(
            human,
            "{}: {} passed, {} failed, {} skipped",
            r.instance, r.tally.pass, r.tally.fail, r.tally.skip
        );
        for o in r.outcomes.iter().filter(|o| o.status == CheckStatus::Fail) {
            let _ = writeln!(human, "  FAIL {}: {}", o.name, o.detail);
        }
    }
    let _ = writeln!(human, "total: {} passed, {} failed, {} skipped", total.pass, total.fail, total.skip);
    let stdout = if ctx.json { serde_json::to_string_pretty(&reports).expect("serialises") + "\n" } else { human };
    let code = if total.fail > 0 { EXIT_REJECTED } else { EXIT_OK };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

fn cmd_probe(ctx: &Ctx, path: &Path, name: Option<&str>, radius: f64, alpha: f64, pairs: usize) -> CmdResult {
    let (file, psi) = load(path)?;
    let s = aggregate(&psi);
    let f = |e| fail(ctx, Kind::Probe, &s, e);
    let (center, probe) = match name {
        Some(n) => {
            let a = psi.get(n).ok_or_else(|| Outcome::error(EXIT_PARSE, Error::UnknownMember(n.into())))?;
            (
                ProbeCenter::Matrix { rows: a.clone() },
                probe_matrix_regularity(a, radius, pairs, alpha, ctx.seed).map_err(f)?,
            )
        }
        None => {
            (ProbeCenter::Set { set: file }, probe_set_regularity(&psi, radius, pairs, alpha, ctx.seed).map_err(f)?)
        }
    };
    let witness_proofs = match &probe.witness {
        None => None,
        Some(ProbeWitness::Matrices { x, y }) => {
            Some((MuProof::build(x, ctx.tol).map_err(f)?, MuProof::build(y, ctx.tol).map_err(f)?))
        }
        Some(ProbeWitness::Sets { x, y }) => Some((
            MuProof::build(&aggregate(x), ctx.tol).map_err(f)?,
            MuProof::build(&aggregate(y), ctx.tol).map_err(f)?,
        )),
    };
    let human = format!(
        "max |μ(X) − μ(Y)| / d(X, Y)^{alpha} = {} over {} pairs ({} skipped) within radius {radius}\n",
        probe.max_ratio, probe.pairs, probe.skipped
    );
    let cert = Certificate::new(Kind::Probe, ctx.tol, &ProbePayload { center, probe, witness_proofs });
    Ok(emit(ctx, &cert, human))
}

fn cmd_verify(path: &Path, tol: Option<Tolerance>) -> CmdResult {
    let text = read(path)?;
    let c: Certificate =
        serde_json::from_str(&text).map_err(|e| Outcome::error(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    match cert::verify(&c, tol) {
        Ok(()) => Ok(Outcome::ok(format!(
            "accepted {} certificate{}\n",
            serde_json::to_value(c.kind).expect("serialises").as_str().unwrap_or("?"),
            if c.diagnostic.is_some() { " (refusal diagnostic)" } else { "" }
        ))),
        Err(reason) => Err(Outcome::error(EXIT_REJECTED, format!("certificate rejected: {reason}"))),
    }
}

//! Command-line front end. [`run_cli`] returns the process exit code and
//! writes the report to the supplied streams, so it can be driven in tests.
//!
//! Exit codes: 0 success (and "equivalent"), 1 "inequivalent",
//! 2 usage or validation error, 3 internal discrepancy.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::chargroup::{decompositions, dft_generator, hadamard_generator, zeilinger_generator, Decomposition};
use crate::equivalence::{
    canonical_form, canonical_pair, enumerate_classes, meb_equivalent_with, witness_to_bilocal_with, BilocalWitness,
    EquivalenceVerdict, SearchOptions, Witness,
};
use crate::error::{Error, Result};
use crate::exact::{ExponentMatrix, Tolerance};
use crate::io::{
    basis_to_string, generator_to_string, read_basis, read_generator, GeneratorKind, GeneratorProvenance,
    LoadedGenerator,
};
use crate::meb::{generate_meb_with, group_verify, verify_meb, MebBasis, StateFamily};
use crate::par::Exec;

/// Environment variable consulted when `--tol` is absent.
pub const TOL_ENV: &str = "MEB_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INEQUIVALENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "meb", version, about = "Maximally entangled bases from group characters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the decompositions of d.
    Decomp { d: usize },
    /// Emit a generator matrix.
    Gen(GenArgs),
    /// Emit all d² basis states of a generator.
    Basis {
        #[arg(long = "gen", value_name = "FILE")]
        generator: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        no_verify: bool,
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
    },
    /// Verify basis properties and the group law of the generator columns.
    Verify(VerifyArgs),
    /// Decide equivalence of the bases generated by two generators.
    Equiv {
        file1: PathBuf,
        file2: PathBuf,
        /// Cross-check with the exhaustive monomial search.
        #[arg(long)]
        oracle: bool,
        /// Build the explicit bilocal witness when equivalent.
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        no_verify: bool,
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
    },
    /// Enumerate equivalence classes of the decompositions of d.
    Classes { d: usize },
    /// Print the canonical form of a generator.
    Canon {
        file: PathBuf,
        #[arg(long)]
        no_verify: bool,
        #[arg(long, value_name = "EPS")]
        tol: Option<f64>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct GenSource {
    /// Decomposition such as 2x3; a single factor gives the DFT.
    #[arg(long, value_name = "FACTORS")]
    decomp: Option<String>,
    #[arg(long, value_name = "D")]
    dft: Option<usize>,
    #[arg(long, value_name = "N")]
    hadamard: Option<u32>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    source: GenSource,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false, args = ["generator", "basis"])]
struct VerifyArgs {
    #[arg(long = "gen", value_name = "FILE")]
    generator: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    basis: Option<PathBuf>,
    #[arg(long)]
    no_verify: bool,
    #[arg(long, value_name = "EPS")]
    tol: Option<f64>,
}

/// A command failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Discrepancy(_) | Error::NoBilocalWitness { .. }) {
            EXIT_DISCREPANCY
        } else {
            EXIT_USAGE
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Decomp { d } => cmd_decomp(d, out),
        Command::Gen(args) => cmd_gen(args, out),
        Command::Basis { generator, out: dest, no_verify, tol } => {
            cmd_basis(&generator, dest.as_deref(), no_verify, tol, out)
        }
        Command::Verify(args) => cmd_verify(args, out),
        Command::Equiv { file1, file2, oracle, witness, no_verify, tol } => {
            cmd_equiv(&file1, &file2, oracle, witness, no_verify, tol, out)
        }
        Command::Classes { d } => cmd_classes(d, out),
        Command::Canon { file, no_verify, tol } => cmd_canon(&file, no_verify, tol, out),
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure { code: EXIT_USAGE, message: format!("output: {e}") }
}

/// `--tol`, then the environment fallback, then the default.
pub fn resolve_tolerance(flag: Option<f64>) -> Result<Tolerance> {
    match flag {
        Some(eps) => Tolerance::new(eps),
        None => match std::env::var(TOL_ENV) {
            Ok(raw) => {
                let eps = raw.trim().parse::<f64>().map_err(|_| Error::InvalidTolerance(f64::NAN))?;
                Tolerance::new(eps)
            }
            Err(_) => Ok(Tolerance::default()),
        },
    }
}

fn load(path: &Path, no_verify: bool, tol: Tolerance) -> Result<LoadedGenerator> {
    read_generator(path, (!no_verify).then_some(tol))
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    match dest {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        }
        None => out.write_all(text.as_bytes()).map_err(io_fail)?,
    }
    Ok(EXIT_OK)
}

fn fmt_grid(e: &ExponentMatrix) -> String {
    let rows: Vec<String> = e.rows().map(|r| format!("{r:?}")).collect();
    format!("[{}]", rows.join(", "))
}

fn cmd_decomp(d: usize, out: &mut dyn Write) -> CmdResult {
    for dec in decompositions(d)? {
        writeln!(out, "{dec}").map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> CmdResult {
    let GenSource { decomp, dft, hadamard } = args.source;
    let (matrix, provenance) = if let Some(spec) = decomp {
        let dec: Decomposition = spec.parse()?;
        let kind = if dec.is_trivial() { GeneratorKind::Dft } else { GeneratorKind::Character };
        (zeilinger_generator(&dec), GeneratorProvenance { kind, decomposition: Some(dec) })
    } else if let Some(d) = dft {
        let dec = Decomposition::trivial(d)?;
        (dft_generator(d)?, GeneratorProvenance { kind: GeneratorKind::Dft, decomposition: Some(dec) })
    } else {
        let n = hadamard.expect("clap enforces one source");
        (hadamard_generator(n)?, GeneratorProvenance { kind: GeneratorKind::Hadamard, decomposition: None })
    };
    emit(&generator_to_string(&matrix, Some(&provenance)), args.out.as_deref(), out)
}

fn cmd_basis(path: &Path, dest: Option<&Path>, no_verify: bool, tol: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let tol = resolve_tolerance(tol)?;
    let g = load(path, no_verify, tol)?;
    let basis = generate_meb_with(&g.matrix, tol)?;
    emit(&basis_to_string(&basis, g.provenance.as_ref()), dest, out)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let tol = resolve_tolerance(args.tol)?;
    let (basis, source): (MebBasis, String) = match (&args.generator, &args.basis) {
        (Some(path), _) => {
            let g = load(path, args.no_verify, tol)?;
            let label = g.provenance.as_ref().map_or_else(|| "custom".into(), GeneratorProvenance::label);
            (generate_meb_with(&g.matrix, tol)?, label)
        }
        (None, Some(path)) => {
            let b = read_basis(path, tol)?;
            let label = b.provenance().label.clone();
            (b, label)
        }
        (None, None) => unreachable!("clap enforces one input"),
    };

    let report = verify_meb(&basis, tol);
    let mut lines = vec![
        format!("d: {}", basis.dim()),
        format!("source: {source}"),
        format!("tolerance: {tol}"),
        format!("orthonormal: {} (gram residual {:.3e})", pass(report.orthonormal), report.gram_residual),
        format!(
            "maximally entangled: {} (max entropy gap {:.3e})",
            pass(report.maximally_entangled),
            report.max_entropy_gap
        ),
    ];
    let mut ok = report.all_pass();
    match report.flat_generator {
        Some(flat) => lines.push(format!("flat moduli: {}", pass(flat))),
        None => lines.push("flat moduli: skipped (no generator)".into()),
    }
    let mut failures = report.failures.clone();
    if let Some(g) = &basis.provenance().generator {
        let group = group_verify(&StateFamily::from_generator(g), tol);
        lines.push(format!("group closure: {}", pass(group.closure)));
        lines.push(format!("group identity: {}", pass(group.identity_present)));
        lines.push(format!("group inverses: {}", pass(group.inverses)));
        lines.push(format!("group power condition: {}", pass(group.power_condition)));
        lines.push(format!("group commutative: {}", pass(group.commutative)));
        ok &= group.all_pass();
        failures.extend(group.failures);
    } else {
        lines.push("group: skipped (no generator)".into());
    }
    for f in failures {
        lines.push(format!("failure: {f}"));
    }
    lines.push(format!("result: {}", pass(ok)));
    for l in lines {
        writeln!(out, "{l}").map_err(io_fail)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_USAGE })
}

/// Report of the `equiv` command. The timing line is printed last and is
/// the only nondeterministic output.
#[derive(Clone, Debug)]
pub struct VerdictReport {
    pub equivalent: bool,
    pub tol: Tolerance,
    pub lines: Vec<String>,
    pub timing_ms: u128,
}

impl VerdictReport {
    pub fn verdict(&self) -> &'static str {
        if self.equivalent {
            "equivalent"
        } else {
            "inequivalent"
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("verdict: {}\ntolerance: {}\n", self.verdict(), self.tol);
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s.push_str(&format!("timing_ms: {}\n", self.timing_ms));
        s
    }
}

fn fmt_args(args: &[f64]) -> String {
    let parts: Vec<String> = args.iter().map(|a| format!("{a:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

fn witness_lines(w: &Witness) -> Vec<String> {
    vec![
        format!("witness col_perm (P1): {}", w.col_perm),
        format!("witness row_perm (P): {}", w.row_perm),
        format!("witness diag args: {}", fmt_args(&w.diag.args())),
    ]
}

fn bilocal_lines(b: &BilocalWitness) -> Vec<String> {
    let d = b.dim();
    let pairs: Vec<String> = b
        .pair_map
        .iter()
        .enumerate()
        .map(|(i, (j, k))| format!("({},{})->({j},{k})", i / d, i % d))
        .collect();
    vec![
        format!("bilocal P2: {}", b.p2),
        format!("bilocal relabeling: {:?}", b.relabeling_form()),
        format!("bilocal pair_map: {}", pairs.join(" ")),
        format!("bilocal theta: {}", fmt_args(&b.thetas)),
        format!("bilocal overlap residual: {:.3e}", b.overlap_residual),
        format!("bilocal factor residual: {:.3e}", b.factor_residual),
    ]
}

#[allow(clippy::too_many_arguments)]
fn cmd_equiv(
    file1: &Path,
    file2: &Path,
    oracle: bool,
    witness: bool,
    no_verify: bool,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> CmdResult {
    let start = Instant::now();
    let tol = resolve_tolerance(tol)?;
    let g1 = load(file1, no_verify, tol)?;
    let g2 = load(file2, no_verify, tol)?;
    let (v1, v2) = (&g1.matrix, &g2.matrix);
    let cert = canonical_pair(v1, v2, Exec::default())?;
    let equivalent = cert.canon1 == cert.canon2;
    let mut lines = vec![
        format!("d: {}", v1.dim()),
        format!("canon1: {}", fmt_grid(&cert.canon1)),
        format!("canon2: {}", fmt_grid(&cert.canon2)),
    ];

    let opts = SearchOptions { tol, exec: Exec::default() };
    let mut found: Option<Witness> = None;
    let mut failure: Option<Failure> = None;
    if oracle || (witness && equivalent) {
        let verdict = meb_equivalent_with(v1, v2, opts)?;
        if oracle {
            if verdict.is_equivalent() != equivalent {
                failure = Some(Failure {
                    code: EXIT_DISCREPANCY,
                    message: format!(
                        "canonical forms say {}, exhaustive search says {}",
                        equivalent,
                        verdict.is_equivalent()
                    ),
                });
                lines.push("oracle: DISAGREES".into());
            } else {
                lines.push("oracle: agrees".into());
            }
        }
        if let EquivalenceVerdict::Equivalent(w) = verdict {
            lines.extend(witness_lines(&w));
            found = Some(w);
        }
    }
    if witness && failure.is_none() {
        match (&found, equivalent) {
            (Some(w), true) => match witness_to_bilocal_with(v1, v2, w, opts) {
                Ok(b) => lines.extend(bilocal_lines(&b)),
                Err(e) => {
                    lines.push(format!("bilocal: none ({e})"));
                    failure = Some(e.into());
                }
            },
            _ => lines.push("bilocal: not applicable".into()),
        }
    }

    let report = VerdictReport { equivalent, tol, lines, timing_ms: start.elapsed().as_millis() };
    out.write_all(report.render().as_bytes()).map_err(io_fail)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(if equivalent { EXIT_OK } else { EXIT_INEQUIVALENT }),
    }
}

fn cmd_classes(d: usize, out: &mut dyn Write) -> CmdResult {
    let classes = enumerate_classes(d)?;
    writeln!(out, "d: {d}").map_err(io_fail)?;
    writeln!(out, "classes: {}", classes.len()).map_err(io_fail)?;
    for (i, c) in classes.iter().enumerate() {
        let members: Vec<String> = c.members.iter().map(ToString::to_string).collect();
        writeln!(out, "class {}: {}", i + 1, members.join(" ")).map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

fn cmd_canon(file: &Path, no_verify: bool, tol: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let tol = resolve_tolerance(tol)?;
    let g = load(file, no_verify, tol)?;
    let canon = canonical_form(&g.matrix)?;
    writeln!(out, "d: {}", canon.dim()).map_err(io_fail)?;
    writeln!(out, "base: {}", canon.order()).map_err(io_fail)?;
    for row in canon.rows() {
        writeln!(out, "{row:?}").map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

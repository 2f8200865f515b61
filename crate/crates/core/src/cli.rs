//! The `quatforms` command line.
//!
//! Every report starts with a header line
//! `# quatforms <version> mode=<mode> seed=<seed> config=<sha256>`, where the
//! hash covers the parsed configuration and the input text. Exit codes: 0 pass,
//! 1 fail, 2 usage, 3 input error.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bridge::{form_from_metric, QHermForm};
use crate::error::{BridgeError, ExperimentError};
use crate::experiments::{
    default_test_forms, sibony_with_tolerance, skoda_with_tolerance, ClosednessVerdict, IntegrabilityVerdict,
    QuadratureGrid, SingularFamily, DEFAULT_BETA, DEFAULT_CAUCHY_TOL, DEFAULT_STOKES_TOL,
};
use crate::form::Form;
use crate::format::{parse_records, to_float, Parsed};
use crate::positivity::{
    big_omega_q_positive, omega_q_positive, strongly_positive_2p0, weak_positive_pp, weakly_positive_2p0, Strategy,
    Verdict, VerdictKind,
};
use crate::scalar::{binomial, format_rational, CRational, Rational};
use crate::space::ModelSpace;
use crate::su2::weight_decompose;
use crate::suites::{run_suite, suites, SuiteConfig};
use crate::vmap::{a_basis, canonical_data, central_binomial, vmap_conjugation_sign, DEFAULT_BOUND};

const DEFAULT_SAMPLES: u64 = 4096;
const DEFAULT_SHELL_SAMPLES: u64 = 100_000;
const DEFAULT_LEVELS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "quatforms", version, about = "Quaternionic forms: decompositions, positivity, constants, experiments")]
pub struct Cli {
    /// Arithmetic: exact rationals or floating point. Experiments need float.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Quaternionic dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Seed for every sampled step; required by sampled commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Input records; standard input when absent or `-`.
    #[arg(long = "in", global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Bidegree and weight components of each input form, with norms.
    Decompose,
    /// Positivity verdicts for each input form.
    Positivity(PositivityArgs),
    /// λ, γ, Ξ and convention constants for one n.
    Constants,
    /// Run a named invariant suite, or `all`.
    Verify(VerifyArgs),
    /// Monte-Carlo experiments on singular forms.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("test").required(true).args(["weak", "strong", "omega_q", "big_omega_q"])))]
pub struct PositivityArgs {
    /// Weak positivity of a real (2p,0)- or (p,p)-form.
    #[arg(long)]
    pub weak: bool,
    /// Strong positivity of a real (2p,0)-form.
    #[arg(long)]
    pub strong: bool,
    /// ω^Q-positivity of a real (1,1)-form.
    #[arg(long = "omega-q", value_name = "Q")]
    pub omega_q: Option<usize>,
    /// Ω^Q-positivity of a real (2,0)-form.
    #[arg(long = "Omega-q", value_name = "Q")]
    pub big_omega_q: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(required_unless_present = "list")]
    pub suite: Option<String>,
    /// List the suites and exit.
    #[arg(long)]
    pub list: bool,
    /// Random inputs per identity.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Sibony,
    Skoda,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// Singularity strength of the point family.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of dyadic shells.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write report: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<BridgeError> for CliError {
    fn from(e: BridgeError) -> Self {
        match e {
            BridgeError::ExactUnavailable(_) | BridgeError::OutOfRange(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::TooFewSamples { .. } | ExperimentError::BadGrid(_) | ExperimentError::BadFamily(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// A finished report and whether it passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub passed: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// The resolved configuration that the header hash covers.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    pub version: &'static str,
    pub mode: Mode,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
    pub command: &'a Command,
    pub input_sha256: Option<String>,
}

impl RunConfig<'_> {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn header(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Float => "float",
        };
        format!("# quatforms {} mode={mode} seed={seed} config={}", self.version, self.hash())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn needs_input(cmd: &Command) -> bool {
    matches!(cmd, Command::Decompose | Command::Positivity(_))
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

/// Runs a parsed command line and returns the report, header included.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let input = if needs_input(&cli.command) { Some(read_input(cli.input.as_ref())?) } else { None };
    execute_with_input(cli, input.as_deref())
}

/// As [`execute`], with the input text supplied by the caller.
pub fn execute_with_input(cli: &Cli, input: Option<&str>) -> Result<Report, CliError> {
    let mode = resolve_mode(cli)?;
    let config = RunConfig {
        version: env!("CARGO_PKG_VERSION"),
        mode,
        n: cli.n,
        seed: cli.seed,
        tol: cli.tol,
        samples: cli.samples,
        command: &cli.command,
        input_sha256: input.map(|s| hex(&Sha256::digest(s.as_bytes()))),
    };
    let body = match &cli.command {
        Command::Decompose => decompose(mode, input.unwrap_or_default())?,
        Command::Positivity(args) => positivity(cli, mode, args, input.unwrap_or_default())?,
        Command::Constants => constants(cli)?,
        Command::Verify(args) => verify(cli, args)?,
        Command::Experiment(args) => experiment(cli, args)?,
    };
    Ok(Report { text: format!("{}\n{}", config.header(), body.text), passed: body.passed })
}

fn resolve_mode(cli: &Cli) -> Result<Mode, CliError> {
    match (&cli.command, cli.mode) {
        (Command::Experiment(_), Some(Mode::Exact)) => {
            Err(CliError::Usage("experiments run in float mode only; drop `--mode exact`".into()))
        }
        (Command::Experiment(_), _) => Ok(Mode::Float),
        (_, m) => Ok(m.unwrap_or(Mode::Exact)),
    }
}

fn require_seed(cli: &Cli, what: &str) -> Result<u64, CliError> {
    cli.seed.ok_or_else(|| CliError::Usage(format!("{what} samples randomly and needs `--seed`")))
}

fn parse_input(text: &str) -> Result<Vec<Form>, CliError> {
    let records = parse_records(text).map_err(|e| CliError::Input(format!("parse error at {e}")))?;
    if records.is_empty() {
        return Err(CliError::Input("no records in input".into()));
    }
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Parsed::Form(f) => Ok(f),
            Parsed::Metric(g) => Ok(form_from_metric::<CRational>(&g)),
            Parsed::PolyForm(_) => Err(CliError::Input(format!("record {}: polynomial coefficients are not accepted here", i + 1))),
        })
        .collect()
}

fn decompose(mode: Mode, input: &str) -> Result<Report, CliError> {
    let mut out = String::new();
    for (i, f) in parse_input(input)?.iter().enumerate() {
        let _ = writeln!(out, "record {}: n={} degree {}", i + 1, f.space().n(), f.degree());
        if f.is_zero() {
            let _ = writeln!(out, "  zero form");
            continue;
        }
        for ((p, q), part) in f.bidegree_decompose() {
            for (w, comp) in weight_decompose(&part).components {
                let norm2 = comp.euclid_pairing(&comp).expect("same degree").re;
                let norm = crate::scalar::rational_to_f64(&norm2).sqrt();
                match mode {
                    Mode::Exact => {
                        let _ = writeln!(out, "  weight {w}, bidegree ({p},{q}), norm^2 {}", format_rational(&norm2));
                    }
                    Mode::Float => {
                        let _ = writeln!(out, "  weight {w}, bidegree ({p},{q}), norm {norm:.12e}");
                    }
                }
            }
        }
    }
    Ok(Report { text: out, passed: true })
}

fn fmt_complex(c: &Complex64) -> String {
    format!("{:.6}{:+.6}i", c.re, c.im)
}

fn render_verdict(out: &mut String, v: &Verdict) {
    let _ = writeln!(out, "  verdict {:?}", v.kind);
    if let Some(w) = &v.witness {
        let _ = write!(out, "  witness value {:.12e}", w.value);
        if let Some(e) = &w.exact_value {
            let _ = write!(out, " (exact {})", format_rational(e));
        }
        let _ = writeln!(out);
        for (i, x) in w.vectors.iter().enumerate() {
            let comps: Vec<String> = x.iter().map(fmt_complex).collect();
            let _ = writeln!(out, "  witness x{} = [{}]", i + 1, comps.join(", "));
        }
    }
    if let Some(s) = &v.stats {
        let _ = writeln!(out, "  search samples {} best {:.6e} seed {}", s.samples, s.best, s.seed);
    }
    if let Some(c) = &v.certificate {
        let weights: Vec<String> = c.weights.iter().map(format_rational).collect();
        let _ = writeln!(out, "  certificate {} generators, weights [{}]", c.generators.len(), weights.join(", "));
    }
}

fn positivity(cli: &Cli, mode: Mode, args: &PositivityArgs, input: &str) -> Result<Report, CliError> {
    let forms = parse_input(input)?;
    let samples = cli.samples.unwrap_or(DEFAULT_SAMPLES);
    let mut out = String::new();
    let mut passed = true;
    for (i, f) in forms.iter().enumerate() {
        let k = f.degree();
        let bideg = f.bidegree_decompose().into_keys().collect::<Vec<_>>();
        let pure = |p: usize, q: usize| bideg.is_empty() || bideg == [(p, q)];
        let _ = writeln!(out, "record {}: n={} degree {k}", i + 1, f.space().n());
        let positive = if args.weak || args.strong {
            let verdict = if args.strong {
                if !pure(k, 0) {
                    return Err(CliError::Usage(format!("record {}: --strong needs a (2p,0)-form", i + 1)));
                }
                strongly_positive_2p0(f, require_seed(cli, "--strong")?)?
            } else {
                let strategy = match mode {
                    Mode::Exact => Strategy::Exact,
                    Mode::Float => Strategy::Descent { samples, seed: require_seed(cli, "float-mode --weak")? },
                };
                if k % 2 == 0 && pure(k / 2, k / 2) && k > 0 {
                    weak_positive_pp(f, strategy)?
                } else if pure(k, 0) {
                    weakly_positive_2p0(f, strategy).map_err(|e| match e {
                        BridgeError::ExactUnavailable(p) => CliError::Usage(format!(
                            "no exact criterion for p = {p}; rerun with `--mode float --seed S`"
                        )),
                        e => e.into(),
                    })?
                } else {
                    return Err(CliError::Usage(format!("record {}: --weak needs a (2p,0)- or (p,p)-form", i + 1)));
                }
            };
            render_verdict(&mut out, &verdict);
            verdict.kind == VerdictKind::PositiveCertified
        } else if let Some(q) = args.omega_q {
            if !pure(1, 1) || k != 2 {
                return Err(CliError::Usage(format!("record {}: --omega-q needs a (1,1)-form", i + 1)));
            }
            let ok = match mode {
                Mode::Exact => omega_q_positive(f, q, &QHermForm::<Rational>::flat(f.space()))?,
                Mode::Float => omega_q_positive(&to_float(f), q, &QHermForm::<f64>::flat(f.space()))?,
            };
            let _ = writeln!(out, "  omega^{q}-positive {ok}");
            ok
        } else if let Some(q) = args.big_omega_q {
            if !pure(2, 0) || k != 2 {
                return Err(CliError::Usage(format!("record {}: --Omega-q needs a (2,0)-form", i + 1)));
            }
            let ok = match mode {
                Mode::Exact => big_omega_q_positive(f, q)?,
                Mode::Float => big_omega_q_positive(&to_float(f), q)?,
            };
            let _ = writeln!(out, "  Omega^{q}-positive {ok}");
            ok
        } else {
            unreachable!("clap requires one test flag")
        };
        passed &= positive;
    }
    let seed = cli.seed.map_or_else(|| "none".into(), |s| s.to_string());
    let _ = writeln!(out, "seed {seed}");
    Ok(Report { text: out, passed })
}

fn constants(cli: &Cli) -> Result<Report, CliError> {
    let n = cli.n.ok_or_else(|| CliError::Usage("constants needs `--n`".into()))?;
    if n == 0 || n > DEFAULT_BOUND {
        return Err(CliError::Usage(format!("n = {n} is outside 1..={DEFAULT_BOUND}; the exact tables grow too fast beyond that")));
    }
    let d = canonical_data(n).map_err(|e| CliError::Input(e.to_string()))?;
    let space = ModelSpace::new(n).expect("bounded n");
    let two_path = d.lambda == d.lambda_xi_path;
    let closed = d.lambda == central_binomial(n);
    let ok = |b: bool| if b { "OK" } else { "MISMATCH" };
    let mut out = String::new();
    let _ = writeln!(out, "quantity,value");
    let _ = writeln!(out, "n,{n}");
    let _ = writeln!(out, "lambda,{}", format_rational(&d.lambda));
    let _ = writeln!(out, "lambda_xi_path,{}", format_rational(&d.lambda_xi_path));
    let _ = writeln!(out, "lambda_two_path,{}", ok(two_path));
    let _ = writeln!(out, "lambda_positive,{}", ok(d.lambda > Rational::from_integer(0.into())));
    let _ = writeln!(out, "lambda_literal,{}", d.lambda_literal);
    let _ = writeln!(out, "lambda_equals_C(2n;n),{}", ok(closed));
    let _ = writeln!(out, "gamma,{}", format_rational(&d.gamma));
    let xi: Vec<String> = d.xi_coefficients.iter().map(format_rational).collect();
    let _ = writeln!(out, "xi_coefficients,{}", xi.join(" "));
    let _ = writeln!(out, "kappa,{}", d.kappa);
    let _ = writeln!(out, "dim_A(n;n),{}", a_basis(space, n).len());
    let _ = writeln!(out, "q_star_kernel_dim,{}", d.q_star_kernel_dim);
    let _ = writeln!(out, "q_star_kernel_is_line,{}", ok(d.q_star_kernel_dim == 1));
    for p in 0..=n {
        let _ = writeln!(out, "vmap_reality_factor(p={p}),(-i)^{}", n - p);
        let _ = writeln!(out, "vmap_conjugation_sign(p={p}),{}", vmap_conjugation_sign(n, p));
    }
    for p in 1..=n {
        let _ = writeln!(out, "correspondence_constant(p={p}),{}*(-i)^{p}", format_rational(&binomial(2 * p, p)));
    }
    Ok(Report { text: out, passed: two_path && d.q_star_kernel_dim == 1 })
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<Report, CliError> {
    let mut out = String::new();
    if args.list {
        for s in suites() {
            let _ = writeln!(out, "{:<28} {}", s.name, s.summary);
        }
        return Ok(Report { text: out, passed: true });
    }
    let name = args.suite.as_deref().expect("clap requires a suite");
    let seed = require_seed(cli, "verify")?;
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        trials: args.trials.unwrap_or(defaults.trials),
        seed,
        samples: cli.samples.unwrap_or(defaults.samples),
    };
    let outcomes = if name == "all" {
        suites().iter().map(|s| s.run(&cfg)).collect()
    } else {
        vec![run_suite(name, &cfg).map_err(|e| CliError::Usage(format!("{e}; see `verify --list`")))?]
    };
    let mut passed = true;
    for o in &outcomes {
        passed &= o.passed();
        let _ = writeln!(out, "{o}");
    }
    Ok(Report { text: out, passed })
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<Report, CliError> {
    let seed = require_seed(cli, "experiment")?;
    let n = cli.n.unwrap_or(2);
    let grid = QuadratureGrid::dyadic(
        args.levels.unwrap_or(DEFAULT_LEVELS),
        cli.samples.unwrap_or(DEFAULT_SHELL_SAMPLES),
        seed,
    );
    let fam = SingularFamily::point(n, args.beta.unwrap_or(DEFAULT_BETA))?;
    match args.name {
        ExperimentName::Sibony => {
            let r = sibony_with_tolerance(&fam, &grid, cli.tol.unwrap_or(DEFAULT_CAUCHY_TOL))?;
            Ok(Report { text: r.render(), passed: r.verdict == IntegrabilityVerdict::Consistent })
        }
        ExperimentName::Skoda => {
            let tests = default_test_forms(fam.space(), seed)?;
            match skoda_with_tolerance(&fam, &tests, &grid, cli.tol.unwrap_or(DEFAULT_STOKES_TOL)) {
                Ok(r) => Ok(Report { text: r.render(), passed: r.verdict == ClosednessVerdict::Consistent }),
                Err(ExperimentError::NotConvergent) => Ok(Report {
                    text: "verdict,NotConvergent\nnote,the shell integrals did not converge; no pairing computed\n".into(),
                    passed: false,
                }),
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|report| {
        match &cli.out {
            Some(path) => std::fs::write(path, &report.text)?,
            None => print!("{}", report.text),
        }
        Ok(report)
    });
    match result {
        Ok(report) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("quatforms").chain(args.iter().copied())).expect("parses")
    }

    const OMEGA_N1: &str = r#"{"n": 1, "terms": [{"gens": ["z1", "z2"], "re": "1"}]}"#;

    #[test]
    fn decompose_omega() {
        let r = execute_with_input(&cli(&["decompose"]), Some(OMEGA_N1)).unwrap();
        assert!(r.text.contains("weight 2, bidegree (2,0)"), "{}", r.text);
        assert!(r.text.starts_with("# quatforms "));
    }

    #[test]
    fn decompose_mixed_lists_two_components() {
        let text = r#"{"n": 1, "terms": [{"gens": ["z1", "zb1"], "re": "1"}]}"#;
        let r = execute_with_input(&cli(&["decompose"]), Some(text)).unwrap();
        assert_eq!(r.text.lines().filter(|l| l.contains("weight")).count(), 2, "{}", r.text);
    }

    #[test]
    fn malformed_input_is_an_input_error() {
        let e = execute_with_input(&cli(&["decompose"]), Some("{\"n\": 1, \"terms\": [")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn omega_is_weakly_positive() {
        let r = execute_with_input(&cli(&["positivity", "--weak"]), Some(OMEGA_N1)).unwrap();
        assert!(r.passed && r.text.contains("PositiveCertified"), "{}", r.text);
    }

    #[test]
    fn constants_n1_and_bound() {
        let r = execute_with_input(&cli(&["constants", "--n", "1"]), None).unwrap();
        assert!(r.text.contains("gamma,1\n") && r.text.contains("lambda_two_path,OK"), "{}", r.text);
        let e = execute_with_input(&cli(&["constants", "--n", "10"]), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("outside"));
    }

    #[test]
    fn exact_experiment_and_missing_seed_are_usage_errors() {
        let e = execute_with_input(&cli(&["--mode", "exact", "--seed", "0", "experiment", "sibony"]), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = execute_with_input(&cli(&["experiment", "sibony"]), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = execute_with_input(&cli(&["verify", "casimir"]), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn header_is_reproducible_and_config_sensitive() {
        let a = execute_with_input(&cli(&["constants", "--n", "1"]), None).unwrap();
        let b = execute_with_input(&cli(&["constants", "--n", "1"]), None).unwrap();
        let c = execute_with_input(&cli(&["constants", "--n", "2"]), None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.text.lines().next(), c.text.lines().next());
    }
}

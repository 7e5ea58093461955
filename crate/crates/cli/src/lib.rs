//! Command-line front end for `orthomeasure`.
//!
//! Every subcommand produces a [`Certificate`]; `--output json` prints it as
//! JSON, the default prints aligned text.

pub mod certificate;
pub mod commands;
pub mod error;
pub mod format;
pub mod instance;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use orthomeasure::Tolerance;

pub use certificate::Certificate;
pub use error::CliError;

use commands::{Fixture, Pushforward};
use instance::ToleranceOverrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "orthomeasure", version, about = "Orthogonal measures of completely positive maps")]
pub struct Cli {
    /// Absolute tolerance for residual checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Tolerance for idempotency and unitarity checks.
    #[arg(long, global = true)]
    pub ortho_tol: Option<f64>,
    /// Tolerance below which two atoms are merged.
    #[arg(long, global = true)]
    pub merge_tol: Option<f64>,
    /// Largest atom count for the exhaustive splitting test.
    #[arg(long, global = true)]
    pub exhaustive_cap: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub output: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal Stinespring dilation of a map.
    Dilate {
        file: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// Complete positivity test for a map.
    CheckCp {
        file: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// Radon-Nikodym operator of a map against a base map.
    Rn {
        file: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        base: String,
    },
    /// Orthogonality of two maps.
    CheckPair {
        file: PathBuf,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Orthogonality of a discrete measure.
    CheckMeasure {
        file: PathBuf,
        #[arg(long)]
        measure: String,
    },
    /// The disintegration operator of a measure.
    UMu {
        file: PathBuf,
        #[arg(long)]
        measure: String,
    },
    /// The measure of an abelian subalgebra of the commutant.
    FromSubalgebra {
        file: PathBuf,
        #[arg(long)]
        subalgebra: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure to subalgebra to measure, or the reverse.
    Roundtrip {
        file: PathBuf,
        #[arg(long, conflicts_with = "subalgebra", required_unless_present = "subalgebra")]
        measure: Option<String>,
        #[arg(long)]
        subalgebra: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Built-in examples.
    Gallery {
        #[arg(value_enum)]
        fixture: Fixture,
        #[arg(long, value_enum, default_value = "none")]
        pushforward: Pushforward,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Print the measure as an instance file instead of checking it.
        #[arg(long)]
        instance: bool,
    },
    /// Seeded random instances checked by all three orthogonality tests.
    RandomCorpus {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Directory receiving one certificate file per instance.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dilate { .. } => "dilate",
            Command::CheckCp { .. } => "check-cp",
            Command::Rn { .. } => "rn",
            Command::CheckPair { .. } => "check-pair",
            Command::CheckMeasure { .. } => "check-measure",
            Command::UMu { .. } => "u-mu",
            Command::FromSubalgebra { .. } => "from-subalgebra",
            Command::Roundtrip { .. } => "roundtrip",
            Command::Gallery { .. } => "gallery",
            Command::RandomCorpus { .. } => "random-corpus",
        }
    }
}

/// What a run prints and how it exits.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let overrides = ToleranceOverrides {
        atol: cli.tol,
        rank_rtol: None,
        ortho_tol: cli.ortho_tol,
        merge_tol: cli.merge_tol,
        exhaustive_cap: cli.exhaustive_cap,
    };
    let name = cli.command.name();
    let start = Instant::now();

    if let Command::RandomCorpus { seed, count, out_dir } = &cli.command {
        return corpus(cli, &overrides, *seed, *count, out_dir.as_deref());
    }

    let mut tol = Tolerance::default();
    let mut cert = Certificate::new(name);
    let result = dispatch(cli, &overrides, &mut tol, &mut cert);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(Some(raw)) => Outcome { code: 0, stdout: raw + "\n", stderr: String::new() },
        Ok(None) => {
            cert.wall_clock_ms = elapsed;
            Outcome { code: 0, stdout: render(&cert, cli.output), stderr: String::new() }
        }
        Err(e) => {
            let mut failed = Certificate::failed(name, &e);
            failed.seed = cert.seed;
            failed.wall_clock_ms = elapsed;
            Outcome {
                code: e.exit_code(),
                stdout: render(&failed, cli.output),
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn render(cert: &Certificate, output: OutputFormat) -> String {
    match output {
        OutputFormat::Json => cert.to_json() + "\n",
        OutputFormat::Text => cert.to_text(),
    }
}

fn dispatch(
    cli: &Cli,
    overrides: &ToleranceOverrides,
    tol: &mut Tolerance,
    cert: &mut Certificate,
) -> Result<Option<String>, CliError> {
    use commands as c;
    match &cli.command {
        Command::Dilate { file, map } => c::dilate(&c::load(file, tol, overrides)?, map, cert, tol)?,
        Command::CheckCp { file, map } => c::check_cp(&c::load(file, tol, overrides)?, map, cert, tol)?,
        Command::Rn { file, map, base } => c::rn(&c::load(file, tol, overrides)?, map, base, cert, tol)?,
        Command::CheckPair { file, first, second } => {
            c::check_pair(&c::load(file, tol, overrides)?, first, second, cert, tol)?
        }
        Command::CheckMeasure { file, measure } => {
            c::check_measure(&c::load(file, tol, overrides)?, measure, cert, tol)?
        }
        Command::UMu { file, measure } => c::u_mu(&c::load(file, tol, overrides)?, measure, cert, tol)?,
        Command::FromSubalgebra { file, subalgebra, seed } => {
            c::from_subalgebra(&c::load(file, tol, overrides)?, subalgebra, *seed, cert, tol)?
        }
        Command::Roundtrip { file, measure, subalgebra, seed } => c::roundtrip(
            &c::load(file, tol, overrides)?,
            measure.as_deref(),
            subalgebra.as_deref(),
            *seed,
            cert,
            tol,
        )?,
        Command::Gallery { fixture, pushforward, n, instance } => {
            overrides.apply(tol);
            tol.validate()?;
            return c::gallery_cmd(*fixture, *pushforward, *n, *instance, cert, tol);
        }
        Command::RandomCorpus { .. } => unreachable!("handled before dispatch"),
    }
    Ok(None)
}

fn corpus(
    cli: &Cli,
    overrides: &ToleranceOverrides,
    seed: u64,
    count: usize,
    out_dir: Option<&std::path::Path>,
) -> Outcome {
    let mut tol = Tolerance::default();
    overrides.apply(&mut tol);
    let fail = |e: CliError| Outcome {
        code: e.exit_code(),
        stdout: render(&Certificate::failed("random-corpus", &e), cli.output),
        stderr: format!("error: {e}\n"),
    };
    if let Err(e) = tol.validate() {
        return fail(e.into());
    }
    let certs = commands::random_corpus(seed, count, &tol, "random-corpus");
    if let Some(dir) = out_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(CliError::Input(format!("cannot create {}: {e}", dir.display())));
        }
        for (i, cert) in certs.iter().enumerate() {
            let path = dir.join(format!("instance_{i:05}.json"));
            if let Err(e) = commands::write_atomically(&path, &cert.to_json()) {
                return fail(CliError::Input(format!("cannot write {}: {e}", path.display())));
            }
        }
    }
    let stdout = match cli.output {
        OutputFormat::Json => serde_json::to_string_pretty(&certs).expect("certificates serialize") + "\n",
        OutputFormat::Text => corpus_table(&certs),
    };
    Outcome { code: 0, stdout, stderr: String::new() }
}

fn corpus_table(certs: &[Certificate]) -> String {
    let mut out = format!("{:>6} {:>20} {:<14} {:>6} {:>10} {:>10} {:>8} {:>6}\n", "index", "seed", "kind", "atoms", "orthogonal", "exhaustive", "unitary", "agree");
    let mut disagreements = 0;
    for (i, c) in certs.iter().enumerate() {
        let v = |k: &str| c.verdicts.get(k).map_or("-".to_string(), |x| match x {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        });
        if v("all_agree") != "true" {
            disagreements += 1;
        }
        let atoms = c.dimensions.get("atoms").map_or("-".into(), |x| x.to_string());
        out.push_str(&format!(
            "{:>6} {:>20} {:<14} {:>6} {:>10} {:>10} {:>8} {:>6}\n",
            i,
            c.seed.unwrap_or_default(),
            v("kind"),
            atoms,
            v("orthogonal"),
            v("exhaustive_orthogonal"),
            v("unitary"),
            v("all_agree"),
        ));
    }
    out.push_str(&format!("instances: {}  disagreements: {disagreements}\n", certs.len()));
    out
}

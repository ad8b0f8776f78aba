//! `krammer`: batch verifier. NDJSON reports on stdout, a summary on stderr.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use krammer_core::suite::{default_types, exit_code};
use krammer_core::{
    parse_rational, run_suite, CheckKind, CheckReport, FactoredDiscriminant, FoldSource,
    GeneratorSet, Rational, Status, SuiteConfig, TypeSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "krammer",
    version,
    about = "Verify identities of infinitesimal Krammer representations"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Comma-separated types, e.g. A3,D4,E6.
    #[arg(long = "type", global = true, value_delimiter = ',')]
    types: Vec<String>,
    /// Comma-separated exact rationals, e.g. 5,7,11/3.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    m: Vec<String>,
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Run checks gated as long-running.
    #[arg(long, global = true)]
    allow_long: bool,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    json_only: bool,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one family of checks.
    Check {
        #[arg(value_enum)]
        kind: Kind,
    },
    /// Discriminant of the invariant form, optionally against an expected factorization.
    Discriminant {
        /// Product of factors `(m±k)^e`.
        #[arg(long, allow_hyphen_values = true)]
        expect: Option<String>,
    },
    /// Lie closure of generators modulo a prime.
    Closure {
        /// all, simple or last_column.
        #[arg(long)]
        generators: Option<String>,
        /// F4, H3 or H4; the type defaults to the folding target.
        #[arg(long)]
        folded: Option<String>,
        /// Bracket budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Reflection counts.
    Counts,
    /// Every desk-scale check.
    All,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Holonomy,
    Cubic,
    Central,
    Equivariance,
    Selfadjoint,
    Triples,
    Wbasis,
    Vanishing,
    Branch,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "type")]
    types: Option<StrOrList>,
    m: Option<StrOrList>,
    prime: Option<u64>,
    allow_long: Option<bool>,
    json_only: Option<bool>,
    generators: Option<String>,
    folded: Option<String>,
    expect: Option<String>,
    budget: Option<usize>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum StrOrList {
    One(String),
    Int(i64),
    Many(Vec<toml::Value>),
}

impl StrOrList {
    fn items(&self) -> Vec<String> {
        match self {
            Self::One(s) => s.split(',').map(|x| x.trim().to_string()).collect(),
            Self::Int(i) => vec![i.to_string()],
            Self::Many(v) => v
                .iter()
                .map(|x| match x {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect(),
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> String {
    format!("error: {msg}")
}

fn build_config(cli: &Cli) -> Result<(SuiteConfig, bool), String> {
    let file: FileConfig = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let c = &cli.common;
    let pick = |flag: &[String], file: &Option<StrOrList>| -> Vec<String> {
        if flag.is_empty() {
            file.as_ref().map(StrOrList::items).unwrap_or_default()
        } else {
            flag.to_vec()
        }
    };
    let mut config = SuiteConfig::default();
    let ms = pick(&c.m, &file.m);
    if !ms.is_empty() {
        config.m = ms
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<Rational>, _>>()
            .map_err(usage)?;
    }
    if let Some(p) = c.prime.or(file.prime) {
        config.prime = p;
    }
    config.allow_long = c.allow_long || file.allow_long.unwrap_or(false);
    let json_only = c.json_only || file.json_only.unwrap_or(false);
    let types = pick(&c.types, &file.types);
    config.types = types
        .iter()
        .map(|s| s.parse::<TypeSpec>())
        .collect::<Result<_, _>>()
        .map_err(usage)?;

    match &cli.command {
        Command::Check { kind } => {
            let name = format!("{kind:?}").to_ascii_lowercase();
            config.checks = vec![name.parse::<CheckKind>().map_err(usage)?];
        }
        Command::Discriminant { expect } => {
            config.checks = vec![CheckKind::Discriminant];
            if let Some(e) = expect.as_ref().or(file.expect.as_ref()) {
                config.expect = Some(FactoredDiscriminant::parse(e).map_err(usage)?);
            }
        }
        Command::Closure {
            generators,
            folded,
            budget,
        } => {
            config.checks = vec![CheckKind::Closure];
            if let Some(g) = generators.as_ref().or(file.generators.as_ref()) {
                config.generator_set = g.parse::<GeneratorSet>().map_err(usage)?;
            }
            if let Some(f) = folded.as_ref().or(file.folded.as_ref()) {
                let src = f.parse::<FoldSource>().map_err(usage)?;
                if config.types.is_empty() {
                    config.types = vec![krammer_core::coxeter::folding_table(src).target];
                }
                config.folded = Some(src);
            }
            config.closure_budget = budget.or(file.budget);
        }
        Command::Counts => config.checks = vec![CheckKind::Counts],
        Command::All => {
            config.checks = CheckKind::ALL.to_vec();
            if config.types.is_empty() {
                config.types = default_types();
            }
            if ms.is_empty() {
                // away from every discriminant root of the default types
                config.m = vec![
                    Rational::from_integer(8.into()),
                    Rational::from_integer(11.into()),
                ];
            }
        }
    }
    if config.types.is_empty() {
        return Err(usage("no type given (use --type)"));
    }
    Ok((config, json_only))
}

fn run_all(config: &SuiteConfig) -> krammer_core::Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for &spec in &config.types {
        let checks = config
            .checks
            .iter()
            .copied()
            .filter(|&k| {
                k != CheckKind::Branch
                    || matches!(
                        spec.family(),
                        krammer_core::Family::A | krammer_core::Family::D
                    ) && spec.rank_or_order() >= 2
            })
            .collect();
        let sub = SuiteConfig {
            types: vec![spec],
            checks,
            ..config.clone()
        };
        out.extend(run_suite(&sub)?);
    }
    Ok(out)
}

fn summary(reports: &[CheckReport]) -> String {
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let mut text = format!(
        "{} checks: {} pass, {} fail, {} skipped\n",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::SkippedDegenerate)
    );
    for r in reports.iter().filter(|r| r.status == Status::Fail) {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text.push_str(&format!(
            "FAIL {} {} {}\n",
            r.check_id,
            r.type_string,
            params.join(" ")
        ));
    }
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, json_only) = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let result = if matches!(cli.command, Command::All) {
        run_all(&config)
    } else {
        run_suite(&config)
    };
    let reports = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", usage(e));
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for r in &reports {
        let _ = writeln!(lock, "{}", r.to_json_line());
    }
    if !json_only {
        eprint!("{}", summary(&reports));
    }
    ExitCode::from(exit_code(&reports) as u8)
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use soliton_forge::config::{parse_pairs, SuiteConfig, KEYS};
use soliton_forge::identities::{flux_functional, perturb};
use soliton_forge::io::{read_profile_csv, write_profile_csv, write_psi_csv};
use soliton_forge::profile::SolitonProfile;
use soliton_forge::solver::solve_bryant;
use soliton_forge::suite::{psi_for_profile, run_suite};
use soliton_forge::Error;

/// Configuration-file key read by the frontend itself.
const OUTPUT_KEY: &str = "output";

#[derive(Parser)]
#[command(name = "soliton-forge", version, about = "Construct the Bryant soliton and verify its identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the soliton and write its profile CSV.
    Solve(Common),
    /// Write the psi table of a profile.
    Psi {
        #[command(flatten)]
        common: Common,
        /// Profile CSV; the default Bryant profile is solved if absent.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Run every check and write the JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Write a profile carrying a smooth bump.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Field carrying the bump (df or phi).
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        amplitude: Option<String>,
    },
    /// Print the weighted flux through spheres of the given radii.
    Flux {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Comma-separated radii; defaults to 2^l for l = 0..=flux_levels.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// List every configuration key.
    Keys,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Resolved {
    config: SuiteConfig,
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, extra: &[(&str, Option<&String>)]) -> Result<Resolved, Error> {
        let mut config = SuiteConfig::default();
        let mut out = None;
        if let Some(path) = &self.config {
            let text = read(path)?;
            for (key, value, line) in parse_pairs(&text)? {
                if key == OUTPUT_KEY {
                    out = Some(PathBuf::from(value));
                    continue;
                }
                config.set(&key, &value).map_err(|e| match e {
                    Error::Config(reason) => Error::Parse { line, reason: format!("{}: {reason}", path.display()) },
                    other => other,
                })?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            config.set(k.trim(), v)?;
        }
        let flags = [("rel_tol", self.rel_tol.as_ref()), ("abs_tol", self.abs_tol.as_ref())];
        for (k, v) in flags.iter().chain(extra) {
            if let Some(v) = v {
                config.set(k, v)?;
            }
        }
        config.validate()?;
        Ok(Resolved { config, out: self.out.clone().or(out) })
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_profile(path: Option<&PathBuf>, config: &SuiteConfig) -> Result<SolitonProfile, Error> {
    match path {
        Some(p) => read_profile_csv(&read(p)?).map_err(|e| match e {
            Error::Parse { line, reason } => Error::Parse { line, reason: format!("{}: {reason}", p.display()) },
            other => other,
        }),
        None => solve_bryant(&config.solver()),
    }
}

/// Exit status of a completed command.
enum Outcome {
    Pass,
    ChecksFailed,
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Solve(common) => {
            let r = common.resolve(&[])?;
            let profile = solve_bryant(&r.config.solver())?;
            emit(r.out.as_deref(), &write_profile_csv(&profile))?;
        }
        Command::Psi { common, profile } => {
            let r = common.resolve(&[])?;
            let p = load_profile(profile.as_ref(), &r.config)?;
            let psi = psi_for_profile(&r.config, &p)?;
            emit(r.out.as_deref(), &write_psi_csv(&psi))?;
        }
        Command::Verify { common, profile } => {
            let r = common.resolve(&[])?;
            let supplied = match &profile {
                Some(_) => Some(load_profile(profile.as_ref(), &r.config)?),
                None => None,
            };
            let report = run_suite(&r.config, supplied);
            let json = report.to_json()?;
            let table = report.summary_table();
            match &r.out {
                Some(path) => {
                    emit(Some(path), &json)?;
                    emit(None, &table)?;
                }
                None => {
                    emit(None, &json)?;
                    eprint!("{table}");
                }
            }
            if !report.pass {
                return Ok(Outcome::ChecksFailed);
            }
        }
        Command::Perturb { common, profile, target, amplitude } => {
            let r = common.resolve(&[("perturb_target", target.as_ref()), ("perturb_amplitude", amplitude.as_ref())])?;
            let base = load_profile(profile.as_ref(), &r.config)?;
            let p = perturb(&base, &r.config.perturbation())?;
            emit(r.out.as_deref(), &write_profile_csv(&p))?;
        }
        Command::Flux { common, profile, radii } => {
            let r = common.resolve(&[])?;
            let p = load_profile(profile.as_ref(), &r.config)?;
            let psi = psi_for_profile(&r.config, &p)?;
            let radii = radii.unwrap_or_else(|| (0..=r.config.flux_levels).map(|l| 2f64.powi(l as i32)).collect());
            let mut text = String::from("r,flux\n");
            for rad in radii {
                match flux_functional(&p, &psi, rad) {
                    Ok(v) => text += &format!("{rad:.16e},{v:.16e}\n"),
                    Err(e) => {
                        eprintln!("r = {rad}: {e}");
                        text += &format!("{rad:.16e},nan\n");
                    }
                }
            }
            emit(r.out.as_deref(), &text)?;
        }
        Command::Keys => {
            let defaults = SuiteConfig::default();
            let json = serde_json::to_value(&defaults)?;
            let mut text = String::new();
            for (key, doc) in KEYS {
                let value = match &json[key] {
                    serde_json::Value::Array(items) => {
                        items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
                    }
                    serde_json::Value::String(s) => s.clone(),
                    v => v.to_string(),
                };
                text += &format!("{key} = {value}  # {doc}\n");
            }
            text += &format!("{OUTPUT_KEY} =  # output file (config file only; --out overrides)\n");
            emit(None, &text)?;
        }
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! `homns`: command-line front end for the homogeneous Navier-Stokes toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure or failed check.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use commands::{execute, Sub};
use config::Config;
use error::CliError;
use manifest::RunManifest;

/// Environment variable naming the default output root.
const OUT_ENV: &str = "HOMNS_OUT";

#[derive(Parser)]
#[command(name = "homns", version, about = "Profiles, fields, inequalities, decay constants and simulations for (-1)-homogeneous Navier-Stokes flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key = value file with [section] headers
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set grid.n=16 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run directory; defaults to $HOMNS_OUT/<subcommand> or ./homns-out/<subcommand>
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON summary instead of key = value lines
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone, Default)]
struct ParamFlags {
    /// c1 c2 c3
    #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["C1", "C2", "C3"])]
    c: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
}

impl ParamFlags {
    fn apply(&self, cfg: &mut Config, sec: &str) {
        if let Some(c) = &self.c {
            for (k, v) in ["c1", "c2", "c3"].iter().zip(c) {
                cfg.set(&format!("{sec}.{k}"), v);
            }
        }
        if let Some(g) = self.gamma {
            cfg.set(&format!("{sec}.gamma"), g);
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Membership in J and M, c-bar_3 and the gamma range
    Classify {
        #[command(flatten)]
        p: ParamFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the profile ODE and export y, U, U'
    Profile {
        #[command(flatten)]
        p: ParamFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Velocity and pressure on a meridian, plus b and the K triple
    Field {
        #[command(flatten)]
        p: ParamFlags,
        #[arg(long)]
        ntheta: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Decay constants C_q(tau); comma-separated lists allowed
    Constants {
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a check suite: ckn-corollary, aq-sweep, log-sobolev, t-log, b, k
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        p: ParamFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Time-step a perturbation of the mollified background
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Independent simulations over a list of values for one key
    Sweep {
        #[arg(long)]
        key: Option<String>,
        #[arg(long)]
        values: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a manifest and compare its CSV outputs byte for byte
    Replay {
        /// manifest.json or its run directory
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(sub: Sub, common: &Common, flags: impl FnOnce(&mut Config)) -> Result<Config, CliError> {
    let mut cfg = sub.defaults();
    if let Some(path) = &common.config {
        cfg.merge(&Config::load(path)?)?;
    }
    for pair in &common.set {
        cfg.set_pair(pair)?;
    }
    let known: Vec<String> = cfg.keys().map(str::to_string).collect();
    flags(&mut cfg);
    if let Some(k) = cfg.keys().find(|k| !known.iter().any(|n| n == k)) {
        return Err(CliError::Config(format!("unknown key `{k}`")));
    }
    Ok(cfg)
}

fn default_dir(sub: Sub) -> PathBuf {
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("homns-out"));
    root.join(sub.name())
}

fn print_summary(v: &serde_json::Value, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
        return;
    }
    fn walk(prefix: &str, v: &serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x);
                }
            }
            serde_json::Value::Number(n) => match n.as_f64() {
                Some(f) if !n.is_i64() && !n.is_u64() => println!("{prefix} = {}", commands::num(f)),
                _ => println!("{prefix} = {n}"),
            },
            other => println!("{prefix} = {other}"),
        }
    }
    walk("", v);
}

/// Manifest first, then the work, then the completed manifest.
fn run(sub: Sub, cfg: &Config, dir: &Path, json: bool) -> Result<(RunManifest, bool), CliError> {
    let mut m = RunManifest::begin(sub.name(), cfg, dir)?;
    // same settings in the file format, usable with --config
    std::fs::write(dir.join("resolved.conf"), cfg.render())?;
    match execute(sub, cfg, dir) {
        Ok(out) => {
            let status = if out.passed { "ok" } else { "check_failed" };
            m.finish(dir, status, out.outputs, None)?;
            print_summary(&out.summary, json);
            println!("run_dir = {}", dir.display());
            Ok((m, out.passed))
        }
        Err(e) => {
            m.finish(dir, "error", vec![], Some(e.to_string()))?;
            Err(e)
        }
    }
}

fn replay(path: &Path, out: Option<PathBuf>) -> Result<bool, CliError> {
    let (orig, orig_dir) = RunManifest::read(path)?;
    let sub = Sub::from_name(&orig.subcommand)?;
    let mut cfg = sub.defaults();
    cfg.merge(&orig.config)?;
    let dir = out.unwrap_or_else(|| orig_dir.join("replay"));
    let (_, _) = run(sub, &cfg, &dir, false)?;
    let mut identical = true;
    for name in orig.outputs.iter().filter(|n| n.ends_with(".csv")) {
        let a = std::fs::read(orig_dir.join(name))?;
        let b = std::fs::read(dir.join(name)).unwrap_or_default();
        let same = a == b;
        identical &= same;
        println!("{} {name}", if same { "identical" } else { "differs" });
    }
    Ok(identical)
}

fn real_main() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let (sub, cfg, common) = match cli.command {
        Command::Replay { manifest, out } => return Ok(if replay(&manifest, out)? { 0 } else { 3 }),
        Command::Classify { p, common } => (Sub::Classify, resolve(Sub::Classify, &common, |c| p.apply(c, "params"))?, common),
        Command::Profile { p, common } => (Sub::Profile, resolve(Sub::Profile, &common, |c| p.apply(c, "params"))?, common),
        Command::Field { p, ntheta, common } => {
            let cfg = resolve(Sub::Field, &common, |c| {
                p.apply(c, "params");
                if let Some(n) = ntheta {
                    c.set("field.ntheta", n);
                }
            })?;
            (Sub::Field, cfg, common)
        }
        Command::Constants { q, tau, common } => {
            let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
            let cfg = resolve(Sub::Constants, &common, |c| {
                if !q.is_empty() {
                    c.set("constants.q", join(&q));
                }
                if !tau.is_empty() {
                    c.set("constants.tau", join(&tau));
                }
            })?;
            (Sub::Constants, cfg, common)
        }
        Command::Verify { suite, alpha, seed, p, common } => {
            let cfg = resolve(Sub::Verify, &common, |c| {
                p.apply(c, "params");
                if let Some(s) = suite {
                    c.set("verify.suite", s);
                }
                if let Some(a) = alpha {
                    c.set("verify.alpha", a);
                }
                if let Some(s) = seed {
                    c.set("verify.seed", s);
                }
            })?;
            (Sub::Verify, cfg, common)
        }
        Command::Simulate { n, dt, t_end, seed, common } => {
            let cfg = resolve(Sub::Simulate, &common, |c| {
                if let Some(v) = n {
                    c.set("grid.n", v);
                }
                if let Some(v) = dt {
                    c.set("time.dt", v);
                }
                if let Some(v) = t_end {
                    c.set("time.t_end", v);
                }
                if let Some(v) = seed {
                    c.set("init.seed", v);
                }
            })?;
            (Sub::Simulate, cfg, common)
        }
        Command::Sweep { key, values, common } => {
            let cfg = resolve(Sub::Sweep, &common, |c| {
                if let Some(k) = key {
                    c.set("sweep.key", k);
                }
                if let Some(v) = values {
                    c.set("sweep.values", v);
                }
            })?;
            (Sub::Sweep, cfg, common)
        }
    };
    let dir = common.out.clone().unwrap_or_else(|| default_dir(sub));
    let (_, passed) = run(sub, &cfg, &dir, common.json)?;
    Ok(if passed { 0 } else { 3 })
}

fn main() {
    let code = match real_main() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("homns: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

//! Subcommand bodies. Each one reads a resolved [`Config`], writes its files into
//! the run directory and returns a JSON summary.

use std::path::Path;

use homns_core::decay::{constant_via_quadrature, DecayBound};
use homns_core::field::VelocityField;
use homns_core::functionals::{compute_b, compute_k, t_log_check, BQuadrature};
use homns_core::inequality::{
    aq_membership, ckn_conditions, ckn_empirical, curated_weights, log_sobolev_check, muckenhoupt_ratio,
    sample_log_sobolev_functions, BumpSampler, CknSpec,
};
use homns_core::{cbar3, gamma_range, is_admissible, solve_profile, Classification, HomParams, SolverOptions};
use homns_spectral::sim::{envelope_crossings, monotonicity, Dealias, SimOutput};
use homns_spectral::{energy_report, make_background, picard_linear, run_sim, Grid, InitSpec, PicardConfig, SimConfig};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sub {
    Classify,
    Profile,
    Field,
    Constants,
    Verify,
    Simulate,
    Sweep,
}

impl Sub {
    pub const ALL: [Sub; 7] = [Sub::Classify, Sub::Profile, Sub::Field, Sub::Constants, Sub::Verify, Sub::Simulate, Sub::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Sub::Classify => "classify",
            Sub::Profile => "profile",
            Sub::Field => "field",
            Sub::Constants => "constants",
            Sub::Verify => "verify",
            Sub::Simulate => "simulate",
            Sub::Sweep => "sweep",
        }
    }

    pub fn from_name(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| CliError::Config(format!("unknown subcommand `{s}`")))
    }

    /// Every key the subcommand understands, with its default.
    pub fn defaults(self) -> Config {
        let mut c = Config::default();
        let params = |c: &mut Config| {
            for k in ["c1", "c2", "c3", "gamma"] {
                c.set(&format!("params.{k}"), 0);
            }
        };
        let solver = |c: &mut Config| {
            let o = SolverOptions::default();
            c.set("solver.tol", 1e-8);
            c.set("solver.node_spacing", o.node_spacing);
            c.set("solver.boundary_layer", o.boundary_layer);
        };
        match self {
            Sub::Classify => {
                params(&mut c);
                c.set("classify.tol", 1e-8);
            }
            Sub::Profile => {
                params(&mut c);
                solver(&mut c);
            }
            Sub::Field => {
                params(&mut c);
                solver(&mut c);
                c.set("field.r", 1);
                c.set("field.ntheta", 65);
                c.set("field.theta_min", 1e-3);
            }
            Sub::Constants => {
                c.set("constants.q", 6);
                c.set("constants.tau", 0.5);
            }
            Sub::Verify => {
                params(&mut c);
                solver(&mut c);
                c.set("verify.suite", "ckn-corollary");
                c.set("verify.alpha", 0.5);
                c.set("verify.samples", 50);
                c.set("verify.seed", 1);
            }
            Sub::Simulate => simulate_defaults(&mut c),
            Sub::Sweep => {
                simulate_defaults(&mut c);
                c.set("sweep.key", "background.c3");
                c.set("sweep.values", "0.05,0.1,0.2");
                c.set("sweep.threads", 0);
            }
        }
        c
    }
}

fn simulate_defaults(c: &mut Config) {
    let d = SimConfig::default();
    c.set("grid.n", d.n);
    c.set("grid.l", d.l);
    c.set("time.dt", d.dt);
    c.set("time.t_end", d.t_end);
    c.set("time.output_every", d.output_every);
    c.set("time.cfl", d.cfl);
    c.set("background.c1", d.params.c1);
    c.set("background.c2", d.params.c2);
    c.set("background.c3", d.params.c3);
    c.set("background.gamma", d.params.gamma);
    c.set("background.rho_m", d.rho_m);
    c.set("background.r_c", d.r_c);
    c.set("init.kind", "random");
    c.set("init.seed", 1);
    c.set("init.l3_norm", 0.05);
    c.set("init.k0", 2);
    c.set("init.amplitude", 0.1);
    c.set("init.m", 1);
    c.set("model.nonlinear", d.nonlinear);
    c.set("model.dealias", "two_thirds");
    c.set("output.q_list", "6");
    c.set("report.q", 6);
    c.set("report.tau", 0.5);
    c.set("report.t_min", 1);
    c.set("report.comparison", 1);
    c.set("picard.iterations", 0);
    c.set("picard.steps", 25);
    c.set("picard.dt", 0.02);
}

pub struct Outcome {
    pub outputs: Vec<String>,
    pub summary: Value,
    pub passed: bool,
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<String>,
}

impl Writer<'_> {
    fn file(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(p) = path.parent() {
            std::fs::create_dir_all(p)?;
        }
        std::fs::write(path, contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        self.file(name, (serde_json::to_string_pretty(v)? + "\n").as_bytes())
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn params(cfg: &Config, sec: &str) -> Result<HomParams, CliError> {
    let g = |k: &str| cfg.f64(&format!("{sec}.{k}"));
    Ok(HomParams::new(g("c1")?, g("c2")?, g("c3")?, g("gamma")?))
}

fn solver(cfg: &Config) -> Result<(SolverOptions, f64), CliError> {
    let opts = SolverOptions {
        node_spacing: cfg.f64("solver.node_spacing")?,
        boundary_layer: cfg.f64("solver.boundary_layer")?,
        ..SolverOptions::default()
    };
    if !(opts.node_spacing > 0.0 && opts.boundary_layer > 0.0 && opts.boundary_layer < 0.5) {
        return Err(CliError::Config("need node_spacing > 0 and boundary_layer in (0, 0.5)".into()));
    }
    Ok((opts, cfg.f64("solver.tol")?))
}

pub fn sim_config(cfg: &Config) -> Result<SimConfig, CliError> {
    let init = match cfg.raw("init.kind")? {
        "zero" => InitSpec::Zero,
        "random" => InitSpec::Random { seed: cfg.get("init.seed")?, l3_norm: cfg.f64("init.l3_norm")?, k0: cfg.f64("init.k0")? },
        "single_mode" => InitSpec::SingleMode { amplitude: cfg.f64("init.amplitude")?, m: cfg.get("init.m")? },
        "taylor_green" => InitSpec::TaylorGreen { amplitude: cfg.f64("init.amplitude")? },
        other => return Err(CliError::Config(format!("init.kind `{other}`: expected zero, random, single_mode or taylor_green"))),
    };
    let dealias = match cfg.raw("model.dealias")? {
        "two_thirds" => Dealias::TwoThirds,
        "none" => Dealias::None,
        other => return Err(CliError::Config(format!("model.dealias `{other}`: expected two_thirds or none"))),
    };
    let c = SimConfig {
        l: cfg.f64("grid.l")?,
        n: cfg.get("grid.n")?,
        dt: cfg.f64("time.dt")?,
        t_end: cfg.f64("time.t_end")?,
        params: params(cfg, "background")?,
        rho_m: cfg.f64("background.rho_m")?,
        r_c: cfg.f64("background.r_c")?,
        init,
        q_list: cfg.f64_list("output.q_list")?,
        dealias,
        output_every: cfg.get("time.output_every")?,
        cfl: cfg.f64("time.cfl")?,
        nonlinear: cfg.get("model.nonlinear")?,
    };
    c.validate()?;
    Ok(c)
}

pub fn execute(sub: Sub, cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let mut w = Writer { dir, outputs: vec![] };
    let (summary, passed) = match sub {
        Sub::Classify => (classify(cfg, &mut w)?, true),
        Sub::Profile => (profile(cfg, &mut w)?, true),
        Sub::Field => (field(cfg, &mut w)?, true),
        Sub::Constants => (constants(cfg, &mut w)?, true),
        Sub::Verify => verify(cfg, &mut w)?,
        Sub::Simulate => (simulate(cfg, &mut w, "")?, true),
        Sub::Sweep => (sweep(cfg, &mut w)?, true),
    };
    Ok(Outcome { outputs: w.outputs, summary, passed })
}

fn classify(cfg: &Config, w: &mut Writer) -> Result<Value, CliError> {
    let p = params(cfg, "params")?;
    let tol = cfg.f64("classify.tol")?;
    if !(p.c1 >= -1.0 && p.c2 >= -1.0) {
        // below the square-root branch points c-bar_3 is undefined
        let v = json!({ "c": p.c(), "gamma": p.gamma, "verdict": Classification::OutsideJ.as_str(), "cbar3": Value::Null });
        w.json("classify.json", &v)?;
        return Ok(v);
    }
    let cb = cbar3(p.c1, p.c2)?;
    let in_j = p.in_j(1e-12);
    let range = if in_j { Some(gamma_range(p.c(), tol)?) } else { None };
    let verdict = is_admissible(&p);
    let v = json!({
        "c": p.c(),
        "gamma": p.gamma,
        "cbar3": cb,
        "c_in_J": in_j,
        "gamma_minus": range.map(|r| r.gamma_minus),
        "gamma_plus": range.map(|r| r.gamma_plus),
        "gamma_tol": tol,
        "verdict": verdict.as_str(),
    });
    w.json("classify.json", &v)?;
    Ok(v)
}

fn profile(cfg: &Config, w: &mut Writer) -> Result<Value, CliError> {
    let p = params(cfg, "params")?;
    let (opts, tol) = solver(cfg)?;
    let prof = solve_profile(&p, &opts, tol)?;
    w.file("profile.csv", prof.to_csv().as_bytes())?;
    let (dm, dp) = prof.endpoint_defects();
    let v = json!({
        "params": p,
        "nodes": prof.nodes.len(),
        "branch": prof.branch,
        "endpoint_minus": prof.endpoint_minus,
        "endpoint_plus": prof.endpoint_plus,
        "endpoint_defects": [dm, dp],
        "max_residual": prof.max_residual,
    });
    w.json("profile.json", &v)?;
    Ok(v)
}

fn field(cfg: &Config, w: &mut Writer) -> Result<Value, CliError> {
    let p = params(cfg, "params")?;
    let (opts, tol) = solver(cfg)?;
    let prof = solve_profile(&p, &opts, tol)?;
    let f = VelocityField::new(&prof)?;
    let r = cfg.f64("field.r")?;
    let n: usize = cfg.get("field.ntheta")?;
    let t0 = cfg.f64("field.theta_min")?;
    if !(r > 0.0 && n >= 2 && t0 > 0.0 && t0 < 0.5) {
        return Err(CliError::Config("need field.r > 0, field.ntheta >= 2, field.theta_min in (0, 0.5)".into()));
    }
    let mut csv = String::from("theta,x1,x3,u1,u2,u3,u_r,u_theta,p\n");
    for i in 0..n {
        let th = t0 + (std::f64::consts::PI - 2.0 * t0) * i as f64 / (n - 1) as f64;
        let x = [r * th.sin(), 0.0, r * th.cos()];
        let u = f.velocity(x)?;
        let s = f.spherical_components(x)?;
        let pr = f.pressure(x)?;
        let cols = [th, x[0], x[2], u[0], u[1], u[2], s[0], s[1], pr];
        csv.push_str(&cols.map(num).join(","));
        csv.push('\n');
    }
    w.file("field.csv", csv.as_bytes())?;
    let k = compute_k(&f);
    let b = match compute_b(&prof, &BQuadrature::default()) {
        Ok(b) => json!({ "value": b.value, "error_estimate": b.error_estimate }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let v = json!({ "params": p, "k": k, "k_max": k.max(), "b": b });
    w.json("field.json", &v)?;
    Ok(v)
}

fn constants(cfg: &Config, w: &mut Writer) -> Result<Value, CliError> {
    let qs = cfg.f64_list("constants.q")?;
    let taus = cfg.f64_list("constants.tau")?;
    let mut csv = String::from("q,tau,c_q,exponent,c_q_integral\n");
    let mut rows = Vec::new();
    for &q in &qs {
        for &tau in &taus {
            let d = DecayBound::new(q, tau)?;
            let integral = constant_via_quadrature(q, tau)?;
            csv.push_str(&[q, tau, d.c_q, d.exponent, integral].map(num).join(","));
            csv.push('\n');
            rows.push(json!({ "q": q, "tau": tau, "c_q": d.c_q, "exponent": d.exponent, "c_q_integral": integral }));
        }
    }
    w.file("constants.csv", csv.as_bytes())?;
    Ok(json!({ "rows": rows }))
}

fn verify(cfg: &Config, w: &mut Writer) -> Result<(Value, bool), CliError> {
    let suite = cfg.raw("verify.suite")?.to_string();
    let seed: u64 = cfg.get("verify.seed")?;
    let samples: usize = cfg.get("verify.samples")?;
    let (details, passed) = match suite.as_str() {
        "ckn-corollary" => {
            let alpha = cfg.f64("verify.alpha")?;
            let spec = CknSpec::hardy_family(alpha)?;
            let rep = ckn_conditions(&spec);
            if rep.overall {
                let emp = ckn_empirical(&spec, &BumpSampler { seed }, samples)?;
                let ok = emp.dilation_defect <= 1e-10;
                (json!({ "alpha": alpha, "conditions": rep, "max_ratio": emp.max_ratio, "dilation_defect": emp.dilation_defect }), ok)
            } else {
                (json!({ "alpha": alpha, "conditions": rep, "failures": rep.failures() }), false)
            }
        }
        "aq-sweep" => {
            let mut rows = Vec::new();
            let mut ok = true;
            for wt in curated_weights() {
                let member = aq_membership(&wt);
                let rep = muckenhoupt_ratio(&wt, seed, 2);
                ok &= member == rep.bounded();
                rows.push(json!({ "weight": wt, "member": member, "bounded": rep.bounded(), "growth": rep.growth }));
            }
            (json!({ "weights": rows }), ok)
        }
        "log-sobolev" => {
            let a_grid = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
            let margins: Vec<f64> = sample_log_sobolev_functions(samples, seed).iter().map(|f| log_sobolev_check(f, &a_grid)).collect();
            let min = margins.iter().cloned().fold(f64::INFINITY, f64::min);
            (json!({ "samples": samples, "min_margin": min }), min >= -1e-8)
        }
        "t-log" => {
            let rep = t_log_check(samples, seed);
            (json!({ "report": rep, "max_violation": rep.max_violation() }), rep.max_violation() <= 1e-12)
        }
        "b" | "k" => {
            let p = params(cfg, "params")?;
            let (opts, tol) = solver(cfg)?;
            let prof = solve_profile(&p, &opts, tol)?;
            if suite == "b" {
                let b = compute_b(&prof, &BQuadrature::default())?;
                (json!({ "params": p, "b": b }), b.error_estimate.is_finite())
            } else {
                let k = compute_k(&VelocityField::new(&prof)?);
                (json!({ "params": p, "k": k }), k.max().is_finite())
            }
        }
        other => {
            return Err(CliError::Config(format!("verify.suite `{other}`: expected ckn-corollary, aq-sweep, log-sobolev, t-log, b or k")))
        }
    };
    let v = json!({ "suite": suite, "passed": passed, "details": details });
    w.json("verify.json", &v)?;
    Ok((v, passed))
}

fn simulate(cfg: &Config, w: &mut Writer, prefix: &str) -> Result<Value, CliError> {
    let sc = sim_config(cfg)?;
    let q = cfg.f64("report.q")?;
    if !sc.q_list.contains(&q) {
        return Err(CliError::Config(format!("report.q = {q} must appear in output.q_list")));
    }
    let out: SimOutput = run_sim(&sc)?;
    w.file(&format!("{prefix}norms.csv"), out.series.to_csv().as_bytes())?;
    let mut chk = Vec::new();
    let grid = Grid::new(sc.n, sc.l)?;
    out.final_state.write_checkpoint(&grid, &mut chk)?;
    w.file(&format!("{prefix}final.chk"), &chk)?;

    let energy = energy_report(&out.series, &out.background, cfg.f64("report.comparison")?);
    let mono = monotonicity(&out.series);
    let crossings = envelope_crossings(&out.series, q, cfg.f64("report.tau")?, out.w0_l3, cfg.f64("report.t_min")?)?;
    let iterations: usize = cfg.get("picard.iterations")?;
    let picard = if iterations > 0 {
        let bg = make_background(&sc.params, sc.rho_m, sc.r_c, &grid)?;
        let pc = PicardConfig { dt: cfg.f64("picard.dt")?, steps: cfg.get("picard.steps")?, iterations, ..PicardConfig::default() };
        let w0 = sc.init.build(&grid);
        let rep = picard_linear(&grid, &w0, &bg, &pc)?;
        json!({ "ratios": rep.ratios, "differences": rep.differences, "max_ratio": rep.max_ratio() })
    } else {
        Value::Null
    };
    let last = out.series.rows.last().cloned();
    let v = json!({
        "w0_l3": out.w0_l3,
        "final": last,
        "max_divergence": out.max_divergence,
        "background": out.background,
        "energy": {
            "max_defect": energy.max_defect,
            "max_cross_ratio": energy.max_cross_ratio,
            "k_bound": energy.k_bound,
            "within_bound": energy.within_bound,
        },
        "monotone": { "holds": mono.holds(), "l2_increases": mono.l2_increases, "l3_increases": mono.l3_increases },
        "envelope": { "q": q, "crossings": crossings },
        "picard": picard,
    });
    w.json(&format!("{prefix}report.json"), &v)?;
    Ok(v)
}

fn sweep(cfg: &Config, w: &mut Writer) -> Result<Value, CliError> {
    let key = cfg.raw("sweep.key")?.to_string();
    if key.starts_with("sweep.") || cfg.raw(&key).is_err() {
        return Err(CliError::Config(format!("sweep.key `{key}` is not a simulation key")));
    }
    let values: Vec<String> = cfg.raw("sweep.values")?.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    let mut runs = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let mut c = Sub::Simulate.defaults();
        for k in Sub::Simulate.defaults().keys() {
            c.set(k, cfg.raw(k)?);
        }
        c.set(&key, v);
        sim_config(&c)?;
        runs.push((format!("run-{i:03}"), v.clone(), c));
    }
    let threads: usize = cfg.get("sweep.threads")?;
    let threads = if threads == 0 { std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1) } else { threads };
    let dir = w.dir.to_path_buf();
    let mut results: Vec<Option<Result<(Vec<String>, Value), CliError>>> = (0..runs.len()).map(|_| None).collect();
    for (chunk_runs, chunk_res) in runs.chunks(threads).zip(results.chunks_mut(threads)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_runs
                .iter()
                .map(|(name, _, c)| {
                    let run_dir = dir.join(name);
                    s.spawn(move || -> Result<(Vec<String>, Value), CliError> {
                        let mut m = RunManifest::begin(Sub::Simulate.name(), c, &run_dir)?;
                        let mut rw = Writer { dir: &run_dir, outputs: vec![] };
                        match simulate(c, &mut rw, "") {
                            Ok(v) => {
                                m.finish(&run_dir, "ok", rw.outputs.clone(), None)?;
                                Ok((rw.outputs, v))
                            }
                            Err(e) => {
                                m.finish(&run_dir, "error", rw.outputs, Some(e.to_string()))?;
                                Err(e)
                            }
                        }
                    })
                })
                .collect();
            for (h, slot) in handles.into_iter().zip(chunk_res.iter_mut()) {
                *slot = Some(h.join().unwrap_or_else(|_| Err(CliError::Numerical("sweep worker panicked".into()))));
            }
        });
    }
    let mut csv = format!("run,{key},final_l2,final_l3,max_cross_ratio,monotone\n");
    let mut summary = Vec::new();
    for ((name, value, _), res) in runs.iter().zip(results) {
        let (outputs, v) = res.expect("every run joined")?;
        w.outputs.extend(outputs.into_iter().map(|o| format!("{name}/{o}")));
        w.outputs.push(format!("{name}/manifest.json"));
        let fin = &v["final"];
        csv.push_str(&format!(
            "{name},{value},{},{},{},{}\n",
            num(fin["l2"].as_f64().unwrap_or(f64::NAN)),
            num(fin["l3"].as_f64().unwrap_or(f64::NAN)),
            num(v["energy"]["max_cross_ratio"].as_f64().unwrap_or(f64::NAN)),
            v["monotone"]["holds"]
        ));
        summary.push(json!({ "run": name, "value": value, "report": v }));
    }
    w.file("sweep.csv", csv.as_bytes())?;
    Ok(json!({ "key": key, "runs": summary }))
}

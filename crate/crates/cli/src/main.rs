mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stretchdiss::experiments::{
    case_file_name, manufactured_check, run_case, run_sweep_cancellable, verify_theorem, Status,
    SweepReport, Verdict,
};
use stretchdiss::profiles::{validate_profiles, ProfilesDocument};
use stretchdiss::solver::{solve_reduced, write_snapshot, Snapshot, SolveOptions};
use stretchdiss::Error;

use config::{parse_config, Config, FlagValues, RunManifest};

const EXIT_CONFIG: u8 = 2;
const EXIT_CRITERION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "stretchdiss",
    version,
    about = "Enhanced-dissipation experiments on the reduced 2.5D Navier-Stokes system"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Level for single-case subcommands
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Comma-separated sweep levels
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Accepted for compatibility; every run is deterministic
    #[arg(long, global = true)]
    seedless: bool,
    /// KEY=VAL, KEY being `section.key`; repeatable
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the profiles and write their coefficients
    Profiles,
    /// Run one case
    Simulate,
    /// Run a viscosity sweep and write the report
    Sweep,
    /// Re-check the criteria on an existing report
    Verify {
        /// Report to verify; defaults to <out>/report.json
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Manufactured-solution test of the solver
    AnsatzCheck,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profiles => "profiles",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Verify { .. } => "verify",
            Command::AnsatzCheck => "ansatz-check",
        }
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

struct Run {
    cfg: Config,
    hash: String,
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn record(&mut self, file: &str) {
        self.manifest.outputs.push(file.to_string());
    }

    fn write_json<T: serde::Serialize>(&mut self, file: &str, value: &T) -> anyhow::Result<()> {
        let mut doc = serde_json::to_value(value)?;
        if let Some(obj) = doc.as_object_mut() {
            obj.insert("config_hash".into(), self.hash.clone().into());
        }
        fs::write(self.out.join(file), serde_json::to_string_pretty(&doc)?)
            .with_context(|| format!("writing {file}"))?;
        self.record(file);
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<()> {
        self.manifest.finished_unix = now_unix();
        // verify leaves the manifest of the run it checks untouched
        let name = if self.manifest.subcommand == "verify" {
            "verify_manifest.json"
        } else {
            "manifest.json"
        };
        fs::write(
            self.out.join(name),
            serde_json::to_string_pretty(&self.manifest)?,
        )
        .with_context(|| format!("writing {name}"))?;
        Ok(())
    }
}

fn exit_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => EXIT_CONFIG,
        Some(_) => EXIT_NUMERICAL,
        None => EXIT_NUMERICAL,
    }
}

fn print_verdict(v: &Verdict) {
    for c in &v.criteria {
        println!(
            "({}) {:<20} {}  margin {:+.3e}  {}",
            c.id,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.margin,
            c.detail
        );
    }
    for n in &v.notes {
        println!("note: {n}");
    }
    println!("verdict: {:?}", v.status);
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Fail => EXIT_CRITERION,
        Status::Indeterminate => EXIT_NUMERICAL,
    }
}

fn cmd_profiles(run: &mut Run) -> anyhow::Result<u8> {
    let p = run.cfg.profiles()?;
    let report = validate_profiles(&p.tri, &p.phi);
    for c in &report.checks {
        println!(
            "{:<48} {}  measured {:.3e}  tolerance {:.3e}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.measured,
            c.tolerance
        );
    }
    run.write_json("profiles.json", &ProfilesDocument::new(&p.tri, &p.phi))?;
    run.write_json("profiles_report.json", &report)?;
    Ok(if report.passed() { 0 } else { EXIT_CRITERION })
}

fn cmd_simulate(run: &mut Run) -> anyhow::Result<u8> {
    let p = run.cfg.profiles()?;
    let (n, alpha) = (run.cfg.case.n, run.cfg.case.alpha);
    let outcome = run_case(n, alpha, &run.cfg.overrides(), &p)?;
    let name = case_file_name(n, alpha);
    let stem = name.trim_end_matches(".csv").to_string();
    outcome
        .record
        .write_csv(fs::File::create(run.out.join(&name))?, &run.hash)?;
    run.record(&name);
    let diff = format!("{stem}_difference.csv");
    outcome
        .difference
        .write_csv(fs::File::create(run.out.join(&diff))?, &run.hash)?;
    run.record(&diff);
    let mut summary = outcome.summary.clone();
    summary.wall_time_s = 0.0;
    run.write_json(&format!("{stem}.json"), &summary)?;

    let traj = solve_reduced(&outcome.config, &p.tri, &p.phi, &SolveOptions::default())?;
    let snap: &Snapshot<f64> = traj.last().expect("final snapshot");
    let snap_name = format!("snapshot_{n}_{alpha}.txt");
    write_snapshot(fs::File::create(run.out.join(&snap_name))?, snap, &run.hash)?;
    run.record(&snap_name);

    let s = &outcome.summary;
    println!(
        "n = {n}, alpha = {alpha}, nu = {:e}, t* = {:.6}",
        s.nu, s.t_star
    );
    println!(
        "D_NS      = {:.6e}  (trapezoid {:.6e})",
        s.d_ns, s.d_ns_trapezoid
    );
    println!("D_heat    = {:.6e}", s.d_heat);
    println!(
        "D_ansatz  = {:.6e}  (small-time estimate {:.6e})",
        s.d_ansatz, s.d_ansatz_estimate
    );
    println!("D_diff    = {:.6e}", s.d_diff);
    println!(
        "chain     = {}",
        if s.chain.passed { "holds" } else { "fails" }
    );
    for w in &s.warnings {
        println!("warning: {w}");
    }
    if !s.monotone {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if s.chain.passed { 0 } else { EXIT_CRITERION })
}

fn cmd_sweep(run: &mut Run, cancel: &AtomicBool) -> anyhow::Result<u8> {
    let p = run.cfg.profiles()?;
    let report = run_sweep_cancellable(
        run.cfg.case.alpha,
        &run.cfg.sweep.n,
        &run.cfg.overrides(),
        run.cfg.sweep.workers,
        &p,
        cancel,
    )?;
    let mut report = report;
    for r in &mut report.rows {
        r.wall_time_s = 0.0;
    }
    report.write(&run.out, &run.hash)?;
    run.record("report.json");
    run.record("plotdata.dat");
    for r in &report.rows {
        let name = case_file_name(r.n, report.alpha);
        let stem = name.trim_end_matches(".csv").to_string();
        run.record(&name);
        run.record(&format!("{stem}_difference.csv"));
        run.record(&format!("{stem}.json"));
    }
    for r in &report.rows {
        println!(
            "n = {:>2}  D_NS = {:.5e}  D_heat = {:.5e}  D_ansatz = {:.5e}  D_diff = {:.5e}",
            r.n, r.d_ns, r.d_heat, r.d_ansatz, r.d_diff
        );
    }
    print_verdict(&report.verdict);
    Ok(status_code(report.verdict.status))
}

fn cmd_verify(run: &mut Run, report: Option<&Path>) -> anyhow::Result<u8> {
    let path = report.map_or_else(|| run.out.join("report.json"), Path::to_path_buf);
    if !path.is_file() {
        return Err(Error::Config(format!("no report at {}", path.display())).into());
    }
    let rep = SweepReport::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let verdict = verify_theorem(&rep);
    print_verdict(&verdict);
    run.write_json("verdict.json", &verdict)?;
    Ok(status_code(verdict.status))
}

fn cmd_ansatz_check(run: &mut Run) -> anyhow::Result<u8> {
    let p = run.cfg.profiles()?;
    let rep = manufactured_check(
        run.cfg.case.n,
        run.cfg.case.alpha,
        &run.cfg.overrides(),
        2,
        &p,
    )?;
    for r in &rep.runs {
        println!(
            "dt = {:.4e}  steps = {:>5}  relative L2 error = {:.4e}",
            r.dt, r.steps, r.error
        );
    }
    println!("observed orders: {:?}", rep.orders);
    println!(
        "error at default dt: {}; order: {}",
        if rep.error_passed { "PASS" } else { "FAIL" },
        if rep.order_passed { "PASS" } else { "FAIL" }
    );
    run.write_json("ansatz_check.json", &rep)?;
    Ok(if rep.passed() { 0 } else { EXIT_CRITERION })
}

fn execute(cli: Cli, cancel: Arc<AtomicBool>) -> anyhow::Result<u8> {
    let c = &cli.common;
    let text = match &c.config {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| {
            anyhow::Error::new(Error::Config(format!("cannot read {}: {e}", p.display())))
        })?),
        None => None,
    };
    let flags = FlagValues {
        alpha: c.alpha,
        n: c.n,
        n_list: c.n_list.clone(),
        out: c.out.clone(),
        workers: c.workers,
    };
    let (cfg, warnings) = parse_config(text.as_deref(), &c.overrides, &flags)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let out = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let hash = cfg.hash();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        config: cfg.clone(),
        config_hash: hash.clone(),
        warnings,
        outputs: Vec::new(),
        started_unix: now_unix(),
        finished_unix: 0,
    };
    let mut run = Run {
        cfg,
        hash,
        out,
        manifest,
    };
    let code = match &cli.command {
        Command::Profiles => cmd_profiles(&mut run),
        Command::Simulate => cmd_simulate(&mut run),
        Command::Sweep => cmd_sweep(&mut run, &cancel),
        Command::Verify { report } => cmd_verify(&mut run, report.as_deref()),
        Command::AnsatzCheck => cmd_ansatz_check(&mut run),
    }?;
    run.finish()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&cancel);
    // a second interrupt falls through to the default handler's behaviour
    let _ = ctrlc::set_handler(move || {
        if flag.swap(true, Ordering::SeqCst) {
            std::process::exit(130);
        }
        eprintln!("interrupted: finishing running cases and writing a partial report");
    });
    match execute(cli, cancel) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<config::ConfigErrors>().is_some() => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            for cause in e.chain() {
                eprintln!("error: {cause}");
            }
            ExitCode::from(exit_for(&e))
        }
    }
}

//! `qpm`: config-driven design and analysis of custom-poled lithium niobate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qpm::artifacts::{sha256_hex, write_columns_csv, write_json, write_matrix_csv, OutputLock, RunManifest};
use qpm::biphoton::{fringe_count, hom_scan, jta_from_jsa, JsaGrid};
use qpm::config::{Run, RunConfig};
use qpm::dispersion::solve_gvm_wavelength;
use qpm::heatmap::emit_heatmap;
use qpm::pair_rate::pair_rate;
use qpm::pipeline::{delays, design, Analysis};
use qpm::poling::DomainSequence;
use qpm::tolerance::{schmidt_statistics, write_runs_csv, ToleranceReport};

const SEQUENCE_FILE: &str = "sequence.txt";
const GVM_BRACKET_NM: (f64, f64) = (2000.0, 5000.0);
const FRINGE_REL: f64 = 0.05;
const REPORTED_WEIGHTS: usize = 32;

#[derive(Parser, Debug)]
#[command(name = "qpm", version, about = "Poling design and biphoton analysis for mid-infrared SPDC in lithium niobate")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Spectral grid size M (power of two).
    #[arg(long = "grid-size", global = true)]
    grid_size: Option<usize>,
    /// Spectral grid span in nm.
    #[arg(long = "span-nm", global = true)]
    span_nm: Option<f64>,
    /// Domain sequence to analyse instead of `<out>/sequence.txt`.
    #[arg(long, global = true)]
    sequence: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Degenerate wavelength of group-velocity matching.
    Gvm,
    /// First-order poling period at the design point.
    Period,
    /// Greedy poling design for the configured target.
    Design,
    /// Phase-matching function of the sequence.
    Pmf,
    /// Joint spectral amplitude, CSV and heatmap.
    Jsa,
    /// Joint temporal amplitude, CSV and heatmap.
    Jta,
    /// Hong-Ou-Mandel delay scan.
    Hom,
    /// Schmidt decomposition of the JSA.
    Schmidt,
    /// Absolute pair generation rate.
    Rate,
    /// Fabrication-resolution Monte Carlo.
    Tolerance,
    /// design, pmf, jsa, jta, hom, schmidt, rate and tolerance in that order.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gvm => "gvm",
            Command::Period => "period",
            Command::Design => "design",
            Command::Pmf => "pmf",
            Command::Jsa => "jsa",
            Command::Jta => "jta",
            Command::Hom => "hom",
            Command::Schmidt => "schmidt",
            Command::Rate => "rate",
            Command::Tolerance => "tolerance",
            Command::All => "all",
        }
    }
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<qpm::Error> for Failure {
    fn from(e: qpm::Error) -> Self {
        let code = match e {
            qpm::Error::Config { .. } | qpm::Error::Format { .. } | qpm::Error::Json(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: 2, message }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Context {
    cfg: RunConfig,
    run: Run,
    out: PathBuf,
    sequence: Option<PathBuf>,
    manifest: RunManifest,
}

impl Context {
    fn record(&mut self, name: &str) -> CliResult<()> {
        Ok(self.manifest.record(&self.out, name)?)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        write_json(&self.path(name), value)?;
        self.record(name)
    }

    fn analysis(&self) -> CliResult<Analysis> {
        Ok(Analysis::from_run(&self.run)?)
    }

    /// Sequence from `--sequence`, else the design output in the output directory.
    fn load_sequence(&self) -> CliResult<DomainSequence> {
        let (path, hint) = match &self.sequence {
            Some(p) => (p.clone(), ""),
            None => (self.path(SEQUENCE_FILE), "; run `qpm design` first or pass --sequence"),
        };
        if !path.is_file() {
            return Err(usage(format!("sequence file not found: {}{hint}", path.display())));
        }
        Ok(DomainSequence::load(&path)?)
    }

    fn jsa(&self, seq: &DomainSequence) -> CliResult<JsaGrid> {
        Ok(self.analysis()?.jsa(seq)?)
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) if !p.is_file() => return Err(usage(format!("config file not found: {}", p.display()))),
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.tolerance.seed = s;
    }
    if let Some(m) = cli.grid_size {
        cfg.grid.size = m;
    }
    if let Some(s) = cli.span_nm {
        cfg.grid.span_nm = Some(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_gvm(ctx: &mut Context) -> CliResult<()> {
    let l = solve_gvm_wavelength(&ctx.run.model, GVM_BRACKET_NM)?;
    println!("{l:.1} nm");
    ctx.json("gvm.json", &serde_json::json!({ "gvm_wavelength_nm": l }))
}

fn cmd_period(ctx: &mut Context) -> CliResult<()> {
    let p = ctx.run.period_nm;
    println!("{p:.1} nm");
    ctx.json(
        "period.json",
        &serde_json::json!({
            "poling_period_nm": p,
            "domain_width_nm": ctx.run.domain_width,
            "carrier_rad_per_nm": ctx.run.carrier,
            "n_domains": ctx.run.n_domains,
        }),
    )
}

fn cmd_design(ctx: &mut Context) -> CliResult<DomainSequence> {
    let seq = design(&ctx.run.target, ctx.run.domain_width, ctx.run.n_domains)?;
    seq.save(&ctx.path(SEQUENCE_FILE))?;
    ctx.record(SEQUENCE_FILE)?;
    let ups = seq.signs().filter(|s| *s == qpm::poling::Sign::Up).count();
    ctx.json(
        "design.json",
        &serde_json::json!({
            "target": ctx.run.target.shape,
            "n_domains": seq.len(),
            "domain_width_nm": seq.nominal_width,
            "carrier_rad_per_nm": seq.carrier,
            "up_domains": ups,
        }),
    )?;
    eprintln!("designed {} domains", seq.len());
    Ok(seq)
}

fn cmd_pmf(ctx: &mut Context, seq: &DomainSequence) -> CliResult<()> {
    let pmf = ctx.analysis()?.pmf(seq)?;
    write_columns_csv(&ctx.path("pmf.csv"), ("k_rad_per_nm", "phi"), &pmf.grid.points(), pmf.profile())?;
    ctx.record("pmf.csv")
}

fn cmd_jsa(ctx: &mut Context, jsa: &JsaGrid) -> CliResult<()> {
    let l = jsa.grid.wavelengths();
    write_matrix_csv(&ctx.path("jsa.csv"), "signal_nm\\idler_nm", &l, &l, &jsa.real())?;
    emit_heatmap(&jsa.modulus(), &ctx.path("jsa.ppm"))?;
    ctx.record("jsa.csv")?;
    ctx.record("jsa.ppm")?;
    let (cs, ci) = jsa.centroid();
    ctx.json(
        "jsa.json",
        &serde_json::json!({ "grid": jsa.grid, "centroid_signal_nm": cs, "centroid_idler_nm": ci }),
    )
}

fn cmd_jta(ctx: &mut Context, jsa: &JsaGrid) -> CliResult<()> {
    let jta = jta_from_jsa(jsa);
    let m = jta.modulus();
    write_matrix_csv(&ctx.path("jta.csv"), "t_signal_fs\\t_idler_fs", &jta.times_fs, &jta.times_fs, &m)?;
    emit_heatmap(&m, &ctx.path("jta.ppm"))?;
    ctx.record("jta.csv")?;
    ctx.record("jta.ppm")
}

fn cmd_hom(ctx: &mut Context, jsa: &JsaGrid) -> CliResult<()> {
    let taus = delays(ctx.cfg.hom.tau_max_fs, ctx.cfg.hom.points)?;
    let p = hom_scan(jsa, &taus);
    write_columns_csv(&ctx.path("hom.csv"), ("tau_fs", "p"), &taus, &p)?;
    ctx.record("hom.csv")?;
    let p0 = hom_scan(jsa, &[0.0])[0];
    let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ctx.json(
        "hom.json",
        &serde_json::json!({
            "p_at_zero": p0,
            "p_min": min,
            "p_max": max,
            "fringes": fringe_count(&p, FRINGE_REL),
        }),
    )
}

fn cmd_schmidt(ctx: &mut Context, jsa: &JsaGrid) -> CliResult<f64> {
    let r = qpm::biphoton::schmidt_decomposition(jsa)?;
    println!("K = {:.4}", r.k);
    ctx.json("schmidt.json", &serde_json::json!({ "K": r.k, "weights": r.top(REPORTED_WEIGHTS) }))?;
    Ok(r.k)
}

fn cmd_rate(ctx: &mut Context, seq: &DomainSequence) -> CliResult<()> {
    let r = pair_rate(seq, &ctx.cfg.rate, &ctx.run.model, &ctx.cfg.quadrature)?;
    println!("{:.1} pairs/s/mW", r.rate_per_s_per_mw);
    ctx.json("rate.json", &r)
}

#[derive(Serialize)]
struct ToleranceSummary {
    resolution_nm: f64,
    repetitions: usize,
    mean_k: f64,
    sd_k: f64,
    seed: u64,
}

fn cmd_tolerance(ctx: &mut Context, seq: &DomainSequence) -> CliResult<()> {
    let an = ctx.analysis()?;
    let t = &ctx.cfg.tolerance;
    let reports: Vec<ToleranceReport> =
        schmidt_statistics(|s| an.schmidt_number(s), seq, &t.resolutions_nm, t.reps, t.seed)?;
    write_runs_csv(&reports, &ctx.path("tolerance_runs.csv"))?;
    ctx.record("tolerance_runs.csv")?;
    let summary: Vec<ToleranceSummary> = reports
        .iter()
        .map(|r| ToleranceSummary {
            resolution_nm: r.resolution_nm,
            repetitions: r.repetitions,
            mean_k: r.mean_k,
            sd_k: r.sd_k,
            seed: r.seed,
        })
        .collect();
    for s in &summary {
        println!("R = {} nm: K = {:.4} ± {:.4}", s.resolution_nm, s.mean_k, s.sd_k);
    }
    ctx.json("tolerance.json", &summary)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli)?;
    let run = cfg.resolve()?;
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => cfg.resolve_path(&cfg.output_dir),
    };
    let _lock = OutputLock::acquire(&out)?;
    let cfg_hash = sha256_hex(serde_json::to_string(&cfg).map_err(qpm::Error::from)?.as_bytes());
    let manifest = RunManifest::open(&out, cfg_hash, cli.command.name())?;
    let mut ctx = Context {
        cfg,
        run,
        out,
        sequence: cli.sequence.clone(),
        manifest,
    };
    match cli.command {
        Command::Gvm => cmd_gvm(&mut ctx)?,
        Command::Period => cmd_period(&mut ctx)?,
        Command::Design => {
            cmd_design(&mut ctx)?;
        }
        Command::Pmf => {
            let seq = ctx.load_sequence()?;
            cmd_pmf(&mut ctx, &seq)?
        }
        Command::Jsa | Command::Jta | Command::Hom | Command::Schmidt => {
            let seq = ctx.load_sequence()?;
            let jsa = ctx.jsa(&seq)?;
            match cli.command {
                Command::Jsa => cmd_jsa(&mut ctx, &jsa)?,
                Command::Jta => cmd_jta(&mut ctx, &jsa)?,
                Command::Hom => cmd_hom(&mut ctx, &jsa)?,
                _ => {
                    cmd_schmidt(&mut ctx, &jsa)?;
                }
            }
        }
        Command::Rate => {
            let seq = ctx.load_sequence()?;
            cmd_rate(&mut ctx, &seq)?
        }
        Command::Tolerance => {
            let seq = ctx.load_sequence()?;
            cmd_tolerance(&mut ctx, &seq)?
        }
        Command::All => {
            let seq = match &ctx.sequence {
                Some(_) => ctx.load_sequence()?,
                None => cmd_design(&mut ctx)?,
            };
            cmd_pmf(&mut ctx, &seq)?;
            let jsa = ctx.jsa(&seq)?;
            cmd_jsa(&mut ctx, &jsa)?;
            cmd_jta(&mut ctx, &jsa)?;
            cmd_hom(&mut ctx, &jsa)?;
            cmd_schmidt(&mut ctx, &jsa)?;
            cmd_rate(&mut ctx, &seq)?;
            cmd_tolerance(&mut ctx, &seq)?;
        }
    }
    let out = ctx.out.clone();
    ctx.manifest.save(&out)?;
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("QPM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| usage(format!("QPM_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| execute(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", one_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}

//! `asw`: drive the L-function, Dwork, verification and zeta pipelines from a
//! JSON run configuration.  Every artifact starts with the config hash.

mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use asw_core::charsum::{l_from_lstar, zeta_product, CharacterSpec, DEFAULT_BUDGET};
use asw_core::dwork::{char_series, goth_s, CharSeries};
use asw_core::polygon::q_adic_polygon;
use asw_core::tower::{TowerRings, TowerSpec};
use asw_core::verify::{
    check_hodge_bound_on, check_leading_term_on, lambda_fits, leading_indices, lstar_batch, run_suite, summary_table, SuiteParams,
    VerifyReport, CLAIMS, HODGE_BOUND, LEADING_TERM,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;

/// Bad invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "asw", version, about = "L-functions and characteristic series of Z_{p^l} Artin-Schreier-Witt towers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// L and L* polynomials, Newton polygons and slope tables per character.
    Lfunction(Common),
    /// The series w_k(T) of the characteristic series, with a run manifest.
    Dwork(Common),
    /// Run claim checkers and write reports; exits 1 if any claim fails.
    Verify(VerifyArgs),
    /// Zeta function of the level-m cover as a product of L-functions.
    Zeta(ZetaArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// p-adic precision M.
    #[arg(short = 'M', long)]
    precision: Option<u32>,
    /// Total-degree truncation D.
    #[arg(short = 'D', long)]
    degree: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also write wall-clock timings to timing.json.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Claim id to check; repeatable.  Overrides the config's list.
    #[arg(long = "claim")]
    claims: Vec<String>,
    /// Check the series in a `dwork` output directory instead of recomputing.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct ZetaArgs {
    #[command(flatten)]
    common: Common,
    /// Largest conductor m.
    #[arg(long)]
    level: Option<u32>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = RunConfig::load(&self.config)?;
        if let Some(m) = self.precision {
            c.precision = m;
        }
        if let Some(d) = self.degree {
            c.degree = d;
        }
        if let Some(k) = self.kmax {
            c.kmax = k;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        Ok(c)
    }
}

/// Writes artifacts under one directory, each headed by the config hash.
struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    fn new(cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        Ok(Output { dir: cfg.out.clone(), hash: cfg.hash() })
    }

    fn text(&self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, format!("# config-sha256 {}\n{body}", self.hash)).with_context(|| format!("writing {}", path.display()))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Headed<'a, T> {
            config_sha256: &'a str,
            #[serde(flatten)]
            body: &'a T,
        }
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut s = serde_json::to_string_pretty(&Headed { config_sha256: &self.hash, body: value })?;
        s.push('\n');
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
    }
}

fn label(chi: &CharacterSpec) -> String {
    let b: Vec<String> = chi.b.iter().map(|x| x.to_string()).collect();
    format!("m={} b={}", chi.m, b.join(":"))
}

fn cmd_lfunction(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let spec = cfg.tower()?;
    let chars = cfg
        .character_list()?
        .filter(|c| !c.is_empty())
        .ok_or_else(|| UsageError("lfunction needs a nonempty `characters` list in the config".into()))?;
    let lstars = lstar_batch(&spec, &chars, 0)?;
    let out = Output::new(&cfg)?;
    let mut polys = String::new();
    let mut polygons = String::from("character,index,height_num,height_den\n");
    let mut slopes = String::from("character,slope_num,slope_den,multiplicity\n");
    for (chi, ls) in chars.iter().zip(&lstars) {
        let l = l_from_lstar(&spec, ls)?;
        polys.push_str(&ls.to_text(&spec));
        polys.push_str(&l.to_text(&spec));
        let poly = q_adic_polygon(&l.coeffs, spec.a as u32)?;
        for (x, y) in &poly.vertices {
            polygons.push_str(&format!("{},{x},{},{}\n", label(chi), y.numer(), y.denom()));
        }
        for (s, n) in &poly.slopes {
            slopes.push_str(&format!("{},{},{},{n}\n", label(chi), s.numer(), s.denom()));
        }
    }
    out.text("lfunctions.txt", &polys)?;
    out.text("polygons.csv", &polygons)?;
    out.text("slopes.csv", &slopes)?;
    println!("{} characters, artifacts in {}", chars.len(), out.dir.display());
    Ok(())
}

fn cmd_dwork(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let spec = cfg.tower()?;
    let cs = char_series(&spec, cfg.kmax, cfg.precision, cfg.degree)?;
    let out = Output::new(&cfg)?;
    out.text("series.txt", &cs.to_text(true))?;
    out.json("manifest.json", &cs.manifest)?;
    println!("w_0..w_{} with K = {}, artifacts in {}", cfg.kmax, cs.manifest.k, out.dir.display());
    Ok(())
}

/// Claims that can be evaluated on a saved series alone.
fn verify_saved(dir: &Path, claims: &[String]) -> Result<Vec<VerifyReport>> {
    let path = dir.join("series.txt");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let cs = CharSeries::from_text(&text)?;
    let spec: &TowerSpec = &cs.manifest.spec;
    let mut reports = Vec::new();
    for c in claims {
        match c.as_str() {
            HODGE_BOUND => reports.push(check_hodge_bound_on(&cs)),
            LEADING_TERM => {
                let ks: Vec<usize> = leading_indices(spec.d, 1..=cs.kmax() / spec.d)
                    .into_iter()
                    .filter(|&k| k <= cs.kmax() && lambda_fits(spec, k, cs.manifest.maxdeg))
                    .collect();
                let rings = TowerRings::new(spec, cs.manifest.precision)?;
                let g = goth_s(&rings, cs.manifest.maxdeg)?;
                reports.push(check_leading_term_on(&cs, &g, &ks));
            }
            other => {
                return Err(UsageError(format!("claim {other:?} cannot be checked from --input; use {HODGE_BOUND} or {LEADING_TERM}")).into())
            }
        }
    }
    Ok(reports)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = args.common.config()?;
    let spec = cfg.tower()?;
    let claims: Vec<String> = if !args.claims.is_empty() {
        args.claims.clone()
    } else if let Some(c) = &cfg.claims {
        c.clone()
    } else if args.input.is_some() {
        vec![HODGE_BOUND.into(), LEADING_TERM.into()]
    } else {
        CLAIMS.iter().map(|s| s.to_string()).collect()
    };
    if let Some(bad) = claims.iter().find(|c| !CLAIMS.contains(&c.as_str())) {
        return Err(UsageError(format!("unknown claim id {bad:?}; known: {}", CLAIMS.join(", "))).into());
    }
    let reports = match &args.input {
        Some(dir) => verify_saved(dir, &claims)?,
        None => {
            let sp = SuiteParams {
                precision: cfg.precision,
                maxdeg: cfg.degree,
                kmax: cfg.kmax,
                characters: cfg.character_list()?,
                ..SuiteParams::default()
            };
            let ids: Vec<&str> = claims.iter().map(|s| s.as_str()).collect();
            run_suite(&ids, &spec, &sp)?
        }
    };
    let out = Output::new(&cfg)?;
    for r in &reports {
        out.json(&format!("reports/{}.json", r.claim_id), r)?;
    }
    let table = summary_table(&reports);
    out.text("summary.txt", &table)?;
    print!("{table}");
    Ok(reports.iter().all(|r| r.passed()))
}

fn cmd_zeta(args: &ZetaArgs) -> Result<()> {
    let mut cfg = args.common.config()?;
    if let Some(l) = args.level {
        cfg.level = Some(l);
    }
    let spec = cfg.tower()?;
    let m = cfg.level.ok_or_else(|| UsageError("zeta needs `level` in the config or --level".into()))?;
    let z = zeta_product(&spec, m, cfg.kmax, DEFAULT_BUDGET)?;
    let out = Output::new(&cfg)?;
    let mut body = format!("# level {m}\n## numerator\n");
    for (i, c) in z.numerator.iter().enumerate() {
        body.push_str(&format!("{i} : {c}\n"));
    }
    body.push_str("## series\n");
    for (i, c) in z.series.iter().enumerate() {
        body.push_str(&format!("{i} : {c}\n"));
    }
    out.text("zeta.txt", &body)?;
    println!("numerator degree {}, artifacts in {}", z.numerator.len() - 1, out.dir.display());
    Ok(())
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ASW_THREADS") {
        let n: usize = v.parse().map_err(|_| UsageError(format!("ASW_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    Ok(())
}

fn write_timing(common: &Common, command: &str, start: Instant) -> Result<()> {
    if !common.timing {
        return Ok(());
    }
    let cfg = common.config()?;
    #[derive(Serialize)]
    struct Timing<'a> {
        command: &'a str,
        seconds: f64,
    }
    Output::new(&cfg)?.json("timing.json", &Timing { command, seconds: start.elapsed().as_secs_f64() })
}

fn run(cli: &Cli) -> Result<bool> {
    set_threads()?;
    let start = Instant::now();
    let (common, name, ok) = match &cli.command {
        Command::Lfunction(c) => (c, "lfunction", cmd_lfunction(c).map(|_| true)?),
        Command::Dwork(c) => (c, "dwork", cmd_dwork(c).map(|_| true)?),
        Command::Verify(v) => (&v.common, "verify", cmd_verify(v)?),
        Command::Zeta(z) => (&z.common, "zeta", cmd_zeta(z).map(|_| true)?),
    };
    write_timing(common, name, start)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Subcommands and their option handling.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use novikov::bp_hopf::{cached, HopfAlgebroidData, HopfKind};
use novikov::cobar_ext::{ext, levin_index_one, CobarError};
use novikov::comodules::{bp_mod_in, cyclic_quotient, ideal_p_v1, parse_comodule, unit_comodule, Comodule, Field};
use novikov::novikov_ss::{algnss, compare_sessions, convergence_check, Caps, Regrading, SsError};
use novikov::pipeline::{render_chart, run_pipeline, DefinitionChoice, ExportFormat, LayerSource, PipelineConfig, PipelineError};

use crate::server::{discover_bundles, serve, AppState};

pub const OUT_ENV: &str = "NOVIKOV_OUT";

const BOUNDARY: &str = "\
The tower pipeline computes, per Chow layer, the algebraic Novikov spectral
sequence, its convergence check against Ext, and Koszul Tor tables. Motivic
Steenrod Ext over the base field, the identification of layers with motivic
homotopy, and the Adams spectral sequences built from the Tor tables are not
computed; differentials are moved between sessions by hand (serve, /import).";

#[derive(Parser, Debug)]
#[command(name = "novikov", version, about = "Cobar Ext, algebraic Novikov spectral sequences and Chow tower bundles", after_help = BOUNDARY)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ext of a Hopf algebra preset (steenrod, P, bp) or a comodule, as TSV or chart JSON.
    Ext(Opts),
    /// Algebraic Novikov spectral sequence of a comodule: session file, chart and convergence report.
    Algnss(Opts),
    /// Runs the layer pipeline for a field preset (C, R, Fq:<q>) or comodule files and writes a bundle.
    Tower(Opts),
    /// Levin index-one test of a comodule.
    Levin(Opts),
    /// Serves the bundles under --out over HTTP and WebSocket.
    Serve(Opts),
}

/// Options shared by the subcommands. Values from `--config` (TOML) take
/// precedence over flags.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Opts {
    #[arg(long)]
    pub prime: Option<u32>,
    #[arg(long = "smax")]
    #[serde(alias = "smax")]
    pub s_max: Option<u32>,
    #[arg(long = "tmax")]
    #[serde(alias = "tmax")]
    pub t_max: Option<u32>,
    #[arg(long = "chow-max")]
    #[serde(alias = "chow-max")]
    pub chow_max: Option<u32>,
    /// iadic, cosimplicial or both.
    #[arg(long)]
    pub definition: Option<String>,
    /// Field preset for tower and serve (C, R, Fq:<q>); Hopf preset for ext (steenrod, P, bp).
    #[arg(long)]
    pub preset: Option<String>,
    /// bp, bp/<p^k>, bp/i<n> (kills p, v_1, ..., v_n), ideal, or a comodule file.
    #[arg(long)]
    pub module: Option<String>,
    /// Comodule files, one per Chow degree from 0 (tower).
    #[arg(long = "comodule")]
    #[serde(default)]
    pub comodules: Vec<PathBuf>,
    /// Largest filtration index for levin.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub port: Option<u16>,
    /// tsv or json for ext.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<SsError> for CliError {
    fn from(e: SsError) -> CliError {
        match e {
            SsError::CapTooSmall { .. } | SsError::Unsupported { .. } | SsError::Format { .. } => CliError::Validation(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<CobarError> for CliError {
    fn from(e: CobarError) -> CliError {
        match e {
            CobarError::CapTooSmall { .. } | CobarError::Unsupported(_) | CobarError::OutOfRange { .. } => CliError::Validation(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::Invalid(_) => CliError::Validation(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{}: {e}", path.display()))
}

impl Opts {
    /// Replaces every option set in `file`.
    pub fn overlay(mut self, file: Opts) -> Opts {
        macro_rules! take {
            ($($f:ident),*) => { $( if file.$f.is_some() { self.$f = file.$f; } )* };
        }
        take!(prime, s_max, t_max, chow_max, definition, preset, module, n, out, port, format);
        if !file.comodules.is_empty() {
            self.comodules = file.comodules;
        }
        self
    }

    pub fn resolve(self) -> Result<Opts, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = fs::read_to_string(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let file: Opts = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Ok(self.overlay(file))
    }

    fn prime(&self) -> Result<u32, CliError> {
        let p = self.prime.unwrap_or(2);
        if p < 2 || !(2..p).all(|d| p % d != 0) {
            return Err(invalid(format!("--prime {p} is not a prime")));
        }
        Ok(p)
    }

    fn caps(&self, s: u32, t: u32) -> Result<(u32, u32), CliError> {
        let (s, t) = (self.s_max.unwrap_or(s), self.t_max.unwrap_or(t));
        if s == 0 || t == 0 {
            return Err(invalid("caps must be positive"));
        }
        Ok((s, t))
    }

    fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("novikov-out"))
    }

    fn definition(&self) -> Result<DefinitionChoice, CliError> {
        self.definition.as_deref().unwrap_or("iadic").parse().map_err(invalid)
    }
}

fn hopf(kind: HopfKind, p: u32, cap: u32) -> Result<Arc<HopfAlgebroidData>, CliError> {
    cached(kind, p, cap).map_err(|e| invalid(e.to_string()))
}

/// A comodule named on the command line.
pub fn module_arg(arg: &str, p: u32, cap: u32) -> Result<Comodule, CliError> {
    let lower = arg.to_ascii_lowercase();
    let bp = || hopf(HopfKind::BrownPeterson, p, cap.max(2 * p - 2));
    let named = match lower.as_str() {
        "bp" => Some(unit_comodule(&bp()?)),
        "ideal" => Some(ideal_p_v1(&bp()?).map_err(|e| invalid(e.to_string()))?),
        "p" => Some(unit_comodule(&hopf(HopfKind::QuotientP, p, cap)?)),
        "steenrod" | "a" => Some(unit_comodule(&hopf(HopfKind::DualSteenrod, p, cap)?)),
        _ => None,
    };
    if let Some(m) = named {
        return Ok(m);
    }
    if let Some(rest) = lower.strip_prefix("bp/") {
        if let Some(n) = rest.strip_prefix('i') {
            let n: i32 = n.parse().map_err(|_| invalid(format!("bad module {arg:?}")))?;
            return bp_mod_in(&bp()?, n).map_err(|e| invalid(e.to_string()));
        }
        let q: u64 = rest.parse().map_err(|_| invalid(format!("bad module {arg:?}")))?;
        let mut k = 0;
        let mut r = q;
        while r > 1 && r % p as u64 == 0 {
            r /= p as u64;
            k += 1;
        }
        if r != 1 || k == 0 {
            return Err(invalid(format!("{q} is not a positive power of {p}")));
        }
        return cyclic_quotient(&bp()?, k).map_err(|e| invalid(e.to_string()));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(invalid(format!("unknown module {arg:?}: not a preset and no such file")));
    }
    let text = fs::read_to_string(path).map_err(io(path))?;
    parse_comodule(&text).map_err(|e| invalid(format!("{arg}: {e}")))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    fs::write(path, text).map_err(io(path))
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect::<String>().trim_matches('_').to_string()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ext(o) => cmd_ext(o.resolve()?),
        Command::Algnss(o) => cmd_algnss(o.resolve()?),
        Command::Tower(o) => cmd_tower(o.resolve()?),
        Command::Levin(o) => cmd_levin(o.resolve()?),
        Command::Serve(o) => cmd_serve(o.resolve()?),
    }
}

fn cmd_ext(o: Opts) -> Result<(), CliError> {
    let p = o.prime()?;
    let (s_max, t_max) = o.caps(4, 14)?;
    let arg = match (&o.module, &o.preset) {
        (Some(m), _) => m.clone(),
        (None, Some(pr)) => match pr.as_str() {
            "steenrod" | "A" | "P" | "bp" | "BP" => pr.clone(),
            _ => return Err(invalid(format!("unknown Hopf preset {pr:?} (expected steenrod, P or bp)"))),
        },
        (None, None) => return Err(invalid("ext needs --preset or --module")),
    };
    let m = module_arg(&arg, p, t_max)?;
    let table = ext(&m.hopf, &m, s_max, t_max)?;
    let format = o.format.as_deref().unwrap_or("tsv");
    let text = match format {
        "tsv" => table.to_tsv(),
        "json" => render_chart(&table.chart(), ExportFormat::Json),
        f => return Err(invalid(format!("unsupported format {f:?} (expected tsv or json)"))),
    };
    let path = o.out().join(format!("ext-{}.{format}", slug(&m.name)));
    write(&path, &text)?;
    print!("{text}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_algnss(o: Opts) -> Result<(), CliError> {
    let p = o.prime()?;
    let (s_max, t_max) = o.caps(3, 12)?;
    let m = module_arg(o.module.as_deref().unwrap_or("bp"), p, t_max)?;
    let caps = Caps::new(s_max, t_max);
    let out = o.out();
    let table = ext(&m.hopf, &m, s_max, t_max)?;
    let mut sessions = Vec::new();
    for def in o.definition()?.definitions() {
        let mut sess = algnss(&m, def, caps)?;
        sess.id = format!("{}-{def}", slug(&m.name));
        let stem = out.join(format!("algnss-{}", sess.id));
        write(&stem.with_extension("session.json"), &sess.save())?;
        let chart = sess.chart(sess.last_page())?;
        write(&stem.with_extension("chart.json"), &render_chart(&chart, ExportFormat::Json))?;
        write(&stem.with_extension("svg"), &render_chart(&chart, ExportFormat::Svg))?;
        let verdict = match convergence_check(&sess, &table) {
            Ok(r) if r.passes() => format!("converges at {} stable (s, t)", r.rows.len()),
            Ok(r) => format!("DOES NOT converge at {} of {} stable (s, t)", r.mismatches().len(), r.rows.len()),
            Err(e) => format!("convergence not checked: {e}"),
        };
        let undetermined = sess.base().undetermined.len();
        println!(
            "{} ({def}): pages E_1..E_{}, collapsed {}, {undetermined} undetermined, {verdict}",
            m.name,
            sess.last_page(),
            sess.collapsed()
        );
        sessions.push(sess);
    }
    if let [a, b] = sessions.as_slice() {
        let report = compare_sessions(a, b, &Regrading::Identity);
        let path = out.join(format!("compare-{}.json", slug(&m.name)));
        write(&path, &serde_json::to_string_pretty(&report).expect("reports serialize"))?;
        println!("iadic vs cosimplicial: {} mismatches", report.len());
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn tower_config(o: &Opts) -> Result<PipelineConfig, CliError> {
    let (s_max, t_max) = o.caps(3, 12)?;
    let source = match (&o.preset, o.comodules.is_empty()) {
        (Some(p), true) => LayerSource::Preset(p.parse::<Field>().map_err(invalid)?),
        (None, false) => LayerSource::Files(o.comodules.clone()),
        (Some(_), false) => return Err(invalid("give either --preset or --comodule files, not both")),
        (None, true) => return Err(invalid("tower needs --preset C|R|Fq:<q> or --comodule files")),
    };
    let chow_max = match &source {
        LayerSource::Files(v) => v.len() as u32 - 1,
        LayerSource::Preset(_) => o.chow_max.unwrap_or(4),
    };
    Ok(PipelineConfig {
        prime: o.prime()?,
        s_max,
        t_max,
        chow_max,
        source,
        out: o.out(),
        definition: o.definition()?,
        serve: false,
        port: o.port.unwrap_or(8080),
    })
}

fn cmd_tower(o: Opts) -> Result<(), CliError> {
    let cfg = tower_config(&o)?;
    let bundle = run_pipeline(&cfg)?;
    let m = &bundle.manifest;
    for l in &m.layers {
        let names: Vec<&str> = l.summands.iter().flat_map(|s| s.charts.iter().map(|c| c.id.as_str())).collect();
        let desc = if l.description.is_empty() { "?" } else { &l.description };
        println!("Chow {}: {desc}  [{}]", l.chow, names.join(", "));
        if let Some(e) = &l.error {
            eprintln!("Chow {}: layer failed: {e}", l.chow);
        }
        for s in &l.summands {
            for e in &s.errors {
                eprintln!("Chow {} {}: {e}", l.chow, s.name);
            }
        }
    }
    println!("bundle {}: {} charts, hash {}", cfg.out.display(), m.charts().count(), bundle.hash());
    Ok(())
}

fn cmd_levin(o: Opts) -> Result<(), CliError> {
    let p = o.prime()?;
    let (s_max, t_max) = o.caps(3, 12)?;
    let n = o.n.unwrap_or(2);
    if n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let m = module_arg(o.module.as_deref().unwrap_or("bp"), p, t_max)?;
    if m.hopf.kind != HopfKind::BrownPeterson {
        return Err(invalid("levin needs a BP_* comodule"));
    }
    println!("{}", levin_index_one(&m, n, s_max, t_max));
    Ok(())
}

fn cmd_serve(o: Opts) -> Result<(), CliError> {
    let out = o.out();
    let mut bundles = discover_bundles(&out)?;
    if bundles.is_empty() && (o.preset.is_some() || !o.comodules.is_empty()) {
        let cfg = tower_config(&o)?;
        eprintln!("no bundle under {}; running the pipeline", out.display());
        run_pipeline(&cfg)?;
        bundles = discover_bundles(&out)?;
    }
    eprintln!("serving {} bundle(s) from {}", bundles.len(), out.display());
    let port = o.port.unwrap_or(8080);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    let state = Arc::new(AppState::new(bundles));
    rt.block_on(serve(state, ([127, 0, 0, 1], port).into())).map_err(|e| CliError::Internal(e.to_string()))
}

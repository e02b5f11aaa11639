//! End-to-end runs over the Chow layers of a field: each layer comodule is
//! written out, its algebraic Novikov spectral sequence computed under one
//! or both definitions and checked against Ext, and its Koszul Tor table
//! recorded. The results form a bundle directory with a hashed manifest.
//!
//! Motivic Steenrod Ext over the base field, the identification of the
//! layers with motivic homotopy, and the Adams spectral sequences built on
//! the Tor tables are outside this pipeline; differentials are moved between
//! layers by hand through session imports.

pub mod export;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bp_hopf::{cached, HopfKind};
use crate::cobar_ext::{ext, koszul_tor};
use crate::comodules::{layer, parse_comodule, render_comodule, Comodule, Field};
use crate::novikov_ss::{algnss, compare_sessions, convergence_check, Caps, Definition, Regrading, Session};

pub use export::{chart_svg, chart_tsv, export_chart, render_chart, ExportError, ExportFormat};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const BUNDLE_FORMAT: &str = "novikov-bundle";
pub const BUNDLE_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DefinitionChoice {
    #[default]
    Iadic,
    Cosimplicial,
    Both,
}

impl DefinitionChoice {
    pub fn definitions(&self) -> Vec<Definition> {
        match self {
            DefinitionChoice::Iadic => vec![Definition::Iadic],
            DefinitionChoice::Cosimplicial => vec![Definition::Cosimplicial],
            DefinitionChoice::Both => vec![Definition::Iadic, Definition::Cosimplicial],
        }
    }
}

impl std::str::FromStr for DefinitionChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<DefinitionChoice, String> {
        match s {
            "iadic" => Ok(DefinitionChoice::Iadic),
            "cosimplicial" => Ok(DefinitionChoice::Cosimplicial),
            "both" => Ok(DefinitionChoice::Both),
            _ => Err(format!("unknown definition {s:?} (expected iadic, cosimplicial or both)")),
        }
    }
}

/// Where the layers come from: a field preset, or one comodule file per
/// Chow degree starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSource {
    Preset(Field),
    Files(Vec<PathBuf>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub prime: u32,
    pub s_max: u32,
    pub t_max: u32,
    pub chow_max: u32,
    pub source: LayerSource,
    pub out: PathBuf,
    pub definition: DefinitionChoice,
    pub serve: bool,
    pub port: u16,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            prime: 2,
            s_max: 3,
            t_max: 12,
            chow_max: 4,
            source: LayerSource::Preset(Field::C),
            out: PathBuf::from("novikov-out"),
            definition: DefinitionChoice::Iadic,
            serve: false,
            port: 8080,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bundle {0}")]
    Bundle(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Invalid(m));
        if self.prime < 2 || !(2..self.prime).all(|d| self.prime % d != 0) {
            return bad(format!("{} is not a prime", self.prime));
        }
        if self.s_max == 0 || self.t_max == 0 {
            return bad("caps must be positive".into());
        }
        match &self.source {
            LayerSource::Preset(f) => {
                if self.prime != 2 {
                    return bad(format!("the {f} layers are 2-primary; got p = {}", self.prime));
                }
                if let Field::Fq(q) = f {
                    if q % 2 == 0 || *q < 3 {
                        return bad(format!("F_q needs q odd; got q = {q}"));
                    }
                }
            }
            LayerSource::Files(v) if v.is_empty() => return bad("no comodule files given".into()),
            LayerSource::Files(_) => {}
        }
        Ok(())
    }

    /// SHA-256 of everything that determines the bundle contents. Comodule
    /// files enter through their contents, not their paths.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            engine_version: &'a str,
            prime: u32,
            s_max: u32,
            t_max: u32,
            chow_max: u32,
            definition: DefinitionChoice,
            preset: Option<Field>,
            files: Vec<String>,
        }
        let (preset, files) = match &self.source {
            LayerSource::Preset(f) => (Some(*f), Vec::new()),
            LayerSource::Files(v) => (None, v.iter().map(|p| fs::read(p).map(|b| sha256_hex(&b)).unwrap_or_else(|e| format!("unreadable: {e}"))).collect()),
        };
        let key = Key {
            engine_version: ENGINE_VERSION,
            prime: self.prime,
            s_max: self.s_max,
            t_max: self.t_max,
            chow_max: self.chow_max,
            definition: self.definition,
            preset,
            files,
        };
        sha256_hex(serde_json::to_string(&key).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub id: String,
    pub definition: Definition,
    pub chart_file: String,
    pub session_file: String,
    pub comodule_file: String,
    pub convergence_file: Option<String>,
    pub converges: Option<bool>,
    pub last_page: u32,
    pub collapsed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandRecord {
    pub index: usize,
    pub name: String,
    pub shift: (i32, i32),
    pub comodule_file: String,
    pub ext_file: Option<String>,
    pub tor_file: Option<String>,
    pub comparison_file: Option<String>,
    pub charts: Vec<ChartRecord>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub chow: u32,
    pub description: String,
    pub summands: Vec<SummandRecord>,
    /// Set when the layer could not be materialized at all.
    pub error: Option<String>,
}

impl LayerRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.summands.iter().any(|s| !s.errors.is_empty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub engine_version: String,
    pub config_hash: String,
    pub prime: u32,
    pub s_max: u32,
    pub t_max: u32,
    pub chow_max: u32,
    pub definition: DefinitionChoice,
    pub source: String,
    pub layers: Vec<LayerRecord>,
    /// Every other file of the bundle with its SHA-256.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn charts(&self) -> impl Iterator<Item = &ChartRecord> {
        self.layers.iter().flat_map(|l| l.summands.iter().flat_map(|s| s.charts.iter()))
    }

    pub fn chart(&self, id: &str) -> Option<&ChartRecord> {
        self.charts().find(|c| c.id == id)
    }
}

/// A finished bundle: manifest plus file contents keyed by relative path.
#[derive(Clone, Debug)]
pub struct ChartBundle {
    pub manifest: Manifest,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl ChartBundle {
    pub fn manifest_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the manifest, which pins every file through its hash.
    pub fn hash(&self) -> String {
        sha256_hex(self.manifest_json().as_bytes())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), PipelineError> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(&path, bytes).map_err(io_err(&path))?;
        }
        let path = dir.join(MANIFEST);
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        fs::write(&path, self.manifest_json()).map_err(io_err(&path))
    }

    /// Reads a bundle and checks every file against the manifest hashes.
    pub fn load(dir: &Path) -> Result<ChartBundle, PipelineError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| PipelineError::Bundle(format!("{}: {e}", path.display())))?;
        if manifest.format != BUNDLE_FORMAT || manifest.version != BUNDLE_VERSION {
            return Err(PipelineError::Bundle(format!("{}: not a {BUNDLE_FORMAT} v{BUNDLE_VERSION} manifest", path.display())));
        }
        let mut files = BTreeMap::new();
        for (rel, want) in &manifest.files {
            let p = dir.join(rel);
            let bytes = fs::read(&p).map_err(io_err(&p))?;
            let got = sha256_hex(&bytes);
            if &got != want {
                return Err(PipelineError::Bundle(format!("{rel}: hash {got} does not match the manifest ({want})")));
            }
            files.insert(rel.clone(), bytes);
        }
        Ok(ChartBundle { manifest, files })
    }

    pub fn text(&self, rel: &str) -> Option<&str> {
        self.files.get(rel).and_then(|b| std::str::from_utf8(b).ok())
    }

    pub fn session(&self, chart_id: &str) -> Option<Result<Session, crate::novikov_ss::SsError>> {
        let rec = self.manifest.chart(chart_id)?;
        Some(Session::load(self.text(&rec.session_file)?))
    }
}

struct LayerInput {
    chow: u32,
    description: String,
    summands: Vec<Result<Arc<Comodule>, String>>,
}

fn layer_inputs(cfg: &PipelineConfig) -> Vec<Result<LayerInput, (u32, String)>> {
    match &cfg.source {
        LayerSource::Preset(field) => {
            let h = match cached(HopfKind::BrownPeterson, cfg.prime, cfg.t_max) {
                Ok(h) => h,
                Err(e) => return (0..=cfg.chow_max).map(|n| Err((n, e.to_string()))).collect(),
            };
            (0..=cfg.chow_max)
                .map(|n| match layer(&h, *field, n) {
                    Ok(l) => Ok(LayerInput { chow: n, description: l.describe(), summands: l.summands.into_iter().map(Ok).collect() }),
                    Err(e) => Err((n, e.to_string())),
                })
                .collect()
        }
        LayerSource::Files(paths) => paths
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let n = n as u32;
                let m = fs::read_to_string(p)
                    .map_err(|e| format!("{}: {e}", p.display()))
                    .and_then(|t| parse_comodule(&t).map_err(|e| format!("{}: {e}", p.display())));
                match m {
                    Ok(m) => Ok(LayerInput { chow: n, description: m.name.clone(), summands: vec![Ok(Arc::new(m))] }),
                    Err(e) => Err((n, e)),
                }
            })
            .collect(),
    }
}

type Files = BTreeMap<String, Vec<u8>>;

fn json_bytes<T: Serialize>(x: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(x).expect("serializes");
    s.push('\n');
    s.into_bytes()
}

fn run_summand(cfg: &PipelineConfig, chow: u32, index: usize, m: &Comodule, files: &mut Files) -> SummandRecord {
    let stem = format!("chow{chow}.{index}");
    let comodule_file = format!("comodules/{stem}.comodule");
    files.insert(comodule_file.clone(), render_comodule(m).into_bytes());
    let mut rec = SummandRecord {
        index,
        name: m.name.clone(),
        shift: m.shift,
        comodule_file: comodule_file.clone(),
        ext_file: None,
        tor_file: None,
        comparison_file: None,
        charts: Vec::new(),
        errors: Vec::new(),
    };
    let caps = Caps::new(cfg.s_max, cfg.t_max);

    let tor_file = format!("tor/{stem}.tsv");
    match catch_unwind(AssertUnwindSafe(|| koszul_tor(m, cfg.s_max, cfg.t_max))) {
        Ok(t) => {
            files.insert(tor_file.clone(), t.to_tsv().into_bytes());
            rec.tor_file = Some(tor_file);
        }
        Err(_) => rec.errors.push("tor: internal error".into()),
    }

    let ext_table = match ext(&m.hopf, m, cfg.s_max, cfg.t_max) {
        Ok(e) => {
            let f = format!("ext/{stem}.tsv");
            files.insert(f.clone(), e.to_tsv().into_bytes());
            rec.ext_file = Some(f);
            Some(e)
        }
        Err(e) => {
            rec.errors.push(format!("ext: {e}"));
            None
        }
    };

    let mut sessions = Vec::new();
    for def in cfg.definition.definitions() {
        let id = format!("{stem}-{def}");
        let sess = match catch_unwind(AssertUnwindSafe(|| algnss(m, def, caps))) {
            Ok(Ok(mut s)) => {
                s.id = id.clone();
                s
            }
            Ok(Err(e)) => {
                rec.errors.push(format!("{def}: {e}"));
                continue;
            }
            Err(_) => {
                rec.errors.push(format!("{def}: internal error"));
                continue;
            }
        };
        let chart_file = format!("charts/{id}.json");
        let session_file = format!("sessions/{id}.json");
        let mut chart = match sess.chart(sess.last_page()) {
            Ok(c) => c,
            Err(e) => {
                rec.errors.push(format!("{def}: {e}"));
                continue;
            }
        };
        chart.source = Some(comodule_file.clone());
        let mut chart_json = chart.to_json();
        chart_json.push('\n');
        files.insert(chart_file.clone(), chart_json.into_bytes());
        let mut session_json = sess.save();
        session_json.push('\n');
        files.insert(session_file.clone(), session_json.into_bytes());
        let (mut convergence_file, mut converges) = (None, None);
        if let Some(e) = &ext_table {
            match convergence_check(&sess, e) {
                Ok(report) => {
                    let f = format!("convergence/{id}.json");
                    files.insert(f.clone(), json_bytes(&report));
                    converges = Some(report.passes());
                    convergence_file = Some(f);
                }
                Err(err) => rec.errors.push(format!("{def} convergence: {err}")),
            }
        }
        rec.charts.push(ChartRecord {
            id,
            definition: def,
            chart_file,
            session_file,
            comodule_file: comodule_file.clone(),
            convergence_file,
            converges,
            last_page: sess.last_page(),
            collapsed: sess.collapsed(),
        });
        sessions.push(sess);
    }
    if let [a, b] = sessions.as_slice() {
        let f = format!("comparisons/{stem}.json");
        files.insert(f.clone(), json_bytes(&compare_sessions(a, b, &Regrading::Identity)));
        rec.comparison_file = Some(f);
    }
    rec
}

/// Runs every layer and returns the bundle without writing it. A failing
/// layer is recorded in the manifest and the others still run.
pub fn build_bundle(cfg: &PipelineConfig) -> Result<ChartBundle, PipelineError> {
    cfg.validate()?;
    let inputs = layer_inputs(cfg);
    let results: Vec<(LayerRecord, Files)> = inputs
        .into_par_iter()
        .map(|input| {
            let mut files = Files::new();
            let rec = match input {
                Err((chow, e)) => LayerRecord { chow, description: String::new(), summands: Vec::new(), error: Some(e) },
                Ok(l) => {
                    let mut summands = Vec::new();
                    let mut error = None;
                    for (i, m) in l.summands.iter().enumerate() {
                        match m {
                            Ok(m) => summands.push(run_summand(cfg, l.chow, i, m, &mut files)),
                            Err(e) => error = Some(e.clone()),
                        }
                    }
                    LayerRecord { chow: l.chow, description: l.description, summands, error }
                }
            };
            (rec, files)
        })
        .collect();
    let mut files = Files::new();
    let mut layers = Vec::new();
    for (rec, f) in results {
        layers.push(rec);
        files.extend(f);
    }
    let source = match &cfg.source {
        LayerSource::Preset(f) => f.to_string(),
        LayerSource::Files(v) => format!("{} comodule files", v.len()),
    };
    let manifest = Manifest {
        format: BUNDLE_FORMAT.into(),
        version: BUNDLE_VERSION,
        engine_version: ENGINE_VERSION.into(),
        config_hash: cfg.hash(),
        prime: cfg.prime,
        s_max: cfg.s_max,
        t_max: cfg.t_max,
        chow_max: cfg.chow_max,
        definition: cfg.definition,
        source,
        layers,
        files: files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect(),
    };
    Ok(ChartBundle { manifest, files })
}

/// [`build_bundle`], then writes the bundle into `cfg.out`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ChartBundle, PipelineError> {
    let bundle = build_bundle(cfg)?;
    bundle.write_to(&cfg.out)?;
    Ok(bundle)
}

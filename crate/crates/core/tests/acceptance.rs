//! One line per acceptance criterion: `PASS <name> (<secs>s)` or
//! `FAIL <name>: <reason>`. Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Deserialize;

use novikov::bp_hopf::{build_bp, cached, check_axioms, HopfKind};
use novikov::cobar_ext::minres::{minimal_resolution_ext, MilnorAlgebra};
use novikov::cobar_ext::{ext, ext_with, koszul_tor, levin_index_one, ExtOptions, Route};
use novikov::comodules::{bp_mod_in, cyclic_quotient, finite_field_layer, real_layer, unit_comodule, Field};
use novikov::novikov_ss::{
    algnss_cosimplicial, algnss_iadic, compare_sessions, convergence_check, ext_session, Caps, Event, Regrading, SsError, Tri,
};
use novikov::pipeline::{run_pipeline, LayerSource, PipelineConfig};

mod oracles;

use oracles::{dense_cobar, enumerate_real, layer_shapes};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took <= limit, "{what} took {:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs());
    Ok(())
}

fn hopf_axioms() -> Result<(), String> {
    for (p, cap) in [(2, 30), (3, 40)] {
        let start = Instant::now();
        let h = build_bp(p, cap).map_err(|e| e.to_string())?;
        within(start, Duration::from_secs(60), &format!("build_bp({p}, {cap})"))?;
        let r = check_axioms(&h);
        ensure!(r.passed(), "build_bp({p}, {cap}): {:?}", r.violation);
    }
    Ok(())
}

fn steenrod_ext() -> Result<(), String> {
    let start = Instant::now();
    let h = cached(HopfKind::DualSteenrod, 2, 26).map_err(|e| e.to_string())?;
    let m = unit_comodule(&h);
    let e = ext(&h, &m, 6, 26).map_err(|e| e.to_string())?;
    let oracle = minimal_resolution_ext(&MilnorAlgebra::steenrod2(14), 4, 14);
    for (&(s, t), &d) in &oracle {
        ensure!(e.dim(s, t) == d, "Ext^({s},{t}) = {} but the minimal resolution gives {d}", e.dim(s, t));
    }
    let cobar = ext_with(&h, &m, 2, 8, ExtOptions { route: Route::Cobar, reversed: false }).map_err(|e| e.to_string())?;
    for s in 0..=2u32 {
        for t in 0..=8 {
            let d = dense_cobar::ext_dim(s as usize, t);
            ensure!(e.dim(s, t) == d && cobar.dim(s, t) == d, "Ext^({s},{t}): {} / {} vs dense cobar {d}", e.dim(s, t), cobar.dim(s, t));
        }
    }
    for i in 0..4 {
        ensure!(e.dim(1, 1 << i) == 1, "Ext^(1,{}) = {}", 1 << i, e.dim(1, 1 << i));
    }
    ensure!(e.dim(6, 6) == 1, "h0^6 missing");
    within(start, Duration::from_secs(300), "Steenrod Ext")
}

fn adams_novikov_e2() -> Result<(), String> {
    let start = Instant::now();
    let h = cached(HopfKind::BrownPeterson, 2, 14).map_err(|e| e.to_string())?;
    let m = unit_comodule(&h);
    let sess = algnss_iadic(&m, Caps::new(4, 14)).map_err(|e| e.to_string())?;
    let e = ext(&h, &m, 4, 14).map_err(|e| e.to_string())?;
    let rep = convergence_check(&sess, &e).map_err(|e| e.to_string())?;
    ensure!(rep.passes(), "mismatches at {:?}", rep.mismatches());
    ensure!(!rep.rows.is_empty(), "no stable tridegree");
    let b = sess.base();
    let at = |w| b.e_infinity.get(&Tri { s: 1, t: 2, w }).copied().unwrap_or(0);
    let total: usize = (0..=b.caps.w_max.unwrap_or(14)).map(at).sum();
    ensure!(at(1) == 1 && total == 1, "alpha_1: E_inf at (1,2,1) is {}, total over w {total}", at(1));
    within(start, Duration::from_secs(600), "Adams-Novikov cross-check")
}

fn two_definitions() -> Result<(), String> {
    let h = cached(HopfKind::BrownPeterson, 2, 12).map_err(|e| e.to_string())?;
    let caps = Caps::new(3, 12);
    let bp = unit_comodule(&h);
    let a = algnss_iadic(&bp, caps).map_err(|e| e.to_string())?;
    let b = algnss_cosimplicial(&bp, caps).map_err(|e| e.to_string())?;
    let report = compare_sessions(&a, &b, &Regrading::Identity);
    ensure!(report.is_empty(), "BP: {} mismatches, first {:?}", report.len(), report.first());
    let four = cyclic_quotient(&h, 2).map_err(|e| e.to_string())?;
    let a = algnss_iadic(&four, caps).map_err(|e| e.to_string())?;
    let b = algnss_cosimplicial(&four, caps).map_err(|e| e.to_string())?;
    let report = compare_sessions(&a, &b, &Regrading::Identity);
    serde_json::to_string(&report).map_err(|e| e.to_string())?;
    Ok(())
}

fn levin() -> Result<(), String> {
    let h = cached(HopfKind::BrownPeterson, 2, 14).map_err(|e| e.to_string())?;
    let bp = levin_index_one(&unit_comodule(&h), 2, 3, 12);
    ensure!(bp.vanishes(), "BP: {bp}");
    let four = levin_index_one(&cyclic_quotient(&h, 2).map_err(|e| e.to_string())?, 2, 3, 12);
    ensure!(!four.vanishes(), "BP/4: {four}");
    Ok(())
}

fn layer_presets() -> Result<(), String> {
    let h = cached(HopfKind::BrownPeterson, 2, 24).map_err(|e| e.to_string())?;
    for n in 0..=8 {
        let layer = real_layer(&h, n).map_err(|e| e.to_string())?;
        let got = layer_shapes(&layer, 24, 16);
        let want = enumerate_real(n, 16);
        ensure!(got == want, "real Chow degree {n}: {got:?} vs {want:?}");
    }
    for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
        for n in 0..=9u32 {
            let l = finite_field_layer(&h, q, n).map_err(|e| e.to_string())?;
            let w = (n + 1) / 2;
            let ok = match n {
                0 => l.summands.len() == 1 && l.summands[0].shift == (0, 0),
                _ if n % 2 == 0 => l.is_zero(),
                _ => l.summands.len() == 1 && l.summands[0].shift == (-1, -(w as i32)),
            };
            ensure!(ok, "F_{q} Chow degree {n}: {}", l.describe());
        }
    }
    Ok(())
}

fn koszul() -> Result<(), String> {
    let h = cached(HopfKind::BrownPeterson, 2, 14).map_err(|e| e.to_string())?;
    let f2 = bp_mod_in(&h, h.nb() as i32).map_err(|e| e.to_string())?;
    let table = koszul_tor(&f2, 4, 12);
    let degs: Vec<u32> = std::iter::once(0).chain((1..).map(|i| (1u32 << (i + 1)) - 2).take_while(|d| *d <= 12)).collect();
    let mut oracle: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for mask in 0u32..1 << degs.len() {
        let s = mask.count_ones();
        let t: u32 = (0..degs.len()).filter(|i| mask >> i & 1 == 1).map(|i| degs[i]).sum();
        *oracle.entry((s, t)).or_insert(0) += 1;
    }
    for s in 0..=4 {
        for t in 0..=12 {
            let want = oracle.get(&(s, t)).copied().unwrap_or(0);
            ensure!(table.dim(s, t) == want, "Tor_({s},{t}) = {} vs {want}", table.dim(s, t));
        }
    }
    Ok(())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Result<(), String> {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut trees = Vec::new();
    for d in &dirs {
        let cfg = PipelineConfig { chow_max: 4, source: LayerSource::Preset(Field::R), out: d.path().to_path_buf(), ..Default::default() };
        run_pipeline(&cfg).map_err(|e| e.to_string())?;
        trees.push(read_tree(d.path()));
    }
    ensure!(trees[0].len() > 10, "only {} files", trees[0].len());
    ensure!(trees[0] == trees[1], "bundles differ");
    Ok(())
}

#[derive(Deserialize)]
struct Transcript {
    s_max: u32,
    t_max: u32,
    events: Vec<Event>,
    conflict: Event,
}

fn session_engine() -> Result<(), String> {
    let tr: Transcript = serde_json::from_str(include_str!("golden/transcript.json")).map_err(|e| e.to_string())?;
    ensure!(tr.events.len() == 20, "{} events", tr.events.len());
    let h = cached(HopfKind::DualSteenrod, 2, tr.t_max).map_err(|e| e.to_string())?;
    let m = unit_comodule(&h);
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut s = ext_session(&m, tr.s_max, tr.t_max).map_err(|e| e.to_string())?;
        let mut steps = Vec::new();
        for e in &tr.events {
            s.apply(e.clone()).map_err(|err| format!("{e:?}: {err}"))?;
            steps.push(s.tables());
        }
        runs.push((s, steps));
    }
    ensure!(runs[0].1 == runs[1].1, "replays differ");
    let s = &mut runs[0].0;
    let (tables, saved) = (s.tables(), s.save());
    match s.apply(tr.conflict.clone()) {
        Err(SsError::ContradictionDetected { chain }) => {
            ensure!(chain.iter().any(|c| c.contains("leibniz")), "chain without a Leibniz step: {chain:?}")
        }
        other => return Err(format!("expected a contradiction, got {other:?}")),
    }
    ensure!(s.tables() == tables && s.save() == saved, "state changed after the contradiction");
    Ok(())
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("hopf-axioms", hopf_axioms),
        ("steenrod-ext", steenrod_ext),
        ("adams-novikov-e2", adams_novikov_e2),
        ("two-definitions", two_definitions),
        ("levin", levin),
        ("layer-presets", layer_presets),
        ("koszul-tor", koszul),
        ("determinism", determinism),
        ("session-engine", session_engine),
    ];
    let last_panic = Arc::new(Mutex::new(String::new()));
    let sink = last_panic.clone();
    panic::set_hook(Box::new(move |info| {
        *sink.lock().unwrap() = info.to_string();
    }));
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err(format!("panic: {}", last_panic.lock().unwrap())));
        match outcome {
            Ok(()) => println!("PASS {name} ({:.1}s)", start.elapsed().as_secs_f64()),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

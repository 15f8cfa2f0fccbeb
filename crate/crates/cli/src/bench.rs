//! Suite layout: `DIR` and each of its immediate subdirectories that holds a
//! `template.json`; every other `*.json` file next to it is an instance.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::Rng;
use serde::Serialize;
use slac::gen;
use slac::singleton::{singleton_fixpoint, ProbeEngine, SingletonOptions};
use slac::{ac_fixpoint, lac_closure, templates, Instance};

use crate::input;
use crate::{Method, EXIT_OK};

pub struct BenchArgs {
    pub suite: PathBuf,
    pub repeat: usize,
    pub methods: Vec<Method>,
    pub csv: Option<PathBuf>,
    pub random: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub method: String,
    pub instance: String,
    pub vars: usize,
    pub constraints: usize,
    pub sweeps: usize,
    pub removals: usize,
    pub wall_ms: f64,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

fn suite_instances(root: &Path) -> Result<Vec<(String, Instance)>> {
    let mut dirs = vec![root.to_path_buf()];
    let mut subdirs: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    dirs.extend(subdirs);
    let mut out = Vec::new();
    for dir in dirs {
        let tpath = dir.join("template.json");
        if !tpath.is_file() {
            continue;
        }
        let (template, _) = input::load_template(&tpath.to_string_lossy())?;
        for path in json_files(&dir)? {
            if path == tpath {
                continue;
            }
            let (inst, _) = input::load_instance(&template, &path)?;
            let name = path.strip_prefix(root).unwrap_or(&path).display().to_string();
            out.push((name, inst));
        }
    }
    Ok(out)
}

/// Satisfiable instances with a hidden solution, so every probe runs to its
/// fixpoint.
fn random_instances(count: usize, seed: u64) -> Vec<(String, Instance)> {
    let mut rng = gen::rng(seed);
    let mut out = Vec::new();
    for name in ["neq2", "two_sat", "horn_sat"] {
        let t = Arc::new(templates::by_name(name).expect("bundled"));
        for i in 0..count {
            let n = rng.gen_range(20..=60);
            let (inst, _) = gen::planted_instance(&mut rng, &t, n, 2 * n);
            out.push((format!("planted/{name}/{i}"), inst));
        }
    }
    out
}

/// Returns `(sweeps, removals)`.
fn run_once(method: Method, inst: &Instance) -> (usize, usize) {
    let shrink =
        |pots: &[slac::DomainSet]| -> usize { inst.var_ids().map(|v| (inst.potato(v) - pots[v.0]).len()).sum() };
    match method {
        Method::Ac => {
            let r = ac_fixpoint(inst);
            (0, shrink(&r.potatoes))
        }
        Method::Lac => {
            let r = lac_closure(inst, &[]);
            let pots: Vec<_> = inst.var_ids().map(|v| r.strongest(v, inst.potato(v))).collect();
            (0, shrink(&pots))
        }
        Method::Sac | Method::Slac => {
            let engine = if method == Method::Sac {
                ProbeEngine::Ac
            } else {
                ProbeEngine::Lac
            };
            let r = singleton_fixpoint(inst, engine, &SingletonOptions::default());
            (r.sweeps, r.removals.len())
        }
        Method::Pq => unreachable!("rejected before timing"),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn run(args: &BenchArgs) -> Result<u8> {
    if args.methods.contains(&Method::Pq) {
        bail!("pq is not a benchmarked method");
    }
    if args.repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    let mut instances = suite_instances(&args.suite)?;
    instances.extend(random_instances(args.random, args.rng_seed));
    if instances.is_empty() {
        bail!(
            "no instances under {} (expected a template.json next to them)",
            args.suite.display()
        );
    }
    let mut rows = Vec::new();
    for (name, inst) in &instances {
        for &method in &args.methods {
            let mut times = Vec::with_capacity(args.repeat);
            let mut last = (0, 0);
            for _ in 0..args.repeat {
                let start = Instant::now();
                last = run_once(method, inst);
                times.push(start.elapsed().as_secs_f64() * 1e3);
            }
            rows.push(Row {
                method: method.name().into(),
                instance: name.clone(),
                vars: inst.num_variables(),
                constraints: inst.num_constraints(),
                sweeps: last.0,
                removals: last.1,
                wall_ms: (median(times) * 1e3).round() / 1e3,
            });
        }
    }

    let width = rows.iter().map(|r| r.instance.len()).max().unwrap_or(8).max(8);
    say!(
        "{:<6} {:<width$} {:>6} {:>11} {:>6} {:>8} {:>10}",
        "method",
        "instance",
        "vars",
        "constraints",
        "sweeps",
        "removals",
        "wall_ms"
    );
    for r in &rows {
        say!(
            "{:<6} {:<width$} {:>6} {:>11} {:>6} {:>8} {:>10.3}",
            r.method,
            r.instance,
            r.vars,
            r.constraints,
            r.sweeps,
            r.removals,
            r.wall_ms
        );
    }
    if let Some(path) = &args.csv {
        if path.as_os_str() == "-" {
            write_csv(csv::Writer::from_writer(io::stdout()), &rows)?;
        } else {
            let w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
            write_csv(w, &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn write_csv<W: io::Write>(mut w: csv::Writer<W>, rows: &[Row]) -> Result<()> {
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

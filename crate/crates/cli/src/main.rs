//! `medial`: compute, evaluate and inspect structure-aware medial meshes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use medial_core::export::{read_ma, restore_pins, write_junctions_obj, write_ma, write_seams_obj, write_sheets_ply, write_structure_json};
use medial_core::geom::SurfaceIndex;
use medial_core::mesh_io::{detect_features, load_tet_mesh, normalize, parse_manual_edges, Transform};
use medial_core::metrics::{evaluate, MetricsReport};
use medial_core::optimizer::{analyze, classify_all, compute_sigma, initialize, run_pipeline};
use medial_core::structure::extract_structure;
use medial_core::{Config, MedialError, TetDomain};
use serde_json::json;

/// Process exit codes.
mod exit {
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INPUT_MISSING: u8 = 3;
    pub const INPUT_INVALID: u8 = 4;
    pub const OUTPUT: u8 = 5;
}

#[derive(Parser, Debug)]
#[command(name = "medial", version, about = "Structure-aware medial axis transform of tetrahedral solids")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the full pipeline and write the medial mesh, structure and metrics.
    Compute(ComputeArgs),
    /// Compute metrics for an existing `.ma` file against its input mesh.
    Evaluate(EvaluateArgs),
    /// Dump the power cells and their sub-volume clusters after initialization.
    Inspect(ComputeArgs),
}

#[derive(Args, Debug, Clone)]
struct ComputeArgs {
    /// Tetrahedral mesh (`.mesh` MEDIT or legacy `.vtk`).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSON file with any subset of the configuration fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra sharp edges, one `a b` vertex pair per line.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "c-sigma")]
    c_sigma: Option<f64>,
    #[arg(long = "phi-deg")]
    phi_deg: Option<f64>,
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long = "grad-tol")]
    grad_tol: Option<f64>,
    #[arg(long = "outer-tol")]
    outer_tol: Option<f64>,
    #[arg(long = "max-outer")]
    max_outer: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "samples-per-cell")]
    samples_per_cell: Option<usize>,
    #[arg(long = "tau-rank")]
    tau_rank: Option<f64>,
    #[arg(long = "hd-samples")]
    hd_samples: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct EvaluateArgs {
    #[command(flatten)]
    base: ComputeArgs,
    /// Medial mesh to evaluate, in the input mesh's units.
    #[arg(long)]
    ma: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn input_failure(e: MedialError) -> Failure {
    match e {
        MedialError::Io { .. } => Failure::new(exit::INPUT_MISSING, e.to_string()),
        _ => Failure::new(exit::INPUT_INVALID, e.to_string()),
    }
}

fn config_from(a: &ComputeArgs) -> CliResult<Config> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::new(exit::INPUT_MISSING, format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::new(exit::USAGE, format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { cfg.$f = v; })* };
    }
    set!(gamma, c_sigma, phi_deg, knn, grad_tol, outer_tol, max_outer, seed, samples_per_cell, tau_rank, hd_samples, threads);
    if cfg.gamma.is_nan() || cfg.gamma <= 0.0 || cfg.c_sigma.is_nan() || cfg.c_sigma <= 0.0 || cfg.knn == 0 {
        return Err(Failure::new(exit::USAGE, "gamma and c-sigma must be positive and knn at least 1"));
    }
    Ok(cfg)
}

/// Create `dir` and check that files can be written in it.
fn prepare_out(dir: &Path) -> CliResult<()> {
    let fail = |e: std::io::Error| Failure::new(exit::OUTPUT, format!("output directory {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".medial-write-test");
    fs::File::create(&probe).and_then(|mut f| f.write_all(b"")).map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| Failure::new(exit::OUTPUT, format!("{}: {e}", p.display())))
}

/// Load, normalize and feature-tag the input mesh.
fn load(a: &ComputeArgs, cfg: &Config) -> CliResult<(TetDomain, Transform)> {
    let raw = load_tet_mesh(&a.input).map_err(input_failure)?;
    let (dom, tr) = normalize(&raw).map_err(input_failure)?;
    let manual = match &a.features {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::new(exit::INPUT_MISSING, format!("{}: {e}", p.display())))?;
            parse_manual_edges(&text).map_err(input_failure)?
        }
        None => Vec::new(),
    };
    Ok((detect_features(&dom, cfg.phi(), &manual), tr))
}

fn metrics_json(m: &MetricsReport, extra: serde_json::Value) -> String {
    let mut v = serde_json::to_value(m).expect("metrics serialize");
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

fn compute(a: &ComputeArgs) -> CliResult<()> {
    let cfg = config_from(a)?;
    prepare_out(&a.out)?;
    let (dom, tr) = load(a, &cfg)?;
    log::info!("{} tets, {} boundary triangles", dom.tets.len(), dom.boundary_tris.len());
    let out = run_pipeline(&dom, &cfg).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    let index = SurfaceIndex::new(&dom);
    let m = evaluate(&out.mesh, &dom, &index, out.sigma, &cfg).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;

    write(&a.out, "medial.ma", &write_ma(&out.mesh, &tr))?;
    write(&a.out, "sheets.ply", &write_sheets_ply(&out.mesh, &tr))?;
    write(&a.out, "seams.obj", &write_seams_obj(&out.mesh, &tr))?;
    write(&a.out, "junctions.obj", &write_junctions_obj(&out.mesh, &tr))?;
    write(&a.out, "structure.json", &write_structure_json(&out.mesh))?;
    let log: String = out.log.iter().map(|r| serde_json::to_string(r).expect("json") + "\n").collect();
    write(&a.out, "log.jsonl", &log)?;
    let extra = json!({
        "outer_iterations": out.log.len(),
        "converged": out.converged,
        "sigma": out.sigma,
        "edges_pruned": out.prune.edges_pruned,
        "faces_pruned": out.prune.faces_pruned,
        "faces_thinned": out.thinned,
        "init": out.init,
        "transform": tr,
        "config": cfg,
    });
    write(&a.out, "metrics.json", &metrics_json(&m, extra))?;
    println!(
        "spheres {}  seams {}  junctions {}  MSER {:.4}  TQ {:.3}  TER {}  HD {:.3}%",
        m.spheres, m.seams, m.junctions, m.mser, m.tq_avg, m.ter, m.hd_pct
    );
    Ok(())
}

fn evaluate_cmd(a: &EvaluateArgs) -> CliResult<()> {
    let cfg = config_from(&a.base)?;
    prepare_out(&a.base.out)?;
    let (dom, tr) = load(&a.base, &cfg)?;
    let text = fs::read_to_string(&a.ma).map_err(|e| Failure::new(exit::INPUT_MISSING, format!("{}: {e}", a.ma.display())))?;
    let mut mesh = read_ma(&text).map_err(input_failure)?;
    for s in mesh.spheres.iter_mut() {
        s.center = tr.apply(&s.center);
        s.radius *= tr.scale;
    }
    let corners: Vec<_> = dom.feature_corners.iter().map(|&v| dom.vertices[v]).collect();
    restore_pins(&mut mesh, &corners, 1e-9 * dom.bbox_diag);
    let index = SurfaceIndex::new(&dom);
    let rpd = analyze(&dom, &index, &mesh.spheres, &cfg, cfg.seed);
    classify_all(&mut mesh.spheres, &rpd);
    extract_structure(&mut mesh);
    let area = mesh.valid_area();
    let sigma = compute_sigma(area, mesh.spheres.len(), cfg.c_sigma).unwrap_or(cfg.c_sigma * dom.bbox_diag / cfg.gamma);
    let m = evaluate(&mesh, &dom, &index, sigma, &cfg).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    write(&a.base.out, "metrics.json", &metrics_json(&m, json!({ "sigma": sigma })))?;
    println!("MSER {:.4}  TQ {:.3}  TER {}  HD {:.3}%", m.mser, m.tq_avg, m.ter, m.hd_pct);
    Ok(())
}

fn inspect(a: &ComputeArgs) -> CliResult<()> {
    let cfg = config_from(a)?;
    prepare_out(&a.out)?;
    let (dom, tr) = load(a, &cfg)?;
    let index = SurfaceIndex::new(&dom);
    let (mut spheres, _) = initialize(&dom, &index, &cfg).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    let rpd = analyze(&dom, &index, &spheres, &cfg, cfg.seed);
    classify_all(&mut spheres, &rpd);
    let cells: Vec<serde_json::Value> = rpd
        .cells
        .iter()
        .zip(&spheres)
        .map(|(c, s)| {
            let clusters: Vec<serde_json::Value> = c
                .clusters
                .iter()
                .map(|k| {
                    let mut patches: Vec<usize> = k.iter().map(|&i| index.patch(c.samples[i].foot.tri)).collect();
                    patches.sort_unstable();
                    patches.dedup();
                    json!({ "samples": k.len(), "patches": patches })
                })
                .collect();
            let center = tr.invert_point(&s.center);
            json!({
                "sphere": c.sphere,
                "center": [center.x, center.y, center.z],
                "radius": tr.invert_length(s.radius),
                "class": s.class.label(),
                "pinned": s.pinned,
                "pieces": c.pieces.len(),
                "volume": c.volume / tr.scale.powi(3),
                "neighbors": c.neighbors,
                "samples": c.samples.len(),
                "clusters": clusters,
            })
        })
        .collect();
    write(&a.out, "cells.json", &(serde_json::to_string_pretty(&cells).expect("json") + "\n"))?;
    println!("{} cells written to {}", cells.len(), a.out.join("cells.json").display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let threads = match &cli.cmd {
        Cmd::Compute(a) | Cmd::Inspect(a) => a.threads,
        Cmd::Evaluate(a) => a.base.threads,
    };
    if let Some(n) = threads.filter(|&n| n > 0) {
        // Ignore a pool that is already set up; results do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.cmd {
        Cmd::Compute(a) => compute(a),
        Cmd::Evaluate(a) => evaluate_cmd(a),
        Cmd::Inspect(a) => inspect(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

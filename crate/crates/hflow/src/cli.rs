//! Command-line entry points. Exit codes: 0 success (or data admissible),
//! 1 inadmissible data, 2 runtime failure, 3 configuration error.

use crate::admissibility::{check_conditions, ConditionReport};
use crate::config::{parse_config, RunConfig};
use crate::curvature::PrescribedCurvature;
use crate::curve::{circle_samples, curve_from_file, JordanCurve};
use crate::energy::{dirichlet, discrete_mean_curvature, hopf_residual};
use crate::flow::{run_flow, solve_stationary, FlowError, FlowTrace};
use crate::io::{
    read_frame, write_condition_report, write_frame, write_report, write_trace, RunReport,
};
use crate::mesh::{build_disk_mesh, DiskMesh};
use crate::obstacle::Obstacle;
use crate::residuals::{standard_field_family, stationarity_residual};
use crate::state::initial_state;
use crate::v3::V3;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "hflow",
    about = "Disk-type surfaces of prescribed mean curvature: admissibility checks, \
             curvature flow, stationary solves, and surface diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the admissibility conditions and write report.json
    Check { config: PathBuf },
    /// Run the time-discrete flow; writes frames, trace.csv, report.json
    Flow { config: PathBuf },
    /// Minimize the stationary functional directly; writes final.obj, trace.csv, report.json
    Stationary { config: PathBuf },
    /// Print energies and residuals of an OBJ surface on the configured mesh
    Diagnose { config: PathBuf, surface: PathBuf },
}

/// Everything the subcommands build from a config file.
struct Instance {
    cfg: RunConfig,
    mesh: DiskMesh,
    curve: JordanCurve,
    obstacle: Obstacle,
    h_field: PrescribedCurvature,
}

type Failure = (i32, String);

fn fail<T>(code: i32, msg: impl Into<String>) -> Result<T, Failure> {
    Err((code, msg.into()))
}

fn load(config_path: &Path) -> Result<Instance, Failure> {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return fail(3, format!("{}: {e}", config_path.display())),
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
            return fail(3, lines.join("\n"));
        }
    };
    let mesh = match build_disk_mesh(cfg.mesh.n_boundary, cfg.mesh.n_rings) {
        Ok(m) => m,
        Err(e) => return fail(2, e.to_string()),
    };
    let curve = match &cfg.curve_file {
        None => circle_samples(cfg.mesh.n_boundary.max(9)),
        Some(f) => {
            let p = Path::new(f);
            let resolved = if p.is_absolute() {
                p.to_path_buf()
            } else {
                // relative curve paths resolve against the config file
                config_path.parent().unwrap_or(Path::new(".")).join(p)
            };
            match curve_from_file(&resolved) {
                Ok(c) => c,
                Err(e) => return fail(3, e.to_string()),
            }
        }
    };
    let obstacle = cfg.obstacle.clone();
    let h_field = cfg.curvature.build();
    Ok(Instance { cfg, mesh, curve, obstacle, h_field })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&cfg.output.directory);
    match std::fs::create_dir_all(&dir) {
        Ok(()) => Ok(dir),
        Err(e) => fail(2, format!("{}: {e}", dir.display())),
    }
}

fn start_state(
    inst: &Instance,
) -> Result<(crate::state::SurfaceState, Vec<V3>), Failure> {
    let state = initial_state(
        &inst.mesh,
        &inst.curve,
        &inst.obstacle,
        inst.cfg.initial.bump_amplitude,
        inst.cfg.initial.bump_radius,
    )
    .map_err(|e| (2, format!("initial surface is infeasible: {e}")))?;
    let u0 = state
        .realize(&inst.mesh, &inst.curve, &inst.obstacle)
        .map_err(|e| (2, e.to_string()))?;
    Ok((state, u0))
}

fn conditions_of(inst: &Instance, u0: &[V3]) -> Result<ConditionReport, Failure> {
    check_conditions(
        &inst.mesh,
        &inst.curve,
        &inst.obstacle,
        &inst.h_field,
        u0,
        inst.cfg.flow.c,
        inst.cfg.flow.s,
    )
    .map_err(|e| (2, e.to_string()))
}

fn cmd_check(config: &Path) -> Result<i32, Failure> {
    let inst = load(config)?;
    let (_, u0) = start_state(&inst)?;
    let report = conditions_of(&inst, &u0)?;
    let dir = out_dir(&inst.cfg)?;
    write_condition_report(&dir.join("report.json"), &report)
        .map_err(|e| (2, e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(if report.overall { 0 } else { 1 })
}

fn emit_run_outputs(
    dir: &Path,
    conditions: ConditionReport,
    trace: &FlowTrace,
) -> Result<(), Failure> {
    write_trace(&dir.join("trace.csv"), trace).map_err(|e| (2, e.to_string()))?;
    let report = RunReport::from_trace(conditions, trace);
    write_report(&dir.join("report.json"), &report).map_err(|e| (2, e.to_string()))?;
    let last = trace.last();
    println!(
        "{}: {} steps, D = {:.6}, dt_norm = {:.3e}, hopf = {:.3e} -> {}",
        if trace.converged {
            "converged"
        } else if trace.stalled {
            "stalled"
        } else {
            "step budget exhausted"
        },
        report.steps,
        last.dirichlet,
        last.dt_norm,
        last.hopf_residual,
        dir.join("report.json").display()
    );
    Ok(())
}

fn inadmissible(dir: &Path, report: &ConditionReport) -> Result<i32, Failure> {
    write_condition_report(&dir.join("report.json"), report)
        .map_err(|e| (2, e.to_string()))?;
    eprintln!("{}", serde_json::to_string_pretty(report).unwrap());
    eprintln!("data rejected by the admissibility conditions (see report.json)");
    Ok(1)
}

fn cmd_flow(config: &Path) -> Result<i32, Failure> {
    let inst = load(config)?;
    let (state, u0) = start_state(&inst)?;
    let dir = out_dir(&inst.cfg)?;

    let mut frame_err: Option<crate::io::IoError> = None;
    let result = run_flow(
        &inst.mesh,
        &inst.curve,
        &inst.obstacle,
        &inst.h_field,
        &state,
        &inst.cfg.flow,
        |step, _, u| {
            if frame_err.is_none() {
                let path = dir.join(format!("frame_{step:06}.obj"));
                if let Err(e) = write_frame(&path, &inst.mesh, u) {
                    frame_err = Some(e);
                }
            }
        },
    );
    match result {
        Err(FlowError::NotAdmissible(report)) => inadmissible(&dir, &report),
        Err(e) => fail(2, e.to_string()),
        Ok((trace, _)) => {
            if let Some(e) = frame_err {
                return fail(2, e.to_string());
            }
            let conditions = conditions_of(&inst, &u0)?;
            emit_run_outputs(&dir, conditions, &trace)?;
            Ok(0)
        }
    }
}

fn cmd_stationary(config: &Path) -> Result<i32, Failure> {
    let inst = load(config)?;
    let (state, u0) = start_state(&inst)?;
    let dir = out_dir(&inst.cfg)?;

    let result = solve_stationary(
        &inst.mesh,
        &inst.curve,
        &inst.obstacle,
        &inst.h_field,
        &state,
        &inst.cfg.flow,
    );
    match result {
        Err(FlowError::NotAdmissible(report)) => inadmissible(&dir, &report),
        Err(e) => fail(2, e.to_string()),
        Ok((final_state, record)) => {
            let u = final_state
                .realize(&inst.mesh, &inst.curve, &inst.obstacle)
                .map_err(|e| (2, e.to_string()))?;
            write_frame(&dir.join("final.obj"), &inst.mesh, &u)
                .map_err(|e| (2, e.to_string()))?;
            let converged =
                !record.stalled && record.inner_iters < inst.cfg.flow.inner.max_iters;
            let trace = FlowTrace {
                stalled: record.stalled,
                records: vec![record],
                warnings: Vec::new(),
                converged,
            };
            let conditions = conditions_of(&inst, &u0)?;
            emit_run_outputs(&dir, conditions, &trace)?;
            Ok(0)
        }
    }
}

fn cmd_diagnose(config: &Path, surface: &Path) -> Result<i32, Failure> {
    let inst = load(config)?;
    let (vertices, faces) = read_frame(surface).map_err(|e| (2, e.to_string()))?;
    if vertices.len() != inst.mesh.vertex_count() {
        return fail(
            2,
            format!(
                "{} has {} vertices but the configured mesh has {}",
                surface.display(),
                vertices.len(),
                inst.mesh.vertex_count()
            ),
        );
    }
    if faces.len() != inst.mesh.triangles.len() {
        return fail(
            2,
            format!(
                "{} has {} faces but the configured mesh has {}",
                surface.display(),
                faces.len(),
                inst.mesh.triangles.len()
            ),
        );
    }

    let mesh = &inst.mesh;
    let u = &vertices;
    let zero = vec![[0.0; 3]; u.len()];
    let family = standard_field_family(mesh);
    let curv = discrete_mean_curvature(mesh, u);
    let interior: Vec<f64> = (0..mesh.vertex_count())
        .filter(|&i| !mesh.is_boundary(i))
        .map(|i| curv[i])
        .collect();
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &v in &interior {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    let mean = if interior.is_empty() { 0.0 } else { sum / interior.len() as f64 };
    let inside = u.iter().all(|&p| inst.obstacle.contains(p));

    let out = serde_json::json!({
        "dirichlet": dirichlet(mesh, u),
        "hopf_residual": hopf_residual(mesh, u),
        "stationarity_residual": stationarity_residual(mesh, u, &zero, &family),
        "mean_curvature": { "min": lo, "max": hi, "mean": mean },
        "inside_obstacle": inside,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(0)
}

fn setup_threads() {
    if let Ok(v) = std::env::var("HFLOW_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                // a second build_global in one process is a no-op; ignore it
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Parse `args` and run the selected subcommand, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    setup_threads();
    let result = match &cli.command {
        Command::Check { config } => cmd_check(config),
        Command::Flow { config } => cmd_flow(config),
        Command::Stationary { config } => cmd_stationary(config),
        Command::Diagnose { config, surface } => cmd_diagnose(config, surface),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("hflow: {msg}");
            code
        }
    }
}

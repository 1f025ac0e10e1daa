//! File emission and ingestion: OBJ frames, the CSV ledger, JSON reports.

use crate::admissibility::ConditionReport;
use crate::flow::{FlowTrace, StepRecord};
use crate::mesh::DiskMesh;
use crate::v3::V3;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Malformed { path: PathBuf, line: usize, reason: String },
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text)
        .map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

/// Wavefront OBJ with vertices in mesh index order and 1-based faces.
pub fn write_frame(path: &Path, mesh: &DiskMesh, surface: &[V3]) -> Result<(), IoError> {
    assert_eq!(surface.len(), mesh.vertex_count());
    let mut out = String::with_capacity(surface.len() * 48);
    for p in surface {
        writeln!(out, "v {:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    write_text(path, &out)
}

/// Read an OBJ back: vertices and 0-based triangles. Accepts `v`/`f` lines,
/// ignores comments and attribute lines; face entries may carry `/...`
/// suffixes, which are dropped.
pub fn read_frame(path: &Path) -> Result<(Vec<V3>, Vec<[usize; 3]>), IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::File { path: path.to_path_buf(), source })?;
    let bad = |line: usize, reason: &str| IoError::Malformed {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for slot in &mut p {
                    *slot = tokens
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| bad(line, "vertex needs three numbers"))?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let mut f = [0usize; 3];
                for slot in &mut f {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| bad(line, "face needs three indices"))?;
                    let first = tok.split('/').next().unwrap_or("");
                    let i: usize = first
                        .parse()
                        .map_err(|_| bad(line, "face index is not a number"))?;
                    if i == 0 {
                        return Err(bad(line, "face indices are 1-based"));
                    }
                    *slot = i - 1;
                }
                if tokens.next().is_some() {
                    return Err(bad(line, "only triangle faces are supported"));
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    for f in &faces {
        if f.iter().any(|&i| i >= vertices.len()) {
            return Err(bad(0, "face index out of range"));
        }
    }
    Ok((vertices, faces))
}

pub const TRACE_COLUMNS: &str = "step,time,dirichlet,h_volume,f_value,dissipation_increment,dissipation_total,dt_norm,hopf_residual,neumann_residual,stationarity_residual,inner_iters";

fn trace_row(out: &mut String, r: &StepRecord) {
    writeln!(
        out,
        "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
        r.step,
        r.time,
        r.dirichlet,
        r.h_volume,
        r.f_value,
        r.dissipation_increment,
        r.dissipation_total,
        r.dt_norm,
        r.hopf_residual,
        r.neumann_residual,
        r.stationarity_residual,
        r.inner_iters
    )
    .unwrap();
}

/// The per-step ledger as CSV: frozen column order, LF line endings.
pub fn write_trace(path: &Path, trace: &FlowTrace) -> Result<(), IoError> {
    let mut out = String::with_capacity(128 * (trace.records.len() + 1));
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for r in &trace.records {
        trace_row(&mut out, r);
    }
    write_text(path, &out)
}

/// Everything a run leaves behind besides frames and the trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub conditions: ConditionReport,
    pub converged: bool,
    pub stalled: bool,
    /// Accepted time steps (the trace holds this many records plus one).
    pub steps: usize,
    pub last: StepRecord,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn from_trace(conditions: ConditionReport, trace: &FlowTrace) -> Self {
        RunReport {
            conditions,
            converged: trace.converged,
            stalled: trace.stalled,
            steps: trace.records.len() - 1,
            last: trace.last().clone(),
            warnings: trace.warnings.clone(),
        }
    }
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(report).expect("report serialization");
    write_text(path, &text)
}

/// The admissibility report alone (the `check` subcommand's output).
pub fn write_condition_report(path: &Path, report: &ConditionReport) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(report).expect("report serialization");
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::PrescribedCurvature;
    use crate::curve::circle_samples;
    use crate::flow::{run_flow, FlowConfig};
    use crate::mesh::build_disk_mesh;
    use crate::obstacle::Obstacle;
    use crate::state::initial_state;

    #[test]
    fn obj_round_trip_and_golden_first_line() {
        let mesh = build_disk_mesh(12, 2).unwrap();
        let flat: Vec<V3> = mesh.vertices.iter().map(|p| [p[0], p[1], 0.0]).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame_000000.obj");
        write_frame(&path, &mesh, &flat).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        // vertex 0 of the mesh is (1, 0)
        assert_eq!(
            text.lines().next().unwrap(),
            "v 1.000000000000e0 0.000000000000e0 0.000000000000e0"
        );
        assert!(!text.contains('\r'));

        let (verts, faces) = read_frame(&path).unwrap();
        assert_eq!(verts.len(), mesh.vertex_count());
        assert_eq!(faces.len(), mesh.triangles.len());
        for (a, b) in verts.iter().zip(&flat) {
            assert!(crate::v3::dist(*a, *b) < 1e-12);
        }
        assert_eq!(faces[0], mesh.triangles[0]);
    }

    #[test]
    fn malformed_objs_are_rejected_with_context() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        std::fs::write(&path, "v 1 2\n").unwrap();
        let err = read_frame(&path).unwrap_err();
        assert!(err.to_string().contains("bad.obj:1"), "{err}");

        std::fs::write(&path, "v 1 2 3\nf 0 1 2\n").unwrap();
        assert!(read_frame(&path).is_err());
        let missing = dir.path().join("nope.obj");
        let err = read_frame(&missing).unwrap_err();
        assert!(err.to_string().contains("nope.obj"), "{err}");
    }

    #[test]
    fn trace_csv_has_the_frozen_header_and_one_row_per_record() {
        let mesh = build_disk_mesh(12, 2).unwrap();
        let curve = circle_samples(12);
        let all = Obstacle::AllSpace;
        let h0 = PrescribedCurvature::Constant(0.0);
        let state = initial_state(&mesh, &curve, &all, 0.1, 0.7).unwrap();
        let cfg = FlowConfig { max_steps: 0, ..FlowConfig::default() };
        let (trace, _) =
            run_flow(&mesh, &curve, &all, &h0, &state, &cfg, |_, _, _| {}).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2, "header plus the initial record");
        assert_eq!(lines[0], TRACE_COLUMNS);
        assert!(lines[1].starts_with("0,0.000000000000e0,"));
        assert_eq!(lines[1].split(',').count(), 12);
    }

    #[test]
    fn report_json_round_trips_and_names_the_failed_condition() {
        let mesh = build_disk_mesh(12, 2).unwrap();
        let curve = circle_samples(12);
        let ball = Obstacle::Ball { center: [0.0; 3], radius: 1.0 };
        let h = PrescribedCurvature::Constant(1.4);
        let state = initial_state(&mesh, &curve, &ball, 0.0, 0.7).unwrap();
        let u0 = state.realize(&mesh, &curve, &ball).unwrap();
        let conditions = crate::admissibility::check_conditions(
            &mesh, &curve, &ball, &h, &u0, 1.0 / 3.0, None,
        )
        .unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_condition_report(&path, &conditions).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rand"]["pass"], serde_json::Value::Bool(false));
        assert_eq!(v["h3"]["pass"], serde_json::Value::Bool(true));

        // full run report round-trips through parse
        let trace = FlowTrace {
            records: vec![StepRecord {
                step: 0,
                time: 0.0,
                dirichlet: 3.14,
                h_volume: 0.0,
                f_value: 3.14,
                dissipation_increment: 0.0,
                dissipation_total: 0.0,
                dt_norm: 0.0,
                hopf_residual: 0.0,
                neumann_residual: 0.0,
                stationarity_residual: 0.0,
                inner_iters: 0,
                stalled: false,
            }],
            warnings: vec!["example".into()],
            converged: false,
            stalled: false,
        };
        let report = RunReport::from_trace(conditions, &trace);
        let path = dir.path().join("run.json");
        write_report(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        let a = serde_json::to_value(&report).unwrap();
        let b = serde_json::to_value(&back).unwrap();
        assert_eq!(a, b);
    }
}

//! Run configuration: a single JSON file, schema-checked by hand so that
//! every complaint names the offending key, unknown keys are rejected, and
//! every field has a documented default (an empty object is a valid config).

use crate::curvature::PrescribedCurvature;
use crate::flow::{FlowConfig, InnerConfig};
use crate::obstacle::Obstacle;
use crate::v3::V3;
use serde_json::{json, Map, Value};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub key: String,
    pub reason: String,
}

impl SchemaError {
    fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SchemaError { key: key.into(), reason: reason.into() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub n_boundary: usize,
    pub n_rings: usize,
}

/// Curvature field as configuration data (the callback variant is code-only).
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureSpec {
    Constant(f64),
    Radial { center: V3, table: Vec<(f64, f64)> },
}

impl CurvatureSpec {
    pub fn build(&self) -> PrescribedCurvature {
        match self {
            CurvatureSpec::Constant(v) => PrescribedCurvature::Constant(*v),
            CurvatureSpec::Radial { center, table } => {
                PrescribedCurvature::radial(*center, table.clone())
                    .expect("table was validated at parse time")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    /// Height of the quartic bump added to the harmonic start.
    pub bump_amplitude: f64,
    pub bump_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    /// JSON file with `points` and `anchors`; None means the unit circle.
    pub curve_file: Option<String>,
    pub obstacle: Obstacle,
    pub curvature: CurvatureSpec,
    /// Includes the isoperimetric pair (c, s) and the output cadence.
    pub flow: FlowConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshConfig { n_boundary: 48, n_rings: 8 },
            curve_file: None,
            obstacle: Obstacle::AllSpace,
            curvature: CurvatureSpec::Constant(0.0),
            flow: FlowConfig::default(),
            initial: InitialConfig { bump_amplitude: 0.0, bump_radius: 0.7 },
            output: OutputConfig { directory: "out".to_string() },
        }
    }
}

/// One section of the config tree; hands out typed fields and complains
/// about anything left over.
struct Section<'a> {
    prefix: &'a str,
    map: Map<String, Value>,
    errors: &'a mut Vec<SchemaError>,
}

impl<'a> Section<'a> {
    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{}", self.prefix, key)
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        let v = self.take(key)?;
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(key, "must be a finite number");
                None
            }
        }
    }

    fn usize(&mut self, key: &str) -> Option<usize> {
        let v = self.take(key)?;
        match v.as_u64() {
            Some(x) => Some(x as usize),
            None => {
                self.err(key, "must be a non-negative integer");
                None
            }
        }
    }

    fn bool(&mut self, key: &str) -> Option<bool> {
        let v = self.take(key)?;
        match v.as_bool() {
            Some(x) => Some(x),
            None => {
                self.err(key, "must be a boolean");
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        let v = self.take(key)?;
        match v {
            Value::String(s) => Some(s),
            _ => {
                self.err(key, "must be a string");
                None
            }
        }
    }

    fn point(&mut self, key: &str) -> Option<V3> {
        let v = self.take(key)?;
        let arr = v.as_array().map(|a| {
            a.iter().map(|x| x.as_f64()).collect::<Option<Vec<f64>>>()
        });
        match arr {
            Some(Some(xs)) if xs.len() == 3 && xs.iter().all(|x| x.is_finite()) => {
                Some([xs[0], xs[1], xs[2]])
            }
            _ => {
                self.err(key, "must be an array of three finite numbers");
                None
            }
        }
    }

    fn err(&mut self, key: &str, reason: &str) {
        let path = self.path(key);
        self.errors.push(SchemaError::new(path, reason));
    }

    /// Close the section: everything not consumed is an unknown key.
    fn finish(self) {
        let mut leftovers: Vec<String> = self.map.keys().cloned().collect();
        leftovers.sort();
        for key in leftovers {
            let path = self.path(&key);
            self.errors.push(SchemaError::new(path, "unknown key"));
        }
    }
}

fn subsection<'a>(
    parent: &mut Section<'_>,
    key: &str,
    prefix: &'a str,
    errors: &'a mut Vec<SchemaError>,
) -> Option<Section<'a>> {
    let v = parent.take(key)?;
    match v {
        Value::Object(map) => Some(Section { prefix, map, errors }),
        _ => {
            parent.err(key, "must be an object");
            None
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, Vec<SchemaError>> {
    let root_value: Value = serde_json::from_str(text)
        .map_err(|e| vec![SchemaError::new("$", format!("invalid JSON: {e}"))])?;
    let Value::Object(root_map) = root_value else {
        return Err(vec![SchemaError::new("$", "the config must be a JSON object")]);
    };

    let mut cfg = RunConfig::default();
    let mut errors = Vec::new();
    let mut root = Section { prefix: "", map: root_map, errors: &mut errors };

    // mesh
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "mesh", "mesh", &mut errs) {
            if let Some(n) = sec.usize("n_boundary") {
                if n % 3 != 0 {
                    sec.err("n_boundary", "must be divisible by 3");
                } else if n < 9 {
                    sec.err("n_boundary", "must be at least 9");
                } else {
                    cfg.mesh.n_boundary = n;
                }
            }
            if let Some(n) = sec.usize("n_rings") {
                if n < 1 {
                    sec.err("n_rings", "must be at least 1");
                } else {
                    cfg.mesh.n_rings = n;
                }
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    if let Some(path) = root.string("curve_file") {
        cfg.curve_file = Some(path);
    }

    // obstacle
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "obstacle", "obstacle", &mut errs) {
            match sec.string("type").as_deref() {
                None | Some("all_space") => cfg.obstacle = Obstacle::AllSpace,
                Some("ball") => {
                    let center = sec.point("center").unwrap_or([0.0; 3]);
                    let radius = sec.f64("radius").unwrap_or(1.0);
                    if radius > 0.0 {
                        cfg.obstacle = Obstacle::Ball { center, radius };
                    } else {
                        sec.err("radius", "must be positive");
                    }
                }
                Some(_) => sec.err("type", "must be \"all_space\" or \"ball\""),
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    // curvature
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "curvature", "curvature", &mut errs)
        {
            match sec.string("type").as_deref() {
                None | Some("constant") => {
                    let value = sec.f64("value").unwrap_or(0.0);
                    cfg.curvature = CurvatureSpec::Constant(value);
                }
                Some("radial") => {
                    let center = sec.point("center").unwrap_or([0.0; 3]);
                    let table = parse_table(&mut sec);
                    if let Some(table) = table {
                        match PrescribedCurvature::radial(center, table.clone()) {
                            Ok(_) => {
                                cfg.curvature = CurvatureSpec::Radial { center, table }
                            }
                            Err(e) => sec.err("table", &e.to_string()),
                        }
                    }
                }
                Some(_) => sec.err("type", "must be \"constant\" or \"radial\""),
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    // isoperimetric
    {
        let mut errs = Vec::new();
        if let Some(mut sec) =
            subsection(&mut root, "isoperimetric", "isoperimetric", &mut errs)
        {
            if let Some(c) = sec.f64("c") {
                if c > 0.0 && c < 1.0 {
                    cfg.flow.c = c;
                } else {
                    sec.err("c", "must lie in (0,1)");
                }
            }
            if let Some(v) = sec.take("s") {
                match v {
                    Value::Null => cfg.flow.s = None,
                    _ => match v.as_f64() {
                        Some(s) if s.is_finite() && s > 0.0 => cfg.flow.s = Some(s),
                        _ => sec.err("s", "must be a positive number or null"),
                    },
                }
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    // flow
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "flow", "flow", &mut errs) {
            if let Some(h) = sec.f64("h") {
                if h > 0.0 {
                    cfg.flow.h = h;
                } else {
                    sec.err("h", "must be positive");
                }
            }
            if let Some(n) = sec.usize("max_steps") {
                cfg.flow.max_steps = n;
            }
            if let Some(t) = sec.f64("dt_tol") {
                if t >= 0.0 {
                    cfg.flow.dt_tol = t;
                } else {
                    sec.err("dt_tol", "must be non-negative");
                }
            }
            if let Some(t) = sec.f64("hopf_tol") {
                if t >= 0.0 {
                    cfg.flow.hopf_tol = t;
                } else {
                    sec.err("hopf_tol", "must be non-negative");
                }
            }
            if let Some(n) = sec.usize("n_test") {
                if n >= 2 {
                    cfg.flow.n_test = n;
                } else {
                    sec.err("n_test", "must be at least 2");
                }
            }
            if let Some(b) = sec.bool("override_admissibility") {
                cfg.flow.override_admissibility = b;
            }
            let mut inner_errs = Vec::new();
            if let Some(mut inner) =
                subsection(&mut sec, "inner", "flow.inner", &mut inner_errs)
            {
                parse_inner(&mut inner, &mut cfg.flow.inner);
                inner.finish();
            }
            sec.errors.extend(inner_errs);
            sec.finish();
        }
        root.errors.extend(errs);
    }

    // initial
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "initial", "initial", &mut errs) {
            if let Some(a) = sec.f64("bump_amplitude") {
                cfg.initial.bump_amplitude = a;
            }
            if let Some(r) = sec.f64("bump_radius") {
                if r > 0.0 {
                    cfg.initial.bump_radius = r;
                } else {
                    sec.err("bump_radius", "must be positive");
                }
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    // output
    {
        let mut errs = Vec::new();
        if let Some(mut sec) = subsection(&mut root, "output", "output", &mut errs) {
            if let Some(d) = sec.string("directory") {
                if d.is_empty() {
                    sec.err("directory", "must not be empty");
                } else {
                    cfg.output.directory = d;
                }
            }
            if let Some(n) = sec.usize("cadence") {
                cfg.flow.cadence = n;
            }
            sec.finish();
        }
        root.errors.extend(errs);
    }

    root.finish();
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

fn parse_inner(sec: &mut Section<'_>, inner: &mut InnerConfig) {
    if let Some(n) = sec.usize("max_iters") {
        if n >= 1 {
            inner.max_iters = n;
        } else {
            sec.err("max_iters", "must be at least 1");
        }
    }
    if let Some(t) = sec.f64("grad_tol") {
        if t > 0.0 {
            inner.grad_tol = t;
        } else {
            sec.err("grad_tol", "must be positive");
        }
    }
    if let Some(x) = sec.f64("armijo_c") {
        if x > 0.0 && x < 1.0 {
            inner.armijo_c = x;
        } else {
            sec.err("armijo_c", "must lie in (0,1)");
        }
    }
    if let Some(x) = sec.f64("step_shrink") {
        if x > 0.0 && x < 1.0 {
            inner.step_shrink = x;
        } else {
            sec.err("step_shrink", "must lie in (0,1)");
        }
    }
    if let Some(x) = sec.f64("init_step") {
        if x > 0.0 {
            inner.init_step = x;
        } else {
            sec.err("init_step", "must be positive");
        }
    }
}

fn parse_table(sec: &mut Section<'_>) -> Option<Vec<(f64, f64)>> {
    let v = sec.take("table")?;
    let bad = |sec: &mut Section<'_>| {
        sec.err("table", "must be an array of [radius, value] number pairs");
        None
    };
    let Value::Array(rows) = v else { return bad(sec) };
    let mut table = Vec::with_capacity(rows.len());
    for row in &rows {
        let Some(pair) = row.as_array() else { return bad(sec) };
        if pair.len() != 2 {
            return bad(sec);
        }
        match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(r), Some(h)) => table.push((r, h)),
            _ => return bad(sec),
        }
    }
    Some(table)
}

/// Inverse of `parse_config` for the shipped-data round-trip guarantee.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let obstacle = match &cfg.obstacle {
        Obstacle::AllSpace => json!({ "type": "all_space" }),
        Obstacle::Ball { center, radius } => {
            json!({ "type": "ball", "center": center, "radius": radius })
        }
    };
    let curvature = match &cfg.curvature {
        CurvatureSpec::Constant(v) => json!({ "type": "constant", "value": v }),
        CurvatureSpec::Radial { center, table } => {
            let rows: Vec<Value> = table.iter().map(|(r, h)| json!([r, h])).collect();
            json!({ "type": "radial", "center": center, "table": rows })
        }
    };
    let mut root = json!({
        "mesh": { "n_boundary": cfg.mesh.n_boundary, "n_rings": cfg.mesh.n_rings },
        "obstacle": obstacle,
        "curvature": curvature,
        "isoperimetric": { "c": cfg.flow.c, "s": cfg.flow.s },
        "flow": {
            "h": cfg.flow.h,
            "max_steps": cfg.flow.max_steps,
            "dt_tol": cfg.flow.dt_tol,
            "hopf_tol": cfg.flow.hopf_tol,
            "n_test": cfg.flow.n_test,
            "override_admissibility": cfg.flow.override_admissibility,
            "inner": {
                "max_iters": cfg.flow.inner.max_iters,
                "grad_tol": cfg.flow.inner.grad_tol,
                "armijo_c": cfg.flow.inner.armijo_c,
                "step_shrink": cfg.flow.inner.step_shrink,
                "init_step": cfg.flow.inner.init_step,
            },
        },
        "initial": {
            "bump_amplitude": cfg.initial.bump_amplitude,
            "bump_radius": cfg.initial.bump_radius,
        },
        "output": { "directory": cfg.output.directory, "cadence": cfg.flow.cadence },
    });
    if let Some(path) = &cfg.curve_file {
        root["curve_file"] = json!(path);
    }
    serde_json::to_string_pretty(&root).expect("config serialization cannot fail")
}

//! JSON run configurations: one document per run, strict about unknown keys,
//! with field-addressed validation collected before any solve starts.

use std::path::PathBuf;

use serde::Deserialize;

use steklov_core::geometry::{BaseDomain, FiberKind, FiberSpectrum, WarpingFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Bounds,
    Asymptotics,
    Saturate,
    Blowup,
    Stability,
    Conformal,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Bounds => "bounds",
            Command::Asymptotics => "asymptotics",
            Command::Saturate => "saturate",
            Command::Blowup => "blowup",
            Command::Stability => "stability",
            Command::Conformal => "conformal",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    Interval { length: f64 },
    Ball { dim: usize, radius: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberSpec {
    Circle { radius: f64 },
    Sphere { dim: usize },
    Torus { lengths: Vec<f64> },
    Explicit { dim: usize, eigenvalues: Vec<(f64, usize)> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpingSpec {
    Constant { value: f64 },
    Ramp { from: f64, to: f64 },
    Samples { grid: Vec<f64>, values: Vec<f64> },
    File { path: PathBuf },
    Hdelta { c: f64, delta: f64 },
    Heps { p: f64, budget: f64, eps: f64, floor: Option<f64> },
}

/// The raw document; every command shares one schema so a single validator
/// covers all runs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Command,
    pub base: BaseSpec,
    pub fiber: Option<FiberSpec>,
    pub warping: Option<WarpingSpec>,
    pub k: Option<usize>,
    /// Spectrum truncation / conformal eigenvalue count.
    pub count: Option<usize>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub c_list: Option<Vec<f64>>,
    pub delta_list: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub budget: Option<f64>,
    pub floor: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub mesh_n: Option<usize>,
    pub tolerance: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// A validated run, with defaults resolved.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub base: BaseDomain,
    pub fiber: Option<FiberSpectrum>,
    pub warping: Option<WarpingFunction>,
    pub k: usize,
    pub count: usize,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub c_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub budget: f64,
    pub floor: f64,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub mesh_n: usize,
    pub tolerance: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

fn push_err(errors: &mut Vec<FieldError>, field: &str, message: String) {
    errors.push(FieldError {
        field: field.into(),
        message,
    });
}

fn has_error(errors: &[FieldError], field: &str) -> bool {
    errors.iter().any(|e| e.field == field)
}

/// Parse and validate a configuration document.
pub fn validate(text: &str) -> Result<RunConfig, Vec<FieldError>> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        vec![FieldError {
            field: "config".into(),
            message: e.to_string(),
        }]
    })?;
    let RawConfig {
        command,
        base: base_spec,
        fiber: fiber_spec,
        warping: warping_spec,
        k,
        count,
        p,
        c,
        c_list,
        delta_list,
        eps_list,
        budget,
        floor,
        q,
        r,
        mesh_n,
        tolerance,
        output_dir,
    } = raw;
    let mut errors = Vec::new();

    let base = match base_spec {
        BaseSpec::Interval { length } => BaseDomain::interval(length),
        BaseSpec::Ball { dim, radius } => BaseDomain::ball(dim, radius),
    };
    let base = match base {
        Ok(b) => Some(b),
        Err(e) => {
            push_err(&mut errors, "base", e.to_string());
            None
        }
    };

    let fiber = match fiber_spec {
        None => None,
        Some(spec) => {
            let kind = match spec {
                FiberSpec::Circle { radius } => FiberKind::Circle { radius },
                FiberSpec::Sphere { dim } => FiberKind::Sphere { dim },
                FiberSpec::Torus { lengths } => FiberKind::Torus { lengths },
                FiberSpec::Explicit { dim, eigenvalues } => {
                    FiberKind::Explicit { dim, eigenvalues }
                }
            };
            match FiberSpectrum::new(kind) {
                Ok(f) => Some(f),
                Err(e) => {
                    push_err(&mut errors, "fiber", e.to_string());
                    None
                }
            }
        }
    };

    let warping = match warping_spec {
        None => None,
        Some(spec) => match build_warping(spec, base.as_ref()) {
            Ok(h) => Some(h),
            Err(e) => {
                push_err(&mut errors, "warping", e);
                None
            }
        },
    };

    if let Some(p) = p {
        if !(p >= 1.0) {
            push_err(&mut errors, "p", format!("require p >= 1, got {p}"));
        }
    }
    if let Some(c) = c {
        if !(c >= 1.0) {
            push_err(&mut errors, "c", format!("require c >= 1, got {c}"));
        }
    }
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            push_err(&mut errors, "tolerance", format!("require tolerance > 0, got {t}"));
        }
    }
    let mesh_n = mesh_n.unwrap_or(1024);
    if mesh_n < 8 {
        push_err(&mut errors, "mesh_n", format!("require mesh_n >= 8, got {mesh_n}"));
    }
    for (name, list) in [("c_list", &c_list), ("delta_list", &delta_list), ("eps_list", &eps_list)] {
        if let Some(v) = list {
            if v.is_empty() {
                push_err(&mut errors, name, "list must be nonempty".into());
            }
            if v.iter().any(|x| !(*x > 0.0)) {
                push_err(&mut errors, name, "entries must be positive".into());
            }
        }
    }

    // Command-specific requirements.
    let needs_fiber = !matches!(command, Command::Conformal);
    if needs_fiber && fiber.is_none() && !has_error(&errors, "fiber") {
        push_err(&mut errors, "fiber", format!("the {} command needs a fiber", command.name()));
    }
    match command {
        Command::Spectrum | Command::Bounds => {
            if warping.is_none() && !has_error(&errors, "warping") {
                push_err(
                    &mut errors,
                    "warping",
                    format!("the {} command needs a warping function", command.name()),
                );
            }
        }
        Command::Asymptotics => {}
        Command::Saturate => {
            if c_list.is_none() && c.is_none() {
                push_err(&mut errors, "c_list", "the saturate command needs c or c_list".into());
            }
            if delta_list.is_none() {
                push_err(&mut errors, "delta_list", "the saturate command needs delta_list".into());
            }
            if let Some(f) = &fiber {
                if f.dim() != 2 {
                    push_err(
                        &mut errors,
                        "fiber",
                        format!("the saturate sweep requires n = 2, got n = {}", f.dim()),
                    );
                }
            }
        }
        Command::Blowup => {
            match p {
                None => push_err(&mut errors, "p", "the blowup command needs p".into()),
                Some(p) => {
                    if let Some(f) = &fiber {
                        let n = f.dim();
                        if n < 3 {
                            push_err(
                                &mut errors,
                                "fiber",
                                format!("the blow-up regime requires n >= 3, got n = {n}"),
                            );
                        } else if p >= (n - 2) as f64 {
                            push_err(
                                &mut errors,
                                "p",
                                format!("the blow-up regime requires p < n - 2 = {}, got p = {p}", n - 2),
                            );
                        }
                    }
                }
            }
            if budget.is_none() {
                push_err(&mut errors, "budget", "the blowup command needs budget".into());
            }
            if matches!(base, Some(BaseDomain::Interval { .. })) {
                push_err(
                    &mut errors,
                    "base",
                    "the blow-up sweep needs a ball base (connected boundary)".into(),
                );
            }
        }
        Command::Stability => {
            if q.is_none() || r.is_none() {
                push_err(&mut errors, "q", "the stability command needs q and r".into());
            }
            if warping.is_none() && delta_list.is_none() {
                push_err(
                    &mut errors,
                    "warping",
                    "the stability command needs a warping function or (c, delta_list)".into(),
                );
            }
            if delta_list.is_some() && c.is_none() {
                push_err(&mut errors, "c", "a stability family sweep needs c".into());
            }
            if let Some(f) = &fiber {
                if f.dim() != 2 {
                    push_err(
                        &mut errors,
                        "fiber",
                        format!("the stability estimate requires n = 2, got n = {}", f.dim()),
                    );
                }
            }
        }
        Command::Conformal => {
            if warping.is_none() && !has_error(&errors, "warping") {
                push_err(&mut errors, "warping", "the conformal command needs a warping function".into());
            }
            if matches!(base, Some(BaseDomain::Ball { .. })) {
                push_err(
                    &mut errors,
                    "base",
                    "the conformal check is a d = 1 statement: use an interval base".into(),
                );
            }
            if let Some(f) = &fiber {
                if !matches!(f.kind(), FiberKind::Circle { .. }) {
                    push_err(&mut errors, "fiber", "the conformal check needs a circle fiber (n = 1)".into());
                }
            }
        }
    }
    if command == Command::Bounds {
        if let (Some(p), Some(f)) = (p, &fiber) {
            if f.dim() < 3 {
                push_err(
                    &mut errors,
                    "p",
                    format!(
                        "the L^p bound requires n >= 3 (fiber has n = {}); \
                         drop p or use a higher-dimensional fiber",
                        f.dim()
                    ),
                );
            } else if p < (f.dim() - 2) as f64 {
                push_err(
                    &mut errors,
                    "p",
                    format!("the L^p bound requires p >= n - 2 = {}", f.dim() - 2),
                );
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    let base = base.expect("validated");
    // Default collar parameters: a geometric ladder scaled by the inradius.
    let eps_list = eps_list
        .unwrap_or_else(|| (3..=9).map(|i| 2.0f64.powi(-i) * base.inradius()).collect());
    Ok(RunConfig {
        command,
        base,
        fiber,
        warping,
        k: k.unwrap_or(1),
        count: count.unwrap_or(match command {
            Command::Spectrum => 10,
            Command::Conformal => 6,
            _ => 1,
        }),
        p,
        c,
        c_list: c_list
            .unwrap_or_else(|| c.map(|c| vec![c]).unwrap_or_else(|| vec![4.0, 8.0, 16.0, 32.0])),
        delta_list: delta_list.unwrap_or_default(),
        eps_list,
        budget: budget.unwrap_or(16.0),
        floor: floor.unwrap_or(1.0),
        q,
        r,
        mesh_n,
        tolerance,
        output_dir,
    })
}

fn build_warping(spec: WarpingSpec, base: Option<&BaseDomain>) -> Result<WarpingFunction, String> {
    let h = match spec {
        WarpingSpec::Constant { value } => WarpingFunction::constant(value),
        WarpingSpec::Ramp { from, to } => {
            let Some(base) = base else {
                return Err("ramp warping needs a valid base".into());
            };
            WarpingFunction::ramp(base.extent(), from, to)
        }
        WarpingSpec::Samples { grid, values } => WarpingFunction::from_samples(grid, values),
        WarpingSpec::File { path } => WarpingFunction::load(&path),
        WarpingSpec::Hdelta { c, delta } => {
            let Some(base) = base else {
                return Err("hdelta warping needs a valid base".into());
            };
            steklov_core::families::make_hdelta(base, c, delta)
        }
        WarpingSpec::Heps { p, budget, eps, floor } => {
            let Some(base) = base else {
                return Err("heps warping needs a valid base".into());
            };
            steklov_core::families::make_heps(base, p, budget, eps, floor.unwrap_or(1.0))
        }
    };
    let h = h.map_err(|e| e.to_string())?;
    if let Some(base) = base {
        h.validate_for(base).map_err(|e| e.to_string())?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spectrum_config_parses() {
        let cfg = validate(
            r#"{
                "command": "spectrum",
                "base": {"kind": "interval", "length": 1.0},
                "fiber": {"kind": "sphere", "dim": 2},
                "warping": {"kind": "constant", "value": 1.0}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.command, Command::Spectrum);
        assert_eq!(cfg.count, 10);
        assert_eq!(cfg.mesh_n, 1024);
    }

    #[test]
    fn unknown_keys_rejected() {
        let errs = validate(
            r#"{
                "command": "spectrum",
                "base": {"kind": "interval", "length": 1.0},
                "fiber": {"kind": "sphere", "dim": 2},
                "warping": {"kind": "constant", "value": 1.0},
                "mesh": 42
            }"#,
        )
        .unwrap_err();
        assert!(errs[0].message.contains("unknown field `mesh`"), "{errs:?}");
    }

    #[test]
    fn missing_fiber_single_addressed_error() {
        let errs = validate(
            r#"{
                "command": "spectrum",
                "base": {"kind": "interval", "length": 1.0},
                "warping": {"kind": "constant", "value": 1.0}
            }"#,
        )
        .unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "fiber");
    }

    #[test]
    fn lp_bounds_request_needs_n_at_least_3() {
        let errs = validate(
            r#"{
                "command": "bounds",
                "base": {"kind": "interval", "length": 1.0},
                "fiber": {"kind": "sphere", "dim": 2},
                "warping": {"kind": "constant", "value": 1.0},
                "p": 2.0
            }"#,
        )
        .unwrap_err();
        assert!(errs.iter().any(|e| e.field == "p" && e.message.contains("requires n >= 3")));
    }

    #[test]
    fn blowup_rejects_small_p_before_solving() {
        let errs = validate(
            r#"{
                "command": "blowup",
                "base": {"kind": "ball", "dim": 2, "radius": 1.0},
                "fiber": {"kind": "sphere", "dim": 4},
                "p": 0.5,
                "budget": 16.0,
                "eps_list": [0.0625]
            }"#,
        )
        .unwrap_err();
        assert!(errs.iter().any(|e| e.field == "p" && e.message.contains("p >= 1")));
    }

    #[test]
    fn errors_aggregate_across_fields() {
        let errs = validate(
            r#"{
                "command": "blowup",
                "base": {"kind": "interval", "length": 1.0},
                "fiber": {"kind": "sphere", "dim": 2},
                "p": 1.0,
                "eps_list": [],
                "budget": 16.0
            }"#,
        )
        .unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"eps_list"));
        assert!(fields.contains(&"fiber"));
        assert!(fields.contains(&"base"));
    }
}

//! Strict line-oriented experiment configuration.
//!
//! Format: UTF-8 text, one `section.key = value` per line, `#` starts a
//! comment line, blank lines ignored. Sections: `problem`, `delay`, `grid`,
//! `mc`, `pair`, `analysis`, `output`, `order`. Unknown keys and duplicate
//! keys are errors; all parse and validation errors are collected with
//! their line numbers before reporting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sdde::model::{DelaySpec, InitialSegment, SegmentShape, StateVector};

use crate::registry;

#[derive(Debug)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Which delay shape to build once the window is known.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayConfig {
    Constant { tau: f64 },
    Pantograph { q: f64 },
    PiecewiseConstant { shift: u32 },
    Tabulated { times: Vec<f64>, lags: Vec<f64> },
}

impl DelayConfig {
    pub fn resolve(&self, a: f64, b: f64) -> sdde::Result<DelaySpec> {
        match self {
            DelayConfig::Constant { tau } => DelaySpec::constant(*tau),
            DelayConfig::Pantograph { q } => DelaySpec::pantograph(*q, a),
            DelayConfig::PiecewiseConstant { shift } => DelaySpec::piecewise_constant(*shift, a),
            DelayConfig::Tabulated { times, lags } => {
                DelaySpec::tabulated(times.clone(), lags.clone(), a, b)
            }
        }
    }
}

/// Scalar initial-segment shape from the `pair` section.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentConfig {
    Constant(f64),
    Poly(Vec<f64>),
    Sin {
        amplitude: f64,
        omega: f64,
        phase: f64,
        offset: f64,
    },
}

impl SegmentConfig {
    pub fn resolve(&self, lo: f64, hi: f64) -> sdde::Result<InitialSegment> {
        let shape = match self {
            SegmentConfig::Constant(v) => SegmentShape::Constant(StateVector::scalar(*v)),
            SegmentConfig::Poly(coeffs) => {
                SegmentShape::Polynomial(coeffs.iter().map(|&c| StateVector::scalar(c)).collect())
            }
            SegmentConfig::Sin {
                amplitude,
                omega,
                phase,
                offset,
            } => SegmentShape::Sinusoid {
                amplitude: StateVector::scalar(*amplitude),
                omega: *omega,
                phase: *phase,
                offset: StateVector::scalar(*offset),
            },
        };
        InitialSegment::new(lo, hi, shape)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem_name: String,
    pub problem_params: BTreeMap<String, f64>,
    pub delays: Vec<DelayConfig>,
    pub grid_a: f64,
    pub grid_b: f64,
    pub grid_n: usize,
    pub paths: usize,
    pub seed: u64,
    pub xi: SegmentConfig,
    pub eta: SegmentConfig,
    pub c0: f64,
    pub mu: f64,
    pub slack: f64,
    pub out_dir: PathBuf,
    pub order_exp_min: u32,
    pub order_exp_max: u32,
}

impl ExperimentConfig {
    pub fn h(&self) -> f64 {
        (self.grid_b - self.grid_a) / self.grid_n as f64
    }
}

const SECTIONS: &[&str] = &[
    "problem", "delay", "grid", "mc", "pair", "analysis", "output", "order",
];

const FIXED_KEYS: &[&str] = &[
    "delay.kind",
    "delay.tau",
    "delay.q",
    "delay.i",
    "delay.times",
    "delay.lags",
    "delay.kind2",
    "delay.tau2",
    "delay.q2",
    "delay.i2",
    "delay.times2",
    "delay.lags2",
    "grid.a",
    "grid.b",
    "grid.N",
    "mc.paths",
    "mc.seed",
    "pair.xi",
    "pair.eta",
    "analysis.c0",
    "analysis.mu",
    "analysis.slack",
    "output.dir",
    "order.exp_min",
    "order.exp_max",
];

const REQUIRED_KEYS: &[&str] = &["problem.name", "grid.a", "grid.b", "grid.N", "mc.paths", "mc.seed"];

struct RawEntry {
    line: usize,
    value: String,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        errors: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut errors: Vec<String> = Vec::new();
    let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key_part, value_part)) = line.split_once('=') else {
            errors.push(format!("line {line_no}: expected `section.key = value`"));
            continue;
        };
        let key = key_part.trim().to_string();
        let value = value_part.trim().to_string();
        let Some((section, _rest)) = key.split_once('.') else {
            errors.push(format!(
                "line {line_no}: key `{key}` must be of the form section.key"
            ));
            continue;
        };
        if !SECTIONS.contains(&section) {
            errors.push(format!("line {line_no}: unknown section `{section}` in `{key}`"));
            continue;
        }
        let known = key == "problem.name"
            || FIXED_KEYS.contains(&key.as_str())
            || key.starts_with("problem.");
        if !known {
            errors.push(format!("line {line_no}: unknown key `{key}`"));
            continue;
        }
        if let Some(first) = entries.get(&key) {
            errors.push(format!(
                "line {line_no}: duplicate key `{key}` (first defined on line {})",
                first.line
            ));
            continue;
        }
        entries.insert(key, RawEntry { line: line_no, value });
    }

    // required keys, reported exhaustively
    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .filter(|k| !entries.contains_key(**k))
        .copied()
        .collect();
    if !missing.is_empty() {
        errors.push(format!("missing required keys: {}", missing.join(", ")));
    }

    let get = |key: &str| entries.get(key).map(|e| (e.line, e.value.clone()));

    let parse_f64 = |key: &str, errs: &mut Vec<String>| -> Option<f64> {
        let (line, value) = get(key)?;
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                errs.push(format!("line {line}: {key} must be a finite number, got `{value}`"));
                None
            }
        }
    };

    let grid_a = parse_f64("grid.a", &mut errors);
    let grid_b = parse_f64("grid.b", &mut errors);
    let grid_n = entries.get("grid.N").and_then(|e| {
        match e.value.parse::<i64>() {
            Ok(v) if v > 0 => Some(v as usize),
            _ => {
                errors.push(format!("line {}: grid.N must be a positive integer", e.line));
                None
            }
        }
    });
    let paths = entries.get("mc.paths").and_then(|e| {
        match e.value.parse::<i64>() {
            Ok(v) if v > 0 => Some(v as usize),
            _ => {
                errors.push(format!("line {}: mc.paths must be a positive integer", e.line));
                None
            }
        }
    });
    let seed = entries.get("mc.seed").and_then(|e| {
        match e.value.parse::<u64>() {
            Ok(v) => Some(v),
            _ => {
                errors.push(format!(
                    "line {}: mc.seed must be a nonnegative integer",
                    e.line
                ));
                None
            }
        }
    });

    if let (Some(a), Some(b)) = (grid_a, grid_b) {
        if b <= a {
            errors.push(format!("grid window [{a}, {b}] must satisfy a < b"));
        }
    }

    // problem name and family parameters
    let problem_name = entries
        .get("problem.name")
        .map(|e| e.value.clone())
        .unwrap_or_default();
    let mut problem_params: BTreeMap<String, f64> = BTreeMap::new();
    if !problem_name.is_empty() {
        match registry::family_params(&problem_name) {
            None => errors.push(format!(
                "problem.name `{problem_name}` is not a registered family (known: {})",
                registry::family_names().join(", ")
            )),
            Some(allowed) => {
                for (key, entry) in &entries {
                    let Some(param) = key.strip_prefix("problem.") else {
                        continue;
                    };
                    if param == "name" {
                        continue;
                    }
                    if !allowed.contains(&param) {
                        errors.push(format!(
                            "line {}: `{key}` is not a parameter of family `{problem_name}` \
                             (accepted: {})",
                            entry.line,
                            allowed.join(", ")
                        ));
                        continue;
                    }
                    match entry.value.parse::<f64>() {
                        Ok(v) if v.is_finite() => {
                            problem_params.insert(param.to_string(), v);
                        }
                        _ => errors.push(format!(
                            "line {}: {key} must be a finite number, got `{}`",
                            entry.line, entry.value
                        )),
                    }
                }
            }
        }
    }

    // delays
    let mut delays = Vec::new();
    for suffix in ["", "2"] {
        let kind_key = format!("delay.kind{suffix}");
        let kind = entries.get(kind_key.as_str()).map(|e| e.value.clone());
        let kind = match (suffix, kind) {
            ("", None) => Some("constant".to_string()), // default delay
            (_, k) => k,
        };
        let Some(kind) = kind else { continue };
        let num = |key: &str, default: Option<f64>, errs: &mut Vec<String>| -> Option<f64> {
            match entries.get(key) {
                Some(e) => match e.value.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        errs.push(format!(
                            "line {}: {key} must be a finite number, got `{}`",
                            e.line, e.value
                        ));
                        None
                    }
                },
                None => default,
            }
        };
        let list = |key: &str, errs: &mut Vec<String>| -> Option<Vec<f64>> {
            let e = entries.get(key)?;
            let mut out = Vec::new();
            for piece in e.value.split(',') {
                match piece.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push(v),
                    _ => {
                        errs.push(format!(
                            "line {}: {key} must be a comma-separated list of numbers",
                            e.line
                        ));
                        return None;
                    }
                }
            }
            Some(out)
        };
        match kind.as_str() {
            "constant" => {
                if let Some(tau) = num(&format!("delay.tau{suffix}"), Some(1.0), &mut errors) {
                    if tau < 0.0 {
                        errors.push(format!("delay.tau{suffix} must be >= 0, got {tau}"));
                    } else {
                        delays.push(DelayConfig::Constant { tau });
                    }
                }
            }
            "pantograph" => {
                if let Some(q) = num(&format!("delay.q{suffix}"), None, &mut errors) {
                    if !(0.0 < q && q < 1.0) {
                        errors.push(format!("delay.q{suffix} must lie in (0, 1), got {q}"));
                    } else {
                        delays.push(DelayConfig::Pantograph { q });
                    }
                } else {
                    errors.push(format!(
                        "delay.kind{suffix} = pantograph requires delay.q{suffix}"
                    ));
                }
            }
            "piecewise_constant" => {
                let shift = num(&format!("delay.i{suffix}"), Some(0.0), &mut errors);
                if let Some(i) = shift {
                    if i < 0.0 || i.fract() != 0.0 {
                        errors.push(format!(
                            "delay.i{suffix} must be a nonnegative integer, got {i}"
                        ));
                    } else {
                        delays.push(DelayConfig::PiecewiseConstant { shift: i as u32 });
                    }
                }
            }
            "tabulated" => {
                let times = list(&format!("delay.times{suffix}"), &mut errors);
                let lags = list(&format!("delay.lags{suffix}"), &mut errors);
                match (times, lags) {
                    (Some(times), Some(lags)) => delays.push(DelayConfig::Tabulated { times, lags }),
                    _ => errors.push(format!(
                        "delay.kind{suffix} = tabulated requires delay.times{suffix} and delay.lags{suffix}"
                    )),
                }
            }
            other => errors.push(format!(
                "delay.kind{suffix} `{other}` is not one of constant, pantograph, \
                 piecewise_constant, tabulated"
            )),
        }
    }

    // pair segments
    let parse_segment = |key: &str, default: SegmentConfig, errs: &mut Vec<String>| -> SegmentConfig {
        match entries.get(key) {
            None => default,
            Some(e) => match parse_segment_value(&e.value) {
                Ok(seg) => seg,
                Err(msg) => {
                    errs.push(format!("line {}: {key}: {msg}", e.line));
                    default
                }
            },
        }
    };
    let xi = parse_segment("pair.xi", SegmentConfig::Constant(1.0), &mut errors);
    let eta = parse_segment("pair.eta", SegmentConfig::Constant(0.5), &mut errors);

    // analysis knobs
    let c0 = parse_f64("analysis.c0", &mut errors).unwrap_or(0.5);
    let mu = parse_f64("analysis.mu", &mut errors).unwrap_or(1.0);
    let slack = parse_f64("analysis.slack", &mut errors).unwrap_or(3.0);
    if !(0.0 < c0 && c0 < 1.0) {
        errors.push(format!("analysis.c0 must lie in (0, 1), got {c0}"));
    }
    if mu <= 0.0 {
        errors.push(format!("analysis.mu must be positive, got {mu}"));
    }
    if slack < 0.0 {
        errors.push(format!("analysis.slack must be >= 0, got {slack}"));
    }

    let out_dir = entries
        .get("output.dir")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("out"));

    let parse_exp = |key: &str, default: u32, errs: &mut Vec<String>| -> u32 {
        match entries.get(key) {
            None => default,
            Some(e) => match e.value.parse::<u32>() {
                Ok(v) => v,
                _ => {
                    errs.push(format!(
                        "line {}: {key} must be a nonnegative integer",
                        e.line
                    ));
                    default
                }
            },
        }
    };
    let order_exp_min = parse_exp("order.exp_min", 4, &mut errors);
    let order_exp_max = parse_exp("order.exp_max", 9, &mut errors);
    if order_exp_min >= order_exp_max {
        errors.push(format!(
            "order.exp_min = {order_exp_min} must be smaller than order.exp_max = {order_exp_max}"
        ));
    }

    if !errors.is_empty() {
        return Err(ConfigError { errors });
    }

    Ok(ExperimentConfig {
        problem_name,
        problem_params,
        delays,
        grid_a: grid_a.expect("validated"),
        grid_b: grid_b.expect("validated"),
        grid_n: grid_n.expect("validated"),
        paths: paths.expect("validated"),
        seed: seed.expect("validated"),
        xi,
        eta,
        c0,
        mu,
        slack,
        out_dir,
        order_exp_min,
        order_exp_max,
    })
}

/// `constant(v)`, `poly(c0,c1,...)` or `sin(amplitude,omega,phase,offset)`.
fn parse_segment_value(value: &str) -> Result<SegmentConfig, String> {
    let value = value.trim();
    let open = value
        .find('(')
        .ok_or_else(|| "expected `family(args)`".to_string())?;
    if !value.ends_with(')') {
        return Err("expected `family(args)`".to_string());
    }
    let family = &value[..open];
    let args: Vec<f64> = value[open + 1..value.len() - 1]
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| "arguments must be numbers".to_string())?;
    if args.iter().any(|v| !v.is_finite()) {
        return Err("arguments must be finite".to_string());
    }
    match family {
        "constant" => {
            if args.len() != 1 {
                return Err("constant takes exactly one argument".to_string());
            }
            Ok(SegmentConfig::Constant(args[0]))
        }
        "poly" => {
            if args.is_empty() {
                return Err("poly needs at least one coefficient".to_string());
            }
            Ok(SegmentConfig::Poly(args))
        }
        "sin" => {
            if args.len() != 4 {
                return Err("sin takes (amplitude, omega, phase, offset)".to_string());
            }
            Ok(SegmentConfig::Sin {
                amplitude: args[0],
                omega: args[1],
                phase: args[2],
                offset: args[3],
            })
        }
        other => Err(format!("unknown segment family `{other}`")),
    }
}

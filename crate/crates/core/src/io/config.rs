//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::sweep::{Axis, AxisName, Output, SweepSpec};
use crate::topology::{DEFAULT_CONTINUITY, DEFAULT_WINDOW_SCALE};

const REQUIRED: [&str; 3] = ["kappa", "gamma", "Omega_z"];

/// Grids and job settings that sit next to the physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_count: usize,
    /// Momentum for single-k jobs.
    pub k: f64,
    /// Frequency for single-ω jobs.
    pub omega: f64,
    pub axis1: Option<Axis>,
    pub axis2: Option<Axis>,
    pub outputs: Vec<Output>,
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
    pub p_log: bool,
    pub k_points: Vec<f64>,
    pub window_scale: f64,
    pub window_center: f64,
    pub continuity: f64,
    pub ep_tolerance: f64,
    pub stability_tol: f64,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            k_min: -3.0,
            k_max: 3.0,
            k_count: 64,
            omega_min: -3.0,
            omega_max: 3.0,
            omega_count: 256,
            k: 0.0,
            omega: 1.0,
            axis1: None,
            axis2: None,
            outputs: vec![Output::Psd],
            p_min: 0.01,
            p_max: 10.0,
            p_count: 16,
            p_log: true,
            k_points: vec![0.0],
            window_scale: DEFAULT_WINDOW_SCALE,
            window_center: 0.0,
            continuity: DEFAULT_CONTINUITY,
            ep_tolerance: 1e-3,
            stability_tol: 1e-9,
        }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub params: PhysicalParams,
    pub job: JobConfig,
}

impl ConfigDocument {
    pub fn k_grid(&self) -> Result<Vec<f64>> {
        crate::sweep::make_grid(self.job.k_min, self.job.k_max, self.job.k_count)
    }

    pub fn omega_grid(&self) -> Result<Vec<f64>> {
        crate::sweep::make_grid(self.job.omega_min, self.job.omega_max, self.job.omega_count)
    }

    pub fn power_grid(&self) -> Result<Vec<f64>> {
        let j = &self.job;
        if j.p_log {
            crate::sweep::make_log_grid(j.p_min, j.p_max, j.p_count)
        } else {
            crate::sweep::make_grid(j.p_min, j.p_max, j.p_count)
        }
    }

    /// Sweep over the configured axes, defaulting to the (k, ω) map grid.
    pub fn sweep_spec(&self) -> SweepSpec {
        let j = &self.job;
        let axis1 = j.axis1.unwrap_or(Axis::new(AxisName::Momentum, j.k_min, j.k_max, j.k_count));
        let axis2 = j.axis2.or_else(|| {
            j.axis1
                .is_none()
                .then(|| Axis::new(AxisName::Frequency, j.omega_min, j.omega_max, j.omega_count))
        });
        let mut spec = SweepSpec::new(self.params, axis1, axis2, &j.outputs);
        spec.k = j.k;
        spec.omega = j.omega;
        spec
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, reason: format!("`{key}` expects a number, got `{value}`") })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Parse { line, reason: format!("`{key}` expects a count, got `{value}`") })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse { line, reason: format!("`{key}` expects true or false, got `{value}`") }),
    }
}

fn parse_list<T>(line: usize, key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).ok_or_else(|| Error::Parse { line, reason: format!("bad entry `{s}` in `{key}`") }))
        .collect()
}

/// `name min max count [log]`
fn parse_axis(line: usize, key: &str, value: &str) -> Result<Axis> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let bad = || Error::Parse { line, reason: format!("`{key}` expects `name min max count [log]`") };
    if !(parts.len() == 4 || (parts.len() == 5 && parts[4] == "log")) {
        return Err(bad());
    }
    let name: AxisName = parts[0].parse().map_err(|reason| Error::Parse { line, reason })?;
    Ok(Axis {
        name,
        min: parse_f64(line, key, parts[1])?,
        max: parse_f64(line, key, parts[2])?,
        count: parse_usize(line, key, parts[3])?,
        log: parts.len() == 5,
    })
}

/// Parses a configuration document. Errors carry 1-based line numbers.
pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut params = PhysicalParams::default();
    let mut job = JobConfig::default();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Parse { line, reason: "expected `key = value`".into() })?;
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse { line, reason: "expected `key = value`".into() });
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(Error::Parse { line, reason: format!("`{key}` already set on line {first}") });
        }

        if let Some(slot) = params.field_mut(key) {
            *slot = parse_f64(line, key, value)?;
            continue;
        }
        match key {
            "k_min" => job.k_min = parse_f64(line, key, value)?,
            "k_max" => job.k_max = parse_f64(line, key, value)?,
            "k_count" => job.k_count = parse_usize(line, key, value)?,
            "omega_min" => job.omega_min = parse_f64(line, key, value)?,
            "omega_max" => job.omega_max = parse_f64(line, key, value)?,
            "omega_count" => job.omega_count = parse_usize(line, key, value)?,
            "k" => job.k = parse_f64(line, key, value)?,
            "omega" => job.omega = parse_f64(line, key, value)?,
            "axis1" => job.axis1 = Some(parse_axis(line, key, value)?),
            "axis2" => job.axis2 = Some(parse_axis(line, key, value)?),
            "outputs" => job.outputs = parse_list(line, key, value, |s| s.parse().ok())?,
            "P_min" => job.p_min = parse_f64(line, key, value)?,
            "P_max" => job.p_max = parse_f64(line, key, value)?,
            "P_count" => job.p_count = parse_usize(line, key, value)?,
            "P_log" => job.p_log = parse_bool(line, key, value)?,
            "k_points" => job.k_points = parse_list(line, key, value, |s| s.parse().ok())?,
            "window_scale" => job.window_scale = parse_f64(line, key, value)?,
            "window_center" => job.window_center = parse_f64(line, key, value)?,
            "continuity" => job.continuity = parse_f64(line, key, value)?,
            "ep_tolerance" => job.ep_tolerance = parse_f64(line, key, value)?,
            "stability_tol" => job.stability_tol = parse_f64(line, key, value)?,
            _ => return Err(Error::UnknownKey { line, key: key.to_string() }),
        }
    }

    for key in REQUIRED {
        if !seen.contains_key(key) {
            return Err(Error::MissingRequired { key: key.to_string() });
        }
    }
    if !seen.contains_key("kappa_ext") {
        params.kappa_ext = params.kappa;
    }
    if let Err(errs) = params.validate() {
        let line = errs.iter().filter_map(|e| seen.get(e.field).copied()).min().unwrap_or(0);
        let reason = errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Error::Parse { line, reason });
    }
    Ok(ConfigDocument { params, job })
}

fn axis_text(a: &Axis) -> String {
    let log = if a.log { " log" } else { "" };
    format!("{} {} {} {}{log}", a.name, a.min, a.max, a.count)
}

/// Canonical text form: every key, fixed order, shortest round-trip numbers.
pub fn serialize_config(doc: &ConfigDocument) -> String {
    let mut s = String::new();
    for (key, value) in doc.params.fields() {
        let _ = writeln!(s, "{key} = {value}");
    }
    let j = &doc.job;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let _ = writeln!(s, "k_min = {}", j.k_min);
    let _ = writeln!(s, "k_max = {}", j.k_max);
    let _ = writeln!(s, "k_count = {}", j.k_count);
    let _ = writeln!(s, "omega_min = {}", j.omega_min);
    let _ = writeln!(s, "omega_max = {}", j.omega_max);
    let _ = writeln!(s, "omega_count = {}", j.omega_count);
    let _ = writeln!(s, "k = {}", j.k);
    let _ = writeln!(s, "omega = {}", j.omega);
    if let Some(a) = &j.axis1 {
        let _ = writeln!(s, "axis1 = {}", axis_text(a));
    }
    if let Some(a) = &j.axis2 {
        let _ = writeln!(s, "axis2 = {}", axis_text(a));
    }
    let outs: Vec<&str> = j.outputs.iter().map(|o| o.as_str()).collect();
    let _ = writeln!(s, "outputs = {}", outs.join(","));
    let _ = writeln!(s, "P_min = {}", j.p_min);
    let _ = writeln!(s, "P_max = {}", j.p_max);
    let _ = writeln!(s, "P_count = {}", j.p_count);
    let _ = writeln!(s, "P_log = {}", j.p_log);
    let _ = writeln!(s, "k_points = {}", join(&j.k_points));
    let _ = writeln!(s, "window_scale = {}", j.window_scale);
    let _ = writeln!(s, "window_center = {}", j.window_center);
    let _ = writeln!(s, "continuity = {}", j.continuity);
    let _ = writeln!(s, "ep_tolerance = {}", j.ep_tolerance);
    let _ = writeln!(s, "stability_tol = {}", j.stability_tol);
    s
}

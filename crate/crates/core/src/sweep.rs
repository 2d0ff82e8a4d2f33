//! Declarative parameter sweeps evaluated on a worker pool.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::{DriftMatrix, DEFAULT_STABILITY_TOL};
use crate::error::{Error, Result};
use crate::params::{derive, PhysicalParams};
use crate::spectra::{Flag, KernelInputs};
use crate::topology::marker_value;

/// Uniform inclusive grid.
pub fn make_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::BadGrid("count must be at least 1".into()));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::BadGrid(format!("need finite min <= max, got [{min}, {max}]")));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let span = max - min;
    let last = (count - 1) as f64;
    let mut g: Vec<f64> = (0..count).map(|i| min + span * (i as f64 / last)).collect();
    g[count - 1] = max;
    Ok(g)
}

/// Logarithmically spaced inclusive grid over a positive range.
pub fn make_log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if min <= 0.0 {
        return Err(Error::BadGrid("log grid needs min > 0".into()));
    }
    let mut g: Vec<f64> = make_grid(min.ln(), max.ln(), count)?.into_iter().map(f64::exp).collect();
    g[0] = min;
    if count > 1 {
        g[count - 1] = max;
    }
    Ok(g)
}

/// Quantities a sweep axis may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "k")]
    Momentum,
    #[serde(rename = "omega")]
    Frequency,
    #[serde(rename = "P")]
    Power,
    #[serde(rename = "delta")]
    RamanDetuning,
    #[serde(rename = "Omega_z")]
    Raman,
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "alpha_tilde")]
    Soc,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "kappa")]
    Kappa,
}

impl AxisName {
    pub const ALL: [AxisName; 9] = [
        AxisName::Momentum,
        AxisName::Frequency,
        AxisName::Power,
        AxisName::RamanDetuning,
        AxisName::Raman,
        AxisName::Epsilon,
        AxisName::Soc,
        AxisName::Gamma,
        AxisName::Kappa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Momentum => "k",
            AxisName::Frequency => "omega",
            AxisName::Power => "P",
            AxisName::RamanDetuning => "delta",
            AxisName::Raman => "Omega_z",
            AxisName::Epsilon => "epsilon",
            AxisName::Soc => "alpha_tilde",
            AxisName::Gamma => "gamma",
            AxisName::Kappa => "kappa",
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        AxisName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown axis `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Axis {
    pub fn new(name: AxisName, min: f64, max: f64, count: usize) -> Self {
        Self { name, min, max, count, log: false }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.log {
            make_log_grid(self.min, self.max, self.count)
        } else {
            make_grid(self.min, self.max, self.count)
        }
    }
}

/// What to compute at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Psd,
    Chern,
    Berry,
    Eigen,
    Stability,
}

impl Output {
    pub fn as_str(self) -> &'static str {
        match self {
            Output::Psd => "psd",
            Output::Chern => "chern",
            Output::Berry => "berry",
            Output::Eigen => "eigen",
            Output::Stability => "stability",
        }
    }

    fn columns(self) -> Vec<String> {
        match self {
            Output::Psd => vec!["S_up".into(), "S_dn".into(), "S_out".into()],
            Output::Chern => vec!["C".into()],
            Output::Berry => vec!["Omega_B".into()],
            Output::Eigen => (0..6)
                .flat_map(|i| [format!("re_lambda_{i}"), format!("im_lambda_{i}")])
                .collect(),
            Output::Stability => vec!["rh_stable".into(), "eigen_stable".into(), "max_re_lambda".into()],
        }
    }
}

impl FromStr for Output {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "psd" => Output::Psd,
            "chern" => Output::Chern,
            "berry" => Output::Berry,
            "eigen" => Output::Eigen,
            "stability" => Output::Stability,
            _ => return Err(format!("unknown output `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: PhysicalParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub outputs: BTreeSet<Output>,
    /// Momentum used when `k` is not an axis.
    pub k: f64,
    /// Frequency used when `omega` is not an axis.
    pub omega: f64,
}

impl SweepSpec {
    pub fn new(base: PhysicalParams, axis1: Axis, axis2: Option<Axis>, outputs: &[Output]) -> Self {
        Self { base, axis1, axis2, outputs: outputs.iter().copied().collect(), k: 0.0, omega: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let axes: Vec<&Axis> = std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect();
        for a in &axes {
            if a.count == 0 {
                return Err(Error::SpecInvalid(format!("axis {} has count 0", a.name)));
            }
            if !(a.min <= a.max) {
                return Err(Error::SpecInvalid(format!("axis {} has min > max", a.name)));
            }
        }
        if let Some(b) = &self.axis2 {
            if b.name == self.axis1.name {
                return Err(Error::SpecInvalid(format!("axis {} used twice", b.name)));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::SpecInvalid("no outputs requested".into()));
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<String> {
        self.outputs.iter().flat_map(|o| o.columns()).collect()
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub index: (usize, usize),
    pub axis_values: (f64, Option<f64>),
    /// Aligned with [`ResultSet::columns`]; NaN where unavailable.
    pub values: Vec<f64>,
    pub flag: Flag,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub timestamp: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub records: Vec<Record>,
    pub provenance: Provenance,
}

impl ResultSet {
    /// Records compared without provenance.
    pub fn same_data(&self, other: &ResultSet) -> bool {
        self.spec == other.spec
            && self.columns == other.columns
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.index == b.index
                    && a.flag == b.flag
                    && a.reason == b.reason
                    && a.values.iter().map(|v| v.to_bits()).eq(b.values.iter().map(|v| v.to_bits()))
            })
    }
}

fn apply(params: &mut PhysicalParams, k: &mut f64, omega: &mut f64, axis: AxisName, value: f64) {
    match axis {
        AxisName::Momentum => *k = value,
        AxisName::Frequency => *omega = value,
        AxisName::Power => params.power = value,
        AxisName::RamanDetuning => params.raman_detuning = value,
        AxisName::Raman => params.omega_z = value,
        AxisName::Epsilon => params.epsilon = value,
        AxisName::Soc => params.soc_strength = value,
        AxisName::Gamma => params.gamma = value,
        AxisName::Kappa => {
            params.kappa = value;
            params.kappa_ext = params.kappa_ext.min(value);
        }
    }
}

fn evaluate(spec: &SweepSpec, v1: f64, v2: Option<f64>, width: usize) -> (Vec<f64>, Flag, Option<String>) {
    let mut params = spec.base;
    let (mut k, mut omega) = (spec.k, spec.omega);
    apply(&mut params, &mut k, &mut omega, spec.axis1.name, v1);
    if let (Some(a), Some(v)) = (&spec.axis2, v2) {
        apply(&mut params, &mut k, &mut omega, a.name, v);
    }
    let mut values = Vec::with_capacity(width);
    if let Err(errs) = params.validate() {
        let reason = errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        return (vec![f64::NAN; width], Flag::Failed, Some(reason));
    }
    let derived = derive(&params);
    let mut flag = Flag::Ok;
    let mut reason = None;
    let mut note = |f: Flag, r: String, flag: &mut Flag| {
        if flag.is_ok() {
            *flag = f;
            reason = Some(r);
        }
    };

    let point = KernelInputs::at(&derived, &params, k).point(k, omega);
    let marker = if point.flag.is_ok() {
        marker_value(point.s_out, omega, &params, derived.delta)
    } else {
        (f64::NAN, point.flag)
    };
    let drift = DriftMatrix::build(&derived, &params, k);

    for out in &spec.outputs {
        match out {
            Output::Psd => {
                if !point.flag.is_ok() {
                    note(point.flag, "singular spectral point".into(), &mut flag);
                }
                values.extend([point.s_up, point.s_dn, point.s_out]);
            }
            Output::Chern | Output::Berry => {
                if !marker.1.is_ok() {
                    note(marker.1, "marker undefined at this point".into(), &mut flag);
                }
                let scale = if *out == Output::Berry { 2.0 * std::f64::consts::PI } else { 1.0 };
                values.push(scale * marker.0);
            }
            Output::Eigen => match drift.eigen_spectrum() {
                Ok(eig) => values.extend(eig.iter().flat_map(|z| [z.re, z.im])),
                Err(e) => {
                    note(Flag::Failed, e.to_string(), &mut flag);
                    values.extend([f64::NAN; 12]);
                }
            },
            Output::Stability => match drift.stability_report(DEFAULT_STABILITY_TOL) {
                Ok(r) => values.extend([
                    r.rh_stable as u8 as f64,
                    r.eigen_stable as u8 as f64,
                    r.max_real_part,
                ]),
                Err(e) => {
                    note(Flag::Failed, e.to_string(), &mut flag);
                    values.extend([f64::NAN; 3]);
                }
            },
        }
    }
    (values, flag, reason)
}

/// Evaluates every grid point of `spec` on `workers` threads.
///
/// Records are row-major in (axis1, axis2) whatever the thread count, and a
/// failing point is recorded with a flag instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<ResultSet> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::SpecInvalid("workers must be at least 1".into()));
    }
    let g1 = spec.axis1.values().map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let g2: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values().map_err(|e| Error::SpecInvalid(e.to_string()))?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let columns = spec.columns();
    let width = columns.len();
    let tasks: Vec<(usize, usize)> = (0..g1.len()).flat_map(|i| (0..g2.len()).map(move |j| (i, j))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let records: Vec<Record> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, j)| {
                let (values, flag, reason) = evaluate(spec, g1[i], g2[j], width);
                Record { index: (i, j), axis_values: (g1[i], g2[j]), values, flag, reason }
            })
            .collect()
    });

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(ResultSet {
        spec: spec.clone(),
        columns,
        records,
        provenance: Provenance { version: env!("CARGO_PKG_VERSION").into(), timestamp, threads: workers },
    })
}

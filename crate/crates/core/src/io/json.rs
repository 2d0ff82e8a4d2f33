//! JSON output as a single `{meta, grids, arrays}` object.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::drift::ep::EpCandidate;
use crate::drift::StabilityReport;
use crate::error::Result;
use crate::spectra::SpectralMap;
use crate::sweep::ResultSet;
use crate::topology::{BerryMap, ChernMarkerMap, PowerCurve};
use crate::C64;

/// A number, a 17-significant-digit string in exact mode, or null.
pub fn number(x: f64, exact: bool) -> Value {
    if !x.is_finite() {
        Value::Null
    } else if exact {
        Value::String(format!("{x:.16e}"))
    } else {
        json!(x)
    }
}

fn numbers(xs: &[f64], exact: bool) -> Value {
    Value::Array(xs.iter().map(|&x| number(x, exact)).collect())
}

/// Assembles the output document. Arrays are row-major over the grids.
#[derive(Debug, Clone, Default)]
pub struct JsonDocument {
    meta: Map<String, Value>,
    grids: Map<String, Value>,
    arrays: Map<String, Value>,
}

impl JsonDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.meta.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn grid(mut self, name: &str, values: &[f64], exact: bool) -> Self {
        self.grids.insert(name.into(), numbers(values, exact));
        self
    }

    pub fn array(mut self, name: &str, values: &[f64], exact: bool) -> Self {
        self.arrays.insert(name.into(), numbers(values, exact));
        self
    }

    pub fn labels(mut self, name: &str, values: impl IntoIterator<Item = String>) -> Self {
        self.arrays.insert(name.into(), Value::Array(values.into_iter().map(Value::String).collect()));
        self
    }

    pub fn into_value(self) -> Value {
        json!({ "meta": self.meta, "grids": self.grids, "arrays": self.arrays })
    }

    pub fn write(self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.into_value())?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub fn spectral_json(map: &SpectralMap, marker: Option<&ChernMarkerMap>, exact: bool) -> JsonDocument {
    let col = |f: fn(&crate::spectra::SpectralPoint) -> f64| map.values.iter().map(f).collect::<Vec<_>>();
    let mut doc = JsonDocument::new()
        .meta("params", map.meta.params)
        .meta("derived", map.meta.derived)
        .meta("singular_count", map.singular_count)
        .meta("negative_count", map.negative_count)
        .grid("k", &map.k_grid, exact)
        .grid("omega", &map.omega_grid, exact)
        .array("S_up", &col(|p| p.s_up), exact)
        .array("S_dn", &col(|p| p.s_dn), exact)
        .array("S_out", &col(|p| p.s_out), exact)
        .array("Im_F_up", &col(|p| p.im_f_up), exact)
        .array("Im_F_dn", &col(|p| p.im_f_dn), exact);
    let flags: Vec<String> = match marker {
        Some(m) => map
            .values
            .iter()
            .zip(&m.flags)
            .map(|(p, f)| if f.is_ok() { p.flag } else { *f }.as_str().to_string())
            .collect(),
        None => map.values.iter().map(|p| p.flag.as_str().to_string()).collect(),
    };
    doc = doc.labels("flag", flags);
    if let Some(m) = marker {
        let berry: Vec<f64> = m.values.iter().map(|c| 2.0 * std::f64::consts::PI * c).collect();
        doc = doc.meta("calibration", m.calibration).array("C", &m.values, exact).array("Omega_B", &berry, exact);
    }
    doc
}

pub fn result_set_json(rs: &ResultSet, exact: bool) -> JsonDocument {
    let g1: Vec<f64> = rs.spec.axis1.values().unwrap_or_default();
    let mut doc = JsonDocument::new()
        .meta("spec", &rs.spec)
        .meta("provenance", &rs.provenance)
        .grid(rs.spec.axis1.name.as_str(), &g1, exact);
    if let Some(a) = &rs.spec.axis2 {
        doc = doc.grid(a.name.as_str(), &a.values().unwrap_or_default(), exact);
    }
    for (c, name) in rs.columns.iter().enumerate() {
        let col: Vec<f64> = rs.records.iter().map(|r| r.values[c]).collect();
        doc = doc.array(name, &col, exact);
    }
    doc.labels("flag", rs.records.iter().map(|r| r.flag.as_str().to_string()))
}

pub fn berry_json(berry: &BerryMap, marker: &ChernMarkerMap, exact: bool) -> JsonDocument {
    JsonDocument::new()
        .meta("calibration", marker.calibration)
        .meta("source", format!("{:?}", berry.source))
        .grid("k", &berry.grid_u, exact)
        .grid("omega", &berry.grid_v, exact)
        .array("Omega_B", &berry.values, exact)
        .labels("flag", marker.flags.iter().map(|f| f.as_str().to_string()))
}

/// Arrays `re_lambda_i`, `im_lambda_i` over the k grid.
pub fn eigen_json(ks: &[f64], spectra: &[Vec<C64>], exact: bool) -> JsonDocument {
    let mut doc = JsonDocument::new().grid("k", ks, exact);
    for i in 0..6 {
        let re: Vec<f64> = spectra.iter().map(|e| e.get(i).map_or(f64::NAN, |z| z.re)).collect();
        let im: Vec<f64> = spectra.iter().map(|e| e.get(i).map_or(f64::NAN, |z| z.im)).collect();
        doc = doc.array(&format!("re_lambda_{i}"), &re, exact).array(&format!("im_lambda_{i}"), &im, exact);
    }
    doc
}

pub fn stability_json(ks: &[f64], reports: &[std::result::Result<StabilityReport, String>], exact: bool) -> JsonDocument {
    let pick = |f: &dyn Fn(&StabilityReport) -> f64| -> Vec<f64> {
        reports.iter().map(|r| r.as_ref().map_or(f64::NAN, f)).collect()
    };
    let mut doc = JsonDocument::new().grid("k", ks, exact);
    for j in 1..=6 {
        doc = doc
            .array(&format!("a{j}"), &pick(&|r| r.coefficients.a[j]), exact)
            .array(&format!("hurwitz_{j}"), &pick(&|r| r.hurwitz_minors[j - 1]), exact);
    }
    doc.array("rh_stable", &pick(&|r| r.rh_stable as u8 as f64), exact)
        .array("eigen_stable", &pick(&|r| r.eigen_stable as u8 as f64), exact)
        .array("max_re_lambda", &pick(&|r| r.max_real_part), exact)
        .array("margin", &pick(&|r| r.margin), exact)
        .labels("flag", reports.iter().map(|r| if r.is_ok() { "OK" } else { "MARGINAL" }.to_string()))
}

pub fn ep_json(eps: &[EpCandidate], exact: bool) -> JsonDocument {
    let col = |f: fn(&EpCandidate) -> f64| eps.iter().map(f).collect::<Vec<_>>();
    JsonDocument::new()
        .meta("count", eps.len())
        .array("k_at", &col(|e| e.k_at), exact)
        .array("re_lambda_1", &col(|e| e.lambda_pair[0].re), exact)
        .array("im_lambda_1", &col(|e| e.lambda_pair[0].im), exact)
        .array("re_lambda_2", &col(|e| e.lambda_pair[1].re), exact)
        .array("im_lambda_2", &col(|e| e.lambda_pair[1].im), exact)
        .array("residual", &col(|e| e.residual), exact)
}

/// Arrays are row-major over (k, P).
pub fn power_json(curves: &[PowerCurve], exact: bool) -> JsonDocument {
    let ks: Vec<f64> = curves.iter().map(|c| c.k).collect();
    let ps: Vec<f64> = curves.first().map(|c| c.samples.iter().map(|s| s.power).collect()).unwrap_or_default();
    let flat = |f: fn(&crate::topology::PowerSample) -> f64| {
        curves.iter().flat_map(|c| c.samples.iter().map(f)).collect::<Vec<_>>()
    };
    JsonDocument::new()
        .grid("k", &ks, exact)
        .grid("P", &ps, exact)
        .array("C_peak", &flat(|s| s.marker_peak), exact)
        .array("omega_at_peak", &flat(|s| s.omega_at_peak), exact)
}

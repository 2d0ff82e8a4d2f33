//! Marker, curvature and ridge observables built on top of spectral maps.

mod plaquette;
mod ridge;

pub use plaquette::{plaquette_berry, Band, Lattice, GAP_FLOOR};
pub use ridge::{
    find_edge_ridge, estimate_gap_center, ridge_separation_gap, GapWindow, RidgePoint, RidgeTrace,
    DEFAULT_CONTINUITY, DEFAULT_WINDOW_SCALE,
};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{derive, PhysicalParams};
use crate::spectra::{cavity_response, response_is_singular, Flag, KernelInputs, SpectralMap};

/// Mean thermal energy of an oscillator at frequency ω and thermal ratio θ.
///
/// At θ = 0 this is |ω|/2; at ω = 0 with θ > 0 it is the classical limit θ.
pub fn thermal_energy(omega: f64, theta: f64) -> Result<f64> {
    if theta == 0.0 {
        if omega == 0.0 {
            return Err(Error::ZeroFrequency);
        }
        return Ok(0.5 * omega.abs());
    }
    if omega == 0.0 {
        return Ok(theta);
    }
    let x = omega / (2.0 * theta);
    Ok(0.5 * omega / x.tanh())
}

/// Ξ(ω) = 2·η_det·κ_ext / |R(ω)|², or `None` on the resonance singularity.
pub fn calibration_factor(omega: f64, params: &PhysicalParams, delta: f64) -> Option<f64> {
    let r = cavity_response(omega, params.kappa, delta);
    if response_is_singular(r, omega, params.kappa, delta) {
        return None;
    }
    Some(2.0 * params.eta_det * params.kappa_ext / r.norm_sqr())
}

/// C = 2π·S / (Ξ·E_T) at one frequency.
pub fn marker_value(s_out: f64, omega: f64, params: &PhysicalParams, delta: f64) -> (f64, Flag) {
    let Some(xi) = calibration_factor(omega, params, delta) else {
        return (f64::NAN, Flag::SingularR);
    };
    match thermal_energy(omega, params.theta) {
        Ok(e) => (2.0 * PI * s_out / (xi * e), Flag::Ok),
        Err(_) => (f64::NAN, Flag::ZeroFrequency),
    }
}

/// Detection settings the marker was extracted with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub eta_det: f64,
    pub kappa_ext: f64,
    pub theta: f64,
}

/// Marker values on the grids of the source map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernMarkerMap {
    pub k_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub flags: Vec<Flag>,
    pub calibration: Calibration,
}

impl ChernMarkerMap {
    pub fn at(&self, ik: usize, iw: usize) -> f64 {
        self.values[ik * self.omega_grid.len() + iw]
    }

    /// ∫ C dω over `window` per k, trapezoidal over usable samples.
    pub fn integrated_profile(&self, window: &GapWindow) -> Vec<f64> {
        let nw = self.omega_grid.len();
        (0..self.k_grid.len())
            .map(|ik| {
                let mut total = 0.0;
                let mut last: Option<(f64, f64)> = None;
                for iw in 0..nw {
                    let w = self.omega_grid[iw];
                    if !window.contains(w) {
                        continue;
                    }
                    let c = self.values[ik * nw + iw];
                    if !self.flags[ik * nw + iw].is_ok() || !c.is_finite() {
                        last = None;
                        continue;
                    }
                    if let Some((w0, c0)) = last {
                        total += 0.5 * (c + c0) * (w - w0);
                    }
                    last = Some((w, c));
                }
                total
            })
            .collect()
    }
}

/// Applies C = 2π·S_out/(Ξ·E_T) to every cell of `map`.
pub fn chern_marker_from_psd(map: &SpectralMap, params: &PhysicalParams) -> Result<ChernMarkerMap> {
    if map.values.is_empty() {
        return Err(Error::EmptyResult("spectral map has no points".into()));
    }
    let delta = params.effective_detuning();
    let (values, flags): (Vec<f64>, Vec<Flag>) = map
        .values
        .iter()
        .map(|p| {
            if !p.flag.is_ok() {
                return (f64::NAN, p.flag);
            }
            marker_value(p.s_out, p.omega, params, delta)
        })
        .unzip();
    Ok(ChernMarkerMap {
        k_grid: map.k_grid.clone(),
        omega_grid: map.omega_grid.clone(),
        values,
        flags,
        calibration: Calibration {
            eta_det: params.eta_det,
            kappa_ext: params.kappa_ext,
            theta: params.theta,
        },
    })
}

/// Where a Berry map came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerrySource {
    FromMarker,
    Plaquette,
}

/// Berry curvature on a grid. Plaquette maps also carry the summed flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryMap {
    pub grid_u: Vec<f64>,
    pub grid_v: Vec<f64>,
    pub values: Vec<f64>,
    pub source: BerrySource,
    pub total_flux: Option<f64>,
}

impl BerryMap {
    /// Total flux in units of 2π.
    pub fn chern_number(&self) -> Option<f64> {
        self.total_flux.map(|f| f / (2.0 * PI))
    }
}

/// Ω_B = 2π·C pointwise.
pub fn berry_from_marker(cm: &ChernMarkerMap) -> BerryMap {
    BerryMap {
        grid_u: cm.k_grid.clone(),
        grid_v: cm.omega_grid.clone(),
        values: cm.values.iter().map(|c| 2.0 * PI * c).collect(),
        source: BerrySource::FromMarker,
        total_flux: None,
    }
}

/// Peak marker at one momentum for one drive power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub power: f64,
    pub marker_peak: f64,
    pub omega_at_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub k: f64,
    pub samples: Vec<PowerSample>,
}

/// For every k, the marker maximized over `window` as a function of drive power.
pub fn power_activation_curve(
    params: &PhysicalParams,
    k_points: &[f64],
    power_grid: &[f64],
    omega_grid: &[f64],
    window: &GapWindow,
) -> Result<Vec<PowerCurve>> {
    if power_grid.windows(2).any(|w| w[1] <= w[0]) || power_grid.is_empty() {
        return Err(Error::BadGrid("power grid must be non-empty and increasing".into()));
    }
    let omegas: Vec<f64> = omega_grid.iter().copied().filter(|&w| window.contains(w)).collect();
    if omegas.is_empty() {
        return Err(Error::EmptyGapWindow { lo: window.lo, hi: window.hi });
    }
    let per_power: Vec<Vec<PowerSample>> = power_grid
        .par_iter()
        .map(|&power| {
            let p = PhysicalParams { power, ..*params };
            p.validate().map_err(Error::InvalidParams)?;
            let d = derive(&p);
            Ok(k_points
                .iter()
                .map(|&k| {
                    let inp = KernelInputs::at(&d, &p, k);
                    let mut best = PowerSample { power, marker_peak: f64::NAN, omega_at_peak: f64::NAN };
                    for &w in &omegas {
                        let pt = inp.point(k, w);
                        if !pt.flag.is_ok() {
                            continue;
                        }
                        let (c, flag) = marker_value(pt.s_out, w, &p, d.delta);
                        if flag.is_ok() && (best.marker_peak.is_nan() || c > best.marker_peak) {
                            best.marker_peak = c;
                            best.omega_at_peak = w;
                        }
                    }
                    best
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(k_points
        .iter()
        .enumerate()
        .map(|(i, &k)| PowerCurve { k, samples: per_power.iter().map(|row| row[i]).collect() })
        .collect())
}

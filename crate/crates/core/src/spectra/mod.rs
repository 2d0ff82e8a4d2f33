//! Closed-form frequency-domain response and power spectral densities.

mod map;

pub use map::{psd_map, psd_map_with_workers, MapMeta, SpectralMap};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::params::{DerivedParams, PhysicalParams};
use crate::C64;

/// Relative floor below which |R| counts as zero.
pub const R_FLOOR: f64 = 1e-12;
/// Relative cancellation floor for X at single points and over maps.
pub const X_FLOOR: f64 = 1e-12;

/// Per-point status carried into every output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flag {
    Ok,
    SingularR,
    SingularX,
    ZeroFrequency,
    Failed,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Ok => "OK",
            Flag::SingularR => "SINGULAR_R",
            Flag::SingularX => "SINGULAR_X",
            Flag::ZeroFrequency => "ZERO_FREQUENCY",
            Flag::Failed => "FAILED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "OK" => Flag::Ok,
            "SINGULAR_R" => Flag::SingularR,
            "SINGULAR_X" => Flag::SingularX,
            "ZERO_FREQUENCY" => Flag::ZeroFrequency,
            "FAILED" => Flag::Failed,
            _ => return None,
        })
    }

    pub fn is_ok(self) -> bool {
        self == Flag::Ok
    }
}

/// R(ω) = (κ + iω)² − Δ².
pub fn cavity_response(omega: f64, kappa: f64, delta: f64) -> C64 {
    let z = C64::new(kappa, omega);
    z * z - delta * delta
}

/// |R| is numerically zero relative to the size of its terms.
pub fn response_is_singular(r: C64, omega: f64, kappa: f64, delta: f64) -> bool {
    r.norm() <= R_FLOOR * (kappa * kappa + delta * delta + omega * omega)
}

/// Scalars feeding the kernels at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInputs {
    pub kappa: f64,
    pub delta: f64,
    pub coupling: f64,
    pub gamma: f64,
    /// M(k).
    pub damping: f64,
    /// α_eff(k) − δ/2.
    pub soc: f64,
    /// Ω_z², kept signed so the spin-exchange mirror can be expressed.
    pub raman_sq: f64,
}

impl KernelInputs {
    pub fn at(derived: &DerivedParams, params: &PhysicalParams, k: f64) -> Self {
        Self {
            kappa: params.kappa,
            delta: derived.delta,
            coupling: derived.coupling,
            gamma: params.gamma,
            damping: derived.damping(k),
            soc: derived.alpha_eff(k) - 0.5 * params.raman_detuning,
            raman_sq: params.omega_z * params.omega_z,
        }
    }

    /// Flips the sign of every spin-odd term, which exchanges the ↑ and ↓ kernels.
    pub fn mirrored(self) -> Self {
        Self { soc: -self.soc, raman_sq: -self.raman_sq, ..self }
    }

    pub fn susceptibility(&self) -> f64 {
        self.damping * self.damping + self.soc * self.soc
    }

    pub fn kernels(&self, omega: f64) -> ResponseKernels {
        let r = cavity_response(omega, self.kappa, self.delta);
        let d = -omega * omega * r;
        let ks = self.susceptibility();
        let g2 = self.coupling * self.coupling;

        let diag = 4.0 * self.damping * ks * r;
        let raman = self.raman_sq * r * d;
        let soc = 4.0 * self.soc * ks * r * d;
        let light = 8.0 * g2 * self.delta * ks * d;

        let y_up = diag + raman - light;
        let y_dn = diag - raman - light;
        let z_up = raman + soc + light;
        let z_dn = -raman - soc + light;
        let c_coef = 8.0 * g2 * (2.0 * self.kappa).sqrt() * ks * d;
        let noise = 8.0 * g2 * self.gamma.sqrt() * ks * d;
        let f_up = (z_up + y_dn) * noise;
        let f_dn = (z_dn + y_up) * noise;
        let x = y_up * y_dn + z_up * z_dn;

        ResponseKernels { r, d, ksusc: ks, y_up, y_dn, z_up, z_dn, c_coef, f_up, f_dn, x }
    }

    /// Atomic PSDs with the single-point cancellation floor on X.
    pub fn atomic_psd(&self, omega: f64) -> AtomicPsd {
        let kern = self.kernels(omega);
        if response_is_singular(kern.r, omega, self.kappa, self.delta) {
            return AtomicPsd::singular(Flag::SingularR);
        }
        let x_scale = (kern.y_up * kern.y_dn).norm() + (kern.z_up * kern.z_dn).norm();
        let x_singular = kern.x.norm() <= X_FLOOR * x_scale || kern.x.norm() == 0.0;
        kern.psd(omega, self.kappa, self.delta, x_singular)
    }

    /// Output PSD at one frequency, flags included.
    pub fn point(&self, k: f64, omega: f64) -> SpectralPoint {
        let atoms = self.atomic_psd(omega);
        self.assemble(k, omega, atoms)
    }

    pub(crate) fn assemble(&self, k: f64, omega: f64, atoms: AtomicPsd) -> SpectralPoint {
        let s_out = if atoms.flag.is_ok() {
            output_from_atomic(omega, self.kappa, self.delta, self.coupling, atoms.up, atoms.dn)
        } else {
            f64::NAN
        };
        SpectralPoint {
            k,
            omega,
            s_up: atoms.up,
            s_dn: atoms.dn,
            s_out,
            im_f_up: atoms.im_f_up,
            im_f_dn: atoms.im_f_dn,
            flag: atoms.flag,
        }
    }
}

/// The printed response kernels at one (ω, k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseKernels {
    pub r: C64,
    pub d: C64,
    /// Constant-in-ω susceptibility M(k)² + (α_eff − δ/2)².
    pub ksusc: f64,
    pub y_up: C64,
    pub y_dn: C64,
    pub z_up: C64,
    pub z_dn: C64,
    pub c_coef: C64,
    pub f_up: C64,
    pub f_dn: C64,
    pub x: C64,
}

impl ResponseKernels {
    /// Evaluates S↑,↓. `x_singular` comes from whichever floor the caller applies.
    pub fn psd(&self, omega: f64, kappa: f64, delta: f64, x_singular: bool) -> AtomicPsd {
        let c2 = self.c_coef.norm_sqr();
        let pre = delta * delta + kappa * kappa + omega * omega;
        let num_up =
            2.0 * PI * c2 * (self.z_up.norm_sqr() + self.y_dn.norm_sqr()) * pre + 2.0 * PI * self.f_up.re;
        let num_dn =
            2.0 * PI * c2 * (self.z_dn.norm_sqr() + self.y_up.norm_sqr()) * pre + 2.0 * PI * self.f_dn.re;
        if num_up == 0.0 && num_dn == 0.0 {
            // undriven: nothing reaches the atoms whatever X does
            return AtomicPsd { up: 0.0, dn: 0.0, im_f_up: 0.0, im_f_dn: 0.0, flag: Flag::Ok };
        }
        if x_singular {
            return AtomicPsd::singular(Flag::SingularX);
        }
        let x2 = self.x.norm_sqr();
        AtomicPsd {
            up: num_up / x2,
            dn: num_dn / x2,
            im_f_up: self.f_up.im,
            im_f_dn: self.f_dn.im,
            flag: Flag::Ok,
        }
    }
}

/// S↑, S↓ plus the discarded imaginary parts of the F-terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicPsd {
    pub up: f64,
    pub dn: f64,
    pub im_f_up: f64,
    pub im_f_dn: f64,
    pub flag: Flag,
}

impl AtomicPsd {
    fn singular(flag: Flag) -> Self {
        Self { up: f64::NAN, dn: f64::NAN, im_f_up: f64::NAN, im_f_dn: f64::NAN, flag }
    }
}

/// One evaluated (k, ω) cell. Values are NaN unless `flag` is [`Flag::Ok`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub k: f64,
    pub omega: f64,
    pub s_up: f64,
    pub s_dn: f64,
    pub s_out: f64,
    pub im_f_up: f64,
    pub im_f_dn: f64,
    pub flag: Flag,
}

/// Kernels at (ω, k) straight from the parameters.
pub fn response_kernels(omega: f64, derived: &DerivedParams, params: &PhysicalParams, k: f64) -> ResponseKernels {
    KernelInputs::at(derived, params, k).kernels(omega)
}

/// Atomic PSDs (S↑, S↓) at (ω, k).
pub fn atomic_psd(omega: f64, derived: &DerivedParams, params: &PhysicalParams, k: f64) -> AtomicPsd {
    KernelInputs::at(derived, params, k).atomic_psd(omega)
}

/// Full spectral point, including S_out.
pub fn output_psd(omega: f64, derived: &DerivedParams, params: &PhysicalParams, k: f64) -> SpectralPoint {
    KernelInputs::at(derived, params, k).point(k, omega)
}

/// S_out = 2π/|R|²·([κ² + ω² + Δ² + 2κΔ] + 4κΔ·G·(S↑ + S↓)).
pub fn output_from_atomic(omega: f64, kappa: f64, delta: f64, coupling: f64, s_up: f64, s_dn: f64) -> f64 {
    let r = cavity_response(omega, kappa, delta);
    let bare = kappa * kappa + omega * omega + delta * delta + 2.0 * kappa * delta;
    2.0 * PI / r.norm_sqr() * (bare + 4.0 * kappa * delta * (coupling * s_up + coupling * s_dn))
}

/// Coefficients of the output-field input-output relations.
///
/// Each triple multiplies (conjugate-partner input, same input, δq↑ + δq↓).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureTransfer {
    /// δq_out in terms of (δp_in, δq_in, atoms).
    pub q_out: [C64; 3],
    /// δp_out in terms of (δq_in, δp_in, atoms).
    pub p_out: [C64; 3],
    /// δc_out in terms of (δc_in†, δc_in, atoms).
    pub c_out: [C64; 3],
}

pub fn output_quadrature_transfer(
    omega: f64,
    derived: &DerivedParams,
    params: &PhysicalParams,
    _k: f64,
) -> QuadratureTransfer {
    let (kap, d, g) = (params.kappa, derived.delta, derived.coupling);
    let r = cavity_response(omega, kap, d);
    let cross = C64::new(2.0 * kap * d, 0.0) / r;
    let direct = C64::new(kap * kap + omega * omega + d * d, 0.0) / r;
    let root = (2.0 * kap).sqrt();
    let atoms_q = C64::new(root * d * g, 0.0) / r;
    let atoms_p = root * g * C64::new(kap, omega) / r;
    QuadratureTransfer {
        q_out: [cross, direct, atoms_q],
        p_out: [cross, direct, atoms_p],
        c_out: [cross, direct, atoms_q],
    }
}

//! Physical inputs and the quantities derived from them.
//!
//! Everything is expressed with ħ = 1 in recoil units: rates and energies in
//! units of the recoil frequency Ω, momenta in units of the Raman wavevector
//! so that the kinetic term is Ω(k) = k².

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, InvalidParam, Result};

/// User-facing physical inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Atomic dissipation rate γ.
    pub gamma: f64,
    /// Bare pump-cavity detuning Δ̃.
    pub bare_detuning: f64,
    /// Atom number N. Only enters through the collective shift g_a·N.
    pub atom_number: f64,
    /// Single-atom dispersive coupling g_a.
    pub atom_coupling: f64,
    /// Intra-species interaction, already multiplied by N (the total shift UN).
    pub interaction: f64,
    /// Interspecies ratio ε = U↑↓/U.
    pub epsilon: f64,
    /// Raman (effective Zeeman) coupling Ω_z.
    pub omega_z: f64,
    /// Raman detuning δ.
    pub raman_detuning: f64,
    /// SOC strength α̃, so that α_eff(k) = α̃·k.
    pub soc_strength: f64,
    /// Drive power P in pump units.
    pub power: f64,
    /// Pump frequency scale ω_p entering |η| = √(Pκ/ω_p).
    pub pump_frequency: f64,
    /// Thermal ratio θ = k_B T / (ħΩ). Zero means the zero-temperature limit.
    pub theta: f64,
    /// Detection efficiency η_det ∈ (0, 1].
    pub eta_det: f64,
    /// Output-port coupling κ_ext ∈ (0, κ].
    pub kappa_ext: f64,
}

impl Default for PhysicalParams {
    /// Loss-dominated reference point (κ > γ) at Ω_z = 3.
    ///
    /// The drive is chosen so that G = 1 and the light shift v = 1; g_a·N = 0.5
    /// puts the effective detuning at Δ = 1.5.
    fn default() -> Self {
        Self {
            kappa: 1.0,
            gamma: 0.5,
            bare_detuning: 1.0,
            atom_number: 1.0,
            atom_coupling: 0.5,
            interaction: 0.3,
            epsilon: 0.0,
            omega_z: 3.0,
            raman_detuning: 0.0,
            soc_strength: 1.5,
            power: 6.5,
            pump_frequency: 1.0,
            theta: 0.0,
            eta_det: 1.0,
            kappa_ext: 1.0,
        }
    }
}

impl PhysicalParams {
    /// The gain-dominated counterpart of [`Default`]: identical except γ = 2κ.
    pub fn gain_dominated() -> Self {
        Self { gamma: 2.0, ..Self::default() }
    }

    /// Checks every field invariant and returns the complete list of violations.
    pub fn validate(&self) -> Result<(), Vec<InvalidParam>> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &'static str, reason: &str| {
            if !ok {
                errs.push(InvalidParam { field, reason: reason.to_string() });
            }
        };

        for (field, value) in self.fields() {
            check(value.is_finite(), field, "must be finite");
        }
        check(self.kappa > 0.0, "kappa", "must be > 0");
        check(self.gamma >= 0.0, "gamma", "must be >= 0");
        check(self.atom_number > 0.0, "N", "must be > 0");
        check(self.epsilon >= 0.0, "epsilon", "must be >= 0");
        check(self.theta >= 0.0, "T", "must be >= 0");
        check(self.power >= 0.0, "P", "must be >= 0");
        check(self.pump_frequency > 0.0, "omega_p", "must be > 0");
        check(
            self.eta_det > 0.0 && self.eta_det <= 1.0,
            "eta_det",
            "must lie in (0, 1]",
        );
        check(
            self.kappa_ext > 0.0 && self.kappa_ext <= self.kappa,
            "kappa_ext",
            "must lie in (0, kappa]",
        );

        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// [`validate`](Self::validate) folded into the crate error type.
    pub fn validated(self) -> Result<Self> {
        self.validate().map_err(Error::InvalidParams)?;
        Ok(self)
    }

    /// Effective detuning Δ = Δ̃ + g_a·N.
    pub fn effective_detuning(&self) -> f64 {
        self.bare_detuning + self.atom_coupling * self.atom_number
    }

    /// Field values keyed by their configuration names, in canonical order.
    pub fn fields(&self) -> [(&'static str, f64); 15] {
        [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("Delta_a", self.bare_detuning),
            ("N", self.atom_number),
            ("g_a", self.atom_coupling),
            ("U", self.interaction),
            ("epsilon", self.epsilon),
            ("Omega_z", self.omega_z),
            ("delta", self.raman_detuning),
            ("alpha_tilde", self.soc_strength),
            ("P", self.power),
            ("omega_p", self.pump_frequency),
            ("T", self.theta),
            ("eta_det", self.eta_det),
            ("kappa_ext", self.kappa_ext),
        ]
    }

    /// Mutable access by configuration name.
    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "kappa" => &mut self.kappa,
            "gamma" => &mut self.gamma,
            "Delta_a" => &mut self.bare_detuning,
            "N" => &mut self.atom_number,
            "g_a" => &mut self.atom_coupling,
            "U" => &mut self.interaction,
            "epsilon" => &mut self.epsilon,
            "Omega_z" => &mut self.omega_z,
            "delta" => &mut self.raman_detuning,
            "alpha_tilde" => &mut self.soc_strength,
            "P" => &mut self.power,
            "omega_p" => &mut self.pump_frequency,
            "T" => &mut self.theta,
            "eta_det" => &mut self.eta_det,
            "kappa_ext" => &mut self.kappa_ext,
            _ => return None,
        })
    }
}

/// Steady-state intracavity amplitude c_s = η / (κ + iΔ) with η = √(Pκ/ω_p) real.
pub fn steady_state_field(params: &PhysicalParams, delta: f64) -> Complex<f64> {
    let eta = (params.power * params.kappa / params.pump_frequency).sqrt();
    Complex::new(eta, 0.0) / Complex::new(params.kappa, delta)
}

/// Linearized light-matter coupling G = √2·g_a·|c_s|.
pub fn coupling_from_power(params: &PhysicalParams, delta: f64) -> f64 {
    std::f64::consts::SQRT_2 * params.atom_coupling * steady_state_field(params, delta).norm()
}

/// Everything the drift matrix and the response kernels need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Effective detuning Δ.
    pub delta: f64,
    /// Steady-state intracavity amplitude c_s.
    pub field: Complex<f64>,
    /// Linearized coupling G.
    pub coupling: f64,
    /// Mean dispersive light shift v = g_a·|c_s|².
    pub light_shift: f64,
    /// k-independent part of the damping: v + UN(1 − ε) − γ.
    pub damping_offset: f64,
    /// SOC strength α̃.
    pub soc_strength: f64,
}

impl DerivedParams {
    /// M(k) = k²/2 + v + UN(1 − ε) − γ.
    pub fn damping(&self, k: f64) -> f64 {
        0.5 * k * k + self.damping_offset
    }

    /// α_eff(k) = α̃·k.
    pub fn alpha_eff(&self, k: f64) -> f64 {
        self.soc_strength * k
    }
}

/// Computes Δ, then c_s(Δ), then G, v and the damping offset.
pub fn derive(params: &PhysicalParams) -> DerivedParams {
    let delta = params.effective_detuning();
    let field = steady_state_field(params, delta);
    let coupling = coupling_from_power(params, delta);
    let light_shift = params.atom_coupling * field.norm_sqr();
    let damping_offset =
        light_shift + params.interaction * (1.0 - params.epsilon) - params.gamma;
    DerivedParams {
        delta,
        field,
        coupling,
        light_shift,
        damping_offset,
        soc_strength: params.soc_strength,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields_of(errs: &[InvalidParam]) -> Vec<&'static str> {
        errs.iter().map(|e| e.field).collect()
    }

    #[test]
    fn defaults_validate() {
        assert!(PhysicalParams::default().validate().is_ok());
        assert!(PhysicalParams::gain_dominated().validate().is_ok());
    }

    #[test]
    fn zero_kappa_is_rejected() {
        let p = PhysicalParams { kappa: 0.0, kappa_ext: 0.0, ..Default::default() };
        let errs = p.validate().unwrap_err();
        assert!(fields_of(&errs).contains(&"kappa"));
    }

    #[test]
    fn port_coupling_above_total_loss_is_rejected() {
        let p = PhysicalParams { kappa_ext: 2.0, ..Default::default() };
        assert_eq!(fields_of(&p.validate().unwrap_err()), vec!["kappa_ext"]);
    }

    #[test]
    fn every_violation_is_reported() {
        let p = PhysicalParams {
            gamma: -1.0,
            atom_number: 0.0,
            eta_det: 1.5,
            theta: -0.1,
            epsilon: f64::NAN,
            ..Default::default()
        };
        let errs = fields_of(&p.validate().unwrap_err());
        for f in ["gamma", "N", "eta_det", "T", "epsilon"] {
            assert!(errs.contains(&f), "missing {f} in {errs:?}");
        }
    }

    #[test]
    fn no_drive_no_field() {
        let p = PhysicalParams { power: 0.0, ..Default::default() };
        assert_eq!(steady_state_field(&p, 1.3), Complex::new(0.0, 0.0));
        assert_eq!(coupling_from_power(&p, 1.3), 0.0);
    }

    #[test]
    fn resonant_unit_drive() {
        let p = PhysicalParams { kappa: 1.0, kappa_ext: 1.0, power: 1.0, pump_frequency: 1.0, ..Default::default() };
        let cs = steady_state_field(&p, 0.0);
        assert_eq!(cs, Complex::new(1.0, 0.0));
        assert_eq!(cs.norm_sqr(), 1.0);
    }

    #[test]
    fn detuned_drive_photon_number() {
        // |c_s|^2 = 2*1/(1+1) = 1.
        let p = PhysicalParams { kappa: 1.0, kappa_ext: 1.0, power: 2.0, pump_frequency: 1.0, ..Default::default() };
        let n = steady_state_field(&p, 1.0).norm_sqr();
        assert!((n - 1.0).abs() < 1e-15);
        let eta2 = p.power * p.kappa / p.pump_frequency;
        assert!((n - eta2 / (1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn coupling_examples() {
        let p = PhysicalParams {
            kappa: 1.0,
            kappa_ext: 1.0,
            atom_coupling: 0.1,
            power: 2.0,
            pump_frequency: 1.0,
            ..Default::default()
        };
        let g = coupling_from_power(&p, 1.0);
        let oracle = 2f64.sqrt() * 0.1 * steady_state_field(&p, 1.0).norm();
        assert_eq!(g, oracle);
        assert!((g - 0.141_421_356_237_309_5).abs() < 1e-15);

        let doubled = PhysicalParams { power: 4.0, ..p };
        assert!((coupling_from_power(&doubled, 1.0) / g - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn decoupled_limit() {
        let p = PhysicalParams { atom_coupling: 0.0, ..Default::default() };
        let d = derive(&p);
        assert_eq!(d.delta, p.bare_detuning);
        assert_eq!(d.coupling, 0.0);
        assert_eq!(d.light_shift, 0.0);
        let k = 0.7;
        let expected = k * k / 2.0 + p.interaction * (1.0 - p.epsilon) - p.gamma;
        assert!((d.damping(k) - expected).abs() < 1e-15);
    }

    #[test]
    fn su2_point_drops_interaction() {
        let p = PhysicalParams { epsilon: 1.0, interaction: 5.0, ..Default::default() };
        let d = derive(&p);
        assert_eq!(d.damping_offset, d.light_shift - p.gamma);
    }

    #[test]
    fn chained_derivation() {
        let p = PhysicalParams {
            kappa: 1.0,
            kappa_ext: 1.0,
            gamma: 0.5,
            bare_detuning: 1.0,
            atom_coupling: 0.25,
            atom_number: 4.0,
            ..Default::default()
        };
        let d = derive(&p);
        assert_eq!(d.delta, 2.0);
        // hand evaluation: |c_s|^2 = P*kappa/(omega_p*(kappa^2 + Delta^2)) = 6.5/5
        let n = 6.5 / 5.0;
        let v = 0.25 * n;
        assert!((d.light_shift - v).abs() < 1e-15);
        assert!((d.damping(0.0) - (v + 0.3 - 0.5)).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = PhysicalParams> {
            (0.05f64..5.0, -4.0f64..4.0, 0.0f64..2.0, 0.0f64..50.0, 0.1f64..3.0, -3.0f64..3.0)
                .prop_map(|(kappa, bare, g_a, power, wp, alpha)| PhysicalParams {
                    kappa,
                    kappa_ext: kappa,
                    bare_detuning: bare,
                    atom_coupling: g_a,
                    power,
                    pump_frequency: wp,
                    soc_strength: alpha,
                    ..Default::default()
                })
        }

        proptest! {
            #[test]
            fn photon_number_identity(p in params()) {
                let d = derive(&p);
                let lhs = d.field.norm_sqr() * (p.kappa * p.kappa + d.delta * d.delta);
                let rhs = p.power * p.kappa / p.pump_frequency;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
            }

            #[test]
            fn detuning_is_single_addition(p in params()) {
                prop_assert_eq!(derive(&p).delta, p.bare_detuning + p.atom_coupling * p.atom_number);
            }

            #[test]
            fn kinetic_term_isolated(p in params(), k in -10.0f64..10.0) {
                let d = derive(&p);
                let diff = d.damping(k) - d.damping(0.0);
                prop_assert!((diff - k * k / 2.0).abs() <= 1e-12 * (1.0 + k * k + d.damping_offset.abs()));
            }

            #[test]
            fn soc_term_is_odd(p in params(), k in -10.0f64..10.0) {
                let d = derive(&p);
                prop_assert_eq!(d.alpha_eff(-k), -d.alpha_eff(k));
            }

            #[test]
            fn coupling_monotone_in_power(p in params(), extra in 0.01f64..10.0) {
                let more = PhysicalParams { power: p.power + extra, ..p };
                let delta = p.effective_detuning();
                prop_assert!(coupling_from_power(&more, delta) >= coupling_from_power(&p, delta));
                prop_assert!(coupling_from_power(&p, delta) >= 0.0);
            }
        }
    }
}

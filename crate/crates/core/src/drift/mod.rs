//! The fluctuation drift matrix and everything computed from it.

pub mod ep;

use nalgebra::{DMatrix, Matrix6, Vector6};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DerivedParams, PhysicalParams};
use crate::C64;

/// Condition-number ceiling above which the resolvent is refused.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e12;

/// Default half-width of the band declared marginal.
pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;

/// The rates that fully determine the drift matrix at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftRates {
    pub kappa: f64,
    /// Effective detuning Δ.
    pub delta: f64,
    /// Light-matter coupling G.
    pub coupling: f64,
    /// Atomic damping M(k).
    pub damping: f64,
    /// Raman coupling Ω_z.
    pub raman: f64,
    /// SOC coupling α_eff(k) − δ/2.
    pub soc: f64,
}

impl DriftRates {
    pub fn at(derived: &DerivedParams, params: &PhysicalParams, k: f64) -> Self {
        Self {
            kappa: params.kappa,
            delta: derived.delta,
            coupling: derived.coupling,
            damping: derived.damping(k),
            raman: params.omega_z,
            soc: derived.alpha_eff(k) - 0.5 * params.raman_detuning,
        }
    }
}

/// Real 6×6 drift matrix in the basis (δq_c, δp_c, δq↑, δp↑, δq↓, δp↓).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub k: f64,
    pub entries: Matrix6<f64>,
}

impl DriftMatrix {
    /// Assembles the matrix at momentum `k`.
    pub fn build(derived: &DerivedParams, params: &PhysicalParams, k: f64) -> Self {
        Self::from_rates(k, &DriftRates::at(derived, params, k))
    }

    pub fn from_rates(k: f64, r: &DriftRates) -> Self {
        let (kap, d, g, m) = (r.kappa, r.delta, r.coupling, r.damping);
        let h = 0.5 * r.raman;
        let a = r.soc;
        #[rustfmt::skip]
        let entries = Matrix6::new(
            -kap, d,    0.0, 0.0, 0.0, 0.0,
            d,    -kap, g,   0.0, g,   0.0,
            2.0 * g, 0.0, m,  h,   a,   0.0,
            0.0,  0.0,  h,   m,   0.0, -a,
            2.0 * g, 0.0, -a, 0.0, m,   -h,
            0.0,  0.0,  0.0, a,   -h,  m,
        );
        Self { k, entries }
    }

    /// Wraps an arbitrary real matrix, e.g. for testing.
    pub fn from_matrix(entries: Matrix6<f64>) -> Self {
        Self { k: 0.0, entries }
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn char_poly(&self) -> CharPoly {
        CharPoly::of(&self.entries)
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn eigen_spectrum(&self) -> Result<Vec<C64>> {
        let schur = nalgebra::Schur::try_new(self.entries, f64::EPSILON, 10_000)
            .ok_or(Error::EigenFailure)?;
        let mut eig: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
        if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::EigenFailure);
        }
        sort_spectrum(&mut eig);
        Ok(eig)
    }

    /// Splits into (antisymmetric, symmetric) parts `((K − Kᵀ)/2, (K + Kᵀ)/2)`.
    pub fn hermitian_split(&self) -> (Matrix6<f64>, Matrix6<f64>) {
        let k = &self.entries;
        let mut coherent = Matrix6::zeros();
        let mut dissipative = Matrix6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                let d = 0.5 * (k[(i, j)] + k[(j, i)]);
                dissipative[(i, j)] = d;
                // remainder form keeps the reassembly exact
                coherent[(i, j)] = k[(i, j)] - d;
            }
        }
        (coherent, dissipative)
    }

    /// Retarded Green's function `(−iω·1 − K)⁻¹`.
    pub fn resolvent(&self, omega: f64) -> Result<Matrix6<C64>> {
        let a: Matrix6<C64> =
            Matrix6::from_diagonal_element(C64::new(0.0, -omega)) - self.entries.map(C64::from);
        let inv = a.lu().try_inverse().ok_or(Error::SingularResolvent { condition: f64::INFINITY })?;
        let condition = norm_one(&a) * norm_one(&inv);
        if !condition.is_finite() || condition > RESOLVENT_CONDITION_LIMIT {
            return Err(Error::SingularResolvent { condition });
        }
        Ok(inv)
    }

    /// Routh-Hurwitz certificate cross-checked against the spectrum.
    pub fn stability_report(&self, tol: f64) -> Result<StabilityReport> {
        let coefficients = self.char_poly();
        let hurwitz_minors = coefficients.hurwitz_determinants();
        let spectrum = self.eigen_spectrum()?;
        let max_real_part = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let margin = spectrum.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
        if max_real_part.abs() <= tol {
            return Err(Error::MarginalSpectrum { max_real_part, tol });
        }
        let rh_stable = coefficients.a[1..].iter().all(|&a| a > 0.0)
            && hurwitz_minors.iter().all(|&d| d > 0.0);
        Ok(StabilityReport {
            coefficients,
            hurwitz_minors,
            rh_stable,
            eigen_stable: max_real_part < -tol,
            max_real_part,
            margin,
        })
    }
}

pub(crate) fn sort_spectrum(eig: &mut [C64]) {
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

fn norm_one(m: &Matrix6<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Monic characteristic polynomial `s⁶ + a₁s⁵ + … + a₆`; `a[0]` is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPoly {
    pub a: [f64; 7],
}

impl CharPoly {
    /// Faddeev-LeVerrier recurrence.
    pub fn of(k: &Matrix6<f64>) -> Self {
        let mut a = [0.0; 7];
        a[0] = 1.0;
        let id = Matrix6::<f64>::identity();
        let mut b = id;
        for n in 1..=6 {
            let ab = k * b;
            a[n] = -ab.trace() / n as f64;
            b = ab + id * a[n];
        }
        Self { a }
    }

    pub fn from_coefficients(c: [f64; 6]) -> Self {
        let mut a = [1.0; 7];
        a[1..].copy_from_slice(&c);
        Self { a }
    }

    /// Polynomial with the given six roots.
    pub fn from_roots(roots: &[C64; 6]) -> Self {
        let mut c = [C64::new(0.0, 0.0); 7];
        c[0] = C64::new(1.0, 0.0);
        for (n, r) in roots.iter().enumerate() {
            for j in (1..=n + 1).rev() {
                c[j] -= r * c[j - 1];
            }
        }
        let mut a = [0.0; 7];
        for (dst, src) in a.iter_mut().zip(c) {
            *dst = src.re;
        }
        Self { a }
    }

    /// `a_j` with `a_0 = 1` and zero outside 0..=6.
    pub fn coeff(&self, j: i64) -> f64 {
        if (0..=6).contains(&j) {
            self.a[j as usize]
        } else {
            0.0
        }
    }

    /// Leading principal minors Δ₁..Δ₆ of the Hurwitz matrix `H[i][j] = a_{2j−i}` (1-based).
    pub fn hurwitz_determinants(&self) -> [f64; 6] {
        let h = DMatrix::from_fn(6, 6, |i, j| self.coeff(2 * (j as i64 + 1) - (i as i64 + 1)));
        let mut out = [0.0; 6];
        for (n, d) in out.iter_mut().enumerate() {
            *d = h.view((0, 0), (n + 1, n + 1)).into_owned().determinant();
        }
        out
    }

    pub fn eval(&self, s: C64) -> C64 {
        self.a.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }
}

/// Closed forms for the two lowest non-trivial coefficients in terms of the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl PrintedCoefficients {
    /// `soc_raw` is α_eff and `raman_detuning` is δ, kept separate as in the closed forms.
    pub fn evaluate(r: &DriftRates, soc_raw: f64, raman_detuning: f64) -> Self {
        let (k, d, g, m, oz) = (r.kappa, r.delta, r.coupling, r.damping, r.raman);
        let (al, de) = (soc_raw, raman_detuning);
        let a1 = 2.0 * (k - 2.0 * m);
        let a2 = k * k - d * d + 6.0 * m * m - 8.0 * m * k - 0.5 * oz * oz + 2.0 * al * al
            - 2.0 * al * de
            + 0.5 * de * de;
        let a3 = 4.0 * d * d * m - 4.0 * d * g * g - 4.0 * m.powi(3) + 12.0 * m * m * k
            + m * oz * oz
            - 4.0 * m * al * al
            + 4.0 * m * al * de
            - m * de * de
            - oz * oz * k
            + 4.0 * al * al * k
            - 4.0 * al * de * k
            + de * de * k;
        Self { a1, a2, a3 }
    }
}

/// Outcome of comparing the closed forms with the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub printed: PrintedCoefficients,
    pub computed: [f64; 3],
    pub relative_error: [f64; 3],
}

impl CoefficientCheck {
    pub fn agrees(&self, rel_tol: f64) -> [bool; 3] {
        self.relative_error.map(|e| e <= rel_tol)
    }
}

/// Evaluates the closed-form a₁..a₃ and reports their relative discrepancy against [`CharPoly`].
pub fn check_printed_coefficients(
    derived: &DerivedParams,
    params: &PhysicalParams,
    k: f64,
) -> CoefficientCheck {
    let rates = DriftRates::at(derived, params, k);
    let printed =
        PrintedCoefficients::evaluate(&rates, derived.alpha_eff(k), params.raman_detuning);
    let cp = DriftMatrix::from_rates(k, &rates).char_poly();
    let computed = [cp.a[1], cp.a[2], cp.a[3]];
    let p = [printed.a1, printed.a2, printed.a3];
    let mut relative_error = [0.0; 3];
    for i in 0..3 {
        let scale = computed[i].abs().max(p[i].abs()).max(f64::MIN_POSITIVE);
        relative_error[i] = (computed[i] - p[i]).abs() / scale;
    }
    CoefficientCheck { printed, computed, relative_error }
}

/// Result of [`DriftMatrix::stability_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub coefficients: CharPoly,
    pub hurwitz_minors: [f64; 6],
    pub rh_stable: bool,
    pub eigen_stable: bool,
    pub max_real_part: f64,
    /// Smallest |Re λ|.
    pub margin: f64,
}

/// Per-channel weights of the Langevin noise vector.
///
/// Only the cavity quadratures and the atomic momentum quadratures are driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub weights: Vector6<f64>,
}

impl NoiseSpec {
    pub fn new(kappa: f64, gamma: f64) -> Self {
        let c = (2.0 * kappa).sqrt();
        let a = 2.0 * (2.0 * gamma).sqrt();
        Self { weights: Vector6::new(c, c, 0.0, a, 0.0, a) }
    }
}

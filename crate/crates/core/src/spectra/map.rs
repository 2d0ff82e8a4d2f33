use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Flag, KernelInputs, SpectralPoint, X_FLOOR};
use crate::error::{Error, Result};
use crate::params::{derive, DerivedParams, PhysicalParams};

/// Inputs echoed alongside every map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub params: PhysicalParams,
    pub derived: DerivedParams,
}

/// Dense (k, ω) evaluation, row-major with k outer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMap {
    pub k_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub values: Vec<SpectralPoint>,
    pub meta: MapMeta,
    pub singular_count: usize,
    /// Points where S_out came out negative.
    pub negative_count: usize,
}

impl SpectralMap {
    pub fn at(&self, ik: usize, iw: usize) -> &SpectralPoint {
        &self.values[ik * self.omega_grid.len() + iw]
    }

    pub fn row(&self, ik: usize) -> &[SpectralPoint] {
        let n = self.omega_grid.len();
        &self.values[ik * n..(ik + 1) * n]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.k_grid.len(), self.omega_grid.len())
    }

    /// S_out as a row-major array (NaN where flagged).
    pub fn s_out(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.s_out).collect()
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::BadGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadGrid(format!("{name} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Evaluates S↑, S↓ and S_out on every grid point using the global rayon pool.
pub fn psd_map(params: &PhysicalParams, k_grid: &[f64], omega_grid: &[f64]) -> Result<SpectralMap> {
    params.validate().map_err(Error::InvalidParams)?;
    check_grid("k", k_grid)?;
    check_grid("omega", omega_grid)?;
    let derived = derive(params);

    let rows: Vec<Vec<(SpectralPoint, f64, f64)>> = k_grid
        .par_iter()
        .map(|&k| {
            let inp = KernelInputs::at(&derived, params, k);
            omega_grid
                .iter()
                .map(|&w| {
                    let kern = inp.kernels(w);
                    let scale = (kern.y_up * kern.y_dn).norm() + (kern.z_up * kern.z_dn).norm();
                    (inp.point(k, w), kern.x.norm(), scale)
                })
                .collect()
        })
        .collect();

    let x_max = rows
        .iter()
        .flatten()
        .map(|&(_, x, _)| x)
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max);
    let mut values = Vec::with_capacity(k_grid.len() * omega_grid.len());
    for (ik, row) in rows.into_iter().enumerate() {
        let inp = KernelInputs::at(&derived, params, k_grid[ik]);
        for (p, x, _) in row {
            let p = if p.flag.is_ok() && p.s_up != 0.0 && x < X_FLOOR * x_max {
                inp.assemble(p.k, p.omega, super::AtomicPsd {
                    up: f64::NAN,
                    dn: f64::NAN,
                    im_f_up: f64::NAN,
                    im_f_dn: f64::NAN,
                    flag: Flag::SingularX,
                })
            } else {
                p
            };
            values.push(p);
        }
    }
    let singular_count = values.iter().filter(|p| !p.flag.is_ok()).count();
    let negative_count = values.iter().filter(|p| p.flag.is_ok() && p.s_out < 0.0).count();
    Ok(SpectralMap {
        k_grid: k_grid.to_vec(),
        omega_grid: omega_grid.to_vec(),
        values,
        meta: MapMeta { params: *params, derived },
        singular_count,
        negative_count,
    })
}

/// [`psd_map`] on a dedicated pool of `workers` threads.
pub fn psd_map_with_workers(
    params: &PhysicalParams,
    k_grid: &[f64],
    omega_grid: &[f64],
    workers: usize,
) -> Result<SpectralMap> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::SpecInvalid(e.to_string()))?;
    pool.install(|| psd_map(params, k_grid, omega_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::output_psd;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_cell_matches_point_call() {
        let p = PhysicalParams::default();
        let m = psd_map(&p, &[0.4], &[1.1]).unwrap();
        let direct = output_psd(1.1, &derive(&p), &p, 0.4);
        assert_eq!(m.values.len(), 1);
        assert_eq!(m.values[0].s_out.to_bits(), direct.s_out.to_bits());
        assert_eq!(m.values[0].s_up.to_bits(), direct.s_up.to_bits());
    }

    #[test]
    fn layout_is_row_major() {
        let p = PhysicalParams::default();
        let ks = grid(-1.0, 1.0, 3);
        let ws = grid(-2.0, 2.0, 4);
        let m = psd_map(&p, &ks, &ws).unwrap();
        assert_eq!(m.values.len(), 12);
        assert_eq!(m.at(2, 1).k, 1.0);
        assert_eq!(m.at(2, 1).omega, ws[1]);
        assert_eq!(m.row(1)[3].k, 0.0);
        assert_eq!(m.meta.params, p);
    }

    #[test]
    fn undriven_map_is_pure_cavity() {
        let p = PhysicalParams { power: 0.0, ..Default::default() };
        let m = psd_map(&p, &grid(-2.0, 2.0, 5), &grid(-3.0, 3.0, 8)).unwrap();
        for v in &m.values {
            assert_eq!((v.s_up, v.s_dn), (0.0, 0.0));
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let p = PhysicalParams::gain_dominated();
        let ks = grid(-3.0, 3.0, 17);
        let ws = grid(-3.0, 3.0, 33);
        let a = psd_map_with_workers(&p, &ks, &ws, 1).unwrap();
        let b = psd_map_with_workers(&p, &ks, &ws, 4).unwrap();
        let bits = |m: &SpectralMap| m.values.iter().map(|v| v.s_out.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn bad_grids_rejected() {
        let p = PhysicalParams::default();
        assert!(matches!(psd_map(&p, &[], &[0.0]), Err(Error::BadGrid(_))));
        assert!(matches!(psd_map(&p, &[1.0, 0.0], &[0.0]), Err(Error::BadGrid(_))));
    }
}

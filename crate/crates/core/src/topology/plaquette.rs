//! Lattice Berry curvature from link variables.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};

use super::{BerryMap, BerrySource};
use crate::error::{Error, Result};
use crate::C64;

/// Smallest admissible band gap.
pub const GAP_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Lower,
    Upper,
}

/// Two-parameter sampling grid. A periodic lattice wraps its last row and
/// column back onto the first, so `u` and `v` should not repeat the endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub periodic: bool,
}

impl Lattice {
    /// `n × n` periodic samples of the torus `[0, 2π)²`.
    pub fn torus(n: usize) -> Self {
        let g: Vec<f64> = (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
        Self { u: g.clone(), v: g, periodic: true }
    }
}

fn eigenvector(h: Matrix2<C64>, band: Band, u: f64, v: f64) -> Result<Vector2<C64>> {
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 1000).ok_or(Error::NonConvergedEigen { u, v })?;
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let gap = eig.eigenvalues[hi] - eig.eigenvalues[lo];
    if !(gap >= GAP_FLOOR) {
        return Err(Error::BandDegeneracy { u, v, gap });
    }
    let col = match band {
        Band::Lower => lo,
        Band::Upper => hi,
    };
    Ok(eig.eigenvectors.column(col).into_owned())
}

/// Per-plaquette curvature `F = −arg(U₁₂U₂₃U₃₄U₄₁)` on counter-clockwise loops,
/// which is the lattice form of the curl of A = i⟨u|∇u⟩.
///
/// Values are ordered with u outer. On a periodic lattice the summed flux is
/// 2π times the Chern number of the band.
pub fn plaquette_berry<H>(h: H, lattice: &Lattice, band: Band) -> Result<BerryMap>
where
    H: Fn(f64, f64) -> Matrix2<C64> + Sync,
{
    use rayon::prelude::*;

    let (nu, nv) = (lattice.u.len(), lattice.v.len());
    if nu < 2 || nv < 2 {
        return Err(Error::BadGrid("plaquette lattice needs at least 2×2 points".into()));
    }
    let states: Vec<Vector2<C64>> = (0..nu * nv)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (lattice.u[idx / nv], lattice.v[idx % nv]);
            eigenvector(h(u, v), band, u, v)
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &states[(i % nu) * nv + (j % nv)];
    let link = |a: &Vector2<C64>, b: &Vector2<C64>| a.dotc(b);

    let (pu, pv) = if lattice.periodic { (nu, nv) } else { (nu - 1, nv - 1) };
    let mut values = Vec::with_capacity(pu * pv);
    for i in 0..pu {
        for j in 0..pv {
            let (s1, s2, s3, s4) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            let loop_product = link(s1, s2) * link(s2, s3) * link(s3, s4) * link(s4, s1);
            values.push(-loop_product.arg());
        }
    }
    let total = values.iter().sum();
    let trim = |g: &Vec<f64>, n: usize| g[..n].to_vec();
    Ok(BerryMap {
        grid_u: trim(&lattice.u, pu),
        grid_v: trim(&lattice.v, pv),
        values,
        source: BerrySource::Plaquette,
        total_flux: Some(total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(x: f64, y: f64, z: f64) -> Matrix2<C64> {
        Matrix2::new(
            C64::new(z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(-z, 0.0),
        )
    }

    fn two_band(m: f64) -> impl Fn(f64, f64) -> Matrix2<C64> + Sync {
        move |u, v| pauli(u.sin(), v.sin(), m - u.cos() - v.cos())
    }

    #[test]
    fn constant_hamiltonian_is_flat() {
        let b = plaquette_berry(|_, _| pauli(0.0, 0.0, 1.0), &Lattice::torus(8), Band::Lower).unwrap();
        assert!(b.values.iter().all(|f| f.abs() < 1e-14));
        assert_eq!(b.total_flux, Some(0.0));
    }

    #[test]
    fn two_band_chern_numbers() {
        for (m, expected) in [(1.0, -1.0), (-1.0, 1.0), (3.0, 0.0), (-3.0, 0.0)] {
            let b = plaquette_berry(two_band(m), &Lattice::torus(24), Band::Lower).unwrap();
            let c = b.chern_number().unwrap();
            assert!((c - expected).abs() < 1e-6, "m = {m}: {c}");
        }
    }

    #[test]
    fn bands_carry_opposite_flux() {
        let lo = plaquette_berry(two_band(1.0), &Lattice::torus(16), Band::Lower).unwrap();
        let hi = plaquette_berry(two_band(1.0), &Lattice::torus(16), Band::Upper).unwrap();
        assert!((lo.total_flux.unwrap() + hi.total_flux.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn gap_closing_is_refused() {
        // m = 2 closes the gap at (0, 0)
        let r = plaquette_berry(two_band(2.0), &Lattice::torus(8), Band::Lower);
        assert!(matches!(r, Err(Error::BandDegeneracy { .. })));
    }

    #[test]
    fn open_lattice_shape() {
        let lat = Lattice { u: vec![0.0, 0.5, 1.0], v: vec![0.0, 0.5, 1.0, 1.5], periodic: false };
        let b = plaquette_berry(two_band(1.0), &lat, Band::Lower).unwrap();
        assert_eq!(b.values.len(), 2 * 3);
        assert_eq!(b.grid_u, vec![0.0, 0.5]);
    }
}

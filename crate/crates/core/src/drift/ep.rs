//! Exceptional-point search along a one-parameter family of matrices.

use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// A located coalescence of two eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpCandidate {
    /// Family parameter (momentum for drift scans) at the refined coalescence.
    pub k_at: f64,
    pub lambda_pair: [C64; 2],
    /// |λ_i − λ_j| at `k_at`.
    pub residual: f64,
    pub re_gap_before: f64,
    pub re_gap_after: f64,
    pub im_gap_before: f64,
    pub im_gap_after: f64,
}

/// Eigenvalues of a complex square matrix in Schur order.
pub fn complex_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    let t = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?.unpack().1;
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 0.0 {
            // leftover 2×2 block
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powi(2) + b * c;
            let root = disc.sqrt();
            out.push(half_tr + root);
            out.push(half_tr - root);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(out)
}

/// Reorders `next` so that `next[i]` continues `prev[i]`.
///
/// Exhaustive over permutations for up to eight eigenvalues, greedy beyond.
/// Equal total distance is broken by the smaller total real-part displacement.
fn match_spectra(prev: &[C64], next: &[C64]) -> Vec<C64> {
    let n = prev.len();
    if n > 8 {
        let mut used = vec![false; n];
        return prev
            .iter()
            .map(|p| {
                let j = (0..n)
                    .filter(|&j| !used[j])
                    .min_by(|&a, &b| (next[a] - p).norm().total_cmp(&(next[b] - p).norm()))
                    .expect("same length");
                used[j] = true;
                next[j]
            })
            .collect();
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = (f64::INFINITY, f64::INFINITY);
    permute(&mut perm, 0, &mut |p| {
        let cost = p.iter().enumerate().fold((0.0, 0.0), |(d, r), (i, &j)| {
            (d + (next[j] - prev[i]).norm(), r + (next[j].re - prev[i].re).abs())
        });
        let better = cost.0 < best_cost.0 * (1.0 - 1e-12)
            || (cost.0 <= best_cost.0 * (1.0 + 1e-12) && cost.1 < best_cost.1);
        if better {
            best_cost = cost;
            best.copy_from_slice(p);
        }
    });
    best.iter().map(|&j| next[j]).collect()
}

fn permute(p: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// Flags a continuation step whose displacement is larger than the spacing to
/// the second-nearest neighbour. The nearest neighbour is exempt because it may
/// be the coalescence partner.
fn is_ambiguous(prev: &[C64], matched: &[C64]) -> bool {
    let n = prev.len();
    if n < 3 {
        return false;
    }
    (0..n).any(|i| {
        let mut gaps: Vec<f64> =
            (0..n).filter(|&j| j != i).map(|j| (prev[j] - prev[i]).norm()).collect();
        gaps.sort_by(f64::total_cmp);
        let step = (matched[i] - prev[i]).norm();
        step > gaps[1] && step > 1e-12
    })
}

/// Distance between the two eigenvalues nearest to `centre`.
fn pair_distance(eig: &[C64], centre: C64) -> (f64, [C64; 2]) {
    let mut by_dist: Vec<C64> = eig.to_vec();
    by_dist.sort_by(|a, b| (a - centre).norm().total_cmp(&(b - centre).norm()));
    ((by_dist[0] - by_dist[1]).norm(), [by_dist[0], by_dist[1]])
}

/// Scans `family` over `grid` and returns every refined coalescence.
///
/// A pair of continued eigenvalues is a candidate on an interval where their
/// distance has a local minimum and the closed/open status of the real-part gap
/// and imaginary-part gap swaps across that minimum. Each candidate is refined
/// by golden-section search and kept when the refined distance is within
/// `ep_tolerance`.
pub fn scan_exceptional_points<F>(family: F, grid: &[f64], ep_tolerance: f64) -> Result<Vec<EpCandidate>>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    if grid.len() < 3 {
        return Err(Error::BadGrid("exceptional-point scan needs at least 3 points".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid("scan grid must be strictly increasing".into()));
    }
    if ep_tolerance <= 0.0 || !ep_tolerance.is_finite() {
        return Err(Error::SpecInvalid("ep_tolerance must be positive".into()));
    }

    let raw: Vec<Vec<C64>> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&k| complex_eigenvalues(&family(k))).collect::<Result<_>>()?
    };

    let mut tracked = vec![raw[0].clone()];
    for (i, next) in raw.iter().enumerate().skip(1) {
        let prev = &tracked[i - 1];
        let matched = match_spectra(prev, next);
        if is_ambiguous(prev, &matched) {
            return Err(Error::TrackingAmbiguity { k_from: grid[i - 1], k_to: grid[i] });
        }
        tracked.push(matched);
    }

    let n = tracked[0].len();
    let gap_tol = ep_tolerance;
    let mut found = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let dist: Vec<f64> = tracked.iter().map(|s| (s[a] - s[b]).norm()).collect();
            for m in 1..grid.len() - 1 {
                if !(dist[m] <= dist[m - 1] && dist[m] <= dist[m + 1]) {
                    continue;
                }
                let (lo, hi) = (&tracked[m - 1], &tracked[m + 1]);
                let re = |s: &Vec<C64>| (s[a].re - s[b].re).abs();
                let im = |s: &Vec<C64>| (s[a].im - s[b].im).abs();
                let re_closes = (re(lo) <= gap_tol) != (re(hi) <= gap_tol);
                let im_closes = (im(lo) <= gap_tol) != (im(hi) <= gap_tol);
                let exchanged = re_closes && im_closes && ((re(lo) <= gap_tol) != (im(lo) <= gap_tol));
                if !exchanged {
                    continue;
                }
                let centre = (tracked[m][a] + tracked[m][b]) * 0.5;
                let (k_at, residual, pair) = refine(&family, grid[m - 1], grid[m + 1], centre)?;
                if residual <= ep_tolerance {
                    found.push(EpCandidate {
                        k_at,
                        lambda_pair: pair,
                        residual,
                        re_gap_before: re(lo),
                        re_gap_after: re(hi),
                        im_gap_before: im(lo),
                        im_gap_after: im(hi),
                    });
                }
            }
        }
    }
    found.sort_by(|x, y| x.k_at.total_cmp(&y.k_at));
    found.dedup_by(|x, y| (x.k_at - y.k_at).abs() < 1e-9 && (x.lambda_pair[0] - y.lambda_pair[0]).norm() < 1e-6);
    Ok(found)
}

fn refine<F>(family: &F, mut lo: f64, mut hi: f64, centre: C64) -> Result<(f64, f64, [C64; 2])>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |k: f64| -> Result<(f64, [C64; 2])> {
        let eig = complex_eigenvalues(&family(k))?;
        Ok(pair_distance(&eig, centre))
    };
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = eval(x1)?.0;
    let mut f2 = eval(x2)?.0;
    let width = hi - lo;
    while hi - lo > 1e-12 * width.max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = eval(x1)?.0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = eval(x2)?.0;
        }
    }
    let k = 0.5 * (lo + hi);
    let (d, pair) = eval(k)?;
    Ok((k, d, pair))
}

/// Embeds a real 6×6 drift-matrix family for [`scan_exceptional_points`].
pub fn drift_family<'a>(
    derived: &'a crate::DerivedParams,
    params: &'a crate::PhysicalParams,
) -> impl Fn(f64) -> DMatrix<C64> + Sync + 'a {
    move |k| {
        let m = crate::DriftMatrix::build(derived, params, k).entries;
        DMatrix::from_fn(6, 6, |i, j| C64::new(m[(i, j)], 0.0))
    }
}

/// The 2×2 family `[[iγ_e, g], [g, −iγ_e]]` with eigenvalues ±√(g² − γ_e²).
pub fn pt_dimer(gain_loss: f64) -> impl Fn(f64) -> DMatrix<C64> + Sync {
    move |g| {
        DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, gain_loss), C64::new(g, 0.0), C64::new(g, 0.0), C64::new(0.0, -gain_loss)],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn dimer_spectrum_is_analytic() {
        for g in [0.2, 0.9, 1.7] {
            let eig = complex_eigenvalues(&pt_dimer(1.0)(g)).unwrap();
            let root = C64::new(g * g - 1.0, 0.0).sqrt();
            assert!(eig.iter().any(|z| (z - root).norm() < 1e-12));
            assert!(eig.iter().any(|z| (z + root).norm() < 1e-12));
        }
    }

    #[test]
    fn dimer_ep_located() {
        let gamma_e = 0.731;
        let eps = scan_exceptional_points(pt_dimer(gamma_e), &linspace(0.05, 2.0, 41), 1e-4).unwrap();
        assert_eq!(eps.len(), 1, "{eps:?}");
        assert!((eps[0].k_at - gamma_e).abs() < 1e-6, "{}", eps[0].k_at);
    }

    #[test]
    fn hermitian_family_has_none() {
        let fam = |t: f64| {
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    C64::new(t, 0.0), C64::new(0.3, 0.0), C64::new(0.0, 0.0),
                    C64::new(0.3, 0.0), C64::new(2.0, 0.0), C64::new(0.1, 0.0),
                    C64::new(0.0, 0.0), C64::new(0.1, 0.0), C64::new(-t + 5.0, 0.0),
                ],
            )
        };
        let eps = scan_exceptional_points(fam, &linspace(-2.0, 4.0, 61), 1e-3).unwrap();
        assert!(eps.is_empty(), "{eps:?}");
    }

    #[test]
    fn short_grid_rejected() {
        assert!(matches!(
            scan_exceptional_points(pt_dimer(1.0), &[0.0, 1.0], 1e-3),
            Err(Error::BadGrid(_))
        ));
    }

    #[test]
    fn matching_follows_continuity() {
        let prev = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(5.0, 0.0)];
        let next = [C64::new(5.1, 0.0), C64::new(0.1, 0.0), C64::new(1.1, 0.0)];
        assert_eq!(match_spectra(&prev, &next), vec![next[1], next[2], next[0]]);
    }

    #[test]
    fn large_jump_is_ambiguous() {
        let prev = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        let jumped = [C64::new(0.0, 3.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        assert!(is_ambiguous(&prev, &jumped));
        assert!(!is_ambiguous(&prev, &prev));
    }
}

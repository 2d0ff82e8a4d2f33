//! Ridge tracing in S_out(k, ω).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::SpectralMap;

/// Allowed jump between neighbouring k columns, in ω steps.
pub const DEFAULT_CONTINUITY: f64 = 3.0;
/// Fraction of [−Ω_z/2, Ω_z/2] used as the gap window.
pub const DEFAULT_WINDOW_SCALE: f64 = 0.8;
/// Fraction of the window height a trace must cover to span the gap.
pub const SPAN_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapWindow {
    pub lo: f64,
    pub hi: f64,
}

impl GapWindow {
    /// `scale·[−Ω_z/2, Ω_z/2]` shifted to `centre`.
    pub fn centered(omega_z: f64, scale: f64, centre: f64) -> Self {
        let half = 0.5 * omega_z.abs() * scale;
        Self { lo: centre - half, hi: centre + half }
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lo && omega <= self.hi
    }

    pub fn height(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub k: f64,
    pub omega_peak: f64,
    pub intensity: f64,
    /// dω/dk from centred differences along the branch (one-sided at its ends).
    pub local_slope: f64,
    #[serde(skip)]
    pub(crate) k_index: usize,
    #[serde(skip)]
    pub(crate) omega_index: usize,
}

impl RidgePoint {
    pub fn indices(&self) -> (usize, usize) {
        (self.k_index, self.omega_index)
    }
}

/// The principal ridge branch inside a gap window, plus every other branch found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeTrace {
    pub points: Vec<RidgePoint>,
    pub gap_window: GapWindow,
    pub spans_gap: bool,
    /// Fraction of the window height covered by `points`.
    pub coverage: f64,
    pub branches: Vec<Vec<RidgePoint>>,
}

impl RidgeTrace {
    /// Least-squares dω/dk over the principal branch.
    pub fn mean_slope(&self) -> Option<f64> {
        let n = self.points.len() as f64;
        if self.points.len() < 2 {
            return None;
        }
        let mk = self.points.iter().map(|p| p.k).sum::<f64>() / n;
        let mw = self.points.iter().map(|p| p.omega_peak).sum::<f64>() / n;
        let sxy: f64 = self.points.iter().map(|p| (p.k - mk) * (p.omega_peak - mw)).sum();
        let sxx: f64 = self.points.iter().map(|p| (p.k - mk).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

fn local_maxima(s: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let first = lo.max(1);
    let last = hi.min(s.len().saturating_sub(2));
    (first..=last)
        .filter(|&j| {
            s[j].is_finite() && s[j - 1].is_finite() && s[j + 1].is_finite() && s[j] > s[j - 1] && s[j] >= s[j + 1]
        })
        .collect()
}

fn window_indices(grid: &[f64], window: &GapWindow) -> Option<(usize, usize)> {
    let lo = grid.iter().position(|&w| window.contains(w))?;
    let hi = grid.iter().rposition(|&w| window.contains(w))?;
    Some((lo, hi))
}

/// Follows local maxima of S_out through the window column by column.
///
/// Each branch is continued by the candidate nearest its linearly extrapolated
/// position, provided the jump from its last point is at most
/// `continuity_factor` ω steps. Longer branches choose first. The branch
/// covering the largest part of the window is returned as the trace.
pub fn find_edge_ridge(map: &SpectralMap, window: GapWindow, continuity_factor: f64) -> Result<RidgeTrace> {
    let ws = &map.omega_grid;
    let (lo, hi) = window_indices(ws, &window).ok_or(Error::EmptyGapWindow { lo: window.lo, hi: window.hi })?;
    if hi < lo + 2 {
        return Err(Error::EmptyGapWindow { lo: window.lo, hi: window.hi });
    }
    let step = (ws[ws.len() - 1] - ws[0]) / (ws.len() - 1) as f64;
    let max_jump = continuity_factor * step * (1.0 + 1e-9);

    let mut finished: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut active: Vec<Vec<(usize, usize)>> = Vec::new();
    for ik in 0..map.k_grid.len() {
        let s: Vec<f64> = map.row(ik).iter().map(|p| p.s_out).collect();
        let cands = local_maxima(&s, lo, hi);
        let mut used = vec![false; cands.len()];
        let mut next = Vec::new();
        active.sort_by_key(|t| std::cmp::Reverse(t.len()));
        for mut t in active.drain(..) {
            let last = t[t.len() - 1].1 as f64;
            let pred = if t.len() >= 2 { 2.0 * last - t[t.len() - 2].1 as f64 } else { last };
            let pick = cands
                .iter()
                .enumerate()
                .filter(|&(c, &j)| !used[c] && (ws[j] - ws[last as usize]).abs() <= max_jump)
                .min_by(|a, b| (*a.1 as f64 - pred).abs().total_cmp(&(*b.1 as f64 - pred).abs()));
            match pick {
                Some((c, &j)) => {
                    used[c] = true;
                    t.push((ik, j));
                    next.push(t);
                }
                None => finished.push(t),
            }
        }
        for (c, &j) in cands.iter().enumerate() {
            if !used[c] {
                next.push(vec![(ik, j)]);
            }
        }
        active = next;
    }
    finished.extend(active);

    let to_points = |t: &[(usize, usize)]| -> Vec<RidgePoint> {
        let pts: Vec<(f64, f64)> = t.iter().map(|&(i, j)| (map.k_grid[i], ws[j])).collect();
        t.iter()
            .enumerate()
            .map(|(n, &(i, j))| {
                let (a, b) = match (n.checked_sub(1), (n + 1 < pts.len()).then_some(n + 1)) {
                    (Some(p), Some(q)) => (p, q),
                    (None, Some(q)) => (n, q),
                    (Some(p), None) => (p, n),
                    (None, None) => (n, n),
                };
                let slope = if a == b { f64::NAN } else { (pts[b].1 - pts[a].1) / (pts[b].0 - pts[a].0) };
                RidgePoint {
                    k: pts[n].0,
                    omega_peak: pts[n].1,
                    intensity: map.at(i, j).s_out,
                    local_slope: slope,
                    k_index: i,
                    omega_index: j,
                }
            })
            .collect()
    };

    let coverage_of = |t: &[(usize, usize)]| {
        let (mn, mx) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, j)| (a.min(ws[j]), b.max(ws[j])));
        (mx - mn) / window.height()
    };
    let brightness = |t: &[(usize, usize)]| t.iter().map(|&(i, j)| map.at(i, j).s_out).sum::<f64>();
    finished.sort_by_key(|t| t[0]);
    let best = finished.iter().max_by(|a, b| {
        coverage_of(a)
            .total_cmp(&coverage_of(b))
            .then(a.len().cmp(&b.len()))
            .then(brightness(a).total_cmp(&brightness(b)))
    });
    let (points, coverage) = match best {
        Some(t) => (to_points(t), coverage_of(t)),
        None => (Vec::new(), 0.0),
    };
    Ok(RidgeTrace {
        points,
        gap_window: window,
        spans_gap: coverage >= SPAN_FRACTION,
        coverage,
        branches: finished.iter().map(|t| to_points(t)).collect(),
    })
}

/// Midpoint of the gap in a reference map: the median of the k-averaged
/// inverse intensity over `[−Ω_z/2, Ω_z/2]`.
pub fn estimate_gap_center(reference: &SpectralMap, omega_z: f64) -> f64 {
    let half = 0.5 * omega_z.abs();
    let nk = reference.k_grid.len() as f64;
    let mut weights = Vec::new();
    for (iw, &w) in reference.omega_grid.iter().enumerate() {
        if w < -half || w > half {
            continue;
        }
        let mean: f64 = (0..reference.k_grid.len())
            .map(|ik| reference.at(ik, iw).s_out)
            .filter(|s| s.is_finite())
            .map(f64::abs)
            .sum::<f64>()
            / nk;
        if mean > 0.0 {
            weights.push((w, 1.0 / mean));
        }
    }
    let total: f64 = weights.iter().map(|x| x.1).sum();
    if weights.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for &(w, x) in &weights {
        acc += x;
        if acc >= 0.5 * total {
            return w;
        }
    }
    0.0
}

/// Twice the smallest frequency of the brightest positive-ω ridge over all k.
pub fn ridge_separation_gap(map: &SpectralMap) -> Option<f64> {
    let ws = &map.omega_grid;
    (0..map.k_grid.len())
        .filter_map(|ik| {
            let s: Vec<f64> = map.row(ik).iter().map(|p| p.s_out).collect();
            local_maxima(&s, 0, ws.len() - 1)
                .into_iter()
                .filter(|&j| ws[j] > 0.0)
                .max_by(|&a, &b| s[a].total_cmp(&s[b]))
                .map(|j| ws[j])
        })
        .min_by(f64::total_cmp)
        .map(|w| 2.0 * w)
}

//! Parameter sweeps in `t′` with eigenvector-overlap branch tracking and
//! event detection.
//!
//! Grid points are diagonalized in parallel; tracking and event detection
//! then run as one sequential pass over the ordered results, so the output
//! does not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::roots::{bisect_crossing, refine_encounter, Encounter};
use super::{eigendecompose, Mode};
use crate::error::{Error, Result};
use crate::lattice::LatticeFamily;
use crate::linalg::{overlap, CMatrix};

/// Minimum overlap accepted between consecutive modes of one branch.
pub const OVERLAP_FLOOR: f64 = 0.5;
/// `|Re E|` below which a mode counts as lying on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-8;
/// `|Im E|` below which the sign of `Im E` is not trusted.
pub(crate) const IM_NOISE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ZeroCrossing,
    ExceptionalPoint,
    AvoidedCrossing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub parameter: f64,
    pub branches: Vec<usize>,
    /// Eigenvalue gap at `parameter` (pair events only).
    pub gap: Option<f64>,
    /// Mutual eigenvector overlap at `parameter` (pair events only).
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTrajectory {
    pub parameter: String,
    pub grid: Vec<f64>,
    /// `branches[b][k]` is branch `b` at `grid[k]`.
    pub branches: Vec<Vec<Mode>>,
    pub events: Vec<Event>,
}

impl SweepTrajectory {
    /// Branch whose first point lies closest to `energy`.
    pub fn branch_near(&self, energy: Complex64) -> Option<usize> {
        (0..self.branches.len()).min_by(|&a, &b| {
            (self.branches[a][0].energy - energy)
                .norm()
                .total_cmp(&(self.branches[b][0].energy - energy).norm())
        })
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Precondition(
            "sweep grid needs at least two points".into(),
        ));
    }
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::Precondition("sweep grid must be finite".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(format!(
            "sweep grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Evenly spaced grid `lo, lo + step, …` ending exactly at `hi`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi <= lo {
        return Err(Error::Precondition(format!(
            "grid {lo}:{hi}:{step} must have lo < hi and step > 0"
        )));
    }
    let n = ((hi - lo) / step - 1e-9).ceil() as usize;
    let mut grid: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    grid.push(hi);
    Ok(grid)
}

/// Diagonalizes every grid point (in parallel) and tracks branches.
pub(crate) fn tracked<F: LatticeFamily + ?Sized>(
    family: &F,
    grid: &[f64],
) -> Result<Vec<Vec<Mode>>> {
    validate_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|&p| {
            let h = family.build(p)?.to_matrix();
            let modes = eigendecompose(&h)?;
            Ok((h, modes))
        })
        .collect::<Result<Vec<_>>>()?;
    track(grid, points)
}

fn track(grid: &[f64], points: Vec<(CMatrix, Vec<Mode>)>) -> Result<Vec<Vec<Mode>>> {
    let mut iter = points.into_iter();
    let (_, first) = iter.next().expect("grid has at least two points");
    let n = first.len();
    let mut branches: Vec<Vec<Mode>> = first
        .into_iter()
        .enumerate()
        .map(|(b, mut m)| {
            m.branch_id = Some(b);
            vec![m]
        })
        .collect();
    for (k, (h, mut current)) in iter.enumerate() {
        let previous: Vec<&Mode> = branches.iter().map(|br| br.last().unwrap()).collect();
        align_degenerate(&h, &previous, &mut current);
        let assignment = assign(&previous, &current);
        let mut slots: Vec<Option<Mode>> = current.into_iter().map(Some).collect();
        for b in 0..n {
            let (j, ov) = assignment[b];
            if ov < OVERLAP_FLOOR {
                return Err(Error::TrackingAmbiguity {
                    lo: grid[k],
                    hi: grid[k + 1],
                    overlap: ov,
                });
            }
            let mut m = slots[j].take().expect("assignment is a permutation");
            m.branch_id = Some(b);
            branches[b].push(m);
        }
    }
    Ok(branches)
}

/// Greedy maximal-overlap matching of previous branch heads onto current
/// modes; ties broken by eigenvalue proximity. Returns `(mode, overlap)`
/// per branch.
pub(crate) fn assign(previous: &[&Mode], current: &[Mode]) -> Vec<(usize, f64)> {
    let mut scored = Vec::with_capacity(previous.len() * current.len());
    for (b, p) in previous.iter().enumerate() {
        for (j, c) in current.iter().enumerate() {
            let ov = overlap(&p.vector, &c.vector);
            scored.push((ov, (p.energy - c.energy).norm(), b, j));
        }
    }
    // overlaps agreeing to ~1e-12 count as tied
    let key = |ov: f64| (ov * 1e12).round() as i64;
    scored.sort_by(|x, y| {
        key(y.0)
            .cmp(&key(x.0))
            .then(x.1.total_cmp(&y.1))
            .then(x.2.cmp(&y.2))
            .then(x.3.cmp(&y.3))
    });
    let mut result = vec![(usize::MAX, 0.0); previous.len()];
    let mut used = vec![false; current.len()];
    for (ov, _, b, j) in scored {
        if result[b].0 == usize::MAX && !used[j] {
            result[b] = (j, ov);
            used[j] = true;
        }
    }
    result
}

/// Within clusters of numerically identical eigenvalues the eigensolver's
/// basis is arbitrary; replace it by the projections of the previous branch
/// vectors so tracking sees a continuous basis.
fn align_degenerate(h: &CMatrix, previous: &[&Mode], current: &mut [Mode]) {
    let delta = 1e-10 * h.frobenius_norm().max(1.0);
    let mut visited = vec![false; current.len()];
    for i in 0..current.len() {
        if visited[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..current.len())
            .filter(|&j| !visited[j] && (current[j].energy - current[i].energy).norm() <= delta)
            .collect();
        cluster.iter().for_each(|&j| visited[j] = true);
        if cluster.len() < 2 {
            continue;
        }
        let Some(basis) = orthonormal(cluster.iter().map(|&j| current[j].vector.clone()).collect())
        else {
            // nearly parallel vectors: defective cluster, leave as is
            continue;
        };
        // previous vectors ordered by how much of them lies in the cluster
        let mut projected: Vec<(f64, usize, Vec<Complex64>)> = previous
            .iter()
            .enumerate()
            .map(|(b, p)| {
                let v = project(&basis, &p.vector);
                (norm(&v), b, v)
            })
            .collect();
        projected.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut aligned: Vec<Vec<Complex64>> = Vec::with_capacity(cluster.len());
        for (_, _, mut v) in projected {
            if aligned.len() == cluster.len() {
                break;
            }
            for a in &aligned {
                let c: Complex64 = a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(a).for_each(|(y, x)| *y -= c * x);
            }
            let nv = norm(&v);
            if nv > 0.1 {
                v.iter_mut().for_each(|y| *y /= nv);
                aligned.push(v);
            }
        }
        if aligned.len() != cluster.len() {
            continue;
        }
        for (&j, mut v) in cluster.iter().zip(aligned) {
            crate::linalg::normalize_with_phase(&mut v);
            let hv = h.mul_vec(&v);
            let energy: Complex64 = v.iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
            current[j] = Mode {
                energy,
                vector: v,
                branch_id: None,
            };
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn orthonormal(vectors: Vec<Vec<Complex64>>) -> Option<Vec<Vec<Complex64>>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for b in &basis {
            let c: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(b).for_each(|(y, x)| *y -= c * x);
        }
        let nv = norm(&v);
        if nv < 0.1 {
            return None;
        }
        v.iter_mut().for_each(|y| *y /= nv);
        basis.push(v);
    }
    Some(basis)
}

fn project(basis: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for b in basis {
        let c: Complex64 = b.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
    }
    out
}

pub(crate) fn on_axis(e: Complex64) -> bool {
    e.re.abs() <= AXIS_TOL
}

/// Tracks eigenvalue branches across `grid` and detects zero crossings,
/// exceptional points and avoided crossings.
pub fn sweep<F: LatticeFamily + ?Sized>(family: &F, grid: &[f64]) -> Result<SweepTrajectory> {
    let branches = tracked(family, grid)?;
    let events = detect_events(family, grid, &branches)?;
    Ok(SweepTrajectory {
        parameter: "t_prime".into(),
        grid: grid.to_vec(),
        branches,
        events,
    })
}

fn detect_events<F: LatticeFamily + ?Sized>(
    family: &F,
    grid: &[f64],
    branches: &[Vec<Mode>],
) -> Result<Vec<Event>> {
    let nk = grid.len();
    let mut events = Vec::new();

    for (b, br) in branches.iter().enumerate() {
        for k in 0..nk - 1 {
            let (e0, e1) = (br[k].energy, br[k + 1].energy);
            if on_axis(e0)
                && on_axis(e1)
                && e0.im.abs() > IM_NOISE
                && e1.im.abs() > IM_NOISE
                && e0.im.signum() != e1.im.signum()
            {
                match bisect_crossing(
                    family,
                    (grid[k], &br[k]),
                    (grid[k + 1], &br[k + 1]),
                    AXIS_TOL,
                ) {
                    Ok((p, _)) => events.push(Event {
                        kind: EventKind::ZeroCrossing,
                        parameter: p,
                        branches: vec![b],
                        gap: None,
                        overlap: None,
                    }),
                    Err(Error::EpInterference { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }

    for a in 0..branches.len() {
        for b in (a + 1)..branches.len() {
            let gaps: Vec<f64> = (0..nk)
                .map(|k| (branches[a][k].energy - branches[b][k].energy).norm())
                .collect();
            for k in 1..nk.saturating_sub(1) {
                if !(gaps[k] < gaps[k - 1] && gaps[k] <= gaps[k + 1]) {
                    continue;
                }
                let mutual = overlap(&branches[a][k].vector, &branches[b][k].vector);
                let exchanged = exchanges_character(branches, &gaps, a, b, k);
                if mutual < 0.5 && !exchanged {
                    continue;
                }
                let refs = [&branches[a][k], &branches[b][k]];
                match refine_encounter(family, (grid[k - 1], grid[k + 1]), refs)? {
                    Encounter::Exceptional {
                        t_prime,
                        gap,
                        overlap,
                        ..
                    } => events.push(Event {
                        kind: EventKind::ExceptionalPoint,
                        parameter: t_prime,
                        branches: vec![a, b],
                        gap: Some(gap),
                        overlap: Some(overlap),
                    }),
                    Encounter::Avoided {
                        t_prime,
                        gap,
                        overlap,
                    } if exchanged && interior(t_prime, (grid[k - 1], grid[k + 1])) => {
                        events.push(Event {
                            kind: EventKind::AvoidedCrossing,
                            parameter: t_prime,
                            branches: vec![a, b],
                            gap: Some(gap),
                            overlap: Some(overlap),
                        })
                    }
                    Encounter::Avoided { .. } => {}
                }
            }
        }
    }

    events.sort_by(|x, y| {
        x.parameter
            .total_cmp(&y.parameter)
            .then(x.kind.cmp(&y.kind))
            .then(x.branches.cmp(&y.branches))
    });
    Ok(events)
}

/// A minimizer pinned to the window edge is a boundary artifact of the
/// grid, not a local minimum.
fn interior(p: f64, window: (f64, f64)) -> bool {
    let margin = 1e-6 * (window.1 - window.0);
    p > window.0 + margin && p < window.1 - margin
}

/// Whether branches `a` and `b` swap eigenvector character across the
/// monotone gap window around the local minimum `k`.
fn exchanges_character(branches: &[Vec<Mode>], gaps: &[f64], a: usize, b: usize, k: usize) -> bool {
    let mut left = k;
    while left > 0 && gaps[left - 1] > gaps[left] {
        left -= 1;
    }
    let mut right = k;
    while right + 1 < gaps.len() && gaps[right + 1] >= gaps[right] {
        right += 1;
    }
    let (a0, b0) = (&branches[a][left].vector, &branches[b][left].vector);
    let (a1, b1) = (&branches[a][right].vector, &branches[b][right].vector);
    overlap(a0, b1) * overlap(b0, a1) > overlap(a0, a1) * overlap(b0, b1)
}

//! Zero-mode root finding in `t′` and refinement of close eigenvalue
//! encounters into exceptional points or avoided crossings.

use num_complex::Complex64;
use serde::Serialize;

use super::sweep::{assign, on_axis, tracked, IM_NOISE};
use super::{eigendecompose, Mode};
use crate::error::{Error, Result};
use crate::lattice::LatticeFamily;
use crate::linalg::{normalize_with_phase, overlap, CMatrix};

/// Coalescence thresholds for certifying an exceptional point.
pub const EP_GAP: f64 = 1e-4;
pub const EP_OVERLAP: f64 = 0.99;

/// Offset from the minimizer at which the post-coalescence real parts are read.
const SPLIT_PROBE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct ZeroMode {
    pub t_prime: f64,
    pub mode: Mode,
    pub branch_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encounter {
    Exceptional {
        t_prime: f64,
        gap: f64,
        overlap: f64,
        /// Mean `|Re E|` of the pair just below and just above `t_prime`
        /// (zero when the pair sits on a common vertical line).
        re_before: f64,
        re_after: f64,
    },
    Avoided {
        t_prime: f64,
        gap: f64,
        overlap: f64,
    },
}

impl Encounter {
    pub fn t_prime(&self) -> f64 {
        match *self {
            Encounter::Exceptional { t_prime, .. } | Encounter::Avoided { t_prime, .. } => t_prime,
        }
    }

    pub fn gap(&self) -> f64 {
        match *self {
            Encounter::Exceptional { gap, .. } | Encounter::Avoided { gap, .. } => gap,
        }
    }
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Precondition(format!(
            "bracket [{lo}, {hi}] must have lo < hi"
        )));
    }
    Ok(())
}

fn fine_grid(bracket: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = bracket;
    let n = (((hi - lo) / 0.0025).ceil() as usize).max(40);
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect()
}

fn modes_at<F: LatticeFamily + ?Sized>(family: &F, p: f64) -> Result<(CMatrix, Vec<Mode>)> {
    let h = family.build(p)?.to_matrix();
    let modes = eigendecompose(&h)?;
    Ok((h, modes))
}

/// Every zero crossing of a tracked branch inside `bracket`, ordered by `t′`.
pub fn zero_crossings<F: LatticeFamily + ?Sized>(
    family: &F,
    bracket: (f64, f64),
    tol_e: f64,
) -> Result<Vec<ZeroMode>> {
    check_bracket(bracket)?;
    let grid = fine_grid(bracket);
    let branches = tracked(family, &grid)?;
    let mut found = Vec::new();
    let mut interference = None;
    for (b, br) in branches.iter().enumerate() {
        for k in 0..grid.len() - 1 {
            let (e0, e1) = (br[k].energy, br[k + 1].energy);
            if e0.im.abs() <= IM_NOISE
                || e1.im.abs() <= IM_NOISE
                || e0.im.signum() == e1.im.signum()
            {
                continue;
            }
            if !(on_axis(e0) && on_axis(e1)) {
                // sign change of Im E off the axis: a complex pair passing by
                if e0.re.abs().min(e1.re.abs()) <= tol_e.max(1e-3) {
                    interference.get_or_insert((grid[k], e0.re.abs().max(e1.re.abs())));
                }
                continue;
            }
            match bisect_crossing(family, (grid[k], &br[k]), (grid[k + 1], &br[k + 1]), tol_e) {
                Ok((t_prime, mode)) => found.push(ZeroMode {
                    t_prime,
                    mode: Mode {
                        branch_id: Some(b),
                        ..mode
                    },
                    branch_id: b,
                }),
                Err(Error::EpInterference { at, re }) => {
                    interference.get_or_insert((at, re));
                }
                Err(e) => return Err(e),
            }
        }
    }
    if found.is_empty() {
        return Err(match interference {
            Some((at, re)) => Error::EpInterference { at, re },
            None => Error::Bracket {
                lo: bracket.0,
                hi: bracket.1,
            },
        });
    }
    found.sort_by(|a, b| {
        a.t_prime
            .total_cmp(&b.t_prime)
            .then(a.branch_id.cmp(&b.branch_id))
    });
    Ok(found)
}

/// The unique zero mode inside `bracket`.
pub fn find_zero_mode<F: LatticeFamily + ?Sized>(
    family: &F,
    bracket: (f64, f64),
    tol_e: f64,
) -> Result<ZeroMode> {
    let mut all = zero_crossings(family, bracket, tol_e)?;
    if all.len() > 1 {
        let at: Vec<String> = all.iter().map(|z| format!("{:.6}", z.t_prime)).collect();
        return Err(Error::Precondition(format!(
            "bracket [{}, {}] holds {} zero crossings (t' = {}); narrow it",
            bracket.0,
            bracket.1,
            all.len(),
            at.join(", ")
        )));
    }
    Ok(all.remove(0))
}

/// Picks the mode at `p` continuing from the two bracketing modes.
fn continue_mode(modes: &[Mode], a: &Mode, b: &Mode) -> usize {
    let mid = 0.5 * (a.energy + b.energy);
    (0..modes.len())
        .max_by(|&i, &j| {
            let si = overlap(&modes[i].vector, &a.vector) + overlap(&modes[i].vector, &b.vector);
            let sj = overlap(&modes[j].vector, &a.vector) + overlap(&modes[j].vector, &b.vector);
            si.total_cmp(&sj).then(
                (modes[j].energy - mid)
                    .norm()
                    .total_cmp(&(modes[i].energy - mid).norm()),
            )
        })
        .expect("nonempty spectrum")
}

fn separation(modes: &[Mode], i: usize) -> f64 {
    modes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, m)| (m.energy - modes[i].energy).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Bisects `Im E = 0` between two on-axis samples of one branch of opposite
/// `Im` sign. Returns the root and the zero mode there.
pub(crate) fn bisect_crossing<F: LatticeFamily + ?Sized>(
    family: &F,
    lo: (f64, &Mode),
    hi: (f64, &Mode),
    tol_e: f64,
) -> Result<(f64, Mode)> {
    let (mut a, mut ma) = (lo.0, lo.1.clone());
    let (mut b, mut mb) = (hi.0, hi.1.clone());
    let sign_a = ma.energy.im.signum();
    let mut reference: Option<Mode> = None;
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let (h, modes) = modes_at(family, m)?;
        let i = continue_mode(&modes, &ma, &mb);
        let mode = modes[i].clone();
        if mode.energy.re.abs() > tol_e {
            return Err(Error::EpInterference {
                at: m,
                re: mode.energy.re,
            });
        }
        if separation(&modes, i) >= 1e-6 * h.frobenius_norm().max(1.0) {
            reference = Some(mode.clone());
        }
        if mode.energy.im == 0.0 {
            a = m;
            b = m;
            ma = mode.clone();
            mb = mode;
            break;
        }
        if mode.energy.im.signum() == sign_a {
            a = m;
            ma = mode;
        } else {
            b = m;
            mb = mode;
        }
    }
    let (p, mode) = if ma.energy.norm() <= mb.energy.norm() {
        (a, ma)
    } else {
        (b, mb)
    };
    let (h, modes) = modes_at(family, p)?;
    let mode = match reference {
        Some(r) => resolve_cluster(&h, &modes, &mode, &r).unwrap_or(mode),
        None => mode,
    };
    if mode.energy.norm() > tol_e {
        return Err(Error::NumericalFailure {
            rows: h.dim(),
            cols: h.dim(),
            residual: mode.energy.norm(),
        });
    }
    Ok((p, mode))
}

/// When the root is degenerate with other eigenvalues (modes that stay at
/// `E = 0` for every `t′`), the solver's basis of the null space is
/// arbitrary. The branch's own limit is recovered by projecting a nearby,
/// well-separated sample of the branch onto that eigenspace.
fn resolve_cluster(h: &CMatrix, modes: &[Mode], chosen: &Mode, reference: &Mode) -> Option<Mode> {
    let radius = 1e-6 * h.frobenius_norm().max(1.0);
    let cluster: Vec<&Mode> = modes
        .iter()
        .filter(|m| (m.energy - chosen.energy).norm() <= radius)
        .collect();
    if cluster.len() < 2 {
        return None;
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for m in cluster {
        let mut v = m.vector.clone();
        for q in &basis {
            let c: Complex64 = q.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(q).for_each(|(y, x)| *y -= c * x);
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv < 0.1 {
            return None;
        }
        v.iter_mut().for_each(|y| *y /= nv);
        basis.push(v);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); h.dim()];
    for q in &basis {
        let c: Complex64 = q
            .iter()
            .zip(&reference.vector)
            .map(|(x, y)| x.conj() * y)
            .sum();
        v.iter_mut().zip(q).for_each(|(o, x)| *o += c * x);
    }
    normalize_with_phase(&mut v);
    let hv = h.mul_vec(&v);
    let energy: Complex64 = v.iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
    (h.residual(energy, &v) <= super::RESIDUAL_BOUND * h.frobenius_norm()).then_some(Mode {
        energy,
        vector: v,
        branch_id: chosen.branch_id,
    })
}

/// The two modes at `p` continuing `refs`.
fn pair_at<F: LatticeFamily + ?Sized>(
    family: &F,
    p: f64,
    refs: [&Mode; 2],
) -> Result<(Mode, Mode)> {
    let (_, modes) = modes_at(family, p)?;
    let a = assign(&refs, &modes);
    Ok((modes[a[0].0].clone(), modes[a[1].0].clone()))
}

fn mean_split(pair: &(Mode, Mode)) -> f64 {
    let (x, y) = (pair.0.energy.re, pair.1.energy.re);
    if x * y < 0.0 {
        0.5 * (x.abs() + y.abs())
    } else {
        0.0
    }
}

/// Golden-section minimization of the gap of the pair continuing `refs`
/// within `window`, then classification of the minimizer.
pub(crate) fn refine_encounter<F: LatticeFamily + ?Sized>(
    family: &F,
    window: (f64, f64),
    refs: [&Mode; 2],
) -> Result<Encounter> {
    let gap = |p: f64| -> Result<f64> {
        let (x, y) = pair_at(family, p, refs)?;
        Ok((x.energy - y.energy).norm())
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = window;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (gap(c)?, gap(d)?);
    while b - a > 1e-12 * a.abs().max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = gap(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = gap(d)?;
        }
    }
    let p = if fc <= fd { c } else { d };
    let pair = pair_at(family, p, refs)?;
    let g = (pair.0.energy - pair.1.energy).norm();
    let ov = overlap(&pair.0.vector, &pair.1.vector);
    if g <= EP_GAP && ov >= EP_OVERLAP {
        let before = pair_at(family, p - SPLIT_PROBE, [&pair.0, &pair.1])?;
        let after = pair_at(family, p + SPLIT_PROBE, [&pair.0, &pair.1])?;
        Ok(Encounter::Exceptional {
            t_prime: p,
            gap: g,
            overlap: ov,
            re_before: mean_split(&before),
            re_after: mean_split(&after),
        })
    } else {
        Ok(Encounter::Avoided {
            t_prime: p,
            gap: g,
            overlap: ov,
        })
    }
}

/// Closest encounter inside `bracket` of the two branches starting nearest
/// to `seeds` at the lower end.
pub fn find_encounter<F: LatticeFamily + ?Sized>(
    family: &F,
    bracket: (f64, f64),
    seeds: (Complex64, Complex64),
) -> Result<Encounter> {
    check_bracket(bracket)?;
    let grid = fine_grid(bracket);
    let branches = tracked(family, &grid)?;
    let nearest = |e: Complex64, skip: Option<usize>| {
        (0..branches.len())
            .filter(|&b| Some(b) != skip)
            .min_by(|&x, &y| {
                (branches[x][0].energy - e)
                    .norm()
                    .total_cmp(&(branches[y][0].energy - e).norm())
            })
            .expect("at least two branches")
    };
    let a = nearest(seeds.0, None);
    let b = nearest(seeds.1, Some(a));
    let k = minimizing_index(&branches, a, b).ok_or(Error::Bracket {
        lo: bracket.0,
        hi: bracket.1,
    })?;
    let window = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    refine_encounter(family, window, [&branches[a][k], &branches[b][k]])
}

fn minimizing_index(branches: &[Vec<Mode>], a: usize, b: usize) -> Option<usize> {
    let gaps: Vec<f64> = (0..branches[a].len())
        .map(|k| (branches[a][k].energy - branches[b][k].energy).norm())
        .collect();
    let k = (0..gaps.len()).min_by(|&x, &y| gaps[x].total_cmp(&gaps[y]))?;
    let spread = gaps.iter().cloned().fold(0.0, f64::max) - gaps[k];
    (spread > 1e-9).then_some(k)
}

/// Exceptional point inside `bracket`: the pair with the smallest interior
/// gap minimum is refined and must pass the coalescence test.
pub fn find_exceptional_point<F: LatticeFamily + ?Sized>(
    family: &F,
    bracket: (f64, f64),
) -> Result<Encounter> {
    check_bracket(bracket)?;
    let grid = fine_grid(bracket);
    let branches = tracked(family, &grid)?;
    let nk = grid.len();
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for a in 0..branches.len() {
        for b in (a + 1)..branches.len() {
            let Some(k) = minimizing_index(&branches, a, b) else {
                continue;
            };
            if k == 0 || k == nk - 1 {
                continue;
            }
            let g = (branches[a][k].energy - branches[b][k].energy).norm();
            if best.is_none_or(|(bg, ..)| g < bg) {
                best = Some((g, a, b, k));
            }
        }
    }
    let (_, a, b, k) = best.ok_or(Error::Bracket {
        lo: bracket.0,
        hi: bracket.1,
    })?;
    let enc = refine_encounter(
        family,
        (grid[k - 1], grid[k + 1]),
        [&branches[a][k], &branches[b][k]],
    )?;
    match enc {
        Encounter::Exceptional { .. } => Ok(enc),
        Encounter::Avoided { t_prime, gap, overlap } => Err(Error::Precondition(format!(
            "closest encounter at t' = {t_prime} is not an exceptional point (gap {gap:.3e}, overlap {overlap:.4})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Bond, LatticeGraph, Region};

    /// Gain/loss dimer `[[iγ, t'], [t', −iγ]]` with γ = 1: EP at t' = 1.
    fn dimer(t_prime: f64) -> Result<LatticeGraph> {
        LatticeGraph::new(
            1,
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
            vec![Region::Reservoir; 2],
            vec![Bond {
                i: 1,
                j: 2,
                amplitude: t_prime,
            }],
        )
    }

    /// Lossy site with loss `1 − t'` coupled weakly to a lossier partner.
    fn crossing(t_prime: f64) -> Result<LatticeGraph> {
        LatticeGraph::new(
            1,
            vec![
                Complex64::new(0.0, t_prime - 1.0),
                Complex64::new(0.0, -3.0),
            ],
            vec![Region::System1, Region::Reservoir],
            vec![Bond {
                i: 1,
                j: 2,
                amplitude: 0.1,
            }],
        )
    }

    #[test]
    fn dimer_exceptional_point() {
        let enc = find_exceptional_point(&dimer, (0.8, 1.2)).unwrap();
        let Encounter::Exceptional {
            t_prime,
            gap,
            overlap,
            re_before,
            re_after,
        } = enc
        else {
            panic!("expected EP, got {enc:?}");
        };
        assert!((t_prime - 1.0).abs() < 1e-8, "{t_prime}");
        assert!(gap <= EP_GAP);
        assert!(overlap >= EP_OVERLAP);
        assert_eq!(re_before, 0.0);
        // E = ±sqrt(t'^2 - 1)
        assert!((re_after - ((t_prime + SPLIT_PROBE).powi(2) - 1.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zero_crossing_of_detuned_site() {
        let z = find_zero_mode(&crossing, (0.5, 1.5), 1e-8).unwrap();
        // det H = 3(t' - 1) - 0.01
        assert!(
            (z.t_prime - (1.0 + 0.01 / 3.0)).abs() < 1e-12,
            "{}",
            z.t_prime
        );
        assert!(z.mode.energy.norm() <= 1e-8);
    }

    #[test]
    fn bracket_errors() {
        assert!(matches!(
            find_zero_mode(&crossing, (1.2, 1.5), 1e-8),
            Err(Error::Bracket { .. })
        ));
        assert!(matches!(
            find_zero_mode(&crossing, (1.5, 1.2), 1e-8),
            Err(Error::Precondition(_))
        ));
    }
}

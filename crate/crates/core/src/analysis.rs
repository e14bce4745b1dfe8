//! Mode diagnostics: Lucas recurrence residuals, linear-localization fits,
//! constant-intensity and phase statistics, energy fluxes and the local
//! continuity balance.
//!
//! Residuals are normalized by the mode's largest amplitude (or intensity)
//! over the analyzed sites. Sublattices are the even and odd global labels.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGraph, Region};
use crate::spectral::Mode;

/// Relative tolerance for constant-intensity and phase-flatness verdicts.
pub const FLATNESS_TOL: f64 = 1e-6;

/// `α = γ²/(2t²) − 1`.
pub fn alpha_from_gamma(gamma: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    Ok(gamma * gamma / (2.0 * t * t) - 1.0)
}

fn amplitudes(mode: &Mode, lattice: &LatticeGraph, sites: &[usize]) -> Result<Vec<Complex64>> {
    if mode.vector.len() != lattice.n_sites() {
        return Err(Error::Domain(format!(
            "mode has {} components, lattice has {} sites",
            mode.vector.len(),
            lattice.n_sites()
        )));
    }
    sites
        .iter()
        .map(|&s| {
            lattice
                .index_of(s)
                .map(|k| mode.vector[k])
                .ok_or_else(|| Error::Domain(format!("site {s} is not on the lattice")))
        })
        .collect()
}

fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max_n |Ψ_n − 2αΨ_{n−2} + Ψ_{n−4}| / max |Ψ|` over runs of consecutive
/// labels in `sites`.
pub fn recurrence_residual(
    mode: &Mode,
    lattice: &LatticeGraph,
    sites: &[usize],
    alpha: f64,
) -> Result<f64> {
    let psi = amplitudes(mode, lattice, sites)?;
    let scale = max_abs(&psi);
    let mut worst = 0.0f64;
    let mut terms = 0;
    for k in 4..sites.len() {
        if sites[k] != sites[k - 4] + 4 || sites[k - 2] != sites[k - 4] + 2 {
            continue;
        }
        terms += 1;
        worst = worst.max((psi[k] - 2.0 * alpha * psi[k - 2] + psi[k - 4]).norm());
    }
    if terms == 0 {
        return Err(Error::Domain(
            "recurrence needs at least 5 consecutive sites".into(),
        ));
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation from the line over the sites, divided by `max |Ψ|`.
    pub max_abs_residual: f64,
}

/// Least-squares line of `|Ψ_n|` against the site label `n`.
pub fn linear_fit(mode: &Mode, lattice: &LatticeGraph, sites: &[usize]) -> Result<LinearFit> {
    if sites.len() < 3 {
        return Err(Error::Domain(format!(
            "linear fit needs 3 sites, got {}",
            sites.len()
        )));
    }
    let psi = amplitudes(mode, lattice, sites)?;
    let y: Vec<f64> = psi.iter().map(|z| z.norm()).collect();
    let x: Vec<f64> = sites.iter().map(|&s| s as f64).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let scale = y.iter().cloned().fold(0.0, f64::max);
    let worst = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit {
        slope,
        intercept,
        max_abs_residual: if scale > 0.0 { worst / scale } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityStats {
    pub mean: f64,
    pub relative_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sublattice {
    Even,
    Odd,
}

impl Sublattice {
    pub fn of(label: usize) -> Self {
        if label.is_multiple_of(2) {
            Sublattice::Even
        } else {
            Sublattice::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub sublattice: Sublattice,
    /// Argument of the mean resultant vector.
    pub circular_mean: f64,
    /// Largest angular distance of a phase from the circular mean.
    pub circular_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseStep {
    pub n: usize,
    pub m: usize,
    /// `arg Ψ_n − arg Ψ_m`, wrapped to `(−π, π]`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityMetrics {
    pub intensity: IntensityStats,
    pub phases: Vec<PhaseStats>,
    /// One entry per bonded pair of consecutive labels.
    pub neighbor_phase_differences: Vec<PhaseStep>,
}

impl IntensityMetrics {
    pub fn max_phase_spread(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| p.circular_spread)
            .fold(0.0, f64::max)
    }

    /// Whether the mode is flat in intensity and phase within `tol`.
    pub fn is_constant_intensity(&self, tol: f64) -> bool {
        self.intensity.relative_std <= tol && self.max_phase_spread() <= tol
    }
}

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

pub fn constant_intensity_metrics(
    mode: &Mode,
    lattice: &LatticeGraph,
    sites: &[usize],
) -> Result<IntensityMetrics> {
    if sites.is_empty() {
        return Err(Error::Domain("no sites to analyze".into()));
    }
    let psi = amplitudes(mode, lattice, sites)?;
    let intens: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let n = intens.len() as f64;
    let mean = intens.iter().sum::<f64>() / n;
    let var = intens.iter().map(|i| (i - mean).powi(2)).sum::<f64>() / n;
    let relative_std = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };

    let mut phases = Vec::new();
    for sub in [Sublattice::Even, Sublattice::Odd] {
        let members: Vec<Complex64> = sites
            .iter()
            .zip(&psi)
            .filter(|(s, _)| Sublattice::of(**s) == sub)
            .map(|(_, z)| *z)
            .collect();
        if members.is_empty() {
            continue;
        }
        let resultant: Complex64 = members
            .iter()
            .filter(|z| z.norm() > 0.0)
            .map(|z| z / z.norm())
            .sum();
        let circular_mean = resultant.arg();
        let circular_spread = members
            .iter()
            .map(|z| wrap_angle(z.arg() - circular_mean).abs())
            .fold(0.0, f64::max);
        phases.push(PhaseStats {
            sublattice: sub,
            circular_mean,
            circular_spread,
        });
    }

    let neighbor_phase_differences = sites
        .windows(2)
        .zip(psi.windows(2))
        .filter(|(s, _)| s[1] == s[0] + 1 && lattice.bond_amplitude(s[0], s[1]).is_some())
        .map(|(s, z)| PhaseStep {
            n: s[0],
            m: s[1],
            difference: wrap_angle(z[0].arg() - z[1].arg()),
        })
        .collect();

    Ok(IntensityMetrics {
        intensity: IntensityStats { mean, relative_std },
        phases,
        neighbor_phase_differences,
    })
}

/// Whether every neighbor step is `±π/2` within `tol`, with the gain site
/// (positive `Im V`) leading.
pub fn gain_leads(metrics: &IntensityMetrics, lattice: &LatticeGraph, tol: f64) -> bool {
    metrics.neighbor_phase_differences.iter().all(|step| {
        let (gn, gm) = (lattice.onsite(step.n).im, lattice.onsite(step.m).im);
        let expected = if gn > gm { FRAC_PI_2 } else { -FRAC_PI_2 };
        gn != gm && (step.difference - expected).abs() <= tol
    })
}

/// Energy flux `J_{n,m} = i·t_{nm}·Ψ_m*·Ψ_n + c.c.`; negative when power
/// flows from `n` to `m`.
pub fn edge_flux(mode: &Mode, lattice: &LatticeGraph, n: usize, m: usize) -> Result<f64> {
    let t = lattice
        .bond_amplitude(n, m)
        .ok_or_else(|| Error::Domain(format!("({n}, {m}) is not an edge")))?;
    let psi = amplitudes(mode, lattice, &[n, m])?;
    Ok(flux(t, psi[0], psi[1]))
}

fn flux(t: f64, psi_n: Complex64, psi_m: Complex64) -> f64 {
    2.0 * t * (psi_n.conj() * psi_m).im
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlux {
    pub n: usize,
    pub m: usize,
    pub j: f64,
}

/// Flux on every bond, oriented `i → j` as stored in the lattice.
pub fn all_fluxes(mode: &Mode, lattice: &LatticeGraph) -> Result<Vec<EdgeFlux>> {
    lattice
        .bonds()
        .iter()
        .map(|b| {
            Ok(EdgeFlux {
                n: b.i,
                m: b.j,
                j: edge_flux(mode, lattice, b.i, b.j)?,
            })
        })
        .collect()
}

/// Per-site `|2·Im E·|Ψ_n|² − 2·Im V_n·|Ψ_n|² − Σ_m J_{n,m}|`, in lattice
/// order. Vanishes for exact eigenpairs.
pub fn continuity_check(mode: &Mode, lattice: &LatticeGraph) -> Vec<f64> {
    let psi = &mode.vector;
    lattice
        .labels()
        .enumerate()
        .map(|(k, n)| {
            let i = psi[k].norm_sqr();
            let out: f64 = lattice
                .neighbors(n)
                .into_iter()
                .map(|(m, t)| flux(t, psi[k], psi[m - lattice.first_site()]))
                .sum();
            (2.0 * mode.energy.im * i - 2.0 * lattice.onsite(n).im * i - out).abs()
        })
        .collect()
}

/// `|Ψ|` at the reservoir site bonded to system 1 over `|Ψ|` at that system site.
pub fn edge_amplitude_ratio(mode: &Mode, lattice: &LatticeGraph) -> Result<f64> {
    let reservoir = lattice.sites_in(Region::Reservoir);
    let metrics = constant_intensity_metrics(mode, lattice, &reservoir)?;
    if !metrics.is_constant_intensity(FLATNESS_TOL) {
        return Err(Error::Precondition(format!(
            "mode is not constant-intensity (relative std {:.3e}, phase spread {:.3e})",
            metrics.intensity.relative_std,
            metrics.max_phase_spread()
        )));
    }
    let (res_site, sys_site) = reservoir
        .iter()
        .find_map(|&r| {
            lattice
                .neighbors(r)
                .into_iter()
                .find(|(s, _)| lattice.region(*s) == Region::System1)
                .map(|(s, _)| (r, s))
        })
        .ok_or_else(|| Error::Precondition("reservoir is not bonded to system 1".into()))?;
    let psi = amplitudes(mode, lattice, &[res_site, sys_site])?;
    Ok(psi[0].norm() / psi[1].norm())
}

/// Mean of the two reservoir sublattice averages of `Im V`.
pub fn average_condition(lattice: &LatticeGraph) -> Result<f64> {
    let reservoir = lattice.sites_in(Region::Reservoir);
    let mean = |sub: Sublattice| {
        let v: Vec<f64> = reservoir
            .iter()
            .filter(|&&s| Sublattice::of(s) == sub)
            .map(|&s| lattice.onsite(s).im)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    match (mean(Sublattice::Even), mean(Sublattice::Odd)) {
        (Some(a), Some(b)) => Ok(0.5 * (a + b)),
        _ => Err(Error::Domain(
            "reservoir needs sites on both sublattices".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit {
    pub sublattice: Sublattice,
    pub sites: Vec<usize>,
    pub fit: LinearFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub t_prime: Option<f64>,
    pub re_energy: f64,
    pub im_energy: f64,
    pub alpha: f64,
    pub recurrence_residual: f64,
    pub sublattice_fits: Vec<SegmentFit>,
    pub intensity_stats: IntensityStats,
    pub phase_stats: Vec<PhaseStats>,
    pub neighbor_phase_differences: Vec<PhaseStep>,
    pub fluxes: Vec<EdgeFlux>,
    pub continuity_residuals: Vec<f64>,
    pub max_continuity_residual: f64,
    pub average_condition: f64,
    /// Present for constant-intensity modes only.
    pub edge_amplitude_ratio: Option<f64>,
}

/// Reservoir segments the linear fits run over: the whole reservoir, or each
/// half (sharing the central site) on a mirror-symmetric bridge.
pub fn fit_segments(lattice: &LatticeGraph) -> Vec<Vec<usize>> {
    let reservoir = lattice.sites_in(Region::Reservoir);
    if reservoir.len() < 3
        || lattice.sites_in(Region::System2).is_empty()
        || !lattice.is_mirror_symmetric(0.0)
    {
        return vec![reservoir];
    }
    let c = reservoir.len() / 2;
    vec![reservoir[..=c].to_vec(), reservoir[c..].to_vec()]
}

/// Full diagnostic report for one mode of a lattice whose reservoir has
/// gain/loss `±iγ` and coupling `t`.
pub fn analyze(
    mode: &Mode,
    lattice: &LatticeGraph,
    t_prime: Option<f64>,
    gamma: f64,
    t: f64,
) -> Result<AnalysisReport> {
    let alpha = alpha_from_gamma(gamma, t)?;
    let reservoir = lattice.sites_in(Region::Reservoir);
    let recurrence = recurrence_residual(mode, lattice, &reservoir, alpha)?;
    let mut sublattice_fits = Vec::new();
    for segment in fit_segments(lattice) {
        for sub in [Sublattice::Even, Sublattice::Odd] {
            let sites: Vec<usize> = segment
                .iter()
                .copied()
                .filter(|&s| Sublattice::of(s) == sub)
                .collect();
            if sites.len() >= 3 {
                let fit = linear_fit(mode, lattice, &sites)?;
                sublattice_fits.push(SegmentFit {
                    sublattice: sub,
                    sites,
                    fit,
                });
            }
        }
    }
    let metrics = constant_intensity_metrics(mode, lattice, &reservoir)?;
    let continuity = continuity_check(mode, lattice);
    let edge_ratio = if metrics.is_constant_intensity(FLATNESS_TOL) {
        edge_amplitude_ratio(mode, lattice).ok()
    } else {
        None
    };
    Ok(AnalysisReport {
        t_prime,
        re_energy: mode.energy.re,
        im_energy: mode.energy.im,
        alpha,
        recurrence_residual: recurrence,
        sublattice_fits,
        intensity_stats: metrics.intensity,
        phase_stats: metrics.phases,
        neighbor_phase_differences: metrics.neighbor_phase_differences,
        fluxes: all_fluxes(mode, lattice)?,
        max_continuity_residual: continuity.iter().cloned().fold(0.0, f64::max),
        continuity_residuals: continuity,
        average_condition: average_condition(lattice)?,
        edge_amplitude_ratio: edge_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_reservoir, Preset, Variant};
    use crate::spectral::lattice_modes;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mode_of(vector: Vec<Complex64>, energy: Complex64) -> Mode {
        Mode {
            energy,
            vector,
            branch_id: None,
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_from_gamma(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(alpha_from_gamma(0.0, 1.0).unwrap(), -1.0);
        assert!(alpha_from_gamma(2f64.sqrt(), 1.0).unwrap().abs() < 1e-15);
        assert!(matches!(alpha_from_gamma(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_sublattice_satisfies_recurrence() {
        let g = build_reservoir(10, 1.0, 2.0, 10).unwrap();
        // Ψ_n = n on even sites, zero on odd ones
        let v: Vec<Complex64> = g
            .labels()
            .map(|n| c(if n % 2 == 0 { n as f64 } else { 0.0 }, 0.0))
            .collect();
        let sites: Vec<usize> = g.labels().collect();
        let m = mode_of(v, c(0.0, 0.0));
        assert_eq!(recurrence_residual(&m, &g, &sites, 1.0).unwrap(), 0.0);
        assert!(recurrence_residual(&m, &g, &sites[..4], 1.0).is_err());
        let even: Vec<usize> = sites.iter().copied().filter(|s| s % 2 == 0).collect();
        let fit = linear_fit(&m, &g, &even).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-14 && fit.max_abs_residual < 1e-14);
    }

    #[test]
    fn constant_vector_fit_and_flux() {
        let g = build_reservoir(6, 1.0, 2.0, 1).unwrap();
        let m = mode_of(vec![c(0.5, 0.0); 6], c(0.0, 0.0));
        let fit = linear_fit(&m, &g, &[1, 2, 3, 4]).unwrap();
        assert_eq!((fit.slope, fit.max_abs_residual), (0.0, 0.0));
        assert!(linear_fit(&m, &g, &[1, 2]).is_err());
        for b in g.bonds() {
            assert_eq!(edge_flux(&m, &g, b.i, b.j).unwrap(), 0.0);
        }
        assert!(matches!(edge_flux(&m, &g, 1, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn generic_mode_fails_recurrence() {
        let g = Preset::new(Variant::SingleSystemReservoir)
            .build(1.0)
            .unwrap();
        let sites = g.sites_in(Region::Reservoir);
        let modes = lattice_modes(&g).unwrap();
        let far = modes
            .iter()
            .max_by(|a, b| a.energy.norm().total_cmp(&b.energy.norm()))
            .unwrap();
        assert!(recurrence_residual(far, &g, &sites, 1.0).unwrap() > 1e-3);
    }

    #[test]
    fn continuity_holds_for_eigenmodes_not_for_perturbed_vectors() {
        let g = Preset::new(Variant::ReservoirLieb).build(0.83).unwrap();
        for m in lattice_modes(&g).unwrap() {
            let worst = continuity_check(&m, &g).into_iter().fold(0.0, f64::max);
            assert!(worst <= 1e-9 * m.max_abs().powi(2), "{worst}");
        }
        let mut m = lattice_modes(&g).unwrap().remove(3);
        m.vector[5] += c(0.1, 0.05);
        assert!(continuity_check(&m, &g).into_iter().fold(0.0, f64::max) > 1e-4);
    }

    #[test]
    fn three_site_continuity_by_hand() {
        // chain 1-2-3 with V = (-i, i, -i), Ψ = (1, i, 1), E = 0:
        // J_12 = J_32 = 2, J_21 = J_23 = -2
        let g = build_reservoir(3, 1.0, 1.0, 1).unwrap();
        let m = mode_of(vec![c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)], c(0.0, 0.0));
        let r = continuity_check(&m, &g);
        assert!(r[0].abs() < 1e-15 && r[2].abs() < 1e-15);
        assert!((r[1] - 2.0).abs() < 1e-15);
        assert_eq!(
            edge_flux(&m, &g, 1, 2).unwrap(),
            -edge_flux(&m, &g, 2, 1).unwrap()
        );
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }
}

//! Eigenpairs of the non-Hermitian Hamiltonians, the `E ↔ −E*` pairing
//! check, parity classification, and (in submodules) parameter sweeps with
//! branch tracking, zero-mode root finding and exceptional-point detection.

mod roots;
mod sweep;

pub use roots::{
    find_encounter, find_exceptional_point, find_zero_mode, zero_crossings, Encounter, ZeroMode,
    EP_GAP, EP_OVERLAP,
};
pub use sweep::{sweep, uniform_grid, Event, EventKind, SweepTrajectory, AXIS_TOL, OVERLAP_FLOOR};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;
use crate::linalg::{self, CMatrix};

/// Residual bound relative to `‖H‖_F` every returned eigenpair satisfies.
pub const RESIDUAL_BOUND: f64 = 1e-8;

/// One eigenpair; `vector` has unit 2-norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub energy: Complex64,
    pub vector: Vec<Complex64>,
    pub branch_id: Option<usize>,
}

impl Mode {
    pub fn max_abs(&self) -> f64 {
        self.vector.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// All eigenpairs of `h`, ordered by `(Im E, Re E)` ascending.
pub fn eigendecompose(h: &CMatrix) -> Result<Vec<Mode>> {
    let n = h.dim();
    let scale = h.frobenius_norm();
    let pairs = linalg::eig(h)?;
    let mut worst = 0.0f64;
    for (lambda, x) in &pairs {
        worst = worst.max(h.residual(*lambda, x));
    }
    let trace_error = (pairs.iter().map(|p| p.0).sum::<Complex64>() - h.trace()).norm();
    if worst > RESIDUAL_BOUND * scale || trace_error > RESIDUAL_BOUND * scale.max(1.0) {
        return Err(Error::NumericalFailure {
            rows: n,
            cols: n,
            residual: worst.max(trace_error),
        });
    }
    let mut modes: Vec<Mode> = pairs
        .into_iter()
        .map(|(energy, vector)| Mode {
            energy,
            vector,
            branch_id: None,
        })
        .collect();
    modes.sort_by(|a, b| {
        a.energy
            .im
            .total_cmp(&b.energy.im)
            .then(a.energy.re.total_cmp(&b.energy.re))
    });
    Ok(modes)
}

/// Eigenpairs of a lattice's Hamiltonian.
pub fn lattice_modes(g: &LatticeGraph) -> Result<Vec<Mode>> {
    eigendecompose(&g.to_matrix())
}

/// Result of pairing every eigenvalue `E` with a partner near `−E*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    /// Index pairs `(i, j)`, `i < j`.
    pub pairs: Vec<(usize, usize)>,
    /// Self-paired modes with `|Re E| ≤ tol`.
    pub zero_modes: Vec<usize>,
    pub max_deviation: f64,
}

/// Non-Hermitian particle-hole check: find a perfect matching of the
/// spectrum under `E ↦ −E*` within `tol`.
pub fn check_nhph(modes: &[Mode], tol: f64) -> Result<PairingReport> {
    let n = modes.len();
    let e: Vec<Complex64> = modes.iter().map(|m| m.energy).collect();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i..n {
            let d = (e[j] + e[i].conj()).norm();
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    // greedy on distance; ties prefer self-pairs
    candidates.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then((a.1 != a.2).cmp(&(b.1 != b.2)))
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut matched = vec![false; n];
    let mut report = PairingReport {
        pairs: Vec::new(),
        zero_modes: Vec::new(),
        max_deviation: 0.0,
    };
    for (d, i, j) in candidates {
        if matched[i] || matched[j] {
            continue;
        }
        matched[i] = true;
        matched[j] = true;
        report.max_deviation = report.max_deviation.max(d);
        if i == j {
            report.zero_modes.push(i);
        } else {
            report.pairs.push((i, j));
        }
    }
    if matched.iter().all(|&m| m) {
        report.zero_modes.sort_unstable();
        return Ok(report);
    }
    let mut offenders: Vec<(usize, f64)> = (0..n)
        .filter(|&i| !matched[i])
        .map(|i| {
            let best = (0..n)
                .map(|j| (e[j] + e[i].conj()).norm())
                .fold(f64::INFINITY, f64::min);
            (i, best)
        })
        .collect();
    offenders.sort_by(|a, b| b.1.total_cmp(&a.1));
    offenders.truncate(5);
    Err(Error::SymmetryViolation { tol, offenders })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Symmetric,
    Antisymmetric,
    None,
}

/// Compares a mode with its site-reversed image on a mirror-symmetric lattice.
pub fn classify_parity(mode: &Mode, lattice: &LatticeGraph) -> Result<Parity> {
    let scale = lattice.to_matrix().frobenius_norm();
    if !lattice.is_mirror_symmetric(1e-12 * scale) {
        return Err(Error::Precondition(
            "parity classification needs a mirror-symmetric lattice".into(),
        ));
    }
    let v = &mode.vector;
    let n = v.len();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let ov: Complex64 = (0..n)
        .map(|k| v[n - 1 - k].conj() * v[k])
        .sum::<Complex64>()
        / norm2;
    Ok(if ov.norm() < 0.999 {
        Parity::None
    } else if ov.re > 0.0 {
        Parity::Symmetric
    } else {
        Parity::Antisymmetric
    })
}

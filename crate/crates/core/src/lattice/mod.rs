//! Site/bond graphs for the lattices studied here and assembly of their
//! dense Hamiltonians.
//!
//! Sites carry global 1-based labels matching the figures: system 1 occupies
//! `1..=9`, the reservoir starts at 10. Couplings are real and undirected;
//! on-site potentials are purely imaginary (gain `+iγ`, loss `−iγ`).

mod builders;
mod presets;

pub use builders::{
    add_uniform_shift, build_lieb_tail, build_reservoir, build_ssh, build_three_site_tail, join,
    mirror_reflect,
};
pub use presets::{LatticeFamily, Preset, PresetParams, Variant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    System1,
    Reservoir,
    System2,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::System1 => "system1",
            Region::Reservoir => "reservoir",
            Region::System2 => "system2",
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system1" => Ok(Region::System1),
            "reservoir" => Ok(Region::Reservoir),
            "system2" => Ok(Region::System2),
            other => Err(Error::semantic(
                "region",
                format!("unknown region `{other}`"),
            )),
        }
    }
}

/// Undirected bond between two site labels, amplitude in units of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub amplitude: f64,
}

/// Immutable tight-binding graph with labelled sites `first..first + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    first: usize,
    onsite: Vec<Complex64>,
    regions: Vec<Region>,
    bonds: Vec<Bond>,
}

impl LatticeGraph {
    /// Validates and builds a graph. `onsite[k]` and `regions[k]` belong to
    /// the site labelled `first + k`.
    pub fn new(
        first: usize,
        onsite: Vec<Complex64>,
        regions: Vec<Region>,
        bonds: Vec<Bond>,
    ) -> Result<Self> {
        if onsite.is_empty() {
            return Err(Error::Config("lattice must have at least one site".into()));
        }
        if onsite.len() != regions.len() {
            return Err(Error::Config("one region tag per site required".into()));
        }
        let g = Self {
            first,
            onsite,
            regions,
            bonds: Vec::with_capacity(bonds.len()),
        };
        for (k, v) in g.onsite.iter().enumerate() {
            if !v.im.is_finite() || v.re != 0.0 {
                return Err(Error::Config(format!(
                    "site {}: on-site potential must be finite and purely imaginary, got {v}",
                    first + k
                )));
            }
        }
        bonds
            .into_iter()
            .try_fold(g, |g, b| g.with_bond(b.i, b.j, b.amplitude))
    }

    /// Returns a copy with one more bond.
    pub fn with_bond(mut self, i: usize, j: usize, amplitude: f64) -> Result<Self> {
        if !self.contains(i) || !self.contains(j) {
            return Err(Error::Config(format!(
                "bond ({i}, {j}) references a missing site"
            )));
        }
        if i == j {
            return Err(Error::Config(format!("self-coupling at site {i}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "bond ({i}, {j}) amplitude must be finite"
            )));
        }
        if self.bond_amplitude(i, j).is_some() {
            return Err(Error::Config(format!("duplicate bond ({i}, {j})")));
        }
        self.bonds.push(Bond { i, j, amplitude });
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn first_site(&self) -> usize {
        self.first
    }

    pub fn last_site(&self) -> usize {
        self.first + self.n_sites() - 1
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.first..self.first + self.n_sites()
    }

    pub fn contains(&self, label: usize) -> bool {
        label >= self.first && label < self.first + self.n_sites()
    }

    /// Zero-based matrix index of a site label.
    pub fn index_of(&self, label: usize) -> Option<usize> {
        self.contains(label).then(|| label - self.first)
    }

    pub fn label_of(&self, index: usize) -> usize {
        self.first + index
    }

    pub fn onsite(&self, label: usize) -> Complex64 {
        self.onsite[label - self.first]
    }

    pub fn onsite_all(&self) -> &[Complex64] {
        &self.onsite
    }

    pub fn region(&self, label: usize) -> Region {
        self.regions[label - self.first]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond_amplitude(&self, i: usize, j: usize) -> Option<f64> {
        self.bonds
            .iter()
            .find(|b| (b.i == i && b.j == j) || (b.i == j && b.j == i))
            .map(|b| b.amplitude)
    }

    /// `(neighbor, amplitude)` for every bond touching `label`, in bond order.
    pub fn neighbors(&self, label: usize) -> Vec<(usize, f64)> {
        self.bonds
            .iter()
            .filter_map(|b| {
                if b.i == label {
                    Some((b.j, b.amplitude))
                } else if b.j == label {
                    Some((b.i, b.amplitude))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Site labels in a region, ascending.
    pub fn sites_in(&self, region: Region) -> Vec<usize> {
        self.labels()
            .filter(|&l| self.region(l) == region)
            .collect()
    }

    /// Dense Hamiltonian: on-site potentials on the diagonal, symmetric real bonds.
    pub fn to_matrix(&self) -> CMatrix {
        let mut h = CMatrix::zeros(self.n_sites());
        for (k, v) in self.onsite.iter().enumerate() {
            h[(k, k)] = *v;
        }
        for b in &self.bonds {
            let (i, j) = (b.i - self.first, b.j - self.first);
            h[(i, j)] = Complex64::new(b.amplitude, 0.0);
            h[(j, i)] = Complex64::new(b.amplitude, 0.0);
        }
        h
    }

    /// Copy with all regions replaced.
    pub fn with_region(mut self, region: Region) -> Self {
        self.regions.iter_mut().for_each(|r| *r = region);
        self
    }

    /// Copy whose labels start at `first` instead.
    pub fn relabel(mut self, first: usize) -> Self {
        let shift = first as i64 - self.first as i64;
        for b in &mut self.bonds {
            b.i = (b.i as i64 + shift) as usize;
            b.j = (b.j as i64 + shift) as usize;
        }
        self.first = first;
        self
    }

    /// True when reversing the site order maps the Hamiltonian onto itself.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let h = self.to_matrix();
        let n = self.n_sites();
        (0..n).all(|i| (0..n).all(|j| (h[(i, j)] - h[(n - 1 - i, n - 1 - j)]).norm() <= tol))
    }

    pub(crate) fn parts(self) -> (usize, Vec<Complex64>, Vec<Region>, Vec<Bond>) {
        (self.first, self.onsite, self.regions, self.bonds)
    }

    pub(crate) fn map_onsite(mut self, f: impl Fn(Complex64) -> Complex64) -> Self {
        self.onsite.iter_mut().for_each(|v| *v = f(*v));
        self
    }
}

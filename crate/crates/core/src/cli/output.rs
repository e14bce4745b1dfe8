//! CSV and JSON renderings of spectra, sweeps, mode profiles and reports.
//!
//! Everything is rendered to memory first; floats use the shortest
//! representation that parses back to the same value.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGraph, Region};
use crate::linalg::CMatrix;
use crate::spectral::{Mode, SweepTrajectory};

/// A rendered output file, written later by a single sequential writer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

fn csv_file(
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<OutputFile> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let contents = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(OutputFile {
        name: name.to_string(),
        contents,
    })
}

pub fn json_file<T: Serialize>(name: &str, value: &T) -> Result<OutputFile> {
    let mut contents = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.into()))?;
    contents.push(b'\n');
    Ok(OutputFile {
        name: name.to_string(),
        contents,
    })
}

const SPECTRUM_HEADER: [&str; 4] = ["t_prime", "branch_id", "re_E", "im_E"];

/// Eigenvalues at one `t′`, `branch_id` being the position in `(Im, Re)` order.
pub fn spectrum_csv(t_prime: f64, modes: &[Mode]) -> Result<OutputFile> {
    csv_file(
        "spectrum.csv",
        &SPECTRUM_HEADER,
        modes.iter().enumerate().map(|(k, m)| {
            vec![
                t_prime.to_string(),
                m.branch_id.unwrap_or(k).to_string(),
                m.energy.re.to_string(),
                m.energy.im.to_string(),
            ]
        }),
    )
}

/// Tracked branches, grid-major.
pub fn sweep_csv(traj: &SweepTrajectory) -> Result<OutputFile> {
    let rows = traj.grid.iter().enumerate().flat_map(|(k, p)| {
        traj.branches.iter().enumerate().map(move |(b, br)| {
            vec![
                p.to_string(),
                b.to_string(),
                br[k].energy.re.to_string(),
                br[k].energy.im.to_string(),
            ]
        })
    });
    csv_file("sweep.csv", &SPECTRUM_HEADER, rows)
}

const MODE_HEADER: [&str; 6] = ["site", "region", "re_psi", "im_psi", "abs_psi", "phase"];

pub fn mode_csv(id: &str, mode: &Mode, lattice: &LatticeGraph) -> Result<OutputFile> {
    csv_file(
        &format!("mode_{id}.csv"),
        &MODE_HEADER,
        lattice.labels().zip(&mode.vector).map(|(site, z)| {
            vec![
                site.to_string(),
                lattice.region(site).as_str().to_string(),
                z.re.to_string(),
                z.im.to_string(),
                z.norm().to_string(),
                z.arg().to_string(),
            ]
        }),
    )
}

/// Reads a mode profile written by [`mode_csv`]. Sites and regions must
/// match `lattice`; the energy is the Rayleigh quotient of the amplitudes.
pub fn read_mode_csv(path: &Path, lattice: &LatticeGraph) -> Result<Mode> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != MODE_HEADER {
        return Err(Error::semantic(
            "mode",
            format!("unexpected header {header:?}"),
        ));
    }
    let mut vector = Vec::with_capacity(lattice.n_sites());
    for (k, record) in r.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str| Error::semantic("mode", format!("row {}: bad {what}", k + 1));
        let site: usize = field(0).parse().map_err(|_| bad("site"))?;
        let region: Region = field(1).parse().map_err(|_| bad("region"))?;
        if lattice.index_of(site) != Some(k) || lattice.region(site) != region {
            return Err(Error::semantic(
                "mode",
                format!(
                    "row {}: site {site} ({}) does not match the lattice",
                    k + 1,
                    region.as_str()
                ),
            ));
        }
        let re: f64 = field(2).parse().map_err(|_| bad("re_psi"))?;
        let im: f64 = field(3).parse().map_err(|_| bad("im_psi"))?;
        vector.push(Complex64::new(re, im));
    }
    if vector.len() != lattice.n_sites() {
        return Err(Error::semantic(
            "mode",
            format!(
                "{} rows for a {}-site lattice",
                vector.len(),
                lattice.n_sites()
            ),
        ));
    }
    Ok(Mode {
        energy: rayleigh(&lattice.to_matrix(), &vector),
        vector,
        branch_id: None,
    })
}

fn rayleigh(h: &CMatrix, v: &[Complex64]) -> Complex64 {
    let hv = h.mul_vec(v);
    let num: Complex64 = v.iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
    let den: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    num / den
}

/// Writes all files into `dir`, creating it if needed.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Preset, Variant};
    use crate::spectral::lattice_modes;

    #[test]
    fn mode_profile_round_trips_exactly() {
        let g = Preset::new(Variant::MirrorBridge).build(1.01).unwrap();
        let m = lattice_modes(&g).unwrap().remove(7);
        let f = mode_csv("x", &m, &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), std::slice::from_ref(&f)).unwrap();
        let back = read_mode_csv(&dir.path().join("mode_x.csv"), &g).unwrap();
        assert_eq!(back.vector, m.vector);
        assert!((back.energy - m.energy).norm() < 1e-12);
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let g = Preset::new(Variant::MirrorBridge).build(1.01).unwrap();
        let m = lattice_modes(&g).unwrap().remove(0);
        let f = mode_csv("x", &m, &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), &[f]).unwrap();
        let other = Preset::new(Variant::SingleSystemReservoir)
            .build(1.0)
            .unwrap();
        assert!(matches!(
            read_mode_csv(&dir.path().join("mode_x.csv"), &other),
            Err(Error::Semantic { .. })
        ));
    }

    #[test]
    fn spectrum_header() {
        let g = Preset::new(Variant::SingleSystemReservoir)
            .build(0.0)
            .unwrap();
        let f = spectrum_csv(0.0, &lattice_modes(&g).unwrap()).unwrap();
        let text = String::from_utf8(f.contents).unwrap();
        assert!(text.starts_with("t_prime,branch_id,re_E,im_E\n"));
        assert_eq!(text.lines().count(), 20);
    }
}

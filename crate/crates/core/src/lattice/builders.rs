use num_complex::Complex64;

use super::{Bond, LatticeGraph, Region};
use crate::error::{Error, Result};

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

fn require_nonnegative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be nonnegative, got {value}"
        )))
    }
}

/// Lossy SSH chain on sites `1..=n_sites`: the bond leaving an odd site is
/// `t_a`, the bond leaving an even site is `t_b`, and every site carries
/// `−i·kappa0`.
pub fn build_ssh(n_sites: usize, t_a: f64, t_b: f64, kappa0: f64) -> Result<LatticeGraph> {
    if n_sites.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "SSH chain needs an odd number of sites to host a single edge mode, got {n_sites}"
        )));
    }
    require_positive("t_A", t_a)?;
    require_positive("t_B", t_b)?;
    require_nonnegative("kappa0", kappa0)?;
    let bonds = (1..n_sites)
        .map(|s| Bond {
            i: s,
            j: s + 1,
            amplitude: if s % 2 == 1 { t_a } else { t_b },
        })
        .collect();
    LatticeGraph::new(
        1,
        vec![Complex64::new(0.0, -kappa0); n_sites],
        vec![Region::System1; n_sites],
        bonds,
    )
}

/// Uniform chain with alternating gain (`+iγ` on even labels) and loss
/// (`−iγ` on odd labels); labels start at `start_index`.
pub fn build_reservoir(
    n_sites: usize,
    t: f64,
    gamma: f64,
    start_index: usize,
) -> Result<LatticeGraph> {
    if n_sites == 0 {
        return Err(Error::Config("reservoir needs at least one site".into()));
    }
    require_positive("t", t)?;
    require_nonnegative("gamma", gamma)?;
    let onsite = (start_index..start_index + n_sites)
        .map(|label| Complex64::new(0.0, if label % 2 == 0 { gamma } else { -gamma }))
        .collect();
    let bonds = (start_index..start_index + n_sites - 1)
        .map(|s| Bond {
            i: s,
            j: s + 1,
            amplitude: t,
        })
        .collect();
    LatticeGraph::new(start_index, onsite, vec![Region::Reservoir; n_sites], bonds)
}

/// Disjoint union of `a` and `b` plus the bond `(site_a, site_b)`.
///
/// `site_b` is a label of `b` as given; `b` is relabelled to continue right
/// after `a`'s last site.
pub fn join(
    a: LatticeGraph,
    b: LatticeGraph,
    site_a: usize,
    site_b: usize,
    t_prime: f64,
) -> Result<LatticeGraph> {
    if !a.contains(site_a) {
        return Err(Error::Config(format!(
            "join: site {site_a} not in the left lattice"
        )));
    }
    if !b.contains(site_b) {
        return Err(Error::Config(format!(
            "join: site {site_b} not in the right lattice"
        )));
    }
    let offset = a.last_site() + 1;
    let contact_b = site_b - b.first_site() + offset;
    let b = b.relabel(offset);
    let (first, mut onsite, mut regions, mut bonds) = a.parts();
    let (_, b_onsite, b_regions, b_bonds) = b.parts();
    onsite.extend(b_onsite);
    regions.extend(b_regions);
    bonds.extend(b_bonds);
    LatticeGraph::new(first, onsite, regions, bonds)?.with_bond(site_a, contact_b, t_prime)
}

/// Site order reversed: label `first + k` becomes `last − k`.
pub fn mirror_reflect(g: &LatticeGraph) -> LatticeGraph {
    let (first, last) = (g.first_site(), g.last_site());
    let flip = |l: usize| first + last - l;
    let mut onsite = g.onsite_all().to_vec();
    onsite.reverse();
    let mut regions = g.regions().to_vec();
    regions.reverse();
    let bonds = g
        .bonds()
        .iter()
        .map(|b| Bond {
            i: flip(b.i),
            j: flip(b.j),
            amplitude: b.amplitude,
        })
        .collect();
    LatticeGraph::new(first, onsite, regions, bonds).expect("reflection preserves validity")
}

/// Every on-site potential lowered by `i·kappa` (extra uniform loss).
pub fn add_uniform_shift(g: &LatticeGraph, kappa: f64) -> LatticeGraph {
    g.clone().map_onsite(|v| v - Complex64::new(0.0, kappa))
}

/// Quasi-1D Lieb (stub) lattice on labels `1..=n_sites`, contact site 1.
///
/// Repeats the unit `corner — stub (vertical) — edge` and ends with a corner
/// carrying a vertically coupled partner. With `k = (n_sites − 2) / 3`
/// stubs the isolated zero-energy eigenspace has dimension exactly `k` and
/// vanishes on every corner, in particular on the contact site; this is
/// verified on construction.
pub fn build_lieb_tail(n_sites: usize, t: f64) -> Result<LatticeGraph> {
    require_positive("t", t)?;
    if n_sites < 5 || !(n_sites - 2).is_multiple_of(3) {
        return Err(Error::Config(format!(
            "Lieb tail needs 3k + 2 sites with k >= 1, got {n_sites}"
        )));
    }
    let stubs = (n_sites - 2) / 3;
    let mut bonds = Vec::with_capacity(n_sites);
    for u in 0..stubs {
        let corner = 3 * u + 1;
        bonds.push((corner, corner + 1)); // vertical stub
        bonds.push((corner, corner + 2)); // to edge site
        bonds.push((corner + 2, corner + 3)); // to next corner
    }
    let last_corner = 3 * stubs + 1;
    bonds.push((last_corner, last_corner + 1));
    let g = LatticeGraph::new(
        1,
        vec![Complex64::new(0.0, 0.0); n_sites],
        vec![Region::System2; n_sites],
        bonds
            .into_iter()
            .map(|(i, j)| Bond { i, j, amplitude: t })
            .collect(),
    )?;
    verify_dark_zero_space(&g, 1, stubs)?;
    Ok(g)
}

/// Open three-site chain with bonds `t`; isolated zero mode `(1, 0, −1)/√2`.
pub fn build_three_site_tail(t: f64) -> Result<LatticeGraph> {
    require_positive("t", t)?;
    LatticeGraph::new(
        1,
        vec![Complex64::new(0.0, 0.0); 3],
        vec![Region::System2; 3],
        vec![
            Bond {
                i: 1,
                j: 2,
                amplitude: t,
            },
            Bond {
                i: 2,
                j: 3,
                amplitude: t,
            },
        ],
    )
}

/// Exact check on the unit-weight adjacency matrix: nullity equals
/// `expected_dim`, and the contact coordinate vanishes on the whole null
/// space (i.e. `e_contact` lies in the row space).
fn verify_dark_zero_space(g: &LatticeGraph, contact: usize, expected_dim: usize) -> Result<()> {
    let n = g.n_sites();
    let mut adjacency = vec![vec![0i128; n]; n];
    for b in g.bonds() {
        let (i, j) = (g.index_of(b.i).unwrap(), g.index_of(b.j).unwrap());
        adjacency[i][j] = 1;
        adjacency[j][i] = 1;
    }
    let rank = exact_rank(adjacency.clone());
    let nullity = n - rank;
    if nullity != expected_dim {
        return Err(Error::Geometry(format!(
            "Lieb tail has a {nullity}-dimensional zero space, expected {expected_dim}"
        )));
    }
    let mut augmented = adjacency;
    let mut unit = vec![0i128; n];
    unit[g.index_of(contact).unwrap()] = 1;
    augmented.push(unit);
    if exact_rank(augmented) != rank {
        return Err(Error::Geometry(format!(
            "Lieb tail zero modes do not all vanish at contact site {contact}"
        )));
    }
    Ok(())
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
fn exact_rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev_pivot = 1i128;
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot_row);
        let pivot = m[rank][col];
        for r in (rank + 1)..rows {
            for c in (col + 1)..cols {
                m[r][c] = (pivot * m[r][c] - m[r][col] * m[rank][c]) / prev_pivot;
            }
            m[r][col] = 0;
        }
        prev_pivot = pivot;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

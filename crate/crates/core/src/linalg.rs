//! Minimal dense complex linear algebra: a row-major square matrix and a
//! complex Schur decomposition (Householder Hessenberg reduction followed by
//! single-shift QR with Wilkinson shifts), with eigenvectors recovered from
//! the triangular factor by back substitution.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("matrix must be square".into()));
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖H x − λ x‖₂`.
    pub fn residual(&self, lambda: Complex64, x: &[Complex64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(x)
            .map(|(hx, xi)| (hx - lambda * xi).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `A = Z T Z†` with `T` upper triangular and `Z` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

/// Plane rotation `[[c, s], [-s̄, c]]` with real `c`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation mapping `(x, y)` to `(r, 0)`.
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let rho = ax.hypot(ay);
        Self {
            c: ax / rho,
            s: (x / ax) * y.conj() / rho,
        }
    }

    /// Left-multiplies rows `k, k+1` over columns `cols`.
    fn apply_rows(&self, m: &mut CMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let a = m[(k, j)];
            let b = m[(k + 1, j)];
            m[(k, j)] = a * self.c + self.s * b;
            m[(k + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Right-multiplies columns `k, k+1` by the adjoint over rows `rows`.
    fn apply_cols_adjoint(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let a = m[(i, k)];
            let b = m[(i, k + 1)];
            m[(i, k)] = a * self.c + b * self.s.conj();
            m[(i, k + 1)] = -a * self.s + b * self.c;
        }
    }
}

/// Householder reduction to upper Hessenberg form, accumulating `Q`.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n)
            .map(|i| h[(i, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        // v = x + phase·‖x‖·e1, reflector P = I − 2 v v† / (v† v)
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H ← P H
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(r, vi)| vi.conj() * h[(k + 1 + r, j)])
                .sum();
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vi * dot * beta;
            }
        }
        // H ← H P, Q ← Q P
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(r, vi)| m[(i, k + 1 + r)] * vi)
                    .sum();
                for (r, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= dot * vi.conj() * beta;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(t: &CMatrix, m: usize) -> Complex64 {
    let a = t[(m - 1, m - 1)];
    let b = t[(m - 1, m)];
    let c = t[(m, m - 1)];
    let d = t[(m, m)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::NumericalFailure {
            rows: n,
            cols: n,
            residual: f64::NAN,
        });
    }
    let (mut t, mut z) = hessenberg(a);
    if n < 2 {
        return Ok(Schur { t, z });
    }
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let max_iter = 60 * n;
    let mut total_iter = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let mut diag = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= eps * diag {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total_iter += 1;
        since_deflation += 1;
        if total_iter > max_iter {
            let residual = (1..n).map(|i| t[(i, i - 1)].norm()).fold(0.0, f64::max);
            return Err(Error::NumericalFailure {
                rows: n,
                cols: n,
                residual,
            });
        }

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            t[(hi, hi)] + t[(hi, hi - 1)].norm() * 0.75
        } else {
            wilkinson_shift(&t, hi)
        };

        for i in lo..=hi {
            t[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let g = Givens::zeroing(t[(k, k)], t[(k + 1, k)]);
            g.apply_rows(&mut t, k, k..n);
            t[(k + 1, k)] = ZERO;
            rotations.push(g);
        }
        for (offset, g) in rotations.iter().enumerate() {
            let k = lo + offset;
            g.apply_cols_adjoint(&mut t, k, 0..(k + 2).min(hi + 1));
            g.apply_cols_adjoint(&mut z, k, 0..n);
        }
        for i in lo..=hi {
            t[(i, i)] += shift;
        }
    }

    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t, z })
}

/// Right eigenvectors of an upper-triangular `T`, one column per diagonal
/// entry, unnormalized.
fn triangular_eigenvectors(t: &CMatrix) -> Vec<Vec<Complex64>> {
    let n = t.dim();
    let norm = t.frobenius_norm();
    let small = (norm * f64::EPSILON).max(f64::MIN_POSITIVE * 1e16);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut y = vec![ZERO; n];
            y[k] = ONE;
            for i in (0..k).rev() {
                let rhs: Complex64 = ((i + 1)..=k).map(|j| t[(i, j)] * y[j]).sum();
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < small {
                    denom = Complex64::new(small, 0.0);
                }
                y[i] = -rhs / denom;
                // rescale to avoid overflow when denominators are tiny
                let big = y[i].norm();
                if big > 1e100 {
                    y.iter_mut().for_each(|v| *v /= big);
                }
            }
            y
        })
        .collect()
}

/// Eigenvalues and unit-norm right eigenvectors of a general complex matrix.
///
/// Each eigenvector's phase is fixed so that its largest-modulus component
/// (first such index) is real and positive.
pub fn eig(a: &CMatrix) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let n = a.dim();
    let Schur { t, z } = schur(a)?;
    let ys = triangular_eigenvectors(&t);
    let mut out = Vec::with_capacity(n);
    for (k, y) in ys.into_iter().enumerate() {
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| (0..=k).map(|j| z[(i, j)] * y[j]).sum())
            .collect();
        normalize_with_phase(&mut x);
        out.push((t[(k, k)], x));
    }
    Ok(out)
}

/// Scales to unit 2-norm and rotates the largest component onto the positive
/// real axis.
pub fn normalize_with_phase(x: &mut [Complex64]) {
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in x.iter().enumerate() {
        // a relative margin keeps the choice stable among near-equal moduli
        if z.norm() > best_abs * (1.0 + 1e-9) {
            best = i;
            best_abs = z.norm();
        }
    }
    let phase = x[best].conj() / x[best].norm();
    for z in x.iter_mut() {
        *z = *z * phase / norm;
    }
    x[best] = Complex64::new(x[best].re, 0.0);
}

/// `|⟨x, y⟩|` for two vectors.
pub fn overlap(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm()
}

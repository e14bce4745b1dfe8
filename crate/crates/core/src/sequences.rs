//! Lucas sequences `U_m(P, Q)` and `V_m(P, Q)`.
//!
//! Both satisfy `F_m = P F_{m-1} - Q F_{m-2}` and differ only in their
//! seeds (`U: 0, 1`, `V: 2, P`). Exact terms come from the integer
//! recurrence with checked `i128` arithmetic; the closed forms in terms of
//! the characteristic roots `a, b = (P ± √D) / 2` are evaluated in complex
//! floating point so that `D < 0` needs no special handling.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Integer pair `(P, Q)` together with its discriminant and characteristic roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LucasParams {
    p: i64,
    q: i64,
    discriminant: i128,
    a: Complex64,
    b: Complex64,
}

impl LucasParams {
    pub fn new(p: i64, q: i64) -> Self {
        let discriminant = (p as i128) * (p as i128) - 4 * (q as i128);
        let sqrt_d = if discriminant >= 0 {
            Complex64::new((discriminant as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-(discriminant as f64)).sqrt())
        };
        let p_c = Complex64::new(p as f64, 0.0);
        Self {
            p,
            q,
            discriminant,
            a: (p_c + sqrt_d) / 2.0,
            b: (p_c - sqrt_d) / 2.0,
        }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `D = P² − 4Q`, exact.
    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    /// Characteristic roots `(a, b)` with `a + b = P` and `a b = Q`.
    pub fn roots(&self) -> (Complex64, Complex64) {
        (self.a, self.b)
    }

    /// True when `P² == 4Q`, decided on integers.
    pub fn has_repeated_root(&self) -> bool {
        self.discriminant == 0
    }

    /// The repeated root `s = P / 2`; only meaningful when `D = 0`.
    fn repeated_root(&self) -> f64 {
        self.p as f64 / 2.0
    }
}

/// `U_0..=U_m` and `V_0..=V_m` for one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePair {
    pub params: LucasParams,
    pub u_terms: Vec<i128>,
    pub v_terms: Vec<i128>,
}

fn next_term(p: i128, q: i128, prev: i128, prev2: i128, index: usize) -> Result<i128> {
    p.checked_mul(prev)
        .and_then(|x| q.checked_mul(prev2).and_then(|y| x.checked_sub(y)))
        .ok_or(Error::Overflow { index })
}

/// Both sequences up to `m_max` by the exact integer recurrence.
pub fn lucas_pair(params: LucasParams, m_max: usize) -> Result<SequencePair> {
    let p = params.p as i128;
    let q = params.q as i128;
    let mut u_terms = Vec::with_capacity(m_max + 1);
    let mut v_terms = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let (u, v) = match m {
            0 => (0, 2),
            1 => (1, p),
            _ => (
                next_term(p, q, u_terms[m - 1], u_terms[m - 2], m)?,
                next_term(p, q, v_terms[m - 1], v_terms[m - 2], m)?,
            ),
        };
        u_terms.push(u);
        v_terms.push(v);
    }
    Ok(SequencePair {
        params,
        u_terms,
        v_terms,
    })
}

/// `U_m = Σ_{n<m} aⁿ b^{m−n−1}`, or `m s^{m−1}` for a repeated root `s`.
pub fn closed_form_u(params: &LucasParams, m: usize) -> Complex64 {
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if params.has_repeated_root() {
        let s = params.repeated_root();
        return Complex64::new(m as f64 * s.powi(m as i32 - 1), 0.0);
    }
    let (a, b) = params.roots();
    // a^n b^(m-1-n), summed from n = 0
    let mut a_pow = Complex64::new(1.0, 0.0);
    let mut b_pows = vec![Complex64::new(1.0, 0.0); m];
    for k in 1..m {
        b_pows[k] = b_pows[k - 1] * b;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..m {
        sum += a_pow * b_pows[m - 1 - n];
        a_pow *= a;
    }
    sum
}

/// `V_m = aᵐ + bᵐ`, or `2 sᵐ` for a repeated root `s`.
pub fn closed_form_v(params: &LucasParams, m: usize) -> Complex64 {
    if params.has_repeated_root() {
        let s = params.repeated_root();
        return Complex64::new(2.0 * s.powi(m as i32), 0.0);
    }
    let (a, b) = params.roots();
    a.powu(m as u32) + b.powu(m as u32)
}

//! Elementary symmetric polynomials and the root-to-coefficient map.
//!
//! The generating identity is
//!
//! ```text
//! prod_{k=1}^m (z - x_k) = sum_{k=0}^m (-1)^{m-k} e_{m-k}(x) z^k,
//! ```
//!
//! so `e_0 = 1`, `e_1 = sum x_i`, ..., `e_m = prod x_i`. Everything here is
//! evaluated by the triangular one-variable-at-a-time recurrence, which is
//! exact for integer inputs and stable at the dimensions this crate works
//! with (N up to ~100). The exclusion variants build the subvector rather
//! than playing divided-difference games; N is small.

use crate::error::{Error, Result};

/// Dense coefficients of a univariate polynomial; entry `j` multiplies `z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// All elementary symmetric polynomials `(e_0, ..., e_m)` of `x` in one pass.
///
/// Variables are inserted in a canonical (descending) order, so the result
/// is exactly permutation invariant despite floating-point rounding.
pub fn elem_sym_all(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("non-finite input"));
    let mut e = vec![0.0; sorted.len() + 1];
    e[0] = 1.0;
    for (i, &xi) in sorted.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += xi * e[k - 1];
        }
    }
    e
}

/// `e_k(x)` for a single `k`; `k` must not exceed the variable count.
pub fn elem_sym(k: usize, x: &[f64]) -> Result<f64> {
    if k > x.len() {
        return Err(Error::Argument(format!(
            "elementary symmetric index k={k} exceeds variable count {}",
            x.len()
        )));
    }
    Ok(elem_sym_all(x)[k])
}

/// `e_k` of the subvector of `x` with the 0-based indices in `exclude`
/// removed. `exclude` is treated as a set; out-of-range indices are
/// rejected, as is `k` larger than the remaining variable count.
pub fn elem_sym_excluding(k: usize, x: &[f64], exclude: &[usize]) -> Result<f64> {
    let n = x.len();
    let mut mask = vec![false; n];
    for &j in exclude {
        if j >= n {
            return Err(Error::Argument(format!(
                "exclusion index {j} out of range for {n} variables"
            )));
        }
        mask[j] = true;
    }
    let sub: Vec<f64> = x
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| !m)
        .map(|(&v, _)| v)
        .collect();
    if k > sub.len() {
        return Err(Error::Argument(format!(
            "elementary symmetric index k={k} exceeds remaining variable count {}",
            sub.len()
        )));
    }
    Ok(elem_sym_all(&sub)[k])
}

/// Monic coefficients of `prod_i (z - x_i)`: the coefficient of `z^k` is
/// `(-1)^{N-k} e_{N-k}(x)`.
pub fn poly_from_roots(x: &[f64]) -> PolyCoeffs {
    let e = elem_sym_all(x);
    let n = x.len();
    let coeffs = (0..=n)
        .map(|k| {
            let j = n - k;
            if j % 2 == 0 {
                e[j]
            } else {
                -e[j]
            }
        })
        .collect();
    PolyCoeffs { coeffs }
}

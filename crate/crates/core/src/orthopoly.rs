//! Physicists' Hermite and generalized Laguerre polynomials and their zeros.
//!
//! `H_N` satisfies `H_{n+1} = 2x H_n - 2n H_{n-1}` and is orthogonal for the
//! weight `exp(-x^2)`; `L_N^(a)` satisfies
//! `(n+1) L_{n+1} = (2n+1+a-x) L_n - (n+a) L_{n-1}` and is orthogonal for
//! `x^a exp(-x)` on `(0, inf)`.
//!
//! Zeros are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
//! the weight (the Golub-Welsch matrix, without the quadrature weights),
//! polished by Newton iterations on a stable evaluation of the polynomial.
//! The polished zeros satisfy the classical electrostatic equilibrium
//! equations to ~1e-12 absolute:
//!
//! - Hermite: `sum_{j != i} 1/(z_i - z_j) = z_i`
//! - Laguerre via `y_i = sqrt(2 z_i)` with `nu = a + 1`:
//!   `y_i / 2 = sum_{j != i} (1/(y_i - y_j) + 1/(y_i + y_j)) + nu / y_i`
//!
//! These equations are exactly the fixed points of the frozen (noise-free)
//! particle dynamics in `crate::model`, which is why this module is the
//! backbone of the deterministic-flow formulas.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Degrees above this overflow parts of the evaluation pipeline in f64 and
/// are far beyond the desk scale this crate targets.
pub const MAX_DEGREE: usize = 200;

/// Which classical family a zero set belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Hermite,
    /// Generalized Laguerre with parameter `alpha > -1`.
    Laguerre { alpha: f64 },
}

/// Ordered zeros of `H_N` or `L_N^(alpha)`, strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    zeros: Vec<f64>,
    family: Family,
    degree: usize,
}

impl ZeroSet {
    fn new(zeros: Vec<f64>, family: Family, degree: usize) -> Result<Self> {
        if zeros.len() != degree {
            return Err(Error::Argument(format!(
                "expected {degree} zeros, got {}",
                zeros.len()
            )));
        }
        for w in zeros.windows(2) {
            if !(w[0] > w[1]) {
                return Err(Error::Argument(
                    "zeros are not strictly decreasing".into(),
                ));
            }
        }
        if let Family::Laguerre { .. } = family {
            if zeros.last().is_some_and(|&z| z <= 0.0) {
                return Err(Error::Argument("Laguerre zeros must be positive".into()));
            }
        }
        Ok(Self {
            zeros,
            family,
            degree,
        })
    }

    /// Zeros in strictly decreasing order.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Value of the physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for m in 1..n {
        let next = 2.0 * x * cur - 2.0 * (m as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Value of the generalized Laguerre polynomial `L_n^(alpha)(x)`.
pub fn laguerre_eval(n: usize, alpha: f64, x: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::Argument(format!(
            "Laguerre parameter alpha={alpha} must exceed -1"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Orthonormal Hermite value and first derivative at `x`. Orthonormal values
/// track the (bounded) Hermite functions up to `exp(x^2/2)`, so they stay
/// inside f64 range through degree 200 where `H_n` itself overflows; the
/// ratio `p/p'` equals `H_n/H_n'`.
fn hermite_orthonormal_pair(n: usize, x: f64) -> (f64, f64) {
    let p0 = std::f64::consts::PI.powf(-0.25);
    if n == 0 {
        return (p0, 0.0);
    }
    let mut prev = p0;
    let mut cur = std::f64::consts::SQRT_2 * x * p0;
    for m in 1..n {
        let mf = m as f64;
        let next = x * (2.0 / (mf + 1.0)).sqrt() * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    let deriv = (2.0 * n as f64).sqrt() * prev;
    (cur, deriv)
}

/// `L_n^(alpha)` and its derivative `-L_{n-1}^(alpha+1)` at `x`.
fn laguerre_pair(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let value = laguerre_eval(n, alpha, x).expect("alpha validated by caller");
    let deriv = if n == 0 {
        0.0
    } else {
        -laguerre_eval(n - 1, alpha + 1.0, x).expect("alpha validated by caller")
    };
    (value, deriv)
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("degree must be at least 1".into()));
    }
    if n > MAX_DEGREE {
        return Err(Error::Argument(format!(
            "degree {n} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal
/// and off-diagonal, descending.
fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = d;
    }
    for (i, &b) in offdiag.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_unstable_by(|a, b| b.partial_cmp(a).expect("non-finite eigenvalue"));
    ev
}

fn newton_polish<F>(z0: f64, pair: F) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    let mut z = z0;
    for _ in 0..3 {
        let (v, d) = pair(z);
        if d == 0.0 {
            break;
        }
        let step = v / d;
        z -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + z.abs()) {
            break;
        }
    }
    z
}

/// The `N` real zeros of `H_N`, descending.
pub fn hermite_zeros(n: usize) -> Result<ZeroSet> {
    check_degree(n)?;
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut zeros = tridiagonal_eigenvalues(&diag, &offdiag);
    for z in zeros.iter_mut() {
        *z = newton_polish(*z, |x| hermite_orthonormal_pair(n, x));
    }
    // H_N is even/odd, so enforce the exact symmetry z_i = -z_{N+1-i}.
    for i in 0..n / 2 {
        let s = 0.5 * (zeros[i] - zeros[n - 1 - i]);
        zeros[i] = s;
        zeros[n - 1 - i] = -s;
    }
    if n % 2 == 1 {
        zeros[n / 2] = 0.0;
    }
    ZeroSet::new(zeros, Family::Hermite, n)
}

/// The `N` positive zeros of `L_N^(alpha)`, descending.
pub fn laguerre_zeros(n: usize, alpha: f64) -> Result<ZeroSet> {
    check_degree(n)?;
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::Argument(format!(
            "Laguerre parameter alpha={alpha} must exceed -1"
        )));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let kf = k as f64;
            (kf * (kf + alpha)).sqrt()
        })
        .collect();
    let mut zeros = tridiagonal_eigenvalues(&diag, &offdiag);
    for z in zeros.iter_mut() {
        *z = newton_polish(*z, |x| laguerre_pair(n, alpha, x));
    }
    ZeroSet::new(zeros, Family::Laguerre { alpha }, n)
}

/// Residual of the Hermite equilibrium equation
/// `sum_{j != i} 1/(z_i - z_j) - z_i` for each zero.
pub fn hermite_stieltjes_residuals(zeros: &[f64]) -> Vec<f64> {
    let n = zeros.len();
    (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (zeros[i] - zeros[j]))
                .sum();
            s - zeros[i]
        })
        .collect()
}

/// Residual of the wall-interaction equilibrium equation
/// `y_i/2 - sum_{j != i} (1/(y_i-y_j) + 1/(y_i+y_j)) - nu/y_i`
/// for `y_i = sqrt(2 z_i)` built from the zeros of `L_N^(nu-1)`.
pub fn laguerre_electrostatic_residuals(zeros: &[f64], nu: f64) -> Vec<f64> {
    let y: Vec<f64> = zeros.iter().map(|&z| (2.0 * z).sqrt()).collect();
    let n = y.len();
    (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (y[i] - y[j]) + 1.0 / (y[i] + y[j]))
                .sum();
            0.5 * y[i] - s - nu / y[i]
        })
        .collect()
}

//! Closed-form expectations of the chamber processes: the polynomial
//! compensators that turn elementary symmetric functions into martingales,
//! and the expected characteristic polynomials and elementary symmetric
//! moments for corner starts.
//!
//! For the renormalized type-A process,
//!
//! ```text
//! f_{N,k}(x, t) = e_k(x) + sum_{l=1}^{floor(k/2)}
//!     (N-k+2l)! / (2^l l! (N-k)!) * t^l * e_{k-2l}(x)
//! ```
//!
//! is space-time harmonic for every coupling, and for type B (with
//! `nu_eff = nu + 1/(2 beta)` and squared coordinates)
//!
//! ```text
//! g_{N,k}(x, t) = e_k(x^2) + sum_{l=1}^{k}
//!     (-2t)^l * C(N-k+l, l) * (N-k+nu_eff)_l * e_{k-l}(x^2).
//! ```
//!
//! Corner starts make the expected characteristic polynomials classical:
//!
//! ```text
//! E prod_i (y - X_{t,i})   = (t beta / 2)^{N/2} H_N(y / sqrt(2 beta t))
//! E prod_i (y - X_{t,i}^2) = (2 t beta)^N (-1)^N N! L_N^(nu_eff - 1)(y / (2 t beta))
//! ```
//!
//! equivalently monic polynomials with roots `sqrt(2 t beta) z_H` and
//! `2 t beta z_L`. Expanding in `y` gives the moments implemented by
//! `expected_elem_sym_*`. The even type-A moments carry the alternating
//! sign `(-1)^k (t beta / 2)^k N! / (k! (N-2k)!)`: an Ito computation of
//! `E e_2(X_t) = -beta N(N-1) t / 2 < 0` pins the sign, and the
//! density-based oracle confirms it numerically.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, System};
use crate::orthopoly;
use crate::symfun::elem_sym_all;

/// Rising factorial `x (x+1) ... (x+r-1)`; the empty product is 1.
pub fn pochhammer(x: f64, r: u32) -> f64 {
    let mut p = 1.0;
    for m in 0..r {
        p *= x + m as f64;
    }
    p
}

/// `n!` as a float; desk-scale degrees only.
pub fn factorial(n: u32) -> f64 {
    let mut p = 1.0;
    for m in 2..=n {
        p *= m as f64;
    }
    p
}

/// Generalized binomial coefficient `C(r, k)` for real `r`, via
/// `poch(r-k+1, k) / k!`.
pub fn binom_real(r: f64, k: u32) -> f64 {
    pochhammer(r - k as f64 + 1.0, k) / factorial(k)
}

fn check_compensator_indices(n: usize, k: usize, x: &[f64]) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Argument(format!(
            "compensator order k={k} must satisfy 1 <= k <= N={n}"
        )));
    }
    if x.len() != n {
        return Err(Error::Argument(format!(
            "state has {} coordinates, expected N={n}",
            x.len()
        )));
    }
    Ok(())
}

/// Type-A martingale compensator `f_{N,k}(x, t)`.
pub fn compensator_a(n: usize, k: usize, t: f64, x: &[f64]) -> Result<f64> {
    check_compensator_indices(n, k, x)?;
    Ok(compensator_a_unchecked(n, k, t, x))
}

fn compensator_a_unchecked(n: usize, k: usize, t: f64, x: &[f64]) -> f64 {
    let e = elem_sym_all(x);
    let mut acc = e[k];
    for l in 1..=(k / 2) {
        // (N-k+2l)! / (2^l l! (N-k)!) = poch(N-k+1, 2l) / (2^l l!)
        let coeff = pochhammer((n - k + 1) as f64, 2 * l as u32)
            / (2f64.powi(l as i32) * factorial(l as u32));
        acc += coeff * t.powi(l as i32) * e[k - 2 * l];
    }
    acc
}

/// Type-B martingale compensator on squared coordinates, with the
/// effective parameter `nu_eff = nu + 1/(2 beta)`.
pub fn compensator_b(n: usize, k: usize, t: f64, x: &[f64], nu_eff: f64) -> Result<f64> {
    check_compensator_indices(n, k, x)?;
    Ok(compensator_b_unchecked(n, k, t, x, nu_eff))
}

fn compensator_b_unchecked(n: usize, k: usize, t: f64, x: &[f64], nu_eff: f64) -> f64 {
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let e = elem_sym_all(&sq);
    let mut acc = e[k];
    for l in 1..=k {
        let coeff = binom_real((n - k + l) as f64, l as u32)
            * pochhammer((n - k) as f64 + nu_eff, l as u32);
        acc += (-2.0 * t).powi(l as i32) * coeff * e[k - l];
    }
    acc
}

/// A compensator bound to one model, dimension, and order.
#[derive(Debug, Clone, Copy)]
pub struct CompensatorSpec {
    pub system: System,
    pub n: usize,
    pub k: usize,
    /// Effective parameter; only meaningful for type B.
    pub nu_eff: f64,
}

impl CompensatorSpec {
    pub fn for_model(spec: &ModelSpec, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Argument(format!(
                "compensator order k={k} must satisfy 1 <= k <= N={n}"
            )));
        }
        let nu_eff = match spec.system() {
            System::A => 0.0,
            System::B => spec.nu_eff(),
        };
        Ok(Self {
            system: spec.system(),
            n,
            k,
            nu_eff,
        })
    }

    /// Compensator value at `(x, t)`; `x` is a normalized state.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        match self.system {
            System::A => compensator_a_unchecked(self.n, self.k, t, x),
            System::B => compensator_b_unchecked(self.n, self.k, t, x, self.nu_eff),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Argument(format!("{name}={v} must be positive")));
    }
    Ok(())
}

/// `E prod_i (y - X_{t,i})` for the raw type-A process started at the
/// corner: `(t beta / 2)^{N/2} H_N(y / sqrt(2 beta t))`.
pub fn expected_charpoly_a(n: usize, beta: f64, t: f64, y: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("t", t)?;
    let u = y / (2.0 * beta * t).sqrt();
    Ok((t * beta / 2.0).powf(n as f64 / 2.0) * orthopoly::hermite_eval(n, u))
}

/// `E e_k(X_t)` for the raw type-A corner start: zero for odd `k`, and
/// `(-1)^{k'} (t beta / 2)^{k'} N! / (k'! (N-2k')!)` for `k = 2k'`.
pub fn expected_elem_sym_a(n: usize, beta: f64, t: f64, k: usize) -> Result<f64> {
    check_positive("beta", beta)?;
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("t={t} must be nonnegative")));
    }
    if k > n {
        return Err(Error::Argument(format!("k={k} must not exceed N={n}")));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let half = (k / 2) as u32;
    // N! / (N-2k')! = poch(N-2k'+1, 2k')
    let comb = pochhammer((n - k + 1) as f64, k as u32) / factorial(half);
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * (t * beta / 2.0).powi(half as i32) * comb)
}

/// `E prod_i (y - X_{t,i}^2)` for the raw type-B corner start:
/// `(2 t beta)^N (-1)^N N! L_N^(nu_eff - 1)(y / (2 t beta))`.
pub fn expected_charpoly_b(n: usize, beta: f64, nu: f64, t: f64, y: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("t", t)?;
    let nu_eff = nu + 0.5 / beta;
    if nu_eff <= 0.0 {
        return Err(Error::Argument(format!(
            "effective parameter nu + 1/(2 beta) = {nu_eff} must be positive"
        )));
    }
    let u = y / (2.0 * t * beta);
    let lag = orthopoly::laguerre_eval(n, nu_eff - 1.0, u)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok((2.0 * t * beta).powi(n as i32) * sign * factorial(n as u32) * lag)
}

/// `E e_k(X_t^2)` for the raw type-B corner start:
/// `C(N + nu_eff - 1, k) * N!/(N-k)! * (2 t beta)^k`.
pub fn expected_elem_sym_b(n: usize, beta: f64, nu: f64, t: f64, k: usize) -> Result<f64> {
    check_positive("beta", beta)?;
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("t={t} must be nonnegative")));
    }
    if k > n {
        return Err(Error::Argument(format!("k={k} must not exceed N={n}")));
    }
    let nu_eff = nu + 0.5 / beta;
    let falling = pochhammer((n - k + 1) as f64, k as u32); // N!/(N-k)!
    Ok(binom_real(n as f64 + nu_eff - 1.0, k as u32)
        * falling
        * (2.0 * t * beta).powi(k as i32))
}

/// `E e_k(X_t^2)` for the zero-coupling limit, where the process is plain
/// reflected Brownian motion: the squared coordinates are independent
/// squared Brownian motions with mean `t`, so the value is
/// `t^k C(N, k)` -- which is also the `beta -> 0` limit of
/// [`expected_elem_sym_b`].
pub fn expected_elem_sym_b_beta0(n: usize, t: f64, k: usize) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("t={t} must be nonnegative")));
    }
    if k > n {
        return Err(Error::Argument(format!("k={k} must not exceed N={n}")));
    }
    Ok(t.powi(k as i32) * binom_real(n as f64, k as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Beta;
    use crate::symfun::poly_from_roots;

    #[test]
    fn pochhammer_and_binomials() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert!((pochhammer(0.5, 3) - 1.875).abs() < 1e-15);
        assert_eq!(binom_real(4.0, 2), 6.0);
        assert!((binom_real(2.5, 2) - 1.875).abs() < 1e-15);
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
    }

    #[test]
    fn compensator_a_examples() {
        let x = [1.5, -0.25];
        // N=2, k=2: e_2 + t.
        let v = compensator_a(2, 2, 0.7, &x).unwrap();
        assert!((v - (1.5 * -0.25 + 0.7)).abs() < 1e-15);
        // k=1 has no correction.
        let v = compensator_a(2, 1, 3.0, &x).unwrap();
        assert!((v - 1.25).abs() < 1e-15);
        // t=0 reduces to e_k.
        let v = compensator_a(2, 2, 0.0, &x).unwrap();
        assert!((v - (1.5 * -0.25)).abs() < 1e-15);

        assert!(compensator_a(2, 0, 0.0, &x).is_err());
        assert!(compensator_a(2, 3, 0.0, &x).is_err());
    }

    #[test]
    fn compensator_b_examples() {
        // N=1, k=1: a^2 - 2 t nu_eff.
        let v = compensator_b(1, 1, 0.5, &[3.0], 1.5).unwrap();
        assert!((v - (9.0 - 2.0 * 0.5 * 1.5)).abs() < 1e-15);

        // t=0 reduces to e_k(x^2).
        let v = compensator_b(2, 2, 0.0, &[2.0, 1.0], 0.7).unwrap();
        assert!((v - 4.0).abs() < 1e-15);

        // N=2, k=1: e_1(x^2) - 4 t (1 + nu_eff).
        let t = 0.3;
        let nu_eff = 1.25;
        let v = compensator_b(2, 1, t, &[2.0, 1.0], nu_eff).unwrap();
        assert!((v - (5.0 - 4.0 * t * (1.0 + nu_eff))).abs() < 1e-14);
    }

    #[test]
    fn charpoly_a_examples() {
        // N=1: identically y.
        for &(beta, t, y) in &[(0.5, 1.0, 2.0), (2.0, 0.3, -1.1)] {
            let v = expected_charpoly_a(1, beta, t, y).unwrap();
            assert!((v - y).abs() < 1e-14);
        }
        // N=2, beta=1, t=1, y=0: (1/2) H_2(0) = -1.
        let v = expected_charpoly_a(2, 1.0, 1.0, 0.0).unwrap();
        assert!((v + 1.0).abs() < 1e-14);

        assert!(expected_charpoly_a(2, 0.0, 1.0, 0.0).is_err());
        assert!(expected_charpoly_a(2, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn elem_sym_a_examples() {
        assert_eq!(expected_elem_sym_a(5, 1.3, 0.9, 3).unwrap(), 0.0);
        // N=2, k=2: -beta t.
        let v = expected_elem_sym_a(2, 0.75, 1.4, 2).unwrap();
        assert!((v + 0.75 * 1.4).abs() < 1e-14);
        assert_eq!(expected_elem_sym_a(4, 1.0, 1.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn charpoly_b_examples() {
        // N=1: y - t (2 beta nu + 1).
        let v = expected_charpoly_b(1, 0.5, 1.0, 1.0, 0.0).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
        let v = expected_charpoly_b(1, 2.0, 0.5, 0.7, 3.0).unwrap();
        assert!((v - (3.0 - 0.7 * (2.0 * 2.0 * 0.5 + 1.0))).abs() < 1e-13);
    }

    #[test]
    fn elem_sym_b_examples() {
        assert_eq!(expected_elem_sym_b(3, 1.0, 1.0, 1.0, 0).unwrap(), 1.0);
        // k=1: N (N + nu_eff - 1) 2 t beta.
        let (n, beta, nu, t) = (3usize, 0.5, 1.0, 0.8);
        let nu_eff = nu + 0.5 / beta;
        let v = expected_elem_sym_b(n, beta, nu, t, 1).unwrap();
        let expect = n as f64 * (n as f64 + nu_eff - 1.0) * 2.0 * t * beta;
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn beta0_limit_of_elem_sym_b() {
        // Zero-coupling closed form t^k C(N,k), approached by the finite
        // formula as beta -> 0.
        assert_eq!(expected_elem_sym_b_beta0(2, 1.0, 1).unwrap(), 2.0);
        assert_eq!(expected_elem_sym_b_beta0(2, 1.0, 0).unwrap(), 1.0);
        for n in 1..=4usize {
            for k in 0..=n {
                for &t in &[0.5, 1.0, 2.0] {
                    let limit = expected_elem_sym_b_beta0(n, t, k).unwrap();
                    let near = expected_elem_sym_b(n, 1e-7, 0.9, t, k).unwrap();
                    assert!(
                        (near - limit).abs() <= 1e-5 * (1.0 + limit.abs()),
                        "N={n} k={k} t={t}: {near} vs {limit}"
                    );
                }
            }
        }
    }

    #[test]
    fn compensators_start_at_elem_sym() {
        let x = [2.2, 0.9, 0.1];
        let e = elem_sym_all(&x);
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let esq = elem_sym_all(&sq);
        for k in 1..=3usize {
            assert_eq!(compensator_a(3, k, 0.0, &x).unwrap(), e[k]);
            assert_eq!(compensator_b(3, k, 0.0, &x, 1.7).unwrap(), esq[k]);
        }
    }

    #[test]
    fn charpoly_a_expands_to_elem_sym_a() {
        // Coefficient route one: monic polynomial with roots
        // sqrt(2 t beta) z_H. Route two: the explicit moment formula.
        for n in 1..=10usize {
            let zeros = orthopoly::hermite_zeros(n).unwrap();
            for &beta in &[0.5f64, 1.0, 2.0] {
                for &t in &[0.5f64, 1.0, 2.0] {
                    let scale = (2.0 * t * beta).sqrt();
                    let roots: Vec<f64> =
                        zeros.zeros().iter().map(|z| scale * z).collect();
                    let poly = poly_from_roots(&roots);
                    let norm = poly
                        .coeffs
                        .iter()
                        .fold(1.0f64, |a, &c| a.max(c.abs()));
                    for j in 0..=n {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        let expect =
                            sign * expected_elem_sym_a(n, beta, t, j).unwrap();
                        let got = poly.coeffs[n - j];
                        assert!(
                            (got - expect).abs() <= 1e-12 * norm,
                            "N={n} beta={beta} t={t} j={j}: {got} vs {expect}"
                        );
                    }
                    // And the pointwise evaluation agrees with the scaled
                    // Hermite closed form, within the cancellation scale
                    // of the Horner sum.
                    for &y in &[0.0, 0.8, 2.5] {
                        let a = expected_charpoly_a(n, beta, t, y).unwrap();
                        let b = poly.eval(y);
                        let eval_scale: f64 = poly
                            .coeffs
                            .iter()
                            .enumerate()
                            .map(|(j, c)| c.abs() * y.abs().powi(j as i32))
                            .sum();
                        assert!(
                            (a - b).abs() <= 1e-11 * (1.0 + eval_scale),
                            "N={n} y={y}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn charpoly_b_expands_to_elem_sym_b() {
        for n in 1..=10usize {
            for &beta in &[0.5f64, 1.0, 2.0] {
                for &nu in &[0.0f64, 1.0, 2.0] {
                    let alpha = nu + 0.5 / beta - 1.0;
                    let zeros = orthopoly::laguerre_zeros(n, alpha).unwrap();
                    for &t in &[0.5f64, 1.0, 2.0] {
                        let scale = 2.0 * t * beta;
                        let roots: Vec<f64> =
                            zeros.zeros().iter().map(|z| scale * z).collect();
                        let poly = poly_from_roots(&roots);
                        let norm = poly
                            .coeffs
                            .iter()
                            .fold(1.0f64, |a, &c| a.max(c.abs()));
                        for j in 0..=n {
                            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                            let expect = sign
                                * expected_elem_sym_b(n, beta, nu, t, j).unwrap();
                            let got = poly.coeffs[n - j];
                            assert!(
                                (got - expect).abs() <= 1e-12 * norm,
                                "N={n} beta={beta} nu={nu} t={t} j={j}: {got} vs {expect}"
                            );
                        }
                        for &y in &[0.0, 1.5] {
                            let a =
                                expected_charpoly_b(n, beta, nu, t, y).unwrap();
                            let b = poly.eval(y);
                            let eval_scale: f64 = poly
                                .coeffs
                                .iter()
                                .enumerate()
                                .map(|(j, c)| c.abs() * y.abs().powi(j as i32))
                                .sum();
                            assert!(
                                (a - b).abs() <= 1e-11 * (1.0 + eval_scale),
                                "N={n} y={y}: {a} vs {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn charpoly_leading_terms_are_monic() {
        // Large y: prod(y - ...) ~ y^N.
        let y = 1e6;
        let a = expected_charpoly_a(3, 1.5, 0.7, y).unwrap();
        assert!((a / y.powi(3) - 1.0).abs() < 1e-5);
        let b = expected_charpoly_b(3, 1.5, 0.5, 0.7, y).unwrap();
        assert!((b / y.powi(3) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn nu_eff_collapse_of_normalized_moments() {
        // (nu, beta) and (nu', beta') with equal nu + 1/(2 beta) must give
        // the same normalized moments E e_k(Xtilde^2) = raw / beta^k.
        let pairs = [
            ((1.0f64, 0.5f64), (1.5f64, 1.0f64)),
            ((0.5, 0.5), (1.0, 1.0)),
        ];
        for ((nu1, b1), (nu2, b2)) in pairs {
            assert!((nu1 + 0.5 / b1 - (nu2 + 0.5 / b2)).abs() < 1e-15);
            for n in 1..=5usize {
                for k in 0..=n {
                    for &t in &[0.5, 2.0] {
                        let m1 = expected_elem_sym_b(n, b1, nu1, t, k).unwrap()
                            / b1.powi(k as i32);
                        let m2 = expected_elem_sym_b(n, b2, nu2, t, k).unwrap()
                            / b2.powi(k as i32);
                        assert!(
                            (m1 - m2).abs() <= 1e-12 * (1.0 + m1.abs()),
                            "N={n} k={k}: {m1} vs {m2}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn compensators_are_space_time_harmonic() {
        use crate::model::{
            apply_generator_detailed, apply_generator_refined, generator_step,
        };

        let x_a = [1.9, 0.3, -1.2];
        let x_b = [2.1, 1.2, 0.4];
        for &beta in &[0.5, 1.0, 2.0] {
            for (spec, x) in [
                (ModelSpec::type_a(Beta::Finite(beta)).unwrap(), &x_a),
                (ModelSpec::type_b(Beta::Finite(beta), 1.0).unwrap(), &x_b),
            ] {
                for k in 1..=3usize {
                    let comp = CompensatorSpec::for_model(&spec, 3, k).unwrap();
                    let h = generator_step(x);
                    // Plain central differences: small relative to the
                    // magnitude of the cancelling terms.
                    let g = apply_generator_detailed(
                        |x, t| comp.eval(x, t),
                        x,
                        0.6,
                        &spec,
                        h,
                    )
                    .unwrap();
                    assert!(
                        g.value.abs() < 1e-5 * g.term_scale,
                        "beta={beta} k={k}: {} vs scale {}",
                        g.value,
                        g.term_scale
                    );
                    // Richardson refinement removes the O(h^2) term; for
                    // these low-degree polynomials that leaves rounding.
                    let r = apply_generator_refined(
                        |x, t| comp.eval(x, t),
                        x,
                        0.6,
                        &spec,
                        h,
                    )
                    .unwrap();
                    assert!(
                        r.abs() < 1e-7 * g.term_scale,
                        "refined beta={beta} k={k}: {r}"
                    );
                }
            }
        }
    }
}

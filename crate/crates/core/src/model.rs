//! Root-system models: chambers, drifts, weights, and frozen flows.
//!
//! A model is a root system (type A or B) with a coupling `beta` (finite or
//! infinite) and, for type B, a wall parameter `nu >= 0`. The associated
//! diffusion lives on the chamber
//!
//! - type A: `x_1 >= x_2 >= ... >= x_N`
//! - type B: `x_1 >= ... >= x_N >= 0`
//!
//! with drifts (raw process)
//!
//! - type A: `b_i = beta * sum_{j != i} 1/(x_i - x_j)`
//! - type B: `b_i = beta * sum_{j != i} (1/(x_i-x_j) + 1/(x_i+x_j)) + nu*beta/x_i`
//!
//! The renormalized process `X / sqrt(beta)` carries noise `1/sqrt(beta)`
//! and the beta-free drift; at `beta = infinity` it degenerates to an ODE
//! whose corner-start solution is an exact rescaling of orthogonal
//! polynomial zeros (`frozen_profile` / `frozen_flow`). For type B all
//! symmetric moments depend on the couplings only through the combination
//! `nu_eff = nu + 1/(2 beta)`, which is what the frozen profile uses.
//!
//! Boundary reflection is realized as Weyl-group projection (sorting, plus
//! absolute values for type B). This is exact in law for the symmetric
//! observables this crate estimates.

use crate::error::{Error, Result};
use crate::orthopoly;

/// Root system tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    A,
    B,
}

/// Interaction coupling; `Infinite` selects the deterministic flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(*b),
            Beta::Infinite => None,
        }
    }
}

/// A root-system model: system tag, coupling, and (type B) wall parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    system: System,
    beta: Beta,
    nu: f64,
}

impl ModelSpec {
    pub fn type_a(beta: Beta) -> Result<Self> {
        validate_beta(beta)?;
        Ok(Self {
            system: System::A,
            beta,
            nu: 0.0,
        })
    }

    pub fn type_b(beta: Beta, nu: f64) -> Result<Self> {
        validate_beta(beta)?;
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::Argument(format!(
                "wall parameter nu={nu} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            system: System::B,
            beta,
            nu,
        })
    }

    pub fn system(&self) -> System {
        self.system
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    /// Wall parameter; zero for type A.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Effective type-B parameter `nu + 1/(2 beta)` (`nu` at infinite beta).
    /// Every symmetric moment of the renormalized type-B process depends on
    /// the couplings through this combination only.
    pub fn nu_eff(&self) -> f64 {
        debug_assert_eq!(self.system, System::B, "nu_eff is a type-B quantity");
        match self.beta {
            Beta::Finite(b) => self.nu + 0.5 / b,
            Beta::Infinite => self.nu,
        }
    }
}

fn validate_beta(beta: Beta) -> Result<()> {
    if let Beta::Finite(b) = beta {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::Argument(format!(
                "coupling beta={b} must be positive (or Beta::Infinite)"
            )));
        }
    }
    Ok(())
}

/// An ordered point of the chamber.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberPoint {
    coords: Vec<f64>,
}

impl ChamberPoint {
    /// Validates the ordering invariant of `system`.
    pub fn new(coords: Vec<f64>, system: System) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("coordinates must be finite".into()));
        }
        for w in coords.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(Error::Argument(
                    "coordinates must be ordered decreasingly".into(),
                ));
            }
        }
        if system == System::B && coords.last().is_some_and(|&v| v < 0.0) {
            return Err(Error::Argument(
                "type-B coordinates must be nonnegative".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Strictly inside the chamber: all gaps positive, and (type B) all
    /// coordinates positive.
    pub fn is_interior(&self, system: System) -> bool {
        min_gap(&self.coords, system) > 0.0
    }
}

/// Smallest singular denominator of the drift at `x` (assumed sorted
/// decreasingly): the minimal consecutive gap, and for type B also the
/// distance to the wall. `+inf` for a single type-A particle.
pub(crate) fn min_gap(x: &[f64], system: System) -> f64 {
    let mut g = f64::INFINITY;
    for w in x.windows(2) {
        g = g.min(w[0] - w[1]);
    }
    if system == System::B {
        if let Some(&last) = x.last() {
            g = g.min(last);
        }
    }
    g
}

/// Weyl-group projection onto the chamber: sort decreasingly, taking
/// absolute values first for type B. Idempotent, and preserves every
/// symmetric function (type A) or symmetric function of squares (type B).
pub fn project_to_chamber(x: &[f64], system: System) -> ChamberPoint {
    let mut coords = x.to_vec();
    project_in_place(&mut coords, system);
    ChamberPoint { coords }
}

pub(crate) fn project_in_place(x: &mut [f64], system: System) {
    if system == System::B {
        for v in x.iter_mut() {
            *v = v.abs();
        }
    }
    x.sort_unstable_by(|a, b| b.partial_cmp(a).expect("non-finite coordinate"));
}

pub(crate) fn chamber_point_from_sorted(coords: Vec<f64>) -> ChamberPoint {
    debug_assert!(coords.windows(2).all(|w| w[0] >= w[1]));
    ChamberPoint { coords }
}

fn require_interior(x: &[f64], system: System) -> Result<()> {
    if !(min_gap(x, system) > 0.0) {
        return Err(Error::SingularInput(match system {
            System::A => "tied coordinates".into(),
            System::B => "tied or zero coordinates".into(),
        }));
    }
    Ok(())
}

/// Raw type-A drift `beta * sum_{j != i} 1/(x_i - x_j)`. Components sum to
/// zero exactly by antisymmetry of the accumulation.
pub fn drift_a(x: &[f64], beta: f64) -> Result<Vec<f64>> {
    require_interior(x, System::A)?;
    let mut out = vec![0.0; x.len()];
    accumulate_drift_a(x, beta, &mut out, 0.0);
    Ok(out)
}

/// Raw type-B drift
/// `beta * sum_{j != i} (1/(x_i-x_j) + 1/(x_i+x_j)) + nu*beta/x_i`.
pub fn drift_b(x: &[f64], beta: f64, nu: f64) -> Result<Vec<f64>> {
    require_interior(x, System::B)?;
    let mut out = vec![0.0; x.len()];
    accumulate_drift_b(x, beta, nu, &mut out, 0.0);
    Ok(out)
}

/// The beta-free drift of the renormalized process (type B keeps `nu`).
pub fn drift_normalized(x: &[f64], spec: &ModelSpec) -> Result<Vec<f64>> {
    match spec.system() {
        System::A => drift_a(x, 1.0),
        System::B => drift_b(x, 1.0, spec.nu()),
    }
}

/// Drift accumulation with pairwise gaps floored at `floor` (keeping the
/// sign implied by the descending order); `floor = 0` is the exact drift.
/// `x` must be sorted decreasingly. Writes into `out`.
pub(crate) fn accumulate_drift_a(x: &[f64], scale: f64, out: &mut [f64], floor: f64) {
    out.fill(0.0);
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let inv = scale / (x[i] - x[j]).max(floor);
            out[i] += inv;
            out[j] -= inv;
        }
    }
}

pub(crate) fn accumulate_drift_b(x: &[f64], scale: f64, nu: f64, out: &mut [f64], floor: f64) {
    out.fill(0.0);
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let inv_diff = scale / (x[i] - x[j]).max(floor);
            let inv_sum = scale / (x[i] + x[j]).max(floor);
            out[i] += inv_diff + inv_sum;
            out[j] += inv_sum - inv_diff;
        }
        out[i] += scale * nu / x[i].max(floor);
    }
}

/// The chamber weight `w(x)`: type A `prod_{i<j} |x_i-x_j|^{2 beta}`,
/// type B `prod_{i<j} |x_i^2-x_j^2|^{2 beta} * prod_i |x_i|^{2 nu beta}`.
/// Computed in log space and exponentiated; ties give 0. Finite beta only.
pub fn weight_w(x: &[f64], spec: &ModelSpec) -> Result<f64> {
    Ok(log_weight_w(x, spec)?.exp())
}

/// `ln w(x)`; `-inf` on ties. The importance-sampling oracle works with
/// this directly so large exponents never overflow.
pub fn log_weight_w(x: &[f64], spec: &ModelSpec) -> Result<f64> {
    let Some(beta) = spec.beta().finite() else {
        return Err(Error::Argument(
            "the chamber weight requires a finite beta".into(),
        ));
    };
    let n = x.len();
    let mut log_w = 0.0;
    match spec.system() {
        System::A => {
            for i in 0..n {
                for j in (i + 1)..n {
                    log_w += 2.0 * beta * (x[i] - x[j]).abs().ln();
                }
            }
        }
        System::B => {
            for i in 0..n {
                for j in (i + 1)..n {
                    log_w += 2.0 * beta * (x[i] * x[i] - x[j] * x[j]).abs().ln();
                }
                log_w += 2.0 * spec.nu() * beta * x[i].abs().ln();
            }
        }
    }
    Ok(log_w)
}

/// Homogeneity exponent `gamma` of the weight: `w(t x) = t^{2 gamma} w(x)`.
/// Type A: `beta N(N-1)/2`; type B: `beta N(N-1) + nu beta N`.
pub fn gamma_exponent(spec: &ModelSpec, n: usize) -> Result<f64> {
    let Some(beta) = spec.beta().finite() else {
        return Err(Error::Argument(
            "the homogeneity exponent requires a finite beta".into(),
        ));
    };
    let nf = n as f64;
    Ok(match spec.system() {
        System::A => beta * nf * (nf - 1.0) / 2.0,
        System::B => beta * nf * (nf - 1.0) + spec.nu() * beta * nf,
    })
}

/// The stationary shape of the frozen (noise-free) dynamics in normalized
/// coordinates: type A gives the Hermite zero vector `z`; type B gives
/// `y_i = sqrt(2 z_i)` from the zeros of `L_N^(nu_eff - 1)`. For a finite
/// beta the type-B profile uses the effective parameter, which makes it
/// the exact warm start for corner launches.
pub fn frozen_profile(spec: &ModelSpec, n: usize) -> Result<Vec<f64>> {
    match spec.system() {
        System::A => Ok(orthopoly::hermite_zeros(n)?.zeros().to_vec()),
        System::B => {
            let nu_eff = spec.nu_eff();
            if nu_eff <= 0.0 {
                return Err(Error::Argument(format!(
                    "type-B frozen profile requires nu_eff > 0, got {nu_eff}"
                )));
            }
            let zeros = orthopoly::laguerre_zeros(n, nu_eff - 1.0)?;
            Ok(zeros.zeros().iter().map(|&z| (2.0 * z).sqrt()).collect())
        }
    }
}

/// The frozen flow in normalized coordinates: type A started from `c z` is
/// `sqrt(2t + c^2) z`; type B started from the corner is `sqrt(t) y`.
/// Type B supports `c = 0` only.
pub fn frozen_flow(t: f64, c: f64, spec: &ModelSpec, n: usize) -> Result<Vec<f64>> {
    if t < 0.0 || c < 0.0 {
        return Err(Error::Argument(format!(
            "frozen flow requires t >= 0 and c >= 0, got t={t}, c={c}"
        )));
    }
    let profile = frozen_profile(spec, n)?;
    let factor = match spec.system() {
        System::A => (2.0 * t + c * c).sqrt(),
        System::B => {
            if c > 0.0 {
                return Err(Error::Unsupported(
                    "type-B frozen flow from a scaled profile start is not available".into(),
                ));
            }
            t.sqrt()
        }
    };
    Ok(profile.into_iter().map(|z| factor * z).collect())
}

/// Default finite-difference step for generator checks.
pub fn generator_step(x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-4 * (1.0 + norm)
}

/// One application of the space-time generator of the renormalized process
/// with central differences of step `h`:
/// `(d/dt + (1/(2 beta)) Laplacian + drift . grad) f` at `(x, t)`.
/// At `beta = infinity` the Laplacian term is absent.
pub fn apply_generator<F>(f: F, x: &[f64], t: f64, spec: &ModelSpec, h: f64) -> Result<f64>
where
    F: Fn(&[f64], f64) -> f64,
{
    Ok(apply_generator_detailed(f, x, t, spec, h)?.value)
}

/// Richardson-refined generator application, `(4 G(h/2) - G(h)) / 3`,
/// cancelling the leading O(h^2) error of the central differences.
pub fn apply_generator_refined<F>(f: F, x: &[f64], t: f64, spec: &ModelSpec, h: f64) -> Result<f64>
where
    F: Fn(&[f64], f64) -> f64 + Copy,
{
    let coarse = apply_generator(f, x, t, spec, h)?;
    let fine = apply_generator(f, x, t, spec, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Generator application plus the natural cancellation scale of its terms,
/// for residual-vs-scale harmonicity reporting.
pub struct GeneratorApplication {
    pub value: f64,
    /// `1 + |time term| + |Laplacian term| + sum_i |drift_i * grad_i|`.
    pub term_scale: f64,
}

pub fn apply_generator_detailed<F>(
    f: F,
    x: &[f64],
    t: f64,
    spec: &ModelSpec,
    h: f64,
) -> Result<GeneratorApplication>
where
    F: Fn(&[f64], f64) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step h={h} must be positive")));
    }
    require_interior(x, spec.system())?;
    let drift = drift_normalized(x, spec)?;
    let lap_coeff = match spec.beta() {
        Beta::Finite(b) => 0.5 / b,
        Beta::Infinite => 0.0,
    };

    let dt_term = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
    let center = f(x, t);

    let mut point = x.to_vec();
    let mut lap_term = 0.0;
    let mut advect_terms = 0.0;
    let mut advect_scale = 0.0;
    for i in 0..x.len() {
        point[i] = x[i] + h;
        let up = f(&point, t);
        point[i] = x[i] - h;
        let down = f(&point, t);
        point[i] = x[i];
        let grad_i = (up - down) / (2.0 * h);
        lap_term += lap_coeff * (up - 2.0 * center + down) / (h * h);
        advect_terms += drift[i] * grad_i;
        advect_scale += (drift[i] * grad_i).abs();
    }

    Ok(GeneratorApplication {
        value: dt_term + lap_term + advect_terms,
        term_scale: 1.0 + dt_term.abs() + lap_term.abs() + advect_scale,
    })
}

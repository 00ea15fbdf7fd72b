//! An SDE-free verification channel: self-normalized importance sampling
//! against the explicit corner-start density.
//!
//! Started at the origin, the process at time `t > 0` has a density on the
//! chamber proportional to `exp(-|x|^2 / (2t)) w(x)` with the chamber
//! weight `w` of [`crate::model::weight_w`]. Both factors extend
//! Weyl-invariantly to all of `R^N`, so for a Weyl-invariant observable
//! `g` the chamber integral equals the full-space integral up to a
//! constant -- and self-normalization cancels every constant, including
//! the intractable normalization of the density itself. That gives an
//! estimator of `E g(X_t)` that never touches the SDE:
//!
//! - draw `x ~ Normal(0, s t I)` with `s = proposal_scale > 1`, so the
//!   proposal dominates the Gaussian tail of the target;
//! - weight by `log w(x) - |x|^2 (1/(2t) - 1/(2st))` in log space;
//! - return the self-normalized weighted mean, with the standard error
//!   from the normalized-weight variance.
//!
//! Importance sampling degrades quickly as the weight degree grows, so the
//! oracle enforces a desk-scale guard (`N <= 4`, weight degree `<= 40`)
//! and refuses when the effective sample size drops below
//! [`MIN_EFFECTIVE_SAMPLES`] rather than return an unreliable number.

use crate::error::{Error, Result};
use crate::model::{self, ModelSpec};
use crate::montecarlo::EstimateWithError;
use crate::par;
use crate::sde::path_stream;
use rand::Rng;
use rand_distr::StandardNormal;

/// Refusal threshold on the effective sample size `(sum w)^2 / sum w^2`.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

/// Proposal scale that covers the radial bulk of the corner-start density.
///
/// The squared norm of the process is a squared Bessel process of
/// dimension `N + 2 gamma`, so at time `t` the density concentrates at
/// `|x|^2 ~ (N + 2 gamma) t` while an isotropic proposal with scale `s`
/// puts it at `N s t`. Matching the two (never going below the 1.5
/// default) keeps the weights healthy as the weight degree grows.
pub fn bulk_proposal_scale(n: usize, spec: &ModelSpec) -> Result<f64> {
    let two_gamma = 2.0 * model::gamma_exponent(spec, n)?;
    Ok((1.0 + two_gamma / n as f64).max(1.5))
}

/// Largest dimension the oracle accepts.
pub const MAX_DIMENSION: usize = 4;

/// Largest weight homogeneity degree (`2 gamma`) the oracle accepts.
pub const MAX_WEIGHT_DEGREE: f64 = 40.0;

const BATCH: usize = 4096;

/// Importance-sampling controls.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Proposal variance inflation; must exceed 1 so the weights stay
    /// integrable-light in the tails.
    pub proposal_scale: f64,
    pub samples: usize,
    pub seed: u64,
}

impl OracleConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            proposal_scale: 1.5,
            samples,
            seed,
        }
    }

    pub fn with_proposal_scale(mut self, scale: f64) -> Self {
        self.proposal_scale = scale;
        self
    }
}

/// Self-normalized importance-sampling estimate of `E g(X_t)` for the raw
/// process started at the corner. The observable must be Weyl-invariant
/// (symmetric under coordinate permutations; for type B also under sign
/// flips) -- a cheap spot check rejects observables that are not.
pub fn is_expectation<F>(
    observable: F,
    n: usize,
    spec: &ModelSpec,
    t: f64,
    config: &OracleConfig,
) -> Result<EstimateWithError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if spec.beta().finite().is_none() {
        return Err(Error::Argument(
            "the density oracle requires a finite beta".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::Argument(format!("t={t} must be positive")));
    }
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::Argument(format!(
            "oracle dimension N={n} outside 1..={MAX_DIMENSION} (desk-scale guard)"
        )));
    }
    let two_gamma = 2.0 * model::gamma_exponent(spec, n)?;
    if two_gamma > MAX_WEIGHT_DEGREE {
        return Err(Error::Argument(format!(
            "weight degree 2*gamma = {two_gamma} exceeds {MAX_WEIGHT_DEGREE}; \
             the weights would be too degenerate to trust"
        )));
    }
    if !(config.proposal_scale > 1.0) {
        return Err(Error::Argument(format!(
            "proposal_scale={} must exceed 1",
            config.proposal_scale
        )));
    }
    if config.samples < 2 {
        return Err(Error::Argument("need at least 2 samples".into()));
    }

    let m = config.samples;
    let s = config.proposal_scale;
    let sd = (s * t).sqrt();
    // log target/proposal up to constants: log w(x) - |x|^2 (1/(2t) - 1/(2st)).
    let quad_coeff = 0.5 / t - 0.5 / (s * t);

    let n_batches = m.div_ceil(BATCH);
    let batches: Vec<(Vec<f64>, Vec<f64>)> = par::indexed_map(n_batches, |b| {
        let mut rng = path_stream(config.seed, b as u64);
        let count = BATCH.min(m - b * BATCH);
        let mut log_w = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        let mut x = vec![0.0f64; n];
        for _ in 0..count {
            let mut norm_sq = 0.0;
            for xi in x.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *xi = sd * z;
                norm_sq += *xi * *xi;
            }
            let lw = model::log_weight_w(&x, spec).expect("finite beta checked")
                - quad_coeff * norm_sq;
            log_w.push(lw);
            values.push(observable(&x));
        }
        (log_w, values)
    });

    let mut log_w = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for (lw, v) in batches {
        log_w.extend(lw);
        values.extend(v);
    }

    // Invariance spot check: build a probe that the chamber projection is
    // guaranteed to move (ascending order, negated for type B). Projection
    // is a Weyl-group element, so an invariant observable must not change
    // beyond summation-order rounding.
    {
        let mut rng = path_stream(config.seed, 0);
        let mut probe: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                -(1.0 + z.abs()) * sd
            })
            .collect();
        probe.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite probe"));
        let direct = observable(&probe);
        let projected = observable(model::project_to_chamber(&probe, spec.system()).coords());
        if (direct - projected).abs() > 1e-10 * (1.0 + direct.abs()) {
            return Err(Error::Argument(
                "observable is not Weyl-invariant: chamber projection changed its value"
                    .into(),
            ));
        }
    }

    let max_lw = par::pairwise_max(&log_w);
    let weights: Vec<f64> = log_w.iter().map(|&l| (l - max_lw).exp()).collect();
    let w_sum = par::pairwise_sum(&weights);
    let weighted: Vec<f64> = weights.iter().zip(&values).map(|(w, g)| w * g).collect();
    let mean = par::pairwise_sum(&weighted) / w_sum;

    let w2_sum = par::pairwise_sum_by(&weights, |w| w * w);
    let ess = w_sum * w_sum / w2_sum;
    if !(ess >= MIN_EFFECTIVE_SAMPLES) {
        return Err(Error::DegenerateWeights {
            ess,
            min_ess: MIN_EFFECTIVE_SAMPLES,
        });
    }

    let dev: Vec<f64> = weights
        .iter()
        .zip(&values)
        .map(|(w, g)| {
            let wn = w / w_sum;
            let d = g - mean;
            wn * wn * d * d
        })
        .collect();
    let var = par::pairwise_sum(&dev);

    Ok(EstimateWithError {
        mean,
        std_error: var.sqrt(),
        n_samples: m,
    })
}

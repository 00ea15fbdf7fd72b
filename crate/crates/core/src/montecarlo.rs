//! Monte-Carlo estimation along simulated paths, martingale-flatness
//! testing, and closed-form cross-checks.
//!
//! Paths are distributed over workers; path `p` always uses the random
//! stream `(seed, p)` and the per-time aggregation is a fixed pairwise
//! reduction, so every report is bit-identical regardless of worker count.
//!
//! Statistical checks accept when the discrepancy stays within
//! [`FLATNESS_Z_MAX`] standard errors (per point, max over the grid). The
//! threshold is statistical, not exact: it is chosen for a low
//! false-failure rate across the full verification matrix.

use crate::error::{Error, Result};
use crate::expectations::{self, CompensatorSpec};
use crate::model::{ModelSpec, System};
use crate::par;
use crate::sde::{self, SimConfig, Start};
use crate::symfun::elem_sym_all;

/// Acceptance threshold for flatness and agreement checks, in standard
/// errors.
pub const FLATNESS_Z_MAX: f64 = 4.0;

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl EstimateWithError {
    /// Discrepancy from `reference` in standard errors, with a tiny floor
    /// on the denominator so exact (deterministic) agreement reports 0.
    pub fn z_score(&self, reference: f64) -> f64 {
        let dev = self.mean - reference;
        let floor = 1e-12 * (1.0 + reference.abs());
        dev.abs() / self.std_error.max(floor)
    }
}

/// Means of a martingale compensator along the grid, against the value it
/// must stay pinned to.
#[derive(Debug, Clone)]
pub struct FlatnessReport {
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Compensator value at the start of the process.
    pub reference: f64,
    /// Max over the grid of |mean - reference| / SE.
    pub max_z: f64,
    pub n_paths: usize,
}

impl FlatnessReport {
    pub fn pass(&self) -> bool {
        self.max_z <= FLATNESS_Z_MAX
    }
}

/// One row of a characteristic-polynomial cross-check table.
#[derive(Debug, Clone, Copy)]
pub struct CharpolyRow {
    pub y: f64,
    pub mc_mean: f64,
    pub mc_std_error: f64,
    pub closed_form: f64,
    pub z: f64,
}

fn with_path_context(e: Error, path: usize) -> Error {
    match e {
        Error::Argument(m) => Error::Argument(format!("path {path}: {m}")),
        Error::SingularInput(m) => Error::SingularInput(format!("path {path}: {m}")),
        Error::Unsupported(m) => Error::Unsupported(format!("path {path}: {m}")),
        Error::IntegrationFailure(m) => {
            Error::IntegrationFailure(format!("path {path}: {m}"))
        }
        other => other,
    }
}

/// Simulates `m` paths and fills `n_out` observables per grid time; the
/// returned matrix is indexed `[path][time * n_out + slot]`.
fn path_matrix<F>(
    n_out: usize,
    fill: F,
    start: &Start,
    t_grid: &[f64],
    spec: &ModelSpec,
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], f64, &mut [f64]) + Sync,
{
    if m < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 paths for an estimate, got {m}"
        )));
    }
    let rows = par::indexed_map(m, |p| -> Result<Vec<f64>> {
        let rng = sde::path_stream(seed, p as u64);
        let traj = sde::simulate_path_with_rng(start, t_grid, spec, config, rng, seed)
            .map_err(|e| with_path_context(e, p))?;
        let mut row = vec![0.0; t_grid.len() * n_out];
        for (ti, state) in traj.states.iter().enumerate() {
            fill(
                state.coords(),
                traj.times[ti],
                &mut row[ti * n_out..(ti + 1) * n_out],
            );
        }
        Ok(row)
    });
    rows.into_iter().collect()
}

fn column_stats(rows: &[Vec<f64>], col: usize) -> EstimateWithError {
    let values: Vec<f64> = rows.iter().map(|r| r[col]).collect();
    let m = values.len();
    let mean = par::pairwise_sum(&values) / m as f64;
    let ss = par::pairwise_sum_by(&values, |v| {
        let d = v - mean;
        d * d
    });
    let var_of_mean = ss / ((m - 1) as f64 * m as f64);
    EstimateWithError {
        mean,
        std_error: var_of_mean.sqrt(),
        n_samples: m,
    }
}

/// Sample mean and standard error of `observable(state, t)` at each grid
/// time, over `m` independent paths. Deterministic given `seed`.
pub fn estimate<F>(
    observable: F,
    start: &Start,
    t_grid: &[f64],
    spec: &ModelSpec,
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<EstimateWithError>>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    let rows = path_matrix(
        1,
        |x, t, out| out[0] = observable(x, t),
        start,
        t_grid,
        spec,
        config,
        m,
        seed,
    )?;
    Ok((0..t_grid.len()).map(|ti| column_stats(&rows, ti)).collect())
}

/// Estimates of the elementary symmetric moments `e_k` for `k = 1..=n`
/// (of the state for type A, of the squared state for type B) at each grid
/// time, sharing one path ensemble; indexed `[time][k-1]`.
pub fn elem_sym_moments(
    n: usize,
    spec: &ModelSpec,
    start: &Start,
    t_grid: &[f64],
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<EstimateWithError>>> {
    let system = spec.system();
    let rows = path_matrix(
        n,
        |x, _t, out| {
            let e = match system {
                System::A => elem_sym_all(x),
                System::B => {
                    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                    elem_sym_all(&sq)
                }
            };
            out.copy_from_slice(&e[1..=n]);
        },
        start,
        t_grid,
        spec,
        config,
        m,
        seed,
    )?;
    Ok((0..t_grid.len())
        .map(|ti| {
            (0..n)
                .map(|k| column_stats(&rows, ti * n + k))
                .collect()
        })
        .collect())
}

/// Estimates `E compensator(t, X_t)` along the grid and reports how flat
/// it stays relative to its start value. Requires normalized simulation.
pub fn martingale_flatness(
    n: usize,
    k: usize,
    spec: &ModelSpec,
    start: &Start,
    t_grid: &[f64],
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<FlatnessReport> {
    if !config.normalized {
        return Err(Error::Argument(
            "martingale checks run on the normalized process".into(),
        ));
    }
    if start.dim() != n {
        return Err(Error::Argument(format!(
            "start has dimension {}, expected N={n}",
            start.dim()
        )));
    }
    let comp = CompensatorSpec::for_model(spec, n, k)?;
    let reference = match start {
        // The corner start leaves at time 0 where every e_k vanishes.
        Start::Corner { .. } => 0.0,
        Start::At(p) => comp.eval(p.coords(), t_grid.first().copied().unwrap_or(0.0)),
    };
    let ests = estimate(
        |x, t| comp.eval(x, t),
        start,
        t_grid,
        spec,
        config,
        m,
        seed,
    )?;
    let max_z = ests
        .iter()
        .map(|e| e.z_score(reference))
        .fold(0.0f64, f64::max);
    Ok(FlatnessReport {
        times: t_grid.to_vec(),
        means: ests.iter().map(|e| e.mean).collect(),
        std_errors: ests.iter().map(|e| e.std_error).collect(),
        reference,
        max_z,
        n_paths: m,
    })
}

/// [`martingale_flatness`] for every order `k = 1..=n` at once, sharing a
/// single path ensemble; returns one report per `k`.
pub fn martingale_flatness_all(
    n: usize,
    spec: &ModelSpec,
    start: &Start,
    t_grid: &[f64],
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<FlatnessReport>> {
    if !config.normalized {
        return Err(Error::Argument(
            "martingale checks run on the normalized process".into(),
        ));
    }
    if start.dim() != n {
        return Err(Error::Argument(format!(
            "start has dimension {}, expected N={n}",
            start.dim()
        )));
    }
    let comps: Vec<CompensatorSpec> = (1..=n)
        .map(|k| CompensatorSpec::for_model(spec, n, k))
        .collect::<Result<_>>()?;
    let references: Vec<f64> = comps
        .iter()
        .map(|comp| match start {
            Start::Corner { .. } => 0.0,
            Start::At(p) => comp.eval(p.coords(), t_grid.first().copied().unwrap_or(0.0)),
        })
        .collect();
    let rows = path_matrix(
        n,
        |x, t, out| {
            for (slot, comp) in comps.iter().enumerate() {
                out[slot] = comp.eval(x, t);
            }
        },
        start,
        t_grid,
        spec,
        config,
        m,
        seed,
    )?;
    Ok((0..n)
        .map(|slot| {
            let ests: Vec<EstimateWithError> = (0..t_grid.len())
                .map(|ti| column_stats(&rows, ti * n + slot))
                .collect();
            let reference = references[slot];
            let max_z = ests
                .iter()
                .map(|e| e.z_score(reference))
                .fold(0.0f64, f64::max);
            FlatnessReport {
                times: t_grid.to_vec(),
                means: ests.iter().map(|e| e.mean).collect(),
                std_errors: ests.iter().map(|e| e.std_error).collect(),
                reference,
                max_z,
                n_paths: m,
            }
        })
        .collect())
}

/// Monte-Carlo estimate of the expected characteristic polynomial for a
/// corner start against its closed form, one row per `y`. Type A compares
/// `E prod (y - X_i)`, type B `E prod (y - X_i^2)`, both for the raw
/// process (states are simulated normalized and rescaled by sqrt(beta)).
pub fn charpoly_check(
    n: usize,
    spec: &ModelSpec,
    t: f64,
    y_values: &[f64],
    config: &SimConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<CharpolyRow>> {
    let Some(beta) = spec.beta().finite() else {
        return Err(Error::Argument(
            "the characteristic-polynomial check requires a finite beta".into(),
        ));
    };
    if !config.normalized {
        return Err(Error::Argument(
            "the characteristic-polynomial check runs on normalized paths".into(),
        ));
    }
    if y_values.is_empty() {
        return Err(Error::Argument("need at least one y value".into()));
    }
    let system = spec.system();
    let rows = path_matrix(
        y_values.len(),
        |x, _t, out| {
            for (slot, &y) in y_values.iter().enumerate() {
                out[slot] = match system {
                    System::A => x
                        .iter()
                        .map(|&xi| y - beta.sqrt() * xi)
                        .product(),
                    System::B => x.iter().map(|&xi| y - beta * xi * xi).product(),
                };
            }
        },
        &Start::Corner { n },
        &[t],
        spec,
        config,
        m,
        seed,
    )?;
    y_values
        .iter()
        .enumerate()
        .map(|(slot, &y)| {
            let est = column_stats(&rows, slot);
            let closed_form = match system {
                System::A => expectations::expected_charpoly_a(n, beta, t, y)?,
                System::B => {
                    expectations::expected_charpoly_b(n, beta, spec.nu(), t, y)?
                }
            };
            Ok(CharpolyRow {
                y,
                mc_mean: est.mean,
                mc_std_error: est.std_error,
                closed_form,
                z: est.z_score(closed_form),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Beta, ChamberPoint};

    fn spec_a(beta: f64) -> ModelSpec {
        ModelSpec::type_a(Beta::Finite(beta)).unwrap()
    }

    #[test]
    fn constant_observable_has_zero_error() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-2);
        let ests = estimate(
            |_, _| 2.5,
            &Start::Corner { n: 2 },
            &[0.5],
            &spec,
            &config,
            64,
            1,
        )
        .unwrap();
        assert_eq!(ests[0].mean, 2.5);
        assert_eq!(ests[0].std_error, 0.0);
        assert_eq!(ests[0].n_samples, 64);
    }

    #[test]
    fn e1_stays_at_its_start_value() {
        // e_1 of the normalized process is driftless: its mean stays at
        // e_1(x0) for any coupling.
        let spec = spec_a(0.5);
        let config = SimConfig::new(1e-3);
        let x0 = ChamberPoint::new(vec![1.0, 0.0, -0.5], System::A).unwrap();
        let ests = estimate(
            |x, _| x.iter().sum::<f64>(),
            &Start::At(x0),
            &[0.0, 0.3, 0.8],
            &spec,
            &config,
            4000,
            42,
        )
        .unwrap();
        for est in &ests {
            assert!(est.z_score(0.5) <= 4.0, "{est:?}");
        }
    }

    #[test]
    fn single_particle_corner_mean_is_zero() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-3);
        let ests = estimate(
            |x, _| x[0],
            &Start::Corner { n: 1 },
            &[1.0],
            &spec,
            &config,
            10_000,
            7,
        )
        .unwrap();
        assert!(ests[0].z_score(0.0) <= 4.0, "{:?}", ests[0]);
        // And the variance should be close to t = 1.
        let second = estimate(
            |x, _| x[0] * x[0],
            &Start::Corner { n: 1 },
            &[1.0],
            &spec,
            &config,
            10_000,
            7,
        )
        .unwrap();
        assert!(second[0].z_score(1.0) <= 4.0, "{:?}", second[0]);
    }

    #[test]
    fn estimates_are_worker_count_invariant() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-2);
        let run = || {
            estimate(
                |x, _| x.iter().sum::<f64>(),
                &Start::Corner { n: 3 },
                &[0.25, 0.5],
                &spec,
                &config,
                256,
                13,
            )
            .unwrap()
        };
        let one = par::with_threads(1, run);
        let four = par::with_threads(4, run);
        assert_eq!(one, four);
    }

    #[test]
    fn standard_error_halves_when_m_quadruples() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-2);
        let se = |m: usize| {
            estimate(
                |x, _| x.iter().map(|v| v * v).sum::<f64>(),
                &Start::Corner { n: 2 },
                &[0.5],
                &spec,
                &config,
                m,
                3,
            )
            .unwrap()[0]
                .std_error
        };
        let ratio = se(4000) / se(1000);
        assert!(
            (ratio - 0.5).abs() <= 0.1,
            "SE ratio {ratio} should be close to 1/2"
        );
    }

    #[test]
    fn flatness_trivial_grid_passes() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-3);
        let report = martingale_flatness(
            2,
            1,
            &spec,
            &Start::Corner { n: 2 },
            &[0.5],
            &config,
            500,
            21,
        )
        .unwrap();
        assert!(report.pass(), "{report:?}");
        assert_eq!(report.reference, 0.0);
    }

    #[test]
    fn flatness_rejects_raw_mode_and_bad_k() {
        let spec = spec_a(1.0);
        let raw = SimConfig::new(1e-3).raw();
        assert!(martingale_flatness(
            2,
            1,
            &spec,
            &Start::Corner { n: 2 },
            &[0.5],
            &raw,
            100,
            1
        )
        .is_err());
        let config = SimConfig::new(1e-3);
        assert!(martingale_flatness(
            2,
            3,
            &spec,
            &Start::Corner { n: 2 },
            &[0.5],
            &config,
            100,
            1
        )
        .is_err());
    }

    #[test]
    fn flatness_all_matches_per_order_reports() {
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-2);
        let start = Start::Corner { n: 3 };
        let grid = [0.25, 0.5];
        let all = martingale_flatness_all(3, &spec, &start, &grid, &config, 300, 5)
            .unwrap();
        assert_eq!(all.len(), 3);
        for (k, report) in all.iter().enumerate() {
            let single = martingale_flatness(
                3,
                k + 1,
                &spec,
                &start,
                &grid,
                &config,
                300,
                5,
            )
            .unwrap();
            assert_eq!(report.means, single.means);
            assert_eq!(report.std_errors, single.std_errors);
        }
    }

    #[test]
    fn charpoly_single_particle_matches_identity() {
        // N=1 type A: E(y - X_t) = y.
        let spec = spec_a(1.0);
        let config = SimConfig::new(1e-3);
        let rows =
            charpoly_check(1, &spec, 1.0, &[0.0, 1.0], &config, 4000, 17).unwrap();
        for row in rows {
            assert!((row.closed_form - row.y).abs() < 1e-14);
            assert!(row.z <= 4.0, "{row:?}");
        }
    }
}

//! Time integration of the particle SDEs and of the frozen ODE.
//!
//! The Euler-Maruyama stepper integrates either the renormalized process
//! (noise `1/sqrt(beta)`, beta-free drift; the default) or the raw process
//! (unit noise, drift scaled by beta). Three guards make the singular
//! pairwise drift safe to step through:
//!
//! - pairwise gaps below `gap_floor` are floored before inverting, so the
//!   drift never overflows;
//! - a step whose drift displacement would exceed `substep_safety` times
//!   the minimal gap is split into equal substeps (capped at
//!   [`MAX_SUBSTEPS`]; beyond the cap the displacement is clamped), with
//!   fresh noise per substep; the substep count depends only on the
//!   pre-step state so replay is exact;
//! - every (sub)step ends with the Weyl projection back onto the chamber,
//!   which realizes the reflecting boundary exactly in law for symmetric
//!   observables.
//!
//! Corner starts (`x0 = 0`, where the drift is singular) are launched at
//! time `delta` from the frozen profile with the effective type-B
//! parameter; that start matches every expected elementary symmetric
//! moment of the true corner exit exactly, so the only warm-start bias is
//! in higher shape detail that decays along the path.
//!
//! Each path owns a counter-based random stream derived from
//! `(master seed, path index)`, so ensembles are reproducible bit-for-bit
//! regardless of scheduling or worker count.

use crate::error::{Error, Result};
use crate::model::{
    self, chamber_point_from_sorted, min_gap, project_in_place, ChamberPoint, ModelSpec, System,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Hard cap on substeps per outer step; past it the drift displacement is
/// clamped instead of split further.
pub const MAX_SUBSTEPS: u32 = 1 << 14;

/// Integration controls.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Maximum outer time step.
    pub dt_max: f64,
    /// Fraction of the minimal gap a drift displacement may cover in one
    /// (sub)step; in (0, 1).
    pub substep_safety: f64,
    /// Warm-start time for corner launches; `None` resolves to
    /// `1e-4 * t_final`.
    pub warm_start_delta: Option<f64>,
    /// Floor applied to pairwise gaps when inverting them in the drift.
    pub gap_floor: f64,
    /// Simulate the renormalized process (true, default) or the raw one.
    pub normalized: bool,
}

impl SimConfig {
    pub fn new(dt_max: f64) -> Self {
        Self {
            dt_max,
            substep_safety: 0.2,
            warm_start_delta: None,
            gap_floor: 1e-12,
            normalized: true,
        }
    }

    pub fn with_substep_safety(mut self, theta: f64) -> Self {
        self.substep_safety = theta;
        self
    }

    pub fn with_warm_start_delta(mut self, delta: f64) -> Self {
        self.warm_start_delta = Some(delta);
        self
    }

    pub fn with_gap_floor(mut self, floor: f64) -> Self {
        self.gap_floor = floor;
        self
    }

    /// Switch to raw-process coordinates `X = sqrt(beta) * Xtilde`.
    pub fn raw(mut self) -> Self {
        self.normalized = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::Argument(format!(
                "dt_max={} must be positive",
                self.dt_max
            )));
        }
        if !(self.substep_safety > 0.0 && self.substep_safety < 1.0) {
            return Err(Error::Argument(format!(
                "substep_safety={} must lie in (0, 1)",
                self.substep_safety
            )));
        }
        if !(self.gap_floor > 0.0) {
            return Err(Error::Argument(format!(
                "gap_floor={} must be positive",
                self.gap_floor
            )));
        }
        if let Some(d) = self.warm_start_delta {
            if !(d > 0.0) {
                return Err(Error::Argument(format!(
                    "warm_start_delta={d} must be positive"
                )));
            }
        }
        Ok(())
    }

    fn resolve_delta(&self, t_final: f64) -> f64 {
        self.warm_start_delta.unwrap_or(1e-4 * t_final)
    }
}

/// Initial condition: the chamber corner (origin) or an explicit point.
#[derive(Debug, Clone)]
pub enum Start {
    Corner { n: usize },
    At(ChamberPoint),
}

impl Start {
    pub fn dim(&self) -> usize {
        match self {
            Start::Corner { n } => *n,
            Start::At(p) => p.dim(),
        }
    }
}

/// One simulated path, recorded on its time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChamberPoint>,
    pub spec: ModelSpec,
    pub seed: u64,
}

/// The independent random stream of path `path_index` under `master_seed`.
/// ChaCha12 is a counter-mode generator, so distinct stream numbers give
/// independent sequences and replay does not depend on scheduling.
pub fn path_stream(master_seed: u64, path_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

struct Stepper<'a> {
    spec: &'a ModelSpec,
    config: &'a SimConfig,
    sigma: f64,
    drift_scale: f64,
    drift: Vec<f64>,
    wall_singular: bool,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ModelSpec, config: &'a SimConfig, n: usize) -> Result<Self> {
        let Some(beta) = spec.beta().finite() else {
            return Err(Error::Argument(
                "Euler-Maruyama stepping requires a finite beta; use the ODE path".into(),
            ));
        };
        let (sigma, drift_scale) = if config.normalized {
            (1.0 / beta.sqrt(), 1.0)
        } else {
            (1.0, beta)
        };
        Ok(Self {
            spec,
            config,
            sigma,
            drift_scale,
            drift: vec![0.0; n],
            wall_singular: spec.system() == System::B && spec.nu() > 0.0,
        })
    }

    /// Smallest denominator the drift actually inverts at `x` (sorted
    /// decreasingly): consecutive gaps, plus the wall distance when the
    /// wall term `nu/x` is present. The `x_i + x_j` denominators never
    /// bind (they dominate the corresponding difference), and with
    /// `nu = 0` the wall is not singular at all -- treating it as such
    /// would clamp legitimate drift whenever a particle sits near zero.
    fn singular_scale(&self, x: &[f64]) -> f64 {
        let mut g = f64::INFINITY;
        for w in x.windows(2) {
            g = g.min(w[0] - w[1]);
        }
        if self.wall_singular {
            if let Some(&last) = x.last() {
                g = g.min(last);
            }
        }
        g
    }

    fn drift_into(&mut self, x: &[f64]) {
        match self.spec.system() {
            System::A => model::accumulate_drift_a(
                x,
                self.drift_scale,
                &mut self.drift,
                self.config.gap_floor,
            ),
            System::B => model::accumulate_drift_b(
                x,
                self.drift_scale,
                self.spec.nu(),
                &mut self.drift,
                self.config.gap_floor,
            ),
        }
    }

    /// Substep count for an outer step of size `dt` from state `x`,
    /// derived from the pre-step state only.
    fn substep_count(&mut self, x: &[f64], dt: f64) -> u32 {
        self.drift_into(x);
        let gap = self.singular_scale(x).max(self.config.gap_floor);
        let max_disp = dt
            * self
                .drift
                .iter()
                .fold(0.0f64, |acc, d| acc.max(d.abs()));
        let ratio = max_disp / (self.config.substep_safety * gap);
        if !ratio.is_finite() {
            return MAX_SUBSTEPS;
        }
        ratio.ceil().clamp(1.0, MAX_SUBSTEPS as f64) as u32
    }

    /// One Euler-Maruyama step of size `dt`, substepping and projecting.
    ///
    /// The substep count keeps routine drift displacements below
    /// `substep_safety * gap`. Should a state degenerate mid-sequence
    /// (or the substep cap be exceeded), the displacement is clamped --
    /// but never below a few substep noise scales, so the clamp cannot
    /// bias the routine dynamics it is not meant to touch.
    fn step<R: Rng + ?Sized>(&mut self, x: &mut [f64], dt: f64, rng: &mut R) {
        let substeps = self.substep_count(x, dt);
        let sub_dt = dt / substeps as f64;
        let noise_scale = self.sigma * sub_dt.sqrt();
        for _ in 0..substeps {
            self.drift_into(x);
            let gap = self.singular_scale(x).max(self.config.gap_floor);
            let max_disp = (self.config.substep_safety * gap).max(4.0 * noise_scale);
            let drift_limit = max_disp / sub_dt;
            for (i, xi) in x.iter_mut().enumerate() {
                let d = self.drift[i].clamp(-drift_limit, drift_limit);
                let z: f64 = rng.sample(StandardNormal);
                *xi += d * sub_dt + noise_scale * z;
            }
            project_in_place(x, self.spec.system());
        }
    }
}

/// One Euler-Maruyama update of size `dt` from `x`, drawing however many
/// standard normal vectors the internal substepping needs from `rng`.
pub fn step_euler<R: Rng + ?Sized>(
    x: &ChamberPoint,
    dt: f64,
    rng: &mut R,
    spec: &ModelSpec,
    config: &SimConfig,
) -> Result<ChamberPoint> {
    config.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt={dt} must be positive")));
    }
    let mut stepper = Stepper::new(spec, config, x.dim())?;
    let mut coords = x.coords().to_vec();
    stepper.step(&mut coords, dt, rng);
    Ok(chamber_point_from_sorted(coords))
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Argument("time grid must be nonempty".into()));
    }
    if !(t_grid[0] >= 0.0) {
        return Err(Error::Argument("time grid must start at t >= 0".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Argument(
                "time grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Simulates one path and records the state at exactly the grid times.
///
/// Explicit starts are taken at time `t_grid[0]`; corner starts are taken
/// at time 0 and warm-started at `delta` from the frozen profile (grid
/// times at or below `delta` record the frozen flow itself). With
/// `beta = Infinite` the integration is delegated to [`simulate_ode_path`].
/// Fully deterministic given `(seed, config, spec, t_grid)`.
pub fn simulate_path(
    x0: &Start,
    t_grid: &[f64],
    spec: &ModelSpec,
    config: &SimConfig,
    seed: u64,
) -> Result<Trajectory> {
    let rng = path_stream(seed, 0);
    simulate_path_with_rng(x0, t_grid, spec, config, rng, seed)
}

/// [`simulate_path`] with a caller-prepared random stream; the Monte-Carlo
/// harness uses this with one stream per path index.
pub fn simulate_path_with_rng<R: Rng>(
    x0: &Start,
    t_grid: &[f64],
    spec: &ModelSpec,
    config: &SimConfig,
    mut rng: R,
    seed: u64,
) -> Result<Trajectory> {
    config.validate()?;
    validate_grid(t_grid)?;
    if spec.beta().is_infinite() {
        return simulate_ode_path(x0, t_grid, spec, config);
    }
    let n = x0.dim();
    let mut stepper = Stepper::new(spec, config, n)?;
    let scale = if config.normalized {
        1.0
    } else {
        spec.beta().finite().expect("finite checked above").sqrt()
    };

    let mut states: Vec<ChamberPoint> = Vec::with_capacity(t_grid.len());
    match x0 {
        Start::At(p) => {
            // Re-validate against this model's chamber.
            let point = ChamberPoint::new(p.coords().to_vec(), spec.system())?;
            let mut cur = point.coords().to_vec();
            states.push(point);
            let mut t_cur = t_grid[0];
            for &t_next in &t_grid[1..] {
                advance(&mut stepper, &mut cur, t_cur, t_next, &mut rng, config);
                t_cur = t_next;
                states.push(project_copy(&cur, spec.system()));
            }
        }
        Start::Corner { n } => {
            let t_final = *t_grid.last().expect("nonempty grid");
            if t_final == 0.0 {
                states.push(chamber_point_from_sorted(vec![0.0; *n]));
                return Ok(Trajectory {
                    times: t_grid.to_vec(),
                    states,
                    spec: *spec,
                    seed,
                });
            }
            let delta = config.resolve_delta(t_final);
            if !(delta > 0.0) {
                return Err(Error::Argument(format!(
                    "resolved warm-start delta {delta} must be positive"
                )));
            }
            let mut idx = 0;
            while idx < t_grid.len() && t_grid[idx] <= delta {
                let frozen = model::frozen_flow(t_grid[idx], 0.0, spec, *n)?;
                states.push(chamber_point_from_sorted(
                    frozen.iter().map(|z| scale * z).collect(),
                ));
                idx += 1;
            }
            let mut cur: Vec<f64> = model::frozen_flow(delta, 0.0, spec, *n)?
                .iter()
                .map(|z| scale * z)
                .collect();
            let mut t_cur = delta;
            for &t_next in &t_grid[idx..] {
                advance(&mut stepper, &mut cur, t_cur, t_next, &mut rng, config);
                t_cur = t_next;
                states.push(project_copy(&cur, spec.system()));
            }
        }
    }

    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        spec: *spec,
        seed,
    })
}

fn project_copy(x: &[f64], system: System) -> ChamberPoint {
    let mut coords = x.to_vec();
    project_in_place(&mut coords, system);
    chamber_point_from_sorted(coords)
}

fn advance<R: Rng>(
    stepper: &mut Stepper,
    cur: &mut [f64],
    from: f64,
    to: f64,
    rng: &mut R,
    config: &SimConfig,
) {
    let span = to - from;
    let n_steps = (span / config.dt_max).ceil().max(1.0) as u64;
    let dt = span / n_steps as f64;
    for _ in 0..n_steps {
        stepper.step(cur, dt, rng);
    }
}

/// Deterministic integration of the frozen (`beta = Infinite`) dynamics:
/// classical fixed-step fourth-order Runge-Kutta, with step halving when a
/// stage would collapse a gap. Corner starts bypass integration entirely
/// and return the closed-form frozen flow.
pub fn simulate_ode_path(
    x0: &Start,
    t_grid: &[f64],
    spec: &ModelSpec,
    config: &SimConfig,
) -> Result<Trajectory> {
    config.validate()?;
    validate_grid(t_grid)?;
    if !spec.beta().is_infinite() {
        return Err(Error::Argument(
            "the ODE integrator requires beta = Infinite".into(),
        ));
    }
    if !config.normalized {
        return Err(Error::Argument(
            "raw coordinates are undefined at beta = Infinite".into(),
        ));
    }

    let mut states = Vec::with_capacity(t_grid.len());
    match x0 {
        Start::Corner { n } => {
            for &t in t_grid {
                let frozen = model::frozen_flow(t, 0.0, spec, *n)?;
                states.push(chamber_point_from_sorted(frozen));
            }
        }
        Start::At(p) => {
            let point = ChamberPoint::new(p.coords().to_vec(), spec.system())?;
            if !point.is_interior(spec.system()) {
                return Err(Error::SingularInput(
                    "ODE integration needs an interior start".into(),
                ));
            }
            let mut cur = point.coords().to_vec();
            states.push(point);
            let mut t_cur = t_grid[0];
            for &t_next in &t_grid[1..] {
                rk4_advance(&mut cur, t_cur, t_next, spec, config)?;
                t_cur = t_next;
                states.push(chamber_point_from_sorted(cur.clone()));
            }
        }
    }

    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        spec: *spec,
        seed: 0,
    })
}

fn ode_drift(x: &[f64], spec: &ModelSpec, config: &SimConfig) -> Option<Vec<f64>> {
    if !(min_gap(x, spec.system()) > config.gap_floor) {
        return None;
    }
    model::drift_normalized(x, spec).ok()
}

fn rk4_try(x: &[f64], h: f64, spec: &ModelSpec, config: &SimConfig) -> Option<Vec<f64>> {
    let n = x.len();
    let k1 = ode_drift(x, spec, config)?;
    let stage = |base: &[f64], k: &[f64], w: f64| -> Vec<f64> {
        (0..n).map(|i| base[i] + w * k[i]).collect()
    };
    let k2 = ode_drift(&stage(x, &k1, 0.5 * h), spec, config)?;
    let k3 = ode_drift(&stage(x, &k2, 0.5 * h), spec, config)?;
    let k4 = ode_drift(&stage(x, &k3, h), spec, config)?;
    let next: Vec<f64> = (0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if !(min_gap(&next, spec.system()) > config.gap_floor) {
        return None;
    }
    Some(next)
}

fn rk4_advance(
    cur: &mut Vec<f64>,
    from: f64,
    to: f64,
    spec: &ModelSpec,
    config: &SimConfig,
) -> Result<()> {
    let min_h = config.dt_max * 2f64.powi(-40);
    let mut t = from;
    let mut h = config.dt_max;
    while to - t > 1e-12 * (1.0 + to.abs()) {
        let step = h.min(to - t);
        match rk4_try(cur, step, spec, config) {
            Some(next) => {
                *cur = next;
                t += step;
                h = config.dt_max;
            }
            None => {
                h = 0.5 * step;
                if h < min_h {
                    return Err(Error::IntegrationFailure(format!(
                        "gap collapse at t={t}: step fell below {min_h:.3e}"
                    )));
                }
            }
        }
    }
    Ok(())
}

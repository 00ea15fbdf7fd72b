//! Command runners. Exit-code contract: 0 = success / statistical PASS,
//! 1 = statistical FAIL, 2 = usage error, 3 = numerical failure.

use crate::args::*;
use crate::manifest::RunManifest;
use crate::output::{deliver, fmt_f64, Table};
use rand::Rng;
use std::time::Instant;
use weylsim::expectations::{
    expected_charpoly_a, expected_charpoly_b, expected_elem_sym_a, expected_elem_sym_b,
    CompensatorSpec,
};
use weylsim::model::{
    apply_generator_detailed, generator_step, Beta, ChamberPoint, ModelSpec, System,
};
use weylsim::montecarlo::{charpoly_check, martingale_flatness, FLATNESS_Z_MAX};
use weylsim::oracle::{bulk_proposal_scale, is_expectation, OracleConfig};
use weylsim::orthopoly::{
    hermite_stieltjes_residuals, hermite_zeros, laguerre_electrostatic_residuals,
    laguerre_zeros,
};
use weylsim::par;
use weylsim::sde::{path_stream, simulate_path_with_rng, SimConfig, Start};
use weylsim::symfun::elem_sym_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
pub enum CommandError {
    Usage(String),
    Numerical(weylsim::Error),
    Io(std::io::Error),
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e)
    }
}

type CmdResult = Result<Outcome, CommandError>;

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

fn parse_beta(s: &str) -> Result<Beta, CommandError> {
    let trimmed = s.trim();
    if trimmed == "inf" {
        return Ok(Beta::Infinite);
    }
    let v: f64 = trimmed
        .parse()
        .map_err(|_| usage(format!("cannot parse beta '{s}'")))?;
    if v.is_infinite() && v > 0.0 {
        return Ok(Beta::Infinite);
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(usage(format!("beta must be positive or 'inf', got '{s}'")));
    }
    Ok(Beta::Finite(v))
}

fn model_from_args(model: &ModelArgs) -> Result<ModelSpec, CommandError> {
    if model.n == 0 {
        return Err(usage("need at least one particle (--n >= 1)"));
    }
    let beta = parse_beta(&model.beta)?;
    match model.system {
        SystemArg::A => {
            if model.nu.is_some() {
                return Err(usage("--nu applies to --system b only"));
            }
            ModelSpec::type_a(beta).map_err(|e| usage(e.to_string()))
        }
        SystemArg::B => ModelSpec::type_b(beta, model.nu.unwrap_or(0.0))
            .map_err(|e| usage(e.to_string())),
    }
}

fn start_from_args(path: &PathArgs, n: usize, system: System) -> Result<Start, CommandError> {
    match (&path.x0, path.corner) {
        (None, true) => Ok(Start::Corner { n }),
        (Some(coords), false) => {
            if coords.len() != n {
                return Err(usage(format!(
                    "--x0 has {} coordinates, expected N={n}",
                    coords.len()
                )));
            }
            let point = ChamberPoint::new(coords.clone(), system)
                .map_err(|e| usage(format!("invalid start point: {e}")))?;
            Ok(Start::At(point))
        }
        (None, false) => Err(usage("specify a start: --corner or --x0")),
        (Some(_), true) => Err(usage("--corner conflicts with --x0")),
    }
}

fn sim_config(dt: f64, delta: Option<f64>) -> Result<SimConfig, CommandError> {
    if !(dt > 0.0) {
        return Err(usage(format!("--dt must be positive, got {dt}")));
    }
    let mut config = SimConfig::new(dt);
    if let Some(d) = delta {
        if !(d > 0.0) {
            return Err(usage(format!("--delta must be positive, got {d}")));
        }
        config = config.with_warm_start_delta(d);
    }
    Ok(config)
}

fn system_tag(system: SystemArg) -> &'static str {
    match system {
        SystemArg::A => "a",
        SystemArg::B => "b",
    }
}

pub fn cmd_zeros(args: &ZerosArgs) -> CmdResult {
    let started = Instant::now();
    if args.degree == 0 {
        return Err(usage("--degree must be at least 1"));
    }
    let (zeros, residuals) = match args.family {
        FamilyArg::Hermite => {
            if args.alpha.is_some() {
                return Err(usage("--alpha applies to --family laguerre only"));
            }
            let z = hermite_zeros(args.degree).map_err(CommandError::Numerical)?;
            let r = hermite_stieltjes_residuals(z.zeros());
            (z, r)
        }
        FamilyArg::Laguerre => {
            let alpha = args
                .alpha
                .ok_or_else(|| usage("--family laguerre requires --alpha"))?;
            let z = laguerre_zeros(args.degree, alpha).map_err(|e| {
                if alpha <= -1.0 {
                    usage(e.to_string())
                } else {
                    CommandError::Numerical(e)
                }
            })?;
            let r = laguerre_electrostatic_residuals(z.zeros(), alpha + 1.0);
            (z, r)
        }
    };

    let mut table = Table::new(&["index", "zero", "equilibrium_residual"]);
    for (i, (&z, &r)) in zeros.zeros().iter().zip(&residuals).enumerate() {
        table.push(vec![(i + 1).to_string(), fmt_f64(z), format!("{r:.3e}")]);
    }
    let manifest = RunManifest::new("zeros", args, args.run.seed)
        .with_duration(started.elapsed().as_secs_f64());
    deliver(args.run.out.as_deref(), &table.render(), &manifest)?;
    Ok(Outcome::Pass)
}

pub fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let started = Instant::now();
    if args.path.paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    let spec = model_from_args(&args.model)?;
    let start = start_from_args(&args.path, args.model.n, spec.system())?;
    let config = sim_config(args.path.dt, args.path.delta)?;
    if args.path.t_grid.is_empty() {
        return Err(usage("--t-grid must contain at least one time"));
    }

    let seed = args.run.seed;
    let grid = args.path.t_grid.clone();
    let trajectories = par::with_threads(args.run.threads, || {
        let rows = par::indexed_map(args.path.paths, |p| {
            let rng = path_stream(seed, p as u64);
            simulate_path_with_rng(&start, &grid, &spec, &config, rng, seed)
        });
        rows.into_iter().collect::<weylsim::Result<Vec<_>>>()
    })
    .map_err(|e| match e {
        weylsim::Error::Argument(m) => usage(m),
        other => CommandError::Numerical(other),
    })?;

    let mut header: Vec<String> = vec!["path_id".into(), "time".into()];
    for i in 1..=args.model.n {
        header.push(format!("x_{i}"));
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (p, traj) in trajectories.iter().enumerate() {
        for (ti, state) in traj.states.iter().enumerate() {
            out.push_str(&p.to_string());
            out.push(',');
            out.push_str(&fmt_f64(traj.times[ti]));
            for v in state.coords() {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
    }

    let manifest = RunManifest::new("simulate", args, seed)
        .with_duration(started.elapsed().as_secs_f64());
    deliver(args.run.out.as_deref(), &out, &manifest)?;
    Ok(Outcome::Pass)
}

pub fn cmd_martingale_check(args: &MartingaleArgs) -> CmdResult {
    let started = Instant::now();
    let spec = model_from_args(&args.model)?;
    let n = args.model.n;
    if args.k == 0 || args.k > n {
        return Err(usage(format!(
            "--k must satisfy 1 <= k <= N, got k={} with N={n}",
            args.k
        )));
    }
    if args.path.paths < 2 {
        return Err(usage("--paths must be at least 2"));
    }
    let start = start_from_args(&args.path, n, spec.system())?;
    let config = sim_config(args.path.dt, args.path.delta)?;
    if args.path.t_grid.is_empty() {
        return Err(usage("--t-grid must contain at least one time"));
    }

    let report = par::with_threads(args.run.threads, || {
        martingale_flatness(
            n,
            args.k,
            &spec,
            &start,
            &args.path.t_grid,
            &config,
            args.path.paths,
            args.run.seed,
        )
    })
    .map_err(CommandError::Numerical)?;

    let mut text = format!(
        "martingale flatness: system={} N={n} k={} beta={} nu={} paths={} seed={}\n",
        system_tag(args.model.system),
        args.k,
        args.model.beta,
        args.model.nu.map_or("-".into(), |v| v.to_string()),
        args.path.paths,
        args.run.seed,
    );
    text.push_str(&format!("reference = {}\n", fmt_f64(report.reference)));
    for i in 0..report.times.len() {
        let z = (report.means[i] - report.reference).abs()
            / report.std_errors[i].max(1e-12 * (1.0 + report.reference.abs()));
        text.push_str(&format!(
            "t={}  mean={}  se={}  z={:.3}\n",
            fmt_f64(report.times[i]),
            fmt_f64(report.means[i]),
            fmt_f64(report.std_errors[i]),
            z
        ));
    }
    text.push_str(&format!(
        "max_z = {:.3} (threshold {FLATNESS_Z_MAX})\nRESULT: {}\n",
        report.max_z,
        if report.pass() { "PASS" } else { "FAIL" }
    ));
    print!("{text}");

    if let Some(out) = args.run.out.as_deref() {
        let structured = serde_json::json!({
            "check": "martingale_flatness",
            "system": system_tag(args.model.system),
            "n": n,
            "k": args.k,
            "beta": args.model.beta,
            "nu": args.model.nu,
            "paths": args.path.paths,
            "times": report.times,
            "means": report.means,
            "std_errors": report.std_errors,
            "reference": report.reference,
            "max_z": report.max_z,
            "threshold": FLATNESS_Z_MAX,
            "pass": report.pass(),
        });
        let manifest = RunManifest::new("martingale-check", args, args.run.seed)
            .with_duration(started.elapsed().as_secs_f64());
        deliver(
            Some(out),
            &format!("{}\n", serde_json::to_string_pretty(&structured).unwrap()),
            &manifest,
        )?;
    }

    Ok(if report.pass() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

pub fn cmd_charpoly(args: &CharpolyArgs) -> CmdResult {
    let started = Instant::now();
    let spec = model_from_args(&args.model)?;
    let n = args.model.n;
    if !(args.t > 0.0) {
        return Err(usage(format!("--t must be positive, got {}", args.t)));
    }
    if args.y_values.is_empty() {
        return Err(usage("--y must contain at least one point"));
    }
    let Some(beta) = spec.beta().finite() else {
        return Err(usage(
            "the characteristic-polynomial check requires a finite beta",
        ));
    };

    let closed = |y: f64| -> weylsim::Result<f64> {
        match spec.system() {
            System::A => expected_charpoly_a(n, beta, args.t, y),
            System::B => expected_charpoly_b(n, beta, spec.nu(), args.t, y),
        }
    };

    let (content, outcome) = if args.paths == 0 {
        let mut table = Table::new(&["y", "closed_form"]);
        for &y in &args.y_values {
            let cf = closed(y).map_err(CommandError::Numerical)?;
            table.push(vec![fmt_f64(y), fmt_f64(cf)]);
        }
        (table.render(), Outcome::Pass)
    } else {
        if args.paths < 2 {
            return Err(usage("--paths must be 0 (closed form only) or at least 2"));
        }
        let config = sim_config(args.dt, args.delta)?;
        let rows = par::with_threads(args.run.threads, || {
            charpoly_check(
                n,
                &spec,
                args.t,
                &args.y_values,
                &config,
                args.paths,
                args.run.seed,
            )
        })
        .map_err(CommandError::Numerical)?;
        let mut table = Table::new(&["y", "closed_form", "mc_mean", "mc_std_error", "z"]);
        let mut worst: f64 = 0.0;
        for row in &rows {
            worst = worst.max(row.z);
            table.push(vec![
                fmt_f64(row.y),
                fmt_f64(row.closed_form),
                fmt_f64(row.mc_mean),
                fmt_f64(row.mc_std_error),
                format!("{:.3}", row.z),
            ]);
        }
        let outcome = if worst <= FLATNESS_Z_MAX {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        (table.render(), outcome)
    };

    let manifest = RunManifest::new("charpoly", args, args.run.seed)
        .with_duration(started.elapsed().as_secs_f64());
    deliver(args.run.out.as_deref(), &content, &manifest)?;
    Ok(outcome)
}

pub fn cmd_oracle(args: &OracleArgs) -> CmdResult {
    let started = Instant::now();
    let spec = model_from_args(&args.model)?;
    let n = args.model.n;
    if !(args.t > 0.0) {
        return Err(usage(format!("--t must be positive, got {}", args.t)));
    }
    let Some(beta) = spec.beta().finite() else {
        return Err(usage("the density oracle requires a finite beta"));
    };
    let k_list: Vec<usize> = match &args.k_list {
        Some(ks) => ks.clone(),
        None => (1..=n).collect(),
    };
    for &k in &k_list {
        if k == 0 || k > n {
            return Err(usage(format!(
                "--k-list entries must satisfy 1 <= k <= N, got {k}"
            )));
        }
    }
    let proposal_scale = match args.proposal_scale {
        Some(s) => s,
        None => bulk_proposal_scale(n, &spec).map_err(CommandError::Numerical)?,
    };
    let config =
        OracleConfig::new(args.samples, args.run.seed).with_proposal_scale(proposal_scale);

    let mut table = Table::new(&["k", "oracle_mean", "oracle_std_error", "closed_form", "z"]);
    let mut worst: f64 = 0.0;
    for &k in &k_list {
        let system = spec.system();
        let est = par::with_threads(args.run.threads, || {
            is_expectation(
                move |x: &[f64]| match system {
                    System::A => elem_sym_all(x)[k],
                    System::B => {
                        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                        elem_sym_all(&sq)[k]
                    }
                },
                n,
                &spec,
                args.t,
                &config,
            )
        })
        .map_err(|e| match e {
            weylsim::Error::Argument(m) => usage(m),
            other => CommandError::Numerical(other),
        })?;
        let closed = match spec.system() {
            System::A => expected_elem_sym_a(n, beta, args.t, k),
            System::B => expected_elem_sym_b(n, beta, spec.nu(), args.t, k),
        }
        .map_err(CommandError::Numerical)?;
        let z = est.z_score(closed);
        worst = worst.max(z);
        table.push(vec![
            k.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.std_error),
            fmt_f64(closed),
            format!("{z:.3}"),
        ]);
    }

    let manifest = RunManifest::new("oracle", args, args.run.seed)
        .with_duration(started.elapsed().as_secs_f64());
    deliver(args.run.out.as_deref(), &table.render(), &manifest)?;
    Ok(if worst <= FLATNESS_Z_MAX {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn sample_interior<R: Rng>(rng: &mut R, n: usize, system: System) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let point = weylsim::model::project_to_chamber(&raw, system);
        let coords = point.coords();
        let mut gap = f64::INFINITY;
        for w in coords.windows(2) {
            gap = gap.min(w[0] - w[1]);
        }
        if system == System::B {
            gap = gap.min(*coords.last().expect("nonempty"));
        }
        if gap >= 0.15 {
            return coords.to_vec();
        }
    }
}

pub fn cmd_harmonic_check(args: &HarmonicArgs) -> CmdResult {
    let started = Instant::now();
    let spec = model_from_args(&args.model)?;
    let n = args.model.n;
    if args.k == 0 || args.k > n {
        return Err(usage(format!(
            "--k must satisfy 1 <= k <= N, got k={} with N={n}",
            args.k
        )));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let comp = CompensatorSpec::for_model(&spec, n, args.k).map_err(CommandError::Numerical)?;

    let mut max_ratio: f64 = 0.0;
    for trial in 0..args.trials {
        let mut rng = path_stream(args.run.seed, trial as u64);
        let x = sample_interior(&mut rng, n, spec.system());
        let t = rng.gen_range(0.1..2.0);
        let h = generator_step(&x);
        let g = apply_generator_detailed(|x, t| comp.eval(x, t), &x, t, &spec, h)
            .map_err(CommandError::Numerical)?;
        max_ratio = max_ratio.max(g.value.abs() / g.term_scale);
    }

    let pass = max_ratio <= args.tolerance;
    let mut table = Table::new(&["trials", "max_residual_over_scale", "tolerance", "result"]);
    table.push(vec![
        args.trials.to_string(),
        format!("{max_ratio:.6e}"),
        format!("{:.1e}", args.tolerance),
        if pass { "PASS".into() } else { "FAIL".into() },
    ]);

    let manifest = RunManifest::new("harmonic-check", args, args.run.seed)
        .with_duration(started.elapsed().as_secs_f64());
    deliver(args.run.out.as_deref(), &table.render(), &manifest)?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

pub fn cmd_replay(args: &ReplayArgs) -> CmdResult {
    let manifest = RunManifest::load(&args.manifest)?;
    let params = manifest.params.clone();
    let override_out = |out: &mut Option<String>| {
        if let Some(o) = &args.out {
            *out = Some(o.clone());
        }
    };
    macro_rules! replay_as {
        ($ty:ty, $runner:expr) => {{
            let mut parsed: $ty = serde_json::from_value(params).map_err(|e| {
                usage(format!("manifest parameters do not match command: {e}"))
            })?;
            override_out(&mut parsed.run.out);
            $runner(&parsed)
        }};
    }
    match manifest.command.as_str() {
        "zeros" => replay_as!(ZerosArgs, cmd_zeros),
        "simulate" => replay_as!(SimulateArgs, cmd_simulate),
        "martingale-check" => replay_as!(MartingaleArgs, cmd_martingale_check),
        "charpoly" => replay_as!(CharpolyArgs, cmd_charpoly),
        "oracle" => replay_as!(OracleArgs, cmd_oracle),
        "harmonic-check" => replay_as!(HarmonicArgs, cmd_harmonic_check),
        other => Err(usage(format!("unknown command '{other}' in manifest"))),
    }
}

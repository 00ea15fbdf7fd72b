//! The two verification channels must agree with each other, not just
//! with the closed forms: path-ensemble estimates vs the density-based
//! importance-sampling oracle, on the same raw-process observables.

use weylsim::model::{Beta, ModelSpec};
use weylsim::montecarlo::estimate;
use weylsim::oracle::{bulk_proposal_scale, is_expectation, OracleConfig};
use weylsim::sde::{SimConfig, Start};
use weylsim::symfun::elem_sym_all;

fn agree(label: &str, a: (f64, f64), b: (f64, f64)) {
    let band = (a.1 * a.1 + b.1 * b.1).sqrt().max(1e-12);
    let z = (a.0 - b.0).abs() / band;
    assert!(z <= 4.0, "{label}: {} vs {} (z = {z:.2})", a.0, b.0);
}

#[test]
fn oracle_and_paths_agree_type_a() {
    let beta = 1.0;
    let spec = ModelSpec::type_a(Beta::Finite(beta)).unwrap();
    let t = 1.0;
    let config = SimConfig::new(1e-3).with_warm_start_delta(1e-4);

    for k in 1..=2usize {
        // Raw observable from normalized states: e_k(sqrt(beta) x) =
        // beta^(k/2) e_k(x).
        let factor = beta.powf(k as f64 / 2.0);
        let mc = estimate(
            move |x, _| factor * elem_sym_all(x)[k],
            &Start::Corner { n: 2 },
            &[t],
            &spec,
            &config,
            10_000,
            71,
        )
        .unwrap()[0];
        let cfg = OracleConfig::new(100_000, 72)
            .with_proposal_scale(bulk_proposal_scale(2, &spec).unwrap());
        let orc = is_expectation(|x| elem_sym_all(x)[k], 2, &spec, t, &cfg).unwrap();
        agree(
            &format!("A k={k}"),
            (mc.mean, mc.std_error),
            (orc.mean, orc.std_error),
        );
    }
}

#[test]
fn oracle_and_paths_agree_type_b() {
    let beta = 0.5;
    let spec = ModelSpec::type_b(Beta::Finite(beta), 1.0).unwrap();
    let t = 1.0;
    let config = SimConfig::new(1e-3).with_warm_start_delta(1e-4);

    for k in 1..=2usize {
        // e_k(X^2) = beta^k e_k(Xtilde^2).
        let factor = beta.powi(k as i32);
        let mc = estimate(
            move |x, _| {
                let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                factor * elem_sym_all(&sq)[k]
            },
            &Start::Corner { n: 2 },
            &[t],
            &spec,
            &config,
            10_000,
            73,
        )
        .unwrap()[0];
        let cfg = OracleConfig::new(100_000, 74)
            .with_proposal_scale(bulk_proposal_scale(2, &spec).unwrap());
        let orc = is_expectation(
            |x| {
                let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                elem_sym_all(&sq)[k]
            },
            2,
            &spec,
            t,
            &cfg,
        )
        .unwrap();
        agree(
            &format!("B k={k}"),
            (mc.mean, mc.std_error),
            (orc.mean, orc.std_error),
        );
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported but do not fail the run;
//! any other failure exits non-zero.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use irs_relay::harness::{draw_gains, run_sweep, AggregateRow, Axis, RunSettings, SweepSpec};
use irs_relay::irs_phase::PhaseStrategy;
use irs_relay::pa_opt::{
    max_min_sr, max_sr, max_sr_rc, oracle_grid, Method, OracleObjective, PAResult, SolverOptions,
};
use irs_relay::rate_model::{sum_rate, sum_rate_expanded, LinkGains, LinkRates, PAFactors};
use irs_relay::scenario::{dbm_to_watt, RngStream, SystemConfig};

const SEED: u64 = 2024;
const INSTANCES: usize = 100;
const SWEEP_TRIALS: usize = 200;

/// Reproducible failures of the model itself, not of the solvers.
const KNOWN_FAILURES: &[&str] = &["mu-trend", "figure-3/4-trends"];

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Instance {
    mm: PAResult,
    sr: PAResult,
    rc: PAResult,
    oracle: f64,
}

fn instances(cfg: &SystemConfig) -> (Vec<Instance>, Duration) {
    let p = cfg.total_power_watt();
    let opts = cfg.solver_options();
    let phase = PhaseStrategy::default();
    let start = Instant::now();
    let out = (0..INSTANCES)
        .into_par_iter()
        .map(|t| {
            let g = draw_gains(cfg, &phase, &mut RngStream::new(SEED, t as u64)).unwrap();
            Instance {
                mm: max_min_sr(&g, p, &opts).unwrap(),
                sr: max_sr(&g, p, &opts).unwrap(),
                rc: max_sr_rc(&g, p, cfg.mu, &opts).unwrap(),
                oracle: oracle_grid(&g, p, OracleObjective::TrueSumRate, 2000)
                    .unwrap()
                    .r_reported,
            }
        })
        .collect();
    (out, start.elapsed())
}

fn oracle_equivalence(inst: &[Instance], elapsed: Duration) -> Verdict {
    let worst = inst
        .iter()
        .map(|i| (i.mm.r_reported - i.oracle).abs())
        .fold(0.0, f64::max);
    Verdict {
        name: "oracle-equivalence",
        pass: worst <= 1e-3 && elapsed < Duration::from_secs(120),
        detail: format!(
            "max |max-min-sr - grid| = {worst:.2e} (tol 1e-3) over {} instances, {:.1}s (limit 120s)",
            inst.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn restriction_ordering(inst: &[Instance]) -> Verdict {
    let above_mm = inst
        .iter()
        .filter(|i| i.sr.r_reported > i.mm.r_reported + 1e-6)
        .count();
    let above_true = inst
        .iter()
        .filter(|i| i.sr.r_reported > i.sr.r_true + 1e-6)
        .count();
    Verdict {
        name: "restriction-ordering",
        pass: above_mm == 0 && above_true == 0,
        detail: format!(
            "max-sr above max-min-sr: {above_mm}, max-sr reported above its sum rate: {above_true}"
        ),
    }
}

fn sca_monotonicity(inst: &[Instance]) -> Verdict {
    let decreasing = |r: &PAResult| r.trace.windows(2).any(|w| w[1] < w[0] - 1e-9);
    let bad_sr = inst.iter().filter(|i| decreasing(&i.sr)).count();
    let bad_rc = inst.iter().filter(|i| decreasing(&i.rc)).count();
    let rounds: usize = inst.iter().map(|i| i.sr.iterations + i.rc.iterations).sum();
    Verdict {
        name: "sca-monotonicity",
        pass: bad_sr == 0 && bad_rc == 0,
        detail: format!(
            "decreasing traces: max-sr {bad_sr}, max-sr-rc {bad_rc} ({rounds} rounds checked)"
        ),
    }
}

fn rate_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut mac_violations) = (0.0f64, 0usize);
    for _ in 0..10_000 {
        let mut gamma = || 10f64.powf(rng.random_range(-3.0..6.0));
        let g = LinkGains::new(gamma(), gamma(), gamma(), gamma()).unwrap();
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        let (a, b) = (u.min(v), u.max(v));
        let beta = PAFactors::from_users(a, b - a);
        let p = 10f64.powf(rng.random_range(-3.0..3.0));
        worst = worst.max((sum_rate(&g, &beta, p) - sum_rate_expanded(&g, &beta, p)).abs());
        let r = LinkRates::at(&g, &beta, p);
        if r.r_1ir + r.r_2ir < r.r_mac - 1e-12 {
            mac_violations += 1;
        }
    }
    Verdict {
        name: "rate-identities",
        pass: worst <= 1e-12 && mac_violations == 0,
        detail: format!(
            "10^4 tuples: max |compact - expanded| = {worst:.1e}, MAC inequality violations {mac_violations}"
        ),
    }
}

fn analytic_fixed_points() -> Verdict {
    let g = LinkGains::uniform(1.0);
    let opts = SolverOptions::default();
    let mm = max_min_sr(&g, 1.0, &opts).unwrap().r_reported;
    let rc = max_sr_rc(&g, 1.0, 3.0, &opts).unwrap().r_reported;
    let mm_grid = oracle_grid(&g, 1.0, OracleObjective::TrueSumRate, 2000)
        .unwrap()
        .r_reported;
    let rc_grid = oracle_grid(&g, 1.0, OracleObjective::RatioObjective { mu: 3.0 }, 2000)
        .unwrap()
        .r_reported;
    let pass = (mm - 0.3816).abs() <= 1e-3
        && (rc - 0.438).abs() <= 2e-3
        && (mm - mm_grid).abs() <= 1e-3
        && (rc - rc_grid).abs() <= 2e-3;
    Verdict {
        name: "analytic-fixed-points",
        pass,
        detail: format!(
            "max-min-sr {mm:.5} (0.3816, grid {mm_grid:.5}), max-sr-rc {rc:.5} (0.438, grid {rc_grid:.5})"
        ),
    }
}

fn sweep(
    axis: Axis,
    values: Vec<f64>,
    base: SystemConfig,
    methods: Vec<Method>,
) -> Vec<AggregateRow> {
    let spec = SweepSpec {
        values,
        trials: SWEEP_TRIALS,
        settings: RunSettings {
            methods,
            ..RunSettings::default()
        },
        ..SweepSpec::new(axis, base)
    };
    run_sweep(&spec, SEED).unwrap().aggregates
}

fn series(rows: &[AggregateRow], method: Method, f: fn(&AggregateRow) -> f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.method == method)
        .map(|r| (r.axis_value, f(r)))
        .collect()
}

fn mu_trend() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for p_dbm in [0.0, 10.0, 20.0, 30.0] {
        let base = SystemConfig {
            p_dbm,
            ..SystemConfig::default()
        };
        let rows = sweep(
            Axis::Mu,
            Axis::Mu.default_values(),
            base,
            vec![Method::MaxSrRc],
        );
        let s = series(&rows, Method::MaxSrRc, |r| r.mean_r_reported);
        let monotone = s.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
        let at = |mu: f64| s.iter().find(|(v, _)| *v == mu).unwrap().1;
        let change = (at(6.0) - at(3.0)).abs() / at(3.0);
        let ok = monotone && change < 0.02;
        pass &= ok;
        parts.push(format!(
            "{p_dbm} dBm: {}monotone, mu 3->6 {:.2}%{}",
            if monotone { "" } else { "not " },
            100.0 * change,
            if ok { "" } else { " [x]" }
        ));
    }
    Verdict {
        name: "mu-trend",
        pass,
        detail: parts.join("; "),
    }
}

fn non_monotone(rows: &[AggregateRow], increasing: bool) -> Vec<&'static str> {
    Method::SCHEMES
        .iter()
        .filter(|&&m| {
            let s = series(rows, m, |r| r.mean_r_true);
            !s.windows(2).all(|w| {
                if increasing {
                    w[1].1 >= w[0].1
                } else {
                    w[1].1 <= w[0].1
                }
            })
        })
        .map(|m| m.name())
        .collect()
}

fn mean_of(rows: &[AggregateRow], value: f64, method: Method) -> f64 {
    rows.iter()
        .find(|r| r.axis_value == value && r.method == method)
        .unwrap()
        .mean_r_true
}

fn figure_trends() -> Verdict {
    let methods = Method::SCHEMES.to_vec();
    let power = sweep(
        Axis::PowerDbm,
        Axis::PowerDbm.default_values(),
        SystemConfig::default(),
        methods.clone(),
    );
    let sigma = sweep(
        Axis::SigmaDb,
        Axis::SigmaDb.default_values(),
        SystemConfig {
            p_dbm: 40.0,
            ..SystemConfig::default()
        },
        methods,
    );
    let p_bad = non_monotone(&power, true);
    let s_bad = non_monotone(&sigma, false);
    let below = |rows: &[AggregateRow]| {
        rows.iter()
            .filter(|r| r.method == Method::Epa)
            .filter(|r| mean_of(rows, r.axis_value, Method::MaxMinSr) < r.mean_r_true)
            .count()
    };
    let dominated = below(&power) + below(&sigma);
    let gain = mean_of(&sigma, 5.0, Method::MaxMinSr) / mean_of(&sigma, 5.0, Method::Epa) - 1.0;
    let gain_ok = (0.05..=0.50).contains(&gain);
    let sigma_curve: Vec<String> = series(&sigma, Method::Epa, |r| r.mean_r_true)
        .iter()
        .map(|(_, v)| format!("{v:.3}"))
        .collect();
    Verdict {
        name: "figure-3/4-trends",
        pass: p_bad.is_empty() && s_bad.is_empty() && dominated == 0 && gain_ok,
        detail: format!(
            "non-decreasing in P: {}; non-increasing in sigma: {} (epa {}); \
             max-min-sr below epa at {dominated} points; gain at 40 dBm, sigma 5: {:.1}% (band 5-50%)",
            if p_bad.is_empty() { "ok".to_string() } else { format!("violated by {p_bad:?}") },
            if s_bad.is_empty() { "ok".to_string() } else { format!("violated by {s_bad:?}") },
            sigma_curve.join(" "),
            100.0 * gain
        ),
    }
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_irs-relay");
    let dir = tempfile::tempdir().unwrap();
    let invocations: [&[&str]; 3] = [
        &["run", "--trials", "4", "--seed", "9"],
        &["sweep-power", "--trials", "3", "--values", "0,20,40"],
        &[
            "sweep-mu",
            "--trials",
            "3",
            "--method",
            "all",
            "--phase-strategy",
            "random",
        ],
    ];
    let mut identical = 0;
    for (k, args) in invocations.iter().enumerate() {
        let outputs: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = (0..2)
            .map(|rep| {
                let out = dir.path().join(format!("{k}_{rep}.csv"));
                let o = Command::new(bin)
                    .args(*args)
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .unwrap();
                assert!(
                    o.status.success(),
                    "{args:?}: {}",
                    String::from_utf8_lossy(&o.stderr)
                );
                let agg =
                    std::fs::read(irs_relay::harness::aggregate_path(&out)).unwrap_or_default();
                (o.stdout, std::fs::read(&out).unwrap(), agg)
            })
            .collect();
        if outputs[0] == outputs[1] {
            identical += 1;
        }
    }
    Verdict {
        name: "determinism",
        pass: identical == invocations.len(),
        detail: format!(
            "{identical}/{} repeated invocations byte-identical",
            invocations.len()
        ),
    }
}

fn main() -> ExitCode {
    let cfg = SystemConfig::default();
    assert_eq!(cfg.total_power_watt(), dbm_to_watt(40.0));
    let (inst, elapsed) = instances(&cfg);
    let verdicts = [
        oracle_equivalence(&inst, elapsed),
        restriction_ordering(&inst),
        sca_monotonicity(&inst),
        rate_identities(),
        analytic_fixed_points(),
        mu_trend(),
        figure_trends(),
        determinism(),
    ];
    let mut unexpected = 0;
    println!();
    for v in &verdicts {
        let known = KNOWN_FAILURES.contains(&v.name);
        let tag = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag:<12} {:<22} {}", v.name, v.detail);
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!(
        "\nacceptance: {passed}/{} criteria pass, {unexpected} unexpected failures",
        verdicts.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::fmt::Write as _;

use pegasus_core::bicycle::{evaluate_rides, train_bicycle, BikeWeights};
use pegasus_core::gridworld::{
    build_gridworld, gridworld_experiment, wrap_complex, Cell, Dir, ExperimentConfig, GridWorld,
};
use pegasus_core::rng;
use pegasus_core::sim::{fidelity_check, fmt17, horizon_time};
use pegasus_core::theory::{
    capacity_log_bound, counterexample_demo, covering_bound, covering_log_bound, sample_size_bound, sample_size_real,
};
use rayon::prelude::*;

use crate::config::{
    BicycleEvalParams, BicycleTrainParams, BoundsParams, CounterexampleParams, FidelityParams, GridVariant,
    GridworldParams, Params, RunConfig,
};
use crate::RunError;

/// Runs the configured experiment and returns the CSV body.
pub fn dispatch(config: &RunConfig) -> Result<String, RunError> {
    let seed = config.seed;
    match &config.params {
        Params::Gridworld(p) => gridworld(p, seed),
        Params::BicycleTrain(p) => bicycle_train(p),
        Params::BicycleEval(p) => bicycle_eval(p, seed),
        Params::Counterexample(p) => counterexample(p, seed),
        Params::Bounds(p) => bounds(p),
        Params::Fidelity(p) => fidelity(p, seed),
    }
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

fn gridworld(p: &GridworldParams, seed: u64) -> Result<String, RunError> {
    let cfg = ExperimentConfig { m_values: p.m_values.clone(), trials: p.trials, h: p.h, gamma: p.gamma, seed };
    let table = gridworld_experiment(&cfg).map_err(runtime)?;
    let mut out = Vec::new();
    table.write_csv(&mut out).map_err(runtime)?;
    Ok(String::from_utf8(out).expect("ascii csv"))
}

fn bicycle_train(p: &BicycleTrainParams) -> Result<String, RunError> {
    let init = p.init_weights.as_deref().map(|w| BikeWeights::from_slice(w).expect("validated weights"));
    let report = train_bicycle(&p.bicycle, &p.training, init.as_ref()).map_err(runtime)?;
    let mut out = String::new();
    writeln!(out, "# estimate={}", fmt17(report.estimate)).unwrap();
    writeln!(out, "# evaluations={}", report.evaluations).unwrap();
    out.push_str("kind,index,value\n");
    for (i, w) in report.weights.to_vec().iter().enumerate() {
        writeln!(out, "weight,{i},{}", fmt17(*w)).unwrap();
    }
    for (iter, v) in &report.trace {
        writeln!(out, "trace,{iter},{}", fmt17(*v)).unwrap();
    }
    Ok(out)
}

/// Reads the `weight` rows of a `bicycle-train` output.
pub fn read_weights(text: &str) -> Result<BikeWeights, RunError> {
    let mut w = vec![f64::NAN; BikeWeights::LEN];
    for line in text.lines().filter(|l| l.starts_with("weight,")) {
        let mut it = line.split(',').skip(1);
        let parsed = it.next().and_then(|i| i.parse::<usize>().ok()).zip(it.next().and_then(|v| v.parse::<f64>().ok()));
        match parsed {
            Some((i, v)) if i < w.len() => w[i] = v,
            _ => return Err(RunError::Runtime(format!("malformed weight row `{line}`"))),
        }
    }
    BikeWeights::from_slice(&w)
        .ok_or_else(|| RunError::Runtime(format!("weights file needs {} finite weight rows", BikeWeights::LEN)))
}

fn bicycle_eval(p: &BicycleEvalParams, seed: u64) -> Result<String, RunError> {
    let weights = match (&p.weights, &p.weights_path) {
        (Some(w), _) => BikeWeights::from_slice(w).expect("validated weights"),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Runtime(format!("cannot read weights {path}: {e}")))?;
            read_weights(&text)?
        }
        (None, None) => unreachable!("validated config has weights"),
    };
    let report = evaluate_rides(&p.bicycle, &weights, p.rides, rng::child_seed(seed, 2)).map_err(runtime)?;
    let opt = |x: Option<usize>| x.map(|s| s.to_string()).unwrap_or_default();
    let mut out = String::new();
    writeln!(out, "# unfallen_fraction={}", fmt17(report.unfallen_fraction())).unwrap();
    writeln!(out, "# fallen_within_200={}", fmt17(report.fallen_within(200))).unwrap();
    writeln!(out, "# goal_fraction={}", fmt17(report.goal_fraction())).unwrap();
    writeln!(out, "# mean_progress={}", fmt17(report.mean_progress())).unwrap();
    match report.median_goal_path() {
        Some(m) => writeln!(out, "# median_goal_path={}", fmt17(m)).unwrap(),
        None => writeln!(out, "# median_goal_path=none").unwrap(),
    }
    out.push_str("ride,fall_step,goal_step,path_length,progress\n");
    for (i, r) in report.rides.iter().enumerate() {
        writeln!(out, "{i},{},{},{},{}", opt(r.fall_step), opt(r.goal_step), fmt17(r.path_length), fmt17(r.progress))
            .unwrap();
    }
    Ok(out)
}

fn counterexample(p: &CounterexampleParams, seed: u64) -> Result<String, RunError> {
    let reports = p
        .m_values
        .par_iter()
        .map(|&m| counterexample_demo(m, p.h, rng::child_seed(seed, m as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let mut out = String::from("m,policy_index,v_hat,v_true,gap,measure\n");
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.m,
            r.policy_index,
            fmt17(r.v_hat),
            fmt17(r.v_true),
            fmt17(r.gap),
            r.measure
        )
        .unwrap();
    }
    Ok(out)
}

fn bounds(p: &BoundsParams) -> Result<String, RunError> {
    let h_eps = match (p.h_eps, p.gamma) {
        (Some(h), _) => h,
        (None, Some(g)) => {
            let h = horizon_time(p.epsilon, g, p.m_big).map_err(runtime)?;
            u32::try_from(h).map_err(runtime)?
        }
        (None, None) => unreachable!("validated config has a horizon"),
    };
    let inputs = p.inputs(h_eps);
    let mut out = String::new();
    writeln!(out, "h_eps={h_eps}").unwrap();
    writeln!(out, "covering_bound={}", fmt17(covering_bound(p.epsilon, p.m_big, p.d).map_err(runtime)?)).unwrap();
    writeln!(out, "covering_log_bound={}", fmt17(covering_log_bound(p.epsilon, p.m_big, p.d).map_err(runtime)?))
        .unwrap();
    writeln!(out, "capacity_log_bound={}", fmt17(capacity_log_bound(&inputs).map_err(runtime)?)).unwrap();
    writeln!(out, "sample_size_real={}", fmt17(sample_size_real(&inputs).map_err(runtime)?)).unwrap();
    writeln!(out, "sample_size_bound={}", sample_size_bound(&inputs).map_err(runtime)?).unwrap();
    Ok(out)
}

const COMPLEX_FIDELITY_STREAM: u64 = 0xF1DE;

fn fidelity(p: &FidelityParams, seed: u64) -> Result<String, RunError> {
    let pairs: Vec<(Cell, Dir)> =
        Cell::all().filter(|c| *c != Cell::GOAL).flat_map(|c| Dir::ALL.map(|a| (c, a))).collect();
    let base = build_gridworld();
    let complex = wrap_complex(base, rng::child_seed(seed, COMPLEX_FIDELITY_STREAM));
    let check = |k: usize, (cell, a): (Cell, Dir)| {
        let reference = GridWorld::analytic_distribution(cell, a);
        let s = rng::child_seed(seed, k as u64);
        match p.variant {
            GridVariant::Normal => fidelity_check(&base, &cell, &a, &reference, p.n, s),
            GridVariant::Complex => fidelity_check(&complex, &cell, &a, &reference, p.n, s),
        }
    };
    let reports = pairs
        .par_iter()
        .enumerate()
        .map(|(k, pair)| check(k, *pair))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let all = reports.iter().all(|r| r.passed);
    let mut out = String::new();
    writeln!(out, "# all_passed={all}").unwrap();
    out.push_str("x,y,action,n,passed,max_abs_z\n");
    for ((cell, a), r) in pairs.iter().zip(&reports) {
        let z = r.outcomes.iter().map(|o| o.z.abs()).fold(0.0, f64::max);
        writeln!(out, "{},{},{:?},{},{},{}", cell.x, cell.y, a, r.n, r.passed, fmt17(z)).unwrap();
    }
    Ok(out)
}

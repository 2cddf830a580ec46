use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use super::{
    policy_from_index, wrap_complex, Cell, Dir, GridPolicyClass, GridWorld, TabularPolicy, N_CELLS, N_POLICIES,
};
use crate::rng;
use crate::search::{exhaustive_search_pruned, SearchError, SearchReport};
use crate::sim::{discount_weights, draw_scenarios, exact_value_tabular, Policy, Scenario, SimError, SimModel};

/// Scenario set compiled into per-step next-cell tables.
///
/// `next[i][t][cell * 4 + action]` is the model's successor on scenario `i` at step
/// `t`, so evaluating a policy is a chain of table lookups. The arithmetic matches
/// [`crate::sim::estimate_value`] operation for operation, hence values are bit
/// identical to the generic estimator. Rewards are `-1` off the goal and `0` on it,
/// which is what makes threshold pruning sound.
#[derive(Debug, Clone)]
pub struct CompiledScenarios {
    initial: Vec<Cell>,
    next: Vec<u8>,
    h: usize,
    weights: Vec<f64>,
}

const ROW: usize = N_CELLS * 4;

impl CompiledScenarios {
    pub fn new<M>(model: &M, scenarios: &[Scenario<Cell>], h: usize) -> Result<Self, SimError>
    where
        M: SimModel<State = Cell, Action = Dir>,
    {
        if scenarios.is_empty() {
            return Err(SimError::EmptyScenarios);
        }
        for c in Cell::all() {
            let r = model.reward(&c);
            if r != if c == Cell::GOAL { 0.0 } else { -1.0 } || model.is_absorbing(&c) != (c == Cell::GOAL) {
                return Err(SimError::Domain("compiled evaluation needs the standard gridworld rewards".into()));
            }
        }
        let mut next = Vec::with_capacity(scenarios.len() * h * ROW);
        for sc in scenarios {
            if sc.width() != 1 {
                return Err(SimError::NoiseWidth { expected: 1, found: sc.width() });
            }
            if sc.rows() < h {
                return Err(SimError::TooFewRows { needed: h, found: sc.rows() });
            }
            for t in 0..h {
                let p = sc.row(t);
                for cell in Cell::all() {
                    for a in Dir::ALL {
                        next.push(model.transition(&cell, &a, p).index() as u8);
                    }
                }
            }
        }
        Ok(Self {
            initial: scenarios.iter().map(|s| *s.initial_state()).collect(),
            next,
            h,
            weights: discount_weights(model.gamma(), h),
        })
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    fn scenario_return(&self, i: usize, actions: &[u8; N_CELLS]) -> f64 {
        let goal = Cell::GOAL.index();
        let table = &self.next[i * self.h * ROW..(i + 1) * self.h * ROW];
        let mut cell = self.initial[i].index();
        let mut acc = 0.0;
        let reward = |c: usize| if c == goal { 0.0 } else { -1.0 };
        acc += self.weights[0] * reward(cell);
        if cell == goal {
            return acc;
        }
        for t in 0..self.h {
            cell = table[t * ROW + cell * 4 + actions[cell] as usize] as usize;
            acc += self.weights[t + 1] * reward(cell);
            if cell == goal {
                break;
            }
        }
        acc
    }

    fn actions(policy: &TabularPolicy) -> [u8; N_CELLS] {
        let mut out = [0u8; N_CELLS];
        for c in Cell::all() {
            out[c.index()] = policy.action(&c).id() as u8;
        }
        out
    }

    /// The scenario-average estimate of `policy`.
    pub fn evaluate(&self, policy: &TabularPolicy) -> f64 {
        self.evaluate_bounded(policy, f64::NEG_INFINITY).expect("no threshold")
    }

    pub fn per_scenario(&self, policy: &TabularPolicy) -> Vec<f64> {
        let actions = Self::actions(policy);
        (0..self.len()).map(|i| self.scenario_return(i, &actions)).collect()
    }

    /// The estimate, or `None` once the running sum proves it is below `threshold`.
    /// Every per-scenario return is nonpositive, so partial means only decrease.
    pub fn evaluate_bounded(&self, policy: &TabularPolicy, threshold: f64) -> Option<f64> {
        let actions = Self::actions(policy);
        let m = self.len() as f64;
        let mut sum = 0.0;
        for i in 0..self.len() {
            sum += self.scenario_return(i, &actions);
            if sum / m < threshold {
                return None;
            }
        }
        Some(sum / m)
    }

    /// Exhaustive search over all `4^8` policies with threshold pruning.
    pub fn search(&self, warm_start: Option<usize>) -> Result<SearchReport<TabularPolicy>, SearchError> {
        exhaustive_search_pruned(|p, thr| self.evaluate_bounded(p, thr), &GridPolicyClass, warm_start)
    }
}

/// Exact infinite-horizon value of every policy in the class.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSweep {
    pub values: Vec<f64>,
    pub opt: f64,
    pub opt_index: usize,
    pub worst: f64,
}

pub fn exact_sweep(gamma: f64) -> Result<ExactSweep, SimError> {
    let mdp = GridWorld::with_gamma(gamma).tabular();
    let values = (0..N_POLICIES)
        .into_par_iter()
        .map(|i| {
            let p = policy_from_index(i).expect("in range");
            exact_value_tabular(&mdp, &p.state_actions(), gamma, None)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let (mut opt_index, mut opt, mut worst) = (0, f64::NEG_INFINITY, f64::INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > opt {
            opt = v;
            opt_index = i;
        }
        worst = worst.min(v);
    }
    Ok(ExactSweep { values, opt, opt_index, worst })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Normal,
    Complex,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Normal => "normal",
            Variant::Complex => "complex",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub h: usize,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub variant: Variant,
    pub m: usize,
    pub mean_value: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Exact value of the selected policy in each trial, in trial order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub opt: f64,
    pub opt_index: usize,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    pub fn row(&self, variant: Variant, m: usize) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.variant == variant && r.m == m)
    }

    /// `# opt=<value>`, the column header, then one line per row.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# opt={}", crate::sim::fmt17(self.opt))?;
        writeln!(out, "variant,m,mean_value,stderr,trials")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.variant,
                r.m,
                crate::sim::fmt17(r.mean_value),
                crate::sim::fmt17(r.stderr),
                r.trials
            )?;
        }
        Ok(())
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

const COMPLEX_STREAM: u64 = 0xC0_4D_1E_C5;

/// Runs the scenario-count study on the normal and hash-complex models.
///
/// Trial `j` draws its scenarios from `child_seed(seed, j)`; scenario `i` depends only
/// on that seed and `i`, so the sets for increasing `m` are nested and the two model
/// variants see identical noise. The complex model's multipliers are redrawn per
/// trial. Each selected policy is scored with its exact value.
pub fn gridworld_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable, SimError> {
    if cfg.trials < 2 {
        return Err(SimError::Domain(format!("need at least 2 trials, got {}", cfg.trials)));
    }
    if cfg.m_values.is_empty() || cfg.m_values.contains(&0) || cfg.h == 0 {
        return Err(SimError::Domain("m values and h must be positive".into()));
    }
    let sweep = exact_sweep(cfg.gamma)?;
    let base = GridWorld::with_gamma(cfg.gamma);
    let mdp = base.tabular();
    let m_max = *cfg.m_values.iter().max().expect("nonempty");

    let per_trial: Vec<[Vec<f64>; 2]> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<[Vec<f64>; 2], SimError> {
            let trial_seed = rng::child_seed(cfg.seed, trial as u64);
            let all = draw_scenarios(&base, m_max, cfg.h, trial_seed)?;
            let complex = wrap_complex(base, rng::child_seed(cfg.seed ^ COMPLEX_STREAM, trial as u64));
            let mut out = [Vec::with_capacity(cfg.m_values.len()), Vec::with_capacity(cfg.m_values.len())];
            for &m in &cfg.m_values {
                let scenarios = &all[..m];
                let compiled = [
                    CompiledScenarios::new(&base, scenarios, cfg.h)?,
                    CompiledScenarios::new(&complex, scenarios, cfg.h)?,
                ];
                for (v, c) in compiled.iter().enumerate() {
                    let report = c.search(Some(sweep.opt_index)).map_err(|e| SimError::Domain(e.to_string()))?;
                    out[v].push(exact_value_tabular(&mdp, &report.best_policy.state_actions(), cfg.gamma, None)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let mut values = vec![vec![Vec::with_capacity(cfg.trials); cfg.m_values.len()]; 2];
    for trial in &per_trial {
        for v in 0..2 {
            for (k, x) in trial[v].iter().enumerate() {
                values[v][k].push(*x);
            }
        }
    }

    let mut rows = Vec::new();
    for (v, variant) in [Variant::Normal, Variant::Complex].into_iter().enumerate() {
        for (k, &m) in cfg.m_values.iter().enumerate() {
            let (mean_value, stderr) = mean_and_stderr(&values[v][k]);
            rows.push(ExperimentRow {
                variant,
                m,
                mean_value,
                stderr,
                trials: cfg.trials,
                values: std::mem::take(&mut values[v][k]),
            });
        }
    }
    Ok(ExperimentTable { opt: sweep.opt, opt_index: sweep.opt_index, rows })
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { m_values: vec![1, 5, 10, 30, 100], trials: 200, h: 100, gamma: super::DEFAULT_GAMMA, seed: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::build_gridworld;
    use crate::sim::{estimate_value, DiscountMode};

    #[test]
    fn compiled_matches_generic_estimator_bitwise() {
        let g = build_gridworld();
        let scenarios = draw_scenarios(&g, 7, 100, 42).unwrap();
        let cx = wrap_complex(g, 9);
        let cg = CompiledScenarios::new(&g, &scenarios, 100).unwrap();
        let cc = CompiledScenarios::new(&cx, &scenarios, 100).unwrap();
        for idx in (0..N_POLICIES).step_by(331) {
            let p = policy_from_index(idx).unwrap();
            let eg = estimate_value(&g, &p, &scenarios, 100, DiscountMode::Discrete).unwrap();
            let ec = estimate_value(&cx, &p, &scenarios, 100, DiscountMode::Discrete).unwrap();
            assert_eq!(cg.evaluate(&p).to_bits(), eg.value.to_bits());
            assert_eq!(cc.evaluate(&p).to_bits(), ec.value.to_bits());
            assert_eq!(cg.per_scenario(&p), eg.per_scenario);
        }
    }

    #[test]
    fn experiment_table_shape() {
        let cfg = ExperimentConfig { m_values: vec![1, 3], trials: 2, h: 30, gamma: 0.99, seed: 1 };
        let t = gridworld_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.opt.is_finite());
        assert!(t.rows.iter().all(|r| r.mean_value.is_finite() && r.stderr.is_finite()));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("# opt="));
    }

    #[test]
    fn rejects_single_trial() {
        let cfg = ExperimentConfig { m_values: vec![1], trials: 1, h: 10, gamma: 0.99, seed: 1 };
        assert!(gridworld_experiment(&cfg).is_err());
    }
}

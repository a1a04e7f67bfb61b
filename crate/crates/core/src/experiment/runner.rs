use crate::cost::{dispersion, Configuration};
use crate::dynamics::{ExtremumSeekingField, GradientFlowField, VectorField};
use crate::error::{Error, Result};
use crate::lie::GroupTag;
use crate::SyncCost;

use super::config::{ExperimentConfig, Mode};

/// Orthogonality error tolerated at a recorded sample.
pub const MAX_RECORDED_DRIFT: f64 = 1e-8;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRecord {
    pub tag: GroupTag,
    pub times: Vec<f64>,
    pub costs: Vec<f64>,
    pub dispersions: Vec<f64>,
    /// Recorded agent states, present when the run kept them.
    pub states: Option<Vec<Configuration<f64>>>,
    /// Largest orthogonality error seen at any recorded sample.
    pub max_drift: f64,
}

impl SimulationRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_cost(&self) -> Option<f64> {
        self.costs.first().copied()
    }

    pub fn final_cost(&self) -> Option<f64> {
        self.costs.last().copied()
    }

    pub fn final_dispersion(&self) -> Option<f64> {
        self.dispersions.last().copied()
    }

    pub fn final_states(&self) -> Option<&Configuration<f64>> {
        self.states.as_ref().and_then(|s| s.last())
    }
}

/// Runs the experiment from its configured initial states.
pub fn run(cfg: &ExperimentConfig) -> Result<SimulationRecord> {
    run_from(cfg, cfg.initial_configuration()?)
}

/// Runs the experiment from `initial`. Samples are recorded at step 0, every
/// `record_interval()` steps, and at the final step.
pub fn run_from(cfg: &ExperimentConfig, initial: Configuration<f64>) -> Result<SimulationRecord> {
    cfg.validate()?;
    if initial.agents() != cfg.net.agents() || initial.tag() != cfg.net.tag() {
        return Err(Error::invalid("initial states do not match the network"));
    }
    let steps = (cfg.t_final / cfg.step_size()).ceil().max(1.0) as usize;
    let h = cfg.t_final / steps as f64;
    let every = cfg.record_interval();
    log::info!(
        "{} agents on {}, {:?}, {steps} steps of {h:.3e}, recording every {every}",
        cfg.net.agents(),
        cfg.net.tag(),
        cfg.mode
    );

    let field: Box<dyn VectorField<f64> + '_> = match cfg.mode {
        Mode::ExtremumSeeking => Box::new(
            ExtremumSeekingField::new(&cfg.net, &cfg.schedule)
                .with_gain(cfg.gain)
                .with_execution(cfg.execution),
        ),
        Mode::GradientFlow => Box::new(GradientFlowField::new(&cfg.net)?),
    };

    let mut record = SimulationRecord {
        tag: cfg.net.tag(),
        times: Vec::new(),
        costs: Vec::new(),
        dispersions: Vec::new(),
        states: cfg.record_states.then(Vec::new),
        max_drift: 0.0,
    };
    let mut state = initial;
    sample(&mut record, cfg, 0.0, &state)?;
    for k in 1..=steps {
        let t = (k - 1) as f64 * h;
        state = cfg.integrator.step(field.as_ref(), &state, t, h);
        if k % every == 0 || k == steps {
            sample(&mut record, cfg, k as f64 * h, &state)?;
        }
    }
    Ok(record)
}

fn sample(
    record: &mut SimulationRecord,
    cfg: &ExperimentConfig,
    t: f64,
    state: &Configuration<f64>,
) -> Result<()> {
    let drift = state.max_orthogonality_error();
    if !(drift <= MAX_RECORDED_DRIFT) {
        return Err(Error::Integrity(format!(
            "orthogonality error {drift:.3e} at t = {t} exceeds {MAX_RECORDED_DRIFT:e}"
        )));
    }
    record.max_drift = record.max_drift.max(drift);
    record.times.push(t);
    record.costs.push(cfg.net.evaluate(state.states()));
    record.dispersions.push(dispersion(state));
    if let Some(states) = record.states.as_mut() {
        states.push(state.clone());
    }
    Ok(())
}

/// Largest dispersion over the last `⌈tail_fraction · len⌉` recorded samples.
pub fn ultimate_bound(record: &SimulationRecord, tail_fraction: f64) -> Result<f64> {
    if record.is_empty() {
        return Err(Error::invalid("empty record"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "tail fraction {tail_fraction} must lie in (0, 1]"
        )));
    }
    let n = record.dispersions.len();
    let tail = ((tail_fraction * n as f64).ceil() as usize).clamp(1, n);
    Ok(record.dispersions[n - tail..]
        .iter()
        .fold(0.0, |acc: f64, &d| acc.max(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::load_config;
    use crate::lie::GroupElement;

    fn so3_fixture(extra: &str) -> ExperimentConfig {
        let dir = env!("CARGO_MANIFEST_DIR");
        load_config(&format!(
            "group = so3\nagents = 3\ninitial = {dir}/fixtures/so3_three_agents.txt\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn records_first_interval_and_last() {
        let cfg =
            so3_fixture("t_final = 0.0105\ndt = 1e-3\nmode = gradient_flow\nrecord_every = 4\n");
        let rec = run(&cfg).unwrap();
        // 11 steps of ~9.5e-4: samples at 0, 4, 8 and 11.
        assert_eq!(rec.len(), 4);
        assert_eq!(rec.times[0], 0.0);
        assert!((rec.times[3] - 0.0105).abs() < 1e-15);
        assert_eq!(rec.states.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn initial_cost_matches_fixture() {
        let cfg = so3_fixture("t_final = 0.01\n");
        let rec = run(&cfg).unwrap();
        assert!((rec.initial_cost().unwrap() - 7.820491564449488).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_leaves_cost_constant() {
        let cfg = so3_fixture("t_final = 1\namplitude = 0\n");
        let rec = run(&cfg).unwrap();
        let j0 = rec.costs[0];
        assert!(rec.costs.iter().all(|&j| j == j0));
        assert_eq!(rec.states.as_ref().unwrap().first(), rec.final_states());
    }

    #[test]
    fn gradient_flow_decreases_monotonically() {
        let cfg = so3_fixture("mode = gradient_flow\ndt = 1e-3\nt_final = 20\nrecord_every = 10\n");
        let rec = run(&cfg).unwrap();
        assert!(rec.costs.windows(2).all(|w| w[1] <= w[0]));
        assert!(rec.final_cost().unwrap() < 1e-6);
    }

    #[test]
    fn synchronized_start_stays_put_under_gradient_flow() {
        let cfg = so3_fixture("mode = gradient_flow\nt_final = 0.1\n");
        let g = GroupElement::identity(GroupTag::So3);
        let rec = run_from(&cfg, Configuration::synchronized(g, 3)).unwrap();
        assert!(rec.costs.iter().all(|&j| j == 0.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = so3_fixture("t_final = 0.5\n");
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn ultimate_bound_uses_the_tail() {
        let rec = SimulationRecord {
            tag: GroupTag::So3,
            times: (0..10).map(f64::from).collect(),
            costs: vec![0.0; 10],
            dispersions: vec![9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.5, 1.0],
            states: None,
            max_drift: 0.0,
        };
        assert_eq!(ultimate_bound(&rec, 0.2).unwrap(), 1.5);
        assert_eq!(ultimate_bound(&rec, 0.01).unwrap(), 1.0);
        assert_eq!(ultimate_bound(&rec, 1.0).unwrap(), 9.0);
        assert!(ultimate_bound(&rec, 0.0).is_err());
        let empty = SimulationRecord {
            times: vec![],
            dispersions: vec![],
            costs: vec![],
            ..rec
        };
        assert!(ultimate_bound(&empty, 0.2).is_err());
    }
}

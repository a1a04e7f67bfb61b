//! Experiment configuration: a line-oriented `key = value` format.
//!
//! ```text
//! # comment
//! group = so3                 # so3 | se3 (required)
//! agents = 3                  # required
//! edges = 0-1, 0-2, 1-2       # default: complete graph
//! mode = extremum_seeking     # extremum_seeking | gradient_flow
//! integrator = lie_euler      # lie_euler | rk_mk2
//! t_final = 200
//! dt = 1e-4                   # default: 2π / (50 ω_max), or 1e-3 for gradient flow
//! record_every = 100          # default: one sample per base dither period
//! omega = 40
//! amplitude = 0.1             # same amplitude everywhere
//! amplitudes = ...            # or agents × n explicit values, row-major
//! multipliers = 1 3 5 ...     # default: greedy valid set
//! amplitude_cap = 0.5
//! gain = 1
//! initial = agents.txt        # matrix fixture, relative to the config file
//! seed = 7                    # or: random initial states
//! init_spread = 1.0
//! record_states = true
//! parallel = false
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{Configuration, NetworkConfig};
use crate::dither::{generate_frequencies, DitherSchedule, DEFAULT_AMPLITUDE_CAP};
use crate::dynamics::{Execution, Integrator};
use crate::error::{Error, Result};
use crate::lie::{exp, AlgebraVector, GroupElement, GroupTag};

use super::fixture::parse_elements;

pub const DEFAULT_OMEGA: f64 = 40.0;
pub const DEFAULT_AMPLITUDE: f64 = 0.1;
pub const DEFAULT_T_FINAL: f64 = 200.0;
pub const DEFAULT_GRADIENT_DT: f64 = 1e-3;
pub const DEFAULT_INIT_SPREAD: f64 = 1.0;
/// Default steps per fastest dither cycle.
pub const SAMPLES_PER_CYCLE: f64 = 50.0;
/// Hard floor on steps per fastest dither cycle.
pub const MIN_SAMPLES_PER_CYCLE: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    ExtremumSeeking,
    GradientFlow,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "extremum_seeking" | "es" => Some(Mode::ExtremumSeeking),
            "gradient_flow" | "gradient" => Some(Mode::GradientFlow),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Explicit(Vec<GroupElement<f64>>),
    /// A random base element shared by all agents, each displaced by a random
    /// algebra vector with coordinates bounded by `spread`.
    Random {
        seed: u64,
        spread: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub net: NetworkConfig,
    pub schedule: DitherSchedule<f64>,
    pub mode: Mode,
    pub integrator: Integrator,
    pub t_final: f64,
    /// Explicit step; `None` picks the default for the mode.
    pub dt: Option<f64>,
    pub record_every: Option<usize>,
    pub initial: InitialCondition,
    pub gain: f64,
    pub record_states: bool,
    pub execution: Execution,
}

impl ExperimentConfig {
    /// Config with defaults for everything but the group, agent count and initial states.
    pub fn new(net: NetworkConfig, initial: InitialCondition) -> Result<Self> {
        let schedule =
            DitherSchedule::uniform(net.tag(), net.agents(), DEFAULT_AMPLITUDE, DEFAULT_OMEGA)?;
        let cfg = Self {
            net,
            schedule,
            mode: Mode::ExtremumSeeking,
            integrator: Integrator::LieEuler,
            t_final: DEFAULT_T_FINAL,
            dt: None,
            record_every: None,
            initial,
            gain: 1.0,
            record_states: true,
            execution: Execution::Serial,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Integration step, resolving the mode-dependent default.
    pub fn step_size(&self) -> f64 {
        self.dt.unwrap_or_else(|| match self.mode {
            Mode::ExtremumSeeking => 2.0 * PI / (SAMPLES_PER_CYCLE * self.schedule.max_frequency()),
            Mode::GradientFlow => DEFAULT_GRADIENT_DT,
        })
    }

    /// Steps between recorded samples.
    pub fn record_interval(&self) -> usize {
        self.record_every.unwrap_or_else(|| {
            let base_period = 2.0 * PI / self.schedule.base_omega();
            ((base_period / self.step_size()).floor() as usize).max(1)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let dt = self.step_size();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config("dt", "must be positive"));
        }
        if !(self.t_final >= dt) || !self.t_final.is_finite() {
            return Err(Error::config(
                "t_final",
                format!("must be at least dt = {dt}"),
            ));
        }
        if self.record_every == Some(0) {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        if !self.gain.is_finite() {
            return Err(Error::config("gain", "must be finite"));
        }
        if self.schedule.tag() != self.net.tag() || self.schedule.agents() != self.net.agents() {
            return Err(Error::config(
                "amplitudes",
                "dither schedule does not match the network",
            ));
        }
        if self.mode == Mode::GradientFlow && self.net.tag() != GroupTag::So3 {
            return Err(Error::config(
                "mode",
                "gradient_flow is only available for so3",
            ));
        }
        if self.mode == Mode::ExtremumSeeking {
            let resolution = dt * self.schedule.max_frequency();
            if resolution > 2.0 * PI / MIN_SAMPLES_PER_CYCLE {
                return Err(Error::config(
                    "dt",
                    format!(
                        "dt·ω_max = {resolution:.4} exceeds 2π/{MIN_SAMPLES_PER_CYCLE}; the fastest dither is under-resolved"
                    ),
                ));
            }
            if resolution > 2.0 * PI / SAMPLES_PER_CYCLE {
                log::warn!("dt·ω_max = {resolution:.4}: fewer than {SAMPLES_PER_CYCLE} steps per fastest dither cycle");
            }
        }
        match &self.initial {
            InitialCondition::Explicit(states) => {
                if states.len() != self.net.agents() {
                    return Err(Error::config(
                        "initial",
                        format!(
                            "expected {} matrices, got {}",
                            self.net.agents(),
                            states.len()
                        ),
                    ));
                }
                if states.iter().any(|g| g.tag() != self.net.tag()) {
                    return Err(Error::config(
                        "initial",
                        "matrix group does not match `group`",
                    ));
                }
            }
            InitialCondition::Random { spread, .. } => {
                if !(*spread >= 0.0) {
                    return Err(Error::config("init_spread", "must be non-negative"));
                }
            }
        }
        Ok(())
    }

    /// Copy with a new base frequency. A defaulted step follows the new frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        let mut out = self.clone();
        out.schedule = self.schedule.with_base_omega(omega)?;
        out.validate()?;
        Ok(out)
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        let mut out = self.clone();
        out.mode = mode;
        out.validate()?;
        Ok(out)
    }

    /// Copy with random initial states drawn from `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let spread = match self.initial {
            InitialCondition::Random { spread, .. } => spread,
            InitialCondition::Explicit(_) => DEFAULT_INIT_SPREAD,
        };
        let mut out = self.clone();
        out.initial = InitialCondition::Random { seed, spread };
        out
    }

    pub fn initial_configuration(&self) -> Result<Configuration<f64>> {
        match &self.initial {
            InitialCondition::Explicit(states) => Configuration::new(states.clone()),
            InitialCondition::Random { seed, spread } => {
                random_configuration(self.net.tag(), self.net.agents(), *seed, *spread)
            }
        }
    }
}

/// Deterministic random configuration: a shared base element, each agent
/// displaced by an algebra vector with coordinates uniform in `[-spread, spread]`.
pub fn random_configuration(
    tag: GroupTag,
    agents: usize,
    seed: u64,
    spread: f64,
) -> Result<Configuration<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tag.algebra_dim();
    let mut draw = |scale: f64| -> AlgebraVector<f64> {
        let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0) * scale).collect();
        AlgebraVector::new(tag, &coords).expect("length matches")
    };
    let base = exp(&draw(PI / 3f64.sqrt()));
    let states = (0..agents).map(|_| base.right_exp(&draw(spread))).collect();
    Configuration::new(states)
}

const KEYS: &[&str] = &[
    "group",
    "agents",
    "edges",
    "mode",
    "integrator",
    "t_final",
    "dt",
    "record_every",
    "omega",
    "amplitude",
    "amplitudes",
    "multipliers",
    "amplitude_cap",
    "gain",
    "initial",
    "seed",
    "init_spread",
    "record_states",
    "parallel",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    line_no,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::parse(line_no, format!("unknown key `{key}`")));
            }
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(Error::parse(line_no, format!("`{key}` has no value")));
            }
            if map.insert(key.clone(), (line_no, value)).is_some() {
                return Err(Error::parse(line_no, format!("`{key}` given twice")));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn get<V: std::str::FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(key, format!("cannot parse `{v}`"))),
        }
    }

    fn list<V: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<V>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::config(key, format!("cannot parse `{s}`")))
                })
                .collect::<Result<Vec<V>>>()
                .map(Some),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some("true" | "yes" | "1") => Ok(Some(true)),
            Some("false" | "no" | "0") => Ok(Some(false)),
            Some(v) => Err(Error::config(
                key,
                format!("expected true or false, got `{v}`"),
            )),
        }
    }
}

fn parse_edges(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair.split_once('-').ok_or_else(|| {
                Error::config("edges", format!("`{pair}` is not of the form i-j"))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::config("edges", format!("bad agent index in `{pair}`")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

/// Parses a config, resolving a relative `initial` path against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let e = Entries::parse(text)?;

    let tag: GroupTag = match e.raw("group") {
        Some(v) => v.parse().map_err(|err| Error::config("group", err))?,
        None => return Err(Error::config("group", "missing (so3 or se3)")),
    };
    let agents: usize = e
        .get("agents")?
        .ok_or_else(|| Error::config("agents", "missing"))?;
    let net = match e.raw("edges") {
        Some(spec) => NetworkConfig::new(tag, agents, &parse_edges(spec)?),
        None => NetworkConfig::complete(tag, agents),
    }
    .map_err(|err| Error::config("edges", err))?;

    let n = tag.algebra_dim();
    let omega = e.get("omega")?.unwrap_or(DEFAULT_OMEGA);
    let amplitude_cap = e.get("amplitude_cap")?.unwrap_or(DEFAULT_AMPLITUDE_CAP);
    let amplitudes = match (e.list::<f64>("amplitudes")?, e.get::<f64>("amplitude")?) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "amplitudes",
                "give either `amplitude` or `amplitudes`, not both",
            ))
        }
        (Some(list), None) => list,
        (None, a) => vec![a.unwrap_or(DEFAULT_AMPLITUDE); agents * n],
    };
    let multipliers = e
        .list::<u64>("multipliers")?
        .unwrap_or_else(|| generate_frequencies(agents * n));
    let schedule = DitherSchedule::new(tag, agents, amplitudes, omega, multipliers, amplitude_cap)
        .map_err(|err| match err {
            Error::Frequency(report) => Error::Frequency(report),
            other => Error::config("amplitudes", other),
        })?;

    let mode = match e.raw("mode") {
        None => Mode::ExtremumSeeking,
        Some(v) => Mode::parse(v).ok_or_else(|| {
            Error::config(
                "mode",
                format!("`{v}` (expected extremum_seeking or gradient_flow)"),
            )
        })?,
    };
    let integrator = match e.raw("integrator") {
        None | Some("lie_euler") => Integrator::LieEuler,
        Some("rk_mk2") => Integrator::RkMk2,
        Some(v) => {
            return Err(Error::config(
                "integrator",
                format!("`{v}` (expected lie_euler or rk_mk2)"),
            ))
        }
    };

    let initial = match (e.raw("initial"), e.get::<u64>("seed")?) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "initial",
                "give either `initial` or `seed`, not both",
            ))
        }
        (Some(path), None) => {
            let path = resolve(base_dir, path);
            let text = std::fs::read_to_string(&path).map_err(|err| {
                Error::config("initial", format!("cannot read {}: {err}", path.display()))
            })?;
            InitialCondition::Explicit(parse_elements(&text, tag)?)
        }
        (None, Some(seed)) => InitialCondition::Random {
            seed,
            spread: e.get("init_spread")?.unwrap_or(DEFAULT_INIT_SPREAD),
        },
        (None, None) => {
            return Err(Error::config(
                "initial",
                "missing; give a matrix file or a `seed`",
            ))
        }
    };

    let cfg = ExperimentConfig {
        net,
        schedule,
        mode,
        integrator,
        t_final: e.get("t_final")?.unwrap_or(DEFAULT_T_FINAL),
        dt: e.get("dt")?,
        record_every: e.get("record_every")?,
        initial,
        gain: e.get("gain")?.unwrap_or(1.0),
        record_states: e.bool("record_states")?.unwrap_or(true),
        execution: if e.bool("parallel")?.unwrap_or(false) {
            Execution::Parallel
        } else {
            Execution::Serial
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve(base_dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Parses config text, resolving relative paths against the working directory.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    parse_config(text, Path::new("."))
}

/// Reads and parses a config file; relative paths resolve against its directory.
pub fn load_config_file(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, dir)
}

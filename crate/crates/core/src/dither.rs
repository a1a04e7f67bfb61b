//! Dither frequency assignment and per-agent sinusoidal perturbations.
//!
//! Agent `j` perturbs its state along generator `i` with amplitude `a_i^j` at
//! angular frequency `ω · ω̄_i^j`, where `ω` is a shared base frequency and the
//! `ω̄_i^j` are positive integer multipliers. For the time averages of the
//! extremum-seeking field to reduce to a gradient, the multipliers must be
//! pairwise distinct, no multiplier may be twice another, and no multiplier
//! may equal the sum of two others.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupTag};
use crate::scalar::Real;

/// Default bound on the norm of each agent's amplitude vector.
pub const DEFAULT_AMPLITUDE_CAP: f64 = 0.5;

/// A single broken frequency constraint. Indices point into the flat multiplier list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositive {
        index: usize,
    },
    Duplicate {
        first: usize,
        second: usize,
        value: u64,
    },
    Double {
        base: usize,
        doubled: usize,
        value: u64,
    },
    Sum {
        left: usize,
        right: usize,
        total: usize,
        value: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonPositive { index } => {
                write!(f, "multiplier #{index} is not a positive integer")
            }
            Violation::Duplicate {
                first,
                second,
                value,
            } => {
                write!(f, "duplicate: #{first} = #{second} = {value}")
            }
            Violation::Double {
                base,
                doubled,
                value,
            } => {
                write!(f, "double: 2·{value} = {} (#{base}, #{doubled})", 2 * value)
            }
            Violation::Sum {
                left,
                right,
                total,
                value,
            } => {
                write!(f, "sum: #{left} + #{right} = #{total} = {value}")
            }
        }
    }
}

/// Every constraint violation found in a multiplier set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyReport {
    pub violations: Vec<Violation>,
}

impl FrequencyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FrequencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Exhaustive check of all three constraint families; O(N³).
pub fn check_frequencies(multipliers: &[u64]) -> FrequencyReport {
    let mut violations = Vec::new();
    let n = multipliers.len();
    for (index, &w) in multipliers.iter().enumerate() {
        if w == 0 {
            violations.push(Violation::NonPositive { index });
        }
    }
    for p in 0..n {
        for q in (p + 1)..n {
            if multipliers[p] == multipliers[q] {
                violations.push(Violation::Duplicate {
                    first: p,
                    second: q,
                    value: multipliers[p],
                });
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p != q && 2 * multipliers[p] == multipliers[q] {
                violations.push(Violation::Double {
                    base: p,
                    doubled: q,
                    value: multipliers[p],
                });
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in (q + 1)..n {
                if q != p && r != p && multipliers[q] + multipliers[r] == multipliers[p] {
                    violations.push(Violation::Sum {
                        left: q,
                        right: r,
                        total: p,
                        value: multipliers[p],
                    });
                }
            }
        }
    }
    FrequencyReport { violations }
}

/// `Ok(())` when the multipliers satisfy every constraint, otherwise the full report.
pub fn validate_frequencies(multipliers: &[u64]) -> std::result::Result<(), FrequencyReport> {
    let report = check_frequencies(multipliers);
    if report.is_valid() {
        Ok(())
    } else {
        Err(report)
    }
}

/// Whether `candidate` can join an already valid set.
fn admits(set: &[u64], candidate: u64) -> bool {
    for (k, &a) in set.iter().enumerate() {
        if a == candidate || 2 * a == candidate || 2 * candidate == a {
            return false;
        }
        for &b in &set[k + 1..] {
            if a + b == candidate {
                return false;
            }
        }
        // candidate on the summand side: a = candidate + b
        if set
            .iter()
            .enumerate()
            .any(|(l, &b)| l != k && candidate + b == a)
        {
            return false;
        }
    }
    true
}

/// Deterministic greedy scan over 1, 2, 3, … keeping every candidate that
/// leaves the set valid.
pub fn generate_frequencies(count: usize) -> Vec<u64> {
    let mut set = Vec::with_capacity(count);
    let mut candidate = 1u64;
    while set.len() < count {
        if admits(&set, candidate) {
            set.push(candidate);
        }
        candidate += 1;
    }
    set
}

/// Amplitudes, base frequency and integer multipliers for every agent and generator.
#[derive(Clone, Debug, PartialEq)]
pub struct DitherSchedule<T> {
    tag: GroupTag,
    agents: usize,
    /// Row-major `agents × n`.
    amplitudes: Vec<T>,
    base_omega: T,
    /// Row-major `agents × n`.
    multipliers: Vec<u64>,
    amplitude_cap: T,
}

impl<T: Real> DitherSchedule<T> {
    pub fn new(
        tag: GroupTag,
        agents: usize,
        amplitudes: Vec<T>,
        base_omega: T,
        multipliers: Vec<u64>,
        amplitude_cap: T,
    ) -> Result<Self> {
        let n = tag.algebra_dim();
        if agents == 0 {
            return Err(Error::invalid("dither schedule needs at least one agent"));
        }
        if amplitudes.len() != agents * n {
            return Err(Error::invalid(format!(
                "expected {} amplitudes ({agents} agents x {n}), got {}",
                agents * n,
                amplitudes.len()
            )));
        }
        if multipliers.len() != agents * n {
            return Err(Error::invalid(format!(
                "expected {} multipliers ({agents} agents x {n}), got {}",
                agents * n,
                multipliers.len()
            )));
        }
        if !(base_omega > T::zero()) || !base_omega.is_finite() {
            return Err(Error::invalid("base frequency must be positive"));
        }
        if !(amplitude_cap > T::zero()) {
            return Err(Error::invalid("amplitude cap must be positive"));
        }
        if let Some(a) = amplitudes
            .iter()
            .find(|a| !(**a >= T::zero()) || !a.is_finite())
        {
            return Err(Error::invalid(format!(
                "amplitude {a} must be non-negative"
            )));
        }
        validate_frequencies(&multipliers).map_err(Error::Frequency)?;
        let schedule = Self {
            tag,
            agents,
            amplitudes,
            base_omega,
            multipliers,
            amplitude_cap,
        };
        for j in 0..agents {
            let norm = schedule.amplitude_norm(j);
            if norm > amplitude_cap {
                return Err(Error::invalid(format!(
                    "agent {j} amplitude norm {norm} exceeds the cap {amplitude_cap}"
                )));
            }
        }
        Ok(schedule)
    }

    /// Same amplitude on every generator of every agent, greedy multipliers,
    /// default amplitude cap.
    pub fn uniform(tag: GroupTag, agents: usize, amplitude: T, base_omega: T) -> Result<Self> {
        let n = tag.algebra_dim();
        Self::new(
            tag,
            agents,
            vec![amplitude; agents * n],
            base_omega,
            generate_frequencies(agents * n),
            T::lit(DEFAULT_AMPLITUDE_CAP),
        )
    }

    /// Copy with every amplitude replaced by `amplitude`.
    pub fn with_uniform_amplitude(&self, amplitude: T) -> Result<Self> {
        Self::new(
            self.tag,
            self.agents,
            vec![amplitude; self.amplitudes.len()],
            self.base_omega,
            self.multipliers.clone(),
            self.amplitude_cap,
        )
    }

    pub fn with_base_omega(&self, base_omega: T) -> Result<Self> {
        let mut out = self.clone();
        if !(base_omega > T::zero()) || !base_omega.is_finite() {
            return Err(Error::invalid("base frequency must be positive"));
        }
        out.base_omega = base_omega;
        Ok(out)
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Algebra dimension `n`.
    pub fn directions(&self) -> usize {
        self.tag.algebra_dim()
    }

    pub fn base_omega(&self) -> T {
        self.base_omega
    }

    pub fn amplitude_cap(&self) -> T {
        self.amplitude_cap
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    #[inline]
    pub fn amplitude(&self, agent: usize, direction: usize) -> T {
        self.amplitudes[agent * self.directions() + direction]
    }

    #[inline]
    pub fn multiplier(&self, agent: usize, direction: usize) -> u64 {
        self.multipliers[agent * self.directions() + direction]
    }

    /// Angular frequency `ω · ω̄_i^j`.
    #[inline]
    pub fn frequency(&self, agent: usize, direction: usize) -> T {
        self.base_omega * T::lit(self.multiplier(agent, direction) as f64)
    }

    pub fn max_frequency(&self) -> T {
        let top = self.multipliers.iter().copied().max().unwrap_or(1);
        self.base_omega * T::lit(top as f64)
    }

    pub fn max_amplitude(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, &a| acc.max(a))
    }

    /// ‖(a_1^j, …, a_n^j)‖₂.
    pub fn amplitude_norm(&self, agent: usize) -> T {
        let n = self.directions();
        self.amplitudes[agent * n..(agent + 1) * n]
            .iter()
            .fold(T::zero(), |acc, &a| acc + a * a)
            .sqrt()
    }

    /// `sin(ω_i^j t)` for every direction of `agent`, written into `out`.
    #[inline]
    pub fn phases(&self, agent: usize, t: T, out: &mut [T]) {
        for (i, s) in out.iter_mut().enumerate().take(self.directions()) {
            *s = (self.frequency(agent, i) * t).sin();
        }
    }

    /// The dither `Σ_i a_i^j sin(ω_i^j t) e_i` in algebra coordinates.
    pub fn dither_vector(&self, agent: usize, t: T) -> AlgebraVector<T> {
        assert!(agent < self.agents, "agent {agent} out of range");
        let mut v = AlgebraVector::zeros(self.tag);
        for (i, c) in v.coords_mut().iter_mut().enumerate() {
            *c = self.amplitude(agent, i) * (self.frequency(agent, i) * t).sin();
        }
        v
    }

    /// Smallest `T > 0` after which every dither component repeats:
    /// `2π / (ω · gcd(ω̄))`.
    pub fn common_period(&self) -> T {
        let g = self
            .multipliers
            .iter()
            .fold(0u64, |acc, &m| acc.gcd(&m))
            .max(1);
        T::lit(2.0) * T::PI() / (self.base_omega * T::lit(g as f64))
    }
}

/// Free-function form of [`DitherSchedule::dither_vector`].
pub fn dither_vector<T: Real>(
    schedule: &DitherSchedule<T>,
    agent: usize,
    t: T,
) -> AlgebraVector<T> {
    schedule.dither_vector(agent, t)
}

/// Free-function form of [`DitherSchedule::common_period`].
pub fn common_period<T: Real>(schedule: &DitherSchedule<T>) -> T {
    schedule.common_period()
}

//! Extremum-seeking and gradient vector fields on `G^m`, their time average,
//! and exponential-update integrators.
//!
//! Fields are left-trivialized: each agent moves as `ġ_j = g_j · hat(u^j)`
//! with `u^j` an algebra vector, so every integrator update is a product of
//! group elements and never leaves the group.

use rayon::prelude::*;

use crate::cost::{Configuration, NetworkConfig, SyncCost};
use crate::dither::DitherSchedule;
use crate::error::{Error, Result};
use crate::lie::{vee, AlgebraVector, GroupElement, GroupTag};
use crate::scalar::Real;

/// Agent velocities `u^j(t)` in algebra coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub t: T,
    pub velocities: Vec<AlgebraVector<T>>,
}

impl<T: Real> FieldSample<T> {
    pub fn zeros(tag: GroupTag, agents: usize, t: T) -> Self {
        Self {
            t,
            velocities: vec![AlgebraVector::zeros(tag); agents],
        }
    }

    /// Largest absolute coordinate over all agents.
    pub fn max_abs(&self) -> T {
        self.velocities
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.velocities
            .iter()
            .zip(&other.velocities)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).max_abs()))
    }
}

/// A (possibly time-varying) left-trivialized vector field on `G^m`.
pub trait VectorField<T: Real> {
    fn sample(&self, t: T, cfg: &Configuration<T>) -> FieldSample<T>;
}

/// Whether per-agent work inside a field evaluation is spread over threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Serial,
    Parallel,
}

/// Each agent's state displaced by its own dither: `g_j · exp(hat(d_j(t)))`.
pub fn perturbed_states<T: Real>(
    cfg: &Configuration<T>,
    schedule: &DitherSchedule<T>,
    t: T,
    execution: Execution,
) -> Vec<GroupElement<T>> {
    let perturb = |(j, g): (usize, &GroupElement<T>)| g.right_exp(&schedule.dither_vector(j, t));
    match execution {
        Execution::Serial => cfg.states().iter().enumerate().map(perturb).collect(),
        Execution::Parallel => cfg.states().par_iter().enumerate().map(perturb).collect(),
    }
}

/// Agent velocities from a single cost measurement:
/// `u_i^j = −gain · a_i^j sin(ω_i^j t) · measured`.
///
/// Takes the scalar measurement only; no agent state is visible here.
pub fn field_from_measurement<T: Real>(
    schedule: &DitherSchedule<T>,
    t: T,
    measured: T,
    gain: T,
) -> Vec<AlgebraVector<T>> {
    let tag = schedule.tag();
    (0..schedule.agents())
        .map(|j| {
            let mut u = AlgebraVector::zeros(tag);
            for (i, c) in u.coords_mut().iter_mut().enumerate() {
                let s = (schedule.frequency(j, i) * t).sin();
                *c = -gain * schedule.amplitude(j, i) * s * measured;
            }
            u
        })
        .collect()
}

/// The extremum-seeking field at time `t` with unit gain.
///
/// Every agent is perturbed by its own dither simultaneously, the cost is
/// measured once on the perturbed tuple, and each agent correlates that
/// single number against its own dither.
pub fn es_field<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    schedule: &DitherSchedule<T>,
    t: T,
) -> FieldSample<T> {
    let perturbed = perturbed_states(cfg, schedule, t, Execution::Serial);
    let measured = cost.evaluate(&perturbed);
    FieldSample {
        t,
        velocities: field_from_measurement(schedule, t, measured, T::one()),
    }
}

/// Extremum-seeking dynamics as a [`VectorField`].
pub struct ExtremumSeekingField<'a, T, C> {
    cost: &'a C,
    schedule: &'a DitherSchedule<T>,
    gain: T,
    execution: Execution,
}

impl<'a, T: Real, C: SyncCost<T> + Sync> ExtremumSeekingField<'a, T, C> {
    pub fn new(cost: &'a C, schedule: &'a DitherSchedule<T>) -> Self {
        Self {
            cost,
            schedule,
            gain: T::one(),
            execution: Execution::Serial,
        }
    }

    pub fn with_gain(mut self, gain: T) -> Self {
        self.gain = gain;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

impl<T: Real, C: SyncCost<T> + Sync> VectorField<T> for ExtremumSeekingField<'_, T, C> {
    fn sample(&self, t: T, cfg: &Configuration<T>) -> FieldSample<T> {
        let perturbed = perturbed_states(cfg, self.schedule, t, self.execution);
        let measured = self.cost.evaluate(&perturbed);
        FieldSample {
            t,
            velocities: field_from_measurement(self.schedule, t, measured, self.gain),
        }
    }
}

/// Decentralized gradient flow on SO(3):
/// `hat(u^i) = ½ Σ_{j~i} (x_iᵀ x_j − x_jᵀ x_i)`.
pub fn gradient_field_so3<T: Real>(
    net: &NetworkConfig,
    cfg: &Configuration<T>,
) -> Result<FieldSample<T>> {
    if net.tag() != GroupTag::So3 || cfg.tag() != GroupTag::So3 {
        return Err(Error::invalid(
            "gradient flow is defined for so3 networks only",
        ));
    }
    if cfg.agents() != net.agents() {
        return Err(Error::invalid(format!(
            "expected {} agent states, got {}",
            net.agents(),
            cfg.agents()
        )));
    }
    Ok(gradient_so3_unchecked(net, cfg, T::zero()))
}

fn gradient_so3_unchecked<T: Real>(
    net: &NetworkConfig,
    cfg: &Configuration<T>,
    t: T,
) -> FieldSample<T> {
    let s = cfg.states();
    let half = T::lit(0.5);
    let mut sums = vec![crate::matrix::SquareMatrix::zeros(3); s.len()];
    for &(i, j) in net.edges() {
        let m = s[i].matrix().transpose() * *s[j].matrix();
        let skew = m - m.transpose();
        sums[i] = sums[i] + skew;
        // x_jᵀx_i − x_iᵀx_j is the negated skew part.
        sums[j] = sums[j] - skew;
    }
    let velocities = sums
        .iter()
        .map(|k| vee(&k.scale(half), GroupTag::So3).expect("skew by construction"))
        .collect();
    FieldSample { t, velocities }
}

/// The SO(3) gradient flow as a [`VectorField`].
pub struct GradientFlowField<'a> {
    net: &'a NetworkConfig,
}

impl<'a> GradientFlowField<'a> {
    pub fn new(net: &'a NetworkConfig) -> Result<Self> {
        if net.tag() != GroupTag::So3 {
            return Err(Error::invalid(
                "gradient flow is defined for so3 networks only",
            ));
        }
        Ok(Self { net })
    }
}

impl<T: Real> VectorField<T> for GradientFlowField<'_> {
    fn sample(&self, t: T, cfg: &Configuration<T>) -> FieldSample<T> {
        gradient_so3_unchecked(self.net, cfg, t)
    }
}

/// Central-difference derivatives of the cost along `g_j · exp(ε e_i)` for
/// every agent `j` and generator `i`.
pub fn directional_derivatives<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    step: T,
) -> Vec<AlgebraVector<T>> {
    let tag = cfg.tag();
    let two = T::lit(2.0);
    (0..cfg.agents())
        .map(|j| {
            let mut d = AlgebraVector::zeros(tag);
            for i in 0..tag.algebra_dim() {
                let e = AlgebraVector::basis(tag, i);
                let mut states = cfg.states().to_vec();
                states[j] = cfg.states()[j].right_exp(&e.scale(step));
                let plus = cost.evaluate(&states);
                states[j] = cfg.states()[j].right_exp(&e.scale(-step));
                let minus = cost.evaluate(&states);
                d.coords_mut()[i] = (plus - minus) / (two * step);
            }
            d
        })
        .collect()
}

fn simpson_average<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    schedule: &DitherSchedule<T>,
    period: T,
    intervals: usize,
) -> FieldSample<T> {
    let h = period / T::lit(intervals as f64);
    let mut acc = FieldSample::zeros(cfg.tag(), cfg.agents(), period);
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        let sample = es_field(cost, cfg, schedule, h * T::lit(k as f64));
        for (a, u) in acc.velocities.iter_mut().zip(&sample.velocities) {
            *a = *a + u.scale(w);
        }
    }
    let norm = h / (T::lit(3.0) * period);
    for a in acc.velocities.iter_mut() {
        *a = a.scale(norm);
    }
    acc
}

/// Convergence threshold on successive Simpson estimates.
pub const AVERAGING_TOL: f64 = 1e-10;
const MIN_INTERVALS: usize = 256;
const MAX_INTERVALS: usize = 1 << 22;

/// Time average of [`es_field`] over one common dither period, by composite
/// Simpson quadrature with node doubling until successive estimates differ
/// by less than [`AVERAGING_TOL`].
pub fn averaged_field<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    schedule: &DitherSchedule<T>,
) -> FieldSample<T> {
    let period = schedule.common_period();
    let tol = T::lit(AVERAGING_TOL).max(T::epsilon() * T::lit(1e3));
    let mut intervals = MIN_INTERVALS;
    let mut prev = simpson_average(cost, cfg, schedule, period, intervals);
    while intervals < MAX_INTERVALS {
        intervals *= 2;
        let next = simpson_average(cost, cfg, schedule, period, intervals);
        let change = next.max_abs_diff(&prev);
        prev = next;
        if change < tol {
            return prev;
        }
    }
    log::warn!("averaged field did not settle within {MAX_INTERVALS} intervals");
    prev
}

/// Step used for the central differences in [`averaging_residual`].
pub const RESIDUAL_FD_STEP: f64 = 1e-5;

/// `‖ū − (−a²/2 ⊙ D)‖_∞`: the gap between the averaged extremum-seeking
/// field and the amplitude-weighted negative cost gradient, where `D` holds
/// the directional derivatives along each agent's generators.
pub fn averaging_residual<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    schedule: &DitherSchedule<T>,
) -> T {
    let avg = averaged_field(cost, cfg, schedule);
    let grad = directional_derivatives(cost, cfg, T::lit(RESIDUAL_FD_STEP));
    let half = T::lit(0.5);
    let mut worst = T::zero();
    for (j, (u, d)) in avg.velocities.iter().zip(&grad).enumerate() {
        for i in 0..u.len() {
            let a = schedule.amplitude(j, i);
            let predicted = -half * a * a * d.coords()[i];
            worst = worst.max((u.coords()[i] - predicted).abs());
        }
    }
    worst
}

/// `g_j ← g_j · exp(hat(h u^j))`.
pub fn lie_euler_step<T: Real>(
    cfg: &Configuration<T>,
    sample: &FieldSample<T>,
    h: T,
) -> Configuration<T> {
    advance(cfg, &sample.velocities, h)
}

fn advance<T: Real>(
    cfg: &Configuration<T>,
    velocities: &[AlgebraVector<T>],
    h: T,
) -> Configuration<T> {
    assert_eq!(cfg.agents(), velocities.len(), "one velocity per agent");
    let states = cfg
        .states()
        .iter()
        .zip(velocities)
        .map(|(g, u)| g.right_exp(&u.scale(h)))
        .collect();
    Configuration::from_states_unchecked(states)
}

/// Second-order Munthe-Kaas midpoint step.
pub fn rk_mk2_step<T: Real, F: VectorField<T> + ?Sized>(
    cfg: &Configuration<T>,
    field: &F,
    t: T,
    h: T,
) -> Configuration<T> {
    let half_h = h * T::lit(0.5);
    let k1 = field.sample(t, cfg);
    let mid = advance(cfg, &k1.velocities, half_h);
    let k2 = field.sample(t + half_h, &mid);
    advance(cfg, &k2.velocities, h)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    #[default]
    LieEuler,
    RkMk2,
}

impl Integrator {
    pub fn step<T: Real, F: VectorField<T> + ?Sized>(
        self,
        field: &F,
        cfg: &Configuration<T>,
        t: T,
        h: T,
    ) -> Configuration<T> {
        match self {
            Integrator::LieEuler => lie_euler_step(cfg, &field.sample(t, cfg), h),
            Integrator::RkMk2 => rk_mk2_step(cfg, field, t, h),
        }
    }
}

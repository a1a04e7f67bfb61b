//! Synchronization costs over a network of agents.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lie::{GroupElement, GroupTag};
use crate::scalar::Real;

/// Agent count, group and the undirected edge set of the synchronization graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkConfig {
    tag: GroupTag,
    agents: usize,
    edges: Vec<(usize, usize)>,
}

impl NetworkConfig {
    /// Validates the edge list: no self-loops, no duplicates (in either
    /// orientation), indices in range and a connected graph.
    pub fn new(tag: GroupTag, agents: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if agents < 2 {
            return Err(Error::invalid("a network needs at least two agents"));
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= agents || b >= agents {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) references an agent outside 0..{agents}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on agent {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
            normalized.push(e);
        }
        let net = Self {
            tag,
            agents,
            edges: normalized,
        };
        if !net.is_connected() {
            return Err(Error::invalid("synchronization graph is not connected"));
        }
        Ok(net)
    }

    /// Complete graph on `agents` nodes.
    pub fn complete(tag: GroupTag, agents: usize) -> Result<Self> {
        let edges: Vec<_> = (0..agents)
            .flat_map(|i| ((i + 1)..agents).map(move |j| (i, j)))
            .collect();
        Self::new(tag, agents, &edges)
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.agents).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            parent[ra] = rb;
        }
        let r0 = root(&mut parent, 0);
        (1..self.agents).all(|k| root(&mut parent, k) == r0)
    }

    fn check_states<T: Real>(&self, states: &[GroupElement<T>]) -> Result<()> {
        if states.len() != self.agents {
            return Err(Error::invalid(format!(
                "expected {} agent states, got {}",
                self.agents,
                states.len()
            )));
        }
        if let Some(g) = states.iter().find(|g| g.tag() != self.tag) {
            return Err(Error::invalid(format!(
                "network is {} but a state is {}",
                self.tag,
                g.tag()
            )));
        }
        Ok(())
    }
}

/// The tuple of agent states `(g_1, …, g_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    states: Vec<GroupElement<T>>,
}

impl<T: Real> Configuration<T> {
    pub fn new(states: Vec<GroupElement<T>>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::invalid("configuration has no agents"));
        };
        let tag = first.tag();
        for (k, g) in states.iter().enumerate() {
            if g.tag() != tag {
                return Err(Error::invalid(format!(
                    "agent {k} is {} but agent 0 is {tag}",
                    g.tag()
                )));
            }
            g.check()
                .map_err(|e| Error::invalid(format!("agent {k}: {e}")))?;
        }
        Ok(Self { states })
    }

    /// Skips validation; used by integrators whose updates stay on the group.
    pub(crate) fn from_states_unchecked(states: Vec<GroupElement<T>>) -> Self {
        Self { states }
    }

    /// Every agent at the same element.
    pub fn synchronized(g: GroupElement<T>, agents: usize) -> Self {
        Self {
            states: vec![g; agents],
        }
    }

    pub fn tag(&self) -> GroupTag {
        self.states[0].tag()
    }

    pub fn agents(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[GroupElement<T>] {
        &self.states
    }

    pub fn into_states(self) -> Vec<GroupElement<T>> {
        self.states
    }

    /// Left-multiplies every agent by `gc`.
    pub fn left_translate(&self, gc: &GroupElement<T>) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|g| gc.multiply(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states })
    }

    /// Largest ‖RᵀR − I‖_F over the agents.
    pub fn max_orthogonality_error(&self) -> T {
        self.states
            .iter()
            .fold(T::zero(), |acc, g| acc.max(g.orthogonality_error()))
    }
}

/// A scalar cost over the full tuple of agent states.
///
/// This is the only channel through which agents learn anything about each
/// other in the extremum-seeking loop.
pub trait SyncCost<T: Real> {
    fn evaluate(&self, states: &[GroupElement<T>]) -> T;
}

impl<T: Real> SyncCost<T> for NetworkConfig {
    fn evaluate(&self, states: &[GroupElement<T>]) -> T {
        edge_sum(self, states)
    }
}

/// `3 − trace(R_iᵀ R_j)` plus, for SE(3), `½‖t_i − t_j‖²`, summed over edges.
///
/// The rotation term is evaluated as `½‖R_i − R_j‖²_F`, equal on SO(3) but
/// free of cancellation near synchronization.
fn edge_sum<T: Real>(net: &NetworkConfig, states: &[GroupElement<T>]) -> T {
    let half = T::lit(0.5);
    let cols = if net.tag == GroupTag::Se3 { 4 } else { 3 };
    let mut total = T::zero();
    for &(i, j) in &net.edges {
        let (a, b) = (states[i].matrix(), states[j].matrix());
        let mut sq = T::zero();
        for r in 0..3 {
            for c in 0..cols {
                let d = a[(r, c)] - b[(r, c)];
                sq = sq + d * d;
            }
        }
        total = total + half * sq;
    }
    total
}

/// `J = Σ_{(i,j)∈E} (3 − trace(g_iᵀ g_j))` on SO(3).
pub fn cost_so3<T: Real>(net: &NetworkConfig, cfg: &Configuration<T>) -> Result<T> {
    if net.tag != GroupTag::So3 {
        return Err(Error::invalid("cost_so3 needs an so3 network"));
    }
    net.check_states(cfg.states())?;
    Ok(edge_sum(net, cfg.states()))
}

/// Rotation terms of [`cost_so3`] plus `½‖t_i − t_j‖²` per edge, on SE(3).
pub fn cost_se3<T: Real>(net: &NetworkConfig, cfg: &Configuration<T>) -> Result<T> {
    if net.tag != GroupTag::Se3 {
        return Err(Error::invalid("cost_se3 needs an se3 network"));
    }
    net.check_states(cfg.states())?;
    Ok(edge_sum(net, cfg.states()))
}

/// Cost for either group.
pub fn cost<T: Real>(net: &NetworkConfig, cfg: &Configuration<T>) -> Result<T> {
    net.check_states(cfg.states())?;
    Ok(edge_sum(net, cfg.states()))
}

/// Largest `|J(g_c·g) − J(g)| / (1 + J(g))` over the supplied left translations.
pub fn check_invariance<T: Real, C: SyncCost<T>>(
    cost: &C,
    cfg: &Configuration<T>,
    translations: &[GroupElement<T>],
) -> Result<T> {
    let base = cost.evaluate(cfg.states());
    let mut worst = T::zero();
    for gc in translations {
        let moved = cfg.left_translate(gc)?;
        let dev = (cost.evaluate(moved.states()) - base).abs() / (T::one() + base);
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Largest pairwise Frobenius distance between agents; zero exactly on the
/// synchronization set.
pub fn dispersion<T: Real>(cfg: &Configuration<T>) -> T {
    let s = cfg.states();
    let mut worst = T::zero();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            worst = worst.max((*s[i].matrix() - *s[j].matrix()).frobenius_norm());
        }
    }
    worst
}

/// Largest pairwise Euclidean distance between agent translations (zero on SO(3)).
pub fn translation_spread<T: Real>(cfg: &Configuration<T>) -> T {
    let s = cfg.states();
    let mut worst = T::zero();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let (a, b) = (s[i].translation(), s[j].translation());
            let d = (0..3).fold(T::zero(), |acc, k| acc + (a[k] - b[k]) * (a[k] - b[k]));
            worst = worst.max(d.sqrt());
        }
    }
    worst
}

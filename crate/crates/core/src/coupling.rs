//! Monotone coupling machinery shared by the FK and Ising heat-bath processes:
//! the coupled top/bottom evolution, forward coupling time with the coupon
//! time tracked in the same pass, and coupling from the past.

use crate::error::{Error, PartialRun, Result};
use crate::rng::{NoiseSource, NoiseStep};

/// Default step cap for coupled runs.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// A single-site heat-bath process given by a monotone random mapping.
pub trait MonotoneDynamics {
    type State: Clone + PartialEq + std::fmt::Debug;

    /// Number of sites the noise chooses from.
    fn sites(&self) -> usize;
    fn bottom_state(&self) -> Self::State;
    fn top_state(&self) -> Self::State;
    /// Applies the random map `f(., site, u)` in place.
    fn update(&mut self, state: &mut Self::State, step: NoiseStep);
    fn site_agrees(&self, a: &Self::State, b: &Self::State, site: usize) -> bool;
    /// Partial order of the state space, restricted to one site. A single
    /// update changes one site, so checking it there keeps the whole-state
    /// order.
    fn site_precedes(&self, lower: &Self::State, upper: &Self::State, site: usize) -> bool;
}

/// The coupled pair `(bottom, top)` driven by one noise stream.
#[derive(Debug, Clone)]
pub struct CouplingState<S> {
    pub bottom: S,
    pub top: S,
    /// Steps taken so far.
    pub t: u64,
    seen: Vec<bool>,
    seen_count: usize,
    disagreements: usize,
}

impl<S: Clone + PartialEq> CouplingState<S> {
    /// Starts from the extremal states of `dynamics`.
    pub fn new<D: MonotoneDynamics<State = S>>(dynamics: &D) -> Self {
        let bottom = dynamics.bottom_state();
        let top = dynamics.top_state();
        let sites = dynamics.sites();
        let disagreements = (0..sites).filter(|&s| !dynamics.site_agrees(&bottom, &top, s)).count();
        CouplingState { bottom, top, t: 0, seen: vec![false; sites], seen_count: 0, disagreements }
    }

    pub fn is_coalesced(&self) -> bool {
        self.disagreements == 0
    }

    pub fn all_seen(&self) -> bool {
        self.seen_count == self.seen.len()
    }

    pub fn seen(&self, site: usize) -> bool {
        self.seen[site]
    }

    pub fn disagreements(&self) -> usize {
        self.disagreements
    }

    fn partial(&self) -> PartialRun {
        PartialRun {
            steps: self.t,
            sites_seen: self.seen_count,
            sites: self.seen.len(),
            disagreements: self.disagreements,
        }
    }
}

/// Advances both chains with the same noise step.
pub fn coupled_step<D: MonotoneDynamics>(
    dynamics: &mut D,
    state: &mut CouplingState<D::State>,
    step: NoiseStep,
) {
    let s = step.site;
    let before = dynamics.site_agrees(&state.bottom, &state.top, s);
    dynamics.update(&mut state.bottom, step);
    dynamics.update(&mut state.top, step);
    let after = dynamics.site_agrees(&state.bottom, &state.top, s);
    match (before, after) {
        (true, false) => state.disagreements += 1,
        (false, true) => state.disagreements -= 1,
        _ => {}
    }
    if !state.seen[s] {
        state.seen[s] = true;
        state.seen_count += 1;
    }
    state.t += 1;
    debug_assert!(
        dynamics.site_precedes(&state.bottom, &state.top, s),
        "monotone sandwich violated at t = {}",
        state.t
    );
    debug_assert!(!state.is_coalesced() || state.all_seen());
}

/// Coupling time `T` and coupon time `W` of one forward run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingTimes {
    pub coupling_time: u64,
    pub coupon_time: u64,
}

/// Runs the coupled process from (bottom, top) until coalescence.
pub fn forward_coupling<D: MonotoneDynamics>(
    dynamics: &mut D,
    noise: &mut NoiseSource,
    cap: u64,
) -> Result<CouplingTimes> {
    let sites = dynamics.sites();
    let mut state = CouplingState::new(dynamics);
    let mut coupon_time = if state.all_seen() { Some(0) } else { None };
    while !state.is_coalesced() {
        if state.t >= cap {
            return Err(Error::NoCoalescence { cap, partial: state.partial() });
        }
        let step = noise.step(sites);
        coupled_step(dynamics, &mut state, step);
        if coupon_time.is_none() && state.all_seen() {
            coupon_time = Some(state.t);
        }
    }
    Ok(CouplingTimes {
        coupling_time: state.t,
        coupon_time: coupon_time.expect("coalescence implies every site was updated"),
    })
}

/// Result of a coupling-from-the-past run.
#[derive(Debug, Clone)]
pub struct CftpOutcome<S> {
    pub state: S,
    /// Depth of the successful restart.
    pub depth: u64,
    /// Total map applications over all restarts.
    pub work: u64,
}

/// Coupling from the past with restart depths 1, 2, 4, 8, ...
///
/// `log[k]` holds the noise of the map at time `-k`; it is generated once and
/// reused by every deeper restart, so each attempt evaluates the same
/// composition `f_0 ∘ f_{-1} ∘ ... ∘ f_{-(depth-1)}`. The step cap bounds the
/// depth.
pub fn cftp<D: MonotoneDynamics>(dynamics: &mut D, noise: &mut NoiseSource, cap: u64) -> Result<CftpOutcome<D::State>> {
    let sites = dynamics.sites();
    let mut log: Vec<NoiseStep> = Vec::new();
    let mut depth: u64 = 1;
    let mut work: u64 = 0;
    loop {
        while (log.len() as u64) < depth {
            log.push(noise.step(sites));
        }
        let mut bottom = dynamics.bottom_state();
        let mut top = dynamics.top_state();
        for step in log[..depth as usize].iter().rev() {
            dynamics.update(&mut bottom, *step);
            dynamics.update(&mut top, *step);
        }
        work += depth;
        if bottom == top {
            return Ok(CftpOutcome { state: top, depth, work });
        }
        if depth >= cap {
            let disagreements = (0..sites).filter(|&s| !dynamics.site_agrees(&bottom, &top, s)).count();
            let mut seen = vec![false; sites];
            log.iter().for_each(|s| seen[s.site] = true);
            let sites_seen = seen.iter().filter(|&&x| x).count();
            return Err(Error::NoCoalescence {
                cap,
                partial: PartialRun { steps: depth, sites_seen, sites, disagreements },
            });
        }
        depth = (depth * 2).min(cap);
    }
}

/// One forward coupling run: `T`, `W` and the noise stream that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingSample {
    pub coupling_time: u64,
    pub coupon_time: u64,
    pub seed: u64,
    pub stream: u64,
}

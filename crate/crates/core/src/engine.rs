//! Equilibrium play over the public-belief tree.
//!
//! Payoffs depend only on an agent's own action, so every equilibrium is
//! myopic: play 1 when the composed posterior exceeds 1/2, 0 when it falls
//! below. The only freedom is what to do at a composed posterior of exactly
//! 1/2, which changes what successors can infer from the action. Histories
//! with the same public belief are merged, so a tie-break is keyed by
//! `(agent, public belief, private belief)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{
    induced_belief_distribution, Action, Belief, BeliefDistribution, BeliefError,
    InformationStructure, DEFAULT_IID_CAP,
};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Horizon for fixed-rule simulation.
    pub horizon_cap: usize,
    /// Horizon for the exhaustive lexicographic tie-break search.
    pub lexicographic_cap: usize,
    /// Truncation horizon allowed for discounted sums over agents.
    pub series_cap: usize,
    /// Maximum number of i.i.d. draws composed for the full-observation
    /// benchmark.
    pub iid_cap: usize,
    /// Indifference points a single agent may face in one candidate profile.
    pub max_indifference_points: usize,
    /// Distinct partial profiles kept alive by the lexicographic search.
    pub max_candidates: usize,
    /// Distinct public beliefs at one depth.
    pub max_frontier: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            horizon_cap: 12,
            lexicographic_cap: 8,
            series_cap: 48,
            iid_cap: DEFAULT_IID_CAP,
            max_indifference_points: 12,
            max_candidates: 4096,
            max_frontier: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("horizon {requested} exceeds cap {cap}")]
    HorizonCapExceeded { requested: usize, cap: usize },
    #[error(
        "tolerance needs horizon {required} but cap is {cap}; best certified tolerance is {achievable}"
    )]
    ToleranceUnreachable {
        required: usize,
        cap: usize,
        achievable: Rat,
    },
    #[error("agent {agent} faces {count} indifference points (bound {bound})")]
    TooManyIndifferenceNodes {
        agent: usize,
        count: usize,
        bound: usize,
    },
    #[error(
        "lexicographic search holds {count} candidate profiles at agent {agent} (bound {bound})"
    )]
    TooManyCandidates {
        agent: usize,
        count: usize,
        bound: usize,
    },
    #[error("{size} public beliefs at depth {depth} (bound {bound})")]
    FrontierTooLarge {
        depth: usize,
        size: usize,
        bound: usize,
    },
    #[error("tie-break table has no entry for {0:?}")]
    MissingTieEntry(Box<IndifferencePoint>),
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: Rat,
        reason: &'static str,
    },
}

/// A reachable information set where the composed posterior is exactly 1/2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndifferencePoint {
    pub agent: usize,
    pub public_belief: Belief,
    pub private_belief: Belief,
}

/// Deterministic tie-break assignment keyed by indifference point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieTable(BTreeMap<IndifferencePoint, Action>);

impl TieTable {
    pub fn new() -> Self {
        TieTable::default()
    }

    pub fn insert(&mut self, point: IndifferencePoint, action: Action) {
        self.0.insert(point, action);
    }

    pub fn get(&self, point: &IndifferencePoint) -> Option<Action> {
        self.0.get(point).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndifferencePoint, &Action)> {
        self.0.iter()
    }
}

/// Behaviour at a composed posterior of exactly 1/2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreakRule {
    Action1,
    Action0,
    /// Follow the private signal's side of 1/2; an uninformative private
    /// signal plays 1.
    FollowSignalDirection,
    PerNodeTable(TieTable),
}

impl TieBreakRule {
    fn resolve(&self, point: &IndifferencePoint) -> Result<Action, EngineError> {
        Ok(match self {
            TieBreakRule::Action1 => Action::One,
            TieBreakRule::Action0 => Action::Zero,
            TieBreakRule::FollowSignalDirection => {
                if point.private_belief < Belief::half() {
                    Action::Zero
                } else {
                    Action::One
                }
            }
            TieBreakRule::PerNodeTable(table) => table
                .get(point)
                .ok_or_else(|| EngineError::MissingTieEntry(Box::new(point.clone())))?,
        })
    }
}

/// An action history (up to merging) at depth `depth`, i.e. what agent
/// `depth + 1` observes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicNode {
    pub depth: usize,
    pub like_h: Rat,
    pub like_l: Rat,
    pub public_belief: Belief,
}

/// Public beliefs at one depth with the per-state probability of reaching
/// them.
type Frontier = BTreeMap<Belief, (Rat, Rat)>;

fn root_frontier() -> Frontier {
    let mut f = Frontier::new();
    f.insert(Belief::half(), (Rat::one(), Rat::one()));
    f
}

/// Joint weights of one (public node, private signal) pair.
struct Cell<'a> {
    public: &'a Belief,
    private: &'a Belief,
    joint_h: Rat,
    joint_l: Rat,
}

fn cells<'a>(
    frontier: &'a Frontier,
    dist: &'a BeliefDistribution,
) -> impl Iterator<Item = Cell<'a>> + 'a {
    frontier.iter().flat_map(move |(q, (lh, ll))| {
        dist.atoms().iter().filter_map(move |a| {
            let joint_h = lh * &a.weight_h;
            let joint_l = ll * &a.weight_l;
            if joint_h.is_zero() && joint_l.is_zero() {
                None
            } else {
                Some(Cell {
                    public: q,
                    private: &a.belief,
                    joint_h,
                    joint_l,
                })
            }
        })
    })
}

/// Ex-ante payoff of the agent moving at `frontier`. Ties pay 0 either way,
/// so this does not depend on the tie-break.
fn agent_payoff(frontier: &Frontier, dist: &BeliefDistribution) -> Rat {
    cells(frontier, dist)
        .filter(|c| c.joint_h > c.joint_l)
        .map(|c| (c.joint_h - c.joint_l) * Rat::quarter())
        .sum()
}

fn indifference_points(
    frontier: &Frontier,
    dist: &BeliefDistribution,
    agent: usize,
) -> Vec<IndifferencePoint> {
    cells(frontier, dist)
        .filter(|c| c.joint_h == c.joint_l)
        .map(|c| IndifferencePoint {
            agent,
            public_belief: c.public.clone(),
            private_belief: c.private.clone(),
        })
        .collect()
}

struct Transition {
    next: Frontier,
    /// Largest payoff gain any type could obtain by deviating.
    deviation_gain: Rat,
}

fn transition(
    frontier: &Frontier,
    dist: &BeliefDistribution,
    agent: usize,
    mut tie: impl FnMut(&IndifferencePoint) -> Result<Action, EngineError>,
) -> Result<Transition, EngineError> {
    let mut next = Frontier::new();
    let mut deviation_gain = Rat::zero();
    for (q, (lh, ll)) in frontier {
        let mut one_h = Rat::zero();
        let mut one_l = Rat::zero();
        let mut zero_h = Rat::zero();
        let mut zero_l = Rat::zero();
        for a in dist.atoms() {
            let joint_h = lh * &a.weight_h;
            let joint_l = ll * &a.weight_l;
            if joint_h.is_zero() && joint_l.is_zero() {
                continue;
            }
            let action = match joint_h.cmp(&joint_l) {
                std::cmp::Ordering::Greater => Action::One,
                std::cmp::Ordering::Less => Action::Zero,
                std::cmp::Ordering::Equal => tie(&IndifferencePoint {
                    agent,
                    public_belief: q.clone(),
                    private_belief: a.belief.clone(),
                })?,
            };
            // Expected payoff of 1 relative to 0 for this type is (jh - jl)/4.
            let edge = (&joint_h - &joint_l) * Rat::quarter();
            let gain = match action {
                Action::One => -edge,
                Action::Zero => edge,
            };
            if gain > deviation_gain {
                deviation_gain = gain;
            }
            match action {
                Action::One => {
                    one_h += joint_h;
                    one_l += joint_l;
                }
                Action::Zero => {
                    zero_h += joint_h;
                    zero_l += joint_l;
                }
            }
        }
        for (h, l) in [(one_h, one_l), (zero_h, zero_l)] {
            if let Some(b) = Belief::from_weights(&h, &l) {
                let e = next.entry(b).or_insert_with(|| (Rat::zero(), Rat::zero()));
                e.0 += h;
                e.1 += l;
            }
        }
    }
    Ok(Transition {
        next,
        deviation_gain,
    })
}

fn check_frontier(frontier: &Frontier, depth: usize, limits: &Limits) -> Result<(), EngineError> {
    if frontier.len() > limits.max_frontier {
        return Err(EngineError::FrontierTooLarge {
            depth,
            size: frontier.len(),
            bound: limits.max_frontier,
        });
    }
    Ok(())
}

/// Per-agent payoff quantities for a fixed horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffProfile {
    /// Payoff from the private signal alone.
    pub v: Rat,
    /// Equilibrium payoff of agent `i` (index `i - 1`).
    pub v_i: Vec<Rat>,
    /// Payoff of an agent observing `i` i.i.d. signals directly.
    pub vbar_i: Vec<Rat>,
    /// Value of history `v_i - v`.
    pub hist_value_i: Vec<Rat>,
}

impl PayoffProfile {
    fn assemble(dist: &BeliefDistribution, v_i: Vec<Rat>) -> Self {
        let v = expected_gain(dist);
        let mut vbar_i = Vec::with_capacity(v_i.len());
        let mut acc = dist.clone();
        for i in 1..=v_i.len() {
            if i > 1 {
                acc = acc.product(dist);
            }
            vbar_i.push(expected_gain(&acc));
        }
        let hist_value_i = v_i.iter().map(|x| x - &v).collect();
        PayoffProfile {
            v,
            v_i,
            vbar_i,
            hist_value_i,
        }
    }

    pub fn horizon(&self) -> usize {
        self.v_i.len()
    }

    /// Checks `V <= V_i <= Vbar_i` for every agent.
    pub fn sandwich_holds(&self) -> bool {
        self.v_i
            .iter()
            .zip(&self.vbar_i)
            .all(|(vi, vb)| &self.v <= vi && vi <= vb)
    }
}

/// `E[max(x - 1/2, 0)]` under the uniform prior.
fn expected_gain(dist: &BeliefDistribution) -> Rat {
    dist.atoms()
        .iter()
        .filter(|a| a.belief > Belief::half())
        .map(|a| a.unconditional() * (a.belief.p_high() - Rat::half()))
        .sum()
}

/// Expected payoff from acting on one private signal.
pub fn single_signal_payoff(structure: &InformationStructure) -> Rat {
    expected_gain(&induced_belief_distribution(structure))
}

/// Expected payoff from acting on `i` i.i.d. signals.
pub fn full_observation_payoff(
    structure: &InformationStructure,
    i: usize,
    limits: &Limits,
) -> Result<Rat, EngineError> {
    let dist = crate::belief::iid_belief_distribution(structure, i, limits.iid_cap)?;
    Ok(expected_gain(&dist))
}

/// Result of running a fixed tie-break rule forward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub profile: PayoffProfile,
    /// Largest gain from a unilateral deviation at any reachable node; zero
    /// for a best-response profile.
    pub max_deviation_gain: Rat,
    /// Public nodes by depth, `0..horizon`.
    pub tree: Vec<Vec<PublicNode>>,
}

impl Equilibrium {
    /// Every depth of the tree carries total probability one in each state.
    pub fn tree_is_consistent(&self) -> bool {
        self.tree.iter().all(|level| {
            let h: Rat = level.iter().map(|n| &n.like_h).sum();
            let l: Rat = level.iter().map(|n| &n.like_l).sum();
            h.is_one()
                && l.is_one()
                && level.iter().all(|n| {
                    Belief::from_weights(&n.like_h, &n.like_l).as_ref() == Some(&n.public_belief)
                })
        })
    }
}

/// Plays the myopic equilibrium with `rule` at ties for agents `1..=horizon`.
pub fn simulate_equilibrium(
    structure: &InformationStructure,
    horizon: usize,
    rule: &TieBreakRule,
    limits: &Limits,
) -> Result<Equilibrium, EngineError> {
    if horizon == 0 || horizon > limits.horizon_cap {
        return Err(EngineError::HorizonCapExceeded {
            requested: horizon,
            cap: limits.horizon_cap,
        });
    }
    let dist = induced_belief_distribution(structure);
    let mut frontier = root_frontier();
    let mut v_i = Vec::with_capacity(horizon);
    let mut tree = Vec::with_capacity(horizon);
    let mut max_gain = Rat::zero();
    for agent in 1..=horizon {
        check_frontier(&frontier, agent - 1, limits)?;
        tree.push(
            frontier
                .iter()
                .map(|(q, (h, l))| PublicNode {
                    depth: agent - 1,
                    like_h: h.clone(),
                    like_l: l.clone(),
                    public_belief: q.clone(),
                })
                .collect(),
        );
        v_i.push(agent_payoff(&frontier, &dist));
        let step = transition(&frontier, &dist, agent, |p| rule.resolve(p))?;
        if step.deviation_gain > max_gain {
            max_gain = step.deviation_gain;
        }
        frontier = step.next;
    }
    Ok(Equilibrium {
        profile: PayoffProfile::assemble(&dist, v_i),
        max_deviation_gain: max_gain,
        tree,
    })
}

/// Outcome of the lexicographic equilibrium selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedEquilibrium {
    pub profile: PayoffProfile,
    /// Tie-breaks of one selected profile, for agents `1..horizon`.
    pub tie_table: TieTable,
    /// Partial profiles evaluated across all agents.
    pub profiles_examined: usize,
}

struct Candidate {
    frontier: Frontier,
    table: TieTable,
}

struct Lexicographic {
    values: Vec<Rat>,
    table: TieTable,
    examined: usize,
}

fn lexicographic(
    dist: &BeliefDistribution,
    horizon: usize,
    limits: &Limits,
) -> Result<Lexicographic, EngineError> {
    let mut candidates = vec![Candidate {
        frontier: root_frontier(),
        table: TieTable::new(),
    }];
    let mut values = Vec::with_capacity(horizon);
    let mut examined = 0usize;
    for agent in 1..=horizon {
        let payoffs: Vec<Rat> = candidates
            .iter()
            .map(|c| agent_payoff(&c.frontier, dist))
            .collect();
        examined += payoffs.len();
        let best = payoffs.iter().max().cloned().unwrap_or_else(Rat::zero);
        let mut kept: Vec<Candidate> = candidates
            .into_iter()
            .zip(payoffs)
            .filter(|(_, p)| *p == best)
            .map(|(c, _)| c)
            .collect();
        values.push(best);
        if agent == horizon {
            let selected = kept.swap_remove(0);
            return Ok(Lexicographic {
                values,
                table: selected.table,
                examined,
            });
        }

        let mut next = Vec::new();
        let mut seen: BTreeSet<Frontier> = BTreeSet::new();
        for cand in kept {
            let points = indifference_points(&cand.frontier, dist, agent);
            if points.len() > limits.max_indifference_points {
                return Err(EngineError::TooManyIndifferenceNodes {
                    agent,
                    count: points.len(),
                    bound: limits.max_indifference_points,
                });
            }
            for mask in 0u64..(1u64 << points.len()) {
                let choice = |p: &IndifferencePoint| -> Result<Action, EngineError> {
                    let idx = points
                        .iter()
                        .position(|q| q == p)
                        .expect("enumerated point");
                    Ok(if mask >> idx & 1 == 0 {
                        Action::One
                    } else {
                        Action::Zero
                    })
                };
                let step = transition(&cand.frontier, dist, agent, choice)?;
                check_frontier(&step.next, agent, limits)?;
                if seen.contains(&step.next) {
                    continue;
                }
                seen.insert(step.next.clone());
                let mut table = cand.table.clone();
                for (idx, p) in points.iter().enumerate() {
                    let a = if mask >> idx & 1 == 0 {
                        Action::One
                    } else {
                        Action::Zero
                    };
                    table.insert(p.clone(), a);
                }
                next.push(Candidate {
                    frontier: step.next,
                    table,
                });
                if next.len() > limits.max_candidates {
                    return Err(EngineError::TooManyCandidates {
                        agent,
                        count: next.len(),
                        bound: limits.max_candidates,
                    });
                }
            }
        }
        candidates = next;
    }
    unreachable!("horizon is at least one")
}

/// Equilibrium payoffs under the lexicographic selection: among all
/// deterministic tie-break profiles, keep those maximising `V_1`, then
/// `V_2` among those, and so on.
pub fn best_equilibrium_payoffs(
    structure: &InformationStructure,
    horizon: usize,
    limits: &Limits,
) -> Result<SelectedEquilibrium, EngineError> {
    if horizon == 0 || horizon > limits.lexicographic_cap {
        return Err(EngineError::HorizonCapExceeded {
            requested: horizon,
            cap: limits.lexicographic_cap,
        });
    }
    if horizon > limits.iid_cap {
        return Err(BeliefError::CapExceeded {
            what: "number of i.i.d. draws",
            requested: horizon,
            cap: limits.iid_cap,
        }
        .into());
    }
    let dist = induced_belief_distribution(structure);
    let lex = lexicographic(&dist, horizon, limits)?;
    Ok(SelectedEquilibrium {
        profile: PayoffProfile::assemble(&dist, lex.values),
        tie_table: lex.table,
        profiles_examined: lex.examined,
    })
}

/// Values of history `V_i - V` under the lexicographic selection for
/// `i = 1..=horizon`, bounded by `series_cap` rather than the lexicographic
/// cap. Used for discounted sums.
pub fn hist_values(
    structure: &InformationStructure,
    horizon: usize,
    limits: &Limits,
) -> Result<(Rat, Vec<Rat>), EngineError> {
    if horizon == 0 || horizon > limits.series_cap {
        return Err(EngineError::HorizonCapExceeded {
            requested: horizon,
            cap: limits.series_cap,
        });
    }
    let dist = induced_belief_distribution(structure);
    let v = expected_gain(&dist);
    let lex = lexicographic(&dist, horizon, limits)?;
    Ok((v.clone(), lex.values.into_iter().map(|x| x - &v).collect()))
}

/// A discounted sum over agents truncated after `horizon` terms. The true
/// value lies in `[partial_sum, partial_sum + tail_bound]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncated {
    pub partial_sum: Rat,
    pub tail_bound: Rat,
    pub horizon: usize,
}

impl Truncated {
    pub fn lower(&self) -> &Rat {
        &self.partial_sum
    }

    pub fn upper(&self) -> Rat {
        &self.partial_sum + &self.tail_bound
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.lower() <= x && *x <= self.upper()
    }

    pub fn midpoint(&self) -> Rat {
        &self.partial_sum + &self.tail_bound * Rat::half()
    }
}

pub(crate) fn check_discount(delta: &Rat) -> Result<(), EngineError> {
    if !delta.is_positive() || *delta >= 1 {
        return Err(EngineError::InvalidParameter {
            name: "delta",
            value: delta.clone(),
            reason: "must lie strictly between 0 and 1",
        });
    }
    Ok(())
}

pub(crate) fn check_tolerance(tol: &Rat) -> Result<(), EngineError> {
    if !tol.is_positive() {
        return Err(EngineError::InvalidParameter {
            name: "tolerance",
            value: tol.clone(),
            reason: "must be positive",
        });
    }
    Ok(())
}

/// Smallest `n >= 1` with `scale * delta^n <= tol`, or the error carrying
/// the best tolerance reachable within `cap`.
pub(crate) fn truncation_horizon(
    delta: &Rat,
    scale: &Rat,
    tol: &Rat,
    cap: usize,
) -> Result<usize, EngineError> {
    let mut bound = scale * delta;
    for n in 1..=cap {
        if bound <= *tol {
            return Ok(n);
        }
        bound *= delta;
    }
    Err(EngineError::ToleranceUnreachable {
        required: cap + 1,
        cap,
        achievable: scale * delta.pow(cap as u32),
    })
}

/// `(1 - delta) * sum_i delta^(i-1) * V_i(history)`, truncated so the tail is
/// at most `tol`. Each term lies in `[0, 1/4 - V]`, which certifies the tail.
pub fn social_value(
    structure: &InformationStructure,
    delta: &Rat,
    tol: &Rat,
    limits: &Limits,
) -> Result<Truncated, EngineError> {
    check_discount(delta)?;
    check_tolerance(tol)?;
    let v = single_signal_payoff(structure);
    let scale = Rat::quarter() - &v;
    let horizon = truncation_horizon(delta, &scale, tol, limits.series_cap)?;
    let (_, values) = hist_values(structure, horizon, limits)?;
    Ok(Truncated {
        partial_sum: discounted_average(delta, &values),
        tail_bound: scale * delta.pow(horizon as u32),
        horizon,
    })
}

/// `(1 - delta) * sum_{i>=1} delta^(i-1) * terms[i-1]`.
pub(crate) fn discounted_average(delta: &Rat, terms: &[Rat]) -> Rat {
    let mut weight = Rat::one() - delta;
    let mut acc = Rat::zero();
    for t in terms {
        acc += &weight * t;
        weight *= delta;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{validate_structure, Signal};

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn ternary(eps: Rat) -> InformationStructure {
        let c = Rat::one() - &eps;
        validate_structure([
            Signal::new("s0", Rat::zero(), c.clone()),
            Signal::new("sh", eps.clone(), eps),
            Signal::new("s1", c, Rat::zero()),
        ])
        .unwrap()
    }

    fn binary() -> InformationStructure {
        InformationStructure::symmetric_binary(r(2, 3)).unwrap()
    }

    /// Brute-force oracle: enumerate every signal sequence of agents `1..=n`
    /// and play them through the tie rule with explicit history tracking.
    fn brute_force_payoffs(pi: &InformationStructure, n: usize, tie_one: bool) -> Vec<Rat> {
        let k = pi.signals().len();
        let mut out = vec![Rat::zero(); n];
        for code in 0..k.pow(n as u32) {
            let mut c = code;
            let seq: Vec<usize> = (0..n)
                .map(|_| {
                    let s = c % k;
                    c /= k;
                    s
                })
                .collect();
            for state_high in [true, false] {
                let mut prob = Rat::half();
                for &s in &seq {
                    let sig = &pi.signals()[s];
                    prob *= if state_high { &sig.like_h } else { &sig.like_l };
                }
                if prob.is_zero() {
                    continue;
                }
                // Public likelihoods of the realized action history.
                let mut hist_h = Rat::one();
                let mut hist_l = Rat::one();
                for (agent, &s) in seq.iter().enumerate() {
                    let sig = &pi.signals()[s];
                    let act = |t: &Signal| -> bool {
                        let jh = &hist_h * &t.like_h;
                        let jl = &hist_l * &t.like_l;
                        if jh == jl {
                            tie_one
                        } else {
                            jh > jl
                        }
                    };
                    let a = act(sig);
                    if a {
                        out[agent] += &prob * if state_high { Rat::half() } else { r(-1, 2) };
                    }
                    let (ph, pl): (Rat, Rat) = pi
                        .signals()
                        .iter()
                        .filter(|t| act(t) == a)
                        .map(|t| (t.like_h.clone(), t.like_l.clone()))
                        .fold((Rat::zero(), Rat::zero()), |(x, y), (h, l)| (x + h, y + l));
                    hist_h *= &ph;
                    hist_l *= &pl;
                }
            }
        }
        out
    }

    #[test]
    fn single_signal_payoff_examples() {
        assert_eq!(
            single_signal_payoff(&ternary(r(1, 3))),
            r(2, 3) * Rat::quarter()
        );
        assert_eq!(
            single_signal_payoff(&InformationStructure::full_information()),
            r(1, 4)
        );
        assert_eq!(single_signal_payoff(&binary()), r(1, 12));
        assert_eq!(
            single_signal_payoff(&InformationStructure::no_information()),
            Rat::zero()
        );
    }

    #[test]
    fn full_observation_payoff_examples() {
        let limits = Limits::default();
        let eps = r(2, 5);
        for i in 1..=6u32 {
            assert_eq!(
                full_observation_payoff(&ternary(eps.clone()), i as usize, &limits).unwrap(),
                (Rat::one() - eps.pow(i)) * Rat::quarter()
            );
        }
        assert_eq!(
            full_observation_payoff(&binary(), 1, &limits).unwrap(),
            single_signal_payoff(&binary())
        );
        assert_eq!(
            full_observation_payoff(&binary(), 2, &limits).unwrap(),
            r(1, 12)
        );
        assert!(full_observation_payoff(&binary(), 17, &limits).is_err());
    }

    #[test]
    fn simulate_ternary_half() {
        let eq = simulate_equilibrium(
            &ternary(r(1, 2)),
            3,
            &TieBreakRule::Action1,
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(eq.profile.v_i, vec![r(1, 8), r(3, 16), r(7, 32)]);
        assert_eq!(
            eq.profile.v_i,
            brute_force_payoffs(&ternary(r(1, 2)), 3, true)
        );
        assert!(eq.max_deviation_gain.is_zero());
        assert!(eq.tree_is_consistent());
    }

    #[test]
    fn simulate_full_information() {
        let eq = simulate_equilibrium(
            &InformationStructure::full_information(),
            6,
            &TieBreakRule::Action0,
            &Limits::default(),
        )
        .unwrap();
        assert!(eq.profile.v_i.iter().all(|v| *v == r(1, 4)));
        assert!(eq.profile.hist_value_i.iter().all(Rat::is_zero));
    }

    #[test]
    fn simulate_binary_second_agent() {
        for rule in [
            TieBreakRule::Action1,
            TieBreakRule::Action0,
            TieBreakRule::FollowSignalDirection,
        ] {
            let eq = simulate_equilibrium(&binary(), 2, &rule, &Limits::default()).unwrap();
            assert_eq!(eq.profile.v_i[1], r(1, 12));
            assert_eq!(eq.profile.vbar_i[1], r(1, 12));
        }
    }

    #[test]
    fn simulation_matches_brute_force() {
        let pis = [
            binary(),
            ternary(r(1, 3)),
            validate_structure([
                Signal::new("a", r(1, 2), r(1, 6)),
                Signal::new("b", r(1, 3), r(1, 3)),
                Signal::new("c", r(1, 6), r(1, 2)),
            ])
            .unwrap(),
            validate_structure([
                Signal::new("a", r(3, 4), r(1, 4)),
                Signal::new("b", r(1, 4), r(3, 4)),
            ])
            .unwrap(),
        ];
        for pi in &pis {
            for (rule, tie_one) in [
                (TieBreakRule::Action1, true),
                (TieBreakRule::Action0, false),
            ] {
                let eq = simulate_equilibrium(pi, 5, &rule, &Limits::default()).unwrap();
                assert_eq!(eq.profile.v_i, brute_force_payoffs(pi, 5, tie_one));
                assert!(eq.tree_is_consistent());
                assert!(eq.max_deviation_gain.is_zero());
                assert!(eq.profile.sandwich_holds());
            }
        }
    }

    #[test]
    fn root_tie_break_symmetry() {
        for pi in [binary(), ternary(r(3, 7))] {
            let one =
                simulate_equilibrium(&pi, 6, &TieBreakRule::Action1, &Limits::default()).unwrap();
            let zero =
                simulate_equilibrium(&pi, 6, &TieBreakRule::Action0, &Limits::default()).unwrap();
            assert_eq!(one.profile.v_i, zero.profile.v_i);
        }
    }

    #[test]
    fn horizon_cap() {
        let err = simulate_equilibrium(&binary(), 13, &TieBreakRule::Action1, &Limits::default())
            .unwrap_err();
        assert_eq!(
            err,
            EngineError::HorizonCapExceeded {
                requested: 13,
                cap: 12
            }
        );
        assert!(best_equilibrium_payoffs(&binary(), 9, &Limits::default()).is_err());
    }

    #[test]
    fn per_node_table_must_cover_reachable_ties() {
        let rule = TieBreakRule::PerNodeTable(TieTable::new());
        let err = simulate_equilibrium(&binary(), 3, &rule, &Limits::default()).unwrap_err();
        assert!(matches!(err, EngineError::MissingTieEntry(_)));
    }

    #[test]
    fn best_equilibrium_ternary() {
        let eps = r(1, 3);
        let sel = best_equilibrium_payoffs(&ternary(eps.clone()), 4, &Limits::default()).unwrap();
        for (i, h) in sel.profile.hist_value_i.iter().enumerate() {
            let i = i as u32 + 1;
            assert_eq!(*h, (&eps - eps.pow(i)) * Rat::quarter());
        }
        // The selected table replays to the same payoffs.
        let mut table = sel.tie_table.clone();
        let replay_fill = simulate_equilibrium(
            &ternary(eps.clone()),
            4,
            &TieBreakRule::PerNodeTable(table.clone()),
            &Limits::default(),
        );
        if let Err(EngineError::MissingTieEntry(p)) = replay_fill {
            table.insert(*p, Action::One);
        }
        let replay = simulate_equilibrium(
            &ternary(eps),
            4,
            &TieBreakRule::PerNodeTable(table),
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(replay.profile.v_i, sel.profile.v_i);
    }

    #[test]
    fn best_equilibrium_no_information() {
        let sel = best_equilibrium_payoffs(
            &InformationStructure::no_information(),
            6,
            &Limits::default(),
        )
        .unwrap();
        assert!(sel.profile.hist_value_i.iter().all(Rat::is_zero));
    }

    #[test]
    fn best_equilibrium_binary_second_agent() {
        let sel = best_equilibrium_payoffs(&binary(), 3, &Limits::default()).unwrap();
        assert!(sel.profile.hist_value_i[1].is_zero());
        assert!(sel.profile.sandwich_holds());
        // Cross-check against every fixed rule: the selection is never worse
        // at the first agent where the rules differ.
        for rule in [
            TieBreakRule::Action1,
            TieBreakRule::Action0,
            TieBreakRule::FollowSignalDirection,
        ] {
            let eq = simulate_equilibrium(&binary(), 3, &rule, &Limits::default()).unwrap();
            assert!(eq.profile.v_i <= sel.profile.v_i);
        }
    }

    #[test]
    fn indifference_bound_is_reported() {
        let limits = Limits {
            max_indifference_points: 0,
            ..Limits::default()
        };
        let err = best_equilibrium_payoffs(&binary(), 3, &limits).unwrap_err();
        assert!(matches!(err, EngineError::TooManyIndifferenceNodes { .. }));
    }

    #[test]
    fn social_value_ternary_half() {
        let tol = r(1, 1 << 20);
        let sv = social_value(&ternary(r(1, 2)), &r(1, 2), &tol, &Limits::default()).unwrap();
        assert!(sv.tail_bound <= tol);
        let exact = r(1, 24);
        assert!(sv.contains(&exact));
        assert!((sv.partial_sum.clone() - exact).abs() <= tol);
    }

    #[test]
    fn social_value_degenerate_structures() {
        let tol = r(1, 1000);
        for pi in [
            InformationStructure::full_information(),
            InformationStructure::no_information(),
        ] {
            let sv = social_value(&pi, &r(3, 4), &tol, &Limits::default()).unwrap();
            assert!(sv.partial_sum.is_zero());
        }
    }

    #[test]
    fn social_value_parameter_errors() {
        let pi = binary();
        let limits = Limits::default();
        assert!(matches!(
            social_value(&pi, &Rat::one(), &r(1, 10), &limits),
            Err(EngineError::InvalidParameter { name: "delta", .. })
        ));
        assert!(matches!(
            social_value(&pi, &Rat::zero(), &r(1, 10), &limits),
            Err(EngineError::InvalidParameter { name: "delta", .. })
        ));
        assert!(matches!(
            social_value(&pi, &r(1, 2), &Rat::zero(), &limits),
            Err(EngineError::InvalidParameter {
                name: "tolerance",
                ..
            })
        ));
        let tight = Limits {
            series_cap: 4,
            ..limits
        };
        assert!(matches!(
            social_value(&ternary(r(1, 2)), &r(1, 2), &r(1, 1 << 20), &tight),
            Err(EngineError::ToleranceUnreachable { cap: 4, .. })
        ));
    }
}

//! States, signals, information structures and Bayesian updating.
//!
//! The state space is fixed to `{L, H}` with a uniform prior and the action
//! space to `{0, 1}`. An [`InformationStructure`] lists per-state signal
//! likelihoods; a [`BeliefDistribution`] is what the structure induces once
//! signals that lead to the same posterior are merged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

/// Default bound on the number of i.i.d. draws composed in
/// [`iid_belief_distribution`].
pub const DEFAULT_IID_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Low,
    High,
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::Low => "L",
            State::High => "H",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("likelihoods under state {state} sum to {sum}, not 1")]
    NonStochastic { state: State, sum: Rat },
    #[error("signal {signal:?} has negative likelihood {value} under state {state}")]
    NegativeLikelihood {
        signal: String,
        state: State,
        value: Rat,
    },
    #[error("information structure has no signals")]
    EmptyAlphabet,
    #[error("signal {0:?} listed more than once")]
    DuplicateSignal(String),
    #[error("unknown signal {0:?}")]
    UnknownSignal(String),
    #[error("signal {signal:?} has zero probability under prior {prior}")]
    ZeroProbabilitySignal { signal: String, prior: Rat },
    #[error("cannot compose conclusive beliefs 0 and 1")]
    ContradictoryConclusiveBeliefs,
    #[error("belief {0} outside [0, 1]")]
    OutOfRange(Rat),
    #[error("{what} of {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
}

/// Probability of state H.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Rat", into = "Rat")]
pub struct Belief(Rat);

impl Belief {
    pub fn new(p_high: Rat) -> Result<Self, BeliefError> {
        if p_high.is_probability() {
            Ok(Belief(p_high))
        } else {
            Err(BeliefError::OutOfRange(p_high))
        }
    }

    pub fn zero() -> Self {
        Belief(Rat::zero())
    }

    pub fn half() -> Self {
        Belief(Rat::half())
    }

    pub fn one() -> Self {
        Belief(Rat::one())
    }

    /// Belief implied by joint weights `P(event, H)` and `P(event, L)` under
    /// the uniform prior. `None` when both weights vanish.
    pub fn from_weights(weight_h: &Rat, weight_l: &Rat) -> Option<Self> {
        let total = weight_h + weight_l;
        if total.is_zero() {
            None
        } else {
            Some(Belief(weight_h / &total))
        }
    }

    pub fn p_high(&self) -> &Rat {
        &self.0
    }

    pub fn is_half(&self) -> bool {
        self.0 == Rat::half()
    }

    pub fn is_conclusive(&self) -> bool {
        self.0.is_zero() || self.0.is_one()
    }

    /// Strictly between 0 and 1/2.
    pub fn is_low_interior(&self) -> bool {
        self.0.is_positive() && self.0 < Rat::half()
    }

    /// Strictly between 1/2 and 1.
    pub fn is_high_interior(&self) -> bool {
        self.0 > Rat::half() && self.0 < Rat::one()
    }
}

impl TryFrom<Rat> for Belief {
    type Error = BeliefError;
    fn try_from(value: Rat) -> Result<Self, Self::Error> {
        Belief::new(value)
    }
}

impl From<Belief> for Rat {
    fn from(value: Belief) -> Self {
        value.0
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Belief({})", self.0)
    }
}

/// Posterior from combining two conditionally independent pieces of
/// evidence, each summarised by its own posterior under the uniform prior:
/// `yz / (yz + (1-y)(1-z))`.
pub fn compose_beliefs(a: &Belief, b: &Belief) -> Result<Belief, BeliefError> {
    let y = a.p_high();
    let z = b.p_high();
    let high = y * z;
    let low = (Rat::one() - y) * (Rat::one() - z);
    Belief::from_weights(&high, &low).ok_or(BeliefError::ContradictoryConclusiveBeliefs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal {
    pub id: String,
    #[serde(rename = "pH")]
    pub like_h: Rat,
    #[serde(rename = "pL")]
    pub like_l: Rat,
}

impl Signal {
    pub fn new(id: impl Into<String>, like_h: Rat, like_l: Rat) -> Self {
        Signal {
            id: id.into(),
            like_h,
            like_l,
        }
    }

    pub fn likelihood(&self, state: State) -> &Rat {
        match state {
            State::High => &self.like_h,
            State::Low => &self.like_l,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawStructure {
    signals: Vec<Signal>,
}

/// A validated map from `{L, H}` to distributions over a finite signal set.
///
/// Signals are kept in the order given so the JSON form round-trips exactly;
/// merging by posterior happens in [`induced_belief_distribution`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStructure")]
pub struct InformationStructure {
    signals: Vec<Signal>,
}

impl TryFrom<RawStructure> for InformationStructure {
    type Error = BeliefError;
    fn try_from(raw: RawStructure) -> Result<Self, Self::Error> {
        validate_structure(raw.signals)
    }
}

/// Checks a raw likelihood table and builds the structure.
pub fn validate_structure(
    signals: impl IntoIterator<Item = Signal>,
) -> Result<InformationStructure, BeliefError> {
    let signals: Vec<Signal> = signals.into_iter().collect();
    if signals.is_empty() {
        return Err(BeliefError::EmptyAlphabet);
    }
    let mut seen = BTreeSet::new();
    for s in &signals {
        if !seen.insert(s.id.as_str()) {
            return Err(BeliefError::DuplicateSignal(s.id.clone()));
        }
        for state in [State::High, State::Low] {
            let v = s.likelihood(state);
            if v.is_negative() {
                return Err(BeliefError::NegativeLikelihood {
                    signal: s.id.clone(),
                    state,
                    value: v.clone(),
                });
            }
        }
    }
    for state in [State::High, State::Low] {
        let sum: Rat = signals.iter().map(|s| s.likelihood(state)).sum();
        if !sum.is_one() {
            return Err(BeliefError::NonStochastic { state, sum });
        }
    }
    Ok(InformationStructure { signals })
}

impl InformationStructure {
    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn signal(&self, id: &str) -> Result<&Signal, BeliefError> {
        self.signals
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| BeliefError::UnknownSignal(id.to_string()))
    }

    /// Perfectly revealing signals.
    pub fn full_information() -> Self {
        validate_structure([
            Signal::new("s1", Rat::one(), Rat::zero()),
            Signal::new("s0", Rat::zero(), Rat::one()),
        ])
        .expect("full information is stochastic")
    }

    /// A single uninformative signal.
    pub fn no_information() -> Self {
        validate_structure([Signal::new("s", Rat::one(), Rat::one())])
            .expect("no information is stochastic")
    }

    /// Two signals, the high one drawn with probability `q` under H and
    /// `1 - q` under L. Requires `0 <= q <= 1`.
    pub fn symmetric_binary(q: Rat) -> Result<Self, BeliefError> {
        let r = Rat::one() - &q;
        validate_structure([
            Signal::new("hi", q.clone(), r.clone()),
            Signal::new("lo", r, q),
        ])
    }

    /// Posterior given `signal`, starting from `prior`.
    pub fn posterior(&self, prior: &Belief, signal: &str) -> Result<Belief, BeliefError> {
        posterior(prior, self.signal(signal)?)
    }
}

/// Bayes' rule for a single signal.
pub fn posterior(prior: &Belief, signal: &Signal) -> Result<Belief, BeliefError> {
    let p = prior.p_high();
    let high = p * &signal.like_h;
    let low = (Rat::one() - p) * &signal.like_l;
    Belief::from_weights(&high, &low).ok_or_else(|| BeliefError::ZeroProbabilitySignal {
        signal: signal.id.clone(),
        prior: p.clone(),
    })
}

/// One support point of a belief distribution with its per-state mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub belief: Belief,
    pub weight_h: Rat,
    pub weight_l: Rat,
}

impl Atom {
    /// Probability of this atom under the uniform prior.
    pub fn unconditional(&self) -> Rat {
        (&self.weight_h + &self.weight_l) * Rat::half()
    }
}

/// Distribution of the posterior, kept as per-state weights on each atom.
/// Atoms are sorted by belief and have positive total weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefDistribution {
    atoms: Vec<Atom>,
}

impl BeliefDistribution {
    /// Merges `(weight_h, weight_l)` pairs by implied belief, dropping
    /// pairs with zero total weight.
    pub fn from_weights(pairs: impl IntoIterator<Item = (Rat, Rat)>) -> Self {
        let mut merged: BTreeMap<Belief, (Rat, Rat)> = BTreeMap::new();
        for (wh, wl) in pairs {
            let Some(belief) = Belief::from_weights(&wh, &wl) else {
                continue;
            };
            let entry = merged
                .entry(belief)
                .or_insert_with(|| (Rat::zero(), Rat::zero()));
            entry.0 += wh;
            entry.1 += wl;
        }
        BeliefDistribution {
            atoms: merged
                .into_iter()
                .map(|(belief, (weight_h, weight_l))| Atom {
                    belief,
                    weight_h,
                    weight_l,
                })
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, belief: &Belief) -> Option<&Atom> {
        self.atoms
            .binary_search_by(|a| a.belief.cmp(belief))
            .ok()
            .map(|i| &self.atoms[i])
    }

    pub fn support(&self) -> impl Iterator<Item = &Belief> {
        self.atoms.iter().map(|a| &a.belief)
    }

    /// Unconditional probability that the posterior equals `belief`.
    pub fn probability(&self, belief: &Belief) -> Rat {
        self.atom(belief)
            .map(Atom::unconditional)
            .unwrap_or_else(Rat::zero)
    }

    /// Prior-weighted mean of the posterior; 1/2 for every distribution
    /// produced from a valid structure.
    pub fn mean(&self) -> Rat {
        self.atoms
            .iter()
            .map(|a| a.unconditional() * a.belief.p_high())
            .sum()
    }

    pub fn total_weight(&self, state: State) -> Rat {
        self.atoms
            .iter()
            .map(|a| match state {
                State::High => &a.weight_h,
                State::Low => &a.weight_l,
            })
            .sum()
    }

    /// `P(posterior = 1 | H)`.
    pub fn conclusive_high_mass(&self) -> Rat {
        self.atom(&Belief::one())
            .map(|a| a.weight_h.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// `P(posterior = 0 | L)`.
    pub fn conclusive_low_mass(&self) -> Rat {
        self.atom(&Belief::zero())
            .map(|a| a.weight_l.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn has_low_interior(&self) -> bool {
        self.support().any(Belief::is_low_interior)
    }

    pub fn has_high_interior(&self) -> bool {
        self.support().any(Belief::is_high_interior)
    }

    /// Interior support on both sides of 1/2.
    pub fn is_two_sided(&self) -> bool {
        self.has_low_interior() && self.has_high_interior()
    }

    /// Support contained in `{0, 1/2, 1}`.
    pub fn is_ternary(&self) -> bool {
        self.support().all(|b| b.is_conclusive() || b.is_half())
    }

    /// Distribution of the composed posterior of one draw from `self` and an
    /// independent draw from `other`.
    pub fn product(&self, other: &BeliefDistribution) -> BeliefDistribution {
        BeliefDistribution::from_weights(self.atoms.iter().flat_map(|a| {
            other
                .atoms
                .iter()
                .map(move |b| (&a.weight_h * &b.weight_h, &a.weight_l * &b.weight_l))
        }))
    }

    /// Rebuilds a structure with one signal per atom, named `m<num>_<den>`.
    pub fn to_structure(&self) -> InformationStructure {
        let signals = self.atoms.iter().map(|a| {
            let b = a.belief.p_high();
            Signal::new(
                format!("m{}_{}", b.numer(), b.denom()),
                a.weight_h.clone(),
                a.weight_l.clone(),
            )
        });
        validate_structure(signals).expect("atoms of a belief distribution are stochastic")
    }
}

/// Distribution of the posterior induced by one signal draw.
pub fn induced_belief_distribution(structure: &InformationStructure) -> BeliefDistribution {
    BeliefDistribution::from_weights(
        structure
            .signals()
            .iter()
            .map(|s| (s.like_h.clone(), s.like_l.clone())),
    )
}

/// Distribution of the composed posterior after `n` conditionally i.i.d.
/// draws. Atoms are merged after every composition step.
pub fn iid_belief_distribution(
    structure: &InformationStructure,
    n: usize,
    cap: usize,
) -> Result<BeliefDistribution, BeliefError> {
    if n == 0 || n > cap {
        return Err(BeliefError::CapExceeded {
            what: "number of i.i.d. draws",
            requested: n,
            cap,
        });
    }
    let single = induced_belief_distribution(structure);
    Ok(iid_from_distribution(&single, n))
}

pub(crate) fn iid_from_distribution(single: &BeliefDistribution, n: usize) -> BeliefDistribution {
    let mut acc = single.clone();
    for _ in 1..n {
        acc = acc.product(single);
    }
    acc
}

//! Information design for the value of history.
//!
//! Any structure can be split so that every interior posterior moves to
//! `{0, 1/2}` or `{1/2, 1}`. The split keeps the single-signal payoff, never
//! lowers any agent's value of history, and lands in the one-parameter
//! family `pi(eps)`: conclusive with probability `1 - eps`, uninformative
//! with probability `eps`, in each state. Closed forms over that family give
//! the optimal designs.

use serde::{Deserialize, Serialize};

use crate::belief::{
    induced_belief_distribution, validate_structure, Belief, InformationStructure, Signal,
};
use crate::engine::{best_equilibrium_payoffs, check_discount, EngineError, Limits, PayoffProfile};
use crate::optimize::Estimate;
use crate::rational::Rat;

/// Ternary structure `pi(eps)` with posteriors in `{0, 1/2, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryStructure {
    eps: Rat,
}

impl TernaryStructure {
    pub fn new(eps: Rat) -> Result<Self, EngineError> {
        if !eps.is_probability() {
            return Err(EngineError::InvalidParameter {
                name: "eps",
                value: eps,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(TernaryStructure { eps })
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    /// Signals `s0`, `sh`, `s1`; zero-probability signals are omitted.
    pub fn to_structure(&self) -> InformationStructure {
        let conclusive = Rat::one() - &self.eps;
        let mut signals = Vec::with_capacity(3);
        if conclusive.is_positive() {
            signals.push(Signal::new("s0", Rat::zero(), conclusive.clone()));
        }
        if self.eps.is_positive() {
            signals.push(Signal::new("sh", self.eps.clone(), self.eps.clone()));
        }
        if conclusive.is_positive() {
            signals.push(Signal::new("s1", conclusive, Rat::zero()));
        }
        validate_structure(signals).expect("ternary structure is stochastic")
    }

    /// Recognises a structure whose posteriors lie in `{0, 1/2, 1}`.
    pub fn from_structure(structure: &InformationStructure) -> Option<Self> {
        let dist = induced_belief_distribution(structure);
        if !dist.is_ternary() {
            return None;
        }
        let eps = dist
            .atom(&Belief::half())
            .map(|a| a.weight_h.clone())
            .unwrap_or_else(Rat::zero);
        Some(TernaryStructure { eps })
    }
}

/// Shorthand for `TernaryStructure::new(eps)?.to_structure()`.
pub fn ternary(eps: Rat) -> Result<InformationStructure, EngineError> {
    Ok(TernaryStructure::new(eps)?.to_structure())
}

/// How one original signal is redistributed over posteriors `0, 1/2, 1`,
/// conditional on each state. `None` where the signal is impossible in that
/// state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitKernel {
    pub signal: String,
    pub belief: Belief,
    pub given_h: Option<[Rat; 3]>,
    pub given_l: Option<[Rat; 3]>,
}

impl SplitKernel {
    /// Distribution of the post-split posterior given the original signal,
    /// as weights on `0, 1/2, 1`.
    pub fn conditional_on_signal(&self) -> [Rat; 3] {
        let x = self.belief.p_high();
        let zero = [Rat::zero(), Rat::zero(), Rat::zero()];
        let h = self.given_h.as_ref().unwrap_or(&zero);
        let l = self.given_l.as_ref().unwrap_or(&zero);
        std::array::from_fn(|k| x * &h[k] + (Rat::one() - x) * &l[k])
    }

    /// Mean of the post-split posterior given the original signal.
    pub fn conditional_mean(&self) -> Rat {
        let w = self.conditional_on_signal();
        &w[1] * Rat::half() + &w[2]
    }
}

/// Kernels for every signal with positive probability.
///
/// Under H a signal moves to 1/2 with probability `min(1, pL/pH)` and to 1
/// otherwise; under L it moves to 1/2 with probability `min(1, pH/pL)` and
/// to 0 otherwise.
pub fn split_kernels(structure: &InformationStructure) -> Vec<SplitKernel> {
    structure
        .signals()
        .iter()
        .filter_map(|s| {
            let belief = Belief::from_weights(&s.like_h, &s.like_l)?;
            let given_h = s.like_h.is_positive().then(|| {
                let to_half = (&s.like_l / &s.like_h).min(Rat::one());
                [Rat::zero(), to_half.clone(), Rat::one() - to_half]
            });
            let given_l = s.like_l.is_positive().then(|| {
                let to_half = (&s.like_h / &s.like_l).min(Rat::one());
                [Rat::one() - &to_half, to_half, Rat::zero()]
            });
            Some(SplitKernel {
                signal: s.id.clone(),
                belief,
                given_h,
                given_l,
            })
        })
        .collect()
}

/// Mass moved to the uninformative posterior: `sum_s min(pH(s), pL(s))`.
pub fn split_eps(structure: &InformationStructure) -> Rat {
    structure
        .signals()
        .iter()
        .map(|s| s.like_h.clone().min(s.like_l.clone()))
        .sum()
}

/// Splits every interior posterior onto `{0, 1/2}` or `{1/2, 1}`.
pub fn split_to_ternary(structure: &InformationStructure) -> InformationStructure {
    TernaryStructure {
        eps: split_eps(structure),
    }
    .to_structure()
}

/// Which sufficient condition certified an equivalence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquivalenceWitness {
    /// Both structures induce the same posterior distribution.
    Identical,
    /// Interior posteriors of both lie in `(0, 1/2]` and `P(posterior = 1 | H)`
    /// agrees.
    LowSideConclusiveMatch { mass: Rat },
    /// Interior posteriors of both lie in `[1/2, 1)` and `P(posterior = 0 | L)`
    /// agrees.
    HighSideConclusiveMatch { mass: Rat },
    /// Payoffs differ: `agent` is `None` for the single-signal payoff.
    ValueDifference {
        agent: Option<usize>,
        left: Rat,
        right: Rat,
    },
    /// No sufficient condition applies, yet all computed values agree.
    AgreesToHorizon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalence {
    /// Certified for every agent, not only those computed.
    pub equivalent: bool,
    pub witness: EquivalenceWitness,
    /// `V` and the values of history agree for agents `1..=horizon`.
    pub values_agree: bool,
    pub horizon: usize,
}

fn one_sided_low(structure: &InformationStructure) -> bool {
    !induced_belief_distribution(structure).has_high_interior()
}

fn one_sided_high(structure: &InformationStructure) -> bool {
    !induced_belief_distribution(structure).has_low_interior()
}

/// Tests whether two structures yield the same `V` and the same value of
/// history for every agent, and cross-checks against computed values up to
/// `horizon`.
pub fn check_equivalence(
    left: &InformationStructure,
    right: &InformationStructure,
    horizon: usize,
    limits: &Limits,
) -> Result<Equivalence, EngineError> {
    let dl = induced_belief_distribution(left);
    let dr = induced_belief_distribution(right);
    let certified = if dl == dr {
        Some(EquivalenceWitness::Identical)
    } else if one_sided_low(left)
        && one_sided_low(right)
        && dl.conclusive_high_mass() == dr.conclusive_high_mass()
    {
        Some(EquivalenceWitness::LowSideConclusiveMatch {
            mass: dl.conclusive_high_mass(),
        })
    } else if one_sided_high(left)
        && one_sided_high(right)
        && dl.conclusive_low_mass() == dr.conclusive_low_mass()
    {
        Some(EquivalenceWitness::HighSideConclusiveMatch {
            mass: dl.conclusive_low_mass(),
        })
    } else {
        None
    };

    let pl = best_equilibrium_payoffs(left, horizon, limits)?.profile;
    let pr = best_equilibrium_payoffs(right, horizon, limits)?.profile;
    let difference = first_difference(&pl, &pr);
    let values_agree = difference.is_none();
    let (equivalent, witness) = match (certified, difference) {
        (Some(w), _) => (true, w),
        (None, Some(d)) => (false, d),
        (None, None) => (false, EquivalenceWitness::AgreesToHorizon),
    };
    Ok(Equivalence {
        equivalent,
        witness,
        values_agree,
        horizon,
    })
}

fn first_difference(a: &PayoffProfile, b: &PayoffProfile) -> Option<EquivalenceWitness> {
    if a.v != b.v {
        return Some(EquivalenceWitness::ValueDifference {
            agent: None,
            left: a.v.clone(),
            right: b.v.clone(),
        });
    }
    a.hist_value_i
        .iter()
        .zip(&b.hist_value_i)
        .enumerate()
        .find(|(_, (x, y))| x != y)
        .map(|(i, (x, y))| EquivalenceWitness::ValueDifference {
            agent: Some(i + 1),
            left: x.clone(),
            right: y.clone(),
        })
}

/// `(eps - eps^i) / 4`: value of history for agent `i` under `pi(eps)`.
pub fn ternary_value_i(eps: &Rat, i: u32) -> Rat {
    (eps - eps.pow(i)) * Rat::quarter()
}

/// `delta * eps * (1 - eps) / (4 * (1 - delta * eps))`: discounted value of
/// history under `pi(eps)`.
pub fn ternary_social_value(eps: &Rat, delta: &Rat) -> Result<Rat, EngineError> {
    check_discount(delta)?;
    Ok(ternary_social_value_unchecked(eps, delta))
}

pub(crate) fn ternary_social_value_unchecked(eps: &Rat, delta: &Rat) -> Rat {
    let num = delta * eps * (Rat::one() - eps);
    let den = (Rat::one() - delta * eps) * Rat::from_integer(4);
    num / den
}

/// Maximiser of `(eps - eps^i) / 4` over `eps` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentOptimum {
    pub agent: u32,
    pub eps: Estimate,
    /// Set when the maximiser is rational.
    pub exact: Option<Rat>,
    /// Agent 1 has no history, so every `eps` is optimal.
    pub degenerate: bool,
}

/// Stationary point of `eps - eps^i`: `eps^(i-1) = 1/i`, i.e.
/// `eps* = (1/i)^(1/(i-1))`.
pub fn optimal_eps_agent(agent: u32) -> AgentOptimum {
    match agent {
        0 | 1 => AgentOptimum {
            agent,
            eps: Estimate::exact(1.0),
            exact: Some(Rat::one()),
            degenerate: true,
        },
        2 => AgentOptimum {
            agent,
            eps: Estimate::exact(0.5),
            exact: Some(Rat::half()),
            degenerate: false,
        },
        i => {
            let i = i as f64;
            AgentOptimum {
                agent,
                eps: Estimate::closed_form((1.0 / i).powf(1.0 / (i - 1.0))),
                exact: None,
                degenerate: false,
            }
        }
    }
}

/// `(1 - sqrt(1 - delta)) / delta`, computed as `1 / (1 + sqrt(1 - delta))`
/// to avoid cancellation at small `delta`.
pub fn optimal_eps_social(delta: &Rat) -> Result<Estimate, EngineError> {
    check_discount(delta)?;
    let d = delta.to_f64();
    Ok(Estimate::closed_form(1.0 / (1.0 + (1.0 - d).sqrt())))
}

/// Largest achievable discounted value of history:
/// `(1 - sqrt(1 - delta))^2 / (4 delta)`.
pub fn max_social_value(delta: &Rat) -> Result<Estimate, EngineError> {
    check_discount(delta)?;
    let d = delta.to_f64();
    // (1 - s)^2 / d with 1 - s = d / (1 + s).
    let s = (1.0 - d).sqrt();
    Ok(Estimate::closed_form(d / ((1.0 + s) * (1.0 + s)) / 4.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentComparison {
    pub agent: usize,
    pub original: Rat,
    pub split: Rat,
}

/// Comparison of a structure with its ternary split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub horizon: usize,
    pub split_eps: Rat,
    pub split: InformationStructure,
    pub original_profile: PayoffProfile,
    pub split_profile: PayoffProfile,
    pub agents: Vec<AgentComparison>,
    pub preserves_v: bool,
    pub weakly_dominates: bool,
    /// Interior posteriors on both sides of 1/2.
    pub two_sided: bool,
    /// For two-sided structures: strict improvement for agents `2..=horizon`.
    pub strict: Option<bool>,
    /// The original is certified equivalent to its split.
    pub equivalent: bool,
    /// `V` preserved and no agent worse off.
    pub verdict: bool,
}

impl DominanceReport {
    /// Verdict plus strictness where it is expected.
    pub fn passes(&self) -> bool {
        self.verdict && self.strict != Some(false)
    }
}

/// Splits `structure` and compares `V` and the values of history for agents
/// `1..=horizon`.
pub fn verify_dominance(
    structure: &InformationStructure,
    horizon: usize,
    limits: &Limits,
) -> Result<DominanceReport, EngineError> {
    let split = split_to_ternary(structure);
    let original_profile = best_equilibrium_payoffs(structure, horizon, limits)?.profile;
    let split_profile = best_equilibrium_payoffs(&split, horizon, limits)?.profile;
    let agents: Vec<AgentComparison> = original_profile
        .hist_value_i
        .iter()
        .zip(&split_profile.hist_value_i)
        .enumerate()
        .map(|(i, (o, s))| AgentComparison {
            agent: i + 1,
            original: o.clone(),
            split: s.clone(),
        })
        .collect();
    let preserves_v = original_profile.v == split_profile.v;
    let weakly_dominates = agents.iter().all(|a| a.split >= a.original);
    let two_sided = induced_belief_distribution(structure).is_two_sided();
    let strict = two_sided.then(|| agents.iter().skip(1).all(|a| a.split > a.original));
    let dist = induced_belief_distribution(structure);
    let equivalent = (one_sided_low(structure)
        && dist.conclusive_high_mass() == Rat::one() - split_eps(structure))
        || (one_sided_high(structure)
            && dist.conclusive_low_mass() == Rat::one() - split_eps(structure));
    Ok(DominanceReport {
        horizon,
        split_eps: split_eps(structure),
        split,
        original_profile,
        split_profile,
        agents,
        preserves_v,
        weakly_dominates,
        two_sided,
        strict,
        equivalent,
        verdict: preserves_v && weakly_dominates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::single_signal_payoff;
    use crate::optimize::maximize_concave_exact;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn binary() -> InformationStructure {
        InformationStructure::symmetric_binary(r(2, 3)).unwrap()
    }

    /// Posteriors {1/4, 1}: the conclusive signal has mass 2/3 under H.
    fn low_sided() -> InformationStructure {
        validate_structure([
            Signal::new("one", r(2, 3), Rat::zero()),
            Signal::new("quarter", r(1, 3), Rat::one()),
        ])
        .unwrap()
    }

    #[test]
    fn ternary_construction() {
        let t = TernaryStructure::new(r(1, 3)).unwrap();
        let d = induced_belief_distribution(&t.to_structure());
        assert!(d.is_ternary());
        assert_eq!(d.len(), 3);
        assert_eq!(TernaryStructure::from_structure(&t.to_structure()), Some(t));
        assert!(TernaryStructure::new(r(4, 3)).is_err());
        assert_eq!(ternary(Rat::one()).unwrap().signals().len(), 1);
        assert_eq!(ternary(Rat::zero()).unwrap().signals().len(), 2);
        assert_eq!(TernaryStructure::from_structure(&binary()), None);
    }

    #[test]
    fn split_binary() {
        let s = split_to_ternary(&binary());
        let d = induced_belief_distribution(&s);
        assert_eq!(d.conclusive_high_mass(), r(1, 3));
        assert_eq!(d.conclusive_low_mass(), r(1, 3));
        let mid = d.atom(&Belief::half()).unwrap();
        assert_eq!(
            (mid.weight_h.clone(), mid.weight_l.clone()),
            (r(2, 3), r(2, 3))
        );
        assert_eq!(d.mean(), Rat::half());
        assert_eq!(single_signal_payoff(&s), single_signal_payoff(&binary()));
    }

    #[test]
    fn split_fixed_points() {
        let t = ternary(r(2, 5)).unwrap();
        assert_eq!(split_to_ternary(&t), t);
        let full = InformationStructure::full_information();
        assert_eq!(
            induced_belief_distribution(&split_to_ternary(&full)),
            induced_belief_distribution(&full)
        );
    }

    #[test]
    fn kernels_for_binary() {
        let ks = split_kernels(&binary());
        let hi = &ks[0];
        assert_eq!(hi.given_h, Some([Rat::zero(), r(1, 2), r(1, 2)]));
        assert_eq!(hi.given_l, Some([Rat::zero(), Rat::one(), Rat::zero()]));
        for k in &ks {
            assert_eq!(&k.conditional_mean(), k.belief.p_high());
        }
    }

    #[test]
    fn equivalence_examples() {
        let limits = Limits::default();
        let a = low_sided();
        let b = ternary(r(1, 3)).unwrap();
        let eq = check_equivalence(&a, &b, 4, &limits).unwrap();
        assert!(eq.equivalent);
        assert!(eq.values_agree);
        assert_eq!(
            eq.witness,
            EquivalenceWitness::LowSideConclusiveMatch { mass: r(2, 3) }
        );

        let eq = check_equivalence(
            &ternary(r(1, 3)).unwrap(),
            &ternary(r(1, 2)).unwrap(),
            3,
            &limits,
        )
        .unwrap();
        assert!(!eq.equivalent);
        assert!(matches!(
            eq.witness,
            EquivalenceWitness::ValueDifference { agent: None, .. }
        ));

        let eq = check_equivalence(&binary(), &binary(), 3, &limits).unwrap();
        assert!(eq.equivalent);
        assert_eq!(eq.witness, EquivalenceWitness::Identical);
    }

    #[test]
    fn ternary_value_examples() {
        assert_eq!(ternary_value_i(&r(1, 2), 2), r(1, 16));
        assert_eq!(ternary_value_i(&Rat::zero(), 5), Rat::zero());
        assert_eq!(ternary_value_i(&Rat::one(), 5), Rat::zero());
        let sel =
            best_equilibrium_payoffs(&ternary(r(1, 2)).unwrap(), 2, &Limits::default()).unwrap();
        assert_eq!(sel.profile.hist_value_i[1], r(1, 16));
    }

    #[test]
    fn ternary_social_value_examples() {
        assert_eq!(ternary_social_value(&r(1, 2), &r(1, 2)).unwrap(), r(1, 24));
        assert_eq!(
            ternary_social_value(&Rat::zero(), &r(1, 3)).unwrap(),
            Rat::zero()
        );
        assert_eq!(ternary_social_value(&r(2, 3), &r(3, 4)).unwrap(), r(1, 12));
        let peak = max_social_value(&r(3, 4)).unwrap();
        assert!(peak.within(1.0 / 12.0, 1e-15));
        assert!(ternary_social_value(&r(1, 2), &Rat::one()).is_err());
    }

    #[test]
    fn agent_optimum() {
        assert_eq!(optimal_eps_agent(2).exact, Some(r(1, 2)));
        let one = optimal_eps_agent(1);
        assert!(one.degenerate);
        assert_eq!(one.exact, Some(Rat::one()));
        for i in 2..=8u32 {
            let claimed = optimal_eps_agent(i).eps.value;
            let m = maximize_concave_exact(|e| ternary_value_i(e, i), 0.0, 1.0, 1e-12).unwrap();
            assert!(
                (m.argmax - claimed).abs() < 1e-9,
                "agent {i}: {} vs {claimed}",
                m.argmax
            );
        }
    }

    #[test]
    fn social_optimum() {
        assert!(optimal_eps_social(&r(3, 4))
            .unwrap()
            .within(2.0 / 3.0, 1e-15));
        assert!(optimal_eps_social(&r(1, 2))
            .unwrap()
            .within(2.0 - 2f64.sqrt(), 1e-15));
        let tiny = Rat::from_decimal_str("1e-6").unwrap();
        assert!(optimal_eps_social(&tiny).unwrap().within(0.5, 1e-6));
        let delta = r(3, 4);
        let m = maximize_concave_exact(
            |e| ternary_social_value_unchecked(e, &delta),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((m.argmax - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn dominance_binary() {
        let rep = verify_dominance(&binary(), 3, &Limits::default()).unwrap();
        assert!(rep.preserves_v);
        assert_eq!(rep.agents[1].original, Rat::zero());
        assert_eq!(rep.agents[1].split, r(1, 18));
        assert!(rep.two_sided);
        assert_eq!(rep.strict, Some(true));
        assert!(rep.passes());
    }

    #[test]
    fn dominance_equalities() {
        let rep = verify_dominance(&ternary(r(2, 7)).unwrap(), 4, &Limits::default()).unwrap();
        assert!(rep.agents.iter().all(|a| a.original == a.split));
        assert!(rep.equivalent);
        let rep = verify_dominance(&low_sided(), 4, &Limits::default()).unwrap();
        assert!(rep.agents.iter().all(|a| a.original == a.split));
        assert!(rep.equivalent);
        assert!(!rep.two_sided);
        assert_eq!(rep.strict, None);
    }

    fn arb_structure() -> impl Strategy<Value = InformationStructure> {
        (2usize..=4).prop_flat_map(|k| {
            (
                proptest::collection::vec(0i64..=6, k),
                proptest::collection::vec(0i64..=6, k),
            )
                .prop_filter_map("positive totals", |(h, l)| {
                    let sh: i64 = h.iter().sum();
                    let sl: i64 = l.iter().sum();
                    if sh == 0 || sl == 0 {
                        return None;
                    }
                    validate_structure(h.iter().zip(&l).enumerate().map(|(i, (x, y))| {
                        Signal::new(format!("s{i}"), Rat::new(*x, sh), Rat::new(*y, sl))
                    }))
                    .ok()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn split_invariants(pi in arb_structure()) {
            let s = split_to_ternary(&pi);
            let d = induced_belief_distribution(&s);
            prop_assert!(d.is_ternary());
            prop_assert_eq!(d.mean(), Rat::half());
            prop_assert_eq!(single_signal_payoff(&s), single_signal_payoff(&pi));
            for k in split_kernels(&pi) {
                prop_assert_eq!(&k.conditional_mean(), k.belief.p_high());
            }
        }

        #[test]
        fn dominance_holds(pi in arb_structure()) {
            let rep = verify_dominance(&pi, 4, &Limits::default()).unwrap();
            prop_assert!(rep.passes(), "{:?}", rep.agents);
        }
    }
}

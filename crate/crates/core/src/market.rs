//! A monopolist selling access to the action history.
//!
//! With dynamic pricing the seller charges each buyer exactly their value of
//! history, every buyer purchases, and the seller's discounted revenue equals
//! the social value of history while buyers keep `V`. With sticky pricing the
//! price can only change every `t` periods and is set at the value of the
//! block's first buyer.

use serde::{Deserialize, Serialize};

use crate::belief::InformationStructure;
use crate::design::{optimal_eps_social, ternary_social_value_unchecked};
use crate::engine::{
    check_discount, check_tolerance, hist_values, single_signal_payoff, truncation_horizon,
    EngineError, Limits, Truncated,
};
use crate::optimize::{maximize_concave_exact, Estimate};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketParams {
    pub delta: Rat,
    pub alpha: Rat,
    pub stickiness: usize,
}

impl MarketParams {
    pub fn new(delta: Rat, alpha: Rat, stickiness: usize) -> Result<Self, EngineError> {
        check_discount(&delta)?;
        if !alpha.is_positive() || alpha >= 1 {
            return Err(EngineError::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must lie strictly between 0 and 1",
            });
        }
        if stickiness == 0 {
            return Err(EngineError::InvalidParameter {
                name: "t",
                value: Rat::zero(),
                reason: "stickiness must be at least 1",
            });
        }
        Ok(MarketParams {
            delta,
            alpha,
            stickiness,
        })
    }

    pub fn dynamic(delta: Rat, alpha: Rat) -> Result<Self, EngineError> {
        MarketParams::new(delta, alpha, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Dynamic,
    Sticky { t: usize },
}

impl Regime {
    fn of(t: usize) -> Self {
        if t == 1 {
            Regime::Dynamic
        } else {
            Regime::Sticky { t }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSchedule {
    pub regime: Regime,
    /// Price posted to buyer `i` (index `i - 1`).
    pub prices: Vec<Rat>,
    /// Buyer `i`'s willingness to pay when every predecessor bought.
    pub willingness: Vec<Rat>,
}

impl PriceSchedule {
    /// No buyer is asked more than their willingness to pay, and block
    /// leaders pay exactly their willingness.
    pub fn participation_holds(&self) -> bool {
        let t = match self.regime {
            Regime::Dynamic => 1,
            Regime::Sticky { t } => t,
        };
        self.prices
            .iter()
            .zip(&self.willingness)
            .enumerate()
            .all(|(i, (p, w))| if i % t == 0 { p == w } else { p <= w })
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.prices.windows(2).all(|w| w[0] <= w[1])
    }
}

fn block_prices(values: &[Rat], t: usize) -> Vec<Rat> {
    (0..values.len())
        .map(|i| values[i - i % t].clone())
        .collect()
}

/// `p_i = V_i(history) - V` for `i = 1..=horizon`.
pub fn dynamic_price_path(
    structure: &InformationStructure,
    horizon: usize,
    limits: &Limits,
) -> Result<PriceSchedule, EngineError> {
    sticky_price_path(structure, 1, horizon, limits)
}

/// Block-constant prices: buyers `kt+1..=(k+1)t` pay the value of history of
/// buyer `kt+1`.
pub fn sticky_price_path(
    structure: &InformationStructure,
    t: usize,
    horizon: usize,
    limits: &Limits,
) -> Result<PriceSchedule, EngineError> {
    if t == 0 {
        return Err(EngineError::InvalidParameter {
            name: "t",
            value: Rat::zero(),
            reason: "stickiness must be at least 1",
        });
    }
    let (_, values) = hist_values(structure, horizon, limits)?;
    Ok(PriceSchedule {
        regime: Regime::of(t),
        prices: block_prices(&values, t),
        willingness: values,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurplusReport {
    pub regime: Regime,
    pub params: MarketParams,
    pub seller: Truncated,
    pub buyer: Truncated,
    pub social: Truncated,
    pub schedule: PriceSchedule,
}

fn market(
    structure: &InformationStructure,
    params: &MarketParams,
    tol: &Rat,
    limits: &Limits,
) -> Result<SurplusReport, EngineError> {
    check_tolerance(tol)?;
    let delta = &params.delta;
    let v = single_signal_payoff(structure);
    // Seller terms lie in [0, 1/4 - V] and buyer terms in [V, 1/4].
    let spread = Rat::quarter() - &v;
    let horizon = truncation_horizon(delta, &spread, tol, limits.series_cap)?;
    let schedule = sticky_price_path(structure, params.stickiness, horizon, limits)?;

    let mut weight = Rat::one() - delta;
    let mut seller = Rat::zero();
    let mut buyer = Rat::zero();
    for (p, w) in schedule.prices.iter().zip(&schedule.willingness) {
        seller += &weight * p;
        buyer += &weight * (&v + w - p);
        weight *= delta;
    }
    let tail_weight = delta.pow(horizon as u32);
    let seller = Truncated {
        partial_sum: seller,
        tail_bound: &tail_weight * &spread,
        horizon,
    };
    let buyer = Truncated {
        partial_sum: buyer + &tail_weight * &v,
        tail_bound: &tail_weight * &spread,
        horizon,
    };
    let alpha = &params.alpha;
    let beta = Rat::one() - alpha;
    let social = Truncated {
        partial_sum: alpha * &buyer.partial_sum + &beta * &seller.partial_sum,
        tail_bound: alpha * &buyer.tail_bound + &beta * &seller.tail_bound,
        horizon,
    };
    Ok(SurplusReport {
        regime: Regime::of(params.stickiness),
        params: params.clone(),
        seller,
        buyer,
        social,
        schedule,
    })
}

/// Seller, buyer and weighted surplus under dynamic pricing, each certified
/// to within `tol`.
pub fn surpluses(
    structure: &InformationStructure,
    params: &MarketParams,
    tol: &Rat,
    limits: &Limits,
) -> Result<SurplusReport, EngineError> {
    if params.stickiness != 1 {
        return Err(EngineError::InvalidParameter {
            name: "t",
            value: Rat::from_integer(params.stickiness as i64),
            reason: "dynamic pricing needs t = 1",
        });
    }
    market(structure, params, tol, limits)
}

/// Surpluses when the price can only change every `params.stickiness`
/// periods.
pub fn sticky_surpluses(
    structure: &InformationStructure,
    params: &MarketParams,
    tol: &Rat,
    limits: &Limits,
) -> Result<SurplusReport, EngineError> {
    market(structure, params, tol, limits)
}

/// Seller surplus under `pi(eps)` with stickiness `t`:
/// `delta^t eps (1 - eps^t) / (4 (1 - delta^t eps^t))`.
pub fn ternary_sticky_seller(eps: &Rat, delta: &Rat, t: u32) -> Rat {
    let dt = delta.pow(t);
    let et = eps.pow(t);
    &dt * eps * (Rat::one() - &et) / ((Rat::one() - &dt * &et) * Rat::from_integer(4))
}

/// Buyer surplus under `pi(eps)` with stickiness `t`: `V` plus the value of
/// history buyers keep.
pub fn ternary_sticky_buyer(eps: &Rat, delta: &Rat, t: u32) -> Rat {
    (Rat::one() - eps) * Rat::quarter() + ternary_social_value_unchecked(eps, delta)
        - ternary_sticky_seller(eps, delta, t)
}

/// `alpha * buyer + (1 - alpha) * seller` under `pi(eps)`.
pub fn ternary_weighted_surplus(eps: &Rat, delta: &Rat, alpha: &Rat, t: u32) -> Rat {
    alpha * ternary_sticky_buyer(eps, delta, t)
        + (Rat::one() - alpha) * ternary_sticky_seller(eps, delta, t)
}

/// Seller-optimal `eps` with stickiness `t`: `x^(1/t)` where
/// `x = 2 / (b + sqrt(b^2 - 4 delta^t))`, `b = t + 1 - (t - 1) delta^t`.
pub fn optimal_eps_seller_sticky(delta: &Rat, t: u32) -> Result<Estimate, EngineError> {
    check_discount(delta)?;
    if t == 0 {
        return Err(EngineError::InvalidParameter {
            name: "t",
            value: Rat::zero(),
            reason: "stickiness must be at least 1",
        });
    }
    let dt = delta.pow(t);
    let b = Rat::from_integer(t as i64 + 1) - Rat::from_integer(t as i64 - 1) * &dt;
    let disc = (&b * &b - Rat::from_integer(4) * &dt).to_f64();
    let x = 2.0 / (b.to_f64() + disc.sqrt());
    Ok(Estimate::closed_form(x.powf(1.0 / t as f64)))
}

/// Seller-optimal `eps` under dynamic pricing.
pub fn optimal_eps_seller(delta: &Rat) -> Result<Estimate, EngineError> {
    optimal_eps_social(delta)
}

/// Buyers are best served by full information.
pub fn optimal_eps_buyer() -> Rat {
    Rat::zero()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Full information is optimal.
    Boundary,
    /// Interior closed form.
    Interior,
    /// Interior optimum found by search; no closed form is available.
    NumericOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedOptimum {
    pub eps: Estimate,
    pub branch: Branch,
}

/// `delta(1 - alpha) <= alpha`, i.e. `delta <= alpha / (1 - alpha)`.
pub fn below_weighted_threshold(delta: &Rat, alpha: &Rat) -> bool {
    delta * (Rat::one() - alpha) <= *alpha
}

/// Maximiser of the weighted surplus under dynamic pricing: 0 when
/// `delta <= alpha / (1 - alpha)`, otherwise
/// `(1 - sqrt((1 - alpha)(1 - delta) / (1 - 2 alpha))) / delta`.
pub fn optimal_eps_weighted(delta: &Rat, alpha: &Rat) -> Result<WeightedOptimum, EngineError> {
    let params = MarketParams::dynamic(delta.clone(), alpha.clone())?;
    let (delta, alpha) = (&params.delta, &params.alpha);
    if *alpha >= Rat::half() || below_weighted_threshold(delta, alpha) {
        return Ok(WeightedOptimum {
            eps: Estimate::exact(0.0),
            branch: Branch::Boundary,
        });
    }
    let one = Rat::one();
    let a2 = &one - alpha * Rat::from_integer(2);
    let ratio = (&one - alpha) * (&one - delta) / &a2;
    // 1 - sqrt(r) = (1 - r) / (1 + sqrt(r)) and (1 - r)(1 - 2 alpha) is exact.
    let num = delta * (&one - alpha) - alpha;
    let den = (&a2 * delta).to_f64() * (1.0 + ratio.to_f64().sqrt());
    Ok(WeightedOptimum {
        eps: Estimate::closed_form(num.to_f64() / den),
        branch: Branch::Interior,
    })
}

/// Weighted optimum under sticky pricing. Full information for
/// `alpha >= 1/2`; otherwise a bracketed numeric search.
pub fn optimal_eps_weighted_sticky(
    delta: &Rat,
    alpha: &Rat,
    t: u32,
    tol: f64,
) -> Result<WeightedOptimum, EngineError> {
    let params = MarketParams::new(delta.clone(), alpha.clone(), t.max(1) as usize)?;
    if t <= 1 {
        return optimal_eps_weighted(delta, alpha);
    }
    if params.alpha >= Rat::half() {
        return Ok(WeightedOptimum {
            eps: Estimate::exact(0.0),
            branch: Branch::Boundary,
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EngineError::InvalidParameter {
            name: "tolerance",
            value: Rat::from_f64(tol).unwrap_or_default(),
            reason: "must be positive",
        });
    }
    // Probes are finite points of [0, 1] and the objective is exact.
    let m = maximize_concave_exact(
        |e| ternary_weighted_surplus(e, &params.delta, &params.alpha, t),
        0.0,
        1.0,
        tol,
    )
    .expect("search on the unit interval");
    Ok(WeightedOptimum {
        eps: m.estimate(),
        branch: Branch::NumericOnly,
    })
}

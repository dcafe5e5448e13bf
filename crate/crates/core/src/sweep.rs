//! Comparative statics of the optimal ternary structure over a
//! `(delta, alpha, t)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::EngineError;
use crate::market::{
    below_weighted_threshold, optimal_eps_seller_sticky, optimal_eps_weighted_sticky,
    ternary_sticky_buyer, ternary_sticky_seller, ternary_weighted_surplus, Branch, MarketParams,
};
use crate::optimize::{maximize_concave_exact, Estimate};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub deltas: Vec<Rat>,
    pub alphas: Vec<Rat>,
    pub ts: Vec<u32>,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<(Rat, Rat, u32)> {
        let mut out = Vec::with_capacity(self.deltas.len() * self.alphas.len() * self.ts.len());
        for t in &self.ts {
            for a in &self.alphas {
                for d in &self.deltas {
                    out.push((d.clone(), a.clone(), *t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: Rat,
    pub alpha: Rat,
    pub t: u32,
    pub eps_buyer: Rat,
    pub eps_seller: Estimate,
    pub eps_star: Estimate,
    pub branch: Branch,
    /// Independent numeric argmax of the weighted surplus.
    pub eps_star_numeric: Estimate,
    /// Surpluses evaluated exactly at the binary value of `eps_star`.
    pub seller: f64,
    pub buyer: f64,
    pub social: f64,
    /// Seller surplus at `eps_seller`.
    pub seller_max: f64,
}

fn point(delta: &Rat, alpha: &Rat, t: u32, tol: f64) -> Result<SweepRow, EngineError> {
    MarketParams::new(delta.clone(), alpha.clone(), t as usize)?;
    let eps_seller = optimal_eps_seller_sticky(delta, t)?;
    let star = optimal_eps_weighted_sticky(delta, alpha, t, tol)?;
    let numeric = maximize_concave_exact(
        |e| ternary_weighted_surplus(e, delta, alpha, t),
        0.0,
        1.0,
        tol,
    )
    .expect("search on the unit interval");
    let at = |x: f64| Rat::from_f64(x).expect("finite");
    let e = at(star.eps.value);
    let seller = ternary_sticky_seller(&e, delta, t);
    let buyer = ternary_sticky_buyer(&e, delta, t);
    let social = alpha * &buyer + (Rat::one() - alpha) * &seller;
    Ok(SweepRow {
        delta: delta.clone(),
        alpha: alpha.clone(),
        t,
        eps_buyer: Rat::zero(),
        eps_seller,
        eps_star: star.eps,
        branch: star.branch,
        eps_star_numeric: numeric.estimate(),
        seller: seller.to_f64(),
        buyer: buyer.to_f64(),
        social: social.to_f64(),
        seller_max: ternary_sticky_seller(&at(eps_seller.value), delta, t).to_f64(),
    })
}

/// Evaluates every grid point in parallel; rows come back in grid order
/// (`t` outermost, then `alpha`, then `delta`).
pub fn run_sweep(grid: &SweepGrid, tol: f64) -> Result<Vec<SweepRow>, EngineError> {
    grid.points()
        .par_iter()
        .map(|(d, a, t)| point(d, a, *t, tol))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// For each `(alpha, t)`, the seller optimum strictly increases in `delta`.
    pub seller_eps_increasing_in_delta: bool,
    /// Under dynamic pricing the weighted optimum is full information exactly
    /// when `delta <= alpha / (1 - alpha)`, by closed form and by search.
    pub threshold_consistent: bool,
    /// For each `(delta, alpha)`, the seller's best surplus does not increase
    /// with `t`.
    pub seller_max_nonincreasing_in_t: bool,
    /// Closed-form and numeric weighted optima agree within `tol`.
    pub numeric_agrees: bool,
}

pub fn summarize(rows: &[SweepRow], tol: f64) -> SweepSummary {
    let mut by_at: Vec<&SweepRow> = rows.iter().collect();
    by_at.sort_by(|x, y| (&x.alpha, x.t, &x.delta).cmp(&(&y.alpha, y.t, &y.delta)));
    let seller_eps_increasing_in_delta = by_at.windows(2).all(|w| {
        (&w[0].alpha, w[0].t) != (&w[1].alpha, w[1].t)
            || w[0].eps_seller.value < w[1].eps_seller.value
    });

    let threshold_consistent = rows.iter().filter(|r| r.t == 1).all(|r| {
        let zero = r.alpha >= Rat::half() || below_weighted_threshold(&r.delta, &r.alpha);
        let numeric_zero = r.eps_star_numeric.value <= tol.max(1e-9);
        zero == (r.branch == Branch::Boundary) && zero == numeric_zero
    });

    let mut by_da: Vec<&SweepRow> = rows.iter().collect();
    by_da.sort_by(|x, y| (&x.delta, &x.alpha, x.t).cmp(&(&y.delta, &y.alpha, y.t)));
    let seller_max_nonincreasing_in_t = by_da.windows(2).all(|w| {
        (&w[0].delta, &w[0].alpha) != (&w[1].delta, &w[1].alpha)
            || w[1].seller_max <= w[0].seller_max
    });

    let numeric_agrees = rows.iter().all(|r| {
        let slack = r.eps_star.error_bound + r.eps_star_numeric.error_bound + tol;
        (r.eps_star.value - r.eps_star_numeric.value).abs() <= slack.max(1e-8)
    });

    SweepSummary {
        seller_eps_increasing_in_delta,
        threshold_consistent,
        seller_max_nonincreasing_in_t,
        numeric_agrees,
    }
}

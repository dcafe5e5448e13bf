//! CSV and JSON renderings of results. Exact values are written as
//! `num/den` next to a 12-significant-digit decimal.

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusEntry;
use crate::engine::{PayoffProfile, Truncated};
use crate::market::{Branch, PriceSchedule};
use crate::rational::{decimal12, Rat};
use crate::sweep::SweepRow;

/// An exact rational with its decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exact {
    pub exact: Rat,
    pub decimal: String,
}

impl From<&Rat> for Exact {
    fn from(r: &Rat) -> Self {
        Exact {
            exact: r.clone(),
            decimal: r.to_decimal(),
        }
    }
}

impl From<Rat> for Exact {
    fn from(r: Rat) -> Self {
        Exact::from(&r)
    }
}

/// A truncated series: the true value lies in `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounded {
    pub lower: Exact,
    pub upper: Exact,
    pub error_bound: Exact,
    pub horizon: usize,
}

impl From<&Truncated> for Bounded {
    fn from(t: &Truncated) -> Self {
        Bounded {
            lower: t.lower().into(),
            upper: t.upper().into(),
            error_bound: (&t.tail_bound).into(),
            horizon: t.horizon,
        }
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn pair(r: &Rat) -> [String; 2] {
    [r.to_string(), r.to_decimal()]
}

/// Columns `i, V_i, Vbar_i, hist_value_i`, each exact then decimal.
pub fn payoff_profile_csv(profile: &PayoffProfile) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "i",
        "V_i",
        "V_i_decimal",
        "Vbar_i",
        "Vbar_i_decimal",
        "hist_value_i",
        "hist_value_i_decimal",
    ])
    .expect("write");
    for (k, ((v, vb), h)) in profile
        .v_i
        .iter()
        .zip(&profile.vbar_i)
        .zip(&profile.hist_value_i)
        .enumerate()
    {
        let mut rec = vec![(k + 1).to_string()];
        for x in [v, vb, h] {
            rec.extend(pair(x));
        }
        w.write_record(&rec).expect("write");
    }
    finish(w)
}

pub fn price_schedule_csv(schedule: &PriceSchedule) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "price", "price_decimal"])
        .expect("write");
    for (k, p) in schedule.prices.iter().enumerate() {
        let [e, d] = pair(p);
        w.write_record([(k + 1).to_string(), e, d]).expect("write");
    }
    finish(w)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Boundary => "boundary",
        Branch::Interior => "interior",
        Branch::NumericOnly => "numeric",
    }
}

/// One row per grid point. `eps_*_err` columns bound the distance between
/// the reported and the true optimum; surpluses are exact at the reported
/// `eps_star`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "delta",
        "alpha",
        "t",
        "eps_star",
        "seller",
        "buyer",
        "social",
        "eps_star_err",
        "branch",
        "eps_star_numeric",
        "eps_buyer",
        "eps_seller",
        "eps_seller_err",
        "seller_max",
    ])
    .expect("write");
    for r in rows {
        w.write_record([
            r.delta.to_string(),
            r.alpha.to_string(),
            r.t.to_string(),
            decimal12(r.eps_star.value),
            decimal12(r.seller),
            decimal12(r.buyer),
            decimal12(r.social),
            format!("{:e}", r.eps_star.error_bound),
            branch_name(r.branch).to_string(),
            decimal12(r.eps_star_numeric.value),
            r.eps_buyer.to_string(),
            decimal12(r.eps_seller.value),
            format!("{:e}", r.eps_seller.error_bound),
            decimal12(r.seller_max),
        ])
        .expect("write");
    }
    finish(w)
}

/// One row per (structure, agent), preceded by a `# seed=` header line.
pub fn dominance_csv(seed: Option<u64>, entries: &[CorpusEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "agent",
        "original",
        "original_decimal",
        "split",
        "split_decimal",
        "split_eps",
        "two_sided",
        "equivalent",
        "passed",
    ])
    .expect("write");
    for e in entries {
        match &e.outcome {
            Ok(rep) => {
                for a in &rep.agents {
                    let [o, od] = pair(&a.original);
                    let [s, sd] = pair(&a.split);
                    w.write_record([
                        e.index.to_string(),
                        a.agent.to_string(),
                        o,
                        od,
                        s,
                        sd,
                        rep.split_eps.to_string(),
                        rep.two_sided.to_string(),
                        rep.equivalent.to_string(),
                        e.passed().to_string(),
                    ])
                    .expect("write");
                }
            }
            Err(msg) => {
                w.write_record([
                    e.index.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {msg}"),
                ])
                .expect("write");
            }
        }
    }
    let header = match seed {
        Some(s) => format!("# seed={s}\n"),
        None => String::new(),
    };
    header + &finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::ternary;
    use crate::engine::{best_equilibrium_payoffs, Limits};
    use crate::market::dynamic_price_path;

    #[test]
    fn profile_csv() {
        let pi = ternary(Rat::half()).unwrap();
        let sel = best_equilibrium_payoffs(&pi, 2, &Limits::default()).unwrap();
        let csv = payoff_profile_csv(&sel.profile);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "i,V_i,V_i_decimal,Vbar_i,Vbar_i_decimal,hist_value_i,hist_value_i_decimal"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("2,3/16,0.1875,"));
        assert!(lines[2].ends_with("1/16,0.0625"));
    }

    #[test]
    fn schedule_csv() {
        let s = dynamic_price_path(&ternary(Rat::half()).unwrap(), 3, &Limits::default()).unwrap();
        assert_eq!(
            price_schedule_csv(&s),
            "i,price,price_decimal\n1,0/1,0\n2,1/16,0.0625\n3,3/32,0.09375\n"
        );
    }

    #[test]
    fn exact_rendering() {
        let e = Exact::from(Rat::new(1, 24));
        assert_eq!(e.decimal, "0.0416666666667");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"exact":"1/24","decimal":"0.0416666666667"}"#);
        let back: Exact = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}

//! Run traces and their CSV form.

use std::fmt::Write as _;

use crate::game::StrategyProfile;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub exploitability: f64,
    pub kl_to_nash: Option<f64>,
    pub kl_to_stationary: Option<f64>,
    pub min_coordinate: f64,
    pub strategies: Option<StrategyProfile>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub final_exploitability: f64,
    /// Completed reference epochs per player (always 0 unless M2WU-A).
    pub epochs: [u64; 2],
    /// `min_t min_a π_i^t(a)` over the whole run, not just snapshots.
    pub min_coordinate: f64,
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<Snapshot>,
    pub summary: Summary,
}

/// Shortest round-trip representation; locale independent.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl RunTrace {
    /// Header plus one row per snapshot. Optional columns appear only when
    /// the first record carries them.
    pub fn to_csv(&self) -> String {
        let first = self.records.first();
        let has_nash = first.is_some_and(|r| r.kl_to_nash.is_some());
        let has_stat = first.is_some_and(|r| r.kl_to_stationary.is_some());
        let dims = first
            .and_then(|r| r.strategies.as_ref())
            .map(|p| (p.p1.len(), p.p2.len()));

        let mut out = String::from("t,exploitability");
        if has_nash {
            out.push_str(",kl_to_nash");
        }
        if has_stat {
            out.push_str(",kl_to_stationary");
        }
        out.push_str(",min_coordinate");
        if let Some((n, m)) = dims {
            for a in 0..n {
                write!(out, ",p1_{a}").unwrap();
            }
            for b in 0..m {
                write!(out, ",p2_{b}").unwrap();
            }
        }
        out.push('\n');

        for r in &self.records {
            write!(out, "{},{}", r.t, fmt_f64(r.exploitability)).unwrap();
            if has_nash {
                write!(out, ",{}", r.kl_to_nash.map_or(String::new(), fmt_f64)).unwrap();
            }
            if has_stat {
                write!(out, ",{}", r.kl_to_stationary.map_or(String::new(), fmt_f64)).unwrap();
            }
            write!(out, ",{}", fmt_f64(r.min_coordinate)).unwrap();
            if let Some(p) = &r.strategies {
                for x in p.p1.probs().iter().chain(p.p2.probs()) {
                    write!(out, ",{}", fmt_f64(*x)).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

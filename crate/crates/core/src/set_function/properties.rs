//! Exhaustive structural checks over every set of cardinality at most `k`.
//!
//! All checks enumerate the full domain, so they are capped at
//! [`ENUMERATION_CAP`](super::table::ENUMERATION_CAP) ground items.

use serde::Serialize;

use super::itemset::ItemSet;
use super::spec::SetFunctionSpec;
use super::table::ValueTable;
use crate::error::Result;

/// Slack for checks on exactly representable arithmetic.
pub const STRUCTURAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub ok: bool,
    /// `(A, a)` with `f(A) > f(A ∪ {a}) + tol`.
    pub witness: Option<(ItemSet, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodularCheck {
    pub ok: bool,
    /// `(A, B, a)` with `A ⊆ B`, `a ∉ B` and a larger marginal gain at `B`.
    pub witness: Option<(ItemSet, ItemSet, usize)>,
}

/// `f(A) <= f(A ∪ {a}) + tol` for every `|A| < k`, `a ∉ A`.
pub fn check_monotone(spec: &SetFunctionSpec, k: usize) -> Result<MonotoneCheck> {
    let table = ValueTable::build(spec, k)?;
    Ok(monotone_on(&table))
}

pub(crate) fn monotone_on(table: &ValueTable) -> MonotoneCheck {
    for r in 0..table.k() {
        for a_set in table.sets(r) {
            let fa = table.get(a_set);
            for a in table.complement(a_set) {
                if fa > table.get(a_set.with(a)) + STRUCTURAL_TOL {
                    return MonotoneCheck { ok: false, witness: Some((a_set, a)) };
                }
            }
        }
    }
    MonotoneCheck { ok: true, witness: None }
}

/// Diminishing returns `f(A∪{a}) - f(A) >= f(B∪{a}) - f(B) - tol` for all
/// `A ⊆ B`, `a ∉ B`, `|B ∪ {a}| <= k`.
pub fn check_submodular(spec: &SetFunctionSpec, k: usize) -> Result<SubmodularCheck> {
    let table = ValueTable::build(spec, k)?;
    Ok(submodular_on(&table))
}

pub(crate) fn submodular_on(table: &ValueTable) -> SubmodularCheck {
    let k = table.k();
    if k == 0 {
        return SubmodularCheck { ok: true, witness: None };
    }
    // For a fixed item a, low[S] holds the smallest marginal gain of a over
    // all subsets of S (and the subset attaining it). A violation is a B
    // whose own gain beats low over its proper subsets.
    let mut low: Vec<Vec<(f64, ItemSet)>> = (0..k).map(|r| vec![(0.0, ItemSet::EMPTY); table.layer_len(r)]).collect();
    for a in 0..table.n() {
        for r in 0..k {
            for b_set in table.sets(r) {
                if b_set.contains(a) {
                    continue;
                }
                let gain = table.get(b_set.with(a)) - table.get(b_set);
                let mut best = (f64::INFINITY, ItemSet::EMPTY);
                for b in b_set.iter() {
                    let sub = b_set.without(b);
                    let cand = low[r - 1][table.rank(sub)];
                    if cand.0 < best.0 {
                        best = cand;
                    }
                }
                if gain > best.0 + STRUCTURAL_TOL {
                    return SubmodularCheck { ok: false, witness: Some((best.1, b_set, a)) };
                }
                let entry = if gain <= best.0 { (gain, b_set) } else { best };
                low[r][table.rank(b_set)] = entry;
            }
        }
    }
    SubmodularCheck { ok: true, witness: None }
}

/// Total curvature `c = 1 - min (f(S∪{a}) - f(S)) / f({a})` over `|S| < k`,
/// `a ∉ S`. Pairs with `f({a}) = 0` are skipped; if every singleton is zero
/// the result is 0.
pub fn curvature(spec: &SetFunctionSpec, k: usize) -> Result<f64> {
    let table = ValueTable::build(spec, k)?;
    Ok(curvature_on(&table))
}

pub(crate) fn curvature_on(table: &ValueTable) -> f64 {
    if table.k() == 0 {
        return 0.0;
    }
    let singles: Vec<f64> = (0..table.n()).map(|a| table.get(ItemSet::singleton(a))).collect();
    let mut min_ratio: Option<f64> = None;
    for r in 0..table.k() {
        for s in table.sets(r) {
            let fs = table.get(s);
            for a in table.complement(s) {
                if singles[a] > 0.0 {
                    let ratio = (table.get(s.with(a)) - fs) / singles[a];
                    min_ratio = Some(min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
                }
            }
        }
    }
    min_ratio.map_or(0.0, |m| 1.0 - m)
}

/// Greedy approximation factor `(1 - e^{-c}) / c`, continuous at `c = 0`.
pub fn approx_ratio(c: f64) -> f64 {
    if c == 0.0 {
        1.0
    } else {
        -(-c).exp_m1() / c
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn set(items: &[usize]) -> ItemSet {
        ItemSet::from_items(items.iter().copied()).unwrap()
    }

    #[test]
    fn cover_is_monotone_and_submodular() {
        let f = SetFunctionSpec::experiment_cover();
        assert!(check_monotone(&f, 4).unwrap().ok);
        assert!(check_submodular(&f, 4).unwrap().ok);
        assert_eq!(curvature(&f, 4).unwrap(), 1.0);
    }

    #[test]
    fn harmonic_small_gap_passes() {
        let f = SetFunctionSpec::harmonic_base(6, 2, 1.0 / 32.0).unwrap();
        assert!(check_monotone(&f, 2).unwrap().ok);
        assert!(check_submodular(&f, 2).unwrap().ok);
    }

    #[test]
    fn harmonic_large_gap_fails_with_valid_witness() {
        let f = SetFunctionSpec::harmonic_base(6, 2, 1.0).unwrap();
        let check = check_submodular(&f, 2).unwrap();
        assert!(!check.ok);
        let (a_set, b_set, a) = check.witness.unwrap();
        assert!(a_set.is_subset(b_set) && !b_set.contains(a));
        let gain = |s: ItemSet| f.evaluate(s.with(a)).unwrap() - f.evaluate(s).unwrap();
        assert!(gain(b_set) > gain(a_set) + STRUCTURAL_TOL);
    }

    #[test]
    fn monotone_violation_witness() {
        let mut t = HashMap::new();
        t.insert(set(&[0]), 0.5);
        t.insert(set(&[1]), 0.3);
        t.insert(set(&[0, 1]), 0.4);
        let f = SetFunctionSpec::tabular(2, 2, t).unwrap();
        let check = check_monotone(&f, 2).unwrap();
        assert!(!check.ok);
        assert_eq!(check.witness, Some((set(&[0]), 1)));
    }

    #[test]
    fn modular_has_zero_curvature() {
        let w = [0.1, 0.2, 0.05, 0.3];
        let mut t = HashMap::new();
        for s in super::super::itemset::subsets_up_to(4, 3).filter(|s| !s.is_empty()) {
            t.insert(s, s.iter().map(|i| w[i]).sum());
        }
        let f = SetFunctionSpec::tabular(4, 3, t).unwrap();
        assert!(curvature(&f, 3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn harmonic_curvature_matches_enumeration() {
        // 1 - min ratio, enumerated by hand: 0.311475409836065573...
        let f = SetFunctionSpec::harmonic_base(6, 2, 1.0 / 32.0).unwrap();
        let c = curvature(&f, 2).unwrap();
        assert!((c - 0.311_475_409_836_065_6).abs() < 1e-12, "{c}");
    }

    #[test]
    fn approx_ratio_values() {
        assert!((approx_ratio(1.0) - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert_eq!(approx_ratio(0.0), 1.0);
        assert!((approx_ratio(0.5) - 0.786_938_680_574_733_2).abs() < 1e-12);
        assert!((approx_ratio(1e-300) - 1.0).abs() < 1e-15);
    }
}

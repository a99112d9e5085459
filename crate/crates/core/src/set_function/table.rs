use super::itemset::{subsets_of_size, ItemSet};
use super::spec::SetFunctionSpec;
use crate::error::{Error, Result};

/// Ceiling on the ground set for every exhaustive routine.
pub const ENUMERATION_CAP: usize = 24;

/// Pascal triangle up to 64 choose 64.
pub(crate) struct Binomials(Vec<[u64; 65]>);

impl Binomials {
    pub(crate) fn new() -> Self {
        let mut rows = vec![[0u64; 65]; 65];
        for n in 0..65 {
            rows[n][0] = 1;
            for r in 1..=n {
                rows[n][r] = rows[n - 1][r - 1].saturating_add(rows[n - 1][r]);
            }
        }
        Binomials(rows)
    }

    pub(crate) fn get(&self, n: usize, r: usize) -> u64 {
        if r > n {
            0
        } else {
            self.0[n][r]
        }
    }

    /// Position of `set` among the `|set|`-subsets in colex order.
    pub(crate) fn rank(&self, set: ItemSet) -> usize {
        set.iter()
            .enumerate()
            .map(|(j, c)| self.get(c, j + 1) as usize)
            .sum()
    }
}

/// Every value `f(S)` for `|S| <= k`, stored per cardinality in colex order.
pub(crate) struct ValueTable {
    n: usize,
    k: usize,
    layers: Vec<Vec<f64>>,
    binom: Binomials,
}

impl ValueTable {
    pub(crate) fn build(spec: &SetFunctionSpec, k: usize) -> Result<Self> {
        let n = spec.n();
        if n > ENUMERATION_CAP {
            return Err(Error::GroundSetTooLarge { n, max: ENUMERATION_CAP });
        }
        let k = k.min(n);
        let max = spec.max_cardinality();
        if k > max {
            return Err(Error::CardinalityExceeded {
                set: ItemSet::prefix(k),
                size: k,
                max,
            });
        }
        let mut layers = Vec::with_capacity(k + 1);
        for r in 0..=k {
            let layer = subsets_of_size(n, r)
                .map(|s| spec.evaluate(s))
                .collect::<Result<Vec<_>>>()?;
            layers.push(layer);
        }
        Ok(ValueTable { n, k, layers, binom: Binomials::new() })
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn get(&self, set: ItemSet) -> f64 {
        self.layers[set.len()][self.binom.rank(set)]
    }

    pub(crate) fn layer_len(&self, r: usize) -> usize {
        self.layers[r].len()
    }

    pub(crate) fn rank(&self, set: ItemSet) -> usize {
        self.binom.rank(set)
    }

    /// Sets of cardinality `r`, in the same order as their ranks.
    pub(crate) fn sets(&self, r: usize) -> impl Iterator<Item = ItemSet> {
        subsets_of_size(self.n, r)
    }

    /// Sets of cardinality at most `k`, smallest first.
    pub(crate) fn all_sets(&self) -> impl Iterator<Item = ItemSet> + '_ {
        (0..=self.k).flat_map(move |r| self.sets(r))
    }

    pub(crate) fn complement(&self, set: ItemSet) -> impl Iterator<Item = usize> {
        let n = self.n;
        (0..n).filter(move |&a| !set.contains(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_follow_enumeration_order() {
        let b = Binomials::new();
        for n in 1..9 {
            for r in 0..=n {
                for (i, s) in subsets_of_size(n, r).enumerate() {
                    assert_eq!(b.rank(s), i);
                }
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let spec = SetFunctionSpec::harmonic_base(25, 2, 0.001).unwrap();
        assert!(matches!(
            ValueTable::build(&spec, 2),
            Err(Error::GroundSetTooLarge { n: 25, max: 24 })
        ));
    }
}

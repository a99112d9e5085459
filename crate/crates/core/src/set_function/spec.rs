use std::collections::HashMap;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::itemset::{subsets_up_to, ItemSet, MAX_ITEMS};
use crate::error::{Error, Result};

/// Penalty used by the unique-greedy-path function when none is given.
pub const DEFAULT_PATH_PENALTY: f64 = 0.01;

/// A noiseless monotone submodular reward function over `[0, n)`.
///
/// Serialized as a JSON object with a `"kind"` discriminator
/// (`tabular`, `weighted_cover`, `unique_greedy_path`, `harmonic`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetFunctionSpec {
    Tabular(Tabular),
    WeightedCover(WeightedCover),
    UniqueGreedyPath(UniqueGreedyPath),
    Harmonic(HarmonicInstance),
}

impl SetFunctionSpec {
    /// Ground set size.
    pub fn n(&self) -> usize {
        match self {
            SetFunctionSpec::Tabular(t) => t.n,
            SetFunctionSpec::WeightedCover(c) => c.n,
            SetFunctionSpec::UniqueGreedyPath(p) => p.n,
            SetFunctionSpec::Harmonic(h) => h.n,
        }
    }

    /// Largest cardinality on which the function is defined.
    pub fn max_cardinality(&self) -> usize {
        match self {
            SetFunctionSpec::Tabular(t) => t.k_max,
            SetFunctionSpec::WeightedCover(c) => c.n,
            SetFunctionSpec::UniqueGreedyPath(p) => p.k,
            SetFunctionSpec::Harmonic(h) => h.k,
        }
    }

    /// Exact value of `f(set)`.
    pub fn evaluate(&self, set: ItemSet) -> Result<f64> {
        let n = self.n();
        if let Some(top) = set.max_item() {
            if top >= n {
                return Err(Error::OutOfRange { item: top, n });
            }
        }
        let max = self.max_cardinality();
        if set.len() > max {
            return Err(Error::CardinalityExceeded { set, size: set.len(), max });
        }
        Ok(match self {
            SetFunctionSpec::Tabular(t) => t.value(set),
            SetFunctionSpec::WeightedCover(c) => c.value(set),
            SetFunctionSpec::UniqueGreedyPath(p) => p.value(set),
            SetFunctionSpec::Harmonic(h) => h.value(set),
        })
    }

    /// The weighted cover used in the desk-scale experiments: 15 items in
    /// blocks of sizes 5, 5, 4, 1 with weights 0.1, 0.1, 0.2, 0.6.
    pub fn experiment_cover() -> Self {
        let blocks = vec![
            (0..5).collect(),
            (5..10).collect(),
            (10..14).collect(),
            vec![14],
        ];
        SetFunctionSpec::WeightedCover(
            WeightedCover::new(15, blocks, vec![0.1, 0.1, 0.2, 0.6]).expect("valid cover"),
        )
    }

    pub fn weighted_cover(n: usize, blocks: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        WeightedCover::new(n, blocks, weights).map(SetFunctionSpec::WeightedCover)
    }

    pub fn unique_greedy_path(n: usize, k: usize, delta: f64) -> Result<Self> {
        UniqueGreedyPath::new(n, k, delta).map(SetFunctionSpec::UniqueGreedyPath)
    }

    pub fn harmonic_base(n: usize, k: usize, delta: f64) -> Result<Self> {
        HarmonicInstance::new(n, k, delta, HarmonicVariant::Base).map(SetFunctionSpec::Harmonic)
    }

    pub fn harmonic_elevated(
        n: usize,
        k: usize,
        delta: f64,
        prefix_len: usize,
        tail: Vec<usize>,
    ) -> Result<Self> {
        HarmonicInstance::new(n, k, delta, HarmonicVariant::Elevated { prefix_len, tail })
            .map(SetFunctionSpec::Harmonic)
    }

    pub fn tabular(n: usize, k_max: usize, table: HashMap<ItemSet, f64>) -> Result<Self> {
        Tabular::new(n, k_max, table).map(SetFunctionSpec::Tabular)
    }
}

/// Tabulates every non-empty set of cardinality at most `k` into a
/// [`Tabular`] copy of `spec`.
pub fn tabulate(spec: &SetFunctionSpec, k: usize) -> Result<SetFunctionSpec> {
    let n = spec.n();
    let mut table = HashMap::new();
    for set in subsets_up_to(n, k).filter(|s| !s.is_empty()) {
        table.insert(set, spec.evaluate(set)?);
    }
    SetFunctionSpec::tabular(n, k.min(n), table)
}

fn check_ground(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ITEMS {
        return Err(Error::InvalidSpec(format!(
            "ground set size {n} must lie in [1, {MAX_ITEMS}]"
        )));
    }
    Ok(())
}

/// Explicit value table. The empty set may be omitted, in which case it is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabular {
    n: usize,
    k_max: usize,
    table: HashMap<ItemSet, f64>,
}

impl Tabular {
    pub fn new(n: usize, k_max: usize, table: HashMap<ItemSet, f64>) -> Result<Self> {
        check_ground(n)?;
        if k_max > n {
            return Err(Error::InvalidSpec(format!("k_max {k_max} exceeds n {n}")));
        }
        for (&set, &v) in &table {
            if set.max_item().is_some_and(|m| m >= n) || set.len() > k_max {
                return Err(Error::InvalidSpec(format!(
                    "table key {{{set}}} is outside the domain n={n}, k_max={k_max}"
                )));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidSpec(format!(
                    "value {v} of {{{set}}} is outside [0, 1]"
                )));
            }
        }
        if let Some(&v) = table.get(&ItemSet::EMPTY) {
            if v != 0.0 {
                return Err(Error::InvalidSpec(format!("value of the empty set is {v}, not 0")));
            }
        }
        if let Some(missing) = subsets_up_to(n, k_max).find(|s| !s.is_empty() && !table.contains_key(s))
        {
            return Err(Error::InvalidSpec(format!("table is missing {{{missing}}}")));
        }
        Ok(Tabular { n, k_max, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn value(&self, set: ItemSet) -> f64 {
        self.table.get(&set).copied().unwrap_or(0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct TabularRepr {
    n: usize,
    k_max: usize,
    #[serde(serialize_with = "write_table", deserialize_with = "read_table")]
    table: HashMap<ItemSet, f64>,
}

fn write_table<S: Serializer>(table: &HashMap<ItemSet, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut entries: Vec<_> = table.iter().collect();
    entries.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(b.0)));
    let mut map = s.serialize_map(Some(entries.len()))?;
    for (set, v) in entries {
        map.serialize_entry(&set.to_string(), v)?;
    }
    map.end()
}

fn read_table<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<HashMap<ItemSet, f64>, D::Error> {
    let raw = HashMap::<String, f64>::deserialize(d)?;
    let mut table = HashMap::with_capacity(raw.len());
    for (key, v) in raw {
        let set: ItemSet = key.parse().map_err(D::Error::custom)?;
        if set.to_string() != key.trim() {
            return Err(D::Error::custom(format!(
                "table key {key:?} must list items in increasing order"
            )));
        }
        table.insert(set, v);
    }
    Ok(table)
}

impl Serialize for Tabular {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TabularRepr { n: self.n, k_max: self.k_max, table: self.table.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tabular {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TabularRepr::deserialize(d)?;
        Tabular::new(r.n, r.k_max, r.table).map_err(D::Error::custom)
    }
}

/// `f(S) = Σ w(C)` over the blocks `C` of a partition that meet `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightedCoverRepr", into = "WeightedCoverRepr")]
pub struct WeightedCover {
    n: usize,
    blocks: Vec<Vec<usize>>,
    weights: Vec<f64>,
    masks: Vec<ItemSet>,
}

#[derive(Serialize, Deserialize)]
struct WeightedCoverRepr {
    n: usize,
    blocks: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl TryFrom<WeightedCoverRepr> for WeightedCover {
    type Error = Error;

    fn try_from(r: WeightedCoverRepr) -> Result<Self> {
        WeightedCover::new(r.n, r.blocks, r.weights)
    }
}

impl From<WeightedCover> for WeightedCoverRepr {
    fn from(c: WeightedCover) -> Self {
        WeightedCoverRepr { n: c.n, blocks: c.blocks, weights: c.weights }
    }
}

impl WeightedCover {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        check_ground(n)?;
        if blocks.len() != weights.len() {
            return Err(Error::InvalidSpec(format!(
                "{} blocks but {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        let mut seen = ItemSet::EMPTY;
        let mut masks = Vec::with_capacity(blocks.len());
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidSpec("empty block".into()));
            }
            let mut mask = ItemSet::EMPTY;
            for &item in block {
                if item >= n {
                    return Err(Error::InvalidSpec(format!("block item {item} >= n = {n}")));
                }
                if seen.contains(item) {
                    return Err(Error::InvalidSpec(format!("item {item} appears in two blocks")));
                }
                seen = seen.with(item);
                mask = mask.with(item);
            }
            masks.push(mask);
        }
        if seen != ItemSet::prefix(n) {
            return Err(Error::InvalidSpec("blocks do not cover the ground set".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidSpec("block weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidSpec(format!("block weights sum to {total} > 1")));
        }
        Ok(WeightedCover { n, blocks, weights, masks })
    }

    fn value(&self, set: ItemSet) -> f64 {
        self.masks
            .iter()
            .zip(&self.weights)
            .filter(|(m, _)| m.bits() & set.bits() != 0)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Partial harmonic sums `Σ_{i=1}^{s} 1/(k+i)` for `s = 0..=k`.
fn harmonic_increments(k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..=k {
        acc += 1.0 / (k + i) as f64;
        out.push(acc);
    }
    out
}

/// Prefix sets `{0, .., s-1}` score the harmonic increment sum; every other
/// set scores that sum minus a flat penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UniqueGreedyPathRepr", into = "UniqueGreedyPathRepr")]
pub struct UniqueGreedyPath {
    n: usize,
    k: usize,
    delta: f64,
    sums: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct UniqueGreedyPathRepr {
    n: usize,
    k: usize,
    #[serde(default = "default_penalty")]
    delta: f64,
}

fn default_penalty() -> f64 {
    DEFAULT_PATH_PENALTY
}

impl TryFrom<UniqueGreedyPathRepr> for UniqueGreedyPath {
    type Error = Error;

    fn try_from(r: UniqueGreedyPathRepr) -> Result<Self> {
        UniqueGreedyPath::new(r.n, r.k, r.delta)
    }
}

impl From<UniqueGreedyPath> for UniqueGreedyPathRepr {
    fn from(p: UniqueGreedyPath) -> Self {
        UniqueGreedyPathRepr { n: p.n, k: p.k, delta: p.delta }
    }
}

impl UniqueGreedyPath {
    pub fn new(n: usize, k: usize, delta: f64) -> Result<Self> {
        check_ground(n)?;
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        let sums = harmonic_increments(k);
        if !(delta > 0.0 && delta <= sums[1]) {
            return Err(Error::InvalidSpec(format!(
                "penalty {delta} must lie in (0, 1/(k+1)] to keep values non-negative"
            )));
        }
        Ok(UniqueGreedyPath { n, k, delta, sums })
    }

    fn value(&self, set: ItemSet) -> f64 {
        let base = self.sums[set.len()];
        if set.is_prefix() {
            base
        } else {
            base - self.delta
        }
    }
}

/// Which member of the hard-instance family to build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicVariant {
    /// The reference instance: the prefix chain `{0}, {0,1}, ..` is the
    /// unique greedy path and `{0, .., k-1}` is optimal.
    Base,
    /// Keeps the first `prefix_len` items of the reference chain, then
    /// continues along `tail` (items drawn from `[k, n)`), lifting that chain
    /// by `delta/k` below size `k` and by `delta` at size `k`.
    Elevated { prefix_len: usize, tail: Vec<usize> },
}

/// Harmonic-increment hard instance with gap `delta`.
///
/// Values stay in `[0, 1]` only for small gaps (`delta <= 1/(8k^2)` is the
/// regime where the family is also submodular); larger gaps are accepted so
/// that the checkers can be exercised on violating instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HarmonicRepr", into = "HarmonicRepr")]
pub struct HarmonicInstance {
    n: usize,
    k: usize,
    delta: f64,
    variant: HarmonicVariant,
    sums: Vec<f64>,
    // elevated[j] is the elevated chain set of size prefix_len + 1 + j
    elevated: Vec<ItemSet>,
    prefix_len: usize,
}

#[derive(Serialize, Deserialize)]
struct HarmonicRepr {
    n: usize,
    k: usize,
    delta: f64,
    variant: HarmonicVariant,
}

impl TryFrom<HarmonicRepr> for HarmonicInstance {
    type Error = Error;

    fn try_from(r: HarmonicRepr) -> Result<Self> {
        HarmonicInstance::new(r.n, r.k, r.delta, r.variant)
    }
}

impl From<HarmonicInstance> for HarmonicRepr {
    fn from(h: HarmonicInstance) -> Self {
        HarmonicRepr { n: h.n, k: h.k, delta: h.delta, variant: h.variant }
    }
}

impl HarmonicInstance {
    pub fn new(n: usize, k: usize, delta: f64, variant: HarmonicVariant) -> Result<Self> {
        check_ground(n)?;
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidSpec(format!("gap must be positive, got {delta}")));
        }
        let sums = harmonic_increments(k);
        let mut elevated = Vec::new();
        let mut prefix_len = k;
        if let HarmonicVariant::Elevated { prefix_len: i, tail } = &variant {
            if *i > k || tail.len() != k - i {
                return Err(Error::InvalidSpec(format!(
                    "elevated variant needs prefix_len <= k and k - prefix_len = {} tail items, got {}",
                    k.saturating_sub(*i),
                    tail.len()
                )));
            }
            let mut cur = ItemSet::prefix(*i);
            for &x in tail {
                if x < k || x >= n {
                    return Err(Error::InvalidSpec(format!("tail item {x} must lie in [{k}, {n})")));
                }
                if cur.contains(x) {
                    return Err(Error::InvalidSpec(format!("tail item {x} repeated")));
                }
                cur = cur.with(x);
                elevated.push(cur);
            }
            prefix_len = *i;
        }
        Ok(HarmonicInstance { n, k, delta, variant, sums, elevated, prefix_len })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn variant(&self) -> &HarmonicVariant {
        &self.variant
    }

    /// The elevated chain sets, smallest first (empty for `Base`).
    pub fn elevated_chain(&self) -> &[ItemSet] {
        &self.elevated
    }

    fn value(&self, set: ItemSet) -> f64 {
        let s = set.len();
        let base = self.sums[s];
        if s > self.prefix_len && self.elevated.get(s - self.prefix_len - 1) == Some(&set) {
            return if s == self.k {
                base + self.delta
            } else {
                base + self.delta / self.k as f64
            };
        }
        if set.is_prefix() {
            base
        } else if s == self.k {
            base - self.delta
        } else {
            base - self.delta / self.k as f64
        }
    }
}

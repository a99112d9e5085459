use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Largest ground set an [`ItemSet`] can address.
pub const MAX_ITEMS: usize = 64;

/// A subset of the ground set `[0, n)`, stored as a bit set.
///
/// Equality and hashing follow the member set. The `Ord` impl is the
/// lexicographic order of the sorted member lists, so `{0} < {0,1} < {0,2} < {1}`;
/// every tie-break in the crate ("lowest index first", "lexicographic arm
/// order") goes through it.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(item: usize) -> Self {
        debug_assert!(item < MAX_ITEMS);
        ItemSet(1u64 << item)
    }

    /// `{0, 1, ..., len - 1}`.
    pub fn prefix(len: usize) -> Self {
        debug_assert!(len <= MAX_ITEMS);
        if len == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << len) - 1)
        }
    }

    /// Builds a set from item indices. Duplicates collapse; indices at or
    /// above [`MAX_ITEMS`] are rejected.
    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Result<Self, Error> {
        let mut bits = 0u64;
        for item in items {
            if item >= MAX_ITEMS {
                return Err(Error::OutOfRange { item, n: MAX_ITEMS });
            }
            bits |= 1u64 << item;
        }
        Ok(ItemSet(bits))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1u64 << item) != 0
    }

    pub fn with(self, item: usize) -> Self {
        ItemSet(self.0 | (1u64 << item))
    }

    pub fn without(self, item: usize) -> Self {
        ItemSet(self.0 & !(1u64 << item))
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest member, if any.
    pub fn max_item(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }

    /// Members in increasing order.
    pub fn iter(self) -> Items {
        Items(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// True iff this is `{0, ..., len - 1}`.
    pub fn is_prefix(self) -> bool {
        self.0 & self.0.wrapping_add(1) == 0
    }
}

pub struct Items(u64);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Items;

    fn into_iter(self) -> Items {
        self.iter()
    }
}

impl Ord for ItemSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // Both sorted lists agree below the lowest differing item x. The set
        // holding x is larger only when the other one has run out of members.
        let x = diff.trailing_zeros();
        let above = if x == 63 { 0 } else { u64::MAX << (x + 1) };
        let self_holds = self.0 & (1u64 << x) != 0;
        let rest = if self_holds { other.0 } else { self.0 };
        let holder_smaller = rest & above != 0;
        if self_holds == holder_smaller {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for ItemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Renders as sorted comma-joined indices (`"0,3,5"`); the empty set is `""`.
impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for ItemSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(ItemSet::EMPTY);
        }
        let mut items = Vec::new();
        for part in s.split(',') {
            let item: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad item {part:?} in set {s:?}")))?;
            items.push(item);
        }
        let set = ItemSet::from_items(items.iter().copied())?;
        if set.len() != items.len() {
            return Err(Error::Parse(format!("duplicate item in set {s:?}")));
        }
        Ok(set)
    }
}

impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        ItemSet::from_items(items).map_err(serde::de::Error::custom)
    }
}

/// `C(n, r)` as a float; exact for every value below 2^53.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0f64;
    for i in 0..r {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Iterates all `r`-subsets of `[0, n)` in increasing bit-pattern order
/// (Gosper's hack), which is colexicographic order.
pub fn subsets_of_size(n: usize, r: usize) -> SubsetsOfSize {
    let next = if r > n {
        None
    } else {
        Some(ItemSet::prefix(r).bits())
    };
    SubsetsOfSize { n, next }
}

pub struct SubsetsOfSize {
    n: usize,
    next: Option<u64>,
}

impl Iterator for SubsetsOfSize {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            let nxt = (((r ^ cur) >> 2) / c) | r;
            if r == 0 || (self.n < 64 && nxt >> self.n != 0) {
                None
            } else {
                Some(nxt)
            }
        };
        Some(ItemSet(cur))
    }
}

/// All subsets of `[0, n)` with at most `k` members, smallest cardinality first.
pub fn subsets_up_to(n: usize, k: usize) -> impl Iterator<Item = ItemSet> {
    (0..=k.min(n)).flat_map(move |r| subsets_of_size(n, r))
}

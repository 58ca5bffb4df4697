//! Small value-level helpers shared by the contracts: multisets, element
//! sets and duplicate detection over sequences.

use std::collections::{BTreeMap, BTreeSet};

pub type Multiset<T> = BTreeMap<T, usize>;

pub fn multiset<T: Ord + Clone>(s: &[T]) -> Multiset<T> {
    let mut m = BTreeMap::new();
    for x in s {
        *m.entry(x.clone()).or_insert(0) += 1;
    }
    m
}

/// `a + {x}` on multisets.
pub fn multiset_add<T: Ord + Clone>(a: &Multiset<T>, x: &T) -> Multiset<T> {
    let mut m = a.clone();
    *m.entry(x.clone()).or_insert(0) += 1;
    m
}

/// `a - {x}` on multisets; removing an absent element is a no-op.
pub fn multiset_remove<T: Ord + Clone>(a: &Multiset<T>, x: &T) -> Multiset<T> {
    let mut m = a.clone();
    if let Some(n) = m.get_mut(x) {
        *n -= 1;
        if *n == 0 {
            m.remove(x);
        }
    }
    m
}

pub fn as_set<T: Ord + Clone>(s: &[T]) -> BTreeSet<T> {
    s.iter().cloned().collect()
}

pub fn has_duplicates<T: PartialEq>(s: &[T]) -> bool {
    (0..s.len()).any(|i| (i + 1..s.len()).any(|j| s[i] == s[j]))
}

/// Splits a nonempty sequence into its head and tail.
pub fn head_tail<T>(s: &[T]) -> Option<(&T, &[T])> {
    s.split_first()
}

/// Strictly increasing.
pub fn is_strictly_sorted<T: Ord>(s: &[T]) -> bool {
    s.windows(2).all(|w| w[0] < w[1])
}

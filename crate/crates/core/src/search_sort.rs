//! Binary search over sorted integer sequences and in-place insertion sort.

use crate::contract::{snapshot_if, ContractContext, ContractViolation};
use crate::seq::multiset;

pub type Key = i64;

/// Outcome of [`binary_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(usize),
    NotFound,
}

impl SearchResult {
    /// The `-1` sentinel encoding used on the command line.
    pub fn as_sentinel(self) -> i64 {
        match self {
            SearchResult::Found(i) => i as i64,
            SearchResult::NotFound => -1,
        }
    }
}

/// Nondecreasing, checked over every pair of positions.
pub fn is_sorted(s: &[Key]) -> bool {
    (0..s.len()).all(|i| (i + 1..s.len()).all(|j| s[i] <= s[j]))
}

pub fn binary_search(ctx: &mut ContractContext, s: &[Key], x: Key) -> Result<SearchResult, ContractViolation> {
    ctx.operation("binary_search", |ctx| {
        ctx.check_pre("isSorted", || is_sorted(s))?;
        let (mut low, mut high) = (0usize, s.len());
        let mut result = SearchResult::NotFound;
        while low < high {
            ctx.check_invariant("0<=low<=high<=len", || low <= high && high <= s.len())?;
            ctx.check_invariant("x !in a[..low] && x !in a[high..]", || {
                !s[..low].contains(&x) && !s[high..].contains(&x)
            })?;
            let mid = low + (high - low) / 2;
            match s[mid].cmp(&x) {
                std::cmp::Ordering::Less => low = mid + 1,
                std::cmp::Ordering::Greater => high = mid,
                std::cmp::Ordering::Equal => {
                    result = SearchResult::Found(mid);
                    break;
                }
            }
        }
        match result {
            SearchResult::Found(i) => ctx.check_post("found ==> a[i]==x", || s[i] == x)?,
            SearchResult::NotFound => ctx.check_post("notFound ==> x !in a", || !s.contains(&x))?,
        }
        Ok(result)
    })
}

pub fn insertion_sort(ctx: &mut ContractContext, a: &mut [Key]) -> Result<(), ContractViolation> {
    ctx.operation("insertion_sort", |ctx| {
        let old = snapshot_if(ctx, || multiset(a));
        for i in 0..a.len() {
            ctx.check_invariant("isSorted(a[..i])", || is_sorted(&a[..i]))?;
            let mut j = i;
            while j > 0 && a[j - 1] > a[j] {
                ctx.check_invariant("sorted except at j", || sorted_except_at(a, i, j))?;
                a.swap(j - 1, j);
                j -= 1;
            }
            ctx.check_invariant("multiset preserved", || Some(&multiset(a)) == old.as_deref())?;
        }
        ctx.check_post("isSorted", || is_sorted(a))?;
        ctx.check_post("multiset(a)==multiset(old(a))", || Some(&multiset(a)) == old.as_deref())?;
        Ok(())
    })
}

/// Inner-loop invariant: `a[l] <= a[r]` for all `0 <= l < r <= i` with `r != j`.
fn sorted_except_at(a: &[Key], i: usize, j: usize) -> bool {
    (0..=i).all(|r| r == j || (0..r).all(|l| a[l] <= a[r]))
}

//! Hash set with open addressing, linear probing and tombstones.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::contract::{snapshot_if, ContractContext, ContractViolation, Fault};

pub const HASH_INITIAL_CAPACITY: usize = 101;

/// User-supplied hash function. The home slot of `x` is `hash(x) % len`.
pub type HashFn<T> = Arc<dyn Fn(&T) -> u64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell<T> {
    Nil,
    Deleted,
    Some(T),
}

impl<T> Cell<T> {
    fn holds(&self, x: &T) -> bool
    where
        T: PartialEq,
    {
        matches!(self, Cell::Some(v) if v == x)
    }
}

#[derive(Clone)]
pub struct OpenHashSet<T> {
    table: Vec<Cell<T>>,
    used: usize,
    deleted: usize,
    hash: HashFn<T>,
}

impl<T: fmt::Debug> fmt::Debug for OpenHashSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpenHashSet")
            .field("table", &self.table)
            .field("used", &self.used)
            .field("deleted", &self.deleted)
            .finish_non_exhaustive()
    }
}

impl<T: Clone + Eq + Hash> OpenHashSet<T> {
    pub fn new(hash: impl Fn(&T) -> u64 + Send + Sync + 'static) -> Self {
        Self::with_capacity(hash, HASH_INITIAL_CAPACITY)
    }

    pub fn with_capacity(hash: impl Fn(&T) -> u64 + Send + Sync + 'static, capacity: usize) -> Self {
        assert!(capacity > 0, "hash table needs at least one slot");
        OpenHashSet {
            table: vec![Cell::Nil; capacity],
            used: 0,
            deleted: 0,
            hash: Arc::new(hash),
        }
    }

    pub fn len(&self) -> usize {
        self.used
    }

    pub fn is_empty(&self) -> bool {
        self.used == 0
    }

    pub fn capacity(&self) -> usize {
        self.table.len()
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn deleted(&self) -> usize {
        self.deleted
    }

    pub fn table(&self) -> &[Cell<T>] {
        &self.table
    }

    pub fn home(&self, x: &T) -> usize {
        ((self.hash)(x) % self.table.len() as u64) as usize
    }

    /// The stored values, in slot order.
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.table.iter().filter_map(|c| match c {
            Cell::Some(v) => Some(v),
            _ => None,
        })
    }

    pub fn elems(&self) -> HashSet<T> {
        self.values().cloned().collect()
    }

    pub fn nil_count(&self) -> usize {
        self.table.iter().filter(|c| matches!(c, Cell::Nil)).count()
    }

    fn deleted_count(&self) -> usize {
        self.table.iter().filter(|c| matches!(c, Cell::Deleted)).count()
    }

    /// No `Nil` cell is left, so a probe for an absent value may find no slot.
    pub fn is_full(&self) -> bool {
        self.used + self.deleted == self.table.len()
    }

    /// `used + deleted + |Nil cells| == table length`.
    pub fn counting_identity(&self) -> bool {
        self.used + self.deleted + self.nil_count() == self.table.len()
    }

    /// `x` sits at, or may be placed at, position `i`: every cell on the
    /// probe path from its home slot up to `i` is occupied by something
    /// other than `x`, wrapping past the end of the table.
    pub fn valid_pos(&self, x: &T, i: usize) -> bool {
        let t = &self.table;
        let h = self.home(x);
        let clear = |j: usize| !matches!(t[j], Cell::Nil) && !t[j].holds(x);
        h == i || (h < i && (h..i).all(clear)) || (h > i && (h..t.len()).chain(0..i).all(clear))
    }

    pub fn hash_table_inv(&self) -> bool {
        self.table.iter().enumerate().all(|(i, c)| match c {
            Cell::Some(v) => self.valid_pos(v, i),
            _ => true,
        })
    }

    /// Class invariant.
    pub fn is_valid(&self) -> bool {
        let mut seen = HashSet::new();
        !self.table.is_empty()
            && self.hash_table_inv()
            && self.values().all(|v| seen.insert(v))
            && self.used == seen.len()
            && self.deleted == self.deleted_count()
    }

    // Two passes: home..end, then 0..home. Returns the slot holding x, else
    // the first tombstone on the probe path, else the Nil that ends it; None
    // when the table has neither.
    fn locate_raw(&self, x: &T) -> Option<usize> {
        let h = self.home(x);
        let mut reuse = None;
        for i in (h..self.table.len()).chain(0..h) {
            match &self.table[i] {
                Cell::Nil => return Some(reuse.unwrap_or(i)),
                Cell::Some(v) if v == x => return Some(i),
                Cell::Deleted if reuse.is_none() => reuse = Some(i),
                _ => {}
            }
        }
        reuse
    }

    fn locate(&self, ctx: &mut ContractContext, x: &T) -> Result<Option<usize>, ContractViolation> {
        ctx.operation("hs_locate", |ctx| {
            let pos = self.locate_raw(x);
            let present = self.values().any(|v| v == x);
            if present {
                ctx.check_post("x in elems ==> t[pos]==Some(x)", || {
                    pos.is_some_and(|p| self.table[p].holds(x))
                })?;
            } else {
                ctx.check_post("x !in elems ==> free validPos or full", || match pos {
                    None => self.is_full(),
                    Some(p) => !matches!(self.table[p], Cell::Some(_)) && self.valid_pos(x, p),
                })?;
            }
            Ok(pos)
        })
    }

    pub fn contains(&self, ctx: &mut ContractContext, x: &T) -> Result<bool, ContractViolation> {
        ctx.operation("hs_contains", |ctx| {
            ctx.check_pre("Valid", || self.is_valid())?;
            let res = self.locate(ctx, x)?.is_some_and(|p| self.table[p].holds(x));
            ctx.check_post("res<==>x in elems", || res == self.values().any(|v| v == x))?;
            Ok(res)
        })
    }

    pub fn insert(&mut self, ctx: &mut ContractContext, x: T) -> Result<(), ContractViolation> {
        ctx.operation("hs_insert", |ctx| {
            let absent = !self.locate_raw(&x).is_some_and(|p| self.table[p].holds(&x));
            ctx.require("x !in elems", absent)?;
            let old = snapshot_if(ctx, || self.elems());
            if self.is_full() {
                self.rehash(ctx)?;
            }
            ctx.check_assert("!full", || !self.is_full())?;
            self.insert_aux(ctx, x.clone())?;
            ctx.check_post("Valid", || self.is_valid())?;
            ctx.check_post("elems==old(elems)+{x}", || {
                old.as_ref().is_some_and(|o| {
                    let mut expected = o.get().clone();
                    expected.insert(x.clone());
                    self.elems() == expected
                })
            })?;
            Ok(())
        })
    }

    fn insert_aux(&mut self, ctx: &mut ContractContext, x: T) -> Result<(), ContractViolation> {
        let i = self
            .locate(ctx, &x)?
            .expect("a table that is not full always has a free slot");
        if matches!(self.table[i], Cell::Deleted) {
            self.deleted -= 1;
        }
        self.table[i] = Cell::Some(x);
        self.used += 1;
        Ok(())
    }

    fn rehash(&mut self, ctx: &mut ContractContext) -> Result<(), ContractViolation> {
        ctx.operation("hs_rehash", |ctx| {
            let old_elems = snapshot_if(ctx, || self.elems());
            let new_len = self.table.len() * 2 + 1;
            let old_table = std::mem::replace(&mut self.table, vec![Cell::Nil; new_len]);
            self.used = 0;
            self.deleted = 0;
            for cell in old_table {
                if let Cell::Some(v) = cell {
                    self.insert_aux(ctx, v)?;
                }
            }
            ctx.check_post("!full", || !self.is_full())?;
            ctx.check_post("elems==old(elems)", || old_elems.as_deref() == Some(&self.elems()))?;
            Ok(())
        })
    }

    pub fn delete(&mut self, ctx: &mut ContractContext, x: &T) -> Result<(), ContractViolation> {
        ctx.operation("hs_delete", |ctx| {
            let pos = self.locate_raw(x).filter(|&p| self.table[p].holds(x));
            ctx.require("x in elems", pos.is_some())?;
            let i = pos.expect("checked above");
            let old = snapshot_if(ctx, || self.elems());
            self.table[i] = if ctx.fault_active(Fault::TombstoneAsNil) {
                Cell::Nil
            } else {
                Cell::Deleted
            };
            self.deleted += 1;
            self.used -= 1;
            ctx.check_post("Valid", || self.is_valid())?;
            ctx.check_post("elems==old(elems)-{x}", || {
                old.as_ref().is_some_and(|o| {
                    let mut expected = o.get().clone();
                    expected.remove(x);
                    self.elems() == expected
                })
            })?;
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{ClauseKind, ContractMode};

    fn ctx() -> ContractContext {
        ContractContext::new(ContractMode::Assert)
    }

    fn by_length() -> OpenHashSet<String> {
        OpenHashSet::new(|s: &String| s.chars().count() as u64)
    }

    #[test]
    fn hello_world_trace() {
        let mut c = ctx();
        let mut h = by_length();
        assert!(h.elems().is_empty());
        h.insert(&mut c, "Hello".into()).unwrap();
        assert_eq!(h.elems(), HashSet::from(["Hello".to_string()]));
        h.insert(&mut c, "World".into()).unwrap();
        assert_eq!(h.home(&"Hello".into()), 5);
        assert_eq!(h.table()[5], Cell::Some("Hello".to_string()));
        assert_eq!(h.table()[6], Cell::Some("World".to_string()));
        assert!(h.contains(&mut c, &"Hello".into()).unwrap());
        assert!(!h.contains(&mut c, &"ANSI".into()).unwrap());
        h.delete(&mut c, &"Hello".into()).unwrap();
        assert_eq!(h.elems(), HashSet::from(["World".to_string()]));
        assert!(!h.contains(&mut c, &"Hello".into()).unwrap());
        // The tombstone keeps "World" reachable from its home slot.
        assert_eq!(h.table()[5], Cell::Deleted);
        assert!(h.contains(&mut c, &"World".into()).unwrap());
    }

    #[test]
    fn empty_set_contains_nothing() {
        assert!(!by_length().contains(&mut ctx(), &"x".into()).unwrap());
    }

    #[test]
    fn rehash_on_full_table() {
        let mut c = ctx();
        let mut h = OpenHashSet::with_capacity(|x: &i64| *x as u64, 3);
        for x in [0, 1, 2] {
            h.insert(&mut c, x).unwrap();
        }
        assert!(h.is_full());
        assert_eq!(h.nil_count(), 0);
        h.insert(&mut c, 3).unwrap();
        assert_eq!(h.capacity(), 7);
        assert_eq!(h.deleted(), 0);
        assert_eq!(h.elems(), HashSet::from([0, 1, 2, 3]));
        assert!(h.counting_identity());
    }

    #[test]
    fn rehash_drops_tombstones() {
        let mut c = ctx();
        let mut h = OpenHashSet::with_capacity(|x: &i64| *x as u64, 3);
        for x in [0, 1, 2] {
            h.insert(&mut c, x).unwrap();
        }
        h.delete(&mut c, &1).unwrap();
        // A tombstone still counts towards fullness.
        assert!(h.is_full());
        assert_eq!(h.table()[1], Cell::Deleted);
        h.insert(&mut c, 4).unwrap();
        assert_eq!(h.capacity(), 7);
        assert_eq!(h.deleted(), 0);
        assert_eq!(h.elems(), HashSet::from([0, 2, 4]));
        assert!(!h.table().contains(&Cell::Deleted));
    }

    #[test]
    fn tombstone_is_reused() {
        let mut c = ctx();
        let mut h = OpenHashSet::with_capacity(|x: &i64| (*x % 5) as u64, 5);
        h.insert(&mut c, 2).unwrap();
        h.delete(&mut c, &2).unwrap();
        assert_eq!(h.table()[2], Cell::Deleted);
        h.insert(&mut c, 7).unwrap();
        assert_eq!(h.table()[2], Cell::Some(7));
        assert_eq!(h.deleted(), 0);
    }

    #[test]
    fn tombstone_before_the_value_is_not_reused_for_a_duplicate() {
        let mut c = ctx();
        let mut h = OpenHashSet::with_capacity(|x: &i64| (*x % 5) as u64, 5);
        h.insert(&mut c, 2).unwrap();
        h.insert(&mut c, 7).unwrap();
        h.delete(&mut c, &2).unwrap();
        let err = h.insert(&mut c, 7).unwrap_err();
        assert_eq!((err.label, err.kind), ("x !in elems", ClauseKind::Pre));
    }

    #[test]
    fn delete_sole_element() {
        let mut c = ctx();
        let mut h = by_length();
        h.insert(&mut c, "a".into()).unwrap();
        h.delete(&mut c, &"a".into()).unwrap();
        assert!(h.is_empty());
        assert!(h.counting_identity());
    }

    #[test]
    fn contract_errors() {
        let mut c = ctx();
        let mut h = by_length();
        h.insert(&mut c, "Hello".into()).unwrap();
        let err = h.insert(&mut c, "Hello".into()).unwrap_err();
        assert_eq!(err.label, "x !in elems");
        let err = h.delete(&mut c, &"nope".into()).unwrap_err();
        assert_eq!(err.label, "x in elems");
        let mut off = ContractContext::new(ContractMode::Off);
        assert!(h.insert(&mut off, "Hello".into()).is_err());
        assert_eq!(off.checks_evaluated(), 0);
    }

    #[test]
    fn wraparound_probe() {
        let mut c = ctx();
        let mut h = OpenHashSet::with_capacity(|_: &i64| 4, 5);
        for x in 0..4 {
            h.insert(&mut c, x).unwrap();
        }
        assert_eq!(h.table()[4], Cell::Some(0));
        assert_eq!(h.table()[0], Cell::Some(1));
        assert!(h.valid_pos(&3, 2));
        assert!(h.contains(&mut c, &3).unwrap());
    }

    #[test]
    fn tombstone_as_nil_is_caught() {
        let mut c = ContractContext::new(ContractMode::Assert).with_fault(Some(Fault::TombstoneAsNil));
        let mut h = by_length();
        h.insert(&mut c, "Hello".into()).unwrap();
        let err = h.delete(&mut c, &"Hello".into()).unwrap_err();
        assert_eq!((err.label, err.kind), ("Valid", ClauseKind::Post));
    }

    proptest::proptest! {
        #[test]
        fn behaves_like_std_hash_set(ops in proptest::collection::vec((proptest::bool::ANY, 0i64..12), 0..80)) {
            let mut c = ctx();
            let mut h = OpenHashSet::with_capacity(|x: &i64| x.unsigned_abs() % 4, 3);
            let mut model = HashSet::new();
            for (insert, x) in ops {
                if insert && !model.contains(&x) {
                    h.insert(&mut c, x).unwrap();
                    model.insert(x);
                } else if !insert && model.contains(&x) {
                    h.delete(&mut c, &x).unwrap();
                    model.remove(&x);
                }
                proptest::prop_assert_eq!(h.contains(&mut c, &x).unwrap(), model.contains(&x));
                proptest::prop_assert!(h.counting_identity());
            }
            proptest::prop_assert_eq!(h.elems(), model);
        }
    }
}

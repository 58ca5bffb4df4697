//! Sorted set on an unbalanced binary search tree.

use std::collections::BTreeSet;

use crate::contract::{snapshot_if, ContractContext, ContractViolation, Fault};
use crate::search_sort::Key;
use crate::seq::{as_set, is_strictly_sorted};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    value: Key,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

impl Node {
    fn leaf(value: Key) -> Box<Node> {
        Box::new(Node {
            value,
            left: None,
            right: None,
        })
    }

    fn contains(&self, x: Key) -> bool {
        if x == self.value {
            true
        } else if x < self.value {
            self.left.as_ref().is_some_and(|l| l.contains(x))
        } else {
            self.right.as_ref().is_some_and(|r| r.contains(x))
        }
    }

    fn insert(&mut self, x: Key) {
        let child = if x == self.value {
            return;
        } else if x < self.value {
            &mut self.left
        } else {
            &mut self.right
        };
        match child {
            Some(node) => node.insert(x),
            None => *child = Some(Node::leaf(x)),
        }
    }

    fn min(&self) -> Key {
        self.left.as_ref().map_or(self.value, |l| l.min())
    }

    fn max(&self) -> Key {
        self.right.as_ref().map_or(self.value, |r| r.max())
    }

    // Two-child case always takes the predecessor (left subtree maximum).
    fn delete(mut self: Box<Self>, x: Key, skip_restore: bool) -> Option<Box<Node>> {
        if x == self.value {
            match (self.left.take(), self.right.take()) {
                (None, right) => return right,
                (left, None) => return left,
                (Some(left), right) => {
                    self.value = left.max();
                    self.left = if skip_restore {
                        Some(left)
                    } else {
                        left.delete(self.value, skip_restore)
                    };
                    self.right = right;
                }
            }
        } else if x > self.value {
            self.right = self.right.take().and_then(|r| r.delete(x, skip_restore));
        } else {
            self.left = self.left.take().and_then(|l| l.delete(x, skip_restore));
        }
        Some(self)
    }

    fn in_order(&self, out: &mut Vec<Key>) {
        if let Some(l) = &self.left {
            l.in_order(out);
        }
        out.push(self.value);
        if let Some(r) = &self.right {
            r.in_order(out);
        }
    }

    fn collect(&self, out: &mut BTreeSet<Key>) -> usize {
        let mut count = 1;
        out.insert(self.value);
        for child in [&self.left, &self.right].into_iter().flatten() {
            count += child.collect(out);
        }
        count
    }

    // Every left descendant is smaller and every right descendant larger.
    fn ordered(&self, lower: Option<Key>, upper: Option<Key>) -> bool {
        lower.is_none_or(|lo| self.value > lo)
            && upper.is_none_or(|hi| self.value < hi)
            && self.left.as_ref().is_none_or(|l| l.ordered(lower, Some(self.value)))
            && self.right.as_ref().is_none_or(|r| r.ordered(Some(self.value), upper))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BstSet {
    root: Option<Box<Node>>,
}

impl BstSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn root_value(&self) -> Option<Key> {
        self.root.as_ref().map(|n| n.value)
    }

    /// The set of node values, gathered by a full traversal.
    pub fn elems(&self) -> BTreeSet<Key> {
        let mut out = BTreeSet::new();
        if let Some(r) = &self.root {
            r.collect(&mut out);
        }
        out
    }

    fn node_count(&self) -> usize {
        self.root.as_ref().map_or(0, |r| r.collect(&mut BTreeSet::new()))
    }

    /// Class invariant: BST ordering, and no value stored twice.
    pub fn is_valid(&self) -> bool {
        self.root.as_ref().is_none_or(|r| r.ordered(None, None)) && self.node_count() == self.elems().len()
    }

    pub fn insert(&mut self, ctx: &mut ContractContext, x: Key) -> Result<(), ContractViolation> {
        ctx.operation("bst_insert", |ctx| {
            let old = snapshot_if(ctx, || self.elems());
            match &mut self.root {
                Some(r) => r.insert(x),
                None => self.root = Some(Node::leaf(x)),
            }
            ctx.check_post("Valid", || self.is_valid())?;
            ctx.check_post("elems==old(elems)+{x}", || {
                old.as_ref().is_some_and(|o| {
                    let mut expected = o.get().clone();
                    expected.insert(x);
                    self.elems() == expected
                })
            })
        })
    }

    pub fn contains(&self, ctx: &mut ContractContext, x: Key) -> Result<bool, ContractViolation> {
        ctx.operation("bst_contains", |ctx| {
            let res = self.root.as_ref().is_some_and(|r| r.contains(x));
            ctx.check_post("res<==>x in elems", || res == self.elems().contains(&x))?;
            Ok(res)
        })
    }

    pub fn min(&self, ctx: &mut ContractContext) -> Result<Key, ContractViolation> {
        ctx.operation("bst_min", |ctx| {
            ctx.require("!isEmpty", !self.is_empty())?;
            let m = self.root.as_ref().expect("nonempty").min();
            ctx.check_post("min in elems && min<=all", || {
                let e = self.elems();
                e.contains(&m) && e.iter().all(|&x| x >= m)
            })?;
            Ok(m)
        })
    }

    pub fn max(&self, ctx: &mut ContractContext) -> Result<Key, ContractViolation> {
        ctx.operation("bst_max", |ctx| {
            ctx.require("!isEmpty", !self.is_empty())?;
            let m = self.root.as_ref().expect("nonempty").max();
            ctx.check_post("max in elems && max>=all", || {
                let e = self.elems();
                e.contains(&m) && e.iter().all(|&x| x <= m)
            })?;
            Ok(m)
        })
    }

    /// Removes `x`; absent values are a no-op.
    pub fn delete(&mut self, ctx: &mut ContractContext, x: Key) -> Result<(), ContractViolation> {
        ctx.operation("bst_delete", |ctx| {
            let old = snapshot_if(ctx, || self.elems());
            let skip = ctx.fault_active(Fault::BstDeleteSkipsRestore);
            self.root = self.root.take().and_then(|r| r.delete(x, skip));
            ctx.check_post("Valid", || self.is_valid())?;
            ctx.check_post("elems==old(elems)-{x}", || {
                old.as_ref().is_some_and(|o| {
                    let mut expected = o.get().clone();
                    expected.remove(&x);
                    self.elems() == expected
                })
            })
        })
    }

    /// In-order traversal.
    pub fn as_sorted_seq(&self, ctx: &mut ContractContext) -> Result<Vec<Key>, ContractViolation> {
        ctx.operation("bst_as_sorted_seq", |ctx| {
            let mut s = Vec::new();
            if let Some(r) = &self.root {
                r.in_order(&mut s);
            }
            ctx.check_post("isSorted && asSet(s)==elems", || {
                is_strictly_sorted(&s) && as_set(&s) == self.elems()
            })?;
            Ok(s)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ContractMode;

    fn ctx() -> ContractContext {
        ContractContext::new(ContractMode::Assert)
    }

    fn build(c: &mut ContractContext, xs: &[Key]) -> BstSet {
        let mut t = BstSet::new();
        for &x in xs {
            t.insert(c, x).unwrap();
        }
        t
    }

    #[test]
    fn sorted_set_trace() {
        let mut c = ctx();
        let mut s = build(&mut c, &[2, 5, 1, 4, 4]);
        assert_eq!(s.elems(), BTreeSet::from([1, 2, 4, 5]));
        assert_eq!(s.as_sorted_seq(&mut c).unwrap(), [1, 2, 4, 5]);
        assert_eq!(s.min(&mut c).unwrap(), 1);
        assert_eq!(s.max(&mut c).unwrap(), 5);
        s.delete(&mut c, 5).unwrap();
        assert_eq!(s.elems(), BTreeSet::from([1, 2, 4]));
    }

    #[test]
    fn empty_and_singleton() {
        let mut c = ctx();
        let t = BstSet::new();
        assert!(!t.contains(&mut c, 3).unwrap());
        assert!(t.as_sorted_seq(&mut c).unwrap().is_empty());
        assert_eq!(t.min(&mut c).unwrap_err().label, "!isEmpty");
        assert_eq!(t.max(&mut c).unwrap_err().label, "!isEmpty");
        let t = build(&mut c, &[3]);
        assert_eq!((t.min(&mut c).unwrap(), t.max(&mut c).unwrap()), (3, 3));
    }

    #[test]
    fn delete_absent_is_noop() {
        let mut c = ctx();
        let mut t = build(&mut c, &[1, 2]);
        t.delete(&mut c, 9).unwrap();
        assert_eq!(t.elems(), BTreeSet::from([1, 2]));
    }

    #[test]
    fn two_child_delete_promotes_predecessor() {
        let mut c = ctx();
        let mut t = build(&mut c, &[2, 1, 3]);
        t.delete(&mut c, 2).unwrap();
        assert_eq!(t.elems(), BTreeSet::from([1, 3]));
        assert_eq!(t.root_value(), Some(1));
    }

    #[test]
    fn delete_to_empty() {
        let mut c = ctx();
        let mut t = build(&mut c, &[4]);
        t.delete(&mut c, 4).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn skipped_restore_is_caught() {
        let mut c = ContractContext::new(ContractMode::Assert).with_fault(Some(Fault::BstDeleteSkipsRestore));
        let mut t = build(&mut c, &[2, 1, 3]);
        let err = t.delete(&mut c, 2).unwrap_err();
        assert_eq!(err.label, "Valid");
    }

    proptest::proptest! {
        #[test]
        fn behaves_like_btree_set(ops in proptest::collection::vec((proptest::bool::ANY, -10i64..10), 0..80)) {
            let mut c = ctx();
            let mut t = BstSet::new();
            let mut model = BTreeSet::new();
            for (insert, x) in ops {
                if insert {
                    t.insert(&mut c, x).unwrap();
                    model.insert(x);
                } else if model.contains(&x) {
                    t.delete(&mut c, x).unwrap();
                    model.remove(&x);
                }
            }
            let listed: Vec<Key> = model.iter().copied().collect();
            proptest::prop_assert_eq!(t.as_sorted_seq(&mut c).unwrap(), listed);
        }
    }
}

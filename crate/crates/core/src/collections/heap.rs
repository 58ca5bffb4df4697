//! Max-priority queue on an array-backed binary heap.

use crate::contract::{snapshot_if, ContractContext, ContractViolation, Fault};
use crate::search_sort::Key;
use crate::seq::{multiset, multiset_add, multiset_remove, Multiset};

pub const HEAP_INITIAL_CAPACITY: usize = 10;

#[derive(Clone, Debug)]
pub struct MaxHeap {
    // heap.len() is the capacity; only heap[..size] is live.
    heap: Vec<Key>,
    size: usize,
}

impl Default for MaxHeap {
    fn default() -> Self {
        Self::new()
    }
}

impl MaxHeap {
    pub fn new() -> Self {
        Self::with_capacity(HEAP_INITIAL_CAPACITY)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        MaxHeap {
            heap: vec![0; capacity],
            size: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn capacity(&self) -> usize {
        self.heap.len()
    }

    /// The live slots in heap order.
    pub fn as_slice(&self) -> &[Key] {
        &self.heap[..self.size]
    }

    pub fn elems(&self) -> Multiset<Key> {
        multiset(self.as_slice())
    }

    /// Class invariant: every child is at most its parent.
    pub fn heap_inv(&self) -> bool {
        self.size <= self.heap.len() && (1..self.size).all(|i| self.heap[i] <= self.heap[(i - 1) / 2])
    }

    /// Every live slot is at most the top.
    pub fn max_is_at_top(&self) -> bool {
        (0..self.size).all(|i| self.heap[i] <= self.heap[0])
    }

    // While sifting up from k: heap order holds everywhere except between k
    // and its parent, and k's children are bounded by k's parent.
    fn heapify_up_inv(&self, k: usize) -> bool {
        let h = &self.heap;
        self.size <= h.len()
            && (1..self.size).all(|i| i == k || h[i] <= h[(i - 1) / 2])
            && (k == 0 || (1..self.size).all(|i| (i - 1) / 2 != k || h[i] <= h[(k - 1) / 2]))
    }

    // While sifting down from k: heap order holds everywhere except between k
    // and its children, and k's children are bounded by k's parent.
    fn heapify_down_inv(&self, k: usize) -> bool {
        let h = &self.heap;
        self.size <= h.len()
            && (1..self.size).all(|i| (i - 1) / 2 == k || h[i] <= h[(i - 1) / 2])
            && (k == 0 || (1..self.size).all(|i| (i - 1) / 2 != k || h[i] <= h[(k - 1) / 2]))
    }

    pub fn insert(&mut self, ctx: &mut ContractContext, x: Key) -> Result<(), ContractViolation> {
        ctx.operation("heap_insert", |ctx| {
            let old = snapshot_if(ctx, || self.elems());
            if self.size == self.heap.len() {
                self.grow(ctx)?;
            }
            self.heap[self.size] = x;
            self.size += 1;
            self.heapify_up(ctx)?;
            ctx.check_post("heapInv", || self.heap_inv())?;
            ctx.check_post("elems==old(elems)+{x}", || {
                old.as_ref().is_some_and(|o| self.elems() == multiset_add(o, &x))
            })?;
            Ok(())
        })
    }

    fn grow(&mut self, ctx: &mut ContractContext) -> Result<(), ContractViolation> {
        ctx.operation("heap_grow", |ctx| {
            let new_capacity = if self.size == 0 {
                HEAP_INITIAL_CAPACITY
            } else {
                2 * self.size
            };
            self.heap.resize(new_capacity, 0);
            ctx.check_post("capacity>size", || self.heap.len() > self.size)
        })
    }

    fn heapify_up(&mut self, ctx: &mut ContractContext) -> Result<(), ContractViolation> {
        let mut k = self.size - 1;
        loop {
            ctx.check_invariant("heapifyUpInv", || self.heapify_up_inv(k))?;
            if k == 0 || self.heap[k] <= self.heap[(k - 1) / 2] {
                return Ok(());
            }
            self.heap.swap(k, (k - 1) / 2);
            k = (k - 1) / 2;
        }
    }

    pub fn delete_max(&mut self, ctx: &mut ContractContext) -> Result<Key, ContractViolation> {
        ctx.operation("heap_delete_max", |ctx| {
            ctx.require("!isEmpty", !self.is_empty())?;
            let old = snapshot_if(ctx, || self.elems());
            ctx.check_assert("maxIsAtTop", || self.max_is_at_top())?;
            let x = self.heap[0];
            self.size -= 1;
            if self.size > 0 {
                self.heap[0] = self.heap[self.size];
                self.heapify_down(ctx)?;
            }
            ctx.check_post("isMax(x,old(elems))", || {
                old.as_ref()
                    .is_some_and(|o| o.contains_key(&x) && o.keys().all(|&y| y <= x))
            })?;
            ctx.check_post("heapInv", || self.heap_inv())?;
            ctx.check_post("elems==old(elems)-{x}", || {
                old.as_ref().is_some_and(|o| self.elems() == multiset_remove(o, &x))
            })?;
            Ok(x)
        })
    }

    fn heapify_down(&mut self, ctx: &mut ContractContext) -> Result<(), ContractViolation> {
        let mut k = 0;
        loop {
            ctx.check_invariant("heapifyDownInv", || self.heapify_down_inv(k))?;
            let left = 2 * k + 1;
            let right = 2 * k + 2;
            if left >= self.size {
                return Ok(());
            }
            let right_wins = if ctx.fault_active(Fault::HeapChildComparison) {
                right < self.size && self.heap[right] < self.heap[left]
            } else {
                right < self.size && self.heap[right] > self.heap[left]
            };
            let max_child = if right_wins { right } else { left };
            if self.heap[k] > self.heap[max_child] {
                return Ok(());
            }
            self.heap.swap(k, max_child);
            k = max_child;
        }
    }

    pub fn get_max(&self, ctx: &mut ContractContext) -> Result<Key, ContractViolation> {
        ctx.operation("heap_get_max", |ctx| {
            ctx.require("!isEmpty", !self.is_empty())?;
            let x = self.heap[0];
            ctx.check_post("isMax(x,elems)", || self.as_slice().iter().all(|&y| y <= x))?;
            Ok(x)
        })
    }
}

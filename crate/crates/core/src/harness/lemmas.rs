//! Randomized checks of the lemmas the algorithms rely on.

use rand::seq::SliceRandom;
use rand::Rng;

use super::fuzz::{refusal, Container};
use super::gen::{self, CaseRng};
use crate::collections::BstSet;
use crate::contract::{ContractContext, ContractMode};
use crate::graphs::{euler_dfs, euler_trail_degrees, is_acyclic, is_euler_trail, UGraph};
use crate::numerics::{power_dc, Rational};
use crate::oracles::{Command, ContainerKind};
use crate::search_sort::{insertion_sort, is_sorted};
use crate::seq::{as_set, is_strictly_sorted, multiset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failure: Option<String>,
}

impl LemmaOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// `Ok(true)` counts a case, `Ok(false)` skips an instance the lemma does
/// not apply to, `Err` is a counterexample.
type Check = fn(&mut ContractContext, &mut CaseRng) -> Result<bool, String>;

pub const LEMMAS: [(&str, Check); 10] = [
    ("product of powers", product_of_powers),
    ("sorting uniqueness", sorting_uniqueness),
    ("max at top", max_at_top),
    ("counting identity and full iff no nil", hash_counting),
    ("asSet of concatenation", as_set_concat),
    ("sorted sequence uniqueness", bst_sorted_unique),
    ("zero-indegree vertex in acyclic graphs", zero_indegree),
    ("subgraph acyclicity", subgraph_acyclic),
    ("euler trail degree parity", trail_parity),
    ("closed-trail dfs returns to start", dfs_returns),
];

fn product_of_powers(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let x = Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=3));
    let (a, b) = (rng.gen_range(0..=20), rng.gen_range(0..=20));
    let whole = power_dc(ctx, &x, a + b).map_err(|e| e.to_string())?;
    let parts = power_dc(ctx, &x, a).map_err(|e| e.to_string())? * power_dc(ctx, &x, b).map_err(|e| e.to_string())?;
    if whole == parts {
        Ok(true)
    } else {
        Err(format!("{x}^({a}+{b}) = {whole} but {x}^{a} * {x}^{b} = {parts}"))
    }
}

fn sorting_uniqueness(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let mut a = gen::keys(rng, 16, -4..=4);
    let mut b = a.clone();
    b.shuffle(rng);
    insertion_sort(ctx, &mut a).map_err(|e| e.to_string())?;
    insertion_sort(ctx, &mut b).map_err(|e| e.to_string())?;
    if is_sorted(&a) && is_sorted(&b) && multiset(&a) == multiset(&b) && a != b {
        return Err(format!(
            "{a:?} and {b:?} are sorted permutations of each other but differ"
        ));
    }
    Ok(true)
}

fn replay(
    ctx: &mut ContractContext,
    kind: ContainerKind,
    capacity: usize,
    rng: &mut CaseRng,
    each: impl Fn(&Container) -> Result<(), String>,
) -> Result<bool, String> {
    let mut c = Container::new(kind, capacity);
    for command in gen::commands(rng, kind) {
        c.apply(ctx, &command).map_err(|e| format!("{command}: {e}"))?;
        each(&c).map_err(|e| format!("after {command}: {e}"))?;
    }
    Ok(true)
}

fn max_at_top(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    replay(ctx, ContainerKind::Heap, 0, rng, |c| match c {
        Container::Heap(h) if !h.max_is_at_top() => Err(format!("{:?} does not have its maximum first", h.as_slice())),
        _ => Ok(()),
    })
}

fn hash_counting(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let capacity = gen::hash_capacity(rng);
    replay(ctx, ContainerKind::HashSet, capacity, rng, |c| match c {
        Container::HashSet(s) if !s.counting_identity() => Err("used + deleted + nil != capacity".into()),
        Container::HashSet(s) if s.is_full() != (s.nil_count() == 0) => {
            Err(format!("full = {} with {} nil cells", s.is_full(), s.nil_count()))
        }
        _ => Ok(()),
    })
}

fn as_set_concat(_: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let a = gen::keys(rng, 10, -5..=5);
    let b = gen::keys(rng, 10, -5..=5);
    let joined: Vec<_> = a.iter().chain(&b).copied().collect();
    let union: std::collections::BTreeSet<_> = as_set(&a).union(&as_set(&b)).copied().collect();
    if as_set(&joined) == union {
        Ok(true)
    } else {
        Err(format!("asSet({a:?} + {b:?}) is not the union"))
    }
}

fn bst_sorted_unique(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let mut t = BstSet::new();
    for command in gen::commands(rng, ContainerKind::TreeSet) {
        match command {
            Command::Insert(x) => t.insert(ctx, x),
            Command::Delete(x) => t.delete(ctx, x),
            _ => Ok(()),
        }
        .map_err(|e| e.to_string())?;
    }
    let s = t.as_sorted_seq(ctx).map_err(|e| e.to_string())?;
    // The only strictly increasing sequence with this element set.
    let canonical: Vec<_> = t.elems().into_iter().collect();
    if is_strictly_sorted(&s) && as_set(&s) == t.elems() && s != canonical {
        return Err(format!("{s:?} and {canonical:?} are both sorted listings of one set"));
    }
    Ok(true)
}

fn zero_indegree(_: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let g = gen::digraph(rng, 7);
    if g.vertices().is_empty() || !is_acyclic(&g) {
        return Ok(false);
    }
    if g.vertices().iter().all(|&v| g.has_incoming_edges(v)) {
        return Err(format!("acyclic {g:?} has no vertex without incoming edges"));
    }
    Ok(true)
}

fn subgraph_acyclic(_: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let g = gen::digraph(rng, 7);
    if !is_acyclic(&g) {
        return Ok(false);
    }
    match g.vertices().iter().find(|&&v| !is_acyclic(&g.remove_vertex(v))) {
        Some(v) => Err(format!("removing {v} from acyclic {g:?} made a cycle")),
        None => Ok(true),
    }
}

fn trail_parity(_: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let n = rng.gen_range(2..=7);
    let trail = gen::random_trail(rng, n, 12);
    let g =
        UGraph::from_edges(trail.iter().copied(), trail.windows(2).map(|w| (w[0], w[1]))).map_err(|e| e.to_string())?;
    if !is_euler_trail(&trail, &g) {
        return Err(format!("{trail:?} is not an Euler trail of its own edges"));
    }
    if !euler_trail_degrees(&g, &trail) {
        return Err(format!(
            "odd-degree vertices of {g:?} are not exactly the ends of {trail:?}"
        ));
    }
    Ok(true)
}

fn dfs_returns(ctx: &mut ContractContext, rng: &mut CaseRng) -> Result<bool, String> {
    let g = gen::even_connected_graph(rng, 7, 12);
    let vs: Vec<_> = g.vertices().collect();
    let v = *vs.choose(rng).expect("generated graphs are nonempty");
    let (trail, _) = euler_dfs(ctx, v, &g).map_err(|e| e.to_string())?;
    if trail.last() == Some(&v) {
        Ok(true)
    } else {
        Err(format!("dfs from {v} in {g:?} stopped at {:?}", trail.last()))
    }
}

/// Runs every lemma until it has `cases` applicable instances (or a
/// counterexample). Lemma `k` draws from seed `seed + k`.
pub fn lemma_suite(seed: u64, cases: usize, mode: ContractMode) -> Vec<LemmaOutcome> {
    LEMMAS
        .iter()
        .enumerate()
        .map(|(k, &(name, check))| {
            let mut rng = gen::rng(seed.wrapping_add(k as u64));
            let mut ctx = ContractContext::new(mode);
            let mut counted = 0;
            let mut failure = None;
            let mut attempts = 0;
            while counted < cases && attempts < cases * 20 {
                attempts += 1;
                match check(&mut ctx, &mut rng) {
                    Ok(true) => counted += 1,
                    Ok(false) => {}
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            if failure.is_none() && counted < cases {
                failure = Some(format!("only {counted} applicable instances in {attempts} attempts"));
            }
            if failure.is_none() {
                failure = ctx.violations().iter().find(|v| !refusal(v)).map(|v| v.to_string());
            }
            LemmaOutcome {
                name,
                cases: counted,
                failure,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemmas_hold() {
        for mode in ContractMode::ALL {
            for outcome in lemma_suite(5, 50, mode) {
                assert!(outcome.passed(), "{mode} {}: {:?}", outcome.name, outcome.failure);
                assert_eq!(outcome.cases, 50);
            }
        }
    }
}

//! Gale-Shapley stable matching with incomplete preference lists and no
//! ties, and the teachers-placement problem solved by reduction to it.
//!
//! Proposers are chosen deterministically: the free proposer with the
//! lowest id that still has someone left to propose to goes next.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::contract::{ContractContext, ContractViolation, Fault};
use crate::seq::has_duplicates;

pub type AgentId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("agent {agent} lists {duplicate} more than once")]
pub struct DuplicatePreference {
    pub agent: AgentId,
    pub duplicate: AgentId,
}

/// Ranked, duplicate-free preference lists keyed by agent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrefTable(BTreeMap<AgentId, Vec<AgentId>>);

impl PrefTable {
    pub fn new(prefs: BTreeMap<AgentId, Vec<AgentId>>) -> Result<Self, DuplicatePreference> {
        for (&agent, list) in &prefs {
            if has_duplicates(list) {
                let duplicate = list
                    .iter()
                    .enumerate()
                    .find(|&(i, x)| list[..i].contains(x))
                    .map(|(_, &x)| x)
                    .expect("has_duplicates found one");
                return Err(DuplicatePreference { agent, duplicate });
            }
        }
        Ok(PrefTable(prefs))
    }

    pub fn from_pairs<I, L>(pairs: I) -> Result<Self, DuplicatePreference>
    where
        I: IntoIterator<Item = (AgentId, L)>,
        L: IntoIterator<Item = AgentId>,
    {
        Self::new(pairs.into_iter().map(|(a, l)| (a, l.into_iter().collect())).collect())
    }

    pub fn get(&self, agent: AgentId) -> Option<&[AgentId]> {
        self.0.get(&agent).map(Vec::as_slice)
    }

    pub fn contains_agent(&self, agent: AgentId) -> bool {
        self.0.contains_key(&agent)
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &[AgentId])> {
        self.0.iter().map(|(&a, l)| (a, l.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<AgentId, Vec<AgentId>> {
        &self.0
    }

    /// Total number of entries over all lists.
    pub fn total_len(&self) -> usize {
        self.0.values().map(Vec::len).sum()
    }

    /// Every id in any list is a key of `counterpart`.
    pub fn references_only(&self, counterpart: &PrefTable) -> bool {
        self.0.values().flatten().all(|id| counterpart.contains_agent(*id))
    }
}

/// Proposer to counterpart.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching(BTreeMap<AgentId, AgentId>);

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (AgentId, AgentId)>) -> Self {
        Matching(pairs.into_iter().collect())
    }

    pub fn get(&self, proposer: AgentId) -> Option<AgentId> {
        self.0.get(&proposer).copied()
    }

    pub fn partner_of(&self, responder: AgentId) -> Option<AgentId> {
        self.0.iter().find(|&(_, &r)| r == responder).map(|(&p, _)| p)
    }

    pub fn insert(&mut self, proposer: AgentId, responder: AgentId) {
        self.0.insert(proposer, responder);
    }

    pub fn remove(&mut self, proposer: AgentId) {
        self.0.remove(&proposer);
    }

    pub fn contains(&self, proposer: AgentId) -> bool {
        self.0.contains_key(&proposer)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.0.iter().map(|(&p, &r)| (p, r))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.values().all(|r| seen.insert(*r))
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, r) in self.pairs() {
            writeln!(f, "{p} -> {r}")?;
        }
        Ok(())
    }
}

/// `e1` occurs strictly before `e2` in `s`.
pub fn precedes(e1: AgentId, e2: AgentId, s: &[AgentId]) -> bool {
    (0..s.len()).any(|i| s[i] == e1 && (i + 1..s.len()).any(|j| s[j] == e2))
}

/// Each couple appears in both parties' lists.
pub fn is_valid(couples: &Matching, men: &PrefTable, women: &PrefTable) -> bool {
    couples
        .pairs()
        .all(|(m, w)| men.get(m).is_some_and(|l| l.contains(&w)) && women.get(w).is_some_and(|l| l.contains(&m)))
}

/// `(m, w)` would both rather be with each other.
pub fn unstable(m: AgentId, w: AgentId, couples: &Matching, men: &PrefTable, women: &PrefTable) -> bool {
    let (Some(m_list), Some(w_list)) = (men.get(m), women.get(w)) else {
        return false;
    };
    m_list.contains(&w)
        && w_list.contains(&m)
        && couples.get(m).is_none_or(|current| precedes(w, current, m_list))
        && couples
            .pairs()
            .filter(|&(_, r)| r == w)
            .all(|(m2, _)| precedes(m, m2, w_list))
}

/// No blocking pair over all proposers and responders.
pub fn is_stable(couples: &Matching, men: &PrefTable, women: &PrefTable) -> bool {
    !men.agents()
        .any(|m| women.agents().any(|w| unstable(m, w, couples, men, women)))
}

pub fn stable_matching(
    ctx: &mut ContractContext,
    men: &PrefTable,
    women: &PrefTable,
) -> Result<Matching, ContractViolation> {
    ctx.operation("stable_matching", |ctx| {
        ctx.require("P1", men.references_only(women))?;
        ctx.require("P2", women.references_only(men))?;

        let mut couples = Matching::new();
        let mut explored: BTreeMap<AgentId, Vec<AgentId>> = men.agents().map(|m| (m, Vec::new())).collect();
        let bound = men.total_len();
        let mut iterations = 0usize;

        while let Some(m) = men
            .iter()
            .find(|&(m, list)| !couples.contains(m) && explored[&m].len() < list.len())
            .map(|(m, _)| m)
        {
            iterations += 1;
            ctx.check_invariant("iterations<=total list length", || iterations <= bound)?;

            let w = men.get(m).expect("proposer exists")[explored[&m].len()];
            let w_list = women.get(w).expect("P1 holds");
            match couples.partner_of(w) {
                Some(m2) => {
                    if w_list.contains(&m) && precedes(m, m2, w_list) {
                        if !ctx.fault_active(Fault::MatchingSkipsRejection) {
                            couples.remove(m2);
                        }
                        couples.insert(m, w);
                    }
                }
                None => {
                    if w_list.contains(&m) {
                        couples.insert(m, w);
                    }
                }
            }
            explored.get_mut(&m).expect("proposer exists").push(w);

            if ctx.enabled() {
                check_loop_invariants(ctx, &couples, &explored, men, women)?;
            }
        }

        ctx.check_post("injective", || couples.is_injective())?;
        ctx.check_post("Q1", || is_valid(&couples, men, women))?;
        ctx.check_post("Q2", || is_stable(&couples, men, women))?;
        Ok(couples)
    })
}

fn check_loop_invariants(
    ctx: &mut ContractContext,
    couples: &Matching,
    explored: &BTreeMap<AgentId, Vec<AgentId>>,
    men: &PrefTable,
    women: &PrefTable,
) -> Result<(), ContractViolation> {
    ctx.check_invariant("I1", || explored.keys().copied().eq(men.agents()))?;
    ctx.check_invariant("I2", || {
        explored
            .iter()
            .all(|(&m, e)| men.get(m).is_some_and(|l| l.starts_with(e)))
    })?;
    let explored_table = PrefTable(explored.clone());
    ctx.check_invariant("I3", || is_valid(couples, &explored_table, women))?;
    ctx.check_invariant("I4", || is_stable(couples, &explored_table, women))?;
    ctx.check_invariant("I5", || couples.pairs().all(|(m, w)| explored[&m].last() == Some(&w)))?;
    Ok(())
}

/// `s` with `x` moved to the front.
pub fn move_to_head(ctx: &mut ContractContext, s: &[AgentId], x: AgentId) -> Result<Vec<AgentId>, ContractViolation> {
    ctx.operation("move_to_head", |ctx| {
        let i = s.iter().position(|&y| y == x);
        ctx.require("x in s", i.is_some())?;
        let i = i.expect("checked above");
        let mut out = Vec::with_capacity(s.len());
        out.push(s[i]);
        out.extend_from_slice(&s[..i]);
        out.extend_from_slice(&s[i + 1..]);
        ctx.check_post("head==x && same elements", || {
            out[0] == x && out.len() == s.len() && s.iter().all(|y| out.contains(y))
        })?;
        Ok(out)
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlacementInstance {
    pub vacancies: BTreeSet<AgentId>,
    /// Ranked, best first.
    pub teachers: Vec<AgentId>,
    pub preferences: PrefTable,
    /// Teacher to the vacancy they currently occupy.
    pub initial: BTreeMap<AgentId, AgentId>,
}

impl PlacementInstance {
    /// Ranked teachers and preference keys coincide.
    pub fn p1(&self) -> bool {
        !has_duplicates(&self.teachers)
            && self.teachers.iter().copied().collect::<BTreeSet<_>>() == self.preferences.agents().collect()
    }

    /// Preferred vacancies exist.
    pub fn p2(&self) -> bool {
        self.preferences
            .iter()
            .all(|(_, l)| l.iter().all(|v| self.vacancies.contains(v)))
    }

    /// Initial placements reference existing teachers and vacancies.
    pub fn p3(&self) -> bool {
        self.initial
            .iter()
            .all(|(t, v)| self.teachers.contains(t) && self.vacancies.contains(v))
    }

    /// A teacher's current vacancy is the last entry of their list.
    pub fn p4(&self) -> bool {
        self.initial
            .iter()
            .all(|(&t, &v)| self.preferences.get(t).and_then(|l| l.last()) == Some(&v))
    }

    pub fn initial_is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.initial.values().all(|v| seen.insert(*v))
    }

    fn incumbent(&self, v: AgentId) -> Option<AgentId> {
        self.initial.iter().find(|&(_, &iv)| iv == v).map(|(&t, _)| t)
    }
}

/// Each vacancy ranks teachers by the global ranking, except that the
/// teacher initially placed there comes first.
pub fn vacancies_prefs(ctx: &mut ContractContext, inst: &PlacementInstance) -> Result<PrefTable, ContractViolation> {
    let mut prefs = BTreeMap::new();
    for &v in &inst.vacancies {
        let list = match inst.incumbent(v) {
            Some(t) => move_to_head(ctx, &inst.teachers, t)?,
            None => inst.teachers.clone(),
        };
        prefs.insert(v, list);
    }
    Ok(PrefTable(prefs))
}

/// `t` outranks whoever holds `v` in `placement` (a free vacancy takes anyone).
pub fn teacher_has_precedence_for_vacancy(
    t: AgentId,
    v: AgentId,
    placement: &Matching,
    teachers: &[AgentId],
    initial: &BTreeMap<AgentId, AgentId>,
) -> bool {
    match placement.partner_of(v) {
        Some(t2) => {
            t != t2 && (initial.get(&t) == Some(&v) || (initial.get(&t2) != Some(&v) && precedes(t, t2, teachers)))
        }
        None => true,
    }
}

/// No teacher and listed vacancy would both rather be together.
pub fn placement_is_stable(inst: &PlacementInstance, placement: &Matching) -> bool {
    !inst.teachers.iter().any(|&t| {
        inst.preferences.get(t).unwrap_or(&[]).iter().any(|&v| {
            let t_prefers = placement
                .get(t)
                .is_none_or(|cur| precedes(v, cur, inst.preferences.get(t).unwrap_or(&[])));
            t_prefers && teacher_has_precedence_for_vacancy(t, v, placement, &inst.teachers, &inst.initial)
        })
    })
}

pub fn teachers_placement(ctx: &mut ContractContext, inst: &PlacementInstance) -> Result<Matching, ContractViolation> {
    ctx.operation("teachers_placement", |ctx| {
        ctx.require("P1", inst.p1())?;
        ctx.require("P2", inst.p2())?;
        ctx.require("P3", inst.p3())?;
        ctx.require("P4", inst.p4())?;
        ctx.require("initialInjective", inst.initial_is_injective())?;

        let vacancy_prefs = vacancies_prefs(ctx, inst)?;
        let placement = stable_matching(ctx, &inst.preferences, &vacancy_prefs)?;

        ctx.check_post("Q1", || placement.pairs().all(|(t, _)| inst.teachers.contains(&t)))?;
        ctx.check_post("Q2", || {
            placement
                .pairs()
                .all(|(t, v)| inst.preferences.get(t).is_some_and(|l| l.contains(&v)))
        })?;
        ctx.check_post("Q3", || placement_is_stable(inst, &placement))?;
        ctx.check_post("Q4", || inst.initial.keys().all(|&t| placement.contains(t)))?;
        Ok(placement)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{ClauseKind, ContractMode};

    fn ctx() -> ContractContext {
        ContractContext::new(ContractMode::Assert)
    }

    fn table(pairs: &[(AgentId, &[AgentId])]) -> PrefTable {
        PrefTable::from_pairs(pairs.iter().map(|&(a, l)| (a, l.iter().copied()))).unwrap()
    }

    fn m(pairs: &[(AgentId, AgentId)]) -> Matching {
        Matching::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn precedes_examples() {
        assert!(precedes(2, 1, &[2, 1]));
        assert!(!precedes(1, 1, &[1, 2]));
        assert!(!precedes(3, 1, &[1, 2]));
    }

    #[test]
    fn duplicate_preferences_rejected() {
        let err = PrefTable::from_pairs([(1, vec![2, 3, 2])]).unwrap_err();
        assert_eq!(err, DuplicatePreference { agent: 1, duplicate: 2 });
    }

    #[test]
    fn stability_examples() {
        let men = table(&[(1, &[1, 2]), (2, &[1, 2])]);
        let women = table(&[(1, &[1]), (2, &[2])]);
        assert!(is_stable(&m(&[(1, 1), (2, 2)]), &men, &women));
        assert!(is_stable(
            &Matching::new(),
            &PrefTable::default(),
            &PrefTable::default()
        ));
        let men = table(&[(1, &[1, 2]), (2, &[2, 1])]);
        let women = table(&[(1, &[1, 2]), (2, &[2, 1])]);
        let swapped = m(&[(1, 2), (2, 1)]);
        assert!(!is_stable(&swapped, &men, &women));
        assert!(unstable(1, 1, &swapped, &men, &women));
    }

    #[test]
    fn matching_test1() {
        let men = table(&[(1, &[1, 2]), (2, &[1, 2])]);
        let women = table(&[(1, &[1]), (2, &[2])]);
        assert_eq!(stable_matching(&mut ctx(), &men, &women).unwrap(), m(&[(1, 1), (2, 2)]));
    }

    #[test]
    fn matching_test2() {
        let men = table(&[(1, &[2, 1]), (2, &[1, 2])]);
        let women = table(&[(1, &[1, 2]), (2, &[2, 1])]);
        let got = stable_matching(&mut ctx(), &men, &women).unwrap();
        assert_eq!(got, m(&[(1, 2), (2, 1)]));
    }

    #[test]
    fn matching_test3() {
        // Woman 1 prefers man 1, so man 2 cannot displace him.
        let men = table(&[(1, &[1, 2]), (2, &[1])]);
        let women = table(&[(1, &[1, 2]), (2, &[2, 1])]);
        let got = stable_matching(&mut ctx(), &men, &women).unwrap();
        assert_eq!(got, m(&[(1, 1)]));
        assert!(!is_stable(&m(&[(1, 2), (2, 1)]), &men, &women));
    }

    #[test]
    fn responder_not_listing_proposer_rejects() {
        let men = table(&[(1, &[1])]);
        let women = table(&[(1, &[])]);
        assert!(stable_matching(&mut ctx(), &men, &women).unwrap().is_empty());
    }

    #[test]
    fn dangling_references() {
        let men = table(&[(1, &[7])]);
        let women = table(&[(1, &[1])]);
        let err = stable_matching(&mut ctx(), &men, &women).unwrap_err();
        assert_eq!((err.label, err.kind), ("P1", ClauseKind::Pre));
        let men = table(&[(1, &[1])]);
        let women = table(&[(1, &[9])]);
        assert_eq!(stable_matching(&mut ctx(), &men, &women).unwrap_err().label, "P2");
    }

    #[test]
    fn move_to_head_examples() {
        assert_eq!(move_to_head(&mut ctx(), &[1, 2, 3], 3).unwrap(), [3, 1, 2]);
        assert_eq!(move_to_head(&mut ctx(), &[1, 2, 3], 1).unwrap(), [1, 2, 3]);
        assert_eq!(move_to_head(&mut ctx(), &[5], 5).unwrap(), [5]);
        assert_eq!(move_to_head(&mut ctx(), &[5], 4).unwrap_err().label, "x in s");
    }

    fn instance(prefs: &[(AgentId, &[AgentId])], initial: &[(AgentId, AgentId)]) -> PlacementInstance {
        PlacementInstance {
            vacancies: BTreeSet::from([1, 2]),
            teachers: vec![1, 2, 3],
            preferences: table(prefs),
            initial: initial.iter().copied().collect(),
        }
    }

    #[test]
    fn placement_test1() {
        let inst = instance(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2])], &[(1, 1)]);
        let vp = vacancies_prefs(&mut ctx(), &inst).unwrap();
        assert_eq!(vp, table(&[(1, &[1, 2, 3]), (2, &[1, 2, 3])]));
        assert_eq!(teachers_placement(&mut ctx(), &inst).unwrap(), m(&[(1, 2), (2, 1)]));
    }

    #[test]
    fn placement_test2() {
        let inst = instance(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2, 1])], &[(3, 1)]);
        let vp = vacancies_prefs(&mut ctx(), &inst).unwrap();
        assert_eq!(vp, table(&[(1, &[3, 1, 2]), (2, &[1, 2, 3])]));
        assert_eq!(teachers_placement(&mut ctx(), &inst).unwrap(), m(&[(1, 2), (3, 1)]));
    }

    #[test]
    fn placement_without_initial_or_teachers() {
        let inst = instance(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2])], &[]);
        let vp = vacancies_prefs(&mut ctx(), &inst).unwrap();
        assert!(vp.iter().all(|(_, l)| l == [1, 2, 3]));
        let empty = PlacementInstance {
            vacancies: BTreeSet::from([1]),
            ..Default::default()
        };
        assert!(teachers_placement(&mut ctx(), &empty).unwrap().is_empty());
    }

    #[test]
    fn placement_preconditions() {
        let bad_last = instance(&[(1, &[1, 2]), (2, &[1, 2]), (3, &[2])], &[(1, 1)]);
        assert_eq!(teachers_placement(&mut ctx(), &bad_last).unwrap_err().label, "P4");
        let mut missing_teacher = instance(&[(1, &[2, 1]), (2, &[1, 2])], &[]);
        missing_teacher.teachers = vec![1, 2, 3];
        assert_eq!(
            teachers_placement(&mut ctx(), &missing_teacher).unwrap_err().label,
            "P1"
        );
        let unknown_vacancy = instance(&[(1, &[9]), (2, &[1]), (3, &[2])], &[]);
        assert_eq!(
            teachers_placement(&mut ctx(), &unknown_vacancy).unwrap_err().label,
            "P2"
        );
    }

    #[test]
    fn skipped_rejection_is_caught() {
        let mut c = ContractContext::new(ContractMode::Assert).with_fault(Some(Fault::MatchingSkipsRejection));
        let inst = instance(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2, 1])], &[(3, 1)]);
        assert!(teachers_placement(&mut c, &inst).is_err());
    }

    fn shuffled(n: u64, keys: &[u32]) -> PrefTable {
        let rows = (1..=n).map(|a| {
            let mut l: Vec<u64> = (1..=n).collect();
            l.sort_by_key(|&b| keys[((a - 1) * n + b - 1) as usize]);
            (a, l)
        });
        PrefTable::from_pairs(rows).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn complete_lists_give_a_perfect_stable_matching(
            n in 1u64..6,
            keys in proptest::collection::vec(0u32..1000, 50),
        ) {
            let men = shuffled(n, &keys[..25]);
            let women = shuffled(n, &keys[25..]);
            let m = stable_matching(&mut ctx(), &men, &women).unwrap();
            proptest::prop_assert_eq!(m.len() as u64, n);
            proptest::prop_assert!(is_valid(&m, &men, &women));
            proptest::prop_assert!(is_stable(&m, &men, &women));
        }
    }
}

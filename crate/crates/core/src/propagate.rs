//! Arc consistency (AC) and linear arc consistency (LAC) fixpoint engines.
//!
//! Both engines record a [`Trace`]: every derived fact keeps the first
//! justification found for it, which is enough to rebuild a tree pattern
//! (AC) or a path pattern (LAC) certifying a contradiction.
//!
//! Constraints with repeated variables are scanned occurrence by occurrence:
//! a tuple respects the potatoes when each entry lies in the potato of the
//! variable at that position. Equality of repeated occurrences is *not*
//! enforced, so `x != x` over a two-element domain passes AC.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use smallvec::SmallVec;

use crate::domain::DomainSet;
use crate::error::{Error, Result};
use crate::model::{ConstraintId, Instance, VarId};

/// A derived unary fact `set(variable)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Fact {
    pub variable: VarId,
    pub set: DomainSet,
}

pub type FactId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Justification {
    /// Supplied by the caller.
    Seed,
    /// The potato of the variable.
    Potato,
    /// Projection of the effective relation of a constraint (no premise).
    Projection { constraint: ConstraintId, position: usize },
    /// Single-fact LAC step from `source` along `from -> to` in `constraint`.
    Step {
        constraint: ConstraintId,
        from: usize,
        to: usize,
        source: FactId,
    },
    /// AC revision of `position` in `constraint`, using one fact per
    /// position (`sources[position]` is the previous fact on the target).
    Revision {
        constraint: ConstraintId,
        position: usize,
        sources: Vec<FactId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub fact: Fact,
    pub why: Justification,
}

/// Derivation log. Justifications only ever point to earlier entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    entries: Vec<TraceEntry>,
}

impl Trace {
    fn push(&mut self, fact: Fact, why: Justification) -> FactId {
        self.entries.push(TraceEntry { fact, why });
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn get(&self, id: FactId) -> Option<&TraceEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First entry deriving an empty set.
    pub fn first_empty(&self) -> Option<FactId> {
        self.entries.iter().position(|e| e.fact.set.is_empty())
    }
}

fn check_occurrence(instance: &Instance, c: ConstraintId, position: usize) -> Result<()> {
    let arity = instance.constraint(c).scope.len();
    if position >= arity {
        return Err(Error::BadOccurrence {
            constraint: c.0,
            position,
            arity,
        });
    }
    Ok(())
}

/// Projection onto `to` of the effective relation of `c` restricted to
/// tuples whose `from` entry lies in `set`.
pub fn step_image(instance: &Instance, c: ConstraintId, from: usize, to: usize, set: DomainSet) -> Result<DomainSet> {
    if c.0 >= instance.num_constraints() {
        return Err(Error::BadOccurrence {
            constraint: c.0,
            position: from,
            arity: 0,
        });
    }
    check_occurrence(instance, c, from)?;
    check_occurrence(instance, c, to)?;
    if from == to {
        return Err(Error::DegenerateStep(from));
    }
    Ok(image(instance, c, from, to, set))
}

#[inline]
pub(crate) fn image(instance: &Instance, c: ConstraintId, from: usize, to: usize, set: DomainSet) -> DomainSet {
    let mut out = DomainSet::EMPTY;
    for t in instance.relation_of(c).tuples() {
        if set.contains(t[from]) && instance.respects_potatoes(c, t) {
            out.insert(t[to]);
        }
    }
    out
}

/// Order in which the AC worklist is seeded and constraints are revisited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessingOrder {
    pub variables: Vec<VarId>,
    pub constraints: Vec<ConstraintId>,
}

impl ProcessingOrder {
    pub fn declaration(instance: &Instance) -> Self {
        ProcessingOrder {
            variables: instance.var_ids().collect(),
            constraints: instance.constraint_ids().collect(),
        }
    }

    pub fn shuffled<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Self {
        let mut order = Self::declaration(instance);
        order.variables.shuffle(rng);
        order.constraints.shuffle(rng);
        order
    }
}

#[derive(Clone, Debug, Default)]
pub struct AcOptions {
    /// `None` means declaration order.
    pub order: Option<ProcessingOrder>,
    /// Return as soon as a potato empties instead of running to the fixpoint.
    pub stop_on_contradiction: bool,
}

#[derive(Clone, Debug)]
pub struct AcOutcome {
    pub potatoes: Vec<DomainSet>,
    pub contradiction: bool,
    pub trace: Trace,
    /// First fact with an empty set, if any.
    pub empty_fact: Option<FactId>,
}

/// Runs AC to its greatest fixpoint.
pub fn ac_fixpoint(instance: &Instance) -> AcOutcome {
    ac_fixpoint_with(instance, &AcOptions::default())
}

pub fn ac_fixpoint_with(instance: &Instance, opts: &AcOptions) -> AcOutcome {
    let n = instance.num_variables();
    let mut potatoes = instance.potatoes().to_vec();
    let mut trace = Trace::default();
    for v in instance.var_ids() {
        trace.push(
            Fact {
                variable: v,
                set: potatoes[v.0],
            },
            Justification::Potato,
        );
    }
    // trace ids of the potato facts coincide with variable indices
    let mut current: Vec<FactId> = (0..n).collect();
    let mut empty_fact = potatoes.iter().position(|p| p.is_empty());
    let done = |potatoes: Vec<DomainSet>, trace: Trace, empty_fact: Option<FactId>| AcOutcome {
        contradiction: empty_fact.is_some(),
        potatoes,
        trace,
        empty_fact,
    };
    if empty_fact.is_some() && opts.stop_on_contradiction {
        return done(potatoes, trace, empty_fact);
    }

    let (var_order, adjacency) = match &opts.order {
        None => (instance.var_ids().collect::<Vec<_>>(), None),
        Some(order) => {
            let mut rank = vec![0; instance.num_constraints()];
            for (r, c) in order.constraints.iter().enumerate() {
                rank[c.0] = r;
            }
            let adj: Vec<Vec<ConstraintId>> = instance
                .var_ids()
                .map(|v| {
                    let mut cs: Vec<ConstraintId> = instance.occurrences(v).iter().map(|o| o.constraint).collect();
                    cs.dedup();
                    cs.sort_by_key(|c| rank[c.0]);
                    cs
                })
                .collect();
            (order.variables.clone(), Some(adj))
        }
    };

    let mut queue: VecDeque<VarId> = var_order.into_iter().collect();
    let mut in_queue = vec![true; n];
    let mut supports: Vec<DomainSet> = Vec::new();
    let mut pre: Vec<FactId> = Vec::new();
    let mut constraints: Vec<ConstraintId> = Vec::new();

    while let Some(x) = queue.pop_front() {
        in_queue[x.0] = false;
        constraints.clear();
        match &adjacency {
            Some(adj) => constraints.extend_from_slice(&adj[x.0]),
            None => {
                constraints.extend(instance.occurrences(x).iter().map(|o| o.constraint));
                constraints.dedup();
            }
        }
        for &c in &constraints {
            let scope = &instance.constraint(c).scope;
            supports.clear();
            supports.resize(scope.len(), DomainSet::EMPTY);
            for t in instance.relation_of(c).tuples() {
                if scope.iter().zip(t).all(|(v, &a)| potatoes[v.0].contains(a)) {
                    for (s, &a) in supports.iter_mut().zip(t) {
                        s.insert(a);
                    }
                }
            }
            pre.clear();
            pre.extend(scope.iter().map(|v| current[v.0]));
            for (k, &v) in scope.iter().enumerate() {
                let new = potatoes[v.0] & supports[k];
                if new == potatoes[v.0] {
                    continue;
                }
                let mut sources = pre.clone();
                sources[k] = current[v.0];
                let id = trace.push(
                    Fact { variable: v, set: new },
                    Justification::Revision {
                        constraint: c,
                        position: k,
                        sources,
                    },
                );
                potatoes[v.0] = new;
                current[v.0] = id;
                if !in_queue[v.0] {
                    in_queue[v.0] = true;
                    queue.push_back(v);
                }
                if new.is_empty() && empty_fact.is_none() {
                    empty_fact = Some(id);
                    if opts.stop_on_contradiction {
                        return done(potatoes, trace, empty_fact);
                    }
                }
            }
        }
    }
    done(potatoes, trace, empty_fact)
}

#[derive(Clone, Debug)]
pub struct LacOutcome {
    /// The ⊆-minimal derived sets per variable, in derivation order.
    pub facts: Vec<Vec<DomainSet>>,
    pub contradiction: bool,
    pub trace: Trace,
    pub empty_fact: Option<FactId>,
}

impl LacOutcome {
    /// Intersection of the stored facts about `v`.
    pub fn strongest(&self, v: VarId, full: DomainSet) -> DomainSet {
        self.facts[v.0].iter().fold(full, |acc, &s| acc & s)
    }
}

struct LacState {
    stores: Vec<SmallVec<[(DomainSet, FactId); 2]>>,
    trace: Trace,
    queue: VecDeque<FactId>,
    empty: Option<FactId>,
}

impl LacState {
    /// Stores the fact unless a stored fact about the same variable is a
    /// subset of it; evicts stored strict supersets.
    fn insert(&mut self, fact: Fact, why: Justification, enqueue: bool) -> bool {
        let store = &mut self.stores[fact.variable.0];
        if store.iter().any(|(s, _)| s.is_subset(fact.set)) {
            return false;
        }
        store.retain(|(s, _)| !fact.set.is_subset(*s));
        let id = self.trace.push(fact, why);
        store.push((fact.set, id));
        if fact.set.is_empty() {
            self.empty = Some(id);
        } else if enqueue {
            self.queue.push_back(id);
        }
        true
    }
}

/// Closes `seeds`, the potato facts and the projection facts of every
/// constraint under single-fact propagation. Stops at the first empty fact.
///
/// Potato facts are stored but not propagated: stepping from the full potato
/// of a variable yields exactly a projection fact, which is already present.
pub fn lac_closure(instance: &Instance, seeds: &[Fact]) -> LacOutcome {
    let mut st = LacState {
        stores: vec![SmallVec::new(); instance.num_variables()],
        trace: Trace::default(),
        queue: VecDeque::new(),
        empty: None,
    };
    let finish = |st: LacState| LacOutcome {
        facts: st
            .stores
            .into_iter()
            .map(|s| s.into_iter().map(|(set, _)| set).collect())
            .collect(),
        contradiction: st.empty.is_some(),
        trace: st.trace,
        empty_fact: st.empty,
    };

    for &seed in seeds {
        st.insert(seed, Justification::Seed, true);
        if st.empty.is_some() {
            return finish(st);
        }
    }
    for v in instance.var_ids() {
        st.insert(
            Fact {
                variable: v,
                set: instance.potato(v),
            },
            Justification::Potato,
            false,
        );
        if st.empty.is_some() {
            return finish(st);
        }
    }
    let mut images: Vec<DomainSet> = Vec::new();
    for c in instance.constraint_ids() {
        let scope = &instance.constraint(c).scope;
        images.clear();
        images.resize(scope.len(), DomainSet::EMPTY);
        for t in instance.effective_tuples(c) {
            for (s, &a) in images.iter_mut().zip(t) {
                s.insert(a);
            }
        }
        for (position, (&v, &set)) in scope.iter().zip(&images).enumerate() {
            st.insert(
                Fact { variable: v, set },
                Justification::Projection {
                    constraint: c,
                    position,
                },
                true,
            );
            if st.empty.is_some() {
                return finish(st);
            }
        }
    }

    while let Some(id) = st.queue.pop_front() {
        let Fact { variable, set } = st.trace.entries[id].fact;
        if !st.stores[variable.0].iter().any(|&(_, f)| f == id) {
            // evicted by a smaller fact, which derives at least as much
            continue;
        }
        for occ in instance.occurrences(variable) {
            let c = occ.constraint;
            let scope = &instance.constraint(c).scope;
            images.clear();
            images.resize(scope.len(), DomainSet::EMPTY);
            for t in instance.relation_of(c).tuples() {
                if set.contains(t[occ.position]) && instance.respects_potatoes(c, t) {
                    for (s, &a) in images.iter_mut().zip(t) {
                        s.insert(a);
                    }
                }
            }
            for (to, (&v, &img)) in scope.iter().zip(&images).enumerate() {
                if to == occ.position {
                    continue;
                }
                st.insert(
                    Fact { variable: v, set: img },
                    Justification::Step {
                        constraint: c,
                        from: occ.position,
                        to,
                        source: id,
                    },
                    true,
                );
                if st.empty.is_some() {
                    return finish(st);
                }
            }
        }
    }
    finish(st)
}

/// Every effective relation projects exactly onto the potato of each of
/// its positions.
pub fn is_one_consistent(instance: &Instance) -> bool {
    instance.constraint_ids().all(|c| {
        instance
            .projections(c)
            .iter()
            .zip(&instance.constraint(c).scope)
            .all(|(p, &v)| *p == instance.potato(v))
    })
}

/// Runs AC and restricts the instance to the resulting potatoes.
pub fn one_consistent_subinstance(instance: &Instance) -> Result<Instance> {
    let out = ac_fixpoint_with(
        instance,
        &AcOptions {
            stop_on_contradiction: true,
            ..AcOptions::default()
        },
    );
    if out.contradiction {
        return Err(Error::Contradiction);
    }
    Ok(instance.restrict_unchecked(out.potatoes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Template;
    use std::sync::Arc;

    fn neq2() -> Arc<Template> {
        Arc::new(Template::new(2).unwrap().relation("neq", 2, [[0, 1], [1, 0]]).unwrap())
    }

    fn cycle(t: &Arc<Template>, n: usize) -> Instance {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut b = Instance::builder(t).variables(names.clone());
        for i in 0..n {
            b = b.constraint([names[i].clone(), names[(i + 1) % n].clone()], "neq");
        }
        b.build().unwrap()
    }

    fn edge(t: &Arc<Template>) -> Instance {
        Instance::builder(t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "neq")
            .build()
            .unwrap()
    }

    #[test]
    fn step_image_examples() {
        let t = neq2();
        let e = edge(&t);
        let c = ConstraintId(0);
        assert_eq!(
            step_image(&e, c, 0, 1, DomainSet::singleton(0)).unwrap(),
            DomainSet::singleton(1)
        );
        assert_eq!(step_image(&e, c, 0, 1, DomainSet::full(2)).unwrap(), DomainSet::full(2));
        assert_eq!(step_image(&e, c, 0, 1, DomainSet::EMPTY).unwrap(), DomainSet::EMPTY);
    }

    #[test]
    fn step_image_rejects_bad_occurrences() {
        let t = neq2();
        let e = edge(&t);
        assert!(matches!(
            step_image(&e, ConstraintId(0), 0, 2, DomainSet::full(2)),
            Err(Error::BadOccurrence { position: 2, .. })
        ));
        assert!(matches!(
            step_image(&e, ConstraintId(0), 1, 1, DomainSet::full(2)),
            Err(Error::DegenerateStep(1))
        ));
        assert!(step_image(&e, ConstraintId(3), 0, 1, DomainSet::full(2)).is_err());
    }

    #[test]
    fn ac_on_triangle_keeps_everything() {
        let t = neq2();
        let out = ac_fixpoint(&cycle(&t, 3));
        assert!(!out.contradiction);
        assert_eq!(out.potatoes, vec![DomainSet::full(2); 3]);
        // only the potato facts were recorded
        assert_eq!(out.trace.len(), 3);
    }

    #[test]
    fn ac_propagates_pinned_value() {
        let t = neq2();
        let inst = edge(&t).with_potato(VarId(1), DomainSet::singleton(1)).unwrap();
        let out = ac_fixpoint(&inst);
        assert!(!out.contradiction);
        assert_eq!(out.potatoes, vec![DomainSet::singleton(0), DomainSet::singleton(1)]);
    }

    #[test]
    fn ac_detects_empty_relation() {
        let t = Arc::new(
            Template::new(2)
                .unwrap()
                .relation("never", 2, Vec::<[u8; 2]>::new())
                .unwrap(),
        );
        let inst = Instance::builder(&t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "never")
            .build()
            .unwrap();
        let out = ac_fixpoint(&inst);
        assert!(out.contradiction);
        assert!(out.potatoes.iter().all(|p| p.is_empty()));
        let e = out.empty_fact.unwrap();
        assert!(out.trace.get(e).unwrap().fact.set.is_empty());
    }

    #[test]
    fn ac_repeated_variable_is_per_occurrence() {
        let t = neq2();
        let inst = Instance::builder(&t)
            .variables(["x"])
            .constraint(["x", "x"], "neq")
            .build()
            .unwrap();
        assert!(!ac_fixpoint(&inst).contradiction);
    }

    #[test]
    fn revision_sources_point_backwards() {
        let t = neq2();
        let inst = cycle(&t, 5).with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        let out = ac_fixpoint(&inst);
        assert!(out.contradiction);
        for (id, e) in out.trace.entries().iter().enumerate() {
            if let Justification::Revision { sources, .. } = &e.why {
                assert!(sources.iter().all(|&s| s < id));
            }
        }
    }

    #[test]
    fn lac_triangle_with_pinned_x() {
        let t = neq2();
        let inst = cycle(&t, 3).with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        let out = lac_closure(
            &inst,
            &[Fact {
                variable: VarId(0),
                set: DomainSet::singleton(0),
            }],
        );
        assert!(out.contradiction);
        let e = out.empty_fact.unwrap();
        assert!(out.trace.get(e).unwrap().fact.set.is_empty());
    }

    #[test]
    fn lac_even_cycle_with_pinned_x_is_consistent() {
        let t = neq2();
        let inst = cycle(&t, 4).with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        let out = lac_closure(
            &inst,
            &[Fact {
                variable: VarId(0),
                set: DomainSet::singleton(0),
            }],
        );
        assert!(!out.contradiction);
        assert_eq!(out.facts[2], vec![DomainSet::singleton(0)]);
        assert_eq!(out.facts[1], vec![DomainSet::singleton(1)]);
    }

    #[test]
    fn lac_store_is_an_antichain() {
        let t = neq2();
        let inst = cycle(&t, 6).with_potato(VarId(2), DomainSet::singleton(1)).unwrap();
        let out = lac_closure(&inst, &[]);
        for sets in &out.facts {
            for (i, a) in sets.iter().enumerate() {
                for (j, b) in sets.iter().enumerate() {
                    assert!(i == j || !a.is_subset(*b));
                }
            }
        }
    }

    #[test]
    fn one_consistent_examples() {
        let t = neq2();
        let t3 = cycle(&t, 3);
        assert_eq!(one_consistent_subinstance(&t3).unwrap(), t3);

        let e = edge(&t).with_potato(VarId(1), DomainSet::singleton(1)).unwrap();
        let oc = one_consistent_subinstance(&e).unwrap();
        assert_eq!(oc.potatoes(), &[DomainSet::singleton(0), DomainSet::singleton(1)]);
        assert!(is_one_consistent(&oc));
        assert_eq!(one_consistent_subinstance(&oc).unwrap(), oc);

        let odd = cycle(&t, 3).with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        assert!(matches!(one_consistent_subinstance(&odd), Err(Error::Contradiction)));
    }

    #[test]
    fn traces_are_deterministic() {
        let t = neq2();
        let inst = cycle(&t, 7).with_potato(VarId(3), DomainSet::singleton(1)).unwrap();
        let a = serde_json::to_string(&ac_fixpoint(&inst).trace).unwrap();
        let b = serde_json::to_string(&ac_fixpoint(&inst).trace).unwrap();
        assert_eq!(a, b);
        let seeds = [Fact {
            variable: VarId(0),
            set: DomainSet::singleton(0),
        }];
        let a = serde_json::to_string(&lac_closure(&inst, &seeds).trace).unwrap();
        let b = serde_json::to_string(&lac_closure(&inst, &seeds).trace).unwrap();
        assert_eq!(a, b);
    }
}

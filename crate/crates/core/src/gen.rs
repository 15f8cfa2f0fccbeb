//! Seeded random templates and instances for tests and benchmarks.
//!
//! All generators take an explicit RNG; use [`rng`] for a reproducible
//! ChaCha8 stream.

use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainSet, Value};
use crate::model::{Constraint, Instance, RelId, Relation, Template, VarId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct InstanceShape {
    pub variables: RangeInclusive<usize>,
    pub constraints: RangeInclusive<usize>,
    /// Allow the same variable twice in one scope.
    pub repeated_variables: bool,
    /// Probability that a variable gets a random non-empty potato.
    pub potato_probability: f64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            variables: 2..=6,
            constraints: 1..=8,
            repeated_variables: false,
            potato_probability: 0.0,
        }
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn random_potato<R: Rng + ?Sized>(rng: &mut R, full: DomainSet) -> DomainSet {
    loop {
        let s = DomainSet::from_bits(rng.gen::<u64>()) & full;
        if !s.is_empty() {
            return s;
        }
    }
}

fn potatoes<R: Rng + ?Sized>(rng: &mut R, template: &Template, n: usize, p: f64) -> Vec<DomainSet> {
    let full = template.full();
    (0..n)
        .map(|_| {
            if p > 0.0 && rng.gen_bool(p) {
                random_potato(rng, full)
            } else {
                full
            }
        })
        .collect()
}

fn scope<R: Rng + ?Sized>(rng: &mut R, arity: usize, n: usize, repeats: bool) -> Vec<VarId> {
    if repeats || arity > n {
        (0..arity).map(|_| VarId(rng.gen_range(0..n))).collect()
    } else {
        rand::seq::index::sample(rng, n, arity).into_iter().map(VarId).collect()
    }
}

/// Uniformly random relations and scopes.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, template: &Arc<Template>, shape: &InstanceShape) -> Instance {
    let n = rng.gen_range(shape.variables.clone()).max(1);
    let m = rng.gen_range(shape.constraints.clone());
    let rels: Vec<RelId> = template.relations().map(|(id, _, _)| id).collect();
    let constraints = (0..m)
        .map(|_| {
            let relation = *rels.choose(rng).expect("template has relations");
            let arity = template.get(relation).arity();
            Constraint {
                scope: scope(rng, arity, n, shape.repeated_variables),
                relation,
            }
        })
        .collect();
    let pots = potatoes(rng, template, n, shape.potato_probability);
    Instance::from_parts(Arc::clone(template), names(n), constraints, Some(pots)).expect("generated instance is valid")
}

/// An instance whose adjacency multigraph is a tree: every constraint joins
/// one existing variable with fresh ones. Unary constraints hang off a
/// single variable.
pub fn random_tree_instance<R: Rng + ?Sized>(
    rng: &mut R,
    template: &Arc<Template>,
    variables: usize,
    potato_probability: f64,
) -> Instance {
    let rels: Vec<RelId> = template.relations().map(|(id, _, _)| id).collect();
    let mut n = 1;
    let mut constraints = Vec::new();
    let mut attempts = 0;
    while n < variables || (constraints.is_empty() && attempts < 100) {
        attempts += 1;
        let relation = *rels.choose(rng).expect("template has relations");
        let arity = template.get(relation).arity();
        if n + arity - 1 > variables && arity > 1 {
            if attempts > 1000 {
                break;
            }
            continue;
        }
        let anchor = rng.gen_range(0..n);
        let at = rng.gen_range(0..arity);
        let mut s = Vec::with_capacity(arity);
        for k in 0..arity {
            if k == at {
                s.push(VarId(anchor));
            } else {
                s.push(VarId(n));
                n += 1;
            }
        }
        constraints.push(Constraint { scope: s, relation });
    }
    let pots = potatoes(rng, template, n, potato_probability);
    Instance::from_parts(Arc::clone(template), names(n), constraints, Some(pots)).expect("generated instance is valid")
}

/// A satisfiable instance: a hidden assignment is drawn first and every
/// constraint is re-drawn until the assignment satisfies it. Returns the
/// instance and the hidden assignment. Constraints the assignment can never
/// satisfy (no relation accepts it after many draws) are skipped.
pub fn planted_instance<R: Rng + ?Sized>(
    rng: &mut R,
    template: &Arc<Template>,
    variables: usize,
    constraints: usize,
) -> (Instance, Vec<Value>) {
    let n = variables.max(1);
    let d = template.domain_size();
    let hidden: Vec<Value> = (0..n).map(|_| rng.gen_range(0..d) as Value).collect();
    let rels: Vec<RelId> = template.relations().map(|(id, _, _)| id).collect();
    let mut out = Vec::with_capacity(constraints);
    let mut tuple = Vec::new();
    for _ in 0..constraints {
        for _ in 0..1000 {
            let relation = *rels.choose(rng).expect("template has relations");
            let s = scope(rng, template.get(relation).arity(), n, false);
            tuple.clear();
            tuple.extend(s.iter().map(|v| hidden[v.0]));
            if template.get(relation).contains(&tuple) {
                out.push(Constraint { scope: s, relation });
                break;
            }
        }
    }
    let inst = Instance::from_parts(Arc::clone(template), names(n), out, None).expect("generated instance is valid");
    (inst, hidden)
}

/// Random relations over `0..domain_size`; each tuple is kept with
/// probability `density`. Relations are named `r0, r1, ...`.
pub fn random_template<R: Rng + ?Sized>(
    rng: &mut R,
    domain_size: usize,
    relations: usize,
    arities: RangeInclusive<usize>,
    density: f64,
) -> Template {
    let mut t = Template::new(domain_size).expect("domain size in range");
    for i in 0..relations {
        let arity = rng.gen_range(arities.clone());
        let rel = Relation::from_predicate(domain_size, arity, |_| rng.gen_bool(density)).expect("relation");
        t.add_relation(format!("r{i}"), rel).expect("fresh name");
    }
    t
}

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use slac::gen::{self, InstanceShape};
use slac::{templates, DomainSet, Instance, Template, Value, VarId};

pub fn bundled() -> Vec<(&'static str, Arc<Template>)> {
    ["neq2", "neq3", "two_sat", "horn_sat", "z2_linear"]
        .into_iter()
        .map(|n| (n, Arc::new(templates::by_name(n).unwrap())))
        .collect()
}

pub fn small_shape() -> InstanceShape {
    InstanceShape {
        variables: 2..=6,
        constraints: 1..=8,
        repeated_variables: true,
        potato_probability: 0.3,
    }
}

/// Bundled templates plus random ones with `|A| <= max_domain`.
pub fn corpus(seed: u64, count: usize, max_domain: usize, shape: &InstanceShape) -> Vec<Instance> {
    let mut rng = gen::rng(seed);
    let fixed: Vec<Arc<Template>> = bundled()
        .into_iter()
        .map(|(_, t)| t)
        .filter(|t| t.domain_size() <= max_domain)
        .collect();
    (0..count)
        .map(|i| {
            let t = if i % 2 == 0 && !fixed.is_empty() {
                Arc::clone(&fixed[(i / 2) % fixed.len()])
            } else {
                let d = rng.gen_range(2..=max_domain);
                let rels = rng.gen_range(1..=3);
                Arc::new(gen::random_template(&mut rng, d, rels, 1..=3, 0.5))
            };
            gen::random_instance(&mut rng, &t, shape)
        })
        .collect()
}

pub fn triangle() -> Instance {
    let t = Arc::new(templates::neq2());
    Instance::builder(&t)
        .variables(["x", "y", "z"])
        .constraint(["x", "y"], "neq")
        .constraint(["y", "z"], "neq")
        .constraint(["z", "x"], "neq")
        .build()
        .unwrap()
}

/// Removed `(variable, value)` pairs; a contradiction removes everything.
pub fn removed(instance: &Instance, contradiction: bool, final_potatoes: &[DomainSet]) -> Vec<(VarId, Value)> {
    instance
        .var_ids()
        .flat_map(|v| {
            let kept = if contradiction {
                DomainSet::default()
            } else {
                final_potatoes[v.0]
            };
            (instance.potato(v) - kept).iter().map(move |a| (v, a))
        })
        .collect()
}

pub fn is_subset(a: &[(VarId, Value)], b: &[(VarId, Value)]) -> bool {
    a.iter().all(|p| b.contains(p))
}

/// `[{a} + p for a in A]`: determines `B + p` for every `B`.
pub type PathRelation = Vec<DomainSet>;

pub fn relation_of(instance: &Instance, p: &slac::PathPattern) -> PathRelation {
    (0..instance.domain_size())
        .map(|a| slac::propagate_path(instance, DomainSet::singleton(a as Value), p))
        .collect()
}

/// Every relation induced by a cycle at `x` with 1..=`max_steps` steps, with
/// one shortest representative each. Layered search over (variable,
/// relation) states, so it covers all cycles without listing them.
pub fn cycle_relations(
    instance: &Instance,
    x: VarId,
    max_steps: usize,
) -> std::collections::HashMap<PathRelation, slac::PathPattern> {
    use slac::patterns::Step;
    use std::collections::{HashMap, HashSet};

    let start: PathRelation = (0..instance.domain_size())
        .map(|a| DomainSet::singleton(a as Value) & instance.potato(x))
        .collect();
    let mut seen: HashSet<(VarId, PathRelation)> = HashSet::from([(x, start.clone())]);
    let mut frontier: Vec<(VarId, PathRelation, Vec<Step>)> = vec![(x, start, Vec::new())];
    let mut out = HashMap::new();
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for (u, rel, steps) in &frontier {
            for occ in instance.occurrences(*u) {
                let scope = &instance.constraint(occ.constraint).scope;
                for (end, &v) in scope.iter().enumerate() {
                    if end == occ.position {
                        continue;
                    }
                    let step = Step {
                        constraint: occ.constraint,
                        begin: occ.position,
                        end,
                    };
                    let moved: PathRelation = rel
                        .iter()
                        .map(|&s| slac::step_image(instance, step.constraint, step.begin, step.end, s).unwrap())
                        .collect();
                    let mut path = steps.clone();
                    path.push(step);
                    if v == x && !out.contains_key(&moved) {
                        let p = slac::PathPattern::new(instance, x, path.clone()).unwrap();
                        out.insert(moved.clone(), p);
                    }
                    if seen.insert((v, moved.clone())) {
                        next.push((v, moved, path));
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

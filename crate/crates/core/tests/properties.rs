mod common;

use std::sync::Arc;

use proptest::prelude::*;
use slac::oracle::{brute_solve, solution_values};
use slac::patterns::{enumerate_cycles, enumerate_paths, extract_witness, propagate_back};
use slac::propagate::Fact;
use slac::singleton::is_slac_stable;
use slac::{
    ac_fixpoint, lac_closure, one_consistent_subinstance, propagate_path, sac_fixpoint, slac_fixpoint, step_image,
    templates, DomainSet, Instance, VarId,
};

use common::{corpus, small_shape, triangle};

#[test]
fn engines_are_sound() {
    for inst in corpus(1, 300, 3, &small_shape()) {
        let sols = solution_values(&inst).unwrap();
        let sat = brute_solve(&inst).unwrap().is_some();
        let ac = ac_fixpoint(&inst);
        let sac = sac_fixpoint(&inst);
        let slac = slac_fixpoint(&inst);
        for (name, contradiction, pots) in [
            ("ac", ac.contradiction, &ac.potatoes),
            ("sac", sac.contradiction, &sac.final_potatoes),
            ("slac", slac.contradiction, &slac.final_potatoes),
        ] {
            if sat {
                assert!(!contradiction, "{name} refuted a satisfiable instance");
                assert!(
                    sols.iter().zip(pots).all(|(s, p)| s.is_subset(*p)),
                    "{name} removed a solution value"
                );
            }
        }
        let lac = lac_closure(&inst, &[]);
        if sat {
            assert!(!lac.contradiction);
        }
    }
}

#[test]
fn restriction_is_monotone() {
    for inst in corpus(2, 150, 3, &small_shape()) {
        let full = ac_fixpoint(&inst);
        let mut smaller = inst.potatoes().to_vec();
        smaller[0] = smaller[0].min().map(DomainSet::singleton).unwrap_or_default();
        let r = ac_fixpoint(&inst.restrict(&smaller).unwrap());
        if full.contradiction {
            assert!(r.contradiction);
        } else if !r.contradiction {
            assert!(r.potatoes.iter().zip(&full.potatoes).all(|(a, b)| a.is_subset(*b)));
        }
        let sl = slac_fixpoint(&inst);
        let sr = slac_fixpoint(&inst.restrict(&smaller).unwrap());
        assert!(!sl.contradiction || sr.contradiction);
    }
}

#[test]
fn fixpoints_are_idempotent() {
    for inst in corpus(3, 150, 3, &small_shape()) {
        let ac = ac_fixpoint(&inst);
        if !ac.contradiction {
            let again = ac_fixpoint(&inst.restrict(&ac.potatoes).unwrap());
            assert_eq!(again.potatoes, ac.potatoes);
        }
        let s = slac_fixpoint(&inst);
        if !s.contradiction {
            let again = slac_fixpoint(&inst.restrict(&s.final_potatoes).unwrap());
            assert!(again.removals.is_empty());
            let sub = one_consistent_subinstance(&inst.restrict(&s.final_potatoes).unwrap()).unwrap();
            assert!(is_slac_stable(&sub));
        }
    }
}

fn paths_by_brute(inst: &Instance, from: VarId, b: DomainSet, p: &slac::PathPattern) -> DomainSet {
    // Enumerate value sequences along the path directly from relation tuples.
    let mut cur: Vec<u8> = (b & inst.potato(from)).iter().collect();
    for s in p.steps() {
        let mut next = DomainSet::default();
        for tuple in inst.effective_tuples(s.constraint) {
            if cur.contains(&tuple[s.begin]) {
                next.insert(tuple[s.end]);
            }
        }
        cur = next.iter().collect();
    }
    cur.into_iter().collect()
}

#[test]
fn path_propagation_matches_tuple_walk() {
    for inst in corpus(4, 60, 3, &small_shape()) {
        let d = inst.domain_size();
        for x in inst.var_ids() {
            for p in enumerate_paths(&inst, x, 3).unwrap() {
                for b in DomainSet::all_subsets(d) {
                    assert_eq!(propagate_path(&inst, b, &p), paths_by_brute(&inst, x, b, &p));
                }
            }
        }
    }
}

#[test]
fn forward_and_backward_propagation_are_adjoint() {
    for inst in corpus(5, 60, 3, &small_shape()) {
        let d = inst.domain_size();
        for x in inst.var_ids() {
            for p in enumerate_paths(&inst, x, 3).unwrap() {
                for b in DomainSet::all_subsets(d) {
                    for c in DomainSet::all_subsets(d) {
                        let fwd = !(propagate_path(&inst, b, &p) & c).is_empty();
                        let back = !(propagate_back(&inst, c, &p) & b & inst.potato(x)).is_empty();
                        assert_eq!(fwd, back);
                    }
                }
            }
        }
    }
}

#[test]
fn lac_contradictions_have_path_witnesses() {
    for inst in corpus(6, 200, 3, &small_shape()) {
        for x in inst.var_ids() {
            for a in inst.potato(x).iter() {
                let seed = Fact {
                    variable: x,
                    set: DomainSet::singleton(a),
                };
                let r = lac_closure(&inst, &[seed]);
                let Some(id) = r.empty_fact else { continue };
                let w = extract_witness(&inst, &r.trace, id).unwrap();
                assert!(w.is_path());
                assert!(w.holds(&inst).unwrap());
            }
        }
    }
}

#[test]
fn enumerated_empty_paths_imply_lac_contradiction() {
    for inst in corpus(7, 80, 3, &small_shape()) {
        for x in inst.var_ids() {
            for a in inst.potato(x).iter() {
                let hit = enumerate_paths(&inst, x, 4)
                    .unwrap()
                    .any(|p| propagate_path(&inst, DomainSet::singleton(a), &p).is_empty());
                if hit {
                    let seed = Fact {
                        variable: x,
                        set: DomainSet::singleton(a),
                    };
                    assert!(lac_closure(&inst, &[seed]).contradiction);
                }
            }
        }
    }
}

#[test]
fn triangle_cycle_count_matches_closed_walks() {
    let inst = triangle();
    // Closed walks of length k at one corner of K3: (2^k + 2(-1)^k) / 3.
    let walks = |k: i64| (2i64.pow(k as u32) + 2 * (-1i64).pow(k as u32)) / 3;
    for max in 1..=6 {
        let expected: i64 = (1..=max).map(walks).sum();
        let got = enumerate_cycles(&inst, VarId(0), max as usize).unwrap().count() as i64;
        assert_eq!(got, expected, "max {max}");
    }
    assert_eq!(enumerate_cycles(&inst, VarId(0), 3).unwrap().count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn step_image_is_monotone(seed in 0u64..10_000, a in 0u64..8, b in 0u64..8) {
        let mut rng = slac::gen::rng(seed);
        let t = Arc::new(templates::neq3());
        let inst = slac::gen::random_instance(&mut rng, &t, &small_shape());
        let (small, big) = (DomainSet::from_bits(a & b), DomainSet::from_bits(a));
        for c in inst.constraint_ids() {
            let k = inst.constraint(c).scope.len();
            for from in 0..k {
                for to in 0..k {
                    if from == to { continue; }
                    let lo = step_image(&inst, c, from, to, small).unwrap();
                    let hi = step_image(&inst, c, from, to, big).unwrap();
                    prop_assert!(lo.is_subset(hi));
                }
            }
        }
    }
}

#[test]
fn cycle_relation_search_matches_enumeration() {
    use std::collections::HashSet;
    let shape = slac::gen::InstanceShape {
        variables: 2..=5,
        constraints: 1..=4,
        repeated_variables: true,
        potato_probability: 0.3,
    };
    for inst in corpus(8, 80, 3, &shape) {
        for x in inst.var_ids() {
            let listed: HashSet<_> = enumerate_cycles(&inst, x, 4)
                .unwrap()
                .map(|p| common::relation_of(&inst, &p))
                .collect();
            let searched = common::cycle_relations(&inst, x, 4);
            assert_eq!(listed, searched.keys().cloned().collect::<HashSet<_>>());
            for (rel, p) in &searched {
                assert_eq!(&common::relation_of(&inst, p), rel);
            }
        }
    }
}

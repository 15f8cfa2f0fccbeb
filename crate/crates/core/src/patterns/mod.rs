//! Path and tree patterns: propagation `B + p`, bounded universal covering
//! trees, pq checks and contradiction witnesses.
//!
//! A pattern is a small tree- or path-shaped instance equipped with a
//! homomorphism into a target instance. Every pattern constraint here is
//! represented by the target constraint it maps onto, with one fresh pattern
//! variable per position. Propagation through a pattern respects the
//! potatoes of the target along the homomorphism.

mod pq;
mod tree;
mod witness;

use crate::domain::DomainSet;
use crate::error::{Error, Result};
use crate::model::{ConstraintId, Instance, VarId};
use crate::propagate::image;

pub use pq::{pq_check, PqOutcome};
pub use tree::{
    default_uct_depth, propagate_tree, uct_unroll, TreeConstraint, TreePattern, MAX_UCT_DEPTH, MAX_UCT_NODES,
};
pub use witness::{
    extract_witness, extract_witness_with_budget, verify_certificate, Certificate, CertificateDoc, Origin, OriginDoc,
    PatternDoc, ProbeDoc, StepDoc, TreeConstraintDoc, VerifyReport, Witness, WitnessDoc, WitnessPattern,
    DEFAULT_WITNESS_BUDGET, WITNESS_FORMAT,
};

/// Longest path accepted by the enumerators.
pub const MAX_ENUMERATION_STEPS: usize = 10;

/// One constraint traversed from position `begin` to position `end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub constraint: ConstraintId,
    pub begin: usize,
    pub end: usize,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step {
            constraint: self.constraint,
            begin: self.end,
            end: self.begin,
        }
    }
}

/// A sequence of steps, each beginning where the previous one ended.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathPattern {
    start: VarId,
    end: VarId,
    steps: Vec<Step>,
}

impl PathPattern {
    pub fn empty(at: VarId) -> Self {
        PathPattern {
            start: at,
            end: at,
            steps: Vec::new(),
        }
    }

    /// Checks that every step is a valid occurrence pair of an instance
    /// constraint and that consecutive steps meet.
    pub fn new(instance: &Instance, start: VarId, steps: Vec<Step>) -> Result<Self> {
        if start.0 >= instance.num_variables() {
            return Err(Error::Pattern(format!("unknown start variable #{}", start.0)));
        }
        let mut at = start;
        for (i, s) in steps.iter().enumerate() {
            if s.constraint.0 >= instance.num_constraints() {
                return Err(Error::Pattern(format!(
                    "step {i}: unknown constraint #{}",
                    s.constraint.0
                )));
            }
            let scope = &instance.constraint(s.constraint).scope;
            if s.begin >= scope.len() || s.end >= scope.len() {
                return Err(Error::BadOccurrence {
                    constraint: s.constraint.0,
                    position: s.begin.max(s.end),
                    arity: scope.len(),
                });
            }
            if s.begin == s.end {
                return Err(Error::DegenerateStep(s.begin));
            }
            if scope[s.begin] != at {
                return Err(Error::Pattern(format!(
                    "step {i} begins at `{}` but the path is at `{}`",
                    instance.variable_name(scope[s.begin]),
                    instance.variable_name(at)
                )));
            }
            at = scope[s.end];
        }
        Ok(PathPattern { start, end: at, steps })
    }

    pub fn start(&self) -> VarId {
        self.start
    }

    pub fn end(&self) -> VarId {
        self.end
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_cycle(&self) -> bool {
        self.start == self.end
    }

    /// The first `k` steps.
    pub fn prefix(&self, instance: &Instance, k: usize) -> PathPattern {
        PathPattern::new(instance, self.start, self.steps[..k].to_vec()).expect("prefix of a valid path")
    }

    /// Steps `k..`.
    pub fn suffix(&self, instance: &Instance, k: usize) -> PathPattern {
        let start = if k == 0 {
            self.start
        } else {
            instance.constraint(self.steps[k - 1].constraint).scope[self.steps[k - 1].end]
        };
        PathPattern::new(instance, start, self.steps[k..].to_vec()).expect("suffix of a valid path")
    }

    /// `j` copies of the path back to back; the path must be a cycle.
    pub fn repeat(&self, j: usize) -> Result<PathPattern> {
        if j > 1 && !self.is_cycle() {
            return Err(Error::Pattern("only cycles can be repeated".into()));
        }
        Ok(PathPattern {
            start: self.start,
            end: if j == 0 { self.start } else { self.end },
            steps: self.steps.repeat(j),
        })
    }
}

/// `p + q`: identifies the end of `p` with the beginning of `q`.
pub fn concat(p: &PathPattern, q: &PathPattern) -> Result<PathPattern> {
    if p.end != q.start {
        return Err(Error::Pattern(format!(
            "cannot concatenate: first path ends at #{}, second starts at #{}",
            p.end.0, q.start.0
        )));
    }
    let mut steps = p.steps.clone();
    steps.extend_from_slice(&q.steps);
    Ok(PathPattern {
        start: p.start,
        end: q.end,
        steps,
    })
}

/// `-p`: the same steps walked backwards.
pub fn reverse(p: &PathPattern) -> PathPattern {
    PathPattern {
        start: p.end,
        end: p.start,
        steps: p.steps.iter().rev().map(|s| s.reversed()).collect(),
    }
}

/// `B + p`: end values of the solutions of `p` whose beginning lies in `B`.
pub fn propagate_path(instance: &Instance, set: DomainSet, p: &PathPattern) -> DomainSet {
    let mut cur = set & instance.potato(p.start);
    for s in &p.steps {
        if cur.is_empty() {
            break;
        }
        cur = image(instance, s.constraint, s.begin, s.end, cur);
    }
    cur
}

/// `B - p`, that is `B + (-p)`.
pub fn propagate_back(instance: &Instance, set: DomainSet, p: &PathPattern) -> DomainSet {
    propagate_path(instance, set, &reverse(p))
}

fn outgoing_steps(instance: &Instance) -> Vec<Vec<(Step, VarId)>> {
    instance
        .var_ids()
        .map(|v| {
            let mut out = Vec::new();
            for occ in instance.occurrences(v) {
                let scope = &instance.constraint(occ.constraint).scope;
                for (end, &w) in scope.iter().enumerate() {
                    if end != occ.position {
                        out.push((
                            Step {
                                constraint: occ.constraint,
                                begin: occ.position,
                                end,
                            },
                            w,
                        ));
                    }
                }
            }
            out
        })
        .collect()
}

/// Depth-first enumeration of all paths of 1..=max steps from a variable.
pub struct PathIter {
    outgoing: Vec<Vec<(Step, VarId)>>,
    start: VarId,
    max_steps: usize,
    steps: Vec<Step>,
    at: Vec<VarId>,
    cursor: Vec<usize>,
}

impl Iterator for PathIter {
    type Item = PathPattern;

    fn next(&mut self) -> Option<PathPattern> {
        loop {
            let depth = self.steps.len();
            let here = self.at[depth];
            let choices = &self.outgoing[here.0];
            if depth < self.max_steps && self.cursor[depth] < choices.len() {
                let (step, to) = choices[self.cursor[depth]];
                self.cursor[depth] += 1;
                self.steps.push(step);
                self.at.push(to);
                self.cursor.push(0);
                return Some(PathPattern {
                    start: self.start,
                    end: to,
                    steps: self.steps.clone(),
                });
            }
            if depth == 0 {
                return None;
            }
            self.steps.pop();
            self.at.pop();
            self.cursor.pop();
        }
    }
}

/// All path patterns with 1..=`max_steps` steps beginning at `from`, in a
/// deterministic depth-first order.
pub fn enumerate_paths(instance: &Instance, from: VarId, max_steps: usize) -> Result<PathIter> {
    if max_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::Pattern(format!(
            "max_steps {max_steps} exceeds the enumeration cap {MAX_ENUMERATION_STEPS}"
        )));
    }
    if from.0 >= instance.num_variables() {
        return Err(Error::Pattern(format!("unknown variable #{}", from.0)));
    }
    Ok(PathIter {
        outgoing: outgoing_steps(instance),
        start: from,
        max_steps,
        steps: Vec::new(),
        at: vec![from],
        cursor: vec![0],
    })
}

/// All cycles at `x` with 1..=`max_steps` steps.
pub fn enumerate_cycles(instance: &Instance, x: VarId, max_steps: usize) -> Result<impl Iterator<Item = PathPattern>> {
    Ok(enumerate_paths(instance, x, max_steps)?.filter(move |p| p.end == x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Template;
    use std::sync::Arc;

    fn neq2() -> Arc<Template> {
        Arc::new(Template::new(2).unwrap().relation("neq", 2, [[0, 1], [1, 0]]).unwrap())
    }

    fn triangle(t: &Arc<Template>) -> Instance {
        Instance::builder(t)
            .variables(["x", "y", "z"])
            .constraint(["x", "y"], "neq")
            .constraint(["y", "z"], "neq")
            .constraint(["z", "x"], "neq")
            .build()
            .unwrap()
    }

    fn step(c: usize, begin: usize, end: usize) -> Step {
        Step {
            constraint: ConstraintId(c),
            begin,
            end,
        }
    }

    fn around(t3: &Instance) -> PathPattern {
        PathPattern::new(t3, VarId(0), vec![step(0, 0, 1), step(1, 0, 1), step(2, 0, 1)]).unwrap()
    }

    #[test]
    fn path_validation() {
        let t = neq2();
        let t3 = triangle(&t);
        assert!(PathPattern::new(&t3, VarId(0), vec![step(1, 0, 1)]).is_err());
        assert!(PathPattern::new(&t3, VarId(0), vec![step(0, 0, 0)]).is_err());
        assert!(PathPattern::new(&t3, VarId(0), vec![step(0, 0, 2)]).is_err());
        let p = around(&t3);
        assert!(p.is_cycle());
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn concat_and_reverse() {
        let t = neq2();
        let t3 = triangle(&t);
        let p = around(&t3);
        let e = PathPattern::empty(VarId(0));
        assert_eq!(concat(&e, &p).unwrap(), p);
        assert_eq!(concat(&p, &e).unwrap(), p);
        assert_eq!(reverse(&reverse(&p)), p);

        let xy = PathPattern::new(&t3, VarId(0), vec![step(0, 0, 1)]).unwrap();
        let yz = PathPattern::new(&t3, VarId(1), vec![step(1, 0, 1)]).unwrap();
        let xz = concat(&xy, &yz).unwrap();
        assert_eq!((xz.start(), xz.end()), (VarId(0), VarId(2)));
        assert_eq!(xz.len(), xy.len() + yz.len());
        assert!(concat(&yz, &xy).is_err());
    }

    #[test]
    fn propagation_examples() {
        let t = neq2();
        let t3 = triangle(&t);
        let xy = PathPattern::new(&t3, VarId(0), vec![step(0, 0, 1)]).unwrap();
        assert_eq!(
            propagate_path(&t3, DomainSet::singleton(0), &xy),
            DomainSet::singleton(1)
        );
        assert_eq!(
            propagate_path(&t3, DomainSet::singleton(0), &around(&t3)),
            DomainSet::singleton(1)
        );
        assert_eq!(propagate_path(&t3, DomainSet::EMPTY, &around(&t3)), DomainSet::EMPTY);
        assert_eq!(
            propagate_back(&t3, DomainSet::singleton(1), &xy),
            DomainSet::singleton(0)
        );
    }

    #[test]
    fn cycles_of_triangle() {
        let t = neq2();
        let t3 = triangle(&t);
        let cycles: Vec<_> = enumerate_cycles(&t3, VarId(0), 3).unwrap().collect();
        assert!(cycles.contains(&around(&t3)));
        assert!(cycles.iter().all(|c| c.is_cycle() && c.start() == VarId(0)));
    }

    #[test]
    fn back_and_forth_cycle() {
        let t = neq2();
        let e = Instance::builder(&t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "neq")
            .build()
            .unwrap();
        let cycles: Vec<_> = enumerate_cycles(&e, VarId(0), 2).unwrap().collect();
        let bf = PathPattern::new(&e, VarId(0), vec![step(0, 0, 1), step(0, 1, 0)]).unwrap();
        assert_eq!(cycles, vec![bf]);
    }

    #[test]
    fn enumeration_cap() {
        let t = neq2();
        let t3 = triangle(&t);
        assert!(enumerate_paths(&t3, VarId(0), 11).is_err());
        assert!(enumerate_paths(&t3, VarId(0), 10).is_ok());
        assert_eq!(enumerate_paths(&t3, VarId(0), 0).unwrap().count(), 0);
    }

    #[test]
    fn prefix_suffix_split() {
        let t = neq2();
        let t3 = triangle(&t);
        let p = around(&t3);
        for k in 0..=p.len() {
            assert_eq!(concat(&p.prefix(&t3, k), &p.suffix(&t3, k)).unwrap(), p);
        }
    }
}

use crate::domain::{DomainSet, Value};
use crate::error::{Error, Result};
use crate::model::{Instance, VarId};

use super::{concat, propagate_path, PathPattern};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PqOutcome {
    /// The sequence stabilises (period one) at a set `A'` with `a ∈ A'` and
    /// `A' + p = A'`.
    pub passes: bool,
    /// First index of the limit cycle of `A_0 = {a}, A_{k+1} = A_k + (p+q)`.
    pub j: usize,
    /// `A_j`.
    pub stabilized: DomainSet,
    /// Length of the limit cycle; 1 when the sequence stabilises.
    pub period: usize,
    /// Some `j` with `a ∈ {a} + j(p+q) + p`, searched over the transient
    /// part and one full limit cycle.
    pub witness_j: Option<usize>,
}

/// Iterates `A_{k+1} = A_k + (p+q)` from `{a}` until a set repeats.
pub fn pq_check(instance: &Instance, x: VarId, a: Value, p: &PathPattern, q: &PathPattern) -> Result<PqOutcome> {
    for (name, c) in [("p", p), ("q", q)] {
        if c.start() != x || c.end() != x {
            return Err(Error::Pattern(format!(
                "{name} is not a cycle at `{}`",
                instance.variable_name(x)
            )));
        }
    }
    let pq = concat(p, q)?;
    let mut seq = vec![DomainSet::singleton(a)];
    let (j, period) = loop {
        let next = propagate_path(instance, *seq.last().expect("non-empty"), &pq);
        if let Some(l) = seq.iter().position(|&s| s == next) {
            break (l, seq.len() - l);
        }
        seq.push(next);
    };
    let stabilized = seq[j];
    let passes = period == 1 && stabilized.contains(a) && propagate_path(instance, stabilized, p) == stabilized;
    let witness_j = seq.iter().position(|&s| propagate_path(instance, s, p).contains(a));
    Ok(PqOutcome {
        passes,
        j,
        stabilized,
        period,
        witness_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintId, Template};
    use crate::patterns::Step;
    use std::sync::Arc;

    fn neq2() -> Arc<Template> {
        Arc::new(Template::new(2).unwrap().relation("neq", 2, [[0, 1], [1, 0]]).unwrap())
    }

    fn ring(t: &Arc<Template>, n: usize) -> (Instance, PathPattern) {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut b = Instance::builder(t).variables(names.clone());
        for i in 0..n {
            b = b.constraint([names[i].clone(), names[(i + 1) % n].clone()], "neq");
        }
        let inst = b.build().unwrap();
        let steps = (0..n)
            .map(|i| Step {
                constraint: ConstraintId(i),
                begin: 0,
                end: 1,
            })
            .collect();
        let p = PathPattern::new(&inst, VarId(0), steps).unwrap();
        (inst, p)
    }

    #[test]
    fn even_cycle_passes() {
        let t = neq2();
        let (c4, p) = ring(&t, 4);
        let out = pq_check(&c4, VarId(0), 0, &p, &p).unwrap();
        assert!(out.passes);
        assert_eq!((out.j, out.period), (0, 1));
        assert_eq!(out.stabilized, DomainSet::singleton(0));
        assert_eq!(out.witness_j, Some(0));
    }

    #[test]
    fn triangle_fails() {
        let t = neq2();
        let (t3, p) = ring(&t, 3);
        let out = pq_check(&t3, VarId(0), 0, &p, &p).unwrap();
        assert!(!out.passes);
        // {0} + (p+p) = {0}: stable, but {0} + p = {1}
        assert_eq!(out.stabilized, DomainSet::singleton(0));
        assert_eq!(out.witness_j, None);
    }

    #[test]
    fn rejects_non_cycles() {
        let t = neq2();
        let (t3, _) = ring(&t, 3);
        let open = PathPattern::new(
            &t3,
            VarId(0),
            vec![Step {
                constraint: ConstraintId(0),
                begin: 0,
                end: 1,
            }],
        )
        .unwrap();
        assert!(pq_check(&t3, VarId(0), 0, &open, &open).is_err());
    }
}

//! Contradiction witnesses and certificates.
//!
//! A witness is a pattern together with the potatoes it was evaluated
//! under (`context`) and an optional probe `(x, a)`, which replaces the
//! potato of `x` by `{a}`. Propagating through the pattern yields `∅`, so
//! no solution respecting `context` sends `x` to `a` (or, without a probe,
//! the instance restricted to `context` has no solution).
//!
//! A certificate is a list of witnesses replayed in order: each probe
//! witness removes its value, and the certificate proves unsatisfiability
//! once a potato empties or a probe-free witness closes the case.
//!
//! JSON layout (names, never indices, refer to variables and relations):
//!
//! ```json
//! { "format": "slac-witness/1", "method": "slac",
//!   "witnesses": [ {
//!     "context": { "x": [0, 1], "y": [0, 1], "z": [0, 1] },
//!     "probe": { "variable": "x", "value": 0 },
//!     "pattern": { "kind": "path", "origin": { "kind": "potato" }, "start": "x",
//!                  "steps": [ { "relation": "neq", "scope": ["x", "y"], "begin": 0, "end": 1 } ] },
//!     "truncated": false } ] }
//! ```
//!
//! Tree patterns list their variables by image, constraints by relation and
//! indices into that list, and carry a `seed` set for the leaves.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{propagate_path, propagate_tree, PathPattern, Step, TreeConstraint, TreePattern};
use crate::domain::{DomainSet, Value};
use crate::error::{Error, Result};
use crate::model::{ConstraintId, Instance, ValueDoc, VarId};
use crate::propagate::{FactId, Justification, Trace};

pub const WITNESS_FORMAT: &str = "slac-witness/1";
/// Node budget for unfolding AC traces into trees.
pub const DEFAULT_WITNESS_BUDGET: usize = 10_000;

/// Where a path witness starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// The potato of the start variable.
    Potato,
    /// An explicit set at the start variable.
    Seed(DomainSet),
    /// The effective relation of a unary constraint on the start variable.
    Unary(ConstraintId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessPattern {
    Path { origin: Origin, path: PathPattern },
    Tree { seed: DomainSet, tree: TreePattern },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub context: Vec<DomainSet>,
    pub probe: Option<(VarId, Value)>,
    pub pattern: WitnessPattern,
    /// The tree was cut at the node budget and may not propagate to `∅`.
    pub truncated: bool,
}

impl Witness {
    /// `context` with the probe applied.
    pub fn effective_potatoes(&self) -> Vec<DomainSet> {
        let mut p = self.context.clone();
        if let Some((x, a)) = self.probe {
            p[x.0] &= DomainSet::singleton(a);
        }
        p
    }

    /// Attaches a probe: the witness was found on `context` restricted by
    /// `x = a`.
    pub fn with_probe(mut self, context: Vec<DomainSet>, x: VarId, a: Value) -> Witness {
        self.context = context;
        self.probe = Some((x, a));
        self
    }

    pub fn is_path(&self) -> bool {
        matches!(self.pattern, WitnessPattern::Path { .. })
    }

    pub fn path(&self) -> Option<&PathPattern> {
        match &self.pattern {
            WitnessPattern::Path { path, .. } => Some(path),
            WitnessPattern::Tree { .. } => None,
        }
    }

    /// Evaluates the pattern under the effective potatoes.
    pub fn propagate(&self, instance: &Instance) -> Result<DomainSet> {
        if self.context.len() != instance.num_variables() {
            return Err(Error::Pattern("witness context does not match the instance".into()));
        }
        let ctx = instance.restrict_unchecked(self.effective_potatoes());
        Ok(match &self.pattern {
            WitnessPattern::Path { origin, path } => {
                let start = match origin {
                    Origin::Potato => ctx.potato(path.start()),
                    Origin::Seed(s) => *s,
                    Origin::Unary(c) => ctx.projections(*c)[0],
                };
                propagate_path(&ctx, start, path)
            }
            WitnessPattern::Tree { seed, tree } => {
                tree.validate(instance)?;
                propagate_tree(&ctx, *seed, tree)
            }
        })
    }

    /// Context within the instance potatoes and propagation to `∅`.
    pub fn holds(&self, instance: &Instance) -> Result<bool> {
        let within = self.context.len() == instance.num_variables()
            && instance
                .potatoes()
                .iter()
                .zip(&self.context)
                .all(|(p, c)| p.is_subset(*c));
        Ok(within && self.propagate(instance)?.is_empty())
    }

    pub fn to_doc(&self, instance: &Instance) -> WitnessDoc {
        let t = instance.template();
        let set_doc = |s: DomainSet| s.iter().map(|a| ValueDoc::for_value(t, a)).collect::<Vec<_>>();
        let var = |v: VarId| instance.variable_name(v).to_string();
        let context = instance
            .var_ids()
            .map(|v| (var(v), set_doc(self.context[v.0])))
            .collect();
        let probe = self.probe.map(|(x, a)| ProbeDoc {
            variable: var(x),
            value: ValueDoc::for_value(t, a),
        });
        let pattern = match &self.pattern {
            WitnessPattern::Path { origin, path } => PatternDoc::Path {
                origin: match origin {
                    Origin::Potato => OriginDoc::Potato,
                    Origin::Seed(s) => OriginDoc::Seed { values: set_doc(*s) },
                    Origin::Unary(c) => {
                        let con = instance.constraint(*c);
                        OriginDoc::Unary {
                            relation: t.relation_name(con.relation).to_string(),
                            variable: var(con.scope[0]),
                        }
                    }
                },
                start: var(path.start()),
                steps: path
                    .steps()
                    .iter()
                    .map(|s| {
                        let con = instance.constraint(s.constraint);
                        StepDoc {
                            relation: t.relation_name(con.relation).to_string(),
                            scope: con.scope.iter().map(|&v| var(v)).collect(),
                            begin: s.begin,
                            end: s.end,
                        }
                    })
                    .collect(),
            },
            WitnessPattern::Tree { seed, tree } => PatternDoc::Tree {
                seed: set_doc(*seed),
                variables: tree.images().iter().map(|&v| var(v)).collect(),
                root: tree.root(),
                leaves: tree.leaves().to_vec(),
                constraints: tree
                    .constraints()
                    .iter()
                    .map(|tc| TreeConstraintDoc {
                        relation: t.relation_name(instance.constraint(tc.constraint).relation).to_string(),
                        scope: tc.scope.clone(),
                    })
                    .collect(),
            },
        };
        WitnessDoc {
            context,
            probe,
            pattern,
            truncated: self.truncated,
        }
    }
}

/// Rebuilds the pattern behind the empty fact `failing` of an engine trace.
///
/// LAC traces (single-fact steps) give path patterns; AC traces (revisions)
/// are unfolded into tree patterns, cut at [`DEFAULT_WITNESS_BUDGET`] nodes.
/// `instance` is the one the engine ran on; it becomes the context.
pub fn extract_witness(instance: &Instance, trace: &Trace, failing: FactId) -> Result<Witness> {
    extract_witness_with_budget(instance, trace, failing, DEFAULT_WITNESS_BUDGET)
}

pub fn extract_witness_with_budget(
    instance: &Instance,
    trace: &Trace,
    failing: FactId,
    budget: usize,
) -> Result<Witness> {
    let entry = trace
        .get(failing)
        .ok_or_else(|| Error::Pattern(format!("fact {failing} is not in the trace")))?;
    if !entry.fact.set.is_empty() {
        return Err(Error::Pattern(format!("fact {failing} is not an empty fact")));
    }
    let (pattern, truncated) = match entry.why {
        Justification::Revision { .. } => {
            let (tree, truncated) = unfold_tree(instance, trace, failing, budget)?;
            (
                WitnessPattern::Tree {
                    seed: instance.template().full(),
                    tree,
                },
                truncated,
            )
        }
        _ => (replay_path(instance, trace, failing)?, false),
    };
    Ok(Witness {
        context: instance.potatoes().to_vec(),
        probe: None,
        pattern,
        truncated,
    })
}

fn replay_path(instance: &Instance, trace: &Trace, failing: FactId) -> Result<WitnessPattern> {
    let mut steps = Vec::new();
    let mut id = failing;
    let (origin, start) = loop {
        let e = &trace.entries()[id];
        match &e.why {
            Justification::Step {
                constraint,
                from,
                to,
                source,
            } => {
                steps.push(Step {
                    constraint: *constraint,
                    begin: *from,
                    end: *to,
                });
                id = *source;
            }
            Justification::Seed => {
                let v = e.fact.variable;
                let origin = if e.fact.set == instance.potato(v) {
                    Origin::Potato
                } else {
                    Origin::Seed(e.fact.set)
                };
                break (origin, v);
            }
            Justification::Potato => break (Origin::Potato, e.fact.variable),
            Justification::Projection { constraint, position } => {
                let scope = &instance.constraint(*constraint).scope;
                if scope.len() == 1 {
                    break (Origin::Unary(*constraint), scope[0]);
                }
                let begin = usize::from(*position == 0);
                steps.push(Step {
                    constraint: *constraint,
                    begin,
                    end: *position,
                });
                break (Origin::Potato, scope[begin]);
            }
            Justification::Revision { .. } => {
                return Err(Error::Pattern("revision inside a single-fact derivation".into()))
            }
        }
    };
    steps.reverse();
    Ok(WitnessPattern::Path {
        origin,
        path: PathPattern::new(instance, start, steps)?,
    })
}

fn unfold_tree(instance: &Instance, trace: &Trace, failing: FactId, budget: usize) -> Result<(TreePattern, bool)> {
    let mut images = vec![trace.entries()[failing].fact.variable];
    let mut constraints: Vec<TreeConstraint> = Vec::new();
    let mut work = vec![(0usize, failing)];
    let mut truncated = false;
    while let Some((u, mut f)) = work.pop() {
        loop {
            match &trace.entries()[f].why {
                Justification::Revision {
                    constraint,
                    position,
                    sources,
                } => {
                    let scope = &instance.constraint(*constraint).scope;
                    if images.len() + constraints.len() + scope.len() > budget {
                        truncated = true;
                        break;
                    }
                    let mut tscope = Vec::with_capacity(scope.len());
                    for (j, &w) in scope.iter().enumerate() {
                        if j == *position {
                            tscope.push(u);
                        } else {
                            tscope.push(images.len());
                            work.push((images.len(), sources[j]));
                            images.push(w);
                        }
                    }
                    constraints.push(TreeConstraint {
                        constraint: *constraint,
                        scope: tscope,
                    });
                    f = sources[*position];
                }
                Justification::Potato => break,
                _ => return Err(Error::Pattern("unexpected justification in an AC trace".into())),
            }
        }
    }
    let mut tree = TreePattern::new(images, constraints, 0, Vec::new());
    let deg = tree.degrees();
    let leaves = (1..tree.num_variables()).filter(|&u| deg[u] == 1).collect();
    tree = TreePattern::new(tree.images().to_vec(), tree.constraints().to_vec(), 0, leaves);
    Ok((tree, truncated))
}

/// Witnesses in replay order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub method: String,
    pub witnesses: Vec<Witness>,
}

impl Certificate {
    pub fn to_doc(&self, instance: &Instance) -> CertificateDoc {
        CertificateDoc {
            format: WITNESS_FORMAT.to_string(),
            method: self.method.clone(),
            witnesses: self.witnesses.iter().map(|w| w.to_doc(instance)).collect(),
        }
    }

    pub fn to_json(&self, instance: &Instance) -> String {
        serde_json::to_string_pretty(&self.to_doc(instance)).expect("serializable")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub format: String,
    pub method: String,
    pub witnesses: Vec<WitnessDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub context: BTreeMap<String, Vec<ValueDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeDoc>,
    pub pattern: PatternDoc,
    #[serde(default)]
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeDoc {
    pub variable: String,
    pub value: ValueDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternDoc {
    Path {
        origin: OriginDoc,
        start: String,
        steps: Vec<StepDoc>,
    },
    Tree {
        seed: Vec<ValueDoc>,
        variables: Vec<String>,
        root: usize,
        leaves: Vec<usize>,
        constraints: Vec<TreeConstraintDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OriginDoc {
    Potato,
    Seed { values: Vec<ValueDoc> },
    Unary { relation: String, variable: String },
}

/// A constraint of the instance (named by relation and scope) crossed from
/// position `begin` to position `end`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub relation: String,
    pub scope: Vec<String>,
    pub begin: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConstraintDoc {
    pub relation: String,
    pub scope: Vec<usize>,
}

/// Outcome of a successful certificate replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub witnesses: usize,
    /// `(variable, value)` pairs excluded by the certificate, in order.
    pub removals: Vec<(String, Value)>,
    /// The certificate proves that the instance has no solution.
    pub unsat: bool,
}

// The replay below deliberately re-implements propagation from the
// documents alone instead of calling the engines it is meant to check.
struct Checker<'a> {
    instance: &'a Instance,
    constraints: HashSet<(String, Vec<String>)>,
}

impl<'a> Checker<'a> {
    fn new(instance: &'a Instance) -> Self {
        let t = instance.template();
        let constraints = instance
            .constraints()
            .iter()
            .map(|c| {
                (
                    t.relation_name(c.relation).to_string(),
                    c.scope.iter().map(|&v| instance.variable_name(v).to_string()).collect(),
                )
            })
            .collect();
        Checker { instance, constraints }
    }

    fn var(&self, name: &str) -> Result<usize, String> {
        self.instance
            .variable_id(name)
            .map(|v| v.0)
            .ok_or_else(|| format!("unknown variable `{name}`"))
    }

    fn set(&self, values: &[ValueDoc]) -> Result<DomainSet, String> {
        values
            .iter()
            .map(|v| {
                v.resolve(self.instance.template())
                    .ok_or_else(|| format!("value `{v}` is outside the domain"))
            })
            .collect()
    }

    fn relation(&self, name: &str, scope: &[String]) -> Result<&'a crate::model::Relation, String> {
        if !self.constraints.contains(&(name.to_string(), scope.to_vec())) {
            return Err(format!("no constraint {name}({}) in the instance", scope.join(",")));
        }
        let t = self.instance.template();
        Ok(t.get(t.relation_id(name).expect("constraint relations exist")))
    }

    /// Values at `target` over the tuples of `rel` whose entry at every
    /// position `k` lies in `allowed[k]`.
    fn support(rel: &crate::model::Relation, allowed: &[DomainSet], target: usize) -> DomainSet {
        let mut out = DomainSet::EMPTY;
        for t in rel.tuples() {
            if t.iter().zip(allowed).all(|(&a, s)| s.contains(a)) {
                out.insert(t[target]);
            }
        }
        out
    }

    fn path(
        &self,
        pots: &[DomainSet],
        origin: &OriginDoc,
        start: &str,
        steps: &[StepDoc],
    ) -> Result<DomainSet, String> {
        let s = self.var(start)?;
        let mut cur = match origin {
            OriginDoc::Potato => pots[s],
            OriginDoc::Seed { values } => self.set(values)? & pots[s],
            OriginDoc::Unary { relation, variable } => {
                if variable != start {
                    return Err("unary origin is not on the start variable".into());
                }
                let rel = self.relation(relation, std::slice::from_ref(variable))?;
                Self::support(rel, &[pots[s]], 0)
            }
        };
        let mut at = start.to_string();
        for (i, st) in steps.iter().enumerate() {
            let rel = self.relation(&st.relation, &st.scope)?;
            if st.begin >= st.scope.len() || st.end >= st.scope.len() || st.begin == st.end {
                return Err(format!("step {i}: bad positions {} -> {}", st.begin, st.end));
            }
            if st.scope[st.begin] != at {
                return Err(format!("step {i} does not begin at `{at}`"));
            }
            let mut allowed = Vec::with_capacity(st.scope.len());
            for v in &st.scope {
                allowed.push(pots[self.var(v)?]);
            }
            allowed[st.begin] &= cur;
            cur = Self::support(rel, &allowed, st.end);
            at = st.scope[st.end].clone();
        }
        Ok(cur)
    }

    fn tree(
        &self,
        pots: &[DomainSet],
        seed: DomainSet,
        variables: &[String],
        root: usize,
        leaves: &[usize],
        constraints: &[TreeConstraintDoc],
    ) -> Result<DomainSet, String> {
        let n = variables.len();
        if root >= n {
            return Err("root out of range".into());
        }
        let mut image = Vec::with_capacity(n);
        for v in variables {
            image.push(self.var(v)?);
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut edges = 0;
        for (i, c) in constraints.iter().enumerate() {
            let names: Vec<String> = c
                .scope
                .iter()
                .map(|&u| {
                    variables
                        .get(u)
                        .cloned()
                        .ok_or_else(|| format!("tree constraint {i}: index {u} out of range"))
                })
                .collect::<Result<_, _>>()?;
            self.relation(&c.relation, &names)?;
            for (k, &u) in c.scope.iter().enumerate() {
                if c.scope[..k].contains(&u) {
                    return Err(format!("tree constraint {i} repeats a variable"));
                }
                adj[u].push((i, k));
                edges += 1;
            }
        }
        if edges + 1 != n + constraints.len() {
            return Err("pattern is not a tree".into());
        }
        for &l in leaves {
            if l >= n || adj[l].len() != 1 {
                return Err(format!("leaf {l} does not have degree one"));
            }
            if !pots[image[l]].is_subset(seed) {
                return Err(format!(
                    "leaf {l}: seed does not cover the potato of `{}`",
                    variables[l]
                ));
            }
        }
        let mut parent = vec![usize::MAX; n];
        let mut seen_var = vec![false; n];
        let mut seen_con = vec![false; constraints.len()];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen_var[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(i, _) in &adj[u] {
                if seen_con[i] {
                    continue;
                }
                seen_con[i] = true;
                for &w in &constraints[i].scope {
                    if !seen_var[w] {
                        seen_var[w] = true;
                        parent[w] = i;
                        queue.push_back(w);
                    }
                }
            }
        }
        if order.len() != n || seen_con.iter().any(|&s| !s) {
            return Err("pattern is not connected".into());
        }
        let mut value = vec![DomainSet::EMPTY; n];
        for &u in order.iter().rev() {
            let mut cur = pots[image[u]];
            if leaves.contains(&u) {
                cur &= seed;
            }
            for &(i, k) in &adj[u] {
                if parent[u] == i {
                    continue;
                }
                let c = &constraints[i];
                let t = self.instance.template();
                let rel = t.get(t.relation_id(&c.relation).expect("checked"));
                let allowed: Vec<DomainSet> = c
                    .scope
                    .iter()
                    .map(|&w| {
                        if w == u {
                            pots[image[w]]
                        } else {
                            value[w] & pots[image[w]]
                        }
                    })
                    .collect();
                cur &= Self::support(rel, &allowed, k);
            }
            value[u] = cur;
        }
        Ok(value[root])
    }
}

/// Replays a certificate against `instance` without using the engines.
/// `Err` carries the reason the certificate is rejected.
pub fn verify_certificate(instance: &Instance, doc: &CertificateDoc) -> Result<VerifyReport> {
    verify(instance, doc).map_err(Error::Pattern)
}

fn verify(instance: &Instance, doc: &CertificateDoc) -> Result<VerifyReport, String> {
    if doc.format != WITNESS_FORMAT {
        return Err(format!("unsupported format `{}`", doc.format));
    }
    let chk = Checker::new(instance);
    let full = instance.template().full();
    let mut pots = instance.potatoes().to_vec();
    let mut removals = Vec::new();
    let mut unsat = pots.iter().any(|p| p.is_empty());
    for (i, w) in doc.witnesses.iter().enumerate() {
        let fail = |m: String| format!("witness {i}: {m}");
        if unsat {
            break;
        }
        let mut ctx = vec![full; pots.len()];
        for (name, values) in &w.context {
            ctx[chk.var(name).map_err(fail)?] = chk.set(values).map_err(fail)?;
        }
        if let Some(v) = pots.iter().zip(&ctx).position(|(p, c)| !p.is_subset(*c)) {
            return Err(fail(format!(
                "context for `{}` is narrower than what earlier witnesses established",
                instance.variable_name(VarId(v))
            )));
        }
        let probe = match &w.probe {
            Some(p) => {
                let x = chk.var(&p.variable).map_err(fail)?;
                let a = p
                    .value
                    .resolve(instance.template())
                    .ok_or_else(|| fail(format!("probe value `{}` is outside the domain", p.value)))?;
                ctx[x] &= DomainSet::singleton(a);
                Some((x, a))
            }
            None => None,
        };
        let result = match &w.pattern {
            PatternDoc::Path { origin, start, steps } => {
                if let OriginDoc::Seed { values } = origin {
                    if probe.is_some() {
                        let s = chk.set(values).map_err(fail)?;
                        let at = chk.var(start).map_err(fail)?;
                        if !ctx[at].is_subset(s) {
                            return Err(fail("seed does not cover the probed potato".into()));
                        }
                    }
                }
                chk.path(&ctx, origin, start, steps).map_err(fail)?
            }
            PatternDoc::Tree {
                seed,
                variables,
                root,
                leaves,
                constraints,
            } => {
                let seed = chk.set(seed).map_err(fail)?;
                chk.tree(&ctx, seed, variables, *root, leaves, constraints)
                    .map_err(fail)?
            }
        };
        if !result.is_empty() {
            return Err(fail(format!("propagation ends in {result}, not the empty set")));
        }
        match (probe, &w.pattern) {
            (Some((x, a)), _) => {
                if pots[x].contains(a) {
                    pots[x].remove(a);
                    removals.push((instance.variable_name(VarId(x)).to_string(), a));
                }
                unsat = pots[x].is_empty();
            }
            (
                None,
                PatternDoc::Path {
                    origin: OriginDoc::Seed { values },
                    start,
                    ..
                },
            ) => {
                let at = chk.var(start).map_err(fail)?;
                let s = chk.set(values).map_err(fail)?;
                for a in pots[at] & s {
                    removals.push((start.clone(), a));
                }
                pots[at] = pots[at] - s;
                unsat = pots[at].is_empty();
            }
            (None, _) => unsat = true,
        }
    }
    Ok(VerifyReport {
        witnesses: doc.witnesses.len(),
        removals,
        unsat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Template;
    use crate::propagate::{ac_fixpoint, lac_closure, Fact};
    use std::sync::Arc;

    fn neq2() -> Arc<Template> {
        Arc::new(
            Template::new(2)
                .unwrap()
                .relation("neq", 2, [[0, 1], [1, 0]])
                .unwrap()
                .relation("none", 2, Vec::<[u8; 2]>::new())
                .unwrap(),
        )
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

    #[test]
    fn lac_path_witness_on_triangle() {
        let t = neq2();
        let t3 = triangle(&t);
        let probed = t3.with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        let out = lac_closure(
            &probed,
            &[Fact {
                variable: VarId(0),
                set: DomainSet::singleton(0),
            }],
        );
        let w = extract_witness(&probed, &out.trace, out.empty_fact.unwrap()).unwrap();
        assert_eq!(w.path().unwrap().len(), 3);
        assert!(w.holds(&probed).unwrap());
        let w = w.with_probe(t3.potatoes().to_vec(), VarId(0), 0);
        assert!(w.holds(&t3).unwrap());

        let cert = Certificate {
            method: "slac".into(),
            witnesses: vec![w],
        };
        let doc: CertificateDoc = serde_json::from_str(&cert.to_json(&t3)).unwrap();
        let report = verify_certificate(&t3, &doc).unwrap();
        assert_eq!(report.removals, vec![("x".to_string(), 0)]);
        assert!(!report.unsat);
    }

    #[test]
    fn ac_witness_for_empty_relation() {
        let t = neq2();
        let inst = Instance::builder(&t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "none")
            .build()
            .unwrap();
        let out = ac_fixpoint(&inst);
        let w = extract_witness(&inst, &out.trace, out.empty_fact.unwrap()).unwrap();
        match &w.pattern {
            WitnessPattern::Tree { tree, .. } => assert_eq!(tree.constraints().len(), 1),
            other => panic!("expected a tree, got {other:?}"),
        }
        assert!(w.holds(&inst).unwrap());
        let cert = Certificate {
            method: "ac".into(),
            witnesses: vec![w],
        };
        let report = verify_certificate(&inst, &cert.to_doc(&inst)).unwrap();
        assert!(report.unsat);
    }

    #[test]
    fn rejects_forged_certificates() {
        let t = neq2();
        let t3 = triangle(&t);
        let doc = CertificateDoc {
            format: WITNESS_FORMAT.into(),
            method: "slac".into(),
            witnesses: vec![WitnessDoc {
                context: BTreeMap::new(),
                probe: None,
                pattern: PatternDoc::Path {
                    origin: OriginDoc::Potato,
                    start: "x".into(),
                    steps: vec![StepDoc {
                        relation: "neq".into(),
                        scope: vec!["x".into(), "y".into()],
                        begin: 0,
                        end: 1,
                    }],
                },
                truncated: false,
            }],
        };
        assert!(verify_certificate(&t3, &doc).is_err());
        let mut bad_scope = doc.clone();
        if let PatternDoc::Path { steps, .. } = &mut bad_scope.witnesses[0].pattern {
            steps[0].scope = vec!["y".into(), "x".into()];
        }
        assert!(verify_certificate(&t3, &bad_scope).is_err());
    }

    #[test]
    fn requires_empty_failing_fact() {
        let t = neq2();
        let t3 = triangle(&t);
        let out = ac_fixpoint(&t3);
        assert!(extract_witness(&t3, &out.trace, 0).is_err());
        assert!(extract_witness(&t3, &out.trace, 999).is_err());
    }
}

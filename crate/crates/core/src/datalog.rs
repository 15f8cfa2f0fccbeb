//! DATALOG programs for AC and LAC, generated from a template, and a
//! bottom-up evaluator.
//!
//! There is one unary IDB per subset of the domain; the goal is the IDB of
//! the empty set. Two kinds of rules are generated:
//!
//! * projection rules `B(x_i) :- R(x_1, ..., x_n), A_1(x_1), ..., A_n(x_n)`
//!   with at most one IDB per body variable and none on `x_i`, where `B` is
//!   the projection of `R ∩ (A_1 × ... × A_n)` to coordinate `i`;
//! * intersection rules `B ∩ C(x) :- B(x), C(x)` for incomparable `B`, `C`,
//!   which fold several IDBs on one variable into a single one.
//!
//! Rules whose head is the full domain derive nothing and are left out. The
//! LAC program keeps the rules with at most one IDB in the body.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::DomainSet;
use crate::error::{Error, Result};
use crate::model::{Instance, Relation, Template, VarId};
use crate::propagate::Fact;

/// Largest domain for which programs are generated (`2^8` IDBs).
pub const MAX_PROGRAM_DOMAIN: usize = 8;
/// Cap on the projection rules generated per relation and target.
pub const MAX_RULES: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Projection {
        relation: String,
        target: usize,
        /// One optional IDB per body position; `None` at `target`.
        body: Vec<Option<DomainSet>>,
        head: DomainSet,
    },
    Intersection {
        left: DomainSet,
        right: DomainSet,
        head: DomainSet,
    },
}

impl Rule {
    /// Number of IDB atoms in the body.
    pub fn idb_count(&self) -> usize {
        match self {
            Rule::Projection { body, .. } => body.iter().flatten().count(),
            Rule::Intersection { .. } => 2,
        }
    }

    pub fn head(&self) -> DomainSet {
        match self {
            Rule::Projection { head, .. } | Rule::Intersection { head, .. } => *head,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramKind {
    Ac,
    Lac,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    kind: ProgramKind,
    value_names: Vec<String>,
    relations: Vec<(String, Relation)>,
    rules: Vec<Rule>,
}

fn choices(idbs: &[DomainSet], full: DomainSet) -> Vec<Option<DomainSet>> {
    let mut out = vec![None];
    out.extend(idbs.iter().copied().filter(|s| !s.is_empty() && *s != full).map(Some));
    out
}

/// The AC program of `template` over every subset IDB.
pub fn generate_ac_program(template: &Template) -> Result<Program> {
    check_domain(template)?;
    let idbs: Vec<DomainSet> = DomainSet::all_subsets(template.domain_size()).collect();
    generate_ac_program_over(template, &idbs)
}

/// The LAC program: the AC rules with at most one IDB in the body.
pub fn generate_lac_program(template: &Template) -> Result<Program> {
    let mut p = generate_ac_program(template)?;
    p.rules.retain(|r| r.idb_count() <= 1);
    p.kind = ProgramKind::Lac;
    Ok(p)
}

/// The AC program with body IDBs drawn from `idbs` only.
pub fn generate_ac_program_over(template: &Template, idbs: &[DomainSet]) -> Result<Program> {
    check_domain(template)?;
    let full = template.full();
    let opts = choices(idbs, full);
    let mut rules = Vec::new();

    let proper: Vec<DomainSet> = opts.iter().flatten().copied().collect();
    for (i, &left) in proper.iter().enumerate() {
        for &right in &proper[i + 1..] {
            if !left.is_subset(right) && !right.is_subset(left) {
                rules.push(Rule::Intersection {
                    left,
                    right,
                    head: left & right,
                });
            }
        }
    }

    for (_, name, rel) in template.relations() {
        let arity = rel.arity();
        for target in 0..arity {
            let free: Vec<usize> = (0..arity).filter(|&k| k != target).collect();
            let total = u32::try_from(free.len())
                .ok()
                .and_then(|e| opts.len().checked_pow(e))
                .filter(|&n| n <= MAX_RULES)
                .ok_or_else(|| Error::TooLarge(format!("relation `{name}` needs too many rules")))?;
            for code in 0..total {
                // mixed radix, last free position varies fastest
                let mut body = vec![None; arity];
                let mut rest = code;
                for &k in free.iter().rev() {
                    body[k] = opts[rest % opts.len()];
                    rest /= opts.len();
                }
                let mut head = DomainSet::EMPTY;
                for t in rel.tuples() {
                    if body.iter().zip(t).all(|(b, &a)| b.is_none_or(|s| s.contains(a))) {
                        head.insert(t[target]);
                    }
                }
                if head != full {
                    rules.push(Rule::Projection {
                        relation: name.to_string(),
                        target,
                        body,
                        head,
                    });
                }
            }
        }
    }
    Ok(Program {
        kind: ProgramKind::Ac,
        value_names: template.value_names().to_vec(),
        relations: template
            .relations()
            .map(|(_, n, r)| (n.to_string(), r.clone()))
            .collect(),
        rules,
    })
}

fn check_domain(template: &Template) -> Result<()> {
    if template.domain_size() > MAX_PROGRAM_DOMAIN {
        return Err(Error::ProgramDomain(template.domain_size()));
    }
    Ok(())
}

fn var_names(n: usize) -> Vec<String> {
    if n <= 4 {
        ["x", "y", "z", "w"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

impl Program {
    pub fn kind(&self) -> ProgramKind {
        self.kind
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.value_names.len()
    }

    /// `2^|A|`.
    pub fn num_idbs(&self) -> usize {
        1 << self.domain_size()
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.rules.contains(rule)
    }

    fn atom(&self, set: DomainSet, var: &str) -> String {
        if set.is_empty() {
            format!("empty({var})")
        } else if set.len() == 1 {
            format!("{var}={}", self.value_names[set.min().expect("non-empty") as usize])
        } else {
            let names: Vec<&str> = set.iter().map(|a| self.value_names[a as usize].as_str()).collect();
            format!("{{{}}}({var})", names.join(","))
        }
    }

    pub fn rule_text(&self, rule: &Rule) -> String {
        match rule {
            Rule::Projection {
                relation,
                target,
                body,
                head,
            } => {
                let vars = var_names(body.len());
                let mut s = format!(
                    "{} :- {}({})",
                    self.atom(*head, &vars[*target]),
                    relation,
                    vars.join(",")
                );
                for (k, b) in body.iter().enumerate() {
                    if let Some(set) = b {
                        write!(s, ", {}", self.atom(*set, &vars[k])).expect("string write");
                    }
                }
                s.push('.');
                s
            }
            Rule::Intersection { left, right, head } => format!(
                "{} :- {}, {}.",
                self.atom(*head, "x"),
                self.atom(*left, "x"),
                self.atom(*right, "x")
            ),
        }
    }

    /// One rule per line in `:-` notation, `%` comments on top.
    pub fn to_text(&self) -> String {
        let kind = match self.kind {
            ProgramKind::Ac => "AC",
            ProgramKind::Lac => "LAC",
        };
        let mut out = format!(
            "% {kind} program, domain {{{}}}, {} rules\n% goal: empty(x)\n",
            self.value_names.join(","),
            self.rules.len()
        );
        for r in &self.rules {
            out.push_str(&self.rule_text(r));
            out.push('\n');
        }
        out
    }

    fn check_instance(&self, instance: &Instance) -> Result<()> {
        let t = instance.template();
        if t.domain_size() != self.domain_size() {
            return Err(Error::ProgramMismatch(format!(
                "program domain has {} values, instance template has {}",
                self.domain_size(),
                t.domain_size()
            )));
        }
        for c in instance.constraints() {
            let name = t.relation_name(c.relation);
            match self.relations.iter().find(|(n, _)| n == name) {
                Some((_, r)) if r == t.get(c.relation) => {}
                Some(_) => {
                    return Err(Error::ProgramMismatch(format!(
                        "relation `{name}` differs from the program's"
                    )))
                }
                None => {
                    return Err(Error::ProgramMismatch(format!(
                        "relation `{name}` is unknown to the program"
                    )))
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    SemiNaive,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub strategy: Strategy,
    /// Stop as soon as the goal is derived.
    pub stop_at_goal: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            strategy: Strategy::SemiNaive,
            stop_at_goal: true,
        }
    }
}

/// Ground IDB facts `S(x)`, kept per variable in derivation order.
#[derive(Clone, Debug)]
pub struct FactBase {
    full: DomainSet,
    per_var: Vec<Vec<DomainSet>>,
    // bit `s` of word `s / 64` set when subset `s` holds at the variable
    present: Vec<[u64; 4]>,
}

impl FactBase {
    fn new(num_variables: usize, full: DomainSet) -> Self {
        FactBase {
            full,
            per_var: vec![Vec::new(); num_variables],
            present: vec![[0; 4]; num_variables],
        }
    }

    pub fn contains(&self, v: VarId, set: DomainSet) -> bool {
        let s = set.bits() as usize;
        self.present[v.0][s / 64] & (1 << (s % 64)) != 0
    }

    fn insert(&mut self, v: VarId, set: DomainSet) -> bool {
        if self.contains(v, set) {
            return false;
        }
        let s = set.bits() as usize;
        self.present[v.0][s / 64] |= 1 << (s % 64);
        self.per_var[v.0].push(set);
        true
    }

    pub fn facts(&self, v: VarId) -> &[DomainSet] {
        &self.per_var[v.0]
    }

    /// Intersection of the facts about `v` (the full domain if none).
    pub fn strongest(&self, v: VarId) -> DomainSet {
        self.per_var[v.0].iter().fold(self.full, |acc, &s| acc & s)
    }

    pub fn len(&self) -> usize {
        self.per_var.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// Equal as sets of ground facts; derivation order is ignored.
impl PartialEq for FactBase {
    fn eq(&self, other: &Self) -> bool {
        self.present == other.present
    }
}

impl Eq for FactBase {}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub facts: FactBase,
    pub goal_reached: bool,
    /// First variable on which the goal was derived.
    pub goal_variable: Option<VarId>,
    /// Rule applications that produced a new fact.
    pub firings: usize,
}

struct Index<'p> {
    // (relation, position, subset) -> projection rules with that body atom
    by_atom: HashMap<(&'p str, usize, DomainSet), Vec<usize>>,
    // relation -> projection rules without body IDBs
    unconditional: HashMap<&'p str, Vec<usize>>,
    // subset -> (other subset, head)
    meets: HashMap<DomainSet, Vec<(DomainSet, DomainSet)>>,
}

impl<'p> Index<'p> {
    fn new(program: &'p Program) -> Self {
        let mut ix = Index {
            by_atom: HashMap::new(),
            unconditional: HashMap::new(),
            meets: HashMap::new(),
        };
        for (i, r) in program.rules.iter().enumerate() {
            match r {
                Rule::Projection { relation, body, .. } => {
                    let mut any = false;
                    for (k, b) in body.iter().enumerate() {
                        if let Some(s) = b {
                            any = true;
                            ix.by_atom.entry((relation.as_str(), k, *s)).or_default().push(i);
                        }
                    }
                    if !any {
                        ix.unconditional.entry(relation.as_str()).or_default().push(i);
                    }
                }
                Rule::Intersection { left, right, head } => {
                    ix.meets.entry(*left).or_default().push((*right, *head));
                    ix.meets.entry(*right).or_default().push((*left, *head));
                }
            }
        }
        ix
    }
}

/// Evaluates `program` on `instance`. The potatoes and `extra` facts are the
/// initial IDB facts.
pub fn evaluate(program: &Program, instance: &Instance, extra: &[Fact]) -> Result<Evaluation> {
    evaluate_with(program, instance, extra, EvalOptions::default())
}

pub fn evaluate_with(program: &Program, instance: &Instance, extra: &[Fact], opts: EvalOptions) -> Result<Evaluation> {
    program.check_instance(instance)?;
    let full = instance.template().full();
    let mut ev = Evaluation {
        facts: FactBase::new(instance.num_variables(), full),
        goal_reached: false,
        goal_variable: None,
        firings: 0,
    };
    let mut delta: Vec<(VarId, DomainSet)> = Vec::new();
    let mut add = |ev: &mut Evaluation, delta: &mut Vec<(VarId, DomainSet)>, v: VarId, s: DomainSet| {
        if ev.facts.insert(v, s) {
            delta.push((v, s));
            if s.is_empty() && !ev.goal_reached {
                ev.goal_reached = true;
                ev.goal_variable = Some(v);
            }
        }
    };
    for v in instance.var_ids() {
        if instance.potato(v) != full {
            add(&mut ev, &mut delta, v, instance.potato(v));
        }
    }
    for f in extra {
        add(&mut ev, &mut delta, f.variable, f.set);
    }
    if ev.goal_reached && opts.stop_at_goal {
        return Ok(ev);
    }
    match opts.strategy {
        Strategy::SemiNaive => semi_naive(program, instance, &mut ev, delta, opts, &mut add),
        Strategy::Naive => naive(program, instance, &mut ev, opts, &mut add),
    }
    Ok(ev)
}

fn body_holds(facts: &FactBase, scope: &[VarId], body: &[Option<DomainSet>]) -> bool {
    body.iter()
        .zip(scope)
        .all(|(b, &v)| b.is_none_or(|s| facts.contains(v, s)))
}

fn semi_naive(
    program: &Program,
    instance: &Instance,
    ev: &mut Evaluation,
    mut delta: Vec<(VarId, DomainSet)>,
    opts: EvalOptions,
    add: &mut impl FnMut(&mut Evaluation, &mut Vec<(VarId, DomainSet)>, VarId, DomainSet),
) {
    let ix = Index::new(program);
    let t = instance.template();
    let stop = |ev: &Evaluation| opts.stop_at_goal && ev.goal_reached;

    for c in instance.constraint_ids() {
        let con = instance.constraint(c);
        let Some(rules) = ix.unconditional.get(t.relation_name(con.relation)) else {
            continue;
        };
        for &r in rules {
            if let Rule::Projection { target, head, .. } = &program.rules[r] {
                let before = ev.facts.len();
                add(ev, &mut delta, con.scope[*target], *head);
                ev.firings += usize::from(ev.facts.len() > before);
                if stop(ev) {
                    return;
                }
            }
        }
    }

    let mut next = 0;
    while next < delta.len() {
        let (v, s) = delta[next];
        next += 1;
        let mut derived: Vec<(VarId, DomainSet)> = Vec::new();
        for occ in instance.occurrences(v) {
            let con = instance.constraint(occ.constraint);
            let rel = t.relation_name(con.relation);
            let Some(rules) = ix.by_atom.get(&(rel, occ.position, s)) else {
                continue;
            };
            for &r in rules {
                if let Rule::Projection { target, body, head, .. } = &program.rules[r] {
                    if body_holds(&ev.facts, &con.scope, body) {
                        derived.push((con.scope[*target], *head));
                    }
                }
            }
        }
        if let Some(meets) = ix.meets.get(&s) {
            for &(other, head) in meets {
                if ev.facts.contains(v, other) {
                    derived.push((v, head));
                }
            }
        }
        for (w, h) in derived {
            let before = ev.facts.len();
            add(ev, &mut delta, w, h);
            ev.firings += usize::from(ev.facts.len() > before);
            if stop(ev) {
                return;
            }
        }
    }
}

fn naive(
    program: &Program,
    instance: &Instance,
    ev: &mut Evaluation,
    opts: EvalOptions,
    add: &mut impl FnMut(&mut Evaluation, &mut Vec<(VarId, DomainSet)>, VarId, DomainSet),
) {
    let t = instance.template();
    let mut sink = Vec::new();
    loop {
        let mut round: Vec<(VarId, DomainSet)> = Vec::new();
        for rule in &program.rules {
            match rule {
                Rule::Projection {
                    relation,
                    target,
                    body,
                    head,
                } => {
                    for con in instance.constraints() {
                        if t.relation_name(con.relation) == relation && body_holds(&ev.facts, &con.scope, body) {
                            round.push((con.scope[*target], *head));
                        }
                    }
                }
                Rule::Intersection { left, right, head } => {
                    for v in instance.var_ids() {
                        if ev.facts.contains(v, *left) && ev.facts.contains(v, *right) {
                            round.push((v, *head));
                        }
                    }
                }
            }
        }
        let before = ev.facts.len();
        for (v, s) in round {
            let n = ev.facts.len();
            add(ev, &mut sink, v, s);
            ev.firings += usize::from(ev.facts.len() > n);
            if opts.stop_at_goal && ev.goal_reached {
                return;
            }
        }
        sink.clear();
        if ev.facts.len() == before {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn example_rules_over_singletons() {
        let t = neq2();
        let singles = [DomainSet::singleton(0), DomainSet::singleton(1)];
        let p = generate_ac_program_over(&t, &singles).unwrap();
        let text: Vec<String> = p.rules().iter().map(|r| p.rule_text(r)).collect();
        assert_eq!(
            text,
            [
                "empty(x) :- x=0, x=1.",
                "x=1 :- neq(x,y), y=0.",
                "x=0 :- neq(x,y), y=1.",
                "y=1 :- neq(x,y), x=0.",
                "y=0 :- neq(x,y), x=1.",
            ]
        );
    }

    #[test]
    fn full_program_sizes() {
        let t = neq2();
        let ac = generate_ac_program(&t).unwrap();
        assert_eq!(ac.num_idbs(), 4);
        assert_eq!(ac.len(), 5);
        let lac = generate_lac_program(&t).unwrap();
        assert_eq!(lac.len(), 4);
        assert!(lac.rules().iter().all(|r| r.idb_count() <= 1 && ac.contains(r)));
    }

    #[test]
    fn triangle_reaches_no_goal() {
        let t = neq2();
        let ac = generate_ac_program(&t).unwrap();
        let ev = evaluate(&ac, &triangle(&t), &[]).unwrap();
        assert!(!ev.goal_reached);
        assert!(ev.facts.is_empty());
    }

    #[test]
    fn empty_relation_reaches_goal() {
        let t = Arc::new(
            Template::new(2)
                .unwrap()
                .relation("none", 2, Vec::<[u8; 2]>::new())
                .unwrap(),
        );
        let inst = Instance::builder(&t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "none")
            .build()
            .unwrap();
        for strategy in [Strategy::SemiNaive, Strategy::Naive] {
            let p = generate_ac_program(&t).unwrap();
            let ev = evaluate_with(
                &p,
                &inst,
                &[],
                EvalOptions {
                    strategy,
                    stop_at_goal: true,
                },
            )
            .unwrap();
            assert!(ev.goal_reached);
        }
    }

    #[test]
    fn seeded_lac_refutes_triangle() {
        let t = neq2();
        let t3 = triangle(&t);
        let seed = Fact {
            variable: VarId(0),
            set: DomainSet::singleton(0),
        };
        // without the restriction LAC only learns x=1 next to x=0
        let lac = generate_lac_program(&t).unwrap();
        assert!(!evaluate(&lac, &t3, &[seed]).unwrap().goal_reached);

        let probed = t3.with_potato(VarId(0), seed.set).unwrap().materialize();
        let lac = generate_lac_program(probed.template()).unwrap();
        assert!(evaluate(&lac, &probed, &[seed]).unwrap().goal_reached);
    }

    #[test]
    fn strategies_agree() {
        let t = neq2();
        let inst = Instance::builder(&t)
            .variables(["a", "b", "c", "d"])
            .constraint(["a", "b"], "neq")
            .constraint(["b", "c"], "neq")
            .constraint(["c", "d"], "neq")
            .potato("a", [1])
            .build()
            .unwrap();
        let p = generate_ac_program(&t).unwrap();
        let run = |strategy| {
            evaluate_with(
                &p,
                &inst,
                &[],
                EvalOptions {
                    strategy,
                    stop_at_goal: false,
                },
            )
            .unwrap()
            .facts
        };
        let semi = run(Strategy::SemiNaive);
        assert_eq!(semi, run(Strategy::Naive));
        assert_eq!(semi.strongest(VarId(3)), DomainSet::singleton(0));
    }

    #[test]
    fn rejects_foreign_instances() {
        let t = neq2();
        let p = generate_ac_program(&t).unwrap();
        let other = Arc::new(Template::new(2).unwrap().relation("neq", 2, [[0, 1]]).unwrap());
        let inst = Instance::builder(&other)
            .variables(["x", "y"])
            .constraint(["x", "y"], "neq")
            .build()
            .unwrap();
        assert!(matches!(evaluate(&p, &inst, &[]), Err(Error::ProgramMismatch(_))));
        assert!(matches!(
            generate_ac_program(&Template::new(9).unwrap()),
            Err(Error::ProgramDomain(9))
        ));
    }
}

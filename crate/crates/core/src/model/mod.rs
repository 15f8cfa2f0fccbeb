//! Templates, instances, potatoes and assignments.
//!
//! A [`Template`] is the fixed relational structure every instance draws its
//! relations from. An [`Instance`] holds variables, constraints and one
//! potato (unary domain subset) per variable. Restricting an instance only
//! replaces its potato vector: effective relations are always computed on
//! demand as the template relation filtered by the current potatoes, so
//! restriction is cheap and never copies relation data.

mod json;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSet, Value, MAX_DOMAIN};
use crate::error::{Error, Result};

pub use json::{ConstraintDoc, DomainDoc, InstanceDoc, RelationDoc, TemplateDoc, ValueDoc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConstraintId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl RelId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A finite relation: a duplicate-free, sorted set of tuples of fixed arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    // row-major, lexicographically sorted
    data: Vec<Value>,
}

impl Relation {
    pub fn new<I, T>(arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[Value]>,
    {
        if arity == 0 {
            return Err(Error::BadRelation {
                name: String::new(),
                reason: "arity must be at least 1".into(),
            });
        }
        let mut rows: Vec<Vec<Value>> = Vec::new();
        for t in tuples {
            let t = t.as_ref();
            if t.len() != arity {
                return Err(Error::BadRelation {
                    name: String::new(),
                    reason: format!("tuple {t:?} has length {}, expected {arity}", t.len()),
                });
            }
            rows.push(t.to_vec());
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(Relation {
            arity,
            data: rows.concat(),
        })
    }

    /// Builds the relation `{ t in domain^arity : keep(t) }`.
    pub fn from_predicate(domain_size: usize, arity: usize, mut keep: impl FnMut(&[Value]) -> bool) -> Result<Self> {
        let mut tuples = Vec::new();
        let mut t = vec![0 as Value; arity];
        loop {
            if keep(&t) {
                tuples.push(t.clone());
            }
            let mut i = arity;
            loop {
                if i == 0 {
                    return Relation::new(arity, tuples);
                }
                i -= 1;
                t[i] += 1;
                if (t[i] as usize) < domain_size {
                    break;
                }
                t[i] = 0;
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuples(&self) -> std::slice::ChunksExact<'_, Value> {
        self.data.chunks_exact(self.arity)
    }

    pub fn contains(&self, tuple: &[Value]) -> bool {
        if tuple.len() != self.arity {
            return false;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let row = &self.data[mid * self.arity..(mid + 1) * self.arity];
            match row.cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    fn max_value(&self) -> Option<Value> {
        self.data.iter().copied().max()
    }
}

/// A finite relational structure: dense domain `0..n` plus named relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    values: Vec<String>,
    relations: Vec<Relation>,
    names: Vec<String>,
    by_name: HashMap<String, RelId>,
}

impl Template {
    /// A template over `0..domain_size` with values named by their index.
    pub fn new(domain_size: usize) -> Result<Self> {
        Self::with_value_names((0..domain_size).map(|v| v.to_string()).collect())
    }

    pub fn with_value_names(values: Vec<String>) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DOMAIN {
            return Err(Error::DomainSize(values.len()));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::DuplicateValue(v.clone()));
            }
        }
        Ok(Template {
            values,
            relations: Vec::new(),
            names: Vec::new(),
            by_name: HashMap::new(),
        })
    }

    pub fn add_relation(&mut self, name: impl Into<String>, relation: Relation) -> Result<RelId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateRelation(name));
        }
        if let Some(max) = relation.max_value() {
            if max as usize >= self.domain_size() {
                return Err(Error::BadRelation {
                    name,
                    reason: format!("value {max} outside domain of size {}", self.domain_size()),
                });
            }
        }
        let id = RelId(self.relations.len());
        self.relations.push(relation);
        self.names.push(name.clone());
        self.by_name.insert(name, id);
        Ok(id)
    }

    /// Builder form of [`Template::add_relation`].
    pub fn relation<T: AsRef<[Value]>>(
        mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = T>,
    ) -> Result<Self> {
        let rel = Relation::new(arity, tuples).map_err(|e| match e {
            Error::BadRelation { reason, .. } => Error::BadRelation {
                name: name.to_string(),
                reason,
            },
            other => other,
        })?;
        self.add_relation(name, rel)?;
        Ok(self)
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn full(&self) -> DomainSet {
        DomainSet::full(self.domain_size())
    }

    pub fn value_name(&self, v: Value) -> &str {
        &self.values[v as usize]
    }

    pub fn value_names(&self) -> &[String] {
        &self.values
    }

    pub fn value_index(&self, name: &str) -> Option<Value> {
        self.values.iter().position(|v| v == name).map(|i| i as Value)
    }

    /// True when every value is named by its own index.
    pub fn has_default_value_names(&self) -> bool {
        self.values.iter().enumerate().all(|(i, v)| *v == i.to_string())
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn get(&self, id: RelId) -> &Relation {
        &self.relations[id.0]
    }

    pub fn relation_name(&self, id: RelId) -> &str {
        &self.names[id.0]
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.by_name.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (RelId, &str, &Relation)> {
        self.relations
            .iter()
            .zip(&self.names)
            .enumerate()
            .map(|(i, (r, n))| (RelId(i), n.as_str(), r))
    }

    pub fn format_set(&self, set: DomainSet) -> String {
        let names: Vec<&str> = set.iter().map(|v| self.value_name(v)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A constraint `((x_1, ..., x_n), R)`. Scopes may repeat variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub scope: Vec<VarId>,
    pub relation: RelId,
}

/// One appearance of a variable in a constraint scope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub constraint: ConstraintId,
    pub position: usize,
}

#[derive(Debug)]
struct Shape {
    variables: Vec<String>,
    index: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    occurrences: Vec<Vec<Occurrence>>,
}

impl Shape {
    fn new(variables: Vec<String>, constraints: Vec<Constraint>) -> Self {
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), VarId(i)))
            .collect();
        let mut occurrences = vec![Vec::new(); variables.len()];
        for (c, con) in constraints.iter().enumerate() {
            for (position, v) in con.scope.iter().enumerate() {
                occurrences[v.0].push(Occurrence {
                    constraint: ConstraintId(c),
                    position,
                });
            }
        }
        Shape {
            variables,
            index,
            constraints,
            occurrences,
        }
    }
}

/// A CSP instance over a shared template.
///
/// Cloning is cheap: the template and the variable/constraint structure are
/// reference counted, only the potato vector is owned.
#[derive(Clone, Debug)]
pub struct Instance {
    template: Arc<Template>,
    shape: Arc<Shape>,
    potatoes: Vec<DomainSet>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        *self.template == *other.template
            && self.shape.variables == other.shape.variables
            && self.shape.constraints == other.shape.constraints
            && self.potatoes == other.potatoes
    }
}

impl Eq for Instance {}

/// A problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateVariable(String),
    UnknownRelation {
        constraint: usize,
        relation: String,
    },
    UnknownVariable {
        constraint: usize,
        variable: String,
    },
    ArityMismatch {
        constraint: usize,
        relation: String,
        expected: usize,
        found: usize,
    },
    PotatoUnknownVariable(String),
    PotatoBadValue {
        variable: String,
        value: String,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateVariable(v) => write!(f, "variable `{v}` declared twice"),
            Diagnostic::UnknownRelation { constraint, relation } => {
                write!(f, "constraint #{constraint}: unknown relation `{relation}`")
            }
            Diagnostic::UnknownVariable { constraint, variable } => {
                write!(f, "constraint #{constraint}: undeclared variable `{variable}`")
            }
            Diagnostic::ArityMismatch {
                constraint,
                relation,
                expected,
                found,
            } => write!(
                f,
                "constraint #{constraint}: scope has {found} variables but `{relation}` has arity {expected}"
            ),
            Diagnostic::PotatoUnknownVariable(v) => {
                write!(f, "potato given for undeclared variable `{v}`")
            }
            Diagnostic::PotatoBadValue { variable, value } => {
                write!(f, "potato of `{variable}`: `{value}` is not a domain value")
            }
        }
    }
}

/// Checks an instance document against a template. An empty result means
/// [`Instance::from_doc`] will succeed.
pub fn validate(template: &Template, doc: &InstanceDoc) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut declared: HashMap<&str, ()> = HashMap::new();
    for v in &doc.variables {
        if declared.insert(v.as_str(), ()).is_some() {
            diags.push(Diagnostic::DuplicateVariable(v.clone()));
        }
    }
    for (i, c) in doc.constraints.iter().enumerate() {
        match template.relation_id(&c.relation) {
            None => diags.push(Diagnostic::UnknownRelation {
                constraint: i,
                relation: c.relation.clone(),
            }),
            Some(r) => {
                let arity = template.get(r).arity();
                if arity != c.scope.len() {
                    diags.push(Diagnostic::ArityMismatch {
                        constraint: i,
                        relation: c.relation.clone(),
                        expected: arity,
                        found: c.scope.len(),
                    });
                }
            }
        }
        for v in &c.scope {
            if !declared.contains_key(v.as_str()) {
                diags.push(Diagnostic::UnknownVariable {
                    constraint: i,
                    variable: v.clone(),
                });
            }
        }
    }
    if let Some(potatoes) = &doc.potatoes {
        for (var, values) in potatoes {
            if !declared.contains_key(var.as_str()) {
                diags.push(Diagnostic::PotatoUnknownVariable(var.clone()));
            }
            for value in values {
                if value.resolve(template).is_none() {
                    diags.push(Diagnostic::PotatoBadValue {
                        variable: var.clone(),
                        value: value.to_string(),
                    });
                }
            }
        }
    }
    diags
}

impl Instance {
    /// Builds an instance from a document, filling absent potatoes with the
    /// full domain.
    pub fn from_doc(template: Arc<Template>, doc: &InstanceDoc) -> Result<Self> {
        let diags = validate(&template, doc);
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        let index: HashMap<&str, VarId> = doc
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), VarId(i)))
            .collect();
        let constraints = doc
            .constraints
            .iter()
            .map(|c| Constraint {
                scope: c.scope.iter().map(|v| index[v.as_str()]).collect(),
                relation: template.relation_id(&c.relation).expect("validated"),
            })
            .collect();
        let mut potatoes = vec![template.full(); doc.variables.len()];
        if let Some(p) = &doc.potatoes {
            for (var, values) in p {
                potatoes[index[var.as_str()].0] = values
                    .iter()
                    .map(|v| v.resolve(&template).expect("validated"))
                    .collect();
            }
        }
        Ok(Self::assemble(template, doc.variables.clone(), constraints, potatoes))
    }

    /// Builds an instance from already-resolved parts.
    pub fn from_parts(
        template: Arc<Template>,
        variables: Vec<String>,
        constraints: Vec<Constraint>,
        potatoes: Option<Vec<DomainSet>>,
    ) -> Result<Self> {
        let mut diags = Vec::new();
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                diags.push(Diagnostic::DuplicateVariable(v.clone()));
            }
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.relation.0 >= template.num_relations() {
                diags.push(Diagnostic::UnknownRelation {
                    constraint: i,
                    relation: format!("#{}", c.relation.0),
                });
                continue;
            }
            let arity = template.get(c.relation).arity();
            if arity != c.scope.len() {
                diags.push(Diagnostic::ArityMismatch {
                    constraint: i,
                    relation: template.relation_name(c.relation).to_string(),
                    expected: arity,
                    found: c.scope.len(),
                });
            }
            for v in &c.scope {
                if v.0 >= variables.len() {
                    diags.push(Diagnostic::UnknownVariable {
                        constraint: i,
                        variable: format!("#{}", v.0),
                    });
                }
            }
        }
        let full = template.full();
        let potatoes = potatoes.unwrap_or_else(|| vec![full; variables.len()]);
        if potatoes.len() != variables.len() || potatoes.iter().any(|p| !p.is_subset(full)) {
            diags.push(Diagnostic::PotatoBadValue {
                variable: "*".into(),
                value: "potato vector does not match the variables".into(),
            });
        }
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        Ok(Self::assemble(template, variables, constraints, potatoes))
    }

    fn assemble(
        template: Arc<Template>,
        variables: Vec<String>,
        constraints: Vec<Constraint>,
        potatoes: Vec<DomainSet>,
    ) -> Self {
        Instance {
            template,
            shape: Arc::new(Shape::new(variables, constraints)),
            potatoes,
        }
    }

    pub fn builder(template: &Arc<Template>) -> InstanceBuilder {
        InstanceBuilder {
            template: Arc::clone(template),
            doc: InstanceDoc::default(),
        }
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn template_arc(&self) -> &Arc<Template> {
        &self.template
    }

    pub fn domain_size(&self) -> usize {
        self.template.domain_size()
    }

    pub fn num_variables(&self) -> usize {
        self.shape.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.shape.constraints.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.shape.variables
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.num_variables()).map(VarId)
    }

    pub fn variable_name(&self, v: VarId) -> &str {
        &self.shape.variables[v.0]
    }

    pub fn variable_id(&self, name: &str) -> Option<VarId> {
        self.shape.index.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.shape.constraints
    }

    pub fn constraint(&self, c: ConstraintId) -> &Constraint {
        &self.shape.constraints[c.0]
    }

    pub fn constraint_ids(&self) -> impl Iterator<Item = ConstraintId> {
        (0..self.num_constraints()).map(ConstraintId)
    }

    /// Occurrences of `v`, ordered by constraint then position.
    pub fn occurrences(&self, v: VarId) -> &[Occurrence] {
        &self.shape.occurrences[v.0]
    }

    pub fn relation_of(&self, c: ConstraintId) -> &Relation {
        self.template.get(self.shape.constraints[c.0].relation)
    }

    pub fn potatoes(&self) -> &[DomainSet] {
        &self.potatoes
    }

    pub fn potato(&self, v: VarId) -> DomainSet {
        self.potatoes[v.0]
    }

    /// Whether `tuple` respects the potatoes of the scope of `c`, position by
    /// position. Repeated variables are checked per occurrence only.
    #[inline]
    pub fn respects_potatoes(&self, c: ConstraintId, tuple: &[Value]) -> bool {
        let scope = &self.shape.constraints[c.0].scope;
        scope.iter().zip(tuple).all(|(v, &a)| self.potatoes[v.0].contains(a))
    }

    /// The effective relation of `c`: its template relation filtered by the
    /// current potatoes.
    pub fn effective_tuples(&self, c: ConstraintId) -> impl Iterator<Item = &[Value]> + '_ {
        self.relation_of(c)
            .tuples()
            .filter(move |t| self.respects_potatoes(c, t))
    }

    /// Projection of the effective relation of `c` onto each position.
    pub fn projections(&self, c: ConstraintId) -> Vec<DomainSet> {
        let mut out = vec![DomainSet::EMPTY; self.constraint(c).scope.len()];
        for t in self.effective_tuples(c) {
            for (slot, &a) in out.iter_mut().zip(t) {
                slot.insert(a);
            }
        }
        out
    }

    /// Restricts the instance to `new_potatoes`, which must shrink (or keep)
    /// every current potato.
    pub fn restrict(&self, new_potatoes: &[DomainSet]) -> Result<Instance> {
        if new_potatoes.len() != self.num_variables() {
            return Err(Error::Invalid(vec![Diagnostic::PotatoBadValue {
                variable: "*".into(),
                value: format!("{} potatoes for {} variables", new_potatoes.len(), self.num_variables()),
            }]));
        }
        for (v, (new, old)) in new_potatoes.iter().zip(&self.potatoes).enumerate() {
            if !new.is_subset(*old) {
                return Err(Error::PotatoGrows {
                    variable: self.shape.variables[v].clone(),
                });
            }
        }
        Ok(self.restrict_unchecked(new_potatoes.to_vec()))
    }

    /// Restricts a single potato, keeping the others.
    pub fn with_potato(&self, v: VarId, set: DomainSet) -> Result<Instance> {
        let mut p = self.potatoes.clone();
        p[v.0] = set;
        self.restrict(&p)
    }

    pub(crate) fn restrict_unchecked(&self, potatoes: Vec<DomainSet>) -> Instance {
        debug_assert_eq!(potatoes.len(), self.num_variables());
        Instance {
            template: Arc::clone(&self.template),
            shape: Arc::clone(&self.shape),
            potatoes,
        }
    }

    /// Replaces every constraint relation by its effective relation, as a new
    /// template relation named `"<relation>@<k>"`. Identical effective
    /// relations share one template entry. Potatoes are kept.
    pub fn materialize(&self) -> Instance {
        let mut template = Template::with_value_names(self.template.value_names().to_vec()).expect("same domain");
        let mut seen: HashMap<(RelId, Vec<Value>), RelId> = HashMap::new();
        let mut counter: HashMap<RelId, usize> = HashMap::new();
        let constraints = self
            .constraint_ids()
            .map(|c| {
                let con = self.constraint(c);
                let arity = con.scope.len();
                let data: Vec<Value> = self.effective_tuples(c).flatten().copied().collect();
                let relation = *seen.entry((con.relation, data.clone())).or_insert_with(|| {
                    let k = counter.entry(con.relation).or_insert(0);
                    let name = format!("{}@{}", self.template.relation_name(con.relation), k);
                    *k += 1;
                    let rel = Relation::new(arity, data.chunks_exact(arity)).expect("well formed");
                    template.add_relation(name, rel).expect("fresh name")
                });
                Constraint {
                    scope: con.scope.clone(),
                    relation,
                }
            })
            .collect();
        Instance::assemble(
            Arc::new(template),
            self.shape.variables.clone(),
            constraints,
            self.potatoes.clone(),
        )
    }

    /// Whether the adjacency multigraph (variables and constraints as
    /// vertices, one edge per occurrence) is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.num_variables();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![VarId(0)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for occ in self.occurrences(v) {
                for &w in &self.constraint(occ.constraint).scope {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Convenience builder for instances, mostly used in tests.
pub struct InstanceBuilder {
    template: Arc<Template>,
    doc: InstanceDoc,
}

impl InstanceBuilder {
    pub fn variables<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.doc.variables.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn constraint<S: Into<String>>(mut self, scope: impl IntoIterator<Item = S>, relation: &str) -> Self {
        self.doc.constraints.push(ConstraintDoc {
            scope: scope.into_iter().map(Into::into).collect(),
            relation: relation.to_string(),
        });
        self
    }

    pub fn potato(mut self, variable: &str, values: impl IntoIterator<Item = Value>) -> Self {
        self.doc.potatoes.get_or_insert_with(Default::default).insert(
            variable.to_string(),
            values.into_iter().map(|v| ValueDoc::Index(v as u64)).collect(),
        );
        self
    }

    pub fn doc(&self) -> &InstanceDoc {
        &self.doc
    }

    pub fn build(self) -> Result<Instance> {
        Instance::from_doc(self.template, &self.doc)
    }
}

/// A (possibly partial) map from variables to values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<Value>>,
}

impl Assignment {
    pub fn empty(num_variables: usize) -> Self {
        Assignment {
            values: vec![None; num_variables],
        }
    }

    pub fn total(values: Vec<Value>) -> Self {
        Assignment {
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn set(&mut self, v: VarId, value: Value) {
        self.values[v.0] = Some(value);
    }

    pub fn get(&self, v: VarId) -> Option<Value> {
        self.values.get(v.0).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The values, if every variable is assigned.
    pub fn as_total(&self) -> Option<Vec<Value>> {
        self.values.iter().copied().collect()
    }
}

/// True iff `assignment` lands every constraint in its relation and every
/// variable inside its potato.
pub fn check_solution(instance: &Instance, assignment: &Assignment) -> Result<bool> {
    if assignment.len() != instance.num_variables() {
        return Err(Error::AssignmentLength {
            expected: instance.num_variables(),
            found: assignment.len(),
        });
    }
    let mut values = Vec::with_capacity(assignment.len());
    for v in instance.var_ids() {
        match assignment.get(v) {
            Some(a) => values.push(a),
            None => return Err(Error::PartialAssignment(instance.variable_name(v).to_string())),
        }
    }
    if values.iter().zip(instance.potatoes()).any(|(&a, p)| !p.contains(a)) {
        return Ok(false);
    }
    let mut tuple = Vec::new();
    for c in instance.constraints() {
        tuple.clear();
        tuple.extend(c.scope.iter().map(|v| values[v.0]));
        if !instance.template().get(c.relation).contains(&tuple) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn validate_accepts_triangle() {
        let t = neq2();
        let b = Instance::builder(&t)
            .variables(["x", "y", "z"])
            .constraint(["x", "y"], "neq")
            .constraint(["y", "z"], "neq")
            .constraint(["z", "x"], "neq");
        assert!(validate(&t, b.doc()).is_empty());
    }

    #[test]
    fn validate_reports_arity_mismatch() {
        let t = neq2();
        let b = Instance::builder(&t)
            .variables(["x", "y", "z"])
            .constraint(["x", "y", "z"], "neq");
        let diags = validate(&t, b.doc());
        assert_eq!(
            diags,
            vec![Diagnostic::ArityMismatch {
                constraint: 0,
                relation: "neq".into(),
                expected: 2,
                found: 3
            }]
        );
        assert!(diags[0].to_string().contains("constraint #0"));
    }

    #[test]
    fn validate_reports_unknowns() {
        let t = neq2();
        let b = Instance::builder(&t)
            .variables(["x", "x"])
            .constraint(["x", "q"], "lt")
            .potato("w", [0]);
        let diags = validate(&t, b.doc());
        assert!(diags.contains(&Diagnostic::DuplicateVariable("x".into())));
        assert!(diags.contains(&Diagnostic::UnknownRelation {
            constraint: 0,
            relation: "lt".into()
        }));
        assert!(diags.contains(&Diagnostic::UnknownVariable {
            constraint: 0,
            variable: "q".into()
        }));
        assert!(diags.contains(&Diagnostic::PotatoUnknownVariable("w".into())));
    }

    #[test]
    fn missing_potato_defaults_to_full_domain() {
        let t = neq2();
        let inst = Instance::builder(&t)
            .variables(["x", "y", "z"])
            .constraint(["x", "y"], "neq")
            .potato("x", [0])
            .build()
            .unwrap();
        let z = inst.variable_id("z").unwrap();
        assert_eq!(inst.potato(z), DomainSet::full(2));
        assert_eq!(inst.potato(VarId(0)), DomainSet::singleton(0));
    }

    #[test]
    fn template_rejects_bad_input() {
        assert!(matches!(Template::new(0), Err(Error::DomainSize(0))));
        assert!(matches!(Template::new(65), Err(Error::DomainSize(65))));
        assert!(Template::new(64).is_ok());
        assert!(Template::new(2).unwrap().relation("r", 1, [[2]]).is_err());
        assert!(Template::new(2)
            .unwrap()
            .relation("r", 0, Vec::<Vec<u8>>::new())
            .is_err());
        let dup = Template::new(2)
            .unwrap()
            .relation("r", 1, [[0]])
            .unwrap()
            .relation("r", 1, [[1]]);
        assert!(matches!(dup, Err(Error::DuplicateRelation(_))));
        // empty relations are allowed
        let t = Template::new(2)
            .unwrap()
            .relation("never", 2, Vec::<[u8; 2]>::new())
            .unwrap();
        assert!(t.get(RelId(0)).is_empty());
    }

    #[test]
    fn relation_contains_and_dedup() {
        let r = Relation::new(2, [[1, 0], [0, 1], [1, 0]]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.contains(&[0, 1]));
        assert!(!r.contains(&[0, 0]));
        assert!(!r.contains(&[0]));
        let lt = Relation::from_predicate(3, 2, |t| t[0] < t[1]).unwrap();
        assert_eq!(lt.len(), 3);
    }

    #[test]
    fn restrict_identity_and_shrink() {
        let t = neq2();
        let t3 = triangle(&t);
        let same = t3.restrict(&[DomainSet::full(2); 3]).unwrap();
        assert_eq!(same, t3);

        let x = t3.variable_id("x").unwrap();
        let r = t3.with_potato(x, DomainSet::singleton(0)).unwrap();
        let xy: Vec<Vec<u8>> = r.effective_tuples(ConstraintId(0)).map(|t| t.to_vec()).collect();
        assert_eq!(xy, vec![vec![0, 1]]);
        // the original is untouched
        assert_eq!(t3.effective_tuples(ConstraintId(0)).count(), 2);

        let empty = t3.with_potato(x, DomainSet::EMPTY).unwrap();
        assert_eq!(empty.effective_tuples(ConstraintId(0)).count(), 0);
        assert_eq!(empty.effective_tuples(ConstraintId(2)).count(), 0);
        assert_eq!(empty.effective_tuples(ConstraintId(1)).count(), 2);
    }

    #[test]
    fn restrict_rejects_growth() {
        let t = neq2();
        let inst = triangle(&t).with_potato(VarId(0), DomainSet::singleton(1)).unwrap();
        let err = inst.with_potato(VarId(0), DomainSet::full(2)).unwrap_err();
        assert!(matches!(err, Error::PotatoGrows { variable } if variable == "x"));
    }

    #[test]
    fn restrict_is_idempotent() {
        let t = neq2();
        let t3 = triangle(&t);
        let p = vec![DomainSet::singleton(0), DomainSet::full(2), DomainSet::singleton(1)];
        let once = t3.restrict(&p).unwrap();
        let twice = once.restrict(&p).unwrap();
        for c in t3.constraint_ids() {
            let a: Vec<_> = once.effective_tuples(c).collect();
            let b: Vec<_> = twice.effective_tuples(c).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn check_solution_cases() {
        let t = neq2();
        let edge = Instance::builder(&t)
            .variables(["x", "y"])
            .constraint(["x", "y"], "neq")
            .build()
            .unwrap();
        assert!(check_solution(&edge, &Assignment::total(vec![0, 1])).unwrap());

        let t3 = triangle(&t);
        assert!(!check_solution(&t3, &Assignment::total(vec![0, 1, 0])).unwrap());
        let pinned = t3.with_potato(VarId(0), DomainSet::singleton(1)).unwrap();
        assert!(!check_solution(&pinned, &Assignment::total(vec![0, 1, 0])).unwrap());

        let mut partial = Assignment::empty(3);
        partial.set(VarId(0), 0);
        assert!(matches!(
            check_solution(&t3, &partial),
            Err(Error::PartialAssignment(v)) if v == "y"
        ));
    }

    #[test]
    fn materialize_keeps_solutions_and_effective_tuples() {
        let t = neq2();
        let inst = triangle(&t).with_potato(VarId(0), DomainSet::singleton(0)).unwrap();
        let m = inst.materialize();
        for c in inst.constraint_ids() {
            let a: Vec<_> = inst.effective_tuples(c).collect();
            let b: Vec<_> = m.relation_of(c).tuples().collect();
            assert_eq!(a, b);
        }
        // constraint 1 (y,z) is unrestricted, constraints 0 and 2 differ
        assert_eq!(m.template().num_relations(), 3);
    }

    #[test]
    fn connectivity() {
        let t = neq2();
        assert!(triangle(&t).is_connected());
        let two = Instance::builder(&t).variables(["a", "b"]).build().unwrap();
        assert!(!two.is_connected());
    }
}

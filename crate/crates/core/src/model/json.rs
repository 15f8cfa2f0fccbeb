//! JSON documents for templates and instances.
//!
//! Template:
//! `{ "domain": ["a","b"] | 2, "relations": { "neq": { "arity": 2, "tuples": [[0,1],[1,0]] } } }`
//!
//! Instance:
//! `{ "variables": ["x","y"], "constraints": [{ "scope": ["x","y"], "relation": "neq" }],
//!    "potatoes": { "x": [0] } }`
//!
//! Values may be written as indices or as names from the template domain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Instance, Relation, Template};
use crate::domain::Value;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Index(u64),
    Name(String),
}

impl ValueDoc {
    /// Resolves against the template domain. Names are matched first, then
    /// integer-looking strings as indices.
    pub fn resolve(&self, template: &Template) -> Option<Value> {
        match self {
            ValueDoc::Index(i) => ((*i as usize) < template.domain_size()).then_some(*i as Value),
            ValueDoc::Name(n) => template.value_index(n),
        }
    }

    pub fn for_value(template: &Template, v: Value) -> ValueDoc {
        if template.has_default_value_names() {
            ValueDoc::Index(v as u64)
        } else {
            ValueDoc::Name(template.value_name(v).to_string())
        }
    }
}

impl fmt::Display for ValueDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDoc::Index(i) => write!(f, "{i}"),
            ValueDoc::Name(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainDoc {
    Size(usize),
    Names(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub arity: usize,
    pub tuples: Vec<Vec<ValueDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateDoc {
    pub domain: DomainDoc,
    pub relations: BTreeMap<String, RelationDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub scope: Vec<String>,
    pub relation: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub variables: Vec<String>,
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potatoes: Option<BTreeMap<String, Vec<ValueDoc>>>,
}

impl Template {
    pub fn from_doc(doc: &TemplateDoc) -> Result<Self> {
        let mut template = match &doc.domain {
            DomainDoc::Size(n) => Template::new(*n)?,
            DomainDoc::Names(names) => Template::with_value_names(names.clone())?,
        };
        for (name, rel) in &doc.relations {
            let bad = |reason: String| Error::BadRelation {
                name: name.clone(),
                reason,
            };
            let mut tuples = Vec::with_capacity(rel.tuples.len());
            for t in &rel.tuples {
                let resolved: Option<Vec<Value>> = t.iter().map(|v| v.resolve(&template)).collect();
                tuples.push(resolved.ok_or_else(|| bad(format!("tuple {t:?} leaves the domain")))?);
            }
            let relation = Relation::new(rel.arity, tuples).map_err(|e| match e {
                Error::BadRelation { reason, .. } => bad(reason),
                other => other,
            })?;
            template.add_relation(name.clone(), relation)?;
        }
        Ok(template)
    }

    pub fn to_doc(&self) -> TemplateDoc {
        let domain = if self.has_default_value_names() {
            DomainDoc::Size(self.domain_size())
        } else {
            DomainDoc::Names(self.value_names().to_vec())
        };
        let relations = self
            .relations()
            .map(|(_, name, rel)| {
                let tuples = rel
                    .tuples()
                    .map(|t| t.iter().map(|&v| ValueDoc::for_value(self, v)).collect())
                    .collect();
                (
                    name.to_string(),
                    RelationDoc {
                        arity: rel.arity(),
                        tuples,
                    },
                )
            })
            .collect();
        TemplateDoc { domain, relations }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }
}

impl Instance {
    /// Document form; only non-full potatoes are written out.
    pub fn to_doc(&self) -> InstanceDoc {
        let t = self.template();
        let potatoes: BTreeMap<String, Vec<ValueDoc>> = self
            .var_ids()
            .filter(|&v| self.potato(v) != t.full())
            .map(|v| {
                (
                    self.variable_name(v).to_string(),
                    self.potato(v).iter().map(|a| ValueDoc::for_value(t, a)).collect(),
                )
            })
            .collect();
        InstanceDoc {
            variables: self.variables().to_vec(),
            constraints: self
                .constraints()
                .iter()
                .map(|c| super::ConstraintDoc {
                    scope: c.scope.iter().map(|&v| self.variable_name(v).to_string()).collect(),
                    relation: t.relation_name(c.relation).to_string(),
                })
                .collect(),
            potatoes: (!potatoes.is_empty()).then_some(potatoes),
        }
    }

    pub fn from_json(template: Arc<Template>, text: &str) -> Result<Self> {
        Self::from_doc(template, &serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSet;
    use crate::model::VarId;
    use proptest::prelude::*;

    #[test]
    fn parses_named_domain() {
        let text = r#"{
            "domain": ["lo", "hi"],
            "relations": { "neq": { "arity": 2, "tuples": [["lo","hi"], [1, 0]] } }
        }"#;
        let t = Template::from_json(text).unwrap();
        assert_eq!(t.domain_size(), 2);
        let r = t.get(t.relation_id("neq").unwrap());
        assert!(r.contains(&[0, 1]) && r.contains(&[1, 0]));
        let back = Template::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_out_of_domain_tuple() {
        let text = r#"{ "domain": 2, "relations": { "r": { "arity": 1, "tuples": [[2]] } } }"#;
        assert!(matches!(Template::from_json(text), Err(Error::BadRelation { .. })));
        assert!(matches!(Template::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn instance_with_named_potatoes() {
        let t = Arc::new(
            Template::from_json(
                r#"{ "domain": ["a","b","c"], "relations": { "eq": { "arity": 2, "tuples": [["a","a"],["b","b"],["c","c"]] } } }"#,
            )
            .unwrap(),
        );
        let inst = Instance::from_json(
            Arc::clone(&t),
            r#"{ "variables": ["x","y"], "constraints": [{"scope":["x","y"],"relation":"eq"}], "potatoes": {"y": ["b","c"]} }"#,
        )
        .unwrap();
        assert_eq!(inst.potato(VarId(0)), DomainSet::full(3));
        assert_eq!(inst.potato(VarId(1)), DomainSet::from_iter([1, 2]));
        let back = Instance::from_json(t, &inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    fn arb_instance() -> impl Strategy<Value = (Arc<Template>, InstanceDoc)> {
        let t = Arc::new(
            Template::new(3)
                .unwrap()
                .relation("lt", 2, [[0, 1], [0, 2], [1, 2]])
                .unwrap()
                .relation("one", 1, [[1]])
                .unwrap(),
        );
        (
            2usize..6,
            prop::collection::vec((0usize..6, 0usize..6, any::<bool>()), 0..8),
            prop::collection::vec(prop::option::of(1u64..8), 6),
        )
            .prop_map(move |(n, cons, pots)| {
                let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                let constraints = cons
                    .into_iter()
                    .map(|(a, b, unary)| ConstraintDoc {
                        scope: if unary {
                            vec![vars[a % n].clone()]
                        } else {
                            vec![vars[a % n].clone(), vars[b % n].clone()]
                        },
                        relation: if unary { "one" } else { "lt" }.into(),
                    })
                    .collect();
                let potatoes = vars
                    .iter()
                    .zip(pots)
                    .filter_map(|(v, p)| {
                        p.map(|bits| {
                            let set = DomainSet::from_bits(bits);
                            (v.clone(), set.iter().map(|a| ValueDoc::Index(a as u64)).collect())
                        })
                    })
                    .collect();
                (
                    Arc::clone(&t),
                    InstanceDoc {
                        variables: vars,
                        constraints,
                        potatoes: Some(potatoes),
                    },
                )
            })
    }

    proptest! {
        #[test]
        fn json_round_trip((t, doc) in arb_instance()) {
            let inst = Instance::from_doc(Arc::clone(&t), &doc).unwrap();
            let again = Instance::from_json(Arc::clone(&t), &inst.to_json()).unwrap();
            prop_assert_eq!(&again, &inst);
            prop_assert_eq!(again.to_json(), inst.to_json());
        }
    }
}

//! Bundled templates.
//!
//! | template     | bounded width | reason                                      |
//! |--------------|---------------|---------------------------------------------|
//! | [`neq2`]     | yes           | majority polymorphism (2-colouring)         |
//! | [`two_sat`]  | yes           | majority polymorphism                       |
//! | [`horn_sat`] | yes           | `min` is a semilattice polymorphism         |
//! | [`neq3`]     | no            | 3-colouring is NP-complete                  |
//! | [`z2_linear`]| no            | linear equations over Z2 can "count"        |
//!
//! The majority and `min` operations are conservative, so adding arbitrary
//! unary constraints (potatoes) keeps the first three templates of bounded
//! width.

use crate::model::{Relation, Template};

fn binary(name: &str, keep: impl Fn(u8, u8) -> bool, t: Template) -> Template {
    let mut t = t;
    let rel = Relation::from_predicate(t.domain_size(), 2, |a| keep(a[0], a[1])).expect("binary relation");
    t.add_relation(name, rel).expect("fresh name");
    t
}

/// `({0,1}, neq)`.
pub fn neq2() -> Template {
    binary("neq", |a, b| a != b, Template::new(2).expect("size 2"))
}

/// `({0,1,2}, neq)`.
pub fn neq3() -> Template {
    binary("neq", |a, b| a != b, Template::new(3).expect("size 3"))
}

/// Boolean 2-clauses `or_pp = x ∨ y`, `or_pn = x ∨ ¬y`, `or_np = ¬x ∨ y`,
/// `or_nn = ¬x ∨ ¬y`, and the constants `one`, `zero`.
pub fn two_sat() -> Template {
    let mut t = Template::new(2).expect("size 2");
    for (name, sx, sy) in [("or_pp", 1, 1), ("or_pn", 1, 0), ("or_np", 0, 1), ("or_nn", 0, 0)] {
        t = binary(name, move |a, b| a == sx || b == sy, t);
    }
    t.relation("one", 1, [[1]])
        .and_then(|t| t.relation("zero", 1, [[0]]))
        .expect("unary relations")
}

/// Horn clauses: `one`, `zero`, `imp = x → y`, `nand = ¬x ∨ ¬y` and
/// `horn3 = x ∧ y → z`.
pub fn horn_sat() -> Template {
    let t = Template::new(2)
        .and_then(|t| t.relation("one", 1, [[1]]))
        .and_then(|t| t.relation("zero", 1, [[0]]))
        .expect("unary relations");
    let t = binary("imp", |a, b| a == 0 || b == 1, t);
    let mut t = binary("nand", |a, b| a == 0 || b == 0, t);
    let horn3 = Relation::from_predicate(2, 3, |a| !(a[0] == 1 && a[1] == 1 && a[2] == 0)).expect("ternary");
    t.add_relation("horn3", horn3).expect("fresh name");
    t
}

/// `x ⊕ y ⊕ z = 0` (`even`) and `x ⊕ y ⊕ z = 1` (`odd`).
pub fn z2_linear() -> Template {
    let mut t = Template::new(2).expect("size 2");
    for (name, parity) in [("even", 0), ("odd", 1)] {
        let rel = Relation::from_predicate(2, 3, |a| a[0] ^ a[1] ^ a[2] == parity).expect("ternary");
        t.add_relation(name, rel).expect("fresh name");
    }
    t
}

/// Looks a bundled template up by name.
pub fn by_name(name: &str) -> Option<Template> {
    Some(match name {
        "neq2" => neq2(),
        "neq3" => neq3(),
        "two_sat" | "2sat" => two_sat(),
        "horn_sat" | "horn" => horn_sat(),
        "z2_linear" | "z2" => z2_linear(),
        _ => return None,
    })
}

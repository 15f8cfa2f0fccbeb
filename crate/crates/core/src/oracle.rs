//! Ground truth at desk scale: brute-force solving and polymorphisms.
//!
//! Nothing here calls into the propagation engines.

use crate::domain::{DomainSet, Value};
use crate::error::{Error, Result};
use crate::model::{Assignment, ConstraintId, Instance, Template};

/// Largest instance [`brute_solve`] accepts.
pub const MAX_BRUTE_VARIABLES: usize = 24;
/// Largest search space `|A|^n` [`brute_solve`] accepts.
pub const MAX_BRUTE_SPACE: f64 = 1e9;

fn guard(instance: &Instance) -> Result<()> {
    let n = instance.num_variables();
    if n > MAX_BRUTE_VARIABLES {
        return Err(Error::TooLarge(format!("{n} variables > {MAX_BRUTE_VARIABLES}")));
    }
    let space = (instance.domain_size() as f64).powi(n as i32);
    if space > MAX_BRUTE_SPACE {
        return Err(Error::TooLarge(format!("|A|^n = {space:e} > {MAX_BRUTE_SPACE:e}")));
    }
    Ok(())
}

/// Calls `visit` on every solution (values in declaration order) until it
/// returns `false`. Variables are assigned in declaration order, values
/// ascending, and each constraint is checked once its last variable is set.
pub fn for_each_solution(instance: &Instance, mut visit: impl FnMut(&[Value]) -> bool) -> Result<()> {
    guard(instance)?;
    let n = instance.num_variables();
    let mut due: Vec<Vec<ConstraintId>> = vec![Vec::new(); n];
    for c in instance.constraint_ids() {
        let scope = &instance.constraint(c).scope;
        if let Some(last) = scope.iter().map(|v| v.0).max() {
            due[last].push(c);
        }
    }
    let domains: Vec<Vec<Value>> = instance.potatoes().iter().map(|p| p.iter().collect()).collect();
    let mut values: Vec<Value> = vec![0; n];
    let mut cursor: Vec<usize> = vec![0; n];
    let mut tuple: Vec<Value> = Vec::new();
    let consistent = |values: &[Value], i: usize, tuple: &mut Vec<Value>| {
        due[i].iter().all(|&c| {
            let con = instance.constraint(c);
            tuple.clear();
            tuple.extend(con.scope.iter().map(|v| values[v.0]));
            instance.template().get(con.relation).contains(tuple)
        })
    };
    if n == 0 {
        visit(&values);
        return Ok(());
    }
    let mut i = 0;
    loop {
        if cursor[i] < domains[i].len() {
            values[i] = domains[i][cursor[i]];
            cursor[i] += 1;
            if !consistent(&values, i, &mut tuple) {
                continue;
            }
            if i + 1 == n {
                if !visit(&values) {
                    return Ok(());
                }
                continue;
            }
            i += 1;
            cursor[i] = 0;
        } else {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
        }
    }
}

/// The lexicographically first solution, or `None` if there is none.
pub fn brute_solve(instance: &Instance) -> Result<Option<Assignment>> {
    let mut found = None;
    for_each_solution(instance, |s| {
        found = Some(Assignment::total(s.to_vec()));
        false
    })?;
    Ok(found)
}

pub fn count_solutions(instance: &Instance) -> Result<u64> {
    let mut count = 0;
    for_each_solution(instance, |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

/// For every variable, the values it takes in some solution.
pub fn solution_values(instance: &Instance) -> Result<Vec<DomainSet>> {
    let mut seen = vec![DomainSet::EMPTY; instance.num_variables()];
    for_each_solution(instance, |s| {
        for (set, &a) in seen.iter_mut().zip(s) {
            set.insert(a);
        }
        true
    })?;
    Ok(seen)
}

/// A total `k`-ary operation on `0..n`, stored as a table indexed by the
/// arguments in base `n`, first argument most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Operation {
    arity: usize,
    domain_size: usize,
    table: Vec<Value>,
}

impl Operation {
    pub fn new(arity: usize, domain_size: usize, table: Vec<Value>) -> Result<Self> {
        let size = domain_size
            .checked_pow(arity as u32)
            .ok_or_else(|| Error::TooLarge("operation table".into()))?;
        if table.len() != size || table.iter().any(|&v| v as usize >= domain_size) {
            return Err(Error::Pattern(format!(
                "operation table must have {size} entries in 0..{domain_size}"
            )));
        }
        Ok(Operation {
            arity,
            domain_size,
            table,
        })
    }

    pub fn from_fn(arity: usize, domain_size: usize, f: impl Fn(&[Value]) -> Value) -> Result<Self> {
        let size = domain_size
            .checked_pow(arity as u32)
            .ok_or_else(|| Error::TooLarge("operation table".into()))?;
        let mut args = vec![0; arity];
        let table = (0..size)
            .map(|i| {
                decode(i, domain_size, &mut args);
                f(&args)
            })
            .collect();
        Operation::new(arity, domain_size, table)
    }

    /// The `i`-th projection.
    pub fn projection(arity: usize, domain_size: usize, i: usize) -> Result<Self> {
        Operation::from_fn(arity, domain_size, |a| a[i])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn apply(&self, args: &[Value]) -> Value {
        self.table[encode(args, self.domain_size)]
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.domain_size as Value).all(|a| self.apply(&vec![a; self.arity]) == a)
    }
}

fn encode(args: &[Value], n: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a as usize)
}

fn decode(mut i: usize, n: usize, out: &mut [Value]) {
    for slot in out.iter_mut().rev() {
        *slot = (i % n) as Value;
        i /= n;
    }
}

/// Every relation of the template is closed under coordinatewise `f`.
pub fn is_polymorphism(template: &Template, f: &Operation) -> bool {
    if f.domain_size != template.domain_size() {
        return false;
    }
    template.relations().all(|(_, _, rel)| {
        closure_checks(rel, f.arity, template.domain_size())
            .iter()
            .all(|entries| {
                let image: Vec<Value> = entries.iter().map(|&e| f.table[e]).collect();
                rel.contains(&image)
            })
    })
}

// For every k-tuple of tuples of `rel`, the table entries of its columns.
fn closure_checks(rel: &crate::model::Relation, k: usize, n: usize) -> Vec<Vec<usize>> {
    let rows: Vec<&[Value]> = rel.tuples().collect();
    let mut out = Vec::new();
    if rows.is_empty() {
        return out;
    }
    let mut pick = vec![0usize; k];
    loop {
        let entries = (0..rel.arity())
            .map(|i| pick.iter().fold(0, |acc, &r| acc * n + rows[r][i] as usize))
            .collect();
        out.push(entries);
        let mut j = k;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < rows.len() {
                break;
            }
            pick[j] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolymorphismSearch {
    pub found: Vec<Operation>,
    /// More polymorphisms exist beyond `cap`.
    pub truncated: bool,
}

/// All polymorphisms of the given arity, in lexicographic table order, up to
/// `cap`. The only pruning is checking each closure condition as soon as its
/// table entries are fixed.
pub fn find_polymorphisms(
    template: &Template,
    arity: usize,
    idempotent_only: bool,
    cap: usize,
) -> Result<PolymorphismSearch> {
    let n = template.domain_size();
    let size = n
        .checked_pow(arity as u32)
        .filter(|&s| s <= 1 << 20)
        .ok_or_else(|| Error::TooLarge(format!("{n}^{arity} table entries")))?;
    let mut due: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); size];
    for (id, _, rel) in template.relations() {
        for entries in closure_checks(rel, arity, n) {
            let last = *entries.iter().max().expect("arity >= 1");
            due[last].push((id.0, entries));
        }
    }
    let mut fixed: Vec<Option<Value>> = vec![None; size];
    if idempotent_only {
        for a in 0..n as Value {
            fixed[encode(&vec![a; arity], n)] = Some(a);
        }
    }
    let mut out = PolymorphismSearch {
        found: Vec::new(),
        truncated: false,
    };
    let mut table: Vec<Value> = vec![0; size];
    let mut next: Vec<usize> = vec![0; size];
    let mut image = Vec::new();
    let ok = |table: &[Value], i: usize, image: &mut Vec<Value>| {
        due[i].iter().all(|(rel, entries)| {
            image.clear();
            image.extend(entries.iter().map(|&e| table[e]));
            template.get(crate::model::RelId(*rel)).contains(image)
        })
    };
    let mut i = 0;
    loop {
        let options = if fixed[i].is_some() { 1 } else { n };
        if next[i] < options {
            table[i] = fixed[i].unwrap_or(next[i] as Value);
            next[i] += 1;
            if !ok(&table, i, &mut image) {
                continue;
            }
            if i + 1 == size {
                if out.found.len() == cap {
                    out.truncated = true;
                    return Ok(out);
                }
                out.found.push(Operation::new(arity, n, table.clone())?);
                continue;
            }
            i += 1;
            next[i] = 0;
        } else {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
        }
    }
}

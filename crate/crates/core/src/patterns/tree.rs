use std::collections::VecDeque;

use crate::domain::DomainSet;
use crate::error::{Error, Result};
use crate::model::{ConstraintId, Instance, Occurrence, VarId};

/// Node cap for [`uct_unroll`].
pub const MAX_UCT_NODES: usize = 1_000_000;
/// Depth cap for [`uct_unroll`].
pub const MAX_UCT_DEPTH: usize = 4096;

/// A copy of an instance constraint inside a tree pattern. `scope[k]` is the
/// pattern variable at position `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeConstraint {
    pub constraint: ConstraintId,
    pub scope: Vec<usize>,
}

/// A tree-shaped instance with a root, a set of leaves and a homomorphism
/// `images` from pattern variables to instance variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePattern {
    images: Vec<VarId>,
    constraints: Vec<TreeConstraint>,
    root: usize,
    leaves: Vec<usize>,
}

impl TreePattern {
    /// Unchecked constructor; see [`TreePattern::validate`].
    pub fn new(images: Vec<VarId>, constraints: Vec<TreeConstraint>, root: usize, leaves: Vec<usize>) -> Self {
        TreePattern {
            images,
            constraints,
            root,
            leaves,
        }
    }

    /// The one-variable tree.
    pub fn single(v: VarId) -> Self {
        TreePattern::new(vec![v], Vec::new(), 0, Vec::new())
    }

    pub fn images(&self) -> &[VarId] {
        &self.images
    }

    pub fn constraints(&self) -> &[TreeConstraint] {
        &self.constraints
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn num_variables(&self) -> usize {
        self.images.len()
    }

    /// Variables plus constraints.
    pub fn num_nodes(&self) -> usize {
        self.images.len() + self.constraints.len()
    }

    /// Number of constraint positions each pattern variable occupies.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.images.len()];
        for tc in &self.constraints {
            for &u in &tc.scope {
                deg[u] += 1;
            }
        }
        deg
    }

    /// Checks the homomorphism, that the adjacency multigraph is a tree, and
    /// that leaves have degree one.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let bad = |m: String| Err(Error::Pattern(m));
        let n = self.images.len();
        if self.root >= n {
            return bad(format!("root {} out of range", self.root));
        }
        if let Some(v) = self.images.iter().find(|v| v.0 >= instance.num_variables()) {
            return bad(format!("image #{} is not an instance variable", v.0));
        }
        for (i, tc) in self.constraints.iter().enumerate() {
            if tc.constraint.0 >= instance.num_constraints() {
                return bad(format!("tree constraint {i}: unknown constraint #{}", tc.constraint.0));
            }
            let target = &instance.constraint(tc.constraint).scope;
            if tc.scope.len() != target.len() {
                return bad(format!("tree constraint {i}: arity mismatch"));
            }
            for (k, &u) in tc.scope.iter().enumerate() {
                if u >= n {
                    return bad(format!("tree constraint {i}: variable {u} out of range"));
                }
                if self.images[u] != target[k] {
                    return bad(format!(
                        "tree constraint {i}: position {k} does not map onto the instance scope"
                    ));
                }
                if tc.scope[..k].contains(&u) {
                    return bad(format!("tree constraint {i}: repeated variable {u}"));
                }
            }
        }
        // a connected graph with V vertices and V - 1 edges is a tree
        let edges: usize = self.constraints.iter().map(|tc| tc.scope.len()).sum();
        if edges + 1 != n + self.constraints.len() {
            return bad("adjacency multigraph is not a tree".into());
        }
        if !self.connected() {
            return bad("adjacency multigraph is disconnected".into());
        }
        let deg = self.degrees();
        if let Some(&l) = self.leaves.iter().find(|&&l| l >= n || deg[l] > 1) {
            return bad(format!("leaf {l} does not have degree one"));
        }
        Ok(())
    }

    fn connected(&self) -> bool {
        let n = self.images.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, tc) in self.constraints.iter().enumerate() {
            for &u in &tc.scope {
                adj[u].push(i);
            }
        }
        let mut seen_var = vec![false; n];
        let mut seen_con = vec![false; self.constraints.len()];
        let mut stack = vec![self.root];
        seen_var[self.root] = true;
        while let Some(u) = stack.pop() {
            for &i in &adj[u] {
                if !seen_con[i] {
                    seen_con[i] = true;
                    for &w in &self.constraints[i].scope {
                        if !seen_var[w] {
                            seen_var[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        seen_var.iter().all(|&s| s) && seen_con.iter().all(|&s| s)
    }
}

/// Root values over the solutions of `t` (restricted by the instance
/// potatoes along the homomorphism) with every leaf valued in `set`.
///
/// Bottom-up: each variable gets its potato, cut to `set` at leaves and
/// intersected with the projection of every child constraint.
pub fn propagate_tree(instance: &Instance, set: DomainSet, t: &TreePattern) -> DomainSet {
    let n = t.images.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, tc) in t.constraints.iter().enumerate() {
        for (k, &u) in tc.scope.iter().enumerate() {
            adj[u].push((i, k));
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([t.root]);
    seen[t.root] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(i, k) in &adj[u] {
            if parent[u] == Some(i) {
                continue;
            }
            for (j, &w) in t.constraints[i].scope.iter().enumerate() {
                if j != k && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(i);
                    queue.push_back(w);
                }
            }
        }
    }

    let mut value = vec![DomainSet::EMPTY; n];
    let mut is_leaf = vec![false; n];
    for &u in &t.leaves {
        is_leaf[u] = true;
    }
    for &u in order.iter().rev() {
        let mut cur = instance.potato(t.images[u]);
        if is_leaf[u] {
            cur &= set;
        }
        for &(i, k) in &adj[u] {
            if parent[u] == Some(i) || cur.is_empty() {
                continue;
            }
            let tc = &t.constraints[i];
            let mut support = DomainSet::EMPTY;
            for tuple in instance.effective_tuples(tc.constraint) {
                if tc
                    .scope
                    .iter()
                    .enumerate()
                    .all(|(j, &w)| j == k || value[w].contains(tuple[j]))
                {
                    support.insert(tuple[k]);
                }
            }
            cur &= support;
        }
        value[u] = cur;
    }
    value[t.root]
}

/// `2 * |variables| * |A|`, enough rounds for AC to stabilise.
pub fn default_uct_depth(instance: &Instance) -> usize {
    (2 * instance.num_variables() * instance.domain_size()).min(MAX_UCT_DEPTH)
}

/// Depth-`depth` truncation of the universal covering tree of `instance`
/// rooted at `root`. Depth counts variable layers. The unrolling never
/// re-crosses the occurrence it arrived through. Leaves are the non-root
/// variables of degree one.
pub fn uct_unroll(instance: &Instance, root: VarId, depth: usize) -> Result<TreePattern> {
    if depth > MAX_UCT_DEPTH {
        return Err(Error::Pattern(format!("depth {depth} exceeds the cap {MAX_UCT_DEPTH}")));
    }
    if root.0 >= instance.num_variables() {
        return Err(Error::Pattern(format!("unknown root variable #{}", root.0)));
    }
    let mut images = vec![root];
    let mut via: Vec<Option<Occurrence>> = vec![None];
    let mut layer = vec![0usize];
    let mut constraints = Vec::new();
    let mut i = 0;
    while i < images.len() {
        if layer[i] < depth {
            for &occ in instance.occurrences(images[i]) {
                if via[i] == Some(occ) {
                    continue;
                }
                let scope = &instance.constraint(occ.constraint).scope;
                let mut tscope = Vec::with_capacity(scope.len());
                for (k, &w) in scope.iter().enumerate() {
                    if k == occ.position {
                        tscope.push(i);
                    } else {
                        tscope.push(images.len());
                        images.push(w);
                        via.push(Some(Occurrence {
                            constraint: occ.constraint,
                            position: k,
                        }));
                        layer.push(layer[i] + 1);
                    }
                }
                constraints.push(TreeConstraint {
                    constraint: occ.constraint,
                    scope: tscope,
                });
                if images.len() + constraints.len() > MAX_UCT_NODES {
                    return Err(Error::Pattern(format!(
                        "unrolling exceeds {MAX_UCT_NODES} nodes; lower the depth"
                    )));
                }
            }
        }
        i += 1;
    }
    let mut t = TreePattern::new(images, constraints, 0, Vec::new());
    let deg = t.degrees();
    t.leaves = (1..t.images.len()).filter(|&u| deg[u] == 1).collect();
    Ok(t)
}

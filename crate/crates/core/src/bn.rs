//! Discrete Bayesian networks over binary nodes, with exact joint and
//! marginal queries and conversion of coherent fault trees.

use std::collections::HashSet;

use crate::{Error, Result};

/// One node of a binary Bayesian network. Value 1 means the node
/// functions; value 0 means it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct BnNode {
    pub name: String,
    /// Indices into the network's node list, in CPT bit order: parent 0 is
    /// the most significant bit of the row index.
    pub parents: Vec<usize>,
    /// P(node = 1 | parent configuration), one row per configuration;
    /// length 2^parents. Row r encodes parent values by bits of r.
    pub p_given_parents: Vec<f64>,
}

/// Binary Bayesian network. Nodes must be listed in an order that can be
/// topologically sorted; `validate` checks acyclicity explicitly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BayesNet {
    pub nodes: Vec<BnNode>,
}

impl BayesNet {
    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::Schema(format!("no node named {name:?}")))
    }

    /// First violation reported by [`bn_validate`], if any.
    pub fn validate(&self) -> Result<()> {
        match bn_validate(self).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Kahn's algorithm; errors on a cycle, naming a node on it.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![vec![]; n];
        for (i, node) in self.nodes.iter().enumerate() {
            indegree[i] = node.parents.len();
            for &p in &node.parents {
                children[p].push(i);
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
            return Err(Error::Schema(format!(
                "cycle through node {:?}",
                self.nodes[stuck].name
            )));
        }
        Ok(order)
    }

    fn cpt_row(&self, i: usize, values: &[u8]) -> usize {
        let node = &self.nodes[i];
        let mut row = 0usize;
        for &p in &node.parents {
            row = (row << 1) | values[p] as usize;
        }
        row
    }

    /// Joint probability of one full assignment (one value per node).
    pub fn joint_probability(&self, values: &[u8]) -> Result<f64> {
        self.validate()?;
        if values.len() != self.nodes.len() {
            return Err(Error::Schema(format!(
                "{} values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::Data("node values must be 0 or 1".into()));
        }
        let mut prob = 1.0;
        for (i, node) in self.nodes.iter().enumerate() {
            let p1 = node.p_given_parents[self.cpt_row(i, values)];
            prob *= if values[i] == 1 { p1 } else { 1.0 - p1 };
        }
        Ok(prob)
    }

    /// Marginal P(node = 1), by exact enumeration of ancestor
    /// configurations. Intended for the small networks this crate targets.
    pub fn marginal(&self, name: &str) -> Result<f64> {
        self.validate()?;
        let target = self.node_index(name)?;
        // only ancestors of the target affect its marginal
        let mut relevant = HashSet::new();
        let mut stack = vec![target];
        while let Some(i) = stack.pop() {
            if relevant.insert(i) {
                stack.extend(self.nodes[i].parents.iter().copied());
            }
        }
        let mut relevant: Vec<usize> = relevant.into_iter().collect();
        relevant.sort_unstable();
        let order: Vec<usize> = self
            .topological_order()?
            .into_iter()
            .filter(|i| relevant.contains(i))
            .collect();
        if order.len() > 25 {
            return Err(Error::Numerical(format!(
                "marginal would enumerate 2^{} configurations",
                order.len()
            )));
        }
        let mut values = vec![0u8; self.nodes.len()];
        let mut total = 0.0;
        let m = order.len();
        for mask in 0..(1u64 << m) {
            for (b, &i) in order.iter().enumerate() {
                values[i] = ((mask >> b) & 1) as u8;
            }
            if values[target] != 1 {
                continue;
            }
            let mut prob = 1.0;
            for &i in &order {
                let p1 = self.nodes[i].p_given_parents[self.cpt_row(i, &values)];
                prob *= if values[i] == 1 { p1 } else { 1.0 - p1 };
            }
            total += prob;
        }
        Ok(total)
    }
}

/// All violations in the network: name clashes, parent-index problems,
/// CPT shape, probability bounds, and acyclicity. Empty means valid.
pub fn bn_validate(net: &BayesNet) -> Vec<Error> {
    let mut out = Vec::new();
    if net.nodes.is_empty() {
        out.push(Error::Empty("network has no nodes".into()));
        return out;
    }
    let mut names = HashSet::new();
    for node in &net.nodes {
        if !names.insert(node.name.as_str()) {
            out.push(Error::Schema(format!("duplicate node name {:?}", node.name)));
        }
    }
    let mut structure_ok = true;
    for (i, node) in net.nodes.iter().enumerate() {
        let mut seen = HashSet::new();
        for &p in &node.parents {
            if p >= net.nodes.len() {
                out.push(Error::Schema(format!(
                    "node {:?} has parent index {p} out of range",
                    node.name
                )));
                structure_ok = false;
            } else if p == i {
                out.push(Error::Schema(format!("node {:?} is its own parent", node.name)));
            } else if !seen.insert(p) {
                out.push(Error::Schema(format!(
                    "node {:?} lists parent {:?} twice",
                    node.name, net.nodes[p].name
                )));
            }
        }
        let want = 1usize << node.parents.len();
        if node.p_given_parents.len() != want {
            out.push(Error::Schema(format!(
                "node {:?} has {} CPT rows for {} parents (need {want})",
                node.name,
                node.p_given_parents.len(),
                node.parents.len()
            )));
        }
        for (r, &p) in node.p_given_parents.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                out.push(Error::Param(format!(
                    "node {:?} CPT row {r}: probability {p} outside [0,1]",
                    node.name
                )));
            }
        }
    }
    if structure_ok {
        if let Err(e) = net.topological_order() {
            out.push(e);
        }
    }
    out
}

/// System reliability by composition: the designated system node's parents
/// are the components, whose current success probabilities are supplied
/// directly. Sums CPT(S=1 | config) over all parent configurations
/// weighted by the component probabilities.
pub fn bn_system_reliability(net: &BayesNet, system_node: &str, comp_p: &[f64]) -> Result<f64> {
    net.validate()?;
    let s = net.node_index(system_node)?;
    let node = &net.nodes[s];
    if comp_p.len() != node.parents.len() {
        return Err(Error::Schema(format!(
            "{} component probabilities for {} parents of {:?}",
            comp_p.len(),
            node.parents.len(),
            system_node
        )));
    }
    for (i, &p) in comp_p.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Param(format!("component {i} probability {p} outside [0,1]")));
        }
    }
    let k = node.parents.len();
    let mut total = 0.0;
    for row in 0..(1usize << k) {
        // bit order matches cpt_row: component 0 is the most significant
        let mut w = 1.0;
        for (j, &p) in comp_p.iter().enumerate() {
            let up = (row >> (k - 1 - j)) & 1 == 1;
            w *= if up { p } else { 1.0 - p };
        }
        total += node.p_given_parents[row] * w;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Fault trees
// ---------------------------------------------------------------------------

/// Coherent fault tree. Events describe failure; basic events carry
/// failure probabilities and gates combine child failures.
#[derive(Debug, Clone, PartialEq)]
pub enum FaultTree {
    /// Named basic event with a failure probability.
    Basic { name: String, p_fail: f64 },
    /// Fails when any child fails.
    Or { name: String, children: Vec<FaultTree> },
    /// Fails when all children fail.
    And { name: String, children: Vec<FaultTree> },
}

impl FaultTree {
    pub fn name(&self) -> &str {
        match self {
            FaultTree::Basic { name, .. }
            | FaultTree::Or { name, .. }
            | FaultTree::And { name, .. } => name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        self.validate_inner(&mut names)
    }

    fn validate_inner<'a>(&'a self, names: &mut HashSet<&'a str>) -> Result<()> {
        if !names.insert(self.name()) {
            return Err(Error::Schema(format!("duplicate event name {:?}", self.name())));
        }
        match self {
            FaultTree::Basic { name, p_fail } => {
                if !(0.0..=1.0).contains(p_fail) {
                    return Err(Error::Param(format!(
                        "event {name:?}: failure probability {p_fail} outside [0,1]"
                    )));
                }
                Ok(())
            }
            FaultTree::Or { name, children } | FaultTree::And { name, children } => {
                if children.is_empty() {
                    return Err(Error::Empty(format!("gate {name:?} has no children")));
                }
                for c in children {
                    c.validate_inner(names)?;
                }
                Ok(())
            }
        }
    }
}

/// Converts a fault tree into a Bayesian network over success indicators.
/// Node value 1 means the event did not occur, so an AND of failures
/// becomes an OR of successes and vice versa. Returns the network and the
/// index of the top (system) node.
pub fn fault_tree_to_bn(tree: &FaultTree) -> Result<(BayesNet, usize)> {
    tree.validate()?;
    let mut net = BayesNet::default();
    let top = add_event(tree, &mut net);
    net.validate()?;
    Ok((net, top))
}

fn add_event(tree: &FaultTree, net: &mut BayesNet) -> usize {
    match tree {
        FaultTree::Basic { name, p_fail } => {
            net.nodes.push(BnNode {
                name: name.clone(),
                parents: vec![],
                p_given_parents: vec![1.0 - p_fail],
            });
        }
        FaultTree::Or { name, children } | FaultTree::And { name, children } => {
            let parents: Vec<usize> = children.iter().map(|c| add_event(c, net)).collect();
            let k = parents.len();
            // OR gate fails if any child fails: success = all children
            // succeed. AND gate fails only if all fail: success = any
            // child succeeds.
            let require_all = matches!(tree, FaultTree::Or { .. });
            let rows = (0..(1usize << k))
                .map(|r| {
                    let ones = (r.count_ones() as usize) == k;
                    let any = r != 0;
                    let up = if require_all { ones } else { any };
                    if up {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            net.nodes.push(BnNode {
                name: name.clone(),
                parents,
                p_given_parents: rows,
            });
        }
    }
    net.nodes.len() - 1
}

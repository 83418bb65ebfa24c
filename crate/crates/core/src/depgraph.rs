//! Gate-dependency DAG and circuit-path enumeration.
//!
//! Nodes are the RXX gates of a native circuit, in circuit order; every
//! single-qubit gate is attached as a pre-op to the next RXX node on its
//! qubit. A trailing run of single-qubit gates (or a qubit with no RXX at
//! all) becomes a terminal cluster node. An edge (u, v) exists iff u and v
//! share a qubit and u is v's latest predecessor on that qubit.
//!
//! A circuit path extends along the edges: the candidate set is the
//! executable unvisited children of nodes already in the path, falling back
//! to all executable unvisited nodes only when that set is empty. Candidates
//! are tried in ascending node id, a path ends at `n_g` RXX nodes or when no
//! candidate remains, and enumeration stops after `n_p` complete paths.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp, QubitId};

pub type NodeId = usize;
pub type Path = Vec<NodeId>;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Rxx {
        theta: f64,
        qubits: [QubitId; 2],
        /// Single-qubit gates that must run immediately before this gate,
        /// one list per operand.
        pre_ops: [Vec<GateOp>; 2],
    },
    /// Trailing single-qubit gates on one qubit.
    Terminal { qubit: QubitId, ops: Vec<GateOp> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DagNode {
    pub id: NodeId,
    pub kind: NodeKind,
}

impl DagNode {
    pub fn is_rxx(&self) -> bool {
        matches!(self.kind, NodeKind::Rxx { .. })
    }

    pub fn qubits(&self) -> &[QubitId] {
        match &self.kind {
            NodeKind::Rxx { qubits, .. } => qubits,
            NodeKind::Terminal { qubit, .. } => std::slice::from_ref(qubit),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("all nodes are already executed")]
    EmptyDag,
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateDag {
    nodes: Vec<DagNode>,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    executed: Vec<bool>,
    num_executed: usize,
    measurements: Vec<(QubitId, usize)>,
    num_qubits: usize,
}

/// Builds the dependency DAG of a native circuit. Barriers carry no
/// hardware meaning here and are dropped.
pub fn build_dag(c: &Circuit) -> GateDag {
    assert!(c.is_native(), "build_dag requires a lowered circuit");
    let mut nodes: Vec<DagNode> = Vec::new();
    let mut pending: Vec<Vec<GateOp>> = vec![Vec::new(); c.num_qubits];
    let mut measurements = Vec::new();
    for g in &c.gates {
        match &g.kind {
            GateKind::Rxx(theta) => {
                let qubits = [g.qubits[0], g.qubits[1]];
                let pre_ops = [
                    std::mem::take(&mut pending[qubits[0].0]),
                    std::mem::take(&mut pending[qubits[1].0]),
                ];
                nodes.push(DagNode {
                    id: nodes.len(),
                    kind: NodeKind::Rxx { theta: *theta, qubits, pre_ops },
                });
            }
            GateKind::Rx(_) | GateKind::Ry(_) | GateKind::R { .. } => {
                pending[g.qubits[0].0].push(g.clone());
            }
            GateKind::Measure { cbit } => measurements.push((g.qubits[0], *cbit)),
            GateKind::Barrier => {}
            GateKind::Named { .. } => unreachable!("circuit is native"),
        }
    }
    for (q, ops) in pending.into_iter().enumerate() {
        if !ops.is_empty() {
            nodes.push(DagNode {
                id: nodes.len(),
                kind: NodeKind::Terminal { qubit: QubitId(q), ops },
            });
        }
    }
    // per-qubit latest-predecessor edges
    let mut parents: Vec<Vec<NodeId>> = vec![Vec::new(); nodes.len()];
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); nodes.len()];
    let mut last_on_qubit: Vec<Option<NodeId>> = vec![None; c.num_qubits];
    for node in &nodes {
        for q in node.qubits() {
            if let Some(p) = last_on_qubit[q.0] {
                if !parents[node.id].contains(&p) {
                    parents[node.id].push(p);
                    children[p].push(node.id);
                }
            }
        }
        for q in node.qubits() {
            last_on_qubit[q.0] = Some(node.id);
        }
    }
    for list in parents.iter_mut().chain(children.iter_mut()) {
        list.sort_unstable();
    }
    let executed = vec![false; nodes.len()];
    GateDag {
        nodes,
        parents,
        children,
        executed,
        num_executed: 0,
        measurements,
        num_qubits: c.num_qubits,
    }
}

impl GateDag {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &DagNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.parents[id]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id]
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_executed(&self, id: NodeId) -> bool {
        self.executed[id]
    }

    pub fn is_exhausted(&self) -> bool {
        self.num_executed == self.nodes.len()
    }

    pub fn unexecuted_count(&self) -> usize {
        self.nodes.len() - self.num_executed
    }

    /// Measurements recorded in circuit order (qubit, classical bit).
    pub fn measurements(&self) -> &[(QubitId, usize)] {
        &self.measurements
    }

    fn executable_given(&self, id: NodeId, in_path: &[bool]) -> bool {
        !self.executed[id]
            && !in_path[id]
            && self.parents[id].iter().all(|&p| self.executed[p] || in_path[p])
    }

    /// Unexecuted nodes whose parents are all executed, ascending by id.
    pub fn executable_nodes(&self) -> Vec<NodeId> {
        let in_path = vec![false; self.nodes.len()];
        (0..self.nodes.len()).filter(|&id| self.executable_given(id, &in_path)).collect()
    }

    /// Depth-first path enumeration; see the module docs for the exact
    /// extension rule.
    pub fn enumerate_paths(&self, n_g: usize, n_p: usize) -> Result<Vec<Path>, DagError> {
        if self.is_exhausted() {
            return Err(DagError::EmptyDag);
        }
        let mut out: Vec<Path> = Vec::new();
        let mut in_path = vec![false; self.nodes.len()];
        let mut path: Path = Vec::new();
        self.dfs(n_g, n_p, &mut path, &mut in_path, 0, &mut out);
        Ok(out)
    }

    fn dfs(
        &self,
        n_g: usize,
        n_p: usize,
        path: &mut Path,
        in_path: &mut Vec<bool>,
        rxx_count: usize,
        out: &mut Vec<Path>,
    ) {
        if out.len() >= n_p {
            return;
        }
        if rxx_count >= n_g {
            out.push(path.clone());
            return;
        }
        // children of path nodes first, all executable nodes as fallback
        let mut candidates: BTreeSet<NodeId> = BTreeSet::new();
        for &n in path.iter() {
            for &ch in &self.children[n] {
                if self.executable_given(ch, in_path) {
                    candidates.insert(ch);
                }
            }
        }
        if candidates.is_empty() {
            for id in 0..self.nodes.len() {
                if self.executable_given(id, in_path) {
                    candidates.insert(id);
                }
            }
        }
        if candidates.is_empty() {
            if !path.is_empty() {
                out.push(path.clone());
            }
            return;
        }
        for id in candidates {
            if out.len() >= n_p {
                return;
            }
            path.push(id);
            in_path[id] = true;
            let inc = usize::from(self.nodes[id].is_rxx());
            self.dfs(n_g, n_p, path, in_path, rxx_count + inc, out);
            in_path[id] = false;
            path.pop();
        }
    }

    /// Checks dependency validity of a path against the current state.
    pub fn validate_path(&self, path: &[NodeId]) -> Result<(), DagError> {
        let mut seen = vec![false; self.nodes.len()];
        for &id in path {
            if id >= self.nodes.len() {
                return Err(DagError::InvalidPath(format!("node {id} does not exist")));
            }
            if self.executed[id] {
                return Err(DagError::InvalidPath(format!("node {id} already executed")));
            }
            if seen[id] {
                return Err(DagError::InvalidPath(format!("node {id} repeated")));
            }
            for &p in &self.parents[id] {
                if !self.executed[p] && !seen[p] {
                    return Err(DagError::InvalidPath(format!(
                        "node {id} executed before its parent {p}"
                    )));
                }
            }
            seen[id] = true;
        }
        Ok(())
    }

    /// Marks the nodes of a validated path as executed.
    pub fn commit_path(&mut self, path: &[NodeId]) -> Result<(), DagError> {
        self.validate_path(path)?;
        for &id in path {
            self.executed[id] = true;
            self.num_executed += 1;
        }
        Ok(())
    }

    /// For each qubit, the partner qubit of its earliest future RXX gate.
    /// Nodes in `exclude` are treated as already executed.
    pub fn next_partner_map(&self, exclude: &[bool]) -> Vec<Option<QubitId>> {
        let mut map: Vec<Option<QubitId>> = vec![None; self.num_qubits];
        for node in &self.nodes {
            if self.executed[node.id] || exclude.get(node.id).copied().unwrap_or(false) {
                continue;
            }
            if let NodeKind::Rxx { qubits, .. } = &node.kind {
                let [a, b] = *qubits;
                if map[a.0].is_none() {
                    map[a.0] = Some(b);
                }
                if map[b.0].is_none() {
                    map[b.0] = Some(a);
                }
            }
        }
        map
    }

    /// DOT dump for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph gatedag {\n");
        for node in &self.nodes {
            let label = match &node.kind {
                NodeKind::Rxx { qubits, .. } => {
                    format!("RXX q{} q{}", qubits[0].0, qubits[1].0)
                }
                NodeKind::Terminal { qubit, ops } => {
                    format!("terminal q{} ({} ops)", qubit.0, ops.len())
                }
            };
            let _ = writeln!(s, "  n{} [label=\"{}: {}\"];", node.id, node.id, label);
        }
        for (p, chs) in self.children.iter().enumerate() {
            for ch in chs {
                let _ = writeln!(s, "  n{p} -> n{ch};");
            }
        }
        s.push_str("}\n");
        s
    }
}

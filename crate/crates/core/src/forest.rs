//! Exact counting over shared derivation forests (AND-OR graphs) in ℕ^∞.
//!
//! A node's value is the sum, over its instances, of the coefficient times
//! the product of the children's values; the least solution of that system.
//! A node lying on a cycle of productive instances has infinitely many
//! derivations, and so does every node that can reach one.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::Result;
use crate::weights::DerivCount;

#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub coef: DerivCount,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Forest {
    nodes: Vec<Vec<Instance>>,
}

impl Forest {
    pub fn with_nodes(count: usize) -> Self {
        Forest { nodes: vec![Vec::new(); count] }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn push(&mut self, node: usize, coef: DerivCount, children: Vec<usize>) {
        if !coef.is_zero() {
            self.nodes[node].push(Instance { coef, children });
        }
    }

    /// Least fixpoint of "some instance has all children productive".
    pub fn productive(&self) -> Vec<bool> {
        let mut parents: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nodes.len()];
        let mut missing: Vec<Vec<usize>> = Vec::with_capacity(self.nodes.len());
        let mut productive = vec![false; self.nodes.len()];
        let mut queue = Vec::new();
        for (v, insts) in self.nodes.iter().enumerate() {
            let mut row = Vec::with_capacity(insts.len());
            for (ix, inst) in insts.iter().enumerate() {
                row.push(inst.children.len());
                for &c in &inst.children {
                    parents[c].push((v, ix));
                }
                if inst.children.is_empty() && !productive[v] {
                    productive[v] = true;
                    queue.push(v);
                }
            }
            missing.push(row);
        }
        while let Some(c) = queue.pop() {
            for &(v, ix) in &parents[c] {
                missing[v][ix] -= 1;
                if missing[v][ix] == 0 && !productive[v] {
                    productive[v] = true;
                    queue.push(v);
                }
            }
        }
        productive
    }

    /// Exact values of every node.
    pub fn evaluate(&self) -> Result<Vec<DerivCount>> {
        let productive = self.productive();
        let usable = |inst: &Instance| inst.children.iter().all(|&c| productive[c]);

        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(self.nodes.len(), 0);
        for _ in 0..self.nodes.len() {
            graph.add_node(());
        }
        for (v, insts) in self.nodes.iter().enumerate() {
            if !productive[v] {
                continue;
            }
            for inst in insts.iter().filter(|i| usable(i)) {
                for &c in &inst.children {
                    graph.update_edge(NodeIndex::new(v), NodeIndex::new(c), ());
                }
            }
        }

        let mut value = vec![DerivCount::ZERO; self.nodes.len()];
        // tarjan_scc yields components children-first
        for scc in tarjan_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if cyclic {
                for v in scc {
                    value[v.index()] = DerivCount::Infinite;
                }
                continue;
            }
            let v = scc[0].index();
            if !productive[v] {
                continue;
            }
            let mut acc = DerivCount::ZERO;
            for inst in self.nodes[v].iter().filter(|i| usable(i)) {
                let mut prod = inst.coef;
                for &c in &inst.children {
                    prod = prod.mul(value[c])?;
                }
                acc = acc.add(prod)?;
            }
            value[v] = acc;
        }
        Ok(value)
    }
}

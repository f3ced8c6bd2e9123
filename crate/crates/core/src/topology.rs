//! Network configuration: neighbor discovery and hop-count layering.
//!
//! Hello flooding from the base station is computed as a breadth-first
//! search over the disk graph of alive nodes; its fixed point is exactly the
//! hop count a flood would establish.

use std::collections::VecDeque;

use crate::model::{distance, EnergyLedger, Node, NodeId, Position, RadioEnergyModel};

/// Symmetric disk graph over alive nodes. Dead nodes have no neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMap {
    neighbors: Vec<Vec<NodeId>>,
}

impl AdjacencyMap {
    pub fn from_lists(neighbors: Vec<Vec<NodeId>>) -> Self {
        AdjacencyMap { neighbors }
    }

    /// Sorted neighbor ids of `id`.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.neighbors[id]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.neighbors[id].len()
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Copy with every edge touching a dead node removed.
    pub fn without_dead(&self, nodes: &[Node]) -> Self {
        let neighbors = self
            .neighbors
            .iter()
            .enumerate()
            .map(|(i, list)| {
                if nodes[i].alive {
                    list.iter().copied().filter(|&j| nodes[j].alive).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        AdjacencyMap { neighbors }
    }
}

/// Hop count of every node to the base station; `None` is unreachable
/// (or dead).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerMap {
    layers: Vec<Option<u32>>,
}

impl LayerMap {
    pub fn from_layers(layers: Vec<Option<u32>>) -> Self {
        LayerMap { layers }
    }

    pub fn layer(&self, id: NodeId) -> Option<u32> {
        self.layers[id]
    }

    pub fn is_reachable(&self, id: NodeId) -> bool {
        self.layers[id].is_some()
    }

    pub fn max_layer(&self) -> Option<u32> {
        self.layers.iter().flatten().copied().max()
    }

    pub fn as_slice(&self) -> &[Option<u32>] {
        &self.layers
    }

    /// Drops dead nodes from the map, keeping the others' layers.
    pub fn without_dead(&self, nodes: &[Node]) -> Self {
        let layers = self
            .layers
            .iter()
            .zip(nodes)
            .map(|(l, n)| if n.alive { *l } else { None })
            .collect();
        LayerMap { layers }
    }
}

/// Neighbors are alive nodes within `radio_range` (inclusive), excluding self.
pub fn build_adjacency(nodes: &[Node], radio_range: f64) -> AdjacencyMap {
    let mut neighbors = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        if !nodes[i].alive {
            continue;
        }
        for j in (i + 1)..nodes.len() {
            if nodes[j].alive && distance(nodes[i].pos, nodes[j].pos) <= radio_range {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    // j > i pushes keep both lists sorted already.
    AdjacencyMap { neighbors }
}

/// Layer 1 is every alive node within `radio_range` of the base station;
/// layer k+1 nodes neighbor a layer k node and nothing lower.
pub fn assign_layers(
    adj: &AdjacencyMap,
    nodes: &[Node],
    bs_pos: Position,
    radio_range: f64,
) -> LayerMap {
    let mut layers = vec![None; nodes.len()];
    let mut queue = VecDeque::new();
    for node in nodes.iter().filter(|n| n.alive) {
        if distance(node.pos, bs_pos) <= radio_range {
            layers[node.id] = Some(1);
            queue.push_back(node.id);
        }
    }
    while let Some(u) = queue.pop_front() {
        let next = layers[u].map(|l| l + 1);
        for &v in adj.neighbors(u) {
            if layers[v].is_none() {
                layers[v] = next;
                queue.push_back(v);
            }
        }
    }
    LayerMap { layers }
}

/// Every reachable alive node broadcasts one Hello at `radio_range` and
/// hears one Hello from each neighbor.
pub fn charge_configuration_energy(
    nodes: &mut [Node],
    adj: &AdjacencyMap,
    layers: &LayerMap,
    radio: &RadioEnergyModel,
    ctrl_bits: u64,
    radio_range: f64,
    ledger: &mut EnergyLedger,
) {
    let hello_tx = radio.tx_cost(ctrl_bits, radio_range);
    let hello_rx = radio.rx_cost(ctrl_bits);
    for (id, node) in nodes.iter_mut().enumerate() {
        if node.alive && layers.is_reachable(id) {
            let cost = hello_tx + adj.degree(id) as f64 * hello_rx;
            ledger.drain(node, cost);
        }
    }
}

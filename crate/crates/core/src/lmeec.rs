//! Layered cluster-head election, cluster formation and relay selection.
//!
//! Each round every reachable node scores itself with a weight combining
//! its degree, state of charge and cluster-head history, scaled by its
//! layer, and becomes cluster-head when the score reaches a threshold that
//! shrinks with the layer. Heads announce `residual / degree * layer`;
//! members join the best announcement they hear, which steers members
//! towards heads far from the base station. Heads forward aggregates
//! through adjacent heads of lower layers.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::ConfigError;
use crate::model::{distance, EnergyLedger, Node, NodeId, RadioEnergyModel};
use crate::topology::{AdjacencyMap, LayerMap};

/// How the degree term of the election weight is scaled by layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightVariant {
    /// `1 / (alpha - layer)`, negative for every layer >= 1.
    Literal,
    /// `1 / (layer - alpha)`, positive and decaying with layer.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Threshold at layer 1; layer `L` uses `t0 / L`.
    pub t0: f64,
    pub variant: WeightVariant,
}

/// Defaults are calibrated so that cluster heads concentrate near the base
/// station without the network degenerating into one head per node:
/// with equal 0.5 weights almost every node passes its threshold.
impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            alpha: 0.9,
            beta: 1.0,
            gamma: 0.1,
            t0: 1.2,
            variant: WeightVariant::Magnitude,
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(ConfigError::invalid(
                "alpha",
                format!("must lie in [0, 1), got {}", self.alpha),
            ));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(ConfigError::invalid(
                "beta",
                format!("must lie in [0, 1], got {}", self.beta),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::invalid(
                "gamma",
                format!("must lie in [0, 1], got {}", self.gamma),
            ));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(ConfigError::invalid("t0", format!("must be > 0, got {}", self.t0)));
        }
        Ok(())
    }
}

/// Per-node inputs of the election weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightInputs {
    pub layer: u32,
    pub degree: usize,
    /// Number of sensors deployed.
    pub n_total: usize,
    pub residual: f64,
    pub e_total: f64,
    pub num_ch: u32,
}

/// Self-election weight of a node.
///
/// Panics on `layer < 1`, `n_total == 0` or `e_total <= 0`.
pub fn node_weight(w: &WeightInputs, params: &WeightParams) -> f64 {
    assert!(w.layer >= 1, "node_weight needs layer >= 1");
    assert!(w.n_total >= 1, "node_weight needs n_total >= 1");
    assert!(w.e_total > 0.0, "node_weight needs e_total > 0");
    let layer = f64::from(w.layer);
    let degree_scale = match params.variant {
        WeightVariant::Literal => 1.0 / (params.alpha - layer),
        WeightVariant::Magnitude => 1.0 / (layer - params.alpha),
    };
    let degree_term = degree_scale * (w.degree as f64 / w.n_total as f64);
    let energy_term = (1.0 / (params.beta + layer)) * (w.residual / w.e_total);
    degree_term + energy_term - history_penalty(w.num_ch, params.gamma)
}

/// `gamma * (1 - 1 / (1 + num_ch))`: zero for a fresh node, approaching
/// `gamma` as the node keeps serving.
pub fn history_penalty(num_ch: u32, gamma: f64) -> f64 {
    gamma * (1.0 - 1.0 / (1.0 + f64::from(num_ch)))
}

pub fn election_threshold(layer: u32, params: &WeightParams) -> f64 {
    assert!(layer >= 1, "election_threshold needs layer >= 1");
    params.t0 / f64::from(layer)
}

/// Read-only snapshot of the network a round's decisions are taken on.
#[derive(Debug, Clone, Copy)]
pub struct NetworkView<'a> {
    /// Node state as of the start of the round.
    pub nodes: &'a [Node],
    pub adj: &'a AdjacencyMap,
    pub layers: &'a LayerMap,
}

impl NetworkView<'_> {
    /// Alive nodes with a path to the base station, in id order.
    pub fn participants(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.alive && self.layers.is_reachable(n.id))
            .map(|n| n.id)
    }

    fn layer(&self, id: NodeId) -> u32 {
        self.layers
            .layer(id)
            .unwrap_or_else(|| panic!("node {id} is unreachable"))
    }
}

/// Nodes whose weight reaches their layer's threshold, in id order.
/// Callers record the new term in each head's `num_ch`.
pub fn elect_cluster_heads(
    view: &NetworkView<'_>,
    n_total: usize,
    e_total: f64,
    params: &WeightParams,
) -> Vec<NodeId> {
    view.participants()
        .filter(|&id| {
            let node = &view.nodes[id];
            let layer = view.layer(id);
            let weight = node_weight(
                &WeightInputs {
                    layer,
                    degree: view.adj.degree(id),
                    n_total,
                    residual: node.residual_energy,
                    e_total,
                    num_ch: node.num_ch,
                },
                params,
            );
            weight >= election_threshold(layer, params)
        })
        .collect()
}

/// Cluster-head announcement weight: `residual / degree * layer`.
///
/// Panics on `degree == 0` or `layer == 0`.
pub fn ch_announcement_weight(residual: f64, degree: usize, layer: u32) -> f64 {
    assert!(degree >= 1, "announcing node must have a neighbor");
    assert!(layer >= 1, "announcing node must be reachable");
    residual / degree as f64 * f64::from(layer)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChAnnouncement {
    pub ch_id: NodeId,
    pub p_ch: f64,
    pub layer: u32,
}

/// Announcements of every head that has at least one neighbor to hear it.
pub fn announcements(view: &NetworkView<'_>, heads: &[NodeId]) -> Vec<ChAnnouncement> {
    heads
        .iter()
        .filter(|&&id| view.adj.degree(id) > 0)
        .map(|&id| {
            let layer = view.layer(id);
            ChAnnouncement {
                ch_id: id,
                p_ch: ch_announcement_weight(view.nodes[id].residual_energy, view.adj.degree(id), layer),
                layer,
            }
        })
        .collect()
}

/// Total order used by members to rank announcements: greater weight,
/// then farther layer, then lower id.
pub fn announcement_order(a: &ChAnnouncement, b: &ChAnnouncement) -> Ordering {
    a.p_ch
        .total_cmp(&b.p_ch)
        .then(a.layer.cmp(&b.layer))
        .then(b.ch_id.cmp(&a.ch_id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayTarget {
    Head(NodeId),
    DirectToBs,
}

/// One round's clusters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterSet {
    /// Head id to sorted member ids. Every head appears, possibly with no members.
    pub members: BTreeMap<NodeId, Vec<NodeId>>,
    /// Head id to the next hop of its aggregate.
    pub relays: BTreeMap<NodeId, RelayTarget>,
    /// Nodes sending their own packets straight to the base station with no
    /// cluster (LEACH rounds that elect no head).
    pub direct: Vec<NodeId>,
}

impl ClusterSet {
    pub fn heads(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.keys().copied()
    }

    pub fn is_head(&self, id: NodeId) -> bool {
        self.members.contains_key(&id)
    }

    pub fn head_count(&self) -> usize {
        self.members.len()
    }

    pub fn relay(&self, head: NodeId) -> RelayTarget {
        self.relays.get(&head).copied().unwrap_or(RelayTarget::DirectToBs)
    }

    /// Member id to its head id.
    pub fn membership(&self) -> BTreeMap<NodeId, NodeId> {
        self.members
            .iter()
            .flat_map(|(&h, ms)| ms.iter().map(move |&m| (m, h)))
            .collect()
    }

    /// Heads visited by `head`'s aggregate, starting with `head` itself and
    /// ending with the head that transmits to the base station.
    ///
    /// Panics if the relay graph revisits a head.
    pub fn relay_chain(&self, head: NodeId) -> Vec<NodeId> {
        let mut chain = vec![head];
        let mut current = head;
        while let RelayTarget::Head(next) = self.relay(current) {
            assert!(
                chain.len() <= self.members.len(),
                "relay cycle through head {next}"
            );
            chain.push(next);
            current = next;
        }
        chain
    }
}

/// Result of cluster formation.
#[derive(Debug, Clone, PartialEq)]
pub struct Formation {
    pub clusters: ClusterSet,
    /// Non-heads that heard no announcement and became heads of their own
    /// empty clusters. Callers record the term in `num_ch`.
    pub promoted: Vec<NodeId>,
}

/// Members join the best announcement among their one-hop neighbors;
/// a non-head that hears none promotes itself.
pub fn form_clusters(
    view: &NetworkView<'_>,
    heads: &[NodeId],
    announcements: &[ChAnnouncement],
) -> Formation {
    let mut heard: Vec<Option<&ChAnnouncement>> = vec![None; view.nodes.len()];
    let mut members: BTreeMap<NodeId, Vec<NodeId>> =
        heads.iter().map(|&h| (h, Vec::new())).collect();
    let mut promoted = Vec::new();

    for ann in announcements {
        for &n in view.adj.neighbors(ann.ch_id) {
            let better = match heard[n] {
                None => true,
                Some(best) => announcement_order(ann, best) == Ordering::Greater,
            };
            if better {
                heard[n] = Some(ann);
            }
        }
    }
    for id in view.participants() {
        if members.contains_key(&id) {
            continue;
        }
        match heard[id] {
            Some(ann) => members
                .get_mut(&ann.ch_id)
                .expect("announcement from a head")
                .push(id),
            None => promoted.push(id),
        }
    }
    for &id in &promoted {
        members.insert(id, Vec::new());
    }
    Formation {
        clusters: ClusterSet {
            members,
            relays: BTreeMap::new(),
            direct: Vec::new(),
        },
        promoted,
    }
}

/// Next hop for `head`: layer-1 heads and heads without an adjacent
/// lower-layer head send to the base station; otherwise the adjacent
/// lower-layer head with the most residual energy (lower id on ties).
pub fn select_relay(head: NodeId, clusters: &ClusterSet, view: &NetworkView<'_>) -> RelayTarget {
    let layer = view.layer(head);
    if layer == 1 {
        return RelayTarget::DirectToBs;
    }
    view.adj
        .neighbors(head)
        .iter()
        .copied()
        .filter(|&n| clusters.is_head(n) && view.layers.layer(n).is_some_and(|l| l < layer))
        // Neighbor lists are id-sorted, so keeping the first maximum picks the lower id.
        .fold(None::<NodeId>, |best, n| match best {
            Some(b) if view.nodes[b].residual_energy >= view.nodes[n].residual_energy => Some(b),
            _ => Some(n),
        })
        .map_or(RelayTarget::DirectToBs, RelayTarget::Head)
}

/// Fills `clusters.relays` for every head.
pub fn assign_relays(clusters: &mut ClusterSet, view: &NetworkView<'_>) {
    let relays = clusters
        .heads()
        .map(|h| (h, select_relay(h, clusters, view)))
        .collect();
    clusters.relays = relays;
}

/// Which heads a member hears announcements from.
#[derive(Debug, Clone, Copy)]
pub enum Audience<'a> {
    /// Only heads within one hop.
    Neighbors(&'a AdjacencyMap),
    /// Every head in the field.
    Everyone,
}

/// Control-message energy for cluster setup.
///
/// Heads pay their announcement and TDMA-schedule broadcasts at
/// `radio_range` plus one reception per join. Members pay one reception
/// per announcement heard, their join transmission to their head, and the
/// schedule reception.
pub fn charge_control_traffic(
    clusters: &ClusterSet,
    audience: Audience<'_>,
    nodes: &mut [Node],
    radio: &RadioEnergyModel,
    ctrl_bits: u64,
    radio_range: f64,
    ledger: &mut EnergyLedger,
) {
    let broadcast = radio.tx_cost(ctrl_bits, radio_range);
    let rx = radio.rx_cost(ctrl_bits);
    let head_count = clusters.head_count();
    for (&head, members) in &clusters.members {
        let cost = 2.0 * broadcast + members.len() as f64 * rx;
        ledger.drain(&mut nodes[head], cost);
        for &m in members {
            let heard = match audience {
                Audience::Neighbors(adj) => adj
                    .neighbors(m)
                    .iter()
                    .filter(|&&n| clusters.is_head(n))
                    .count(),
                Audience::Everyone => head_count,
            };
            let join = radio.tx_cost(ctrl_bits, distance(nodes[m].pos, nodes[head].pos));
            let cost = heard as f64 * rx + join + rx;
            ledger.drain(&mut nodes[m], cost);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Position;
    use crate::topology::{assign_layers, build_adjacency};

    const EXAMPLE: WeightParams = WeightParams {
        alpha: 0.5,
        beta: 0.5,
        gamma: 0.5,
        t0: 0.5,
        variant: WeightVariant::Magnitude,
    };

    fn inputs(num_ch: u32) -> WeightInputs {
        WeightInputs {
            layer: 1,
            degree: 10,
            n_total: 100,
            residual: 2.0,
            e_total: 2.0,
            num_ch,
        }
    }

    #[test]
    fn weight_examples() {
        let m = node_weight(&inputs(0), &EXAMPLE);
        assert!((m - 0.8667).abs() < 1e-4, "{m}");
        let literal = WeightParams {
            variant: WeightVariant::Literal,
            ..EXAMPLE
        };
        let l = node_weight(&inputs(0), &literal);
        assert!((l - 0.4667).abs() < 1e-4, "{l}");
    }

    #[test]
    fn fresh_node_has_no_penalty() {
        for gamma in [0.0, 0.3, 1.0] {
            assert_eq!(history_penalty(0, gamma), 0.0);
        }
        let with = node_weight(&inputs(0), &WeightParams { gamma: 1.0, ..EXAMPLE });
        let without = node_weight(&inputs(0), &WeightParams { gamma: 0.0, ..EXAMPLE });
        assert_eq!(with, without);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(election_threshold(1, &EXAMPLE), 0.5);
        assert_eq!(election_threshold(2, &EXAMPLE), 0.25);
        for l in 1..20 {
            assert!(election_threshold(l + 1, &EXAMPLE) < election_threshold(l, &EXAMPLE));
        }
    }

    #[test]
    #[should_panic]
    fn weight_rejects_layer_zero() {
        node_weight(&WeightInputs { layer: 0, ..inputs(0) }, &EXAMPLE);
    }

    #[test]
    #[should_panic]
    fn weight_rejects_zero_e_total() {
        node_weight(&WeightInputs { e_total: 0.0, ..inputs(0) }, &EXAMPLE);
    }

    #[test]
    fn announcement_weight_examples() {
        assert!((ch_announcement_weight(1.0, 5, 2) - 0.4).abs() < 1e-15);
        assert_eq!(ch_announcement_weight(2.0, 1, 1), 2.0);
        assert_eq!(ch_announcement_weight(1.3, 7, 4), 2.0 * ch_announcement_weight(1.3, 7, 2));
    }

    #[test]
    #[should_panic(expected = "neighbor")]
    fn announcement_weight_rejects_isolated() {
        ch_announcement_weight(1.0, 0, 1);
    }

    #[test]
    fn params_validation() {
        assert!(EXAMPLE.validate().is_ok());
        assert_eq!(WeightParams { alpha: 1.0, ..EXAMPLE }.validate().unwrap_err().field(), "alpha");
        assert_eq!(WeightParams { beta: 1.5, ..EXAMPLE }.validate().unwrap_err().field(), "beta");
        assert_eq!(WeightParams { gamma: -0.1, ..EXAMPLE }.validate().unwrap_err().field(), "gamma");
        assert_eq!(WeightParams { t0: 0.0, ..EXAMPLE }.validate().unwrap_err().field(), "t0");
    }

    fn node_at(id: usize, x: f64, y: f64, e: f64) -> Node {
        Node::new(id, Position::new(x, y), e)
    }

    struct Fixture {
        nodes: Vec<Node>,
        adj: AdjacencyMap,
        layers: LayerMap,
    }

    impl Fixture {
        fn new(nodes: Vec<Node>, bs: Position) -> Self {
            let adj = build_adjacency(&nodes, 25.0);
            let layers = assign_layers(&adj, &nodes, bs, 25.0);
            Fixture { nodes, adj, layers }
        }

        fn view(&self) -> NetworkView<'_> {
            NetworkView {
                nodes: &self.nodes,
                adj: &self.adj,
                layers: &self.layers,
            }
        }
    }

    #[test]
    fn single_fresh_node_is_elected() {
        // Lone node: degree term 0, energy term 1/1.5 >= 0.5.
        let f = Fixture::new(vec![node_at(0, 50.0, 50.0, 2.0)], Position::new(50.0, 50.0));
        assert_eq!(elect_cluster_heads(&f.view(), 100, 2.0, &EXAMPLE), vec![0]);
    }

    #[test]
    fn weight_equal_to_threshold_is_elected() {
        // Degree 0 and gamma 0 leave only the energy term 1/(beta + 1) = 0.5.
        let params = WeightParams {
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            t0: 0.5,
            variant: WeightVariant::Magnitude,
        };
        let f = Fixture::new(vec![node_at(0, 50.0, 50.0, 2.0)], Position::new(50.0, 50.0));
        let w = node_weight(
            &WeightInputs {
                layer: 1,
                degree: 0,
                n_total: 10,
                residual: 2.0,
                e_total: 2.0,
                num_ch: 0,
            },
            &params,
        );
        assert_eq!(w, election_threshold(1, &params));
        assert_eq!(elect_cluster_heads(&f.view(), 10, 2.0, &params), vec![0]);
        let stricter = WeightParams { t0: 0.5000001, ..params };
        assert!(elect_cluster_heads(&f.view(), 10, 2.0, &stricter).is_empty());
    }

    #[test]
    fn layer_tie_break_prefers_farther_head() {
        let a = ChAnnouncement { ch_id: 1, p_ch: 0.4, layer: 2 };
        let b = ChAnnouncement { ch_id: 2, p_ch: 0.4, layer: 3 };
        assert_eq!(announcement_order(&b, &a), Ordering::Greater);

        // Node 0 hears head 1 (layer 2) and head 2 (layer 3) with equal weight.
        let bs = Position::new(0.0, 0.0);
        let nodes = vec![
            node_at(0, 55.0, -5.0, 2.0),
            node_at(1, 40.0, 0.0, 2.0),
            node_at(2, 55.0, 15.0, 2.0),
            node_at(3, 20.0, 0.0, 2.0),
        ];
        let f = Fixture::new(nodes, bs);
        assert_eq!(f.layers.layer(1), Some(2));
        assert_eq!(f.layers.layer(2), Some(3));
        let anns = [a, b];
        let formed = form_clusters(&f.view(), &[1, 2, 3], &anns);
        assert_eq!(formed.clusters.members[&2], vec![0]);
        assert!(formed.clusters.members[&1].is_empty());
        assert!(formed.promoted.is_empty());
    }

    #[test]
    fn id_tie_break_prefers_lower_id() {
        let a = ChAnnouncement { ch_id: 4, p_ch: 0.4, layer: 2 };
        let b = ChAnnouncement { ch_id: 9, p_ch: 0.4, layer: 2 };
        assert_eq!(announcement_order(&a, &b), Ordering::Greater);
    }

    #[test]
    fn single_announcement_and_orphans() {
        let bs = Position::new(0.0, 0.0);
        let nodes = vec![
            node_at(0, 10.0, 0.0, 2.0),
            node_at(1, 20.0, 0.0, 2.0),
            node_at(2, 40.0, 0.0, 2.0),
        ];
        let f = Fixture::new(nodes, bs);
        let anns = announcements(&f.view(), &[0]);
        assert_eq!(anns.len(), 1);
        let formed = form_clusters(&f.view(), &[0], &anns);
        assert_eq!(formed.clusters.members[&0], vec![1]);
        assert_eq!(formed.promoted, vec![2]);
        assert!(formed.clusters.members[&2].is_empty());
    }

    #[test]
    fn relay_prefers_energetic_lower_layer_head() {
        // BS at origin; 1 and 2 in layer 2, 3 in layer 3 adjacent to both; 0 is layer 1.
        let bs = Position::new(0.0, 0.0);
        let nodes = vec![
            node_at(0, 20.0, 0.0, 2.0),
            node_at(1, 40.0, 5.0, 1.2),
            node_at(2, 40.0, -5.0, 1.5),
            node_at(3, 60.0, 0.0, 2.0),
        ];
        let f = Fixture::new(nodes, bs);
        assert_eq!(f.layers.as_slice(), &[Some(1), Some(2), Some(2), Some(3)]);
        let formed = form_clusters(&f.view(), &[0, 1, 2, 3], &[]);
        let mut clusters = formed.clusters;
        assert_eq!(select_relay(0, &clusters, &f.view()), RelayTarget::DirectToBs);
        assert_eq!(select_relay(3, &clusters, &f.view()), RelayTarget::Head(2));
        assign_relays(&mut clusters, &f.view());
        assert_eq!(clusters.relay_chain(3), vec![3, 2, 0]);
        assert_eq!(clusters.relay(1), RelayTarget::Head(0));
    }

    #[test]
    fn relay_without_lower_head_goes_direct() {
        let bs = Position::new(0.0, 0.0);
        let nodes = vec![node_at(0, 20.0, 0.0, 2.0), node_at(1, 40.0, 0.0, 2.0)];
        let f = Fixture::new(nodes, bs);
        let formed = form_clusters(&f.view(), &[1], &announcements(&f.view(), &[1]));
        assert_eq!(select_relay(1, &formed.clusters, &f.view()), RelayTarget::DirectToBs);
    }

    #[test]
    fn control_traffic_costs() {
        let radio = RadioEnergyModel::default();
        let broadcast = radio.tx_cost(200, 25.0);
        // Head 0 with no members.
        let mut nodes = vec![node_at(0, 0.0, 0.0, 2.0)];
        let clusters = ClusterSet {
            members: BTreeMap::from([(0, vec![])]),
            ..ClusterSet::default()
        };
        let adj = build_adjacency(&nodes, 25.0);
        let mut ledger = EnergyLedger::new();
        charge_control_traffic(&clusters, Audience::Neighbors(&adj), &mut nodes, &radio, 200, 25.0, &mut ledger);
        assert!((ledger.total() - 2.0 * broadcast).abs() < 1e-18);

        // Member 3 hears heads 0, 1, 2 and joins head 0 at 15 m.
        let mut nodes = vec![
            node_at(0, 15.0, 0.0, 2.0),
            node_at(1, 0.0, 10.0, 2.0),
            node_at(2, 0.0, -10.0, 2.0),
            node_at(3, 0.0, 0.0, 2.0),
        ];
        let adj = build_adjacency(&nodes, 25.0);
        let clusters = ClusterSet {
            members: BTreeMap::from([(0, vec![3]), (1, vec![]), (2, vec![])]),
            ..ClusterSet::default()
        };
        let mut ledger = EnergyLedger::new();
        charge_control_traffic(&clusters, Audience::Neighbors(&adj), &mut nodes, &radio, 200, 25.0, &mut ledger);
        let member = 2.0 - nodes[3].residual_energy;
        // 200 * (50e-9 + 10e-12 * 225)
        assert!((radio.tx_cost(200, 15.0) - 1.045e-5).abs() < 1e-18);
        assert!((member - (3.0 * 1e-5 + 1.045e-5 + 1e-5)).abs() < 1e-15, "{member}");
    }
}

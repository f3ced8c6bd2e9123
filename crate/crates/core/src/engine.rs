//! Round loop: configuration, clustering and data phases against the
//! energy ledger, plus lifetime bookkeeping.

use std::collections::BTreeMap;

use crate::error::ConfigError;
use crate::leach::{election_rng, leach_elect, leach_form_clusters, LeachState};
use crate::lmeec::{self, Audience, ClusterSet, NetworkView};
use crate::model::{deploy, deployment_hash, distance, EnergyLedger, Node, NodeId, Protocol, Role, RunUntil, SimConfig};
use crate::topology::{assign_layers, build_adjacency, charge_configuration_energy, AdjacencyMap, LayerMap};

/// Heads and members per head layer for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerClusterStats {
    pub layer: u32,
    pub heads: u32,
    pub members: u32,
}

impl LayerClusterStats {
    pub fn mean_size(&self) -> f64 {
        f64::from(self.members) / f64::from(self.heads)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u64,
    pub time_start: f64,
    /// Alive nodes among those reachable at deployment.
    pub alive_count: usize,
    /// Alive nodes with no path to the base station this round.
    pub unreachable_count: usize,
    pub ch_count: usize,
    pub energy_dissipated: f64,
    /// Residual energy summed over alive counted nodes at round end.
    pub total_residual: f64,
    pub deaths: usize,
    /// Aggregates (or unclustered packets) reaching the base station per frame.
    pub bs_packets_per_frame: usize,
    pub cluster_sizes: Vec<LayerClusterStats>,
}

/// Times (seconds) of the first death, the death that leaves half the
/// counted nodes dead, and the last death. `None` if not reached.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LifetimeMarks {
    pub fnd: Option<f64>,
    pub hnd: Option<f64>,
    pub lnd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    pub rounds: Vec<RoundReport>,
    pub deployment_hash: u64,
    /// Nodes with a path to the base station at deployment; the
    /// denominator for averages and lifetime.
    pub n_reachable: usize,
    pub total_dissipated: f64,
    /// Joules per counted node at the end of the run.
    pub avg_dissipated_energy: f64,
    pub lifetime: LifetimeMarks,
    pub final_nodes: Vec<Node>,
}

impl SimResult {
    pub fn rounds_run(&self) -> usize {
        self.rounds.len()
    }
}

/// Everything a round decided, kept for inspection by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    /// Node state at the start of the round, before any energy was spent.
    pub snapshot: Vec<Node>,
    pub adjacency: AdjacencyMap,
    pub layers: LayerMap,
    pub participants: Vec<NodeId>,
    pub clusters: ClusterSet,
}

/// Per-frame energy of the data phase, by node.
pub fn data_frame_costs(clusters: &ClusterSet, nodes: &[Node], config: &SimConfig) -> Vec<f64> {
    let radio = &config.radio;
    let bits = config.data_bits;
    let mut cost = vec![0.0; nodes.len()];
    for (&head, members) in &clusters.members {
        for &m in members {
            cost[m] += radio.tx_cost(bits, distance(nodes[m].pos, nodes[head].pos));
        }
        cost[head] += members.len() as f64 * radio.rx_cost(bits)
            + radio.aggregation_cost(bits, members.len() as u64 + 1);
        let chain = clusters.relay_chain(head);
        for hop in chain.windows(2) {
            cost[hop[0]] += radio.tx_cost(bits, distance(nodes[hop[0]].pos, nodes[hop[1]].pos));
            cost[hop[1]] += radio.rx_cost(bits);
        }
        let last = *chain.last().expect("chain starts at head");
        cost[last] += radio.tx_cost(bits, distance(nodes[last].pos, config.bs_pos));
    }
    for &d in &clusters.direct {
        cost[d] += radio.tx_cost(bits, distance(nodes[d].pos, config.bs_pos));
    }
    cost
}

/// Runs every data frame of a round: members send to their head, heads
/// aggregate and push one packet along their relay chain. Clusters do not
/// interfere. Returns the number of packets reaching the base station per
/// frame.
pub fn data_phase(clusters: &ClusterSet, nodes: &mut [Node], config: &SimConfig, ledger: &mut EnergyLedger) -> usize {
    let frames = config.frames_per_round() as f64;
    let costs = data_frame_costs(clusters, nodes, config);
    for (node, cost) in nodes.iter_mut().zip(costs) {
        if cost > 0.0 {
            ledger.drain(node, cost * frames);
        }
    }
    clusters.head_count() + clusters.direct.len()
}

/// A single run as a step-by-step state machine.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    nodes: Vec<Node>,
    ledger: EnergyLedger,
    leach: LeachState,
    round: u64,
    counted: Vec<bool>,
    n_counted: usize,
    deaths: usize,
    lifetime: LifetimeMarks,
    topology: Option<(AdjacencyMap, LayerMap)>,
    finished: bool,
    last_trace: Option<RoundTrace>,
    deployment_hash: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let nodes = deploy(&config);
        let adj = build_adjacency(&nodes, config.radio_range);
        let layers = assign_layers(&adj, &nodes, config.bs_pos, config.radio_range);
        let counted: Vec<bool> = (0..nodes.len()).map(|i| layers.is_reachable(i)).collect();
        let n_counted = counted.iter().filter(|&&c| c).count();
        Ok(Simulation {
            leach: LeachState::new(nodes.len()),
            deployment_hash: deployment_hash(&nodes),
            config,
            nodes,
            ledger: EnergyLedger::new(),
            round: 0,
            counted,
            n_counted,
            deaths: 0,
            lifetime: LifetimeMarks::default(),
            topology: None,
            finished: false,
            last_trace: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn lifetime(&self) -> LifetimeMarks {
        self.lifetime
    }

    pub fn n_reachable(&self) -> usize {
        self.n_counted
    }

    /// Whether `id` was reachable at deployment.
    pub fn is_counted(&self, id: NodeId) -> bool {
        self.counted[id]
    }

    pub fn last_trace(&self) -> Option<&RoundTrace> {
        self.last_trace.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn out_of_time(&self) -> bool {
        match self.config.run_until {
            RunUntil::TimeCap => self.round >= self.config.time_cap_rounds(),
            RunUntil::AllDead => self.round >= self.config.max_rounds,
        }
    }

    fn configure(&mut self) -> (AdjacencyMap, LayerMap, bool) {
        let fresh = self.topology.is_none() || self.round.is_multiple_of(u64::from(self.config.reconfigure_every));
        if fresh {
            let adj = build_adjacency(&self.nodes, self.config.radio_range);
            let layers = assign_layers(&adj, &self.nodes, self.config.bs_pos, self.config.radio_range);
            self.topology = Some((adj.clone(), layers.clone()));
            (adj, layers, true)
        } else {
            let (adj, layers) = self.topology.as_ref().expect("cached topology");
            (adj.without_dead(&self.nodes), layers.without_dead(&self.nodes), false)
        }
    }

    /// Executes one round; `None` once the run is over.
    pub fn step(&mut self) -> Option<RoundReport> {
        if self.finished || self.out_of_time() {
            self.finished = true;
            return None;
        }
        let cfg = self.config.clone();
        let (adj, layers, fresh) = self.configure();
        for node in &mut self.nodes {
            node.layer = layers.layer(node.id);
            if node.alive {
                node.role = Role::Member;
            }
        }
        let participants: Vec<NodeId> = match cfg.protocol {
            Protocol::Lmeec => self
                .nodes
                .iter()
                .filter(|n| n.alive && layers.is_reachable(n.id))
                .map(|n| n.id)
                .collect(),
            Protocol::Leach => self
                .nodes
                .iter()
                .filter(|n| n.alive && self.counted[n.id])
                .map(|n| n.id)
                .collect(),
        };
        if participants.is_empty() {
            self.finished = true;
            return None;
        }
        let snapshot = self.nodes.clone();
        self.ledger.take_round();

        // Phase 1: neighbor discovery and layering.
        if fresh {
            charge_configuration_energy(
                &mut self.nodes,
                &adj,
                &layers,
                &cfg.radio,
                cfg.ctrl_bits,
                cfg.radio_range,
                &mut self.ledger,
            );
        }

        // Phase 2: election and cluster formation.
        let view = NetworkView {
            nodes: &snapshot,
            adj: &adj,
            layers: &layers,
        };
        let (clusters, audience) = match cfg.protocol {
            Protocol::Lmeec => {
                let heads = lmeec::elect_cluster_heads(&view, cfg.n_nodes, cfg.energy_denominator(), &cfg.weights);
                let anns = lmeec::announcements(&view, &heads);
                let mut formed = lmeec::form_clusters(&view, &heads, &anns);
                lmeec::assign_relays(&mut formed.clusters, &view);
                (formed.clusters, Audience::Neighbors(&adj))
            }
            Protocol::Leach => {
                let mut rng = election_rng(cfg.seed, self.round);
                let heads = leach_elect(&snapshot, &participants, &self.leach, &cfg.leach, self.round, &mut rng);
                self.leach.record(&heads, self.round, &cfg.leach);
                (leach_form_clusters(&heads, &snapshot, &participants), Audience::Everyone)
            }
        };
        for head in clusters.heads() {
            let node = &mut self.nodes[head];
            node.num_ch += 1;
            node.role = Role::ClusterHead;
        }
        lmeec::charge_control_traffic(
            &clusters,
            audience,
            &mut self.nodes,
            &cfg.radio,
            cfg.ctrl_bits,
            cfg.radio_range,
            &mut self.ledger,
        );

        // Phase 3: data frames.
        let bs_packets = data_phase(&clusters, &mut self.nodes, &cfg, &mut self.ledger);

        let time_start = self.round as f64 * cfg.round_duration;
        let time_end = time_start + cfg.round_duration;
        let mut deaths = 0;
        for node in &mut self.nodes {
            if node.alive && node.residual_energy <= 0.0 {
                node.alive = false;
                node.role = Role::Dead;
                deaths += 1;
            }
        }
        self.record_deaths(deaths, time_end);

        let mut per_layer: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for (&head, members) in &clusters.members {
            if let Some(layer) = layers.layer(head) {
                let entry = per_layer.entry(layer).or_default();
                entry.0 += 1;
                entry.1 += members.len() as u32;
            }
        }
        let report = RoundReport {
            round: self.round,
            time_start,
            alive_count: self
                .nodes
                .iter()
                .filter(|n| n.alive && self.counted[n.id])
                .count(),
            unreachable_count: self
                .nodes
                .iter()
                .filter(|n| snapshot[n.id].alive && !layers.is_reachable(n.id))
                .count(),
            ch_count: clusters.head_count(),
            energy_dissipated: self.ledger.round(),
            total_residual: self
                .nodes
                .iter()
                .filter(|n| n.alive && self.counted[n.id])
                .map(|n| n.residual_energy)
                .sum(),
            deaths,
            bs_packets_per_frame: bs_packets,
            cluster_sizes: per_layer
                .into_iter()
                .map(|(layer, (heads, members))| LayerClusterStats { layer, heads, members })
                .collect(),
        };
        self.last_trace = Some(RoundTrace {
            snapshot,
            adjacency: adj,
            layers,
            participants,
            clusters,
        });
        self.round += 1;
        Some(report)
    }

    fn record_deaths(&mut self, deaths: usize, time: f64) {
        if deaths == 0 {
            return;
        }
        self.deaths += deaths;
        let marks = &mut self.lifetime;
        marks.fnd.get_or_insert(time);
        if 2 * self.deaths >= self.n_counted {
            marks.hnd.get_or_insert(time);
        }
        if self.deaths >= self.n_counted {
            marks.lnd.get_or_insert(time);
        }
    }

    /// Steps until the run ends and summarizes it.
    pub fn run(mut self) -> SimResult {
        let mut rounds = Vec::new();
        while let Some(report) = self.step() {
            rounds.push(report);
        }
        self.into_result(rounds)
    }

    pub fn into_result(self, rounds: Vec<RoundReport>) -> SimResult {
        let total = self.ledger.total();
        let avg = if self.n_counted == 0 { 0.0 } else { total / self.n_counted as f64 };
        SimResult {
            config: self.config,
            rounds,
            deployment_hash: self.deployment_hash,
            n_reachable: self.n_counted,
            total_dissipated: total,
            avg_dissipated_energy: avg,
            lifetime: self.lifetime,
            final_nodes: self.nodes,
        }
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<SimResult, ConfigError> {
    Ok(Simulation::new(config.clone())?.run())
}

//! Domain model shared by both protocols: node state, deployment, the
//! first-order radio energy model and the dissipation ledger.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::leach::LeachParams;
use crate::lmeec::WeightParams;

/// Index of a node in the deployment; node `i` lives at `nodes[i]`.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Member,
    ClusterHead,
    Dead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub pos: Position,
    pub residual_energy: f64,
    /// Hop count to the base station from the latest configuration phase.
    /// `None` before the first configuration and while unreachable.
    pub layer: Option<u32>,
    pub role: Role,
    /// Number of rounds this node has served as cluster-head.
    pub num_ch: u32,
    pub alive: bool,
}

impl Node {
    pub fn new(id: NodeId, pos: Position, energy: f64) -> Self {
        Node {
            id,
            pos,
            residual_energy: energy,
            layer: None,
            role: Role::Member,
            num_ch: 0,
            alive: true,
        }
    }

    pub fn is_cluster_head(&self) -> bool {
        self.role == Role::ClusterHead
    }
}

/// First-order radio model: electronics energy per bit for both transmit
/// and receive, plus a free-space (d²) or multipath (d⁴) amplifier term
/// on transmit depending on the crossover distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioEnergyModel {
    /// J/bit, transmitter and receiver electronics.
    pub e_elec: f64,
    /// J/bit/m², free-space amplifier.
    pub eps_fs: f64,
    /// J/bit/m⁴, multipath amplifier.
    pub eps_mp: f64,
    /// J/bit/signal, data aggregation.
    pub e_da: f64,
}

impl Default for RadioEnergyModel {
    fn default() -> Self {
        RadioEnergyModel {
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_da: 5e-9,
        }
    }
}

impl RadioEnergyModel {
    /// Crossover distance where both amplifier branches cost the same.
    pub fn d0(&self) -> f64 {
        (self.eps_fs / self.eps_mp).sqrt()
    }

    pub fn tx_cost(&self, bits: u64, d: f64) -> f64 {
        let bits = bits as f64;
        let amp = if d < self.d0() {
            self.eps_fs * d * d
        } else {
            self.eps_mp * d.powi(4)
        };
        bits * (self.e_elec + amp)
    }

    pub fn rx_cost(&self, bits: u64) -> f64 {
        self.e_elec * bits as f64
    }

    pub fn aggregation_cost(&self, bits: u64, n_signals: u64) -> f64 {
        debug_assert!(n_signals >= 1, "aggregation needs at least one signal");
        self.e_da * bits as f64 * n_signals as f64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("radio.e_elec", self.e_elec),
            ("radio.eps_fs", self.eps_fs),
            ("radio.eps_mp", self.eps_mp),
            ("radio.e_da", self.e_da),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(field, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Free-function form of [`RadioEnergyModel::tx_cost`].
pub fn tx_cost(bits: u64, d: f64, radio: &RadioEnergyModel) -> f64 {
    radio.tx_cost(bits, d)
}

pub fn rx_cost(bits: u64, radio: &RadioEnergyModel) -> f64 {
    radio.rx_cost(bits)
}

pub fn aggregation_cost(bits: u64, n_signals: u64, radio: &RadioEnergyModel) -> f64 {
    radio.aggregation_cost(bits, n_signals)
}

/// Running account of every joule drained from any node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    total: f64,
    round: f64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Debits `amount` from `node`. The residual may go negative on the
    /// final action; the engine retires the node at the next round boundary.
    ///
    /// Panics if `node` is already dead or `amount` is negative.
    pub fn drain(&mut self, node: &mut Node, amount: f64) {
        assert!(node.alive, "drain on dead node {}", node.id);
        assert!(amount >= 0.0, "negative drain {amount} on node {}", node.id);
        node.residual_energy -= amount;
        self.total += amount;
        self.round += amount;
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Energy drained since the last [`EnergyLedger::take_round`].
    pub fn round(&self) -> f64 {
        self.round
    }

    pub fn take_round(&mut self) -> f64 {
        std::mem::take(&mut self.round)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Lmeec,
    Leach,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Lmeec => "lmeec",
            Protocol::Leach => "leach",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunUntil {
    /// Stop after `floor(sim_time / round_duration)` rounds.
    TimeCap,
    /// Stop once no alive node can reach the base station.
    AllDead,
}

/// Denominator of the state-of-charge term in the election weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyNormalization {
    /// The node's own initial battery energy.
    InitialNode,
    /// Initial energy summed over all deployed nodes.
    TotalNetwork,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub field_side: f64,
    pub bs_pos: Position,
    pub radio_range: f64,
    pub initial_energy: f64,
    pub sim_time: f64,
    pub packet_interval: f64,
    pub round_duration: f64,
    pub data_bits: u64,
    pub ctrl_bits: u64,
    pub seed: u64,
    pub weights: WeightParams,
    pub radio: RadioEnergyModel,
    pub leach: LeachParams,
    pub protocol: Protocol,
    pub run_until: RunUntil,
    /// Rerun neighbor discovery and layering every this many rounds.
    pub reconfigure_every: u32,
    pub energy_normalization: EnergyNormalization,
    /// Safety stop for `RunUntil::AllDead`.
    pub max_rounds: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_nodes: 100,
            field_side: 100.0,
            bs_pos: Position::new(50.0, 50.0),
            radio_range: 25.0,
            initial_energy: 2.0,
            sim_time: 500.0,
            packet_interval: 0.2,
            round_duration: 20.0,
            data_bits: 4000,
            ctrl_bits: 200,
            seed: 1,
            weights: WeightParams::default(),
            radio: RadioEnergyModel::default(),
            leach: LeachParams::default(),
            protocol: Protocol::Lmeec,
            run_until: RunUntil::TimeCap,
            reconfigure_every: 1,
            energy_normalization: EnergyNormalization::InitialNode,
            max_rounds: 100_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, format!("must be > 0, got {v}")))
            }
        };
        if self.n_nodes < 2 {
            return Err(ConfigError::invalid(
                "n_nodes",
                format!("need at least 2 nodes, got {}", self.n_nodes),
            ));
        }
        positive("field_side", self.field_side)?;
        positive("radio_range", self.radio_range)?;
        positive("initial_energy", self.initial_energy)?;
        positive("sim_time", self.sim_time)?;
        positive("packet_interval", self.packet_interval)?;
        positive("round_duration", self.round_duration)?;
        if !(self.bs_pos.x.is_finite() && self.bs_pos.y.is_finite()) {
            return Err(ConfigError::invalid("bs_pos", "coordinates must be finite"));
        }
        if self.packet_interval > self.round_duration {
            return Err(ConfigError::invalid(
                "packet_interval",
                "must not exceed round_duration",
            ));
        }
        if self.round_duration > self.sim_time {
            return Err(ConfigError::invalid(
                "round_duration",
                "must not exceed sim_time",
            ));
        }
        let frames = self.round_duration / self.packet_interval;
        if (frames - frames.round()).abs() > 1e-9 * frames.max(1.0) {
            return Err(ConfigError::invalid(
                "round_duration",
                format!(
                    "must be an integer multiple of packet_interval ({} / {} = {frames})",
                    self.round_duration, self.packet_interval
                ),
            ));
        }
        if self.data_bits == 0 {
            return Err(ConfigError::invalid("data_bits", "must be > 0"));
        }
        if self.ctrl_bits == 0 {
            return Err(ConfigError::invalid("ctrl_bits", "must be > 0"));
        }
        if self.reconfigure_every == 0 {
            return Err(ConfigError::invalid("reconfigure_every", "must be >= 1"));
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::invalid("max_rounds", "must be >= 1"));
        }
        self.weights.validate()?;
        self.radio.validate()?;
        self.leach.validate()?;
        Ok(())
    }

    /// Data frames (one packet per member) in each round.
    pub fn frames_per_round(&self) -> u64 {
        (self.round_duration / self.packet_interval).round() as u64
    }

    /// Rounds executed under [`RunUntil::TimeCap`].
    pub fn time_cap_rounds(&self) -> u64 {
        // Tolerate representation error such as 500 / 20 = 24.999...
        (self.sim_time / self.round_duration + 1e-9).floor() as u64
    }

    /// E_total for the election weight.
    pub fn energy_denominator(&self) -> f64 {
        match self.energy_normalization {
            EnergyNormalization::InitialNode => self.initial_energy,
            EnergyNormalization::TotalNetwork => self.initial_energy * self.n_nodes as f64,
        }
    }
}

/// Places `n_nodes` sensors uniformly at random in the square field.
///
/// Positions depend on `seed`, `n_nodes` and `field_side` only, so both
/// protocols see the same topology for the same seed.
pub fn deploy(config: &SimConfig) -> Vec<Node> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = config.field_side;
    (0..config.n_nodes)
        .map(|id| {
            let x = rng.gen_range(0.0..=side);
            let y = rng.gen_range(0.0..=side);
            Node::new(id, Position::new(x, y), config.initial_energy)
        })
        .collect()
}

/// 64-bit FNV-1a over the bit patterns of every node position, in id order.
pub fn deployment_hash(nodes: &[Node]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for node in nodes {
        for word in [node.pos.x.to_bits(), node.pos.y.to_bits()] {
            for byte in word.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(PRIME);
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)), 5.0);
        // sqrt(40² + 155²) = sqrt(25625)
        let d = distance(Position::new(10.0, 20.0), Position::new(50.0, 175.0));
        assert!((d - 160.078).abs() < 0.01, "{d}");
        assert_eq!(d, distance(Position::new(50.0, 175.0), Position::new(10.0, 20.0)));
    }

    #[test]
    fn tx_cost_examples() {
        let r = RadioEnergyModel::default();
        assert!((r.d0() - 87.705_801_9).abs() < 1e-6);
        assert_eq!(r.tx_cost(0, 55.0), 0.0);
        assert!(close(r.tx_cost(4000, 20.0), 50e-9 * 4000.0 + 10e-12 * 4000.0 * 400.0, 1e-12));
        assert!(close(r.tx_cost(4000, 20.0), 2.16e-4, 1e-12));
        assert!(close(r.tx_cost(4000, 100.0), 7.2e-4, 1e-12));
    }

    #[test]
    fn tx_cost_continuous_at_crossover() {
        let r = RadioEnergyModel::default();
        let d0 = r.d0();
        let fs = 1000.0 * (r.e_elec + r.eps_fs * d0 * d0);
        let mp = 1000.0 * (r.e_elec + r.eps_mp * d0.powi(4));
        assert!(close(fs, mp, 1e-12));
        assert!(close(r.tx_cost(1000, d0), fs, 1e-12));
    }

    #[test]
    fn rx_and_aggregation_examples() {
        let r = RadioEnergyModel::default();
        assert_eq!(r.rx_cost(0), 0.0);
        assert!(close(r.rx_cost(4000), 2.0e-4, 1e-12));
        assert_eq!(r.aggregation_cost(0, 1), 0.0);
        assert!(close(r.aggregation_cost(4000, 11), 2.2e-4, 1e-12));
        assert!(close(r.aggregation_cost(4000, 22), 2.0 * r.aggregation_cost(4000, 11), 1e-15));
        for d in [0.001, 1.0, 50.0, 200.0] {
            assert!(r.rx_cost(4000) < r.tx_cost(4000, d));
        }
    }

    #[test]
    fn drain_updates_node_and_ledger() {
        let mut ledger = EnergyLedger::new();
        let mut node = Node::new(0, Position::new(1.0, 1.0), 2.0);
        ledger.drain(&mut node, 0.0);
        assert_eq!(node.residual_energy, 2.0);
        ledger.drain(&mut node, 2.16e-4);
        assert!((node.residual_energy - 1.999_784).abs() < 1e-12);
        assert_eq!(ledger.total(), 2.16e-4);
        ledger.drain(&mut node, 3.0);
        assert!(node.residual_energy < 0.0);
        assert!(close(ledger.total(), 3.000_216, 1e-12));
        assert!(close(ledger.take_round(), 3.000_216, 1e-12));
        assert_eq!(ledger.round(), 0.0);
    }

    #[test]
    #[should_panic(expected = "dead node")]
    fn drain_dead_node_panics() {
        let mut ledger = EnergyLedger::new();
        let mut node = Node::new(3, Position::new(0.0, 0.0), 1.0);
        node.alive = false;
        node.role = Role::Dead;
        ledger.drain(&mut node, 0.1);
    }

    #[test]
    fn deploy_within_field_and_charged() {
        let cfg = SimConfig {
            n_nodes: 400,
            ..SimConfig::default()
        };
        let nodes = deploy(&cfg);
        assert_eq!(nodes.len(), 400);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.id, i);
            assert!((0.0..=100.0).contains(&n.pos.x) && (0.0..=100.0).contains(&n.pos.y));
            assert_eq!(n.residual_energy, 2.0);
            assert_eq!(n.num_ch, 0);
            assert_eq!(n.role, Role::Member);
            assert!(n.alive);
        }
    }

    #[test]
    fn deploy_is_deterministic_and_protocol_independent() {
        let a = SimConfig {
            n_nodes: 2,
            seed: 77,
            ..SimConfig::default()
        };
        let b = SimConfig {
            protocol: Protocol::Leach,
            ..a.clone()
        };
        let (na, nb) = (deploy(&a), deploy(&b));
        assert_eq!(na, deploy(&a));
        assert_eq!(na, nb);
        assert_eq!(deployment_hash(&na), deployment_hash(&nb));
        let c = SimConfig { seed: 78, ..a };
        assert_ne!(deployment_hash(&na), deployment_hash(&deploy(&c)));
    }

    #[test]
    fn deploy_mean_position_near_center() {
        let cfg = SimConfig {
            n_nodes: 1000,
            seed: 2024,
            ..SimConfig::default()
        };
        let nodes = deploy(&cfg);
        let mx = nodes.iter().map(|n| n.pos.x).sum::<f64>() / 1000.0;
        let my = nodes.iter().map(|n| n.pos.y).sum::<f64>() / 1000.0;
        // Standard error of the mean is 100/sqrt(12 * 1000) ≈ 0.91.
        assert!((mx - 50.0).abs() < 3.0 && (my - 50.0).abs() < 3.0, "({mx}, {my})");
    }

    #[test]
    fn config_validation_names_fields() {
        let bad = |f: fn(&mut SimConfig)| {
            let mut c = SimConfig::default();
            f(&mut c);
            c.validate().unwrap_err().field()
        };
        assert!(SimConfig::default().validate().is_ok());
        assert_eq!(bad(|c| c.n_nodes = 0), "n_nodes");
        assert_eq!(bad(|c| c.n_nodes = 1), "n_nodes");
        assert_eq!(bad(|c| c.radio_range = 0.0), "radio_range");
        assert_eq!(bad(|c| c.packet_interval = 30.0), "packet_interval");
        assert_eq!(bad(|c| c.round_duration = 600.0), "round_duration");
        assert_eq!(bad(|c| c.round_duration = 20.1), "round_duration");
        assert_eq!(bad(|c| c.radio.eps_mp = -1.0), "radio.eps_mp");
    }

    #[test]
    fn default_timing() {
        let c = SimConfig::default();
        assert_eq!(c.frames_per_round(), 100);
        assert_eq!(c.time_cap_rounds(), 25);
        assert!((c.frames_per_round() as f64 * c.packet_interval - c.round_duration).abs() < 1e-9);
    }
}

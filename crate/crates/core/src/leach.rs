//! LEACH baseline: rotating probabilistic election, nearest-head clusters,
//! single-hop head-to-base-station transmission.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::lmeec::{ClusterSet, RelayTarget};
use crate::model::{distance, Node, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeachParams {
    /// Desired fraction of cluster-heads per round.
    pub p: f64,
}

impl Default for LeachParams {
    fn default() -> Self {
        LeachParams { p: 0.05 }
    }
}

impl LeachParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p > 0.0 && self.p < 1.0 {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                "leach_p",
                format!("must lie in (0, 1), got {}", self.p),
            ))
        }
    }

    /// Rounds per epoch, `ceil(1 / p)`.
    pub fn epoch_len(&self) -> u64 {
        ((1.0 / self.p) - 1e-9).ceil() as u64
    }

    /// Election probability for an eligible node in `round`.
    pub fn threshold(&self, round: u64) -> f64 {
        let r = (round % self.epoch_len()) as f64;
        (self.p / (1.0 - self.p * r)).min(1.0)
    }
}

/// Which nodes have already served in the current epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeachState {
    served_in_epoch: Vec<Option<u64>>,
}

impl LeachState {
    pub fn new(n_nodes: usize) -> Self {
        LeachState {
            served_in_epoch: vec![None; n_nodes],
        }
    }

    pub fn is_eligible(&self, id: NodeId, round: u64, params: &LeachParams) -> bool {
        self.served_in_epoch[id] != Some(round / params.epoch_len())
    }

    pub fn record(&mut self, heads: &[NodeId], round: u64, params: &LeachParams) {
        let epoch = round / params.epoch_len();
        for &h in heads {
            self.served_in_epoch[h] = Some(epoch);
        }
    }
}

/// Random stream for the election of `round`, independent of the
/// deployment stream.
pub fn election_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round.wrapping_add(1));
    rng
}

/// Every participant draws one uniform number in id order; eligible alive
/// participants whose draw falls below the round threshold become heads.
pub fn leach_elect(
    nodes: &[Node],
    participants: &[NodeId],
    state: &LeachState,
    params: &LeachParams,
    round: u64,
    rng: &mut impl Rng,
) -> Vec<NodeId> {
    let threshold = params.threshold(round);
    participants
        .iter()
        .copied()
        .filter(|&id| {
            let draw: f64 = rng.gen();
            nodes[id].alive && state.is_eligible(id, round, params) && draw < threshold
        })
        .collect()
}

/// Non-heads join the geometrically nearest head (lower id on ties); with
/// no heads every participant sends straight to the base station.
pub fn leach_form_clusters(heads: &[NodeId], nodes: &[Node], participants: &[NodeId]) -> ClusterSet {
    if heads.is_empty() {
        return ClusterSet {
            direct: participants.to_vec(),
            ..ClusterSet::default()
        };
    }
    let mut members: BTreeMap<NodeId, Vec<NodeId>> = heads.iter().map(|&h| (h, Vec::new())).collect();
    for &id in participants {
        if members.contains_key(&id) {
            continue;
        }
        let nearest = members
            .keys()
            .copied()
            .map(|h| (distance(nodes[id].pos, nodes[h].pos), h))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, h)| h)
            .expect("at least one head");
        members.get_mut(&nearest).expect("head").push(id);
    }
    let relays = members.keys().map(|&h| (h, RelayTarget::DirectToBs)).collect();
    ClusterSet {
        members,
        relays,
        direct: Vec::new(),
    }
}

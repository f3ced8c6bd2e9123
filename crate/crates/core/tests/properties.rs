//! Randomized algebraic properties of the energy model and the election
//! formulas.

use lmeec_core::lmeec::{
    announcement_order, ch_announcement_weight, election_threshold, history_penalty, node_weight, ChAnnouncement,
    WeightInputs,
};
use lmeec_core::{RadioEnergyModel, WeightParams, WeightVariant};
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = WeightVariant> {
    prop_oneof![Just(WeightVariant::Literal), Just(WeightVariant::Magnitude)]
}

proptest! {
    #[test]
    fn tx_cost_is_monotone_in_distance(bits in 1u64..10_000, d in 0.0f64..300.0, step in 0.0f64..50.0) {
        let radio = RadioEnergyModel::default();
        prop_assert!(radio.tx_cost(bits, d + step) >= radio.tx_cost(bits, d));
        prop_assert!(radio.tx_cost(bits, d) >= radio.rx_cost(bits));
    }

    #[test]
    fn tx_cost_is_linear_in_bits(bits in 1u64..10_000, d in 0.0f64..300.0) {
        let radio = RadioEnergyModel::default();
        let one = radio.tx_cost(1, d);
        let many = radio.tx_cost(bits, d);
        prop_assert!((many - one * bits as f64).abs() <= 1e-12 * many);
    }

    #[test]
    fn threshold_strictly_decreases_with_layer(t0 in 1e-3f64..10.0, layer in 1u32..50) {
        let params = WeightParams { t0, ..WeightParams::default() };
        prop_assert!(election_threshold(layer + 1, &params) < election_threshold(layer, &params));
    }

    #[test]
    fn penalty_is_bounded_and_nondecreasing(gamma in 0.0f64..=1.0, k in 0u32..1000) {
        let p = history_penalty(k, gamma);
        prop_assert!(p >= 0.0 && p < gamma.max(f64::MIN_POSITIVE));
        prop_assert!(history_penalty(k + 1, gamma) >= p);
    }

    #[test]
    fn weight_grows_with_residual_energy(
        alpha in 0.0f64..0.99, beta in 0.0f64..=1.0, gamma in 0.0f64..=1.0,
        variant in variant(), layer in 1u32..8, degree in 0usize..200,
        residual in 0.0f64..2.0, extra in 1e-6f64..1.0, num_ch in 0u32..20,
    ) {
        let params = WeightParams { alpha, beta, gamma, t0: 0.5, variant };
        let inputs = WeightInputs { layer, degree, n_total: 200, residual, e_total: 2.0, num_ch };
        let richer = WeightInputs { residual: residual + extra, ..inputs };
        prop_assert!(node_weight(&richer, &params) > node_weight(&inputs, &params));
    }

    #[test]
    fn magnitude_and_literal_differ_only_in_degree_sign(
        alpha in 0.0f64..0.99, beta in 0.0f64..=1.0, gamma in 0.0f64..=1.0,
        layer in 1u32..8, degree in 0usize..200, residual in 0.0f64..2.0, num_ch in 0u32..20,
    ) {
        let inputs = WeightInputs { layer, degree, n_total: 200, residual, e_total: 2.0, num_ch };
        let lit = node_weight(&inputs, &WeightParams { alpha, beta, gamma, t0: 0.5, variant: WeightVariant::Literal });
        let mag = node_weight(&inputs, &WeightParams { alpha, beta, gamma, t0: 0.5, variant: WeightVariant::Magnitude });
        let degree_term = (degree as f64 / 200.0) / (f64::from(layer) - alpha);
        prop_assert!(((mag - lit) - 2.0 * degree_term).abs() <= 1e-12 * (1.0 + mag.abs() + lit.abs()));
    }

    #[test]
    fn announcement_order_is_total_and_antisymmetric(
        pa in 0.0f64..1.0, pb in 0.0f64..1.0, la in 1u32..5, lb in 1u32..5, ia in 0usize..50, ib in 0usize..50,
    ) {
        let a = ChAnnouncement { ch_id: ia, p_ch: pa, layer: la };
        let b = ChAnnouncement { ch_id: ib, p_ch: pb, layer: lb };
        prop_assert_eq!(announcement_order(&a, &b), announcement_order(&b, &a).reverse());
        if ia == ib && pa == pb && la == lb {
            prop_assert_eq!(announcement_order(&a, &b), std::cmp::Ordering::Equal);
        }
    }

    #[test]
    fn announcement_weight_favors_energy_and_distance(
        residual in 1e-3f64..2.0, degree in 1usize..100, layer in 1u32..8,
    ) {
        let base = ch_announcement_weight(residual, degree, layer);
        prop_assert!(ch_announcement_weight(residual, degree, layer + 1) > base);
        prop_assert!(ch_announcement_weight(residual * 1.5, degree, layer) > base);
        prop_assert!(ch_announcement_weight(residual, degree + 1, layer) < base);
    }
}

use std::sync::OnceLock;

use heatkernel::lrb::LevyLaw;
use heatkernel::pricing::{caplet_price_closed, ClosedFormKind};
use heatkernel::scenario::{combined_debt, ExposureMatrix};
use heatkernel::verify::{catalog, CatalogModel, CATALOG_HORIZON};
use proptest::prelude::*;

fn models() -> &'static [CatalogModel] {
    static MODELS: OnceLock<Vec<CatalogModel>> = OnceLock::new();
    MODELS.get_or_init(|| catalog().unwrap())
}

fn state_for(m: &CatalogModel, raw: &[f64]) -> Vec<f64> {
    m.bridge()
        .components()
        .iter()
        .zip(raw)
        .map(|(c, &x)| if c.law.is_increasing() { 0.05 + 2.5 * (x + 1.0) } else { 3.0 * x })
        .collect()
}

prop_compose! {
    fn model_state()(idx in 0..7usize, raw in prop::collection::vec(-1.0..1.0f64, 3), t in 0.0..0.95f64)
        -> (usize, Vec<f64>, f64) {
        let m = &models()[idx];
        (idx, state_for(m, &raw), t * CATALOG_HORIZON)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bonds_pull_to_par((idx, state, t) in model_state()) {
        let p = models()[idx].bond.bond_price(t, t, &state).unwrap();
        prop_assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bond_prices_are_discount_factors((idx, state, t) in model_state(), s in 0.0..1.0f64) {
        let bond = &models()[idx].bond;
        let mid = t + s * (CATALOG_HORIZON - t) * 0.5;
        let far = t + s * (CATALOG_HORIZON - t);
        let (p_mid, p_far) = (bond.bond_price(t, mid, &state).unwrap(), bond.bond_price(t, far, &state).unwrap());
        prop_assert!(p_far > 0.0 && p_mid <= 1.0 + 1e-12);
        prop_assert!(p_far <= p_mid * (1.0 + 1e-12));
    }

    #[test]
    fn short_rate_is_non_negative((idx, state, t) in model_state()) {
        prop_assert!(models()[idx].bond.short_rate(t, &state).unwrap() >= 0.0);
    }

    #[test]
    fn posterior_is_a_distribution((idx, state, t) in model_state()) {
        for q in models()[idx].bridge().posterior(t, &state).unwrap() {
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(q.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn caplet_price_increases_with_strike(t in 0.2..2.0f64, d in 0.2..1.5f64, k in 0.5..1.2f64, dk in 0.001..0.1f64) {
        let m = &models()[0];
        let (curve, b) = (m.bond.curve(), &m.bond.terms()[0].factors[0].b);
        let price = |k: f64| {
            caplet_price_closed(ClosedFormKind::Quadratic, k, t, t + d, CATALOG_HORIZON, curve.as_ref(), b.as_ref()).unwrap()
        };
        let (lo, hi) = (price(k), price(k + dk));
        prop_assert!(lo >= 0.0);
        prop_assert!(hi >= lo - 1e-15);
        // bounded by the discounted strike
        prop_assert!(lo <= k * curve.value(t) + 1e-12);
    }

    #[test]
    fn quantiles_are_monotone(p in 0.001..0.998f64, dp in 0.0001..0.001f64, t in 0.1..5.0f64) {
        for law in [LevyLaw::BrownianUnit, LevyLaw::Gamma { m: 1.5 }, LevyLaw::StableHalf { alpha: 1.3 }] {
            prop_assert!(law.quantile(t, p + dp).unwrap() > law.quantile(t, p).unwrap());
        }
    }

    #[test]
    fn identity_exposure_keeps_own_debt(path in prop::collection::vec(0.0..10.0f64, 1..20)) {
        let ex = ExposureMatrix::identity(2);
        let debt = vec![path.clone(), path.iter().map(|x| 2.0 * x).collect()];
        prop_assert_eq!(combined_debt(&ex, &debt, 0).unwrap(), path);
    }
}

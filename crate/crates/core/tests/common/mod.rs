#![allow(dead_code)]

use proptest::prelude::*;

use spillover_core::funcexpr::ParamMap;
use spillover_core::model::{make_family, ContestSpec};

pub fn params(kv: &[(&str, f64)]) -> ParamMap {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn family(name: &str, kv: &[(&str, f64)]) -> ContestSpec {
    make_family(name, &params(kv)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn named(name: &'static str, keys: &'static [&'static str], ranges: Vec<(f64, f64)>) -> BoxedStrategy<(String, ParamMap)> {
    ranges
        .into_iter()
        .map(|(a, b)| a..b)
        .collect::<Vec<_>>()
        .prop_map(move |vals| {
            let map = keys.iter().zip(vals).map(|(k, v)| (k.to_string(), v)).collect();
            (name.to_string(), map)
        })
        .boxed()
}

/// Built-in families with parameters inside their documented ranges.
pub fn any_family() -> impl Strategy<Value = (String, ParamMap)> {
    prop_oneof![
        named("constant_prize", &["v1", "v2", "c_slope1", "c_slope2"], vec![(0.5, 2.0); 4]),
        named(
            "affine_spillover",
            &["v1_0", "v1_s", "v1_y", "c1", "v2_0", "v2_s", "v2_y", "c2"],
            vec![(1.0, 2.0), (-0.3, 0.0), (-0.3, 0.3), (0.5, 1.5), (1.0, 2.0), (-0.3, 0.0), (-0.3, 0.3), (0.5, 1.5)],
        ),
        named("logistic_spillover", &["lambda"], vec![(0.0, 4.0)]),
        named("woa_costly_prep", &["f1_0", "f2_0", "delta"], vec![(0.5, 2.0), (0.5, 2.0), (0.05, 0.5)]),
        named("woa_uncompromising", &["f1_0", "f2_0", "z1", "z2"], vec![(0.5, 2.0), (0.5, 2.0), (0.05, 0.3), (0.05, 0.3)]),
        named("offense_defense", &["V", "delta_a", "c_a", "c_d"], vec![(0.5, 2.0), (0.0, 1.5), (0.5, 1.5), (0.5, 1.5)]),
        named("exp_investment", &["omega1", "omega2", "r1", "r2"], vec![(0.3, 0.9), (0.3, 0.9), (0.2, 0.8), (0.2, 0.8)]),
        named("winners_regret", &["omega1", "omega2"], vec![(0.2, 0.5), (0.2, 0.5)]),
    ]
}

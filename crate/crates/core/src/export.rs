//! CSV and JSON renderings of solver output. Numbers are written with
//! 17 significant digits so identical runs produce identical bytes.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::SweepResult;
use crate::equilibrium::{expected_score, win_probability, Equilibrium};
use crate::model::Player;

pub const EQUILIBRIUM_COLUMNS: [&str; 5] = ["node", "G1", "G2", "g1", "g2"];
pub const SWEEP_COLUMNS: [&str; 7] = ["param_value", "payoff_1", "payoff_2", "atom_1", "atom_2", "s_bar", "win_prob_1"];

fn row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v:.16e}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

/// One row per grid node: `node, G1, G2, g1, g2`.
pub fn equilibrium_csv(eq: &Equilibrium) -> String {
    let mut out = EQUILIBRIUM_COLUMNS.join(",");
    out.push('\n');
    let [a, b] = &eq.strategies;
    for k in 0..=eq.grid.n() {
        row(&mut out, &[eq.grid.node(k), a.cdf[k], b.cdf[k], a.density[k], b.density[k]]);
    }
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for p in &result.points {
        row(
            &mut out,
            &[p.value, p.payoffs[0], p.payoffs[1], p.atoms[0], p.atoms[1], p.s_bar, p.win_prob_1],
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub s_bar: f64,
    pub s_bar_raw: [Option<f64>; 2],
    pub atoms: [f64; 2],
    pub payoffs: [f64; 2],
    pub win_prob: [f64; 2],
    pub expected_scores: [f64; 2],
}

pub fn summary(eq: &Equilibrium) -> Summary {
    Summary {
        s_bar: eq.upper_bound,
        s_bar_raw: eq.upper_bounds_raw,
        atoms: eq.atoms(),
        payoffs: eq.payoffs,
        win_prob: Player::BOTH.map(|p| win_probability(eq, p)),
        expected_scores: Player::BOTH.map(|p| expected_score(eq, p)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve, SolveOptions};
    use crate::funcexpr::ParamMap;
    use crate::model::make_family;

    #[test]
    fn csv_shape_and_precision() {
        let p: ParamMap = [("v".to_string(), 1.0)].into();
        let spec = make_family("constant_prize", &p).unwrap();
        let eq = solve(&spec, &SolveOptions { grid_n: 20, ..Default::default() }).unwrap();
        let csv = equilibrium_csv(&eq);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "node,G1,G2,g1,g2");
        assert_eq!(lines.len(), 22);
        let last: Vec<f64> = lines[21].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[0], eq.grid.horizon());
        assert_eq!(last[1], 1.0);
        // 17 significant digits round-trip exactly
        for line in &lines[1..] {
            for field in line.split(',') {
                let v: f64 = field.parse().unwrap();
                assert_eq!(format!("{v:.16e}"), field);
            }
        }
        assert_eq!(csv, equilibrium_csv(&eq));
    }
}

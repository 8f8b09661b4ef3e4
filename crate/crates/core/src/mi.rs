//! Exact expected Shannon mutual information of a candidate action.
//!
//! Beams are treated independently. Along one beam the cells `c_1..c_n` are
//! taken from the belief map (traversal ignores believed occupancy). The beam
//! returns "hit at `c_j`" with probability `p_j · ∏_{i<j}(1 - p_i)` or "miss"
//! with probability `∏(1 - p_i)`. A hit at `c_j` leaves `c_1..c_j` known and
//! the cells behind it untouched, so the posterior entropy of that outcome is
//! the suffix sum of cell entropies after `j`.

use std::time::Instant;

use crate::action::Action;
use crate::error::Result;
use crate::grid::{raycast, OccupancyGrid};
use crate::sensor::SensorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct MiResult {
    pub mi_bits: f64,
    pub per_beam_bits: Vec<f64>,
    pub eval_time_s: f64,
}

/// Probability of each beam outcome: hit at cell `j` for `j < n`, then miss.
pub fn outcome_probabilities(occupancy: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(occupancy.len() + 1);
    let mut pass = 1.0;
    for &p in occupancy {
        out.push(pass * p);
        pass *= 1.0 - p;
    }
    out.push(pass);
    out
}

/// MI of one beam given the occupancy probability and current entropy of
/// each traversed cell.
pub fn ray_mutual_information(occupancy: &[f64], entropy: &[f64]) -> f64 {
    debug_assert_eq!(occupancy.len(), entropy.len());
    let n = occupancy.len();
    // suffix[j] = entropy of cells j..n
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + entropy[j];
    }
    let prior = suffix[0];

    let mut pass = 1.0;
    let mut total_prob = 0.0;
    let mut expected_posterior = 0.0;
    for j in 0..n {
        let hit = pass * occupancy[j];
        expected_posterior += hit * suffix[j + 1];
        total_prob += hit;
        pass *= 1.0 - occupancy[j];
    }
    total_prob += pass;
    debug_assert!((total_prob - 1.0).abs() < 1e-12, "outcome mass {total_prob}");

    (prior - expected_posterior).max(0.0)
}

/// MI contributed by the beam at absolute `bearing` from `pose`.
pub fn beam_mi(grid: &OccupancyGrid, pose: &Action, bearing: f64, spec: &SensorSpec) -> Result<f64> {
    let ray = raycast(grid, pose, bearing, spec.max_range_m)?;
    let geo = grid.geometry();
    let (occupancy, entropy): (Vec<f64>, Vec<f64>) = ray
        .cells
        .iter()
        .map(|&c| {
            let i = geo.index(c);
            (grid.probability_at(i), grid.entropy_at(i))
        })
        .unzip();
    Ok(ray_mutual_information(&occupancy, &entropy))
}

/// Sum of per-beam MI over the sensor's bearings around `action`'s heading.
pub fn action_mi(grid: &OccupancyGrid, action: &Action, spec: &SensorSpec) -> Result<MiResult> {
    let start = Instant::now();
    let per_beam_bits = spec
        .bearings(action.heading_rad)
        .into_iter()
        .map(|b| beam_mi(grid, action, b, spec))
        .collect::<Result<Vec<_>>>()?;
    let mi_bits = per_beam_bits.iter().sum();
    Ok(MiResult {
        mi_bits,
        per_beam_bits,
        eval_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Rescales values by their maximum so the largest becomes 1 bit. Reporting only.
pub fn normalize_for_display(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        values.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{binary_entropy, CellIndex};

    /// Enumerates every joint occupancy configuration, groups by the first
    /// occupied cell, and computes posterior joint entropies by Bayes' rule.
    fn oracle(p: &[f64]) -> f64 {
        let n = p.len();
        let configs = 1usize << n;
        let prob = |m: usize| -> f64 {
            (0..n)
                .map(|i| if m >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product()
        };
        let outcome = |m: usize| -> usize { (0..n).find(|&i| m >> i & 1 == 1).unwrap_or(n) };
        let joint_entropy = |weights: &[f64]| -> f64 {
            weights
                .iter()
                .filter(|&&w| w > 0.0)
                .map(|&w| -w * w.log2())
                .sum()
        };
        let prior: Vec<f64> = (0..configs).map(prob).collect();
        let h_prior = joint_entropy(&prior);
        let mut h_cond = 0.0;
        for z in 0..=n {
            let pz: f64 = (0..configs).filter(|&m| outcome(m) == z).map(prob).sum();
            if pz == 0.0 {
                continue;
            }
            let post: Vec<f64> = (0..configs)
                .map(|m| if outcome(m) == z { prob(m) / pz } else { 0.0 })
                .collect();
            h_cond += pz * joint_entropy(&post);
        }
        h_prior - h_cond
    }

    fn ray_mi(p: &[f64]) -> f64 {
        let h: Vec<f64> = p.iter().map(|&q| binary_entropy(q)).collect();
        ray_mutual_information(p, &h)
    }

    #[test]
    fn single_uniform_cell_is_one_bit() {
        assert!((ray_mi(&[0.5]) - 1.0).abs() < 1e-15);
        assert!((oracle(&[0.5]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_uniform_cells_match_enumeration() {
        let p = [0.5, 0.5, 0.5];
        // outcomes: hit 0 (1/2, 2 bits left), hit 1 (1/4, 1 bit), hit 2 (1/8), miss (1/8)
        let expected = 3.0 - (0.5 * 2.0 + 0.25 * 1.0);
        assert!((ray_mi(&p) - expected).abs() < 1e-12);
        assert!((oracle(&p) - expected).abs() < 1e-12);
    }

    #[test]
    fn outcome_mass_sums_to_one() {
        let probs = outcome_probabilities(&[0.1, 0.7, 0.3, 0.99]);
        assert_eq!(probs.len(), 5);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_cells_give_zero() {
        let mut g = OccupancyGrid::new(10.0, 10.0, 1.0).unwrap();
        for i in 0..100 {
            g.set_log_odds(g.geometry().cell_at(i), -6.0).unwrap();
        }
        let spec = SensorSpec::default();
        let r = action_mi(&g, &Action::new(5.5, 5.5, 0.0), &spec).unwrap();
        assert_eq!(r.mi_bits, 0.0);
        assert_eq!(r.per_beam_bits.len(), 61);
        assert!(r.eval_time_s >= 0.0);
    }

    #[test]
    fn uniform_map_single_beam_matches_oracle() {
        let g = OccupancyGrid::new(10.0, 10.0, 1.0).unwrap();
        let spec = SensorSpec::with_count(0.5, 1, 3.0).unwrap();
        let pose = Action::new(2.5, 4.5, 0.0);
        let r = action_mi(&g, &pose, &spec).unwrap();
        // ray covers 4 uniform cells
        assert!((r.mi_bits - oracle(&[0.5; 4])).abs() < 1e-12);
        assert_eq!(r.per_beam_bits.len(), 1);
    }

    #[test]
    fn beam_mi_bounded_by_prior_entropy() {
        let mut g = OccupancyGrid::new(10.0, 10.0, 1.0).unwrap();
        g.set_log_odds(CellIndex::new(4, 4), 1.2).unwrap();
        g.set_log_odds(CellIndex::new(5, 4), -0.8).unwrap();
        let spec = SensorSpec::with_count(0.5, 1, 5.0).unwrap();
        let pose = Action::new(2.5, 4.5, 0.0);
        let mi = beam_mi(&g, &pose, 0.0, &spec).unwrap();
        let ray = raycast(&g, &pose, 0.0, 5.0).unwrap();
        let prior: f64 = ray.cells.iter().map(|&c| g.cell_entropy(c).unwrap()).sum();
        assert!(mi > 0.0 && mi <= prior);
    }

    #[test]
    fn display_normalization() {
        assert_eq!(normalize_for_display(&[1.0, 4.0, 2.0]), vec![0.25, 1.0, 0.5]);
        assert_eq!(normalize_for_display(&[0.0, 0.0]), vec![0.0, 0.0]);
    }
}

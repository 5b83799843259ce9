//! Deterministic synthetic networks for benchmarks and stress tests.
//!
//! Real interconnection data is large and encumbered; these generators build
//! structurally realistic stand-ins — a ring backbone for connectedness plus
//! random chords for meshing — with sizes chosen by the caller. The same seed
//! always yields the identical network, byte for byte.

use crate::case::{Bus, Generator, Line, PowerNetwork};

/// xorshift64* — tiny, seedable, and stable across platforms.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in [lo, hi).
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Builds a connected network: a ring over `n_buses` (bus ids `1..=n_buses`,
/// bus 1 slack), `n_chords` additional random lines, and `n_generators`
/// spread round-robin over the buses with linear costs. Every line carries a
/// finite flow limit, and total load sits at roughly 55% of total generation
/// capacity, so the dispatch problem is feasible with room to move.
pub fn ring_mesh_network(n_buses: usize, n_chords: usize, n_generators: usize, seed: u64) -> PowerNetwork {
    assert!(n_buses >= 2, "a ring needs at least two buses");
    assert!(n_generators >= 1, "at least one generator required");
    let mut rng = Rng::new(seed);

    let mut lines = Vec::with_capacity(n_buses + n_chords);
    for i in 0..n_buses {
        lines.push(Line {
            from: i,
            to: (i + 1) % n_buses,
            susceptance: rng.range(5.0, 20.0),
            flow_limit: rng.range(2.0, 6.0),
        });
    }
    for _ in 0..n_chords {
        let a = rng.below(n_buses);
        let mut b = rng.below(n_buses);
        if b == a {
            b = (a + 1 + rng.below(n_buses - 1)) % n_buses;
        }
        lines.push(Line {
            from: a,
            to: b,
            susceptance: rng.range(5.0, 20.0),
            flow_limit: rng.range(2.0, 6.0),
        });
    }

    let mut generators = Vec::with_capacity(n_generators);
    let mut capacity = 0.0;
    for g in 0..n_generators {
        let p_max = rng.range(1.0, 4.0);
        capacity += p_max;
        generators.push(Generator {
            bus: g % n_buses,
            p_min: 0.0,
            p_max,
            cost_quad: 0.0,
            cost_lin: rng.range(10.0, 50.0),
        });
    }

    // Raw loads, then one scaling pass to hit the target utilization.
    let raw: Vec<f64> = (0..n_buses).map(|_| rng.range(0.2, 1.5)).collect();
    let raw_total: f64 = raw.iter().sum();
    let target = 0.55 * capacity;
    let buses = (0..n_buses)
        .map(|i| Bus { id: i + 1, load: raw[i] * target / raw_total, is_slack: i == 0 })
        .collect();

    PowerNetwork {
        name: format!("synthetic_{n_buses}b_{}l_{n_generators}g", n_buses + n_chords),
        base_mva: 100.0,
        buses,
        lines,
        generators,
        cost_offset: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{canonicalize, ProblemKind};
    use crate::ptdf::build_ptdf;

    #[test]
    fn same_seed_same_network() {
        let a = ring_mesh_network(50, 30, 40, 7);
        let b = ring_mesh_network(50, 30, 40, 7);
        assert_eq!(a, b);
        let c = ring_mesh_network(50, 30, 40, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn produces_a_solvable_canonical_problem() {
        let net = ring_mesh_network(40, 25, 60, 3);
        let ptdf = build_ptdf(&net).unwrap();
        let prob = canonicalize(&net, &ptdf, ProblemKind::Lp).unwrap();
        assert_eq!(prob.n_vars(), 60);
        assert_eq!(prob.ineq_matrix.nrows(), 2 * (40 + 25));
        assert!(prob.warnings.is_empty(), "{:?}", prob.warnings);
        // Targets 55% utilization: the balance row is satisfiable.
        let need = prob.eq_rhs[0];
        let reach: f64 = prob.map.scale.sum();
        assert!(need.abs() <= reach);
    }
}


//! Power transfer distribution factors for the DC flow model.
//!
//! With `E` the line-bus incidence matrix reduced by the slack column and
//! `Ω = diag(susceptance)`, the PTDF over non-slack buses is
//! `H = ΩE(EᵀΩE)⁻¹`; [`build_ptdf`] computes it by factorizing `EᵀΩE` (never
//! by explicit inversion) and re-inserts an exactly-zero slack column, so
//! `flows = H_a · injections` for any balanced injection vector.
//! [`dc_powerflow_oracle`] solves the same model independently through bus
//! angles and is used to cross-check `H_a` in tests.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::case::PowerNetwork;

/// Errors from PTDF construction or the angle-space flow oracle.
#[derive(Debug, Error)]
pub enum PtdfError {
    /// The reduced susceptance matrix `EᵀΩE` is singular. With positive
    /// susceptances this happens exactly when some bus has no path to the
    /// slack bus.
    #[error("reduced susceptance matrix is singular (network not connected to the slack bus)")]
    Singular,
    /// Injections passed to the oracle do not sum to zero.
    #[error("injections sum to {sum:e}, beyond the balance tolerance {tol:e}")]
    Unbalanced { sum: f64, tol: f64 },
    #[error("expected {expected} injections (one per bus), got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// The dense PTDF matrix of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct PtdfMatrix {
    /// `n_lines × n_buses`; column `slack` is exactly zero.
    pub h_a: DMatrix<f64>,
    /// Bus index whose injection never moves any flow.
    pub slack: usize,
}

impl PtdfMatrix {
    /// Line flows induced by a (balanced) bus injection vector, per-unit.
    pub fn flows(&self, injections: &DVector<f64>) -> DVector<f64> {
        &self.h_a * injections
    }

    /// Full-precision CSV: one row per line, one column per bus.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.h_a.nrows() {
            let row: Vec<String> = (0..self.h_a.ncols()).map(|j| crate::fmt::g17(self.h_a[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reduced incidence `E` (slack column deleted) and `ΩE`, both `n_l × (n_b−1)`.
fn reduced_incidence(net: &PowerNetwork, slack: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n_l = net.lines.len();
    let n_red = net.buses.len() - 1;
    let col = |bus: usize| if bus < slack { Some(bus) } else if bus > slack { Some(bus - 1) } else { None };
    let mut e = DMatrix::zeros(n_l, n_red);
    let mut oe = DMatrix::zeros(n_l, n_red);
    for (i, line) in net.lines.iter().enumerate() {
        if let Some(j) = col(line.from) {
            e[(i, j)] = 1.0;
            oe[(i, j)] = line.susceptance;
        }
        if let Some(j) = col(line.to) {
            e[(i, j)] = -1.0;
            oe[(i, j)] = -line.susceptance;
        }
    }
    (e, oe)
}

/// LU with a singularity guard: nalgebra's solve tolerates tiny pivots, so
/// reject factors whose diagonal collapses relative to the matrix scale.
fn checked_lu(m: DMatrix<f64>) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, PtdfError> {
    let scale = m.amax().max(1e-300);
    let lu = m.lu();
    let u_diag_min = lu.u().diagonal().iter().fold(f64::INFINITY, |a, d| a.min(d.abs()));
    if !u_diag_min.is_finite() || u_diag_min <= 1e-12 * scale {
        return Err(PtdfError::Singular);
    }
    Ok(lu)
}

/// Builds the PTDF matrix `H_a` for a network.
///
/// Solves `(EᵀΩE)Hᵀ = (ΩE)ᵀ` with a pivoted dense factorization, then inserts
/// the zero slack column. Scaling every susceptance by a common factor leaves
/// the result unchanged up to rounding.
pub fn build_ptdf(net: &PowerNetwork) -> Result<PtdfMatrix, PtdfError> {
    let n_b = net.buses.len();
    let n_l = net.lines.len();
    let slack = net.slack_index();
    if n_b == 1 {
        // Single-bus network: no reduced system, flows are identically zero.
        return Ok(PtdfMatrix { h_a: DMatrix::zeros(n_l, 1), slack });
    }

    let (e, oe) = reduced_incidence(net, slack);
    let b_reduced = e.transpose() * &oe; // EᵀΩE, symmetric positive definite when connected
    let lu = checked_lu(b_reduced)?;
    let h_t = lu.solve(&oe.transpose()).ok_or(PtdfError::Singular)?; // (n_b−1) × n_l

    let mut h_a = DMatrix::zeros(n_l, n_b);
    for i in 0..n_l {
        for j in 0..n_b - 1 {
            let bus = if j < slack { j } else { j + 1 };
            h_a[(i, bus)] = h_t[(j, i)];
        }
    }
    Ok(PtdfMatrix { h_a, slack })
}

/// Computes line flows for a balanced injection vector by solving the bus
/// angle system `(EᵀΩE)θ = p` and evaluating `ΩEθ` — an independent route
/// to the same flows `H_a` produces, used as a test oracle.
///
/// Injections must sum to zero within `1e−9 ×` the network's total load (with
/// a floor of one per-unit, so zero-load networks still accept exact-zero
/// imbalance but reject real ones).
pub fn dc_powerflow_oracle(net: &PowerNetwork, injections: &DVector<f64>) -> Result<DVector<f64>, PtdfError> {
    let n_b = net.buses.len();
    if injections.len() != n_b {
        return Err(PtdfError::DimensionMismatch { expected: n_b, got: injections.len() });
    }
    let total_load: f64 = net.buses.iter().map(|b| b.load).sum();
    let tol = 1e-9 * total_load.abs().max(1.0);
    let sum = injections.sum();
    if sum.abs() > tol {
        return Err(PtdfError::Unbalanced { sum, tol });
    }
    let slack = net.slack_index();
    if n_b == 1 {
        return Ok(DVector::zeros(net.lines.len()));
    }

    let (e, oe) = reduced_incidence(net, slack);
    let b_reduced = e.transpose() * &oe;
    let p_reduced = DVector::from_fn(n_b - 1, |j, _| {
        injections[if j < slack { j } else { j + 1 }]
    });
    let theta = checked_lu(b_reduced)?.solve(&p_reduced).ok_or(PtdfError::Singular)?;
    Ok(oe * theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{parse_case, Bus, Line, PowerNetwork};

    fn two_bus() -> PowerNetwork {
        parse_case(crate::fixtures::CASE2).unwrap()
    }

    #[test]
    fn two_bus_ptdf_is_exact() {
        let ptdf = build_ptdf(&two_bus()).unwrap();
        assert_eq!(ptdf.h_a.nrows(), 1);
        assert_eq!(ptdf.h_a[(0, 0)], 0.0);
        assert_eq!(ptdf.h_a[(0, 1)], -1.0);
    }

    #[test]
    fn two_bus_unit_transfer_flow() {
        let ptdf = build_ptdf(&two_bus()).unwrap();
        let flows = ptdf.flows(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(flows[0], 1.0);
    }

    #[test]
    fn slack_column_is_exactly_zero() {
        for text in [crate::fixtures::CASE2, crate::fixtures::CASE3Q, crate::fixtures::CASE5] {
            let net = parse_case(text).unwrap();
            let ptdf = build_ptdf(&net).unwrap();
            for i in 0..ptdf.h_a.nrows() {
                assert_eq!(ptdf.h_a[(i, ptdf.slack)], 0.0);
            }
        }
    }

    #[test]
    fn matches_angle_oracle_on_random_balanced_injections() {
        let net = parse_case(crate::fixtures::CASE5).unwrap();
        let ptdf = build_ptdf(&net).unwrap();
        let n = net.buses.len();
        // Deterministic pseudo-random injections, mean-shifted to balance.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..10 {
            let mut p = DVector::from_fn(n, |_, _| next());
            let mean = p.sum() / n as f64;
            p.add_scalar_mut(-mean);
            let via_ptdf = ptdf.flows(&p);
            let via_angles = dc_powerflow_oracle(&net, &p).unwrap();
            let err = (&via_ptdf - &via_angles).amax();
            assert!(err <= 1e-8, "routes disagree by {err:e}");
        }
    }

    #[test]
    fn zero_injections_zero_flows() {
        let net = parse_case(crate::fixtures::CASE5).unwrap();
        let flows = dc_powerflow_oracle(&net, &DVector::zeros(net.buses.len())).unwrap();
        assert!(flows.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn unbalanced_injections_rejected() {
        let net = two_bus();
        let err = dc_powerflow_oracle(&net, &DVector::from_vec(vec![1.0, -0.5])).unwrap_err();
        assert!(matches!(err, PtdfError::Unbalanced { .. }));
    }

    #[test]
    fn susceptance_scale_invariance() {
        let net = parse_case(crate::fixtures::CASE5).unwrap();
        let mut scaled = net.clone();
        for l in &mut scaled.lines {
            l.susceptance *= 7.0;
        }
        let a = build_ptdf(&net).unwrap();
        let b = build_ptdf(&scaled).unwrap();
        assert!((&a.h_a - &b.h_a).amax() <= 1e-10);
    }

    #[test]
    fn disconnected_network_is_singular() {
        // Hand-built (bypasses parse-time validation): two islands.
        let bus = |id: usize, is_slack: bool| Bus { id, load: 0.0, is_slack };
        let net = PowerNetwork {
            name: "islands".into(),
            base_mva: 100.0,
            buses: vec![bus(1, true), bus(2, false), bus(3, false), bus(4, false)],
            lines: vec![
                Line { from: 0, to: 1, susceptance: 5.0, flow_limit: 1.0 },
                Line { from: 2, to: 3, susceptance: 5.0, flow_limit: 1.0 },
            ],
            generators: vec![],
            cost_offset: 0.0,
        };
        assert!(matches!(build_ptdf(&net), Err(PtdfError::Singular)));
    }

    #[test]
    fn single_bus_network_has_empty_ptdf() {
        let net = parse_case(crate::fixtures::CASE1DEG).unwrap();
        let ptdf = build_ptdf(&net).unwrap();
        assert_eq!(ptdf.h_a.nrows(), 0);
        assert_eq!(ptdf.h_a.ncols(), 1);
    }

    #[test]
    fn csv_dump_shape() {
        let ptdf = build_ptdf(&two_bus()).unwrap();
        assert_eq!(ptdf.to_csv(), "0,-1\n");
    }
}

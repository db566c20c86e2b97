//! Named desk-scale experiment presets. Instance counts are two orders of
//! magnitude below a cluster campaign, so confidence intervals are wide;
//! the orderings the presets probe are robust at this scale.

use cvqe_core::cost::EvalMode;
use cvqe_core::qubo::GraphKind;
use cvqe_core::simulator::Entanglement;

use crate::bench::{AnsatzChoice, ExperimentSpec, OptimizerChoice};

pub const PRESET_NAMES: [&str; 5] = [
    "fig5-desk",
    "fig7-desk",
    "fig8-desk",
    "fig9-desk",
    "table1-desk",
];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    match name {
        "fig5-desk" => Some(fig5_desk()),
        "fig7-desk" => Some(fig7_desk()),
        "fig8-desk" => Some(fig8_desk()),
        "fig9-desk" => Some(fig9_desk()),
        "table1-desk" => Some(table1_desk()),
        _ => None,
    }
}

/// Mean-cost vs tail-cost comparison across graph densities: product and
/// 3-layer linear circuits, exact evaluation, quasi-Newton.
pub fn fig5_desk() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig5-desk".into(),
        n: 12,
        graph_kind: GraphKind::UniformRandom,
        edge_counts: vec![3, 17, 59],
        instances: 100,
        ansatz: vec![
            AnsatzChoice::product(),
            AnsatzChoice::entangled(Entanglement::Linear, 3),
        ],
        rho: vec![1.0, 0.1],
        modes: vec![EvalMode::Exact],
        optimizers: vec![OptimizerChoice::Auto],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 0x0f15_0500,
    }
}

/// Layer-count saturation at mid density for both entanglement layouts.
pub fn fig7_desk() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig7-desk".into(),
        n: 12,
        graph_kind: GraphKind::UniformRandom,
        edge_counts: vec![17],
        instances: 100,
        ansatz: vec![
            AnsatzChoice::product(),
            AnsatzChoice::entangled(Entanglement::Linear, 1),
            AnsatzChoice::entangled(Entanglement::Linear, 2),
            AnsatzChoice::entangled(Entanglement::Linear, 3),
            AnsatzChoice::entangled(Entanglement::Compatible, 1),
            AnsatzChoice::entangled(Entanglement::Compatible, 2),
            AnsatzChoice::entangled(Entanglement::Compatible, 3),
        ],
        rho: vec![0.1],
        modes: vec![EvalMode::Exact],
        optimizers: vec![OptimizerChoice::Auto],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 0x0f15_0700,
    }
}

/// Stochastic vs gradient-based optimizers under shot noise and in the
/// exact limit, on 9-qubit problems.
pub fn fig8_desk() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig8-desk".into(),
        n: 9,
        graph_kind: GraphKind::UniformRandom,
        edge_counts: vec![9],
        instances: 100,
        ansatz: vec![AnsatzChoice::entangled(Entanglement::Linear, 1)],
        rho: vec![0.1],
        modes: vec![EvalMode::Shots(3000), EvalMode::Exact],
        optimizers: vec![OptimizerChoice::Spsa, OptimizerChoice::QuasiNewton],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 0x0f15_0800,
    }
}

/// Hardness sweep: regular graphs across the full degree range, product
/// and graph-compatible circuits, exact evaluation.
pub fn fig9_desk() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig9-desk".into(),
        n: 12,
        graph_kind: GraphKind::Regular,
        edge_counts: (1..=10).map(|d| 6 * d).collect(),
        instances: 16,
        ansatz: vec![
            AnsatzChoice::product(),
            AnsatzChoice::entangled(Entanglement::Compatible, 1),
        ],
        rho: vec![0.1],
        modes: vec![EvalMode::Exact],
        optimizers: vec![OptimizerChoice::Auto],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 0x0f15_0900,
    }
}

/// Hardness-binned success and speed for three observation modes.
pub fn table1_desk() -> ExperimentSpec {
    ExperimentSpec {
        name: "table1-desk".into(),
        n: 12,
        graph_kind: GraphKind::Regular,
        edge_counts: (1..=10).map(|d| 6 * d).collect(),
        instances: 10,
        ansatz: vec![
            AnsatzChoice::product(),
            AnsatzChoice::entangled(Entanglement::Compatible, 1),
        ],
        rho: vec![0.1],
        modes: vec![
            EvalMode::Exact,
            EvalMode::Shots(9000),
            EvalMode::Shots(3000),
        ],
        optimizers: vec![OptimizerChoice::Auto],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 0x0f15_0100,
    }
}

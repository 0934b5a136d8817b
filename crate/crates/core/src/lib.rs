//! Synchronization of diffusively coupled semipassive systems under a
//! uniform communication delay: graph spectra, node models, a fixed-step DDE
//! integrator, network assembly, closed-form bounds and (γ, τ) sweeps.

pub mod dde;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod network;
pub mod sweep;
pub mod theory;

pub use dde::{integrate, DelaySystem, IntegratorConfig, Trajectory};
pub use error::{Error, Result};
pub use graph::{
    build_topology, laplacian, spectrum, GraphSpec, LaplacianMatrix, LaplacianSpectrum, TopologyKind,
    WeightRule, WeightedGraph,
};
pub use linalg::Matrix;
pub use models::{HindmarshRose, NodeModel, NodeState, SemipassivityParams};
pub use network::{is_synchronized, NetworkSystem, SyncConfig, SyncMeasure, SyncVerdict};
pub use sweep::{
    boundary_curve, compare_topologies, empirical_optimum, run_sweep, unimodality_score, BoundaryCurve,
    InitialConditions, NetworkTemplate, RegionMap, SweepGrid,
};
pub use theory::{
    gamma_star, gamma_tilde, phi, tau_star, DerivedConstants, SemipassiveConstants, SpectralPair,
};

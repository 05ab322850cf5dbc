//! Deterministic fixtures shared by the benchmarks.

use curvflow::scenario::Generator;
use curvflow::{CyclicTridiagonal, IntrinsicState, PlanarCurve, RedistributionStrategy, SolverConfig, VelocityModel};

/// Diagonally dominant cyclic system resembling an implicit diffusion step.
pub fn diffusion_system(n: usize) -> (CyclicTridiagonal, Vec<f64>) {
    let off: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * ((i % 7) as f64)).collect();
    let diag: Vec<f64> = (0..n).map(|i| 1.0 + off[i].abs() + off[(i + 1) % n].abs()).collect();
    let upper: Vec<f64> = (0..n).map(|i| off[(i + 1) % n]).collect();
    let rhs = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    (CyclicTridiagonal::new(off, diag, upper).expect("valid system"), rhs)
}

pub fn dumbbell(n: usize) -> PlanarCurve {
    Generator::Dumbbell { delta: 0.3 }.build(n).expect("dumbbell builds")
}

pub fn solver_setup(n: usize, strategy: RedistributionStrategy) -> (IntrinsicState, SolverConfig) {
    let config = SolverConfig::new(VelocityModel::MeanCurvature, strategy, 1e-5, 1.0);
    let state = IntrinsicState::new(&dumbbell(n), &config.model, &config.strategy).expect("state builds");
    (state, config)
}

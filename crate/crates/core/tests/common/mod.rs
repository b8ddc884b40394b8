//! Benchmark systems shared by the integration suites.
#![allow(dead_code)] // each test target uses its own subset

use nalgebra::{dmatrix, DMatrix};
use target_control::{LinearSystem, TargetMap, ToleranceConfig};

pub fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// 3-state integrator chain; the target row cannot be reached from the input.
pub fn chain() -> (LinearSystem, TargetMap) {
    let a = dmatrix![
        0.0, 1.0, 0.0;
        0.0, 0.0, 1.0;
        0.0, 0.0, 0.0
    ];
    let b = dmatrix![1.0; 0.0; 0.0];
    let f = dmatrix![0.0, 1.0, 0.0];
    (
        LinearSystem::new(a, b).unwrap(),
        TargetMap::new(f, &tol()).unwrap(),
    )
}

/// Uncontrollable 5-state, 2-input, 2-output plant.
pub fn five_state() -> LinearSystem {
    let a = dmatrix![
        1.0,  0.5, -1.0,  0.0,   1.0;
        0.3,  0.5, -0.6, -0.3,   0.3;
       -0.6,  0.0,  0.2,  0.6,  -0.6;
        1.25, 0.5, -1.0, -0.25,  1.75;
       -0.75, 0.0,  0.0,  0.75, -0.25
    ];
    let b = dmatrix![
        1.0, -1.0;
        1.0,  1.0;
        0.0,  0.0;
        1.0,  0.0;
        0.0,  1.0
    ];
    let c = dmatrix![
        0.0, 0.0, 2.0, 1.0, 0.0;
        0.0, 0.0, 0.0, 0.0, 1.0
    ];
    LinearSystem::with_output(a, b, c, &tol()).unwrap()
}

/// Target row of [`five_state`] whose dynamics close on themselves.
pub fn five_state_invariant_target() -> TargetMap {
    TargetMap::new(dmatrix![1.0, 1.0, -2.0, 0.0, 2.0], &tol()).unwrap()
}

/// Reference gain regulating [`five_state_invariant_target`] with a pole
/// at -2.
pub fn five_state_reference_gain() -> DMatrix<f64> {
    dmatrix![0.75; 0.75]
}

/// Target row of [`five_state`] that needs augmentation.
pub fn five_state_escaping_target() -> TargetMap {
    TargetMap::new(dmatrix![0.5, 1.0, -2.0, 0.5, 2.5], &tol()).unwrap()
}

/// Reference gain for the augmented design on [`five_state_escaping_target`]
/// with poles at -2 and -3.
pub fn five_state_augmented_reference_gain() -> DMatrix<f64> {
    dmatrix![-6.5, 11.0; 5.0, -7.0]
}

/// Unstable, uncontrollable, unobservable 5-state, 2-input, 2-output plant
/// for static output feedback.
pub fn unstable_five_state() -> LinearSystem {
    let a = dmatrix![
       -0.5,  0.5, -1.0, -0.5,  0.5;
       -0.7, -0.5,  1.4,  0.7, -0.7;
       -0.6,  0.0,  0.2,  0.6, -0.6;
        0.25, 0.5, -1.0, -1.25, 0.75;
       -0.25, 0.0,  0.0,  0.25, -0.75
    ];
    let b = dmatrix![
        1.0, -1.0;
        2.0,  1.0;
        0.5,  1.0;
        1.0, -1.0;
        0.0,  2.0
    ];
    let c = dmatrix![
        0.5, 0.0, 0.0, -0.5,  0.5;
       -0.5, 0.0, 2.0,  0.5, -0.5
    ];
    LinearSystem::with_output(a, b, c, &tol()).unwrap()
}

/// Reference output-feedback gain for [`unstable_five_state`] with poles at
/// -2 and -3.
pub fn unstable_five_state_reference_gain() -> DMatrix<f64> {
    dmatrix![-2.2, 3.2; 1.0, 0.0]
}

/// Controllable but unobservable 3-state plant whose scalar output pair is
/// (1, 1); the reference gain for a pole at -3 is 4.
pub fn cascade() -> LinearSystem {
    let a = dmatrix![
        2.0,  0.0,  0.0;
       -1.0,  1.0,  0.0;
        0.0,  1.0, -1.0
    ];
    let b = dmatrix![1.0; 0.0; 0.0];
    let c = dmatrix![1.0, 1.0, 0.0];
    LinearSystem::with_output(a, b, c, &tol()).unwrap()
}

//! Shared systems for unit tests.

use nalgebra::{dmatrix, DMatrix};

/// 3-state integrator chain driven through the first state, with a target on
/// the second state. The target row is unreachable: F * [B, AB, A^2 B] = 0.
pub(crate) fn chain_system() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let a = dmatrix![
        0.0, 1.0, 0.0;
        0.0, 0.0, 1.0;
        0.0, 0.0, 0.0
    ];
    let b = dmatrix![1.0; 0.0; 0.0];
    let f = dmatrix![0.0, 1.0, 0.0];
    (a, b, f)
}

/// Uncontrollable 5-state, 2-input plant used by the one-row and augmented
/// target designs (rank of its controllability matrix is 3).
pub(crate) fn five_state_system() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
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
    (a, b, c)
}

/// Target row whose dynamics close on themselves (F A lies in the row space
/// of F) for [`five_state_system`].
pub(crate) fn five_state_invariant_target() -> DMatrix<f64> {
    dmatrix![1.0, 1.0, -2.0, 0.0, 2.0]
}

/// Target row that needs augmentation (F A escapes the row space of F) for
/// [`five_state_system`].
pub(crate) fn five_state_augmented_target() -> DMatrix<f64> {
    dmatrix![0.5, 1.0, -2.0, 0.5, 2.5]
}

/// Unstable, uncontrollable and unobservable 5-state, 2-input, 2-output
/// plant for static output feedback; eig(A) = {0.2, -0.5, -0.5, -1, -1}.
pub(crate) fn unstable_five_state_system() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
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
    (a, b, c)
}

/// Controllable but unobservable 3-state single-input plant whose single
/// output row satisfies C A = C; scalar output feedback applies.
pub(crate) fn cascade_system() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let a = dmatrix![
        2.0,  0.0,  0.0;
       -1.0,  1.0,  0.0;
        0.0,  1.0, -1.0
    ];
    let b = dmatrix![1.0; 0.0; 0.0];
    let c = dmatrix![1.0, 1.0, 0.0];
    (a, b, c)
}

//! Pole placement and target output controller construction.
//!
//! The feedback law is always `u = -Z F' x` where `F'` is the target map
//! itself (reduced design), the target map stacked with an augmentation built
//! from observability indices (augmented design), or the output matrix `C`
//! (static output feedback). The gain `Z` places the spectrum of the reduced
//! pair `(F' A F'^-, F' B)` and those eigenvalues carry over into the closed
//! loop `A - B Z F'`; the rest of the closed-loop spectrum is the kernel
//! dynamics, untouched by the feedback.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    self, is_reduced_pair_controllable, is_row_space_invariant, is_target_output_controllable,
    observability_indices, LinearSystem, TargetMap, TocVerdict,
};
use crate::error::{Error, Result};
use crate::matops::{
    self, controllability_matrix, eig_multiset_contains, eig_multiset_eq, eigenvalues, max_abs,
    nullspace_basis, pinv, rank, ToleranceConfig,
};

const PLACEMENT_ATTEMPTS: usize = 8;

/// A conjugate-closed multiset of desired eigenvalues.
#[derive(Debug, Clone)]
pub struct PoleSet {
    poles: Vec<Complex64>,
}

impl PoleSet {
    /// Validates conjugate closure: the multiset must equal its own conjugate
    /// within `tol.eig_atol`.
    pub fn new(poles: Vec<Complex64>, tol: &ToleranceConfig) -> Result<Self> {
        tol.validate()?;
        if let Some(p) = poles.iter().find(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("PoleSet (pole {p})"),
            });
        }
        let conjugated: Vec<Complex64> = poles.iter().map(|p| p.conj()).collect();
        if !eig_multiset_eq(&poles, &conjugated, tol.eig_atol) {
            let offender = poles
                .iter()
                .find(|p| !eig_multiset_contains(&conjugated, std::slice::from_ref(p), tol.eig_atol))
                .copied()
                .unwrap_or_else(|| poles[0]);
            return Err(Error::PoleConjugation(offender));
        }
        Ok(Self { poles })
    }

    /// Real poles are always conjugate-closed.
    pub fn from_reals(values: &[f64]) -> Self {
        Self {
            poles: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Smallest decay rate `-Re(lambda)` over the set; negative when some
    /// pole sits in the closed right half-plane.
    pub fn slowest_decay_rate(&self) -> f64 {
        self.poles
            .iter()
            .map(|p| -p.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// True when two poles coincide within `atol`.
    pub fn has_repeats(&self, atol: f64) -> bool {
        for (i, p) in self.poles.iter().enumerate() {
            for q in &self.poles[i + 1..] {
                if (p - q).norm() <= atol {
                    return true;
                }
            }
        }
        false
    }

    /// Concatenates `extra` onto the set, revalidating conjugate closure.
    pub fn extended(&self, extra: Vec<Complex64>, tol: &ToleranceConfig) -> Result<Self> {
        let mut poles = self.poles.clone();
        poles.extend(extra);
        Self::new(poles, tol)
    }
}

/// Default pole generator for the design algorithm driver: `needed` real
/// poles spaced -1 apart, strictly left of the leftmost requested pole (so
/// the extension never collides with the requested set).
pub fn default_extra_poles(current: &PoleSet, needed: usize) -> Vec<Complex64> {
    let leftmost = current
        .poles()
        .iter()
        .map(|p| p.re)
        .fold(0.0_f64, f64::min);
    (1..=needed)
        .map(|k| Complex64::new(leftmost - k as f64, 0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum DesignMode {
    /// Reduced design: one pole per target row.
    RPole,
    /// Augmented design on the stacked map `[F; R]`.
    N0Pole,
    /// Static output feedback `u = -Z y`.
    StaticOutput,
}

/// A synthesized feedback gain with the evidence that it works.
#[derive(Debug, Clone)]
pub struct DesignResult {
    /// Gain `Z` of the law `u = -Z F' x`.
    pub gain: DMatrix<f64>,
    /// Augmentation rows `R` when the design used `F' = [F; R]`.
    pub augmentation: Option<DMatrix<f64>>,
    pub requested_poles: PoleSet,
    /// Spectrum of the reduced closed loop `F' A F'^- - F' B Z`.
    pub achieved_subsystem_eigs: Vec<Complex64>,
    /// Spectrum of the full closed loop `A - B Z F'`.
    pub closed_loop_eigs: Vec<Complex64>,
    /// Spectrum of the kernel dynamics, unchanged by the feedback.
    pub residual_spectrum: Vec<Complex64>,
    /// Largest entry of `(F'AF'^- - F'BZ)F' - F'(A - BZF')`.
    pub sylvester_residual: f64,
    pub mode: DesignMode,
}

/// Computes a real gain `K` with `eig(M - G K)` equal to the requested pole
/// multiset (within `tol.eig_atol`), for a controllable pair `(M, G)`.
///
/// Single-input pairs use the characteristic-polynomial formula. Multi-input
/// pairs are reduced to single input through a random combination vector
/// (seeded, up to 8 draws). When no candidate verifies, a Sylvester-equation
/// placement with a random right-hand side is tried, which requires the
/// poles to be distinct. Every candidate is verified against the achieved
/// spectrum before it is returned; gains are not unique for multi-input
/// pairs and only the spectrum is contractual.
pub fn place_poles(
    m: &DMatrix<f64>,
    g: &DMatrix<f64>,
    poles: &PoleSet,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<DMatrix<f64>> {
    tol.validate()?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "M must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if g.nrows() != m.nrows() || g.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "G must be {}xm with m >= 1, got {}x{}",
            m.nrows(),
            g.nrows(),
            g.ncols()
        )));
    }
    matops::ensure_finite(m, "place_poles (M)")?;
    matops::ensure_finite(g, "place_poles (G)")?;
    let q = m.nrows();
    if poles.len() != q {
        return Err(Error::PoleCount {
            expected: q,
            got: poles.len(),
        });
    }
    let ctrb = controllability_matrix(m, g)?;
    let ctrb_rank = rank(&ctrb, tol)?.rank;
    if ctrb_rank < q {
        return Err(Error::UncontrollablePair {
            rank: ctrb_rank,
            order: q,
        });
    }

    let spectrum_ok = |k: &DMatrix<f64>| -> Result<bool> {
        let achieved = eigenvalues(&(m - g * k))?;
        Ok(eig_multiset_eq(&achieved, poles.poles(), tol.eig_atol))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Among verified candidates, keep the smallest gain: large gains make the
    // closed-loop spectrum needlessly sensitive.
    let mut best: Option<DMatrix<f64>> = None;
    let consider = |candidate: DMatrix<f64>, best: &mut Option<DMatrix<f64>>| {
        if best
            .as_ref()
            .is_none_or(|b| candidate.norm() < b.norm())
        {
            *best = Some(candidate);
        }
    };

    if g.ncols() == 1 {
        if let Some(k) = ackermann(m, &g.column(0).into_owned(), poles.poles()) {
            if spectrum_ok(&k)? {
                consider(k, &mut best);
            }
        }
    } else {
        // Reduce to a single synthetic input G*v.
        for _ in 0..PLACEMENT_ATTEMPTS {
            let mut v = DVector::from_fn(g.ncols(), |_, _| rng.random_range(-1.0..1.0));
            let norm = v.norm();
            if norm == 0.0 {
                continue;
            }
            v /= norm;
            let gv = g * &v;
            let gv_mat = DMatrix::from_column_slice(q, 1, gv.as_slice());
            if rank(&controllability_matrix(m, &gv_mat)?, tol)?.rank < q {
                continue;
            }
            let Some(k_row) = ackermann(m, &gv, poles.poles()) else {
                continue;
            };
            let candidate = DMatrix::from_column_slice(g.ncols(), 1, v.as_slice()) * &k_row;
            if spectrum_ok(&candidate)? {
                consider(candidate, &mut best);
            }
        }
    }

    // Sylvester fallback: M X - X N = G G0, K = G0 X^-1. Needs distinct
    // poles.
    if best.is_none() {
        if poles.has_repeats(tol.eig_atol) {
            return Err(Error::PlacementFailed(
                "direct placement failed and the Sylvester fallback does not \
                 support repeated poles"
                    .into(),
            ));
        }
        let n_block = real_block_diagonal(poles.poles(), tol.eig_atol);
        for _ in 0..PLACEMENT_ATTEMPTS {
            let g0 = DMatrix::from_fn(g.ncols(), q, |_, _| rng.random_range(-1.0..1.0));
            let Some(x) = solve_sylvester(m, &n_block, &(g * &g0)) else {
                continue;
            };
            let Some(x_inv) = x.try_inverse() else {
                continue;
            };
            let candidate = &g0 * x_inv;
            if spectrum_ok(&candidate)? {
                consider(candidate, &mut best);
            }
        }
    }
    best.ok_or_else(|| {
        Error::PlacementFailed(format!(
            "no verified gain after {PLACEMENT_ATTEMPTS} reduction draws and \
             {PLACEMENT_ATTEMPTS} Sylvester draws"
        ))
    })
}

/// Characteristic-polynomial (single-input) placement:
/// `k = e_q^T C^-1 phi(M)` with `C = [g, Mg, ..., M^(q-1)g]` and `phi` the
/// desired characteristic polynomial. Returns `None` when `C` is singular.
fn ackermann(m: &DMatrix<f64>, g: &DVector<f64>, poles: &[Complex64]) -> Option<DMatrix<f64>> {
    let q = m.nrows();
    let g_mat = DMatrix::from_column_slice(q, 1, g.as_slice());
    let ctrb = controllability_matrix(m, &g_mat).ok()?;
    let mut e_last = DVector::zeros(q);
    e_last[q - 1] = 1.0;
    // y^T = e_q^T C^-1  <=>  C^T y = e_q
    let y = ctrb.transpose().lu().solve(&e_last)?;
    let coeffs = real_polynomial_from_roots(poles);
    let phi = matrix_polynomial(m, &coeffs);
    let k_entries = phi.transpose() * y;
    let k = DMatrix::from_row_slice(1, q, k_entries.as_slice());
    k.iter().all(|v| v.is_finite()).then_some(k)
}

/// Monic real polynomial coefficients (ascending degree) from a
/// conjugate-closed root multiset.
fn real_polynomial_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut coeffs: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    for root in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * root;
        }
        coeffs = next;
    }
    // Conjugate closure makes the imaginary parts cancel to rounding noise.
    coeffs.iter().map(|c| c.re).collect()
}

/// Evaluates `sum coeffs[k] M^k` by Horner's scheme.
fn matrix_polynomial(m: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let q = m.nrows();
    let eye = DMatrix::identity(q, q);
    let mut acc = &eye * *coeffs.last().expect("non-empty coefficients");
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc * m + &eye * c;
    }
    acc
}

/// Real block-diagonal matrix with the given spectrum: 1x1 blocks for real
/// poles, `[[a, b], [-b, a]]` blocks for conjugate pairs `a +- bi`.
fn real_block_diagonal(poles: &[Complex64], atol: f64) -> DMatrix<f64> {
    let q = poles.len();
    let mut out = DMatrix::zeros(q, q);
    let mut used = vec![false; q];
    let mut at = 0;
    for i in 0..q {
        if used[i] {
            continue;
        }
        used[i] = true;
        let p = poles[i];
        if p.im.abs() <= atol {
            out[(at, at)] = p.re;
            at += 1;
            continue;
        }
        let partner = (0..q)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                let da = (poles[a] - p.conj()).norm();
                let db = (poles[b] - p.conj()).norm();
                da.partial_cmp(&db).expect("finite")
            })
            .expect("conjugate-closed pole set");
        used[partner] = true;
        let (a, b) = (p.re, p.im.abs());
        out[(at, at)] = a;
        out[(at, at + 1)] = b;
        out[(at + 1, at)] = -b;
        out[(at + 1, at + 1)] = a;
        at += 2;
    }
    out
}

/// Solves `M X - X N = Q` through the Kronecker-product normal equations.
/// Returns `None` when the operator is singular (shared spectrum).
fn solve_sylvester(
    m: &DMatrix<f64>,
    n: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Option<DMatrix<f64>> {
    let rows = m.nrows();
    let cols = n.nrows();
    let op = DMatrix::identity(cols, cols).kronecker(m)
        - n.transpose().kronecker(&DMatrix::identity(rows, rows));
    let rhs = DVector::from_column_slice(q.as_slice());
    let x = op.lu().solve(&rhs)?;
    Some(DMatrix::from_column_slice(rows, cols, x.as_slice()))
}

/// Common tail of every design: spectra, kernel dynamics and the coupling
/// residual, with the contractual invariants re-checked.
fn finish_design(
    sys: &LinearSystem,
    f_prime: &DMatrix<f64>,
    augmentation: Option<DMatrix<f64>>,
    gain: DMatrix<f64>,
    poles: &PoleSet,
    tol: &ToleranceConfig,
    mode: DesignMode,
) -> Result<DesignResult> {
    let (m_red, g_red) = analysis::reduced_pair(sys, f_prime, tol)?;
    let subsystem_closed = &m_red - &g_red * &gain;
    let closed_loop = sys.a() - sys.b() * &gain * f_prime;
    let achieved_subsystem_eigs = eigenvalues(&subsystem_closed)?;
    let closed_loop_eigs = eigenvalues(&closed_loop)?;
    let sylvester_residual = max_abs(&(&subsystem_closed * f_prime - f_prime * &closed_loop));

    if !eig_multiset_contains(&closed_loop_eigs, &achieved_subsystem_eigs, tol.eig_atol) {
        return Err(Error::NumericalConsistency(
            "subsystem spectrum is not contained in the closed-loop spectrum".into(),
        ));
    }
    if sylvester_residual >= tol.residual_atol {
        return Err(Error::NumericalConsistency(format!(
            "coupling residual {sylvester_residual:e} exceeds {:e}",
            tol.residual_atol
        )));
    }

    let kernel = nullspace_basis(f_prime, tol)?;
    let residual_spectrum = if kernel.ncols() > 0 {
        let kernel_t = kernel.transpose();
        eigenvalues(&(&kernel_t * sys.a() * pinv(&kernel_t, tol)?))?
    } else {
        Vec::new()
    };

    Ok(DesignResult {
        gain,
        augmentation,
        requested_poles: poles.clone(),
        achieved_subsystem_eigs,
        closed_loop_eigs,
        residual_spectrum,
        sylvester_residual,
        mode,
    })
}

/// Reduced design: regulates `Fx -> 0` by placing the `r` poles of the
/// target subsystem, for target rows that are invariant under `A` and whose
/// reduced pair is controllable.
pub fn design_target_feedback(
    sys: &LinearSystem,
    f: &TargetMap,
    poles: &PoleSet,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<DesignResult> {
    let r = f.target_dim();
    if poles.len() != r {
        return Err(Error::PoleCount {
            expected: r,
            got: poles.len(),
        });
    }
    if !is_row_space_invariant(sys, f, tol)? {
        let fa = f.matrix() * sys.a();
        let stacked = matops::vstack(&[&fa, f.matrix()]);
        return Err(Error::NeedsAugmentation {
            stacked_rank: rank(&stacked, tol)?.rank,
            rank_f: r,
        });
    }
    if !is_reduced_pair_controllable(sys, f, tol)? {
        return Err(Error::ExistenceFailed {
            condition: "reduced-pair controllability",
            detail: "the pair (F A F^-, F B) is not controllable; the requested \
                     subsystem poles cannot all be assigned"
                .into(),
        });
    }
    let (m_red, g_red) = analysis::reduced_pair(sys, f.matrix(), tol)?;
    let gain = place_poles(&m_red, &g_red, poles, tol, seed)?;
    finish_design(sys, f.matrix(), None, gain, poles, tol, DesignMode::RPole)
}

/// Builds the augmentation `R` from observability indices of `(A, F)`: for
/// each target row `F_i` with index `nu_i`, the rows `F_i A, ...,
/// F_i A^(nu_i - 1)` are stacked. `[F; R]` is full row rank and row-space
/// invariant by construction; `R` has zero rows exactly when `F` itself is
/// already invariant.
pub fn build_augmentation(
    sys: &LinearSystem,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<DMatrix<f64>> {
    let obs = observability_indices(sys.a(), f, tol)?;
    let n = sys.state_dim();
    let mut rows: Vec<DMatrix<f64>> = Vec::new();
    for (i, &nu) in obs.indices.iter().enumerate() {
        let mut row = f.matrix().rows(i, 1).into_owned();
        for _ in 1..nu {
            row = &row * sys.a();
            rows.push(row.clone());
        }
    }
    let r_aug = if rows.is_empty() {
        DMatrix::zeros(0, n)
    } else {
        let refs: Vec<&DMatrix<f64>> = rows.iter().collect();
        matops::vstack(&refs)
    };
    let stacked = matops::vstack(&[f.matrix(), &r_aug]);
    let stacked_rank = rank(&stacked, tol)?.rank;
    if stacked_rank != obs.total() {
        return Err(Error::Internal(format!(
            "augmentation bookkeeping: rank [F; R] = {stacked_rank} but the \
             observability indices sum to {}",
            obs.total()
        )));
    }
    Ok(r_aug)
}

/// Augmented design on `F' = [F; R]`: places `n0 = r + rows(R)` poles of the
/// order-`n0` subsystem. With an empty `R` this coincides with
/// [`design_target_feedback`].
pub fn design_augmented_feedback(
    sys: &LinearSystem,
    f: &TargetMap,
    r_aug: &DMatrix<f64>,
    poles: &PoleSet,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<DesignResult> {
    if r_aug.nrows() > 0 && r_aug.ncols() != sys.state_dim() {
        return Err(Error::Dimension(format!(
            "R has {} columns but the state dimension is {}",
            r_aug.ncols(),
            sys.state_dim()
        )));
    }
    matops::ensure_finite(r_aug, "design_augmented_feedback (R)")?;
    let f_prime_mat = matops::vstack(&[f.matrix(), r_aug]);
    let f_prime = TargetMap::new(f_prime_mat, tol)?;
    let n0 = f_prime.target_dim();
    if poles.len() != n0 {
        return Err(Error::PoleCount {
            expected: n0,
            got: poles.len(),
        });
    }
    if !is_row_space_invariant(sys, &f_prime, tol)? {
        return Err(Error::ExistenceFailed {
            condition: "augmented row-space invariance",
            detail: "[F; R] A does not lie in the row space of [F; R]".into(),
        });
    }
    if !is_reduced_pair_controllable(sys, &f_prime, tol)? {
        return Err(Error::ExistenceFailed {
            condition: "augmented-pair controllability",
            detail: "the pair ([F; R] A [F; R]^-, [F; R] B) is not controllable".into(),
        });
    }
    let (m_red, g_red) = analysis::reduced_pair(sys, f_prime.matrix(), tol)?;
    let gain = place_poles(&m_red, &g_red, poles, tol, seed)?;
    let closed_loop_eigs = eigenvalues(&(sys.a() - sys.b() * &gain * f_prime.matrix()))?;
    if !eig_multiset_contains(&closed_loop_eigs, poles.poles(), tol.eig_atol) {
        return Err(Error::NumericalConsistency(
            "requested poles did not all appear in the closed-loop spectrum".into(),
        ));
    }
    let augmentation = (r_aug.nrows() > 0).then(|| r_aug.clone());
    finish_design(
        sys,
        f_prime.matrix(),
        augmentation,
        gain,
        poles,
        tol,
        DesignMode::N0Pole,
    )
}

/// Static output feedback `u = -Z y`: the reduced design specialized to
/// `F = C`, placing one pole per measured output. The eigenvalues not
/// assigned stay at the kernel dynamics of `C`, reported in
/// `residual_spectrum`.
pub fn design_static_output_feedback(
    sys: &LinearSystem,
    poles: &PoleSet,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<DesignResult> {
    let c = sys.c().ok_or(Error::MissingOutputMatrix)?.clone();
    let f = TargetMap::new(c, tol)?;
    let p = f.target_dim();
    if poles.len() != p {
        return Err(Error::PoleCount {
            expected: p,
            got: poles.len(),
        });
    }
    if !is_row_space_invariant(sys, &f, tol)? {
        return Err(Error::ExistenceFailed {
            condition: "output row-space invariance",
            detail: "C A does not lie in the row space of C; static output \
                     feedback with p assigned poles does not exist"
                .into(),
        });
    }
    if !is_reduced_pair_controllable(sys, &f, tol)? {
        return Err(Error::ExistenceFailed {
            condition: "output-pair controllability",
            detail: "the pair (C A C^-, C B) is not controllable".into(),
        });
    }
    let (m_red, g_red) = analysis::reduced_pair(sys, f.matrix(), tol)?;
    let gain = place_poles(&m_red, &g_red, poles, tol, seed)?;
    finish_design(
        sys,
        f.matrix(),
        None,
        gain,
        poles,
        tol,
        DesignMode::StaticOutput,
    )
}

/// A structured stop of the design algorithm, naming the step and the
/// condition that failed.
#[derive(Debug, Clone)]
pub enum AlgorithmStop {
    /// Step 1: the triple `(A, B, F)` is not target output controllable.
    NotTargetOutputControllable { verdict: TocVerdict },
    /// Step 3: the reduced pair `(F A F^-, F B)` is not controllable.
    ReducedPairUncontrollable { rank: usize, order: usize },
    /// Step 5: the augmented pair on `[F; R]` is not controllable.
    AugmentedPairUncontrollable { rank: usize, order: usize },
}

impl AlgorithmStop {
    pub fn step(&self) -> usize {
        match self {
            Self::NotTargetOutputControllable { .. } => 1,
            Self::ReducedPairUncontrollable { .. } => 3,
            Self::AugmentedPairUncontrollable { .. } => 5,
        }
    }

    pub fn condition(&self) -> &'static str {
        match self {
            Self::NotTargetOutputControllable { .. } => "target output controllability",
            Self::ReducedPairUncontrollable { .. } => "reduced-pair controllability",
            Self::AugmentedPairUncontrollable { .. } => "augmented-pair controllability",
        }
    }
}

impl std::fmt::Display for AlgorithmStop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotTargetOutputControllable { verdict } => write!(
                f,
                "step 1: the triple (A, B, F) is not target output controllable ({})",
                verdict.witness.as_deref().unwrap_or("rank comparison failed")
            ),
            Self::ReducedPairUncontrollable { rank, order } => write!(
                f,
                "step 3: the reduced pair (F A F^-, F B) is not controllable \
                 (rank {rank} < order {order})"
            ),
            Self::AugmentedPairUncontrollable { rank, order } => write!(
                f,
                "step 5: the augmented pair on [F; R] is not controllable \
                 (rank {rank} < order {order})"
            ),
        }
    }
}

/// Outcome of [`run_design_algorithm`]: a design, or a typed stop.
#[derive(Debug, Clone)]
pub enum AlgorithmOutcome {
    Designed(DesignResult),
    Stopped(AlgorithmStop),
}

fn reduced_ctrb_rank(
    sys: &LinearSystem,
    f_mat: &DMatrix<f64>,
    tol: &ToleranceConfig,
) -> Result<usize> {
    let (m_red, g_red) = analysis::reduced_pair(sys, f_mat, tol)?;
    Ok(rank(&controllability_matrix(&m_red, &g_red)?, tol)?.rank)
}

/// The target output controller design algorithm:
///
/// 1. stop unless `(A, B, F)` is target output controllable;
/// 2. test row-space invariance of `F`;
/// 3. if invariant: stop unless the reduced pair is controllable, otherwise
///    place `r` poles and return the reduced design;
/// 4. if not invariant: build the augmentation `R` from observability
///    indices;
/// 5. stop unless the augmented pair is controllable, otherwise place
///    `n0 = r + rows(R)` poles and return the augmented design. When fewer
///    than `n0` poles were requested, `extra_poles` generates the remainder
///    (see [`default_extra_poles`]); requesting more than needed is an error.
pub fn run_design_algorithm(
    sys: &LinearSystem,
    f: &TargetMap,
    poles: &PoleSet,
    extra_poles: impl Fn(&PoleSet, usize) -> Vec<Complex64>,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<AlgorithmOutcome> {
    // Step 1.
    let verdict = is_target_output_controllable(sys, f, tol)?;
    if !verdict.is_toc {
        return Ok(AlgorithmOutcome::Stopped(
            AlgorithmStop::NotTargetOutputControllable { verdict },
        ));
    }
    // Step 2.
    if is_row_space_invariant(sys, f, tol)? {
        // Step 3.
        let r = f.target_dim();
        if !is_reduced_pair_controllable(sys, f, tol)? {
            return Ok(AlgorithmOutcome::Stopped(
                AlgorithmStop::ReducedPairUncontrollable {
                    rank: reduced_ctrb_rank(sys, f.matrix(), tol)?,
                    order: r,
                },
            ));
        }
        let design = design_target_feedback(sys, f, poles, tol, seed)?;
        return Ok(AlgorithmOutcome::Designed(design));
    }
    // Step 4.
    let r_aug = build_augmentation(sys, f, tol)?;
    let n0 = f.target_dim() + r_aug.nrows();
    // Step 5.
    let full_poles = if poles.len() == n0 {
        poles.clone()
    } else if poles.len() < n0 {
        poles.extended(extra_poles(poles, n0 - poles.len()), tol)?
    } else {
        return Err(Error::PoleCount {
            expected: n0,
            got: poles.len(),
        });
    };
    let f_prime_mat = matops::vstack(&[f.matrix(), &r_aug]);
    if !is_reduced_pair_controllable(sys, &TargetMap::new(f_prime_mat.clone(), tol)?, tol)? {
        return Ok(AlgorithmOutcome::Stopped(
            AlgorithmStop::AugmentedPairUncontrollable {
                rank: reduced_ctrb_rank(sys, &f_prime_mat, tol)?,
                order: n0,
            },
        ));
    }
    let design = design_augmented_feedback(sys, f, &r_aug, &full_poles, tol, seed)?;
    Ok(AlgorithmOutcome::Designed(design))
}

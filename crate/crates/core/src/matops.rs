//! Dense numerical kernels: tolerance-based rank decisions, SVD
//! pseudoinverse, nullspace bases, controllability matrices and eigenvalues.
//!
//! Every rank statement in the higher-level tests reduces to [`rank`], so the
//! threshold rule lives in exactly one place: a singular value counts toward
//! the rank iff it exceeds `rank_rtol * max(rows, cols) * sigma_max`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Numerical thresholds shared by every rank test and residual check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ToleranceConfig {
    /// Relative threshold for singular-value rank decisions.
    pub rank_rtol: f64,
    /// Absolute tolerance when matching eigenvalues.
    pub eig_atol: f64,
    /// Absolute tolerance on matrix residuals.
    pub residual_atol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-9,
            eig_atol: 1e-6,
            residual_atol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_rtol", self.rank_rtol),
            ("eig_atol", self.eig_atol),
            ("residual_atol", self.residual_atol),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value <= 1e-2) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1e-2], got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// A rank decision together with the evidence that produced it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RankReport {
    pub rank: usize,
    /// Nonincreasing singular values of the tested matrix.
    pub singular_values: Vec<f64>,
    /// `rank_rtol * max(rows, cols) * sigma_max`, or 0 for an all-zero matrix.
    pub threshold_used: f64,
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, context: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
        })
    }
}

/// Largest absolute entry; 0 for an empty matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

fn report_from_singular_values(
    singular_values: Vec<f64>,
    max_dim: usize,
    tol: &ToleranceConfig,
) -> RankReport {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = if sigma_max == 0.0 {
        0.0
    } else {
        tol.rank_rtol * max_dim as f64 * sigma_max
    };
    let rank = singular_values.iter().filter(|&&s| s > threshold).count();
    RankReport {
        rank,
        singular_values,
        threshold_used: threshold,
    }
}

/// Numerical rank of a real matrix from its singular values.
pub fn rank(m: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<RankReport> {
    tol.validate()?;
    ensure_finite(m, "rank")?;
    if m.is_empty() {
        return Ok(RankReport {
            rank: 0,
            singular_values: Vec::new(),
            threshold_used: 0.0,
        });
    }
    Ok(report_from_singular_values(
        sorted_singular_values(m),
        m.nrows().max(m.ncols()),
        tol,
    ))
}

/// Numerical rank of the complex matrix `re + i*im`, computed in real
/// arithmetic on the doubled matrix `[[re, -im], [im, re]]`, whose singular
/// values are those of the complex matrix with doubled multiplicity.
pub(crate) fn rank_complex(
    re: &DMatrix<f64>,
    im: &DMatrix<f64>,
    tol: &ToleranceConfig,
) -> Result<RankReport> {
    tol.validate()?;
    if re.shape() != im.shape() {
        return Err(Error::Dimension(format!(
            "real part is {}x{} but imaginary part is {}x{}",
            re.nrows(),
            re.ncols(),
            im.nrows(),
            im.ncols()
        )));
    }
    ensure_finite(re, "complex rank (real part)")?;
    ensure_finite(im, "complex rank (imaginary part)")?;
    if re.is_empty() {
        return Ok(RankReport {
            rank: 0,
            singular_values: Vec::new(),
            threshold_used: 0.0,
        });
    }
    let doubled = vstack(&[&hstack(&[re, &(-im)]), &hstack(&[im, re])]);
    let paired = sorted_singular_values(&doubled);
    // Equal pairs: keep every second value.
    let singular_values: Vec<f64> = paired.iter().copied().step_by(2).collect();
    Ok(report_from_singular_values(
        singular_values,
        re.nrows().max(re.ncols()),
        tol,
    ))
}

/// Moore-Penrose pseudoinverse via SVD, with singular values at or below the
/// rank threshold zeroed instead of inverted.
pub fn pinv(m: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<DMatrix<f64>> {
    tol.validate()?;
    ensure_finite(m, "pinv")?;
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = if sigma_max == 0.0 {
        0.0
    } else {
        tol.rank_rtol * m.nrows().max(m.ncols()) as f64 * sigma_max
    };
    svd.pseudo_inverse(threshold)
        .map_err(|e| Error::Internal(format!("pseudoinverse: {e}")))
}

/// Orthonormal basis of the kernel of `m`, returned as an
/// `ncols x (ncols - rank)` matrix (zero columns when `m` has full column
/// rank).
pub fn nullspace_basis(m: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<DMatrix<f64>> {
    tol.validate()?;
    ensure_finite(m, "nullspace_basis")?;
    let n = m.ncols();
    // The thin SVD only carries min(rows, cols) right singular vectors; pad
    // wide matrices with zero rows so all n of them are available.
    let work = if m.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Internal("SVD did not return right singular vectors".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let report = report_from_singular_values(sv, m.nrows().max(n), tol);
    let kernel_dim = n - report.rank;
    // Rows of v_t below the rank span the kernel; transpose them into columns.
    Ok(DMatrix::from_fn(n, kernel_dim, |i, j| {
        v_t[(report.rank + j, i)]
    }))
}

/// Block matrix `[B, AB, ..., A^(n-1) B]` for a square `A` of order `n`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "A must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension(format!(
            "B has {} rows but A is of order {}",
            b.nrows(),
            a.nrows()
        )));
    }
    ensure_finite(a, "controllability_matrix (A)")?;
    ensure_finite(b, "controllability_matrix (B)")?;
    let n = a.nrows();
    let m = b.ncols();
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        if k + 1 < n {
            block = a * block;
        }
    }
    Ok(out)
}

/// All eigenvalues of a square matrix, with multiplicity, sorted by real part
/// then imaginary part. Complex eigenvalues of a real matrix come out in
/// conjugate pairs.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_finite(m, "eigenvalues")?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut eigs: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    sort_eigenvalues(&mut eigs);
    Ok(eigs)
}

pub(crate) fn sort_eigenvalues(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues are finite")
    });
}

/// Multiset equality of two eigenvalue lists within an absolute tolerance.
pub fn eig_multiset_eq(a: &[Complex64], b: &[Complex64], atol: f64) -> bool {
    a.len() == b.len() && eig_multiset_contains(b, a, atol)
}

/// True when every element of `sub` can be matched to a distinct element of
/// `sup` within `atol` (greedy nearest-neighbour matching).
pub fn eig_multiset_contains(sup: &[Complex64], sub: &[Complex64], atol: f64) -> bool {
    if sub.len() > sup.len() {
        return false;
    }
    let mut remaining: Vec<Complex64> = sup.to_vec();
    for x in sub {
        let nearest = remaining
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| {
                (x - *p)
                    .norm()
                    .partial_cmp(&(x - *q).norm())
                    .expect("finite")
            })
            .map(|(i, p)| (i, (x - p).norm()));
        match nearest {
            Some((i, d)) if d <= atol => {
                remaining.swap_remove(i);
            }
            _ => return false,
        }
    }
    true
}

/// Horizontal concatenation; all parts must share a row count.
pub(crate) fn hstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    assert!(parts.iter().all(|p| p.nrows() == rows), "hstack row mismatch");
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Vertical concatenation; all parts must share a column count.
pub(crate) fn vstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = parts.first().map_or(0, |p| p.ncols());
    assert!(parts.iter().all(|p| p.ncols() == cols), "vstack column mismatch");
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((at, 0), (p.nrows(), cols)).copy_from(*p);
        at += p.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Random square matrix with condition number below `max_cond`.
    fn random_well_conditioned(rng: &mut ChaCha8Rng, n: usize, max_cond: f64) -> DMatrix<f64> {
        loop {
            let m = random_matrix(rng, n, n);
            let sv = sorted_singular_values(&m);
            let smin = *sv.last().unwrap();
            if smin > 0.0 && sv[0] / smin < max_cond {
                return m;
            }
        }
    }

    #[test]
    fn rank_of_identity() {
        let report = rank(&DMatrix::identity(3, 3), &tol()).unwrap();
        assert_eq!(report.rank, 3);
        assert_eq!(report.singular_values.len(), 3);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let report = rank(&DMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(report.rank, 0);
        assert_eq!(report.threshold_used, 0.0);
    }

    #[test]
    fn rank_of_target_times_ctrb_is_zero_for_chain() {
        let (a, b, f) = crate::fixtures::chain_system();
        let ctrb = controllability_matrix(&a, &b).unwrap();
        let report = rank(&(&f * &ctrb), &tol()).unwrap();
        assert_eq!(report.rank, 0);
    }

    #[test]
    fn rank_rejects_non_finite() {
        let m = dmatrix![1.0, f64::NAN];
        assert!(matches!(rank(&m, &tol()), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rank_invariant_under_well_conditioned_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rows = rng.random_range(2..6);
            let cols = rng.random_range(2..6);
            // Random rank-deficient matrix: product of thin factors.
            let inner = rng.random_range(1..=rows.min(cols));
            let m = random_matrix(&mut rng, rows, inner) * random_matrix(&mut rng, inner, cols);
            let base = rank(&m, &tol()).unwrap().rank;
            let left = random_well_conditioned(&mut rng, rows, 1e3);
            let right = random_well_conditioned(&mut rng, cols, 1e3);
            assert_eq!(rank(&(&left * &m), &tol()).unwrap().rank, base);
            assert_eq!(rank(&(&m * &right), &tol()).unwrap().rank, base);
        }
    }

    #[test]
    fn pinv_of_identity() {
        let p = pinv(&DMatrix::identity(3, 3), &tol()).unwrap();
        assert_abs_diff_eq!(p, DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn pinv_of_orthonormal_row() {
        let f = dmatrix![0.0, 1.0, 0.0];
        let p = pinv(&f, &tol()).unwrap();
        assert_abs_diff_eq!(p, f.transpose(), epsilon = 1e-14);
    }

    #[test]
    fn pinv_of_single_row_is_scaled_transpose() {
        // For a single row f, pinv = f^T / (f f^T); here f f^T = 10.
        let f = dmatrix![1.0, 1.0, -2.0, 0.0, 2.0];
        let p = pinv(&f, &tol()).unwrap();
        assert_abs_diff_eq!(p, f.transpose() / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn pinv_satisfies_defining_identity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let rows = rng.random_range(1..6);
            let cols = rng.random_range(1..6);
            let m = random_matrix(&mut rng, rows, cols);
            let p = pinv(&m, &tol()).unwrap();
            let residual = max_abs(&(&m * &p * &m - &m));
            assert!(residual < tol().residual_atol, "residual {residual}");
        }
    }

    #[test]
    fn nullspace_of_full_column_rank_is_empty() {
        let m = dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0];
        let basis = nullspace_basis(&m, &tol()).unwrap();
        assert_eq!(basis.ncols(), 0);
        let eye = nullspace_basis(&DMatrix::identity(4, 4), &tol()).unwrap();
        assert_eq!(eye.ncols(), 0);
    }

    #[test]
    fn nullspace_of_wide_row_is_orthonormal() {
        let c = dmatrix![1.0, 1.0, 0.0];
        let basis = nullspace_basis(&c, &tol()).unwrap();
        assert_eq!(basis.shape(), (3, 2));
        assert!(max_abs(&(&c * &basis)) < tol().residual_atol);
        let gram = basis.transpose() * &basis;
        assert_abs_diff_eq!(gram, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn nullspace_columns_orthonormal_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let rows = rng.random_range(1..5);
            let cols = rng.random_range(1..7);
            let m = random_matrix(&mut rng, rows, cols);
            let basis = nullspace_basis(&m, &tol()).unwrap();
            let rank = rank(&m, &tol()).unwrap().rank;
            assert_eq!(basis.ncols(), cols - rank);
            assert!(max_abs(&(&m * &basis)) < tol().residual_atol);
            let gram = basis.transpose() * &basis;
            assert_abs_diff_eq!(
                gram,
                DMatrix::identity(basis.ncols(), basis.ncols()),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn ctrb_scalar_and_identity_cases() {
        let c = controllability_matrix(&dmatrix![0.0], &dmatrix![1.0]).unwrap();
        assert_eq!(c, dmatrix![1.0]);
        let c = controllability_matrix(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(c, hstack(&[&DMatrix::identity(2, 2), &DMatrix::identity(2, 2)]));
    }

    #[test]
    fn ctrb_of_chain_matches_hand_product() {
        let (a, b, _) = crate::fixtures::chain_system();
        let c = controllability_matrix(&a, &b).unwrap();
        let expected = dmatrix![
            1.0, 0.0, 0.0;
            0.0, 0.0, 0.0;
            0.0, 0.0, 0.0
        ];
        assert_eq!(c, expected);
    }

    #[test]
    fn ctrb_dimension_mismatch() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::zeros(3, 1);
        assert!(matches!(
            controllability_matrix(&a, &b),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn ctrb_rank_saturates_beyond_order() {
        // Extending the block matrix past A^(n-1)B cannot raise its rank.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let n = rng.random_range(2..6);
            let m = rng.random_range(1..3);
            let a = random_matrix(&mut rng, n, n);
            let b = random_matrix(&mut rng, n, m);
            let base = rank(&controllability_matrix(&a, &b).unwrap(), &tol())
                .unwrap()
                .rank;
            for extra in [1usize, 2] {
                let mut blocks: Vec<DMatrix<f64>> = vec![b.clone()];
                for _ in 1..(n + extra) {
                    blocks.push(&a * blocks.last().unwrap());
                }
                let refs: Vec<&DMatrix<f64>> = blocks.iter().collect();
                let extended = hstack(&refs);
                assert_eq!(rank(&extended, &tol()).unwrap().rank, base);
            }
        }
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let eigs = eigenvalues(&DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0, 3.0])).unwrap();
        let expected = [1.0, 2.0, 3.0];
        for (e, x) in eigs.iter().zip(expected) {
            assert_abs_diff_eq!(e.re, x, epsilon = 1e-12);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_triangular_cascade() {
        let (a, _, _) = crate::fixtures::cascade_system();
        let eigs = eigenvalues(&a).unwrap();
        let expected = [-1.0, 1.0, 2.0];
        for (e, x) in eigs.iter().zip(expected) {
            assert_abs_diff_eq!(e.re, x, epsilon = 1e-9);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn eigenvalues_reject_non_square() {
        assert!(matches!(
            eigenvalues(&DMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn complex_rank_matches_hand_cases() {
        // [1, i] has complex rank 1.
        let re = dmatrix![1.0, 0.0];
        let im = dmatrix![0.0, 1.0];
        assert_eq!(rank_complex(&re, &im, &tol()).unwrap().rank, 1);
        // [[1], [i]] also has complex rank 1.
        let re = dmatrix![1.0; 0.0];
        let im = dmatrix![0.0; 1.0];
        assert_eq!(rank_complex(&re, &im, &tol()).unwrap().rank, 1);
        // Purely real input reduces to the real rank.
        let m = dmatrix![1.0, 2.0; 2.0, 4.0];
        let z = DMatrix::zeros(2, 2);
        assert_eq!(rank_complex(&m, &z, &tol()).unwrap().rank, 1);
    }

    #[test]
    fn multiset_helpers() {
        let a = [Complex64::new(-1.0, 2.0), Complex64::new(-1.0, -2.0)];
        let b = [Complex64::new(-1.0, -2.0), Complex64::new(-1.0, 2.0)];
        assert!(eig_multiset_eq(&a, &b, 1e-9));
        assert!(eig_multiset_contains(&b, &a[..1], 1e-9));
        assert!(!eig_multiset_contains(&a[..1], &b, 1e-9));
        // Multiplicity matters: {x, x} is not contained in {x}.
        let twice = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(!eig_multiset_contains(&twice[..1], &twice, 1e-9));
    }

    #[test]
    fn tolerance_validation() {
        let zero = ToleranceConfig {
            rank_rtol: 0.0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
        let huge = ToleranceConfig {
            rank_rtol: 0.5,
            ..Default::default()
        };
        assert!(huge.validate().is_err());
        assert!(ToleranceConfig::default().validate().is_ok());
    }
}

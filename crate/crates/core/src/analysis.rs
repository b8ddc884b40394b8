//! Controllability and observability tests for the target output problem.
//!
//! The central question: given `x' = Ax + Bu` and target functionals
//! `z = Fx` with `F` full row rank, can `z` be steered to any value in finite
//! time? The decisive test compares `rank(F)` with the rank of
//! `F * [B, AB, ..., A^(n-1)B]`. The remaining operations here cover the
//! pointwise pencil tests, the two existence conditions for the reduced
//! design (`F A` staying inside the row space of `F`, and controllability of
//! the reduced pair `(F A F^-, F B)`), and observability indices of `(A, F)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matops::{
    self, controllability_matrix, eigenvalues, pinv, rank, RankReport, ToleranceConfig,
};

/// The plant `x' = Ax + Bu`, optionally with measurements `y = Cx`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: Option<DMatrix<f64>>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "B must be {}xm with m >= 1, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        matops::ensure_finite(&a, "LinearSystem (A)")?;
        matops::ensure_finite(&b, "LinearSystem (B)")?;
        Ok(Self { a, b, c: None })
    }

    /// Attaches a full-row-rank output matrix `C`.
    pub fn with_output(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let mut sys = Self::new(a, b)?;
        if c.ncols() != sys.state_dim() || c.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "C must be px{} with p >= 1, got {}x{}",
                sys.state_dim(),
                c.nrows(),
                c.ncols()
            )));
        }
        matops::ensure_finite(&c, "LinearSystem (C)")?;
        let report = rank(&c, tol)?;
        if report.rank != c.nrows() {
            return Err(Error::NotFullRowRank {
                rank: report.rank,
                rows: c.nrows(),
            });
        }
        sys.c = Some(c);
        Ok(sys)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> Option<&DMatrix<f64>> {
        self.c.as_ref()
    }

    /// Order `n` of the plant.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs `m`.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

/// Full-row-rank map `z = Fx` of the functionals to steer.
#[derive(Debug, Clone)]
pub struct TargetMap {
    f: DMatrix<f64>,
}

impl TargetMap {
    pub fn new(f: DMatrix<f64>, tol: &ToleranceConfig) -> Result<Self> {
        if f.nrows() == 0 || f.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "F must be non-empty, got {}x{}",
                f.nrows(),
                f.ncols()
            )));
        }
        matops::ensure_finite(&f, "TargetMap")?;
        let report = rank(&f, tol)?;
        if report.rank != f.nrows() {
            return Err(Error::NotFullRowRank {
                rank: report.rank,
                rows: f.nrows(),
            });
        }
        Ok(Self { f })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// Number of target rows `r`.
    pub fn target_dim(&self) -> usize {
        self.f.nrows()
    }
}

/// Outcome of the target output controllability test.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TocVerdict {
    pub is_toc: bool,
    pub rank_f: usize,
    pub rank_fc: usize,
    /// Human-readable description of the failing comparison, when any.
    pub witness: Option<String>,
}

fn check_compat(sys: &LinearSystem, f: &TargetMap) -> Result<()> {
    if f.matrix().ncols() != sys.state_dim() {
        return Err(Error::Dimension(format!(
            "F has {} columns but the state dimension is {}",
            f.matrix().ncols(),
            sys.state_dim()
        )));
    }
    Ok(())
}

/// Kalman test: full state controllability of `(A, B)`.
pub fn is_controllable(sys: &LinearSystem, tol: &ToleranceConfig) -> Result<bool> {
    let ctrb = controllability_matrix(sys.a(), sys.b())?;
    Ok(rank(&ctrb, tol)?.rank == sys.state_dim())
}

/// Decides target output controllability of `(A, B, F)` by comparing
/// `rank(F)` with `rank(F * [B, AB, ..., A^(n-1)B])`.
pub fn is_target_output_controllable(
    sys: &LinearSystem,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<TocVerdict> {
    check_compat(sys, f)?;
    let rank_f = rank(f.matrix(), tol)?.rank;
    let ctrb = controllability_matrix(sys.a(), sys.b())?;
    let rank_fc = rank(&(f.matrix() * &ctrb), tol)?.rank;
    let is_toc = rank_f == rank_fc;
    let witness = (!is_toc).then(|| {
        format!(
            "rank(F * [B, AB, ..., A^(n-1)B]) = {rank_fc} < {rank_f} = rank(F)"
        )
    });
    Ok(TocVerdict {
        is_toc,
        rank_f,
        rank_fc,
        witness,
    })
}

/// Rank of the shifted block matrix
/// `[FB, F(A - sI)B, ..., F(A - sI)^(n-1)B]`.
///
/// For target output controllable triples this rank equals
/// `rank(F * ctrb)` for every shift `s`; a drop below `rank(F)` at some `s`
/// certifies the triple is not target output controllable. Complex shifts
/// are handled in real arithmetic.
pub fn shifted_controllability_rank(
    sys: &LinearSystem,
    f: &TargetMap,
    s: Complex64,
    tol: &ToleranceConfig,
) -> Result<RankReport> {
    check_compat(sys, f)?;
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::NonFinite {
            context: "shifted_controllability_rank (shift)".into(),
        });
    }
    let n = sys.state_dim();
    let a_shifted = sys.a() - DMatrix::identity(n, n) * s.re;
    let beta = s.im;
    // Blocks (A - sI)^k B, built by repeated left multiplication.
    let mut q_re = sys.b().clone();
    let mut q_im = DMatrix::zeros(n, sys.input_dim());
    let mut blocks_re = Vec::with_capacity(n);
    let mut blocks_im = Vec::with_capacity(n);
    for k in 0..n {
        blocks_re.push(f.matrix() * &q_re);
        blocks_im.push(f.matrix() * &q_im);
        if k + 1 < n {
            let next_re = &a_shifted * &q_re + beta * &q_im;
            let next_im = &a_shifted * &q_im - beta * &q_re;
            q_re = next_re;
            q_im = next_im;
        }
    }
    let refs_re: Vec<&DMatrix<f64>> = blocks_re.iter().collect();
    let stacked_re = matops::hstack(&refs_re);
    if beta == 0.0 {
        rank(&stacked_re, tol)
    } else {
        let refs_im: Vec<&DMatrix<f64>> = blocks_im.iter().collect();
        let stacked_im = matops::hstack(&refs_im);
        matops::rank_complex(&stacked_re, &stacked_im, tol)
    }
}

/// Necessary pencil condition for target output controllability:
/// `rank [sF - FA, FB] = rank(F)` for all complex `s`.
///
/// Since `sF - FA = F(sI - A)` and `F` is full row rank, the rank can only
/// drop at eigenvalues of `A`, so evaluating there decides the universally
/// quantified condition. Returns the first failing shift, if any. The
/// condition is necessary but not sufficient.
pub fn pencil_necessary_condition(
    sys: &LinearSystem,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<(bool, Option<Complex64>)> {
    check_compat(sys, f)?;
    let r = f.target_dim();
    let fa = f.matrix() * sys.a();
    let fb = f.matrix() * sys.b();
    let zero_fb = DMatrix::zeros(fb.nrows(), fb.ncols());
    for s in eigenvalues(sys.a())? {
        let pencil_re = matops::hstack(&[&(f.matrix() * s.re - &fa), &fb]);
        let report = if s.im == 0.0 {
            rank(&pencil_re, tol)?
        } else {
            let pencil_im = matops::hstack(&[&(f.matrix() * s.im), &zero_fb]);
            matops::rank_complex(&pencil_re, &pencil_im, tol)?
        };
        if report.rank < r {
            return Ok((false, Some(s)));
        }
    }
    Ok((true, None))
}

/// The reduced pair `(F A F^-, F B)` with `F^-` the Moore-Penrose inverse.
pub(crate) fn reduced_pair(
    sys: &LinearSystem,
    f: &DMatrix<f64>,
    tol: &ToleranceConfig,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let f_pinv = pinv(f, tol)?;
    Ok((f * sys.a() * f_pinv, f * sys.b()))
}

/// Tests whether the target rows are invariant under the plant dynamics:
/// `rank [FA; F] = rank(F)`, equivalently `FA (I - F^- F) = 0`.
///
/// When this holds, `Fx` obeys the closed subsystem
/// `(Fx)' = (F A F^-)(Fx) + (F B)u` and the reduced design applies. The rank
/// form and the residual form are cross-checked; disagreement beyond
/// tolerance is reported as a numerical-consistency error.
pub fn is_row_space_invariant(
    sys: &LinearSystem,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<bool> {
    check_compat(sys, f)?;
    let fa = f.matrix() * sys.a();
    let stacked = matops::vstack(&[&fa, f.matrix()]);
    let by_rank = rank(&stacked, tol)?.rank == f.target_dim();

    let f_pinv = pinv(f.matrix(), tol)?;
    let n = sys.state_dim();
    let projector = DMatrix::identity(n, n) - &f_pinv * f.matrix();
    let residual = matops::max_abs(&(&fa * &projector));
    let by_residual = residual < tol.residual_atol;

    if by_rank != by_residual {
        return Err(Error::NumericalConsistency(format!(
            "row-space invariance: rank test says {by_rank} but the residual \
             |FA(I - F^-F)| = {residual:e} says {by_residual}"
        )));
    }
    Ok(by_rank)
}

/// Kalman controllability of the reduced pair `(F A F^-, F B)`.
///
/// Combined with row-space invariance this is the exact existence condition
/// for regulating `Fx -> 0` with `r` freely placed subsystem poles. Without
/// row-space invariance the reduced pair is still well defined (Moore-Penrose
/// `F^-`), but the test is no longer equivalent to the pencil condition.
pub fn is_reduced_pair_controllable(
    sys: &LinearSystem,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<bool> {
    check_compat(sys, f)?;
    let (m_red, g_red) = reduced_pair(sys, f.matrix(), tol)?;
    let ctrb = controllability_matrix(&m_red, &g_red)?;
    Ok(rank(&ctrb, tol)?.rank == f.target_dim())
}

/// Observability indices of `(A, F)` with the rows that realize them.
#[derive(Debug, Clone)]
pub struct ObservabilityIndices {
    /// One index per row of `F`, in row order.
    pub indices: Vec<usize>,
    /// Selected `(row of F, power of A)` pairs, in selection order.
    pub selected_rows: Vec<(usize, usize)>,
}

impl ObservabilityIndices {
    /// Largest single index, i.e. the observability index of the pair.
    pub fn max_index(&self) -> usize {
        self.indices.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.indices.iter().sum()
    }
}

/// Computes observability indices by the power-major scan: rows
/// `F_1, ..., F_r`, then `F_1 A, ..., F_r A`, then `F_1 A^2, ...` are kept
/// iff linearly independent of every previously kept row; `indices[i]` counts
/// the kept rows of chain `i`. Once a chain's row goes dependent the chain is
/// retired.
pub fn observability_indices(
    a: &DMatrix<f64>,
    f: &TargetMap,
    tol: &ToleranceConfig,
) -> Result<ObservabilityIndices> {
    if !a.is_square() || a.nrows() != f.matrix().ncols() {
        return Err(Error::Dimension(format!(
            "A must be square of order {}, got {}x{}",
            f.matrix().ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    matops::ensure_finite(a, "observability_indices (A)")?;
    let n = a.nrows();
    let r = f.target_dim();
    let mut indices = vec![0usize; r];
    let mut selected_rows = Vec::new();
    let mut kept: Option<DMatrix<f64>> = None;
    let mut kept_count = 0usize;
    let mut chain_rows: Vec<DMatrix<f64>> =
        (0..r).map(|i| f.matrix().rows(i, 1).into_owned()).collect();
    let mut active = vec![true; r];

    for power in 0..n {
        let mut added = false;
        for i in 0..r {
            if !active[i] {
                continue;
            }
            let candidate = &chain_rows[i];
            let trial = match &kept {
                None => candidate.clone(),
                Some(k) => matops::vstack(&[k, candidate]),
            };
            if rank(&trial, tol)?.rank == kept_count + 1 {
                kept = Some(trial);
                kept_count += 1;
                indices[i] += 1;
                selected_rows.push((i, power));
                added = true;
            } else {
                active[i] = false;
            }
        }
        if !added || kept_count == n {
            break;
        }
        for i in 0..r {
            if active[i] {
                chain_rows[i] = &chain_rows[i] * a;
            }
        }
    }

    Ok(ObservabilityIndices {
        indices,
        selected_rows,
    })
}

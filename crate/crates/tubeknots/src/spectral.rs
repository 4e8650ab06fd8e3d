//! Growth rates and rigorous spectral bounds for the transfer system.
//!
//! Evaluating a monomial transfer matrix at a weight `x in (0, 1)` gives a
//! non-negative sparse matrix `T(x)` whose entries increase with `x`.  The
//! number of polygons grows like `x0^-n` where `x0` is the unique weight at
//! which the dominant (Perron) eigenvalue of `T(x)` equals 1, so the
//! exponential growth rate is `kappa = -log x0`.
//!
//! The dominant eigenvalue is computed by power iteration with certified
//! two-sided Collatz–Wielandt bounds: for a non-negative irreducible matrix
//! `M` and positive vector `v`, the Perron eigenvalue lies between
//! `min_i (Mv)_i / v_i` and `max_i (Mv)_i / v_i`.  Iterating on `M + I`
//! (which is always aperiodic) tightens the bounds monotonically in the
//! limit; the iteration stops when they agree to the requested tolerance.
//! `x0` is then found by bisection, deterministic from an all-ones start.
//!
//! Two further bounds are provided: the sub-multiplicative norm bound
//! `lambda(M) <= ||M^k||_inf^(1/k)` (computed exactly as the largest row
//! sum of `M^k` via `k` mat-vec products against the all-ones vector, with
//! an explicit floating-point rounding budget), and the unknot lower bound
//! `(1/n) log p_(n-6)(unknot)`, valid because concatenating a unit square
//! onto a polygon adds six edges and never changes the knot type.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::patterns::{MonomialMatrix, TransferSystem};

#[derive(Clone, PartialEq, Debug)]
pub enum SpectralError {
    /// Power iteration failed to certify the eigenvalue to tolerance.
    NoConvergence { achieved: f64, requested: f64 },
    /// A matrix power overflowed the floating-point range.
    Overflow,
    /// A requested count is not available in the supplied table.
    MissingData { n: u32 },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::NoConvergence { achieved, requested } => write!(
                f,
                "eigenvalue bounds converged to {achieved:.3e}, requested {requested:.3e}"
            ),
            SpectralError::Overflow => write!(f, "matrix power overflowed f64"),
            SpectralError::MissingData { n } => {
                write!(f, "no polygon count available for n = {n}")
            }
        }
    }
}

impl std::error::Error for SpectralError {}

/// Sparse non-negative matrix in compressed-sparse-row form.
#[derive(Clone, Debug)]
pub struct NumericSparseMatrix {
    pub rows: usize,
    pub cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
}

impl NumericSparseMatrix {
    /// Build from `(row, col, value)` triples (at most one per position).
    pub fn from_triples(rows: usize, cols: usize, triples: &[(u32, u32, f64)]) -> Self {
        let mut sorted: Vec<(u32, u32, f64)> = triples.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &sorted {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        NumericSparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx: sorted.iter().map(|&(_, c, _)| c).collect(),
            vals: sorted.iter().map(|&(_, _, v)| v).collect(),
        }
    }

    /// Evaluate a monomial matrix at weight `x`.
    pub fn from_monomial(m: &MonomialMatrix, x: f64) -> Self {
        let triples: Vec<(u32, u32, f64)> = m
            .entries
            .iter()
            .map(|&(r, c, p)| (r, c, x.powi(p as i32)))
            .collect();
        Self::from_triples(m.rows, m.cols, &triples)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Largest number of nonzeros in any row (enters the rounding budget).
    pub fn max_row_nnz(&self) -> usize {
        (0..self.rows)
            .map(|r| self.row_ptr[r + 1] - self.row_ptr[r])
            .max()
            .unwrap_or(0)
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.col_idx[k] as usize];
            }
            out[r] = acc;
        }
    }
}

/// Which transfer matrix to evaluate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MatrixKind {
    A,
    T,
    B,
}

/// Evaluate one of the system's monomial matrices at weight `x`.
pub fn evaluate(sys: &TransferSystem, kind: MatrixKind, x: f64) -> NumericSparseMatrix {
    let m = match kind {
        MatrixKind::A => &sys.a,
        MatrixKind::T => &sys.t,
        MatrixKind::B => &sys.b,
    };
    NumericSparseMatrix::from_monomial(m, x)
}

/// A certified enclosure of the dominant eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Number of power-iteration steps before giving up.
const EIGEN_MAX_ITERS: usize = 500_000;

/// Dominant eigenvalue of a square non-negative irreducible matrix, by
/// power iteration on `M + I` (aperiodic shift) from the all-ones vector,
/// with Collatz–Wielandt enclosure `upper - lower <= tol`.
pub fn dominant_eigenvalue(
    m: &NumericSparseMatrix,
    tol: f64,
) -> Result<EigenEstimate, SpectralError> {
    assert_eq!(m.rows, m.cols, "eigenvalues need a square matrix");
    let n = m.rows;
    let mut v = vec![1.0f64; n];
    let mut w = vec![0.0f64; n];
    let mut best = (0.0f64, f64::INFINITY);
    for iter in 1..=EIGEN_MAX_ITERS {
        m.matvec(&v, &mut w);
        // Shifted iterate: (M + I) v.
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            w[i] += v[i];
            let ratio = w[i] / v[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if !hi.is_finite() {
            return Err(SpectralError::Overflow);
        }
        // Bounds on lambda(M) = lambda(M + I) - 1; keep the tightest seen.
        best = (best.0.max(lo - 1.0), best.1.min(hi - 1.0));
        if best.1 - best.0 <= tol {
            return Ok(EigenEstimate {
                value: 0.5 * (best.0 + best.1),
                lower: best.0,
                upper: best.1,
                iterations: iter,
            });
        }
        let max = w.iter().cloned().fold(0.0f64, f64::max);
        for x in &mut w {
            *x /= max;
        }
        std::mem::swap(&mut v, &mut w);
    }
    Err(SpectralError::NoConvergence {
        achieved: best.1 - best.0,
        requested: tol,
    })
}

/// Result of the growth-rate bisection.
#[derive(Clone, Debug)]
pub struct GrowthRate {
    /// Weight at which the dominant eigenvalue crosses 1.
    pub x0: f64,
    /// `-log x0`.
    pub kappa: f64,
    /// Eigenvalue enclosure at the final midpoint.
    pub eigen_lower: f64,
    pub eigen_upper: f64,
    pub bisection_steps: usize,
}

/// Eigenvalue tolerance used inside the bisection.
pub const EIGEN_TOL: f64 = 1e-13;

/// Find the weight `x0` in `[lo, hi]` where the dominant eigenvalue of the
/// matrix family crosses 1, to `tol_x`, by bisection.
pub fn growth_rate_of<F>(build: F, lo: f64, hi: f64, tol_x: f64) -> Result<GrowthRate, SpectralError>
where
    F: Fn(f64) -> NumericSparseMatrix,
{
    let eig = |x: f64| -> Result<EigenEstimate, SpectralError> {
        dominant_eigenvalue(&build(x), EIGEN_TOL)
    };
    let (mut lo, mut hi) = (lo, hi);
    assert!(
        eig(lo)?.upper < 1.0 && eig(hi)?.lower > 1.0,
        "the crossing must be bracketed"
    );
    let mut steps = 0;
    let mut last = None;
    while hi - lo > tol_x {
        let mid = 0.5 * (lo + hi);
        let e = eig(mid)?;
        if e.value < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
        last = Some(e);
        if steps > 200 {
            break;
        }
    }
    let x0 = 0.5 * (lo + hi);
    let e = match last {
        Some(e) => e,
        None => eig(x0)?,
    };
    Ok(GrowthRate {
        x0,
        kappa: -x0.ln(),
        eigen_lower: e.lower,
        eigen_upper: e.upper,
        bisection_steps: steps,
    })
}

/// Growth rate of the polygon class described by the system (use the
/// restricted system for the no-2-section rate).
pub fn growth_rate(sys: &TransferSystem, tol_x: f64) -> Result<GrowthRate, SpectralError> {
    growth_rate_of(|x| evaluate(sys, MatrixKind::T, x), 0.3, 0.9, tol_x)
}

/// The norm bound `lambda(M) <= ||M^k||_inf^(1/k)` with an explicit
/// floating-point rounding budget.
#[derive(Clone, Debug)]
pub struct NormBound {
    pub k: u32,
    /// Computed `||M^k||_inf` (largest row sum).
    pub norm_power: f64,
    /// Computed `||M^k||_inf^(1/k)`.
    pub root: f64,
    /// Relative over-estimate budget: the true root is at most
    /// `root * (1 + rounding_budget)`.
    pub rounding_budget: f64,
    /// `root * (1 + rounding_budget)`: a certified upper bound.
    pub certified_root: f64,
}

/// Compute `||M^k||_inf^(1/k)` as the largest entry of `M^k * ones`,
/// together with a conservative bound on the floating-point error.
pub fn norm_power_bound(m: &NumericSparseMatrix, k: u32) -> Result<NormBound, SpectralError> {
    assert_eq!(m.rows, m.cols);
    assert!(k >= 1);
    let mut v = vec![1.0f64; m.cols];
    let mut w = vec![0.0f64; m.rows];
    for _ in 0..k {
        m.matvec(&v, &mut w);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(SpectralError::Overflow);
        }
        std::mem::swap(&mut v, &mut w);
    }
    let norm_power = v.iter().cloned().fold(0.0f64, f64::max);
    let root = norm_power.powf(1.0 / k as f64);
    // Each mat-vec row is a dot product of at most r terms: the computed
    // value differs from the true one by a relative factor within
    // (1 +- gamma_r), gamma_r = r*u / (1 - r*u).  Over k products the
    // factors compound; the 1/k-th root shrinks the exponent back to ~1.
    // Budget doubled for slack, plus the final powf's own ulp.
    let u = f64::EPSILON * 0.5;
    let r = (m.max_row_nnz() + 1) as f64;
    let gamma = r * u / (1.0 - r * u);
    let compounded = (1.0 + gamma).powi(k as i32) - 1.0;
    let rounding_budget = 2.0 * compounded / k as f64 + 4.0 * u;
    Ok(NormBound {
        k,
        norm_power,
        root,
        rounding_budget,
        certified_root: root * (1.0 + rounding_budget),
    })
}

/// Lower bound `(1/n) log p_(n-6)` for the unknot growth rate, from a table
/// of unknot counts by length.  Valid because concatenating a unit square
/// adds six edges and preserves the knot type, so `p_n >= p_(n-6)` within
/// the unknot class.
pub fn unknot_lower_bound_at(
    counts: &BTreeMap<u32, BigUint>,
    n: u32,
) -> Result<f64, SpectralError> {
    if n < 10 {
        return Err(SpectralError::MissingData { n });
    }
    let m = n - 6;
    let c = counts
        .get(&m)
        .filter(|c| **c > BigUint::from(0u32))
        .ok_or(SpectralError::MissingData { n: m })?;
    let value = c.to_f64().ok_or(SpectralError::Overflow)?;
    Ok(value.ln() / n as f64)
}

/// The best available lower bound: evaluated at `n = max available + 6`.
pub fn unknot_lower_bound(
    counts: &BTreeMap<u32, BigUint>,
) -> Result<(u32, f64), SpectralError> {
    let max_n = counts
        .iter()
        .filter(|(_, c)| **c > BigUint::from(0u32))
        .map(|(&n, _)| n)
        .max()
        .ok_or(SpectralError::MissingData { n: 0 })?;
    let n = max_n + 6;
    Ok((n, unknot_lower_bound_at(counts, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-state toy: T(x) = [[0, x], [2x, 0]], dominant eigenvalue
    /// sqrt(2) x, so the growth weight is 1/sqrt(2) and the rate log(2)/2.
    fn toy(x: f64) -> NumericSparseMatrix {
        NumericSparseMatrix::from_triples(2, 2, &[(0, 1, x), (1, 0, 2.0 * x)])
    }

    #[test]
    fn toy_eigenvalue_is_certified() {
        let e = dominant_eigenvalue(&toy(0.5), 1e-13).unwrap();
        let expect = 0.5 * std::f64::consts::SQRT_2;
        assert!(e.lower <= expect && expect <= e.upper, "enclosure holds");
        assert!((e.value - expect).abs() < 1e-12);
    }

    #[test]
    fn toy_growth_rate_matches_closed_form() {
        let g = growth_rate_of(toy, 0.3, 0.9, 1e-12).unwrap();
        assert!((g.x0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((g.kappa - 0.5 * std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn norm_bound_dominates_eigenvalue_on_the_toy() {
        // ||M^k||^(1/k) >= lambda for every k; equality in the limit.
        let m = toy(0.5);
        let lambda = dominant_eigenvalue(&m, 1e-13).unwrap().value;
        for k in [1, 2, 5, 10] {
            let b = norm_power_bound(&m, k).unwrap();
            assert!(
                b.certified_root >= lambda - 1e-12,
                "k = {k}: {} vs {lambda}",
                b.certified_root
            );
        }
        // M^2 = 2x^2 I: the bound is exact at even powers.
        let b = norm_power_bound(&m, 2).unwrap();
        assert!((b.root - lambda).abs() < 1e-12);
    }

    #[test]
    fn norm_bound_overflow_is_reported() {
        let m = NumericSparseMatrix::from_triples(1, 1, &[(0, 0, 1e308)]);
        assert!(matches!(
            norm_power_bound(&m, 4),
            Err(SpectralError::Overflow)
        ));
    }

    #[test]
    fn lower_bound_arithmetic() {
        let mut counts = BTreeMap::new();
        counts.insert(18u32, BigUint::from(838_043u32));
        counts.insert(24u32, BigUint::from(119_796_593u64));
        let at24 = unknot_lower_bound_at(&counts, 24).unwrap();
        assert!((at24 - (838_043f64).ln() / 24.0).abs() < 1e-12);
        let (n, best) = unknot_lower_bound(&counts).unwrap();
        assert_eq!(n, 30);
        assert!((best - (119_796_593f64).ln() / 30.0).abs() < 1e-12);
        assert!(matches!(
            unknot_lower_bound_at(&counts, 20),
            Err(SpectralError::MissingData { n: 14 })
        ));
    }
}

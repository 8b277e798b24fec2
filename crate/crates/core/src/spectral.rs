//! Normalized joint matrices and their singular spectra.
//!
//! For a joint `P_XY` with marginals `p_X`, `p_Y`, the normalized matrix is
//! `P_X^{-1/2} P_XY P_Y^{-1/2}`. Its largest singular value is always 1 (with
//! singular vectors `sqrt(p_X)`, `sqrt(p_Y)`) and its second singular value is
//! the Hirschfeld–Gebelein–Rényi maximal correlation of `(X, Y)`. Along a
//! Markov chain `X - Y - Z` the spectra contract:
//! `λ_i(XZ) ≤ λ_i(XY) · λ_2(YZ)` for `i ≥ 2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{ProbTensor, DEFAULT_ENTRY_CAP};

/// Singular values below this are reported as exactly zero.
pub const CLAMP_BELOW: f64 = 1e-12;
/// Absolute tolerance for comparing singular values.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

/// The normalized joint matrix restricted to the support of both marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeMatrix {
    values: DMatrix<f64>,
    row_support: Vec<usize>,
    col_support: Vec<usize>,
}

impl TildeMatrix {
    /// Entries on the support, rows and columns in original symbol order.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Original row symbols kept by the support restriction.
    pub fn row_support(&self) -> &[usize] {
        &self.row_support
    }

    pub fn col_support(&self) -> &[usize] {
        &self.col_support
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        singular_spectrum(self)
    }
}

/// Descending singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `i`-th largest singular value (1-based); zero past the end.
    pub fn lambda(&self, i: usize) -> f64 {
        assert!(i >= 1, "singular values are indexed from 1");
        self.values.get(i - 1).copied().unwrap_or(0.0)
    }

    /// Number of singular values above `threshold`.
    pub fn numerical_rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&s| s > threshold).count()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Normalizes a nonnegative matrix of joint probabilities.
///
/// Zero rows and columns are dropped before the square-root marginals are
/// inverted; the dropped symbols carry no singular values.
pub fn tilde_from_joint_matrix(p: &DMatrix<f64>) -> Result<TildeMatrix> {
    let row_mass: Vec<f64> = p.row_iter().map(|r| r.sum()).collect();
    let col_mass: Vec<f64> = p.column_iter().map(|c| c.sum()).collect();
    let row_support: Vec<usize> = (0..p.nrows()).filter(|&i| row_mass[i] > 0.0).collect();
    let col_support: Vec<usize> = (0..p.ncols()).filter(|&j| col_mass[j] > 0.0).collect();
    if row_support.is_empty() || col_support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let values = DMatrix::from_fn(row_support.len(), col_support.len(), |i, j| {
        let (r, c) = (row_support[i], col_support[j]);
        p[(r, c)] / (row_mass[r] * col_mass[c]).sqrt()
    });
    Ok(TildeMatrix {
        values,
        row_support,
        col_support,
    })
}

/// The normalized matrix of a two-axis joint `(X, Y)`, rows indexed by the first axis.
pub fn tilde(p: &ProbTensor) -> Result<TildeMatrix> {
    if p.rank() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a joint over two axes, found {}",
            p.rank()
        )));
    }
    let axes = p.axes();
    tilde_grouped(p, &axes[..1], &axes[1..])
}

/// The normalized matrix with rows and columns indexed by axis groups
/// (any remaining axes are summed out).
pub fn tilde_grouped<S: AsRef<str>, T: AsRef<str>>(p: &ProbTensor, rows: &[S], cols: &[T]) -> Result<TildeMatrix> {
    tilde_from_joint_matrix(&p.matrix(rows, cols)?)
}

/// Descending singular values, clamped to zero below [`CLAMP_BELOW`].
pub fn singular_spectrum(t: &TildeMatrix) -> Result<Spectrum> {
    matrix_spectrum(&t.values)
}

pub(crate) fn matrix_spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Decomposition("matrix has non-finite entries".into()));
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    let mut values: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s < CLAMP_BELOW { 0.0 } else { s })
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum { values })
}

/// Maximal correlation: the second singular value of the normalized matrix,
/// or 0 when either variable has a single supported symbol.
pub fn maximal_correlation(p: &ProbTensor) -> Result<f64> {
    let t = tilde(p)?;
    if t.row_support.len() < 2 || t.col_support.len() < 2 {
        return Ok(0.0);
    }
    Ok(singular_spectrum(&t)?.lambda(2).min(1.0))
}

/// Maximal correlation between two axis groups of a larger tensor.
pub fn maximal_correlation_grouped<S: AsRef<str>, T: AsRef<str>>(p: &ProbTensor, rows: &[S], cols: &[T]) -> Result<f64> {
    let t = tilde_grouped(p, rows, cols)?;
    if t.row_support.len() < 2 || t.col_support.len() < 2 {
        return Ok(0.0);
    }
    Ok(singular_spectrum(&t)?.lambda(2).min(1.0))
}

/// The `k`-fold Kronecker power of a matrix.
pub fn kronecker_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    assert!(k >= 1);
    (1..k).fold(m.clone(), |acc, _| acc.kronecker(m))
}

/// Normalized matrix of the `k`-fold i.i.d. extension of a two-axis joint,
/// rows indexed by `x^k` and columns by `y^k` (first letter most significant).
pub fn kronecker_tilde(p: &ProbTensor, k: usize) -> Result<TildeMatrix> {
    kronecker_tilde_capped(p, k, DEFAULT_ENTRY_CAP)
}

pub fn kronecker_tilde_capped(p: &ProbTensor, k: usize, cap: usize) -> Result<TildeMatrix> {
    if p.rank() != 2 {
        return Err(Error::InvalidArgument("expected a joint over two axes".into()));
    }
    let ext = p.iid_extend_capped(k, cap)?;
    let (rows, cols) = ext.axes().split_at(k);
    tilde_grouped(&ext, rows, cols)
}

/// Whether the spectral necessary condition for a Markov chain held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpiVerdict {
    /// Every index satisfied the inequality; the chain may be Markov.
    NecessaryConditionHolds,
    /// Some index violated it; the triple is certainly not Markov.
    Violated,
}

/// One index `i ≥ 2` of the spectral data-processing check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpiEntry {
    pub index: usize,
    pub lambda_xz: f64,
    pub lambda_xy: f64,
    pub lambda2_yz: f64,
    /// `λ_i(XY) λ_2(YZ) - λ_i(XZ)`.
    pub slack: f64,
    /// `λ_i(XY) - λ_i(XY) λ_2(YZ)`.
    pub outer_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    pub axes: [String; 3],
    pub rank_xz: usize,
    pub tolerance: f64,
    pub entries: Vec<DpiEntry>,
    /// Smallest slack over all entries; `None` when no index is checked.
    pub min_slack: Option<f64>,
    pub verdict: DpiVerdict,
}

/// Checks `λ_i(XZ) ≤ λ_i(XY) λ_2(YZ) ≤ λ_i(XY)` for `i = 2..=rank(XZ)` on a
/// three-axis joint whose axes are taken in order as `(X, Y, Z)`.
pub fn dpi_check(t: &ProbTensor) -> Result<DpiReport> {
    if t.rank() != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected a joint over three axes, found {}",
            t.rank()
        )));
    }
    let a = t.axes();
    dpi_check_axes(t, [&a[0], &a[1], &a[2]], SPECTRAL_TOLERANCE)
}

/// As [`dpi_check`], naming the chain axes explicitly.
pub fn dpi_check_axes(t: &ProbTensor, chain: [&str; 3], tol: f64) -> Result<DpiReport> {
    let [x, y, z] = chain;
    let xz = tilde_grouped(t, &[x], &[z])?.spectrum()?;
    let xy = tilde_grouped(t, &[x], &[y])?.spectrum()?;
    let yz = tilde_grouped(t, &[y], &[z])?.spectrum()?;
    let rank_xz = xz.numerical_rank(SPECTRAL_TOLERANCE);
    let lambda2_yz = yz.lambda(2);
    let entries: Vec<DpiEntry> = (2..=rank_xz)
        .map(|i| {
            let bound = xy.lambda(i) * lambda2_yz;
            DpiEntry {
                index: i,
                lambda_xz: xz.lambda(i),
                lambda_xy: xy.lambda(i),
                lambda2_yz,
                slack: bound - xz.lambda(i),
                outer_slack: xy.lambda(i) - bound,
            }
        })
        .collect();
    let min_slack = entries
        .iter()
        .map(|e| e.slack.min(e.outer_slack))
        .reduce(f64::min);
    let verdict = if min_slack.is_none_or(|s| s >= -tol) {
        DpiVerdict::NecessaryConditionHolds
    } else {
        DpiVerdict::Violated
    };
    Ok(DpiReport {
        axes: [x.to_string(), y.to_string(), z.to_string()],
        rank_xz,
        tolerance: tol,
        entries,
        min_slack,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dsbs(p: f64) -> ProbTensor {
        ProbTensor::from_matrix("X", "Y", &[vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]])
            .unwrap()
    }

    #[test]
    fn tilde_of_basic_joints() {
        let indep = ProbTensor::new(["X", "Y"], vec![2, 2], vec![0.25; 4]).unwrap();
        let t = tilde(&indep).unwrap();
        assert!(t.values().iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let s = t.spectrum().unwrap();
        assert_abs_diff_eq!(s.lambda(1), 1.0, epsilon = 1e-12);
        assert_eq!(s.lambda(2), 0.0);

        let copy = ProbTensor::new(["X", "Y"], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let t = tilde(&copy).unwrap();
        assert_abs_diff_eq!(t.values()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_eq!(t.values()[(0, 1)], 0.0);
        let s = t.spectrum().unwrap();
        assert_abs_diff_eq!(s.lambda(2), 1.0, epsilon = 1e-12);

        let t = tilde(&dsbs(0.1)).unwrap();
        assert_abs_diff_eq!(t.values()[(0, 0)], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(t.values()[(0, 1)], 0.1, epsilon = 1e-15);
        let s = t.spectrum().unwrap();
        assert_abs_diff_eq!(s.lambda(1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda(2), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn support_restriction_drops_zero_symbols() {
        let p = ProbTensor::new(["X", "Y"], vec![3, 2], vec![0.45, 0.05, 0.0, 0.0, 0.05, 0.45]).unwrap();
        let t = tilde(&p).unwrap();
        assert_eq!(t.row_support(), &[0, 2]);
        assert_abs_diff_eq!(t.spectrum().unwrap().lambda(2), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn maximal_correlation_edge_cases() {
        let single = ProbTensor::new(["X", "Y"], vec![1, 2], vec![0.3, 0.7]).unwrap();
        assert_eq!(maximal_correlation(&single).unwrap(), 0.0);
        let indep = ProbTensor::new(["X", "Y"], vec![2, 3], vec![0.06, 0.12, 0.12, 0.14, 0.28, 0.28]).unwrap();
        assert!(maximal_correlation(&indep).unwrap() < 1e-9);
        assert_abs_diff_eq!(maximal_correlation(&dsbs(0.1)).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn kronecker_tilde_dsbs_pair() {
        let t = kronecker_tilde(&dsbs(0.1), 2).unwrap();
        let s = t.spectrum().unwrap();
        for (got, want) in s.values().iter().zip([1.0, 0.8, 0.8, 0.64]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let once = kronecker_tilde(&dsbs(0.1), 1).unwrap();
        assert_eq!(once, tilde(&dsbs(0.1)).unwrap());
        assert!(matches!(
            kronecker_tilde_capped(&dsbs(0.1), 4, 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn empty_support_is_rejected() {
        let m = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(tilde_from_joint_matrix(&m), Err(Error::EmptySupport)));
    }

    fn bsc(p: f64) -> [[f64; 2]; 2] {
        [[1.0 - p, p], [p, 1.0 - p]]
    }

    #[test]
    fn bsc_chain_is_tight() {
        let (a, b) = (bsc(0.1), bsc(0.2));
        let mut values = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    values.push(0.5 * a[x][y] * b[y][z]);
                }
            }
        }
        let t = ProbTensor::new(["X", "Y", "Z"], vec![2, 2, 2], values).unwrap();
        let r = dpi_check(&t).unwrap();
        assert_eq!(r.verdict, DpiVerdict::NecessaryConditionHolds);
        assert_eq!(r.entries.len(), 1);
        assert_abs_diff_eq!(r.entries[0].lambda_xz, 0.48, epsilon = 1e-12);
        assert_abs_diff_eq!(r.entries[0].lambda_xy * r.entries[0].lambda2_yz, 0.48, epsilon = 1e-12);
        assert_abs_diff_eq!(r.entries[0].slack, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn common_bit_violates() {
        // X = Z fair bit, Y an independent fair bit
        let mut values = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                values[x * 4 + y * 2 + x] = 0.25;
            }
        }
        let t = ProbTensor::new(["X", "Y", "Z"], vec![2, 2, 2], values).unwrap();
        let r = dpi_check(&t).unwrap();
        assert_eq!(r.verdict, DpiVerdict::Violated);
        assert_abs_diff_eq!(r.entries[0].lambda_xz, 1.0, epsilon = 1e-12);
        assert_eq!(r.entries[0].lambda_xy, 0.0);

        let mut same = vec![0.0; 8];
        same[0] = 0.5;
        same[7] = 0.5;
        let t = ProbTensor::new(["X", "Y", "Z"], vec![2, 2, 2], same).unwrap();
        let r = dpi_check(&t).unwrap();
        assert_eq!(r.verdict, DpiVerdict::NecessaryConditionHolds);
        assert_abs_diff_eq!(r.min_slack.unwrap(), 0.0, epsilon = 1e-12);
    }
}

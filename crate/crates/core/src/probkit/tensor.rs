use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Normalization tolerance for tensors built from user input.
pub const INPUT_TOLERANCE: f64 = 1e-12;
/// Normalization tolerance for tensors produced by arithmetic on other tensors.
pub const ARITHMETIC_TOLERANCE: f64 = 1e-10;
/// Conditioning assignments with less mass than this are treated as unrealized.
pub const MASS_FLOOR: f64 = 1e-12;
/// Default entry cap for i.i.d. extensions.
pub const DEFAULT_ENTRY_CAP: usize = 1 << 22;

/// A joint distribution over named finite axes, stored densely in row-major
/// order (last axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct ProbTensor {
    axes: Vec<String>,
    sizes: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorRepr {
    axes: Vec<String>,
    sizes: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<TensorRepr> for ProbTensor {
    type Error = Error;

    fn try_from(r: TensorRepr) -> Result<Self> {
        ProbTensor::new(r.axes, r.sizes, r.values)
    }
}

impl From<ProbTensor> for TensorRepr {
    fn from(t: ProbTensor) -> Self {
        TensorRepr {
            axes: t.axes,
            sizes: t.sizes,
            values: t.values,
        }
    }
}

fn validate_layout(axes: &[String], sizes: &[usize], len: usize) -> Result<()> {
    if axes.len() != sizes.len() {
        return Err(Error::InvalidArgument(format!(
            "{} axis labels but {} sizes",
            axes.len(),
            sizes.len()
        )));
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].contains(a) {
            return Err(Error::DuplicateAxis(a.clone()));
        }
    }
    if let Some(pos) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidArgument(format!(
            "axis `{}` has size 0",
            axes[pos]
        )));
    }
    let expected: usize = sizes.iter().product();
    if expected != len {
        return Err(Error::ShapeMismatch {
            expected,
            found: len,
        });
    }
    Ok(())
}

fn validate_values(values: &[f64], tol: f64) -> Result<()> {
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidEntry { index, value });
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

pub(crate) fn row_major_strides(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

/// Advances a multi-index odometer; returns false after the last assignment.
pub(crate) fn advance(index: &mut [usize], sizes: &[usize]) -> bool {
    for pos in (0..index.len()).rev() {
        index[pos] += 1;
        if index[pos] < sizes[pos] {
            return true;
        }
        index[pos] = 0;
    }
    false
}

impl ProbTensor {
    /// Builds a tensor from user-supplied values; they must be nonnegative and
    /// sum to one within [`INPUT_TOLERANCE`].
    pub fn new<S: Into<String>>(
        axes: impl IntoIterator<Item = S>,
        sizes: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::with_tolerance(axes, sizes, values, INPUT_TOLERANCE)
    }

    pub(crate) fn with_tolerance<S: Into<String>>(
        axes: impl IntoIterator<Item = S>,
        sizes: Vec<usize>,
        values: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let axes: Vec<String> = axes.into_iter().map(Into::into).collect();
        validate_layout(&axes, &sizes, values.len())?;
        validate_values(&values, tol)?;
        Ok(ProbTensor {
            axes,
            sizes,
            values,
        })
    }

    /// Builds a tensor from nonnegative weights, dividing by their total.
    pub fn from_weights<S: Into<String>>(
        axes: impl IntoIterator<Item = S>,
        sizes: Vec<usize>,
        mut weights: Vec<f64>,
    ) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::EmptySupport);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::with_tolerance(axes, sizes, weights, ARITHMETIC_TOLERANCE)
    }

    /// A two-axis tensor from a row-major matrix of probabilities.
    pub fn from_matrix<S: Into<String>>(row_axis: S, col_axis: S, rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidArgument("ragged matrix".into()));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new([row_axis.into(), col_axis.into()], vec![rows.len(), n_cols], values)
    }

    pub fn axes(&self) -> &[String] {
        &self.axes
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn axis_index(&self, label: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAxis(label.to_string()))
    }

    pub fn axis_size(&self, label: &str) -> Result<usize> {
        Ok(self.sizes[self.axis_index(label)?])
    }

    pub fn has_axis(&self, label: &str) -> bool {
        self.axes.iter().any(|a| a == label)
    }

    /// Entry at a full multi-index given in axis order.
    pub fn get(&self, index: &[usize]) -> f64 {
        debug_assert_eq!(index.len(), self.sizes.len());
        let flat = index
            .iter()
            .zip(row_major_strides(&self.sizes))
            .map(|(i, s)| i * s)
            .sum::<usize>();
        self.values[flat]
    }

    fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.axis_index(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::DuplicateAxis(l.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal values over the axes at `positions`, laid out row-major in that order.
    fn project(&self, positions: &[usize]) -> Vec<f64> {
        let out_sizes: Vec<usize> = positions.iter().map(|&p| self.sizes[p]).collect();
        let out_strides = row_major_strides(&out_sizes);
        // stride contributed by each source axis to the output index
        let mut contrib = vec![0usize; self.sizes.len()];
        for (k, &p) in positions.iter().enumerate() {
            contrib[p] = out_strides[k];
        }
        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut idx = vec![0usize; self.sizes.len()];
        let mut out_flat = 0usize;
        for &v in &self.values {
            out[out_flat] += v;
            // odometer step, keeping out_flat in sync
            for pos in (0..idx.len()).rev() {
                idx[pos] += 1;
                out_flat += contrib[pos];
                if idx[pos] < self.sizes[pos] {
                    break;
                }
                out_flat -= contrib[pos] * idx[pos];
                idx[pos] = 0;
            }
        }
        out
    }

    /// Sums out every axis not in `keep`; the result's axes follow the order of `keep`.
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<ProbTensor> {
        let positions = self.positions(keep)?;
        let values = self.project(&positions);
        Ok(ProbTensor {
            axes: positions.iter().map(|&p| self.axes[p].clone()).collect(),
            sizes: positions.iter().map(|&p| self.sizes[p]).collect(),
            values,
        })
    }

    /// Reorders axes.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<ProbTensor> {
        if order.len() != self.rank() {
            return Err(Error::InvalidArgument(format!(
                "permutation names {} axes, tensor has {}",
                order.len(),
                self.rank()
            )));
        }
        self.marginal(order)
    }

    /// Flattens `rows` and `cols` axis groups into a matrix (each group row-major).
    pub fn matrix<S: AsRef<str>, T: AsRef<str>>(&self, rows: &[S], cols: &[T]) -> Result<DMatrix<f64>> {
        let mut positions = self.positions(rows)?;
        let col_positions = self.positions(cols)?;
        if let Some(p) = col_positions.iter().find(|p| positions.contains(p)) {
            return Err(Error::OverlappingAxes(self.axes[*p].clone()));
        }
        let n_rows: usize = positions.iter().map(|&p| self.sizes[p]).product();
        let n_cols: usize = col_positions.iter().map(|&p| self.sizes[p]).product();
        positions.extend(col_positions);
        let flat = self.project(&positions);
        Ok(DMatrix::from_row_slice(n_rows, n_cols, &flat))
    }

    /// Total mass of the slice where each listed axis takes the given value.
    pub fn mass_of<S: AsRef<str>>(&self, fixed: &[(S, usize)]) -> Result<f64> {
        let labels: Vec<&str> = fixed.iter().map(|(a, _)| a.as_ref()).collect();
        let m = self.marginal(&labels)?;
        let index: Vec<usize> = fixed.iter().map(|&(_, v)| v).collect();
        Ok(m.get(&index))
    }

    /// Conditions on fixed values of some axes, removing them.
    ///
    /// Returns `Ok(None)` when the conditioning event has mass below [`MASS_FLOOR`].
    pub fn condition_on<S: AsRef<str>>(&self, fixed: &[(S, usize)]) -> Result<Option<ProbTensor>> {
        let mut fixed_pos = vec![None; self.rank()];
        for (label, value) in fixed {
            let p = self.axis_index(label.as_ref())?;
            if fixed_pos[p].is_some() {
                return Err(Error::DuplicateAxis(label.as_ref().to_string()));
            }
            if *value >= self.sizes[p] {
                return Err(Error::InvalidArgument(format!(
                    "value {value} out of range for axis `{}`",
                    label.as_ref()
                )));
            }
            fixed_pos[p] = Some(*value);
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|&p| fixed_pos[p].is_none()).collect();
        let sizes: Vec<usize> = keep.iter().map(|&p| self.sizes[p]).collect();
        let mut values = Vec::with_capacity(sizes.iter().product());
        let mut idx = vec![0usize; self.rank()];
        for (p, v) in fixed_pos.iter().enumerate() {
            if let Some(v) = v {
                idx[p] = *v;
            }
        }
        let strides = row_major_strides(&self.sizes);
        let mut sub = vec![0usize; keep.len()];
        loop {
            for (k, &p) in keep.iter().enumerate() {
                idx[p] = sub[k];
            }
            let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            values.push(self.values[flat]);
            if !advance(&mut sub, &sizes) {
                break;
            }
        }
        let mass: f64 = values.iter().sum();
        if mass < MASS_FLOOR {
            return Ok(None);
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Some(ProbTensor {
            axes: keep.iter().map(|&p| self.axes[p].clone()).collect(),
            sizes,
            values,
        }))
    }

    /// The conditional kernel `p(target | given)`.
    pub fn conditional<S: AsRef<str>, T: AsRef<str>>(&self, target: &[S], given: &[T]) -> Result<Kernel> {
        let target_pos = self.positions(target)?;
        let given_pos = self.positions(given)?;
        if let Some(p) = target_pos.iter().find(|p| given_pos.contains(p)) {
            return Err(Error::OverlappingAxes(self.axes[*p].clone()));
        }
        let mut order = given_pos.clone();
        order.extend(&target_pos);
        let flat = self.project(&order);
        let target_axes: Vec<String> = target_pos.iter().map(|&p| self.axes[p].clone()).collect();
        let target_sizes: Vec<usize> = target_pos.iter().map(|&p| self.sizes[p]).collect();
        let given_axes: Vec<String> = given_pos.iter().map(|&p| self.axes[p].clone()).collect();
        let given_sizes: Vec<usize> = given_pos.iter().map(|&p| self.sizes[p]).collect();
        let slice_len: usize = target_sizes.iter().product();
        let slices = flat
            .chunks(slice_len)
            .map(|chunk| {
                let mass: f64 = chunk.iter().sum();
                (mass >= MASS_FLOOR).then(|| ProbTensor {
                    axes: target_axes.clone(),
                    sizes: target_sizes.clone(),
                    values: chunk.iter().map(|v| v / mass).collect(),
                })
            })
            .collect();
        Ok(Kernel::from_slices(
            target_axes,
            target_sizes,
            given_axes,
            given_sizes,
            slices,
        ))
    }

    /// The `n`-fold i.i.d. extension with the default entry cap.
    pub fn iid_extend(&self, n: usize) -> Result<ProbTensor> {
        self.iid_extend_capped(n, DEFAULT_ENTRY_CAP)
    }

    /// The `n`-fold i.i.d. extension. Axis `A` becomes `A_1, ..., A_n`; the
    /// result is ordered `[A_1..A_n, B_1..B_n, ...]` and each entry is the
    /// product of the per-letter probabilities.
    pub fn iid_extend_capped(&self, n: usize, cap: usize) -> Result<ProbTensor> {
        if n == 0 {
            return Err(Error::InvalidArgument("extension length must be at least 1".into()));
        }
        let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(self.len()));
        let size = match size {
            Some(s) if s <= cap => s,
            Some(s) => return Err(Error::CapExceeded { size: s, cap }),
            None => return Err(Error::CapExceeded { size: usize::MAX, cap }),
        };
        let rank = self.rank();
        let mut axes = Vec::with_capacity(rank * n);
        let mut sizes = Vec::with_capacity(rank * n);
        for (a, &s) in self.axes.iter().zip(&self.sizes) {
            for i in 1..=n {
                axes.push(letter_axis(a, i));
                sizes.push(s);
            }
        }
        let strides = row_major_strides(&self.sizes);
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; rank * n];
        loop {
            let mut p = 1.0;
            for letter in 0..n {
                let flat: usize = (0..rank).map(|a| idx[a * n + letter] * strides[a]).sum();
                p *= self.values[flat];
            }
            values.push(p);
            if !advance(&mut idx, &sizes) {
                break;
            }
        }
        ProbTensor::with_tolerance(axes, sizes, values, ARITHMETIC_TOLERANCE)
    }

    /// Renames one axis.
    pub fn rename(mut self, from: &str, to: &str) -> Result<ProbTensor> {
        let p = self.axis_index(from)?;
        if from != to && self.has_axis(to) {
            return Err(Error::DuplicateAxis(to.to_string()));
        }
        self.axes[p] = to.to_string();
        Ok(self)
    }

    /// Indices where the marginal of `axis` has positive mass.
    pub fn support(&self, axis: &str) -> Result<Vec<usize>> {
        let p = self.axis_index(axis)?;
        Ok(self
            .project(&[p])
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
            .collect())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Label of letter `i` (1-based) of axis `axis` in an i.i.d. extension.
pub fn letter_axis(axis: &str, i: usize) -> String {
    format!("{axis}_{i}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dsbs(p: f64) -> ProbTensor {
        ProbTensor::from_matrix("U", "V", &[vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]])
            .unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ProbTensor::new(["A", "A"], vec![1, 1], vec![1.0]),
            Err(Error::DuplicateAxis(_))
        ));
        assert!(matches!(
            ProbTensor::new(["A"], vec![2], vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            ProbTensor::new(["A"], vec![2], vec![1.5, -0.5]),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(
            ProbTensor::new(["A"], vec![3], vec![0.5, 0.5]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn marginal_of_uniform_and_dsbs() {
        let uniform = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(uniform.marginal(&["U"]).unwrap().values(), &[0.5, 0.5]);
        let m = dsbs(0.1).marginal(&["U"]).unwrap();
        assert_abs_diff_eq!(m.values()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.values()[1], 0.5, epsilon = 1e-15);
        assert_eq!(dsbs(0.1).marginal(&["U", "V"]).unwrap(), dsbs(0.1));
        assert!(matches!(dsbs(0.1).marginal(&["W"]), Err(Error::UnknownAxis(_))));
    }

    #[test]
    fn marginal_respects_requested_order() {
        let t = ProbTensor::new(["A", "B"], vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.15, 0.25]).unwrap();
        let swapped = t.marginal(&["B", "A"]).unwrap();
        assert_eq!(swapped.axes(), &["B".to_string(), "A".to_string()]);
        assert_eq!(swapped.values(), &[0.1, 0.3, 0.2, 0.15, 0.0, 0.25]);
    }

    #[test]
    fn conditional_slices() {
        let k = dsbs(0.1).conditional(&["V"], &["U"]).unwrap();
        let s = k.slice(&[0]).unwrap();
        assert_abs_diff_eq!(s.values()[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values()[1], 0.1, epsilon = 1e-15);

        let product = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.12, 0.28, 0.18, 0.42]).unwrap();
        let k = product.conditional(&["U"], &["V"]).unwrap();
        for v in 0..2 {
            let s = k.slice(&[v]).unwrap();
            assert_abs_diff_eq!(s.values()[0], 0.4, epsilon = 1e-12);
        }

        let degenerate = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let k = degenerate.conditional(&["U"], &["V"]).unwrap();
        assert!(k.slice(&[0]).is_some());
        assert!(k.slice(&[1]).is_none());

        assert!(matches!(
            dsbs(0.1).conditional(&["U"], &["U"]),
            Err(Error::OverlappingAxes(_))
        ));
    }

    #[test]
    fn iid_extension_values() {
        let p = dsbs(0.1);
        assert_eq!(p.iid_extend(1).unwrap().values(), p.values());
        let p2 = p.iid_extend(2).unwrap();
        assert_eq!(p2.axes(), &["U_1", "U_2", "V_1", "V_2"]);
        assert_abs_diff_eq!(p2.get(&[0, 0, 0, 0]), 0.2025, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.total(), 1.0, epsilon = 1e-12);
        assert!(matches!(p.iid_extend_capped(3, 10), Err(Error::CapExceeded { .. })));
        assert!(p.iid_extend(0).is_err());
    }

    #[test]
    fn condition_on_drops_axes() {
        let p = dsbs(0.1);
        let c = p.condition_on(&[("U", 1)]).unwrap().unwrap();
        assert_eq!(c.axes(), &["V"]);
        assert_abs_diff_eq!(c.values()[1], 0.9, epsilon = 1e-15);
        let degenerate = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(degenerate.condition_on(&[("U", 1)]).unwrap().is_none());
    }

    #[test]
    fn json_round_trip_validates() {
        let p = dsbs(0.2);
        let s = serde_json::to_string(&p).unwrap();
        let back: ProbTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"axes":["U"],"sizes":[2],"values":[0.3,0.3]}"#;
        assert!(serde_json::from_str::<ProbTensor>(bad).is_err());
    }
}

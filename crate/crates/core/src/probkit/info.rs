use serde::{Deserialize, Serialize};

use super::tensor::ProbTensor;
use crate::error::{Error, Result};

/// Values this far below zero are rounding noise and are reported as zero.
pub const NEGATIVE_FLOOR: f64 = 1e-10;

/// Which information quantity to evaluate, by axis groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMeasure {
    Entropy { of: Vec<String> },
    ConditionalEntropy { of: Vec<String>, given: Vec<String> },
    MutualInformation { a: Vec<String>, b: Vec<String> },
    ConditionalMutualInformation { a: Vec<String>, b: Vec<String>, given: Vec<String> },
}

fn owned<S: AsRef<str>>(axes: &[S]) -> Vec<String> {
    axes.iter().map(|a| a.as_ref().to_string()).collect()
}

impl InfoMeasure {
    pub fn entropy<S: AsRef<str>>(of: &[S]) -> Self {
        InfoMeasure::Entropy { of: owned(of) }
    }

    pub fn mutual<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> Self {
        InfoMeasure::MutualInformation {
            a: owned(a),
            b: owned(b),
        }
    }

    /// Adds conditioning axes to an entropy or mutual information.
    pub fn given<S: AsRef<str>>(self, given: &[S]) -> Self {
        let mut extra = owned(given);
        match self {
            InfoMeasure::Entropy { of } => InfoMeasure::ConditionalEntropy { of, given: extra },
            InfoMeasure::ConditionalEntropy { of, mut given } => {
                given.append(&mut extra);
                InfoMeasure::ConditionalEntropy { of, given }
            }
            InfoMeasure::MutualInformation { a, b } => {
                InfoMeasure::ConditionalMutualInformation { a, b, given: extra }
            }
            InfoMeasure::ConditionalMutualInformation { a, b, mut given } => {
                given.append(&mut extra);
                InfoMeasure::ConditionalMutualInformation { a, b, given }
            }
        }
    }
}

/// Shannon entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Joint entropy in bits of the marginal over `axes` (zero for an empty group).
pub fn joint_entropy<S: AsRef<str>>(t: &ProbTensor, axes: &[S]) -> Result<f64> {
    if axes.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy_bits(t.marginal(axes)?.values()))
}

fn union(groups: &[&[String]]) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for g in groups {
        for a in g.iter() {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
    }
    Ok(out)
}

fn floor_at_zero(x: f64) -> f64 {
    if x < 0.0 && x > -NEGATIVE_FLOOR {
        0.0
    } else {
        x
    }
}

/// Evaluates an information measure in bits.
pub fn info_measure(t: &ProbTensor, expr: &InfoMeasure) -> Result<f64> {
    let h = |axes: &[String]| joint_entropy(t, axes);
    let value = match expr {
        InfoMeasure::Entropy { of } => h(of)?,
        InfoMeasure::ConditionalEntropy { of, given } => h(&union(&[of, given])?)? - h(given)?,
        InfoMeasure::MutualInformation { a, b } => h(a)? + h(b)? - h(&union(&[a, b])?)?,
        InfoMeasure::ConditionalMutualInformation { a, b, given } => {
            h(&union(&[a, given])?)? + h(&union(&[b, given])?)?
                - h(&union(&[a, b, given])?)?
                - h(given)?
        }
    };
    if !value.is_finite() {
        return Err(Error::InvalidArgument("information measure is not finite".into()));
    }
    Ok(floor_at_zero(value))
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
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
    fn closed_forms() {
        let indep = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.12, 0.28, 0.18, 0.42]).unwrap();
        assert_abs_diff_eq!(info_measure(&indep, &InfoMeasure::mutual(&["U"], &["V"])).unwrap(), 0.0, epsilon = 1e-12);

        let copy = ProbTensor::new(["X", "Y"], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(info_measure(&copy, &InfoMeasure::mutual(&["X"], &["Y"])).unwrap(), 1.0, epsilon = 1e-15);

        // 1 - h(0.1) with h(0.1) = 0.4689955935892812
        let i = info_measure(&dsbs(0.1), &InfoMeasure::mutual(&["U"], &["V"])).unwrap();
        assert_abs_diff_eq!(i, 1.0 - 0.468_995_593_589_281_2, epsilon = 1e-12);
        assert_abs_diff_eq!(binary_entropy(0.1), 0.468_995_593_589_281_2, epsilon = 1e-15);
    }

    #[test]
    fn conditional_forms_and_unknown_axis() {
        let t = dsbs(0.1);
        let h_v_given_u = info_measure(&t, &InfoMeasure::entropy(&["V"]).given(&["U"])).unwrap();
        assert_abs_diff_eq!(h_v_given_u, binary_entropy(0.1), epsilon = 1e-12);
        let cmi = info_measure(&t, &InfoMeasure::mutual(&["U"], &["V"]).given(&["U"])).unwrap();
        assert_abs_diff_eq!(cmi, 0.0, epsilon = 1e-12);
        assert!(matches!(
            info_measure(&t, &InfoMeasure::entropy(&["Z"])),
            Err(Error::UnknownAxis(_))
        ));
    }
}

use super::tensor::{row_major_strides, ProbTensor};

/// A conditional distribution `p(target | given)`: one normalized slice per
/// assignment of the given axes. Slices for assignments with zero mass are
/// `None` rather than invented.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    target_axes: Vec<String>,
    target_sizes: Vec<usize>,
    given_axes: Vec<String>,
    given_sizes: Vec<usize>,
    slices: Vec<Option<ProbTensor>>,
}

impl Kernel {
    pub(crate) fn from_slices(
        target_axes: Vec<String>,
        target_sizes: Vec<usize>,
        given_axes: Vec<String>,
        given_sizes: Vec<usize>,
        slices: Vec<Option<ProbTensor>>,
    ) -> Self {
        debug_assert_eq!(slices.len(), given_sizes.iter().product::<usize>());
        Kernel {
            target_axes,
            target_sizes,
            given_axes,
            given_sizes,
            slices,
        }
    }

    pub fn target_axes(&self) -> &[String] {
        &self.target_axes
    }

    pub fn target_sizes(&self) -> &[usize] {
        &self.target_sizes
    }

    pub fn given_axes(&self) -> &[String] {
        &self.given_axes
    }

    pub fn given_sizes(&self) -> &[usize] {
        &self.given_sizes
    }

    /// The slice for one assignment of the given axes, or `None` if that
    /// assignment has zero mass.
    pub fn slice(&self, given: &[usize]) -> Option<&ProbTensor> {
        assert_eq!(given.len(), self.given_sizes.len(), "wrong number of given values");
        let flat: usize = given
            .iter()
            .zip(row_major_strides(&self.given_sizes))
            .map(|(g, s)| g * s)
            .sum();
        self.slices[flat].as_ref()
    }

    /// All slices in row-major order of the given assignment.
    pub fn slices(&self) -> &[Option<ProbTensor>] {
        &self.slices
    }

    pub fn undefined_count(&self) -> usize {
        self.slices.iter().filter(|s| s.is_none()).count()
    }
}

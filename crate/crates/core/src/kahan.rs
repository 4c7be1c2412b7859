//! Compensated floating-point accumulation.
//!
//! Winding numbers are sums of many signed solid angles that cancel almost
//! completely far from a surface, so a plain `f64` accumulator can lose the
//! digits that the inside/outside threshold depends on. `CompensatedSum`
//! tracks the rounding error of every addition with an error-free
//! transformation (Neumaier's variant of Kahan summation) and folds it back
//! in at the end.

/// Running sum with a first-order error compensation term.
///
/// All operations are sign-symmetric: accumulating `-x_i` yields exactly the
/// negation of accumulating `x_i`, which the orientation-flip identities in
/// this crate rely on.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `x`, capturing the rounding error of the addition exactly.
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// The compensated total.
    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

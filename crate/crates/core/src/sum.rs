//! Compensated summation.
//!
//! All long reductions in the crate (ψ weights, transform terms, Dirichlet
//! partial sums) go through [`CompensatedSum`], which keeps a running
//! correction term (Neumaier's variant of Kahan summation) so that the
//! accumulated error stays at a few ulps independent of the number of terms.

use num_complex::Complex;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<R> {
    sum: R,
    compensation: R,
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        Self {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: R) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.compensation
    }
}

impl<R: Real> FromIterator<R> for CompensatedSum<R> {
    fn from_iter<I: IntoIterator<Item = R>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Component-wise compensated sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum<R> {
    re: CompensatedSum<R>,
    im: CompensatedSum<R>,
}

impl<R: Real> CompensatedComplexSum<R> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: Complex<R>) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> Complex<R> {
        Complex::new(self.re.value(), self.im.value())
    }
}

impl<R: Real> FromIterator<Complex<R>> for CompensatedComplexSum<R> {
    fn from_iter<I: IntoIterator<Item = Complex<R>>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Sums `values` with compensation.
pub fn compensated_sum<R: Real>(values: impl IntoIterator<Item = R>) -> R {
    values.into_iter().collect::<CompensatedSum<R>>().value()
}

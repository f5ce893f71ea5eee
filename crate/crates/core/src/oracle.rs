//! The expensive function being analysed.

use crate::error::{Error, Result};

/// A black-box function with `responses()` outputs on a `dim()`-dimensional input.
pub trait Oracle {
    fn dim(&self) -> usize;

    fn responses(&self) -> usize {
        1
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Wraps a closure returning all responses at once.
pub struct FnOracle<F> {
    dim: usize,
    responses: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    pub fn new(dim: usize, responses: usize, f: F) -> Self {
        Self { dim, responses, f }
    }
}

impl<F> Oracle for FnOracle<F>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn responses(&self) -> usize {
        self.responses
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let y = (self.f)(x);
        check_output(&y, self.responses)?;
        Ok(y)
    }
}

/// Rejects outputs with the wrong length or non-finite entries.
pub fn check_output(y: &[f64], responses: usize) -> Result<()> {
    if y.len() != responses {
        return Err(Error::Oracle(format!(
            "expected {responses} responses, got {}",
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Oracle(format!("non-finite response {v}")));
    }
    Ok(())
}

/// Counts calls made through it.
pub struct Counting<O> {
    pub inner: O,
    pub calls: usize,
}

impl<O> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: 0 }
    }
}

impl<O: Oracle> Oracle for Counting<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn responses(&self) -> usize {
        self.inner.responses()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.calls += 1;
        self.inner.evaluate(x)
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn responses(&self) -> usize {
        (**self).responses()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).evaluate(x)
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn responses(&self) -> usize {
        (**self).responses()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).evaluate(x)
    }
}

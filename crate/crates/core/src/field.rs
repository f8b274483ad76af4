//! Scalar fields on `R^k`.
//!
//! Everything the fractal machinery consumes (germs, scale functions, base
//! functions, grid samples, other fractal functions) is a [`Field`], so the
//! operator can be applied to its own output.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A real-valued function of `arity` real variables.
pub trait Field: Send + Sync {
    fn arity(&self) -> usize;

    fn eval(&self, point: &[f64]) -> Result<f64>;
}

/// Shared, type-erased field handle.
pub type FieldRef = Arc<dyn Field>;

pub(crate) fn check_arity(expected: usize, point: &[f64]) -> Result<()> {
    if point.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: point.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct Constant {
    pub value: f64,
    pub arity: usize,
}

impl Field for Constant {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        check_arity(self.arity, point)?;
        Ok(self.value)
    }
}

pub fn constant(value: f64, arity: usize) -> FieldRef {
    Arc::new(Constant { value, arity })
}

/// `Σ c_i · f_i`.
#[derive(Clone)]
pub struct LinearCombination {
    terms: Vec<(f64, FieldRef)>,
    arity: usize,
}

impl LinearCombination {
    pub fn new(terms: Vec<(f64, FieldRef)>) -> Result<Self> {
        let arity = terms
            .first()
            .map(|(_, f)| f.arity())
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        if let Some((_, f)) = terms.iter().find(|(_, f)| f.arity() != arity) {
            return Err(Error::DimensionMismatch {
                expected: arity,
                found: f.arity(),
            });
        }
        Ok(Self { terms, arity })
    }
}

impl Field for LinearCombination {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (c, f) in &self.terms {
            if *c != 0.0 {
                acc += c * f.eval(point)?;
            }
        }
        Ok(acc)
    }
}

pub fn linear_combination(terms: Vec<(f64, FieldRef)>) -> Result<FieldRef> {
    Ok(Arc::new(LinearCombination::new(terms)?))
}

/// `f - g`
pub fn difference(f: FieldRef, g: FieldRef) -> Result<FieldRef> {
    linear_combination(alloc::vec![(1.0, f), (-1.0, g)])
}

/// Pointwise product `f · g`.
#[derive(Clone)]
pub struct Product {
    left: FieldRef,
    right: FieldRef,
}

impl Product {
    pub fn new(left: FieldRef, right: FieldRef) -> Result<Self> {
        if left.arity() != right.arity() {
            return Err(Error::DimensionMismatch {
                expected: left.arity(),
                found: right.arity(),
            });
        }
        Ok(Self { left, right })
    }
}

impl Field for Product {
    fn arity(&self) -> usize {
        self.left.arity()
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.left.eval(point)? * self.right.eval(point)?)
    }
}

/// Closure-backed field; handy for tests and for fields with closed forms.
pub struct FnField<F> {
    arity: usize,
    func: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(arity: usize, func: F) -> Self {
        Self { arity, func }
    }
}

impl<F> Field for FnField<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        check_arity(self.arity, point)?;
        let v = (self.func)(point);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }
}

pub fn from_fn<F>(arity: usize, func: F) -> FieldRef
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    Arc::new(FnField::new(arity, func))
}

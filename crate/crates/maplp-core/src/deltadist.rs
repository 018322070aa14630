//! Calculus of delta-distributions: differences of two probability
//! distributions over the assignment space. A function `q` is such a
//! difference exactly when it sums to zero and its L1 mass is at most 2;
//! the decomposition into the two distributions is unique exactly at L1
//! saturation (`sum |q| = 2`), where the positive and negative parts have
//! disjoint supports.

use thiserror::Error;

use crate::orthomarginal::DenseFunction;
use crate::scalar::{scalar_pow, tol, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeltaError {
    #[error("function is not a delta-distribution (sum {sum}, l1 mass {l1})")]
    NotDelta { sum: String, l1: String },
    #[error("function must have zero sum, got {0}")]
    NonzeroSum(String),
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("dimension mismatch: {0} vs {1} entries")]
    DimensionMismatch(usize, usize),
}

fn sum_is_zero<T: Scalar>(sum: &T, l1: &T) -> bool {
    if T::EXACT {
        sum.is_zero()
    } else {
        sum.to_f64().abs() <= tol::DELTA_SUM_REL * (1.0 + l1.to_f64())
    }
}

fn l1_within_cap<T: Scalar>(l1: &T) -> bool {
    if T::EXACT {
        *l1 <= T::from_int(2)
    } else {
        l1.to_f64() <= 2.0 + tol::DELTA_SATURATION_ABS
    }
}

fn l1_saturated<T: Scalar>(l1: &T) -> bool {
    if T::EXACT {
        *l1 == T::from_int(2)
    } else {
        (l1.to_f64() - 2.0).abs() <= tol::DELTA_SATURATION_ABS
    }
}

/// True iff `q` is the difference of two distributions: zero sum and L1
/// mass at most 2.
pub fn is_delta<T: Scalar>(q: &DenseFunction<T>) -> bool {
    let l1 = q.l1_norm();
    sum_is_zero(&q.total(), &l1) && l1_within_cap(&l1)
}

/// A decomposition `q = p - p_prime` into two distributions. `unique` is
/// set when the L1 mass saturates the cap, which forces disjoint supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub p: DenseFunction<T>,
    pub p_prime: DenseFunction<T>,
    pub unique: bool,
}

/// Splits a delta-distribution into two distributions. At saturation the
/// split is the positive/negative part pair and is unique; below
/// saturation the constant-shift completion is returned (each entry padded
/// by `tau * (1 - |q(x)|)` with `tau = (1 - l1/2) / (L^n - l1)`), which is
/// one point of the solution family, chosen for determinism.
pub fn decompose<T: Scalar>(q: &DenseFunction<T>) -> Result<Decomposition<T>, DeltaError> {
    let sum = q.total();
    let l1 = q.l1_norm();
    if !(sum_is_zero(&sum, &l1) && l1_within_cap(&l1)) {
        return Err(DeltaError::NotDelta { sum: sum.to_string(), l1: l1.to_string() });
    }
    let pos = q.map(|v| if v.is_positive() { v.clone() } else { T::zero() });
    let neg = q.map(|v| if v.is_negative() { -v.clone() } else { T::zero() });
    if l1_saturated(&l1) {
        return Ok(Decomposition { p: pos, p_prime: neg, unique: true });
    }
    let domain = scalar_pow::<T>(q.num_labels(), q.num_sites());
    let tau = (T::one().sub_ref(&l1.div_ref(&T::from_int(2)))).div_ref(&domain.sub_ref(&l1));
    let pad = q.map(|v| tau.mul_ref(&T::one().sub_ref(&v.abs())));
    Ok(Decomposition {
        p: pos.zip(&pad, |a, b| a.add_ref(b)),
        p_prime: neg.zip(&pad, |a, b| a.add_ref(b)),
        unique: false,
    })
}

/// Largest scale that keeps a zero-sum function inside the delta cap:
/// `lambda = 2 / sum |q|`; every scale in `[0, lambda]` yields a valid
/// delta-distribution.
pub fn delta_scale_bound<T: Scalar>(q: &DenseFunction<T>) -> Result<T, DeltaError> {
    let sum = q.total();
    let l1 = q.l1_norm();
    if l1.is_zero() {
        return Err(DeltaError::ZeroFunction);
    }
    if !sum_is_zero(&sum, &l1) {
        return Err(DeltaError::NonzeroSum(sum.to_string()));
    }
    Ok(T::from_int(2).div_ref(&l1))
}

/// `sum_x f(x) q(x)`.
pub fn delta_expectation<T: Scalar>(
    f: &DenseFunction<T>,
    q: &DenseFunction<T>,
) -> Result<T, DeltaError> {
    if f.len() != q.len() || f.num_labels() != q.num_labels() {
        return Err(DeltaError::DimensionMismatch(f.len(), q.len()));
    }
    Ok(f.inner(q))
}

//! Truncated summation of the geometric-type series used throughout the crate.
//!
//! Every infinite sum here runs over one or two index branches (`n = 0, 1, ...`
//! and `n = -1, -2, ...`). A branch is summed until the first omitted term is
//! past its peak and small relative to the partial sum; the geometric ratio of
//! the last two terms is used to account for the omitted tail.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on the number of terms of a single branch.
pub const MAX_TERMS: usize = 1_000_000;

/// Terms always summed before the stopping rule is consulted.
const MIN_TERMS: usize = 3;

/// An arithmetic run of indices `start, start + step, start + 2 step, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub start: i64,
    pub step: i64,
}

impl Branch {
    pub const fn up(start: i64) -> Self {
        Self { start, step: 1 }
    }

    pub const fn down(start: i64) -> Self {
        Self { start, step: -1 }
    }
}

/// Result of summing one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summed<T> {
    pub value: T,
    /// Number of terms included.
    pub terms: usize,
    /// Last index included (or `start - step` when no term was included).
    pub last: i64,
}

/// Stopping state for one nonnegative magnitude sequence.
#[derive(Debug, Clone, Copy)]
struct Tail {
    partial: f64,
    prev: f64,
}

impl Tail {
    fn new() -> Self {
        Self {
            partial: 0.0,
            prev: f64::INFINITY,
        }
    }

    /// Whether `t` (the next magnitude) and everything after it can be dropped.
    fn negligible(&self, t: f64, tol: f64) -> bool {
        if t > self.prev {
            return false;
        }
        let q = if self.prev > 0.0 { t / self.prev } else { 0.0 };
        if q >= 1.0 {
            return t == 0.0 && self.partial == 0.0;
        }
        t / (1.0 - q) <= tol * self.partial
    }

    fn push(&mut self, t: f64) {
        self.partial += t;
        self.prev = t;
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive (tol = {tol})")));
    }
    Ok(())
}

/// Sum `K` nonnegative sequences sharing one index branch; stops when all `K`
/// are negligible at the same index.
pub fn sum_nonneg<const K: usize>(
    branch: Branch,
    tol: f64,
    mut term: impl FnMut(i64) -> [f64; K],
) -> Result<Summed<[f64; K]>> {
    check_tol(tol)?;
    let mut tails = [Tail::new(); K];
    let mut n = branch.start;
    for count in 0..MAX_TERMS {
        let t = term(n);
        if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Numerical(format!(
                "series term at index {n} is not a finite nonnegative number"
            )));
        }
        if count >= MIN_TERMS && tails.iter().zip(&t).all(|(tail, &x)| tail.negligible(x, tol)) {
            return Ok(Summed {
                value: tails.map(|tail| tail.partial),
                terms: count,
                last: n - branch.step,
            });
        }
        for (tail, &x) in tails.iter_mut().zip(&t) {
            tail.push(x);
        }
        n += branch.step;
    }
    Err(Error::Resolution { terms: MAX_TERMS })
}

/// Sum a complex series whose `n`-th term comes with an upper bound on its
/// modulus; truncation is decided on the bounds.
pub fn sum_complex(
    branch: Branch,
    tol: f64,
    mut term: impl FnMut(i64) -> (Complex64, f64),
) -> Result<Summed<Complex64>> {
    check_tol(tol)?;
    let mut tail = Tail::new();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut n = branch.start;
    for count in 0..MAX_TERMS {
        let (value, bound) = term(n);
        if !(value.re.is_finite() && value.im.is_finite() && bound.is_finite()) {
            return Err(Error::Numerical(format!("series term at index {n} is not finite")));
        }
        if count >= MIN_TERMS && tail.negligible(bound, tol) {
            return Ok(Summed {
                value: acc,
                terms: count,
                last: n - branch.step,
            });
        }
        acc += value;
        tail.push(bound);
        n += branch.step;
    }
    Err(Error::Resolution { terms: MAX_TERMS })
}

//! Chebyshev polynomials `T_n` at complex arguments by the three-term recurrence.

use num_complex::Complex64;

use crate::geometry::exterior_root;

/// Iterator over `T_0(x), T_1(x), T_2(x), ...`.
#[derive(Debug, Clone)]
pub struct ChebyshevSeq {
    x: Complex64,
    prev: Complex64,
    cur: Complex64,
    started: bool,
}

impl ChebyshevSeq {
    pub fn new(x: Complex64) -> Self {
        Self {
            x,
            prev: Complex64::new(1.0, 0.0),
            cur: x,
            started: false,
        }
    }
}

impl Iterator for ChebyshevSeq {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        if !self.started {
            self.started = true;
            return Some(self.prev);
        }
        let out = self.cur;
        let next = 2.0 * self.x * self.cur - self.prev;
        self.prev = self.cur;
        self.cur = next;
        Some(out)
    }
}

/// `T_n(x)`.
pub fn chebyshev_t(n: usize, x: Complex64) -> Complex64 {
    ChebyshevSeq::new(x).nth(n).expect("the sequence is infinite")
}

/// Upper bound `(|w|^n + |w|^-n) / 2 >= |T_n(x)|` with `x = J(w)`, `|w| >= 1`.
pub fn chebyshev_envelope(n: usize, x: Complex64) -> f64 {
    let m = exterior_root(x).norm();
    let k = n as i32;
    0.5 * (m.powi(k) + m.powi(-k))
}

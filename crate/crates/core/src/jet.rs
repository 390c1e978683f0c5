//! Truncated Taylor arithmetic.
//!
//! A `Jet<N>` holds the first `N` Taylor coefficients `c[k] = y^(k)(x0) / k!`
//! of a function about some expansion point. Products and quotients are the
//! Cauchy convolutions; coefficient `k` of a result depends only on
//! coefficients `0..=k` of the operands, which is what the Taylor-series ODE
//! recursion in [`crate::solver`] relies on.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Self { c }
    }

    /// Builds a jet from derivative values `d[k] = y^(k)`; missing orders are zero.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut c = [0.0; N];
        let mut fact = 1.0;
        for (k, slot) in c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            if let Some(v) = d.get(k) {
                *slot = v / fact;
            }
        }
        Self { c }
    }

    /// Derivative of order `k` at the expansion point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    /// Jet of the derivative. The top coefficient becomes zero and is no longer meaningful.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N - 1 {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Self { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Self { c }
    }

    /// Evaluates the Taylor polynomial at offset `t` from the expansion point.
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
    }

    /// Re-expands the polynomial about `x0 + t`.
    pub fn shifted(&self, t: f64) -> Self {
        let mut c = self.c;
        // repeated synthetic division (Taylor shift)
        for i in 0..N {
            for k in (i..N - 1).rev() {
                c[k] += t * c[k + 1];
            }
        }
        Self { c }
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0) / *self
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Self { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let mut c = [0.0; N];
        let d0 = rhs.c[0];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * c[k - j];
            }
            c[k] = acc / d0;
        }
        Self { c }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        rhs.scale(self)
    }
}

/// Dense polynomial / truncated power series in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn eval_derivative(&self, x: f64, k: usize) -> f64 {
        let mut d = self.clone();
        for _ in 0..k {
            d = d.derivative();
        }
        d.eval(x)
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::new(vec![0.0]);
        }
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| k as f64 * v)
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.c.iter().map(|v| v * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return Self::new(vec![]);
        }
        let mut c = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Drops the lowest `n` coefficients, i.e. divides by `x^n` assuming they vanish.
    pub fn shift_down(&self, n: usize) -> Self {
        Self::new(self.c.iter().skip(n).copied().collect())
    }

    pub fn truncated(&self, deg: usize) -> Self {
        Self::new(self.c.iter().take(deg + 1).copied().collect())
    }

    /// Power-series quotient `self / o` through degree `deg`; `o(0)` must be nonzero.
    pub fn div_series(&self, o: &Self, deg: usize) -> Self {
        let d0 = o.coeff(0);
        let mut q = vec![0.0; deg + 1];
        for k in 0..=deg {
            let mut acc = self.coeff(k);
            for j in 1..=k {
                acc -= o.coeff(j) * q[k - j];
            }
            q[k] = acc / d0;
        }
        Self::new(q)
    }

    /// Value of the highest-degree nonzero term at `x`.
    pub fn last_term(&self, x: f64) -> f64 {
        self.c
            .iter()
            .enumerate()
            .rev()
            .find(|(_, v)| **v != 0.0)
            .map(|(k, v)| v * x.powi(k as i32))
            .unwrap_or(0.0)
    }
}

//! Power series of the regular solution at the origin.
//!
//! The soliton system
//!
//! ```text
//! φ φ'' + φ'^2 - 1 + f' φ' φ = 0
//! φ f'' + 2 φ'' = 0
//! ```
//!
//! is singular at `r = 0`. The smooth solution has `φ` and `f'` odd in `r`
//! with `φ'(0) = 1`; the single free parameter `f''(0)` is fixed to `1/3`,
//! which makes `Ric(0) = g/3` and `R(0) = 1`. Higher coefficients follow
//! order by order from a 2x2 linear solve.

use crate::poly::Poly;

/// Coefficient of `r` in `f'`, i.e. `f''(0)`.
pub const DF_LINEAR: f64 = 1.0 / 3.0;
/// Coefficient of `r^3` in `φ`.
pub const PHI_CUBIC: f64 = -1.0 / 36.0;

/// Number of odd orders solved for beyond the leading ones.
const DEFAULT_ORDERS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct OriginSeries {
    /// Taylor coefficients of `φ` in `r`.
    pub phi: Poly,
    /// Taylor coefficients of `f'` in `r`.
    pub df: Poly,
    pub lambda: Poly,
    pub mu: Poly,
    pub scalar: Poly,
}

impl OriginSeries {
    pub fn new() -> Self {
        Self::with_orders(DEFAULT_ORDERS)
    }

    /// Series with `φ` through `r^(2m+1)` and `f'` through `r^(2m-1)`.
    pub fn with_orders(m_max: usize) -> Self {
        let m_max = m_max.max(1);
        let deg = 2 * m_max + 1;
        let mut a = vec![0.0; deg + 1];
        let mut b = vec![0.0; deg + 1];
        a[1] = 1.0;
        a[3] = PHI_CUBIC;
        b[1] = DF_LINEAR;
        for m in 2..=m_max {
            let ia = 2 * m + 1;
            let ib = 2 * m - 1;
            a[ia] = 0.0;
            b[ib] = 0.0;
            let (ra, rb) = residuals(&a, &b, m);
            // (2m+1)(2m+2) a + b = -ra
            // 4m(2m+1) a + (2m-1) b = -rb
            let m_f = m as f64;
            let a11 = (2.0 * m_f + 1.0) * (2.0 * m_f + 2.0);
            let a12 = 1.0;
            let a21 = 4.0 * m_f * (2.0 * m_f + 1.0);
            let a22 = 2.0 * m_f - 1.0;
            let det = a11 * a22 - a12 * a21;
            a[ia] = (-ra * a22 + rb * a12) / det;
            b[ib] = (-rb * a11 + ra * a21) / det;
        }
        // f' only determined through r^(2m-1)
        b.truncate(2 * m_max);
        let phi = Poly::new(a);
        let df = Poly::new(b);
        let (lambda, mu) = curvature_series(&phi, 2 * m_max - 2);
        let scalar = lambda.add(&mu.scale(2.0));
        Self {
            phi,
            df,
            lambda,
            mu,
            scalar,
        }
    }

    /// Magnitude of the highest retained terms at radius `r`, used as a
    /// truncation estimate.
    pub fn remainder_estimate(&self, r: f64) -> f64 {
        let last_phi = self.phi.last_term(r).abs();
        let last_df = self.df.last_term(r).abs();
        last_phi.max(last_df)
    }

    /// Series through `r^3` (`φ`) and `r` (`f'`): the classical seed.
    pub fn leading(&self) -> (Poly, Poly) {
        (
            Poly::new(self.phi.coeffs()[..4.min(self.phi.coeffs().len())].to_vec()),
            Poly::new(self.df.coeffs()[..2.min(self.df.coeffs().len())].to_vec()),
        )
    }
}

impl Default for OriginSeries {
    fn default() -> Self {
        Self::new()
    }
}

/// Coefficient of `r^(2m)` in the first equation and of `r^(2m-1)` in the second.
fn residuals(a: &[f64], b: &[f64], m: usize) -> (f64, f64) {
    let phi = Poly::new(a.to_vec());
    let df = Poly::new(b.to_vec());
    let dphi = phi.derivative();
    let ddphi = dphi.derivative();
    let ddf = df.derivative();
    let eq_a = phi
        .mul(&ddphi)
        .add(&dphi.mul(&dphi))
        .add(&df.mul(&dphi).mul(&phi))
        .add(&Poly::new(vec![-1.0]));
    let eq_b = phi.mul(&ddf).add(&ddphi.scale(2.0));
    (eq_a.coeff(2 * m), eq_b.coeff(2 * m - 1))
}

/// Even series of the Ricci eigenvalues `λ = -2φ''/φ`, `μ = -φ''/φ + (1-φ'^2)/φ^2`,
/// obtained by exact division by powers of `r` so no cancellation occurs.
fn curvature_series(phi: &Poly, deg: usize) -> (Poly, Poly) {
    let dphi = phi.derivative();
    let ddphi = dphi.derivative();
    let phi_over_r = phi.shift_down(1);
    let ddphi_over_r = ddphi.shift_down(1);
    let one_minus = Poly::new(vec![1.0]).sub(&dphi.mul(&dphi));
    let one_minus_over_r2 = one_minus.shift_down(2);
    let ratio = ddphi_over_r.div_series(&phi_over_r, deg);
    let lambda = ratio.scale(-2.0).truncated(deg);
    let mu = ratio
        .scale(-1.0)
        .add(&one_minus_over_r2.div_series(&phi_over_r.mul(&phi_over_r), deg))
        .truncated(deg);
    (lambda, mu)
}

//! Pointwise operators for `g = dr^2 + φ(r)^2 g_{S^2}` with a radial potential `f(r)`.
//!
//! In the orthonormal frame `{e_r, e_1, e_2}` the Ricci tensor is
//! `diag(λ, μ, μ)` with `λ = -2φ''/φ` and `μ = -φ''/φ + (1 - φ'^2)/φ^2`; the
//! Hessian of `f` is `diag(f'', f'φ'/φ, f'φ'/φ)`. Gradients of radial
//! functions are radial, so every inner product reduces to a product of
//! radial components: `|Ric|^2 = λ^2 + 2μ^2`, `⟨∇f, ∇R⟩ = f'R'`.
//!
//! All operators accept a [`SolitonProfile`] and evaluate it through
//! [`SolitonProfile::local`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profile::{CurvatureSample, SolitonProfile};
use crate::quadrature::{self, QuadOptions};
use crate::series::OriginSeries;

/// Derivative data of the profile and its curvature at one radius.
///
/// `phi[k]` is `φ^(k)` for `k <= 5`, `df[k]` is `(f')^(k)` for `k <= 2`, and
/// `lambda`, `mu`, `scalar` hold derivatives of orders `0..=3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub r: f64,
    pub phi: [f64; 6],
    pub df: [f64; 3],
    pub lambda: [f64; 4],
    pub mu: [f64; 4],
    pub scalar: [f64; 4],
}

impl LocalGeometry {
    pub fn from_derivatives(r: f64, phi: [f64; 6], df: [f64; 3]) -> Result<Self> {
        if !(phi[0] > 0.0) {
            return Err(Error::Domain(format!("warp factor phi = {} is not positive at r = {r}", phi[0])));
        }
        let p = Jet::<6>::from_derivatives(&phi);
        let dp = p.differentiate();
        let ddp = dp.differentiate();
        let ratio = ddp / p;
        let lambda_j = ratio.scale(-2.0);
        let mu_j = -ratio + (1.0 - dp * dp) / (p * p);
        let scalar_j = lambda_j + mu_j.scale(2.0);
        let d = |j: &Jet<6>| -> [f64; 4] { std::array::from_fn(|k| j.derivative_at(k)) };
        Ok(Self {
            r,
            phi,
            df,
            lambda: d(&lambda_j),
            mu: d(&mu_j),
            scalar: d(&scalar_j),
        })
    }

    pub fn from_series(s: &OriginSeries, r: f64) -> Self {
        Self {
            r,
            phi: std::array::from_fn(|k| s.phi.eval_derivative(r, k)),
            df: std::array::from_fn(|k| s.df.eval_derivative(r, k)),
            lambda: std::array::from_fn(|k| s.lambda.eval_derivative(r, k)),
            mu: std::array::from_fn(|k| s.mu.eval_derivative(r, k)),
            scalar: std::array::from_fn(|k| s.scalar.eval_derivative(r, k)),
        }
    }

    pub fn curvature(&self) -> CurvatureSample {
        CurvatureSample {
            r: self.r,
            lambda: self.lambda[0],
            mu: self.mu[0],
            scalar: self.lambda[0] + 2.0 * self.mu[0],
            d_scalar: self.scalar[1],
        }
    }

    /// `φ'/φ`, the mean-curvature factor of the `r`-spheres (halved).
    pub fn log_dphi(&self) -> f64 {
        self.phi[1] / self.phi[0]
    }

    /// `ΔR = R'' + 2(φ'/φ)R'`.
    pub fn laplacian_scalar(&self) -> f64 {
        self.scalar[2] + 2.0 * self.log_dphi() * self.scalar[1]
    }

    /// `Δf = f'' + 2(φ'/φ)f'`.
    pub fn laplacian_potential(&self) -> f64 {
        self.df[1] + 2.0 * self.log_dphi() * self.df[0]
    }

    pub fn ricci_norm_sq(&self) -> f64 {
        self.lambda[0].powi(2) + 2.0 * self.mu[0].powi(2)
    }

    /// `β = μ f' - (R' + 2R f')/4`; the only independent component of `B`.
    pub fn beta(&self) -> f64 {
        let (mu, df, r0, r1) = (self.mu[0], self.df[0], self.scalar[0], self.scalar[1]);
        mu * df - 0.25 * (r1 + 2.0 * r0 * df)
    }

    pub fn b_norm_sq(&self) -> f64 {
        4.0 * self.beta().powi(2)
    }
}

/// A radial scalar function: returns `(h, h', h'')` at `r`.
pub trait RadialField {
    fn jet(&self, r: f64) -> Result<[f64; 3]>;
}

impl<F> RadialField for F
where
    F: Fn(f64) -> Result<[f64; 3]>,
{
    fn jet(&self, r: f64) -> Result<[f64; 3]> {
        self(r)
    }
}

/// A scalar function of `s` with its first derivative, e.g. ψ.
pub trait PsiFunction {
    fn value(&self, s: f64) -> Result<f64>;
    fn derivative(&self, s: f64) -> Result<f64>;
}

/// `ψ̃(s)` given as a closure pair.
pub struct TrialPsi<F, G> {
    pub name: String,
    pub value: F,
    pub derivative: G,
}

impl<F, G> PsiFunction for TrialPsi<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    fn value(&self, s: f64) -> Result<f64> {
        Ok((self.value)(s))
    }
    fn derivative(&self, s: f64) -> Result<f64> {
        Ok((self.derivative)(s))
    }
}

/// Components `B[i][j][k]` in the orthonormal frame `{e_r, e_1, e_2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BTensorComponents(pub [[[f64; 3]; 3]; 3]);

impl BTensorComponents {
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().flatten().flatten().map(|v| v * v).sum()
    }
}

pub fn curvature(profile: &SolitonProfile, r: f64) -> Result<CurvatureSample> {
    Ok(profile.local(r)?.curvature())
}

pub fn b_scalar(profile: &SolitonProfile, r: f64) -> Result<f64> {
    Ok(profile.local(r)?.beta())
}

/// The three-index tensor assembled term by term from its definition
/// with `Ric = diag(λ, μ, μ)`, `∂f = (f', 0, 0)`, `∂R = (R', 0, 0)` and `g = I`.
pub fn b_tensor_full(sample: &CurvatureSample, f_prime: f64) -> BTensorComponents {
    let ric = [
        [sample.lambda, 0.0, 0.0],
        [0.0, sample.mu, 0.0],
        [0.0, 0.0, sample.mu],
    ];
    let df = [f_prime, 0.0, 0.0];
    let dr = [sample.d_scalar, 0.0, 0.0];
    let r = sample.scalar;
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut b = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                b[i][j][k] = ric[i][k] * df[j] - ric[i][j] * df[k]
                    - 0.25 * ((dr[j] + 2.0 * r * df[j]) * delta(i, k) - (dr[k] + 2.0 * r * df[k]) * delta(i, j));
            }
        }
    }
    BTensorComponents(b)
}

/// Radial component of `X = ∇R + ψ(R)∇f`.
pub fn x_radial(profile: &SolitonProfile, psi: &dyn PsiFunction, r: f64) -> Result<f64> {
    let g = profile.local(r)?;
    Ok(g.scalar[1] + psi.value(g.scalar[0])? * g.df[0])
}

/// `div(w ∂_r) = w' + 2(φ'/φ) w`.
pub fn divergence_radial(profile: &SolitonProfile, field: &dyn RadialField, r: f64) -> Result<f64> {
    let g = profile.local(r)?;
    let [w, dw, _] = field.jet(r)?;
    Ok(dw + 2.0 * g.log_dphi() * w)
}

/// `Δh = h'' + 2(φ'/φ) h'`.
pub fn laplacian_radial(profile: &SolitonProfile, scalar: &dyn RadialField, r: f64) -> Result<f64> {
    let g = profile.local(r)?;
    let [_, dh, ddh] = scalar.jet(r)?;
    Ok(ddh + 2.0 * g.log_dphi() * dh)
}

/// Outward flux of `w ∂_r` through the sphere of radius `r`: `4π φ^2 w`.
pub fn sphere_flux(profile: &SolitonProfile, field: &dyn RadialField, r: f64) -> Result<f64> {
    let phi = profile.eval(r)?.phi;
    let [w, _, _] = field.jet(r)?;
    Ok(4.0 * PI * phi * phi * w)
}

/// `∫_a^b 4π φ(r)^2 h(r) dr` by adaptive quadrature at relative tolerance 1e-10.
pub fn ball_integral(profile: &SolitonProfile, scalar: &dyn RadialField, a: f64, b: f64) -> Result<f64> {
    ball_integral_of(profile, |r| Ok(scalar.jet(r)?[0]), a, b)
}

/// [`ball_integral`] for a plain integrand closure.
pub fn ball_integral_of<F>(profile: &SolitonProfile, h: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    ball_integral_with(profile, h, a, b, QuadOptions { rel_tol: 1e-10, abs_tol: 1e-30, max_intervals: 4000 })
}

/// [`ball_integral_of`] with explicit quadrature options.
pub fn ball_integral_with<F>(profile: &SolitonProfile, h: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::Domain(format!("ball integral needs a < b, got [{a}, {b}]")));
    }
    let (lo, hi) = profile.domain();
    if a < lo || b > hi {
        return Err(Error::Range { value: if a < lo { a } else { b }, lo, hi });
    }
    let res = quadrature::integrate(
        |r| {
            let phi = profile.eval(r)?.phi;
            Ok(4.0 * PI * phi * phi * h(r)?)
        },
        a,
        b,
        opts,
    )?;
    Ok(res.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialGrid;

    /// Samples of `φ` on `[lo, hi]` with analytic derivatives; not a soliton.
    pub(crate) fn analytic_profile<P, Q>(lo: f64, hi: f64, n: usize, phi: P, df: Q) -> SolitonProfile
    where
        P: Fn(f64) -> [f64; 3],
        Q: Fn(f64) -> [f64; 2],
    {
        let grid = RadialGrid::uniform(lo, hi, n).unwrap();
        let nodes = grid.nodes().to_vec();
        let p: Vec<[f64; 3]> = nodes.iter().map(|&r| phi(r)).collect();
        let q: Vec<[f64; 2]> = nodes.iter().map(|&r| df(r)).collect();
        SolitonProfile::from_samples(
            grid,
            p.iter().map(|v| v[0]).collect(),
            p.iter().map(|v| v[1]).collect(),
            p.iter().map(|v| v[2]).collect(),
            q.iter().map(|v| v[0]).collect(),
            q.iter().map(|v| v[1]).collect(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn round_sphere_slice() {
        let p = analytic_profile(0.5, 2.5, 401, |r| [r.sin(), r.cos(), -r.sin()], |_| [0.0, 0.0]);
        let c = curvature(&p, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((c.lambda - 2.0).abs() < 1e-9, "{c:?}");
        assert!((c.mu - 2.0).abs() < 1e-9);
        assert!((c.scalar - 6.0).abs() < 1e-9);
        assert!(c.d_scalar.abs() < 1e-6);
    }

    #[test]
    fn flat_space_and_cylinder() {
        let flat = analytic_profile(0.5, 2.0, 64, |r| [r, 1.0, 0.0], |_| [0.0, 0.0]);
        let c = curvature(&flat, 1.0).unwrap();
        assert!(c.lambda.abs() < 1e-12 && c.mu.abs() < 1e-12 && c.scalar.abs() < 1e-12);

        let radius = 1.7;
        let cyl = analytic_profile(0.5, 2.0, 64, |_| [radius, 0.0, 0.0], |_| [1.0, 0.0]);
        let c = curvature(&cyl, 1.2).unwrap();
        assert!(c.lambda.abs() < 1e-12);
        assert!((c.mu - 1.0 / (radius * radius)).abs() < 1e-12);
        assert!((c.scalar - 2.0 / (radius * radius)).abs() < 1e-12);
        // β = 1/c^2 - (0 + 2 (2/c^2))/4 = 0
        assert!(b_scalar(&cyl, 1.2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nonpositive_warp_factor_is_a_domain_error() {
        let p = analytic_profile(0.5, 2.0, 64, |r| [r, 1.0, 0.0], |_| [0.0, 0.0]);
        let bad = p.with_phi_at(10, -1.0);
        let r = bad.grid().nodes()[10];
        assert!(matches!(curvature(&bad, r), Err(Error::Domain(_))));
    }

    #[test]
    fn b_tensor_vanishes_without_gradients() {
        let s = CurvatureSample { r: 1.0, lambda: 0.0, mu: 0.0, scalar: 3.7, d_scalar: 0.0 };
        assert!(b_tensor_full(&s, 0.0).0.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn flat_divergence_laplacian_and_flux() {
        let flat = analytic_profile(0.2, 3.0, 64, |r| [r, 1.0, 0.0], |_| [0.0, 0.0]);
        let position = |r: f64| Ok([r, 1.0, 0.0]);
        assert!((divergence_radial(&flat, &position, 1.3).unwrap() - 3.0).abs() < 1e-12);
        let zero = |_r: f64| Ok([0.0, 0.0, 0.0]);
        assert_eq!(divergence_radial(&flat, &zero, 1.3).unwrap(), 0.0);
        let sq = |r: f64| Ok([r * r, 2.0 * r, 2.0]);
        assert!((laplacian_radial(&flat, &sq, 0.9).unwrap() - 6.0).abs() < 1e-12);
        let c = |_r: f64| Ok([5.0, 0.0, 0.0]);
        assert_eq!(laplacian_radial(&flat, &c, 0.9).unwrap(), 0.0);
        let one = |_r: f64| Ok([1.0, 0.0, 0.0]);
        assert!((sphere_flux(&flat, &one, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert_eq!(sphere_flux(&flat, &zero, 1.0).unwrap(), 0.0);
        assert_eq!(ball_integral(&flat, &zero, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ball_integral_rejects_bad_limits() {
        let flat = analytic_profile(0.2, 3.0, 64, |r| [r, 1.0, 0.0], |_| [0.0, 0.0]);
        let one = |_r: f64| Ok([1.0, 0.0, 0.0]);
        assert!(matches!(ball_integral(&flat, &one, 1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(ball_integral(&flat, &one, 0.1, 0.5), Err(Error::Range { .. })));
    }
}

//! Residuals of the curvature identities on a radial profile.
//!
//! Every identity is rewritten as `left - right` and evaluated pointwise at
//! the profile nodes whose scalar curvature lies in a configured window.
//! With `X = ∇R + ψ(R)∇f` radial, `X_r = R' + ψ(R) f'` and
//! `X_r' = R'' + ψ'(R) R' f' + ψ(R) f''`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{self, LocalGeometry, PsiFunction, RadialField};
use crate::profile::{RadialGrid, ResidualStats, SolitonProfile};
use crate::psi::{self, PsiProfile};
use crate::quadrature::QuadOptions;
use crate::system;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityId {
    EqGradR,
    EqLapR,
    EqBNorm,
    EqGeneral,
    EqOde,
    EqSimplified,
    EqFinal,
    EqOde2,
    FluxDecay,
    DivInequality,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::EqGradR,
        IdentityId::EqLapR,
        IdentityId::EqBNorm,
        IdentityId::EqGeneral,
        IdentityId::EqOde,
        IdentityId::EqSimplified,
        IdentityId::EqFinal,
        IdentityId::EqOde2,
        IdentityId::FluxDecay,
        IdentityId::DivInequality,
    ];

    /// The pointwise identities evaluated by [`identity_residual`].
    pub const POINTWISE: [IdentityId; 8] = [
        IdentityId::EqGradR,
        IdentityId::EqLapR,
        IdentityId::EqBNorm,
        IdentityId::EqGeneral,
        IdentityId::EqOde,
        IdentityId::EqSimplified,
        IdentityId::EqFinal,
        IdentityId::EqOde2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::EqGradR => "EQ_GRAD_R",
            IdentityId::EqLapR => "EQ_LAP_R",
            IdentityId::EqBNorm => "EQ_B_NORM",
            IdentityId::EqGeneral => "EQ_GENERAL",
            IdentityId::EqOde => "EQ_ODE",
            IdentityId::EqSimplified => "EQ_SIMPLIFIED",
            IdentityId::EqFinal => "EQ_FINAL",
            IdentityId::EqOde2 => "EQ_ODE2",
            IdentityId::FluxDecay => "FLUX_DECAY",
            IdentityId::DivInequality => "DIV_INEQUALITY",
        }
    }

    fn is_ode(self) -> bool {
        matches!(self, IdentityId::EqOde | IdentityId::EqOde2)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown identity id {s:?}")))
    }
}

/// ψ data handed to [`identity_residual`].
#[derive(Clone, Copy)]
pub enum PsiInput<'a> {
    None,
    /// A caller-supplied `ψ̃` with derivative.
    Trial(&'a dyn PsiFunction),
    /// The extracted ψ together with `u`.
    Extracted(&'a PsiProfile),
}

impl<'a> PsiInput<'a> {
    fn function(&self) -> Option<&'a dyn PsiFunction> {
        match *self {
            PsiInput::None => None,
            PsiInput::Trial(p) => Some(p),
            PsiInput::Extracted(p) => Some(p),
        }
    }
}

/// Closed interval of `s = R` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn contains(&self, s: f64) -> bool {
        s >= self.lo && s <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    /// Window for the curvature identities.
    pub window: Window,
    /// Window for the two ψ equations.
    pub ode_window: Window,
    pub threshold: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            window: Window { lo: 0.02, hi: 0.98 },
            ode_window: Window { lo: 0.05, hi: 0.95 },
            threshold: 1e-6,
        }
    }
}

/// `(X_r, X_r')` for the field built from `psi`.
pub fn x_jet(g: &LocalGeometry, psi: &dyn PsiFunction) -> Result<(f64, f64)> {
    let s = g.scalar[0];
    let (p, dp) = (psi.value(s)?, psi.derivative(s)?);
    let x = g.scalar[1] + p * g.df[0];
    let dx = g.scalar[2] + dp * g.scalar[1] * g.df[0] + p * g.df[1];
    Ok((x, dx))
}

/// `div X = X_r' + 2(φ'/φ) X_r`.
fn div_x(g: &LocalGeometry, x: f64, dx: f64) -> f64 {
    dx + 2.0 * g.log_dphi() * x
}

fn eq_grad_r(g: &LocalGeometry) -> f64 {
    g.scalar[1] + 2.0 * g.lambda[0] * g.df[0]
}

fn eq_lap_r(g: &LocalGeometry) -> f64 {
    g.laplacian_scalar() + 2.0 * g.ricci_norm_sq() + g.df[0] * g.scalar[1]
}

fn eq_b_norm(g: &LocalGeometry) -> f64 {
    let (r, dr) = (g.scalar[0], g.scalar[1]);
    let rhs = -(1.0 - r) * g.laplacian_scalar() - 0.75 * dr * dr - g.df[0] * dr - r * r * (1.0 - r);
    g.b_norm_sq() - rhs
}

fn eq_general(g: &LocalGeometry, psi: &dyn PsiFunction) -> Result<f64> {
    let (r, dr, df) = (g.scalar[0], g.scalar[1], g.df[0]);
    let (p, dp) = (psi.value(r)?, psi.derivative(r)?);
    let (x, dx) = x_jet(g, psi)?;
    let lhs = (1.0 - r) * div_x(g, x, dx);
    let rhs = -g.b_norm_sq() - 0.75 * (dr - p * df) * x - df * x + (1.0 - r) * dp * df * x - 0.75 * (1.0 - r) * p * p
        + (1.0 - r) * p
        - r * r * (1.0 - r)
        + r * (1.0 - r) * p
        - (1.0 - r).powi(2) * p * dp;
    Ok(lhs - rhs)
}

fn eq_simplified(g: &LocalGeometry, psi: &dyn PsiFunction) -> Result<f64> {
    let (r, dr, df) = (g.scalar[0], g.scalar[1], g.df[0]);
    let (p, dp) = (psi.value(r)?, psi.derivative(r)?);
    let (x, dx) = x_jet(g, psi)?;
    let lhs = (1.0 - r) * div_x(g, x, dx);
    let rhs = -g.b_norm_sq() - 0.75 * (dr - p * df) * x - df * x + (1.0 - r) * dp * df * x;
    Ok(lhs - rhs)
}

/// `(1-R) e^{-u} div(e^u X) + |B|^2 + R(R-ψ)/ψ^2 |X|^2`, using
/// `e^{-u} div(e^u X) = div X + u'(R) R' X_r`.
fn eq_final(g: &LocalGeometry, psi: &PsiProfile) -> Result<f64> {
    let (r, dr) = (g.scalar[0], g.scalar[1]);
    let p = psi.eval_psi(r)?;
    let du = psi.eval_du(r)?;
    let (x, dx) = x_jet(g, psi)?;
    let lhs = (1.0 - r) * (div_x(g, x, dx) + du * dr * x);
    let rhs = -g.b_norm_sq() - r * (r - p) / (p * p) * x * x;
    Ok(lhs - rhs)
}

/// Nodes of `profile` with `R` in `window`, with their local geometry.
pub fn window_nodes(profile: &SolitonProfile, window: Window) -> Result<Vec<LocalGeometry>> {
    let mut out = Vec::new();
    for &r in profile.grid().nodes() {
        let g = profile.local(r)?;
        if window.contains(g.scalar[0]) {
            out.push(g);
        }
    }
    Ok(out)
}

/// `left - right` of identity `id` over the window nodes, summarized against `opts.threshold`.
pub fn identity_residual(
    profile: &SolitonProfile,
    psi: PsiInput<'_>,
    id: IdentityId,
    opts: &ResidualOptions,
) -> Result<ResidualStats> {
    let need_psi = || {
        psi.function()
            .ok_or_else(|| Error::Usage(format!("{id} needs a psi function")))
    };
    if id.is_ode() {
        return ode_residual_on(profile, psi, id, opts);
    }
    let samples: Vec<f64> = match id {
        IdentityId::FluxDecay | IdentityId::DivInequality => {
            return Err(Error::Usage(format!(
                "{id} is an integral check; use flux_functional or div_inequality_check"
            )))
        }
        IdentityId::EqGradR => window_nodes(profile, opts.window)?.iter().map(eq_grad_r).collect(),
        IdentityId::EqLapR => window_nodes(profile, opts.window)?.iter().map(eq_lap_r).collect(),
        IdentityId::EqBNorm => window_nodes(profile, opts.window)?.iter().map(eq_b_norm).collect(),
        IdentityId::EqGeneral => {
            let f = need_psi()?;
            window_nodes(profile, opts.window)?
                .iter()
                .map(|g| eq_general(g, f))
                .collect::<Result<_>>()?
        }
        IdentityId::EqSimplified => {
            let f = need_psi()?;
            window_nodes(profile, opts.window)?
                .iter()
                .map(|g| eq_simplified(g, f))
                .collect::<Result<_>>()?
        }
        IdentityId::EqFinal => {
            let PsiInput::Extracted(p) = psi else {
                return Err(Error::Usage(format!("{id} needs the extracted psi and u")));
            };
            window_nodes(profile, opts.window)?
                .iter()
                .map(|g| eq_final(g, p))
                .collect::<Result<_>>()?
        }
        IdentityId::EqOde | IdentityId::EqOde2 => unreachable!(),
    };
    Ok(ResidualStats::from_samples(id.name(), &samples, opts.threshold))
}

/// The ψ equations. An extracted ψ is checked at its own nodes; a trial
/// function at the `R` values of the profile nodes.
fn ode_residual_on(
    profile: &SolitonProfile,
    psi: PsiInput<'_>,
    id: IdentityId,
    opts: &ResidualOptions,
) -> Result<ResidualStats> {
    let w = opts.ode_window;
    let (e6, e9) = match psi {
        PsiInput::None => return Err(Error::Usage(format!("{id} needs a psi function"))),
        PsiInput::Extracted(p) => psi::psi_ode_residual(p, w.lo, w.hi, opts.threshold),
        PsiInput::Trial(f) => {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for g in window_nodes(profile, w)? {
                let s = g.scalar[0];
                let (v, dv) = (f.value(s)?, f.derivative(s)?);
                a.push(psi::ode_residual(s, v, dv));
                b.push(psi::rearranged_residual(s, v, dv) * v * v);
            }
            (
                ResidualStats::from_samples("EQ_ODE", &a, opts.threshold),
                ResidualStats::from_samples("EQ_ODE2", &b, opts.threshold),
            )
        }
    };
    Ok(if id == IdentityId::EqOde { e6 } else { e9 })
}

/// The weight `u` and its derivative as functions of `s`.
pub trait Weight {
    fn u(&self, s: f64) -> Result<f64>;
    fn du(&self, s: f64) -> Result<f64>;
}

impl Weight for PsiProfile {
    fn u(&self, s: f64) -> Result<f64> {
        self.eval_u(s)
    }
    fn du(&self, s: f64) -> Result<f64> {
        self.eval_du(s)
    }
}

/// The radial field `e^{u(R)} X_r` and its derivative.
pub struct WeightedX<'a> {
    pub profile: &'a SolitonProfile,
    pub psi: &'a dyn PsiFunction,
    pub weight: &'a dyn Weight,
}

impl RadialField for WeightedX<'_> {
    fn jet(&self, r: f64) -> Result<[f64; 3]> {
        let g = self.profile.local(r)?;
        let s = g.scalar[0];
        let (x, dx) = x_jet(&g, self.psi)?;
        let e = self.weight.u(s)?.exp();
        let du = self.weight.du(s)?;
        Ok([e * x, e * (du * g.scalar[1] * x + dx), f64::NAN])
    }
}

/// `∫_{∂B_r} e^{u(R)} ⟨X, ν⟩ = 4π φ(r)^2 e^{u(R(r))} X_r(r)` with the extracted ψ.
pub fn flux_functional(profile: &SolitonProfile, psi: &PsiProfile, r: f64) -> Result<f64> {
    weighted_flux(profile, psi, psi, r)
}

/// Flux of `e^{u(R)} X` for an arbitrary ψ̃ and weight.
pub fn weighted_flux(profile: &SolitonProfile, psi: &dyn PsiFunction, weight: &dyn Weight, r: f64) -> Result<f64> {
    let field = WeightedX { profile, psi, weight };
    geometry::sphere_flux(profile, &field, r)
}

/// Both sides of the flux inequality on the ball of radius `r`:
/// `lhs = ∫_{B_r} e^{u(R)} |B|^2/(1-R)`, `rhs = -flux_functional(r)`.
///
/// The integral is resolved to an absolute accuracy of `1e-15`, far below
/// any tolerance the inequality is checked at.
pub fn div_inequality_check(profile: &SolitonProfile, psi: &PsiProfile, r: f64) -> Result<(f64, f64)> {
    let lo = inner_radius(profile, psi)?;
    if r <= lo {
        return Err(Error::Range { value: r, lo, hi: profile.domain().1 });
    }
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-15, max_intervals: 4000 };
    let lhs = geometry::ball_integral_with(profile, |rho| inequality_integrand(profile, psi, rho), lo, r, opts)?;
    let rhs = -flux_functional(profile, psi, r)?;
    Ok((lhs, rhs))
}

/// `e^{u(R)} |B|^2 / (1-R)` at radius `r`.
pub fn inequality_integrand(profile: &SolitonProfile, psi: &PsiProfile, r: f64) -> Result<f64> {
    let g = profile.local(r)?;
    let s = g.scalar[0];
    if s >= 1.0 {
        // B vanishes where R = 1
        return Ok(0.0);
    }
    Ok(psi.eval_u(s)?.exp() * g.b_norm_sq() / (1.0 - s))
}

/// Radius below which `R` leaves the ψ domain; the integral starts there.
fn inner_radius(profile: &SolitonProfile, psi: &PsiProfile) -> Result<f64> {
    let (_, s_hi) = psi.domain();
    if s_hi >= 1.0 {
        return Ok(profile.domain().0);
    }
    let finder = psi::LevelFinder::new(profile)?;
    finder.radius_of(s_hi)
}

/// Field a perturbation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbTarget {
    Df,
    Phi,
}

impl FromStr for PerturbTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "df" => Ok(PerturbTarget::Df),
            "phi" => Ok(PerturbTarget::Phi),
            other => Err(Error::Config(format!("perturbation target must be df or phi, got {other:?}"))),
        }
    }
}

impl fmt::Display for PerturbTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerturbTarget::Df => "df",
            PerturbTarget::Phi => "phi",
        })
    }
}

/// Multiplicative Gaussian bump `1 + δ exp(-((r - r_c)/w)^2)` on one field,
/// applied on a uniform resample of `[r_min, r_max]` with the given spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub target: PerturbTarget,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub spacing: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            target: PerturbTarget::Df,
            amplitude: 0.01,
            center: 2.0,
            width: 0.5,
            r_min: 0.25,
            r_max: 70.0,
            spacing: 0.01,
        }
    }
}

impl PerturbationSpec {
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    fn bump(&self, r: f64) -> f64 {
        1.0 + self.amplitude * (-((r - self.center) / self.width).powi(2)).exp()
    }
}

/// Bumped copy of `profile`, flagged as not a soliton.
pub fn perturb(profile: &SolitonProfile, spec: &PerturbationSpec) -> Result<SolitonProfile> {
    if !(spec.width > 0.0 && spec.spacing > 0.0 && spec.r_max > spec.r_min && spec.amplitude.is_finite()) {
        return Err(Error::Config("perturbation needs width, spacing > 0 and r_max > r_min".into()));
    }
    let (lo, hi) = profile.domain();
    if spec.r_min < lo || spec.r_min <= 0.0 || spec.r_max > hi {
        return Err(Error::Range { value: if spec.r_max > hi { spec.r_max } else { spec.r_min }, lo, hi });
    }
    let n = ((spec.r_max - spec.r_min) / spec.spacing).round() as usize + 1;
    let grid = RadialGrid::uniform(spec.r_min, spec.r_max, n)?;
    let base: Vec<[f64; 2]> = if profile.is_exact_soliton() {
        // one continuous trajectory; node-to-node continuation would leave
        // jumps at the integrator's local error that differencing amplifies
        let g = profile.local(spec.r_min)?;
        let h = (spec.r_max - spec.r_min) / (n - 1) as f64;
        system::march([g.phi[0], g.phi[1], g.df[0]], h, n).iter().map(|y| [y[0], y[2]]).collect()
    } else {
        grid.nodes().iter().map(|&r| profile.eval(r).map(|e| [e.phi, e.df])).collect::<Result<_>>()?
    };
    let mut phi = Vec::with_capacity(n);
    let mut df = Vec::with_capacity(n);
    for (&r, &[p, q]) in grid.nodes().iter().zip(&base) {
        let b = spec.bump(r);
        match spec.target {
            PerturbTarget::Df => {
                phi.push(p);
                df.push(q * b);
            }
            PerturbTarget::Phi => {
                phi.push(p * b);
                df.push(q);
            }
        }
    }
    if let Some(i) = phi.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Config(format!("perturbation makes phi non-positive at r = {}", grid.nodes()[i])));
    }
    let d = fd::differentiate(grid.nodes(), &phi, 2, 5);
    let ddf = fd::differentiate(grid.nodes(), &df, 1, 5).remove(0);
    let mut d = d.into_iter();
    let dphi = d.next().unwrap();
    let ddphi = d.next().unwrap();
    SolitonProfile::from_samples(grid, phi, dphi, ddphi, df, ddf, false)
}

/// `4π φ^2` at `r`, the area of the `r`-sphere.
pub fn sphere_area(profile: &SolitonProfile, r: f64) -> Result<f64> {
    let phi = profile.eval(r)?.phi;
    Ok(4.0 * PI * phi * phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let spec = PerturbationSpec::default();
        assert_eq!(spec.bump(spec.center), 1.0 + spec.amplitude);
        assert!((spec.bump(spec.center + 10.0 * spec.width) - 1.0).abs() < 1e-40);
        assert_eq!(spec.with_amplitude(0.0).bump(spec.center), 1.0);
    }

    #[test]
    fn id_classification() {
        assert!(IdentityId::EqOde.is_ode() && IdentityId::EqOde2.is_ode());
        assert!(!IdentityId::EqFinal.is_ode());
        assert_eq!(IdentityId::POINTWISE.len() + 2, IdentityId::ALL.len());
        let json = serde_json::to_string(&IdentityId::EqBNorm).unwrap();
        assert_eq!(json, "\"EQ_B_NORM\"");
    }

    #[test]
    fn windows_are_closed() {
        let w = Window { lo: 0.1, hi: 0.2 };
        assert!(w.contains(0.1) && w.contains(0.2) && !w.contains(0.25));
    }
}

//! The profile function ψ and the weight u.
//!
//! On the Bryant soliton `∇R + ψ(R)∇f = 0`, so ψ is read off as
//! `ψ(s) = -R'(r)/f'(r)` at the radius where `R(r) = s`. Its derivatives in
//! `s` follow from the chain rule through `r` using the analytic derivative
//! cascade of the profile. The weight is
//!
//! ```text
//! u(s) = log ψ(s) + ∫_{1/2}^{s} ( 3/(2(1-t)) - 1/((1-t) ψ(t)) ) dt.
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, PsiFunction};
use crate::jet::Jet;
use crate::profile::{hermite, hermite_slope, ResidualStats, SolitonProfile};
use crate::quadrature::{self, QuadOptions};

/// Base point of the integral in `u`.
pub const U_BASE: f64 = 0.5;

/// Above this value the `u` integral is taken in `τ = sqrt(1 - t)`.
const SUBSTITUTION_POINT: f64 = 0.9;

/// Root-finding target for `|R(r(s)) - s|`.
pub const LEVEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SGrid {
    nodes: Vec<f64>,
}

impl SGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Config("s-grid needs at least two nodes".into()));
        }
        if nodes.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
            return Err(Error::Config("s-grid nodes must lie in (0, 1)".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("s-grid nodes not increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// Geometric clustering toward both ends of `[s_min, 1 - eps_top]`,
    /// `per_half` nodes on each side of `1/2` (which is always a node).
    pub fn geometric(s_min: f64, eps_top: f64, per_half: usize) -> Result<Self> {
        if !(s_min > 0.0 && s_min < U_BASE && eps_top > 0.0 && eps_top < U_BASE) {
            return Err(Error::Config(format!("invalid s-grid range [{s_min}, 1 - {eps_top}]")));
        }
        let per_half = per_half.max(2);
        let mut nodes = Vec::with_capacity(2 * per_half - 1);
        let (l0, l1) = (s_min.ln(), U_BASE.ln());
        for k in 0..per_half {
            let t = k as f64 / (per_half - 1) as f64;
            nodes.push((l0 + t * (l1 - l0)).exp());
        }
        nodes[0] = s_min;
        nodes[per_half - 1] = U_BASE;
        let (m0, m1) = (U_BASE.ln(), eps_top.ln());
        for k in 1..per_half {
            let t = k as f64 / (per_half - 1) as f64;
            nodes.push(1.0 - (m0 + t * (m1 - m0)).exp());
        }
        let n = nodes.len();
        nodes[n - 1] = 1.0 - eps_top;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Same nodes plus every midpoint.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self { nodes }
    }
}

/// ψ, its first two derivatives and `u`, sampled on an [`SGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiProfile {
    s: Vec<f64>,
    /// Radius with `R(r) = s` for each node.
    r: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    ddpsi: Vec<f64>,
    u: Vec<f64>,
    /// Extrapolated `ψ(1)`.
    pub limit_at_one: f64,
    /// Quadratic model `c0 + c1 x + c2 x^2` in `x = 1 - s`, used above the top node.
    top_model: [f64; 3],
}

/// Values of ψ at one point obtained directly from a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPoint {
    pub s: f64,
    pub r: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

/// ψ and its `s`-derivatives from the local geometry at one radius.
pub fn psi_from_geometry(g: &LocalGeometry) -> PsiPoint {
    // jets in r: R' and f'
    let dr = Jet::<3>::from_derivatives(&g.scalar[1..4]);
    let df = Jet::<3>::from_derivatives(&g.df);
    let psi = -(dr / df);
    let (p, p_r, p_rr) = (psi.derivative_at(0), psi.derivative_at(1), psi.derivative_at(2));
    let (r1, r2) = (g.scalar[1], g.scalar[2]);
    let p_s = p_r / r1;
    let p_ss = (p_rr - p_s * r2) / (r1 * r1);
    PsiPoint { s: g.scalar[0], r: g.r, psi: p, dpsi: p_s, ddpsi: p_ss }
}

/// Inverts the strictly decreasing `R` on an exact profile.
#[derive(Debug, Clone)]
pub struct LevelFinder<'a> {
    profile: &'a SolitonProfile,
    scalars: Vec<f64>,
}

impl<'a> LevelFinder<'a> {
    pub fn new(profile: &'a SolitonProfile) -> Result<Self> {
        let scalars: Result<Vec<f64>> =
            profile.grid().nodes().par_iter().map(|&r| Ok(profile.local(r)?.scalar[0])).collect();
        let scalars = scalars?;
        if let Some(i) = scalars.windows(2).position(|w| w[1] >= w[0]) {
            return Err(Error::Domain(format!("R is not strictly decreasing at node {}", i + 1)));
        }
        Ok(Self { profile, scalars })
    }

    /// Range of `s` reachable on the profile.
    pub fn range(&self) -> (f64, f64) {
        let hi = if self.profile.is_exact_soliton() { 1.0 } else { self.scalars[0] };
        (*self.scalars.last().unwrap(), hi)
    }

    /// Radius with `R(r) = s`, to [`LEVEL_TOL`] or better.
    pub fn radius_of(&self, s: f64) -> Result<f64> {
        let (lo_s, hi_s) = self.range();
        if !(s >= lo_s && s < hi_s) {
            return Err(Error::Range { value: s, lo: lo_s, hi: hi_s });
        }
        let nodes = self.profile.grid().nodes();
        // first node whose R is below s
        let k = self.scalars.partition_point(|&x| x >= s);
        let (mut a, mut b) = if k == 0 {
            (0.0, nodes[0])
        } else if k == nodes.len() {
            return Ok(nodes[k - 1]);
        } else {
            (nodes[k - 1], nodes[k])
        };
        let mut r = if k == 0 {
            (3.0 * (1.0 - s).sqrt()).min(b)
        } else {
            let (ra, rb) = (self.scalars[k - 1], self.scalars[k]);
            a + (b - a) * (ra - s) / (ra - rb)
        };
        for _ in 0..100 {
            let g = self.profile.local(r)?;
            let res = g.scalar[0] - s;
            if res == 0.0 {
                return Ok(r);
            }
            if res > 0.0 {
                a = r;
            } else {
                b = r;
            }
            let mut next = r - res / g.scalar[1];
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r {
                let g = self.profile.local(next)?;
                return Ok(if (g.scalar[0] - s).abs() < res.abs() { next } else { r });
            }
            r = next;
        }
        let g = self.profile.local(r)?;
        if (g.scalar[0] - s).abs() <= LEVEL_TOL {
            Ok(r)
        } else {
            Err(Error::Accuracy {
                what: format!("level set R = {s} not located"),
                achieved: (g.scalar[0] - s).abs(),
                required: LEVEL_TOL,
            })
        }
    }

    pub fn psi_at(&self, s: f64) -> Result<PsiPoint> {
        let r = self.radius_of(s)?;
        Ok(psi_from_geometry(&self.profile.local(r)?))
    }
}

/// Samples ψ on `grid` from an exact soliton profile.
pub fn extract_psi(profile: &SolitonProfile, grid: &SGrid) -> Result<PsiProfile> {
    if !profile.is_exact_soliton() {
        return Err(Error::Usage("psi extraction requires an exact soliton profile".into()));
    }
    let finder = LevelFinder::new(profile)?;
    let points: Result<Vec<PsiPoint>> = grid.nodes().par_iter().map(|&s| finder.psi_at(s)).collect();
    let points = points?;
    let eps = 1.0 - grid.nodes().last().unwrap();
    let top: Result<Vec<f64>> = [eps, 2.0 * eps, 4.0 * eps]
        .iter()
        .map(|x| Ok(finder.psi_at(1.0 - x)?.psi))
        .collect();
    let top = top?;
    // quadratic through x = ε, 2ε, 4ε
    let c0 = 8.0 / 3.0 * top[0] - 2.0 * top[1] + top[2] / 3.0;
    let c2 = (top[0] / 3.0 - top[1] / 2.0 + top[2] / 6.0) / (eps * eps);
    let c1 = (top[0] - c0) / eps - c2 * eps;
    let r_half = finder.radius_of(U_BASE)?;
    PsiProfile::from_points(profile, r_half, points, c0, [c0, c1, c2])
}

impl PsiProfile {
    fn from_points(
        profile: &SolitonProfile,
        r_half: f64,
        points: Vec<PsiPoint>,
        limit_at_one: f64,
        top_model: [f64; 3],
    ) -> Result<Self> {
        let s: Vec<f64> = points.iter().map(|p| p.s).collect();
        let r: Vec<f64> = points.iter().map(|p| p.r).collect();
        let psi: Vec<f64> = points.iter().map(|p| p.psi).collect();
        let dpsi: Vec<f64> = points.iter().map(|p| p.dpsi).collect();
        let ddpsi: Vec<f64> = points.iter().map(|p| p.ddpsi).collect();
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("psi samples are not ordered in s".into()));
        }
        if let Some(i) = psi.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Domain(format!("psi = {} is not positive at s = {}", psi[i], s[i])));
        }
        let mut out = Self { s, r, psi, dpsi, ddpsi, u: Vec::new(), limit_at_one, top_model };
        out.u = out.cumulative_u(profile, r_half)?;
        Ok(out)
    }

    /// ψ read pointwise at every node of a (possibly perturbed) profile
    /// whose `R` lies in `[s_lo, s_hi]`. No extrapolation model is fitted.
    pub fn from_profile_nodes(profile: &SolitonProfile, s_lo: f64, s_hi: f64) -> Result<Self> {
        let mut points = Vec::new();
        for &r in profile.grid().nodes() {
            let g = profile.local(r)?;
            if g.scalar[0] >= s_lo && g.scalar[0] <= s_hi {
                points.push(psi_from_geometry(&g));
            }
        }
        points.sort_by(|a, b| a.s.total_cmp(&b.s));
        if points.len() < 2 {
            return Err(Error::Domain("fewer than two profile nodes inside the s-window".into()));
        }
        if !points.iter().any(|p| p.s <= U_BASE) || !points.iter().any(|p| p.s >= U_BASE) {
            return Err(Error::Domain("s-window must contain 1/2".into()));
        }
        let r_half = LevelFinder::new(profile)?.radius_of(U_BASE)?;
        Self::from_points(profile, r_half, points, f64::NAN, [f64::NAN; 3])
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s
    }
    pub fn radii(&self) -> &[f64] {
        &self.r
    }
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
    pub fn dpsi(&self) -> &[f64] {
        &self.dpsi
    }
    pub fn ddpsi(&self) -> &[f64] {
        &self.ddpsi
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn len(&self) -> usize {
        self.s.len()
    }
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
    pub fn top_model(&self) -> [f64; 3] {
        self.top_model
    }

    fn s_first(&self) -> f64 {
        self.s[0]
    }
    fn s_last(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    /// Evaluation interval: the grid, extended to 1 when a top model exists.
    pub fn domain(&self) -> (f64, f64) {
        let hi = if self.top_model[0].is_finite() { 1.0 } else { self.s_last() };
        (self.s_first(), hi)
    }

    fn locate(&self, s: f64) -> Result<Option<(usize, f64, f64)>> {
        let (lo, hi) = self.domain();
        if !(s >= lo && s <= hi) {
            return Err(Error::Range { value: s, lo, hi });
        }
        if s > self.s_last() {
            return Ok(None);
        }
        let k = self.s.partition_point(|x| *x <= s).saturating_sub(1).min(self.s.len() - 2);
        let h = self.s[k + 1] - self.s[k];
        Ok(Some((k, h, (s - self.s[k]) / h)))
    }

    fn model(&self, s: f64) -> (f64, f64) {
        let x = 1.0 - s;
        let [c0, c1, c2] = self.top_model;
        (c0 + x * (c1 + x * c2), -(c1 + 2.0 * c2 * x))
    }

    pub fn eval_psi(&self, s: f64) -> Result<f64> {
        Ok(match self.locate(s)? {
            Some((k, h, t)) => hermite(t, h, self.psi[k], self.psi[k + 1], self.dpsi[k], self.dpsi[k + 1]),
            None => self.model(s).0,
        })
    }

    pub fn eval_dpsi(&self, s: f64) -> Result<f64> {
        Ok(match self.locate(s)? {
            Some((k, h, t)) => hermite(t, h, self.dpsi[k], self.dpsi[k + 1], self.ddpsi[k], self.ddpsi[k + 1]),
            None => self.model(s).1,
        })
    }

    /// Integrand of `u`.
    fn u_integrand(&self, t: f64) -> Result<f64> {
        let psi = self.eval_psi(t)?;
        Ok((1.5 - 1.0 / psi) / (1.0 - t))
    }

    /// `u'(s) = ψ'/ψ + 3/(2(1-s)) - 1/((1-s)ψ)`.
    pub fn eval_du(&self, s: f64) -> Result<f64> {
        Ok(self.eval_dpsi(s)? / self.eval_psi(s)? + self.u_integrand(s)?)
    }

    /// `∫_a^b` of the `u` integrand, switching to `τ = sqrt(1 - t)` above 0.9.
    fn integral(&self, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return Ok(-self.integral(b, a, rel_tol)?);
        }
        let opts = QuadOptions { rel_tol, abs_tol: 1e-14, max_intervals: 2000 };
        let mut total = 0.0;
        let split = SUBSTITUTION_POINT.clamp(a, b);
        if a < split {
            total += quadrature::integrate(|t| self.u_integrand(t), a, split, opts)?.value;
        }
        if split < b {
            let (ta, tb) = ((1.0 - split).sqrt(), (1.0 - b).sqrt());
            // dt = -2τ dτ
            total += quadrature::integrate(
                |tau| Ok(2.0 * tau * self.u_integrand(1.0 - tau * tau)?),
                tb,
                ta,
                opts,
            )?
            .value;
        }
        Ok(total)
    }

    /// Node values of `u` computed along the profile in `r`. With `t = R(ρ)`,
    /// `dt/((1-t)ψ(t)) = -f'(ρ) dρ/(1-R(ρ))`, so
    /// `u(s) = log ψ - 3/2 log(2(1-s)) + ∫_{r(1/2)}^{r(s)} f'/(1-R) dρ`,
    /// with `3/ρ` split off the integrand to keep it bounded at the origin.
    fn cumulative_u(&self, profile: &SolitonProfile, r_half: f64) -> Result<Vec<f64>> {
        let n = self.s.len();
        let integrand = |rho: f64| -> Result<f64> {
            let g = profile.local(rho)?;
            Ok(g.df[0] / (1.0 - g.scalar[0]) - 3.0 / rho)
        };
        let opts = QuadOptions { rel_tol: 1e-13, abs_tol: 1e-13, max_intervals: 2000 };
        let piece = |a: f64, b: f64| -> Result<f64> {
            let q = quadrature::integrate(integrand, a, b, opts)?;
            Ok(q.value + 3.0 * (b / a).ln())
        };
        let base = self.r.partition_point(|x| *x > r_half).min(n - 1);
        let pieces: Result<Vec<f64>> = (0..n - 1).into_par_iter().map(|k| piece(self.r[k], self.r[k + 1])).collect();
        let pieces = pieces?;
        let mut acc = vec![0.0; n];
        acc[base] = piece(r_half, self.r[base])?;
        for k in base + 1..n {
            acc[k] = acc[k - 1] + pieces[k - 1];
        }
        for k in (0..base).rev() {
            acc[k] = acc[k + 1] - pieces[k];
        }
        let u: Vec<f64> = (0..n)
            .map(|k| self.psi[k].ln() - 1.5 * (2.0 * (1.0 - self.s[k])).ln() + acc[k])
            .collect();
        if let Some(k) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("u is not finite at s = {}", self.s[k])));
        }
        Ok(u)
    }

    /// `u(s)` by adaptive quadrature from 1/2 at relative tolerance `rel_tol`.
    pub fn u_of_s_with(&self, s: f64, rel_tol: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(s >= lo && s < hi) || U_BASE < lo {
            return Err(Error::Range { value: s, lo, hi });
        }
        Ok(self.eval_psi(s)?.ln() + self.integral(U_BASE, s, rel_tol)?)
    }

    /// `u(s)` by adaptive quadrature at relative tolerance 1e-9.
    pub fn u_of_s(&self, s: f64) -> Result<f64> {
        self.u_of_s_with(s, 1e-9)
    }

    /// `u(s)` by Hermite interpolation of the node values with the exact slope `u'`.
    pub fn eval_u(&self, s: f64) -> Result<f64> {
        match self.locate(s)? {
            Some((k, h, t)) => {
                let du0 = self.dpsi[k] / self.psi[k] + (1.5 - 1.0 / self.psi[k]) / (1.0 - self.s[k]);
                let du1 = self.dpsi[k + 1] / self.psi[k + 1] + (1.5 - 1.0 / self.psi[k + 1]) / (1.0 - self.s[k + 1]);
                Ok(hermite(t, h, self.u[k], self.u[k + 1], du0, du1))
            }
            None => {
                let top = self.s_last();
                let u_top = self.u[self.u.len() - 1];
                Ok(u_top + self.eval_psi(s)?.ln() - self.psi[self.psi.len() - 1].ln() + self.integral(top, s, 1e-10)?)
            }
        }
    }

    /// Slope of the cubic ψ interpolant (used to cross-check stored derivatives).
    pub fn interpolant_slope(&self, s: f64) -> Result<f64> {
        match self.locate(s)? {
            Some((k, h, t)) => Ok(hermite_slope(t, h, self.psi[k], self.psi[k + 1], self.dpsi[k], self.dpsi[k + 1])),
            None => Ok(self.model(s).1),
        }
    }
}

impl PsiFunction for PsiProfile {
    fn value(&self, s: f64) -> Result<f64> {
        self.eval_psi(s)
    }
    fn derivative(&self, s: f64) -> Result<f64> {
        self.eval_dpsi(s)
    }
}

/// `-3/4 ψ^2 + ψ - s^2 + sψ - (1-s)ψψ'`.
pub fn ode_residual(s: f64, psi: f64, dpsi: f64) -> f64 {
    -0.75 * psi * psi + psi - s * s + s * psi - (1.0 - s) * psi * dpsi
}

/// `-s(s-ψ)/ψ^2 - (3/4 - 1/ψ + (1-s)ψ'/ψ)`.
pub fn rearranged_residual(s: f64, psi: f64, dpsi: f64) -> f64 {
    -s * (s - psi) / (psi * psi) - (0.75 - 1.0 / psi + (1.0 - s) * dpsi / psi)
}

/// Residuals of the ψ equation and of its rearranged form over nodes in `[s_lo, s_hi]`.
///
/// The rearranged residual is reported multiplied by `ψ^2`, which is its
/// natural scale: it then equals the first residual up to rounding.
pub fn psi_ode_residual(psi: &PsiProfile, s_lo: f64, s_hi: f64, threshold: f64) -> (ResidualStats, ResidualStats) {
    let mut e6 = Vec::new();
    let mut e9 = Vec::new();
    for k in 0..psi.len() {
        let s = psi.s[k];
        if s < s_lo || s > s_hi {
            continue;
        }
        let (p, dp) = (psi.psi[k], psi.dpsi[k]);
        e6.push(ode_residual(s, p, dp));
        e9.push(rearranged_residual(s, p, dp) * p * p);
    }
    (
        ResidualStats::from_samples("EQ_ODE", &e6, threshold),
        ResidualStats::from_samples("EQ_ODE2", &e9, threshold),
    )
}

/// Coefficient fits of ψ near both ends of `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsReport {
    /// Constant term of `ψ ≈ a0 + b (1-s) + c (1-s)^2` near `s = 1`.
    pub limit_at_one: f64,
    pub slope_at_one: f64,
    /// Max fit residual in the top window.
    pub remainder_top: f64,
    /// Coefficient of `sqrt(1-s)` when it is added to the top fit.
    pub half_power: f64,
    /// Coefficient `c` of `ψ ≈ s^2 + c s^3 + ...` near `s = 0`.
    pub cubic_at_zero: f64,
    pub remainder_bottom: f64,
    pub n_top: usize,
    pub n_bottom: usize,
}

pub const FIT_WINDOW: f64 = 0.02;
const MIN_FIT_NODES: usize = 5;

pub fn asymptotics_check(psi: &PsiProfile) -> Result<AsymptoticsReport> {
    let (s0, s1) = (psi.s_first(), psi.s_last());
    let reach = 1e-3 * (1.0 + 1e-9);
    if s0 > reach || 1.0 - s1 > reach {
        return Err(Error::Config(format!(
            "psi grid [{s0}, {s1}] does not reach within 1e-3 of both endpoints"
        )));
    }
    let top: Vec<(f64, f64)> = (0..psi.len())
        .filter(|&k| 1.0 - psi.s[k] <= FIT_WINDOW)
        .map(|k| (1.0 - psi.s[k], psi.psi[k]))
        .collect();
    let bottom: Vec<(f64, f64)> = (0..psi.len())
        .filter(|&k| psi.s[k] <= FIT_WINDOW)
        .map(|k| (psi.s[k], (psi.psi[k] - psi.s[k].powi(2)) / psi.s[k].powi(3)))
        .collect();
    if top.len() < MIN_FIT_NODES || bottom.len() < MIN_FIT_NODES {
        return Err(Error::Config(format!(
            "need {MIN_FIT_NODES} nodes in each fit window, have {} (top) and {} (bottom)",
            top.len(),
            bottom.len()
        )));
    }
    let quad = |x: f64| vec![1.0, x, x * x];
    let ct = least_squares(&top, quad)?;
    let remainder_top = top
        .iter()
        .map(|(x, y)| (y - (ct[0] + ct[1] * x + ct[2] * x * x)).abs())
        .fold(0.0, f64::max);
    let half = least_squares(&top, |x| vec![1.0, x.sqrt(), x, x * x])?;
    let cb = least_squares(&bottom, quad)?;
    let remainder_bottom = bottom
        .iter()
        .map(|(s, y)| (y - (cb[0] + cb[1] * s + cb[2] * s * s)).abs() * s.powi(3))
        .fold(0.0, f64::max);
    Ok(AsymptoticsReport {
        limit_at_one: ct[0],
        slope_at_one: ct[1],
        remainder_top,
        half_power: half[1],
        cubic_at_zero: cb[0],
        remainder_bottom,
        n_top: top.len(),
        n_bottom: bottom.len(),
    })
}

/// Ordinary least squares via the normal equations (small, well-scaled bases only).
fn least_squares<F>(data: &[(f64, f64)], basis: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    let m = basis(data[0].0).len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (x, y) in data {
        let b = basis(*x);
        for i in 0..m {
            for j in 0..m {
                a[i][j] += b[i] * b[j];
            }
            a[i][m] += b[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return Err(Error::Domain("singular least-squares system".into()));
        }
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = a[i][m];
        for j in i + 1..m {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

/// `|u(1-δ) - u(1-δ/2)|` for each δ, by direct quadrature.
pub fn u_cauchy(psi: &PsiProfile, deltas: &[f64]) -> Result<Vec<f64>> {
    deltas
        .iter()
        .map(|d| Ok((psi.u_of_s(1.0 - d)? - psi.u_of_s(1.0 - 0.5 * d)?).abs()))
        .collect()
}

/// `δ = 1e-2, 5e-3, 2.5e-3, ...` down to `1e-4`.
pub fn default_cauchy_deltas() -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = 1e-2;
    while d > 1e-4 * (1.0 - 1e-12) {
        out.push(d);
        d *= 0.5;
    }
    out.push(1e-4);
    out
}

//! Sampled radial profiles and their evaluation.
//!
//! A [`SolitonProfile`] stores, per node of a [`RadialGrid`], the warp factor
//! `φ`, the potential derivative `f'` and their first two derivatives.
//! Exact solitons (solver output) are continued between nodes by the local
//! Taylor expansion of the soliton system and evaluated from the origin
//! series below [`SERIES_RADIUS`]. Sampled (perturbed) profiles carry
//! higher derivatives obtained by finite differences and are interpolated
//! by cubic Hermite segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::LocalGeometry;
use crate::series::OriginSeries;
use crate::system;

/// Below this radius exact solitons are evaluated from the origin series.
pub const SERIES_RADIUS: f64 = 0.25;

/// Default bound on `|R + f'^2 - 1|` used by [`validate_profile`].
pub const DEFAULT_CONSERVATION_TOL: f64 = 1e-8;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::Domain(format!(
                "grid needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::Domain(format!(
                "grid node {i} is not a finite positive radius: {}",
                nodes[i]
            )));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!("nodes not increasing at index {}", i + 1)));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let step = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        nodes[n - 1] = hi;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Grid with one extra node in the middle of every interval.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.last());
        Self { nodes }
    }

    /// Index `i` with `nodes[i] <= r <= nodes[i+1]`, clamped to valid intervals.
    fn interval(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|x| *x <= r);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }
}

/// Interpolated values at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub df: f64,
    pub ddf: f64,
}

/// Curvature data at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub r: f64,
    /// Radial Ricci eigenvalue.
    pub lambda: f64,
    /// Spherical Ricci eigenvalue (multiplicity two).
    pub mu: f64,
    /// Scalar curvature.
    pub scalar: f64,
    /// Radial derivative of the scalar curvature.
    pub d_scalar: f64,
}

/// Summary of a residual over a set of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(with = "crate::report::float")]
    pub max_abs: f64,
    #[serde(with = "crate::report::float")]
    pub rms: f64,
    pub n_samples: usize,
    #[serde(with = "crate::report::float")]
    pub threshold: f64,
    pub pass: bool,
}

impl ResidualStats {
    pub fn from_samples(id: &str, samples: &[f64], threshold: f64) -> Self {
        let n = samples.len();
        let mut max_abs = 0.0f64;
        let mut sq = 0.0;
        for v in samples {
            max_abs = max_abs.max(v.abs());
            sq += v * v;
        }
        // f64::max drops NaN; a NaN sample must never pass
        if samples.iter().any(|v| v.is_nan()) {
            max_abs = f64::NAN;
        }
        let rms = if n > 0 { (sq / n as f64).sqrt() } else { 0.0 };
        Self::single(id, max_abs, rms, n, threshold)
    }

    pub fn single(id: &str, max_abs: f64, rms: f64, n_samples: usize, threshold: f64) -> Self {
        Self {
            id: id.to_string(),
            detail: String::new(),
            max_abs,
            rms,
            n_samples,
            threshold,
            pass: n_samples > 0 && max_abs <= threshold,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile {
    grid: RadialGrid,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    ddphi: Vec<f64>,
    df: Vec<f64>,
    ddf: Vec<f64>,
    origin: Option<OriginSeries>,
    is_exact_soliton: bool,
    /// Sampled profiles only: `φ''', φ'''', φ'''''` and `f'''` per node.
    higher: Option<HigherDerivatives>,
}

#[derive(Debug, Clone, PartialEq)]
struct HigherDerivatives {
    d3phi: Vec<f64>,
    d4phi: Vec<f64>,
    d5phi: Vec<f64>,
    d3f: Vec<f64>,
}

impl SolitonProfile {
    /// Exact soliton from node states; second derivatives come from the system.
    pub fn exact(grid: RadialGrid, phi: Vec<f64>, dphi: Vec<f64>, df: Vec<f64>, origin: OriginSeries) -> Result<Self> {
        let n = grid.len();
        check_len(n, &[&phi, &dphi, &df])?;
        let mut ddphi = Vec::with_capacity(n);
        let mut ddf = Vec::with_capacity(n);
        for i in 0..n {
            let [_, dp, dq] = system::rhs(phi[i], dphi[i], df[i]);
            ddphi.push(dp);
            ddf.push(dq);
        }
        Ok(Self {
            grid,
            phi,
            dphi,
            ddphi,
            df,
            ddf,
            origin: Some(origin),
            is_exact_soliton: true,
            higher: None,
        })
    }

    /// Profile from arbitrary samples. Exact profiles keep the supplied
    /// second derivatives; sampled ones get higher derivatives by finite differences.
    pub fn from_samples(
        grid: RadialGrid,
        phi: Vec<f64>,
        dphi: Vec<f64>,
        ddphi: Vec<f64>,
        df: Vec<f64>,
        ddf: Vec<f64>,
        is_exact_soliton: bool,
    ) -> Result<Self> {
        check_len(grid.len(), &[&phi, &dphi, &ddphi, &df, &ddf])?;
        let higher = if is_exact_soliton {
            None
        } else {
            let d = fd::differentiate(grid.nodes(), &ddphi, 3, 5);
            let d3f = fd::differentiate(grid.nodes(), &ddf, 1, 5);
            let mut it = d.into_iter();
            Some(HigherDerivatives {
                d3phi: it.next().unwrap(),
                d4phi: it.next().unwrap(),
                d5phi: it.next().unwrap(),
                d3f: d3f.into_iter().next().unwrap(),
            })
        };
        Ok(Self {
            grid,
            phi,
            dphi,
            ddphi,
            df,
            ddf,
            origin: is_exact_soliton.then(OriginSeries::new),
            is_exact_soliton,
            higher,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
    pub fn dphi(&self) -> &[f64] {
        &self.dphi
    }
    pub fn ddphi(&self) -> &[f64] {
        &self.ddphi
    }
    pub fn df(&self) -> &[f64] {
        &self.df
    }
    pub fn ddf(&self) -> &[f64] {
        &self.ddf
    }
    pub fn origin_data(&self) -> Option<&OriginSeries> {
        self.origin.as_ref()
    }
    pub fn is_exact_soliton(&self) -> bool {
        self.is_exact_soliton
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Valid evaluation interval. Exact solitons extend down to the origin.
    pub fn domain(&self) -> (f64, f64) {
        if self.is_exact_soliton {
            (0.0, self.grid.last())
        } else {
            (self.grid.first(), self.grid.last())
        }
    }

    fn check_range(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        let ok = if self.is_exact_soliton { r > lo && r <= hi } else { r >= lo && r <= hi };
        if !ok || !r.is_finite() {
            return Err(Error::Range { value: r, lo, hi });
        }
        Ok(())
    }

    fn node_index(&self, r: f64) -> Option<usize> {
        self.grid.nodes.binary_search_by(|x| x.total_cmp(&r)).ok()
    }

    fn nearest_node(&self, r: f64) -> usize {
        let i = self.grid.interval(r);
        if (r - self.grid.nodes[i]).abs() <= (self.grid.nodes[i + 1] - r).abs() {
            i
        } else {
            i + 1
        }
    }

    fn sample_at(&self, i: usize) -> ProfileSample {
        ProfileSample {
            phi: self.phi[i],
            dphi: self.dphi[i],
            ddphi: self.ddphi[i],
            df: self.df[i],
            ddf: self.ddf[i],
        }
    }

    /// Profile values at `r`, reproducing stored samples exactly at nodes.
    pub fn eval(&self, r: f64) -> Result<ProfileSample> {
        self.check_range(r)?;
        if let Some(i) = self.node_index(r) {
            return Ok(self.sample_at(i));
        }
        if self.is_exact_soliton {
            let g = self.local(r)?;
            return Ok(ProfileSample {
                phi: g.phi[0],
                dphi: g.phi[1],
                ddphi: g.phi[2],
                df: g.df[0],
                ddf: g.df[1],
            });
        }
        let i = self.grid.interval(r);
        let h = self.higher.as_ref().expect("sampled profile carries higher derivatives");
        let seg = Segment::new(&self.grid.nodes, i, r);
        Ok(ProfileSample {
            phi: seg.hermite(&self.phi, &self.dphi),
            dphi: seg.hermite(&self.dphi, &self.ddphi),
            ddphi: seg.hermite(&self.ddphi, &h.d3phi),
            df: seg.hermite(&self.df, &self.ddf),
            ddf: seg.hermite(&self.ddf, &h.d3f),
        })
    }

    /// Full local derivative data at `r`.
    pub fn local(&self, r: f64) -> Result<LocalGeometry> {
        self.check_range(r)?;
        if self.is_exact_soliton {
            if r < SERIES_RADIUS {
                let s = self.origin.as_ref().expect("exact profiles carry the origin series");
                return Ok(LocalGeometry::from_series(s, r));
            }
            let i = self.nearest_node(r);
            let (pj, qj) = system::taylor_expand(self.phi[i], self.dphi[i], self.df[i]);
            let t = r - self.grid.nodes[i];
            let (pj, qj) = if t == 0.0 { (pj, qj) } else { (pj.shifted(t), qj.shifted(t)) };
            let phi: [f64; 6] = std::array::from_fn(|k| pj.derivative_at(k));
            let df: [f64; 3] = std::array::from_fn(|k| qj.derivative_at(k));
            return LocalGeometry::from_derivatives(r, phi, df);
        }
        let h = self.higher.as_ref().expect("sampled profile carries higher derivatives");
        let (phi, df) = match self.node_index(r) {
            Some(i) => (
                [self.phi[i], self.dphi[i], self.ddphi[i], h.d3phi[i], h.d4phi[i], h.d5phi[i]],
                [self.df[i], self.ddf[i], h.d3f[i]],
            ),
            None => {
                let seg = Segment::new(&self.grid.nodes, self.grid.interval(r), r);
                (
                    [
                        seg.hermite(&self.phi, &self.dphi),
                        seg.hermite(&self.dphi, &self.ddphi),
                        seg.hermite(&self.ddphi, &h.d3phi),
                        seg.hermite(&h.d3phi, &h.d4phi),
                        seg.hermite(&h.d4phi, &h.d5phi),
                        seg.linear(&h.d5phi),
                    ],
                    [
                        seg.hermite(&self.df, &self.ddf),
                        seg.hermite(&self.ddf, &h.d3f),
                        seg.linear(&h.d3f),
                    ],
                )
            }
        };
        LocalGeometry::from_derivatives(r, phi, df)
    }

    /// Same function sampled on a new grid inside the current domain.
    pub fn resample(&self, grid: RadialGrid) -> Result<Self> {
        let mut s = Vec::with_capacity(grid.len());
        for &r in grid.nodes() {
            s.push(self.eval(r)?);
        }
        let col = |f: fn(&ProfileSample) -> f64| s.iter().map(f).collect::<Vec<_>>();
        if self.is_exact_soliton {
            let origin = self.origin.clone().unwrap_or_default();
            Self::exact(grid, col(|x| x.phi), col(|x| x.dphi), col(|x| x.df), origin)
        } else {
            Self::from_samples(
                grid,
                col(|x| x.phi),
                col(|x| x.dphi),
                col(|x| x.ddphi),
                col(|x| x.df),
                col(|x| x.ddf),
                false,
            )
        }
    }

    /// First `n` nodes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let grid = RadialGrid::new(self.grid.nodes[..n].to_vec())?;
        Self::from_samples(
            grid,
            self.phi[..n].to_vec(),
            self.dphi[..n].to_vec(),
            self.ddphi[..n].to_vec(),
            self.df[..n].to_vec(),
            self.ddf[..n].to_vec(),
            self.is_exact_soliton,
        )
    }

    /// Copy with `f'` (and `f''`) multiplied by a constant; no longer a soliton.
    pub fn with_scaled_df(&self, factor: f64) -> Result<Self> {
        Self::from_samples(
            self.grid.clone(),
            self.phi.clone(),
            self.dphi.clone(),
            self.ddphi.clone(),
            self.df.iter().map(|v| v * factor).collect(),
            self.ddf.iter().map(|v| v * factor).collect(),
            false,
        )
    }

    /// Copy with an edited `φ` sample at node `i`, keeping the exactness flag.
    pub fn with_phi_at(&self, i: usize, value: f64) -> Self {
        let mut p = self.clone();
        p.phi[i] = value;
        p
    }

    /// Copy with the exactness flag overridden.
    pub fn flagged(&self, exact: bool) -> Result<Self> {
        Self::from_samples(
            self.grid.clone(),
            self.phi.clone(),
            self.dphi.clone(),
            self.ddphi.clone(),
            self.df.clone(),
            self.ddf.clone(),
            exact,
        )
    }
}

fn check_len(n: usize, cols: &[&Vec<f64>]) -> Result<()> {
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::Domain("sample columns differ in length from the grid".into()));
    }
    Ok(())
}

struct Segment {
    i: usize,
    h: f64,
    t: f64,
}

impl Segment {
    fn new(nodes: &[f64], i: usize, r: f64) -> Self {
        let h = nodes[i + 1] - nodes[i];
        Self { i, h, t: (r - nodes[i]) / h }
    }

    fn hermite(&self, y: &[f64], dy: &[f64]) -> f64 {
        hermite(self.t, self.h, y[self.i], y[self.i + 1], dy[self.i], dy[self.i + 1])
    }

    fn linear(&self, y: &[f64]) -> f64 {
        y[self.i] + self.t * (y[self.i + 1] - y[self.i])
    }
}

/// Cubic Hermite segment on `[0, h]` evaluated at fractional position `t`.
pub fn hermite(t: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Derivative of [`hermite`] with respect to the physical coordinate.
pub fn hermite_slope(t: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = -6.0 * t2 + 6.0 * t;
    let d11 = 3.0 * t2 - 2.0 * t;
    (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1
}

/// One invariant violation found by [`validate_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub node: usize,
    pub magnitude: f64,
}

/// Every violated invariant with its node index; empty means valid.
pub fn validate_profile(profile: &SolitonProfile) -> Vec<Violation> {
    validate_profile_with(profile, DEFAULT_CONSERVATION_TOL)
}

pub fn validate_profile_with(profile: &SolitonProfile, conservation_tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = profile.len();
    for i in 0..n {
        let cols = [profile.phi[i], profile.dphi[i], profile.ddphi[i], profile.df[i], profile.ddf[i]];
        if cols.iter().any(|v| !v.is_finite()) {
            out.push(Violation { invariant: "finite samples", node: i, magnitude: f64::NAN });
        }
        if profile.phi[i] <= 0.0 {
            out.push(Violation { invariant: "phi > 0", node: i, magnitude: profile.phi[i] });
        }
    }
    if !profile.is_exact_soliton || !out.is_empty() {
        return out;
    }
    let mut prev_r = f64::INFINITY;
    for (i, &r) in profile.grid.nodes.iter().enumerate() {
        let g = match profile.local(r) {
            Ok(g) => g,
            Err(_) => {
                out.push(Violation { invariant: "evaluable", node: i, magnitude: f64::NAN });
                continue;
            }
        };
        let defect = g.scalar[0] + g.df[0] * g.df[0] - 1.0;
        if defect.abs() > conservation_tol {
            out.push(Violation { invariant: "R + f'^2 = 1", node: i, magnitude: defect });
        }
        if g.scalar[0] >= prev_r {
            out.push(Violation {
                invariant: "R strictly decreasing",
                node: i,
                magnitude: g.scalar[0] - prev_r,
            });
        }
        prev_r = g.scalar[0];
        if i > 0 && profile.df[i] <= profile.df[i - 1] {
            out.push(Violation {
                invariant: "f' strictly increasing",
                node: i,
                magnitude: profile.df[i] - profile.df[i - 1],
            });
        }
        if profile.df[i] < 0.0 || profile.df[i] >= 1.0 {
            out.push(Violation { invariant: "0 <= f' < 1", node: i, magnitude: profile.df[i] });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola(n: usize) -> SolitonProfile {
        let grid = RadialGrid::uniform(1.0, 3.0, n).unwrap();
        let r = grid.nodes().to_vec();
        let phi = r.iter().map(|x| x * x).collect();
        let dphi = r.iter().map(|x| 2.0 * x).collect();
        SolitonProfile::from_samples(grid, phi, dphi, vec![2.0; n], vec![0.5; n], vec![0.0; n], false).unwrap()
    }

    #[test]
    fn grids_reject_bad_nodes() {
        assert!(RadialGrid::new(vec![1.0, 1.0, 2.0]).is_err());
        assert!(RadialGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(RadialGrid::uniform(2.0, 1.0, 10).is_err());
        assert!(RadialGrid::uniform(1.0, 2.0, MIN_NODES - 1).is_err());
        let g = RadialGrid::uniform(1.0, 2.0, 20).unwrap();
        assert_eq!(g.refined().len(), 39);
    }

    #[test]
    fn hermite_is_exact_on_cubics() {
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let (a, h) = (0.3, 0.7);
        for t in [0.0, 0.25, 0.5, 1.0] {
            let x = a + t * h;
            let v = hermite(t, h, f(a), f(a + h), df(a), df(a + h));
            let s = hermite_slope(t, h, f(a), f(a + h), df(a), df(a + h));
            assert!((v - f(x)).abs() < 1e-14 && (s - df(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn eval_outside_the_grid_is_a_range_error() {
        let p = parabola(33);
        assert!(matches!(p.eval(0.5), Err(Error::Range { .. })));
        assert!(matches!(p.eval(f64::NAN), Err(Error::Range { .. })));
        assert!((p.eval(2.0).unwrap().phi - 4.0).abs() < 1e-12);
    }

    #[test]
    fn residual_stats_never_pass_on_nan() {
        let st = ResidualStats::from_samples("X", &[1e-9, f64::NAN], 1.0);
        assert!(!st.pass && st.max_abs.is_nan());
        let st = ResidualStats::from_samples("X", &[1e-9, -2e-9], 1e-8);
        assert!(st.pass && st.max_abs == 2e-9 && st.n_samples == 2);
        assert!(!ResidualStats::from_samples("X", &[], 1.0).pass);
    }

    #[test]
    fn non_soliton_profiles_skip_curvature_invariants() {
        assert!(validate_profile(&parabola(33)).is_empty());
    }
}

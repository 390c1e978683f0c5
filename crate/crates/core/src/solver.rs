//! Construction of the Bryant soliton.
//!
//! The solution is seeded from the origin series at a small radius and
//! integrated outward with an adaptive Dormand–Prince 5(4) pair until the
//! scalar curvature falls below a threshold. Every accepted step becomes a
//! node of the returned profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{RadialGrid, ResidualStats, SolitonProfile};
use crate::poly::Poly;
use crate::series::OriginSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub seed_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integration stops once `R` drops below this value.
    pub stop_scalar_curvature: f64,
    pub max_radius: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed_radius: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            stop_scalar_curvature: 1e-3,
            max_radius: 1e4,
            max_steps: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let c = self;
        if !(c.seed_radius > 0.0 && c.seed_radius < 1.0) {
            return Err(Error::Config(format!("seed_radius must lie in (0, 1), got {}", c.seed_radius)));
        }
        if !(c.stop_scalar_curvature > 0.0 && c.stop_scalar_curvature < 1.0) {
            return Err(Error::Config(format!(
                "stop_scalar_curvature must lie in (0, 1), got {}",
                c.stop_scalar_curvature
            )));
        }
        if !(c.rel_tol > 0.0 && c.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(c.max_radius > c.seed_radius) {
            return Err(Error::Config("max_radius must exceed seed_radius".into()));
        }
        if c.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// Bound on `|R + f'^2 - 1|` promised by [`solve_bryant`].
    pub fn defect_bound(&self) -> f64 {
        10.0 * self.rel_tol
    }
}

/// State `(φ, φ', f')` at the seed radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedState {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub df: f64,
    /// `1 - φ'` evaluated from the series directly.
    pub omega: f64,
    /// Estimated truncation error of the series at `r`.
    pub remainder: f64,
}

/// Origin series evaluated at the seed radius.
///
/// The remainder is estimated by comparing the quartic-order seed
/// (`φ` through `r^5`, `f'` through `r^3`) against the full series at both
/// `r₀` and `r₀/2`; the larger discrepancy has to stay below `abs_tol`.
pub fn series_seed(config: &SolverConfig) -> Result<SeedState> {
    config.validate()?;
    let full = OriginSeries::new();
    let short = OriginSeries::with_orders(2);
    let r0 = config.seed_radius;
    let gap = |r: f64| {
        let dphi = (full.phi.eval(r) - short.phi.eval(r)).abs();
        let ddf = (full.df.eval(r) - short.df.eval(r)).abs();
        dphi.max(ddf)
    };
    let remainder = gap(r0).max(gap(0.5 * r0)).max(full.remainder_estimate(r0));
    if remainder > config.abs_tol {
        return Err(Error::Config(format!(
            "series remainder {remainder:e} at seed radius {r0} exceeds abs_tol {}; use a smaller seed radius",
            config.abs_tol
        )));
    }
    Ok(SeedState {
        r: r0,
        phi: full.phi.eval(r0),
        dphi: full.phi.eval_derivative(r0, 1),
        df: full.df.eval(r0),
        omega: Poly::new(vec![1.0]).sub(&full.phi.derivative()).eval(r0),
        remainder,
    })
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 3];

/// Integration state `(φ, ω, f')` with `ω = 1 - φ'`, which keeps `1 - φ'^2 = ω(2 - ω)`
/// at full relative precision near the origin.
fn f(y: &State) -> State {
    let (phi, w, q) = (y[0], y[1], y[2]);
    let p = 1.0 - w;
    let dp = w * (2.0 - w) / phi - q * p;
    [p, -dp, -2.0 * dp / phi]
}

/// One trial step; returns the 5th-order solution, its RHS (FSAL), and the error vector.
fn dp_step(y: &State, k1: &State, h: f64) -> (State, State, State) {
    let mut k = [[0.0; 3]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for c in 0..3 {
                ys[c] += h * A[s][j] * kj[c];
            }
        }
        k[s] = f(&ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 3];
    for (s, ks) in k.iter().enumerate() {
        for c in 0..3 {
            y5[c] += h * B5[s] * ks[c];
            err[c] += h * (B5[s] - B4[s]) * ks[c];
        }
    }
    debug_assert!(C.len() == 7);
    (y5, k[6], err)
}

fn scalar_curvature(y: &State) -> f64 {
    let (phi, w, q) = (y[0], y[1], y[2]);
    -2.0 * w * (2.0 - w) / (phi * phi) + 4.0 * q * (1.0 - w) / phi
}

/// Integrates the soliton system from the series seed until `R < s_min` or `r > max_radius`.
pub fn solve_bryant(config: &SolverConfig) -> Result<SolitonProfile> {
    let seed = series_seed(config)?;
    let origin = OriginSeries::new();
    let mut r = seed.r;
    let mut y: State = [seed.phi, seed.omega, seed.df];
    let mut k1 = f(&y);
    let mut nodes = vec![r];
    let mut phi = vec![y[0]];
    let mut dphi = vec![1.0 - y[1]];
    let mut df = vec![y[2]];
    let mut h = 0.1 * r;
    let mut steps = 0usize;
    loop {
        if steps >= config.max_steps {
            return Err(Error::Integration {
                r,
                reason: format!("max_steps = {} exceeded (last state phi={}, f'={})", config.max_steps, y[0], y[2]),
            });
        }
        if h < 1e-14 * r.max(1.0) {
            return Err(Error::Integration {
                r,
                reason: format!("step size underflow (last state phi={}, f'={})", y[0], y[2]),
            });
        }
        steps += 1;
        let (y_new, k_new, e) = dp_step(&y, &k1, h);
        let mut norm = 0.0;
        // absolute tolerances in curvature units: R carries 1/φ on f', 1/φ^2 on ω
        let phi_w = y[0].min(1.0);
        let weights = [phi_w, phi_w * phi_w, phi_w];
        for c in 0..3 {
            let sc = config.abs_tol * weights[c] + config.rel_tol * y[c].abs().max(y_new[c].abs());
            norm += (e[c] / sc).powi(2);
        }
        let norm = (norm / 3.0).sqrt();
        if !norm.is_finite() || y_new[0] <= 0.0 {
            h *= 0.25;
            continue;
        }
        if norm <= 1.0 {
            r += h;
            y = y_new;
            k1 = k_new;
            nodes.push(r);
            phi.push(y[0]);
            dphi.push(1.0 - y[1]);
            df.push(y[2]);
            let scalar = scalar_curvature(&y);
            if scalar < config.stop_scalar_curvature || r > config.max_radius {
                break;
            }
            let fac = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * norm.powf(-0.25)).clamp(0.1, 1.0);
        }
    }
    let grid = RadialGrid::new(nodes).map_err(|e| Error::Integration { r, reason: e.to_string() })?;
    let profile = SolitonProfile::exact(grid, phi, dphi, df, origin)?;
    let defect = first_integral_defect(&profile, config.defect_bound())?;
    if !defect.pass {
        return Err(Error::Accuracy {
            what: "first integral R + f'^2 = 1 not preserved".into(),
            achieved: defect.max_abs,
            required: defect.threshold,
        });
    }
    Ok(profile)
}

/// Per-node `|R + f'^2 - 1|` summarized against `threshold`.
pub fn first_integral_defect(profile: &SolitonProfile, threshold: f64) -> Result<ResidualStats> {
    let mut samples = Vec::with_capacity(profile.len());
    for &r in profile.grid().nodes() {
        let g = profile.local(r)?;
        samples.push(g.scalar[0] + g.df[0] * g.df[0] - 1.0);
    }
    Ok(ResidualStats::from_samples("FIRST_INTEGRAL", &samples, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        for (i, row) in A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - C[i]).abs() < 1e-15, "row {i}");
        }
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seed_is_on_the_first_integral() {
        let s = series_seed(&SolverConfig::default()).unwrap();
        assert!((s.omega - (1.0 - s.dphi)).abs() < 1e-15);
        // R + f'^2 = 1 holds to the order of the series
        let y = [s.phi, s.omega, s.df];
        assert!((scalar_curvature(&y) + s.df * s.df - 1.0).abs() < 1e-12);
    }
}

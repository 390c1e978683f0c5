//! Flat `key = value` configuration of the verification suite.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities::{PerturbTarget, PerturbationSpec, ResidualOptions, Window};
use crate::psi::SGrid;
use crate::solver::SolverConfig;

/// Solver tolerance the default thresholds are calibrated for.
pub const REFERENCE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub stop_scalar_curvature: f64,
    pub max_radius: f64,
    pub max_steps: usize,
    pub s_min: f64,
    pub eps_top: f64,
    pub psi_nodes_per_half: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub ode_window_lo: f64,
    pub ode_window_hi: f64,
    pub threshold_first_integral: f64,
    pub threshold_grad_r: f64,
    pub threshold_pointwise: f64,
    pub threshold_integral: f64,
    pub scale_thresholds: bool,
    pub cauchy_tol: f64,
    pub flux_levels: usize,
    pub div_radii: Vec<f64>,
    pub falsification: bool,
    pub perturb_target: PerturbTarget,
    pub perturb_amplitude: f64,
    pub perturb_center: f64,
    pub perturb_width: f64,
    pub perturb_r_min: f64,
    pub perturb_r_max: f64,
    pub perturb_spacing: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        let p = PerturbationSpec::default();
        Self {
            seed_radius: s.seed_radius,
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            stop_scalar_curvature: s.stop_scalar_curvature,
            max_radius: s.max_radius,
            max_steps: s.max_steps,
            s_min: 1e-3,
            eps_top: 1e-4,
            psi_nodes_per_half: 400,
            window_lo: 0.02,
            window_hi: 0.98,
            ode_window_lo: 0.05,
            ode_window_hi: 0.95,
            threshold_first_integral: 1e-8,
            threshold_grad_r: 1e-8,
            threshold_pointwise: 1e-6,
            threshold_integral: 1e-6,
            scale_thresholds: true,
            cauchy_tol: 1e-3,
            flux_levels: 10,
            div_radii: vec![1.0, 5.0, 20.0],
            falsification: true,
            perturb_target: p.target,
            perturb_amplitude: p.amplitude,
            perturb_center: p.center,
            perturb_width: p.width,
            perturb_r_min: p.r_min,
            perturb_r_max: p.r_max,
            perturb_spacing: p.spacing,
        }
    }
}

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed_radius", "radius where the origin series seeds the integration"),
    ("rel_tol", "relative tolerance of the integrator"),
    ("abs_tol", "absolute tolerance of the integrator"),
    ("stop_scalar_curvature", "integration stops once R drops below this"),
    ("max_radius", "hard upper limit on the integration radius"),
    ("max_steps", "hard limit on integrator steps"),
    ("s_min", "lowest node of the psi grid"),
    ("eps_top", "distance of the top psi node from s = 1"),
    ("psi_nodes_per_half", "psi nodes on each side of s = 1/2"),
    ("window_lo", "lower end of the R window for curvature identities"),
    ("window_hi", "upper end of the R window for curvature identities"),
    ("ode_window_lo", "lower end of the s window for the psi equations"),
    ("ode_window_hi", "upper end of the s window for the psi equations"),
    ("threshold_first_integral", "bound on |R + f'^2 - 1| at every node"),
    ("threshold_grad_r", "threshold of the gradient identity for R"),
    ("threshold_pointwise", "threshold of the other pointwise identities"),
    ("threshold_integral", "threshold of flux and integral checks"),
    ("scale_thresholds", "scale all thresholds by rel_tol / 1e-10 (true|false)"),
    ("cauchy_tol", "bound on the finest u Cauchy difference near s = 1"),
    ("flux_levels", "flux is checked at r = 2^l for l = 0..=flux_levels"),
    ("div_radii", "comma-separated radii for the flux inequality"),
    ("falsification", "run the perturbation block (true|false)"),
    ("perturb_target", "field carrying the bump (df|phi)"),
    ("perturb_amplitude", "bump amplitude delta"),
    ("perturb_center", "bump centre radius"),
    ("perturb_width", "bump width"),
    ("perturb_r_min", "start of the uniform resample"),
    ("perturb_r_max", "end of the uniform resample"),
    ("perturb_spacing", "spacing of the uniform resample"),
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

impl SuiteConfig {
    /// Overrides one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed_radius" => self.seed_radius = parse(key, v)?,
            "rel_tol" => self.rel_tol = parse(key, v)?,
            "abs_tol" => self.abs_tol = parse(key, v)?,
            "stop_scalar_curvature" => self.stop_scalar_curvature = parse(key, v)?,
            "max_radius" => self.max_radius = parse(key, v)?,
            "max_steps" => self.max_steps = parse(key, v)?,
            "s_min" => self.s_min = parse(key, v)?,
            "eps_top" => self.eps_top = parse(key, v)?,
            "psi_nodes_per_half" => self.psi_nodes_per_half = parse(key, v)?,
            "window_lo" => self.window_lo = parse(key, v)?,
            "window_hi" => self.window_hi = parse(key, v)?,
            "ode_window_lo" => self.ode_window_lo = parse(key, v)?,
            "ode_window_hi" => self.ode_window_hi = parse(key, v)?,
            "threshold_first_integral" => self.threshold_first_integral = parse(key, v)?,
            "threshold_grad_r" => self.threshold_grad_r = parse(key, v)?,
            "threshold_pointwise" => self.threshold_pointwise = parse(key, v)?,
            "threshold_integral" => self.threshold_integral = parse(key, v)?,
            "scale_thresholds" => self.scale_thresholds = parse_bool(key, v)?,
            "cauchy_tol" => self.cauchy_tol = parse(key, v)?,
            "flux_levels" => self.flux_levels = parse(key, v)?,
            "div_radii" => {
                self.div_radii = v
                    .split(',')
                    .map(|x| parse::<f64>(key, x.trim()))
                    .collect::<Result<_>>()?
            }
            "falsification" => self.falsification = parse_bool(key, v)?,
            "perturb_target" => self.perturb_target = v.parse()?,
            "perturb_amplitude" => self.perturb_amplitude = parse(key, v)?,
            "perturb_center" => self.perturb_center = parse(key, v)?,
            "perturb_width" => self.perturb_width = parse(key, v)?,
            "perturb_r_min" => self.perturb_r_min = parse(key, v)?,
            "perturb_r_max" => self.perturb_r_max = parse(key, v)?,
            "perturb_spacing" => self.perturb_spacing = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value, line) in parse_pairs(text)? {
            self.set(&key, &value).map_err(|e| match e {
                Error::Config(reason) => Error::Parse { line, reason },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver().validate()?;
        self.s_grid()?;
        for (name, w) in [("window", self.window()), ("ode_window", self.ode_window())] {
            if !(w.lo > 0.0 && w.lo < w.hi && w.hi < 1.0) {
                return Err(Error::Config(format!("{name} must satisfy 0 < lo < hi < 1")));
            }
        }
        let th = [
            self.threshold_first_integral,
            self.threshold_grad_r,
            self.threshold_pointwise,
            self.threshold_integral,
            self.cauchy_tol,
        ];
        if th.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        if self.div_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("div_radii must be positive".into()));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            seed_radius: self.seed_radius,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            stop_scalar_curvature: self.stop_scalar_curvature,
            max_radius: self.max_radius,
            max_steps: self.max_steps,
        }
    }

    pub fn s_grid(&self) -> Result<SGrid> {
        SGrid::geometric(self.s_min, self.eps_top, self.psi_nodes_per_half)
    }

    pub fn window(&self) -> Window {
        Window { lo: self.window_lo, hi: self.window_hi }
    }

    pub fn ode_window(&self) -> Window {
        Window { lo: self.ode_window_lo, hi: self.ode_window_hi }
    }

    /// Factor applied to every threshold.
    pub fn threshold_scale(&self) -> f64 {
        if self.scale_thresholds {
            self.rel_tol / REFERENCE_REL_TOL
        } else {
            1.0
        }
    }

    /// Scaled threshold for an identity or integral check.
    pub fn threshold(&self, base: f64) -> f64 {
        base * self.threshold_scale()
    }

    pub fn residual_options(&self, base_threshold: f64) -> ResidualOptions {
        ResidualOptions {
            window: self.window(),
            ode_window: self.ode_window(),
            threshold: self.threshold(base_threshold),
        }
    }

    pub fn perturbation(&self) -> PerturbationSpec {
        PerturbationSpec {
            target: self.perturb_target,
            amplitude: self.perturb_amplitude,
            center: self.perturb_center,
            width: self.perturb_width,
            r_min: self.perturb_r_min,
            r_max: self.perturb_r_max,
            spacing: self.perturb_spacing,
        }
    }
}

/// `(key, value, line)` triples of a flat configuration text.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse { line: i + 1, reason: format!("expected key = value, got {line:?}") });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse { line: i + 1, reason: "empty key".into() });
        }
        out.push((k.to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

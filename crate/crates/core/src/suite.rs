//! The full verification run.

use rayon::prelude::*;

use crate::config::SuiteConfig;
use crate::error::{Error, Result};
use crate::geometry::{PsiFunction, TrialPsi};
use crate::identities::{
    div_inequality_check, flux_functional, identity_residual, perturb, IdentityId, PsiInput,
};
use crate::profile::{validate_profile_with, ResidualStats, SolitonProfile};
use crate::psi::{self, asymptotics_check, extract_psi, PsiProfile};
use crate::report::{Provenance, VerificationReport};
use crate::solver::{first_integral_defect, solve_bryant};

/// Trial functions for the general identity.
pub fn trial_functions() -> Vec<(&'static str, Box<dyn PsiFunction + Send + Sync>)> {
    vec![
        (
            "psi=s/2",
            Box::new(TrialPsi { name: "s/2".into(), value: |s: f64| 0.5 * s, derivative: |_| 0.5 }),
        ),
        (
            "psi=2/3",
            Box::new(TrialPsi { name: "2/3".into(), value: |_| 2.0 / 3.0, derivative: |_| 0.0 }),
        ),
        (
            "psi=s^2",
            Box::new(TrialPsi { name: "s^2".into(), value: |s: f64| s * s, derivative: |s: f64| 2.0 * s }),
        ),
    ]
}

/// Failing entry standing in for a check that could not be evaluated.
fn failed(id: &str, detail: &str, threshold: f64, e: &Error) -> ResidualStats {
    let detail = if detail.is_empty() { e.to_string() } else { format!("{detail}: {e}") };
    ResidualStats::single(id, f64::NAN, f64::NAN, 0, threshold).with_detail(detail)
}

fn or_failed(r: Result<ResidualStats>, id: &str, detail: &str, threshold: f64) -> ResidualStats {
    r.unwrap_or_else(|e| failed(id, detail, threshold, &e))
}

/// Base threshold of each pointwise identity before scaling.
fn base_threshold(config: &SuiteConfig, id: IdentityId) -> f64 {
    match id {
        IdentityId::EqGradR => config.threshold_grad_r,
        IdentityId::FluxDecay | IdentityId::DivInequality => config.threshold_integral,
        _ => config.threshold_pointwise,
    }
}

/// One pointwise identity on `profile`. ODE identities read ψ from `own_psi`;
/// the others use the trial `s/2` (general identity) or the reference ψ.
fn pointwise(
    config: &SuiteConfig,
    profile: &SolitonProfile,
    own_psi: Option<&PsiProfile>,
    reference: &PsiProfile,
    id: IdentityId,
) -> Result<ResidualStats> {
    let opts = config.residual_options(base_threshold(config, id));
    let trials = trial_functions();
    let input = match id {
        IdentityId::EqGeneral => PsiInput::Trial(trials[0].1.as_ref()),
        IdentityId::EqOde | IdentityId::EqOde2 => {
            PsiInput::Extracted(own_psi.ok_or_else(|| Error::Domain("no psi samples for this profile".into()))?)
        }
        IdentityId::EqSimplified | IdentityId::EqFinal => PsiInput::Extracted(reference),
        _ => PsiInput::None,
    };
    identity_residual(profile, input, id, &opts)
}

/// ψ read node by node from a profile that need not be a soliton.
fn own_psi(config: &SuiteConfig, profile: &SolitonProfile) -> Result<PsiProfile> {
    let w = config.ode_window();
    PsiProfile::from_profile_nodes(profile, w.lo, w.hi)
}

/// ψ of a profile: extracted on the configured s grid for exact solitons,
/// read node by node over the ODE window otherwise.
pub fn psi_for_profile(config: &SuiteConfig, profile: &SolitonProfile) -> Result<PsiProfile> {
    if profile.is_exact_soliton() {
        extract_psi(profile, &config.s_grid()?)
    } else {
        own_psi(config, profile)
    }
}

/// Runs every check. A solver or extraction failure stops the run and is
/// recorded in `aborted`; individual check failures become failing entries.
pub fn run_suite(config: &SuiteConfig, supplied: Option<SolitonProfile>) -> VerificationReport {
    let mut report = VerificationReport::new(config.clone());
    if let Err(e) = run_into(config, supplied, &mut report) {
        report.aborted = Some(e.to_string());
    }
    report.finish();
    report
}

fn run_into(config: &SuiteConfig, supplied: Option<SolitonProfile>, report: &mut VerificationReport) -> Result<()> {
    config.validate()?;
    let base = match supplied {
        Some(p) => p,
        None => solve_bryant(&config.solver())?,
    };
    report.provenance = Provenance {
        profile_nodes: base.len(),
        psi_nodes: 0,
        exact_soliton: base.is_exact_soliton(),
        profile_r_max: base.grid().last(),
    };

    let violations = validate_profile_with(&base, config.threshold(config.threshold_first_integral));
    let mut v = ResidualStats::single("VALIDATE", violations.len() as f64, 0.0, base.len(), 0.0);
    if let Some(first) = violations.first() {
        v = v.with_detail(format!("{} at node {} ({:e})", first.invariant, first.node, first.magnitude));
    }
    report.push(v);
    let fi_thr = config.threshold(config.threshold_first_integral);
    report.push(or_failed(first_integral_defect(&base, fi_thr), "FIRST_INTEGRAL", "", fi_thr));

    let reference_profile = if base.is_exact_soliton() { None } else { Some(solve_bryant(&config.solver())?) };
    let reference_src = reference_profile.as_ref().unwrap_or(&base);
    let reference = extract_psi(reference_src, &config.s_grid()?)?;
    report.provenance.psi_nodes = reference.len();
    let base_psi = if base.is_exact_soliton() { Ok(reference.clone()) } else { own_psi(config, &base) };

    type Task<'a> = Box<dyn Fn() -> Vec<ResidualStats> + Send + Sync + 'a>;
    let base_ref = &base;
    let reference_ref = &reference;
    let base_psi_ref = base_psi.as_ref().ok();
    let curvature_ids = [IdentityId::EqGradR, IdentityId::EqLapR, IdentityId::EqBNorm];
    let mut tasks: Vec<Task> = Vec::new();
    for id in curvature_ids {
        tasks.push(Box::new(move || {
            let thr = config.threshold(base_threshold(config, id));
            vec![or_failed(pointwise(config, base_ref, None, reference_ref, id), id.name(), "", thr)]
        }));
    }
    tasks.push(Box::new(move || {
        let opts = config.residual_options(config.threshold_pointwise);
        trial_functions()
            .iter()
            .map(|(detail, f)| {
                let r = identity_residual(base_ref, PsiInput::Trial(f.as_ref()), IdentityId::EqGeneral, &opts);
                or_failed(r.map(|s| s.with_detail(*detail)), "EQ_GENERAL", detail, opts.threshold)
            })
            .collect()
    }));
    for id in [IdentityId::EqOde, IdentityId::EqOde2] {
        let err = base_psi.as_ref().err().cloned();
        tasks.push(Box::new(move || {
            let thr = config.threshold(config.threshold_pointwise);
            let r = match &err {
                Some(e) => Err(e.clone()),
                None => pointwise(config, base_ref, base_psi_ref, reference_ref, id),
            };
            vec![or_failed(r, id.name(), "", thr)]
        }));
    }
    tasks.push(Box::new(move || asymptotic_entries(reference_ref)));
    tasks.push(Box::new(move || vec![cauchy_entry(config, reference_ref, "finest"), cauchy_entry(config, reference_ref, "monotone")]));
    tasks.push(Box::new(move || vec![psi_below_diagonal(reference_ref)]));
    for id in [IdentityId::EqSimplified, IdentityId::EqFinal] {
        tasks.push(Box::new(move || {
            let thr = config.threshold(config.threshold_pointwise);
            vec![or_failed(pointwise(config, base_ref, None, reference_ref, id), id.name(), "", thr)]
        }));
    }
    tasks.push(Box::new(move || vec![flux_decay(config, base_ref, reference_ref)]));
    tasks.push(Box::new(move || {
        config.div_radii.iter().map(|&r| div_inequality_entry(config, base_ref, reference_ref, r)).collect()
    }));
    if config.falsification && base.is_exact_soliton() {
        tasks.push(Box::new(move || falsification(config, base_ref, reference_ref)));
    }
    let results: Vec<Vec<ResidualStats>> = tasks.par_iter().map(|t| t()).collect();
    for stats in results.into_iter().flatten() {
        report.push(stats);
    }
    Ok(())
}

fn asymptotic_entries(psi: &PsiProfile) -> Vec<ResidualStats> {
    let fit = match asymptotics_check(psi) {
        Ok(f) => f,
        Err(e) => {
            return ["limit_at_one", "slope_at_one", "cubic_at_zero"]
                .iter()
                .map(|d| failed("ASYMPTOTICS", d, 0.0, &e))
                .collect()
        }
    };
    vec![
        ResidualStats::single("ASYMPTOTICS", (psi.limit_at_one - 2.0 / 3.0).abs(), fit.remainder_top, 3, 1e-4)
            .with_detail("limit_extrapolated"),
        ResidualStats::single("ASYMPTOTICS", (fit.limit_at_one - 2.0 / 3.0).abs(), fit.remainder_top, fit.n_top, 1e-3)
            .with_detail("limit_at_one"),
        ResidualStats::single("ASYMPTOTICS", (fit.slope_at_one + 0.8).abs(), fit.remainder_top, fit.n_top, 0.05)
            .with_detail("slope_at_one"),
        ResidualStats::single("ASYMPTOTICS", (fit.cubic_at_zero - 1.0).abs(), fit.remainder_bottom, fit.n_bottom, 0.05)
            .with_detail("cubic_at_zero"),
    ]
}

/// Cauchy differences of `u` toward `s = 1`: the finest difference against
/// `cauchy_tol`, or the largest increase between successive levels against 0.
fn cauchy_entry(config: &SuiteConfig, psi: &PsiProfile, which: &str) -> ResidualStats {
    let deltas = psi::default_cauchy_deltas();
    match psi::u_cauchy(psi, &deltas) {
        Ok(d) => {
            if which == "finest" {
                let last = *d.last().unwrap();
                ResidualStats::single("U_CAUCHY", last, last, d.len(), config.cauchy_tol).with_detail(which)
            } else {
                let rise = d.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
                ResidualStats::single("U_CAUCHY", rise, rise, d.len(), 0.0).with_detail(which)
            }
        }
        Err(e) => failed("U_CAUCHY", which, config.cauchy_tol, &e),
    }
}

/// `max ψ/s` over the ψ nodes; the margin below 1 is `1 - max_abs`.
fn psi_below_diagonal(psi: &PsiProfile) -> ResidualStats {
    let ratios: Vec<f64> = psi.s_nodes().iter().zip(psi.psi()).map(|(s, p)| p / s).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rms = (ratios.iter().map(|r| r * r).sum::<f64>() / ratios.len() as f64).sqrt();
    let mut st = ResidualStats::single("PSI_LT_S", max, rms, ratios.len(), 1.0);
    st.pass = max < 1.0;
    st
}

fn flux_decay(config: &SuiteConfig, profile: &SolitonProfile, psi: &PsiProfile) -> ResidualStats {
    let thr = config.threshold(config.threshold_integral);
    let mut samples = Vec::new();
    let mut first_error = None;
    for l in 0..=config.flux_levels {
        let r = 2f64.powi(l as i32);
        match flux_functional(profile, psi, r) {
            Ok(v) => samples.push(v),
            Err(e) => {
                first_error.get_or_insert(format!("r={r}: {e}"));
                samples.push(f64::NAN);
            }
        }
    }
    let st = ResidualStats::from_samples("FLUX_DECAY", &samples, thr);
    match first_error {
        Some(e) => st.with_detail(e),
        None => st,
    }
}

fn div_inequality_entry(config: &SuiteConfig, profile: &SolitonProfile, psi: &PsiProfile, r: f64) -> ResidualStats {
    let thr = config.threshold(config.threshold_integral);
    let detail = format!("r={r}");
    match div_inequality_check(profile, psi, r) {
        Ok((lhs, rhs)) => {
            let excess = lhs - rhs;
            ResidualStats::single("DIV_INEQUALITY", excess.max(0.0), excess.abs(), 1, thr).with_detail(detail)
        }
        Err(e) => failed("DIV_INEQUALITY", &detail, thr, &e),
    }
}

/// Residuals of every pointwise identity and of the first integral on
/// profiles bumped by `δ` and `δ/2`: each must exceed ten times its
/// threshold, and halving `δ` must roughly halve it.
fn falsification(config: &SuiteConfig, base: &SolitonProfile, reference: &PsiProfile) -> Vec<ResidualStats> {
    let spec = config.perturbation();
    let half = spec.with_amplitude(0.5 * spec.amplitude);
    let profiles = (perturb(base, &spec), perturb(base, &half));
    let (p1, p2) = match profiles {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![failed("FALSIFICATION", "perturbation", 1.0, &e)],
    };
    let psi1 = own_psi(config, &p1).ok();
    let psi2 = own_psi(config, &p2).ok();
    let mut names: Vec<(&str, f64)> =
        vec![("FIRST_INTEGRAL", config.threshold(config.threshold_first_integral))];
    for id in IdentityId::POINTWISE {
        names.push((id.name(), config.threshold(base_threshold(config, id))));
    }
    let residual = |name: &str, p: &SolitonProfile, own: Option<&PsiProfile>| -> Result<f64> {
        if name == "FIRST_INTEGRAL" {
            return Ok(first_integral_defect(p, 1.0)?.max_abs);
        }
        let id: IdentityId = name.parse()?;
        Ok(pointwise(config, p, own, reference, id)?.max_abs)
    };
    names
        .par_iter()
        .flat_map_iter(|&(name, thr)| {
            let r1 = residual(name, &p1, psi1.as_ref());
            let r2 = residual(name, &p2, psi2.as_ref());
            let detection = format!("{name} detection");
            let scaling = format!("{name} scaling");
            match (r1, r2) {
                (Ok(a), Ok(b)) => vec![
                    ResidualStats::single("FALSIFICATION", 10.0 * thr / a, a, 1, 1.0).with_detail(detection),
                    ResidualStats::single("FALSIFICATION", (a / b - 2.0).abs(), b, 1, 0.5).with_detail(scaling),
                ],
                (Err(e), _) | (_, Err(e)) => vec![
                    failed("FALSIFICATION", &detection, 1.0, &e),
                    failed("FALSIFICATION", &scaling, 0.5, &e),
                ],
            }
        })
        .collect()
}

/// Residual of one identity on a profile perturbed with the configured bump
/// at amplitude `delta`, using the supplied reference ψ.
pub fn perturbed_residual(
    config: &SuiteConfig,
    base: &SolitonProfile,
    reference: &PsiProfile,
    id: IdentityId,
    delta: f64,
) -> Result<ResidualStats> {
    let p = perturb(base, &config.perturbation().with_amplitude(delta))?;
    let own = own_psi(config, &p).ok();
    pointwise(config, &p, own.as_ref(), reference, id)
}

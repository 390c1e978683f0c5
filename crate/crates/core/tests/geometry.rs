#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_forge::fd;
use soliton_forge::geometry::*;
use soliton_forge::profile::{validate_profile, CurvatureSample, RadialGrid, SolitonProfile};
use soliton_forge::solver::{solve_bryant, SolverConfig};
use soliton_forge::Result;

fn bryant() -> &'static SolitonProfile {
    static P: OnceLock<SolitonProfile> = OnceLock::new();
    P.get_or_init(|| solve_bryant(&SolverConfig::default()).unwrap())
}

fn flat(lo: f64, hi: f64, n: usize) -> SolitonProfile {
    let grid = RadialGrid::uniform(lo, hi, n).unwrap();
    let r = grid.nodes().to_vec();
    let z = vec![0.0; n];
    SolitonProfile::from_samples(grid, r, vec![1.0; n], z.clone(), z.clone(), z, false).unwrap()
}

fn state(lambda: f64, mu: f64, scalar: f64, d_scalar: f64, df: f64) -> LocalGeometry {
    LocalGeometry {
        r: 1.0,
        phi: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        df: [df, 0.0, 0.0],
        lambda: [lambda, 0.0, 0.0, 0.0],
        mu: [mu, 0.0, 0.0, 0.0],
        scalar: [scalar, d_scalar, 0.0, 0.0],
    }
}

#[test]
fn eval_reproduces_nodes_bit_for_bit() {
    let p = bryant();
    for (i, &r) in p.grid().nodes().iter().enumerate().skip(1).step_by(7) {
        let e = p.eval(r).unwrap();
        assert_eq!(e.phi, p.phi()[i]);
        assert_eq!(e.dphi, p.dphi()[i]);
        assert_eq!(e.df, p.df()[i]);
    }
}

#[test]
fn linear_data_is_interpolated_exactly() {
    let p = flat(0.1, 3.0, 17);
    let nodes = p.grid().nodes();
    for w in nodes.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        assert!((p.eval(m).unwrap().phi - m).abs() <= 1e-12);
    }
}

#[test]
fn near_origin_matches_series() {
    let phi = bryant().eval(0.01).unwrap().phi;
    let expected = 0.01 - 1e-6 / 36.0;
    assert!((phi - expected).abs() < 1e-12, "{phi} vs {expected}");
}

#[test]
fn solver_output_is_valid_and_violations_are_located() {
    let p = bryant();
    assert!(validate_profile(p).is_empty());
    let bad = p.with_phi_at(40, -p.phi()[40]);
    let v = validate_profile(&bad);
    assert!(v.iter().any(|v| v.invariant == "phi > 0" && v.node == 40), "{v:?}");
}

#[test]
fn perturbed_profile_flagged_exact_reports_conservation() {
    let p = bryant().with_scaled_df(1.01).unwrap().flagged(true).unwrap();
    let v = validate_profile(&p);
    assert!(v.iter().any(|v| v.invariant == "R + f'^2 = 1"), "{v:?}");
}

#[test]
fn refinement_keeps_node_values() {
    let p = bryant();
    let fine = p.resample(p.grid().refined()).unwrap();
    for &r in p.grid().nodes().iter().step_by(5) {
        let (a, b) = (p.eval(r).unwrap(), fine.eval(r).unwrap());
        for (x, y) in [(a.phi, b.phi), (a.dphi, b.dphi), (a.df, b.df)] {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-300), "r = {r}: {x} vs {y}");
        }
    }
}

#[test]
fn flat_space_operators() {
    let p = flat(0.2, 3.0, 57);
    let pos = |r: f64| -> Result<[f64; 3]> { Ok([r, 1.0, 0.0]) };
    assert!((divergence_radial(&p, &pos, 1.3).unwrap() - 3.0).abs() < 1e-12);
    let sq = |r: f64| -> Result<[f64; 3]> { Ok([r * r, 2.0 * r, 2.0]) };
    assert!((laplacian_radial(&p, &sq, 1.7).unwrap() - 6.0).abs() < 1e-12);
    let one = |_: f64| -> Result<[f64; 3]> { Ok([1.0, 0.0, 0.0]) };
    let zero = |_: f64| -> Result<[f64; 3]> { Ok([0.0; 3]) };
    assert!((sphere_flux(&p, &one, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
    assert_eq!(sphere_flux(&p, &zero, 1.0).unwrap(), 0.0);
    assert_eq!(divergence_radial(&p, &zero, 1.0).unwrap(), 0.0);
    assert_eq!(laplacian_radial(&p, &one, 1.0).unwrap(), 0.0);
    assert_eq!(ball_integral(&p, &zero, 0.5, 1.0).unwrap(), 0.0);
}

#[test]
fn unit_ball_volume_from_the_origin() {
    // the Bryant metric is flat to third order at the origin
    let p = bryant();
    let one = |_: f64| -> Result<[f64; 3]> { Ok([1.0, 0.0, 0.0]) };
    let v = ball_integral(p, &one, 0.0, 1e-2).unwrap();
    assert!((v / (4.0 * PI / 3.0 * 1e-6) - 1.0).abs() < 1e-4, "{v}");
    let flat_ball = ball_integral(&flat(1e-9, 2.0, 41), &one, 1e-9, 1.0).unwrap();
    assert!((flat_ball - 4.0 * PI / 3.0).abs() < 1e-10);
}

#[test]
fn b_vanishes_on_bryant() {
    let p = bryant();
    let worst = p.grid().nodes().iter().map(|&r| b_scalar(p, r).unwrap().abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn bryant_scalar_laplacian_identity() {
    let p = bryant();
    for &r in p.grid().nodes().iter().step_by(11) {
        let g = p.local(r).unwrap();
        let v = g.laplacian_scalar() + 2.0 * g.ricci_norm_sq() + g.df[0] * g.scalar[1];
        assert!(v.abs() <= 1e-6, "r = {r}: {v}");
    }
}

#[test]
fn x_radial_cases() {
    struct Zero;
    impl PsiFunction for Zero {
        fn value(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn derivative(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }
    let p = bryant();
    let r = 3.0;
    let g = p.local(r).unwrap();
    assert_eq!(x_radial(p, &Zero, r).unwrap(), g.scalar[1]);
    let half = TrialPsi { name: "s/2".into(), value: |s: f64| 0.5 * s, derivative: |_: f64| 0.5 };
    let psi = -g.scalar[1] / g.df[0];
    let expected = (0.5 * g.scalar[0] - psi) * g.df[0];
    assert!((x_radial(p, &half, r).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn scalar_slope_matches_finite_differences() {
    let p = bryant();
    let h = 1e-3;
    for r in [0.5, 1.0, 3.0, 10.0, 40.0, 200.0] {
        let xs: Vec<f64> = (-2..=2).map(|k| r + k as f64 * h).collect();
        let w = fd::weights(r, &xs, 1);
        let fd: f64 = xs.iter().zip(&w[1]).map(|(&x, c)| c * p.local(x).unwrap().scalar[0]).sum();
        let exact = p.local(r).unwrap().scalar[1];
        assert!((fd - exact).abs() <= 1e-6, "r = {r}: {fd} vs {exact}");
    }
}

/// `Σ a_k sin(k r + b_k) e^{-r/4}` with its first two derivatives.
fn random_field(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> Result<[f64; 3]> {
    let terms: Vec<(f64, f64, f64)> =
        (1..=3).map(|k| (rng.gen_range(-1.0..1.0), k as f64 * rng.gen_range(0.3..1.5), rng.gen_range(0.0..PI))).collect();
    move |r: f64| {
        let e = (-0.25 * r).exp();
        let mut w = [0.0; 3];
        for &(a, k, b) in &terms {
            let (s, c) = (k * r + b).sin_cos();
            let (v, dv, ddv) = (a * s, a * k * c, -a * k * k * s);
            w[0] += v * e;
            w[1] += (dv - 0.25 * v) * e;
            w[2] += (ddv - 0.5 * dv + 0.0625 * v) * e;
        }
        Ok(w)
    }
}

#[test]
fn divergence_theorem_on_random_fields() {
    let p = bryant();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let field = random_field(&mut rng);
        let a = rng.gen_range(0.1..2.0);
        let b = a + rng.gen_range(1.0..30.0);
        let integral = ball_integral_of(p, |r| divergence_radial(p, &field, r), a, b).unwrap();
        let delta = sphere_flux(p, &field, b).unwrap() - sphere_flux(p, &field, a).unwrap();
        assert!((integral - delta).abs() <= 1e-8 * (1.0 + delta.abs()), "[{a}, {b}]: {integral} vs {delta}");
    }
}

#[test]
fn b_tensor_oracle_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let v: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let sample = CurvatureSample { r: 1.0, lambda: v[0], mu: v[1], scalar: v[2], d_scalar: v[3] };
        let full = b_tensor_full(&sample, v[4]).norm_sq();
        let reduced = state(v[0], v[1], v[2], v[3], v[4]).b_norm_sq();
        assert!((full - reduced).abs() <= 1e-12 * reduced.max(1e-300), "{v:?}: {full} vs {reduced}");
    }
}

proptest! {
    #[test]
    fn b_tensor_is_antisymmetric_in_last_pair(v in prop::array::uniform5(-5.0f64..5.0)) {
        let sample = CurvatureSample { r: 1.0, lambda: v[0], mu: v[1], scalar: v[2], d_scalar: v[3] };
        let b = b_tensor_full(&sample, v[4]).0;
        for bi in &b {
            for j in 0..3 {
                for k in 0..3 {
                    prop_assert!((bi[j][k] + bi[k][j]).abs() <= 1e-14 * (1.0 + bi[j][k].abs()));
                }
            }
        }
    }

    #[test]
    fn b_vanishes_without_gradients(scalar in -10.0f64..10.0) {
        let sample = CurvatureSample { r: 1.0, lambda: 0.0, mu: 0.0, scalar, d_scalar: 0.0 };
        prop_assert_eq!(b_tensor_full(&sample, 0.0).norm_sq(), 0.0);
    }

    #[test]
    fn soliton_relations_force_beta_to_zero(
        lambda in -2.0f64..2.0,
        df in -2.0f64..2.0,
        log_dphi in -3.0f64..3.0,
    ) {
        // f'' = λ, f'φ'/φ = μ, R = λ + 2μ and R' = -2λf'
        let mu = df * log_dphi;
        let scalar = lambda + 2.0 * mu;
        let g = state(lambda, mu, scalar, -2.0 * lambda * df, df);
        let scale = (mu * df).abs() + (lambda * df).abs() + (scalar * df).abs();
        prop_assert!(g.beta().abs() <= 1e-14 * (1.0 + scale));
    }
}

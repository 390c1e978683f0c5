//! The rotationally symmetric steady soliton system in first-order form.
//!
//! State `(φ, p, q)` with `p = φ'` and `q = f'`:
//!
//! ```text
//! φ' = p
//! p' = (1 - p^2)/φ - q p        (spherical equation  f'φ'/φ = μ)
//! q' = -2 p'/φ                  (radial equation     f'' = λ)
//! ```

use crate::jet::Jet;

/// Order of the local Taylor expansions used to continue the solution between nodes.
pub const TAYLOR_ORDER: usize = 16;

pub type StateJet = Jet<TAYLOR_ORDER>;

/// Right-hand side `(φ', p', q')`.
#[inline]
pub fn rhs(phi: f64, p: f64, q: f64) -> [f64; 3] {
    let dp = (1.0 - p * p) / phi - q * p;
    let dq = -2.0 * dp / phi;
    [p, dp, dq]
}

/// Taylor coefficients of the solution through `(φ, p, q)` at the expansion
/// point, computed order by order from the system.
pub fn taylor_expand(phi: f64, p: f64, q: f64) -> (StateJet, StateJet) {
    let mut phi_j = StateJet::constant(phi);
    let mut p_j = StateJet::constant(p);
    let mut q_j = StateJet::constant(q);
    for k in 0..TAYLOR_ORDER - 1 {
        let dp = (1.0 - p_j * p_j) / phi_j - q_j * p_j;
        let dq = (-2.0 * dp) / phi_j;
        let inv = 1.0 / (k + 1) as f64;
        phi_j.c[k + 1] = p_j.c[k] * inv;
        p_j.c[k + 1] = dp.c[k] * inv;
        q_j.c[k + 1] = dq.c[k] * inv;
    }
    (phi_j, q_j)
}

/// States `(φ, p, q)` at `r0 + k h` for `k = 0..n`, stepping one Taylor
/// polynomial at a time. The samples lie on a single smooth trajectory.
pub fn march(start: [f64; 3], h: f64, n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n);
    let mut y = start;
    for _ in 0..n {
        out.push(y);
        let (pj, qj) = taylor_expand(y[0], y[1], y[2]);
        y = [pj.eval(h), pj.differentiate().eval(h), qj.eval(h)];
    }
    out
}

//! Finite-difference weights on arbitrary stencils (Fornberg's recursion).

/// Weights `w[k][j]` such that `f^(k)(x0) ≈ Σ_j w[k][j] f(x[j])` for `k = 0..=m`.
pub fn weights(x0: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivatives of orders `1..=m` of sampled data at every node, using a
/// `width`-point stencil centred where possible and shifted at the ends.
pub fn differentiate(x: &[f64], y: &[f64], m: usize, width: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let width = width.min(n);
    let half = width / 2;
    let mut out = vec![vec![0.0; n]; m];
    for i in 0..n {
        let start = i.saturating_sub(half).min(n - width);
        let xs = &x[start..start + width];
        let w = weights(x[i], xs, m);
        for k in 1..=m {
            out[k - 1][i] = w[k].iter().zip(&y[start..start + width]).map(|(a, b)| a * b).sum();
        }
    }
    out
}

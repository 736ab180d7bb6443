//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's own special functions or solvers.

#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

/// Student t density, normalized through statrs' log-gamma.
pub fn t_density(x: f64, df: f64) -> f64 {
    let log_norm =
        ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// t distribution function by integrating the density from the center.
pub fn t_cdf_quadrature(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let area = integrate(&|x| t_density(x, df), 0.0, t.abs(), 1e-15);
    if t > 0.0 {
        0.5 + area
    } else {
        0.5 - area
    }
}

/// Standard normal distribution function via statrs' erfc.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// KL divergence written out directly, for the projection oracles.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| {
            if *qi == 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).ln()
            }
        })
        .sum()
}

/// Vertices of `{p : lower <= p <= upper, sum p = 1}`: all but one
/// coordinate on a bound, the remaining one filling up to 1.
pub fn box_simplex_vertices(lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let n = lower.len();
    let mut out = Vec::new();
    for free in 0..n {
        for mask in 0..(1u32 << (n - 1)) {
            let mut p = vec![0.0; n];
            let mut bit = 0;
            for i in 0..n {
                if i == free {
                    continue;
                }
                p[i] = if mask >> bit & 1 == 1 {
                    upper[i]
                } else {
                    lower[i]
                };
                bit += 1;
            }
            let rest: f64 = p.iter().sum();
            let v = 1.0 - rest;
            if v >= lower[free] - 1e-12 && v <= upper[free] + 1e-12 {
                p[free] = v.clamp(lower[free], upper[free]);
                out.push(p);
            }
        }
    }
    out
}

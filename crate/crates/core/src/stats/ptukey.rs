//! CDF of the studentized range distribution.
//!
//! `P(Q <= q) = ∫₀^∞ f_s(s) · W(q·s) ds` where `s = sqrt(χ²_df / df)` and
//! `W(w) = k ∫ φ(z) [Φ(z) − Φ(z − w)]^{k−1} dz` is the range CDF of `k`
//! standard normals. Both integrals use composite Gauss–Legendre rules on
//! truncated domains, refined by doubling the panel count until successive
//! estimates agree to `TOLERANCE`.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use super::special::{ln_gamma_pos, normal_cdf, normal_pdf, normal_sf};
use crate::error::{Error, Result};

const ORDER: usize = 16;
const TOLERANCE: f64 = 1e-7;
const MIN_PANELS: usize = 8;
const MAX_PANELS: usize = 256;
const Z_LIMIT: f64 = 8.5;

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = pj;
                }
                deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / deriv;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
        }
        (nodes, weights)
    })
}

fn integrate<F: FnMut(f64) -> f64>(lo: f64, hi: f64, panels: usize, mut f: F) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// `Φ(z) − Φ(z − w)`, using upper tails on the right half to avoid cancellation.
fn normal_interval(z: f64, w: f64) -> f64 {
    if z > 0.5 * w {
        normal_sf(z - w) - normal_sf(z)
    } else {
        normal_cdf(z) - normal_cdf(z - w)
    }
}

/// Range CDF for `k` independent standard normals.
fn range_cdf(w: f64, k: usize, panels: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let exponent = (k - 1) as i32;
    let inner = integrate(-Z_LIMIT, Z_LIMIT, panels, |z| {
        normal_pdf(z) * normal_interval(z, w).powi(exponent)
    });
    (k as f64 * inner).min(1.0)
}

/// Log normalizing constant of the density of `sqrt(χ²_df / df)`.
fn ln_scale_const(df: f64) -> f64 {
    0.5 * df * df.ln() - ln_gamma_pos(0.5 * df) - (0.5 * df - 1.0) * LN_2
}

fn estimate(q: f64, k: usize, df: f64, panels: usize) -> f64 {
    let ln_c = ln_scale_const(df);
    if df < 1.0 {
        // Substitute u = s^df so the s^(df-1) singularity at 0 disappears:
        // f_s(s) ds = (c / df) exp(-df s² / 2) du.
        let upper = (80.0 / df).sqrt().powf(df);
        let c = (ln_c - df.ln()).exp();
        return integrate(0.0, upper, panels, |u| {
            let s = u.powf(1.0 / df);
            c * (-0.5 * df * s * s).exp() * range_cdf(q * s, k, panels)
        });
    }
    // s concentrates around sqrt((df-1)/df) with spread about 1/sqrt(2 df).
    let mode = ((df - 1.0) / df).sqrt();
    let spread = (0.5 / df).sqrt();
    let lo = (mode - 14.0 * spread).max(0.0);
    let hi = mode + 14.0 * spread;
    integrate(lo, hi, panels, |s| {
        let density = (ln_c + (df - 1.0) * s.ln() - 0.5 * df * s * s).exp();
        density * range_cdf(q * s, k, panels)
    })
}

/// `P(Q <= q)` for the studentized range of `k` means with `df` degrees of
/// freedom for the variance estimate.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> Result<f64> {
    if !(q >= 0.0) || k < 2 || !(df > 0.0 && df.is_finite()) {
        return Err(Error::invalid(format!(
            "studentized range needs q >= 0, k >= 2, df > 0; got q={q}, k={k}, df={df}"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    let mut panels = MIN_PANELS;
    let mut previous = estimate(q, k, df, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let current = estimate(q, k, df, panels);
        if (current - previous).abs() < TOLERANCE {
            return Ok(current.clamp(0.0, 1.0));
        }
        previous = current;
    }
    Ok(previous.clamp(0.0, 1.0))
}

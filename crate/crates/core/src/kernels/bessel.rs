//! Bessel functions of the first and second kind, orders 0 and 1.
//!
//! Ascending series below [`SERIES_LIMIT`], Hankel asymptotic expansion above.

use core::f64::consts::{FRAC_PI_4, PI};

use crate::prelude::*;

/// Crossover argument between the ascending series and the asymptotic
/// expansion. Both branches are accurate to about 1e-12 here.
pub const SERIES_LIMIT: f64 = 12.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J_0`, `J_1`, `Y_0`, `Y_1` at `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bessel01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

pub fn bessel01(x: f64) -> Bessel01 {
    if x < SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel01(x.abs()).j0
}

pub fn bessel_y0(x: f64) -> f64 {
    bessel01(x).y0
}

/// `H_0^{(1)}(x)` and `H_1^{(1)}(x)` for `x > 0`.
pub fn hankel01(x: f64) -> (C64, C64) {
    let b = bessel01(x);
    (C64::new(b.j0, b.y0), C64::new(b.j1, b.y1))
}

fn series(x: f64) -> Bessel01 {
    let q = 0.25 * x * x;
    let half = 0.5 * x;
    let log_term = (half.ln() + EULER_GAMMA) * 2.0 / PI;
    // t0 = (−q)^k/(k!)², t1 = (−q)^k/(k!(k+1)!)
    let (mut t0, mut t1) = (1.0, 1.0);
    let (mut j0, mut j1) = (1.0, 1.0);
    let mut y0_sum = 0.0;
    // ψ(k+1) + ψ(k+2) with ψ(n+1) = −γ + H_n
    let mut harmonic = 0.0;
    let mut y1_sum = (-2.0 * EULER_GAMMA + 1.0) * t1;
    for k in 1..60 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        j0 += t0;
        j1 += t1;
        y0_sum -= harmonic * t0;
        y1_sum += (2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0)) * t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    let j1 = half * j1;
    let y0 = log_term * j0 + (2.0 / PI) * y0_sum;
    let y1 = -2.0 / (PI * x) + (2.0 / PI) * half.ln() * j1 - half * y1_sum / PI;
    Bessel01 { j0, j1, y0, y1 }
}

/// Hankel's expansion `P_ν`, `Q_ν`, truncated at the smallest term.
fn pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if a.abs() > prev || a.abs() < 1e-18 {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    (p, q)
}

fn asymptotic(x: f64) -> Bessel01 {
    let c = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = pq(0.0, x);
    let (p1, q1) = pq(1.0, x);
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - 3.0 * FRAC_PI_4;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    Bessel01 {
        j0: c * (p0 * c0 - q0 * s0),
        y0: c * (p0 * s0 + q0 * c0),
        j1: c * (p1 * c1 - q1 * s1),
        y1: c * (p1 * s1 + q1 * c1),
    }
}

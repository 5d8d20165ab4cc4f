//! Two-dimensional kernels `(i/4) H_0^{(1)}(κr)` and the P−S difference.

use core::f64::consts::PI;

use super::bessel::hankel01;
use super::KernelError;
use crate::geometry::Vec2;
use crate::prelude::*;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(i/4) H_0^{(1)}(κr)`.
pub fn hankel_kernel(kappa: f64, r: f64) -> Result<C64, KernelError> {
    if !(r > 0.0) {
        return Err(KernelError::NonPositiveDistance(r));
    }
    Ok(planar_helmholtz(kappa, r).value)
}

/// Radial profile in the plane: gradient `d1 ẑ`, Hessian `a δ + b ẑẑ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radial2 {
    pub value: C64,
    pub d1: C64,
    pub a: C64,
    pub b: C64,
}

impl Radial2 {
    pub fn gradient(&self, zhat: Vec2) -> [C64; 2] {
        [self.d1 * zhat[0], self.d1 * zhat[1]]
    }

    pub fn hessian(&self, zhat: Vec2) -> [[C64; 2]; 2] {
        let mut h = [[C64::new(0.0, 0.0); 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                h[k][l] = self.b * (zhat[k] * zhat[l]);
            }
            h[k][k] += self.a;
        }
        h
    }
}

/// Radial profile of `(i/4) H_0^{(1)}(κr)`, `r > 0`.
pub fn planar_helmholtz(kappa: f64, r: f64) -> Radial2 {
    let i4 = C64::new(0.0, 0.25);
    if kappa == 0.0 {
        // Laplace limit up to an additive constant: −ln(r)/(2π).
        let d1 = C64::new(-1.0 / (2.0 * PI * r), 0.0);
        let a = d1 / r;
        return Radial2 {
            value: C64::new(-r.ln() / (2.0 * PI), 0.0),
            d1,
            a,
            b: -a * 2.0,
        };
    }
    let x = kappa * r;
    let (h0, h1) = hankel01(x);
    let value = i4 * h0;
    let d1 = -i4 * h1 * kappa;
    let d2 = -i4 * (h0 - h1 / x) * (kappa * kappa);
    let a = d1 / r;
    Radial2 {
        value,
        d1,
        a,
        b: d2 - a,
    }
}

/// `κs r` below which the planar difference kernel uses its series.
pub const PLANAR_DIFF_SWITCH: f64 = 2.0;

/// Radial profile of `(i/4)(H_0^{(1)}(κp r) − H_0^{(1)}(κs r))`, `r > 0`.
///
/// The kernel is bounded; its Hessian is logarithmically singular.
pub fn planar_diff_kernel(kp: f64, ks: f64, r: f64) -> Radial2 {
    if r * kp.max(ks) < PLANAR_DIFF_SWITCH {
        planar_diff_series(kp, ks, r)
    } else {
        let p = planar_helmholtz(kp, r);
        let s = planar_helmholtz(ks, r);
        Radial2 {
            value: p.value - s.value,
            d1: p.d1 - s.d1,
            a: p.a - s.a,
            b: p.b - s.b,
        }
    }
}

/// Series `Σ_k s^k (α_k + β_k ln(r/2))` with `s = r²/4`.
pub fn planar_diff_series(kp: f64, ks: f64, r: f64) -> Radial2 {
    let l = (0.5 * r).ln();
    let s = 0.25 * r * r;
    let (lkp, lks) = (kp.ln(), ks.ln());
    let inv2pi = 1.0 / (2.0 * PI);
    let base = C64::new(-EULER_GAMMA * inv2pi, 0.25);
    let zero = C64::new(0.0, 0.0);
    let (mut value, mut d1, mut a, mut b) = (zero, zero, zero, zero);
    let (mut pp, mut ps) = (1.0, 1.0); // κ^{2k}
    let mut fact2 = 1.0; // (k!)²
    let mut harmonic = 0.0;
    let mut sk = 1.0; // s^k
    let mut sk1 = 0.0; // s^{k-1}
    for k in 0..30 {
        let kf = k as f64;
        if k > 0 {
            pp *= kp * kp;
            ps *= ks * ks;
            fact2 *= kf * kf;
            harmonic += 1.0 / kf;
            sk1 = if k == 1 { 1.0 } else { sk1 * s };
            sk *= s;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let dk = pp - ps;
        let alpha = (base + harmonic * inv2pi) * dk - (pp * lkp - ps * lks) * inv2pi;
        let alpha = alpha * (sign / fact2);
        let beta = -dk * inv2pi * (sign / fact2);
        let term = alpha + beta * l;
        value += term * sk;
        if k >= 1 {
            let g = alpha * (2.0 * kf) + beta + beta * (2.0 * kf * l);
            // d1 = Σ (s^k / r) g_k ; a = d1/r = Σ s^{k-1} g_k / 4
            d1 += g * (sk / r);
            a += g * (0.25 * sk1);
            b += (g * (2.0 * kf - 2.0) + beta * (2.0 * kf)) * (0.25 * sk1);
        }
        if (dk / fact2).abs() * sk < 1e-19 && k > 2 {
            break;
        }
    }
    Radial2 { value, d1, a, b }
}

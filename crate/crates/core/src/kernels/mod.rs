//! Green kernels: 3D Helmholtz, the P−S difference kernel, the Kupradze
//! matrix, and their 2D Hankel counterparts.

pub mod bessel;
pub mod planar;

use core::f64::consts::PI;

use crate::geometry::{traction_from_jacobian, CMat3, CVec3, CZERO33};
use crate::prelude::*;

pub use planar::{hankel_kernel, planar_diff_kernel, planar_helmholtz};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("source and target points coincide")]
    Coincident,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("omega must be positive, got {0}")]
    Omega(f64),
    #[error("rho must be positive, got {0}")]
    Rho(f64),
    #[error("mu must be positive, got {0}")]
    Mu(f64),
    #[error("lambda must be non-negative, got {0}")]
    Lambda(f64),
}

impl ParamError {
    /// Name of the offending parameter.
    pub fn key(&self) -> &'static str {
        match self {
            ParamError::Omega(_) => "omega",
            ParamError::Rho(_) => "rho",
            ParamError::Mu(_) => "mu",
            ParamError::Lambda(_) => "lambda",
        }
    }
}

/// Frequency and isotropic material constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveParams {
    omega: f64,
    rho: f64,
    mu: f64,
    lambda: f64,
}

impl Default for WaveParams {
    /// `ω = ρ = μ = 1`, `λ = 2`, so `κp = 1/2` and `κs = 1`.
    fn default() -> Self {
        WaveParams {
            omega: 1.0,
            rho: 1.0,
            mu: 1.0,
            lambda: 2.0,
        }
    }
}

impl WaveParams {
    pub fn new(omega: f64, rho: f64, mu: f64, lambda: f64) -> Result<Self, ParamError> {
        if !(omega > 0.0) {
            return Err(ParamError::Omega(omega));
        }
        if !(rho > 0.0) {
            return Err(ParamError::Rho(rho));
        }
        if !(mu > 0.0) {
            return Err(ParamError::Mu(mu));
        }
        if !(lambda >= 0.0) {
            return Err(ParamError::Lambda(lambda));
        }
        Ok(WaveParams {
            omega,
            rho,
            mu,
            lambda,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Pressure wavenumber `ω √(ρ / (λ + 2μ))`.
    pub fn kappa_p(&self) -> f64 {
        self.omega * (self.rho / (self.lambda + 2.0 * self.mu)).sqrt()
    }

    /// Shear wavenumber `ω √(ρ / μ)`.
    pub fn kappa_s(&self) -> f64 {
        self.omega * (self.rho / self.mu).sqrt()
    }

    /// `ω² ρ`.
    pub fn omega2_rho(&self) -> f64 {
        self.omega * self.omega * self.rho
    }
}

/// Radial profile `f(r)` with the combinations needed for Cartesian
/// derivatives of `f(|z|)`:
///
/// * gradient `d1 ẑ`
/// * Hessian `a δ + b ẑẑ` with `a = f'/r`, `b = f'' − f'/r`
/// * third derivative `c (δẑ)_sym + (d3 − 3c) ẑẑẑ` with `c = b/r`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radial {
    pub value: C64,
    pub d1: C64,
    pub d2: C64,
    pub d3: C64,
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl Radial {
    pub fn gradient(&self, zhat: Vec3) -> CVec3 {
        [self.d1 * zhat.x, self.d1 * zhat.y, self.d1 * zhat.z]
    }

    pub fn hessian(&self, zhat: Vec3) -> CMat3 {
        let z = zhat.to_array();
        let mut h = CZERO33;
        for k in 0..3 {
            for l in 0..3 {
                h[k][l] = self.b * (z[k] * z[l]);
            }
            h[k][k] += self.a;
        }
        h
    }

    /// `t[m][k][l] = ∂_m ∂_k ∂_l f`.
    pub fn third(&self, zhat: Vec3) -> [CMat3; 3] {
        let z = zhat.to_array();
        let e = self.d3 - self.c * 3.0;
        let mut t = [CZERO33; 3];
        for (m, tm) in t.iter_mut().enumerate() {
            for k in 0..3 {
                for l in 0..3 {
                    let mut v = e * (z[m] * z[k] * z[l]);
                    let sym = if k == l { z[m] } else { 0.0 }
                        + if m == k { z[l] } else { 0.0 }
                        + if m == l { z[k] } else { 0.0 };
                    if sym != 0.0 {
                        v += self.c * sym;
                    }
                    tm[k][l] = v;
                }
            }
        }
        t
    }
}

/// `e^{iκr}/(4πr)`.
pub fn helmholtz_g3(kappa: f64, r: f64) -> Result<C64, KernelError> {
    if !(r > 0.0) {
        return Err(KernelError::NonPositiveDistance(r));
    }
    Ok(expi(kappa * r) / (4.0 * PI * r))
}

#[inline]
pub(crate) fn expi(t: f64) -> C64 {
    let (s, c) = t.sin_cos();
    C64::new(c, s)
}

/// Radial profile of `e^{iκr}/(4πr)` at `r > 0`.
#[inline]
pub fn helmholtz_radial(kappa: f64, r: f64) -> Radial {
    let inv = 1.0 / r;
    let f = expi(kappa * r) * (0.25 / PI * inv);
    let alpha = C64::new(-inv, kappa);
    let d1 = f * alpha;
    let d2 = f * (alpha * alpha + inv * inv);
    let d3 = f * (alpha * alpha * alpha + alpha * (3.0 * inv * inv) - 2.0 * inv * inv * inv);
    let a = d1 * inv;
    let b = f * (alpha * alpha + inv * inv - alpha * inv);
    Radial {
        value: f,
        d1,
        d2,
        d3,
        a,
        b,
        c: b * inv,
    }
}

/// Value, gradient and Hessian of `G_κ(x, y)` with respect to `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelDerivs {
    pub value: C64,
    pub gradient: CVec3,
    pub hessian: CMat3,
}

pub fn helmholtz_g3_derivs(kappa: f64, x: Vec3, y: Vec3) -> Result<KernelDerivs, KernelError> {
    let z = x - y;
    let r = z.norm();
    if !(r > 0.0) {
        return Err(KernelError::Coincident);
    }
    let rad = helmholtz_radial(kappa, r);
    let zhat = z / r;
    Ok(KernelDerivs {
        value: rad.value,
        gradient: rad.gradient(zhat),
        hessian: rad.hessian(zhat),
    })
}

/// `κ r` below which the difference kernel uses its Taylor series.
pub const DIFF_SWITCH: f64 = 0.5;
/// Number of Taylor terms of the difference kernel.
pub const DIFF_ORDER: usize = 20;

/// Radial profile of `ψ(r) = (e^{iκp r} − e^{iκs r})/(4πr)`.
///
/// At `r = 0` only `value`, `d1`, `d2` and `d3` are finite.
pub fn diff_kernel(kp: f64, ks: f64, r: f64) -> Radial {
    let kmax = kp.abs().max(ks.abs());
    if r * kmax < DIFF_SWITCH {
        diff_series(kp, ks, r)
    } else {
        diff_direct(kp, ks, r)
    }
}

/// Taylor branch: `ψ(r) = Σ_m c_m r^m`, `c_m = i^{m+1}(κp^{m+1} − κs^{m+1})/((m+1)! 4π)`.
pub fn diff_series(kp: f64, ks: f64, r: f64) -> Radial {
    let mut coef = [C64::new(0.0, 0.0); DIFF_ORDER + 1];
    let (mut pp, mut ps) = (1.0, 1.0);
    let mut fact = 1.0;
    let mut ipow = C64::new(1.0, 0.0);
    for (m, c) in coef.iter_mut().enumerate() {
        pp *= kp;
        ps *= ks;
        fact *= (m + 1) as f64;
        ipow *= C64::new(0.0, 1.0);
        *c = ipow * ((pp - ps) / (fact * 4.0 * PI));
    }
    let zero = C64::new(0.0, 0.0);
    let (mut value, mut d1, mut d2, mut d3) = (zero, zero, zero, zero);
    let (mut a, mut b, mut c) = (zero, zero, zero);
    // r^m, r^{m-1}, r^{m-2}, r^{m-3} handled with negative powers only where r > 0.
    let powi = |e: i32| -> f64 {
        if e >= 0 || r > 0.0 {
            r.powi(e)
        } else {
            f64::INFINITY
        }
    };
    for (m, cm) in coef.iter().enumerate() {
        let mf = m as f64;
        let mi = m as i32;
        value += cm * powi(mi);
        if m >= 1 {
            d1 += cm * (mf * powi(mi - 1));
            a += cm * (mf * powi(mi - 2));
            if m != 2 {
                b += cm * (mf * (mf - 2.0) * powi(mi - 2));
                c += cm * (mf * (mf - 2.0) * powi(mi - 3));
            }
        }
        if m >= 2 {
            d2 += cm * (mf * (mf - 1.0) * powi(mi - 2));
        }
        if m >= 3 {
            d3 += cm * (mf * (mf - 1.0) * (mf - 2.0) * powi(mi - 3));
        }
    }
    Radial {
        value,
        d1,
        d2,
        d3,
        a,
        b,
        c,
    }
}

/// Direct branch from `F(r) = e^{iκp r} − e^{iκs r}` and its derivatives.
pub fn diff_direct(kp: f64, ks: f64, r: f64) -> Radial {
    let ep = expi(kp * r);
    let es = expi(ks * r);
    let i = C64::new(0.0, 1.0);
    let f0 = ep - es;
    let f1 = i * (ep * kp - es * ks);
    let f2 = -(ep * (kp * kp) - es * (ks * ks));
    let f3 = -i * (ep * (kp * kp * kp) - es * (ks * ks * ks));
    let inv = 1.0 / r;
    let s = 0.25 / PI * inv;
    let value = f0 * s;
    let d1 = (f1 - f0 * inv) * s;
    let d2 = (f2 - f1 * (2.0 * inv) + f0 * (2.0 * inv * inv)) * s;
    let d3 = (f3 - f2 * (3.0 * inv) + f1 * (6.0 * inv * inv) - f0 * (6.0 * inv * inv * inv)) * s;
    let a = d1 * inv;
    let b = d2 - a;
    Radial {
        value,
        d1,
        d2,
        d3,
        a,
        b,
        c: b * inv,
    }
}

/// Hessian of `ψ(|z|)`; `z ≠ 0`.
pub fn diff_kernel_hessian(kp: f64, ks: f64, z: Vec3) -> CMat3 {
    let r = z.norm();
    diff_kernel(kp, ks, r).hessian(z / r)
}

/// Kupradze matrix `Γ(x, y) = (1/ω²ρ)(κs² G_κs I − ∇∇ψ)` with `ψ = G_κp − G_κs`.
pub fn kupradze_gamma(params: &WaveParams, x: Vec3, y: Vec3) -> Result<CMat3, KernelError> {
    let z = x - y;
    let r = z.norm();
    if !(r > 0.0) {
        return Err(KernelError::Coincident);
    }
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let gs = helmholtz_radial(ks, r).value;
    let h = diff_kernel(kp, ks, r).hessian(z / r);
    let scale = 1.0 / params.omega2_rho();
    let mut g = CZERO33;
    for k in 0..3 {
        for l in 0..3 {
            g[k][l] = -h[k][l] * scale;
        }
        g[k][k] += gs * (ks * ks * scale);
    }
    Ok(g)
}

/// The same matrix from the two individual Helmholtz Hessians. Loses accuracy
/// as `r → 0`; kept as an independent reference path.
pub fn kupradze_gamma_direct(params: &WaveParams, x: Vec3, y: Vec3) -> Result<CMat3, KernelError> {
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let s = helmholtz_g3_derivs(ks, x, y)?;
    let p = helmholtz_g3_derivs(kp, x, y)?;
    let scale = 1.0 / params.omega2_rho();
    let mut g = CZERO33;
    for k in 0..3 {
        for l in 0..3 {
            g[k][l] = (s.hessian[k][l] - p.hessian[k][l]) * scale;
        }
        g[k][k] += s.value * (ks * ks * scale);
    }
    Ok(g)
}

/// `∂_m Γ_kl(z)` as `[m][k][l]`, from the individual Helmholtz third derivatives.
pub fn kupradze_gradient(params: &WaveParams, z: Vec3) -> Result<[CMat3; 3], KernelError> {
    let r = z.norm();
    if !(r > 0.0) {
        return Err(KernelError::Coincident);
    }
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let zhat = z / r;
    let s = helmholtz_radial(ks, r);
    let p = helmholtz_radial(kp, r);
    let ts = s.third(zhat);
    let tp = p.third(zhat);
    let gs = s.gradient(zhat);
    let scale = 1.0 / params.omega2_rho();
    let mut out = [CZERO33; 3];
    for m in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                out[m][k][l] = (ts[m][k][l] - tp[m][k][l]) * scale;
            }
            out[m][k][k] += gs[m] * (ks * ks * scale);
        }
    }
    Ok(out)
}

/// Traction of the Kupradze columns as fields of `z`: entry `[k][j]` is the
/// `k`-th traction component, with normal `n`, of `z ↦ Γ(z) e_j`.
pub fn kupradze_field_traction(params: &WaveParams, z: Vec3, n: Vec3) -> Result<CMat3, KernelError> {
    let dg = kupradze_gradient(params, z)?;
    let mut out = CZERO33;
    for j in 0..3 {
        let mut jac = CZERO33;
        for k in 0..3 {
            for m in 0..3 {
                jac[k][m] = dg[m][k][j];
            }
        }
        let t = traction_from_jacobian(&jac, n, params.mu(), params.lambda());
        for k in 0..3 {
            out[k][j] = t[k];
        }
    }
    Ok(out)
}

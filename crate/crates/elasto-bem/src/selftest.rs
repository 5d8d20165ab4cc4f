//! Kernel and quadrature oracles that need no mesh.

use std::f64::consts::PI;

use elasto_bem_core::geometry::{CMat3, Vec3};
use elasto_bem_core::kernels::{
    diff_direct, diff_series, hankel_kernel, helmholtz_g3, kupradze_gamma, WaveParams, DIFF_SWITCH,
};
use elasto_bem_core::quadrature::{duffy_singular, gauss_legendre, gauss_triangle, integrate_regular};
use elasto_bem_core::C64;

/// Outcome of one oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Oracle {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub limit: f64,
}

impl Oracle {
    pub fn passed(&self) -> bool {
        self.rel_err <= self.limit
    }
}

/// Unit-distance points used by the differential checks.
pub const DIRECTIONS: [Vec3; 3] = [
    Vec3::new(1.0, 0.0, 0.0),
    Vec3::new(0.36, 0.48, 0.8),
    Vec3::new(-0.6, 0.0, 0.8),
];

/// Arguments `κr` of the line-integral check.
pub const LINE_ARGUMENTS: [f64; 9] = [0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0];

const D4: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Fourth-order central second derivative `∂_a ∂_b f` by nested stencils.
fn second<T>(f: &impl Fn(Vec3) -> T, x: Vec3, a: usize, b: usize, h: f64, mut acc: T, add: impl Fn(&mut T, T, f64)) -> T {
    for &(sa, wa) in &D4 {
        for &(sb, wb) in &D4 {
            let v = f(x + Vec3::axis(a) * (sa * h) + Vec3::axis(b) * (sb * h));
            add(&mut acc, v, wa * wb / (144.0 * h * h));
        }
    }
    acc
}

/// `|ΔG + κ²G| / max(|ΔG|, κ²|G|)` at `x`, Laplacian by differences.
pub fn helmholtz_residual(kappa: f64, x: Vec3) -> f64 {
    let g = |p: Vec3| helmholtz_g3(kappa, p.norm()).expect("off origin");
    let h = 1e-2 * x.norm();
    let lap: C64 = (0..3)
        .map(|a| second(&g, x, a, a, h, C64::new(0.0, 0.0), |acc, v, w| *acc += v * w))
        .sum();
    let kg = g(x) * (kappa * kappa);
    (lap + kg).norm() / lap.norm().max(kg.norm())
}

/// Largest relative residual of `μΔΓ + (λ+μ)∇∇·Γ + ω²ρΓ` over the columns
/// of the Kupradze matrix at `x`.
pub fn kupradze_residual(params: &WaveParams, x: Vec3) -> f64 {
    let gamma = |p: Vec3| kupradze_gamma(params, p, Vec3::ZERO).expect("off origin");
    let h = 1e-2 * x.norm();
    let zero: CMat3 = [[C64::new(0.0, 0.0); 3]; 3];
    let add = |acc: &mut CMat3, v: CMat3, w: f64| {
        for k in 0..3 {
            for l in 0..3 {
                acc[k][l] += v[k][l] * w;
            }
        }
    };
    let mut d2 = [[zero; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            d2[a][b] = second(&gamma, x, a, b, h, zero, add);
            d2[b][a] = d2[a][b];
        }
    }
    let g = gamma(x);
    let (mu, lambda) = (params.mu(), params.lambda());
    let mut worst: f64 = 0.0;
    for col in 0..3 {
        let mut res: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..3 {
            let lap: C64 = (0..3).map(|a| d2[a][a][k][col]).sum();
            let graddiv: C64 = (0..3).map(|a| d2[k][a][a][col]).sum();
            let mass = g[k][col] * params.omega2_rho();
            res = res.max((lap * mu + graddiv * (lambda + mu) + mass).norm());
            scale = scale.max((lap * mu).norm()).max(mass.norm());
        }
        worst = worst.max(res / scale);
    }
    worst
}

/// `(i/4) H₀⁽¹⁾(x)` as the line integral of the 3D kernel along an axis
/// at distance `x/κ`: `(1/2π) ∫_1^∞ e^{ixu}/√(u²−1) du`, taken on the path
/// `u = 1 + i v²` where the integrand decays like `e^{−x v²}`.
pub fn line_integral_kernel(x: f64) -> C64 {
    let vmax = (45.0 / x).sqrt();
    let (nodes, weights) = gauss_legendre(40);
    let pieces = 64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..pieces {
        let a = vmax * p as f64 / pieces as f64;
        let b = vmax * (p + 1) as f64 / pieces as f64;
        for (t, w) in nodes.iter().zip(&weights) {
            let v = a + (b - a) * t;
            let root = C64::new(-v * v, 2.0).sqrt();
            acc += (-x * v * v).exp() / root * (w * (b - a));
        }
    }
    let phase = C64::new(x.cos(), x.sin());
    C64::new(0.0, 2.0) * phase * acc / (2.0 * PI)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Largest relative error of the degree-`d` triangle rule on the monomials
/// `x^a y^b`, `a + b ≤ d`, over the reference triangle.
pub fn triangle_rule_error(degree: usize) -> f64 {
    let rule = gauss_triangle(degree).expect("supported degree");
    let t = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
    let mut worst: f64 = 0.0;
    for a in 0..=degree as u32 {
        for b in 0..=(degree as u32 - a) {
            let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
            let got = integrate_regular(&t, &rule, |p, _| C64::new(p.x.powi(a as i32) * p.y.powi(b as i32), 0.0));
            worst = worst.max((got.re - exact).abs() / exact);
        }
    }
    worst
}

/// `∫_t 1/|y − p|` for `p` inside `t`, closed form.
fn inverse_distance_exact(t: &[Vec3; 3], p: Vec3) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        let e = (b - a).normalized();
        let foot = a + e * (p - a).dot(e);
        let h = (p - foot).norm();
        let (sa, sb) = ((a - foot).dot(e), (b - foot).dot(e));
        total += h * ((sb / h).asinh() - (sa / h).asinh());
    }
    total
}

/// Runs every oracle with its acceptance limit.
pub fn run(params: &WaveParams) -> Vec<Oracle> {
    let mut out = Vec::new();
    let mut push = |name: String, value: f64, reference: f64, rel_err: f64, limit: f64| {
        out.push(Oracle {
            name,
            value,
            reference,
            abs_err: (value - reference).abs(),
            rel_err,
            limit,
        })
    };
    for (label, kappa) in [("p", params.kappa_p()), ("s", params.kappa_s())] {
        let worst = DIRECTIONS.iter().map(|&x| helmholtz_residual(kappa, x)).fold(0.0, f64::max);
        push(format!("helmholtz_residual_{label}"), worst, 0.0, worst, 1e-5);
    }
    let worst = DIRECTIONS.iter().map(|&x| kupradze_residual(params, x)).fold(0.0, f64::max);
    push("kupradze_residual".into(), worst, 0.0, worst, 1e-5);
    for x in LINE_ARGUMENTS {
        let h = hankel_kernel(1.0, x).expect("positive argument");
        let m = line_integral_kernel(x);
        let err = (h - m).norm();
        push(format!("line_integral_kr_{x}"), h.norm(), m.norm(), err / m.norm(), 1e-8);
    }
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let r = DIFF_SWITCH / kp.max(ks);
    let (a, b) = (diff_series(kp, ks, r), diff_direct(kp, ks, r));
    let err = (a.d2 - b.d2).norm() / b.d2.norm();
    push("difference_kernel_branches".into(), a.d2.norm(), b.d2.norm(), err, 1e-12);
    let worst = (1..=20).map(triangle_rule_error).fold(0.0, f64::max);
    push("triangle_rules_exact".into(), worst, 0.0, worst, 1e-13);
    let t = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.1, 0.05, 0.0)];
    let p = Vec3::new(0.4, 0.02, 0.0);
    let bary = {
        // solve p = t0 + s (t1 − t0) + u (t2 − t0) in the xy-plane
        let (e1, e2, d) = (t[1] - t[0], t[2] - t[0], p - t[0]);
        let det = e1.x * e2.y - e1.y * e2.x;
        let s = (d.x * e2.y - d.y * e2.x) / det;
        let u = (e1.x * d.y - e1.y * d.x) / det;
        [1.0 - s - u, s, u]
    };
    let got = duffy_singular(&t, bary, 8, |y, _| C64::new(1.0 / y.distance(p), 0.0)).expect("inside");
    let exact = inverse_distance_exact(&t, p);
    push("point_singular_rule".into(), got.re, exact, (got.re - exact).abs() / exact, 1e-12);
    out
}

//! Quadrature on segments and triangles: Gauss rules, Duffy and
//! Sauter–Schwab transforms for `1/r` singularities, adaptive subdivision for
//! nearly singular integrands, and a graded rule for logarithmic endpoints.

use core::f64::consts::PI;

use crate::mesh::closest_point_on_triangle;
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("no triangle rule of degree {0}; supported degrees are 1..=20")]
    UnsupportedDegree(usize),
    #[error("singular point lies outside the triangle")]
    OutsideTriangle,
    #[error("target lies on the integration triangle")]
    ZeroDistance,
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    /// Reference coordinates `(ξ, η)`; barycentrics are `(1−ξ−η, ξ, η)`.
    pub points: Vec<[f64; 2]>,
    /// Sum to 1/2.
    pub weights: Vec<f64>,
    /// Polynomial exactness degree.
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric coordinates of node `q`.
    pub fn barycentric(&self, q: usize) -> [f64; 3] {
        let [s, t] = self.points[q];
        [1.0 - s - t, s, t]
    }
}

// (weight normalised to total 1, barycentric generator)
type Orbit = (f64, [f64; 3]);

const DEG4: [Orbit; 2] = [
    (0.223381589678011, [0.108103018168070, 0.445948490915965, 0.445948490915965]),
    (0.109951743655322, [0.816847572980459, 0.091576213509771, 0.091576213509771]),
];
const DEG5: [Orbit; 3] = [
    (0.225, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
    (0.132394152788506, [0.059715871789770, 0.470142064105115, 0.470142064105115]),
    (0.125939180544827, [0.797426985353087, 0.101286507323456, 0.101286507323456]),
];
const DEG6: [Orbit; 3] = [
    (0.116786275726379, [0.501426509658179, 0.249286745170910, 0.249286745170910]),
    (0.050844906370207, [0.873821971016996, 0.063089014491502, 0.063089014491502]),
    (0.082851075618374, [0.053145049844817, 0.310352451033784, 0.636502499121399]),
];

fn from_orbits(orbits: &[Orbit], degree: usize) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for &(w, b) in orbits {
        let mut seen: Vec<[f64; 3]> = Vec::new();
        for p in [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]] {
            let q = [b[p[0]], b[p[1]], b[p[2]]];
            if !seen.contains(&q) {
                seen.push(q);
                points.push([q[1], q[2]]);
                weights.push(0.5 * w);
            }
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

/// Collapsed tensor Gauss rule exact to `degree`.
fn conical_product(degree: usize) -> TriangleRule {
    let nu = (degree + 2).div_ceil(2);
    let nv = (degree + 1).div_ceil(2);
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (u, a) in xu.iter().zip(&wu) {
        for (v, b) in xv.iter().zip(&wv) {
            points.push([u * (1.0 - v), u * v]);
            weights.push(a * b * u);
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

/// Rule exact for all polynomials up to `degree` (1..=20).
///
/// Degrees up to 6 use fully symmetric tables; higher degrees use a collapsed
/// Gauss product rule.
pub fn gauss_triangle(degree: usize) -> Result<TriangleRule, QuadError> {
    match degree {
        1 => Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            degree: 1,
        }),
        2 => Ok(TriangleRule {
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        }),
        3 | 4 => Ok(from_orbits(&DEG4, 4)),
        5 => Ok(from_orbits(&DEG5, 5)),
        6 => Ok(from_orbits(&DEG6, 6)),
        7..=20 => Ok(conical_product(degree)),
        d => Err(QuadError::UnsupportedDegree(d)),
    }
}

/// Physical point of barycentric coordinates `b` in triangle `t`.
#[inline]
pub fn bary_point(t: &[Vec3; 3], b: [f64; 3]) -> Vec3 {
    t[0] * b[0] + t[1] * b[1] + t[2] * b[2]
}

fn area(t: &[Vec3; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm()
}

fn diameter(t: &[Vec3; 3]) -> f64 {
    (t[1] - t[0])
        .norm()
        .max((t[2] - t[0]).norm())
        .max((t[2] - t[1]).norm())
}

/// `∫_t f` with a regular rule; `f` receives the point and its barycentrics.
pub fn integrate_regular(
    t: &[Vec3; 3],
    rule: &TriangleRule,
    mut f: impl FnMut(Vec3, [f64; 3]) -> C64,
) -> C64 {
    let jac = 2.0 * area(t);
    let mut acc = C64::new(0.0, 0.0);
    for q in 0..rule.len() {
        let b = rule.barycentric(q);
        acc += f(bary_point(t, b), b) * (rule.weights[q] * jac);
    }
    acc
}

/// Emits `(point, barycentrics, weight)` of a Duffy rule with `n × n` Gauss
/// points for integrands behaving like `1/|y − p|`.
///
/// `p` is given in barycentric coordinates of `t` and must lie in the closed
/// triangle. The triangle is split into pieces with apex `p`, one per edge not
/// containing `p`. On each piece the point is `p + τ (q(σ) − p)` with `q` on
/// the edge at signed offset `h sinh σ` from the foot of the perpendicular
/// (`h` the apex height), so the area element is `τ h² cosh σ` and `1/|y − p|`
/// times it is the constant `h`.
pub fn duffy_nodes(
    t: &[Vec3; 3],
    p: [f64; 3],
    n: usize,
    mut emit: impl FnMut(Vec3, [f64; 3], f64),
) -> Result<(), QuadError> {
    if p.iter().any(|&c| c < -1e-14) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(QuadError::OutsideTriangle);
    }
    let (x, w) = gauss_legendre(n);
    let apex = bary_point(t, p);
    let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for i in 0..3 {
        if p[i] <= 1e-15 {
            continue;
        }
        let (ia, ib) = ((i + 1) % 3, (i + 2) % 3);
        let (a, b) = (t[ia], t[ib]);
        let len = (b - a).norm();
        let e = (b - a) / len;
        let along = (apex - a).dot(e);
        let h = (apex - (a + e * along)).norm();
        let (sa, sb) = ((-along / h).asinh(), ((len - along) / h).asinh());
        for (xs, ws) in x.iter().zip(&w) {
            let sigma = sa + (sb - sa) * xs;
            let lam = (along + h * sigma.sinh()) / len;
            let q: [f64; 3] = core::array::from_fn(|k| (1.0 - lam) * corners[ia][k] + lam * corners[ib][k]);
            let jac = ws * (sb - sa) * h * h * sigma.cosh();
            for (xt, wt) in x.iter().zip(&w) {
                let b: [f64; 3] = core::array::from_fn(|k| p[k] + xt * (q[k] - p[k]));
                emit(bary_point(t, b), b, jac * wt * xt);
            }
        }
    }
    Ok(())
}

/// `∫_t f` for `f` with a `1/r` singularity at barycentric point `p`.
pub fn duffy_singular(
    t: &[Vec3; 3],
    p: [f64; 3],
    n: usize,
    mut f: impl FnMut(Vec3, [f64; 3]) -> C64,
) -> Result<C64, QuadError> {
    let mut acc = C64::new(0.0, 0.0);
    duffy_nodes(t, p, n, |y, b, w| acc += f(y, b) * w)?;
    Ok(acc)
}

/// Emits nodes of `rule` on a recursive 4-way subdivision of `t`, refining
/// every piece whose distance to `target` is below `eta` times its diameter.
pub fn near_singular_nodes(
    t: &[Vec3; 3],
    target: Vec3,
    rule: &TriangleRule,
    eta: f64,
    mut emit: impl FnMut(Vec3, [f64; 3], f64),
) -> Result<(), QuadError> {
    let d = target.distance(closest_point_on_triangle(target, t[0], t[1], t[2]));
    if !(d > 1e-14 * diameter(t)) {
        return Err(QuadError::ZeroDistance);
    }
    let base = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    subdivide(t, &base, target, rule, eta, 0, &mut emit);
    Ok(())
}

const MAX_DEPTH: usize = 40;

fn subdivide(
    t: &[Vec3; 3],
    sub: &[[f64; 3]; 3],
    target: Vec3,
    rule: &TriangleRule,
    eta: f64,
    depth: usize,
    emit: &mut impl FnMut(Vec3, [f64; 3], f64),
) {
    let phys = [bary_point(t, sub[0]), bary_point(t, sub[1]), bary_point(t, sub[2])];
    let d = target.distance(closest_point_on_triangle(target, phys[0], phys[1], phys[2]));
    if d >= eta * diameter(&phys) || depth >= MAX_DEPTH {
        let jac = 2.0 * area(&phys);
        for q in 0..rule.len() {
            let r = rule.barycentric(q);
            let mut b = [0.0; 3];
            for (k, bk) in b.iter_mut().enumerate() {
                *bk = sub[0][k] * r[0] + sub[1][k] * r[1] + sub[2][k] * r[2];
            }
            emit(bary_point(t, b), b, rule.weights[q] * jac);
        }
        return;
    }
    let mid = |a: &[f64; 3], b: &[f64; 3]| -> [f64; 3] { core::array::from_fn(|k| 0.5 * (a[k] + b[k])) };
    let m01 = mid(&sub[0], &sub[1]);
    let m12 = mid(&sub[1], &sub[2]);
    let m20 = mid(&sub[2], &sub[0]);
    for child in [
        [sub[0], m01, m20],
        [m01, sub[1], m12],
        [m20, m12, sub[2]],
        [m01, m12, m20],
    ] {
        subdivide(t, &child, target, rule, eta, depth + 1, emit);
    }
}

/// `∫_t f` for `f` nearly singular at an off-triangle `target`.
pub fn near_singular(
    t: &[Vec3; 3],
    target: Vec3,
    rule: &TriangleRule,
    eta: f64,
    mut f: impl FnMut(Vec3, [f64; 3]) -> C64,
) -> Result<C64, QuadError> {
    let mut acc = C64::new(0.0, 0.0);
    near_singular_nodes(t, target, rule, eta, |y, b, w| acc += f(y, b) * w)?;
    Ok(acc)
}

/// How two panels touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanelContact {
    Identical,
    Edge,
    Vertex,
}

/// Node of a Sauter–Schwab rule on the reference pair `T̂ × T̂`,
/// `T̂ = {0 ≤ v ≤ u ≤ 1}`, parametrising a triangle `(A, B, C)` as
/// `A + u (B − A) + v (C − B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairNode {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub weight: f64,
}

/// Sauter–Schwab rule with `n` Gauss points per direction of `[0,1]⁴`.
///
/// Shared geometry must be parametrised consistently: for `Edge` both
/// triangles start with the common edge `A → B` in the same direction, for
/// `Vertex` both start with the common vertex `A`. Weights sum to 1/4.
pub fn sauter_schwab(contact: PanelContact, n: usize) -> Vec<PairNode> {
    let (g, w) = gauss_legendre(n);
    let mut nodes = Vec::new();
    for (&xi, &w0) in g.iter().zip(&w) {
        for (&e1, &w1) in g.iter().zip(&w) {
            for (&e2, &w2) in g.iter().zip(&w) {
                for (&e3, &w3) in g.iter().zip(&w) {
                    let base = w0 * w1 * w2 * w3;
                    let mut push = |x: [f64; 2], y: [f64; 2], wt: f64| {
                        nodes.push(PairNode { x, y, weight: wt });
                    };
                    match contact {
                        PanelContact::Identical => {
                            let wt = base * xi * xi * xi * e1 * e1 * e2;
                            let a = [xi, xi * (1.0 - e1 + e1 * e2)];
                            let b = [xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1)];
                            push(a, b, wt);
                            push(b, a, wt);
                            let a = [xi, xi * e1 * (1.0 - e2 + e2 * e3)];
                            let b = [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)];
                            push(a, b, wt);
                            push(b, a, wt);
                            let a = [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)];
                            let b = [xi, xi * e1 * (1.0 - e2)];
                            push(a, b, wt);
                            push(b, a, wt);
                        }
                        PanelContact::Edge => {
                            let w0 = base * xi * xi * xi * e1 * e1;
                            push(
                                [xi, xi * e1 * e3],
                                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                                w0,
                            );
                            let wt = w0 * e2;
                            push(
                                [xi, xi * e1],
                                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                                wt,
                            );
                            push(
                                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                                [xi, xi * e1 * e2 * e3],
                                wt,
                            );
                            push(
                                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                                [xi, xi * e1],
                                wt,
                            );
                            push(
                                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                                [xi, xi * e1 * e2],
                                wt,
                            );
                        }
                        PanelContact::Vertex => {
                            let wt = base * xi * xi * xi * e2;
                            let a = [xi, xi * e1];
                            let b = [xi * e2, xi * e2 * e3];
                            push(a, b, wt);
                            push(b, a, wt);
                        }
                    }
                }
            }
        }
    }
    nodes
}

/// Barycentrics, with respect to `(A, B, C)`, of the reference point `(u, v)`.
#[inline]
pub fn ss_barycentric(p: [f64; 2]) -> [f64; 3] {
    [1.0 - p[0], p[0] - p[1], p[1]]
}

/// Nodes on `[0, 1]` graded geometrically toward 0 for integrands with a
/// logarithmic endpoint singularity: `levels` intervals `[σ^{k+1}, σ^k]`
/// plus `[0, σ^levels]`, each with an `n`-point Gauss rule.
pub fn graded_log_rule(n: usize, levels: usize, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (g, w) = gauss_legendre(n);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = hi * sigma;
        for (x, wx) in g.iter().zip(&w) {
            xs.push(lo + (hi - lo) * x);
            ws.push((hi - lo) * wx);
        }
        hi = lo;
    }
    for (x, wx) in g.iter().zip(&w) {
        xs.push(hi * x);
        ws.push(hi * wx);
    }
    (xs, ws)
}

/// Panel-pair and point-evaluation quadrature settings.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadOptions {
    /// Gauss points per direction of the Sauter–Schwab cube rules.
    pub singular_order: usize,
    /// Triangle rule degree for close (non-touching) pairs and for
    /// separated pairs below `mid_ratio`.
    pub near_degree: usize,
    /// Degree for pairs with centroid distance in `[mid_ratio, far_ratio)`
    /// times the larger diameter.
    pub mid_degree: usize,
    /// Degree beyond `far_ratio`.
    pub far_degree: usize,
    /// Non-touching pairs whose gap is below this many diameters get an
    /// adaptively subdivided inner rule.
    pub near_ratio: f64,
    pub mid_ratio: f64,
    pub far_ratio: f64,
    /// Subdivision threshold: a piece is integrated with the plain rule once
    /// its distance to the target is at least `eta` times its diameter.
    pub eta: f64,
    /// Rule degree for off-surface point evaluation.
    pub eval_degree: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            singular_order: 5,
            near_degree: 10,
            mid_degree: 8,
            far_degree: 6,
            near_ratio: 1.0,
            mid_ratio: 4.0,
            far_ratio: 8.0,
            eta: 2.0,
            eval_degree: 10,
        }
    }
}

use elasto_bem_core::geometry::Vec3;
use elasto_bem_core::quadrature::*;
use elasto_bem_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn reference() -> [Vec3; 3] {
    [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn triangle_rules_are_exact_on_monomials() {
    for degree in 1..=20 {
        let rule = gauss_triangle(degree).unwrap();
        assert_eq!(rule.degree, degree.max(rule.degree));
        assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15, "degree {degree}");
        for p in &rule.points {
            assert!(p[0] >= -1e-15 && p[1] >= -1e-15 && p[0] + p[1] <= 1.0 + 1e-15);
        }
        for a in 0..=degree as u32 {
            for b in 0..=(degree as u32 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let got: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                assert!((got - exact).abs() < 1e-14, "degree {degree}: x^{a} y^{b}");
            }
        }
    }
    assert!(matches!(gauss_triangle(0), Err(QuadError::UnsupportedDegree(0))));
    assert!(matches!(gauss_triangle(21), Err(QuadError::UnsupportedDegree(21))));
}

#[test]
fn reference_examples() {
    let t = reference();
    let one = integrate_regular(&t, &gauss_triangle(1).unwrap(), |_, _| c(1.0));
    assert!((one - 0.5).norm() < 1e-15);
    let x = integrate_regular(&t, &gauss_triangle(1).unwrap(), |p, _| c(p.x));
    assert!((x - 1.0 / 6.0).norm() < 1e-15);
    let x2y = integrate_regular(&t, &gauss_triangle(3).unwrap(), |p, _| c(p.x * p.x * p.y));
    assert!((x2y - 1.0 / 60.0).norm() < 1e-15);
}

#[test]
fn gauss_legendre_on_unit_interval() {
    for n in 1..=20 {
        let (x, w) = gauss_legendre(n);
        for k in 0..2 * n {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
        }
    }
}

#[test]
fn affine_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for degree in [2, 5, 9, 14] {
        let rule = gauss_triangle(degree).unwrap();
        for _ in 0..10 {
            let t: [Vec3; 3] = core::array::from_fn(|_| {
                Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            });
            let f = |p: Vec3| c(1.0 + p.x * p.y - 0.5 * p.z * p.z + 0.1 * p.x * p.x * p.z);
            let det = (t[1] - t[0]).cross(t[2] - t[0]).norm();
            let pulled: C64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(q, w)| f(t[0] + (t[1] - t[0]) * q[0] + (t[2] - t[0]) * q[1]) * (w * det))
                .sum();
            let direct = integrate_regular(&t, &rule, |p, _| f(p));
            assert!((pulled - direct).norm() < 1e-13 * (1.0 + direct.norm()));
        }
    }
}

/// `∫_t 1/|y − p|` for `p` in the plane of `t`, in closed form: each
/// sub-triangle with apex `p` contributes `h (asinh(s_b/h) − asinh(s_a/h))`.
fn inverse_distance_exact(t: &[Vec3; 3], p: Vec3) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        let e = (b - a).normalized();
        let foot = a + e * (p - a).dot(e);
        let h = (p - foot).norm();
        if h < 1e-15 {
            continue;
        }
        let (sa, sb) = ((a - foot).dot(e), (b - foot).dot(e));
        let orient = (a - p).cross(b - p).dot((t[1] - t[0]).cross(t[2] - t[0])).signum();
        total += orient * h * ((sb / h).asinh() - (sa / h).asinh());
    }
    total
}

/// `∫_t 1/|y − x|` for `x` at height `d` above the in-plane point `p`:
/// polar integral `∫ (√(R(φ)² + d²) − d) dφ` per sub-triangle.
fn inverse_distance_lifted(t: &[Vec3; 3], p: Vec3, d: f64) -> f64 {
    let (g, w) = gauss_legendre(60);
    let mut total = 0.0;
    for i in 0..3 {
        let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        let e = (b - a).normalized();
        let foot = a + e * (p - a).dot(e);
        let h = (p - foot).norm();
        if h < 1e-15 {
            continue;
        }
        let orient = (a - p).cross(b - p).dot((t[1] - t[0]).cross(t[2] - t[0])).signum();
        let (pa, pb) = (((a - foot).dot(e) / h).atan(), ((b - foot).dot(e) / h).atan());
        let mut s = 0.0;
        for (x, wx) in g.iter().zip(&w) {
            let phi = pa + (pb - pa) * x;
            let r = h / phi.cos();
            s += wx * (pb - pa) * ((r * r + d * d).sqrt() - d);
        }
        total += orient * s;
    }
    total
}

#[test]
fn duffy_vertex_singularity() {
    let t = reference();
    let v = duffy_singular(&t, [1.0, 0.0, 0.0], 4, |y, _| c(1.0 / y.norm())).unwrap();
    let exact = 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln();
    assert!((exact - 1.246450480).abs() < 1e-9);
    assert!((v - exact).norm() < 1e-12, "{v}");
    assert!((inverse_distance_exact(&t, t[0]) - exact).abs() < 1e-14);
}

#[test]
fn duffy_interior_singularity() {
    let t = reference();
    let p = Vec3::new(1.0 / 3.0, 1.0 / 3.0, 0.0);
    let v = duffy_singular(&t, [1.0 / 3.0; 3], 14, |y, _| c(1.0 / (y - p).norm())).unwrap();
    let exact = inverse_distance_exact(&t, p);
    assert!((v.re - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
    let q = [0.2, 0.7, 0.1];
    let tilted = [Vec3::new(0.3, -0.2, 1.0), Vec3::new(1.4, 0.5, 0.2), Vec3::new(-0.1, 1.1, 0.6)];
    let pq = bary_point(&tilted, q);
    let v = duffy_singular(&tilted, q, 14, |y, _| c(1.0 / (y - pq).norm())).unwrap();
    let exact = inverse_distance_exact(&tilted, pq);
    assert!((v.re - exact).abs() < 1e-10 * exact);
    let edge = [0.5, 0.5, 0.0];
    let pe = bary_point(&tilted, edge);
    let v = duffy_singular(&tilted, edge, 14, |y, _| c(1.0 / (y - pe).norm())).unwrap();
    assert!((v.re - inverse_distance_exact(&tilted, pe)).abs() < 1e-10);
}

#[test]
fn duffy_smooth_and_errors() {
    let t = reference();
    let v = duffy_singular(&t, [0.2, 0.3, 0.5], 12, |_, _| c(1.0)).unwrap();
    assert!((v - 0.5).norm() < 1e-14);
    assert_eq!(duffy_singular(&t, [1.2, -0.2, 0.0], 4, |_, _| c(1.0)).unwrap_err(), QuadError::OutsideTriangle);
}

#[test]
fn duffy_converges_for_helmholtz_kernel() {
    let t = reference();
    let p = Vec3::new(0.25, 0.25, 0.0);
    let g = |y: Vec3, _| {
        let r = (y - p).norm();
        C64::new((3.0 * r).cos(), (3.0 * r).sin()) / (4.0 * PI * r)
    };
    let best = duffy_singular(&t, [0.5, 0.25, 0.25], 24, g).unwrap();
    let errs: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&n| (duffy_singular(&t, [0.5, 0.25, 0.25], n, g).unwrap() - best).norm())
        .collect();
    assert!(errs[0] / errs[1] > 16.0 && errs[1] / errs[2] > 16.0, "{errs:?}");
}

#[test]
fn near_singular_far_target_is_plain_rule() {
    let t = reference();
    let rule = gauss_triangle(6).unwrap();
    let x = Vec3::new(0.3, 0.3, 5.0);
    let f = |y: Vec3, _| c(1.0 / (y - x).norm());
    let plain = integrate_regular(&t, &rule, f);
    let near = near_singular(&t, x, &rule, 2.0, f).unwrap();
    assert!((plain - near).norm() < 1e-12 * plain.norm());
}

#[test]
fn near_singular_close_target() {
    let square = [
        Vec3::new(-0.5, -0.5, 0.0),
        Vec3::new(0.5, -0.5, 0.0),
        Vec3::new(0.5, 0.5, 0.0),
        Vec3::new(-0.5, 0.5, 0.0),
    ];
    let tris = [[square[0], square[1], square[2]], [square[0], square[2], square[3]]];
    let rule = gauss_triangle(6).unwrap();
    for (p, d) in [(Vec3::new(0.0, 0.0, 0.0), 1e-3), (Vec3::new(0.2, -0.1, 0.0), 1e-2), (Vec3::new(0.05, 0.3, 0.0), 1e-4)] {
        let x = p + Vec3::new(0.0, 0.0, d);
        let mut got = C64::new(0.0, 0.0);
        let mut exact = 0.0;
        for t in &tris {
            got += near_singular(t, x, &rule, 2.0, |y, _| c(1.0 / (4.0 * PI * (y - x).norm()))).unwrap();
            exact += inverse_distance_lifted(t, p, d) / (4.0 * PI);
        }
        assert!((got.re - exact).abs() < 1e-8 * exact, "d={d}: {} vs {exact}", got.re);
    }
}

#[test]
fn near_singular_rejects_zero_distance() {
    let t = reference();
    let rule = gauss_triangle(3).unwrap();
    let err = near_singular(&t, Vec3::new(0.2, 0.2, 0.0), &rule, 2.0, |_, _| c(1.0)).unwrap_err();
    assert_eq!(err, QuadError::ZeroDistance);
}

#[test]
fn pair_rules_integrate_products() {
    for contact in [PanelContact::Identical, PanelContact::Edge, PanelContact::Vertex] {
        let nodes = sauter_schwab(contact, 5);
        let sum: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((sum - 0.25).abs() < 1e-14, "{contact:?}");
        let xy: f64 = nodes.iter().map(|n| n.weight * n.x[0] * n.y[1]).sum();
        assert!((xy - 1.0 / 18.0).abs() < 1e-14, "{contact:?}");
        for n in &nodes {
            for p in [n.x, n.y] {
                assert!(p[1] >= -1e-15 && p[1] <= p[0] + 1e-15 && p[0] <= 1.0 + 1e-15);
                let b = ss_barycentric(p);
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn identical_pair_inverse_distance() {
    // ∫_T ∫_T 1/|x − y| on the reference triangle against the inner closed
    // form integrated with a Duffy outer rule.
    let t = reference();
    // The inner integral has logarithmic derivative singularities at the
    // edges, so the outer rule is graded toward both ends of each direction.
    let (gx, gw) = graded_log_rule(12, 14, 0.2);
    let mut nodes1d: Vec<(f64, f64)> = Vec::new();
    for (x, w) in gx.iter().zip(&gw) {
        nodes1d.push((0.5 * x, 0.5 * w));
        nodes1d.push((1.0 - 0.5 * x, 0.5 * w));
    }
    let mut reference_value = 0.0;
    for &(xi, wx) in &nodes1d {
        for &(s, ws) in &nodes1d {
            let q = Vec3::new(xi, (1.0 - xi) * s, 0.0);
            reference_value += wx * ws * (1.0 - xi) * inverse_distance_exact(&t, q);
        }
    }
    let point = |p: [f64; 2]| Vec3::new(p[0] - p[1], p[1], 0.0);
    let errs: Vec<f64> = [4, 8, 12]
        .iter()
        .map(|&n| {
            let nodes = sauter_schwab(PanelContact::Identical, n);
            let got: f64 = nodes.iter().map(|q| q.weight / (point(q.x) - point(q.y)).norm()).sum();
            (got - reference_value).abs() / reference_value
        })
        .collect();
    assert!(errs[2] < 1e-10 && errs[1] < 1e-6 && errs[1] < 1e-2 * errs[0], "{errs:?}");
}

#[test]
fn graded_rule_handles_log_endpoint() {
    // ∫₀¹ x^k ln x = −1/(k+1)²
    for (n, levels, sigma, tol) in [(10, 12, 0.15, 1e-8), (12, 24, 0.25, 1e-12)] {
        let (x, w) = graded_log_rule(n, levels, sigma);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..6 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k) * x.ln()).sum();
            let exact = -1.0 / ((k + 1) * (k + 1)) as f64;
            assert!((got - exact).abs() < tol, "{n} {levels} {sigma} k={k}: {got}");
        }
    }
}

#[test]
fn default_options() {
    let o = QuadOptions::default();
    assert_eq!(o.eta, 2.0);
    assert_eq!(o.eval_degree, 10);
    assert!(o.near_degree >= o.mid_degree && o.mid_degree >= o.far_degree);
}

use elasto_bem_core::dense::Side;
use elasto_bem_core::elastic2d::*;
use elasto_bem_core::kernels::bessel::hankel01;
use elasto_bem_core::kernels::WaveParams;
use elasto_bem_core::mesh::Curve2D;
use elasto_bem_core::quadrature::gauss_legendre;
use elasto_bem_core::space::{Density, Space};
use elasto_bem_core::C64;
use std::f64::consts::PI;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    let n: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let d: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    n / d
}

fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn midpoint(curve: &Curve2D, e: usize) -> [f64; 2] {
    let s = curve.segments()[e];
    let (a, b) = (curve.vertices()[s.start], curve.vertices()[s.end]);
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

#[test]
fn split_field_examples() {
    let curve = Curve2D::regular_polygon(5, 1.0).unwrap();
    let u = sample_curve(&curve, Space::P1, 3, |_| vec![c(1.0), c(2.0), c(3.0)]);
    let parts = split_field(&u).unwrap();
    assert!(parts.plane.coeffs[..5].iter().all(|v| *v == c(1.0)));
    assert!(parts.plane.coeffs[5..].iter().all(|v| *v == c(2.0)));
    assert!(parts.antiplane.coeffs.iter().all(|v| *v == c(3.0)));
    assert_eq!(parts.plane.components, 2);
    let e3 = sample_curve(&curve, Space::P0, 3, |_| vec![c(0.0), c(0.0), c(1.0)]);
    let parts = split_field(&e3).unwrap();
    assert!(parts.plane.coeffs.iter().all(|v| *v == c(0.0)));
    assert!(parts.antiplane.coeffs.iter().all(|v| *v == c(1.0)));
    let w = sample_curve(&curve, Space::P1, 3, |x| vec![C64::new(x[0], 0.3), c(x[1] * x[0]), C64::new(0.0, x[1])]);
    assert_eq!(split_field(&w).unwrap().recombine(), w);
    assert!(matches!(
        split_field(&Density::zeros(Space::P1, 2, &curve)),
        Err(Elastic2dError::Components(2))
    ));
}

#[test]
fn arclength_derivative() {
    let curve = Curve2D::regular_polygon(12, 1.0).unwrap();
    let one = sample_curve(&curve, Space::P1, 1, |_| vec![c(4.0)]);
    assert!(guenter_2d(&curve, &one).unwrap().coeffs.iter().all(|v| *v == c(0.0)));
    // on an inscribed polygon the chord slope of cos θ is −sin θ at the
    // midpoint angle
    for n in [16, 32, 64] {
        let curve = Curve2D::regular_polygon(n, 1.0).unwrap();
        let u = sample_curve(&curve, Space::P1, 1, |x| vec![c(x[0])]);
        let d = guenter_2d(&curve, &u).unwrap();
        let mut err: f64 = 0.0;
        let mut total = c(0.0);
        for (e, s) in curve.segments().iter().enumerate() {
            let m = midpoint(&curve, e);
            let theta = m[1].atan2(m[0]);
            err = err.max((d.coeffs[e] + theta.sin()).norm());
            total += d.coeffs[e] * s.length;
        }
        assert!(total.norm() < 1e-14);
        assert!(err < 1e-14, "{n}: {err}");
    }
    let p0 = Density::zeros(Space::P0, 1, &curve);
    assert!(matches!(guenter_2d(&curve, &p0), Err(Elastic2dError::Space(_))));
}

#[test]
fn guenter_matrix_is_rotated_derivative() {
    let curve = Curve2D::regular_polygon(9, 1.3).unwrap();
    let u = sample_curve(&curve, Space::P1, 2, |x| vec![c(x[0] * x[1]), C64::new(x[1], x[0])]);
    let m = guenter_matrix_2d(&curve, &u).unwrap();
    let n = curve.vertices().len();
    let d1 = guenter_2d(&curve, &Density::scalar(Space::P1, u.coeffs[..n].to_vec())).unwrap();
    let d2 = guenter_2d(&curve, &Density::scalar(Space::P1, u.coeffs[n..].to_vec())).unwrap();
    let ne = curve.segments().len();
    for e in 0..ne {
        assert_eq!(m.coeffs[e], -d2.coeffs[e]);
        assert_eq!(m.coeffs[ne + e], d1.coeffs[e]);
    }
}

#[test]
fn antiplane_single_layer_scaling() {
    let curve = Curve2D::regular_polygon(24, 1.0).unwrap();
    let q = CurveQuad::default();
    let p1 = WaveParams::new(1.0, 1.0, 1.0, 2.0).unwrap();
    let v = helmholtz_2d(&curve, p1.kappa_s(), HelmholtzOp2d::SingleLayer, Space::P0, Space::P0, &q).unwrap();
    let s3 = assemble_antiplane(&curve, &p1, AntiplaneOp::S3, Space::P0, Space::P0, &q).unwrap();
    assert_eq!(s3.data, v.data);
    // μ = 2 with ω = √2 keeps κs = 1
    let p2 = WaveParams::new(2f64.sqrt(), 1.0, 2.0, 2.0).unwrap();
    assert!((p2.kappa_s() - 1.0).abs() < 1e-15);
    let s3b = assemble_antiplane(&curve, &p2, AntiplaneOp::S3, Space::P0, Space::P0, &q).unwrap();
    for (a, b) in s3b.data.iter().zip(&s3.data) {
        assert!((a - b * 0.5).norm() <= 1e-15 * b.norm());
    }
}

#[test]
fn antiplane_traction_forms_agree() {
    let q = CurveQuad::default();
    let params = WaveParams::default();
    for n in [32, 64] {
        let curve = Curve2D::regular_polygon(n, 1.0).unwrap();
        let tk = assemble_antiplane(&curve, &params, AntiplaneOp::TK3, Space::P1, Space::P1, &q).unwrap();
        let ta = assemble_antiplane(&curve, &params, AntiplaneOp::TK3Alt, Space::P1, Space::P1, &q).unwrap();
        assert!(tk.axpy(c(-1.0), &ta).unwrap().max_abs() <= 1e-8 * tk.max_abs());
    }
    let curve = Curve2D::regular_polygon(8, 1.0).unwrap();
    assert!(matches!(
        assemble_antiplane(&curve, &params, AntiplaneOp::TK3Alt, Space::P0, Space::P1, &q),
        Err(Elastic2dError::NotP1(_))
    ));
}

/// `(i/4)·2π J₀(1) H₀(1)` over the circumference: the lowest Fourier
/// eigenvalue of the unit-circle single layer at `κ = 1`, as a Rayleigh
/// quotient on inscribed polygons.
fn circle_eigenvalue(n: usize, q: &CurveQuad) -> C64 {
    let curve = Curve2D::regular_polygon(n, 1.0).unwrap();
    let v = helmholtz_2d(&curve, 1.0, HelmholtzOp2d::SingleLayer, Space::P0, Space::P0, q).unwrap();
    let one = vec![c(1.0); n];
    v.bilinear(&one, &one).unwrap() / curve.total_length()
}

#[test]
fn circle_single_layer_eigenvalue() {
    let q = CurveQuad::default();
    let (h0, _) = hankel01(1.0);
    let exact = C64::new(0.0, PI / 2.0) * h0.re * h0;
    let (a, b) = (circle_eigenvalue(128, &q), circle_eigenvalue(256, &q));
    let extrapolated = (b * 4.0 - a) / 3.0;
    assert!((extrapolated - exact).norm() <= 1e-6 * exact.norm(), "{extrapolated} {exact}");
    assert!((b - exact).norm() < (a - exact).norm());
}

/// Planar Kupradze matrix from Hankel functions, without the difference
/// kernel series.
fn planar_kupradze(params: &WaveParams, z: [f64; 2]) -> [[C64; 2]; 2] {
    let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let zh = [z[0] / r, z[1] / r];
    let radial = |k: f64| {
        let (h0, h1) = hankel01(k * r);
        let q = C64::new(0.0, 0.25);
        (q * h0, -q * h1 * k, -q * (h0 - h1 / (k * r)) * (k * k))
    };
    let (gs, _, _) = radial(params.kappa_s());
    let (_, dp, ddp) = radial(params.kappa_p());
    let (_, ds, dds) = radial(params.kappa_s());
    let (d1, d2) = (dp - ds, ddp - dds);
    let ks2 = params.kappa_s() * params.kappa_s();
    let mut g = [[c(0.0); 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            let delta = if k == l { 1.0 } else { 0.0 };
            let hess = d2 * (zh[k] * zh[l]) + d1 / r * (delta - zh[k] * zh[l]);
            g[k][l] = (gs * (ks2 * delta) - hess) / params.omega2_rho();
        }
    }
    g
}

#[test]
fn plane_single_layer_matches_kupradze_on_separated_segments() {
    let curve = Curve2D::regular_polygon(40, 1.0).unwrap();
    let params = WaveParams::new(1.5, 1.0, 1.0, 1.5).unwrap();
    let q = CurveQuad::default();
    let s = assemble_plane(&curve, &params, PlaneOp::S, Space::P0, Space::P0, &q).unwrap();
    let (x, w) = gauss_legendre(20);
    let ne = curve.segments().len();
    let segs = curve.segments();
    let point = |e: usize, t: f64| {
        let (a, b) = (curve.vertices()[segs[e].start], curve.vertices()[segs[e].end]);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    let mut checked = 0;
    for m in (0..ne).step_by(3) {
        for n in 0..ne {
            let (pm, pn) = (midpoint(&curve, m), midpoint(&curve, n));
            let d = ((pm[0] - pn[0]).powi(2) + (pm[1] - pn[1]).powi(2)).sqrt();
            if d < 2.0 * segs[m].length.max(segs[n].length) {
                continue;
            }
            let mut g = [[c(0.0); 2]; 2];
            for i in 0..x.len() {
                for j in 0..x.len() {
                    let (a, b) = (point(m, x[i]), point(n, x[j]));
                    let k = planar_kupradze(&params, [a[0] - b[0], a[1] - b[1]]);
                    let wt = w[i] * w[j] * segs[m].length * segs[n].length;
                    for r in 0..2 {
                        for t in 0..2 {
                            g[r][t] += k[r][t] * wt;
                        }
                    }
                }
            }
            for r in 0..2 {
                for t in 0..2 {
                    let got = s.get(r * ne + m, t * ne + n);
                    assert!((got - g[r][t]).norm() <= 1e-8 * g[r][r].norm(), "{m} {n} {r} {t}: {got} {}", g[r][t]);
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn plane_traction_single_layer_jump_is_mass() {
    let curve = Curve2D::regular_polygon(24, 1.0).unwrap();
    let params = WaveParams::default();
    let q = CurveQuad::default();
    for trial in [Space::P0, Space::P1] {
        let a = assemble_plane(&curve, &params, PlaneOp::TS(Side::Interior), trial, Space::P1, &q).unwrap();
        let b = assemble_plane(&curve, &params, PlaneOp::TS(Side::Exterior), trial, Space::P1, &q).unwrap();
        let m = mass_matrix_2d(&curve, trial, Space::P1, 2);
        let d = a.axpy(c(-1.0), &b).unwrap().axpy(c(-1.0), &m).unwrap();
        assert!(d.max_abs() <= 1e-12 * m.max_abs());
    }
    assert!(matches!(
        assemble_plane(&curve, &params, PlaneOp::TS(Side::Interior), Space::P0, Space::P0, &q),
        Err(Elastic2dError::NotP1(_))
    ));
    assert!(matches!(
        assemble_plane(&curve, &params, PlaneOp::K(Side::Interior), Space::P0, Space::P0, &q),
        Err(Elastic2dError::NotP1(_))
    ));
}

#[test]
fn zero_density_and_uncoupling() {
    let curve = Curve2D::regular_polygon(16, 1.0).unwrap();
    let params = WaveParams::default();
    let q = CurveQuad::default();
    for (op, trial, test) in [
        (Elastic2dOp::S, Space::P0, Space::P0),
        (Elastic2dOp::K(Side::Exterior), Space::P1, Space::P0),
        (Elastic2dOp::TS(Side::Interior), Space::P0, Space::P1),
        (Elastic2dOp::TK(Side::Interior), Space::P1, Space::P1),
    ] {
        let a = assemble_elastic_2d(&curve, &params, op, trial, test, &q).unwrap();
        let zero = Density::zeros(trial, 3, &curve);
        assert!(a.apply(&zero).unwrap().iter().all(|v| *v == c(0.0)));
        let (nt, nb) = (test.dofs(&curve), trial.dofs(&curve));
        for r in 0..3 * nt {
            for col in 0..3 * nb {
                if (r < 2 * nt) != (col < 2 * nb) {
                    assert_eq!(a.get(r, col), c(0.0), "{op:?}");
                }
            }
        }
    }
}

#[test]
fn plane_operator_symmetries() {
    let curve = Curve2D::regular_polygon(32, 1.0).unwrap();
    let params = WaveParams::default();
    let q = CurveQuad::default();
    let s = assemble_plane(&curve, &params, PlaneOp::S, Space::P0, Space::P0, &q).unwrap();
    assert!(s.symmetry_defect() <= 1e-12);
    let tk = assemble_plane(&curve, &params, PlaneOp::TK(Side::Interior), Space::P1, Space::P1, &q).unwrap();
    let tke = assemble_plane(&curve, &params, PlaneOp::TK(Side::Exterior), Space::P1, Space::P1, &q).unwrap();
    assert!(tk.symmetry_defect() <= 1e-12);
    assert!(tk.axpy(c(-1.0), &tke).unwrap().max_abs() <= 1e-12 * tk.max_abs());
    for side in [Side::Interior, Side::Exterior] {
        let other = if side == Side::Interior { Side::Exterior } else { Side::Interior };
        let ts = assemble_plane(&curve, &params, PlaneOp::TS(side), Space::P0, Space::P1, &q).unwrap();
        let k = assemble_plane(&curve, &params, PlaneOp::K(other), Space::P1, Space::P0, &q).unwrap();
        assert!(ts.axpy(c(1.0), &k.transpose()).unwrap().max_abs() <= 1e-12 * ts.max_abs());
    }
}

/// Residuals of the interior Calderón identities `(TK + TS⁺) t-pairing` and
/// `(K⁺ + S) u-pairing` for an antiplane plane wave.
fn antiplane_calderon(n: usize) -> (f64, f64) {
    let q = CurveQuad::default();
    let params = WaveParams::default();
    let ks = params.kappa_s();
    let curve = Curve2D::regular_polygon(n, 1.0).unwrap();
    let dir = [0.6, 0.8];
    let wave = |x: [f64; 2]| C64::new(0.0, ks * (dir[0] * x[0] + dir[1] * x[1])).exp();
    let u = sample_curve(&curve, Space::P1, 1, |x| vec![wave(x)]);
    let t = Density::scalar(
        Space::P0,
        curve
            .segments()
            .iter()
            .enumerate()
            .map(|(e, s)| {
                let dn = dir[0] * s.normal[0] + dir[1] * s.normal[1];
                wave(midpoint(&curve, e)) * C64::new(0.0, ks * dn) * params.mu()
            })
            .collect(),
    );
    let tk = assemble_antiplane(&curve, &params, AntiplaneOp::TK3, Space::P1, Space::P1, &q).unwrap();
    let ts = assemble_antiplane(&curve, &params, AntiplaneOp::TS3(Side::Interior), Space::P0, Space::P1, &q).unwrap();
    let k3 = assemble_antiplane(&curve, &params, AntiplaneOp::K3(Side::Interior), Space::P1, Space::P0, &q).unwrap();
    let s3 = assemble_antiplane(&curve, &params, AntiplaneOp::S3, Space::P0, Space::P0, &q).unwrap();
    let traction = add(&tk.apply(&u).unwrap(), &ts.apply(&t).unwrap());
    let disp = add(&k3.apply(&u).unwrap(), &s3.apply(&t).unwrap());
    (
        rel(&traction, &mass_matrix_2d(&curve, Space::P0, Space::P1, 1).apply(&t).unwrap()),
        rel(&disp, &mass_matrix_2d(&curve, Space::P1, Space::P0, 1).apply(&u).unwrap()),
    )
}

#[test]
fn antiplane_calderon_identities() {
    let (t1, d1) = antiplane_calderon(32);
    let (t2, d2) = antiplane_calderon(64);
    assert!(t1 / t2 > 3.5 && d1 / d2 > 3.5, "{t1} {t2} {d1} {d2}");
    assert!(t2 < 1e-2 && d2 < 1e-2);
}

/// Same for a plane P or S wave in the plane part, with the traction taken
/// from the 3D operator restricted to `x₃`-independent fields.
fn plane_calderon(n: usize, pressure: bool) -> (f64, f64) {
    let q = CurveQuad::default();
    let params = WaveParams::default();
    let (mu, la) = (params.mu(), params.lambda());
    let dir = [0.6, 0.8];
    let (kk, pol) = if pressure { (params.kappa_p(), dir) } else { (params.kappa_s(), [-0.8, 0.6]) };
    let curve = Curve2D::regular_polygon(n, 1.0).unwrap();
    let ph = |x: [f64; 2]| C64::new(0.0, kk * (dir[0] * x[0] + dir[1] * x[1])).exp();
    let u = sample_curve(&curve, Space::P1, 2, |x| vec![ph(x) * pol[0], ph(x) * pol[1]]);
    let ne = curve.segments().len();
    let mut tco = vec![c(0.0); 2 * ne];
    for (e, s) in curve.segments().iter().enumerate() {
        let g = ph(midpoint(&curve, e)) * C64::new(0.0, kk);
        let nv = s.normal;
        let dn = dir[0] * nv[0] + dir[1] * nv[1];
        let div = g * (pol[0] * dir[0] + pol[1] * dir[1]);
        let curl = g * (pol[1] * dir[0] - pol[0] * dir[1]);
        let tau = [-nv[1], nv[0]];
        for k in 0..2 {
            tco[k * ne + e] = g * pol[k] * dn * (2.0 * mu) + div * (la * nv[k]) - curl * (mu * tau[k]);
        }
    }
    let t = Density {
        space: Space::P0,
        components: 2,
        coeffs: tco,
    };
    let tk = assemble_plane(&curve, &params, PlaneOp::TK(Side::Interior), Space::P1, Space::P1, &q).unwrap();
    let ts = assemble_plane(&curve, &params, PlaneOp::TS(Side::Interior), Space::P0, Space::P1, &q).unwrap();
    let k = assemble_plane(&curve, &params, PlaneOp::K(Side::Interior), Space::P1, Space::P0, &q).unwrap();
    let s = assemble_plane(&curve, &params, PlaneOp::S, Space::P0, Space::P0, &q).unwrap();
    let traction = add(&tk.apply(&u).unwrap(), &ts.apply(&t).unwrap());
    let disp = add(&k.apply(&u).unwrap(), &s.apply(&t).unwrap());
    (
        rel(&traction, &mass_matrix_2d(&curve, Space::P0, Space::P1, 2).apply(&t).unwrap()),
        rel(&disp, &mass_matrix_2d(&curve, Space::P1, Space::P0, 2).apply(&u).unwrap()),
    )
}

#[test]
fn plane_calderon_identities() {
    for pressure in [true, false] {
        let (t1, d1) = plane_calderon(32, pressure);
        let (t2, d2) = plane_calderon(64, pressure);
        assert!(t1 / t2 > 3.5 && d1 / d2 > 3.5, "{pressure}: {t1} {t2} {d1} {d2}");
        assert!(t2 < 1e-2 && d2 < 1e-2);
    }
}

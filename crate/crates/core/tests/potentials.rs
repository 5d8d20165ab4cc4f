use elasto_bem_core::dense::{real_part_positive_definite, Side};
use elasto_bem_core::mesh::{EvalGrid, Region, SurfaceMesh};
use elasto_bem_core::potentials::*;
use elasto_bem_core::quadrature::QuadOptions;
use elasto_bem_core::space::{Density, Space};
use elasto_bem_core::C64;

fn ones(space: Space, mesh: &SurfaceMesh) -> Density {
    Density::interpolate(space, mesh, 1, |_| vec![C64::new(1.0, 0.0)])
}

fn grid(points: &[[f64; 3]], region: Region) -> EvalGrid {
    EvalGrid::tagged(
        points.iter().map(|&p| p.into()).collect(),
        vec![region; points.len()],
        vec![1.0; points.len()],
    )
}

#[test]
fn uniform_shell_potential() {
    let mesh = SurfaceMesh::icosphere(3);
    let opts = QuadOptions::default();
    let p = ones(Space::P0, &mesh);
    let out = eval_single_layer(&mesh, 0.0, &p, &grid(&[[2.0, 0.0, 0.0], [0.0, 1.2, 1.6]], Region::Exterior), &opts).unwrap();
    for v in out {
        assert!((v.re - 0.5).abs() < 5e-3, "{v}");
    }
    let inside = eval_single_layer(&mesh, 0.0, &p, &grid(&[[0.0, 0.0, 0.0], [0.3, -0.2, 0.5]], Region::Interior), &opts).unwrap();
    for v in inside {
        assert!((v.re - 1.0).abs() < 1e-2, "{v}");
    }
}

#[test]
fn zero_density_gives_zero() {
    let mesh = SurfaceMesh::icosphere(1);
    let opts = QuadOptions::default();
    let z = Density::zeros(Space::P1, 1, &mesh);
    let g = grid(&[[0.1, 0.2, 0.0]], Region::Interior);
    assert_eq!(eval_single_layer(&mesh, 1.0, &z, &g, &opts).unwrap()[0], C64::new(0.0, 0.0));
    assert_eq!(eval_double_layer(&mesh, 1.0, &z, &g, &opts).unwrap()[0], C64::new(0.0, 0.0));
}

#[test]
fn gauss_identity_with_sign() {
    let mesh = SurfaceMesh::icosphere(2);
    let opts = QuadOptions::default();
    let psi = ones(Space::P1, &mesh);
    let inside = eval_double_layer(&mesh, 0.0, &psi, &grid(&[[0.0, 0.0, 0.0], [0.5, 0.2, -0.1], [0.0, 0.0, 0.95]], Region::Interior), &opts).unwrap();
    for v in inside {
        assert!((v.re - 1.0).abs() < 1e-8, "{v}");
    }
    let outside = eval_double_layer(&mesh, 0.0, &psi, &grid(&[[2.0, 0.0, 0.0], [0.0, 0.0, 1.05]], Region::Exterior), &opts).unwrap();
    for v in outside {
        assert!(v.re.abs() < 1e-8, "{v}");
    }
}

#[test]
fn single_layer_symmetric_and_coercive() {
    let mesh = SurfaceMesh::icosphere(1);
    let opts = QuadOptions::default();
    let v = galerkin_single_layer(&mesh, 0.0, Space::P0, Space::P0, &opts).unwrap();
    assert!(v.symmetry_defect() <= 1e-12);
    assert!(real_part_positive_definite(&v));
    let v1 = galerkin_single_layer(&mesh, 2.0, Space::P1, Space::P1, &opts).unwrap();
    assert!(v1.symmetry_defect() <= 1e-12);
}

#[test]
fn adjoint_is_negative_transpose() {
    let mesh = SurfaceMesh::icosphere(1);
    let opts = QuadOptions::default();
    let n = galerkin_double_layer(&mesh, 1.0, Space::P1, Space::P1, &opts).unwrap();
    let k = galerkin_adjoint(&mesh, 1.0, Space::P1, Space::P1, &opts).unwrap();
    let nt = n.transpose();
    for (a, b) in k.data.iter().zip(&nt.data) {
        assert!((a + b).norm() <= 1e-12 * n.max_abs());
    }
}

#[test]
fn double_layer_rows_reproduce_half_mass() {
    let mesh = SurfaceMesh::icosphere(2);
    let opts = QuadOptions::default();
    let n = double_layer_trace(&mesh, 0.0, Side::Interior, Space::P0, Space::P0, &opts).unwrap();
    let ext = double_layer_trace(&mesh, 0.0, Side::Exterior, Space::P0, Space::P0, &opts).unwrap();
    let one = ones(Space::P0, &mesh);
    let ri = n.apply(&one).unwrap();
    let re = ext.apply(&one).unwrap();
    for e in 0..mesh.triangles().len() {
        let area = mesh.frame(e).area;
        assert!((ri[e].re - area).abs() < 1e-6 * area, "{} {}", ri[e], area);
        assert!(re[e].norm() < 1e-6 * area);
    }
}

#[test]
fn hypersingular_kills_constants_in_static_limit() {
    let mesh = SurfaceMesh::icosphere(1);
    let opts = QuadOptions::default();
    let w = hypersingular_hamdi(&mesh, 1e-8, Space::P1, Space::P1, &opts).unwrap();
    let out = w.apply(&ones(Space::P1, &mesh)).unwrap();
    for v in out {
        assert!(v.norm() < 1e-8);
    }
    assert!(w.symmetry_defect() <= 1e-12);
    assert!(hypersingular_hamdi(&mesh, 1.0, Space::P0, Space::P1, &opts).is_err());
}

#[test]
fn separated_panel_entries_match_high_order_rule() {
    use elasto_bem_core::kernels::helmholtz_radial;
    use elasto_bem_core::quadrature::{gauss_triangle, integrate_regular};
    let mesh = SurfaceMesh::icosphere(2);
    let opts = QuadOptions::default();
    let a = galerkin_single_layer(&mesh, 1.5, Space::P0, Space::P0, &opts).unwrap();
    let rule = gauss_triangle(20).unwrap();
    let ne = mesh.triangles().len();
    let mut checked = 0;
    for m in (0..ne).step_by(23) {
        for n in (0..ne).step_by(7) {
            let (fm, fn_) = (mesh.frame(m), mesh.frame(n));
            if fm.centroid.distance(fn_.centroid) < 2.0 * fm.diameter.max(fn_.diameter) {
                continue;
            }
            let (tm, tn) = (mesh.corners(m), mesh.corners(n));
            let v = integrate_regular(&tm, &rule, |x, _| {
                integrate_regular(&tn, &rule, |y, _| helmholtz_radial(1.5, x.distance(y)).value)
            });
            assert!((a.get(m, n) - v).norm() <= 1e-10 * v.norm(), "{m} {n}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn one_sided_traces_differ_by_jumps() {
    let mesh = SurfaceMesh::icosphere(1);
    let opts = QuadOptions::default();
    let d1 = Density::interpolate(Space::P1, &mesh, 1, |p| vec![C64::new(p.x, p.y * p.z)]);
    let d0 = Density::interpolate(Space::P0, &mesh, 1, |p| vec![C64::new(1.0 + p.z, 0.0)]);
    for (kind, d) in [(LayerKind::Single, &d0), (LayerKind::Double, &d1), (LayerKind::Adjoint, &d0)] {
        let (int, ext) = one_sided_traces(&mesh, 0.7, kind, d, &opts).unwrap();
        let jump = if kind == LayerKind::Single {
            vec![C64::new(0.0, 0.0); d.coeffs.len()]
        } else {
            mass_matrix(&mesh, d.space, d.space, 1).apply(d).unwrap()
        };
        for i in 0..jump.len() {
            assert!((int.coeffs[i] - ext.coeffs[i] - jump[i]).norm() < 1e-13, "{kind:?}");
        }
    }
}

/// `⟨φ, (∂_n V p)±⟩` from differences of `V p` at depth `δ` and `2δ` on
/// each side, extrapolated linearly. Errors are relative to the jump `⟨φ, p⟩`.
fn adjoint_trace_from_field(level: usize) -> (f64, f64) {
    let mesh = SurfaceMesh::icosphere(level);
    let opts = QuadOptions::default();
    let kappa = 1.0;
    let p = Density::interpolate(Space::P1, &mesh, 1, |x| vec![C64::new(1.0 + x.x * x.z, 0.0)]);
    let phi = Density::interpolate(Space::P0, &mesh, 1, |x| vec![C64::new(x.z + 0.5, 0.0)]);
    let h = mesh.max_edge_length();
    let stencil = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut errs = [0.0; 2];
    for (k, side) in [Side::Interior, Side::Exterior].into_iter().enumerate() {
        let mut pts = Vec::new();
        for f in mesh.frames() {
            for d in [0.25 * h, 0.125 * h] {
                let x = f.centroid - f.normal * (side.sign() * d);
                for (s, _) in stencil {
                    pts.push(x + f.normal * (s * d / 10.0));
                }
            }
        }
        let region = if side == Side::Interior { Region::Interior } else { Region::Exterior };
        let n = pts.len();
        let vals = eval_single_layer(&mesh, kappa, &p, &EvalGrid::tagged(pts, vec![region; n], vec![0.1 * h; n]), &opts).unwrap();
        let mut pair = [C64::new(0.0, 0.0); 2];
        for (e, f) in mesh.frames().iter().enumerate() {
            for (j, d) in [0.25 * h, 0.125 * h].into_iter().enumerate() {
                let b = (2 * e + j) * 4;
                let g: C64 = (0..4).map(|i| vals[b + i] * (stencil[i].1 / (1.2 * d))).sum();
                pair[j] += g * phi.coeffs[e] * f.area;
            }
        }
        let fd = pair[1] * 2.0 - pair[0];
        let op = adjoint_trace(&mesh, kappa, side, Space::P1, Space::P0, &opts).unwrap();
        let want = op.bilinear(&phi.coeffs, &p.coeffs).unwrap();
        let jump = mass_matrix(&mesh, Space::P1, Space::P0, 1).bilinear(&phi.coeffs, &p.coeffs).unwrap();
        errs[k] = (fd - want).norm() / jump.norm();
    }
    (errs[0], errs[1])
}

#[test]
fn adjoint_trace_signs_match_field() {
    let (i1, e1) = adjoint_trace_from_field(1);
    let (i2, e2) = adjoint_trace_from_field(2);
    assert!(i2 < 0.05 && e2 < 0.05, "{i2} {e2}");
    assert!(i2 < i1 && e2 < e1, "{i1} {i2} {e1} {e2}");
}

/// Exterior representation `u = −N u⁻ − V (∂_n u)⁻` of a point source.
fn scalar_representation_error(level: usize) -> f64 {
    use elasto_bem_core::geometry::Vec3;
    use elasto_bem_core::kernels::helmholtz_radial;
    let mesh = SurfaceMesh::icosphere(level);
    let opts = QuadOptions::default();
    let kappa = 1.3;
    let x0 = Vec3::new(0.2, -0.1, 0.15);
    let u = |x: Vec3| helmholtz_radial(kappa, x.distance(x0)).value;
    let trace = Density::interpolate(Space::P1, &mesh, 1, |x| vec![u(x)]);
    let flux = Density::scalar(
        Space::P0,
        mesh.frames()
            .iter()
            .map(|f| {
                let z = f.centroid - x0;
                helmholtz_radial(kappa, z.norm()).d1 * (z.dot(f.normal) / z.norm())
            })
            .collect(),
    );
    let pts = [[2.0, 0.0, 0.0], [0.0, -1.5, 1.0], [-1.2, 1.2, -1.2]];
    let g = grid(&pts, Region::Exterior);
    let nu = eval_double_layer(&mesh, kappa, &trace, &g, &opts).unwrap();
    let vt = eval_single_layer(&mesh, kappa, &flux, &g, &opts).unwrap();
    g.points
        .iter()
        .enumerate()
        .map(|(k, &x)| (-nu[k] - vt[k] - u(x)).norm() / u(x).norm())
        .fold(0.0, f64::max)
}

#[test]
fn scalar_representation_converges() {
    let e: Vec<f64> = (1..=3).map(scalar_representation_error).collect();
    assert!(e[2] <= 0.01 && e[2] < e[1] && e[1] < e[0], "{e:?}");
}

fn hamdi_vs_field(level: usize) -> f64 {
    let mesh = SurfaceMesh::icosphere(level);
    let opts = QuadOptions::default();
    let kappa = 1.0;
    let psi = Density::interpolate(Space::P1, &mesh, 1, |p| vec![C64::new(p.x + p.y * p.z, 0.0)]);
    let phi = Density::interpolate(Space::P1, &mesh, 1, |p| vec![C64::new(p.x + 0.3 * p.z + p.y * p.z, 0.0)]);
    let w = hypersingular_hamdi(&mesh, kappa, Space::P1, Space::P1, &opts).unwrap();
    let want = w.bilinear(&phi.coeffs, &psi.coeffs).unwrap();
    let fd = normal_derivative_pairing(&mesh, kappa, &phi, &psi, &opts).unwrap();
    (fd - want).norm() / want.norm()
}

#[test]
fn hypersingular_matches_field_derivative() {
    let e1 = hamdi_vs_field(1);
    let e2 = hamdi_vs_field(2);
    assert!(e2 < 0.1 && e2 < 0.5 * e1, "{e1} {e2}");
}

#[test]
fn field_derivative_pairing_rejects_vector_density() {
    let mesh = SurfaceMesh::icosphere(0);
    let v = Density::zeros(Space::P1, 3, &mesh);
    let s = Density::zeros(Space::P1, 1, &mesh);
    assert!(normal_derivative_pairing(&mesh, 1.0, &v, &s, &QuadOptions::default()).is_err());
}

//! Verification campaigns and matrix assembly behind the command line.

use std::path::{Path, PathBuf};

use elasto_bem_core::dense::{DenseOperator, Side};
use elasto_bem_core::elastic2d::{
    assemble_antiplane, assemble_elastic_2d, assemble_plane, helmholtz_2d, mass_matrix_2d, sample_curve,
    AntiplaneOp, CurveQuad, Elastic2dOp, HelmholtzOp2d, PlaneOp,
};
use elasto_bem_core::elastic3d::{
    eval_k, galerkin_single_layer, galerkin_single_layer_direct, near_boundary_jumps, rotational_identity_residual,
    somigliana_residual, traction_double_layer, traction_single_layer_operator, KForm, TractionForm,
};
use elasto_bem_core::geometry::{cnorm, traction_from_jacobian, CMat3, CVec3, Vec3};
use elasto_bem_core::guenter::symmetry_residual;
use elasto_bem_core::kernels::bessel::hankel01;
use elasto_bem_core::kernels::WaveParams;
use elasto_bem_core::mesh::{Curve2D, SurfaceMesh};
use elasto_bem_core::potentials::{
    galerkin_adjoint, galerkin_double_layer, galerkin_single_layer as helmholtz_single_layer, hypersingular_hamdi,
    mass_matrix,
};
use elasto_bem_core::quadrature::QuadOptions;
use elasto_bem_core::space::{Density, Space};
use elasto_bem_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Builtin, Config, ConfigError};
use crate::matfile::{self, MatError};
use crate::msh::{self, MshError};
use crate::report::{fill_rates, Report, Row};
use crate::selftest;

/// Operators the assemble task knows on surfaces.
pub const SURFACE_OPERATORS: &[&str] = &[
    "single_layer",
    "single_layer_direct",
    "traction_single_layer_interior",
    "traction_single_layer_exterior",
    "traction_double_layer_alter",
    "traction_double_layer_v2",
    "helmholtz_single_layer",
    "helmholtz_double_layer",
    "helmholtz_adjoint",
    "helmholtz_hypersingular",
    "mass",
];

/// Operators the assemble task knows on curves.
pub const CURVE_OPERATORS: &[&str] = &[
    "antiplane_single_layer",
    "antiplane_double_layer_interior",
    "antiplane_double_layer_exterior",
    "antiplane_traction_single_layer_interior",
    "antiplane_traction_single_layer_exterior",
    "antiplane_traction_double_layer",
    "antiplane_traction_double_layer_alt",
    "plane_single_layer",
    "plane_double_layer_interior",
    "plane_double_layer_exterior",
    "plane_traction_single_layer_interior",
    "plane_traction_single_layer_exterior",
    "plane_traction_double_layer",
    "elastic_single_layer",
    "elastic_traction_double_layer",
    "helmholtz_single_layer",
];

const SURFACE_DEFAULT: [&str; 3] = ["single_layer", "traction_single_layer_interior", "traction_double_layer_alter"];
const CURVE_DEFAULT: [&str; 4] = [
    "antiplane_single_layer",
    "antiplane_traction_double_layer",
    "plane_single_layer",
    "plane_traction_double_layer",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    Assemble,
    Jumps,
    Somigliana,
    Identities,
    Convergence,
    KernelsSelftest,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Assemble => "assemble",
            Task::Jumps => "jumps",
            Task::Somigliana => "somigliana",
            Task::Identities => "identities",
            Task::Convergence => "convergence",
            Task::KernelsSelftest => "kernels-selftest",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error("{0}")]
    Failed(String),
}

impl RunError {
    /// Process exit status: 2 for configuration, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } | RunError::Matrix(_) => 3,
            RunError::Failed(_) => 1,
        }
    }
}

impl From<MshError> for RunError {
    fn from(e: MshError) -> Self {
        match e {
            MshError::Io { path, source } => RunError::Io { path, source },
            other => RunError::Config(ConfigError::Invalid {
                key: "geometry.msh".into(),
                msg: other.to_string(),
            }),
        }
    }
}

fn failed(e: impl std::fmt::Display) -> RunError {
    RunError::Failed(e.to_string())
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Everything a task produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub report: Report,
    pub matrices: Vec<(String, DenseOperator)>,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn surface(cfg: &Config, level: usize) -> Result<SurfaceMesh, RunError> {
    let mesh = match (&cfg.geometry.msh, cfg.geometry.builtin) {
        (Some(path), _) => return Ok(msh::load_msh(path)?),
        (None, Builtin::Icosphere) => SurfaceMesh::icosphere(level),
        (None, Builtin::Cube) => SurfaceMesh::cube(1 << level),
        (None, Builtin::Circle) => {
            return Err(ConfigError::Invalid {
                key: "geometry.builtin".into(),
                msg: "this task needs a surface, not a curve".into(),
            }
            .into())
        }
    };
    let s = cfg.geometry.scale;
    if s == 1.0 {
        return Ok(mesh);
    }
    let vertices = mesh.vertices().iter().map(|&v| v * s).collect();
    SurfaceMesh::new(vertices, mesh.triangles().to_vec()).map_err(failed)
}

pub fn curve(cfg: &Config, level: usize) -> Result<Curve2D, RunError> {
    Curve2D::regular_polygon(1 << level, cfg.geometry.scale).map_err(failed)
}

/// Points on a wavy ring of the given radius.
pub fn ring(radius: f64, count: usize) -> Vec<Vec3> {
    (0..count)
        .map(|k| {
            let t = k as f64 * 0.9 + 0.2;
            Vec3::new(t.cos(), t.sin(), 0.4 * (2.0 * t).sin()).normalized() * radius
        })
        .collect()
}

/// Smooth vector field used as the P1 test density.
pub fn smooth_p1(mesh: &SurfaceMesh) -> Density {
    Density::interpolate(Space::P1, mesh, 3, |p| vec![c(p.x * p.y), C64::new(p.z, 0.3), c(1.0 + p.x)])
}

/// Smooth vector field used as the P0 test density.
pub fn smooth_p0(mesh: &SurfaceMesh) -> Density {
    Density::interpolate(Space::P0, mesh, 3, |x| vec![c(x.z), c(1.0), C64::new(0.0, x.x)])
}

fn tolerance(cfg: &Config, default: f64) -> f64 {
    if cfg.task.tolerance > 0.0 {
        cfg.task.tolerance
    } else {
        default
    }
}

fn rel_diff(a: &DenseOperator, b: &DenseOperator) -> Result<f64, RunError> {
    Ok(a.axpy(c(-1.0), b).map_err(failed)?.max_abs() / b.max_abs().max(f64::MIN_POSITIVE))
}

fn vec_rel(a: &[C64], b: &[C64]) -> f64 {
    let n: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let d: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    n / d
}

/// Adds the rate checks and the finest-level limit for rows of one task.
fn convergence_checks(report: &mut Report, cfg: &Config, limit: Option<f64>) {
    fill_rates(&mut report.rows);
    let names: Vec<String> = report.rows.iter().fold(Vec::new(), |mut v, r| {
        if !v.contains(&r.check) {
            v.push(r.check.clone());
        }
        v
    });
    for name in names {
        let rows: Vec<Row> = report.rows.iter().filter(|r| r.check == name).cloned().collect();
        let last = rows.last().expect("non-empty");
        if let Some(limit) = limit {
            report.at_most(&name, last.rel_err.unwrap_or(f64::INFINITY), limit);
        }
        for (prev, r) in rows.iter().zip(rows.iter().skip(1)) {
            let level = r.level.unwrap_or(0);
            if name.ends_with("_difference") {
                // both forms are exact; only the quadrature error is left, so
                // ask for a decrease rather than an order
                let (a, b) = (prev.rel_err.unwrap_or(f64::NAN), r.rel_err.unwrap_or(f64::NAN));
                report.at_most(&format!("{name}_decreases_level_{level}"), b, a);
            } else {
                report.at_least(&format!("{name}_rate_level_{level}"), r.rate.unwrap_or(f64::NAN), cfg.task.min_rate);
            }
        }
    }
}

pub fn assemble_surface(name: &str, mesh: &SurfaceMesh, params: &WaveParams, opts: &QuadOptions) -> Result<DenseOperator, RunError> {
    let ks = params.kappa_s();
    let op = match name {
        "single_layer" => galerkin_single_layer(mesh, params, Space::P0, Space::P0, opts).map_err(failed)?,
        "single_layer_direct" => galerkin_single_layer_direct(mesh, params, Space::P0, Space::P0, opts).map_err(failed)?,
        "traction_single_layer_interior" => {
            traction_single_layer_operator(mesh, params, Space::P0, Side::Interior, opts).map_err(failed)?
        }
        "traction_single_layer_exterior" => {
            traction_single_layer_operator(mesh, params, Space::P0, Side::Exterior, opts).map_err(failed)?
        }
        "traction_double_layer_alter" => {
            traction_double_layer(mesh, params, TractionForm::Alter, Side::Interior, opts).map_err(failed)?
        }
        "traction_double_layer_v2" => {
            traction_double_layer(mesh, params, TractionForm::V2, Side::Interior, opts).map_err(failed)?
        }
        "helmholtz_single_layer" => helmholtz_single_layer(mesh, ks, Space::P0, Space::P0, opts).map_err(failed)?,
        "helmholtz_double_layer" => galerkin_double_layer(mesh, ks, Space::P1, Space::P0, opts).map_err(failed)?,
        "helmholtz_adjoint" => galerkin_adjoint(mesh, ks, Space::P0, Space::P1, opts).map_err(failed)?,
        "helmholtz_hypersingular" => hypersingular_hamdi(mesh, ks, Space::P1, Space::P1, opts).map_err(failed)?,
        "mass" => mass_matrix(mesh, Space::P0, Space::P1, 3),
        other => return Err(failed(format!("unknown surface operator {other}"))),
    };
    Ok(op)
}

pub fn assemble_curve(name: &str, curve: &Curve2D, params: &WaveParams, q: &CurveQuad) -> Result<DenseOperator, RunError> {
    use Space::{P0, P1};
    let (i, e) = (Side::Interior, Side::Exterior);
    let anti = |op, trial, test| assemble_antiplane(curve, params, op, trial, test, q).map_err(failed);
    let plane = |op, trial, test| assemble_plane(curve, params, op, trial, test, q).map_err(failed);
    match name {
        "antiplane_single_layer" => anti(AntiplaneOp::S3, P0, P0),
        "antiplane_double_layer_interior" => anti(AntiplaneOp::K3(i), P1, P0),
        "antiplane_double_layer_exterior" => anti(AntiplaneOp::K3(e), P1, P0),
        "antiplane_traction_single_layer_interior" => anti(AntiplaneOp::TS3(i), P0, P1),
        "antiplane_traction_single_layer_exterior" => anti(AntiplaneOp::TS3(e), P0, P1),
        "antiplane_traction_double_layer" => anti(AntiplaneOp::TK3, P1, P1),
        "antiplane_traction_double_layer_alt" => anti(AntiplaneOp::TK3Alt, P1, P1),
        "plane_single_layer" => plane(PlaneOp::S, P0, P0),
        "plane_double_layer_interior" => plane(PlaneOp::K(i), P1, P0),
        "plane_double_layer_exterior" => plane(PlaneOp::K(e), P1, P0),
        "plane_traction_single_layer_interior" => plane(PlaneOp::TS(i), P0, P1),
        "plane_traction_single_layer_exterior" => plane(PlaneOp::TS(e), P0, P1),
        "plane_traction_double_layer" => plane(PlaneOp::TK(i), P1, P1),
        "elastic_single_layer" => assemble_elastic_2d(curve, params, Elastic2dOp::S, P0, P0, q).map_err(failed),
        "elastic_traction_double_layer" => {
            assemble_elastic_2d(curve, params, Elastic2dOp::TK(i), P1, P1, q).map_err(failed)
        }
        "helmholtz_single_layer" => {
            helmholtz_2d(curve, params.kappa_s(), HelmholtzOp2d::SingleLayer, P0, P0, q).map_err(failed)
        }
        other => Err(failed(format!("unknown curve operator {other}"))),
    }
}

fn assemble(cfg: &Config, params: &WaveParams) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let level = cfg.level();
    let names: Vec<String> = if !cfg.task.operators.is_empty() {
        cfg.task.operators.clone()
    } else if cfg.planar() {
        CURVE_DEFAULT.iter().map(|s| s.to_string()).collect()
    } else {
        SURFACE_DEFAULT.iter().map(|s| s.to_string()).collect()
    };
    let geometry = if cfg.planar() {
        let cv = curve(cfg, level)?;
        let h = cv.max_segment_length();
        (None, Some(cv), h)
    } else {
        let m = surface(cfg, level)?;
        let h = m.max_edge_length();
        (Some(m), None, h)
    };
    for name in names {
        let op = match &geometry {
            (Some(m), _, _) => assemble_surface(&name, m, params, &cfg.quad())?,
            (_, Some(cv), _) => assemble_curve(&name, cv, params, &cfg.curve_quad())?,
            _ => unreachable!(),
        };
        let finite = op.data.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        out.report.row(Row::new("assemble", &name, op.frobenius()).at(level, geometry.2));
        out.report.at_most(&format!("{name}_finite"), if finite { 0.0 } else { 1.0 }, 0.0);
        out.matrices.push((name, op));
    }
    Ok(out)
}

/// Default jump-check elements: four spread over the mesh.
pub fn spread_elements(ne: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [0, ne / 4, ne / 2, 3 * ne / 4].into_iter().filter(|&e| e < ne).collect();
    v.dedup();
    v
}

fn jumps(cfg: &Config, params: &WaveParams) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    for &level in &cfg.task.levels {
        let mesh = surface(cfg, level)?;
        let ne = mesh.triangles().len();
        let elements = if cfg.task.elements.is_empty() {
            spread_elements(ne)
        } else {
            cfg.task.elements.clone()
        };
        if let Some(&e) = elements.iter().find(|&&e| e >= ne) {
            return Err(ConfigError::Invalid {
                key: "task.elements".into(),
                msg: format!("element {e} does not exist at level {level} ({ne} elements)"),
            }
            .into());
        }
        let j = near_boundary_jumps(
            &mesh,
            params,
            &smooth_p0(&mesh),
            &smooth_p1(&mesh),
            &elements,
            &cfg.task.offsets,
            &cfg.quad(),
        )
        .map_err(failed)?;
        let h = mesh.max_edge_length();
        for (name, v) in [
            ("single_layer_jump", j.single),
            ("double_layer_jump", j.double),
            ("traction_single_layer_jump", j.traction_single),
            ("traction_double_layer_jump", j.traction_double),
        ] {
            out.report.row(Row::new("jumps", name, v).at(level, h).error(v, v));
        }
    }
    convergence_checks(&mut out.report, cfg, Some(tolerance(cfg, 0.02)));
    Ok(out)
}

fn somigliana(cfg: &Config, params: &WaveParams) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let s = cfg.geometry.scale;
    let x0 = Vec3::from(cfg.task.source) * s;
    let a = [c(1.0), c(0.5), c(-0.3)];
    let points: Vec<Vec3> = cfg.task.radii.iter().flat_map(|&r| ring(r * s, 6)).collect();
    for &level in &cfg.task.levels {
        let mesh = surface(cfg, level)?;
        let grid = mesh.classify_points(&points).map_err(failed)?;
        let inside = mesh.classify_points(&[x0]).map_err(failed)?;
        if inside.regions[0] != elasto_bem_core::mesh::Region::Interior {
            return Err(ConfigError::Invalid {
                key: "task.source".into(),
                msg: "the source must lie inside the surface".into(),
            }
            .into());
        }
        if grid.regions.iter().any(|r| *r != elasto_bem_core::mesh::Region::Exterior) {
            return Err(ConfigError::Invalid {
                key: "task.radii".into(),
                msg: "evaluation points must lie outside the surface".into(),
            }
            .into());
        }
        let res = somigliana_residual(&mesh, params, x0, a, &grid, &cfg.quad()).map_err(failed)?;
        out.report.row(Row::new("somigliana", "exterior_representation", res).at(level, mesh.max_edge_length()).error(res, res));
    }
    convergence_checks(&mut out.report, cfg, Some(tolerance(cfg, 0.05)));
    Ok(out)
}

/// Relative residual of `T K u + (T S)⁺ t − M t` for the plane wave
/// `u = a e^{iκ d·x}` with P1 displacement and P0 traction samples.
pub fn calderon_residual_3d(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    pressure: bool,
    opts: &QuadOptions,
) -> Result<f64, RunError> {
    let d = Vec3::new(0.6, 0.0, 0.8);
    let (kk, a) = if pressure {
        (params.kappa_p(), d)
    } else {
        (params.kappa_s(), Vec3::new(0.8, 0.0, -0.6))
    };
    let phase = |x: Vec3| C64::new(0.0, kk * d.dot(x)).exp();
    let u = Density::interpolate(Space::P1, mesh, 3, |x| (0..3).map(|k| phase(x) * a[k]).collect());
    let ne = mesh.triangles().len();
    let mut t = vec![c(0.0); 3 * ne];
    for (e, f) in mesh.frames().iter().enumerate() {
        let g = phase(f.centroid) * C64::new(0.0, kk);
        let jac: CMat3 = core::array::from_fn(|k| core::array::from_fn(|m| g * (a[k] * d[m])));
        let tr = traction_from_jacobian(&jac, f.normal, params.mu(), params.lambda());
        for k in 0..3 {
            t[k * ne + e] = tr[k];
        }
    }
    let td = Density {
        space: Space::P0,
        components: 3,
        coeffs: t,
    };
    let tk = traction_double_layer(mesh, params, TractionForm::Alter, Side::Interior, opts).map_err(failed)?;
    let ts = traction_single_layer_operator(mesh, params, Space::P0, Side::Interior, opts).map_err(failed)?;
    let m = mass_matrix(mesh, Space::P0, Space::P1, 3);
    let lhs: Vec<C64> = tk
        .apply(&u)
        .map_err(failed)?
        .iter()
        .zip(ts.apply(&td).map_err(failed)?)
        .map(|(x, y)| x + y)
        .collect();
    Ok(vec_rel(&lhs, &m.apply(&td).map_err(failed)?))
}

fn curve_midpoint(curve: &Curve2D, e: usize) -> [f64; 2] {
    let s = curve.segments()[e];
    let (a, b) = (curve.vertices()[s.start], curve.vertices()[s.end]);
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Interior Calderón residuals `(traction, displacement)` on a curve for the
/// plane wave `u = a e^{iκ d·x}` with in-plane `d` and polarization `a`
/// (in-plane for plane waves, `e₃` for antiplane).
pub fn calderon_residual_2d(
    curve: &Curve2D,
    params: &WaveParams,
    kk: f64,
    pol: Vec3,
    q: &CurveQuad,
) -> Result<(f64, f64), RunError> {
    let d = Vec3::new(0.6, 0.8, 0.0);
    let phase = |x: [f64; 2]| C64::new(0.0, kk * (d.x * x[0] + d.y * x[1])).exp();
    let u = sample_curve(curve, Space::P1, 3, |x| (0..3).map(|k| phase(x) * pol[k]).collect());
    let ne = curve.segments().len();
    let mut t = vec![c(0.0); 3 * ne];
    for (e, s) in curve.segments().iter().enumerate() {
        let g = phase(curve_midpoint(curve, e)) * C64::new(0.0, kk);
        let jac: CMat3 = core::array::from_fn(|k| core::array::from_fn(|m| g * (pol[k] * d[m])));
        let n = Vec3::new(s.normal[0], s.normal[1], 0.0);
        let tr: CVec3 = traction_from_jacobian(&jac, n, params.mu(), params.lambda());
        for k in 0..3 {
            t[k * ne + e] = tr[k];
        }
    }
    let td = Density {
        space: Space::P0,
        components: 3,
        coeffs: t,
    };
    let side = Side::Interior;
    let op = |o, trial, test| assemble_elastic_2d(curve, params, o, trial, test, q).map_err(failed);
    let tk = op(Elastic2dOp::TK(side), Space::P1, Space::P1)?;
    let ts = op(Elastic2dOp::TS(side), Space::P0, Space::P1)?;
    let k = op(Elastic2dOp::K(side), Space::P1, Space::P0)?;
    let s = op(Elastic2dOp::S, Space::P0, Space::P0)?;
    let sum = |a: Vec<C64>, b: Vec<C64>| -> Vec<C64> { a.iter().zip(&b).map(|(x, y)| x + y).collect() };
    let traction = sum(tk.apply(&u).map_err(failed)?, ts.apply(&td).map_err(failed)?);
    let disp = sum(k.apply(&u).map_err(failed)?, s.apply(&td).map_err(failed)?);
    let mt = mass_matrix_2d(curve, Space::P0, Space::P1, 3).apply(&td).map_err(failed)?;
    let mu = mass_matrix_2d(curve, Space::P1, Space::P0, 3).apply(&u).map_err(failed)?;
    Ok((vec_rel(&traction, &mt), vec_rel(&disp, &mu)))
}

/// Lowest Fourier eigenvalue of the circle single layer as a Rayleigh
/// quotient, and its exact value `(iπR/2) J₀(κR) H₀(κR)`.
pub fn circle_eigenvalue(curve: &Curve2D, kappa: f64, radius: f64, q: &CurveQuad) -> Result<(C64, C64), RunError> {
    let v = helmholtz_2d(curve, kappa, HelmholtzOp2d::SingleLayer, Space::P0, Space::P0, q).map_err(failed)?;
    let one = vec![c(1.0); curve.segments().len()];
    let got = v.bilinear(&one, &one).map_err(failed)? / curve.total_length();
    let (h0, _) = hankel01(kappa * radius);
    Ok((got, C64::new(0.0, std::f64::consts::PI * radius / 2.0) * h0.re * h0))
}

fn convergence(cfg: &Config, params: &WaveParams) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let limit = (cfg.task.tolerance > 0.0).then_some(cfg.task.tolerance);
    let mut eigen: Vec<(usize, C64, C64)> = Vec::new();
    for &level in &cfg.task.levels {
        if cfg.planar() {
            let cv = curve(cfg, level)?;
            let (h, q) = (cv.max_segment_length(), cfg.curve_quad());
            let waves = [
                ("pressure", params.kappa_p(), Vec3::new(0.6, 0.8, 0.0)),
                ("shear", params.kappa_s(), Vec3::new(-0.8, 0.6, 0.0)),
                ("antiplane", params.kappa_s(), Vec3::new(0.0, 0.0, 1.0)),
            ];
            for (label, kk, pol) in waves {
                let (tr, disp) = calderon_residual_2d(&cv, params, kk, pol, &q)?;
                out.report.row(Row::new("convergence", &format!("calderon_traction_{label}"), tr).at(level, h).error(tr, tr));
                out.report.row(Row::new("convergence", &format!("calderon_displacement_{label}"), disp).at(level, h).error(disp, disp));
            }
            let (got, exact) = circle_eigenvalue(&cv, params.kappa_s(), cfg.geometry.scale, &q)?;
            let err = (got - exact).norm();
            let mut row = Row::new("convergence", "circle_eigenvalue", got.norm()).at(level, h);
            row.reference = Some(exact.norm());
            row.abs_err = Some(err);
            row.rel_err = Some(err / exact.norm());
            out.report.row(row);
            eigen.push((level, got, exact));
        } else {
            let mesh = surface(cfg, level)?;
            let (h, opts) = (mesh.max_edge_length(), cfg.quad());
            for (label, pressure) in [("pressure", true), ("shear", false)] {
                let r = calderon_residual_3d(&mesh, params, pressure, &opts)?;
                out.report.row(Row::new("convergence", &format!("calderon_traction_{label}"), r).at(level, h).error(r, r));
            }
            let a = traction_double_layer(&mesh, params, TractionForm::Alter, Side::Interior, &opts).map_err(failed)?;
            let v = traction_double_layer(&mesh, params, TractionForm::V2, Side::Interior, &opts).map_err(failed)?;
            let d = v.axpy(c(-1.0), &a).map_err(failed)?.frobenius() / a.frobenius();
            out.report.row(Row::new("convergence", "traction_forms_difference", d).at(level, h).error(d, d));
        }
    }
    convergence_checks(&mut out.report, cfg, limit);
    // Richardson value from the two finest polygons, O(h²)
    if let [.., (l1, a, _), (l2, b, exact)] = eigen[..] {
        if l2 == l1 + 1 {
            let x = (b * 4.0 - a) / 3.0;
            let err = (x - exact).norm() / exact.norm();
            let mut row = Row::new("convergence", "circle_eigenvalue_extrapolated", x.norm()).at(l2, 0.0);
            row.h = None;
            row.reference = Some(exact.norm());
            row.abs_err = Some((x - exact).norm());
            row.rel_err = Some(err);
            out.report.row(row);
        }
    }
    Ok(out)
}

fn identities(cfg: &Config, params: &WaveParams) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let level = cfg.level();
    let mut add = |name: &str, value: f64, default: f64, h: f64| {
        out.report.row(Row::new("identities", name, value).at(level, h).error(value, value));
        out.report.at_most(name, value, tolerance(cfg, default));
    };
    if cfg.planar() {
        let cv = curve(cfg, level)?;
        let (h, q) = (cv.max_segment_length(), cfg.curve_quad());
        let tk = assemble_curve("antiplane_traction_double_layer", &cv, params, &q)?;
        let alt = assemble_curve("antiplane_traction_double_layer_alt", &cv, params, &q)?;
        add("antiplane_traction_double_layer_forms", rel_diff(&tk, &alt)?, 1e-8, h);
        let s3 = assemble_curve("antiplane_single_layer", &cv, params, &q)?;
        let v = helmholtz_2d(&cv, params.kappa_s(), HelmholtzOp2d::SingleLayer, Space::P0, Space::P0, &q).map_err(failed)?;
        add("antiplane_single_layer_scaling", rel_diff(&s3.scaled(c(params.mu())), &v)?, 1e-12, h);
        let int = assemble_curve("plane_traction_single_layer_interior", &cv, params, &q)?;
        let ext = assemble_curve("plane_traction_single_layer_exterior", &cv, params, &q)?;
        let m = mass_matrix_2d(&cv, Space::P0, Space::P1, 2);
        add("plane_traction_single_layer_jump", rel_diff(&int.axpy(c(-1.0), &ext).map_err(failed)?, &m)?, 1e-10, h);
        let mut worst: f64 = 0.0;
        for (ts, k) in [
            ("plane_traction_single_layer_interior", "plane_double_layer_exterior"),
            ("plane_traction_single_layer_exterior", "plane_double_layer_interior"),
        ] {
            let ts = assemble_curve(ts, &cv, params, &q)?;
            let k = assemble_curve(k, &cv, params, &q)?;
            worst = worst.max(ts.axpy(c(1.0), &k.transpose()).map_err(failed)?.max_abs() / ts.max_abs());
        }
        add("plane_traction_duality", worst, 1e-10, h);
        let s = assemble_curve("plane_single_layer", &cv, params, &q)?;
        add("plane_single_layer_symmetry", s.symmetry_defect(), 1e-12, h);
        return Ok(out);
    }
    let mesh = surface(cfg, level)?;
    let (h, opts) = (mesh.max_edge_length(), cfg.quad());
    let area = mesh.total_area();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.task.seed);
    let nv = mesh.vertices().len();
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.task.samples {
        let mut draw = || {
            let coeffs: Vec<C64> = (0..nv).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            Density::scalar(Space::P1, coeffs)
        };
        let (u, v) = (draw(), draw());
        let sup = |d: &Density| d.coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let scale = sup(&u) * sup(&v) * area;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let r = symmetry_residual(&mesh, &u, &v, i, j).map_err(failed)?;
            worst = worst.max(r.norm() / scale);
        }
    }
    add("guenter_symmetry", worst, 1e-10, h);
    let psi = smooth_p1(&mesh);
    let s = cfg.geometry.scale;
    let mut pts = ring(0.3 * s, 4);
    for &r in &cfg.task.radii {
        pts.extend(ring(r * s, 4));
    }
    let grid = mesh.classify_points(&pts).map_err(failed)?;
    let k1 = eval_k(&mesh, params, &psi, &grid, KForm::I, &opts).map_err(failed)?;
    let k2 = eval_k(&mesh, params, &psi, &grid, KForm::II, &opts).map_err(failed)?;
    let flat = |v: &[CVec3]| -> Vec<C64> { v.iter().flatten().copied().collect() };
    let worst = k1
        .iter()
        .zip(&k2)
        .map(|(a, b)| {
            let d: f64 = (0..3).map(|k| (a[k] - b[k]).norm_sqr()).sum::<f64>().sqrt();
            d / cnorm(b)
        })
        .fold(0.0, f64::max);
    add("double_layer_forms", worst, 1e-10, h);
    let rot = rotational_identity_residual(&mesh, params.kappa_s(), &psi, &grid, &opts).map_err(failed)?;
    let size = flat(&k2).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = rot.iter().map(cnorm).fold(0.0, f64::max) / size;
    add("rotational_identity", worst, 1e-10, h);
    let int = traction_single_layer_operator(&mesh, params, Space::P0, Side::Interior, &opts).map_err(failed)?;
    let ext = traction_single_layer_operator(&mesh, params, Space::P0, Side::Exterior, &opts).map_err(failed)?;
    let m = mass_matrix(&mesh, Space::P0, Space::P1, 3);
    add("traction_single_layer_jump", rel_diff(&int.axpy(c(-1.0), &ext).map_err(failed)?, &m)?, 1e-10, h);
    let tk = traction_double_layer(&mesh, params, TractionForm::Alter, Side::Interior, &opts).map_err(failed)?;
    add("traction_double_layer_symmetry", tk.symmetry_defect(), 1e-10, h);
    Ok(out)
}

fn kernels_selftest(params: &WaveParams) -> Outcome {
    let mut out = Outcome::default();
    for o in selftest::run(params) {
        let mut row = Row::new("kernels-selftest", &o.name, o.value);
        row.reference = Some(o.reference);
        row.abs_err = Some(o.abs_err);
        row.rel_err = Some(o.rel_err);
        out.report.row(row);
        out.report.at_most(&o.name, o.rel_err, o.limit);
    }
    out
}

/// Runs `task` without writing anything.
pub fn compute(cfg: &Config, task: Task) -> Result<Outcome, RunError> {
    let params = cfg.params()?;
    match task {
        Task::KernelsSelftest => Ok(kernels_selftest(&params)),
        Task::Assemble => assemble(cfg, &params),
        Task::Identities => identities(cfg, &params),
        Task::Convergence => convergence(cfg, &params),
        Task::Jumps | Task::Somigliana if cfg.planar() => Err(ConfigError::Invalid {
            key: "geometry.builtin".into(),
            msg: format!("task {} needs a surface", task.name()),
        }
        .into()),
        Task::Jumps => jumps(cfg, &params),
        Task::Somigliana => somigliana(cfg, &params),
    }
}

/// Text of `manifest.txt`.
pub fn manifest(cfg: &Config, task: Task, threads: usize, artifacts: &[String], report: &Report) -> String {
    let q = cfg.quad();
    let cq = cfg.curve_quad();
    let mut s = String::new();
    s += &format!("elasto-bem {}\n", env!("CARGO_PKG_VERSION"));
    s += &format!("elasto-bem-core {}\n", elasto_bem_core::VERSION);
    s += &format!("task = {}\n", task.name());
    s += &format!("threads = {threads}\n");
    s += &format!("seed = {}\n", cfg.task.seed);
    s += "\n# quadrature options passed to the core library\n";
    s += &format!(
        "quadrature.singular_order = {}\nquadrature.near_degree = {}\nquadrature.mid_degree = {}\nquadrature.far_degree = {}\n",
        q.singular_order, q.near_degree, q.mid_degree, q.far_degree
    );
    s += &format!(
        "quadrature.near_ratio = {}\nquadrature.mid_ratio = {}\nquadrature.far_ratio = {}\nquadrature.eta = {}\nquadrature.eval_degree = {}\n",
        q.near_ratio, q.mid_ratio, q.far_ratio, q.eta, q.eval_degree
    );
    s += &format!(
        "curve_quadrature.log_order = {}\ncurve_quadrature.log_levels = {}\ncurve_quadrature.log_sigma = {}\n",
        cq.log_order, cq.log_levels, cq.log_sigma
    );
    s += "\n# artifacts\n";
    for a in artifacts {
        s += &format!("{a}\n");
    }
    s += "\n# checks\n";
    for c in &report.checks {
        s += &format!("{} {} {}\n", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    s += "\n# effective configuration\n";
    s += &cfg.echo();
    s
}

/// Runs `task` and writes its artifacts under `out`. The number of worker
/// threads defaults to rayon's choice.
pub fn run(cfg: &Config, task: Task, out: &Path, threads: Option<usize>) -> Result<Report, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(failed)?;
    let outcome = pool.install(|| compute(cfg, task))?;
    std::fs::create_dir_all(out).map_err(io(out))?;
    let mut artifacts = Vec::new();
    if cfg.wants("matrix") {
        for (name, op) in &outcome.matrices {
            let path: PathBuf = out.join(format!("{name}.ebem"));
            matfile::write_matrix(&path, op)?;
            artifacts.push(format!("{name}.ebem"));
            artifacts.push(format!("{name}.json"));
        }
    }
    if cfg.wants("csv") {
        let path = out.join("report.csv");
        outcome.report.write_csv(&path).map_err(io(&path))?;
        artifacts.push("report.csv".into());
    }
    if cfg.wants("json") {
        let path = out.join("report.json");
        outcome.report.write_json(&path).map_err(io(&path))?;
        artifacts.push("report.json".into());
    }
    artifacts.push("manifest.txt".into());
    let path = out.join("manifest.txt");
    let text = manifest(cfg, task, pool.current_num_threads(), &artifacts, &outcome.report);
    std::fs::write(&path, text).map_err(io(&path))?;
    Ok(outcome.report)
}

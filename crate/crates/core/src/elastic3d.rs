//! Elastic-wave layer potentials and tractions.
//!
//! Everything is assembled from Helmholtz kernels at `κs` and `κp`, the
//! smooth difference `ψ = G_κp − G_κs` and Günter derivatives:
//!
//! * `S p = (1/ρω²)(κs² V_κs p − ∇∇·D p)`, `D = V_κp − V_κs`
//! * `K ψ = ∇V_κp(n·ψ) − ∇×V_κs(n×ψ) − 2μ S(Mψ)` (form I)
//! * `K ψ = N_κs ψ + (V_κs − 2μS)(Mψ) + ∇D(n·ψ)` (form II)
//!
//! With the interior on the `+` side the jumps are `[S p] = 0`,
//! `[K ψ] = ψ`, `[T S p] = p` and `[T K ψ] = 0`.

use crate::dense::{Convention, DenseOperator, Side};
use crate::geometry::{CVec3, CZERO3};
use crate::guenter::{barycentric_gradients, guenter_matrix_elements};
use crate::kernels::{
    diff_kernel, helmholtz_radial, kupradze_field_traction, kupradze_gamma, kupradze_gamma_direct, KernelError,
    WaveParams,
};
use crate::mesh::{EvalGrid, MeshError, Region, SurfaceMesh};
use crate::par;
use crate::potentials::engine::{
    assemble, assemble_local, local_mass, locals, sym, Channels, Idx, KernelSet, Moments, PairEngine, PointEngine,
    DNX, DNY, GAMMA, GP, GRAD, GS, HESS, PSI,
};
use crate::potentials::PotentialError;
use crate::prelude::*;
use crate::quadrature::{QuadError, QuadOptions};
use crate::space::{Density, Space, SpaceDesc, SpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElasticError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{0} requires piecewise-linear (P1) densities")]
    NotP1(&'static str),
    #[error("point {0} is on the wrong side of the surface")]
    Misclassified(usize),
    #[error("element {0} does not exist")]
    NoSuchElement(usize),
    #[error("offsets must be distinct and positive")]
    BadOffsets,
}

impl From<PotentialError> for ElasticError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Space(s) => ElasticError::Space(s),
            PotentialError::Quad(q) => ElasticError::Quad(q),
            PotentialError::NotP1(w) => ElasticError::NotP1(w),
        }
    }
}

/// Which printed expression of the double-layer potential to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KForm {
    I,
    II,
}

/// Which representation of the double-layer traction to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TractionForm {
    /// Hamdi-regularised hypersingular part plus Günter/single-layer terms.
    Alter,
    /// Surface-rotational leading term plus the `∇∇·D` Günter term.
    V2,
}

fn vec_density(d: &Density, mesh: &SurfaceMesh) -> Result<(), SpaceError> {
    d.expect(d.space, 3, mesh)
}

#[inline]
fn vec_at(mesh: &SurfaceMesh, d: &Density, e: usize, b: [f64; 3]) -> CVec3 {
    let n = d.dofs();
    match d.space {
        Space::P0 => [d.coeffs[e], d.coeffs[n + e], d.coeffs[2 * n + e]],
        Space::P1 => {
            let t = mesh.triangles()[e];
            core::array::from_fn(|c| {
                let o = c * n;
                d.coeffs[o + t[0]] * b[0] + d.coeffs[o + t[1]] * b[1] + d.coeffs[o + t[2]] * b[2]
            })
        }
    }
}

fn eval_points<F>(mesh: &SurfaceMesh, grid: &EvalGrid, opts: &QuadOptions, f: F) -> Result<Vec<CVec3>, ElasticError>
where
    F: Fn(Vec3, usize, Vec3, [f64; 3], f64, &mut CVec3) + Sync,
{
    let pe = PointEngine::new(mesh, opts)?;
    let res: Vec<Result<CVec3, QuadError>> = par::map(grid.len(), |k| {
        let x = grid.points[k];
        let mut acc = CZERO3;
        for e in 0..mesh.triangles().len() {
            pe.nodes(x, e, |y, b, w| f(x, e, y, b, w, &mut acc))?;
        }
        Ok(acc)
    });
    res.into_iter().map(|r| r.map_err(Into::into)).collect()
}

/// Adds `w (V_κs − 2μS)-style` kernel action: `α G_s q + β ∇∇ψ q`.
#[inline]
fn single_layer_action(
    params: &WaveParams,
    z: Vec3,
    q: &CVec3,
    w: f64,
    gs_coef: f64,
    hess_coef: f64,
    acc: &mut CVec3,
) {
    let r = z.norm();
    let gs = helmholtz_radial(params.kappa_s(), r).value;
    let h = diff_kernel(params.kappa_p(), params.kappa_s(), r).hessian(z / r);
    for k in 0..3 {
        let mut s = gs * gs_coef * q[k];
        for l in 0..3 {
            s += h[k][l] * q[l] * hess_coef;
        }
        acc[k] += s * w;
    }
}

/// `S p` at off-surface points through the regularised route.
pub fn eval_s(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    p: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<CVec3>, ElasticError> {
    vec_density(p, mesh)?;
    let inv = 1.0 / params.omega2_rho();
    let ks2 = params.kappa_s() * params.kappa_s();
    eval_points(mesh, grid, opts, |x, e, y, b, w, acc| {
        let q = vec_at(mesh, p, e, b);
        single_layer_action(params, x - y, &q, w, ks2 * inv, -inv, acc);
    })
}

/// `∫ Γ(x, y) p(y)` with the Kupradze matrix evaluated pointwise.
pub fn eval_s_direct(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    p: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<CVec3>, ElasticError> {
    vec_density(p, mesh)?;
    let out = eval_points(mesh, grid, opts, |x, e, y, b, w, acc| {
        let q = vec_at(mesh, p, e, b);
        if let Ok(g) = kupradze_gamma(params, x, y) {
            for k in 0..3 {
                for l in 0..3 {
                    acc[k] += g[k][l] * q[l] * w;
                }
            }
        }
    })?;
    Ok(out)
}

/// `K ψ` at off-surface points in either printed form.
pub fn eval_k(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    psi: &Density,
    grid: &EvalGrid,
    form: KForm,
    opts: &QuadOptions,
) -> Result<Vec<CVec3>, ElasticError> {
    if psi.space != Space::P1 {
        return Err(ElasticError::NotP1("double-layer potential"));
    }
    vec_density(psi, mesh)?;
    let mpsi = guenter_matrix_elements(mesh, psi);
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let inv = 1.0 / params.omega2_rho();
    let mu = params.mu();
    eval_points(mesh, grid, opts, |x, e, y, b, w, acc| {
        let n = mesh.frame(e).normal;
        let q = vec_at(mesh, psi, e, b);
        let nq: C64 = q[0] * n.x + q[1] * n.y + q[2] * n.z;
        let z = x - y;
        let r = z.norm();
        let zh = z / r;
        match form {
            KForm::I => {
                // ∇V_p(n·ψ) − ∇×V_s(n×ψ) − 2μ S(Mψ)
                let gp = helmholtz_radial(kp, r).d1;
                let gs = helmholtz_radial(ks, r).d1;
                let nxq: CVec3 = [
                    q[2] * n.y - q[1] * n.z,
                    q[0] * n.z - q[2] * n.x,
                    q[1] * n.x - q[0] * n.y,
                ];
                let g = [zh.x, zh.y, zh.z];
                let curl: CVec3 = [
                    (nxq[2] * g[1] - nxq[1] * g[2]) * gs,
                    (nxq[0] * g[2] - nxq[2] * g[0]) * gs,
                    (nxq[1] * g[0] - nxq[0] * g[1]) * gs,
                ];
                for k in 0..3 {
                    acc[k] += (gp * g[k] * nq - curl[k]) * w;
                }
                let ks2 = ks * ks;
                single_layer_action(params, z, &mpsi[e], w, -2.0 * mu * ks2 * inv, 2.0 * mu * inv, acc);
            }
            KForm::II => {
                // N_s ψ + (V_s − 2μS)(Mψ) + ∇D(n·ψ)
                let rs = helmholtz_radial(ks, r);
                let dn = rs.d1 * zh.dot(n);
                let dd = diff_kernel(kp, ks, r).d1;
                for k in 0..3 {
                    acc[k] += (dn * q[k] + dd * zh[k] * nq) * w;
                }
                let ks2 = ks * ks;
                single_layer_action(params, z, &mpsi[e], w, 1.0 - 2.0 * mu * ks2 * inv, 2.0 * mu * inv, acc);
            }
        }
    })
}

/// `∇V_κ(n·ψ) − ∇×V_κ(n×ψ) − N_κψ − V_κ(Mψ)` at off-surface points. The
/// identity behind the two double-layer forms; it vanishes for P1 densities
/// up to quadrature error.
pub fn rotational_identity_residual(
    mesh: &SurfaceMesh,
    kappa: f64,
    psi: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<CVec3>, ElasticError> {
    if psi.space != Space::P1 {
        return Err(ElasticError::NotP1("rotational identity"));
    }
    vec_density(psi, mesh)?;
    let mpsi = guenter_matrix_elements(mesh, psi);
    eval_points(mesh, grid, opts, |x, e, y, b, w, acc| {
        let n = mesh.frame(e).normal;
        let q = vec_at(mesh, psi, e, b);
        let nq: C64 = q[0] * n.x + q[1] * n.y + q[2] * n.z;
        let z = x - y;
        let r = z.norm();
        let zh = z / r;
        let rad = helmholtz_radial(kappa, r);
        let nxq: CVec3 = [
            q[2] * n.y - q[1] * n.z,
            q[0] * n.z - q[2] * n.x,
            q[1] * n.x - q[0] * n.y,
        ];
        let curl: CVec3 = [
            nxq[2] * zh.y - nxq[1] * zh.z,
            nxq[0] * zh.z - nxq[2] * zh.x,
            nxq[1] * zh.x - nxq[0] * zh.y,
        ];
        let dn = zh.dot(n);
        for k in 0..3 {
            acc[k] += (rad.d1 * (zh[k] * nq - curl[k] - q[k] * dn) - rad.value * mpsi[e][k]) * w;
        }
    })
}

/// `K ψ` from the traction of the Kupradze matrix, `∫ (T_y Γ)ᵀ`-type kernel
/// with the sign that makes `[K ψ] = ψ`.
pub fn eval_k_direct(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    psi: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<CVec3>, ElasticError> {
    vec_density(psi, mesh)?;
    eval_points(mesh, grid, opts, |x, e, y, b, w, acc| {
        let n = mesh.frame(e).normal;
        let q = vec_at(mesh, psi, e, b);
        if let Ok(t) = kupradze_field_traction(params, x - y, n) {
            for j in 0..3 {
                for k in 0..3 {
                    acc[j] += t[k][j] * q[k] * w;
                }
            }
        }
    })
}

/// Per-element data of the P1 vector basis `λ_i e_k`.
struct BasisData {
    normal: Vec<Vec3>,
    /// `guenter[e][i][k]` = `M(λ_i e_k)` on element `e`.
    guenter: Vec<[[Vec3; 3]; 3]>,
    /// `curl[e][i][k]` = `∇_Γ·((λ_i e_k) × n)`.
    curl: Vec<[[f64; 3]; 3]>,
    area: Vec<f64>,
}

impl BasisData {
    fn new(mesh: &SurfaceMesh) -> Self {
        let ne = mesh.triangles().len();
        let mut normal = Vec::with_capacity(ne);
        let mut guenter = Vec::with_capacity(ne);
        let mut curl = Vec::with_capacity(ne);
        let mut area = Vec::with_capacity(ne);
        for e in 0..ne {
            let f = mesh.frame(e);
            let g = barycentric_gradients(mesh, e);
            let n = f.normal;
            let mut gm = [[Vec3::ZERO; 3]; 3];
            let mut cm = [[0.0; 3]; 3];
            for i in 0..3 {
                let gc = g[i].cross(n);
                for k in 0..3 {
                    // (M λ_i e_k)_m = M_mk λ_i = g_m n_k − g_k n_m
                    gm[i][k] = g[i] * n[k] - n * g[i][k];
                    cm[i][k] = -gc[k];
                }
            }
            normal.push(n);
            guenter.push(gm);
            curl.push(cm);
            area.push(f.area);
        }
        BasisData {
            normal,
            guenter,
            curl,
            area,
        }
    }
}

fn vector_op(mesh: &SurfaceMesh, trial: Space, test: Space, conv: Convention) -> DenseOperator {
    let (td, sd) = (SpaceDesc::new(test, 3), SpaceDesc::new(trial, 3));
    DenseOperator::zeros(td.len(mesh), sd.len(mesh), sd, td, conv)
}

/// Galerkin matrix of `S` through the regularised Helmholtz route.
pub fn galerkin_single_layer(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, ElasticError> {
    let ch = Channels {
        gs: true,
        hess: true,
        ..Default::default()
    };
    let eng = PairEngine::new(mesh, KernelSet::elastic(params, ch), opts)?;
    let inv = 1.0 / params.omega2_rho();
    let ks2 = params.kappa_s() * params.kappa_s();
    let mut op = vector_op(mesh, trial, test, Convention::new("elastic_single_layer", "(ks^2 G_s I - Hess psi)/(rho w^2)", None));
    let (lt, lb) = (locals(test), locals(trial));
    op.data = assemble(&eng, op.test, op.trial, |_, _, m, blk| {
        for (i, &ii) in lt.iter().enumerate() {
            for (j, &jj) in lb.iter().enumerate() {
                let g = m.get(GS, ii, jj) * (ks2 * inv);
                for k in 0..3 {
                    for l in 0..3 {
                        let mut v = -m.get(HESS + sym(k, l), ii, jj) * inv;
                        if k == l {
                            v += g;
                        }
                        blk.add(k * lt.len() + i, l * lb.len() + j, v);
                    }
                }
            }
        }
    });
    Ok(op)
}

/// Galerkin matrix of `S` from pointwise Kupradze matrices computed with
/// the two individual Helmholtz Hessians.
pub fn galerkin_single_layer_direct(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, ElasticError> {
    let ch = Channels {
        gamma: true,
        ..Default::default()
    };
    let eng = PairEngine::new(mesh, KernelSet::elastic(params, ch), opts)?;
    let mut op = vector_op(mesh, trial, test, Convention::new("elastic_single_layer", "Gamma", None));
    let (lt, lb) = (locals(test), locals(trial));
    op.data = assemble(&eng, op.test, op.trial, |_, _, m, blk| {
        for (i, &ii) in lt.iter().enumerate() {
            for (j, &jj) in lb.iter().enumerate() {
                for k in 0..3 {
                    for l in 0..3 {
                        blk.add(k * lt.len() + i, l * lb.len() + j, m.get(GAMMA + sym(k, l), ii, jj));
                    }
                }
            }
        }
    });
    Ok(op)
}

/// Pointwise Kupradze matrix from individual Hessians, re-exported for oracles.
pub fn kupradze_reference(params: &WaveParams, x: Vec3, y: Vec3) -> Result<crate::geometry::CMat3, ElasticError> {
    Ok(kupradze_gamma_direct(params, x, y)?)
}

/// Galerkin matrix of `(T S p)±` tested with P1 vector functions:
/// `⟨φ, (±½ + K'_s) p⟩ + ⟨n·φ, ∇·D p⟩ − ⟨Mφ, (V_s − 2μS) p⟩`.
pub fn traction_single_layer_operator(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    trial: Space,
    side: Side,
    opts: &QuadOptions,
) -> Result<DenseOperator, ElasticError> {
    let ch = Channels {
        gs: true,
        dnx: true,
        grad: true,
        hess: true,
        ..Default::default()
    };
    let eng = PairEngine::new(mesh, KernelSet::elastic(params, ch), opts)?;
    let bd = BasisData::new(mesh);
    let inv = 1.0 / params.omega2_rho();
    let mu = params.mu();
    let ks2 = params.kappa_s() * params.kappa_s();
    // V_s − 2μS = α V_s + β ∇∇·D
    let alpha = 1.0 - 2.0 * mu * ks2 * inv;
    let beta = 2.0 * mu * inv;
    let test = Space::P1;
    let mut op = vector_op(mesh, trial, test, Convention::new("traction_single_layer", "K'_s + n div D - M(V_s - 2 mu S)", Some(side)));
    let lb = locals(trial);
    let nb = lb.len();
    op.data = assemble(&eng, op.test, op.trial, |a, _, m, blk| {
        let na = bd.normal[a];
        for i in 0..3 {
            let ii = Idx::One(i);
            for (j, &jj) in lb.iter().enumerate() {
                let dnx = m.get(DNX, ii, jj);
                let grad = [m.get(GRAD, ii, jj), m.get(GRAD + 1, ii, jj), m.get(GRAD + 2, ii, jj)];
                let gs = m.get(GS, Idx::All, jj);
                let mut h = [[C64::new(0.0, 0.0); 3]; 3];
                for (mm, row) in h.iter_mut().enumerate() {
                    for (l, v) in row.iter_mut().enumerate() {
                        *v = m.get(HESS + sym(mm, l), Idx::All, jj);
                    }
                }
                for k in 0..3 {
                    let mphi = bd.guenter[a][i][k];
                    for l in 0..3 {
                        let mut v = grad[l] * na[k];
                        if k == l {
                            v += dnx;
                        }
                        let mut s = gs * (alpha * mphi[l]);
                        for (mm, row) in h.iter().enumerate() {
                            s += row[l] * (beta * mphi[mm]);
                        }
                        v -= s;
                        blk.add(k * 3 + i, l * nb + j, v);
                    }
                }
            }
        }
    });
    let half = 0.5 * side.sign();
    assemble_local(mesh, op.test, op.trial, &mut op.data, |e, blk| {
        let area = bd.area[e];
        for i in 0..3 {
            for (j, &jj) in lb.iter().enumerate() {
                let v = C64::new(half * local_mass(area, Idx::One(i), jj), 0.0);
                for k in 0..3 {
                    blk.add(k * 3 + i, k * nb + j, v);
                }
            }
        }
    });
    Ok(op)
}

/// `⟨φ_m, (T S p)±⟩` for every P1 vector test function.
pub fn traction_single_layer(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    p: &Density,
    side: Side,
    opts: &QuadOptions,
) -> Result<Density, ElasticError> {
    vec_density(p, mesh)?;
    let op = traction_single_layer_operator(mesh, params, p.space, side, opts)?;
    let coeffs = op.apply(p).expect("matching sizes");
    Ok(Density {
        space: Space::P1,
        components: 3,
        coeffs,
    })
}

/// Galerkin matrix of the double-layer traction on P1 × P1 vector spaces.
///
/// Both forms contain one-sided Helmholtz traces; `side` selects them and
/// the result is side-independent up to rounding.
pub fn traction_double_layer(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    form: TractionForm,
    side: Side,
    opts: &QuadOptions,
) -> Result<DenseOperator, ElasticError> {
    let ch = match form {
        TractionForm::Alter => Channels {
            gs: true,
            psi: true,
            dny: true,
            dnx: true,
            grad: true,
            hess: true,
            ..Default::default()
        },
        TractionForm::V2 => Channels {
            gs: true,
            gp: true,
            dny: true,
            dnx: true,
            grad: true,
            hess: true,
            ..Default::default()
        },
    };
    let eng = PairEngine::new(mesh, KernelSet::elastic(params, ch), opts)?;
    let bd = BasisData::new(mesh);
    let inv = 1.0 / params.omega2_rho();
    let mu = params.mu();
    let ks2 = params.kappa_s() * params.kappa_s();
    let w2r = params.omega2_rho();
    let curls = crate::potentials::hat_curls(mesh);
    // Coefficient of the one-sided Helmholtz trace block.
    let trace_coef = match form {
        TractionForm::Alter => mu,
        TractionForm::V2 => 2.0 * mu,
    };
    let name = match form {
        TractionForm::Alter => "traction_double_layer_alter",
        TractionForm::V2 => "traction_double_layer_v2",
    };
    let mut op = vector_op(mesh, Space::P1, Space::P1, Convention::new(name, "Helmholtz/Guenter regularised", Some(side)));
    let all = Idx::All;
    op.data = assemble(&eng, op.test, op.trial, |a, b, m: &Moments, blk| {
        let (na, nb) = (bd.normal[a], bd.normal[b]);
        let nn = na.dot(nb);
        let gs_all = m.get(GS, all, all);
        let mut h_all = [[C64::new(0.0, 0.0); 3]; 3];
        for (k, row) in h_all.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = m.get(HESS + sym(k, l), all, all);
            }
        }
        for i in 0..3 {
            let ii = Idx::One(i);
            let dnx_i = m.get(DNX, ii, all);
            let grad_i = [m.get(GRAD, ii, all), m.get(GRAD + 1, ii, all), m.get(GRAD + 2, ii, all)];
            for j in 0..3 {
                let jj = Idx::One(j);
                let gs_ij = m.at(GS, i, j);
                let dny_j = m.get(DNY, all, jj);
                let grad_j = [m.get(GRAD, all, jj), m.get(GRAD + 1, all, jj), m.get(GRAD + 2, all, jj)];
                let second = match form {
                    TractionForm::Alter => m.at(PSI, i, j),
                    TractionForm::V2 => m.at(GP, i, j),
                };
                for k in 0..3 {
                    let mphi = bd.guenter[a][i][k];
                    for l in 0..3 {
                        let mpsi = bd.guenter[b][j][l];
                        let mut v = C64::new(0.0, 0.0);
                        // leading term
                        match form {
                            TractionForm::Alter => {
                                if k == l {
                                    v += (gs_all * curls[a][i].dot(curls[b][j]) - gs_ij * (ks2 * nn)) * mu;
                                }
                            }
                            TractionForm::V2 => {
                                v += gs_all * (mu * bd.curl[a][i][k] * bd.curl[b][j][l]);
                            }
                        }
                        // M(N_s ψ) − ∂_n V_s(Mψ)
                        v += (dny_j * mphi[l] - dnx_i * mpsi[k]) * trace_coef;
                        // 2μ(M∇D(n·ψ) − n∇·D(Mψ))
                        let mut g1 = C64::new(0.0, 0.0);
                        let mut g2 = C64::new(0.0, 0.0);
                        for mm in 0..3 {
                            g1 += grad_j[mm] * mphi[mm];
                            g2 += grad_i[mm] * mpsi[mm];
                        }
                        v += (g1 * nb[l] - g2 * na[k]) * (2.0 * mu);
                        // Günter–Günter block
                        let mut hh = C64::new(0.0, 0.0);
                        for p in 0..3 {
                            for q in 0..3 {
                                hh += h_all[p][q] * (mphi[p] * mpsi[q]);
                            }
                        }
                        let mm_dot = mphi.dot(mpsi);
                        match form {
                            TractionForm::Alter => {
                                // M(3μV_s − 4μ²S)M
                                let c_gs = 3.0 * mu - 4.0 * mu * mu * ks2 * inv;
                                v += gs_all * (c_gs * mm_dot) + hh * (4.0 * mu * mu * inv);
                                // −ω²ρ n D(n·ψ)
                                v -= second * (w2r * na[k] * nb[l]);
                            }
                            TractionForm::V2 => {
                                v += hh * (4.0 * mu / ks2);
                                // −ω²ρ (n×V_s(ψ×n) + n V_p(n·ψ))
                                let cross = if k == l { nn } else { 0.0 } - nb[k] * na[l];
                                v -= (gs_ij * cross + second * (na[k] * nb[l])) * w2r;
                            }
                        }
                        blk.add(k * 3 + i, l * 3 + j, v);
                    }
                }
            }
        }
    });
    let half = 0.5 * side.sign() * trace_coef;
    assemble_local(mesh, op.test, op.trial, &mut op.data, |e, blk| {
        let third = bd.area[e] / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = (bd.guenter[e][i][k][l] - bd.guenter[e][j][l][k]) * third * half;
                        blk.add(k * 3 + i, l * 3 + j, C64::new(v, 0.0));
                    }
                }
            }
        }
    });
    Ok(op)
}

/// Maximum relative deviation between `u(x) = Γ(x, x0) a` and its exterior
/// representation `−K(u⁻) − S((T u)⁻)` on exterior grid points.
///
/// The boundary displacement is interpolated at vertices (P1) and the
/// traction sampled at element centroids (P0).
pub fn somigliana_residual(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    x0: Vec3,
    a: CVec3,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<f64, ElasticError> {
    let tag = mesh.classify_points(&[x0])?;
    if tag.regions[0] != Region::Interior {
        return Err(ElasticError::Misclassified(0));
    }
    if let Some(k) = grid.regions.iter().position(|r| *r != Region::Exterior) {
        return Err(ElasticError::Misclassified(k));
    }
    let field = |x: Vec3| -> Result<CVec3, KernelError> {
        let g = kupradze_gamma(params, x, x0)?;
        Ok(core::array::from_fn(|k| g[k][0] * a[0] + g[k][1] * a[1] + g[k][2] * a[2]))
    };
    let nv = mesh.vertices().len();
    let ne = mesh.triangles().len();
    let mut u = vec![C64::new(0.0, 0.0); 3 * nv];
    for (i, &v) in mesh.vertices().iter().enumerate() {
        let f = field(v)?;
        for c in 0..3 {
            u[c * nv + i] = f[c];
        }
    }
    let mut t = vec![C64::new(0.0, 0.0); 3 * ne];
    for e in 0..ne {
        let f = mesh.frame(e);
        let tr = kupradze_field_traction(params, f.centroid - x0, f.normal)?;
        for k in 0..3 {
            t[k * ne + e] = tr[k][0] * a[0] + tr[k][1] * a[1] + tr[k][2] * a[2];
        }
    }
    let ud = Density {
        space: Space::P1,
        components: 3,
        coeffs: u,
    };
    let td = Density {
        space: Space::P0,
        components: 3,
        coeffs: t,
    };
    let ku = eval_k(mesh, params, &ud, grid, KForm::II, opts)?;
    let st = eval_s(mesh, params, &td, grid, opts)?;
    let mut worst: f64 = 0.0;
    for (k, &x) in grid.points.iter().enumerate() {
        let exact = field(x)?;
        let scale = crate::geometry::cnorm(&exact);
        let mut err = 0.0;
        for c in 0..3 {
            err += (-ku[k][c] - st[k][c] - exact[c]).norm_sqr();
        }
        if scale > 0.0 {
            worst = worst.max(err.sqrt() / scale);
        } else if err > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

/// Default offsets from the surface, as fractions of the longest edge, for
/// the one-sided limits in [`near_boundary_jumps`].
pub const JUMP_OFFSETS: [f64; 3] = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0];

/// Relative errors of the four jump relations, maximised over the sampled
/// centroids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpErrors {
    /// `|[S p]|` over the size of the one-sided traces.
    pub single: f64,
    /// `|[K ψ] − ψ| / |ψ|`.
    pub double: f64,
    /// `|[T S p] − p| / |p|`.
    pub traction_single: f64,
    /// `|[T K ψ]|` over the size of the one-sided traces.
    pub traction_double: f64,
}

/// Checks the jump relations by evaluating the potentials on both sides of
/// each listed element centroid.
///
/// One-sided traces are the polynomial extrapolation to `δ = 0` from the
/// values at `offsets · h` (`h` the longest edge); tractions use a
/// fourth-order difference Jacobian with step `δ/10`.
pub fn near_boundary_jumps(
    mesh: &SurfaceMesh,
    params: &WaveParams,
    p: &Density,
    psi: &Density,
    elements: &[usize],
    offsets: &[f64],
    opts: &QuadOptions,
) -> Result<JumpErrors, ElasticError> {
    let bad = offsets.is_empty()
        || offsets.iter().any(|&o| !(o > 0.0))
        || offsets.iter().enumerate().any(|(i, a)| offsets[..i].contains(a));
    if bad {
        return Err(ElasticError::BadOffsets);
    }
    // Lagrange weights of the interpolant through (δ_j, f_j) evaluated at 0
    let weights: Vec<f64> = (0..offsets.len())
        .map(|j| {
            (0..offsets.len())
                .filter(|&m| m != j)
                .map(|m| offsets[m] / (offsets[m] - offsets[j]))
                .product()
        })
        .collect();
    let no = offsets.len();
    if psi.space != Space::P1 {
        return Err(ElasticError::NotP1("double-layer potential"));
    }
    vec_density(p, mesh)?;
    vec_density(psi, mesh)?;
    if let Some(&e) = elements.iter().find(|&&e| e >= mesh.triangles().len()) {
        return Err(ElasticError::NoSuchElement(e));
    }
    const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    const PER: usize = 13;
    let h = mesh.max_edge_length();
    let mut pts = Vec::new();
    let mut dist = Vec::new();
    let mut regions = Vec::new();
    for &e in elements {
        let f = mesh.frame(e);
        for side in [Side::Interior, Side::Exterior] {
            for &o in offsets {
                let delta = o * h;
                let x = f.centroid - f.normal * (side.sign() * delta);
                pts.push(x);
                for a in 0..3 {
                    for (s, _) in STENCIL {
                        pts.push(x + Vec3::axis(a) * (s * delta / 10.0));
                    }
                }
                let region = match side {
                    Side::Interior => Region::Interior,
                    Side::Exterior => Region::Exterior,
                };
                regions.extend([region; PER]);
                dist.extend([0.8 * delta; PER]);
            }
        }
    }
    let grid = EvalGrid::tagged(pts, regions, dist);
    let sv = eval_s(mesh, params, p, &grid, opts)?;
    let kv = eval_k(mesh, params, psi, &grid, KForm::II, opts)?;
    let (mu, lambda) = (params.mu(), params.lambda());
    let traction = |vals: &[CVec3], base: usize, delta: f64, n: Vec3| -> CVec3 {
        let eps = delta / 10.0;
        let jac = core::array::from_fn(|k| {
            core::array::from_fn(|m| {
                STENCIL
                    .iter()
                    .enumerate()
                    .map(|(i, &(_, w))| vals[base + 1 + 4 * m + i][k] * (w / (12.0 * eps)))
                    .sum::<C64>()
            })
        });
        crate::geometry::traction_from_jacobian(&jac, n, mu, lambda)
    };
    let extrapolate = |f: Vec<CVec3>| -> CVec3 {
        core::array::from_fn(|c| f.iter().zip(&weights).map(|(v, w)| v[c] * *w).sum())
    };
    let norm = crate::geometry::cnorm;
    let diff = |a: &CVec3, b: &CVec3| -> CVec3 { core::array::from_fn(|c| a[c] - b[c]) };
    let mut out = JumpErrors {
        single: 0.0,
        double: 0.0,
        traction_single: 0.0,
        traction_double: 0.0,
    };
    for (i, &e) in elements.iter().enumerate() {
        let f = mesh.frame(e);
        let block = i * 2 * no * PER;
        let limit = |vals: &[CVec3], side: usize, trac: bool| -> CVec3 {
            extrapolate(
                (0..no)
                    .map(|j| {
                        let base = block + (side * no + j) * PER;
                        if trac {
                            traction(vals, base, offsets[j] * h, f.normal)
                        } else {
                            vals[base]
                        }
                    })
                    .collect(),
            )
        };
        let third = [1.0 / 3.0; 3];
        let want_psi = vec_at(mesh, psi, e, third);
        let want_p = vec_at(mesh, p, e, third);
        let (s_in, s_out) = (limit(&sv, 0, false), limit(&sv, 1, false));
        let (k_in, k_out) = (limit(&kv, 0, false), limit(&kv, 1, false));
        let (ts_in, ts_out) = (limit(&sv, 0, true), limit(&sv, 1, true));
        let (tk_in, tk_out) = (limit(&kv, 0, true), limit(&kv, 1, true));
        let rel = |num: f64, den: f64| if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 };
        out.single = out.single.max(rel(norm(&diff(&s_in, &s_out)), 0.5 * (norm(&s_in) + norm(&s_out))));
        out.double = out.double.max(rel(norm(&diff(&diff(&k_in, &k_out), &want_psi)), norm(&want_psi)));
        out.traction_single = out.traction_single.max(rel(norm(&diff(&diff(&ts_in, &ts_out), &want_p)), norm(&want_p)));
        out.traction_double =
            out.traction_double.max(rel(norm(&diff(&tk_in, &tk_out)), 0.5 * (norm(&tk_in) + norm(&tk_out))));
    }
    Ok(out)
}

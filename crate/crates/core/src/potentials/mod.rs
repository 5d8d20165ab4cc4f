//! Helmholtz layer potentials and their Galerkin boundary operators.
//!
//! Conventions: `n` points out of the bounded domain; the interior side is
//! `+`. `V_κ p = ∫ G_κ p`, `N_κ ψ = −∫ ∂_{n_y} G_κ ψ` (so `N_κ 1 = 1` inside
//! for `κ = 0`) and `K'_κ p = ∫ ∂_{n_x} G_κ p`. One-sided traces are
//!
//! * `(V p)± = V p`
//! * `(N ψ)± = ±ψ/2 + N ψ`
//! * `(∂_n V p)± = ±p/2 + K' p`
//!
//! and `∂_n N ψ` is the same on both sides.

pub(crate) mod engine;

use crate::dense::{Convention, DenseOperator, Side};
use crate::guenter::barycentric_gradients;
use crate::kernels::helmholtz_radial;
use crate::mesh::{EvalGrid, SurfaceMesh};
use crate::par;
use crate::prelude::*;
use crate::quadrature::{QuadError, QuadOptions};
use crate::space::{Density, Space, SpaceDesc, SpaceError};
use engine::{assemble, assemble_local, local_mass, locals, Channels, KernelSet, PairEngine, PointEngine, DNX, DNY, GS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("{0} requires piecewise-linear (P1) spaces")]
    NotP1(&'static str),
}

/// Exact mass matrix `∫ φ_m ψ_n`, block-diagonal over components.
pub fn mass_matrix(mesh: &SurfaceMesh, trial: Space, test: Space, components: usize) -> DenseOperator {
    let (td, sd) = (SpaceDesc::new(test, components), SpaceDesc::new(trial, components));
    let mut op = DenseOperator::zeros(
        td.len(mesh),
        sd.len(mesh),
        sd,
        td,
        Convention::new("mass", "identity", None),
    );
    let (lt, lb) = (locals(test), locals(trial));
    assemble_local(mesh, td, sd, &mut op.data, |e, blk| {
        let area = mesh.frame(e).area;
        for c in 0..components {
            for (i, &ii) in lt.iter().enumerate() {
                for (j, &jj) in lb.iter().enumerate() {
                    blk.add(c * lt.len() + i, c * lb.len() + j, C64::new(local_mass(area, ii, jj), 0.0));
                }
            }
        }
    });
    op
}

fn scalar_op(
    mesh: &SurfaceMesh,
    kappa: f64,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
    ch: Channels,
    conv: Convention,
    entry: impl Fn(usize, usize, &engine::Moments, engine::Idx, engine::Idx) -> C64 + Sync,
) -> Result<DenseOperator, PotentialError> {
    let eng = PairEngine::new(mesh, KernelSet::helmholtz(kappa, ch), opts)?;
    let (td, sd) = (SpaceDesc::new(test, 1), SpaceDesc::new(trial, 1));
    let (lt, lb) = (locals(test), locals(trial));
    let data = assemble(&eng, td, sd, |a, b, m, blk| {
        for (i, &ii) in lt.iter().enumerate() {
            for (j, &jj) in lb.iter().enumerate() {
                blk.add(i, j, entry(a, b, m, ii, jj));
            }
        }
    });
    let mut op = DenseOperator::zeros(td.len(mesh), sd.len(mesh), sd, td, conv);
    op.data = data;
    Ok(op)
}

/// `A[m, n] = ∫∫ φ_m(x) G_κ(x, y) ψ_n(y)`.
pub fn galerkin_single_layer(
    mesh: &SurfaceMesh,
    kappa: f64,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    let ch = Channels {
        gs: true,
        ..Default::default()
    };
    scalar_op(mesh, kappa, trial, test, opts, ch, Convention::new("single_layer", "G", None), |_, _, m, i, j| {
        m.get(GS, i, j)
    })
}

/// Principal part of the double layer, kernel `−∂_{n_y} G_κ`.
pub fn galerkin_double_layer(
    mesh: &SurfaceMesh,
    kappa: f64,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    let ch = Channels {
        dny: true,
        ..Default::default()
    };
    scalar_op(
        mesh,
        kappa,
        trial,
        test,
        opts,
        ch,
        Convention::new("double_layer", "-dG/dn_y", None),
        |_, _, m, i, j| m.get(DNY, i, j),
    )
}

/// Principal part of the adjoint double layer, kernel `∂_{n_x} G_κ`.
pub fn galerkin_adjoint(
    mesh: &SurfaceMesh,
    kappa: f64,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    let ch = Channels {
        dnx: true,
        ..Default::default()
    };
    scalar_op(
        mesh,
        kappa,
        trial,
        test,
        opts,
        ch,
        Convention::new("adjoint_double_layer", "dG/dn_x", None),
        |_, _, m, i, j| m.get(DNX, i, j),
    )
}

/// Surface rotationals `∇λ_i × n` of the three hat functions of each element.
pub(crate) fn hat_curls(mesh: &SurfaceMesh) -> Vec<[Vec3; 3]> {
    (0..mesh.triangles().len())
        .map(|e| {
            let g = barycentric_gradients(mesh, e);
            let n = mesh.frame(e).normal;
            [g[0].cross(n), g[1].cross(n), g[2].cross(n)]
        })
        .collect()
}

/// `⟨φ, ∂_n N_κ ψ⟩ = ∫∫ G_κ (curl φ · curl ψ − κ² n_x·n_y φ ψ)` on P1.
pub fn hypersingular_hamdi(
    mesh: &SurfaceMesh,
    kappa: f64,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    if trial != Space::P1 || test != Space::P1 {
        return Err(PotentialError::NotP1("hypersingular operator"));
    }
    let curls = hat_curls(mesh);
    let k2 = kappa * kappa;
    let ch = Channels {
        gs: true,
        ..Default::default()
    };
    scalar_op(
        mesh,
        kappa,
        trial,
        test,
        opts,
        ch,
        Convention::new("hypersingular", "curl-curl G - k^2 n.n G", None),
        |a, b, m, i, j| {
            let (engine::Idx::One(i), engine::Idx::One(j)) = (i, j) else {
                unreachable!()
            };
            let nn = mesh.frame(a).normal.dot(mesh.frame(b).normal);
            m.get(GS, engine::Idx::All, engine::Idx::All) * curls[a][i].dot(curls[b][j])
                - m.at(GS, i, j) * (k2 * nn)
        },
    )
}

/// `op + s·M/2` with `M` the mass matrix of the operator's spaces.
fn add_half_mass(mut op: DenseOperator, mesh: &SurfaceMesh, s: f64) -> DenseOperator {
    let mass = mass_matrix(mesh, op.trial.space, op.test.space, op.trial.components);
    for (a, m) in op.data.iter_mut().zip(&mass.data) {
        *a += m * (0.5 * s);
    }
    op
}

/// `(N ψ)±` tested against `test`.
pub fn double_layer_trace(
    mesh: &SurfaceMesh,
    kappa: f64,
    side: Side,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    let mut op = add_half_mass(galerkin_double_layer(mesh, kappa, trial, test, opts)?, mesh, side.sign());
    op.convention.side = Some(side);
    Ok(op)
}

/// `(∂_n V p)±` tested against `test`.
pub fn adjoint_trace(
    mesh: &SurfaceMesh,
    kappa: f64,
    side: Side,
    trial: Space,
    test: Space,
    opts: &QuadOptions,
) -> Result<DenseOperator, PotentialError> {
    let mut op = add_half_mass(galerkin_adjoint(mesh, kappa, trial, test, opts)?, mesh, side.sign());
    op.convention.side = Some(side);
    Ok(op)
}

/// Which potential a trace is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    /// `V p`
    Single,
    /// `N ψ`
    Double,
    /// `∂_n V p`
    Adjoint,
}

/// Interior and exterior traces of a potential, as Galerkin functionals
/// `⟨φ_m, trace⟩` over the density's own space.
pub fn one_sided_traces(
    mesh: &SurfaceMesh,
    kappa: f64,
    kind: LayerKind,
    density: &Density,
    opts: &QuadOptions,
) -> Result<(Density, Density), PotentialError> {
    density.expect(density.space, 1, mesh)?;
    let sp = density.space;
    let principal = match kind {
        LayerKind::Single => galerkin_single_layer(mesh, kappa, sp, sp, opts)?,
        LayerKind::Double => galerkin_double_layer(mesh, kappa, sp, sp, opts)?,
        LayerKind::Adjoint => galerkin_adjoint(mesh, kappa, sp, sp, opts)?,
    };
    let base = principal.apply(density).expect("matching sizes");
    let jump = if kind == LayerKind::Single {
        vec![C64::new(0.0, 0.0); base.len()]
    } else {
        mass_matrix(mesh, sp, sp, 1).apply(density).expect("matching sizes")
    };
    let side = |s: f64| {
        Density::scalar(
            sp,
            base.iter().zip(&jump).map(|(b, j)| b + j * (0.5 * s)).collect(),
        )
    };
    Ok((side(1.0), side(-1.0)))
}

/// Value of a scalar density at barycentric point `b` of element `e`.
#[inline]
pub(crate) fn density_at(mesh: &SurfaceMesh, d: &[C64], space: Space, e: usize, b: [f64; 3]) -> C64 {
    match space {
        Space::P0 => d[e],
        Space::P1 => {
            let t = mesh.triangles()[e];
            d[t[0]] * b[0] + d[t[1]] * b[1] + d[t[2]] * b[2]
        }
    }
}

fn eval_scalar(
    mesh: &SurfaceMesh,
    density: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
    kernel: impl Fn(Vec3, Vec3, Vec3) -> C64 + Sync,
) -> Result<Vec<C64>, PotentialError> {
    density.expect(density.space, 1, mesh)?;
    let pe = PointEngine::new(mesh, opts)?;
    let res: Vec<Result<C64, QuadError>> = par::map(grid.len(), |k| {
        let x = grid.points[k];
        let mut acc = C64::new(0.0, 0.0);
        for e in 0..mesh.triangles().len() {
            let n = mesh.frame(e).normal;
            pe.nodes(x, e, |y, b, w| {
                acc += kernel(x, y, n) * density_at(mesh, &density.coeffs, density.space, e, b) * w;
            })?;
        }
        Ok(acc)
    });
    res.into_iter().map(|r| r.map_err(Into::into)).collect()
}

/// `V_κ p` at off-surface points.
pub fn eval_single_layer(
    mesh: &SurfaceMesh,
    kappa: f64,
    p: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<C64>, PotentialError> {
    eval_scalar(mesh, p, grid, opts, |x, y, _| helmholtz_radial(kappa, x.distance(y)).value)
}

/// `N_κ ψ = −∫ ∂_{n_y} G_κ ψ` at off-surface points.
pub fn eval_double_layer(
    mesh: &SurfaceMesh,
    kappa: f64,
    psi: &Density,
    grid: &EvalGrid,
    opts: &QuadOptions,
) -> Result<Vec<C64>, PotentialError> {
    eval_scalar(mesh, psi, grid, opts, |x, y, n| {
        let z = x - y;
        let r = z.norm();
        helmholtz_radial(kappa, r).d1 * (z.dot(n) / r)
    })
}

/// `⟨φ, ∂_n N_κ ψ⟩` from the field of `N_κ ψ` inside the surface.
///
/// At each centroid the normal derivative is taken by a fourth-order
/// difference (step `δ/10`) at depths `δ = 2h` and `δ = h`, `h` the longest
/// edge, and extrapolated linearly to the surface; the pairing uses the
/// centroid rule. Serves as an oracle for [`hypersingular_hamdi`].
pub fn normal_derivative_pairing(
    mesh: &SurfaceMesh,
    kappa: f64,
    phi: &Density,
    psi: &Density,
    opts: &QuadOptions,
) -> Result<C64, PotentialError> {
    phi.expect(phi.space, 1, mesh)?;
    psi.expect(psi.space, 1, mesh)?;
    const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    const DEPTHS: [f64; 2] = [2.0, 1.0];
    let h = mesh.max_edge_length();
    let ne = mesh.triangles().len();
    let mut pts = Vec::with_capacity(ne * 8);
    for f in mesh.frames() {
        for d in DEPTHS {
            let x = f.centroid - f.normal * (d * h);
            for (s, _) in STENCIL {
                pts.push(x + f.normal * (s * d * h / 10.0));
            }
        }
    }
    let n = pts.len();
    let grid = EvalGrid::tagged(pts, vec![crate::mesh::Region::Interior; n], vec![0.8 * h; n]);
    let vals = eval_double_layer(mesh, kappa, psi, &grid, opts)?;
    let mut pair = [C64::new(0.0, 0.0); 2];
    for (e, f) in mesh.frames().iter().enumerate() {
        let ph = density_at(mesh, &phi.coeffs, phi.space, e, [1.0 / 3.0; 3]);
        for (j, d) in DEPTHS.iter().enumerate() {
            let b = (2 * e + j) * 4;
            let g: C64 = STENCIL
                .iter()
                .enumerate()
                .map(|(i, &(_, w))| vals[b + i] * (w / (1.2 * d * h)))
                .sum();
            pair[j] += g * ph * f.area;
        }
    }
    Ok(pair[1] * 2.0 - pair[0])
}

//! Günter derivatives `M_ij u = n_j ∂_i u − n_i ∂_j u` of piecewise-linear
//! fields on flat triangles.
//!
//! On a flat element the tangential gradient of a P1 function is constant, so
//! `M_ij u = (∇u × n)·(e_i × e_j)` is a P0 field.

use crate::geometry::CVec3;
use crate::mesh::{MeshError, SurfaceMesh};
use crate::prelude::*;
use crate::space::{Density, Space, SpaceError};

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i8 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (1, 0, 2) | (0, 2, 1) | (2, 1, 0) => -1,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GuenterError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("axis index {0} out of range")]
    Axis(usize),
}

/// Gradients of the three barycentric hat functions on element `e`.
pub fn barycentric_gradients(mesh: &SurfaceMesh, e: usize) -> [Vec3; 3] {
    let [a, b, c] = mesh.corners(e);
    let f = mesh.frame(e);
    let s = 1.0 / (2.0 * f.area);
    [
        f.normal.cross(c - b) * s,
        f.normal.cross(a - c) * s,
        f.normal.cross(b - a) * s,
    ]
}

/// Constant tangential gradient of a scalar P1 field on each element.
pub fn element_gradients(mesh: &SurfaceMesh, u: &[C64]) -> Vec<CVec3> {
    (0..mesh.triangles().len())
        .map(|e| {
            let t = mesh.triangles()[e];
            let g = barycentric_gradients(mesh, e);
            let mut out = [C64::new(0.0, 0.0); 3];
            for k in 0..3 {
                for (d, o) in out.iter_mut().enumerate() {
                    *o += u[t[k]] * g[k][d];
                }
            }
            out
        })
        .collect()
}

/// `M_ij u` from a tangential gradient `g` and normal `n`.
#[inline]
pub fn guenter_from_gradient(g: &CVec3, n: Vec3, i: usize, j: usize) -> C64 {
    g[i] * n[j] - g[j] * n[i]
}

/// `(M U)_i = Σ_j M_ij u_j` from the gradients of the three components.
pub fn matrix_from_gradients(g: &[CVec3; 3], n: Vec3) -> CVec3 {
    let mut out = [C64::new(0.0, 0.0); 3];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, gj) in g.iter().enumerate() {
            *o += guenter_from_gradient(gj, n, i, j);
        }
    }
    out
}

fn check_axes(i: usize, j: usize) -> Result<(), GuenterError> {
    if i > 2 {
        return Err(GuenterError::Axis(i));
    }
    if j > 2 {
        return Err(GuenterError::Axis(j));
    }
    Ok(())
}

/// P0 field `M_ij u` of a scalar P1 density (axes 0-based).
pub fn guenter_scalar(
    mesh: &SurfaceMesh,
    u: &Density,
    i: usize,
    j: usize,
) -> Result<Density, GuenterError> {
    check_axes(i, j)?;
    u.expect(Space::P1, 1, mesh)?;
    let grads = element_gradients(mesh, &u.coeffs);
    let vals = grads
        .iter()
        .zip(mesh.frames())
        .map(|(g, f)| guenter_from_gradient(g, f.normal, i, j))
        .collect();
    Ok(Density::scalar(Space::P0, vals))
}

/// Per-element value of `M U` for a 3-component P1 coefficient slice.
pub fn guenter_matrix_elements(mesh: &SurfaceMesh, u: &Density) -> Vec<CVec3> {
    let g: Vec<Vec<CVec3>> = (0..3).map(|c| element_gradients(mesh, u.component(c))).collect();
    mesh.frames()
        .iter()
        .enumerate()
        .map(|(e, f)| matrix_from_gradients(&[g[0][e], g[1][e], g[2][e]], f.normal))
        .collect()
}

/// P0 vector field `M U` of a 3-component P1 density.
pub fn guenter_matrix_apply(mesh: &SurfaceMesh, u: &Density) -> Result<Density, GuenterError> {
    u.expect(Space::P1, 3, mesh)?;
    let vals = guenter_matrix_elements(mesh, u);
    let parts: Vec<Vec<C64>> = (0..3).map(|c| vals.iter().map(|v| v[c]).collect()).collect();
    Ok(Density::from_components(Space::P0, &parts))
}

/// `∫ v M_ij u − ∫ u M_ji v`, exact for P1 data on flat elements.
pub fn symmetry_residual(
    mesh: &SurfaceMesh,
    u: &Density,
    v: &Density,
    i: usize,
    j: usize,
) -> Result<C64, GuenterError> {
    if !mesh.is_closed() {
        return Err(MeshError::NotClosed.into());
    }
    pairing_residual(mesh, u, v, i, j)
}

/// The same pairing difference without the closedness precondition; on an
/// open patch it equals the boundary line integral `−Σ_k ε_ijk ∮ u v dx_k`.
pub fn pairing_residual(
    mesh: &SurfaceMesh,
    u: &Density,
    v: &Density,
    i: usize,
    j: usize,
) -> Result<C64, GuenterError> {
    check_axes(i, j)?;
    u.expect(Space::P1, 1, mesh)?;
    v.expect(Space::P1, 1, mesh)?;
    let gu = element_gradients(mesh, &u.coeffs);
    let gv = element_gradients(mesh, &v.coeffs);
    let mut acc = C64::new(0.0, 0.0);
    for (e, t) in mesh.triangles().iter().enumerate() {
        let f = mesh.frame(e);
        let mean = |w: &[C64]| (w[t[0]] + w[t[1]] + w[t[2]]) / 3.0;
        let mu = guenter_from_gradient(&gu[e], f.normal, i, j);
        let mv = guenter_from_gradient(&gv[e], f.normal, j, i);
        acc += (mean(&v.coeffs) * mu - mean(&u.coeffs) * mv) * f.area;
    }
    Ok(acc)
}

/// P0 field `∇_Γ·(U × n)`, the transpose of the tangential vector rotational.
pub fn surface_curl(mesh: &SurfaceMesh, u: &Density) -> Result<Density, GuenterError> {
    u.expect(Space::P1, 3, mesh)?;
    Ok(Density::scalar(Space::P0, surface_curl_elements(mesh, u)))
}

pub(crate) fn surface_curl_elements(mesh: &SurfaceMesh, u: &Density) -> Vec<C64> {
    let g: Vec<Vec<CVec3>> = (0..3).map(|c| element_gradients(mesh, u.component(c))).collect();
    mesh.frames()
        .iter()
        .enumerate()
        .map(|(e, f)| surface_curl_from_gradients(&[g[0][e], g[1][e], g[2][e]], f.normal))
        .collect()
}

/// `−Σ_k (∇u_k × n)_k` for component gradients `g`.
pub fn surface_curl_from_gradients(g: &[CVec3; 3], n: Vec3) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (k, gk) in g.iter().enumerate() {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        acc -= gk[a] * n[b] - gk[b] * n[a];
    }
    acc
}

/// Real vector field with its Jacobian `jac[a][b] = ∂u_a/∂x_b`.
pub type AnalyticField<'a> = &'a dyn Fn(Vec3) -> ([f64; 3], [[f64; 3]; 3]);

/// Largest pointwise difference on the unit sphere between the compact form
/// `∇u n − n ∇·u` and the curvature form
/// `∇_Γ(u·n) − n ∇_Γ·(n×(u×n)) − C(n×(u×n)) − 2H (u·n) n`
/// with `C = I − n nᵀ` and `2H = 2`.
pub fn curvature_form_check(field: AnalyticField<'_>, samples: &[Vec3]) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in samples {
        let n = x.normalized();
        let (u, j) = field(n);
        let nv = n.to_array();
        let proj = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 } - nv[a] * nv[b];
        let div: f64 = (0..3).map(|a| j[a][a]).sum();
        let compact: [f64; 3] =
            core::array::from_fn(|i| (0..3).map(|k| j[k][i] * nv[k]).sum::<f64>() - nv[i] * div);

        // Extension n(x) = x/|x|, whose Jacobian on the unit sphere is C.
        let s: f64 = (0..3).map(|k| u[k] * nv[k]).sum();
        let grad_s: [f64; 3] = core::array::from_fn(|b| {
            (0..3).map(|k| j[k][b] * nv[k] + u[k] * proj(k, b)).sum::<f64>()
        });
        let surf_grad_s: [f64; 3] =
            core::array::from_fn(|a| (0..3).map(|b| proj(a, b) * grad_s[b]).sum::<f64>());
        let w: [f64; 3] = core::array::from_fn(|a| u[a] - s * nv[a]);
        // Jacobian of w = u − s n.
        let jw = |a: usize, b: usize| j[a][b] - nv[a] * grad_s[b] - s * proj(a, b);
        let surf_div_w: f64 = (0..3)
            .map(|a| (0..3).map(|b| proj(a, b) * jw(b, a)).sum::<f64>())
            .sum();
        let cw: [f64; 3] = core::array::from_fn(|a| (0..3).map(|b| proj(a, b) * w[b]).sum::<f64>());
        for i in 0..3 {
            let curv = surf_grad_s[i] - nv[i] * surf_div_w - cw[i] - 2.0 * s * nv[i];
            worst = worst.max((curv - compact[i]).abs());
        }
    }
    worst
}

//! Plane and antiplane operators on polygonal curves.
//!
//! For fields independent of `x₃` the displacement splits into a plane part
//! `u⊥` and an antiplane part `u₃`, which never couple. The only non-zero
//! Günter derivative is the arclength derivative `∂_s`, and the Günter
//! matrix reduces to `M⊥u⊥ = e₃ × ∂_s u⊥`.
//!
//! All kernels are `(i/4) H₀⁽¹⁾(κr)` or the P−S difference of two of them.
//! Self and adjacent segment pairs use a graded Gauss rule for the
//! logarithmic singularity.
//!
//! Traction in the plane is taken from the 3D operator restricted to
//! `x₃`-independent fields: `T⊥u⊥ = 2μ∂_n u⊥ + λ n ∇⊥·u⊥ − μ τ ∇⊥×u⊥` with
//! `τ = R_{π/2} n`, and `T₃u₃ = μ ∂_n u₃`.

use crate::dense::{Convention, DenseOperator, Side};
use crate::geometry::Vec2;
use crate::kernels::planar::{planar_diff_kernel, planar_helmholtz};
use crate::kernels::WaveParams;
use crate::mesh::{Curve2D, Discretization};
use crate::par;
use crate::prelude::*;
use crate::quadrature::{gauss_legendre, graded_log_rule};
use crate::space::{Density, Space, SpaceDesc, SpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Elastic2dError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("operator needs piecewise-linear {0} functions")]
    NotP1(&'static str),
    #[error("expected a 3-component field, got {0} components")]
    Components(usize),
}

/// Plane (two components) and antiplane (one component) parts of a field
/// on a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarDensity {
    pub plane: Density,
    pub antiplane: Density,
}

impl PlanarDensity {
    /// Inverse of [`split_field`].
    pub fn recombine(&self) -> Density {
        let mut coeffs = self.plane.coeffs.clone();
        coeffs.extend_from_slice(&self.antiplane.coeffs);
        Density {
            space: self.plane.space,
            components: 3,
            coeffs,
        }
    }
}

/// `u = u⊥ + u₃ e₃`.
pub fn split_field(u: &Density) -> Result<PlanarDensity, Elastic2dError> {
    if u.components != 3 {
        return Err(Elastic2dError::Components(u.components));
    }
    let n = u.dofs();
    Ok(PlanarDensity {
        plane: Density {
            space: u.space,
            components: 2,
            coeffs: u.coeffs[..2 * n].to_vec(),
        },
        antiplane: Density {
            space: u.space,
            components: 1,
            coeffs: u.coeffs[2 * n..].to_vec(),
        },
    })
}

/// Samples `f` at vertices (P1) or segment midpoints (P0).
pub fn sample_curve(curve: &Curve2D, space: Space, components: usize, f: impl Fn(Vec2) -> Vec<C64>) -> Density {
    let points: Vec<Vec2> = match space {
        Space::P1 => curve.vertices().to_vec(),
        Space::P0 => curve
            .segments()
            .iter()
            .map(|s| {
                let (a, b) = (curve.vertices()[s.start], curve.vertices()[s.end]);
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
            })
            .collect(),
    };
    let n = points.len();
    let mut coeffs = vec![C64::new(0.0, 0.0); n * components];
    for (i, p) in points.iter().enumerate() {
        let v = f(*p);
        for c in 0..components {
            coeffs[c * n + i] = v[c];
        }
    }
    Density {
        space,
        components,
        coeffs,
    }
}

/// Per-segment arclength derivative of a P1 scalar.
pub fn guenter_2d(curve: &Curve2D, u: &Density) -> Result<Density, Elastic2dError> {
    u.expect(Space::P1, 1, curve)?;
    let coeffs = curve
        .segments()
        .iter()
        .map(|s| (u.coeffs[s.end] - u.coeffs[s.start]) / s.length)
        .collect();
    Ok(Density::scalar(Space::P0, coeffs))
}

/// `M⊥u⊥ = e₃ × ∂_s u⊥` for a P1 plane field; P0 result.
pub fn guenter_matrix_2d(curve: &Curve2D, u: &Density) -> Result<Density, Elastic2dError> {
    u.expect(Space::P1, 2, curve)?;
    let n = curve.num_vertices();
    let d1 = guenter_2d(curve, &Density::scalar(Space::P1, u.coeffs[..n].to_vec()))?;
    let d2 = guenter_2d(curve, &Density::scalar(Space::P1, u.coeffs[n..].to_vec()))?;
    let minus: Vec<C64> = d2.coeffs.iter().map(|v| -v).collect();
    Ok(Density::from_components(Space::P0, &[minus, d1.coeffs]))
}

/// Quadrature settings for segment pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveQuad {
    /// Gauss points per graded interval.
    pub log_order: usize,
    /// Graded levels toward a singular endpoint.
    pub log_levels: usize,
    pub log_sigma: f64,
    /// Gauss points across a smooth direction of a singular pair.
    pub smooth_order: usize,
    pub near_order: usize,
    pub mid_order: usize,
    pub far_order: usize,
    /// Centroid distance over segment length below which a non-touching
    /// pair is split into `split` pieces per segment.
    pub split_ratio: f64,
    pub split: usize,
    pub mid_ratio: f64,
    pub far_ratio: f64,
}

impl Default for CurveQuad {
    fn default() -> Self {
        CurveQuad {
            log_order: 10,
            log_levels: 12,
            log_sigma: 0.15,
            smooth_order: 16,
            near_order: 16,
            mid_order: 10,
            far_order: 6,
            split_ratio: 1.5,
            split: 4,
            mid_ratio: 3.0,
            far_ratio: 8.0,
        }
    }
}

// moment channels
const GS: usize = 0;
const DV: usize = 1;
const DNY: usize = 2;
const DNX: usize = 3;
const DG: usize = 4; // ∇D, 2 entries
const DH: usize = 6; // ∇∇D packed (11, 12, 22)
const NCH: usize = 9;

fn hsym(k: usize, l: usize) -> usize {
    k + l
}

/// Whether the P−S difference channels are needed.
#[derive(Clone, Copy, Default)]
struct Need {
    diff: bool,
}

#[derive(Clone, Copy)]
struct Mom {
    v: [[[C64; 2]; 2]; NCH],
}

#[derive(Clone, Copy)]
enum Loc {
    One(usize),
    All,
}

impl Mom {
    fn get(&self, c: usize, i: Loc, j: Loc) -> C64 {
        let ri = match i {
            Loc::One(i) => i..i + 1,
            Loc::All => 0..2,
        };
        let mut s = C64::new(0.0, 0.0);
        for a in ri {
            match j {
                Loc::One(j) => s += self.v[c][a][j],
                Loc::All => s += self.v[c][a][0] + self.v[c][a][1],
            }
        }
        s
    }
}

fn locs(space: Space) -> &'static [Loc] {
    match space {
        Space::P0 => &[Loc::All],
        Space::P1 => &[Loc::One(0), Loc::One(1)],
    }
}

fn local_dof(curve: &Curve2D, space: Space, e: usize, i: usize) -> usize {
    match space {
        Space::P0 => e,
        Space::P1 => {
            let s = &curve.segments()[e];
            if i == 0 {
                s.start
            } else {
                s.end
            }
        }
    }
}

struct Engine<'a> {
    curve: &'a Curve2D,
    kp: f64,
    ks: f64,
    need: Need,
    q: &'a CurveQuad,
    graded_fine: (Vec<f64>, Vec<f64>),
    graded_coarse: (Vec<f64>, Vec<f64>),
    smooth: (Vec<f64>, Vec<f64>),
    near: (Vec<f64>, Vec<f64>),
    mid: (Vec<f64>, Vec<f64>),
    far: (Vec<f64>, Vec<f64>),
}

impl<'a> Engine<'a> {
    fn new(curve: &'a Curve2D, kp: f64, ks: f64, need: Need, q: &'a CurveQuad) -> Self {
        Engine {
            curve,
            kp,
            ks,
            need,
            q,
            graded_fine: graded_log_rule(q.log_order, q.log_levels, q.log_sigma),
            graded_coarse: graded_log_rule(q.log_order, q.log_levels.div_ceil(2), q.log_sigma),
            smooth: gauss_legendre(q.smooth_order),
            near: gauss_legendre(q.near_order),
            mid: gauss_legendre(q.mid_order),
            far: gauss_legendre(q.far_order),
        }
    }

    fn point(&self, e: usize, s: f64) -> Vec2 {
        let seg = &self.curve.segments()[e];
        let a = self.curve.vertices()[seg.start];
        [a[0] + s * seg.length * seg.tangent[0], a[1] + s * seg.length * seg.tangent[1]]
    }

    /// Adds `w · kernels(z) · λ_i(s) λ_j(t)`; `zx = z·n_x`, `zy = z·n_y`.
    fn accumulate(&self, m: &mut Mom, z: Vec2, zx: f64, zy: f64, s: f64, t: f64, w: f64) {
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        let mut k = [C64::new(0.0, 0.0); NCH];
        let gs = planar_helmholtz(self.ks, r);
        k[GS] = gs.value;
        k[DNY] = gs.d1 * (zy / r);
        k[DNX] = gs.d1 * (zx / r);
        if self.need.diff {
            let d = planar_diff_kernel(self.kp, self.ks, r);
            let zh = [z[0] / r, z[1] / r];
            k[DV] = d.value;
            k[DG] = d.d1 * zh[0];
            k[DG + 1] = d.d1 * zh[1];
            let h = d.hessian(zh);
            k[DH] = h[0][0];
            k[DH + 1] = h[0][1];
            k[DH + 2] = h[1][1];
        }
        let bs = [(1.0 - s) * w, s * w];
        let bt = [1.0 - t, t];
        for (c, kc) in k.iter().enumerate() {
            if *kc == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..2 {
                let ki = kc * bs[i];
                for j in 0..2 {
                    m.v[c][i][j] += ki * bt[j];
                }
            }
        }
    }

    fn pair(&self, a: usize, b: usize) -> Mom {
        let mut m = Mom {
            v: [[[C64::new(0.0, 0.0); 2]; 2]; NCH],
        };
        let segs = self.curve.segments();
        let (sa, sb) = (&segs[a], &segs[b]);
        let jac = sa.length * sb.length;
        if a == b {
            // t < s with t = s(1 − w), and the mirror image s < t
            let (xs, ws) = &self.graded_coarse;
            let (xw, ww) = &self.graded_fine;
            for (&s, &wsv) in xs.iter().zip(ws) {
                for (&v, &wv) in xw.iter().zip(ww) {
                    let t = s * (1.0 - v);
                    let w = wsv * wv * s * jac;
                    let d = s * v * sa.length;
                    let z = [d * sa.tangent[0], d * sa.tangent[1]];
                    self.accumulate(&mut m, z, 0.0, 0.0, s, t, w);
                    self.accumulate(&mut m, [-z[0], -z[1]], 0.0, 0.0, t, s, w);
                }
            }
            return m;
        }
        if let Some((va, vb)) = shared(sa, sb) {
            // local coordinates measured from the shared vertex
            let da = if va { sa.tangent } else { [-sa.tangent[0], -sa.tangent[1]] };
            let db = if vb { sb.tangent } else { [-sb.tangent[0], -sb.tangent[1]] };
            let to_s = |p: f64| if va { p } else { 1.0 - p };
            let to_t = |p: f64| if vb { p } else { 1.0 - p };
            let (xg, wg) = &self.graded_coarse;
            let (xm, wm) = &self.smooth;
            let mut emit = |p: f64, q: f64, w: f64| {
                let xa = [p * sa.length * da[0], p * sa.length * da[1]];
                let yb = [q * sb.length * db[0], q * sb.length * db[1]];
                let z = [xa[0] - yb[0], xa[1] - yb[1]];
                // x − v is tangent to a, y − v tangent to b
                let zx = -(yb[0] * sa.normal[0] + yb[1] * sa.normal[1]);
                let zy = xa[0] * sb.normal[0] + xa[1] * sb.normal[1];
                self.accumulate(&mut m, z, zx, zy, to_s(p), to_t(q), w * jac);
            };
            for (&r, &wr) in xg.iter().zip(wg) {
                for (&u, &wu) in xm.iter().zip(wm) {
                    emit(r, r * u, wr * wu * r);
                    emit(r * u, r, wr * wu * r);
                }
            }
            return m;
        }
        let ca = self.point(a, 0.5);
        let cb = self.point(b, 0.5);
        let dist = ((ca[0] - cb[0]).powi(2) + (ca[1] - cb[1]).powi(2)).sqrt();
        let ratio = dist / sa.length.max(sb.length);
        let (rule, pieces) = if ratio < self.q.split_ratio {
            (&self.near, self.q.split)
        } else if ratio < self.q.mid_ratio {
            (&self.near, 1)
        } else if ratio < self.q.far_ratio {
            (&self.mid, 1)
        } else {
            (&self.far, 1)
        };
        let (xg, wg) = rule;
        let h = 1.0 / pieces as f64;
        for pa in 0..pieces {
            for pb in 0..pieces {
                for (&u, &wu) in xg.iter().zip(wg) {
                    let s = (pa as f64 + u) * h;
                    let x = self.point(a, s);
                    for (&v, &wv) in xg.iter().zip(wg) {
                        let t = (pb as f64 + v) * h;
                        let y = self.point(b, t);
                        let z = [x[0] - y[0], x[1] - y[1]];
                        let zx = z[0] * sa.normal[0] + z[1] * sa.normal[1];
                        let zy = z[0] * sb.normal[0] + z[1] * sb.normal[1];
                        self.accumulate(&mut m, z, zx, zy, s, t, wu * wv * h * h * jac);
                    }
                }
            }
        }
        m
    }
}

/// Which ends of `a` and `b` coincide: `(a starts there, b starts there)`.
fn shared(a: &crate::mesh::Segment, b: &crate::mesh::Segment) -> Option<(bool, bool)> {
    if a.start == b.end {
        Some((true, false))
    } else if a.end == b.start {
        Some((false, true))
    } else if a.start == b.start {
        Some((true, true))
    } else if a.end == b.end {
        Some((false, false))
    } else {
        None
    }
}

/// Local block: rows `comp · nloc_test + i`, cols `comp · nloc_trial + j`.
struct Blk {
    cols: usize,
    v: [C64; 36],
}

impl Blk {
    fn add(&mut self, r: usize, c: usize, v: C64) {
        self.v[r * self.cols + c] += v;
    }
}

const CHUNK: usize = 8;

fn assemble(
    eng: &Engine<'_>,
    test: SpaceDesc,
    trial: SpaceDesc,
    local: impl Fn(usize, usize, &Mom, &mut Blk) + Sync,
) -> Vec<C64> {
    let curve = eng.curve;
    let ne = curve.num_elements();
    let (rows, cols) = (test.len(curve), trial.len(curve));
    let (lt, lb) = (locs(test.space).len(), locs(trial.space).len());
    let (nt, nb) = (test.space.dofs(curve), trial.space.dofs(curve));
    let chunks = ne.div_ceil(CHUNK);
    let parts = par::map(chunks, |c| {
        let mut out = Vec::new();
        for a in c * CHUNK..((c + 1) * CHUNK).min(ne) {
            for b in 0..ne {
                let m = eng.pair(a, b);
                let mut blk = Blk {
                    cols: lb * trial.components,
                    v: [C64::new(0.0, 0.0); 36],
                };
                local(a, b, &m, &mut blk);
                out.push((a, b, blk));
            }
        }
        out
    });
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    for part in parts {
        for (a, b, blk) in part {
            for ct in 0..test.components {
                for i in 0..lt {
                    let r = ct * nt + local_dof(curve, test.space, a, i);
                    for cb in 0..trial.components {
                        for j in 0..lb {
                            let c = cb * nb + local_dof(curve, trial.space, b, j);
                            data[r * cols + c] += blk.v[(ct * lt + i) * blk.cols + cb * lb + j];
                        }
                    }
                }
            }
        }
    }
    data
}

/// `∫_seg λ_i λ_j` for local basis functions.
fn local_mass(len: f64, i: Loc, j: Loc) -> f64 {
    match (i, j) {
        (Loc::All, Loc::All) => len,
        (Loc::All, Loc::One(_)) | (Loc::One(_), Loc::All) => 0.5 * len,
        (Loc::One(i), Loc::One(j)) => {
            if i == j {
                len / 3.0
            } else {
                len / 6.0
            }
        }
    }
}

fn add_local(
    curve: &Curve2D,
    test: SpaceDesc,
    trial: SpaceDesc,
    data: &mut [C64],
    f: impl Fn(usize, &mut Blk),
) {
    let cols = trial.len(curve);
    let (lt, lb) = (locs(test.space).len(), locs(trial.space).len());
    let (nt, nb) = (test.space.dofs(curve), trial.space.dofs(curve));
    for e in 0..curve.num_elements() {
        let mut blk = Blk {
            cols: lb * trial.components,
            v: [C64::new(0.0, 0.0); 36],
        };
        f(e, &mut blk);
        for ct in 0..test.components {
            for i in 0..lt {
                let r = ct * nt + local_dof(curve, test.space, e, i);
                for cb in 0..trial.components {
                    for j in 0..lb {
                        let c = cb * nb + local_dof(curve, trial.space, e, j);
                        data[r * cols + c] += blk.v[(ct * lt + i) * blk.cols + cb * lb + j];
                    }
                }
            }
        }
    }
}

/// Galerkin mass matrix on a curve.
pub fn mass_matrix_2d(curve: &Curve2D, trial: Space, test: Space, components: usize) -> DenseOperator {
    let (td, sd) = (SpaceDesc::new(test, components), SpaceDesc::new(trial, components));
    let mut op = DenseOperator::zeros(td.len(curve), sd.len(curve), sd, td, Convention::new("mass", "identity", None));
    let (lt, lb) = (locs(test), locs(trial));
    add_local(curve, td, sd, &mut op.data, |e, blk| {
        let len = curve.segments()[e].length;
        for c in 0..components {
            for (i, &ii) in lt.iter().enumerate() {
                for (j, &jj) in lb.iter().enumerate() {
                    blk.add(c * lt.len() + i, c * lb.len() + j, C64::new(local_mass(len, ii, jj), 0.0));
                }
            }
        }
    });
    op
}

fn ds(curve: &Curve2D, e: usize, i: usize) -> f64 {
    let l = curve.segments()[e].length;
    if i == 0 {
        -1.0 / l
    } else {
        1.0 / l
    }
}

/// `M⊥(λ_i e_k) = ∂_sλ_i e₃ × e_k` on segment `e`.
fn guenter_basis(curve: &Curve2D, e: usize, i: usize, k: usize) -> Vec2 {
    let g = ds(curve, e, i);
    if k == 0 {
        [0.0, g]
    } else {
        [-g, 0.0]
    }
}

/// Scalar 2D Helmholtz boundary operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HelmholtzOp2d {
    /// `V`, kernel `G`.
    SingleLayer,
    /// `(N)±`, kernel `−∂G/∂n_y`.
    DoubleLayer(Side),
    /// `(∂_n V)±`, kernel `∂G/∂n_x`.
    Adjoint(Side),
    /// `∂_n N`, weak form `∫∫ G (∂_sφ ∂_sψ − κ² n_x·n_y φψ)`.
    Hypersingular,
}

/// Galerkin matrix of a scalar Helmholtz operator with wavenumber `kappa`.
pub fn helmholtz_2d(
    curve: &Curve2D,
    kappa: f64,
    op: HelmholtzOp2d,
    trial: Space,
    test: Space,
    q: &CurveQuad,
) -> Result<DenseOperator, Elastic2dError> {
    if op == HelmholtzOp2d::Hypersingular && (trial != Space::P1 || test != Space::P1) {
        return Err(Elastic2dError::NotP1("trial and test"));
    }
    let eng = Engine::new(curve, kappa, kappa, Need::default(), q);
    let (name, kernel, side) = match op {
        HelmholtzOp2d::SingleLayer => ("single_layer", "G", None),
        HelmholtzOp2d::DoubleLayer(s) => ("double_layer", "-dG/dn_y", Some(s)),
        HelmholtzOp2d::Adjoint(s) => ("adjoint_double_layer", "dG/dn_x", Some(s)),
        HelmholtzOp2d::Hypersingular => ("hypersingular", "dN/dn", None),
    };
    let (td, sd) = (SpaceDesc::new(test, 1), SpaceDesc::new(trial, 1));
    let mut out = DenseOperator::zeros(td.len(curve), sd.len(curve), sd, td, Convention::new(name, kernel, side));
    let (lt, lb) = (locs(test), locs(trial));
    let k2 = kappa * kappa;
    out.data = assemble(&eng, td, sd, |a, b, m, blk| {
        let segs = curve.segments();
        let nn = segs[a].normal[0] * segs[b].normal[0] + segs[a].normal[1] * segs[b].normal[1];
        for (i, &ii) in lt.iter().enumerate() {
            for (j, &jj) in lb.iter().enumerate() {
                let v = match op {
                    HelmholtzOp2d::SingleLayer => m.get(GS, ii, jj),
                    HelmholtzOp2d::DoubleLayer(_) => m.get(DNY, ii, jj),
                    HelmholtzOp2d::Adjoint(_) => m.get(DNX, ii, jj),
                    HelmholtzOp2d::Hypersingular => {
                        let (Loc::One(ia), Loc::One(jb)) = (ii, jj) else { unreachable!() };
                        m.get(GS, Loc::All, Loc::All) * (ds(curve, a, ia) * ds(curve, b, jb)) - m.get(GS, ii, jj) * (k2 * nn)
                    }
                };
                blk.add(i, j, v);
            }
        }
    });
    if let Some(s) = side {
        let half = 0.5 * s.sign();
        let mass = mass_matrix_2d(curve, trial, test, 1);
        for (d, m) in out.data.iter_mut().zip(&mass.data) {
            *d += m * half;
        }
    }
    Ok(out)
}

/// Antiplane operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AntiplaneOp {
    /// `S₃ = V_{κs}/μ`.
    S3,
    /// `K₃ = N_{κs}`, one-sided.
    K3(Side),
    /// `T₃S₃ = (∂_n V_{κs})±`.
    TS3(Side),
    /// `T₃K₃ = μ ∂_n N_{κs}` through the integrated-by-parts kernel.
    TK3,
    /// `T₃K₃ = −μ ∂_s V_{κs} ∂_s − ω²ρ τ·V_{κs}(· τ)`, composed from the P0
    /// single layer and the arclength derivative matrix.
    TK3Alt,
}

/// Galerkin matrix of an antiplane operator.
pub fn assemble_antiplane(
    curve: &Curve2D,
    params: &WaveParams,
    op: AntiplaneOp,
    trial: Space,
    test: Space,
    q: &CurveQuad,
) -> Result<DenseOperator, Elastic2dError> {
    let ks = params.kappa_s();
    let mu = params.mu();
    let mut out = match op {
        AntiplaneOp::S3 => helmholtz_2d(curve, ks, HelmholtzOp2d::SingleLayer, trial, test, q)?.scaled(C64::new(1.0 / mu, 0.0)),
        AntiplaneOp::K3(s) => helmholtz_2d(curve, ks, HelmholtzOp2d::DoubleLayer(s), trial, test, q)?,
        AntiplaneOp::TS3(s) => helmholtz_2d(curve, ks, HelmholtzOp2d::Adjoint(s), trial, test, q)?,
        AntiplaneOp::TK3 => helmholtz_2d(curve, ks, HelmholtzOp2d::Hypersingular, trial, test, q)?.scaled(C64::new(mu, 0.0)),
        AntiplaneOp::TK3Alt => tk3_alt(curve, params, trial, test, q)?,
    };
    out.convention.operator = format!("antiplane_{op:?}").to_lowercase();
    Ok(out)
}

fn tk3_alt(
    curve: &Curve2D,
    params: &WaveParams,
    trial: Space,
    test: Space,
    q: &CurveQuad,
) -> Result<DenseOperator, Elastic2dError> {
    if trial != Space::P1 || test != Space::P1 {
        return Err(Elastic2dError::NotP1("trial and test"));
    }
    let ks = params.kappa_s();
    let v0 = helmholtz_2d(curve, ks, HelmholtzOp2d::SingleLayer, Space::P0, Space::P0, q)?;
    let (ne, nv) = (curve.num_elements(), curve.num_vertices());
    // D[e][v] = ∂_s of the hat at v on segment e
    let mut dmat = vec![0.0; ne * nv];
    for (e, s) in curve.segments().iter().enumerate() {
        dmat[e * nv + s.start] -= 1.0 / s.length;
        dmat[e * nv + s.end] += 1.0 / s.length;
    }
    // −μ∂_sV∂_s tested with φ: μ Dᵀ V₀ D after integrating by parts
    let mut vd = vec![C64::new(0.0, 0.0); ne * nv];
    for e in 0..ne {
        for (f, sf) in curve.segments().iter().enumerate() {
            let vef = v0.get(e, f);
            for c in [sf.start, sf.end] {
                vd[e * nv + c] += vef * dmat[f * nv + c];
            }
        }
    }
    let (td, sd) = (SpaceDesc::new(test, 1), SpaceDesc::new(trial, 1));
    let mut out = DenseOperator::zeros(nv, nv, sd, td, Convention::new("antiplane_tk3alt", "-mu d_s V d_s - w^2 rho t.V t", None));
    let mu = params.mu();
    for (e, s) in curve.segments().iter().enumerate() {
        for r in [s.start, s.end] {
            let dr = dmat[e * nv + r] * mu;
            for c in 0..nv {
                out.data[r * nv + c] += vd[e * nv + c] * dr;
            }
        }
    }
    // −ω²ρ ∫∫ G τ_x·τ_y φ ψ
    let eng = Engine::new(curve, ks, ks, Need::default(), q);
    let w2r = params.omega2_rho();
    let tt = assemble(&eng, td, sd, |a, b, m, blk| {
        let segs = curve.segments();
        let t = segs[a].tangent[0] * segs[b].tangent[0] + segs[a].tangent[1] * segs[b].tangent[1];
        for i in 0..2 {
            for j in 0..2 {
                blk.add(i, j, -m.get(GS, Loc::One(i), Loc::One(j)) * (w2r * t));
            }
        }
    });
    for (d, v) in out.data.iter_mut().zip(&tt) {
        *d += v;
    }
    Ok(out)
}

/// Plane operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneOp {
    /// `S⊥ = (κs² V_{κs} − ∇∇·V_D)/(ω²ρ)`, `D = G_{κp} − G_{κs}`.
    S,
    /// `K⊥ = N_{κs} + (V_{κs} − 2μS⊥)M⊥ + ∇V_D (n·)`, one-sided; P1 trial.
    K(Side),
    /// `T⊥S⊥ = (∂_nV_{κs})± + n∇·V_D − M⊥(V_{κs} − 2μS⊥)`; P1 test.
    TS(Side),
    /// Double-layer traction in the Günter-regularised form; P1 × P1.
    /// The one-sided traces cancel, so the side only selects how they are
    /// split.
    TK(Side),
}

/// Galerkin matrix of a plane operator on 2-component spaces.
pub fn assemble_plane(
    curve: &Curve2D,
    params: &WaveParams,
    op: PlaneOp,
    trial: Space,
    test: Space,
    q: &CurveQuad,
) -> Result<DenseOperator, Elastic2dError> {
    match op {
        PlaneOp::K(_) if trial != Space::P1 => return Err(Elastic2dError::NotP1("trial")),
        PlaneOp::TS(_) if test != Space::P1 => return Err(Elastic2dError::NotP1("test")),
        PlaneOp::TK(_) if trial != Space::P1 || test != Space::P1 => {
            return Err(Elastic2dError::NotP1("trial and test"))
        }
        _ => {}
    }
    let (kp, ks) = (params.kappa_p(), params.kappa_s());
    let need = Need { diff: true };
    let eng = Engine::new(curve, kp, ks, need, q);
    let mu = params.mu();
    let w2r = params.omega2_rho();
    let inv = 1.0 / w2r;
    let ks2 = ks * ks;
    // V_s − 2μS⊥ = α V_s + β ∇∇·V_D
    let alpha = 1.0 - 2.0 * mu * ks2 * inv;
    let beta = 2.0 * mu * inv;
    let (td, sd) = (SpaceDesc::new(test, 2), SpaceDesc::new(trial, 2));
    let (name, side) = match op {
        PlaneOp::S => ("plane_single_layer", None),
        PlaneOp::K(s) => ("plane_double_layer", Some(s)),
        PlaneOp::TS(s) => ("plane_traction_single_layer", Some(s)),
        PlaneOp::TK(s) => ("plane_traction_double_layer", Some(s)),
    };
    let mut out = DenseOperator::zeros(td.len(curve), sd.len(curve), sd, td, Convention::new(name, "Hankel/Guenter regularised", side));
    let (lt, lb) = (locs(test), locs(trial));
    let (nlt, nlb) = (lt.len(), lb.len());
    let segs = curve.segments();
    out.data = assemble(&eng, td, sd, |a, b, m, blk| {
        let (na, nb) = (segs[a].normal, segs[b].normal);
        let hess = |ii: Loc, jj: Loc| -> [[C64; 2]; 2] {
            let mut h = [[C64::new(0.0, 0.0); 2]; 2];
            for (k, row) in h.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = m.get(DH + hsym(k, l), ii, jj);
                }
            }
            h
        };
        let grad = |ii: Loc, jj: Loc| [m.get(DG, ii, jj), m.get(DG + 1, ii, jj)];
        for (i, &ii) in lt.iter().enumerate() {
            for (j, &jj) in lb.iter().enumerate() {
                match op {
                    PlaneOp::S => {
                        let g = m.get(GS, ii, jj) * (ks2 * inv);
                        let h = hess(ii, jj);
                        for k in 0..2 {
                            for l in 0..2 {
                                let mut v = -h[k][l] * inv;
                                if k == l {
                                    v += g;
                                }
                                blk.add(k * nlt + i, l * nlb + j, v);
                            }
                        }
                    }
                    PlaneOp::K(_) => {
                        let Loc::One(jl) = jj else { unreachable!() };
                        let dny = m.get(DNY, ii, jj);
                        let gr = grad(ii, jj);
                        let gs = m.get(GS, ii, Loc::All);
                        let h = hess(ii, Loc::All);
                        for l in 0..2 {
                            let mpsi = guenter_basis(curve, b, jl, l);
                            for k in 0..2 {
                                let mut v = gr[k] * nb[l];
                                if k == l {
                                    v += dny;
                                }
                                v += gs * (alpha * mpsi[k]);
                                for (p, hp) in mpsi.iter().enumerate() {
                                    v += h[k][p] * (beta * hp);
                                }
                                blk.add(k * nlt + i, l * nlb + j, v);
                            }
                        }
                    }
                    PlaneOp::TS(_) => {
                        let Loc::One(il) = ii else { unreachable!() };
                        let dnx = m.get(DNX, ii, jj);
                        let gr = grad(ii, jj);
                        let gs = m.get(GS, Loc::All, jj);
                        let h = hess(Loc::All, jj);
                        for k in 0..2 {
                            let mphi = guenter_basis(curve, a, il, k);
                            for l in 0..2 {
                                let mut v = gr[l] * na[k];
                                if k == l {
                                    v += dnx;
                                }
                                let mut s = gs * (alpha * mphi[l]);
                                for (p, hp) in mphi.iter().enumerate() {
                                    s += h[p][l] * (beta * hp);
                                }
                                v -= s;
                                blk.add(k * nlt + i, l * nlb + j, v);
                            }
                        }
                    }
                    PlaneOp::TK(_) => {
                        let (Loc::One(il), Loc::One(jl)) = (ii, jj) else { unreachable!() };
                        let all = Loc::All;
                        let nn = na[0] * nb[0] + na[1] * nb[1];
                        let gs_all = m.get(GS, all, all);
                        let gs_ij = m.get(GS, ii, jj);
                        let dnx_i = m.get(DNX, ii, all);
                        let dny_j = m.get(DNY, all, jj);
                        let grad_i = grad(ii, all);
                        let grad_j = grad(all, jj);
                        let h = hess(all, all);
                        let dv = m.get(DV, ii, jj);
                        let lead = (gs_all * (ds(curve, a, il) * ds(curve, b, jl)) - gs_ij * (ks2 * nn)) * mu;
                        let c_gs = 3.0 * mu - 4.0 * mu * mu * ks2 * inv;
                        for k in 0..2 {
                            let mphi = guenter_basis(curve, a, il, k);
                            for l in 0..2 {
                                let mpsi = guenter_basis(curve, b, jl, l);
                                let mut v = if k == l { lead } else { C64::new(0.0, 0.0) };
                                // μ(M(N_s ψ) − ∂_nV_s(Mψ))
                                v += (dny_j * mphi[l] - dnx_i * mpsi[k]) * mu;
                                // 2μ(M∇V_D(n·ψ) − n∇·V_D(Mψ))
                                let g1 = grad_j[0] * mphi[0] + grad_j[1] * mphi[1];
                                let g2 = grad_i[0] * mpsi[0] + grad_i[1] * mpsi[1];
                                v += (g1 * nb[l] - g2 * na[k]) * (2.0 * mu);
                                // M(3μV_s − 4μ²S⊥)M
                                let mut hh = C64::new(0.0, 0.0);
                                for p in 0..2 {
                                    for r in 0..2 {
                                        hh += h[p][r] * (mphi[p] * mpsi[r]);
                                    }
                                }
                                let mm = mphi[0] * mpsi[0] + mphi[1] * mpsi[1];
                                v += gs_all * (c_gs * mm) + hh * (4.0 * mu * mu * inv);
                                // −ω²ρ n V_D (n·ψ)
                                v -= dv * (w2r * na[k] * nb[l]);
                                blk.add(k * nlt + i, l * nlb + j, v);
                            }
                        }
                    }
                }
            }
        }
    });
    match op {
        PlaneOp::S => {}
        PlaneOp::K(s) | PlaneOp::TS(s) => {
            let half = 0.5 * s.sign();
            let mass = mass_matrix_2d(curve, trial, test, 2);
            for (d, m) in out.data.iter_mut().zip(&mass.data) {
                *d += m * half;
            }
        }
        PlaneOp::TK(s) => {
            let half = 0.5 * s.sign() * mu;
            add_local(curve, td, sd, &mut out.data, |e, blk| {
                let hl = 0.5 * segs[e].length;
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            for l in 0..2 {
                                let v = (guenter_basis(curve, e, i, k)[l] - guenter_basis(curve, e, j, l)[k]) * hl * half;
                                blk.add(k * 2 + i, l * 2 + j, C64::new(v, 0.0));
                            }
                        }
                    }
                }
            });
        }
    }
    Ok(out)
}

/// Elastic operators on 3-component fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elastic2dOp {
    S,
    K(Side),
    TS(Side),
    TK(Side),
}

/// Full 3-component matrix: plane block on components 0–1, antiplane block
/// on component 2, zero coupling.
pub fn assemble_elastic_2d(
    curve: &Curve2D,
    params: &WaveParams,
    op: Elastic2dOp,
    trial: Space,
    test: Space,
    q: &CurveQuad,
) -> Result<DenseOperator, Elastic2dError> {
    let (pop, aop) = match op {
        Elastic2dOp::S => (PlaneOp::S, AntiplaneOp::S3),
        Elastic2dOp::K(s) => (PlaneOp::K(s), AntiplaneOp::K3(s)),
        Elastic2dOp::TS(s) => (PlaneOp::TS(s), AntiplaneOp::TS3(s)),
        Elastic2dOp::TK(s) => (PlaneOp::TK(s), AntiplaneOp::TK3),
    };
    let p = assemble_plane(curve, params, pop, trial, test, q)?;
    let a = assemble_antiplane(curve, params, aop, trial, test, q)?;
    let (td, sd) = (SpaceDesc::new(test, 3), SpaceDesc::new(trial, 3));
    let (nt, nb) = (test.dofs(curve), trial.dofs(curve));
    let mut out = DenseOperator::zeros(3 * nt, 3 * nb, sd, td, Convention::new(&format!("elastic2d_{op:?}").to_lowercase(), &p.convention.kernel, p.convention.side));
    let cols = 3 * nb;
    for r in 0..2 * nt {
        out.data[r * cols..r * cols + 2 * nb].copy_from_slice(p.row(r));
    }
    for r in 0..nt {
        let rr = 2 * nt + r;
        out.data[rr * cols + 2 * nb..(rr + 1) * cols].copy_from_slice(a.row(r));
    }
    Ok(out)
}

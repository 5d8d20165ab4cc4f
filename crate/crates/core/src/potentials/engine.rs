//! Panel-pair moments shared by every Galerkin assembly.
//!
//! For a test element `a` and trial element `b` the engine integrates a set of
//! kernel channels against the products `λ_i(x) λ_j(y)` of barycentric hat
//! functions. Pairs are always integrated in canonical order (smaller index
//! on the `x` side); the reversed pair is obtained by transposition, which
//! makes symmetric operators exactly symmetric and the adjoint double layer
//! exactly the negative transpose of the double layer.

use core::f64::consts::PI;

use crate::geometry::CMat3;
use crate::kernels::{kupradze_gamma_direct, WaveParams, DIFF_ORDER, DIFF_SWITCH};
use crate::mesh::{closest_point_on_triangle, SurfaceMesh};
use crate::par;
use crate::prelude::*;
use crate::quadrature::{
    bary_point, gauss_triangle, near_singular_nodes, sauter_schwab, ss_barycentric, PairNode,
    PanelContact, QuadError, QuadOptions, TriangleRule,
};
use crate::space::{Space, SpaceDesc};

/// `G_κs`.
pub(crate) const GS: usize = 0;
/// `G_κp`.
pub(crate) const GP: usize = 1;
/// `ψ = G_κp − G_κs`.
pub(crate) const PSI: usize = 2;
/// `−∂_{n_y} G_κs`.
pub(crate) const DNY: usize = 3;
/// `∂_{n_x} G_κs`.
pub(crate) const DNX: usize = 4;
/// `∇_x ψ`, three entries.
pub(crate) const GRAD: usize = 5;
/// `∇_x ∇_x ψ`, six packed entries.
pub(crate) const HESS: usize = 8;
/// Kupradze matrix from the individual Helmholtz Hessians, six packed entries.
pub(crate) const GAMMA: usize = 14;
pub(crate) const NCH: usize = 20;

/// Packed symmetric index.
#[inline]
pub(crate) fn sym(k: usize, l: usize) -> usize {
    match (k.min(l), k.max(l)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Channels {
    pub gs: bool,
    pub gp: bool,
    pub psi: bool,
    pub dny: bool,
    pub dnx: bool,
    pub grad: bool,
    pub hess: bool,
    pub gamma: bool,
}

impl Channels {
    fn active(&self) -> Vec<usize> {
        let mut v = Vec::new();
        let groups: [(bool, usize, usize); 8] = [
            (self.gs, GS, 1),
            (self.gp, GP, 1),
            (self.psi, PSI, 1),
            // Reversed pairs read one normal derivative from the other.
            (self.dny || self.dnx, DNY, 1),
            (self.dny || self.dnx, DNX, 1),
            (self.grad, GRAD, 3),
            (self.hess, HESS, 6),
            (self.gamma, GAMMA, 6),
        ];
        for (on, start, len) in groups {
            if on {
                v.extend(start..start + len);
            }
        }
        v
    }

    fn needs_psi(&self) -> bool {
        self.psi || self.grad || self.hess
    }
}

/// Pointwise kernel evaluation for the active channels.
pub(crate) struct KernelSet {
    ks: f64,
    kp: f64,
    params: Option<WaveParams>,
    ch: Channels,
    series: [C64; DIFF_ORDER + 1],
    series_r: f64,
}

impl KernelSet {
    /// Scalar Helmholtz channels at wavenumber `kappa`.
    pub fn helmholtz(kappa: f64, ch: Channels) -> Self {
        Self::build(kappa, kappa, None, ch)
    }

    pub fn elastic(params: &WaveParams, ch: Channels) -> Self {
        Self::build(params.kappa_s(), params.kappa_p(), Some(*params), ch)
    }

    fn build(ks: f64, kp: f64, params: Option<WaveParams>, ch: Channels) -> Self {
        let mut series = [C64::new(0.0, 0.0); DIFF_ORDER + 1];
        let (mut pp, mut ps, mut fact) = (1.0, 1.0, 1.0);
        let mut ipow = C64::new(1.0, 0.0);
        for (m, c) in series.iter_mut().enumerate() {
            pp *= kp;
            ps *= ks;
            fact *= (m + 1) as f64;
            ipow *= C64::new(0.0, 1.0);
            *c = ipow * ((pp - ps) / (fact * 4.0 * PI));
        }
        let kmax = ks.abs().max(kp.abs());
        let series_r = if kmax > 0.0 { DIFF_SWITCH / kmax } else { f64::INFINITY };
        KernelSet {
            ks,
            kp,
            params,
            ch,
            series,
            series_r,
        }
    }

    /// Fills `out` at `z = x − y` (non-zero); `zx = z·n_x`, `zy = z·n_y`
    /// are passed separately so that callers can compute them without
    /// cancellation on touching panels.
    #[inline]
    pub fn eval(&self, z: Vec3, zx: f64, zy: f64, out: &mut [C64; NCH]) {
        let r = z.norm();
        let inv = 1.0 / r;
        let zh = z * inv;
        let c4 = 0.25 / PI * inv;
        let ch = &self.ch;
        let need_s = ch.gs || ch.dny || ch.dnx || (ch.needs_psi() && r >= self.series_r);
        let need_p = ch.gp || (ch.needs_psi() && r >= self.series_r);
        let (mut fs, mut fp) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        if need_s {
            let (s, c) = (self.ks * r).sin_cos();
            fs = C64::new(c * c4, s * c4);
        }
        if need_p {
            let (s, c) = (self.kp * r).sin_cos();
            fp = C64::new(c * c4, s * c4);
        }
        let als = C64::new(-inv, self.ks);
        out[GS] = fs;
        out[GP] = fp;
        if ch.dny || ch.dnx {
            let d1 = fs * als;
            out[DNY] = d1 * (zy * inv);
            out[DNX] = d1 * (zx * inv);
        }
        if ch.needs_psi() {
            let (value, d1, a, b);
            if r < self.series_r {
                let zero = C64::new(0.0, 0.0);
                let (mut v, mut g, mut aa, mut bb) = (zero, zero, zero, zero);
                // powers r^{m-2}, starting at m = 0
                let mut pw = inv * inv;
                for (m, cm) in self.series.iter().enumerate() {
                    let mf = m as f64;
                    let t = cm * pw;
                    v += t * (r * r);
                    g += t * (mf * r);
                    aa += t * mf;
                    bb += t * (mf * (mf - 2.0));
                    pw *= r;
                }
                value = v;
                d1 = g;
                a = aa;
                b = bb;
            } else {
                let alp = C64::new(-inv, self.kp);
                let d1p = fp * alp;
                let d1s = fs * als;
                let d2p = fp * (alp * alp + inv * inv);
                let d2s = fs * (als * als + inv * inv);
                value = fp - fs;
                d1 = d1p - d1s;
                a = d1 * inv;
                b = (d2p - d2s) - a;
            }
            out[PSI] = value;
            if ch.grad {
                out[GRAD] = d1 * zh.x;
                out[GRAD + 1] = d1 * zh.y;
                out[GRAD + 2] = d1 * zh.z;
            }
            if ch.hess {
                let zz = zh.to_array();
                for k in 0..3 {
                    for l in k..3 {
                        let mut h = b * (zz[k] * zz[l]);
                        if k == l {
                            h += a;
                        }
                        out[HESS + sym(k, l)] = h;
                    }
                }
            }
        }
        if ch.gamma {
            let params = self.params.as_ref().expect("elastic kernel set");
            let g: CMat3 = kupradze_gamma_direct(params, z, Vec3::ZERO).expect("non-coincident node");
            for k in 0..3 {
                for l in k..3 {
                    out[GAMMA + sym(k, l)] = g[k][l];
                }
            }
        }
    }
}

/// Integrals `∫∫ λ_i(x) λ_j(y) k_c(x, y)` over one ordered element pair.
#[derive(Clone)]
pub(crate) struct Moments {
    m: [C64; 9 * NCH],
}

/// Local basis index: a single hat function or the sum of all three (P0).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Idx {
    One(usize),
    All,
}

pub(crate) fn locals(space: Space) -> &'static [Idx] {
    match space {
        Space::P0 => &[Idx::All],
        Space::P1 => &[Idx::One(0), Idx::One(1), Idx::One(2)],
    }
}

impl Moments {
    fn zero() -> Self {
        Moments {
            m: [C64::new(0.0, 0.0); 9 * NCH],
        }
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize, j: usize) -> C64 {
        self.m[(i * 3 + j) * NCH + c]
    }

    /// Moment for local indices that may be summed (P0 sides).
    #[inline]
    pub fn get(&self, c: usize, i: Idx, j: Idx) -> C64 {
        match (i, j) {
            (Idx::One(i), Idx::One(j)) => self.at(c, i, j),
            (Idx::One(i), Idx::All) => self.at(c, i, 0) + self.at(c, i, 1) + self.at(c, i, 2),
            (Idx::All, Idx::One(j)) => self.at(c, 0, j) + self.at(c, 1, j) + self.at(c, 2, j),
            (Idx::All, Idx::All) => {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..9 {
                    s += self.m[k * NCH + c];
                }
                s
            }
        }
    }

    /// Moments of the same pair with the roles of `x` and `y` exchanged.
    fn reversed(&self) -> Self {
        let mut out = Moments::zero();
        for i in 0..3 {
            for j in 0..3 {
                let src = (j * 3 + i) * NCH;
                let dst = (i * 3 + j) * NCH;
                out.m[dst..dst + NCH].copy_from_slice(&self.m[src..src + NCH]);
                out.m[dst + DNY] = -self.m[src + DNX];
                out.m[dst + DNX] = -self.m[src + DNY];
                for g in 0..3 {
                    out.m[dst + GRAD + g] = -self.m[src + GRAD + g];
                }
            }
        }
        out
    }
}

/// Physical quadrature node on an element.
#[derive(Clone, Copy)]
struct ElemNode {
    p: Vec3,
    b: [f64; 3],
    w: f64,
}

fn element_nodes(mesh: &SurfaceMesh, rule: &TriangleRule) -> Vec<Vec<ElemNode>> {
    (0..mesh.triangles().len())
        .map(|e| {
            let t = mesh.corners(e);
            let jac = 2.0 * mesh.frame(e).area;
            (0..rule.len())
                .map(|q| {
                    let b = rule.barycentric(q);
                    ElemNode {
                        p: bary_point(&t, b),
                        b,
                        w: rule.weights[q] * jac,
                    }
                })
                .collect()
        })
        .collect()
}

/// Precomputed rules and kernel set for pair integration on one mesh.
pub(crate) struct PairEngine<'m> {
    mesh: &'m SurfaceMesh,
    ker: KernelSet,
    act: Vec<usize>,
    opts: QuadOptions,
    ss: [Vec<PairNode>; 3],
    near: Vec<Vec<ElemNode>>,
    mid: Vec<Vec<ElemNode>>,
    far: Vec<Vec<ElemNode>>,
    inner: TriangleRule,
    fallback: Vec<Vec<ElemNode>>,
    radius: Vec<f64>,
}

impl<'m> PairEngine<'m> {
    pub fn new(mesh: &'m SurfaceMesh, ker: KernelSet, opts: &QuadOptions) -> Result<Self, QuadError> {
        let act = ker.ch.active();
        let rule = |d: usize| gauss_triangle(d).map(|r| element_nodes(mesh, &r));
        let radius = (0..mesh.triangles().len())
            .map(|e| {
                let c = mesh.frame(e).centroid;
                mesh.corners(e).iter().fold(0.0f64, |m, v| m.max(v.distance(c)))
            })
            .collect();
        let n = opts.singular_order;
        Ok(PairEngine {
            mesh,
            ker,
            act,
            ss: [
                sauter_schwab(PanelContact::Identical, n),
                sauter_schwab(PanelContact::Edge, n),
                sauter_schwab(PanelContact::Vertex, n),
            ],
            near: rule(opts.near_degree)?,
            mid: rule(opts.mid_degree)?,
            far: rule(opts.far_degree)?,
            inner: gauss_triangle(opts.near_degree)?,
            fallback: rule(20)?,
            radius,
            opts: opts.clone(),
        })
    }

    #[inline]
    fn add(&self, mom: &mut Moments, bx: &[f64; 3], by: &[f64; 3], w: f64, vals: &[C64; NCH]) {
        for i in 0..3 {
            for j in 0..3 {
                let f = w * bx[i] * by[j];
                let base = (i * 3 + j) * NCH;
                for &c in &self.act {
                    mom.m[base + c] += vals[c] * f;
                }
            }
        }
    }

    fn canonical(&self, a: usize, b: usize) -> Moments {
        let mesh = self.mesh;
        let (ta, tb) = (mesh.triangles()[a], mesh.triangles()[b]);
        let shared: Vec<(usize, usize)> = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| ta[i] == tb[j]).map(move |j| (i, j)))
            .collect();
        if a == b {
            return self.singular(a, b, [0, 1, 2], [0, 1, 2], PanelContact::Identical);
        }
        match shared.len() {
            2 => {
                let (p, q) = (shared[0], shared[1]);
                let ra = 3 - p.0 - q.0;
                let rb = 3 - p.1 - q.1;
                self.singular(a, b, [p.0, q.0, ra], [p.1, q.1, rb], PanelContact::Edge)
            }
            1 => {
                let (i, j) = shared[0];
                self.singular(
                    a,
                    b,
                    [i, (i + 1) % 3, (i + 2) % 3],
                    [j, (j + 1) % 3, (j + 2) % 3],
                    PanelContact::Vertex,
                )
            }
            _ => self.separated(a, b),
        }
    }

    fn singular(&self, a: usize, b: usize, pa: [usize; 3], pb: [usize; 3], contact: PanelContact) -> Moments {
        let mesh = self.mesh;
        let (ca, cb) = (mesh.corners(a), mesh.corners(b));
        let (fa, fb) = (mesh.frame(a), mesh.frame(b));
        let jac = 4.0 * fa.area * fb.area;
        let nodes = match contact {
            PanelContact::Identical => &self.ss[0],
            PanelContact::Edge => &self.ss[1],
            PanelContact::Vertex => &self.ss[2],
        };
        let apex = ca[pa[0]];
        let mut mom = Moments::zero();
        let mut vals = [C64::new(0.0, 0.0); NCH];
        for nd in nodes {
            let (sx, sy) = (ss_barycentric(nd.x), ss_barycentric(nd.y));
            let mut bx = [0.0; 3];
            let mut by = [0.0; 3];
            for k in 0..3 {
                bx[pa[k]] = sx[k];
                by[pb[k]] = sy[k];
            }
            let x = bary_point(&ca, bx);
            let y = bary_point(&cb, by);
            let z = x - y;
            if z.norm() == 0.0 {
                continue;
            }
            let (zx, zy) = if contact == PanelContact::Identical {
                (0.0, 0.0)
            } else {
                ((apex - y).dot(fa.normal), (x - apex).dot(fb.normal))
            };
            self.ker.eval(z, zx, zy, &mut vals);
            self.add(&mut mom, &bx, &by, nd.weight * jac, &vals);
        }
        mom
    }

    fn separated(&self, a: usize, b: usize) -> Moments {
        let mesh = self.mesh;
        let (fa, fb) = (mesh.frame(a), mesh.frame(b));
        let dc = fa.centroid.distance(fb.centroid);
        let diam = fa.diameter.max(fb.diameter);
        let gap = dc - self.radius[a] - self.radius[b];
        if gap < self.opts.near_ratio * diam {
            return self.close(a, b);
        }
        let ratio = dc / diam;
        let (xa, yb) = if ratio >= self.opts.far_ratio {
            (&self.far[a], &self.far[b])
        } else if ratio >= self.opts.mid_ratio {
            (&self.mid[a], &self.mid[b])
        } else {
            (&self.near[a], &self.near[b])
        };
        self.tensor(xa, yb, fa.normal, fb.normal)
    }

    fn tensor(&self, xa: &[ElemNode], yb: &[ElemNode], na: Vec3, nb: Vec3) -> Moments {
        let mut mom = Moments::zero();
        let mut vals = [C64::new(0.0, 0.0); NCH];
        for x in xa {
            let mut t = [C64::new(0.0, 0.0); 3 * NCH];
            for y in yb {
                let z = x.p - y.p;
                self.ker.eval(z, z.dot(na), z.dot(nb), &mut vals);
                for j in 0..3 {
                    let f = y.w * y.b[j];
                    for &c in &self.act {
                        t[j * NCH + c] += vals[c] * f;
                    }
                }
            }
            for i in 0..3 {
                let f = x.w * x.b[i];
                for j in 0..3 {
                    let base = (i * 3 + j) * NCH;
                    for &c in &self.act {
                        mom.m[base + c] += t[j * NCH + c] * f;
                    }
                }
            }
        }
        mom
    }

    /// Outer rule on `a`, inner rule on `b` refined toward each outer node.
    fn close(&self, a: usize, b: usize) -> Moments {
        let mesh = self.mesh;
        let (fa, fb) = (mesh.frame(a), mesh.frame(b));
        let cb = mesh.corners(b);
        let mut mom = Moments::zero();
        let mut vals = [C64::new(0.0, 0.0); NCH];
        for x in &self.near[a] {
            let mut t = [C64::new(0.0, 0.0); 3 * NCH];
            let res = near_singular_nodes(&cb, x.p, &self.inner, self.opts.eta, |y, by, w| {
                let z = x.p - y;
                self.ker.eval(z, z.dot(fa.normal), z.dot(fb.normal), &mut vals);
                for j in 0..3 {
                    let f = w * by[j];
                    for &c in &self.act {
                        t[j * NCH + c] += vals[c] * f;
                    }
                }
            });
            if res.is_err() {
                // Geometrically touching without shared vertices.
                t = [C64::new(0.0, 0.0); 3 * NCH];
                for y in &self.fallback[b] {
                    if x.p.distance(y.p) == 0.0 {
                        continue;
                    }
                    let z = x.p - y.p;
                    self.ker.eval(z, z.dot(fa.normal), z.dot(fb.normal), &mut vals);
                    for j in 0..3 {
                        let f = y.w * y.b[j];
                        for &c in &self.act {
                            t[j * NCH + c] += vals[c] * f;
                        }
                    }
                }
            }
            for i in 0..3 {
                let f = x.w * x.b[i];
                for j in 0..3 {
                    let base = (i * 3 + j) * NCH;
                    for &c in &self.act {
                        mom.m[base + c] += t[j * NCH + c] * f;
                    }
                }
            }
        }
        mom
    }
}

/// Small dense block of one element pair; rows are `component · nloc + i`.
pub(crate) struct Block {
    pub cols: usize,
    pub v: [C64; 81],
}

impl Block {
    #[inline]
    pub fn add(&mut self, r: usize, c: usize, val: C64) {
        self.v[r * self.cols + c] += val;
    }
}

fn dof(mesh: &SurfaceMesh, space: Space, e: usize, i: usize) -> usize {
    match space {
        Space::P0 => e,
        Space::P1 => mesh.triangles()[e][i],
    }
}

fn nloc(space: Space) -> usize {
    match space {
        Space::P0 => 1,
        Space::P1 => 3,
    }
}

/// Assembles `Σ_pairs local(a, b, moments)` into a row-major matrix.
///
/// `local` receives the test element `a`, trial element `b` and the oriented
/// moments, and adds into the local block. Pairs are computed in parallel
/// over chunks of test elements and scattered in a fixed order.
pub(crate) fn assemble<F>(eng: &PairEngine<'_>, test: SpaceDesc, trial: SpaceDesc, local: F) -> Vec<C64>
where
    F: Fn(usize, usize, &Moments, &mut Block) + Sync,
{
    let mesh = eng.mesh;
    let ne = mesh.triangles().len();
    let rows = test.len(mesh);
    let cols = trial.len(mesh);
    let nt = test.space.dofs(mesh);
    let nb = trial.space.dofs(mesh);
    let lb = nloc(trial.space);
    let bc = lb * trial.components;
    let bt = lb * trial.components;
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    let chunk = 8usize;
    let mut a0 = 0;
    while a0 < ne {
        let len = chunk.min(ne - a0);
        let parts: Vec<Vec<(usize, Block, Block)>> = par::map(len, |k| {
            let a = a0 + k;
            (a..ne)
                .map(|b| {
                    let mom = eng.canonical(a, b);
                    let mut ab = Block {
                        cols: bc,
                        v: [C64::new(0.0, 0.0); 81],
                    };
                    local(a, b, &mom, &mut ab);
                    let mut ba = Block {
                        cols: bt,
                        v: [C64::new(0.0, 0.0); 81],
                    };
                    if b != a {
                        let rev = mom.reversed();
                        local(b, a, &rev, &mut ba);
                    }
                    (b, ab, ba)
                })
                .collect()
        });
        for (k, list) in parts.iter().enumerate() {
            let a = a0 + k;
            for (b, ab, ba) in list {
                scatter(&mut out, cols, mesh, test, trial, nt, nb, a, *b, ab);
                if *b != a {
                    scatter(&mut out, cols, mesh, test, trial, nt, nb, *b, a, ba);
                }
            }
        }
        a0 += len;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn scatter(
    out: &mut [C64],
    cols: usize,
    mesh: &SurfaceMesh,
    test: SpaceDesc,
    trial: SpaceDesc,
    nt: usize,
    nb: usize,
    a: usize,
    b: usize,
    blk: &Block,
) {
    let (lt, lb) = (nloc(test.space), nloc(trial.space));
    for ct in 0..test.components {
        for i in 0..lt {
            let r = ct * nt + dof(mesh, test.space, a, i);
            let lr = ct * lt + i;
            for cb in 0..trial.components {
                for j in 0..lb {
                    let c = cb * nb + dof(mesh, trial.space, b, j);
                    let lc = cb * lb + j;
                    out[r * cols + c] += blk.v[lr * blk.cols + lc];
                }
            }
        }
    }
}

/// Element-local (same element) contributions such as jump halves:
/// `local(e, block)` with test and trial on element `e`.
pub(crate) fn assemble_local<F>(mesh: &SurfaceMesh, test: SpaceDesc, trial: SpaceDesc, out: &mut [C64], local: F)
where
    F: Fn(usize, &mut Block),
{
    let cols = trial.len(mesh);
    let nt = test.space.dofs(mesh);
    let nb = trial.space.dofs(mesh);
    let lb = nloc(trial.space);
    for e in 0..mesh.triangles().len() {
        let mut blk = Block {
            cols: lb * trial.components,
            v: [C64::new(0.0, 0.0); 81],
        };
        local(e, &mut blk);
        scatter(out, cols, mesh, test, trial, nt, nb, e, e, &blk);
    }
}

/// Exact `∫_e φ_i ψ_j` for local basis indices of `test` and `trial`.
pub(crate) fn local_mass(area: f64, i: Idx, j: Idx) -> f64 {
    match (i, j) {
        (Idx::One(i), Idx::One(j)) => area / 12.0 * if i == j { 2.0 } else { 1.0 },
        (Idx::One(_), Idx::All) | (Idx::All, Idx::One(_)) => area / 3.0,
        (Idx::All, Idx::All) => area,
    }
}

/// Off-surface point evaluation nodes for every element.
pub(crate) struct PointEngine<'m> {
    mesh: &'m SurfaceMesh,
    regular: Vec<Vec<ElemNode>>,
    rule: TriangleRule,
    eta: f64,
    radius: Vec<f64>,
}

impl<'m> PointEngine<'m> {
    pub fn new(mesh: &'m SurfaceMesh, opts: &QuadOptions) -> Result<Self, QuadError> {
        let rule = gauss_triangle(opts.eval_degree)?;
        let radius = (0..mesh.triangles().len())
            .map(|e| {
                let c = mesh.frame(e).centroid;
                mesh.corners(e).iter().fold(0.0f64, |m, v| m.max(v.distance(c)))
            })
            .collect();
        Ok(PointEngine {
            mesh,
            regular: element_nodes(mesh, &rule),
            rule,
            eta: opts.eta,
            radius,
        })
    }

    /// Calls `f(y, barycentrics, weight)` for the nodes of element `e` used
    /// to integrate a kernel singular at `x`.
    pub fn nodes(&self, x: Vec3, e: usize, mut f: impl FnMut(Vec3, [f64; 3], f64)) -> Result<(), QuadError> {
        let fr = self.mesh.frame(e);
        let lower = x.distance(fr.centroid) - self.radius[e];
        let far = lower >= self.eta * fr.diameter || {
            let [a, b, c] = self.mesh.corners(e);
            x.distance(closest_point_on_triangle(x, a, b, c)) >= self.eta * fr.diameter
        };
        if far {
            for n in &self.regular[e] {
                f(n.p, n.b, n.w);
            }
            Ok(())
        } else {
            near_singular_nodes(&self.mesh.corners(e), x, &self.rule, self.eta, f)
        }
    }
}

//! Triangulated surfaces, polygonal curves and off-surface point grids.

use alloc::collections::BTreeMap;
use core::f64::consts::PI;

use crate::geometry::Vec2;
use crate::prelude::*;

/// Triangles with `area < DEGENERATE_RATIO · longest_edge²` are rejected.
pub const DEGENERATE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh has no elements")]
    Empty,
    #[error("element {element} references missing vertex {vertex}")]
    MissingVertex { element: usize, vertex: usize },
    #[error("element {0} is degenerate")]
    Degenerate(usize),
    #[error("operation requires a closed, consistently oriented mesh")]
    NotClosed,
    #[error("point {0} lies on the surface; interior/exterior tag is ambiguous")]
    Ambiguous(usize),
    #[error("curve is not a valid counterclockwise simple polygon: {0}")]
    BadCurve(&'static str),
}

/// Per-element geometry of a flat triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    /// Outward unit normal (right-hand rule on the stored vertex order).
    pub normal: Vec3,
    pub area: f64,
    /// Unit tangent along the first edge.
    pub t1: Vec3,
    /// `normal × t1`, so that `t1 × t2 = normal`.
    pub t2: Vec3,
    pub centroid: Vec3,
    /// Longest edge length.
    pub diameter: f64,
}

/// Frame of the triangle `(a, b, c)`.
pub fn triangle_frame(a: Vec3, b: Vec3, c: Vec3) -> Result<Frame, MeshError> {
    let e1 = b - a;
    let e2 = c - a;
    let cr = e1.cross(e2);
    let area = 0.5 * cr.norm();
    let diameter = e1.norm().max(e2.norm()).max((c - b).norm());
    if !(area > DEGENERATE_RATIO * diameter * diameter) {
        return Err(MeshError::Degenerate(0));
    }
    let normal = cr / (2.0 * area);
    let t1 = e1.normalized();
    let t2 = normal.cross(t1);
    Ok(Frame {
        normal,
        area,
        t1,
        t2,
        centroid: (a + b + c) / 3.0,
        diameter,
    })
}

/// An undirected edge with the triangles that traverse it.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Smaller vertex index first.
    pub vertices: [usize; 2],
    /// `(triangle, forward)` where `forward` means the triangle runs from
    /// `vertices[0]` to `vertices[1]`.
    pub incident: Vec<(usize, bool)>,
}

/// Dof counts shared by surfaces and curves.
pub trait Discretization {
    fn num_elements(&self) -> usize;
    fn num_vertices(&self) -> usize;
}

/// Oriented flat triangulation with cached element frames.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    frames: Vec<Frame>,
    edges: Vec<Edge>,
    closed: bool,
}

impl Discretization for SurfaceMesh {
    fn num_elements(&self) -> usize {
        self.triangles.len()
    }
    fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut frames = Vec::with_capacity(triangles.len());
        for (e, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= vertices.len() {
                    return Err(MeshError::MissingVertex {
                        element: e,
                        vertex: v,
                    });
                }
            }
            let f = triangle_frame(vertices[t[0]], vertices[t[1]], vertices[t[2]])
                .map_err(|_| MeshError::Degenerate(e))?;
            frames.push(f);
        }
        let mut table: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (e, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                table.entry(key).or_default().push((e, a < b));
            }
        }
        let edges: Vec<Edge> = table
            .into_iter()
            .map(|((a, b), incident)| Edge {
                vertices: [a, b],
                incident,
            })
            .collect();
        let closed = edges
            .iter()
            .all(|e| e.incident.len() == 2 && e.incident[0].1 != e.incident[1].1);
        Ok(SurfaceMesh {
            vertices,
            triangles,
            frames,
            edges,
            closed,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// True iff every edge has exactly two incident triangles traversing it in
    /// opposite directions.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn frame(&self, elem: usize) -> &Frame {
        &self.frames[elem]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Frame of element `elem`; `None` for an out-of-range index.
    pub fn element_frame(&self, elem: usize) -> Option<Frame> {
        self.frames.get(elem).copied()
    }

    pub fn corners(&self, elem: usize) -> [Vec3; 3] {
        let t = self.triangles[elem];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Longest edge over the mesh.
    pub fn max_edge_length(&self) -> f64 {
        self.frames.iter().map(|f| f.diameter).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.frames.iter().map(|f| f.area).sum()
    }

    /// Signed enclosed volume; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Number of vertices shared by elements `a` and `b`.
    pub fn shared_vertices(&self, a: usize, b: usize) -> usize {
        let (ta, tb) = (self.triangles[a], self.triangles[b]);
        ta.iter().filter(|v| tb.contains(v)).count()
    }

    /// Unit icosphere: the icosahedron refined `level` times with vertices
    /// projected to the sphere.
    pub fn icosphere(level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let vertices = raw.iter().map(|p| Vec3::from(*p).normalized()).collect();
        let triangles = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let mut mesh = SurfaceMesh::new(vertices, triangles).expect("icosahedron is valid");
        for _ in 0..level {
            mesh = mesh
                .refine(Some(&unit_sphere_projector))
                .expect("icosphere stays closed");
        }
        mesh
    }

    /// Axis-aligned cube `[-1/2, 1/2]³` with `n × n` square facets per face,
    /// each split into two triangles.
    pub fn cube(n: usize) -> Self {
        let n = n.max(1);
        let mut index: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let h = 1.0 / n as f64;
        // (normal axis, in-plane axes ordered so that e_b × e_c = +e_axis)
        let planes = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
        for &(a, b, c) in &planes {
            for side in [0, n] {
                let (b, c) = if side == n { (b, c) } else { (c, b) };
                let mut id = |i: usize, j: usize| {
                    let mut key = [0usize; 3];
                    key[a] = side;
                    key[b] = i;
                    key[c] = j;
                    *index.entry(key).or_insert_with(|| {
                        vertices.push(Vec3::new(
                            key[0] as f64 * h - 0.5,
                            key[1] as f64 * h - 0.5,
                            key[2] as f64 * h - 0.5,
                        ));
                        vertices.len() - 1
                    })
                };
                for i in 0..n {
                    for j in 0..n {
                        let p00 = id(i, j);
                        let p10 = id(i + 1, j);
                        let p11 = id(i + 1, j + 1);
                        let p01 = id(i, j + 1);
                        triangles.push([p00, p10, p11]);
                        triangles.push([p00, p11, p01]);
                    }
                }
            }
        }
        SurfaceMesh::new(vertices, triangles).expect("cube is valid")
    }

    /// Splits every triangle 1→4 at edge midpoints; new vertices are passed
    /// through `projector` when given.
    pub fn refine(&self, projector: Option<&dyn Fn(Vec3) -> Vec3>) -> Result<Self, MeshError> {
        if !self.closed {
            return Err(MeshError::NotClosed);
        }
        let mut vertices = self.vertices.clone();
        let mut mids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let mut p = (vertices[a] + vertices[b]) * 0.5;
                if let Some(proj) = projector {
                    p = proj(p);
                }
                vertices.push(p);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let ab = mid(t[0], t[1], &mut vertices);
            let bc = mid(t[1], t[2], &mut vertices);
            let ca = mid(t[2], t[0], &mut vertices);
            triangles.push([t[0], ab, ca]);
            triangles.push([t[1], bc, ab]);
            triangles.push([t[2], ca, bc]);
            triangles.push([ab, bc, ca]);
        }
        SurfaceMesh::new(vertices, triangles)
    }

    /// Tags points interior/exterior by the summed solid angle and records the
    /// distance to the surface.
    pub fn classify_points(&self, points: &[Vec3]) -> Result<EvalGrid, MeshError> {
        if !self.closed {
            return Err(MeshError::NotClosed);
        }
        let scale = self.max_edge_length();
        let mut regions = Vec::with_capacity(points.len());
        let mut distances = Vec::with_capacity(points.len());
        for (i, &p) in points.iter().enumerate() {
            let mut omega = 0.0;
            let mut dist = f64::INFINITY;
            for e in 0..self.triangles.len() {
                let [a, b, c] = self.corners(e);
                omega += solid_angle(p, a, b, c);
                dist = dist.min(p.distance(closest_point_on_triangle(p, a, b, c)));
            }
            let winding = omega / (4.0 * PI);
            if dist <= 1e-12 * scale || (winding - 0.5).abs() < 0.25 {
                return Err(MeshError::Ambiguous(i));
            }
            regions.push(if winding > 0.5 {
                Region::Interior
            } else {
                Region::Exterior
            });
            distances.push(dist);
        }
        Ok(EvalGrid {
            points: points.to_vec(),
            regions,
            distances,
        })
    }
}

/// Radial projection onto the unit sphere.
pub fn unit_sphere_projector(p: Vec3) -> Vec3 {
    p.normalized()
}

/// Signed solid angle subtended by triangle `(a, b, c)` at `p`; positive when
/// `p` lies behind the oriented triangle (inside for outward orientation).
pub fn solid_angle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let (ra, rb, rc) = (a - p, b - p, c - p);
    let (la, lb, lc) = (ra.norm(), rb.norm(), rc.norm());
    let num = ra.dot(rb.cross(rc));
    let den = la * lb * lc + ra.dot(rb) * lc + ra.dot(rc) * lb + rb.dot(rc) * la;
    2.0 * num.atan2(den)
}

/// Closest point to `p` on the closed triangle `(a, b, c)`.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Which side of the surface a point lies on. `Interior` is the domain the
/// normals point away from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Interior,
    Exterior,
}

/// Off-surface evaluation points with side tags and surface distances.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalGrid {
    pub points: Vec<Vec3>,
    pub regions: Vec<Region>,
    pub distances: Vec<f64>,
}

impl EvalGrid {
    /// Grid with caller-supplied tags and distances (no solid-angle test).
    pub fn tagged(points: Vec<Vec3>, regions: Vec<Region>, distances: Vec<f64>) -> Self {
        EvalGrid {
            points,
            regions,
            distances,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One straight segment of a [`Curve2D`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub length: f64,
    /// Unit tangent in the direction of increasing arclength.
    pub tangent: Vec2,
    /// Unit normal with `tangent = R_{π/2} normal`; outward for a
    /// counterclockwise loop.
    pub normal: Vec2,
}

/// One or more closed polygons; the first is the counterclockwise outer loop.
#[derive(Clone, Debug)]
pub struct Curve2D {
    vertices: Vec<Vec2>,
    segments: Vec<Segment>,
}

impl Discretization for Curve2D {
    fn num_elements(&self) -> usize {
        self.segments.len()
    }
    fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
}

impl Curve2D {
    pub fn new(loops: Vec<Vec<Vec2>>) -> Result<Self, MeshError> {
        if loops.is_empty() || loops.iter().any(|l| l.len() < 3) {
            return Err(MeshError::BadCurve("each loop needs at least three vertices"));
        }
        let signed_area = |l: &[Vec2]| {
            (0..l.len())
                .map(|i| {
                    let (p, q) = (l[i], l[(i + 1) % l.len()]);
                    p[0] * q[1] - q[0] * p[1]
                })
                .sum::<f64>()
                * 0.5
        };
        if signed_area(&loops[0]) <= 0.0 {
            return Err(MeshError::BadCurve("outer loop is not counterclockwise"));
        }
        let mut vertices = Vec::new();
        let mut segments = Vec::new();
        for l in &loops {
            let base = vertices.len();
            vertices.extend_from_slice(l);
            for i in 0..l.len() {
                let (s, e) = (base + i, base + (i + 1) % l.len());
                let d = [vertices[e][0] - vertices[s][0], vertices[e][1] - vertices[s][1]];
                let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if !(length > 0.0) {
                    return Err(MeshError::BadCurve("zero-length segment"));
                }
                let tangent = [d[0] / length, d[1] / length];
                segments.push(Segment {
                    start: s,
                    end: e,
                    length,
                    tangent,
                    normal: [tangent[1], -tangent[0]],
                });
            }
        }
        let curve = Curve2D { vertices, segments };
        if !curve.is_simple() {
            return Err(MeshError::BadCurve("segments intersect"));
        }
        Ok(curve)
    }

    /// Regular `n`-gon inscribed in the circle of radius `radius`.
    pub fn regular_polygon(n: usize, radius: f64) -> Result<Self, MeshError> {
        let pts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        Curve2D::new(vec![pts])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn max_segment_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).fold(0.0, f64::max)
    }

    fn is_simple(&self) -> bool {
        let n = self.segments.len();
        let seg = |s: &Segment| (self.vertices[s.start], self.vertices[s.end]);
        for i in 0..n {
            for j in i + 1..n {
                let (si, sj) = (&self.segments[i], &self.segments[j]);
                if si.start == sj.end || si.end == sj.start || si.start == sj.start || si.end == sj.end
                {
                    continue;
                }
                let ((p1, p2), (q1, q2)) = (seg(si), seg(sj));
                let orient = |a: Vec2, b: Vec2, c: Vec2| {
                    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                };
                let (o1, o2) = (orient(p1, p2, q1), orient(p1, p2, q2));
                let (o3, o4) = (orient(q1, q2, p1), orient(q1, q2, p2));
                if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

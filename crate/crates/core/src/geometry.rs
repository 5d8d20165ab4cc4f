//! Small fixed-size vector algebra.

use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::prelude::*;

/// Point or direction in three dimensions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Unit vector along axis `i` (0-based).
    pub fn axis(i: usize) -> Self {
        let mut a = [0.0; 3];
        a[i] = 1.0;
        Vec3::from(a)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Complex 3-vector.
pub type CVec3 = [C64; 3];

/// 3×3 complex matrix, row-major.
pub type CMat3 = [[C64; 3]; 3];

pub const CZERO3: CVec3 = [C64::new(0.0, 0.0); 3];
pub const CZERO33: CMat3 = [[C64::new(0.0, 0.0); 3]; 3];

pub fn cscale(v: Vec3, s: C64) -> CVec3 {
    [s * v.x, s * v.y, s * v.z]
}

pub fn cdot(a: &CVec3, b: &CVec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn rdot(a: Vec3, b: &CVec3) -> C64 {
    b[0] * a.x + b[1] * a.y + b[2] * a.z
}

/// Cross product of a real and a complex vector.
pub fn rcross(a: Vec3, b: &CVec3) -> CVec3 {
    [
        b[2] * a.y - b[1] * a.z,
        b[0] * a.z - b[2] * a.x,
        b[1] * a.x - b[0] * a.y,
    ]
}

pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn cnorm(a: &CVec3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

pub fn cadd(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn csub(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cmul(a: &CVec3, s: C64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Traction `2μ ∂_n u + λ n ∇·u + μ n × ∇×u` from the Jacobian `d[k][m] = ∂_m u_k`.
pub fn traction_from_jacobian(d: &CMat3, n: Vec3, mu: f64, lambda: f64) -> CVec3 {
    let div = d[0][0] + d[1][1] + d[2][2];
    let curl = [d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]];
    let n_curl = rcross(n, &curl);
    let mut t = CZERO3;
    for k in 0..3 {
        let dn = d[k][0] * n.x + d[k][1] * n.y + d[k][2] * n.z;
        t[k] = dn * (2.0 * mu) + div * (lambda * n[k]) + n_curl[k] * mu;
    }
    t
}

/// Point in the plane.
pub type Vec2 = [f64; 2];

/// Traction written with the Günter vector `M u = ∇u·n − n ∇·u`:
/// `2μ M u − μ n × ∇×u + (λ + 2μ) n ∇·u`.
pub fn traction_guenter_first(d: &CMat3, n: Vec3, mu: f64, lambda: f64) -> CVec3 {
    let div = d[0][0] + d[1][1] + d[2][2];
    let curl = [d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]];
    let n_curl = rcross(n, &curl);
    let m = guenter_vector(d, n);
    core::array::from_fn(|k| m[k] * (2.0 * mu) - n_curl[k] * mu + div * ((lambda + 2.0 * mu) * n[k]))
}

/// Traction as `μ M u + μ ∂_n u + (λ + μ) n ∇·u`.
pub fn traction_guenter_second(d: &CMat3, n: Vec3, mu: f64, lambda: f64) -> CVec3 {
    let div = d[0][0] + d[1][1] + d[2][2];
    let m = guenter_vector(d, n);
    core::array::from_fn(|k| {
        let dn = d[k][0] * n.x + d[k][1] * n.y + d[k][2] * n.z;
        m[k] * mu + dn * mu + div * ((lambda + mu) * n[k])
    })
}

/// `(M u)_i = Σ_j (n_j ∂_i u_j − n_i ∂_j u_j)` from a full Jacobian.
pub fn guenter_vector(d: &CMat3, n: Vec3) -> CVec3 {
    let div = d[0][0] + d[1][1] + d[2][2];
    core::array::from_fn(|i| d[0][i] * n.x + d[1][i] * n.y + d[2][i] * n.z - div * n[i])
}

//! Boundary element spaces and coefficient vectors.

use crate::mesh::Discretization;
use crate::prelude::*;

/// Piecewise-constant or continuous piecewise-linear functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    P0,
    P1,
}

impl Space {
    pub fn dofs(self, d: &impl Discretization) -> usize {
        match self {
            Space::P0 => d.num_elements(),
            Space::P1 => d.num_vertices(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::P0 => "P0",
            Space::P1 => "P1",
        }
    }
}

/// A space together with its number of field components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDesc {
    pub space: Space,
    pub components: usize,
}

impl SpaceDesc {
    pub const fn new(space: Space, components: usize) -> Self {
        SpaceDesc { space, components }
    }

    pub fn len(&self, d: &impl Discretization) -> usize {
        self.space.dofs(d) * self.components
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("expected a {expected_components}-component {expected_space:?} density, got {got_components}-component {got_space:?}")]
    WrongSpace {
        expected_space: Space,
        expected_components: usize,
        got_space: Space,
        got_components: usize,
    },
    #[error("density has {got} coefficients, the mesh needs {expected}")]
    WrongLength { expected: usize, got: usize },
}

/// Coefficients of a scalar or vector boundary element function.
///
/// Vector densities are stored component-major: coefficient `c · dofs + i`
/// belongs to component `c` of basis function `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub space: Space,
    pub components: usize,
    pub coeffs: Vec<C64>,
}

impl Density {
    pub fn zeros(space: Space, components: usize, d: &impl Discretization) -> Self {
        Density {
            space,
            components,
            coeffs: vec![C64::new(0.0, 0.0); space.dofs(d) * components],
        }
    }

    pub fn scalar(space: Space, coeffs: Vec<C64>) -> Self {
        Density {
            space,
            components: 1,
            coeffs,
        }
    }

    /// Builds a density from per-component coefficient slices.
    pub fn from_components(space: Space, parts: &[Vec<C64>]) -> Self {
        let mut coeffs = Vec::new();
        for p in parts {
            coeffs.extend_from_slice(p);
        }
        Density {
            space,
            components: parts.len(),
            coeffs,
        }
    }

    /// Samples `f` at vertices (P1) or element centroids (P0) of a surface.
    pub fn interpolate(
        space: Space,
        mesh: &crate::mesh::SurfaceMesh,
        components: usize,
        f: impl Fn(Vec3) -> Vec<C64>,
    ) -> Self {
        let points: Vec<Vec3> = match space {
            Space::P0 => mesh.frames().iter().map(|fr| fr.centroid).collect(),
            Space::P1 => mesh.vertices().to_vec(),
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

    pub fn desc(&self) -> SpaceDesc {
        SpaceDesc::new(self.space, self.components)
    }

    pub fn dofs(&self) -> usize {
        self.coeffs.len() / self.components.max(1)
    }

    pub fn component(&self, c: usize) -> &[C64] {
        let n = self.dofs();
        &self.coeffs[c * n..(c + 1) * n]
    }

    /// Checks space, component count and length against a mesh.
    pub fn expect(
        &self,
        space: Space,
        components: usize,
        d: &impl Discretization,
    ) -> Result<(), SpaceError> {
        if self.space != space || self.components != components {
            return Err(SpaceError::WrongSpace {
                expected_space: space,
                expected_components: components,
                got_space: self.space,
                got_components: self.components,
            });
        }
        let expected = space.dofs(d) * components;
        if self.coeffs.len() != expected {
            return Err(SpaceError::WrongLength {
                expected,
                got: self.coeffs.len(),
            });
        }
        Ok(())
    }
}

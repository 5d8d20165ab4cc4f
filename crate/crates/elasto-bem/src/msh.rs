//! Reader for the ASCII Gmsh 2.2 subset: `$MeshFormat`, `$Nodes` and
//! 3-node triangles in `$Elements`. Other sections are skipped.

use std::collections::HashMap;
use std::path::Path;

use elasto_bem_core::geometry::Vec3;
use elasto_bem_core::mesh::{MeshError, SurfaceMesh};

#[derive(Debug, thiserror::Error)]
pub enum MshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported element type {kind}")]
    UnsupportedElement { line: usize, kind: u32 },
    #[error("mesh has no triangles")]
    Empty,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Triangulation read from a file, with the physical tag of each triangle.
#[derive(Clone, Debug)]
pub struct MshMesh {
    pub mesh: SurfaceMesh,
    pub physical: Vec<i64>,
    /// Node tag of every mesh vertex, in vertex order.
    pub node_tags: Vec<u64>,
}

// element types that carry no surface and are skipped: line, point
const SKIPPED: [u32; 2] = [1, 15];
const TRIANGLE: u32 = 2;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some(t);
            }
        }
        None
    }

    fn need(&mut self, what: &str) -> Result<&'a str, MshError> {
        self.next().ok_or_else(|| MshError::Parse {
            line: self.last,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, msg: impl Into<String>) -> MshError {
        MshError::Parse {
            line: self.last,
            msg: msg.into(),
        }
    }
}

fn field<T: std::str::FromStr>(lines: &Lines, tok: Option<&str>, what: &str) -> Result<T, MshError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("bad {what}")))
}

pub fn parse_msh(text: &str) -> Result<MshMesh, MshError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut format_seen = false;
    let mut nodes: HashMap<u64, Vec3> = HashMap::new();
    let mut node_order: Vec<u64> = Vec::new();
    let mut tris: Vec<[u64; 3]> = Vec::new();
    let mut physical = Vec::new();
    while let Some(head) = lines.next() {
        match head {
            "$MeshFormat" => {
                let l = lines.need("format line")?;
                let mut it = l.split_whitespace();
                let (v, ft, ds) = (it.next(), it.next(), it.next());
                if v != Some("2.2") || ft != Some("0") || ds != Some("8") {
                    return Err(lines.err(format!("unsupported format '{l}', expected '2.2 0 8'")));
                }
                if lines.need("$EndMeshFormat")? != "$EndMeshFormat" {
                    return Err(lines.err("expected $EndMeshFormat"));
                }
                format_seen = true;
            }
            "$Nodes" => {
                if !format_seen {
                    return Err(lines.err("$Nodes before $MeshFormat"));
                }
                let l = lines.need("node count")?;
                let n: usize = field(&lines, Some(l), "node count")?;
                for _ in 0..n {
                    let l = lines.need("node")?;
                    let mut it = l.split_whitespace();
                    let tag: u64 = field(&lines, it.next(), "node tag")?;
                    let x: f64 = field(&lines, it.next(), "x coordinate")?;
                    let y: f64 = field(&lines, it.next(), "y coordinate")?;
                    let z: f64 = field(&lines, it.next(), "z coordinate")?;
                    if nodes.insert(tag, Vec3::new(x, y, z)).is_some() {
                        return Err(lines.err(format!("duplicate node {tag}")));
                    }
                    node_order.push(tag);
                }
                if lines.need("$EndNodes")? != "$EndNodes" {
                    return Err(lines.err("node count does not match, expected $EndNodes"));
                }
            }
            "$Elements" => {
                if !format_seen {
                    return Err(lines.err("$Elements before $MeshFormat"));
                }
                let l = lines.need("element count")?;
                let n: usize = field(&lines, Some(l), "element count")?;
                for _ in 0..n {
                    let l = lines.need("element")?;
                    let mut it = l.split_whitespace();
                    let _tag: u64 = field(&lines, it.next(), "element tag")?;
                    let kind: u32 = field(&lines, it.next(), "element type")?;
                    let ntags: usize = field(&lines, it.next(), "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(field::<i64>(&lines, it.next(), "element tag")?);
                    }
                    if SKIPPED.contains(&kind) {
                        continue;
                    }
                    if kind != TRIANGLE {
                        return Err(MshError::UnsupportedElement {
                            line: lines.last,
                            kind,
                        });
                    }
                    let mut t = [0u64; 3];
                    for v in t.iter_mut() {
                        *v = field(&lines, it.next(), "triangle node")?;
                    }
                    if it.next().is_some() {
                        return Err(lines.err("trailing data after triangle nodes"));
                    }
                    tris.push(t);
                    physical.push(tags.first().copied().unwrap_or(0));
                }
                if lines.need("$EndElements")? != "$EndElements" {
                    return Err(lines.err("element count does not match, expected $EndElements"));
                }
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                loop {
                    if lines.need(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(lines.err(format!("unexpected line '{other}'"))),
        }
    }
    if !format_seen {
        return Err(MshError::Parse {
            line: lines.last,
            msg: "missing $MeshFormat".into(),
        });
    }
    if tris.is_empty() {
        return Err(MshError::Empty);
    }
    // keep referenced nodes in file order; vertices are identified by tag only
    let used: std::collections::HashSet<u64> = tris.iter().flatten().copied().collect();
    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    let mut node_tags = Vec::new();
    for tag in node_order {
        if used.contains(&tag) {
            index.insert(tag, vertices.len());
            vertices.push(nodes[&tag]);
            node_tags.push(tag);
        }
    }
    let mut triangles = Vec::with_capacity(tris.len());
    for (e, t) in tris.iter().enumerate() {
        let mut out = [0; 3];
        for k in 0..3 {
            out[k] = *index.get(&t[k]).ok_or(MshError::Mesh(MeshError::MissingVertex {
                element: e,
                vertex: t[k] as usize,
            }))?;
        }
        triangles.push(out);
    }
    Ok(MshMesh {
        mesh: SurfaceMesh::new(vertices, triangles)?,
        physical,
        node_tags,
    })
}

pub fn load_msh(path: impl AsRef<Path>) -> Result<SurfaceMesh, MshError> {
    let p = path.as_ref();
    let text = std::fs::read_to_string(p).map_err(|source| MshError::Io {
        path: p.display().to_string(),
        source,
    })?;
    Ok(parse_msh(&text)?.mesh)
}

/// Writes a mesh in the same subset, one physical group.
pub fn write_msh(mesh: &SurfaceMesh) -> String {
    let mut s = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    s += &format!("{}\n", mesh.vertices().len());
    for (i, v) in mesh.vertices().iter().enumerate() {
        s += &format!("{} {:e} {:e} {:e}\n", i + 1, v.x, v.y, v.z);
    }
    s += &format!("$EndNodes\n$Elements\n{}\n", mesh.triangles().len());
    for (e, t) in mesh.triangles().iter().enumerate() {
        s += &format!("{} 2 2 1 1 {} {} {}\n", e + 1, t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s += "$EndElements\n";
    s
}

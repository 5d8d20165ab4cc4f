use elasto_bem::msh::{load_msh, parse_msh, write_msh, MshError};
use elasto_bem_core::mesh::SurfaceMesh;

const PATCH: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 2 2 7 1 1 2 3
2 2 2 7 1 1 3 4
$EndElements
";

#[test]
fn two_triangle_patch() {
    let m = parse_msh(PATCH).unwrap();
    assert_eq!(m.mesh.vertices().len(), 4);
    assert_eq!(m.mesh.triangles().len(), 2);
    assert!(!m.mesh.is_closed());
    assert_eq!(m.physical, vec![7, 7]);
    assert_eq!(m.node_tags, vec![1, 2, 3, 4]);
    assert!((m.mesh.total_area() - 1.0).abs() < 1e-15);
}

#[test]
fn icosahedron_round_trip() {
    let ico = SurfaceMesh::icosphere(0);
    let m = parse_msh(&write_msh(&ico)).unwrap().mesh;
    assert_eq!(m.vertices().len(), 12);
    assert_eq!(m.triangles().len(), 20);
    assert!(m.is_closed());
    assert_eq!(m.triangles(), ico.triangles());
    for (a, b) in m.vertices().iter().zip(ico.vertices()) {
        assert!(a.distance(*b) < 1e-15);
    }
}

#[test]
fn quadrilateral_is_rejected() {
    let text = PATCH.replace("2\n1 2 2 7 1 1 2 3\n2 2 2 7 1 1 3 4", "1\n1 3 2 7 1 1 2 3 4");
    assert!(matches!(parse_msh(&text), Err(MshError::UnsupportedElement { kind: 3, .. })));
}

#[test]
fn lines_points_and_unknown_sections_are_skipped() {
    let text = PATCH
        .replace(
            "2\n1 2 2 7 1 1 2 3",
            "4\n9 15 2 1 1 1\n8 1 2 1 1 1 2\n1 2 2 7 1 1 2 3",
        )
        .replace("$Nodes", "$PhysicalNames\n1\n2 7 \"plate\"\n$EndPhysicalNames\n$Nodes");
    let m = parse_msh(&text).unwrap();
    assert_eq!(m.mesh.triangles().len(), 2);
}

#[test]
fn unreferenced_nodes_are_dropped() {
    let text = PATCH.replace("4\n1 0 0 0", "5\n9 5 5 5\n1 0 0 0");
    let m = parse_msh(&text).unwrap();
    assert_eq!(m.mesh.vertices().len(), 4);
    assert_eq!(m.node_tags, vec![1, 2, 3, 4]);
}

#[test]
fn malformed_files() {
    let wrong_version = PATCH.replace("2.2 0 8", "4.1 0 8");
    assert!(matches!(parse_msh(&wrong_version), Err(MshError::Parse { line: 2, .. })));
    let binary = PATCH.replace("2.2 0 8", "2.2 1 8");
    assert!(parse_msh(&binary).is_err());
    let missing = PATCH.replace("2 2 2 7 1 1 3 4", "2 2 2 7 1 1 3 40");
    assert!(matches!(parse_msh(&missing), Err(MshError::Mesh(_))));
    let short = PATCH.replace("4\n1 0 0 0", "5\n1 0 0 0");
    assert!(matches!(parse_msh(&short), Err(MshError::Parse { .. })));
    let bad_coord = PATCH.replace("2 1 0 0", "2 1 x 0");
    assert!(matches!(parse_msh(&bad_coord), Err(MshError::Parse { line: 7, .. })));
    let no_format = PATCH.replace("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n", "");
    assert!(parse_msh(&no_format).is_err());
    let no_triangles = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0 0\n$EndNodes\n";
    assert!(matches!(parse_msh(no_triangles), Err(MshError::Empty)));
    let degenerate = PATCH.replace("3 1 1 0", "3 2 0 0");
    assert!(matches!(parse_msh(&degenerate), Err(MshError::Mesh(_))));
}

#[test]
fn load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("patch.msh");
    std::fs::write(&path, PATCH).unwrap();
    assert_eq!(load_msh(&path).unwrap().triangles().len(), 2);
    assert!(matches!(load_msh(dir.path().join("none.msh")), Err(MshError::Io { .. })));
}

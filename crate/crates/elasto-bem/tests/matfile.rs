use elasto_bem::matfile::*;
use elasto_bem_core::elastic2d::{assemble_antiplane, AntiplaneOp, CurveQuad};
use elasto_bem_core::kernels::WaveParams;
use elasto_bem_core::mesh::Curve2D;
use elasto_bem_core::space::Space;
use elasto_bem_core::C64;

#[test]
fn encode_layout() {
    let data = [C64::new(1.0, -2.0), C64::new(0.5, 0.25)];
    let bytes = encode(1, 2, &data);
    assert_eq!(&bytes[..8], b"EBEMMAT1");
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 1);
    assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 1.0);
    assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()), -2.0);
    assert_eq!(bytes.len(), 32 + 32);
    assert_eq!(decode(&bytes).unwrap(), (1, 2, data.to_vec()));
}

#[test]
fn decode_errors() {
    let bytes = encode(2, 2, &[C64::new(1.0, 0.0); 4]);
    assert!(matches!(decode(&bytes[..40]), Err(MatError::Truncated { expected: 64, got: 8 })));
    assert!(matches!(decode(b"short"), Err(MatError::BadMagic)));
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(matches!(decode(&wrong), Err(MatError::BadMagic)));
    let mut flag = bytes.clone();
    flag[24] = 2;
    assert!(matches!(decode(&flag), Err(MatError::Flag(2))));
}

#[test]
fn operator_round_trip_with_sidecar() {
    let curve = Curve2D::regular_polygon(12, 1.0).unwrap();
    let op = assemble_antiplane(
        &curve,
        &WaveParams::default(),
        AntiplaneOp::TS3(elasto_bem_core::dense::Side::Exterior),
        Space::P0,
        Space::P1,
        &CurveQuad::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ts.ebem");
    write_matrix(&path, &op).unwrap();
    let (rows, cols, data) = read_matrix(&path).unwrap();
    assert_eq!((rows, cols), (op.rows, op.cols));
    assert_eq!(data, op.data);
    let side = read_sidecar(&path).unwrap();
    assert_eq!(side, Sidecar::of(&op));
    assert_eq!(side.trial_space, "P0");
    assert_eq!(side.test_space, "P1");
    assert_eq!(side.side.as_deref(), Some("exterior"));
    assert!(matches!(read_matrix(&dir.path().join("none.ebem")), Err(MatError::Io { .. })));
}

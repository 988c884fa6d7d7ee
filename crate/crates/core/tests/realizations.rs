//! Loading and validating user-supplied matrix realizations, and
//! checking that canonical coefficients do not depend on the chosen
//! realization.

use std::path::Path;
use std::sync::Arc;

use num::BigRational;
use opercal::curve::Chart;
use opercal::io::load_realization;
use opercal::liealg::LieError;
use opercal::matrix::{embed_q_matrix, Mat};
use opercal::oper::{canonicalize, CanonicalizeOptions, OperConnection};
use opercal::poly::Poly;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn adjoint_sl2_realization_loads() {
    let lie = load_realization(&fixture("sl2_adjoint.json")).unwrap();
    assert_eq!(lie.size(), 3);
    assert_eq!(lie.rank(), 1);
    assert_eq!(lie.dim(), 3);
    assert_eq!(lie.vcan_degrees(), &[1]);
    assert_eq!(lie.vcan()[0], *lie.e0());
}

#[test]
fn sp4_realization_has_exponents_one_three() {
    let lie = load_realization(&fixture("sp4.json")).unwrap();
    assert_eq!(lie.size(), 4);
    assert_eq!(lie.rank(), 2);
    assert_eq!(lie.dim(), 10);
    // the exponents of type C2
    assert_eq!(lie.vcan_degrees(), &[1, 3]);
    // triple axioms hold for the loaded data
    assert_eq!(lie.e0().commutator(lie.f0()), *lie.h0());
    let two = BigRational::from_integer(2.into());
    assert_eq!(lie.h0().commutator(lie.e0()), lie.e0().scale(&two));
}

#[test]
fn broken_realization_reports_the_invariant() {
    // damaging a generator must produce a named invariant failure
    let text = std::fs::read_to_string(fixture("sp4.json")).unwrap();
    let broken = text.replacen("\"-1\"", "\"-2\"", 1);
    let err = opercal::io::realization_from_str(&broken).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("invariant"), "unexpected error: {msg}");
}

#[test]
fn canonical_coefficients_agree_across_realizations() {
    // the same abstract sl2-oper, written in the standard and in the
    // adjoint realization, has the same canonical coefficient
    let standard = Arc::new(opercal::liealg::LieRealization::build_sl(2).unwrap());
    let adjoint = Arc::new(load_realization(&fixture("sl2_adjoint.json")).unwrap());
    let chart = Chart::new("t", Poly::var()).unwrap();
    let ring = chart.ring().clone();

    // abstract data: A = u f0 + p h0 + q e0 with chart functions u, p, q
    let u = ring.element(Poly::from_i64_coeffs(&[0, 3]), Poly::one()).unwrap();
    let p = ring.element(Poly::from_i64_coeffs(&[1, 1]), Poly::one()).unwrap();
    let q = ring
        .element(Poly::from_i64_coeffs(&[2]), Poly::from_i64_coeffs(&[0, 1]))
        .unwrap();

    let mut coeffs = Vec::new();
    for lie in [&standard, &adjoint] {
        let mat = embed_q_matrix(&ring, lie.f0())
            .scale(&u)
            .add(&embed_q_matrix(&ring, lie.h0()).scale(&p))
            .add(&embed_q_matrix(&ring, lie.e0()).scale(&q));
        let conn = OperConnection::new(lie.clone(), chart.clone(), "t", mat).unwrap();
        let (canon, g) = canonicalize(&conn, &CanonicalizeOptions::default()).unwrap();
        let gauged = opercal::oper::gauge_action(&g, &conn).unwrap();
        assert_eq!(gauged.matrix(), canon.to_connection().matrix());
        coeffs.push(canon.coeffs().to_vec());
    }
    assert_eq!(coeffs[0], coeffs[1]);
}

#[test]
fn sp4_oper_canonicalizes() {
    let lie = Arc::new(load_realization(&fixture("sp4.json")).unwrap());
    let chart = Chart::new("t", Poly::var()).unwrap();
    let ring = chart.ring().clone();
    // unit scalings on both simple roots plus degree >= 0 noise
    let u1 = ring.element(Poly::from_i64_coeffs(&[0, 2]), Poly::one()).unwrap();
    let u2 = ring
        .element(Poly::from_i64_coeffs(&[5]), Poly::from_i64_coeffs(&[0, 1]))
        .unwrap();
    let noise = ring.element(Poly::from_i64_coeffs(&[1, 0, 1]), Poly::one()).unwrap();
    let mut mat = Mat::zero(ring.clone(), 4, 4);
    mat = mat
        .add(&embed_q_matrix(&ring, &lie.chevalley_f()[0]).scale(&u1))
        .add(&embed_q_matrix(&ring, &lie.chevalley_f()[1]).scale(&u2))
        .add(&embed_q_matrix(&ring, lie.h0()).scale(&noise))
        .add(&embed_q_matrix(&ring, lie.e0()).scale(&u2));
    let conn = OperConnection::new(lie.clone(), chart.clone(), "t", mat).unwrap();
    let (canon, g) = canonicalize(&conn, &CanonicalizeOptions::default()).unwrap();
    assert_eq!(canon.coeffs().len(), 2);
    let gauged = opercal::oper::gauge_action(&g, &conn).unwrap();
    assert_eq!(gauged.matrix(), canon.to_connection().matrix());
}

#[test]
fn torus_obstruction_error_exists() {
    // requesting a non-unit scaling reports a torus obstruction
    let lie = opercal::liealg::LieRealization::build_sl(2).unwrap();
    let chart = Chart::new("t", Poly::one()).unwrap();
    let ring = chart.ring().clone();
    let t = ring.var_elem();
    let err = lie.torus_element(&ring, &[t]).unwrap_err();
    assert!(matches!(err, LieError::TorusObstruction(_)));
}

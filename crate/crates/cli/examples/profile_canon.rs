// quick profile: one random-ish sl3 canonicalization
use std::sync::Arc;
use std::time::Instant;
use opercal::curve::Chart;
use opercal::liealg::LieRealization;
use opercal::matrix::{embed_q_matrix, Mat};
use opercal::oper::{canonicalize, gauge_action, CanonicalizeOptions, OperConnection};
use opercal::poly::Poly;
use opercal::ring::Ring;
use num::BigRational;

fn main() {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let chart = Chart::new("t", Poly::var()).unwrap();
    let ring = chart.ring().clone();
    let lie = Arc::new(LieRealization::build_sl(3).unwrap());
    let rf = |num: Vec<BigRational>, den_pow: usize| {
        ring.element(Poly::new(num), Poly::monomial(BigRational::new(1.into(), 1.into()), den_pow)).unwrap()
    };
    let mut mat = Mat::zero(ring.clone(), 3, 3);
    mat = mat.add(&embed_q_matrix(&ring, &lie.chevalley_f()[0]).scale(&rf(vec![q(3,2)], 2)));
    mat = mat.add(&embed_q_matrix(&ring, &lie.chevalley_f()[1]).scale(&rf(vec![q(0,1), q(0,1), q(7,3)], 0)));
    for (b, &deg) in lie.basis().iter().zip(lie.degrees()) {
        if deg >= 0 {
            mat = mat.add(&embed_q_matrix(&ring, b).scale(&rf(vec![q(5,4), q(-3,2), q(1,3), q(9,2)], 2)));
        }
    }
    let t0 = Instant::now();
    let conn = OperConnection::new(lie.clone(), chart.clone(), "t", mat).unwrap();
    println!("validate: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let (canon, g) = canonicalize(&conn, &CanonicalizeOptions::default()).unwrap();
    println!("canonicalize: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let gauged = gauge_action(&g, &conn).unwrap();
    assert_eq!(gauged.matrix(), canon.to_connection().matrix());
    println!("verify: {:?}", t0.elapsed());
}

//! Connections on trivialized charts and their canonical forms.
//!
//! A connection is written `∇ = d + A dt` with `A` a matrix of chart
//! functions valued in a fixed Lie algebra realization and `t` a named
//! coordinate of the chart. The gauge action is
//!
//! ```text
//!     g · A = Ad_g(A) − (∂_t g) g⁻¹
//! ```
//!
//! (a left action). Opers are connections whose matrix sits in degrees
//! ≥ −1 of the principal grading with unit components on the simple
//! negative roots; every oper has a unique gauge representative
//! `d + (f0 + Σ ωʲ xⱼ) dt` with coefficients along the centralizer
//! basis. Coordinate changes of the canonical coefficients follow the
//! Schwarzian law, checked here against an independent
//! rewrite-and-canonicalize path.

use std::sync::Arc;

use num::BigRational;
use thiserror::Error;

use crate::curve::{taylor_cocycle_universal, Chart, ChartRing, CurveError, RatFunc};
use crate::jetgroup::JetError;
use crate::liealg::{
    exp_nilpotent, jet3_to_b2ad, GroupElement, LieError, LieRealization,
};
use crate::matrix::{embed_q_matrix, Mat};
use crate::ring::{Ring, RingError};

#[derive(Debug, Error)]
pub enum OperError {
    #[error("gauge element and connection live on different charts")]
    ChartMismatch,
    #[error("matrix entry ({row}, {col}) does not lie in the chart ring")]
    EntryOutsideChartRing { row: usize, col: usize },
    #[error("matrix is not valued in the Lie algebra ({context})")]
    NotLieValued { context: String },
    #[error("matrix size {got} does not match the realization size {expected}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("not an oper: {}", failures.join("; "))]
    NotAnOper { failures: Vec<String> },
    #[error("canonical form violation: {0}")]
    CanonicalForm(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A trivialized connection `d + A dt` on a chart.
#[derive(Debug, Clone)]
pub struct OperConnection {
    lie: Arc<LieRealization>,
    chart: Chart,
    coord: String,
    mat: Mat<ChartRing>,
}

impl OperConnection {
    pub fn new(
        lie: Arc<LieRealization>,
        chart: Chart,
        coord: &str,
        mat: Mat<ChartRing>,
    ) -> Result<Self, OperError> {
        if mat.nrows() != lie.size() || mat.ncols() != lie.size() {
            return Err(OperError::SizeMismatch {
                got: mat.nrows(),
                expected: lie.size(),
            });
        }
        if *mat.ring() != *chart.ring() {
            return Err(OperError::ChartMismatch);
        }
        chart.coordinate(coord)?;
        let ring = chart.ring();
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                if !ring.contains(mat.at(i, j)) {
                    return Err(OperError::EntryOutsideChartRing { row: i, col: j });
                }
            }
        }
        if lie.coords_in_basis(ring, &mat).is_none() {
            return Err(OperError::NotLieValued {
                context: "connection matrix".to_string(),
            });
        }
        Ok(OperConnection { lie, chart, coord: coord.to_string(), mat })
    }

    pub fn lie(&self) -> &Arc<LieRealization> {
        &self.lie
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coord(&self) -> &str {
        &self.coord
    }

    pub fn matrix(&self) -> &Mat<ChartRing> {
        &self.mat
    }

    /// Pull the connection back along the double cover `v = w²` of its
    /// chart. Available when the chart variable is a unit.
    pub fn pull_back_quadratic(&self, new_var: &str) -> Result<OperConnection, OperError> {
        let cover = self.chart.quadratic_cover(new_var)?;
        let ring = cover.ring().clone();
        let sq = crate::poly::Poly::monomial(num::One::one(), 2);
        let mat = self.mat.transport(ring.clone(), |f| {
            f.substitute(&ring, &sq).expect("denominator stays nonzero")
        });
        OperConnection::new(self.lie.clone(), cover, &self.coord, mat)
    }
}

/// Result of the oper test, with one message per violated condition.
#[derive(Debug, Clone)]
pub struct OperCheck {
    pub is_oper: bool,
    pub failures: Vec<String>,
}

/// The gauge action `g·A = Ad_g(A) − (∂_t g) g⁻¹`, differentiating with
/// respect to the connection's coordinate. The result is checked to be
/// Lie-algebra valued after removing the scalar part contributed by the
/// unit-scalar ambiguity of `g`.
pub fn gauge_action(
    g: &GroupElement<ChartRing>,
    conn: &OperConnection,
) -> Result<OperConnection, OperError> {
    let ring = conn.chart.ring().clone();
    if *g.ring() != ring {
        return Err(OperError::ChartMismatch);
    }
    let g_inv = g.inverse();
    let t_fun = conn.chart.coordinate(&conn.coord)?.clone();
    let w_t = conn
        .chart
        .coordinate_witness(&t_fun)
        .ok_or_else(|| CurveError::NotACoordinate {
            name: conn.coord.clone(),
            chart: ring.name(),
            reason: "derivative is not a unit".to_string(),
        })?;
    let dg = g.matrix().map(|e| e.derive().mul(&w_t));
    let adjoint = g.matrix().mul(&conn.mat).mul(g_inv.matrix());
    let mut out = adjoint.sub(&dg.mul(g_inv.matrix()));
    // quotient by scalars: a unit-scalar rescaling of g shifts the
    // derivative term by a multiple of the identity only
    let n = out.nrows();
    let trace = out.trace();
    let shift = ring
        .exact_div(&trace, &ring.from_i64(n as i64))
        .expect("matrix size is nonzero");
    for i in 0..n {
        let v = ring.sub(out.at(i, i), &shift);
        out.set(i, i, v);
    }
    if conn.lie.coords_in_basis(&ring, &out).is_none() {
        return Err(OperError::NotLieValued {
            context: "gauge-transformed matrix".to_string(),
        });
    }
    Ok(OperConnection {
        lie: conn.lie.clone(),
        chart: conn.chart.clone(),
        coord: conn.coord.clone(),
        mat: out,
    })
}

/// The oper condition: grading components of `A` vanish below degree
/// −1 and every simple negative root component is a unit of the chart
/// ring. Failures are reported by name.
pub fn is_oper(conn: &OperConnection) -> OperCheck {
    let ring = conn.chart.ring();
    let comps = conn
        .lie
        .grading_decompose(ring, &conn.mat)
        .expect("connection matrix is Lie valued by construction");
    let mut failures = Vec::new();
    let mut deg_minus_one = None;
    for (deg, comp) in &comps {
        if *deg < -1 {
            failures.push(format!("component in degree {deg} is nonzero"));
        }
        if *deg == -1 {
            deg_minus_one = Some(comp.clone());
        }
    }
    let coords = match deg_minus_one {
        Some(comp) => conn
            .lie
            .simple_negative_coords(ring, &comp)
            .expect("degree -1 part lies in the span of the simple negative roots"),
        None => vec![ring.zero(); conn.lie.rank()],
    };
    for (i, u) in coords.iter().enumerate() {
        if !ring.is_unit(u) {
            failures.push(format!(
                "component at simple root {} is not a unit of the chart ring: {}",
                i + 1,
                ring.display(u)
            ));
        }
    }
    OperCheck { is_oper: failures.is_empty(), failures }
}

/// The canonical representative `d + (f0 + Σ ωʲ xⱼ) dt` of an oper.
#[derive(Debug, Clone)]
pub struct CanonicalOper {
    lie: Arc<LieRealization>,
    chart: Chart,
    coord: String,
    coeffs: Vec<RatFunc>,
}

impl CanonicalOper {
    pub fn new(
        lie: Arc<LieRealization>,
        chart: Chart,
        coord: &str,
        coeffs: Vec<RatFunc>,
    ) -> Result<Self, OperError> {
        if coeffs.len() != lie.rank() {
            return Err(OperError::CanonicalForm(format!(
                "expected {} coefficients, got {}",
                lie.rank(),
                coeffs.len()
            )));
        }
        chart.coordinate(coord)?;
        Ok(CanonicalOper { lie, chart, coord: coord.to_string(), coeffs })
    }

    pub fn lie(&self) -> &Arc<LieRealization> {
        &self.lie
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coord(&self) -> &str {
        &self.coord
    }

    /// Coefficients along the centralizer basis, lowest degree first.
    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    /// The connection `d + (f0 + Σ ωʲ xⱼ) dt`.
    pub fn to_connection(&self) -> OperConnection {
        let ring = self.chart.ring().clone();
        let mut mat = embed_q_matrix(&ring, self.lie.f0());
        for (w, x) in self.coeffs.iter().zip(self.lie.vcan()) {
            mat = mat.add(&embed_q_matrix(&ring, x).scale(w));
        }
        OperConnection::new(self.lie.clone(), self.chart.clone(), &self.coord, mat)
            .expect("canonical matrices are valid connections")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalizeOptions {
    /// Retry over the quadratic chart cover `v = w²` when the torus
    /// normalization step reports an obstruction.
    pub allow_quadratic_extension: bool,
}

/// Gauge an oper into its canonical form. Returns the canonical
/// coefficients together with the gauge element `g` (a product of a
/// torus element and unipotent exponentials, so `g` lies in the Borel
/// subgroup) with `gauge_action(g, ∇)` equal to the canonical
/// connection exactly.
pub fn canonicalize(
    conn: &OperConnection,
    opts: &CanonicalizeOptions,
) -> Result<(CanonicalOper, GroupElement<ChartRing>), OperError> {
    match canonicalize_inner(conn) {
        Err(OperError::Lie(LieError::TorusObstruction(detail))) => {
            if opts.allow_quadratic_extension {
                let var = conn.chart.var().to_string();
                let covered = conn.pull_back_quadratic(&format!("sqrt_{var}"))?;
                canonicalize_inner(&covered)
            } else {
                Err(OperError::Lie(LieError::TorusObstruction(format!(
                    "{detail}; pass allow_quadratic_extension to retry over the double cover"
                ))))
            }
        }
        other => other,
    }
}

fn canonicalize_inner(
    conn: &OperConnection,
) -> Result<(CanonicalOper, GroupElement<ChartRing>), OperError> {
    let check = is_oper(conn);
    if !check.is_oper {
        return Err(OperError::NotAnOper { failures: check.failures });
    }
    let ring = conn.chart.ring().clone();
    let lie = &conn.lie;

    // torus step: scale the simple negative components to 1
    let comps = lie.grading_decompose(&ring, &conn.mat)?;
    let minus_one = comps
        .iter()
        .find(|(d, _)| *d == -1)
        .map(|(_, c)| c.clone())
        .expect("oper condition provides a degree -1 part");
    let scalings = lie
        .simple_negative_coords(&ring, &minus_one)
        .expect("degree -1 part lies along the simple negative roots");
    let torus = lie.torus_element(&ring, &scalings)?;
    let mut current = gauge_action(&torus, conn)?;
    let mut total = torus;

    // graded unipotent elimination: at step k, remove from the degree
    // k-1 slot everything outside the centralizer basis
    for k in 1..=lie.max_degree() + 1 {
        let comps = lie.grading_decompose(&ring, &current.mat)?;
        let Some((_, defect)) = comps.iter().find(|(d, _)| *d == k - 1) else {
            continue;
        };
        let correction = lie.graded_step(&ring, k, defect.entries()).ok_or_else(|| {
            OperError::CanonicalForm(format!(
                "degree {} component cannot be split against ad f0 and the centralizer",
                k - 1
            ))
        })?;
        let Some(x) = correction else { continue };
        let g = GroupElement::new(exp_nilpotent(&x))?;
        current = gauge_action(&g, &current)?;
        total = g.mul(&total);
    }

    // read off the canonical coefficients
    let final_mat = current.mat.sub(&embed_q_matrix(&ring, lie.f0()));
    let coeffs = lie.vcan_coords(&ring, &final_mat).ok_or_else(|| {
        OperError::CanonicalForm("result is not of the form f0 + V_can".to_string())
    })?;
    let canonical = CanonicalOper::new(
        lie.clone(),
        conn.chart.clone(),
        &conn.coord,
        coeffs,
    )?;
    Ok((canonical, total))
}

/// The Schwarzian derivative `{t, s} = ∂³ₛt/∂ₛt − (3/2)(∂²ₛt/∂ₛt)²`.
pub fn schwarzian(chart: &Chart, t: &str, s: &str) -> Result<RatFunc, OperError> {
    let d = chart.higher_derivatives(t, s, 3)?;
    let r1 = d[0].recip().expect("coordinate derivative is a unit");
    let first = d[2].mul(&r1);
    let second = d[1].mul(&r1);
    let three_halves = BigRational::new(3.into(), 2.into());
    Ok(first.sub(&second.mul(&second).scale(&three_halves)))
}

/// Rewrite the canonical coefficients in another coordinate by the
/// closed-form law: the first coefficient picks up the Schwarzian,
///
/// ```text
///     ω^{s,1} = (∂ₛt)² ω^{t,1} − ½{t,s},
///     ω^{s,j} = (∂ₛt)^{dⱼ+1} ω^{t,j}   (j > 1),
/// ```
///
/// together with the connecting gauge element
/// `exp_e(∂²ₛt / 2∂ₛt) · ρ̌(∂ₛt)`.
pub fn change_coords(
    oper: &CanonicalOper,
    s: &str,
) -> Result<(CanonicalOper, GroupElement<ChartRing>), OperError> {
    let chart = &oper.chart;
    let ring = chart.ring().clone();
    let lie = &oper.lie;
    let t = &oper.coord;
    let derivs = chart.higher_derivatives(t, s, 2)?;
    let d1 = &derivs[0];
    let d2 = &derivs[1];
    let sch = schwarzian(chart, t, s)?;
    let mut coeffs = Vec::with_capacity(oper.coeffs.len());
    for (j, (w, &deg)) in oper.coeffs.iter().zip(lie.vcan_degrees()).enumerate() {
        let mut factor = ring.one();
        for _ in 0..deg + 1 {
            factor = factor.mul(d1);
        }
        let mut v = w.mul(&factor);
        if j == 0 {
            v = v.sub(&sch.scale(&BigRational::new(1.into(), 2.into())));
        }
        coeffs.push(v);
    }
    let b = d2.mul(
        &d1.scale(&BigRational::from_integer(2.into()))
            .recip()
            .expect("unit"),
    );
    let gauge = lie.exp_e(&ring, &b).mul(&lie.rho_check(&ring, d1)?);
    let out = CanonicalOper::new(lie.clone(), chart.clone(), s, coeffs)?;
    Ok((out, gauge))
}

/// Independent path for [`change_coords`]: multiply the connection
/// matrix by `∂ₛt` to re-express it against `ds`, then canonicalize in
/// the new coordinate. Agreement of the two paths validates the
/// Schwarzian law, the connecting gauge element, and the degree
/// convention at once.
pub fn change_coords_oracle(
    oper: &CanonicalOper,
    s: &str,
) -> Result<(CanonicalOper, GroupElement<ChartRing>), OperError> {
    let chart = &oper.chart;
    let derivs = chart.higher_derivatives(&oper.coord, s, 1)?;
    let conn = oper.to_connection();
    let rescaled = conn.mat.map(|e| e.mul(&derivs[0]));
    let conn_s = OperConnection::new(oper.lie.clone(), chart.clone(), s, rescaled)?;
    canonicalize(&conn_s, &CanonicalizeOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The image of the jet cocycle equals the group cocycle.
    Direct,
    /// The image of the jet cocycle equals the inverse group cocycle.
    Inverse,
}

/// Outcome of the transition-cocycle comparison on a two-coordinate
/// overlap.
#[derive(Debug, Clone)]
pub struct TorsorReport {
    pub holds: bool,
    pub orientation: Option<Orientation>,
    /// Whether the group cocycle is the inverse of the connecting gauge
    /// element of the opposite coordinate change, as the right/left
    /// torsor passage predicts.
    pub inverse_of_connecting_gauge: bool,
}

/// Compare the order-3 jet cocycle of a coordinate pair, pushed through
/// the 2×2 identification and the principal embedding, against the
/// group-side cocycle `exp_e(∂²tⱼ/2∂tⱼ) · ρ̌(∂tⱼ)` built from the same
/// coordinate data.
pub fn torsor_cocycle_check(
    chart: &Chart,
    lie: &Arc<LieRealization>,
    t_i: &str,
    t_j: &str,
) -> Result<TorsorReport, OperError> {
    let ring = chart.ring().clone();
    // group-side cocycle from the coordinate derivatives
    let derivs = chart.higher_derivatives(t_j, t_i, 2)?;
    let d1 = &derivs[0];
    let d2 = &derivs[1];
    let b = d2.mul(
        &d1.scale(&BigRational::from_integer(2.into()))
            .recip()
            .expect("unit"),
    );
    let group_side = lie.exp_e(&ring, &b).mul(&lie.rho_check(&ring, d1)?);

    // jet-side cocycle through the 2×2 identification
    let jet = taylor_cocycle_universal(chart, t_j, t_i, 3)?;
    let b2 = jet3_to_b2ad(&jet)?;
    let jet_side = lie.r_map(&ring, &b2)?;

    let orientation = if jet_side.eq_mod_scalar(&group_side) {
        Some(Orientation::Direct)
    } else if jet_side.eq_mod_scalar(&group_side.inverse()) {
        Some(Orientation::Inverse)
    } else {
        None
    };

    // the connecting gauge element of the coordinate change t_i -> t_j
    // uses the derivatives in the opposite direction; the cocycle is its
    // inverse
    let back = chart.higher_derivatives(t_i, t_j, 2)?;
    let bb = back[1].mul(
        &back[0]
            .scale(&BigRational::from_integer(2.into()))
            .recip()
            .expect("unit"),
    );
    let connecting = lie.exp_e(&ring, &bb).mul(&lie.rho_check(&ring, &back[0])?);
    let inverse_of_connecting_gauge = group_side
        .mul(&connecting)
        .eq_mod_scalar(&GroupElement::identity(ring.clone(), lie.size()));

    Ok(TorsorReport {
        holds: orientation.is_some(),
        orientation,
        inverse_of_connecting_gauge,
    })
}

/// The group-side transition cocycle of a coordinate pair, exposed for
/// composition tests on multi-coordinate overlaps.
pub fn transition_cocycle(
    chart: &Chart,
    lie: &Arc<LieRealization>,
    t_i: &str,
    t_j: &str,
) -> Result<GroupElement<ChartRing>, OperError> {
    let ring = chart.ring().clone();
    let derivs = chart.higher_derivatives(t_j, t_i, 2)?;
    let b = derivs[1].mul(
        &derivs[0]
            .scale(&BigRational::from_integer(2.into()))
            .recip()
            .expect("unit"),
    );
    Ok(lie.exp_e(&ring, &b).mul(&lie.rho_check(&ring, &derivs[0])?))
}

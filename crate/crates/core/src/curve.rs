//! Affine curve charts and coordinate-change cocycles.
//!
//! A chart is a localized polynomial ring ℚ[v, 1/q(v)] together with a
//! table of named coordinates: functions whose derivative is a unit of
//! the localized ring. The main export is the Taylor cocycle of a pair
//! of coordinates, the jet whose k-th coefficient is `(1/k!) ∂_t^k s`,
//! either with coefficients in the chart ring or evaluated at a rational
//! point of the chart.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::jetgroup::{AutJet, JetError, TruncSeries};
use crate::poly::Poly;
use crate::ring::{QRing, Ring, RingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: String, right: String },
    #[error("zero denominator in rational function")]
    ZeroDenominator,
    #[error("divisor `{divisor}` is not a unit of {ring}")]
    NonUnitDivisor { ring: String, divisor: String },
    #[error("`{name}` is not a coordinate on {chart}: {reason}")]
    NotACoordinate { name: String, chart: String, reason: String },
    #[error("unknown coordinate `{name}` on {chart}")]
    UnknownCoordinate { name: String, chart: String },
    #[error("coordinate `{name}` is already declared on {chart}")]
    DuplicateCoordinate { name: String, chart: String },
    #[error("point {point} lies outside the chart: q({point}) = 0")]
    PointOutsideChart { point: BigRational },
    #[error("cocycle order must be at least 2, got {got}")]
    OrderTooSmall { got: usize },
    #[error("quadratic chart extension unavailable: {0}")]
    QuadraticCover(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// The immutable core of a chart: variable name and localization
/// polynomial. Shared by every value that lives on the chart.
#[derive(Debug, PartialEq, Eq)]
struct ChartData {
    var: String,
    /// Monic localization polynomial; the chart ring inverts it.
    loc: Poly,
}

/// Cheap shared handle to a chart's ring data. Equality is structural.
#[derive(Debug, Clone)]
pub struct ChartRing(Arc<ChartData>);

impl PartialEq for ChartRing {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl ChartRing {
    pub fn var(&self) -> &str {
        &self.0.var
    }

    pub fn localization(&self) -> &Poly {
        &self.0.loc
    }

    /// True when every irreducible factor of `p` divides the
    /// localization polynomial, i.e. `p` divides a power of it up to a
    /// scalar.
    fn divides_localization_power(&self, p: &Poly) -> bool {
        if p.is_zero() {
            return false;
        }
        let mut d = p.monic();
        loop {
            if d.is_constant() {
                return true;
            }
            let g = d.gcd(&self.0.loc);
            if g.is_constant() {
                return false;
            }
            d = d.exact_div(&g).expect("gcd divides");
        }
    }

    /// Membership in the localized ring: the denominator's factors all
    /// divide the localization polynomial.
    pub fn contains(&self, f: &RatFunc) -> bool {
        f.chart == *self && self.divides_localization_power(&f.den)
    }

    pub fn element(&self, num: Poly, den: Poly) -> Result<RatFunc, CurveError> {
        RatFunc::new(self.clone(), num, den)
    }

    pub fn poly(&self, p: Poly) -> RatFunc {
        RatFunc::from_poly(self.clone(), p)
    }

    pub fn var_elem(&self) -> RatFunc {
        self.poly(Poly::var())
    }

    /// d/dv, the derivative with respect to the chart variable.
    pub fn derive(&self, f: &RatFunc) -> RatFunc {
        f.derive()
    }

    /// Ring division: the divisor must be a unit of the localized ring.
    pub fn div(&self, a: &RatFunc, b: &RatFunc) -> Result<RatFunc, CurveError> {
        if !self.is_unit(b) {
            return Err(CurveError::NonUnitDivisor {
                ring: self.name(),
                divisor: self.display(b),
            });
        }
        Ok(a.field_div(b).expect("unit is nonzero"))
    }
}

impl Ring for ChartRing {
    type Elem = RatFunc;

    fn name(&self) -> String {
        if self.0.loc.is_one() {
            format!("Q[{}]", self.0.var)
        } else {
            let q = self.0.loc.display(&self.0.var);
            let q = if self.0.loc.term_count() > 1 { format!("({q})") } else { q };
            format!("Q[{}, 1/{}]", self.0.var, q)
        }
    }

    fn zero(&self) -> RatFunc {
        self.poly(Poly::zero())
    }

    fn one(&self) -> RatFunc {
        self.poly(Poly::one())
    }

    fn is_zero(&self, a: &RatFunc) -> bool {
        a.num.is_zero()
    }

    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.add(b)
    }

    fn neg(&self, a: &RatFunc) -> RatFunc {
        a.neg()
    }

    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a.mul(b)
    }

    /// Unit test in the localized ring: numerator and denominator both
    /// consist of factors of the localization polynomial.
    fn is_unit(&self, a: &RatFunc) -> bool {
        !a.num.is_zero()
            && self.divides_localization_power(&a.num)
            && self.divides_localization_power(&a.den)
    }

    fn inv(&self, a: &RatFunc) -> Result<RatFunc, RingError> {
        if !self.is_unit(a) {
            return Err(RingError::NotAUnit {
                ring: self.name(),
                elem: self.display(a),
            });
        }
        Ok(a.recip().expect("unit is nonzero"))
    }

    fn exact_div(&self, a: &RatFunc, b: &RatFunc) -> Option<RatFunc> {
        a.field_div(b)
    }

    fn from_rational(&self, q: &BigRational) -> RatFunc {
        self.poly(Poly::constant(q.clone()))
    }

    fn display(&self, a: &RatFunc) -> String {
        a.display()
    }

    fn display_signed(&self, a: &RatFunc) -> (bool, String, bool) {
        // split the sign off single-term numerators only
        if a.num.term_count() == 1 && a.num.leading_coeff().is_negative() {
            let flipped = RatFunc {
                chart: a.chart.clone(),
                num: a.num.neg(),
                den: a.den.clone(),
            };
            let atomic = flipped.is_atomic();
            (true, flipped.display(), atomic)
        } else {
            (false, a.display(), a.is_atomic())
        }
    }
}

/// An exact rational function on a chart, reduced, with a monic
/// denominator so that equality is coefficientwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RatFunc {
    chart: ChartRing,
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(chart: ChartRing, num: Poly, den: Poly) -> Result<Self, CurveError> {
        if den.is_zero() {
            return Err(CurveError::ZeroDenominator);
        }
        Ok(Self::reduced(chart, num, den))
    }

    fn reduced(chart: ChartRing, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc { chart, num: Poly::zero(), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        let lc = den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFunc { chart, num, den }
    }

    pub fn from_poly(chart: ChartRing, p: Poly) -> Self {
        RatFunc { chart, num: p, den: Poly::one() }
    }

    pub fn chart(&self) -> &ChartRing {
        &self.chart
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn assert_same_chart(&self, other: &Self) {
        assert!(
            self.chart == other.chart,
            "rational functions on different charts: {} vs {}",
            self.chart.name(),
            other.chart.name()
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_chart(other);
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Self::reduced(self.chart.clone(), num, den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            chart: self.chart.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_chart(other);
        Self::reduced(
            self.chart.clone(),
            self.num.mul(&other.num),
            self.den.mul(&other.den),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::reduced(self.chart.clone(), self.num.scale(c), self.den.clone())
    }

    /// Reciprocal in the fraction field; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Self::reduced(
            self.chart.clone(),
            self.den.clone(),
            self.num.clone(),
        ))
    }

    /// Division in the fraction field; `None` for a zero divisor.
    pub fn field_div(&self, other: &Self) -> Option<Self> {
        self.assert_same_chart(other);
        Some(self.mul(&other.recip()?))
    }

    /// Derivative with respect to the chart variable.
    pub fn derive(&self) -> Self {
        let num = self
            .num
            .derive()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derive()));
        let den = self.den.mul(&self.den);
        Self::reduced(self.chart.clone(), num, den)
    }

    /// Evaluate at a rational value of the chart variable.
    pub fn eval(&self, x: &BigRational) -> Result<BigRational, CurveError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(CurveError::PointOutsideChart { point: x.clone() });
        }
        Ok(self.num.eval(x) / d)
    }

    /// Substitute a polynomial for the chart variable, landing on
    /// another chart.
    pub fn substitute(&self, target: &ChartRing, p: &Poly) -> Result<Self, CurveError> {
        let num = self.num.compose(p);
        let den = self.den.compose(p);
        RatFunc::new(target.clone(), num, den)
    }

    fn is_atomic(&self) -> bool {
        self.num.term_count() <= 1 && self.den.is_one()
    }

    pub fn display(&self) -> String {
        let var = self.chart.var();
        if self.den.is_one() {
            return self.num.display(var);
        }
        let n = self.num.display(var);
        let d = self.den.display(var);
        let n = if self.num.term_count() > 1 || n.contains('/') {
            format!("({n})")
        } else {
            n
        };
        let d = if self.den.term_count() > 1 || d.contains('/') {
            format!("({d})")
        } else {
            d
        };
        format!("{n}/{d}")
    }
}

/// A rational point of the chart: a value of the chart variable where
/// the localization polynomial does not vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct PointQ(BigRational);

impl PointQ {
    pub fn new(ring: &ChartRing, value: BigRational) -> Result<Self, CurveError> {
        if ring.localization().eval(&value).is_zero() {
            return Err(CurveError::PointOutsideChart { point: value });
        }
        Ok(PointQ(value))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

/// An affine chart with named coordinates. The chart variable is always
/// available as a coordinate under its own name.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    ring: ChartRing,
    coords: BTreeMap<String, RatFunc>,
}

impl Chart {
    /// A chart ℚ[var, 1/q]. The localization polynomial is normalized
    /// to monic; a constant (or empty) polynomial means no localization.
    pub fn new(var: &str, localization: Poly) -> Result<Self, CurveError> {
        let loc = if localization.is_zero() || localization.is_constant() {
            Poly::one()
        } else {
            localization.monic()
        };
        let ring = ChartRing(Arc::new(ChartData { var: var.to_string(), loc }));
        let mut coords = BTreeMap::new();
        coords.insert(var.to_string(), ring.var_elem());
        Ok(Chart { ring, coords })
    }

    pub fn ring(&self) -> &ChartRing {
        &self.ring
    }

    pub fn var(&self) -> &str {
        self.ring.var()
    }

    pub fn coordinate_names(&self) -> impl Iterator<Item = &str> {
        self.coords.keys().map(|s| s.as_str())
    }

    pub fn coordinate(&self, name: &str) -> Result<&RatFunc, CurveError> {
        self.coords.get(name).ok_or_else(|| CurveError::UnknownCoordinate {
            name: name.to_string(),
            chart: self.ring.name(),
        })
    }

    /// Declare a named coordinate. Fails unless the function lies in
    /// the chart ring and its derivative is a unit.
    pub fn add_coordinate(&mut self, name: &str, f: RatFunc) -> Result<(), CurveError> {
        if self.coords.contains_key(name) {
            return Err(CurveError::DuplicateCoordinate {
                name: name.to_string(),
                chart: self.ring.name(),
            });
        }
        if self.coordinate_witness(&f).is_none() {
            let reason = if !self.ring.contains(&f) {
                "not an element of the chart ring".to_string()
            } else {
                format!("derivative {} is not a unit", f.derive().display())
            };
            return Err(CurveError::NotACoordinate {
                name: name.to_string(),
                chart: self.ring.name(),
                reason,
            });
        }
        self.coords.insert(name.to_string(), f);
        Ok(())
    }

    /// Coordinate validity check: `Some(w)` with `w = (∂f)⁻¹` when `f`
    /// lies in the chart ring and its derivative is a unit, `None`
    /// otherwise.
    pub fn coordinate_witness(&self, f: &RatFunc) -> Option<RatFunc> {
        if !self.ring.contains(f) {
            return None;
        }
        let d = f.derive();
        if !self.ring.is_unit(&d) {
            return None;
        }
        Some(d.recip().expect("unit is nonzero"))
    }

    fn resolve(&self, name: &str) -> Result<(RatFunc, RatFunc), CurveError> {
        let f = self.coordinate(name)?.clone();
        let w = self.coordinate_witness(&f).ok_or_else(|| CurveError::NotACoordinate {
            name: name.to_string(),
            chart: self.ring.name(),
            reason: "derivative is not a unit".to_string(),
        })?;
        Ok((f, w))
    }

    /// The double cover with a new variable `w`, `v = w²`. Every
    /// coordinate of this chart transports to the cover; the cover
    /// exists only when the chart variable is a unit (the cover is
    /// unramified away from the origin).
    pub fn quadratic_cover(&self, new_var: &str) -> Result<Chart, CurveError> {
        if !self.ring.is_unit(&self.ring.var_elem()) {
            return Err(CurveError::QuadraticCover(format!(
                "the chart variable {} is not a unit of {}",
                self.var(),
                self.ring.name()
            )));
        }
        if self.coords.contains_key(new_var) {
            return Err(CurveError::DuplicateCoordinate {
                name: new_var.to_string(),
                chart: self.ring.name(),
            });
        }
        let sq = Poly::monomial(BigRational::one(), 2);
        let mut cover = Chart::new(new_var, self.ring.localization().compose(&sq))?;
        for (name, f) in &self.coords {
            let pulled = f.substitute(cover.ring(), &sq)?;
            cover.add_coordinate(name, pulled)?;
        }
        Ok(cover)
    }

    /// Iterated derivatives of `s` with respect to the coordinate `t`,
    /// through the chain rule `∂_t = (∂_v t)⁻¹ ∂_v`. Returns
    /// `[∂_t s, ∂_t² s, …]` up to the requested count.
    pub fn higher_derivatives(
        &self,
        s: &str,
        t: &str,
        count: usize,
    ) -> Result<Vec<RatFunc>, CurveError> {
        let (s_fun, _) = self.resolve(s)?;
        let (_, w_t) = self.resolve(t)?;
        let mut out = Vec::with_capacity(count);
        let mut cur = s_fun;
        for _ in 0..count {
            cur = cur.derive().mul(&w_t);
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// The universal Taylor cocycle of a pair of coordinates: the jet with
/// coefficients in the chart ring whose k-th coefficient is
/// `(1/k!) ∂_t^k s`.
pub fn taylor_cocycle_universal(
    chart: &Chart,
    s: &str,
    t: &str,
    order: usize,
) -> Result<AutJet<ChartRing>, CurveError> {
    if order < 2 {
        return Err(CurveError::OrderTooSmall { got: order });
    }
    let ring = chart.ring().clone();
    let derivs = chart.higher_derivatives(s, t, order - 1)?;
    let mut coeffs = Vec::with_capacity(order);
    coeffs.push(ring.zero());
    let mut factorial = BigRational::one();
    for (k, d) in derivs.into_iter().enumerate() {
        factorial = factorial * BigRational::from_integer((k as i64 + 1).into());
        coeffs.push(d.scale(&factorial.recip()));
    }
    Ok(AutJet::new(TruncSeries::new(ring, coeffs)?)?)
}

/// The Taylor cocycle evaluated at a rational point of the chart:
/// coefficientwise evaluation of the universal cocycle.
pub fn taylor_cocycle_at_point(
    chart: &Chart,
    s: &str,
    t: &str,
    point: &BigRational,
    order: usize,
) -> Result<AutJet<QRing>, CurveError> {
    let point = PointQ::new(chart.ring(), point.clone())?;
    let universal = taylor_cocycle_universal(chart, s, t, order)?;
    let evaluated = universal
        .series()
        .map_coeffs(QRing, |c| c.eval(point.value()))?;
    Ok(AutJet::new(evaluated)?)
}

/// Triple consistency of universal cocycles. With `T_ab` the cocycle
/// expanding `a` in powers of `b`, checks the identity
///
/// ```text
///     T_ut = T_st · T_us
/// ```
///
/// in the reversed-composition group product (apply `T_st` first). The
/// factor order was fixed once against a direct numerical expansion of
/// one coordinate in another and is enforced by the test suite.
pub fn cocycle_consistency(
    chart: &Chart,
    u: &str,
    s: &str,
    t: &str,
    order: usize,
) -> Result<bool, CurveError> {
    let t_ut = taylor_cocycle_universal(chart, u, t, order)?;
    let t_st = taylor_cocycle_universal(chart, s, t, order)?;
    let t_us = taylor_cocycle_universal(chart, u, s, order)?;
    Ok(t_ut == t_st.mul(&t_us)?)
}

//! Truncated power series and the groups of coordinate jets.
//!
//! A [`TruncSeries`] is a series over a coefficient ring cut off at a
//! fixed order `n` (coefficients of `z^0 … z^(n-1)`). An [`AutJet`] is a
//! truncated series with zero constant term and a unit linear term: an
//! invertible reparametrization jet. The group product follows the
//! reversed-composition convention
//!
//! ```text
//!     (a · b)(z) = b(a(z))
//! ```
//!
//! i.e. `a` is applied first. Every operation reports its result at the
//! minimum order of the inputs; nothing is padded silently.

use thiserror::Error;

use crate::ring::Ring;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("coefficient ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("composition requires a zero constant term in the inner series")]
    CompositionDomain,
    #[error("series order must be at least {min}, got {got}")]
    OrderTooSmall { min: usize, got: usize },
    #[error("not an automorphism jet: {reason}")]
    NotAutomorphismJet { reason: String },
    #[error("projection order {target} out of range 2..={order}")]
    ProjectionOutOfRange { target: usize, order: usize },
}

/// A power series truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries<R: Ring> {
    ring: R,
    coeffs: Vec<R::Elem>,
}

impl<R: Ring> TruncSeries<R> {
    /// A series from its coefficients; the order is the length.
    pub fn new(ring: R, coeffs: Vec<R::Elem>) -> Result<Self, JetError> {
        if coeffs.is_empty() {
            return Err(JetError::OrderTooSmall { min: 1, got: 0 });
        }
        Ok(TruncSeries { ring, coeffs })
    }

    pub fn zero(ring: R, order: usize) -> Self {
        let coeffs = (0..order).map(|_| ring.zero()).collect();
        TruncSeries { ring, coeffs }
    }

    /// The series `z`.
    pub fn variable(ring: R, order: usize) -> Result<Self, JetError> {
        if order < 2 {
            return Err(JetError::OrderTooSmall { min: 2, got: order });
        }
        let mut coeffs: Vec<R::Elem> = (0..order).map(|_| ring.zero()).collect();
        coeffs[1] = ring.one();
        Ok(TruncSeries { ring, coeffs })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> R::Elem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.coeffs
    }

    fn check_ring(&self, other: &Self) -> Result<(), JetError> {
        if self.ring != other.ring {
            return Err(JetError::RingMismatch {
                left: self.ring.name(),
                right: other.ring.name(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..n)
            .map(|k| self.ring.add(&self.coeffs[k], &other.coeffs[k]))
            .collect();
        Ok(TruncSeries { ring: self.ring.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TruncSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|c| self.ring.neg(c)).collect(),
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        TruncSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|a| self.ring.mul(a, c)).collect(),
        }
    }

    /// Cauchy product at the minimum order of the inputs.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let mut coeffs: Vec<R::Elem> = (0..n).map(|_| self.ring.zero()).collect();
        for i in 0..n {
            if self.ring.is_zero(&self.coeffs[i]) {
                continue;
            }
            for j in 0..n - i {
                let t = self.ring.mul(&self.coeffs[i], &other.coeffs[j]);
                coeffs[i + j] = self.ring.add(&coeffs[i + j], &t);
            }
        }
        Ok(TruncSeries { ring: self.ring.clone(), coeffs })
    }

    /// Formal derivative; the order drops by one.
    pub fn derive(&self) -> Result<Self, JetError> {
        if self.order() < 2 {
            return Err(JetError::OrderTooSmall { min: 2, got: self.order() });
        }
        let coeffs = (1..self.order())
            .map(|k| self.ring.mul(&self.coeffs[k], &self.ring.from_i64(k as i64)))
            .collect();
        Ok(TruncSeries { ring: self.ring.clone(), coeffs })
    }

    /// Substitution `self(inner(z))` at the common order. The inner
    /// series must have zero constant term so that the truncation is
    /// well defined.
    pub fn compose(&self, inner: &Self) -> Result<Self, JetError> {
        self.check_ring(inner)?;
        if !self.ring.is_zero(&inner.coeffs[0]) {
            return Err(JetError::CompositionDomain);
        }
        let n = self.order().min(inner.order());
        let mut acc = TruncSeries::zero(self.ring.clone(), n);
        let inner_n = inner.truncate_to(n);
        // Horner scheme: acc = acc * inner + c_k, from the top down.
        for k in (0..n).rev() {
            acc = acc.mul(&inner_n)?;
            acc.coeffs[0] = self.ring.add(&acc.coeffs[0], &self.coeffs[k]);
        }
        Ok(acc)
    }

    fn truncate_to(&self, n: usize) -> Self {
        TruncSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs[..n.min(self.order())].to_vec(),
        }
    }

    /// Truncate to a lower (or equal) order.
    pub fn truncate(&self, n: usize) -> Result<Self, JetError> {
        if n < 1 || n > self.order() {
            return Err(JetError::ProjectionOutOfRange { target: n, order: self.order() });
        }
        Ok(self.truncate_to(n))
    }

    /// Transport coefficients into another ring.
    pub fn map_coeffs<S: Ring, E>(
        &self,
        ring: S,
        mut f: impl FnMut(&R::Elem) -> Result<S::Elem, E>,
    ) -> Result<TruncSeries<S>, E> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(TruncSeries { ring, coeffs })
    }

    pub fn display(&self, var: &str) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if self.ring.is_zero(c) {
                continue;
            }
            let (neg, mag, atomic) = self.ring.display_signed(c);
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let is_one = mag == "1";
            let body = if atomic { mag } else { format!("({mag})") };
            if k == 0 {
                out.push_str(&body);
            } else {
                if !is_one {
                    out.push_str(&body);
                    out.push('·');
                }
                out.push_str(var);
                if k > 1 {
                    out.push_str(&format!("^{k}"));
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// An invertible coordinate jet: zero constant term, unit linear term,
/// order at least 2. Elements of the order-`n` jet group are represented
/// at order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutJet<R: Ring>(TruncSeries<R>);

/// The scaling factor of the semidirect decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GmPart<R: Ring>(pub R::Elem);

/// The unipotent factor of the semidirect decomposition: linear
/// coefficient exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnipotentPart<R: Ring>(AutJet<R>);

impl<R: Ring> UnipotentPart<R> {
    pub fn jet(&self) -> &AutJet<R> {
        &self.0
    }

    pub fn into_jet(self) -> AutJet<R> {
        self.0
    }
}

impl<R: Ring> AutJet<R> {
    pub fn new(series: TruncSeries<R>) -> Result<Self, JetError> {
        if series.order() < 2 {
            return Err(JetError::OrderTooSmall { min: 2, got: series.order() });
        }
        let ring = series.ring().clone();
        if !ring.is_zero(&series.coeffs[0]) {
            return Err(JetError::NotAutomorphismJet {
                reason: "constant term is nonzero".to_string(),
            });
        }
        if !ring.is_unit(&series.coeffs[1]) {
            return Err(JetError::NotAutomorphismJet {
                reason: "linear coefficient is not a unit".to_string(),
            });
        }
        Ok(AutJet(series))
    }

    pub fn from_coeffs(ring: R, coeffs: Vec<R::Elem>) -> Result<Self, JetError> {
        AutJet::new(TruncSeries::new(ring, coeffs)?)
    }

    /// The identity jet `z`.
    pub fn identity(ring: R, order: usize) -> Result<Self, JetError> {
        Ok(AutJet(TruncSeries::variable(ring, order)?))
    }

    /// The jet `z ↦ λ z` for a unit `λ`.
    pub fn scaling(ring: R, lambda: &R::Elem, order: usize) -> Result<Self, JetError> {
        let mut s = TruncSeries::variable(ring, order)?;
        s.coeffs[1] = lambda.clone();
        AutJet::new(s)
    }

    pub fn series(&self) -> &TruncSeries<R> {
        &self.0
    }

    pub fn ring(&self) -> &R {
        self.0.ring()
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn coeff(&self, k: usize) -> R::Elem {
        self.0.coeff(k)
    }

    pub fn is_identity(&self) -> bool {
        let ring = self.ring();
        self.0.coeffs.iter().enumerate().all(|(k, c)| {
            if k == 1 {
                *c == ring.one()
            } else {
                ring.is_zero(c)
            }
        })
    }

    /// Group product `(self · other)(z) = other(self(z))`.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        if self.order() != other.order() {
            return Err(JetError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        let composed = other.0.compose(&self.0)?;
        AutJet::new(composed)
    }

    /// Compositional inverse by triangular back-substitution: the
    /// coefficient of `z^k` in `self(inv(z))` involves only the first
    /// `k` coefficients of `inv`.
    pub fn inverse(&self) -> Self {
        let ring = self.ring().clone();
        let n = self.order();
        let c1_inv = ring
            .inv(&self.0.coeffs[1])
            .expect("AutJet invariant: linear coefficient is a unit");
        let mut inv: Vec<R::Elem> = (0..n).map(|_| ring.zero()).collect();
        inv[1] = c1_inv.clone();
        // powers[j] tracks inv(z)^j at the current truncation
        for k in 2..n {
            // coefficient of z^k in sum_j c_j * inv(z)^j for j = 1..k,
            // using the already-determined inv coefficients and unknown
            // inv[k] appearing only through c_1 * inv[k].
            let partial = TruncSeries {
                ring: ring.clone(),
                coeffs: inv[..=k.min(n - 1)].to_vec(),
            };
            let mut acc = ring.zero();
            let mut power = partial.clone();
            // j = 1 term contributes c1 * inv[k]; start from j = 2
            for j in 2..=k {
                power = power.mul(&partial).expect("same ring");
                let t = ring.mul(&self.0.coeffs[j], &power.coeff(k));
                acc = ring.add(&acc, &t);
            }
            // c1 * inv[k] + acc = 0
            let val = ring.mul(&ring.neg(&acc), &c1_inv);
            inv[k] = val;
        }
        AutJet(TruncSeries { ring, coeffs: inv })
    }

    /// Truncation to a lower jet group; a group homomorphism.
    pub fn project(&self, m: usize) -> Result<Self, JetError> {
        if m < 2 || m > self.order() {
            return Err(JetError::ProjectionOutOfRange { target: m, order: self.order() });
        }
        Ok(AutJet(self.0.truncate_to(m)))
    }

    /// Split into the scaling and unipotent factors, scaling applied
    /// first: `self = scaling(λ) · u` in the group product, i.e.
    /// `self(z) = u(λz)`.
    pub fn decompose(&self) -> (GmPart<R>, UnipotentPart<R>) {
        let ring = self.ring().clone();
        let lambda = self.0.coeffs[1].clone();
        let lambda_inv = ring.inv(&lambda).expect("AutJet invariant");
        let mut coeffs = Vec::with_capacity(self.order());
        let mut pw = ring.one();
        for (k, c) in self.0.coeffs.iter().enumerate() {
            if k > 0 {
                pw = ring.mul(&pw, &lambda_inv);
            }
            coeffs.push(ring.mul(c, &pw));
        }
        let uni = AutJet(TruncSeries { ring, coeffs });
        (GmPart(lambda), UnipotentPart(uni))
    }

    /// Rebuild a jet from its semidirect factors.
    pub fn recompose(gm: &GmPart<R>, uni: &UnipotentPart<R>) -> Result<Self, JetError> {
        let scaling = AutJet::scaling(uni.0.ring().clone(), &gm.0, uni.0.order())?;
        scaling.mul(&uni.0)
    }

    /// For a jet of order `n+1`: the scalar `c` when the jet equals
    /// `z + c·z^n` exactly (an element of the kernel of the projection
    /// to order `n` inside the unipotent subgroup), `None` otherwise.
    pub fn kernel_witness(&self) -> Option<R::Elem> {
        let ring = self.ring();
        let n = self.order().checked_sub(1)?;
        if n < 2 {
            return None;
        }
        if self.0.coeffs[1] != ring.one() {
            return None;
        }
        if (2..n).any(|k| !ring.is_zero(&self.0.coeffs[k])) {
            return None;
        }
        Some(self.0.coeffs[n].clone())
    }

    pub fn display(&self, var: &str) -> String {
        self.0.display(var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::QRing;
    use num::{BigRational, Zero};
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qq(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn series(cs: &[i64]) -> TruncSeries<QRing> {
        TruncSeries::new(QRing, cs.iter().map(|&n| q(n)).collect()).unwrap()
    }

    fn jet(cs: &[i64]) -> AutJet<QRing> {
        AutJet::from_coeffs(QRing, cs.iter().map(|&n| q(n)).collect()).unwrap()
    }

    /// Plain polynomial substitution, truncated by hand. Independent of
    /// the Horner path in `compose`.
    fn naive_substitute(f: &[BigRational], g: &[BigRational], order: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); order];
        let mut gpow = vec![BigRational::zero(); order];
        gpow[0] = BigRational::from_integer(1.into());
        for (k, c) in f.iter().enumerate().take(order) {
            for (i, gc) in gpow.iter().enumerate() {
                out[i] += c * gc;
            }
            if k + 1 < order {
                let mut next = vec![BigRational::zero(); order];
                for i in 0..order {
                    for j in 0..order - i {
                        let t = &gpow[i] * &g[j];
                        next[i + j] += t;
                    }
                }
                gpow = next;
            }
        }
        out
    }

    #[test]
    fn addition_at_min_order() {
        // (1+z) + (2+z^2) at order 3 -> 3 + z + z^2
        let a = series(&[1, 1, 0]);
        let b = series(&[2, 0, 1]);
        assert_eq!(a.add(&b).unwrap(), series(&[3, 1, 1]));
        // min-order reporting
        let c = series(&[1, 1]);
        assert_eq!(a.add(&c).unwrap().order(), 2);
    }

    #[test]
    fn derivative_drops_order() {
        // d/dz (z + z^2) at order 3 -> 1 + 2z at order 2
        let a = series(&[0, 1, 1]);
        let d = a.derive().unwrap();
        assert_eq!(d, series(&[1, 2]));
        assert!(series(&[5]).derive().is_err());
    }

    #[test]
    fn multiplication() {
        // (1+z)(1-z) at order 3 -> 1 - z^2
        let a = series(&[1, 1, 0]);
        let b = series(&[1, -1, 0]);
        assert_eq!(a.mul(&b).unwrap(), series(&[1, 0, -1]));
    }

    #[test]
    fn composition_identity_and_linear() {
        let f = series(&[3, 1, 4]);
        let z = TruncSeries::variable(QRing, 3).unwrap();
        assert_eq!(f.compose(&z).unwrap(), f);
        // (1+z) ∘ 2z at order 3 -> 1 + 2z
        let g = series(&[0, 2, 0]);
        assert_eq!(series(&[1, 1, 0]).compose(&g).unwrap(), series(&[1, 2, 0]));
        // nonzero constant term rejected
        assert_eq!(
            f.compose(&series(&[1, 1, 0])).unwrap_err(),
            JetError::CompositionDomain
        );
    }

    #[test]
    fn composition_against_naive_substitution() {
        // z^2 ∘ (z + z^2) at order 4 -> z^2 + 2z^3
        let f = series(&[0, 0, 1, 0]);
        let g = series(&[0, 1, 1, 0]);
        let got = f.compose(&g).unwrap();
        assert_eq!(got, series(&[0, 0, 1, 2]));
        let oracle = naive_substitute(f.coeffs(), g.coeffs(), 4);
        assert_eq!(got.coeffs(), &oracle[..]);
    }

    #[test]
    fn aut_mul_convention() {
        // identity acts trivially on both sides
        let tau = jet(&[0, 1, 7, -2]);
        let id = AutJet::identity(QRing, 4).unwrap();
        assert_eq!(id.mul(&tau).unwrap(), tau);
        assert_eq!(tau.mul(&id).unwrap(), tau);
        // (z+z^2) · 2z = 2z + 2z^2 : apply z+z^2 first, then scale
        let a = jet(&[0, 1, 1]);
        let b = jet(&[0, 2, 0]);
        assert_eq!(a.mul(&b).unwrap(), jet(&[0, 2, 2]));
        // 2z · (z+z^2) = 2z + 4z^2
        assert_eq!(b.mul(&a).unwrap(), jet(&[0, 2, 4]));
        // order mismatch is an error
        assert!(matches!(
            jet(&[0, 1, 1]).mul(&jet(&[0, 1, 0, 0])),
            Err(JetError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn aut_jet_validation() {
        assert!(matches!(
            AutJet::from_coeffs(QRing, vec![q(1), q(1)]),
            Err(JetError::NotAutomorphismJet { .. })
        ));
        assert!(matches!(
            AutJet::from_coeffs(QRing, vec![q(0), q(0), q(1)]),
            Err(JetError::NotAutomorphismJet { .. })
        ));
        assert!(matches!(
            AutJet::from_coeffs(QRing, vec![q(0)]),
            Err(JetError::OrderTooSmall { .. })
        ));
    }

    #[test]
    fn inverse_by_back_substitution() {
        // inverse of z is z
        let id = AutJet::identity(QRing, 5).unwrap();
        assert_eq!(id.inverse(), id);
        // inverse of 2z at order 3 is z/2
        let two_z = jet(&[0, 2, 0]);
        let inv = two_z.inverse();
        assert_eq!(inv.coeff(1), qq(1, 2));
        assert!(inv.coeff(2).is_zero());
        // inverse of z + z^2 at order 3 is z - z^2, both compositions
        let tau = jet(&[0, 1, 1]);
        let sigma = tau.inverse();
        assert_eq!(sigma, jet(&[0, 1, -1]));
        let id3 = AutJet::identity(QRing, 3).unwrap();
        assert_eq!(tau.mul(&sigma).unwrap(), id3);
        assert_eq!(sigma.mul(&tau).unwrap(), id3);
    }

    #[test]
    fn projection() {
        let tau = jet(&[0, 1, 1, 1]);
        assert_eq!(tau.project(3).unwrap(), jet(&[0, 1, 1]));
        assert_eq!(tau.project(4).unwrap(), tau);
        assert!(tau.project(1).is_err());
        assert!(tau.project(5).is_err());
    }

    #[test]
    fn semidirect_decomposition() {
        // pure scaling
        let s = jet(&[0, 5, 0]);
        let (gm, uni) = s.decompose();
        assert_eq!(gm.0, q(5));
        assert!(uni.jet().is_identity());
        // already unipotent
        let u = jet(&[0, 1, 1]);
        let (gm, uni) = u.decompose();
        assert_eq!(gm.0, q(1));
        assert_eq!(uni.jet(), &u);
        // scaling applied first: recompose reproduces the jet
        let tau = jet(&[0, 3, 2, -1]);
        let (gm, uni) = tau.decompose();
        assert_eq!(uni.jet().coeff(1), q(1));
        assert_eq!(AutJet::recompose(&gm, &uni).unwrap(), tau);
    }

    #[test]
    fn kernel_witness_read_off() {
        // z + 5z^3 at order 4 -> witness 5
        let tau = jet(&[0, 1, 0, 5]);
        assert_eq!(tau.kernel_witness(), Some(q(5)));
        // z + z^2 at order 4 is not in the kernel
        assert_eq!(jet(&[0, 1, 1, 0]).kernel_witness(), None);
        // non-unipotent linear part
        assert_eq!(jet(&[0, 2, 0, 5]).kernel_witness(), None);
        // additivity under the group law
        let a = jet(&[0, 1, 0, 3]);
        let b = jet(&[0, 1, 0, 4]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, jet(&[0, 1, 0, 7]));
        assert_eq!(prod.kernel_witness(), Some(q(7)));
    }

    #[test]
    fn display_format() {
        assert_eq!(jet(&[0, 1, 1]).display("z"), "z + z^2");
        assert_eq!(jet(&[0, 2, -3]).display("z"), "2·z - 3·z^2");
        let half = AutJet::from_coeffs(QRing, vec![q(0), qq(1, 2), q(0)]).unwrap();
        assert_eq!(half.display("z"), "1/2·z");
        assert_eq!(TruncSeries::zero(QRing, 3).display("z"), "0");
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = AutJet<QRing>> {
        let coeff = (-6i64..=6, 1i64..=3).prop_map(|(n, d)| qq(n, d));
        let unit = (1i64..=5, 1i64..=3).prop_map(|(n, d)| qq(n, d));
        (unit, proptest::collection::vec(coeff, order - 2)).prop_map(move |(c1, rest)| {
            let mut cs = vec![BigRational::zero(), c1];
            cs.extend(rest);
            AutJet::from_coeffs(QRing, cs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn group_axioms(a in arb_jet(6), b in arb_jet(6), c in arb_jet(6)) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let id = AutJet::identity(QRing, 6).unwrap();
            prop_assert_eq!(a.mul(&a.inverse()).unwrap(), id.clone());
            prop_assert_eq!(a.inverse().mul(&a).unwrap(), id);
        }

        #[test]
        fn projection_is_homomorphism(a in arb_jet(7), b in arb_jet(7), m in 2usize..=7) {
            let lhs = a.mul(&b).unwrap().project(m).unwrap();
            let rhs = a.project(m).unwrap().mul(&b.project(m).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            // tower: projecting twice equals projecting once
            let k = 2 + (m - 2) / 2;
            prop_assert_eq!(
                a.project(m).unwrap().project(k).unwrap(),
                a.project(k).unwrap()
            );
        }

        #[test]
        fn decompose_round_trip(a in arb_jet(6)) {
            let (gm, uni) = a.decompose();
            prop_assert_eq!(uni.jet().coeff(1), q(1));
            prop_assert_eq!(AutJet::recompose(&gm, &uni).unwrap(), a);
        }
    }
}

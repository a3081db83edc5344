//! Vectors and linear operators on truncated Hilbert spaces.
//!
//! A truncation is identified by a [`SpaceId`] (basis-family label plus
//! dimension). Coordinates are always taken with respect to an orthonormal
//! basis, so the Hilbert norm is the Euclidean norm of the coordinate vector
//! and the inner product is the standard one, anti-linear in the first entry.
//!
//! Operators are specified by kind ([`OpKind`]): dense, diagonal, weighted
//! shift, quadrature kernel, or domain extension. Adjoints are derived from
//! the kind; the domain-extension kind deliberately has none (see
//! [`OperatorSpec::apply_adjoint`]). Everything is complex double precision,
//! including operators that happen to be real symmetric.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KrylovError, Result};

/// Identifier of a truncated Hilbert space: basis family plus dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpaceId {
    pub family: String,
    pub dim: usize,
}

impl SpaceId {
    pub fn new(family: impl Into<String>, dim: usize) -> Self {
        Self {
            family: family.into(),
            dim,
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.family, self.dim)
    }
}

/// Coordinate vector in a truncated Hilbert space.
///
/// Entries are guaranteed finite; vectors combine only within the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector {
    coords: Vec<Complex64>,
    space: SpaceId,
}

impl HVector {
    pub fn new(coords: Vec<Complex64>, space: SpaceId) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(KrylovError::SpaceMismatch {
                expected: space.to_string(),
                found: format!("coordinate vector of length {}", coords.len()),
            });
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(KrylovError::NonFinite(format!(
                "coordinate vector in {space}"
            )));
        }
        Ok(Self { coords, space })
    }

    /// Builds a vector from real coordinates.
    pub fn from_real(coords: &[f64], space: SpaceId) -> Result<Self> {
        Self::new(
            coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            space,
        )
    }

    pub fn zeros(space: SpaceId) -> Self {
        Self {
            coords: vec![Complex64::ZERO; space.dim],
            space,
        }
    }

    /// The `i`-th canonical basis vector.
    pub fn basis(space: SpaceId, i: usize) -> Result<Self> {
        if i >= space.dim {
            return Err(KrylovError::InvalidParameter(format!(
                "basis index {i} out of range for {space}"
            )));
        }
        let mut v = Self::zeros(space);
        v.coords[i] = Complex64::ONE;
        Ok(v)
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    fn check_space(&self, other: &HVector) -> Result<()> {
        if self.space != other.space {
            return Err(KrylovError::SpaceMismatch {
                expected: self.space.to_string(),
                found: other.space.to_string(),
            });
        }
        Ok(())
    }

    /// Inner product, anti-linear in `self` and linear in `other`.
    pub fn inner(&self, other: &HVector) -> Result<Complex64> {
        self.check_space(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| alpha * c).collect(),
            space: self.space.clone(),
        }
    }

    pub fn add(&self, other: &HVector) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
            space: self.space.clone(),
        })
    }

    pub fn sub(&self, other: &HVector) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
            space: self.space.clone(),
        })
    }

    /// `self += alpha * other`, in place.
    pub fn axpy(&mut self, alpha: Complex64, other: &HVector) -> Result<()> {
        self.check_space(other)?;
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += alpha * b;
        }
        Ok(())
    }
}

impl Serialize for HVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HVector", 2)?;
        st.serialize_field("space", &self.space)?;
        let pairs: Vec<[f64; 2]> = self.coords.iter().map(|c| [c.re, c.im]).collect();
        st.serialize_field("coords", &pairs)?;
        st.end()
    }
}

/// Element of an operator domain, decomposed as `t + mu * x0` where `x0` is
/// the special vector of a domain-extension operator.
///
/// Plain operators treat every vector as a domain element with `mu = 0`.
#[derive(Debug, Clone)]
pub struct DomainElement {
    pub t: HVector,
    pub mu: Complex64,
}

impl DomainElement {
    pub fn new(t: HVector, mu: Complex64) -> Self {
        Self { t, mu }
    }

    pub fn plain(t: HVector) -> Self {
        Self {
            t,
            mu: Complex64::ZERO,
        }
    }
}

/// Operator kind, which fixes both the action and the adjoint rule.
#[derive(Debug, Clone)]
pub enum OpKind {
    /// Dense matrix in the orthonormal coordinates.
    Dense(nalgebra::DMatrix<Complex64>),
    /// `A e_n = d_n e_n`.
    Diagonal(Vec<Complex64>),
    /// `A e_n = w_n e_{n + offset}`; entries shifted past the window are
    /// dropped. `weights[n]` is indexed by the source coordinate.
    WeightedShift {
        offset: isize,
        weights: Vec<Complex64>,
    },
    /// Integral operator discretized on a quadrature rule, stored as the
    /// dense matrix acting on the orthonormalized coordinates
    /// `c_j = f(x_j) * sqrt(w_j)`.
    QuadratureIntegral {
        nodes: Vec<f64>,
        weights: Vec<f64>,
        matrix: nalgebra::DMatrix<Complex64>,
    },
    /// `A (t + mu x0) = T t + mu y0` on `D(T) + span{x0}`.
    DomainExtension {
        base: Box<OperatorSpec>,
        x0: HVector,
        y0: HVector,
    },
}

impl OpKind {
    fn name(&self) -> &'static str {
        match self {
            OpKind::Dense(_) => "dense",
            OpKind::Diagonal(_) => "diagonal",
            OpKind::WeightedShift { .. } => "weighted-shift",
            OpKind::QuadratureIntegral { .. } => "quadrature-integral",
            OpKind::DomainExtension { .. } => "domain-extension",
        }
    }
}

/// A linear operator on a truncated Hilbert space.
///
/// `boundary_margin` marks how many trailing coordinates of the window are
/// polluted by truncation (shift operators drop entries past the edge);
/// structural diagnostics exclude those directions. Operators that are not
/// window truncations keep the margin at zero.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    kind: OpKind,
    space: SpaceId,
    boundary_margin: usize,
}

impl OperatorSpec {
    pub fn dense(matrix: nalgebra::DMatrix<Complex64>, space: SpaceId) -> Result<Self> {
        if matrix.nrows() != space.dim || matrix.ncols() != space.dim {
            return Err(KrylovError::SpaceMismatch {
                expected: space.to_string(),
                found: format!("{}x{} matrix", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(Self {
            kind: OpKind::Dense(matrix),
            space,
            boundary_margin: 0,
        })
    }

    pub fn diagonal(entries: Vec<Complex64>, space: SpaceId) -> Result<Self> {
        if entries.len() != space.dim {
            return Err(KrylovError::SpaceMismatch {
                expected: space.to_string(),
                found: format!("diagonal of length {}", entries.len()),
            });
        }
        Ok(Self {
            kind: OpKind::Diagonal(entries),
            space,
            boundary_margin: 0,
        })
    }

    pub fn weighted_shift(offset: isize, weights: Vec<Complex64>, space: SpaceId) -> Result<Self> {
        if weights.len() != space.dim {
            return Err(KrylovError::SpaceMismatch {
                expected: space.to_string(),
                found: format!("weight sequence of length {}", weights.len()),
            });
        }
        if offset == 0 {
            return Err(KrylovError::InvalidParameter(
                "weighted shift needs a nonzero offset; use the diagonal kind".into(),
            ));
        }
        Ok(Self {
            kind: OpKind::WeightedShift { offset, weights },
            space,
            boundary_margin: 0,
        })
    }

    pub fn quadrature_integral(
        nodes: Vec<f64>,
        weights: Vec<f64>,
        matrix: nalgebra::DMatrix<Complex64>,
        space: SpaceId,
    ) -> Result<Self> {
        if nodes.len() != space.dim || weights.len() != space.dim || matrix.nrows() != space.dim {
            return Err(KrylovError::SpaceMismatch {
                expected: space.to_string(),
                found: "quadrature data of mismatched length".into(),
            });
        }
        Ok(Self {
            kind: OpKind::QuadratureIntegral {
                nodes,
                weights,
                matrix,
            },
            space,
            boundary_margin: 0,
        })
    }

    /// Extends `base` by the rule `A x0 = y0`, `A t = base t` for `t` in the
    /// base domain. The base must itself be a plain operator.
    pub fn domain_extension(base: OperatorSpec, x0: HVector, y0: HVector) -> Result<Self> {
        if matches!(base.kind, OpKind::DomainExtension { .. }) {
            return Err(KrylovError::InvalidParameter(
                "domain extensions cannot be nested".into(),
            ));
        }
        if x0.space() != &base.space || y0.space() != &base.space {
            return Err(KrylovError::SpaceMismatch {
                expected: base.space.to_string(),
                found: format!("x0 in {}, y0 in {}", x0.space(), y0.space()),
            });
        }
        if x0.norm() == 0.0 {
            return Err(KrylovError::InvalidParameter(
                "the special vector of a domain extension must be nonzero".into(),
            ));
        }
        let space = base.space.clone();
        let margin = base.boundary_margin;
        Ok(Self {
            kind: OpKind::DomainExtension {
                base: Box::new(base),
                x0,
                y0,
            },
            space,
            boundary_margin: margin,
        })
    }

    pub fn with_boundary_margin(mut self, margin: usize) -> Self {
        self.boundary_margin = margin;
        self
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn boundary_margin(&self) -> usize {
        self.boundary_margin
    }

    pub fn is_domain_extension(&self) -> bool {
        matches!(self.kind, OpKind::DomainExtension { .. })
    }

    /// The special vector of a domain-extension operator.
    pub fn extension_vector(&self) -> Option<&HVector> {
        match &self.kind {
            OpKind::DomainExtension { x0, .. } => Some(x0),
            _ => None,
        }
    }

    fn check_space(&self, v: &HVector) -> Result<()> {
        if v.space() != &self.space {
            return Err(KrylovError::SpaceMismatch {
                expected: self.space.to_string(),
                found: v.space().to_string(),
            });
        }
        Ok(())
    }

    /// Embeds a domain element as a plain vector: `t + mu * x0`.
    ///
    /// For plain operators the `mu` component has no carrier and must vanish.
    pub fn embed(&self, v: &DomainElement) -> Result<HVector> {
        self.check_space(&v.t)?;
        match &self.kind {
            OpKind::DomainExtension { x0, .. } => {
                let mut out = v.t.clone();
                out.axpy(v.mu, x0)?;
                Ok(out)
            }
            _ => {
                if v.mu != Complex64::ZERO {
                    return Err(KrylovError::Unsupported(format!(
                        "domain element with mu = {} applied to a plain {} operator",
                        v.mu,
                        self.kind.name()
                    )));
                }
                Ok(v.t.clone())
            }
        }
    }

    /// Applies the operator to a plain vector (a domain element with `mu = 0`).
    pub fn apply(&self, v: &HVector) -> Result<HVector> {
        self.check_space(v)?;
        let m = self.space.dim;
        match &self.kind {
            OpKind::Dense(a) => {
                let x = nalgebra::DVector::from_column_slice(v.coords());
                let y = a * x;
                HVector::new(y.iter().copied().collect(), self.space.clone())
            }
            OpKind::Diagonal(d) => HVector::new(
                d.iter().zip(v.coords()).map(|(di, vi)| di * vi).collect(),
                self.space.clone(),
            ),
            OpKind::WeightedShift { offset, weights } => {
                let mut out = vec![Complex64::ZERO; m];
                for n in 0..m {
                    let t = n as isize + offset;
                    if (0..m as isize).contains(&t) {
                        out[t as usize] += weights[n] * v.coords()[n];
                    }
                }
                HVector::new(out, self.space.clone())
            }
            OpKind::QuadratureIntegral { matrix, .. } => {
                let x = nalgebra::DVector::from_column_slice(v.coords());
                let y = matrix * x;
                HVector::new(y.iter().copied().collect(), self.space.clone())
            }
            OpKind::DomainExtension { base, .. } => base.apply(v),
        }
    }

    /// Applies the operator to a domain element.
    ///
    /// For the domain-extension kind this is `T t + mu y0`; plain kinds
    /// require `mu = 0`.
    pub fn apply_element(&self, v: &DomainElement) -> Result<HVector> {
        match &self.kind {
            OpKind::DomainExtension { base, y0, .. } => {
                let mut out = base.apply(&v.t)?;
                out.axpy(v.mu, y0)?;
                Ok(out)
            }
            _ => {
                let embedded = self.embed(v)?;
                self.apply(&embedded)
            }
        }
    }

    /// Applies the adjoint, derived from the kind.
    ///
    /// The adjoint of a domain-extension operator is not representable in the
    /// extension coordinates and is reported as unsupported rather than
    /// approximated.
    pub fn apply_adjoint(&self, v: &HVector) -> Result<HVector> {
        self.check_space(v)?;
        let m = self.space.dim;
        match &self.kind {
            OpKind::Dense(a) => {
                let x = nalgebra::DVector::from_column_slice(v.coords());
                let y = a.adjoint() * x;
                HVector::new(y.iter().copied().collect(), self.space.clone())
            }
            OpKind::Diagonal(d) => HVector::new(
                d.iter()
                    .zip(v.coords())
                    .map(|(di, vi)| di.conj() * vi)
                    .collect(),
                self.space.clone(),
            ),
            OpKind::WeightedShift { offset, weights } => {
                let mut out = vec![Complex64::ZERO; m];
                for (n, w) in weights.iter().enumerate() {
                    let t = n as isize + offset;
                    if (0..m as isize).contains(&t) {
                        out[n] += w.conj() * v.coords()[t as usize];
                    }
                }
                HVector::new(out, self.space.clone())
            }
            OpKind::QuadratureIntegral { matrix, .. } => {
                let x = nalgebra::DVector::from_column_slice(v.coords());
                let y = matrix.adjoint() * x;
                HVector::new(y.iter().copied().collect(), self.space.clone())
            }
            OpKind::DomainExtension { .. } => Err(KrylovError::Unsupported(
                "the adjoint of a domain-extension operator is not representable \
                 in the extension coordinates"
                    .into(),
            )),
        }
    }

    /// Graph norm `(|v|^2 + |Av|^2)^{1/2}` of a domain element.
    pub fn graph_norm(&self, v: &DomainElement) -> Result<f64> {
        let embedded = self.embed(v)?;
        let image = self.apply_element(v)?;
        Ok((embedded.norm_sqr() + image.norm_sqr()).sqrt())
    }

    /// Cheap estimate of the operator norm, used only to set tolerance scales.
    ///
    /// Exact for diagonal and shift kinds; an upper bound (Frobenius) for the
    /// dense kinds.
    pub fn norm_estimate(&self) -> f64 {
        match &self.kind {
            OpKind::Dense(a) => a.norm(),
            OpKind::Diagonal(d) => d.iter().map(|c| c.norm()).fold(0.0, f64::max),
            OpKind::WeightedShift { offset, weights } => {
                let m = self.space.dim as isize;
                weights
                    .iter()
                    .enumerate()
                    .filter(|(n, _)| (0..m).contains(&(*n as isize + offset)))
                    .map(|(_, w)| w.norm())
                    .fold(0.0, f64::max)
            }
            OpKind::QuadratureIntegral { matrix, .. } => matrix.norm(),
            OpKind::DomainExtension { base, x0, y0 } => {
                base.norm_estimate().max(y0.norm() / x0.norm())
            }
        }
    }

    /// Dense materialization of a plain operator.
    pub fn materialize(&self) -> Result<nalgebra::DMatrix<Complex64>> {
        let m = self.space.dim;
        match &self.kind {
            OpKind::Dense(a) => Ok(a.clone()),
            OpKind::QuadratureIntegral { matrix, .. } => Ok(matrix.clone()),
            OpKind::Diagonal(d) => Ok(nalgebra::DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    d[i]
                } else {
                    Complex64::ZERO
                }
            })),
            OpKind::WeightedShift { offset, weights } => {
                let mut a = nalgebra::DMatrix::zeros(m, m);
                for n in 0..m {
                    let t = n as isize + offset;
                    if (0..m as isize).contains(&t) {
                        a[(t as usize, n)] = weights[n];
                    }
                }
                Ok(a)
            }
            OpKind::DomainExtension { .. } => Err(KrylovError::Unsupported(
                "a domain-extension operator has no dense materialization: \
                 its action on the special vector is not coordinate-linear"
                    .into(),
            )),
        }
    }
}

/// Random vector with coordinates uniform in `[-1,1] + i[-1,1]`.
pub fn random_vector(space: &SpaceId, rng: &mut impl Rng) -> HVector {
    let coords = (0..space.dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    HVector {
        coords,
        space: space.clone(),
    }
}

/// Max of `|<Au,v> - <u,A*v>| / (|u||v|)` over seeded random pairs.
pub fn adjoint_defect(op: &OperatorSpec, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_vector(op.space(), &mut rng);
        let v = random_vector(op.space(), &mut rng);
        let au = op.apply(&u)?;
        let astar_v = op.apply_adjoint(&v)?;
        let lhs = au.inner(&v)?;
        let rhs = u.inner(&astar_v)?;
        worst = worst.max((lhs - rhs).norm() / (u.norm() * v.norm()));
    }
    Ok(worst)
}

/// Max of `|<Au,v> - <u,Av>| / (|u||v|)` over seeded random pairs; small for
/// numerically Hermitian operators.
pub fn hermitian_defect(op: &OperatorSpec, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_vector(op.space(), &mut rng);
        let v = random_vector(op.space(), &mut rng);
        let au = op.apply(&u)?;
        let av = op.apply(&v)?;
        let lhs = au.inner(&v)?;
        let rhs = u.inner(&av)?;
        worst = worst.max((lhs - rhs).norm() / (u.norm() * v.norm()));
    }
    Ok(worst)
}

/// Max of `|<Au,v> + <u,Av>| / (|u||v|)` over seeded random pairs; small for
/// numerically skew-adjoint operators.
pub fn skew_defect(op: &OperatorSpec, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_vector(op.space(), &mut rng);
        let v = random_vector(op.space(), &mut rng);
        let au = op.apply(&u)?;
        let av = op.apply(&v)?;
        let lhs = au.inner(&v)?;
        let rhs = u.inner(&av)?;
        worst = worst.max((lhs + rhs).norm() / (u.norm() * v.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn space(m: usize) -> SpaceId {
        SpaceId::new("test", m)
    }

    #[test]
    fn diagonal_action() {
        let sp = space(3);
        let op = OperatorSpec::diagonal(vec![c(1.0), c(2.0), c(3.0)], sp.clone()).unwrap();
        let v = HVector::from_real(&[1.0, 1.0, 1.0], sp).unwrap();
        let out = op.apply(&v).unwrap();
        assert_eq!(out.coords(), &[c(1.0), c(2.0), c(3.0)]);
    }

    #[test]
    fn weighted_shift_moves_basis_vector() {
        // A e_n = (n+1) e_{n+1}, so A e_0 = e_1.
        let sp = space(5);
        let w = (0..5).map(|n| c((n + 1) as f64)).collect();
        let op = OperatorSpec::weighted_shift(1, w, sp.clone()).unwrap();
        let e0 = HVector::basis(sp.clone(), 0).unwrap();
        let out = op.apply(&e0).unwrap();
        let e1 = HVector::basis(sp, 1).unwrap();
        assert!((out.sub(&e1).unwrap()).norm() == 0.0);
    }

    #[test]
    fn shift_drops_entries_past_window() {
        let sp = space(3);
        let op =
            OperatorSpec::weighted_shift(1, vec![Complex64::ONE; 3], sp.clone()).unwrap();
        let e2 = HVector::basis(sp, 2).unwrap();
        assert_eq!(op.apply(&e2).unwrap().norm(), 0.0);
    }

    #[test]
    fn real_diagonal_is_selfadjoint() {
        let sp = space(3);
        let op = OperatorSpec::diagonal(vec![c(1.0), c(-2.0), c(3.5)], sp.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_vector(&sp, &mut rng);
        let forward = op.apply(&v).unwrap();
        let adjoint = op.apply_adjoint(&v).unwrap();
        assert_eq!(forward.sub(&adjoint).unwrap().norm(), 0.0);
    }

    #[test]
    fn right_shift_adjoint_is_left_shift() {
        let sp = space(4);
        let op =
            OperatorSpec::weighted_shift(1, vec![Complex64::ONE; 4], sp.clone()).unwrap();
        let e2 = HVector::basis(sp.clone(), 2).unwrap();
        let back = op.apply_adjoint(&e2).unwrap();
        let e1 = HVector::basis(sp, 1).unwrap();
        assert_eq!(back.sub(&e1).unwrap().norm(), 0.0);
    }

    #[test]
    fn dense_adjoint_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = space(5);
        let a = nalgebra::DMatrix::from_fn(5, 5, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let op = OperatorSpec::dense(a, sp).unwrap();
        assert!(adjoint_defect(&op, 100, 11).unwrap() < 1e-13);
    }

    #[test]
    fn space_mismatch_is_an_error() {
        let op = OperatorSpec::diagonal(vec![c(1.0); 3], space(3)).unwrap();
        let v = HVector::from_real(&[1.0, 2.0], SpaceId::new("test", 2)).unwrap();
        assert!(matches!(
            op.apply(&v),
            Err(KrylovError::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn graph_norm_values() {
        // v = 0 has graph norm 0; a unit vector under the identity gives sqrt(2);
        // diag(1,2) gives sqrt(2) on e_0 and sqrt(5) on e_1.
        let sp = space(2);
        let op = OperatorSpec::diagonal(vec![c(1.0), c(2.0)], sp.clone()).unwrap();
        let zero = DomainElement::plain(HVector::zeros(sp.clone()));
        assert_eq!(op.graph_norm(&zero).unwrap(), 0.0);

        let id = OperatorSpec::diagonal(vec![c(1.0), c(1.0)], sp.clone()).unwrap();
        let e0 = DomainElement::plain(HVector::basis(sp.clone(), 0).unwrap());
        assert!((id.graph_norm(&e0).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        assert!((op.graph_norm(&e0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let e1 = DomainElement::plain(HVector::basis(sp, 1).unwrap());
        assert!((op.graph_norm(&e1).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn graph_norm_dominates_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sp = space(6);
        let w = (0..6).map(|n| c(n as f64 + 1.0)).collect();
        let op = OperatorSpec::weighted_shift(1, w, sp.clone()).unwrap();
        for _ in 0..50 {
            let v = random_vector(&sp, &mut rng);
            let g = op.graph_norm(&DomainElement::plain(v.clone())).unwrap();
            assert!(g >= v.norm() - 1e-12);
        }
    }

    #[test]
    fn domain_extension_applies_fiat_rule() {
        let sp = space(4);
        let base =
            OperatorSpec::diagonal((0..4).map(|n| c(n as f64)).collect(), sp.clone()).unwrap();
        let x0 = HVector::from_real(&[0.0, 1.0, 0.5, 0.25], sp.clone()).unwrap();
        let y0 = HVector::basis(sp.clone(), 0).unwrap();
        let op = OperatorSpec::domain_extension(base, x0, y0.clone()).unwrap();

        // mu = 1, t = 0 maps to y0.
        let elem = DomainElement::new(HVector::zeros(sp.clone()), Complex64::ONE);
        let out = op.apply_element(&elem).unwrap();
        assert_eq!(out.sub(&y0).unwrap().norm(), 0.0);

        // Plain vectors see the base action.
        let e1 = HVector::basis(sp, 1).unwrap();
        let out = op.apply(&e1).unwrap();
        assert_eq!(out.sub(&e1).unwrap().norm(), 0.0);

        // The adjoint is declared unsupported.
        assert!(matches!(
            op.apply_adjoint(&out),
            Err(KrylovError::Unsupported(_))
        ));
    }

    #[test]
    fn nonfinite_coordinates_rejected() {
        let sp = space(2);
        assert!(matches!(
            HVector::from_real(&[f64::NAN, 0.0], sp),
            Err(KrylovError::NonFinite(_))
        ));
    }
}

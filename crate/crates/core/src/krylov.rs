//! Krylov subspace construction and structural diagnostics.
//!
//! The order-N Krylov space of an operator `A` and datum `g` is
//! `K_N(A,g) = span{g, Ag, ..., A^{N-1} g}`. Bases are built by applying `A`
//! to the previous orthonormal direction (never by forming raw powers, which
//! overflow for the factorial-weighted gallery operators) with full two-pass
//! Gram–Schmidt reorthogonalization.
//!
//! The diagnostics quantify, at a finite truncation, the structural
//! quantities that govern whether solutions of `Af = g` can be approximated
//! from within the Krylov space:
//!
//! * [`distance_to_krylov`] — projection residual onto `K_N`;
//! * [`krylov_intersection`] — dimension and principal angles of
//!   `closure(K) ∩ A(K^perp)`;
//! * [`reducibility_defects`] — operator norms of the two off-diagonal
//!   blocks of `A` in the Krylov decomposition;
//! * [`escape_indicator`] — norm of the component of `A x` leaving the
//!   Krylov closure, for a candidate `x` inside it;
//! * [`core_condition_decay`] — graph-norm best-approximation errors,
//!   probing density of `K` in its closure intersected with the domain.
//!
//! All findings are finite-truncation evidence: the truncated model cannot
//! witness closure subtleties of genuinely infinite-dimensional operators.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{KrylovError, Result};
use crate::linop::{DomainElement, HVector, OperatorSpec, SpaceId};

/// New-direction norms below this fraction of the running largest column norm
/// terminate the iteration; just above double-precision noise.
pub const BREAKDOWN_RTOL: f64 = 1e-13;

/// Default cosine tolerance for counting a principal angle as zero.
pub const DEFAULT_INTERSECTION_TOL: f64 = 1e-8;

/// Default membership threshold for escape-indicator conclusiveness.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-6;

/// Orthonormal basis of an order-N Krylov space with generation metadata.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    columns: Vec<HVector>,
    requested_order: usize,
    breakdown_at: Option<usize>,
    space: SpaceId,
}

impl KrylovBasis {
    /// Number of orthonormal columns actually generated.
    pub fn order(&self) -> usize {
        self.columns.len()
    }

    pub fn requested_order(&self) -> usize {
        self.requested_order
    }

    /// Index at which a power vector became numerically dependent, if any.
    pub fn breakdown_at(&self) -> Option<usize> {
        self.breakdown_at
    }

    pub fn columns(&self) -> &[HVector] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &HVector {
        &self.columns[k]
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let n = self.columns.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let g = self.columns[i].inner(&self.columns[j]).unwrap();
                let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Subtracts from `v` its projection onto the given orthonormal columns,
/// twice (classical reorthogonalization pass structure).
fn orthogonalize_against(v: &mut HVector, columns: &[HVector]) -> Result<()> {
    for _ in 0..2 {
        for q in columns {
            let c = q.inner(v)?;
            v.axpy(-c, q)?;
        }
    }
    Ok(())
}

/// Builds an orthonormal basis of `K_N(A, g)` by modified Gram–Schmidt with
/// full reorthogonalization. Each new direction is the image under `A` of the
/// previous orthonormal column. Stops early (recording `breakdown_at`) when
/// the new direction falls below [`BREAKDOWN_RTOL`] times the running largest
/// column norm.
pub fn build_krylov_basis(op: &OperatorSpec, g: &HVector, n: usize) -> Result<KrylovBasis> {
    if n == 0 {
        return Err(KrylovError::InvalidParameter(
            "Krylov order must be at least 1".into(),
        ));
    }
    let g_norm = g.norm();
    if g_norm == 0.0 {
        return Err(KrylovError::EmptyBasis);
    }
    let mut columns = vec![g.scale(Complex64::new(1.0 / g_norm, 0.0))];
    let mut running_max = g_norm;
    let mut breakdown_at = None;
    for k in 1..n {
        let mut w = op.apply(columns.last().unwrap())?;
        running_max = running_max.max(w.norm());
        orthogonalize_against(&mut w, &columns)?;
        let w_norm = w.norm();
        if w_norm < BREAKDOWN_RTOL * running_max {
            breakdown_at = Some(k);
            break;
        }
        columns.push(w.scale(Complex64::new(1.0 / w_norm, 0.0)));
    }
    Ok(KrylovBasis {
        columns,
        requested_order: n,
        breakdown_at,
        space: g.space().clone(),
    })
}

/// Distance of `f` to the span of the first `order` basis columns,
/// `|f - Q Q^H f|`.
pub fn distance_at_order(basis: &KrylovBasis, order: usize, f: &HVector) -> Result<f64> {
    let order = order.min(basis.order());
    let mut r = f.clone();
    orthogonalize_against(&mut r, &basis.columns[..order])?;
    Ok(r.norm())
}

/// Distance of `f` to the full computed Krylov space.
pub fn distance_to_krylov(basis: &KrylovBasis, f: &HVector) -> Result<f64> {
    distance_at_order(basis, basis.order(), f)
}

/// Distance series `(N, dist(f, K_N))` over the requested orders. Orders past
/// the computed basis are clamped to it (the space no longer grows after
/// breakdown).
pub fn distance_series(
    basis: &KrylovBasis,
    f: &HVector,
    orders: &[usize],
) -> Result<Vec<(usize, f64)>> {
    orders
        .iter()
        .map(|&n| Ok((n, distance_at_order(basis, n, f)?)))
        .collect()
}

/// Orthonormal basis of the orthogonal complement of the Krylov span inside
/// the truncation, excluding the trailing `boundary_margin` coordinates of
/// the window.
fn orthonormal_complement(op: &OperatorSpec, basis: &KrylovBasis) -> Result<Vec<HVector>> {
    let m = op.dim();
    let allowed = m.saturating_sub(op.boundary_margin());
    let mut complement: Vec<HVector> = Vec::new();
    for i in 0..allowed {
        let mut v = HVector::basis(op.space().clone(), i)?;
        orthogonalize_against(&mut v, &basis.columns)?;
        orthogonalize_against(&mut v, &complement)?;
        let n = v.norm();
        if n > 1e-8 {
            complement.push(v.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
    Ok(complement)
}

/// Orthonormalizes a family of vectors, dropping numerically dependent ones.
fn orthonormalize(vectors: Vec<HVector>, drop_tol: f64) -> Result<Vec<HVector>> {
    let scale = vectors.iter().map(HVector::norm).fold(0.0, f64::max);
    let mut out: Vec<HVector> = Vec::new();
    for mut v in vectors {
        orthogonalize_against(&mut v, &out)?;
        let n = v.norm();
        if n > drop_tol * scale.max(1e-300) {
            out.push(v.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
    Ok(out)
}

/// Principal angles (radians, ascending) between the spans of two orthonormal
/// families, from the singular values of `A^H B`.
pub fn principal_angles(a: &[HVector], b: &[HVector]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = nalgebra::DMatrix::<Complex64>::zeros(a.len(), b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            s[(i, j)] = ai.inner(bj)?;
        }
    }
    let svd = s
        .try_svd(false, false, 1e-14, 10_000)
        .ok_or_else(|| KrylovError::Numerical("SVD did not converge".into()))?;
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&sv| sv.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(angles)
}

/// Result of the Krylov-intersection diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    /// Number of principal angles with cosine at least `1 - tol`.
    pub dim: usize,
    /// All principal angles between `A(K^perp)` and the Krylov span, ascending.
    pub angles: Vec<f64>,
    /// Dimension of the (trimmed) complement that was swept.
    pub complement_dim: usize,
    pub note: Option<String>,
}

/// Measures `closure(K) ∩ A(K^perp ∩ D(A))` at the truncation.
///
/// The complement sweep excludes the boundary margin of window truncations.
/// For a domain-extension operator the sweep also offers the pure extension
/// direction (`t = 0, mu = 1`), kept only when its embedding is orthogonal to
/// the Krylov span — the domain elements representable in the extension
/// coordinates.
pub fn krylov_intersection(
    op: &OperatorSpec,
    basis: &KrylovBasis,
    tol: f64,
) -> Result<IntersectionReport> {
    let complement = orthonormal_complement(op, basis)?;
    let mut images: Vec<HVector> = Vec::new();
    for u in &complement {
        images.push(op.apply(u)?);
    }
    let mut note = None;
    if op.is_domain_extension() {
        let elem = DomainElement::new(HVector::zeros(op.space().clone()), Complex64::ONE);
        let embedded = op.embed(&elem)?;
        let residual = distance_to_krylov(basis, &embedded)?;
        if residual >= (1.0 - 1e-10) * embedded.norm() {
            images.push(op.apply_element(&elem)?);
        } else {
            note = Some(format!(
                "extension direction lies at distance {:.3e} of the Krylov span \
                 and is not part of the complement",
                residual
            ));
        }
    }
    if complement.is_empty() && images.is_empty() {
        return Ok(IntersectionReport {
            dim: 0,
            angles: Vec::new(),
            complement_dim: 0,
            note: Some("Krylov space fills the truncation".into()),
        });
    }
    // Drop numerically null images (e.g. complement directions in the kernel).
    let scale = op.norm_estimate().max(1e-300);
    let images: Vec<HVector> = images.into_iter().filter(|w| w.norm() > 1e-12 * scale).collect();
    if images.is_empty() {
        return Ok(IntersectionReport {
            dim: 0,
            angles: Vec::new(),
            complement_dim: complement.len(),
            note: note.or_else(|| Some("operator annihilates the Krylov complement".into())),
        });
    }
    let w = orthonormalize(images, 1e-10)?;
    let angles = principal_angles(basis.columns(), &w)?;
    let dim = angles.iter().filter(|&&th| th.cos() >= 1.0 - tol).count();
    Ok(IntersectionReport {
        dim,
        angles,
        complement_dim: complement.len(),
        note,
    })
}

/// Off-diagonal block norms of the operator in the Krylov decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct ReducibilityReport {
    /// `|(1 - P_K) A P_K|`, the outgoing block.
    pub d1: f64,
    /// `|P_K A (1 - P_K)|`, the incoming block.
    pub d2: f64,
    /// Both defects at most the given tolerance.
    pub reduced_at_scale: bool,
    pub tol: f64,
}

fn largest_singular_value(m: nalgebra::DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let svd = m
        .try_svd(false, false, 1e-14, 10_000)
        .ok_or_else(|| KrylovError::Numerical("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().cloned().fold(0.0, f64::max))
}

/// Estimates both reducibility defects as largest singular values of the
/// compressed off-diagonal blocks over the truncation.
///
/// Unless breakdown was reached, the image of the final basis column lies in
/// the next-order space by construction and would register as a spurious
/// order-one defect; it is excluded from the outgoing sweep.
pub fn reducibility_defects(
    op: &OperatorSpec,
    basis: &KrylovBasis,
    tol: f64,
) -> Result<ReducibilityReport> {
    let m = op.dim();
    let order = basis.order();
    let head = if basis.breakdown_at().is_some() {
        order
    } else {
        order.saturating_sub(1)
    };

    // d1: residuals of A q_k outside the span.
    let mut d1 = 0.0;
    if head > 0 {
        let mut residuals = nalgebra::DMatrix::<Complex64>::zeros(m, head);
        for k in 0..head {
            let mut w = op.apply(basis.column(k))?;
            orthogonalize_against(&mut w, basis.columns())?;
            for (i, c) in w.coords().iter().enumerate() {
                residuals[(i, k)] = *c;
            }
        }
        d1 = largest_singular_value(residuals)?;
    }

    // d2: Krylov components of A on the complement.
    let complement = orthonormal_complement(op, basis)?;
    let mut d2 = 0.0;
    if !complement.is_empty() {
        let mut compressed = nalgebra::DMatrix::<Complex64>::zeros(order, complement.len());
        for (j, u) in complement.iter().enumerate() {
            let au = op.apply(u)?;
            for (k, q) in basis.columns().iter().enumerate() {
                compressed[(k, j)] = q.inner(&au)?;
            }
        }
        d2 = largest_singular_value(compressed)?;
    }

    Ok(ReducibilityReport {
        d1,
        d2,
        reduced_at_scale: d1 <= tol && d2 <= tol,
        tol,
    })
}

/// Result of the escape diagnostic for one candidate element.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeReport {
    /// `|(1 - P_K) A x|`.
    pub indicator: f64,
    /// Distance of the embedded candidate to the Krylov span; the indicator
    /// is only meaningful when this is small.
    pub membership_distance: f64,
    /// Membership distance within the threshold.
    pub conclusive: bool,
    pub membership_tol: f64,
}

/// Measures how far `A x` leaves the Krylov span for a candidate `x` of the
/// closure-and-domain intersection. A large indicator together with a large
/// membership distance is flagged inconclusive.
pub fn escape_indicator(
    op: &OperatorSpec,
    basis: &KrylovBasis,
    x: &DomainElement,
    membership_tol: f64,
) -> Result<EscapeReport> {
    let embedded = op.embed(x)?;
    let membership_distance = distance_to_krylov(basis, &embedded)?;
    let mut image = op.apply_element(x)?;
    orthogonalize_against(&mut image, basis.columns())?;
    Ok(EscapeReport {
        indicator: image.norm(),
        membership_distance,
        conclusive: membership_distance <= membership_tol,
        membership_tol,
    })
}

/// Graph-norm decay series of the core-condition probe.
#[derive(Debug, Clone, Serialize)]
pub struct CoreDecayReport {
    /// `(N, min over v in K_N of (|x - v|^2 + |A(x - v)|^2)^{1/2})`.
    pub series: Vec<(usize, f64)>,
    /// Whether any stacked system needed singular-value regularization.
    pub regularized: bool,
}

/// For each order in `orders`, solves the graph-norm least-squares problem
/// over `K_N(A, g)` via the stacked system `[Q; AQ] c = [x; Ax]` and reports
/// the residual graph norm.
pub fn core_condition_decay(
    op: &OperatorSpec,
    g: &HVector,
    x: &DomainElement,
    orders: &[usize],
) -> Result<CoreDecayReport> {
    let max_order = orders.iter().copied().max().unwrap_or(1).max(1);
    let basis = build_krylov_basis(op, g, max_order)?;
    let m = op.dim();

    let x_embedded = op.embed(x)?;
    let ax = op.apply_element(x)?;
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(2 * m);
    for i in 0..m {
        rhs[i] = x_embedded.coords()[i];
        rhs[m + i] = ax.coords()[i];
    }

    // Stacked columns [q_k; A q_k], built once at the largest order.
    let available = basis.order();
    let mut stacked = nalgebra::DMatrix::<Complex64>::zeros(2 * m, available);
    for k in 0..available {
        let q = basis.column(k);
        let aq = op.apply(q)?;
        for i in 0..m {
            stacked[(i, k)] = q.coords()[i];
            stacked[(m + i, k)] = aq.coords()[i];
        }
    }

    let mut regularized = false;
    let mut series = Vec::with_capacity(orders.len());
    for &n in orders {
        let cols = n.min(available);
        let sub = stacked.columns(0, cols).clone_owned();
        let svd = sub
            .clone()
            .try_svd(true, true, 1e-14, 10_000)
            .ok_or_else(|| KrylovError::Numerical("SVD did not converge".into()))?;
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let cutoff = 1e-13 * smax;
        if svd.singular_values.iter().any(|&s| s <= cutoff) {
            regularized = true;
        }
        let u = svd.u.as_ref().unwrap();
        let vt = svd.v_t.as_ref().unwrap();
        // c = V S^+ U^H rhs with the cutoff applied.
        let uh_rhs = u.adjoint() * &rhs;
        let mut scaled = nalgebra::DVector::<Complex64>::zeros(svd.singular_values.len());
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > cutoff {
                scaled[i] = uh_rhs[i] / s;
            }
        }
        let c = vt.adjoint() * scaled;
        let residual = &rhs - sub * c;
        series.push((n, residual.norm()));
    }
    Ok(CoreDecayReport { series, regularized })
}

/// Distance of `f` to the span of the images `A q_0, ..., A q_{order-1}` of
/// the Krylov basis columns.
pub fn image_span_distance(
    op: &OperatorSpec,
    basis: &KrylovBasis,
    order: usize,
    f: &HVector,
) -> Result<f64> {
    let order = order.min(basis.order());
    let mut images = Vec::with_capacity(order);
    for q in &basis.columns()[..order] {
        images.push(op.apply(q)?);
    }
    let w = orthonormalize(images, 1e-12)?;
    let mut r = f.clone();
    orthogonalize_against(&mut r, &w)?;
    Ok(r.norm())
}

/// Structured result of a diagnostics run over one problem.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub problem: String,
    pub truncation: usize,
    pub basis_order: usize,
    pub breakdown_at: Option<usize>,
    /// `(N, dist(f_known, K_N))` when a known solution is available.
    pub distances: Vec<(usize, f64)>,
    pub intersection: Option<IntersectionReport>,
    pub reducibility: Option<ReducibilityReport>,
    pub escape: Option<EscapeReport>,
    pub core_decay: Option<CoreDecayReport>,
    pub notes: Vec<String>,
}

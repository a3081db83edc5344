//! Scalar spectral measures, functional calculus, and the polynomial
//! isometry onto the Krylov closure.
//!
//! At desk scale every symmetric operator is materialized and
//! eigendecomposed, so the scalar spectral measure relative to a vector `g`
//! is atomic: an atom `(lambda_i, |<v_i, g>|^2)` per eigenpair. Measure
//! sequences under growing truncation are reported raw, without
//! extrapolation claims about continuous-spectrum limits.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KrylovError, Result};
use crate::linop::{HVector, OperatorSpec};

const MAX_DENSE_DIM: usize = 2000;
const SYMMETRY_RTOL: f64 = 1e-10;

/// One atom of a scalar spectral measure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

/// Atomic scalar spectral measure of a symmetric operator relative to a
/// vector: weights sum to `|g|^2`, eigenvalues ascending, near-coincident
/// eigenvalues merged.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    pub source: String,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `Σ w_i lambda_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.lambda.powi(k as i32))
            .sum()
    }

    /// Two-column CSV `lambda,weight`, one atom per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,weight\n");
        for a in &self.atoms {
            out.push_str(&format!("{:.17e},{:.17e}\n", a.lambda, a.weight));
        }
        out
    }
}

/// Hermitian eigendecomposition of the dense materialization, after the
/// symmetry gate.
fn symmetric_eigen(
    op: &OperatorSpec,
) -> Result<(nalgebra::DVector<f64>, nalgebra::DMatrix<Complex64>)> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(KrylovError::OracleUnavailable(format!(
            "dense eigendecomposition limited to dimension {MAX_DENSE_DIM}, got {}",
            op.dim()
        )));
    }
    let a = op.materialize().map_err(|_| KrylovError::WrongOperatorClass {
        expected: "symmetric",
        detail: format!("{} operators have no dense materialization", op.kind_name()),
    })?;
    let defect = (&a - a.adjoint()).norm();
    let scale = a.norm().max(1.0);
    if defect > SYMMETRY_RTOL * scale {
        return Err(KrylovError::WrongOperatorClass {
            expected: "symmetric",
            detail: format!("asymmetry {defect:.3e} at scale {scale:.3e}"),
        });
    }
    let h = (&a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Scalar spectral measure of a symmetric operator relative to `g`.
pub fn spectral_measure(op: &OperatorSpec, g: &HVector) -> Result<SpectralMeasure> {
    let (lambdas, vectors) = symmetric_eigen(op)?;
    let gv = nalgebra::DVector::from_column_slice(g.coords());
    let mut atoms: Vec<Atom> = Vec::with_capacity(lambdas.len());
    for i in 0..lambdas.len() {
        let overlap = vectors.column(i).adjoint() * &gv;
        atoms.push(Atom {
            lambda: lambdas[i],
            weight: overlap[(0, 0)].norm_sqr(),
        });
    }
    atoms.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    // Merge atoms whose eigenvalues coincide up to 1e-12 of the spread.
    let spread = match (atoms.first(), atoms.last()) {
        (Some(lo), Some(hi)) => (hi.lambda - lo.lambda).max(1.0),
        _ => 1.0,
    };
    let gap = 1e-12 * spread;
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last) if (a.lambda - last.lambda).abs() <= gap => {
                // Weighted position keeps the merged atom where the mass is.
                let w = last.weight + a.weight;
                if w > 0.0 {
                    last.lambda = (last.lambda * last.weight + a.lambda * a.weight) / w;
                }
                last.weight = w;
            }
            _ => merged.push(a),
        }
    }
    Ok(SpectralMeasure {
        atoms: merged,
        source: format!("{} on {}", op.kind_name(), op.space()),
    })
}

/// Growth series `r_k = |A^k g|^{1/k}`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthSeries {
    pub values: Vec<(usize, f64)>,
    /// Power at which the iterate vanished (nilpotent window truncations).
    pub terminated_at: Option<usize>,
}

/// Computes `r_k = |A^k g|^{1/k}` for `k = 1..=k_max` by repeated
/// application, renormalizing every step and accumulating log-scales so that
/// the entries never overflow. For symmetric operators the series approaches
/// the largest spectral radius carrying weight.
pub fn bounded_vector_growth(op: &OperatorSpec, g: &HVector, k_max: usize) -> Result<GrowthSeries> {
    let g_norm = g.norm();
    if g_norm == 0.0 {
        return Err(KrylovError::EmptyBasis);
    }
    let mut u = g.scale(Complex64::new(1.0 / g_norm, 0.0));
    let mut log_norm = g_norm.ln();
    let mut values = Vec::with_capacity(k_max);
    let mut terminated_at = None;
    for k in 1..=k_max {
        let w = op.apply(&u)?;
        let s = w.norm();
        if s == 0.0 {
            terminated_at = Some(k);
            break;
        }
        log_norm += s.ln();
        u = w.scale(Complex64::new(1.0 / s, 0.0));
        values.push((k, (log_norm / k as f64).exp()));
    }
    Ok(GrowthSeries {
        values,
        terminated_at,
    })
}

/// Applies `h(A)` to `g` through the eigendecomposition:
/// `Σ h(lambda_i) <v_i, g> v_i`.
///
/// `h` must be finite on every atom carrying weight above `1e-12 |g|^2`;
/// atoms below that threshold with non-finite values are skipped.
pub fn apply_function(
    op: &OperatorSpec,
    g: &HVector,
    h: impl Fn(f64) -> Complex64,
) -> Result<HVector> {
    let (lambdas, vectors) = symmetric_eigen(op)?;
    let gv = nalgebra::DVector::from_column_slice(g.coords());
    let weight_tol = 1e-12 * g.norm_sqr();
    let mut out = nalgebra::DVector::<Complex64>::zeros(op.dim());
    for i in 0..lambdas.len() {
        let overlap = (vectors.column(i).adjoint() * &gv)[(0, 0)];
        let hv = h(lambdas[i]);
        if !hv.re.is_finite() || !hv.im.is_finite() {
            if overlap.norm_sqr() > weight_tol {
                return Err(KrylovError::Evaluation(format!(
                    "h is not finite at the atom lambda = {} carrying weight {:.3e}",
                    lambdas[i],
                    overlap.norm_sqr()
                )));
            }
            continue;
        }
        out += vectors.column(i).clone_owned() * (hv * overlap);
    }
    HVector::new(out.iter().copied().collect(), op.space().clone())
}

/// Result of the polynomial isometry probe.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    /// Max over trials of `| |h(A)g| - (Σ w_i |h(lambda_i)|^2)^{1/2} |`.
    pub max_discrepancy: f64,
    /// Largest of the two norms seen, for relative comparisons.
    pub scale: f64,
    pub trials: usize,
    pub degree_max: usize,
}

/// Checks `|h(A) g| = |h|_{L^2(measure)}` on random polynomials with
/// coefficients uniform in `[-1, 1]`, evaluated by Horner on the atoms and,
/// independently, by repeated operator application on `g`.
pub fn isometry_check(
    op: &OperatorSpec,
    g: &HVector,
    degree_max: usize,
    trials: usize,
    seed: u64,
) -> Result<IsometryReport> {
    let measure = spectral_measure(op, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_discrepancy: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for _ in 0..trials {
        let degree = rng.random_range(0..=degree_max);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();

        // Route 1: p(A) g by Horner with operator applications only.
        let mut u = g.scale(Complex64::new(coeffs[degree], 0.0));
        for k in (0..degree).rev() {
            u = op.apply(&u)?;
            u.axpy(Complex64::new(coeffs[k], 0.0), g)?;
        }
        let lhs = u.norm();

        // Route 2: the measure side, Horner on the atoms.
        let rhs_sq: f64 = measure
            .atoms
            .iter()
            .map(|a| {
                let mut p = coeffs[degree];
                for k in (0..degree).rev() {
                    p = p * a.lambda + coeffs[k];
                }
                a.weight * p * p
            })
            .sum();
        let rhs = rhs_sq.max(0.0).sqrt();

        max_discrepancy = max_discrepancy.max((lhs - rhs).abs());
        scale = scale.max(lhs).max(rhs);
    }
    Ok(IsometryReport {
        max_discrepancy,
        scale,
        trials,
        degree_max,
    })
}

/// Solves `A f = g` for an injective symmetric operator through the spectral
/// reciprocal `h(lambda) = 1/lambda`.
///
/// Atoms carrying weight above `1e-12 |g|^2` must sit at eigenvalues of
/// modulus above `1e-10` of the spectral spread; a significant atom at
/// numerical zero means the datum leaves the range.
pub fn krylov_solution_via_spectrum(op: &OperatorSpec, g: &HVector) -> Result<HVector> {
    let measure = spectral_measure(op, g)?;
    let spread = match (measure.atoms.first(), measure.atoms.last()) {
        (Some(lo), Some(hi)) => (hi.lambda - lo.lambda).max(1.0),
        _ => 1.0,
    };
    let weight_tol = 1e-12 * g.norm_sqr();
    let lambda_tol = 1e-10 * spread;
    for a in &measure.atoms {
        if a.weight > weight_tol && a.lambda.abs() <= lambda_tol {
            return Err(KrylovError::NotInRange(format!(
                "atom at lambda = {:.3e} carries weight {:.3e}",
                a.lambda, a.weight
            )));
        }
    }
    apply_function(op, g, |lambda| {
        if lambda.abs() <= lambda_tol {
            // Unexcited kernel directions contribute nothing.
            Complex64::ZERO
        } else {
            Complex64::new(1.0 / lambda, 0.0)
        }
    })
}

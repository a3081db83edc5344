//! Shared oracles for the integration suites.
//!
//! Everything here is deliberately independent of the production code paths
//! it checks: distances come from explicitly orthogonalized raw power
//! vectors, solutions from dense factorizations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use krylovlab::linop::{HVector, OperatorSpec, SpaceId};

pub fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Orthonormalized raw power vectors `{g, Ag, ..., A^{n-1} g}`. Each power
/// is normalized before orthogonalization — scaling leaves the span
/// untouched but keeps factorially decaying powers representable. The
/// returned length is the numerical rank the raw powers could deliver; when
/// the powers converge in direction, it can fall short of `n`, and orders
/// beyond it are not represented by this oracle.
pub fn brute_force_basis(op: &OperatorSpec, g: &HVector, n: usize) -> Vec<HVector> {
    let mut powers = Vec::with_capacity(n);
    let mut v = g.clone();
    for _ in 0..n {
        powers.push(v.scale(cx(1.0 / v.norm())));
        v = op.apply(&v).unwrap();
        if v.norm() == 0.0 {
            break;
        }
    }
    let mut basis: Vec<HVector> = Vec::new();
    for mut w in powers {
        for _ in 0..2 {
            for q in &basis {
                let c = q.inner(&w).unwrap();
                w.axpy(-c, q).unwrap();
            }
        }
        let norm = w.norm();
        if norm <= 1e-13 {
            break;
        }
        basis.push(w.scale(cx(1.0 / norm)));
    }
    basis
}

/// Distance of `f` to the span of the first `order` oracle directions.
pub fn project_out(basis: &[HVector], order: usize, f: &HVector) -> f64 {
    let order = order.min(basis.len());
    let mut r = f.clone();
    for _ in 0..2 {
        for q in &basis[..order] {
            let c = q.inner(&r).unwrap();
            r.axpy(-c, q).unwrap();
        }
    }
    r.norm()
}

/// Brute-force distance of `f` to `span{g, Ag, ..., A^{n-1} g}`.
pub fn brute_force_distance(op: &OperatorSpec, g: &HVector, n: usize, f: &HVector) -> f64 {
    let basis = brute_force_basis(op, g, n);
    project_out(&basis, n, f)
}

/// Random unitary matrix from the QR factorization of a random complex one.
pub fn random_unitary(m: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    a.qr().q()
}

/// Hermitian operator with prescribed eigenvalues in a random eigenbasis.
/// Returns the operator, the eigenbasis (columns), and the dense matrix.
pub fn hermitian_with_spectrum(
    eigenvalues: &[f64],
    space: SpaceId,
    rng: &mut impl Rng,
) -> (OperatorSpec, DMatrix<Complex64>, DMatrix<Complex64>) {
    let m = eigenvalues.len();
    let v = random_unitary(m, rng);
    let d = DMatrix::from_fn(m, m, |i, j| if i == j { cx(eigenvalues[i]) } else { Complex64::ZERO });
    let a = &v * d * v.adjoint();
    // Exact Hermitization kills rounding asymmetry from the triple product.
    let a = (&a + a.adjoint()).scale(0.5);
    (OperatorSpec::dense(a.clone(), space).unwrap(), v, a)
}

/// Dense direct solve, the oracle for the injective systems.
pub fn direct_solve(op: &OperatorSpec, g: &HVector) -> HVector {
    let a = op.materialize().unwrap();
    let rhs = nalgebra::DVector::from_column_slice(g.coords());
    let sol = a.lu().solve(&rhs).expect("oracle system is invertible");
    HVector::new(sol.iter().copied().collect(), op.space().clone()).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random vector in the span of the eigenvectors listed in `support`.
pub fn vector_in_eigenspan(
    v: &DMatrix<Complex64>,
    support: &[usize],
    space: SpaceId,
    rng: &mut impl Rng,
) -> HVector {
    let m = v.nrows();
    let mut out = nalgebra::DVector::<Complex64>::zeros(m);
    for &i in support {
        let c = Complex64::new(rng.random_range(0.2..1.0), rng.random_range(-1.0..1.0));
        out += v.column(i).clone_owned() * c;
    }
    HVector::new(out.iter().copied().collect(), space).unwrap()
}

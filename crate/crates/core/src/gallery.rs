//! Constructors for the worked operator/datum pairs, each bundled with its
//! known analytic facts as machine-checkable claims.
//!
//! Every constructor returns a [`GalleryProblem`]: an operator, a datum, an
//! optional known solution, and a list of [`Fact`]s that the fact runner
//! (see [`crate::facts`]) can execute against the `krylov`, `cg`, and
//! `spectral` modules. Facts carry frozen expected values; the derived ones
//! were computed from independent oracles (partial sums, refined quadrature,
//! dense least squares) at the default truncations, and are guaranteed to
//! pass there.

use num_complex::Complex64;

use crate::error::{KrylovError, Result};
use crate::linop::{DomainElement, HVector, OperatorSpec, SpaceId};
use crate::quad::{gauss_legendre_on, CompositeRule};

/// `Σ_n (1/n!)^2`, the squared norm of the factorial-decay datum.
pub const FACTORIAL_DATUM_NORM_SQ: f64 = 2.2795853023360673;

/// `sqrt(Σ_{n >= 1} (3!/(n+3)!)^2)`, the third-power spot value of the
/// left-shift problem, from the partial-sum oracle.
pub const LEFT_SHIFT_SPOT_L3: f64 = 0.2550899529546815;

/// `π ln(4/3) = ∫ |z|^{-2} dA` over the disk `|z - 2| < 1`, the squared norm
/// of the reciprocal solution; cross-checked against a refined quadrature.
pub const ANNULUS_SOLUTION_NORM_SQ: f64 = 0.9037798853840013;

/// `∫_0^1 x^4/4 dx`, the squared norm of the parabola datum.
pub const VOLTERRA_DATUM_NORM_SQ: f64 = 0.05;

/// Default trailing-window trim for shift truncations.
pub const DEFAULT_BOUNDARY_MARGIN: usize = 8;

/// Which vector of the problem a fact refers to.
#[derive(Debug, Clone)]
pub enum TargetVector {
    KnownSolution,
    Datum,
    Vector(HVector),
}

/// A machine-checkable claim about a gallery problem.
#[derive(Debug, Clone)]
pub enum FactCheck {
    /// `|A f_known - g| <= tol * max(1, |g|)`.
    KnownSolutionResidual { tol: f64 },
    /// `|A x - expected| <= tol` for a domain element `x`.
    ApplyElemEquals {
        input: DomainElement,
        expected: HVector,
        tol: f64,
    },
    /// `| |A v| - expected | <= tol`.
    ApplyNormEquals {
        input: HVector,
        expected: f64,
        tol: f64,
    },
    /// `| (|x|^2 + |Ax|^2)^{1/2} - expected | <= tol`.
    GraphNormEquals {
        input: DomainElement,
        expected: f64,
        tol: f64,
    },
    /// `| |v|^2 - expected | <= tol`.
    NormSquaredEquals {
        target: TargetVector,
        expected: f64,
        tol: f64,
    },
    /// `| |scale * A^power g - reference| - expected | <= tol`.
    PowerResidualNorm {
        power: usize,
        scale: f64,
        reference: HVector,
        expected: f64,
        tol: f64,
    },
    /// `dist(v, K_N) = expected` within `tol` for every listed order.
    DistanceEquals {
        target: TargetVector,
        orders: Vec<usize>,
        expected: f64,
        tol: f64,
    },
    /// `dist(v, K_N) < threshold` for some `N <= max_order`.
    DistanceBelow {
        target: TargetVector,
        threshold: f64,
        max_order: usize,
    },
    /// Distance series nonincreasing (within `1e-12` slack), and strictly
    /// decreasing while above `floor`.
    DistanceDecreasing {
        target: TargetVector,
        max_order: usize,
        floor: f64,
    },
    /// `dist(v, K_N) >= lower` at the given order.
    DistanceAtLeast {
        target: TargetVector,
        order: usize,
        lower: f64,
    },
    /// Least-squares slope of `ln dist(v, K_N)` over `order_lo..=order_hi`
    /// at most `max_slope`.
    LogDistanceSlopeAtMost {
        target: TargetVector,
        order_lo: usize,
        order_hi: usize,
        max_slope: f64,
    },
    /// `dist(v, span{A q_0, ..., A q_{N-1}}) = expected` within `tol`.
    ImageSpanDistanceEquals {
        target: TargetVector,
        order: usize,
        expected: f64,
        tol: f64,
    },
    /// Krylov-intersection dimension at the given basis order, with an
    /// optional cap on the smallest principal angle when `expected > 0`.
    IntersectionDim {
        order: usize,
        expected: usize,
        tol: f64,
        max_smallest_angle: Option<f64>,
    },
    /// Both reducibility defects at most `tol` at the given basis order.
    ReducibilityDefectsAtMost { order: usize, tol: f64 },
    /// `|(1 - P_K) A x| = expected` within `tol`, with the membership
    /// distance of `x` required below `membership_tol`.
    EscapeIndicatorEquals {
        x: DomainElement,
        order: usize,
        expected: f64,
        tol: f64,
        membership_tol: f64,
    },
    /// Graph-norm decay series strictly decreasing and below `threshold` at
    /// the final listed order.
    CoreDecayBelow {
        x: DomainElement,
        orders: Vec<usize>,
        threshold: f64,
    },
    /// Kernel dimension of the dense materialization (singular values below
    /// `1e-10 σ_max`).
    KernelDimEquals { expected: usize },
}

#[derive(Debug, Clone)]
pub struct Fact {
    pub id: String,
    pub description: String,
    pub check: FactCheck,
}

impl Fact {
    fn new(id: &str, description: &str, check: FactCheck) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            check,
        }
    }
}

/// An operator/datum pair with its known analytic facts.
#[derive(Debug, Clone)]
pub struct GalleryProblem {
    pub id: String,
    pub description: String,
    pub op: OperatorSpec,
    pub g: HVector,
    pub known_solution: Option<HVector>,
    pub facts: Vec<Fact>,
    /// Dimension of the truncation in use.
    pub truncation: usize,
    /// Candidate element for the escape diagnostic, when meaningful.
    pub escape_probe: Option<DomainElement>,
    /// Candidate element for the graph-norm density diagnostic.
    pub core_probe: Option<DomainElement>,
    pub notes: Vec<String>,
}

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

const FINITE_SCALE_NOTE: &str =
    "finite-truncation evidence only: a window of finite dimension cannot witness \
     closure or domain subtleties of the infinite model";

/// Multiplication by `z` on a polar tensor quadrature grid of the disk
/// `|z - 2| < 1`, with datum the constant function one.
///
/// Radial Gauss–Legendre times equispaced angles, with the area weights
/// folded into the coordinates so the discrete space is orthonormal and the
/// operator exactly diagonal. The known solution samples `1/z`; its distance
/// to the order-N Krylov spaces decays geometrically at ratio about one half
/// (the largest node modulus over the distance of the disk center from the
/// origin).
pub fn multiplication_annulus(n_grid: usize) -> Result<GalleryProblem> {
    if n_grid < 8 {
        return Err(KrylovError::InvalidParameter(format!(
            "annulus grid needs n_grid >= 8, got {n_grid}"
        )));
    }
    let n_radial = n_grid;
    let n_angular = 2 * n_grid;
    let m = n_radial * n_angular;
    let space = SpaceId::new(format!("annulus({n_radial}x{n_angular})"), m);

    let (rho, w_rho) = gauss_legendre_on(0.0, 1.0, n_radial)?;
    let w_theta = 2.0 * std::f64::consts::PI / n_angular as f64;

    let mut z = Vec::with_capacity(m);
    let mut sqrt_w = Vec::with_capacity(m);
    for i in 0..n_radial {
        for k in 0..n_angular {
            let theta = w_theta * k as f64;
            z.push(Complex64::new(2.0 + rho[i] * theta.cos(), rho[i] * theta.sin()));
            sqrt_w.push((w_rho[i] * rho[i] * w_theta).sqrt());
        }
    }

    let op = OperatorSpec::diagonal(z.clone(), space.clone())?;
    let g = HVector::new(sqrt_w.iter().map(|&s| cx(s)).collect(), space.clone())?;
    let f = HVector::new(
        sqrt_w.iter().zip(&z).map(|(&s, zj)| cx(s) / zj).collect(),
        space,
    )?;

    let facts = vec![
        Fact::new(
            "residual",
            "the sampled reciprocal solves the multiplication problem exactly",
            FactCheck::KnownSolutionResidual { tol: 1e-10 },
        ),
        Fact::new(
            "solution-norm-sq",
            "squared norm of the reciprocal matches the area integral of |z|^-2",
            FactCheck::NormSquaredEquals {
                target: TargetVector::KnownSolution,
                expected: ANNULUS_SOLUTION_NORM_SQ,
                tol: 1e-8,
            },
        ),
        Fact::new(
            "geometric-decay",
            "log-distance of the solution to K_N decays with slope at most -0.60",
            FactCheck::LogDistanceSlopeAtMost {
                target: TargetVector::KnownSolution,
                order_lo: 5,
                order_hi: 25,
                max_slope: -0.60,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "annulus".into(),
        description: "multiplication by z on a quadrature grid of the disk |z-2|<1, datum = 1"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: m,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Left shift with unit weights on the window `{0..M-1}`, factorial-decay
/// datum `g_n = 1/n!`; the shifted factorials solve the problem and the
/// Krylov spaces approximate them fast.
pub fn left_shift_problem(m: usize) -> Result<GalleryProblem> {
    if m < 24 {
        return Err(KrylovError::InvalidParameter(format!(
            "left-shift window needs M >= 24, got {m}"
        )));
    }
    let space = SpaceId::new(format!("ell2N({m})"), m);
    // Recursive generation; never forms k! explicitly.
    let mut g = vec![0.0f64; m];
    g[0] = 1.0;
    for n in 1..m {
        g[n] = g[n - 1] / n as f64;
    }
    let mut f = vec![0.0f64; m];
    f[1] = 1.0;
    for n in 2..m {
        f[n] = f[n - 1] / (n - 1) as f64;
    }
    let op = OperatorSpec::weighted_shift(-1, vec![Complex64::ONE; m], space.clone())?
        .with_boundary_margin(DEFAULT_BOUNDARY_MARGIN);
    let g = HVector::from_real(&g, space.clone())?;
    let f = HVector::from_real(&f, space.clone())?;
    let e0 = HVector::basis(space, 0)?;

    let facts = vec![
        Fact::new(
            "residual",
            "the shifted factorial sequence solves the problem on interior indices",
            FactCheck::KnownSolutionResidual { tol: 1e-10 },
        ),
        Fact::new(
            "datum-norm-sq",
            "squared norm of the datum equals the factorial series limit",
            FactCheck::NormSquaredEquals {
                target: TargetVector::Datum,
                expected: FACTORIAL_DATUM_NORM_SQ,
                tol: 1e-7,
            },
        ),
        Fact::new(
            "spot-l3",
            "|3! L^3 g - e_0| matches the partial-sum value",
            FactCheck::PowerResidualNorm {
                power: 3,
                scale: 6.0,
                reference: e0,
                expected: LEFT_SHIFT_SPOT_L3,
                tol: 1e-3,
            },
        ),
        Fact::new(
            "solution-approachable",
            "distance of the solution to K_N drops below 1e-6 by N = 12",
            FactCheck::DistanceBelow {
                target: TargetVector::KnownSolution,
                threshold: 1e-6,
                max_order: 12,
            },
        ),
        Fact::new(
            "distance-decreasing",
            "the distance series decreases strictly until it reaches noise level",
            FactCheck::DistanceDecreasing {
                target: TargetVector::KnownSolution,
                max_order: 80,
                floor: 1e-12,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "left-shift".into(),
        description: "left shift on a window, factorial-decay datum; solvable from the \
                      Krylov space"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: m,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Right shift on a two-sided window of size `2M + 1` with datum `e_2`
/// (indices relative to the window center). The solution `e_1` is orthogonal
/// to every Krylov space, and the Krylov intersection is one-dimensional.
pub fn right_shift_problem(m: usize) -> Result<GalleryProblem> {
    if m < 16 {
        return Err(KrylovError::InvalidParameter(format!(
            "right-shift half-window needs M >= 16, got {m}"
        )));
    }
    let dim = 2 * m + 1;
    let center = m;
    let space = SpaceId::new(format!("ell2Z({dim})"), dim);
    let op = OperatorSpec::weighted_shift(1, vec![Complex64::ONE; dim], space.clone())?
        .with_boundary_margin(DEFAULT_BOUNDARY_MARGIN);
    let g = HVector::basis(space.clone(), center + 2)?;
    let f = HVector::basis(space, center + 1)?;

    let facts = vec![
        Fact::new(
            "residual",
            "shifting the solution reproduces the datum exactly",
            FactCheck::KnownSolutionResidual { tol: 1e-14 },
        ),
        Fact::new(
            "distance-one",
            "the solution stays at distance exactly one from every Krylov order",
            FactCheck::DistanceEquals {
                target: TargetVector::KnownSolution,
                orders: (1..=100).collect(),
                expected: 1.0,
                tol: 1e-12,
            },
        ),
        Fact::new(
            "intersection-dim",
            "the Krylov intersection is one-dimensional with a vanishing principal angle",
            FactCheck::IntersectionDim {
                order: 100,
                expected: 1,
                tol: 1e-8,
                max_smallest_angle: Some(1e-8),
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "right-shift".into(),
        description: "two-sided right shift, datum = e_2; the solution e_1 is unreachable \
                      from the Krylov space"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: dim,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Builds the matrix of the cumulative-integration operator
/// `(Vf)(x) = ∫_0^x f(t) dt` on a composite Gauss–Legendre rule, acting on
/// the orthonormalized coordinates `c_j = f(x_j) sqrt(w_j)`.
///
/// Within the panel containing the target node the integral of each Lagrange
/// cardinal function is evaluated by a same-order sub-rule, which is exact
/// for the interpolating polynomial.
fn volterra_matrix(rule: &CompositeRule) -> Result<nalgebra::DMatrix<Complex64>> {
    let m = rule.len();
    let p = rule.points_per_panel;
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let panel = rule.panel_of(i);
        let start = rule.panel_edges[panel];
        let xi = rule.nodes[i];
        // Full panels strictly before the target's panel.
        for j in 0..panel * p {
            a[(i, j)] = rule.weights[j];
        }
        // Partial panel: integrate the Lagrange basis over [start, xi].
        let t = &rule.nodes[panel * p..(panel + 1) * p];
        let (s_nodes, s_weights) = gauss_legendre_on(start, xi, p)?;
        for (jj, &tj) in t.iter().enumerate() {
            let mut integral = 0.0;
            for (sm, um) in s_nodes.iter().zip(&s_weights) {
                let mut card = 1.0;
                for (kk, &tk) in t.iter().enumerate() {
                    if kk != jj {
                        card *= (sm - tk) / (tj - tk);
                    }
                }
                integral += um * card;
            }
            a[(i, panel * p + jj)] = integral;
        }
    }
    // Conjugate by the square-root weights for the orthonormal coordinates.
    let mut b = nalgebra::DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] = cx(a[(i, j)] * (rule.weights[i] / rule.weights[j]).sqrt());
        }
    }
    Ok(b)
}

/// Cumulative integration on `[0, 1]` discretized by composite
/// Gauss–Legendre panels (8 points each), with datum `x^2/2` and solution
/// `x`. The Krylov spaces are spanned by discretizations of
/// `x^2, x^3, ...`, which approximate the solution at an algebraic rate.
pub fn volterra_problem(n_quad: usize) -> Result<GalleryProblem> {
    const POINTS_PER_PANEL: usize = 8;
    if n_quad < 2 * POINTS_PER_PANEL {
        return Err(KrylovError::InvalidParameter(format!(
            "cumulative-integration rule needs n_quad >= 16, got {n_quad}"
        )));
    }
    let panels = n_quad / POINTS_PER_PANEL;
    let rule = CompositeRule::new(0.0, 1.0, panels, POINTS_PER_PANEL)?;
    let m = rule.len();
    let space = SpaceId::new(format!("volterra-gl({m})"), m);
    let matrix = volterra_matrix(&rule)?;
    let op = OperatorSpec::quadrature_integral(
        rule.nodes.clone(),
        rule.weights.clone(),
        matrix,
        space.clone(),
    )?;
    let g_coords: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| 0.5 * x * x * w.sqrt())
        .collect();
    let f_coords: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| x * w.sqrt())
        .collect();
    let g = HVector::from_real(&g_coords, space.clone())?;
    let f = HVector::from_real(&f_coords, space)?;

    let facts = vec![
        Fact::new(
            "residual",
            "integrating the identity function reproduces the parabola datum",
            FactCheck::KnownSolutionResidual { tol: 1e-8 },
        ),
        Fact::new(
            "datum-norm-sq",
            "squared norm of the datum equals its closed-form integral 1/20",
            FactCheck::NormSquaredEquals {
                target: TargetVector::Datum,
                expected: VOLTERRA_DATUM_NORM_SQ,
                tol: 1e-10,
            },
        ),
        Fact::new(
            "solution-approachable",
            "distance of the solution to K_N drops below 1e-3 by N = 60",
            FactCheck::DistanceBelow {
                target: TargetVector::KnownSolution,
                threshold: 1e-3,
                max_order: 60,
            },
        ),
        Fact::new(
            "distance-decreasing",
            "the distance series decreases along the orders",
            FactCheck::DistanceDecreasing {
                target: TargetVector::KnownSolution,
                max_order: 60,
                floor: 1e-12,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "volterra".into(),
        description: "cumulative integration on [0,1], datum = x^2/2; dense Krylov space"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: m,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Raising operator in an orthonormal oscillator basis, `A e_n = sqrt(n+1)
/// e_{n+1}`, with datum `e_1`. The Krylov closure misses `e_0`, and the image
/// of the Krylov space additionally misses `e_1`.
pub fn creation_hermite(m: usize) -> Result<GalleryProblem> {
    if m < 16 {
        return Err(KrylovError::InvalidParameter(format!(
            "raising-operator window needs M >= 16, got {m}"
        )));
    }
    let space = SpaceId::new(format!("oscillator({m})"), m);
    let weights = (0..m).map(|n| cx(((n + 1) as f64).sqrt())).collect();
    let op = OperatorSpec::weighted_shift(1, weights, space.clone())?
        .with_boundary_margin(DEFAULT_BOUNDARY_MARGIN);
    let g = HVector::basis(space.clone(), 1)?;
    let e0 = HVector::basis(space.clone(), 0)?;
    let e1 = g.clone();
    let e3 = HVector::basis(space, 3)?;

    let facts = vec![
        Fact::new(
            "ground-state-unreachable",
            "e_0 stays at distance one from every Krylov order",
            FactCheck::DistanceEquals {
                target: TargetVector::Vector(e0),
                orders: (1..=24).collect(),
                expected: 1.0,
                tol: 1e-12,
            },
        ),
        Fact::new(
            "datum-outside-image",
            "e_1 stays at distance one from the image of the Krylov space",
            FactCheck::ImageSpanDistanceEquals {
                target: TargetVector::Vector(e1),
                order: 24,
                expected: 1.0,
                tol: 1e-12,
            },
        ),
        Fact::new(
            "weight-on-e3",
            "|A e_3| = 2",
            FactCheck::ApplyNormEquals {
                input: e3,
                expected: 2.0,
                tol: 1e-12,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "creation".into(),
        description: "raising operator A e_n = sqrt(n+1) e_{n+1}, datum = e_1".into(),
        op,
        g,
        known_solution: None,
        facts,
        truncation: m,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Weighted shift `A e_n = (n+1) e_{n+1}` with datum `e_0`; the graph-norm
/// density probe uses the square-summable tail vector `x_n = 1/(n+1)^2`.
pub fn weighted_shift_np1(m: usize) -> Result<GalleryProblem> {
    if m < 16 {
        return Err(KrylovError::InvalidParameter(format!(
            "weighted-shift window needs M >= 16, got {m}"
        )));
    }
    let space = SpaceId::new(format!("ell2N({m})"), m);
    let weights = (0..m).map(|n| cx((n + 1) as f64)).collect();
    let op = OperatorSpec::weighted_shift(1, weights, space.clone())?
        .with_boundary_margin(DEFAULT_BOUNDARY_MARGIN);
    let g = HVector::basis(space.clone(), 0)?;

    let mut x = vec![0.0f64; m];
    for (n, slot) in x.iter_mut().enumerate().skip(1) {
        *slot = 1.0 / ((n + 1) as f64 * (n + 1) as f64);
    }
    let core_probe = DomainElement::plain(HVector::from_real(&x, space.clone())?);
    let e0_elem = DomainElement::plain(HVector::basis(space, 0)?);

    let mut orders: Vec<usize> = vec![2, 5, 10, 15, 20, 25];
    orders.retain(|&n| n < m);
    orders.push(m);

    let facts = vec![
        Fact::new(
            "graph-norm-of-datum",
            "|e_0|_A = sqrt(2)",
            FactCheck::GraphNormEquals {
                input: e0_elem,
                expected: 2f64.sqrt(),
                tol: 1e-12,
            },
        ),
        Fact::new(
            "core-decay",
            "graph-norm distance of the tail probe to K_N decreases and reaches 1e-6",
            FactCheck::CoreDecayBelow {
                x: core_probe.clone(),
                orders,
                threshold: 1e-6,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "weighted-shift".into(),
        description: "weighted shift A e_n = (n+1) e_{n+1}, datum = e_0; graph-norm \
                      density probe"
            .into(),
        op,
        g,
        known_solution: None,
        facts,
        truncation: m,
        escape_probe: None,
        core_probe: Some(core_probe),
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Domain-extension operator realizing an escape from the Krylov closure.
///
/// On `H = span{e_0} ⊕ H'` the base operator is `T = diag(0, 1, ..., M)`;
/// the datum `g' (g'_n = decay^n)` excites all eigenvalues of the primed
/// block, so the Krylov closure at full order is exactly `H'`. The harmonic
/// vector `x_0 (x_0)_n = 1/n` lies in that closure, but the extension rule
/// maps it to `e_0`, orthogonal to it: the escape indicator is exactly one.
pub fn escape_operator(m: usize, decay: f64) -> Result<GalleryProblem> {
    if !(0.0..1.0).contains(&decay) || decay == 0.0 {
        return Err(KrylovError::InvalidParameter(format!(
            "escape datum decay must lie in (0, 1), got {decay}"
        )));
    }
    if m < 8 {
        return Err(KrylovError::InvalidParameter(format!(
            "escape construction needs M >= 8, got {m}"
        )));
    }
    let dim = m + 1;
    let space = SpaceId::new(format!("escape({dim})"), dim);
    let diag: Vec<Complex64> = (0..dim).map(|n| cx(n as f64)).collect();
    let base = OperatorSpec::diagonal(diag, space.clone())?;

    let mut x0 = vec![0.0f64; dim];
    let mut g = vec![0.0f64; dim];
    let mut f = vec![0.0f64; dim];
    for n in 1..dim {
        x0[n] = 1.0 / n as f64;
        g[n] = decay.powi(n as i32);
        f[n] = g[n] / n as f64;
    }
    let x0 = HVector::from_real(&x0, space.clone())?;
    let g = HVector::from_real(&g, space.clone())?;
    let f = HVector::from_real(&f, space.clone())?;
    let e0 = HVector::basis(space.clone(), 0)?;
    let op = OperatorSpec::domain_extension(base, x0.clone(), e0.clone())?;

    let probe = DomainElement::new(HVector::zeros(space), Complex64::ONE);

    let facts = vec![
        Fact::new(
            "fiat-rule",
            "the extension element (t = 0, mu = 1) maps exactly to e_0",
            FactCheck::ApplyElemEquals {
                input: probe.clone(),
                expected: e0,
                tol: 1e-14,
            },
        ),
        Fact::new(
            "residual",
            "dividing the datum by the eigenvalues solves the problem",
            FactCheck::KnownSolutionResidual { tol: 1e-10 },
        ),
        Fact::new(
            "probe-in-closure",
            "the special vector is approachable from the Krylov spaces",
            FactCheck::DistanceBelow {
                target: TargetVector::Vector(x0),
                threshold: 1e-6,
                max_order: m,
            },
        ),
        Fact::new(
            "escape-indicator",
            "the image of the special vector leaves the Krylov closure with norm one",
            FactCheck::EscapeIndicatorEquals {
                x: probe.clone(),
                order: m,
                expected: 1.0,
                tol: 1e-12,
                membership_tol: 1e-6,
            },
        ),
    ];

    Ok(GalleryProblem {
        id: "escape".into(),
        description: "domain extension of a diagonal operator whose extra direction maps \
                      a closure element out of the Krylov closure"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: dim,
        escape_probe: Some(probe.clone()),
        core_probe: Some(probe),
        notes: vec![
            FINITE_SCALE_NOTE.into(),
            "the escape is carried by the extension rule: at any finite truncation the \
             special vector lies inside the window, so the indicator probes the rule, \
             not the truncated matrix"
                .into(),
        ],
    })
}

/// Direct sum of an injective diagonal block (distinct eigenvalues, full
/// support datum) with a rank-one projector on a second copy of the space.
/// The inverse problem keeps one solution inside the Krylov closure and a
/// family of solutions outside it.
pub fn noninjective_direct_sum(m: usize) -> Result<GalleryProblem> {
    if m < 8 {
        return Err(KrylovError::InvalidParameter(format!(
            "direct-sum construction needs M >= 8, got {m}"
        )));
    }
    let dim = 2 * m;
    let space = SpaceId::new(format!("doubled({dim})"), dim);
    let mut a = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
    let mut g = vec![0.0f64; dim];
    let mut f = vec![0.0f64; dim];
    for n in 0..m {
        let d = (n + 1) as f64;
        a[(n, n)] = cx(d);
        g[n] = 0.5f64.powi(n as i32 + 1);
        f[n] = g[n] / d;
    }
    // Rank-one projector |e_0><e_0| on the second block.
    a[(m, m)] = Complex64::ONE;
    let op = OperatorSpec::dense(a, space.clone())?;
    let g = HVector::from_real(&g, space.clone())?;
    let f = HVector::from_real(&f, space.clone())?;

    // A second solution f + xi with xi in the second block, orthogonal to the
    // projector axis.
    let mut f_alt = f.clone();
    f_alt.coords_mut()[m + 1] = Complex64::ONE;

    let facts = vec![
        Fact::new(
            "residual",
            "the diagonal-block solution solves the doubled problem",
            FactCheck::KnownSolutionResidual { tol: 1e-12 },
        ),
        Fact::new(
            "alternative-solution",
            "adding a vector from the projector kernel still solves the problem",
            FactCheck::ApplyElemEquals {
                input: DomainElement::plain(f_alt.clone()),
                expected: g.clone(),
                tol: 1e-12,
            },
        ),
        Fact::new(
            "krylov-solution-approachable",
            "the block solution is approachable from the Krylov spaces",
            FactCheck::DistanceBelow {
                target: TargetVector::KnownSolution,
                threshold: 1e-6,
                max_order: m,
            },
        ),
        Fact::new(
            "alternative-stays-away",
            "the alternative solution keeps distance at least |xi| from the Krylov span",
            FactCheck::DistanceAtLeast {
                target: TargetVector::Vector(f_alt),
                order: dim,
                lower: 1.0 - 1e-9,
            },
        ),
        Fact::new(
            "kernel-dim",
            "the kernel has dimension M - 1, all of it in the second block",
            FactCheck::KernelDimEquals { expected: m - 1 },
        ),
    ];

    Ok(GalleryProblem {
        id: "noninjective".into(),
        description: "injective diagonal block plus rank-one projector: solutions inside \
                      and outside the Krylov closure"
            .into(),
        op,
        g,
        known_solution: Some(f),
        facts,
        truncation: dim,
        escape_probe: None,
        core_probe: None,
        notes: vec![FINITE_SCALE_NOTE.into()],
    })
}

/// Optional parameters for gallery constructors addressed by id.
#[derive(Debug, Clone, Default)]
pub struct ProblemParams {
    pub m: Option<usize>,
    pub n_grid: Option<usize>,
    pub n_quad: Option<usize>,
    pub decay: Option<f64>,
}

/// Stable id, default parameters, and a one-line description per problem.
pub fn catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        (
            "annulus",
            "n_grid=16",
            "multiplication by z on the disk |z-2|<1, datum = 1",
        ),
        (
            "left-shift",
            "M=100",
            "left shift with factorial-decay datum; Krylov-approachable solution",
        ),
        (
            "right-shift",
            "M=256",
            "two-sided right shift with datum e_2; solution unreachable",
        ),
        (
            "volterra",
            "n_quad=256",
            "cumulative integration on [0,1] with datum x^2/2",
        ),
        (
            "creation",
            "M=64",
            "raising operator with datum e_1; closure misses the ground state",
        ),
        (
            "weighted-shift",
            "M=30",
            "weighted shift (n+1) with graph-norm density probe",
        ),
        (
            "escape",
            "M=30, decay=0.5",
            "domain extension mapping a closure element out of the closure",
        ),
        (
            "noninjective",
            "M=20",
            "diagonal block plus rank-one projector; solutions on both sides",
        ),
    ]
}

/// Builds a problem by stable id, taking defaults for missing parameters.
pub fn by_id(id: &str, params: &ProblemParams) -> Result<GalleryProblem> {
    match id {
        "annulus" => multiplication_annulus(params.n_grid.unwrap_or(16)),
        "left-shift" => left_shift_problem(params.m.unwrap_or(100)),
        "right-shift" => right_shift_problem(params.m.unwrap_or(256)),
        "volterra" => volterra_problem(params.n_quad.unwrap_or(256)),
        "creation" => creation_hermite(params.m.unwrap_or(64)),
        "weighted-shift" => weighted_shift_np1(params.m.unwrap_or(30)),
        "escape" => escape_operator(params.m.unwrap_or(30), params.decay.unwrap_or(0.5)),
        "noninjective" => noninjective_direct_sum(params.m.unwrap_or(20)),
        other => Err(KrylovError::InvalidParameter(format!(
            "unknown problem id `{other}`; see the gallery listing"
        ))),
    }
}

/// Every gallery problem at its default truncation.
pub fn default_problems() -> Result<Vec<GalleryProblem>> {
    catalog()
        .iter()
        .map(|(id, _, _)| by_id(id, &ProblemParams::default()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_at_least_eight_problems() {
        assert!(catalog().len() >= 8);
        assert!(catalog().iter().any(|(id, _, _)| *id == "escape"));
        assert!(catalog().iter().any(|(id, _, _)| *id == "creation"));
    }

    #[test]
    fn every_known_solution_satisfies_the_equation() {
        for problem in default_problems().unwrap() {
            if let Some(f) = &problem.known_solution {
                let residual = problem
                    .op
                    .apply(f)
                    .unwrap()
                    .sub(&problem.g)
                    .unwrap()
                    .norm();
                let tol = 1e-8 * problem.g.norm().max(1.0);
                assert!(
                    residual <= tol,
                    "{}: residual {residual:.3e} above {tol:.3e}",
                    problem.id
                );
            }
        }
    }

    #[test]
    fn annulus_multiplication_is_diagonal_on_nodes() {
        let p = multiplication_annulus(8).unwrap();
        let out = p.op.apply(&p.g).unwrap();
        // Each output coordinate is the node value times the datum coordinate.
        match p.op.kind() {
            crate::linop::OpKind::Diagonal(z) => {
                for ((o, gi), zi) in out.coords().iter().zip(p.g.coords()).zip(z) {
                    assert!((o - zi * gi).norm() < 1e-15);
                }
            }
            _ => panic!("annulus operator should be diagonal"),
        }
    }

    #[test]
    fn annulus_solution_norm_matches_refined_quadrature_oracle() {
        let p = multiplication_annulus(16).unwrap();
        let discrete = p.known_solution.as_ref().unwrap().norm_sqr();
        // Oracle: same integral on a three-times-refined grid.
        let refined = multiplication_annulus(48).unwrap();
        let oracle = refined.known_solution.as_ref().unwrap().norm_sqr();
        assert!((discrete - oracle).abs() < 1e-8);
        assert!((oracle - ANNULUS_SOLUTION_NORM_SQ).abs() < 1e-12);
    }

    #[test]
    fn left_shift_datum_norm_matches_partial_sum_oracle() {
        let p = left_shift_problem(100).unwrap();
        // Partial-sum oracle for the squared norm.
        let mut sum = 0.0;
        let mut term = 1.0f64;
        for n in 0..40 {
            if n > 0 {
                term /= n as f64;
            }
            sum += term * term;
        }
        assert!((p.g.norm_sqr() - sum).abs() < 1e-14);
        assert!((sum - FACTORIAL_DATUM_NORM_SQ).abs() < 1e-14);
    }

    #[test]
    fn left_shift_spot_value_matches_partial_sum_oracle() {
        let p = left_shift_problem(100).unwrap();
        let mut w = p.g.clone();
        for _ in 0..3 {
            w = p.op.apply(&w).unwrap();
        }
        let mut w = w.scale(Complex64::new(6.0, 0.0));
        let e0 = HVector::basis(w.space().clone(), 0).unwrap();
        w = w.sub(&e0).unwrap();
        // Oracle: partial sums of (3!/(n+3)!)^2, the ratio built recursively
        // from 3!/3! = 1.
        let mut sum = 0.0;
        let mut ratio = 1.0f64;
        for n in 1..60 {
            ratio /= (n + 3) as f64;
            sum += ratio * ratio;
        }
        let oracle = sum.sqrt();
        assert!((w.norm() - oracle).abs() < 1e-12);
        assert!((oracle - LEFT_SHIFT_SPOT_L3).abs() < 1e-12);
    }

    #[test]
    fn volterra_small_rule_reproduces_parabola() {
        let p = volterra_problem(64).unwrap();
        let residual = p
            .op
            .apply(p.known_solution.as_ref().unwrap())
            .unwrap()
            .sub(&p.g)
            .unwrap()
            .norm();
        assert!(residual < 1e-12, "residual {residual:.3e}");
        assert!((p.g.norm_sqr() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn escape_rejects_bad_decay() {
        assert!(matches!(
            escape_operator(30, 1.5),
            Err(KrylovError::InvalidParameter(_))
        ));
        assert!(matches!(
            escape_operator(30, 0.0),
            Err(KrylovError::InvalidParameter(_))
        ));
    }

    #[test]
    fn noninjective_alternative_solution_works() {
        let p = noninjective_direct_sum(12).unwrap();
        // Any kernel direction of the projector block can be added.
        let mut f_alt = p.known_solution.clone().unwrap();
        f_alt.coords_mut()[12 + 5] = Complex64::new(0.0, 2.0);
        let residual = p.op.apply(&f_alt).unwrap().sub(&p.g).unwrap().norm();
        assert!(residual < 1e-12);
    }

    #[test]
    fn unknown_id_is_a_parameter_error() {
        assert!(matches!(
            by_id("no-such-problem", &ProblemParams::default()),
            Err(KrylovError::InvalidParameter(_))
        ));
    }
}

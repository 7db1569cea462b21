//! Exact coefficient-wise checks of a realized connection, plus numerical
//! diagnostics (sampled weighted norms, a finite-difference curvature oracle).
//!
//! A Christoffel field at cap `N + 1` determines its curvature faithfully
//! through degree `N`; verdicts compare coefficients through degree `N - 1`.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{self, AlgebraicCurvatureOperator, Classification, CurvatureField};
use crate::error::{Error, Result};
use crate::frame::{FrameField, MetricField};
use crate::jet::{Jet, Monomial};
use crate::rational::{self, Rational};
use crate::realizer::{self, ChristoffelField};
use crate::tensor::{split_form, sum, Tensor2, Tensor3, Tensor4};

/// The first coefficient at which a check failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Tensor indices, 1-based.
    pub component: Vec<usize>,
    pub exponents: Vec<u32>,
    #[serde(with = "rational::as_string")]
    pub expected: Rational,
    #[serde(with = "rational::as_string")]
    pub found: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Highest degree compared; `None` for checks not tied to a degree.
    pub verified_degree: Option<u32>,
    pub witness: Option<Witness>,
    /// A scalar the check reports, such as the constant scalar curvature.
    #[serde(with = "rational::opt_as_string", default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
}

impl Verdict {
    fn new(name: &str, witness: Option<Witness>, verified_degree: Option<u32>) -> Self {
        Verdict { name: name.into(), pass: witness.is_none(), verified_degree, witness, value: None }
    }

    fn with_value(mut self, value: Rational) -> Self {
        self.value = Some(value);
        self
    }
}

/// First monomial of degree `≤ up_to`, in graded order, where the jets differ.
fn first_difference(found: &Jet, expected: &Jet, up_to: u32) -> Option<(Vec<u32>, Rational, Rational)> {
    let monomials: BTreeSet<&Monomial> = found.terms().chain(expected.terms()).map(|(mono, _)| mono).collect();
    monomials.into_iter().filter(|mono| mono.degree() <= up_to).find_map(|mono| {
        let (f, e) = (found.coefficient(mono.exponents()), expected.coefficient(mono.exponents()));
        (f != e).then(|| (mono.exponents().to_vec(), e, f))
    })
}

fn compare<'a>(pairs: impl IntoIterator<Item = (Vec<usize>, &'a Jet, Jet)>, up_to: u32) -> Option<Witness> {
    pairs.into_iter().find_map(|(idx, found, expected)| {
        first_difference(found, &expected, up_to).map(|(exponents, expected, found)| Witness {
            component: idx.iter().map(|i| i + 1).collect(),
            exponents,
            expected,
            found,
        })
    })
}

fn constant(like: &Jet, c: &Rational) -> Jet {
    Jet::constant(like.dim(), like.cap(), c.clone())
}

fn verified_degree(gamma: &ChristoffelField) -> u32 {
    gamma.cap().saturating_sub(2)
}

/// `R^{∇(Γ)}(0) = A`, coefficient-wise in degree 0.
pub fn check_realization_at_origin(gamma: &ChristoffelField, a: &AlgebraicCurvatureOperator) -> Result<Verdict> {
    same_dim(gamma.dim(), a.dim())?;
    Ok(origin_verdict(&realizer::curvature_of(gamma), a))
}

fn origin_verdict(r: &CurvatureField, a: &AlgebraicCurvatureOperator) -> Verdict {
    let w = compare(
        r.components().indexed().map(|(idx, j)| (idx.to_vec(), j, constant(j, &a[idx]))),
        0,
    );
    Verdict::new("realization_at_origin", w, Some(0))
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::shape(format!("dimension mismatch: {a} and {b}")));
    }
    Ok(())
}

fn scalar_curvature_jet(rho_s: &Tensor2<Jet>, g: &MetricField) -> Result<Jet> {
    let cap = rho_s[[0, 0]].cap();
    if g.cap() < cap {
        return Err(Error::shape(format!("metric cap {} is below the curvature cap {cap}", g.cap())));
    }
    let inv = g.recap(cap).inverse()?;
    Ok(sum(rho_s.indexed().map(|(idx, r)| &inv[idx] * r)))
}

/// `τ = g^{ij} ρ_{ij}` is constant through the verified degree and equals
/// the algebraic scalar curvature `Σ_i ε_i ρ_s(A)_{ii}`.
pub fn check_constant_scalar_curvature(
    gamma: &ChristoffelField,
    a: &AlgebraicCurvatureOperator,
    g: &MetricField,
) -> Result<Verdict> {
    same_dim(gamma.dim(), g.dim())?;
    let rho_s = split_form(&realizer::ricci_of_connection(gamma)).1;
    scalar_verdict(&rho_s, a, g, verified_degree(gamma))
}

fn scalar_verdict(rho_s: &Tensor2<Jet>, a: &AlgebraicCurvatureOperator, g: &MetricField, deg: u32) -> Result<Verdict> {
    let tau = scalar_curvature_jet(rho_s, g)?;
    let target = algebra::scalar_curvature(a, &g.inner_product_at_origin()?)?;
    let w = compare([(vec![], &tau, constant(&tau, &target))], deg);
    Ok(Verdict::new("constant_scalar_curvature", w, Some(deg)).with_value(tau.constant_term()))
}

/// `ρ_a(R^{∇})` is the constant `ρ_a(A)` through the verified degree.
pub fn check_ricci_antisymmetric_part(gamma: &ChristoffelField, a: &AlgebraicCurvatureOperator) -> Result<Verdict> {
    same_dim(gamma.dim(), a.dim())?;
    let rho_a = split_form(&realizer::ricci_of_connection(gamma)).0;
    Ok(antisymmetric_verdict(&rho_a, a, verified_degree(gamma)))
}

fn antisymmetric_verdict(rho_a: &Tensor2<Jet>, a: &AlgebraicCurvatureOperator, deg: u32) -> Verdict {
    let target = algebra::ricci_antisymmetric(a);
    let w = compare(rho_a.indexed().map(|(idx, j)| (idx.to_vec(), j, constant(j, &target[idx]))), deg);
    Verdict::new("ricci_antisymmetric_part", w, Some(deg))
}

/// Verdicts on the symmetric Ricci tensor of the connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RicciSymmetricChecks {
    /// `ρ_s(R^{∇})(E_i, E_j) = ρ_s(A)_{ij}` through the verified degree.
    pub frame_components: Verdict,
    /// `ρ_s(R^{∇}) ≡ 0`: the connection's Ricci tensor is antisymmetric.
    pub connection_ricci_antisymmetric: Verdict,
    /// `τ ≡ 0`.
    pub connection_ricci_traceless: Verdict,
}

pub fn check_ricci_symmetric_part(
    gamma: &ChristoffelField,
    a: &AlgebraicCurvatureOperator,
    g: &MetricField,
    frame: &FrameField,
) -> Result<RicciSymmetricChecks> {
    same_dim(gamma.dim(), a.dim())?;
    same_dim(gamma.dim(), frame.dim())?;
    let rho_s = split_form(&realizer::ricci_of_connection(gamma)).1;
    symmetric_checks(&rho_s, a, g, frame, verified_degree(gamma))
}

fn symmetric_checks(
    rho_s: &Tensor2<Jet>,
    a: &AlgebraicCurvatureOperator,
    g: &MetricField,
    frame: &FrameField,
    deg: u32,
) -> Result<RicciSymmetricChecks> {
    let cap = rho_s[[0, 0]].cap();
    if frame.cap() < cap {
        return Err(Error::shape(format!("frame cap {} is below the curvature cap {cap}", frame.cap())));
    }
    let pulled = frame.pull_back(rho_s);
    let target = algebra::ricci_symmetric(a);
    let w = compare(pulled.indexed().map(|(idx, j)| (idx.to_vec(), j, constant(j, &target[idx]))), deg);
    let zero = Rational::zero();
    let anti = compare(rho_s.indexed().map(|(idx, j)| (idx.to_vec(), j, constant(j, &zero))), deg);
    let tau = scalar_curvature_jet(rho_s, g)?;
    let traceless = compare([(vec![], &tau, constant(&tau, &zero))], deg);
    Ok(RicciSymmetricChecks {
        frame_components: Verdict::new("ricci_symmetric_part", w, Some(deg)),
        connection_ricci_antisymmetric: Verdict::new("connection_ricci_antisymmetric", anti, Some(deg)),
        connection_ricci_traceless: Verdict::new("connection_ricci_traceless", traceless, Some(deg)),
    })
}

/// All checks of a realization. `checks` must all pass; `properties` record
/// what the connection turned out to satisfy and may legitimately fail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSuite {
    pub verified_degree: u32,
    /// Class of the operator with respect to `g(0)`.
    pub classification: Classification,
    pub checks: Vec<Verdict>,
    pub properties: Vec<Verdict>,
    pub all_pass: bool,
}

impl VerificationSuite {
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.checks.iter().chain(&self.properties).find(|v| v.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.checks.iter().filter(|v| !v.pass)
    }
}

fn implication(name: &str, premise: bool, conclusion: &Verdict) -> Verdict {
    Verdict {
        name: name.into(),
        pass: !premise || conclusion.pass,
        verified_degree: conclusion.verified_degree,
        witness: if premise { conclusion.witness.clone() } else { None },
        value: None,
    }
}

/// Runs every check against `Γ` with `g` the normalized metric and `frame`
/// its orthonormal frame.
pub fn verify(
    gamma: &ChristoffelField,
    a: &AlgebraicCurvatureOperator,
    g: &MetricField,
    frame: &FrameField,
) -> Result<VerificationSuite> {
    same_dim(gamma.dim(), a.dim())?;
    same_dim(gamma.dim(), g.dim())?;
    same_dim(gamma.dim(), frame.dim())?;
    let deg = verified_degree(gamma);
    let r = realizer::curvature_of(gamma);
    let (rho_a, rho_s) = split_form(&r.ricci());
    let classification = algebra::classify(a, &g.inner_product_at_origin()?)?;

    let origin = origin_verdict(&r, a);
    let scalar = scalar_verdict(&rho_s, a, g, deg)?;
    let anti_part = antisymmetric_verdict(&rho_a, a, deg);
    let sym = symmetric_checks(&rho_s, a, g, frame, deg)?;
    let zero = Rational::zero();
    let connection_symmetric = Verdict::new(
        "connection_ricci_symmetric",
        compare(rho_a.indexed().map(|(idx, j)| (idx.to_vec(), j, constant(j, &zero))), deg),
        Some(deg),
    );
    let torsion = gamma.components().indexed().find(|([i, j, k], v)| **v != gamma.components()[[*j, *i, *k]]);
    let torsion_free = Verdict::new(
        "torsion_free",
        torsion.map(|([i, j, k], _)| Witness {
            component: vec![i + 1, j + 1, k + 1],
            exponents: vec![],
            expected: zero.clone(),
            found: rational::int(1),
        }),
        None,
    );

    let checks = vec![
        origin,
        scalar,
        anti_part,
        sym.frame_components.clone(),
        torsion_free,
        implication("preserves_ricci_symmetric", classification.ricci_symmetric, &connection_symmetric),
        implication(
            "preserves_ricci_antisymmetric",
            classification.ricci_antisymmetric,
            &sym.connection_ricci_antisymmetric,
        ),
        implication("preserves_ricci_traceless", classification.ricci_traceless, &sym.connection_ricci_traceless),
    ];
    let all_pass = checks.iter().all(|v| v.pass);
    Ok(VerificationSuite {
        verified_degree: deg,
        classification,
        checks,
        properties: vec![connection_symmetric, sym.connection_ricci_antisymmetric, sym.connection_ricci_traceless],
        all_pass,
    })
}

/// Radius `δ` of the sampling ball used by [`weighted_norm_sample`].
pub fn sample_radius() -> Rational {
    rational::ratio(1, 2)
}

/// Sample points `x` with their exact norms `|x|`: at radii `δ/4, δ/2, 3δ/4`,
/// the points `±r e_i` and `r (±3/5 e_i ± 4/5 e_j)` for `i < j`.
pub fn sample_points(dim: usize) -> Vec<(Rational, Vec<Rational>)> {
    let delta = sample_radius();
    let (a, b) = (rational::ratio(3, 5), rational::ratio(4, 5));
    let mut out = Vec::new();
    for k in 1..=3 {
        let r = &delta * rational::ratio(k, 4);
        for i in 0..dim {
            for s in [1, -1] {
                let mut x = vec![Rational::zero(); dim];
                x[i] = &r * rational::int(s);
                out.push((r.clone(), x));
            }
            for j in i + 1..dim {
                for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let mut x = vec![Rational::zero(); dim];
                    x[i] = &r * &a * rational::int(si);
                    x[j] = &r * &b * rational::int(sj);
                    out.push((r.clone(), x));
                }
            }
        }
    }
    out
}

/// `max |P(x)| / |x|^order` over the components `P` of a jet field and the
/// [`sample_points`]. Zero for an empty or zero field.
pub fn weighted_norm_sample<'a>(field: impl IntoIterator<Item = &'a Jet>, order: u32) -> Rational {
    let jets: Vec<&Jet> = field.into_iter().filter(|j| !j.is_zero()).collect();
    let Some(first) = jets.first() else {
        return Rational::zero();
    };
    let points = sample_points(first.dim());
    let mut best = Rational::zero();
    for (r, x) in &points {
        let weight = num_traits::pow(r.clone(), order as usize);
        for j in &jets {
            let v = j.evaluate(x).expect("sample point has the jet's dimension").abs() / &weight;
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Pointwise `(Γ⋆ℰ)_{ijk}^l` of constant Christoffel arrays.
fn star_at(g: &Tensor3<Rational>, e: &Tensor3<Rational>) -> Tensor4<Rational> {
    let m = g.dim();
    Tensor4::from_fn(m, |[i, j, k, l]| {
        sum((0..m).map(|n| {
            &e[[i, n, l]] * &g[[j, k, n]] + &g[[i, n, l]] * &e[[j, k, n]]
                - &e[[j, n, l]] * &g[[i, k, n]]
                - &g[[j, n, l]] * &e[[i, k, n]]
        }))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDifferenceCheck {
    /// Curvature from central differences of `Γ` at `x₀`.
    pub approximation: Tensor4<Rational>,
    /// `ℒ(Γ)(x₀) + ½ (Γ⋆Γ)(x₀)` from the jet calculus.
    pub reference: Tensor4<Rational>,
    /// Largest absolute component difference.
    pub discrepancy: Rational,
}

/// Approximates `∂_i Γ_{jk}^l(x₀)` by `(Γ(x₀ + h e_i) - Γ(x₀ - h e_i)) / 2h`
/// and compares the resulting curvature with the exact jet derivative.
/// The quadratic term is evaluated pointwise on both sides, so the
/// discrepancy isolates the derivative term and scales like `h²`.
pub fn finite_difference_oracle(gamma: &ChristoffelField, x0: &[Rational], h: &Rational) -> Result<FiniteDifferenceCheck> {
    let m = gamma.dim();
    if x0.len() != m {
        return Err(Error::shape(format!("point has {} coordinates, expected {m}", x0.len())));
    }
    if !h.is_positive() {
        return Err(Error::domain("step size must be positive"));
    }
    let shifted = |i: usize, s: &Rational| {
        let mut x = x0.to_vec();
        x[i] += s;
        gamma.evaluate(&x)
    };
    let two_h = h * rational::int(2);
    let derivs: Vec<Tensor3<Rational>> = (0..m)
        .map(|i| {
            let (p, q) = (shifted(i, h)?, shifted(i, &-h)?);
            Ok(p.minus(&q).scaled(&two_h.recip()))
        })
        .collect::<Result<_>>()?;
    let at = gamma.evaluate(x0)?;
    let quad = star_at(&at, &at).scaled(&rational::ratio(1, 2));
    let approximation =
        Tensor4::from_fn(m, |[i, j, k, l]| &derivs[i][[j, k, l]] - &derivs[j][[i, k, l]]).plus(&quad);
    let reference = realizer::curvature_l(gamma).evaluate(x0)?.plus(&quad);
    let discrepancy = approximation
        .minus(&reference)
        .indexed()
        .map(|(_, v)| v.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(FiniteDifferenceCheck { approximation, reference, discrepancy })
}

//! Generalized algebraic curvature operators and their Ricci decomposition.
//!
//! An operator `A_{ijk}^l` is antisymmetric in `(i, j)` and satisfies the
//! cyclic identity in `(i, j, k)`. The Ricci map `ρ_{jk} = Σ_i A_{ijk}^i`
//! splits equivariantly: [`sigma_s`] and [`sigma_a`] are right inverses of `ρ`
//! on symmetric and antisymmetric forms, and [`weyl_projective`] is the
//! complementary projection onto `ker ρ`.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::rational::{self, Rational};
use crate::tensor::{split_form, Tensor2, Tensor4};

/// A constant bilinear form `ψ_{ij}`.
pub type BilinearForm = Tensor2<Rational>;

/// Signature `(p, q)`: `p` timelike directions first, then `q` spacelike.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", from = "[usize; 2]")]
pub struct Signature {
    pub timelike: usize,
    pub spacelike: usize,
}

impl Signature {
    pub fn new(timelike: usize, spacelike: usize) -> Self {
        Signature { timelike, spacelike }
    }

    pub fn riemannian(dim: usize) -> Self {
        Signature::new(0, dim)
    }

    pub fn dim(&self) -> usize {
        self.timelike + self.spacelike
    }

    /// `ε_i = -1` for `i < p`, `+1` otherwise (0-based).
    pub fn epsilon(&self, i: usize) -> Rational {
        rational::int(if i < self.timelike { -1 } else { 1 })
    }

    /// `diag(ε)`.
    pub fn diagonal(&self) -> BilinearForm {
        Tensor2::from_fn(self.dim(), |[i, j]| if i == j { self.epsilon(i) } else { Rational::zero() })
    }
}

impl From<[usize; 2]> for Signature {
    fn from([p, q]: [usize; 2]) -> Self {
        Signature::new(p, q)
    }
}

impl From<Signature> for [usize; 2] {
    fn from(s: Signature) -> Self {
        [s.timelike, s.spacelike]
    }
}

/// A nondegenerate symmetric inner product with known signature.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProduct {
    signature: Signature,
    form: BilinearForm,
    inverse: BilinearForm,
}

impl InnerProduct {
    pub fn new(form: BilinearForm, signature: Signature) -> Result<Self> {
        if form.dim() != signature.dim() {
            return Err(Error::shape(format!(
                "{}-dimensional form with signature ({}, {})",
                form.dim(),
                signature.timelike,
                signature.spacelike
            )));
        }
        if !form.is_symmetric() {
            return Err(Error::invalid("inner product is not symmetric"));
        }
        let (neg, pos) = inertia(&form).ok_or_else(|| Error::invalid("inner product is degenerate"))?;
        if (neg, pos) != (signature.timelike, signature.spacelike) {
            return Err(Error::invalid(format!(
                "inner product has signature ({neg}, {pos}), declared ({}, {})",
                signature.timelike, signature.spacelike
            )));
        }
        let inverse = invert(&form).ok_or_else(|| Error::invalid("inner product is degenerate"))?;
        Ok(InnerProduct { signature, form, inverse })
    }

    /// The normalized product `diag(ε)`.
    pub fn standard(signature: Signature) -> Self {
        let form = signature.diagonal();
        InnerProduct { signature, inverse: form.clone(), form }
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn inverse(&self) -> &BilinearForm {
        &self.inverse
    }

    /// `Σ g^{ij} ψ_{ij}`.
    pub fn trace(&self, psi: &BilinearForm) -> Rational {
        psi.indexed().map(|([i, j], v)| &self.inverse[[i, j]] * v).sum()
    }
}

/// A validated generalized algebraic curvature operator `A_{ijk}^l`, `m ≥ 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicCurvatureOperator(Tensor4<Rational>);

impl AlgebraicCurvatureOperator {
    /// Accepts `t` only if it already has both curvature symmetries.
    pub fn new(t: Tensor4<Rational>) -> Result<Self> {
        check_engine_dim(t.dim())?;
        if let Some([i, j, k, l]) = t.antisymmetry_defect() {
            return Err(Error::invalid(format!(
                "operator is not antisymmetric in its first two slots at ({}, {}, {}, {})",
                i + 1,
                j + 1,
                k + 1,
                l + 1
            )));
        }
        if let Some([i, j, k, l]) = t.cyclic_defect() {
            return Err(Error::invalid(format!(
                "operator violates the cyclic identity at ({}, {}, {}, {})",
                i + 1,
                j + 1,
                k + 1,
                l + 1
            )));
        }
        Ok(AlgebraicCurvatureOperator(t))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_engine_dim(dim)?;
        Ok(AlgebraicCurvatureOperator(Tensor4::zeros(dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn tensor(&self) -> &Tensor4<Rational> {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor4<Rational> {
        self.0
    }

    pub fn plus(&self, rhs: &Self) -> Self {
        AlgebraicCurvatureOperator(self.0.plus(&rhs.0))
    }

    pub fn minus(&self, rhs: &Self) -> Self {
        AlgebraicCurvatureOperator(self.0.minus(&rhs.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl std::ops::Index<[usize; 4]> for AlgebraicCurvatureOperator {
    type Output = Rational;
    fn index(&self, idx: [usize; 4]) -> &Rational {
        &self.0[idx]
    }
}

fn check_engine_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::domain(format!("dimension must be at least 3, got {dim}")));
    }
    Ok(())
}

/// Jet-valued (3,1) tensor field, e.g. the curvature of a connection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureField {
    components: Tensor4<Jet>,
}

impl CurvatureField {
    pub fn new(components: Tensor4<Jet>) -> Result<Self> {
        let first = &components[[0, 0, 0, 0]];
        let (n, cap) = (first.dim(), first.cap());
        if n != components.dim() {
            return Err(Error::shape("jet dimension differs from tensor dimension"));
        }
        if components.indexed().any(|(_, j)| j.dim() != n || j.cap() != cap) {
            return Err(Error::shape("curvature components carry mixed jet shapes"));
        }
        Ok(CurvatureField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.dim()
    }

    pub fn cap(&self) -> u32 {
        self.components[[0, 0, 0, 0]].cap()
    }

    pub fn components(&self) -> &Tensor4<Jet> {
        &self.components
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Tensor4<Rational>> {
        self.components.try_map(|j| j.evaluate(x))
    }

    pub fn at_origin(&self) -> Tensor4<Rational> {
        self.components.map(Jet::constant_term)
    }

    /// Jet-valued Ricci contraction.
    pub fn ricci(&self) -> Tensor2<Jet> {
        self.components.ricci()
    }

    pub fn has_curvature_symmetries(&self) -> bool {
        self.components.has_curvature_symmetries()
    }
}

/// Projects a raw (3,1) tensor onto the curvature symmetry class: antisymmetrize
/// in the first pair, then remove a third of the cyclic sum.
pub fn project_to_aco(raw: &Tensor4<Rational>) -> Result<AlgebraicCurvatureOperator> {
    check_engine_dim(raw.dim())?;
    let half = rational::ratio(1, 2);
    let anti = Tensor4::from_fn(raw.dim(), |[i, j, k, l]| (&raw[[i, j, k, l]] - &raw[[j, i, k, l]]) * &half);
    let projected = anti.minus(&anti.cyclic_sum().scaled(&rational::ratio(1, 3)));
    debug_assert!(projected.has_curvature_symmetries());
    Ok(AlgebraicCurvatureOperator(projected))
}

pub fn ricci(a: &AlgebraicCurvatureOperator) -> BilinearForm {
    a.0.ricci()
}

/// `(ρ_a, ρ_s)` of a form.
pub fn ricci_split(psi: &BilinearForm) -> (BilinearForm, BilinearForm) {
    split_form(psi)
}

pub fn ricci_antisymmetric(a: &AlgebraicCurvatureOperator) -> BilinearForm {
    ricci_split(&ricci(a)).0
}

pub fn ricci_symmetric(a: &AlgebraicCurvatureOperator) -> BilinearForm {
    ricci_split(&ricci(a)).1
}

fn check_same_dim(a: &AlgebraicCurvatureOperator, g: &InnerProduct) -> Result<()> {
    if a.dim() != g.dim() {
        return Err(Error::shape(format!(
            "{}-dimensional operator with a {}-dimensional inner product",
            a.dim(),
            g.dim()
        )));
    }
    Ok(())
}

/// `τ = g^{ij} ρ_{ij}`.
pub fn scalar_curvature(a: &AlgebraicCurvatureOperator, g: &InnerProduct) -> Result<Rational> {
    check_same_dim(a, g)?;
    Ok(g.trace(&ricci(a)))
}

/// `ρ_0 = ρ_s - (τ/m) g`.
pub fn trace_free_ricci(a: &AlgebraicCurvatureOperator, g: &InnerProduct) -> Result<BilinearForm> {
    let tau = scalar_curvature(a, g)?;
    let m = rational::int(a.dim() as i64);
    Ok(ricci_symmetric(a).minus(&g.form().scaled(&(tau / m))))
}

/// Section of `ρ` on symmetric forms:
/// `σ_{ijk}^l = (ψ_{jk} δ_i^l - ψ_{ik} δ_j^l) / (m - 1)`.
pub fn sigma_s(psi: &BilinearForm) -> Result<AlgebraicCurvatureOperator> {
    let m = psi.dim();
    check_engine_dim(m)?;
    if !psi.is_symmetric() {
        return Err(Error::domain("sigma_s needs a symmetric form"));
    }
    let c = rational::ratio(1, m as i64 - 1);
    let t = Tensor4::from_fn(m, |[i, j, k, l]| {
        let mut v = Rational::zero();
        if i == l {
            v += &psi[[j, k]];
        }
        if j == l {
            v -= &psi[[i, k]];
        }
        v * &c
    });
    Ok(AlgebraicCurvatureOperator(t))
}

/// Coefficients `(a, b)` of the antisymmetric section
/// `σ_{ijk}^l = a ψ_{ij} δ_k^l + b (ψ_{ik} δ_j^l - ψ_{jk} δ_i^l)`.
pub fn sigma_a_coefficients(m: usize) -> (Rational, Rational) {
    let d = m as i64 + 1;
    (rational::ratio(-2, d), rational::ratio(-1, d))
}

/// Section of `ρ` on antisymmetric forms:
/// `σ(x, y)z = -[2ψ(x, y)z + ψ(x, z)y - ψ(y, z)x] / (m + 1)`.
pub fn sigma_a(psi: &BilinearForm) -> Result<AlgebraicCurvatureOperator> {
    let m = psi.dim();
    check_engine_dim(m)?;
    if !psi.is_antisymmetric() {
        return Err(Error::domain("sigma_a needs an antisymmetric form"));
    }
    let (a, b) = sigma_a_coefficients(m);
    let t = Tensor4::from_fn(m, |[i, j, k, l]| {
        let mut v = Rational::zero();
        if k == l {
            v += &a * &psi[[i, j]];
        }
        if j == l {
            v += &b * &psi[[i, k]];
        }
        if i == l {
            v -= &b * &psi[[j, k]];
        }
        v
    });
    Ok(AlgebraicCurvatureOperator(t))
}

/// Projection onto `ker ρ`: `P(A) = A - σ_s(ρ_s A) - σ_a(ρ_a A)`.
pub fn weyl_projective(a: &AlgebraicCurvatureOperator) -> AlgebraicCurvatureOperator {
    let (anti, sym) = ricci_split(&ricci(a));
    let s = sigma_s(&sym).expect("symmetric part is symmetric");
    let t = sigma_a(&anti).expect("antisymmetric part is antisymmetric");
    a.minus(&s).minus(&t)
}

/// Constraints that can be imposed on an operator by removing Ricci parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassConstraint {
    /// Remove `σ_a(ρ_a A)` so that `ρ_a = 0`.
    pub ricci_symmetric: bool,
    /// Remove `σ_s(ρ_s A)` so that `ρ_s = 0`.
    pub ricci_antisymmetric: bool,
    /// Remove `σ_s((τ/m) g)` so that `τ = 0`.
    pub ricci_traceless: bool,
}

/// Applies a [`ClassConstraint`]; each removal preserves the other classes.
pub fn impose(
    a: &AlgebraicCurvatureOperator,
    g: &InnerProduct,
    c: ClassConstraint,
) -> Result<AlgebraicCurvatureOperator> {
    check_same_dim(a, g)?;
    let mut out = a.clone();
    if c.ricci_symmetric {
        out = out.minus(&sigma_a(&ricci_antisymmetric(&out))?);
    }
    if c.ricci_antisymmetric {
        out = out.minus(&sigma_s(&ricci_symmetric(&out))?);
    }
    if c.ricci_traceless {
        let tau = scalar_curvature(&out, g)?;
        let m = rational::int(a.dim() as i64);
        out = out.minus(&sigma_s(&g.form().scaled(&(tau / m)))?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub projectively_flat: bool,
    pub ricci_symmetric: bool,
    pub ricci_antisymmetric: bool,
    pub ricci_traceless: bool,
}

pub fn classify(a: &AlgebraicCurvatureOperator, g: &InnerProduct) -> Result<Classification> {
    let (anti, sym) = ricci_split(&ricci(a));
    Ok(Classification {
        projectively_flat: weyl_projective(a).is_zero(),
        ricci_symmetric: anti.is_zero(),
        ricci_antisymmetric: sym.is_zero(),
        ricci_traceless: scalar_curvature(a, g)?.is_zero(),
    })
}

/// Deterministic random operator: integer entries in `[-bound, bound]`
/// drawn from a ChaCha8 stream, then projected.
pub fn random_aco(seed: u64, dim: usize, bound: i64) -> Result<AlgebraicCurvatureOperator> {
    check_engine_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Tensor4::from_fn(dim, |_| rational::int(rng.random_range(-bound..=bound)));
    project_to_aco(&raw)
}

/// Deterministic random form with integer entries in `[-bound, bound]`.
pub fn random_form(seed: u64, dim: usize, bound: i64) -> BilinearForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor2::from_fn(dim, |_| rational::int(rng.random_range(-bound..=bound)))
}

/// `(negative, positive)` inertia of a symmetric matrix by exact congruence
/// diagonalization; `None` when singular.
pub fn inertia(form: &BilinearForm) -> Option<(usize, usize)> {
    let n = form.dim();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| form[[i, j]].clone()).collect()).collect();
    let (mut neg, mut pos) = (0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else {
                let j = (k + 1..n).find(|&j| !a[k][j].is_zero())?;
                // a_kk becomes 2 a_kj since a_jj = 0.
                let row_j = a[j].clone();
                for (dst, v) in a[k].iter_mut().zip(row_j) {
                    *dst += v;
                }
                for row in a.iter_mut() {
                    let v = row[j].clone();
                    row[k] += v;
                }
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        let factors: Vec<Rational> = (k + 1..n).map(|i| &a[i][k] / &pivot).collect();
        let row_k = a[k].clone();
        for (off, f) in factors.iter().enumerate() {
            for (dst, v) in a[k + 1 + off].iter_mut().zip(&row_k) {
                *dst -= f * v;
            }
        }
        for (off, f) in factors.iter().enumerate() {
            let i = k + 1 + off;
            for row in a.iter_mut() {
                let v = f * &row[k];
                row[i] -= v;
            }
        }
    }
    Some((neg, pos))
}

/// Exact Gauss–Jordan inverse; `None` when singular.
pub fn invert(form: &BilinearForm) -> Option<BilinearForm> {
    let n = form.dim();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| form[[i, j]].clone()).collect()).collect();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        inv.swap(col, p);
        let pivot = a[col][col].recip();
        for t in 0..n {
            a[col][t] *= &pivot;
            inv[col][t] *= &pivot;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for t in 0..n {
                    let (x, y) = (&f * &a[col][t], &f * &inv[col][t]);
                    a[r][t] -= x;
                    inv[r][t] -= y;
                }
            }
        }
    }
    Some(Tensor2::from_fn(n, |[i, j]| inv[i][j].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn imposed_constraints_hold() {
        let g = InnerProduct::standard(Signature::new(1, 3));
        for seed in 0..8 {
            let a = random_aco(seed, 4, 3).unwrap();
            let all = ClassConstraint { ricci_symmetric: true, ricci_antisymmetric: false, ricci_traceless: true };
            let c = classify(&impose(&a, &g, all).unwrap(), &g).unwrap();
            assert!(c.ricci_symmetric && c.ricci_traceless);
            let anti = ClassConstraint { ricci_antisymmetric: true, ..Default::default() };
            let b = impose(&a, &g, anti).unwrap();
            assert!(classify(&b, &g).unwrap().ricci_antisymmetric);
            assert_eq!(ricci_antisymmetric(&b), ricci_antisymmetric(&a));
            assert_eq!(impose(&a, &g, ClassConstraint::default()).unwrap(), a);
        }
    }

    /// The m = 3 operator with A_{121}^2 = 1, A_{211}^2 = -1 (1-based).
    pub(crate) fn single_component_operator() -> AlgebraicCurvatureOperator {
        let t = Tensor4::from_fn(3, |idx| match idx {
            [0, 1, 0, 1] => int(1),
            [1, 0, 0, 1] => int(-1),
            _ => int(0),
        });
        AlgebraicCurvatureOperator::new(t).unwrap()
    }

    fn random_symmetric(seed: u64, m: usize) -> BilinearForm {
        ricci_split(&random_form(seed, m, 5)).1
    }

    fn random_antisymmetric(seed: u64, m: usize) -> BilinearForm {
        ricci_split(&random_form(seed, m, 5)).0
    }

    #[test]
    fn validator_rejects_each_symmetry_violation() {
        let t = Tensor4::from_fn(3, |idx| if idx == [0, 1, 0, 1] { int(1) } else { int(0) });
        assert!(matches!(AlgebraicCurvatureOperator::new(t), Err(Error::Invalid(_))));
        // Antisymmetric in (i,j) but the cyclic sum at (1,2,3) is 1.
        let t = Tensor4::from_fn(3, |idx| match idx {
            [0, 1, 2, 0] => int(1),
            [1, 0, 2, 0] => int(-1),
            _ => int(0),
        });
        let err = AlgebraicCurvatureOperator::new(t).unwrap_err();
        assert!(err.to_string().contains("cyclic"));
        assert!(AlgebraicCurvatureOperator::zero(2).is_err());
    }

    #[test]
    fn projector_fixes_operators_and_handles_single_entry() {
        let a = single_component_operator();
        assert_eq!(project_to_aco(a.tensor()).unwrap(), a);

        // T_{121}^2 = 1 antisymmetrizes to ±1/2; every cyclic sum of that is 0.
        let t = Tensor4::from_fn(3, |idx| if idx == [0, 1, 0, 1] { int(1) } else { int(0) });
        let p = project_to_aco(&t).unwrap();
        for (idx, v) in p.tensor().indexed() {
            let expected = match idx {
                [0, 1, 0, 1] => ratio(1, 2),
                [1, 0, 0, 1] => ratio(-1, 2),
                _ => int(0),
            };
            assert_eq!(*v, expected, "component {idx:?}");
        }
        assert!(project_to_aco(&Tensor4::zeros(2)).is_err());
    }

    #[test]
    fn ricci_by_hand_contraction() {
        assert!(ricci(&AlgebraicCurvatureOperator::zero(3).unwrap()).is_zero());
        // ρ_{jk} = Σ_i A_{ijk}^i; only A_{211}^2 has i = l, giving ρ_{11} = -1.
        let rho = ricci(&single_component_operator());
        for ([j, k], v) in rho.indexed() {
            let expected = if (j, k) == (0, 0) { int(-1) } else { int(0) };
            assert_eq!(*v, expected);
        }
    }

    #[test]
    fn ricci_split_examples() {
        let sym = random_symmetric(3, 3);
        assert_eq!(ricci_split(&sym), (Tensor2::zeros(3), sym.clone()));
        let anti = random_antisymmetric(3, 3);
        assert_eq!(ricci_split(&anti), (anti.clone(), Tensor2::zeros(3)));
        let psi = Tensor2::from_fn(3, |idx| if idx == [0, 1] { int(1) } else { int(0) });
        let (a, s) = ricci_split(&psi);
        assert_eq!(a[[0, 1]], ratio(1, 2));
        assert_eq!(s[[0, 1]], ratio(1, 2));
    }

    #[test]
    fn scalar_curvature_examples() {
        for sig in [Signature::new(0, 3), Signature::new(1, 3), Signature::new(2, 3)] {
            let g = InnerProduct::standard(sig);
            let m = sig.dim();
            assert_eq!(scalar_curvature(&AlgebraicCurvatureOperator::zero(m).unwrap(), &g).unwrap(), int(0));
            // g^{ij} g_{ij} = m.
            let a = sigma_s(g.form()).unwrap();
            assert_eq!(scalar_curvature(&a, &g).unwrap(), int(m as i64));
            let b = sigma_a(&random_antisymmetric(9, m)).unwrap();
            assert_eq!(scalar_curvature(&b, &g).unwrap(), int(0));
        }
        let g4 = InnerProduct::standard(Signature::new(0, 4));
        assert!(scalar_curvature(&single_component_operator(), &g4).is_err());
    }

    #[test]
    fn trace_free_ricci_examples() {
        let g = InnerProduct::standard(Signature::new(1, 2));
        let a = sigma_s(&g.form().scaled(&ratio(5, 3))).unwrap();
        assert!(trace_free_ricci(&a, &g).unwrap().is_zero());
        assert!(trace_free_ricci(&AlgebraicCurvatureOperator::zero(3).unwrap(), &g).unwrap().is_zero());
    }

    #[test]
    fn sigma_s_identity_form_by_hand() {
        let id = Tensor2::identity(3);
        let s = sigma_s(&id).unwrap();
        for ([i, j, k, l], v) in s.tensor().indexed() {
            let d = |a: usize, b: usize| if a == b { 1 } else { 0 };
            let expected = ratio(d(j, k) * d(i, l) - d(i, k) * d(j, l), 2);
            assert_eq!(*v, expected);
        }
        // ρ_{jk} = (m ψ_{jk} - ψ_{jk}) / (m - 1) = ψ_{jk}.
        assert_eq!(ricci(&s), id);
        assert!(sigma_s(&Tensor2::zeros(3)).unwrap().is_zero());
        assert!(matches!(sigma_s(&random_antisymmetric(1, 3)), Err(Error::Domain(_))));
        assert!(matches!(sigma_a(&random_symmetric(2, 3)), Err(Error::Domain(_))));
        assert!(sigma_a(&Tensor2::zeros(3)).unwrap().is_zero());
    }

    /// Re-derives the coefficients of `sigma_a` from first principles: for the
    /// basis tensors `T1 = ψ_{ij} δ_k^l`, `T2 = ψ_{ik} δ_j^l - ψ_{jk} δ_i^l`,
    /// solve `cyc(a T1 + b T2) = 0`, `ρ(a T1 + b T2) = ψ` for `(a, b)`.
    #[test]
    fn sigma_a_coefficients_solve_the_defining_system() {
        for m in 3..=6 {
            let psi = random_antisymmetric(40 + m as u64, m);
            let delta = |a: usize, b: usize| if a == b { int(1) } else { int(0) };
            let t1 = Tensor4::from_fn(m, |[i, j, k, l]| &psi[[i, j]] * delta(k, l));
            let t2 =
                Tensor4::from_fn(m, |[i, j, k, l]| &psi[[i, k]] * delta(j, l) - &psi[[j, k]] * delta(i, l));
            // Pick a component where ψ is nonzero to read off scalar equations.
            let ([p, q], psi_pq) = psi.indexed().find(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).unwrap();
            let (c1, c2) = (t1.cyclic_sum(), t2.cyclic_sum());
            let ([ci, cj, ck, cl], c1v) = c1.indexed().find(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).unwrap();
            let c2v = c2[[ci, cj, ck, cl]].clone();
            let (r1, r2) = (t1.ricci()[[p, q]].clone() / &psi_pq, t2.ricci()[[p, q]].clone() / &psi_pq);
            // Cramer on [c1v c2v; r1 r2] (a, b)^T = (0, 1)^T.
            let det = &c1v * &r2 - &c2v * &r1;
            let a = -&c2v / &det;
            let b = &c1v / &det;
            assert_eq!((a, b), sigma_a_coefficients(m), "m = {m}");
        }
    }

    #[test]
    fn sigma_s_coefficient_solves_the_defining_system() {
        for m in 3..=6 {
            let psi = random_symmetric(70 + m as u64, m);
            let delta = |a: usize, b: usize| if a == b { int(1) } else { int(0) };
            let t = Tensor4::from_fn(m, |[i, j, k, l]| &psi[[j, k]] * delta(i, l) - &psi[[i, k]] * delta(j, l));
            assert!(t.cyclic_sum().is_zero());
            let ([p, q], v) = psi.indexed().find(|(_, v)| !v.is_zero()).unwrap();
            let c = v / &t.ricci()[[p, q]];
            assert_eq!(c, ratio(1, m as i64 - 1));
        }
    }

    #[test]
    fn weyl_projective_examples() {
        let psi = random_symmetric(5, 4);
        assert!(weyl_projective(&sigma_s(&psi).unwrap()).is_zero());
        let a = random_aco(17, 4, 3).unwrap();
        let p = weyl_projective(&a);
        assert!(ricci(&p).is_zero());
        assert_eq!(weyl_projective(&p), p);
    }

    #[test]
    fn classification_examples() {
        let g = InnerProduct::standard(Signature::new(0, 3));
        let all = classify(&AlgebraicCurvatureOperator::zero(3).unwrap(), &g).unwrap();
        assert!(all.projectively_flat && all.ricci_symmetric && all.ricci_antisymmetric && all.ricci_traceless);

        let anti = classify(&sigma_a(&random_antisymmetric(3, 3)).unwrap(), &g).unwrap();
        assert!(anti.ricci_antisymmetric && !anti.ricci_symmetric && anti.ricci_traceless);

        let sym = classify(&sigma_s(g.form()).unwrap(), &g).unwrap();
        assert!(sym.ricci_symmetric && !sym.ricci_traceless);
    }

    #[test]
    fn random_operators_are_deterministic_and_cover_both_ricci_parts() {
        assert_eq!(random_aco(11, 3, 2).unwrap(), random_aco(11, 3, 2).unwrap());
        assert!(random_aco(1, 2, 2).is_err());
        let (mut saw_anti, mut saw_sym) = (false, false);
        for seed in 0..100 {
            let a = random_aco(seed, 3, 2).unwrap();
            assert!(a.tensor().has_curvature_symmetries());
            let (ra, rs) = ricci_split(&ricci(&a));
            saw_anti |= !ra.is_zero();
            saw_sym |= !rs.is_zero();
        }
        assert!(saw_anti && saw_sym);
    }

    #[test]
    fn inner_product_validation() {
        let form = Tensor2::from_fn(3, |[i, j]| if i == j { int(1) } else { int(0) });
        assert!(InnerProduct::new(form.clone(), Signature::new(0, 3)).is_ok());
        assert!(InnerProduct::new(form, Signature::new(1, 2)).is_err());
        // Hyperbolic plane plus a line: signature (1, 2) with zero diagonal start.
        let h = Tensor2::from_fn(3, |idx| match idx {
            [0, 1] | [1, 0] => int(1),
            [2, 2] => int(1),
            _ => int(0),
        });
        let g = InnerProduct::new(h.clone(), Signature::new(1, 2)).unwrap();
        assert_eq!(h.matmul(g.inverse()), Tensor2::identity(3));
        let singular = Tensor2::from_fn(3, |[i, j]| int((i * j) as i64));
        assert!(InnerProduct::new(singular, Signature::new(0, 3)).is_err());
    }

    proptest! {
        #[test]
        fn splitting_identities(seed in any::<u64>(), m in 3usize..=5) {
            let a = random_aco(seed, m, 3).unwrap();
            let (anti, sym) = ricci_split(&ricci(&a));
            prop_assert_eq!(ricci(&sigma_s(&sym).unwrap()), sym.clone());
            prop_assert_eq!(ricci(&sigma_a(&anti).unwrap()), anti.clone());
            prop_assert!(sigma_a(&anti).unwrap().tensor().cyclic_sum().is_zero());
            let p = weyl_projective(&a);
            prop_assert!(ricci(&p).is_zero());
            prop_assert_eq!(p.plus(&sigma_s(&sym).unwrap()).plus(&sigma_a(&anti).unwrap()), a.clone());
            prop_assert_eq!(project_to_aco(a.tensor()).unwrap(), a);
        }

        #[test]
        fn trace_free_part_has_zero_trace(seed in any::<u64>(), p in 0usize..=4) {
            let g = InnerProduct::standard(Signature::new(p, 4 - p));
            let a = random_aco(seed, g.dim(), 4).unwrap();
            prop_assert!(g.trace(&trace_free_ricci(&a, &g).unwrap()).is_zero());
        }

        #[test]
        fn projector_is_idempotent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = Tensor4::from_fn(3, |_| int(rng.random_range(-5..=5)));
            let once = project_to_aco(&raw).unwrap();
            prop_assert_eq!(project_to_aco(once.tensor()).unwrap(), once);
        }
    }
}

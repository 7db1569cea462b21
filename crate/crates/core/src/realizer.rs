//! Iterative construction of a torsion-free connection with prescribed
//! curvature at the origin and constant frame-measured symmetric Ricci tensor.
//!
//! Starting from the linear Christoffel symbol of [`initial_gamma`], each step
//! measures the defect `Θ_ν = ρ_s(R_ν)(E_i, E_j) - ρ_s(A)_{ij}` in the
//! orthonormal frame and adds the trace-free correction `ℰ_{ν+1}` solving
//! `ρ(ℒ(ℰ)) = -Θ_ν`. On jets the defect's valuation at least doubles per
//! step, so the loop ends with `Θ = 0` exactly after finitely many steps.
//!
//! Degree caps: Christoffel-level jets carry cap `N + 1`, curvature- and
//! `Θ`-level jets carry cap `N`.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, AlgebraicCurvatureOperator, CurvatureField, Signature};
use crate::document::CoordinateMapRecord;
use crate::error::{Error, Result};
use crate::frame::{self, CoordinateMap, FrameField, MetricField, NormalFormVerdict};
use crate::jet::Jet;
use crate::rational::{self, Rational};
use crate::tensor::{split_form, sum, Tensor2, Tensor3, Tensor4};
use crate::verifier::{self, VerificationSuite};

/// Torsion-free Christoffel symbols `Γ_{ij}^k`, stored at `[[i, j, k]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChristoffelField {
    components: Tensor3<Jet>,
}

/// Jet-valued symmetric defect field `Θ_{ij}`.
pub type ThetaField = Tensor2<Jet>;

impl ChristoffelField {
    /// Rejects mixed jet shapes and any asymmetry in the lower pair.
    pub fn new(components: Tensor3<Jet>) -> Result<Self> {
        let m = components.dim();
        let cap = components[[0, 0, 0]].cap();
        if components.indexed().any(|(_, j)| j.dim() != m || j.cap() != cap) {
            return Err(Error::shape("Christoffel components carry mixed jet shapes"));
        }
        if let Some(([i, j, k], _)) = components.indexed().find(|([i, j, k], v)| **v != components[[*j, *i, *k]]) {
            return Err(Error::invalid(format!(
                "connection has torsion: Γ_{{{}{}}}^{} ≠ Γ_{{{}{}}}^{}",
                i + 1,
                j + 1,
                k + 1,
                j + 1,
                i + 1,
                k + 1
            )));
        }
        Ok(ChristoffelField { components })
    }

    pub fn zero(dim: usize, cap: u32) -> Self {
        ChristoffelField { components: Tensor3::from_fn(dim, |_| Jet::zero(dim, cap)) }
    }

    pub fn dim(&self) -> usize {
        self.components.dim()
    }

    pub fn cap(&self) -> u32 {
        self.components[[0, 0, 0]].cap()
    }

    pub fn components(&self) -> &Tensor3<Jet> {
        &self.components
    }

    pub fn plus(&self, rhs: &ChristoffelField) -> ChristoffelField {
        ChristoffelField { components: self.components.plus(&rhs.components) }
    }

    pub fn recap(&self, cap: u32) -> ChristoffelField {
        ChristoffelField { components: self.components.map(|j| j.recap(cap)) }
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Tensor3<Rational>> {
        self.components.try_map(|j| j.evaluate(x))
    }

    /// `Γ_{ji}^i` summed over `i`.
    pub fn trace(&self, j: usize) -> Jet {
        sum((0..self.dim()).map(|i| self.components[[j, i, i]].clone()))
    }

    /// Minimum valuation over all components.
    pub fn valuation(&self) -> Option<u32> {
        self.components.indexed().filter_map(|(_, j)| j.valuation()).min()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_zero()
    }
}

fn curvature_cap(gamma: &ChristoffelField) -> u32 {
    gamma.cap().saturating_sub(1)
}

/// `ℒ(Γ)_{ijk}^l = ∂_i Γ_{jk}^l - ∂_j Γ_{ik}^l`, at cap `N` for `Γ` at cap `N + 1`.
pub fn curvature_l(gamma: &ChristoffelField) -> CurvatureField {
    let cap = curvature_cap(gamma);
    let g = &gamma.components;
    let t = Tensor4::from_fn_par(gamma.dim(), |[i, j, k, l]| {
        let a = g[[j, k, l]].partial_derivative(i).expect("axis in range");
        let b = g[[i, k, l]].partial_derivative(j).expect("axis in range");
        (&a - &b).recap(cap)
    });
    CurvatureField::new(t).expect("uniform shapes")
}

/// `(Γ⋆ℰ)_{ijk}^l = ℰ_{in}^l Γ_{jk}^n + Γ_{in}^l ℰ_{jk}^n - ℰ_{jn}^l Γ_{ik}^n - Γ_{jn}^l ℰ_{ik}^n`,
/// truncated at the curvature cap.
pub fn star(gamma: &ChristoffelField, e: &ChristoffelField) -> Result<CurvatureField> {
    if gamma.dim() != e.dim() || gamma.cap() != e.cap() {
        return Err(Error::shape("star of Christoffel fields with different shapes"));
    }
    let cap = curvature_cap(gamma);
    let (g, e) = (gamma.recap(cap).components, e.recap(cap).components);
    let m = gamma.dim();
    let t = Tensor4::from_fn_par(m, |[i, j, k, l]| {
        sum((0..m).map(|n| {
            let p = &(&e[[i, n, l]] * &g[[j, k, n]]) + &(&g[[i, n, l]] * &e[[j, k, n]]);
            let q = &(&e[[j, n, l]] * &g[[i, k, n]]) + &(&g[[j, n, l]] * &e[[i, k, n]]);
            &p - &q
        }))
    });
    CurvatureField::new(t)
}

/// Curvature of the connection: `ℒ(Γ) + ½ Γ⋆Γ`.
pub fn curvature_of(gamma: &ChristoffelField) -> CurvatureField {
    let l = curvature_l(gamma);
    let q = star(gamma, gamma).expect("same shapes");
    let r = l.components().plus(&q.components().scaled(&rational::ratio(1, 2)));
    CurvatureField::new(r).expect("uniform shapes")
}

/// Ricci tensor of the curvature of `Γ`, computing only the traced components
/// `R_{ijk}^i = ∂_i Γ_{jk}^i - ∂_j Γ_{ik}^i + Σ_n (Γ_{in}^i Γ_{jk}^n - Γ_{jn}^i Γ_{ik}^n)`.
pub fn ricci_of_connection(gamma: &ChristoffelField) -> Tensor2<Jet> {
    let cap = curvature_cap(gamma);
    let m = gamma.dim();
    let full = &gamma.components;
    let g = gamma.recap(cap).components;
    Tensor2::from_fn_par(m, |[j, k]| {
        sum((0..m).map(|i| {
            let lin = &full[[j, k, i]].partial_derivative(i).expect("axis")
                - &full[[i, k, i]].partial_derivative(j).expect("axis");
            let quad = sum((0..m).map(|n| &(&g[[i, n, i]] * &g[[j, k, n]]) - &(&g[[j, n, i]] * &g[[i, k, n]])));
            &lin.recap(cap) + &quad
        }))
    })
}

/// Linear starting symbol `Γ_{uv}^l = ⅓ (A_{wuv}^l + A_{wvu}^l) x^w`.
pub fn initial_gamma(a: &AlgebraicCurvatureOperator, cap: u32) -> ChristoffelField {
    let m = a.dim();
    let third = rational::ratio(1, 3);
    let xs: Vec<Jet> = (0..m).map(|w| Jet::variable(m, cap, w).expect("axis")).collect();
    let components = Tensor3::from_fn(m, |[u, v, l]| {
        sum((0..m).map(|w| xs[w].scale(&((&a[[w, u, v, l]] + &a[[w, v, u, l]]) * &third))))
    });
    ChristoffelField { components }
}

/// `Θ_{ij} = ρ_s(R^{∇(Γ)})(E_i, E_j) - ρ_s(A)_{ij}` at the curvature cap.
pub fn theta(gamma: &ChristoffelField, a: &AlgebraicCurvatureOperator, frame: &FrameField) -> Result<ThetaField> {
    if gamma.dim() != a.dim() || gamma.dim() != frame.dim() {
        return Err(Error::shape("theta inputs have different dimensions"));
    }
    let cap = curvature_cap(gamma);
    if frame.cap() < cap {
        return Err(Error::shape(format!("frame cap {} is below the curvature cap {cap}", frame.cap())));
    }
    let rho_s = split_form(&ricci_of_connection(gamma)).1;
    let target = algebra::ricci_symmetric(a);
    let m = gamma.dim();
    Ok(frame.pull_back(&rho_s).minus(&target.map(|v| Jet::constant(m, cap, v.clone()))))
}

/// The index `k(i, j)`: smallest axis different from both `i` and `j`.
pub fn correction_axis(i: usize, j: usize, dim: usize) -> Option<usize> {
    (0..dim).find(|&k| k != i && k != j)
}

/// Trace-free symmetric `ℰ` with `ρ(ℒ(ℰ)) = -Θ`:
/// `ℰ_{ij}^{k(i,j)} = ∫_0^{x_k} -Θ_{ij} dx_k`, all other components zero.
/// The result has cap `cap`, which should exceed `Θ`'s cap by one.
pub fn solve_correction(theta: &ThetaField, cap: u32) -> Result<ChristoffelField> {
    let m = theta.dim();
    if m < 3 {
        return Err(Error::domain("the correction needs dimension at least 3"));
    }
    if !theta.is_symmetric() {
        return Err(Error::domain("Θ must be symmetric"));
    }
    let mut comps: Vec<Option<Jet>> = vec![None; m * m * m];
    for ([i, j], t) in theta.indexed() {
        let k = correction_axis(i, j, m).expect("m ≥ 3");
        comps[(i * m + j) * m + k] = Some((-&t.recap(cap)).integrate_axis(k)?);
    }
    let components = Tensor3::from_fn(m, |[i, j, l]| {
        comps[(i * m + j) * m + l].clone().unwrap_or_else(|| Jet::zero(m, cap))
    });
    Ok(ChristoffelField { components })
}

/// Right-hand side of the defect recursion,
/// `-Θ_ν(E_i, E_j) + Θ_{ν,ij} + ρ_s{(Γ_ν + ½ℰ_{ν+1}) ⋆ ℰ_{ν+1}}(E_i, E_j)`.
pub fn theta_recursion_rhs(
    gamma: &ChristoffelField,
    correction: &ChristoffelField,
    theta_nu: &ThetaField,
    frame: &FrameField,
) -> Result<ThetaField> {
    let half_e = ChristoffelField { components: correction.components.scaled(&rational::ratio(1, 2)) };
    let q = star(&gamma.plus(&half_e), correction)?;
    let rho_s = split_form(&q.ricci()).1;
    Ok(frame.pull_back(&rho_s).plus(theta_nu).minus(&frame.pull_back(theta_nu)))
}

/// Normalization conditions of a Christoffel field, checked exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationStatus {
    pub vanishes_at_origin: bool,
    /// `R - A` has valuation at least 2.
    pub curvature_second_order: bool,
    /// `ρ_a(R)` is the constant jet `ρ_a(A)`.
    pub ricci_antisymmetric_constant: bool,
    /// Regularity of `ρ_s(R)` carries no information for polynomial jets.
    pub regularity: String,
}

impl NormalizationStatus {
    pub fn holds(&self) -> bool {
        self.vanishes_at_origin && self.curvature_second_order && self.ricci_antisymmetric_constant
    }
}

pub fn normalization_status(gamma: &ChristoffelField, a: &AlgebraicCurvatureOperator) -> NormalizationStatus {
    let r = curvature_of(gamma);
    let (m, cap) = (gamma.dim(), curvature_cap(gamma));
    let defect = r.components().minus(&a.tensor().map(|v| Jet::constant(m, cap, v.clone())));
    let rho_a = split_form(&r.ricci()).0;
    let target = algebra::ricci_antisymmetric(a).map(|v| Jet::constant(m, cap, v.clone()));
    let curvature_second_order = defect.indexed().all(|(_, j)| j.valuation().is_none_or(|v| v >= 2));
    NormalizationStatus {
        vanishes_at_origin: gamma.components.indexed().all(|(_, j)| j.constant_term().is_zero()),
        curvature_second_order,
        ricci_antisymmetric_constant: rho_a == target,
        regularity: "vacuous at finite order".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// `ν`, starting at 1.
    pub step: usize,
    /// `val(Θ_ν)`; `None` is `+∞`.
    pub theta_valuation: Option<u32>,
    /// Sampled `‖Θ_ν‖` with decay order `2ν`.
    #[serde(with = "rational::as_string")]
    pub theta_norm: Rational,
    /// Sampled `‖Γ_ν‖` with decay order 1.
    #[serde(with = "rational::as_string")]
    pub gamma_norm: Rational,
    /// `val(ℰ_{ν+1})`, absent on the final step.
    pub correction_valuation: Option<u32>,
    /// Sampled `‖ℰ_{ν+1}‖` with decay order `2ν + 1`.
    #[serde(with = "rational::opt_as_string")]
    pub correction_norm: Option<Rational>,
    /// Whether `Γ_{ν+1}` keeps the trace of `Γ_ν`.
    pub trace_preserved: Option<bool>,
    /// Whether both sides of the defect recursion agree exactly.
    pub recursion_identity: Option<bool>,
    pub normalization: Option<NormalizationStatus>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub dim: usize,
    pub order: u32,
    pub signature: Signature,
    pub input_normal_form: NormalFormVerdict,
    pub coordinate_map: CoordinateMapRecord,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub verification: Option<VerificationSuite>,
}

impl RealizationReport {
    pub fn valuations_strictly_increase(&self) -> bool {
        let vals: Vec<u32> = self.iterations.iter().map(|r| r.theta_valuation.unwrap_or(u32::MAX)).collect();
        vals.windows(2).all(|w| w[0] < w[1])
    }

    /// `val(Θ_ν) ≥ 2ν` at every recorded step.
    pub fn valuation_doubling_holds(&self) -> bool {
        self.iterations.iter().all(|r| r.theta_valuation.is_none_or(|v| v as usize >= 2 * r.step))
    }

    /// All recorded invariants hold (unchecked invariants count as holding).
    pub fn invariants_hold(&self) -> bool {
        self.converged
            && self.valuations_strictly_increase()
            && self.iterations.iter().all(|r| {
                r.trace_preserved != Some(false)
                    && r.recursion_identity != Some(false)
                    && r.normalization.as_ref().is_none_or(NormalizationStatus::holds)
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RealizeOptions {
    /// Recompute `Θ_{ν+1}` through the recursion identity and compare.
    pub check_recursion: bool,
    /// Record the normalization conditions of every `Γ_ν`.
    pub check_normalization: bool,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions { check_recursion: true, check_normalization: true }
    }
}

/// Output of [`realize`]: the connection expressed in the normalized
/// coordinates, together with the metric and frame it was built against.
#[derive(Clone, Debug)]
pub struct Realization {
    pub gamma: ChristoffelField,
    pub metric: MetricField,
    pub frame: FrameField,
    pub coordinate_map: CoordinateMap,
    pub report: RealizationReport,
}

pub fn realize(a: &AlgebraicCurvatureOperator, g: &MetricField, order: u32) -> Result<Realization> {
    realize_with(a, g, order, RealizeOptions::default())
}

pub fn realize_with(
    a: &AlgebraicCurvatureOperator,
    g: &MetricField,
    order: u32,
    options: RealizeOptions,
) -> Result<Realization> {
    let m = a.dim();
    if g.dim() != m {
        return Err(Error::shape(format!("{m}-dimensional operator with a {}-dimensional metric", g.dim())));
    }
    if order < 2 {
        return Err(Error::domain(format!("order must be at least 2, got {order}")));
    }
    let cap = order + 1;
    let g = g.recap(cap);
    let input_normal_form = frame::validate_normal_form(&g);
    let (coordinate_map, metric) = frame::quadratic_normalize(&g)?;
    let frame = frame::orthonormal_frame(&metric)?;

    let mut gamma = initial_gamma(a, cap);
    let mut theta_nu = theta(&gamma, a, &frame)?;
    let mut iterations = Vec::new();
    let mut step = 1usize;
    loop {
        if step > order as usize + 2 {
            return Err(Error::Internal(format!("no convergence after {} steps at order {order}", step - 1)));
        }
        let normalization = options.check_normalization.then(|| normalization_status(&gamma, a));
        let theta_valuation = theta_valuation(&theta_nu);
        let theta_norm = verifier::weighted_norm_sample(theta_nu.indexed().map(|(_, j)| j), 2 * step as u32);
        let gamma_norm = verifier::weighted_norm_sample(gamma.components.indexed().map(|(_, j)| j), 1);
        if theta_nu.is_zero() {
            iterations.push(IterationRecord {
                step,
                theta_valuation,
                theta_norm,
                gamma_norm,
                correction_valuation: None,
                correction_norm: None,
                trace_preserved: None,
                recursion_identity: None,
                normalization,
            });
            break;
        }
        let correction = solve_correction(&theta_nu, cap)?;
        let next = gamma.plus(&correction);
        let theta_next = theta(&next, a, &frame)?;
        let trace_preserved = (0..m).all(|j| next.trace(j) == gamma.trace(j));
        let recursion_identity = if options.check_recursion {
            Some(theta_recursion_rhs(&gamma, &correction, &theta_nu, &frame)? == theta_next)
        } else {
            None
        };
        let correction_norm = verifier::weighted_norm_sample(
            correction.components.indexed().map(|(_, j)| j),
            2 * step as u32 + 1,
        );
        iterations.push(IterationRecord {
            step,
            theta_valuation,
            theta_norm,
            gamma_norm,
            correction_valuation: correction.valuation(),
            correction_norm: Some(correction_norm),
            trace_preserved: Some(trace_preserved),
            recursion_identity,
            normalization,
        });
        gamma = next;
        theta_nu = theta_next;
        step += 1;
    }

    let report = RealizationReport {
        dim: m,
        order,
        signature: g.signature(),
        input_normal_form,
        coordinate_map: CoordinateMapRecord::from(&coordinate_map),
        iterations,
        converged: true,
        verification: None,
    };
    Ok(Realization { gamma, metric, frame, coordinate_map, report })
}

fn theta_valuation(theta: &ThetaField) -> Option<u32> {
    theta.indexed().filter_map(|(_, j)| j.valuation()).min()
}

/// Runs [`realize`] over several operators concurrently.
pub fn realize_many(
    jobs: &[(AlgebraicCurvatureOperator, MetricField)],
    order: u32,
) -> Vec<Result<Realization>> {
    jobs.par_iter().map(|(a, g)| realize(a, g, order)).collect()
}

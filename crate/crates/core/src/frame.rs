//! Metric jets, second-order normal coordinates, and orthonormal frames.
//!
//! The realizer measures Ricci curvature in a `g`-orthonormal frame `{E_i}`
//! with `E_i(0) = ∂_i`. When `g(0) = diag(ε)` and the first derivatives of `g`
//! vanish at the origin, the frame produced here agrees with the coordinate
//! frame to second order, i.e. `E_i^j - δ_i^j` has valuation at least 2.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, BilinearForm, InnerProduct, Signature};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::rational::{self, Rational};
use crate::tensor::{sum, Tensor2, Tensor3};

/// A jet-valued symmetric metric `g_{ij}` with a declared signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricField {
    signature: Signature,
    components: Tensor2<Jet>,
}

impl MetricField {
    pub fn new(signature: Signature, components: Tensor2<Jet>) -> Result<Self> {
        let m = components.dim();
        if m != signature.dim() {
            return Err(Error::shape(format!(
                "{m}-dimensional metric with signature ({}, {})",
                signature.timelike, signature.spacelike
            )));
        }
        let cap = components[[0, 0]].cap();
        if components.indexed().any(|(_, j)| j.dim() != m || j.cap() != cap) {
            return Err(Error::shape("metric components carry mixed jet shapes"));
        }
        if !components.is_symmetric() {
            return Err(Error::invalid("metric is not symmetric"));
        }
        let g = MetricField { signature, components };
        InnerProduct::new(g.value_at_origin(), signature)?;
        Ok(g)
    }

    /// The constant metric `diag(ε)`.
    pub fn flat(signature: Signature, cap: u32) -> Self {
        let m = signature.dim();
        let components =
            Tensor2::from_fn(m, |[i, j]| if i == j { Jet::constant(m, cap, signature.epsilon(i)) } else { Jet::zero(m, cap) });
        MetricField { signature, components }
    }

    pub fn dim(&self) -> usize {
        self.components.dim()
    }

    pub fn cap(&self) -> u32 {
        self.components[[0, 0]].cap()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn components(&self) -> &Tensor2<Jet> {
        &self.components
    }

    pub fn value_at_origin(&self) -> BilinearForm {
        self.components.map(Jet::constant_term)
    }

    pub fn inner_product_at_origin(&self) -> Result<InnerProduct> {
        InnerProduct::new(self.value_at_origin(), self.signature)
    }

    pub fn recap(&self, cap: u32) -> MetricField {
        MetricField { signature: self.signature, components: self.components.map(|j| j.recap(cap)) }
    }

    /// `g(u, v) = Σ u^a v^b g_{ab}` for jet-valued vector fields.
    pub fn pairing(&self, u: &[Jet], v: &[Jet]) -> Jet {
        let m = self.dim();
        sum((0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| &(&u[a] * &v[b]) * &self.components[[a, b]]))
    }

    /// Jet-valued inverse matrix `g^{ij}`.
    pub fn inverse(&self) -> Result<Tensor2<Jet>> {
        jet_matrix_inverse(&self.components)
    }
}

/// Inverse of a matrix of jets whose constant part is invertible, by the
/// Neumann series `Σ_k (-C⁻¹H)^k C⁻¹` with `C` constant and `val(H) ≥ 1`.
pub fn jet_matrix_inverse(g: &Tensor2<Jet>) -> Result<Tensor2<Jet>> {
    let m = g.dim();
    let (n, cap) = (g[[0, 0]].dim(), g[[0, 0]].cap());
    let c = g.map(Jet::constant_term);
    let c_inv = algebra::invert(&c).ok_or_else(|| Error::domain("matrix of jets is singular at the origin"))?;
    let lift = |q: &BilinearForm| q.map(|v| Jet::constant(n, cap, v.clone()));
    let (c_inv_j, c_j) = (lift(&c_inv), lift(&c));
    let k = c_inv_j.matmul(&g.minus(&c_j)).scaled(&rational::int(-1));
    let id = lift(&Tensor2::identity(m));
    let mut s = id.clone();
    for _ in 0..cap {
        s = id.plus(&k.matmul(&s));
    }
    Ok(s.matmul(&c_inv_j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormVerdict {
    /// `g(0) = diag(ε)`.
    pub value_normalized: bool,
    /// Every degree-1 coefficient of `g` vanishes.
    pub first_order_flat: bool,
}

impl NormalFormVerdict {
    pub fn is_normal(&self) -> bool {
        self.value_normalized && self.first_order_flat
    }
}

pub fn validate_normal_form(g: &MetricField) -> NormalFormVerdict {
    NormalFormVerdict {
        value_normalized: g.value_at_origin() == g.signature.diagonal(),
        first_order_flat: g.components.indexed().all(|(_, j)| j.homogeneous(1).is_zero()),
    }
}

/// The coordinate change `x^i = y^i - ½ c^i_{jk} y^j y^k` applied by
/// [`quadratic_normalize`]. `christoffel[[j, k, i]]` holds `c^i_{jk}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateMap {
    pub christoffel: Tensor3<Rational>,
    pub images: Vec<Jet>,
}

impl CoordinateMap {
    pub fn identity(dim: usize, cap: u32) -> Self {
        CoordinateMap {
            christoffel: Tensor3::from_fn(dim, |_| Rational::zero()),
            images: (0..dim).map(|i| Jet::variable(dim, cap, i).expect("axis in range")).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.christoffel.is_zero()
    }
}

/// Removes the first-order part of `g` by the quadratic coordinate change
/// built from its Levi-Civita symbols at the origin.
pub fn quadratic_normalize(g: &MetricField) -> Result<(CoordinateMap, MetricField)> {
    if !validate_normal_form(g).value_normalized {
        return Err(Error::domain(
            "metric value at the origin must be diag(ε) (timelike directions first); \
             pre-transform the metric by a constant congruence",
        ));
    }
    let (m, cap) = (g.dim(), g.cap());
    let dg = |a: usize, b: usize, axis: usize| -> Rational {
        let mut e = vec![0; m];
        e[axis] = 1;
        g.components[[a, b]].coefficient(&e)
    };
    let half = rational::ratio(1, 2);
    let christoffel = Tensor3::from_fn(m, |[j, k, i]| {
        g.signature.epsilon(i) * &half * (dg(i, k, j) + dg(i, j, k) - dg(j, k, i))
    });
    if christoffel.is_zero() {
        return Ok((CoordinateMap::identity(m, cap), g.clone()));
    }
    let y: Vec<Jet> = (0..m).map(|i| Jet::variable(m, cap, i)).collect::<Result<_>>()?;
    let images: Vec<Jet> = (0..m)
        .map(|i| {
            let quad = sum((0..m).flat_map(|j| (0..m).map(move |k| (j, k))).map(|(j, k)| {
                (&y[j] * &y[k]).scale(&christoffel[[j, k, i]])
            }));
            &y[i] - &quad.scale(&half)
        })
        .collect();
    // jacobian[[i, a]] = ∂x^i/∂y^a = δ - c^i_{aj} y^j
    let jacobian = Tensor2::from_fn(m, |[i, a]| {
        let lin = sum((0..m).map(|j| y[j].scale(&christoffel[[a, j, i]])));
        let delta = if i == a { Jet::one(m, cap) } else { Jet::zero(m, cap) };
        &delta - &lin
    });
    let pulled = g.components.try_map(|gij| gij.substitute(&images))?;
    let components = Tensor2::from_fn(m, |[a, b]| {
        sum((0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| {
            &(&pulled[[i, j]] * &jacobian[[i, a]]) * &jacobian[[j, b]]
        }))
    });
    let normalized = MetricField { signature: g.signature, components };
    if !validate_normal_form(&normalized).is_normal() {
        return Err(Error::Internal("quadratic normalization left first-order terms".into()));
    }
    Ok((CoordinateMap { christoffel, images }, normalized))
}

/// A jet-valued frame; `components[[i, a]]` is the `a`-th coordinate
/// component of the frame vector `E_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameField {
    components: Tensor2<Jet>,
}

impl FrameField {
    pub fn components(&self) -> &Tensor2<Jet> {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.dim()
    }

    pub fn cap(&self) -> u32 {
        self.components[[0, 0]].cap()
    }

    pub fn recap(&self, cap: u32) -> FrameField {
        FrameField { components: self.components.map(|j| j.recap(cap)) }
    }

    /// Frame components `S(E_i, E_j) = Σ E_i^a E_j^b S_{ab}` of a jet-valued
    /// form. The frame is truncated to the form's cap first.
    pub fn pull_back(&self, form: &Tensor2<Jet>) -> Tensor2<Jet> {
        let cap = form[[0, 0]].cap();
        let e = if cap == self.cap() { self.components.clone() } else { self.components.map(|j| j.recap(cap)) };
        let m = self.dim();
        // half[[a, j]] = Σ_b S_{ab} E_j^b
        let half = Tensor2::from_fn_par(m, |[a, j]| sum((0..m).map(|b| &form[[a, b]] * &e[[j, b]])));
        Tensor2::from_fn_par(m, |[i, j]| sum((0..m).map(|a| &e[[i, a]] * &half[[a, j]])))
    }

    /// Minimum valuation of `E_i^j - δ_i^j`; `None` when the frame is exactly
    /// the coordinate frame.
    pub fn deviation_valuation(&self) -> Option<u32> {
        let (n, cap) = (self.components[[0, 0]].dim(), self.cap());
        self.components
            .indexed()
            .filter_map(|([i, j], e)| {
                let delta = if i == j { Jet::one(n, cap) } else { Jet::zero(n, cap) };
                (e - &delta).valuation()
            })
            .min()
    }
}

/// Signed Gram–Schmidt over jets, timelike directions first:
/// `u_i = ∂_i - Σ_{j<i} ε_j g(∂_i, E_j) E_j`, `E_i = u_i / sqrt(ε_i g(u_i, u_i))`.
pub fn orthonormal_frame(g: &MetricField) -> Result<FrameField> {
    if !validate_normal_form(g).is_normal() {
        return Err(Error::domain("orthonormal_frame needs a metric in normal form"));
    }
    let (m, cap) = (g.dim(), g.cap());
    let sig = g.signature;
    let mut frame: Vec<Vec<Jet>> = Vec::with_capacity(m);
    for i in 0..m {
        let coord: Vec<Jet> =
            (0..m).map(|a| if a == i { Jet::one(m, cap) } else { Jet::zero(m, cap) }).collect();
        let mut u = coord.clone();
        for (j, ej) in frame.iter().enumerate() {
            let coef = g.pairing(&coord, ej).scale(&sig.epsilon(j));
            for a in 0..m {
                u[a] = &u[a] - &(&coef * &ej[a]);
            }
        }
        let radicand = g.pairing(&u, &u).scale(&sig.epsilon(i));
        if !rational::is_one(&radicand.constant_term()) {
            return Err(Error::Internal(format!("Gram–Schmidt radicand for E_{} is not a unit", i + 1)));
        }
        let scale = radicand.sqrt_unit()?.inverse_unit()?;
        frame.push(u.iter().map(|ua| ua * &scale).collect());
    }
    Ok(FrameField { components: Tensor2::from_fn(m, |[i, a]| frame[i][a].clone()) })
}

/// `diag(ε)` plus a deterministic random symmetric perturbation with the
/// given homogeneous degrees. Coefficients lie in `{-1, -1/2, 0, 1/2, 1}`.
/// Degrees must be at least 1, so the value at the origin stays `diag(ε)`.
pub fn random_metric(seed: u64, signature: Signature, cap: u32, degrees: &[u32]) -> Result<MetricField> {
    use rand::{Rng, SeedableRng};
    if degrees.contains(&0) {
        return Err(Error::domain("perturbation degrees must be positive"));
    }
    let m = signature.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let monomials: Vec<Vec<u32>> = degrees.iter().flat_map(|&d| exponents_of_degree(m, d)).collect();
    let mut upper = vec![Jet::zero(m, cap); m * m];
    for i in 0..m {
        for j in i..m {
            let terms: Vec<(Vec<u32>, Rational)> =
                monomials.iter().map(|e| (e.clone(), rational::ratio(rng.random_range(-2..=2), 2))).collect();
            upper[i * m + j] = Jet::from_exponents(m, cap, terms)?;
        }
    }
    let flat = MetricField::flat(signature, cap);
    let comps = Tensor2::from_fn(m, |[i, j]| &flat.components[[i, j]] + &upper[i.min(j) * m + i.max(j)]);
    MetricField::new(signature, comps)
}

fn exponents_of_degree(m: usize, d: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .rev()
        .flat_map(|first| {
            exponents_of_degree(m - 1, d - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

//! Truncated multivariate polynomials ("jets") over exact rationals.
//!
//! A [`Jet`] in `m` variables with degree cap `N` stores the Taylor
//! coefficients of a germ at the origin through total degree `N`. All
//! arithmetic truncates by total degree, so truncation is a ring
//! homomorphism and identities proved on germs hold exactly on jets.
//!
//! Axes are 0-based throughout the Rust API.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exponent vector of a monomial, ordered by total degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    exponents: Box<[u32]>,
}

impl Monomial {
    pub fn new(exponents: impl Into<Box<[u32]>>) -> Self {
        let exponents = exponents.into();
        let degree = exponents.iter().sum();
        Monomial { degree, exponents }
    }

    pub fn one(dim: usize) -> Self {
        Monomial { degree: 0, exponents: vec![0; dim].into() }
    }

    pub fn variable(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        Monomial::new(e)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    fn product(&self, other: &Monomial) -> Monomial {
        let exponents: Box<[u32]> =
            self.exponents.iter().zip(other.exponents.iter()).map(|(a, b)| a + b).collect();
        Monomial { degree: self.degree + other.degree, exponents }
    }

    fn shifted(&self, axis: usize, delta: i32) -> Monomial {
        let mut e = self.exponents.to_vec();
        e[axis] = (e[axis] as i32 + delta) as u32;
        Monomial { degree: (self.degree as i32 + delta) as u32, exponents: e.into() }
    }
}

/// A multivariate polynomial truncated at total degree `cap`.
///
/// Terms are kept in canonical sparse form: no zero coefficients, no
/// monomial above the cap. Equality is structural on `(dim, cap, terms)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Jet {
    dim: usize,
    cap: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl Jet {
    pub fn zero(dim: usize, cap: u32) -> Self {
        Jet { dim, cap, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, cap: u32, c: Rational) -> Self {
        let mut j = Jet::zero(dim, cap);
        if !c.is_zero() {
            j.terms.insert(Monomial::one(dim), c);
        }
        j
    }

    pub fn one(dim: usize, cap: u32) -> Self {
        Jet::constant(dim, cap, Rational::one())
    }

    /// The coordinate function `x_axis`; zero when `cap == 0`.
    pub fn variable(dim: usize, cap: u32, axis: usize) -> Result<Self> {
        check_axis(axis, dim)?;
        Ok(Jet::from_terms(dim, cap, [(Monomial::variable(dim, axis), Rational::one())]))
    }

    /// Builds a jet from `(monomial, coefficient)` pairs, collecting like terms.
    /// Monomials above the cap are dropped, matching germ truncation.
    ///
    /// Panics if a monomial has the wrong number of exponents; use
    /// [`Jet::from_exponents`] for unchecked input.
    pub fn from_terms(
        dim: usize,
        cap: u32,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut out = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.exponents.len(), dim, "monomial length does not match jet dimension");
            if m.degree <= cap {
                accumulate(&mut out, m, c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Jet { dim, cap, terms: out }
    }

    pub fn from_exponents(
        dim: usize,
        cap: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut checked = Vec::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::shape(format!(
                    "exponent vector of length {} in a {dim}-variable jet",
                    e.len()
                )));
            }
            checked.push((Monomial::new(e), c));
        }
        Ok(Jet::from_terms(dim, cap, checked))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(&Monomial::new(exponents.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one(self.dim)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Lowest total degree carrying a nonzero coefficient; `None` stands for
    /// `+∞` (the zero jet).
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    /// Highest total degree present, `None` for the zero jet.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Reinterprets the jet with a different cap. Lowering truncates;
    /// raising treats the stored polynomial as exact.
    pub fn recap(&self, cap: u32) -> Jet {
        let terms = self.terms.iter().filter(|(m, _)| m.degree <= cap).map(|(m, c)| (m.clone(), c.clone())).collect();
        Jet { dim: self.dim, cap, terms }
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous(&self, d: u32) -> Jet {
        let terms = self.terms.iter().filter(|(m, _)| m.degree == d).map(|(m, c)| (m.clone(), c.clone())).collect();
        Jet { dim: self.dim, cap: self.cap, terms }
    }

    fn check_shape(&self, other: &Jet) -> Result<()> {
        if self.dim != other.dim || self.cap != other.cap {
            return Err(Error::shape(format!(
                "jet (dim {}, cap {}) combined with jet (dim {}, cap {})",
                self.dim, self.cap, other.dim, other.cap
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        let mut out = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut out, m.clone(), c.clone());
        }
        out.retain(|_, c| !c.is_zero());
        Ok(Jet { dim: self.dim, cap: self.cap, terms: out })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        let mut out = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut out, m.clone(), -c);
        }
        out.retain(|_, c| !c.is_zero());
        Ok(Jet { dim: self.dim, cap: self.cap, terms: out })
    }

    /// Cauchy product, discarding every monomial above the cap.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        let cap = self.cap;
        let mut out = BTreeMap::new();
        let Some(min_other) = other.valuation() else {
            return Ok(Jet::zero(self.dim, cap));
        };
        for (ma, ca) in &self.terms {
            if ma.degree + min_other > cap {
                break;
            }
            let room = cap - ma.degree;
            for (mb, cb) in &other.terms {
                if mb.degree > room {
                    break;
                }
                accumulate(&mut out, ma.product(mb), ca * cb);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(Jet { dim: self.dim, cap, terms: out })
    }

    pub fn scale(&self, c: &Rational) -> Jet {
        if c.is_zero() {
            return Jet::zero(self.dim, self.cap);
        }
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        Jet { dim: self.dim, cap: self.cap, terms }
    }

    /// Formal `∂/∂x_axis`. The cap is kept, so a jet faithful through degree
    /// `N` yields one faithful through `N - 1`.
    pub fn partial_derivative(&self, axis: usize) -> Result<Jet> {
        check_axis(axis, self.dim)?;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exponents[axis] > 0)
            .map(|(m, c)| (m.shifted(axis, -1), c * rational::int(i64::from(m.exponents[axis]))))
            .collect();
        Ok(Jet { dim: self.dim, cap: self.cap, terms })
    }

    /// Antiderivative along `axis` vanishing on `x_axis = 0`:
    /// `x^α ↦ x^α · x_axis / (α_axis + 1)`, truncated at the cap.
    pub fn integrate_axis(&self, axis: usize) -> Result<Jet> {
        check_axis(axis, self.dim)?;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree < self.cap)
            .map(|(m, c)| (m.shifted(axis, 1), c / rational::int(i64::from(m.exponents[axis]) + 1)))
            .collect();
        Ok(Jet { dim: self.dim, cap: self.cap, terms })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.dim {
            return Err(Error::shape(format!(
                "point of length {} for a {}-variable jet",
                x.len(),
                self.dim
            )));
        }
        let powers = power_table(x, self.cap);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (axis, &e) in m.exponents.iter().enumerate() {
                if e > 0 {
                    t *= &powers[axis][e as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Square root of a jet with constant term 1, itself with constant term 1.
    pub fn sqrt_unit(&self) -> Result<Jet> {
        if !rational::is_one(&self.constant_term()) {
            return Err(Error::domain("sqrt_unit needs constant term 1"));
        }
        // (1 + t)^2 = 1 + b  ⇔  t = (b - t^2) / 2; each pass fixes one more degree.
        let b = self - &Jet::one(self.dim, self.cap);
        let half = rational::ratio(1, 2);
        let mut t = Jet::zero(self.dim, self.cap);
        for _ in 0..self.cap {
            let next = (&b - &(&t * &t)).scale(&half);
            if next == t {
                break;
            }
            t = next;
        }
        Ok(&t + &Jet::one(self.dim, self.cap))
    }

    /// Multiplicative inverse of a jet with nonzero constant term.
    pub fn inverse_unit(&self) -> Result<Jet> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::domain("inverse_unit needs a nonzero constant term"));
        }
        let one = Jet::one(self.dim, self.cap);
        let c_inv = c.recip();
        // a = c (1 + u) with val(u) ≥ 1, so 1/a = c⁻¹ Σ (-u)^k.
        let u = &self.scale(&c_inv) - &one;
        let mut r = one.clone();
        for _ in 0..self.cap {
            r = &one - &(&u * &r);
        }
        Ok(r.scale(&c_inv))
    }

    /// Composition `a(map_1(x), …, map_m(x))`. Every image must vanish at the
    /// origin so that the result is determined by the truncated data.
    pub fn substitute(&self, map: &[Jet]) -> Result<Jet> {
        if map.len() != self.dim {
            return Err(Error::shape(format!(
                "substitution needs {} image jets, got {}",
                self.dim,
                map.len()
            )));
        }
        for (i, img) in map.iter().enumerate() {
            self.check_shape(img)?;
            if !img.constant_term().is_zero() {
                return Err(Error::domain(format!("image jet {i} has a nonzero constant term")));
            }
        }
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(self.dim);
        for img in map {
            let mut p = vec![Jet::one(self.dim, self.cap)];
            for e in 1..=self.cap as usize {
                let next = &p[e - 1] * img;
                p.push(next);
            }
            powers.push(p);
        }
        let mut acc = Jet::zero(self.dim, self.cap);
        for (m, c) in &self.terms {
            let mut t = Jet::constant(self.dim, self.cap, c.clone());
            for (axis, &e) in m.exponents.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[axis][e as usize];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    pub fn to_records(&self) -> Vec<JetRecord> {
        self.terms
            .iter()
            .map(|(m, c)| JetRecord {
                exponents: m.exponents.to_vec(),
                coeff: rational::format_rational(c),
            })
            .collect()
    }

    pub fn from_records(dim: usize, cap: u32, records: &[JetRecord]) -> Result<Jet> {
        let terms = records
            .iter()
            .map(|r| Ok((r.exponents.clone(), rational::parse_rational(&r.coeff)?)))
            .collect::<Result<Vec<_>>>()?;
        Jet::from_exponents(dim, cap, terms)
    }
}

/// One serialized term of a jet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetRecord {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

fn accumulate(out: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
    match out.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
        }
    }
}

fn check_axis(axis: usize, dim: usize) -> Result<()> {
    if axis >= dim {
        return Err(Error::Axis { axis, dim });
    }
    Ok(())
}

fn power_table(x: &[Rational], cap: u32) -> Vec<Vec<Rational>> {
    x.iter()
        .map(|xi| {
            let mut p = vec![Rational::one()];
            for e in 1..=cap as usize {
                let next = &p[e - 1] * xi;
                p.push(next);
            }
            p
        })
        .collect()
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[m={}, N={}](", self.dim, self.cap)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (axis, &e) in m.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{}", axis + 1)?,
                    _ => write!(f, "·x{}^{e}", axis + 1)?,
                }
            }
        }
        Ok(())
    }
}

// Operator impls panic on shape mismatch, like ndarray's broadcasting ops;
// the `try_*` methods are the fallible forms.
impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet shape mismatch")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet shape mismatch")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet shape mismatch")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        Jet { dim: self.dim, cap: self.cap, terms }
    }
}

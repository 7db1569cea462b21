//! Dense index-addressed tensors over a generic scalar (exact rationals or jets).
//!
//! Contractions written once against [`Scalar`] serve both constant tensors
//! at a point and jet-valued fields.

use std::fmt;
use std::ops::Index;

use num_traits::Zero;
use rayon::prelude::*;

use crate::jet::Jet;
use crate::rational::Rational;

/// Minimal ring interface shared by [`Rational`] and [`Jet`].
///
/// Jets carry their shape, so zeros are produced from an existing value.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn scaled(&self, c: &Rational) -> Self;
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scaled(&self, c: &Rational) -> Self {
        self * c
    }
}

impl Scalar for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero(self.dim(), self.cap())
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scaled(&self, c: &Rational) -> Self {
        self.scale(c)
    }
}

/// Sums a non-empty sequence of scalars.
pub(crate) fn sum<S: Scalar>(mut items: impl Iterator<Item = S>) -> S {
    let first = items.next().expect("sum over an empty index range");
    items.fold(first, |acc, x| acc.plus(&x))
}

macro_rules! dense_tensor {
    ($name:ident, $rank:literal, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name<S> {
            dim: usize,
            data: Vec<S>,
        }

        impl<S> $name<S> {
            pub fn dim(&self) -> usize {
                self.dim
            }

            fn offset(&self, idx: [usize; $rank]) -> usize {
                idx.iter().fold(0, |acc, &i| {
                    assert!(i < self.dim, "tensor index {i} out of range for dimension {}", self.dim);
                    acc * self.dim + i
                })
            }

            fn unflatten(dim: usize, mut flat: usize) -> [usize; $rank] {
                let mut idx = [0; $rank];
                for slot in idx.iter_mut().rev() {
                    *slot = flat % dim;
                    flat /= dim;
                }
                idx
            }

            pub fn from_fn(dim: usize, mut f: impl FnMut([usize; $rank]) -> S) -> Self {
                let n = dim.pow($rank);
                let data = (0..n).map(|flat| f(Self::unflatten(dim, flat))).collect();
                $name { dim, data }
            }

            /// Same as [`Self::from_fn`], evaluating components on the rayon pool.
            pub fn from_fn_par(dim: usize, f: impl Fn([usize; $rank]) -> S + Sync) -> Self
            where
                S: Send,
            {
                let n = dim.pow($rank);
                let data = (0..n).into_par_iter().map(|flat| f(Self::unflatten(dim, flat))).collect();
                $name { dim, data }
            }

            /// Components paired with their indices, in row-major order.
            pub fn indexed(&self) -> impl Iterator<Item = ([usize; $rank], &S)> {
                let dim = self.dim;
                self.data.iter().enumerate().map(move |(flat, s)| (Self::unflatten(dim, flat), s))
            }

            pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> $name<T> {
                $name { dim: self.dim, data: self.data.iter().map(f).collect() }
            }

            pub fn try_map<T, E>(&self, f: impl FnMut(&S) -> Result<T, E>) -> Result<$name<T>, E> {
                Ok($name { dim: self.dim, data: self.data.iter().map(f).collect::<Result<_, E>>()? })
            }
        }

        impl<S: Scalar> $name<S> {
            pub fn plus(&self, rhs: &Self) -> Self {
                assert_eq!(self.dim, rhs.dim);
                $name { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.plus(b)).collect() }
            }

            pub fn minus(&self, rhs: &Self) -> Self {
                assert_eq!(self.dim, rhs.dim);
                $name { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.minus(b)).collect() }
            }

            pub fn scaled(&self, c: &Rational) -> Self {
                self.map(|s| s.scaled(c))
            }

            pub fn is_zero(&self) -> bool {
                self.data.iter().all(Scalar::is_zero_value)
            }
        }

        impl<S> Index<[usize; $rank]> for $name<S> {
            type Output = S;
            fn index(&self, idx: [usize; $rank]) -> &S {
                &self.data[self.offset(idx)]
            }
        }

        impl<S: fmt::Debug> fmt::Debug for $name<S> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_struct(stringify!($name)).field("dim", &self.dim).field("data", &self.data).finish()
            }
        }
    };
}

dense_tensor!(Tensor2, 2, "Rank-2 tensor `T[i][j]`, e.g. a bilinear form.");
dense_tensor!(Tensor3, 3, "Rank-3 tensor `T[i][j][k]`, e.g. Christoffel symbols `Γ_{ij}^k`.");
dense_tensor!(
    Tensor4,
    4,
    "Rank-4 tensor `T[i][j][k][l]`; for (3,1) curvature tensors the contravariant slot is last."
);

impl Tensor2<Rational> {
    pub fn zeros(dim: usize) -> Self {
        Tensor2::from_fn(dim, |_| Rational::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Tensor2::from_fn(dim, |[i, j]| if i == j { Rational::from_integer(1.into()) } else { Rational::zero() })
    }
}

impl Tensor4<Rational> {
    pub fn zeros(dim: usize) -> Self {
        Tensor4::from_fn(dim, |_| Rational::zero())
    }
}

impl<S: Scalar> Tensor2<S> {
    pub fn transpose(&self) -> Self {
        Tensor2::from_fn(self.dim, |[i, j]| self[[j, i]].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.indexed().all(|([i, j], v)| i >= j || *v == self[[j, i]])
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.indexed().all(|([i, j], v)| v.plus(&self[[j, i]]).is_zero_value())
    }

    /// Matrix product `Σ_b self[a][b] rhs[b][c]`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        Tensor2::from_fn(self.dim, |[a, c]| sum((0..self.dim).map(|b| self[[a, b]].times(&rhs[[b, c]]))))
    }
}

impl<S: Scalar> Tensor3<S> {
    /// True when `T[i][j][k] = T[j][i][k]` for all indices.
    pub fn is_symmetric_lower(&self) -> bool {
        self.indexed().all(|([i, j, k], v)| i >= j || *v == self[[j, i, k]])
    }
}

impl<S: Scalar> Tensor4<S> {
    /// First index at which antisymmetry in slots (1,2) fails.
    pub fn antisymmetry_defect(&self) -> Option<[usize; 4]> {
        self.indexed()
            .find(|([i, j, k, l], v)| !v.plus(&self[[*j, *i, *k, *l]]).is_zero_value())
            .map(|(idx, _)| idx)
    }

    /// Cyclic sum `T_{ijk}^l + T_{jki}^l + T_{kij}^l`.
    pub fn cyclic_sum(&self) -> Self {
        Tensor4::from_fn(self.dim, |[i, j, k, l]| {
            self[[i, j, k, l]].plus(&self[[j, k, i, l]]).plus(&self[[k, i, j, l]])
        })
    }

    /// First index at which the cyclic identity fails.
    pub fn cyclic_defect(&self) -> Option<[usize; 4]> {
        self.cyclic_sum().indexed().find(|(_, v)| !v.is_zero_value()).map(|(idx, _)| idx)
    }

    /// True when both curvature symmetries hold: antisymmetry in the first
    /// pair and the cyclic identity.
    pub fn has_curvature_symmetries(&self) -> bool {
        self.antisymmetry_defect().is_none() && self.cyclic_defect().is_none()
    }

    /// Ricci contraction `ρ_{jk} = Σ_i T_{ijk}^i`.
    pub fn ricci(&self) -> Tensor2<S> {
        Tensor2::from_fn(self.dim, |[j, k]| sum((0..self.dim).map(|i| self[[i, j, k, i]].clone())))
    }
}

/// Splits a form into `(antisymmetric, symmetric)` parts.
pub fn split_form<S: Scalar>(psi: &Tensor2<S>) -> (Tensor2<S>, Tensor2<S>) {
    let half = Rational::new(1.into(), 2.into());
    let t = psi.transpose();
    (psi.minus(&t).scaled(&half), psi.plus(&t).scaled(&half))
}

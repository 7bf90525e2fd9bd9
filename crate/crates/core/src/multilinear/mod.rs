//! Dense `m`-linear forms on `𝕂^n`, their coefficient mixed norms, and
//! operator-norm computation over `ℓ_p` unit balls.

mod io;
mod norm;
mod scalar;

pub use io::{peek_field, read_form, write_form, FORM_MAGIC};
pub use norm::{
    ascent_from, hl_ratio, operator_norm_ascent, operator_norm_exact_small, ratio_with_exponent,
    sign_enumeration_feasible, AscentOutcome, AscentRun, NormOptions, NormOracle, NormValue, RatioResult, DEFAULT_SEED,
    GRID_BUDGET, SIGN_ENUMERATION_MAX_BITS,
};
pub use scalar::{RealScalar, Scalar};

use num_traits::{Float, One};

use crate::error::{Error, Result};

/// Largest number of stored coefficients accepted (`n^m ≤ 10^7`).
pub const MAX_COEFFICIENTS: usize = 10_000_000;

/// An `m`-linear form `T : 𝕂^n × ⋯ × 𝕂^n → 𝕂`, stored as the dense
/// tensor of values `T(e_{j_1}, …, e_{j_m})` in row-major order of
/// `(j_1, …, j_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearForm<K> {
    order: usize,
    dim: usize,
    coeffs: Vec<K>,
}

/// `n^m`, or `None` on overflow or above [`MAX_COEFFICIENTS`].
pub fn coefficient_count(order: usize, dim: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..order {
        total = total.checked_mul(dim)?;
        if total > MAX_COEFFICIENTS {
            return None;
        }
    }
    Some(total)
}

impl<K: Scalar> MultilinearForm<K> {
    pub fn new(order: usize, dim: usize, coeffs: Vec<K>) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::domain(format!(
                "form needs m ≥ 1 and n ≥ 1, got m = {order}, n = {dim}"
            )));
        }
        let expected = coefficient_count(order, dim)
            .ok_or_else(|| Error::SizeGuard(format!("n^m = {dim}^{order} exceeds {MAX_COEFFICIENTS} coefficients")))?;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: coeffs.len(),
            });
        }
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::domain(format!("coefficient {pos} is not finite")));
        }
        Ok(Self { order, dim, coeffs })
    }

    /// Builds a form from a function of the multi-index `(j_1, …, j_m)`.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> K) -> Result<Self> {
        let count = coefficient_count(order.max(1), dim.max(1))
            .ok_or_else(|| Error::SizeGuard(format!("n^m = {dim}^{order} exceeds {MAX_COEFFICIENTS} coefficients")))?;
        let mut index = vec![0; order];
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            coeffs.push(f(&index));
            increment(&mut index, dim);
        }
        Self::new(order, dim, coeffs)
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        Self::from_fn(order, dim, |_| K::zero())
    }

    /// The `n`-dimensional diagonal form `Σ_j x_1[j] ⋯ x_m[j]`.
    pub fn diagonal(order: usize, dim: usize) -> Result<Self> {
        Self::from_fn(order, dim, |idx| {
            if idx.iter().all(|&j| j == idx[0]) {
                K::one()
            } else {
                K::zero()
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &[K] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<K> {
        self.coeffs
    }

    pub fn coefficient(&self, index: &[usize]) -> Result<K> {
        if index.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                actual: index.len(),
            });
        }
        let mut linear = 0;
        for &j in index {
            if j >= self.dim {
                return Err(Error::domain(format!("index {j} out of range for n = {}", self.dim)));
            }
            linear = linear * self.dim + j;
        }
        Ok(self.coeffs[linear])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scaled(&self, c: K) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    /// The form `(x_1, …, x_m) ↦ T(x_{σ⁻¹(1)}, …)` whose slot `k` is slot
    /// `perm[k]` of `self`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.order];
        if perm.len() != self.order
            || perm
                .iter()
                .any(|&s| s >= self.order || std::mem::replace(&mut seen[s], true))
        {
            return Err(Error::domain(format!(
                "{perm:?} is not a permutation of 0..{}",
                self.order
            )));
        }
        let mut source = vec![0; self.order];
        Self::from_fn(self.order, self.dim, |idx| {
            for (k, &s) in perm.iter().enumerate() {
                source[s] = idx[k];
            }
            self.coefficient(&source).expect("permuted index is in range")
        })
    }

    fn check_vectors<V: AsRef<[K]>>(&self, xs: &[V]) -> Result<()> {
        if xs.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                actual: xs.len(),
            });
        }
        for x in xs {
            if x.as_ref().len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: x.as_ref().len(),
                });
            }
        }
        Ok(())
    }

    /// `T(x_1, …, x_m) = Σ coeff(j_1…j_m) x_1[j_1] ⋯ x_m[j_m]`.
    pub fn evaluate<V: AsRef<[K]>>(&self, xs: &[V]) -> Result<K> {
        self.check_vectors(xs)?;
        Ok(self.contract(None, xs)[0])
    }

    /// Coefficients of the linear functional left in slot `slot` after
    /// fixing every other slot: `g_j = T(x_1, …, e_j, …, x_m)`. The vector
    /// passed for `slot` itself is ignored.
    pub fn partial<V: AsRef<[K]>>(&self, slot: usize, xs: &[V]) -> Result<Vec<K>> {
        if slot >= self.order {
            return Err(Error::SlotOutOfRange {
                index: slot,
                order: self.order,
            });
        }
        self.check_vectors(xs)?;
        Ok(self.contract(Some(slot), xs))
    }

    /// Contracts every slot except `keep`: trailing slots first (each a
    /// contiguous inner product), then leading ones.
    pub(crate) fn contract<V: AsRef<[K]>>(&self, keep: Option<usize>, xs: &[V]) -> Vec<K> {
        let n = self.dim;
        let (lead_end, trail_start) = match keep {
            Some(k) => (k, k + 1),
            None => (0, 0),
        };

        let mut buf: Option<Vec<K>> = None;
        for slot in (trail_start..self.order).rev() {
            let x = xs[slot].as_ref();
            let src = buf.as_deref().unwrap_or(&self.coeffs);
            let next = src
                .chunks_exact(n)
                .map(|row| row.iter().zip(x).fold(K::zero(), |acc, (&a, &b)| acc + a * b))
                .collect();
            buf = Some(next);
        }
        for x in xs.iter().take(lead_end) {
            let x = x.as_ref();
            let src = buf.as_deref().unwrap_or(&self.coeffs);
            let rest = src.len() / n;
            let mut next = vec![K::zero(); rest];
            for (block, &xj) in src.chunks_exact(rest).zip(x) {
                for (acc, &a) in next.iter_mut().zip(block) {
                    *acc = *acc + a * xj;
                }
            }
            buf = Some(next);
        }
        buf.unwrap_or_else(|| self.coeffs.clone())
    }

    /// `(Σ |coeff|^ρ)^{1/ρ}` over all `n^m` coefficients, for `ρ ≥ 1`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn mixed_norm(&self, rho: K::Real) -> Result<K::Real> {
        if !(rho >= K::Real::one()) {
            return Err(Error::domain(format!("mixed norm exponent must be ≥ 1, got {rho}")));
        }
        Ok(lp_norm(self.coeffs.iter().map(|c| c.modulus()), rho))
    }

    /// Outer `ℓ_outer` norm over the index of slot `slot` of the inner
    /// `ℓ_inner` norms taken over all remaining indices.
    pub fn anisotropic_mixed_norm(&self, slot: usize, outer: K::Real, inner: K::Real) -> Result<K::Real> {
        if slot >= self.order {
            return Err(Error::SlotOutOfRange {
                index: slot,
                order: self.order,
            });
        }
        let one = K::Real::one();
        if !(outer >= one && inner >= one) {
            return Err(Error::domain(format!(
                "norm exponents must be ≥ 1, got outer = {outer}, inner = {inner}"
            )));
        }
        let n = self.dim;
        let stride = n.pow((self.order - 1 - slot) as u32);
        let fibres: Vec<K::Real> = (0..n)
            .map(|j| {
                let entries = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| (idx / stride) % n == j)
                    .map(|(_, c)| c.modulus());
                lp_norm(entries, inner)
            })
            .collect();
        Ok(lp_norm(fibres.into_iter(), outer))
    }
}

fn increment(index: &mut [usize], dim: usize) {
    for slot in index.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

/// `ℓ_q` norm of nonnegative values with max-scaling; `q = ∞` gives the max.
pub(crate) fn lp_norm<F: Float>(values: impl Iterator<Item = F> + Clone, q: F) -> F {
    let max = values.clone().fold(F::zero(), F::max);
    if max.is_zero() || q.is_infinite() {
        return max;
    }
    let sum = values.fold(F::zero(), |acc, v| acc + (v / max).powf(q));
    max * sum.powf(q.recip())
}

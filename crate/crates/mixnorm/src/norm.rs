//! Mixed (anisotropic) Lebesgue-Riesz norms on product spaces.
//!
//! For f on X_1 x ... x X_l and exponents p = (p_1, ..., p_l) the mixed norm
//! is the iterated norm taken innermost axis first:
//!
//!   ||f||_p = ( int_{X_l} ... ( int_{X_1} |f|^{p_1} dmu_1 )^{p_2/p_1} ... )^{1/p_l}
//!
//! discretized with weighted sums. With all exponents equal this is the flat
//! L_p norm of the product measure; on outer products it factors into per-axis
//! norms. Reducing in a different axis order generally changes the value; the
//! permutation inequality bounds one order by another when the outer exponent
//! dominates every inner one.

use crate::error::{Error, Result};
use crate::reduce::weighted_power_sum;
use crate::space::{validate_exponent, ExponentVector, GridFunction, ProductSpace};
use ndarray::Axis as NdAxis;

/// Reduces one axis of `f` with the exponent `p`, using that axis's weights.
///
/// The result lives on the product of the remaining axes; reducing the only
/// axis yields a zero-axis grid function holding a scalar.
pub fn axis_norm(f: &GridFunction, axis_index: usize, p: f64) -> Result<GridFunction> {
    validate_exponent(p)?;
    let space = f.space();
    if axis_index >= space.axis_count() {
        return Err(Error::AxisIndexOutOfRange {
            index: axis_index,
            axes: space.axis_count(),
        });
    }
    let weights = space.axes()[axis_index].weights().to_vec();
    let mut lane_buf = Vec::with_capacity(weights.len());
    let reduced = f.values().map_axis(NdAxis(axis_index), |lane| {
        lane_buf.clear();
        lane_buf.extend(lane.iter().copied());
        weighted_power_sum(&lane_buf, &weights, p)
    });
    let out_space = if space.axis_count() == 1 {
        ProductSpace::empty()
    } else {
        space.without_axis(axis_index)
    };
    Ok(GridFunction::from_parts(out_space, reduced))
}

/// Mixed norm of `f` under `p`, innermost axis (index 0) first.
pub fn mixed_norm(f: &GridFunction, p: &ExponentVector) -> Result<f64> {
    let l = f.space().axis_count();
    if p.len() != l {
        return Err(Error::ExponentCountMismatch {
            expected: l,
            got: p.len(),
        });
    }
    let order: Vec<(usize, f64)> = p.exponents().iter().copied().enumerate().collect();
    reduce_in_order(f, &order)
}

/// A reduction order: the sequence of original axis indices, innermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct NormOrder {
    order: Vec<usize>,
}

impl NormOrder {
    /// Validates that `order` is a permutation of 0..order.len().
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(Error::InvalidOrder { order, axes: n });
            }
            seen[i] = true;
        }
        Ok(Self { order })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            order: (0..len).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.order
    }
}

/// Mixed norm with the axes reduced in the given order.
///
/// Each axis keeps its own exponent: axis k is always reduced with p_k, the
/// order only changes the nesting of the iterated norm.
pub fn mixed_norm_ordered(f: &GridFunction, p: &ExponentVector, order: &NormOrder) -> Result<f64> {
    let l = f.space().axis_count();
    if p.len() != l {
        return Err(Error::ExponentCountMismatch {
            expected: l,
            got: p.len(),
        });
    }
    if order.indices().len() != l {
        return Err(Error::InvalidOrder {
            order: order.indices().to_vec(),
            axes: l,
        });
    }
    let seq: Vec<(usize, f64)> = order
        .indices()
        .iter()
        .map(|&k| (k, p.exponents()[k]))
        .collect();
    reduce_in_order(f, &seq)
}

/// Norm of an outer product computed factor by factor:
/// ||g_1 (x) ... (x) g_l||_p = prod_k ||g_k||_{p_k}.
pub fn factorable_norm(space: &ProductSpace, factors: &[Vec<f64>], p: &ExponentVector) -> Result<f64> {
    let l = space.axis_count();
    if factors.len() != l || p.len() != l {
        return Err(Error::ExponentCountMismatch {
            expected: l,
            got: if factors.len() != l { factors.len() } else { p.len() },
        });
    }
    let mut prod = 1.0;
    for (k, factor) in factors.iter().enumerate() {
        let axis = &space.axes()[k];
        if factor.len() != axis.len() {
            return Err(Error::FactorLengthMismatch {
                axis: k,
                expected: axis.len(),
                got: factor.len(),
            });
        }
        prod *= weighted_power_sum(factor, axis.weights(), p.exponents()[k]);
    }
    Ok(prod)
}

/// Both sides of the permutation inequality for a function on X (x) Z.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PermutationGap {
    /// X-axes reduced first (with p), then Z-axes (each with r).
    pub lhs: f64,
    /// Z-axes reduced first, then X-axes.
    pub rhs: f64,
    /// Whether r >= max_k p_k, the hypothesis under which lhs <= rhs holds.
    pub hypothesis_met: bool,
}

/// Evaluates ||phi||_{p,X; r,Z} and ||phi||_{r,Z; p,X}.
///
/// `x_axes` and `z_axes` must partition the axes of `phi`; `p` lists one
/// exponent per X-axis and every Z-axis is reduced with the scalar `r`.
/// When r < max p the inequality is not asserted; both values are still
/// computed and the flag is lowered.
pub fn permutation_gap(
    phi: &GridFunction,
    x_axes: &[usize],
    z_axes: &[usize],
    p: &ExponentVector,
    r: f64,
) -> Result<PermutationGap> {
    validate_exponent(r)?;
    let l = phi.space().axis_count();
    let mut seen = vec![false; l];
    for &i in x_axes.iter().chain(z_axes) {
        if i >= l || seen[i] {
            return Err(Error::InvalidPartition {
                x_axes: x_axes.to_vec(),
                z_axes: z_axes.to_vec(),
                axes: l,
            });
        }
        seen[i] = true;
    }
    if x_axes.is_empty() || z_axes.is_empty() || !seen.iter().all(|&s| s) {
        return Err(Error::InvalidPartition {
            x_axes: x_axes.to_vec(),
            z_axes: z_axes.to_vec(),
            axes: l,
        });
    }
    if p.len() != x_axes.len() {
        return Err(Error::ExponentCountMismatch {
            expected: x_axes.len(),
            got: p.len(),
        });
    }

    let x_seq: Vec<(usize, f64)> = x_axes
        .iter()
        .zip(p.exponents())
        .map(|(&k, &pk)| (k, pk))
        .collect();
    let z_seq: Vec<(usize, f64)> = z_axes.iter().map(|&k| (k, r)).collect();

    let mut inner_first = x_seq.clone();
    inner_first.extend(z_seq.iter().copied());
    let lhs = reduce_in_order(phi, &inner_first)?;

    let mut outer_first = z_seq;
    outer_first.extend(x_seq);
    let rhs = reduce_in_order(phi, &outer_first)?;

    Ok(PermutationGap {
        lhs,
        rhs,
        hypothesis_met: r >= p.max_exponent(),
    })
}

/// Reduces the axes of `f` in the given (original index, exponent) sequence.
fn reduce_in_order(f: &GridFunction, seq: &[(usize, f64)]) -> Result<f64> {
    debug_assert_eq!(seq.len(), f.space().axis_count());
    let mut remaining: Vec<usize> = (0..f.space().axis_count()).collect();
    let mut current = f.clone();
    for &(orig, p) in seq {
        let pos = remaining
            .iter()
            .position(|&k| k == orig)
            .expect("sequence validated as a permutation");
        current = axis_norm(&current, pos, p)?;
        remaining.remove(pos);
    }
    Ok(current.scalar().expect("all axes reduced"))
}

//! Discretized product measure spaces.
//!
//! An [`Axis`] is a finite measure space: labelled points x_i with nonnegative
//! weights w_i and positive total mass. A [`ProductSpace`] is an ordered list
//! of axes carrying the product measure, and a [`GridFunction`] is a dense
//! real tensor over such a space. Point coordinates are metadata only; all
//! arithmetic uses the weights.
//!
//! [`ExponentVector`] holds one Lebesgue exponent per axis, innermost first,
//! each inside [1, 512] (the engine cap).

use crate::error::{Error, Result, MAX_AXES, MAX_EXPONENT};
use ndarray::{ArrayD, IxDyn};

/// One discretized measure axis: points with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    name: String,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total mass of the axis measure.
    pub fn total_mass(&self) -> f64 {
        crate::reduce::pairwise_sum(&self.weights)
    }
}

/// Builds an axis after validating points, weights and mass.
pub fn make_axis(name: &str, points: &[f64], weights: &[f64]) -> Result<Axis> {
    if points.len() != weights.len() {
        return Err(Error::AxisLengthMismatch {
            name: name.to_string(),
            points: points.len(),
            weights: weights.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyAxis {
            name: name.to_string(),
        });
    }
    for (i, &p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::BadPoint {
                name: name.to_string(),
                index: i,
            });
        }
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::BadWeight {
                name: name.to_string(),
                index: i,
                value: w,
            });
        }
    }
    let axis = Axis {
        name: name.to_string(),
        points: points.to_vec(),
        weights: weights.to_vec(),
    };
    let mass = axis.total_mass();
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass {
            name: name.to_string(),
            mass,
        });
    }
    Ok(axis)
}

/// Uniform axis: n midpoints of [0, 1], each carrying total_mass / n.
pub fn uniform_axis(name: &str, n: usize, total_mass: f64) -> Result<Axis> {
    if n == 0 {
        return Err(Error::EmptyAxis {
            name: name.to_string(),
        });
    }
    if !total_mass.is_finite() || total_mass <= 0.0 {
        return Err(Error::NonPositiveMass {
            name: name.to_string(),
            mass: total_mass,
        });
    }
    let points: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let weights = vec![total_mass / n as f64; n];
    make_axis(name, &points, &weights)
}

/// Ordered product of up to eight axes with distinct names.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    axes: Vec<Axis>,
}

impl ProductSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_AXES {
            return Err(Error::AxisCountOutOfRange { got: axes.len() });
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name() == a.name()) {
                return Err(Error::DuplicateAxisName {
                    name: a.name().to_string(),
                });
            }
        }
        Ok(Self { axes })
    }

    /// The empty product; appears only as the result of reducing every axis.
    pub(crate) fn empty() -> Self {
        Self { axes: Vec::new() }
    }

    /// Product of the two spaces, output axes first.
    ///
    /// Used to lay out operator kernels over X (x) Y.
    pub fn concat(&self, other: &ProductSpace) -> Result<Self> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        Self::new(axes)
    }

    pub fn axis_count(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, index: usize) -> Result<&Axis> {
        self.axes.get(index).ok_or(Error::AxisIndexOutOfRange {
            index,
            axes: self.axes.len(),
        })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Space left after deleting one axis.
    pub(crate) fn without_axis(&self, index: usize) -> Self {
        let mut axes = self.axes.clone();
        axes.remove(index);
        Self { axes }
    }

    /// Product weight of one cell, by multi-index.
    pub fn cell_weight(&self, index: &[usize]) -> f64 {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weights()[i])
            .product()
    }
}

/// Dense real-valued function on the cells of a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    space: ProductSpace,
    values: ArrayD<f64>,
}

impl GridFunction {
    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    /// Row-major (C order) copy of the values.
    pub fn values_flat(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }

    /// The value of a fully reduced (zero-axis) grid function.
    pub fn scalar(&self) -> Option<f64> {
        if self.space.axis_count() == 0 {
            self.values.iter().next().copied()
        } else {
            None
        }
    }

    pub(crate) fn from_parts(space: ProductSpace, values: ArrayD<f64>) -> Self {
        debug_assert_eq!(values.shape(), space.shape().as_slice());
        Self { space, values }
    }
}

/// Wraps a dense tensor as a grid function after shape/finiteness checks.
pub fn grid_function(space: &ProductSpace, values: ArrayD<f64>) -> Result<GridFunction> {
    if values.shape() != space.shape().as_slice() {
        return Err(Error::ShapeMismatch {
            expected: space.shape(),
            got: values.shape().to_vec(),
        });
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { index: i });
        }
    }
    Ok(GridFunction {
        space: space.clone(),
        values,
    })
}

/// Grid function from a row-major value list.
pub fn grid_function_from_vec(space: &ProductSpace, values: Vec<f64>) -> Result<GridFunction> {
    let shape = space.shape();
    let expected: usize = shape.iter().product();
    if values.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: shape,
            got: vec![values.len()],
        });
    }
    let arr = ArrayD::from_shape_vec(IxDyn(&shape), values).expect("shape checked above");
    grid_function(space, arr)
}

/// Constant grid function.
pub fn constant_grid(space: &ProductSpace, value: f64) -> Result<GridFunction> {
    grid_function(space, ArrayD::from_elem(IxDyn(&space.shape()), value))
}

/// Outer product of one factor per axis: f(i_1, ..., i_l) = prod_k g_k(i_k).
pub fn outer_product_grid(space: &ProductSpace, factors: &[Vec<f64>]) -> Result<GridFunction> {
    if factors.len() != space.axis_count() {
        return Err(Error::ExponentCountMismatch {
            expected: space.axis_count(),
            got: factors.len(),
        });
    }
    for (k, f) in factors.iter().enumerate() {
        let expected = space.axes()[k].len();
        if f.len() != expected {
            return Err(Error::FactorLengthMismatch {
                axis: k,
                expected,
                got: f.len(),
            });
        }
    }
    let shape = space.shape();
    let mut arr = ArrayD::from_elem(IxDyn(&shape), 1.0);
    for (idx, v) in arr.indexed_iter_mut() {
        for k in 0..factors.len() {
            *v *= factors[k][idx[k]];
        }
    }
    grid_function(space, arr)
}

/// One Lebesgue exponent per axis, innermost first, each in [1, 512].
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector {
    exponents: Vec<f64>,
}

impl ExponentVector {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::ExponentCountMismatch {
                expected: 1,
                got: 0,
            });
        }
        for &p in &exponents {
            validate_exponent(p)?;
        }
        Ok(Self { exponents })
    }

    /// All entries equal to p.
    pub fn flat(len: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; len])
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Largest entry; the permutation hypothesis threshold.
    pub fn max_exponent(&self) -> f64 {
        self.exponents.iter().fold(1.0_f64, |a, &p| a.max(p))
    }
}

/// Checks a single exponent against the engine range [1, 512].
pub fn validate_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 || p > MAX_EXPONENT {
        return Err(Error::ExponentOutOfRange { value: p });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_axis_has_unit_mass_and_equal_weights() {
        let a = uniform_axis("x", 4, 1.0).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
        assert!((a.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn make_axis_rejects_mismatched_lengths() {
        let err = make_axis("x", &[0.0, 1.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::AxisLengthMismatch { .. }));
    }

    #[test]
    fn make_axis_rejects_negative_weight() {
        let err = make_axis("x", &[0.0, 1.0], &[1.0, -0.5]).unwrap_err();
        assert!(matches!(err, Error::BadWeight { index: 1, .. }));
    }

    #[test]
    fn make_axis_rejects_zero_mass() {
        let err = make_axis("x", &[0.0, 1.0], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveMass { .. }));
    }

    #[test]
    fn make_axis_rejects_empty_and_nonfinite() {
        assert!(matches!(
            make_axis("x", &[], &[]).unwrap_err(),
            Error::EmptyAxis { .. }
        ));
        assert!(matches!(
            make_axis("x", &[f64::NAN], &[1.0]).unwrap_err(),
            Error::BadPoint { .. }
        ));
        assert!(matches!(
            uniform_axis("x", 0, 1.0).unwrap_err(),
            Error::EmptyAxis { .. }
        ));
        assert!(matches!(
            uniform_axis("x", 3, 0.0).unwrap_err(),
            Error::NonPositiveMass { .. }
        ));
    }

    #[test]
    fn mass_is_additive_under_concatenation() {
        let a = make_axis("a", &[0.0, 1.0], &[0.25, 0.5]).unwrap();
        let b = make_axis("b", &[2.0], &[2.0]).unwrap();
        let mut points = a.points().to_vec();
        points.extend_from_slice(b.points());
        let mut weights = a.weights().to_vec();
        weights.extend_from_slice(b.weights());
        let joined = make_axis("ab", &points, &weights).unwrap();
        assert!((joined.total_mass() - (a.total_mass() + b.total_mass())).abs() < 1e-15);
    }

    #[test]
    fn product_space_rejects_duplicates_and_overflow() {
        let a = uniform_axis("x", 2, 1.0).unwrap();
        let err = ProductSpace::new(vec![a.clone(), a.clone()]).unwrap_err();
        assert!(matches!(err, Error::DuplicateAxisName { .. }));

        let many: Vec<Axis> = (0..9)
            .map(|i| uniform_axis(&format!("x{i}"), 2, 1.0).unwrap())
            .collect();
        assert!(matches!(
            ProductSpace::new(many).unwrap_err(),
            Error::AxisCountOutOfRange { got: 9 }
        ));
        assert!(matches!(
            ProductSpace::new(vec![]).unwrap_err(),
            Error::AxisCountOutOfRange { got: 0 }
        ));
    }

    #[test]
    fn grid_function_round_trips_values() {
        let s = ProductSpace::new(vec![
            uniform_axis("x", 2, 1.0).unwrap(),
            uniform_axis("y", 3, 1.0).unwrap(),
        ])
        .unwrap();
        let vals: Vec<f64> = (0..6).map(f64::from).collect();
        let f = grid_function_from_vec(&s, vals.clone()).unwrap();
        assert_eq!(f.values_flat(), vals);
    }

    #[test]
    fn grid_function_rejects_wrong_shape_and_nan() {
        let s = ProductSpace::new(vec![
            uniform_axis("x", 2, 1.0).unwrap(),
            uniform_axis("y", 3, 1.0).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            grid_function_from_vec(&s, vec![0.0; 5]).unwrap_err(),
            Error::ShapeMismatch { .. }
        ));
        let mut vals = vec![0.0; 6];
        vals[4] = f64::NAN;
        assert!(matches!(
            grid_function_from_vec(&s, vals).unwrap_err(),
            Error::NonFiniteValue { index: 4 }
        ));
    }

    #[test]
    fn outer_product_lays_out_factors_row_major() {
        let s = ProductSpace::new(vec![
            uniform_axis("x", 2, 1.0).unwrap(),
            uniform_axis("y", 2, 1.0).unwrap(),
        ])
        .unwrap();
        let f = outer_product_grid(&s, &[vec![1.0, 2.0], vec![10.0, 100.0]]).unwrap();
        assert_eq!(f.values_flat(), vec![10.0, 100.0, 20.0, 200.0]);
    }

    #[test]
    fn exponents_validate_range_and_cap() {
        assert!(ExponentVector::new(vec![1.0, 512.0]).is_ok());
        assert!(matches!(
            ExponentVector::new(vec![0.5]).unwrap_err(),
            Error::ExponentOutOfRange { .. }
        ));
        assert!(matches!(
            ExponentVector::new(vec![513.0]).unwrap_err(),
            Error::ExponentOutOfRange { .. }
        ));
        assert!(matches!(
            ExponentVector::new(vec![f64::INFINITY]).unwrap_err(),
            Error::ExponentOutOfRange { .. }
        ));
        assert_eq!(
            ExponentVector::new(vec![1.0, 3.0, 2.0]).unwrap().max_exponent(),
            3.0
        );
    }
}

//! Moment majorants, Grand Lebesgue norms and exponential tail bounds.
//!
//! The central object is psi[p](r) = || ||eta||_{r,Omega} ||_{p,X}: the mixed
//! p-norm over X of the per-point r-th moment norms of the field. For
//! r >= max_k p_k the permutation inequality gives the moment bound
//! (E |zeta|^r)^(1/r) <= psi[p](r) with zeta = ||eta||_{p,X}, and therefore
//! the Grand Lebesgue norm of zeta generated by psi[p] is at most one.
//!
//! Tail estimates follow by Tchebychev-Markov: P(zeta > u) <= inf_r
//! (psi(r)/u)^r = exp(-sup_r (r ln u - r ln psi(r))). [`young_fenchel`]
//! computes the conjugate sup_r (v r - r ln psi(r)) at a given level v;
//! [`tail_bound`] evaluates it at v = ln u, which is the exponent the Markov
//! chain produces. With psi(r) <= C r^(1/m) the resulting bound decays like
//! exp(-c u^m), the regime [`fit_power_tail`] recovers.
//!
//! Estimated tables share replica streams with the zeta samples they are
//! checked against, so every inequality here holds exactly on the empirical
//! measure, not merely up to Monte Carlo noise.

use crate::error::{Error, Result};
use crate::field::{empirical_moment, sample_field, FieldModel, SampleSet};
use crate::norm::mixed_norm;
use crate::reduce::{pairwise_sum_by, power_mean, weighted_power_sum};
use crate::space::{validate_exponent, ExponentVector, GridFunction, ProductSpace};
use crate::stats::{bootstrap_moment_se, statistical_tolerance, BOOTSTRAP_RESAMPLES};

/// Default number of grid points when a psi grid is generated from (a, b).
pub const DEFAULT_GRID_POINTS: usize = 64;

/// Relative margin keeping generated grids strictly inside (a, b].
const GRID_MARGIN: f64 = 1e-6;

/// A moment majorant tabulated on a finite r-grid inside (a, b].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PsiTable {
    r_grid: Vec<f64>,
    values: Vec<f64>,
    a: f64,
    b: f64,
}

impl PsiTable {
    /// Validates a < r_1 < ... < r_m <= min(b, 512) and positive values.
    pub fn new(r_grid: Vec<f64>, values: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if r_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if values.len() != r_grid.len() {
            return Err(Error::GridMismatch);
        }
        if !a.is_finite() || a < 1.0 || !(a < b) {
            return Err(Error::GridOutOfDomain {
                a,
                b,
                value: a,
            });
        }
        let cap = b.min(crate::error::MAX_EXPONENT);
        let mut prev = a;
        for &r in &r_grid {
            if !r.is_finite() || r <= prev || r > cap {
                return Err(Error::GridOutOfDomain { a, b, value: r });
            }
            prev = r;
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::BadPsiValue { index: i, value: v });
            }
        }
        Ok(Self {
            r_grid,
            values,
            a,
            b,
        })
    }

    /// Geometric grid over [a (1 + 1e-6), min(b, 512)].
    pub fn geometric_grid(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
        let lo = a * (1.0 + GRID_MARGIN);
        let hi = b.min(crate::error::MAX_EXPONENT);
        if !(lo < hi) || count < 2 {
            return Err(Error::GridOutOfDomain { a, b, value: lo });
        }
        let ratio = hi / lo;
        let mut grid: Vec<f64> = (0..count)
            .map(|i| lo * ratio.powf(i as f64 / (count - 1) as f64))
            .collect();
        grid[count - 1] = hi;
        Ok(grid)
    }

    /// Tabulates a closed-form psi on the default geometric grid of (a, b).
    pub fn from_closed_form(
        psi: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        count: usize,
    ) -> Result<Self> {
        let grid = Self::geometric_grid(a, b, count)?;
        let values: Vec<f64> = grid.iter().map(|&r| psi(r)).collect();
        Self::new(grid, values, a, b)
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    /// Index of `r` in the grid, within a 1e-9 relative tolerance.
    pub fn position_of(&self, r: f64) -> Option<usize> {
        self.r_grid
            .iter()
            .position(|&g| (g - r).abs() <= 1e-9 * g.abs().max(1.0))
    }
}

/// Estimates psi[p] on `r_grid` by Monte Carlo with n replicas.
///
/// Per-cell r-th moment norms are estimated from the same counter-based
/// replica streams that [`crate::field::sample_zeta`] uses with this seed, so
/// moment-bound checks against the estimate are exact on the empirical
/// measure. The table records a = max_k p_k (nudged below the first grid
/// point when they coincide) and b = the model's moment domain supremum.
pub fn psi_from_model(
    model: &FieldModel,
    p: &ExponentVector,
    r_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<PsiTable> {
    if n == 0 {
        return Err(Error::NoReplicas);
    }
    if p.len() != model.space().axis_count() {
        return Err(Error::ExponentCountMismatch {
            expected: model.space().axis_count(),
            got: p.len(),
        });
    }
    if r_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &r in r_grid {
        validate_exponent(r)?;
    }
    let b = model.moment_domain_sup();
    let r_max = r_grid[r_grid.len() - 1];
    if b.is_finite() && r_max >= b {
        return Err(Error::GridOutOfDomain {
            a: p.max_exponent(),
            b,
            value: r_max,
        });
    }
    if (n as f64) < 10.0 * r_max {
        log::warn!(
            "estimating moments of order {r_max} from only {n} replicas; \
             expect severe downward bias"
        );
    }

    let space = model.space().clone();
    let cells = space.cell_count();
    let per_cell = collect_cell_samples(n, cells, |i| sample_field(model, seed, i).values_flat());

    let p_bar = p.max_exponent();
    let a = if r_grid[0] > p_bar {
        p_bar
    } else {
        // r starts exactly at the admissibility threshold; keep a < r_1.
        r_grid[0] / (1.0 + GRID_MARGIN)
    };

    let mut values = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let moments: Vec<f64> = per_cell.iter().map(|s| power_mean(s, r)).collect();
        let grid = crate::space::grid_function_from_vec(&space, moments)?;
        values.push(mixed_norm(&grid, p)?);
    }
    PsiTable::new(r_grid.to_vec(), values, a, b)
}

/// Gathers per-cell sample vectors: result[cell][replica].
pub(crate) fn collect_cell_samples(
    n: u64,
    cells: usize,
    draw: impl Fn(u64) -> Vec<f64> + Sync,
) -> Vec<Vec<f64>> {
    let per_replica = crate::map_replicas(n, draw);
    let mut per_cell = vec![Vec::with_capacity(n as usize); cells];
    for row in &per_replica {
        debug_assert_eq!(row.len(), cells);
        for (c, &v) in row.iter().enumerate() {
            per_cell[c].push(v);
        }
    }
    per_cell
}

/// One row of a moment-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentBoundRow {
    pub r: f64,
    /// Empirical (E |zeta|^r)^(1/r).
    pub lhs: f64,
    /// psi[p](r) estimated from the same replica streams.
    pub rhs: f64,
    /// Relative tolerance used for the pass flag.
    pub tolerance: f64,
    pub pass: bool,
}

/// Moment-bound comparison across an r-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBoundReport {
    pub rows: Vec<MomentBoundRow>,
    pub psi: PsiTable,
    pub samples: SampleSet,
}

impl MomentBoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|row| row.pass)
    }

    /// Largest lhs/rhs ratio across the rows.
    pub fn worst_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.lhs / row.rhs)
            .fold(0.0, f64::max)
    }
}

/// Checks (E |zeta|^r)^(1/r) <= psi[p](r) on `r_grid`.
///
/// Every r must satisfy r >= max_k p_k; sampling for both sides shares the
/// same replica streams, so the inequality is exact up to rounding and the
/// statistical tolerance max(5%, 3 bootstrap se) only adds headroom.
pub fn moment_bound_check(
    model: &FieldModel,
    p: &ExponentVector,
    r_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<MomentBoundReport> {
    let p_bar = p.max_exponent();
    for &r in r_grid {
        if r < p_bar {
            return Err(Error::OrderBelowAdmissible {
                order: r,
                min: p_bar,
            });
        }
    }
    let psi = psi_from_model(model, p, r_grid, n, seed)?;
    let samples = crate::field::sample_zeta(model, p, n, seed)?;
    let mut rows = Vec::with_capacity(r_grid.len());
    for (i, &r) in r_grid.iter().enumerate() {
        let lhs = empirical_moment(&samples, r)?;
        let rhs = psi.values()[i];
        let se = bootstrap_moment_se(&samples, r, BOOTSTRAP_RESAMPLES)?;
        let tolerance = statistical_tolerance(rhs, se);
        rows.push(MomentBoundRow {
            r,
            lhs,
            rhs,
            tolerance,
            pass: lhs <= rhs * (1.0 + tolerance),
        });
    }
    Ok(MomentBoundReport { rows, psi, samples })
}

/// Single-axis moment bound, written out as the explicit weighted sum
/// {sum_x mu(x) [E|eta(x)|^r]^(p/r)}^(1/p).
///
/// Specialization of the moment bound to one axis; requires r >= p.
pub fn single_axis_moment_bound(
    model: &FieldModel,
    p: f64,
    r: f64,
    n: u64,
    seed: u64,
) -> Result<MomentBoundRow> {
    validate_exponent(p)?;
    validate_exponent(r)?;
    if model.space().axis_count() != 1 {
        return Err(Error::AxisCountOutOfRange {
            got: model.space().axis_count(),
        });
    }
    if r < p {
        return Err(Error::OrderBelowAdmissible { order: r, min: p });
    }
    if n == 0 {
        return Err(Error::NoReplicas);
    }
    let axis = model.space().axes()[0].clone();
    let cells = axis.len();
    let per_cell = collect_cell_samples(n, cells, |i| sample_field(model, seed, i).values_flat());
    // E|eta(x)|^r estimated per cell, raised to p/r, weighted and summed.
    let raw_moments: Vec<f64> = per_cell.iter().map(|s| power_mean(s, r)).collect();
    let rhs = weighted_power_sum(&raw_moments, axis.weights(), p);

    let p_vec = ExponentVector::new(vec![p])?;
    let samples = crate::field::sample_zeta(model, &p_vec, n, seed)?;
    let lhs = empirical_moment(&samples, r)?;
    let se = bootstrap_moment_se(&samples, r, BOOTSTRAP_RESAMPLES)?;
    let tolerance = statistical_tolerance(rhs, se);
    Ok(MomentBoundRow {
        r,
        lhs,
        rhs,
        tolerance,
        pass: lhs <= rhs * (1.0 + tolerance),
    })
}

/// Grand Lebesgue norm of a moment curve against psi: max_r moment(r)/psi(r).
///
/// The curves must live on the same grid.
pub fn gls_norm(moments: &[f64], psi: &PsiTable) -> Result<f64> {
    if moments.len() != psi.len() {
        return Err(Error::GridMismatch);
    }
    let mut worst = 0.0_f64;
    for (m, v) in moments.iter().zip(psi.values()) {
        worst = worst.max(m / v);
    }
    Ok(worst)
}

/// Grand Lebesgue norm of a sample set: empirical moments on psi's own grid.
pub fn gls_norm_of_samples(samples: &SampleSet, psi: &PsiTable) -> Result<f64> {
    let moments: Vec<f64> = psi
        .r_grid()
        .iter()
        .map(|&r| empirical_moment(samples, r))
        .collect::<Result<_>>()?;
    gls_norm(&moments, psi)
}

/// Conjugate value sup over the grid of r (v - ln psi(r)), ties toward the
/// smaller r. Returns (value, argmax index).
fn conjugate_on_grid(psi: &PsiTable, v: f64) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, (&r, &pv)) in psi.r_grid().iter().zip(psi.values()).enumerate() {
        let val = r * (v - pv.ln());
        if val > best {
            best = val;
            best_idx = i;
        }
    }
    (best, best_idx)
}

/// Regional Young-Fenchel transform on the table's grid:
/// g(u) = max_r (u r - r ln psi(r)).
pub fn young_fenchel(psi: &PsiTable, u: f64) -> f64 {
    conjugate_on_grid(psi, u).0
}

/// Young-Fenchel transform refined by golden-section search between the
/// neighbors of the best grid point; `psi_fn` is the closed form the table
/// was built from.
pub fn young_fenchel_refined(psi: &PsiTable, psi_fn: impl Fn(f64) -> f64, u: f64) -> f64 {
    let (grid_best, idx) = conjugate_on_grid(psi, u);
    let grid = psi.r_grid();
    let lo = if idx == 0 { grid[0] } else { grid[idx - 1] };
    let hi = if idx + 1 == grid.len() {
        grid[grid.len() - 1]
    } else {
        grid[idx + 1]
    };
    let objective = |r: f64| r * (u - psi_fn(r).ln());
    golden_section_max(objective, lo, hi).max(grid_best)
}

/// Golden-section maximization on [lo, hi]; exact enough for unimodal
/// (concave) objectives, falls back to the better endpoint otherwise.
fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    f(lo).max(f(hi)).max(fc).max(fd)
}

/// Exponential tail curve: g and exp(-g) over a u-grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TailCurve {
    u_grid: Vec<f64>,
    g_values: Vec<f64>,
    bound_values: Vec<f64>,
}

impl TailCurve {
    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    pub fn bound_values(&self) -> &[f64] {
        &self.bound_values
    }

    pub fn len(&self) -> usize {
        self.u_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_grid.is_empty()
    }

    /// Validates grid monotonicity, u >= 1, g >= 0 and bound = exp(-g).
    pub fn new(u_grid: Vec<f64>, g_values: Vec<f64>, bound_values: Vec<f64>) -> Result<Self> {
        if u_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if g_values.len() != u_grid.len() || bound_values.len() != u_grid.len() {
            return Err(Error::GridMismatch);
        }
        let mut prev = 0.999_999_999;
        for &u in &u_grid {
            if !u.is_finite() || u <= prev {
                return Err(Error::GridOutOfDomain {
                    a: 1.0,
                    b: f64::INFINITY,
                    value: u,
                });
            }
            prev = u;
        }
        for (i, (&g, &bd)) in g_values.iter().zip(&bound_values).enumerate() {
            if !g.is_finite() || g < 0.0 || bd != (-g).exp() {
                return Err(Error::BadPsiValue { index: i, value: bd });
            }
        }
        Ok(Self {
            u_grid,
            g_values,
            bound_values,
        })
    }
}

/// Tail bound P(zeta > u) <= exp(-g(ln u)) on a u-grid, u >= 1.
///
/// g is the Young-Fenchel conjugate of r ln psi(r) evaluated at ln u, the
/// exponent produced by optimizing the Tchebychev-Markov inequality
/// P(zeta > u) <= (psi(r)/u)^r over the grid. Values are clamped at g = 0
/// (bound 1), so bounds always lie in (0, 1].
pub fn tail_bound(psi: &PsiTable, u_grid: &[f64]) -> Result<TailCurve> {
    if u_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut g_values = Vec::with_capacity(u_grid.len());
    let mut bound_values = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        if !u.is_finite() || u < 1.0 {
            return Err(Error::GridOutOfDomain {
                a: 1.0,
                b: f64::INFINITY,
                value: u,
            });
        }
        let g = young_fenchel(psi, u.ln()).max(0.0);
        g_values.push(g);
        bound_values.push((-g).exp());
    }
    TailCurve::new(u_grid.to_vec(), g_values, bound_values)
}

/// How the fitted tail exponent behaves across the fitting window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    /// Stable slope: g(u) is power-like over the window.
    Power,
    /// Slope still rising: the window has not reached the asymptotic regime.
    SuperPower,
    /// Slope falling: g grows slower than any fixed power.
    SubPower,
}

/// Least-squares fit of ln g = ln c2 + m ln u.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerFit {
    pub m_hat: f64,
    pub c2: f64,
    pub growth: GrowthClass,
    /// Number of points in the fitted (largest-u) window.
    pub points_used: usize,
}

/// Fits exp(-c2 u^m) behavior to the largest-u half of a tail curve.
///
/// Only points with g > 0 participate; fewer than 10 such points is an
/// error. The growth class compares the slopes of the lower and upper halves
/// of the usable points.
pub fn fit_power_tail(curve: &TailCurve) -> Result<PowerFit> {
    const MIN_POINTS: usize = 10;
    let usable: Vec<(f64, f64)> = curve
        .u_grid()
        .iter()
        .zip(curve.g_values())
        .filter(|&(_, &g)| g > 0.0)
        .map(|(&u, &g)| (u.ln(), g.ln()))
        .collect();
    if usable.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: usable.len(),
            min: MIN_POINTS,
        });
    }
    let upper = &usable[usable.len() / 2..];
    let (m_hat, intercept) = least_squares(upper);
    let lower_half = &usable[..usable.len() / 2];
    let (m_lo, _) = least_squares(lower_half);
    let growth = if m_hat > m_lo * 1.15 + 0.05 {
        GrowthClass::SuperPower
    } else if m_hat < m_lo * 0.85 - 0.05 {
        GrowthClass::SubPower
    } else {
        GrowthClass::Power
    };
    Ok(PowerFit {
        m_hat,
        c2: intercept.exp(),
        growth,
        points_used: upper.len(),
    })
}

/// Plain least squares y = intercept + slope x; returns (slope, intercept).
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx = pairwise_sum_by(points.len(), |i| points[i].0) / n;
    let sy = pairwise_sum_by(points.len(), |i| points[i].1) / n;
    let sxx = pairwise_sum_by(points.len(), |i| {
        let d = points[i].0 - sx;
        d * d
    });
    let sxy = pairwise_sum_by(points.len(), |i| (points[i].0 - sx) * (points[i].1 - sy));
    let slope = sxy / sxx;
    (slope, sy - slope * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldModel, NoiseLaw};
    use crate::space::{grid_function_from_vec, uniform_axis};

    fn unit_space(ns: &[usize]) -> ProductSpace {
        ProductSpace::new(
            ns.iter()
                .enumerate()
                .map(|(i, &n)| uniform_axis(&format!("x{i}"), n, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn psi_table_validation() {
        assert!(matches!(
            PsiTable::new(vec![], vec![], 1.0, 10.0).unwrap_err(),
            Error::EmptyGrid
        ));
        assert!(PsiTable::new(vec![2.0, 1.5], vec![1.0, 1.0], 1.0, 10.0).is_err());
        assert!(PsiTable::new(vec![2.0, 11.0], vec![1.0, 1.0], 1.0, 10.0).is_err());
        assert!(PsiTable::new(vec![0.5], vec![1.0], 1.0, 10.0).is_err());
        assert!(matches!(
            PsiTable::new(vec![2.0], vec![-1.0], 1.0, 10.0).unwrap_err(),
            Error::BadPsiValue { .. }
        ));
        assert!(PsiTable::new(vec![2.0, 4.0], vec![1.0, 2.0], 1.0, 10.0).is_ok());
    }

    #[test]
    fn geometric_grid_spans_the_interval() {
        let g = PsiTable::geometric_grid(1.0, 10.0, 64).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g[0] - 1.000001).abs() < 1e-12);
        assert_eq!(g[63], 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // Unbounded b is capped at the engine limit.
        let g = PsiTable::geometric_grid(2.0, f64::INFINITY, 16).unwrap();
        assert_eq!(g[15], 512.0);
    }

    #[test]
    fn psi_of_deterministic_field_is_flat_in_r() {
        let s = unit_space(&[3, 2]);
        let f = grid_function_from_vec(&s, vec![1.0, -2.0, 0.5, 3.0, 1.5, 2.0]).unwrap();
        let p = ExponentVector::new(vec![1.0, 2.0]).unwrap();
        let c = mixed_norm(&f, &p).unwrap();
        let model = FieldModel::scaled(f, 1.0).unwrap();
        let psi = psi_from_model(&model, &p, &[2.0, 4.0, 8.0, 256.0], 10, 0).unwrap();
        for &v in psi.values() {
            assert!((v - c).abs() <= 1e-12 * c, "{v} vs {c}");
        }
    }

    #[test]
    fn psi_of_factorable_field_splits_into_scalar_moment_times_norm() {
        // tau * h: psi(r) = ||tau||_{r,emp} * ||h||_p. The scalar moments are
        // re-estimated here from the same streams, independently of the
        // mixed-norm machinery.
        let s = unit_space(&[4]);
        let h = grid_function_from_vec(&s, vec![0.5, 1.0, 2.0, 0.25]).unwrap();
        let p = ExponentVector::new(vec![2.0]).unwrap();
        let h_norm = mixed_norm(&h, &p).unwrap();
        let model = FieldModel::factorable(h.clone(), NoiseLaw::Gaussian).unwrap();
        let n = 5000u64;
        let seed = 17;
        let r_grid = [2.0, 4.0, 8.0];
        let psi = psi_from_model(&model, &p, &r_grid, n, seed).unwrap();

        let taus: Vec<f64> = (0..n)
            .map(|i| sample_field(&model, seed, i).values_flat()[1] / h.values_flat()[1])
            .collect();
        for (i, &r) in r_grid.iter().enumerate() {
            let tau_norm = power_mean(&taus, r);
            let expected = tau_norm * h_norm;
            assert!(
                (psi.values()[i] - expected).abs() <= 1e-10 * expected,
                "r = {r}: {} vs {expected}",
                psi.values()[i]
            );
        }
    }

    #[test]
    fn psi_slope_recovers_the_exponential_power_index() {
        // For the exponential power law, ln ||X||_r grows like (1/m) ln r.
        // The secant slope over r in [8, 40] sits within 10% of 1/m for
        // m = 2 and n = 1e5 (larger r would exceed what n replicas resolve:
        // the empirical r-norm saturates at the sample maximum).
        let s = unit_space(&[4]);
        let model = FieldModel::iid(s, NoiseLaw::ExponentialPower { m: 2.0 }).unwrap();
        let p = ExponentVector::new(vec![2.0]).unwrap();
        let r_grid: Vec<f64> = (0..12)
            .map(|i| 8.0 * (40.0_f64 / 8.0).powf(i as f64 / 11.0))
            .collect();
        let psi = psi_from_model(&model, &p, &r_grid, 100_000, 5).unwrap();
        let pts: Vec<(f64, f64)> = r_grid
            .iter()
            .zip(psi.values())
            .map(|(&r, &v)| (r.ln(), v.ln()))
            .collect();
        let (slope, _) = least_squares(&pts);
        assert!(
            (slope - 0.5).abs() <= 0.05,
            "slope {slope}, want 0.5 within 10%"
        );
    }

    #[test]
    fn psi_grid_must_stay_below_student_moment_domain() {
        let s = unit_space(&[2]);
        let model = FieldModel::iid(s, NoiseLaw::Student { nu: 6.0 }).unwrap();
        let p = ExponentVector::new(vec![2.0]).unwrap();
        assert!(matches!(
            psi_from_model(&model, &p, &[2.0, 6.0], 100, 0).unwrap_err(),
            Error::GridOutOfDomain { .. }
        ));
        let psi = psi_from_model(&model, &p, &[2.0, 4.0], 1000, 0).unwrap();
        assert_eq!(psi.b(), 6.0);
    }

    #[test]
    fn moment_bound_holds_exactly_with_shared_streams() {
        let s = unit_space(&[3, 3]);
        let model = FieldModel::iid(s, NoiseLaw::Gaussian).unwrap();
        let p = ExponentVector::new(vec![1.0, 2.0]).unwrap();
        let report = moment_bound_check(&model, &p, &[2.0, 4.0, 8.0], 20_000, 99).unwrap();
        assert!(report.all_pass());
        // Shared streams make the inequality deterministic, not statistical.
        for row in &report.rows {
            assert!(
                row.lhs <= row.rhs * (1.0 + 1e-12),
                "r = {}: {} > {}",
                row.r,
                row.lhs,
                row.rhs
            );
        }
    }

    #[test]
    fn moment_bound_is_equality_for_deterministic_fields() {
        let s = unit_space(&[2, 2]);
        let f = grid_function_from_vec(&s, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = ExponentVector::new(vec![1.0, 2.0]).unwrap();
        let model = FieldModel::scaled(f, 1.0).unwrap();
        let report = moment_bound_check(&model, &p, &[2.0, 4.0], 100, 1).unwrap();
        for row in &report.rows {
            assert!(
                (row.lhs - row.rhs).abs() <= 1e-10 * row.rhs,
                "r = {}: {} vs {}",
                row.r,
                row.lhs,
                row.rhs
            );
        }
    }

    #[test]
    fn moment_bound_is_equality_for_factorable_fields() {
        let s = unit_space(&[3]);
        let h = grid_function_from_vec(&s, vec![0.5, 1.5, 1.0]).unwrap();
        let model = FieldModel::factorable(h, NoiseLaw::ExponentialPower { m: 1.0 }).unwrap();
        let p = ExponentVector::new(vec![2.0]).unwrap();
        let report = moment_bound_check(&model, &p, &[2.0, 4.0, 8.0], 5000, 7).unwrap();
        for row in &report.rows {
            assert!(
                (row.lhs - row.rhs).abs() <= 1e-12 * row.rhs,
                "r = {}: {} vs {}",
                row.r,
                row.lhs,
                row.rhs
            );
        }
    }

    #[test]
    fn moment_bound_rejects_orders_below_p_bar() {
        let s = unit_space(&[2, 2]);
        let model = FieldModel::iid(s, NoiseLaw::Gaussian).unwrap();
        let p = ExponentVector::new(vec![1.0, 3.0]).unwrap();
        assert!(matches!(
            moment_bound_check(&model, &p, &[2.0, 4.0], 100, 0).unwrap_err(),
            Error::OrderBelowAdmissible { .. }
        ));
    }

    #[test]
    fn gls_norm_definition_and_mismatch() {
        let psi = PsiTable::new(vec![2.0, 4.0], vec![1.0, 2.0], 1.0, 10.0).unwrap();
        assert_eq!(gls_norm(&[0.5, 3.0], &psi).unwrap(), 1.5);
        assert_eq!(gls_norm(&[0.0, 0.0], &psi).unwrap(), 0.0);
        assert!(matches!(
            gls_norm(&[1.0], &psi).unwrap_err(),
            Error::GridMismatch
        ));
    }

    #[test]
    fn gls_norm_of_samples_against_own_psi_is_at_most_one() {
        let s = unit_space(&[3, 3]);
        let model = FieldModel::iid(s, NoiseLaw::ExponentialPower { m: 1.0 }).unwrap();
        let p = ExponentVector::new(vec![1.0, 2.0]).unwrap();
        let r_grid = PsiTable::geometric_grid(2.0, 32.0, 24).unwrap();
        let seed = 23;
        let n = 20_000;
        let psi = psi_from_model(&model, &p, &r_grid, n, seed).unwrap();
        let zeta = crate::field::sample_zeta(&model, &p, n, seed).unwrap();
        let ratio = gls_norm_of_samples(&zeta, &psi).unwrap();
        assert!(ratio <= 1.0 + 1e-12, "GLS ratio {ratio}");
        assert!(ratio > 0.5, "ratio suspiciously small: {ratio}");
    }

    #[test]
    fn young_fenchel_of_unit_psi_is_linear_with_boundary_argmax() {
        // psi = 1 on (1, 10]: g(u) = max_r r u = 10 u at the right endpoint.
        let psi = PsiTable::from_closed_form(|_| 1.0, 1.0, 10.0, 64).unwrap();
        for u in [0.5, 1.0, 2.0, 5.0] {
            assert!((young_fenchel(&psi, u) - 10.0 * u).abs() < 1e-12);
        }
    }

    #[test]
    fn young_fenchel_exponential_psi_matches_closed_form() {
        // psi(r) = e^r: objective r(u - r), maximum u^2/4 at r = u/2.
        let psi = PsiTable::from_closed_form(|r| r.exp(), 1.0, 512.0, 64).unwrap();
        let refined = young_fenchel_refined(&psi, |r| r.exp(), 6.0);
        assert!((refined - 9.0).abs() < 1e-9, "{refined}");
        // The coarse grid max is close but below; refinement recovers it.
        assert!(young_fenchel(&psi, 6.0) <= refined);
    }

    #[test]
    fn young_fenchel_identity_psi_matches_stationarity() {
        // psi(r) = r: maximum of r(u - ln r) at r = e^(u-1), value e^(u-1).
        let psi = PsiTable::from_closed_form(|r| r, 1.0, 512.0, 64).unwrap();
        let refined = young_fenchel_refined(&psi, |r| r, 3.0);
        let expected = std::f64::consts::E.powi(2);
        assert!(
            (refined - expected).abs() <= 1e-9 * expected,
            "{refined} vs {expected}"
        );
    }

    #[test]
    fn young_fenchel_breaks_ties_toward_smaller_r() {
        // Both grid points give the same objective value at u = 1.
        let u = 1.0_f64;
        let psi = PsiTable::new(
            vec![2.0, 4.0],
            vec![1.0, (u / 2.0).exp()],
            1.0,
            10.0,
        )
        .unwrap();
        let (val, idx) = conjugate_on_grid(&psi, u);
        assert!((val - 2.0 * u).abs() < 1e-12);
        assert_eq!(idx, 0);
    }

    #[test]
    fn young_fenchel_matches_dense_grid_oracle() {
        // Dense 1e5-point grid search is the oracle for the refined value.
        let forms: Vec<(fn(f64) -> f64, f64, f64)> = vec![
            (|_| 2.5, 1.0, 256.0),
            (|r| r.exp(), 1.0, 512.0),
            (|r| r, 1.0, 512.0),
            (|r| 2.0 * r.sqrt(), 1.0, 512.0),
        ];
        for (form, a, b) in forms {
            let psi = PsiTable::from_closed_form(form, a, b, DEFAULT_GRID_POINTS).unwrap();
            for u in [1.0, 2.0, 3.5, 6.0] {
                let refined = young_fenchel_refined(&psi, form, u);
                let lo = psi.r_grid()[0];
                let hi = psi.r_grid()[psi.len() - 1];
                let dense = (0..100_000)
                    .map(|i| {
                        let r = lo + (hi - lo) * i as f64 / 99_999.0;
                        r * (u - form(r).ln())
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let scale = dense.abs().max(1.0);
                assert!(
                    (refined - dense).abs() <= 1e-6 * scale,
                    "u = {u}: {refined} vs {dense}"
                );
            }
        }
    }

    #[test]
    fn young_fenchel_is_convex_and_monotone_in_u() {
        let psi = PsiTable::from_closed_form(|r| 1.5 * r.sqrt(), 1.0, 512.0, 64).unwrap();
        let us: Vec<f64> = (0..50).map(|i| 0.5 + i as f64 * 0.1).collect();
        let gs: Vec<f64> = us.iter().map(|&u| young_fenchel(&psi, u)).collect();
        for w in gs.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        for w in gs.windows(3) {
            // Discrete convexity: second differences nonnegative.
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9);
        }
    }

    #[test]
    fn tail_bound_of_deterministic_field_collapses_past_the_value() {
        // zeta = c almost surely: bound 1 below c, collapsing to 0 above it.
        let c = std::f64::consts::E;
        let psi = PsiTable::from_closed_form(|_| c, 1.0, 512.0, 64).unwrap();
        let u_grid = [1.0, 2.0, c * 0.999, c * 1.01, c * 1.5, 3.0 * c];
        let curve = tail_bound(&psi, &u_grid).unwrap();
        assert_eq!(curve.bound_values()[0], 1.0);
        assert_eq!(curve.bound_values()[2], 1.0);
        assert!(curve.bound_values()[3] < 1.0);
        assert!(curve.bound_values()[4] < 1e-8);
        assert!(curve.bound_values()[5] < 1e-80);
    }

    #[test]
    fn tail_bound_dominates_the_empirical_tail_exactly() {
        // psi estimated from the same streams as zeta: the Markov chain holds
        // on the empirical measure itself, so no statistical slack is needed.
        let s = unit_space(&[3, 3]);
        let model = FieldModel::iid(s, NoiseLaw::ExponentialPower { m: 1.0 }).unwrap();
        let p = ExponentVector::new(vec![1.0, 2.0]).unwrap();
        let r_grid = PsiTable::geometric_grid(2.0, 64.0, 32).unwrap();
        let seed = 3;
        let n = 20_000;
        let psi = psi_from_model(&model, &p, &r_grid, n, seed).unwrap();
        let zeta = crate::field::sample_zeta(&model, &p, n, seed).unwrap();
        let u_grid: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.25).collect();
        let curve = tail_bound(&psi, &u_grid).unwrap();
        for (i, &u) in u_grid.iter().enumerate() {
            let emp = crate::field::empirical_tail(&zeta, u);
            assert!(
                emp <= curve.bound_values()[i] * (1.0 + 1e-9) + 1e-15,
                "u = {u}: empirical {emp} above bound {}",
                curve.bound_values()[i]
            );
        }
    }

    #[test]
    fn tail_bound_validates_u_grid() {
        let psi = PsiTable::new(vec![2.0], vec![1.0], 1.0, 10.0).unwrap();
        assert!(matches!(
            tail_bound(&psi, &[]).unwrap_err(),
            Error::EmptyGrid
        ));
        assert!(tail_bound(&psi, &[0.5]).is_err());
        let curve = tail_bound(&psi, &[1.0, 2.0]).unwrap();
        for (g, bd) in curve.g_values().iter().zip(curve.bound_values()) {
            assert_eq!(*bd, (-g).exp());
            assert!(*bd > 0.0 && *bd <= 1.0);
        }
    }

    #[test]
    fn power_tail_fit_recovers_the_exponent_of_a_power_law_psi() {
        // psi = C r^(1/2): g(u) = u^2 / (2 e C^2) wherever the maximizer is
        // interior, so the fitted slope is 2.
        let c = 1.0;
        let psi =
            PsiTable::from_closed_form(move |r| c * r.sqrt(), 1.0, 512.0, 64).unwrap();
        let u_grid: Vec<f64> = (0..40)
            .map(|i| 2.0 * (20.0_f64 / 2.0).powf(i as f64 / 39.0))
            .collect();
        let curve = tail_bound(&psi, &u_grid).unwrap();
        let fit = fit_power_tail(&curve).unwrap();
        assert!((fit.m_hat - 2.0).abs() < 0.05, "m_hat = {}", fit.m_hat);
        assert_eq!(fit.growth, GrowthClass::Power);
        let c2 = 1.0 / (2.0 * std::f64::consts::E * c * c);
        assert!((fit.c2 - c2).abs() < 0.05 * c2, "c2 = {} vs {c2}", fit.c2);
    }

    #[test]
    fn power_tail_fit_of_identity_psi_is_linear() {
        // psi(r) = r: g(u) = u/e, a power law with exponent 1.
        let psi = PsiTable::from_closed_form(|r| r, 1.0, 512.0, 64).unwrap();
        let u_grid: Vec<f64> = (0..40)
            .map(|i| 4.0 * (400.0_f64 / 4.0).powf(i as f64 / 39.0))
            .collect();
        let curve = tail_bound(&psi, &u_grid).unwrap();
        let fit = fit_power_tail(&curve).unwrap();
        assert!((fit.m_hat - 1.0).abs() < 0.03, "m_hat = {}", fit.m_hat);
        assert_eq!(fit.growth, GrowthClass::Power);
        let expected_c2 = 1.0 / std::f64::consts::E;
        assert!((fit.c2 - expected_c2).abs() < 0.05 * expected_c2);
    }

    #[test]
    fn power_tail_fit_flags_constant_psi_as_sub_power() {
        // psi = c: g(u) = R ln(u/c) grows slower than any power; the local
        // log-log slope 1/ln(u/c) keeps falling across the window.
        let psi = PsiTable::from_closed_form(|_| 1.0, 1.0, 64.0, 64).unwrap();
        let u_grid: Vec<f64> = (0..60)
            .map(|i| 1.5 * (4000.0_f64 / 1.5).powf(i as f64 / 59.0))
            .collect();
        let curve = tail_bound(&psi, &u_grid).unwrap();
        let fit = fit_power_tail(&curve).unwrap();
        assert_eq!(fit.growth, GrowthClass::SubPower);
        assert!(fit.m_hat < 0.6, "m_hat = {}", fit.m_hat);
    }

    #[test]
    fn power_tail_fit_needs_enough_positive_points() {
        let psi = PsiTable::from_closed_form(|_| 1.0, 1.0, 64.0, 64).unwrap();
        let curve = tail_bound(&psi, &[2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            fit_power_tail(&curve).unwrap_err(),
            Error::TooFewPoints { .. }
        ));
    }

    #[test]
    fn single_axis_bound_is_equality_for_deterministic_fields() {
        let s = unit_space(&[5]);
        let f = grid_function_from_vec(&s, vec![1.0, 2.0, 0.5, 1.5, 3.0]).unwrap();
        let model = FieldModel::scaled(f, 1.0).unwrap();
        let row = single_axis_moment_bound(&model, 2.0, 4.0, 50, 0).unwrap();
        assert!((row.lhs - row.rhs).abs() <= 1e-10 * row.rhs);
        assert!(row.pass);
    }

    #[test]
    fn single_axis_bound_holds_for_iid_gaussians() {
        let s = unit_space(&[16]);
        let model = FieldModel::iid(s, NoiseLaw::Gaussian).unwrap();
        let row = single_axis_moment_bound(&model, 2.0, 4.0, 20_000, 11).unwrap();
        assert!(row.pass);
        assert!(row.lhs <= row.rhs * (1.0 + 1e-12));
        assert!(matches!(
            single_axis_moment_bound(&model, 4.0, 2.0, 100, 0).unwrap_err(),
            Error::OrderBelowAdmissible { .. }
        ));
        let two_axis = FieldModel::iid(unit_space(&[2, 2]), NoiseLaw::Gaussian).unwrap();
        assert!(single_axis_moment_bound(&two_axis, 2.0, 4.0, 100, 0).is_err());
    }
}

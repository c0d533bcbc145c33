//! Random fields on product spaces and Monte Carlo sampling of their norms.
//!
//! A [`FieldModel`] describes a random function eta(x, omega) on a fixed
//! product space. Sampling is counter-based: replica i draws from a ChaCha12
//! stream keyed by the experiment seed with stream index i, so replicas are
//! independent, order-free and safe to generate in parallel. No OS entropy is
//! ever consulted; two runs with the same seed are bit-identical.
//!
//! `zeta = ||eta||_{p,X}` is the scalar whose moments and tails the rest of
//! the crate bounds; [`sample_zeta`] collects its replicas into a
//! [`SampleSet`] ordered by replica index.

use crate::error::{Error, Result};
use crate::norm::mixed_norm;
use crate::reduce::power_mean;
use crate::space::{validate_exponent, ExponentVector, GridFunction, ProductSpace};
use ndarray::Axis as NdAxis;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, StudentT};

/// Scalar noise law attached to a field model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseLaw {
    /// Standard normal.
    Gaussian,
    /// Symmetric density proportional to exp(-|u|^m); tails exp(-c u^m).
    ExponentialPower { m: f64 },
    /// Student t with nu degrees of freedom; moments finite only below nu.
    Student { nu: f64 },
}

impl NoiseLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            NoiseLaw::Gaussian => Ok(()),
            NoiseLaw::ExponentialPower { m } => {
                if !m.is_finite() || m <= 0.0 {
                    Err(Error::NonPositiveParameter {
                        what: "exponential power m",
                        value: m,
                    })
                } else {
                    Ok(())
                }
            }
            NoiseLaw::Student { nu } => {
                if !nu.is_finite() || nu <= 2.0 {
                    Err(Error::StudentDegreesTooSmall { nu })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Supremum of the orders with finite absolute moments.
    pub fn moment_domain_sup(&self) -> f64 {
        match *self {
            NoiseLaw::Student { nu } => nu,
            _ => f64::INFINITY,
        }
    }

    fn sampler(&self) -> LawSampler {
        match *self {
            NoiseLaw::Gaussian => LawSampler::Gaussian,
            NoiseLaw::ExponentialPower { m } => LawSampler::ExponentialPower {
                gamma: Gamma::new(1.0 / m, 1.0).expect("m validated positive"),
                inv_m: 1.0 / m,
            },
            NoiseLaw::Student { nu } => {
                LawSampler::Student(StudentT::new(nu).expect("nu validated > 2"))
            }
        }
    }

    fn label(&self) -> String {
        match *self {
            NoiseLaw::Gaussian => "gaussian".to_string(),
            NoiseLaw::ExponentialPower { m } => format!("exponential_power(m={m})"),
            NoiseLaw::Student { nu } => format!("student(nu={nu})"),
        }
    }
}

enum LawSampler {
    Gaussian,
    ExponentialPower { gamma: Gamma<f64>, inv_m: f64 },
    Student(StudentT<f64>),
}

impl LawSampler {
    fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            LawSampler::Gaussian => rng.sample(StandardNormal),
            // |X| = G^(1/m) with G ~ Gamma(1/m, 1) has density prop. to
            // exp(-x^m) on x > 0; an independent sign symmetrizes it.
            LawSampler::ExponentialPower { gamma, inv_m } => {
                let magnitude = gamma.sample(rng).powf(*inv_m);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            LawSampler::Student(t) => t.sample(rng),
        }
    }
}

/// What kind of field sits on the space.
#[derive(Debug, Clone, PartialEq)]
enum FieldKind {
    /// Independent draws of the law, one per cell.
    Iid { law: NoiseLaw },
    /// Separable Gaussian field: exp(-distance / length) correlation per axis.
    Correlated { lengths: Vec<f64> },
    /// tau(omega) * h(x): one scalar draw scales a fixed grid.
    Factorable { shape: GridFunction, law: NoiseLaw },
    /// scale * h(x): no randomness at all.
    Scaled { shape: GridFunction, scale: f64 },
}

/// A random field model bound to its product space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldModel {
    space: ProductSpace,
    kind: FieldKind,
}

impl FieldModel {
    /// Independent identically distributed cells.
    pub fn iid(space: ProductSpace, law: NoiseLaw) -> Result<Self> {
        law.validate()?;
        Ok(Self {
            space,
            kind: FieldKind::Iid { law },
        })
    }

    /// Separable Gaussian field with one correlation length per axis.
    ///
    /// Along each axis the correlation between cells i and j is
    /// rho^|i-j| with rho = exp(-1 / length); marginals stay standard normal.
    pub fn correlated(space: ProductSpace, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != space.axis_count() {
            return Err(Error::ExponentCountMismatch {
                expected: space.axis_count(),
                got: lengths.len(),
            });
        }
        for &c in &lengths {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::NonPositiveParameter {
                    what: "correlation length",
                    value: c,
                });
            }
        }
        Ok(Self {
            space,
            kind: FieldKind::Correlated { lengths },
        })
    }

    /// One scalar noise draw times a fixed deterministic grid.
    pub fn factorable(shape: GridFunction, law: NoiseLaw) -> Result<Self> {
        law.validate()?;
        Ok(Self {
            space: shape.space().clone(),
            kind: FieldKind::Factorable { shape, law },
        })
    }

    /// Deterministic field: a fixed grid times a constant.
    pub fn scaled(shape: GridFunction, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::NonPositiveParameter {
                what: "scale",
                value: scale,
            });
        }
        let space = shape.space().clone();
        Ok(Self {
            space,
            kind: FieldKind::Scaled { shape, scale },
        })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    /// Supremum of moment orders with finite expectations under this model.
    pub fn moment_domain_sup(&self) -> f64 {
        match &self.kind {
            FieldKind::Iid { law } => law.moment_domain_sup(),
            FieldKind::Factorable { law, .. } => law.moment_domain_sup(),
            FieldKind::Correlated { .. } | FieldKind::Scaled { .. } => f64::INFINITY,
        }
    }

    /// Compact description used to stamp sample sets and CSV exports.
    pub fn digest(&self) -> String {
        let axes: Vec<String> = self
            .space
            .axes()
            .iter()
            .map(|a| format!("{}:{}", a.name(), a.len()))
            .collect();
        let kind = match &self.kind {
            FieldKind::Iid { law } => format!("iid[{}]", law.label()),
            FieldKind::Correlated { lengths } => format!("correlated{lengths:?}"),
            FieldKind::Factorable { law, .. } => format!("factorable[{}]", law.label()),
            FieldKind::Scaled { scale, .. } => format!("scaled[{scale}]"),
        };
        format!("{kind}|{}", axes.join(","))
    }
}

/// Draws replica `replica` of the field under `seed`.
///
/// Same (seed, replica) always yields the same grid, independent of any other
/// replica and of evaluation order.
pub fn sample_field(model: &FieldModel, seed: u64, replica: u64) -> GridFunction {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    match &model.kind {
        FieldKind::Iid { law } => {
            let sampler = law.sampler();
            let shape = model.space.shape();
            let mut values = ndarray::ArrayD::zeros(ndarray::IxDyn(&shape));
            for v in values.iter_mut() {
                *v = sampler.draw(&mut rng);
            }
            GridFunction::from_parts(model.space.clone(), values)
        }
        FieldKind::Correlated { lengths } => {
            let shape = model.space.shape();
            let mut values = ndarray::ArrayD::zeros(ndarray::IxDyn(&shape));
            for v in values.iter_mut() {
                *v = LawSampler::Gaussian.draw(&mut rng);
            }
            // AR(1) recursion along each axis keeps unit marginals and gives
            // rho^|i-j| correlation exactly; separable across axes.
            for (k, &len) in lengths.iter().enumerate() {
                let rho = (-1.0 / len).exp();
                let fresh = (1.0 - rho * rho).sqrt();
                for mut lane in values.lanes_mut(NdAxis(k)) {
                    for i in 1..lane.len() {
                        lane[i] = rho * lane[i - 1] + fresh * lane[i];
                    }
                }
            }
            GridFunction::from_parts(model.space.clone(), values)
        }
        FieldKind::Factorable { shape, law } => {
            let tau = law.sampler().draw(&mut rng);
            GridFunction::from_parts(model.space.clone(), shape.values() * tau)
        }
        FieldKind::Scaled { shape, scale } => {
            GridFunction::from_parts(model.space.clone(), shape.values() * *scale)
        }
    }
}

/// Monte Carlo replicas of zeta = ||eta||_{p,X}, ordered by replica index.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    seed: u64,
    digest: String,
}

impl SampleSet {
    /// Wraps explicit values; used by tests and CSV import.
    pub fn from_values(values: Vec<f64>, seed: u64, digest: String) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        Ok(Self {
            values,
            seed,
            digest,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }
}

/// Samples n replicas of zeta = ||eta||_{p,X}.
pub fn sample_zeta(model: &FieldModel, p: &ExponentVector, n: u64, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::NoReplicas);
    }
    if p.len() != model.space.axis_count() {
        return Err(Error::ExponentCountMismatch {
            expected: model.space.axis_count(),
            got: p.len(),
        });
    }
    let values = crate::map_replicas(n, |i| {
        let eta = sample_field(model, seed, i);
        mixed_norm(&eta, p).expect("exponents validated against model space")
    });
    SampleSet::from_values(values, seed, model.digest())
}

/// Empirical r-th moment norm (E_n |zeta|^r)^(1/r), max-factored.
pub fn empirical_moment(samples: &SampleSet, r: f64) -> Result<f64> {
    validate_exponent(r)?;
    Ok(power_mean(samples.values(), r))
}

/// Empirical tail P_n(zeta > u).
pub fn empirical_tail(samples: &SampleSet, u: f64) -> f64 {
    let count = samples.values.iter().filter(|&&v| v > u).count();
    count as f64 / samples.len() as f64
}

//! Polyhedral support functions `f(x) = max_k ⟨c_k, x⟩`, their integrals
//! against discrete measures, and the support function of a Wulff shape
//! given by finitely many constraint directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpOutcome, LpTolerances};
use crate::measures::{DiscreteMeasure, Point};

/// Maximum of finitely many linear functionals; convex and positively
/// 1-homogeneous by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyhedralSupportFunction {
    dim: usize,
    gradients: Vec<Point>,
}

impl PolyhedralSupportFunction {
    pub fn new(dim: usize, gradients: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        if gradients.is_empty() {
            return Err(Error::InvalidInput("support function needs at least one gradient".into()));
        }
        for (k, g) in gradients.iter().enumerate() {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.dim(),
                });
            }
            if !g.is_finite() {
                return Err(Error::InvalidInput(format!("gradients[{k}] is not finite")));
            }
        }
        Ok(Self { dim, gradients })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(dim, rows.iter().map(|r| Point::from(*r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gradients(&self) -> &[Point] {
        &self.gradients
    }

    /// Largest Euclidean gradient norm, i.e. the Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        self.gradients.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            gradients: self.gradients.iter().map(|g| g.scaled(factor)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        support_eval(self, x)
    }
}

/// `max_k ⟨c_k, x⟩`.
pub fn support_eval(f: &PolyhedralSupportFunction, x: &[f64]) -> f64 {
    f.gradients
        .iter()
        .map(|g| g.dot(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ w · f(x)` over the atoms of `m`.
pub fn integrate(f: &PolyhedralSupportFunction, m: &DiscreteMeasure) -> f64 {
    m.atoms().iter().map(|a| a.w * support_eval(f, &a.x)).sum()
}

/// Sampled spherical data `(u_k, f_k)` with unit directions `u_k`.
/// Serialized as `{"dim": d, "samples": [{"u": [..], "f": real}, ..]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalFunctionSamples {
    dim: usize,
    directions: Vec<Point>,
    values: Vec<f64>,
}

impl SphericalFunctionSamples {
    pub fn new(dim: usize, samples: Vec<(Point, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        let mut directions = Vec::with_capacity(samples.len());
        let mut values = Vec::with_capacity(samples.len());
        for (k, (u, f)) in samples.into_iter().enumerate() {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
            if !u.is_finite() || !f.is_finite() {
                return Err(Error::InvalidInput(format!("samples[{k}] is not finite")));
            }
            if (u.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "samples[{k}].u has norm {}, expected a unit vector",
                    u.norm()
                )));
            }
            directions.push(u);
            values.push(f);
        }
        Ok(Self {
            dim,
            directions,
            values,
        })
    }

    /// Normalizes each direction and rescales its value accordingly, so that
    /// the constraint `⟨x, v⟩ ≤ c` is kept as `⟨x, v/|v|⟩ ≤ c/|v|`.
    pub fn from_halfspaces(dim: usize, halfspaces: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut samples = Vec::with_capacity(halfspaces.len());
        for (v, c) in halfspaces {
            let p = Point::from(v.clone());
            let r = p.norm();
            if r == 0.0 {
                return Err(Error::InvalidInput("zero constraint direction".into()));
            }
            samples.push((p.scaled(1.0 / r), c / r));
        }
        Self::new(dim, samples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.directions.iter().zip(self.values.iter().copied())
    }
}

impl Serialize for SphericalFunctionSamples {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Sample<'a> {
            u: &'a Point,
            f: f64,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            dim: usize,
            samples: Vec<Sample<'a>>,
        }
        Repr {
            dim: self.dim,
            samples: self.samples().map(|(u, f)| Sample { u, f }).collect(),
        }
        .serialize(serializer)
    }
}

/// `max ⟨x, w⟩` over the Wulff shape `{x : ⟨x, u_k⟩ ≤ f_k ∀k}`.
///
/// Fails with [`Error::Unbounded`] when the directions do not positively
/// span the space in the direction of `w`, and with [`Error::Infeasible`]
/// when the shape is empty.
pub fn wulff_support(f: &SphericalFunctionSamples, w: &[f64]) -> Result<f64> {
    if w.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: w.len(),
        });
    }
    let d = f.dim;
    let k = f.len();
    // variables: x⁺ (d), x⁻ (d), slack (k)
    let mut objective = vec![0.0; 2 * d + k];
    for c in 0..d {
        objective[c] = -w[c];
        objective[d + c] = w[c];
    }
    let mut rows = Vec::with_capacity(k);
    for (i, (u, _)) in f.samples().enumerate() {
        let mut row = vec![0.0; 2 * d + k];
        for c in 0..d {
            row[c] = u[c];
            row[d + c] = -u[c];
        }
        row[2 * d + i] = 1.0;
        rows.push(row);
    }
    let program = LinearProgram::new(objective, rows, f.values.clone())?;
    match lp::solve(&program, LpTolerances::default())? {
        LpOutcome::Optimal { value, .. } => Ok(-value),
        LpOutcome::Unbounded { .. } => Err(Error::Unbounded),
        LpOutcome::Infeasible { .. } => Err(Error::Infeasible),
    }
}

/// `k` gradients with i.i.d. standard Gaussian entries, reproducible from
/// `seed`.
pub fn random_support_function(dim: usize, k: usize, seed: u64) -> PolyhedralSupportFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_support_function_with(&mut rng, dim, k)
}

pub fn random_support_function_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    k: usize,
) -> PolyhedralSupportFunction {
    let k = k.max(1);
    let gradients = (0..k)
        .map(|_| Point((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()))
        .collect();
    PolyhedralSupportFunction { dim, gradients }
}

//! Unnormalized transport kernels between finitely supported measures.
//!
//! A kernel assigns to each source point `x_i` the finite measure
//! `q^{x_i} = Σ_j Q_ij δ_{y_j}` over a shared list of target points. Rows
//! need not be probability vectors, and a zero row is a legal value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    self, approx_eq, close, normalize_merge, sphere_projection, Atom, DiscreteMeasure, Norm, Point,
};
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteKernel {
    dim: usize,
    source: Vec<Point>,
    targets: Vec<Point>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
}

impl DiscreteKernel {
    pub fn new(dim: usize, source: Vec<Point>, targets: Vec<Point>, q: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        for p in source.iter().chain(&targets) {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::InvalidInput("kernel point is not finite".into()));
            }
        }
        if q.len() != source.len() {
            return Err(Error::InvalidInput(format!(
                "Q has {} rows for {} source points",
                q.len(),
                source.len()
            )));
        }
        for (i, row) in q.iter().enumerate() {
            if row.len() != targets.len() {
                return Err(Error::InvalidInput(format!(
                    "Q[{i}] has {} entries for {} targets",
                    row.len(),
                    targets.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidInput(format!(
                    "Q[{i}] has entry {v}, expected finite and nonnegative"
                )));
            }
        }
        Ok(Self {
            dim,
            source,
            targets,
            q,
        })
    }

    /// `q^{x} = δ_x` on the atoms of `m`.
    pub fn identity(m: &DiscreteMeasure) -> Self {
        let pts: Vec<Point> = m.atoms().iter().map(|a| a.x.clone()).collect();
        let n = pts.len();
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            dim: m.dim(),
            source: pts.clone(),
            targets: pts,
            q,
        }
    }

    pub fn zero(dim: usize, source: Vec<Point>, targets: Vec<Point>) -> Result<Self> {
        let q = vec![vec![0.0; targets.len()]; source.len()];
        Self::new(dim, source, targets, q)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &[Point] {
        &self.source
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn row_mass(&self, i: usize) -> f64 {
        self.q[i].iter().sum()
    }

    /// `Σ_j Q_ij y_j`.
    pub fn row_barycenter(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (qij, y) in self.q[i].iter().zip(&self.targets) {
            for (o, v) in out.iter_mut().zip(y.iter()) {
                *o += qij * v;
            }
        }
        out
    }

    /// Push every row forward under `x ↦ (x, 1)`.
    pub fn lift(&self) -> Self {
        let up = |p: &Point| {
            let mut v = p.0.clone();
            v.push(1.0);
            Point(v)
        };
        Self {
            dim: self.dim + 1,
            source: self.source.iter().map(up).collect(),
            targets: self.targets.iter().map(up).collect(),
            q: self.q.clone(),
        }
    }

    /// Push every row forward under the projection dropping the last
    /// coordinate (source points are projected as well). Rows are not merged.
    pub fn project(&self) -> Result<Self> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall {
                min: 2,
                found: self.dim,
            });
        }
        let down = |p: &Point| Point(p[..p.dim() - 1].to_vec());
        Ok(Self {
            dim: self.dim - 1,
            source: self.source.iter().map(down).collect(),
            targets: self.targets.iter().map(down).collect(),
            q: self.q.clone(),
        })
    }

    /// Same kernel with rows scaled by `factors[i]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Self {
        let q = self
            .q
            .iter()
            .zip(factors)
            .map(|(row, f)| row.iter().map(|v| v * f).collect())
            .collect();
        Self { q, ..self.clone() }
    }
}

fn check_alignment(points: &[Point], m: &DiscreteMeasure, what: &str) -> Result<()> {
    if points.len() != m.len() {
        return Err(Error::Misaligned(format!(
            "{what} has {} points, measure has {} atoms",
            points.len(),
            m.len()
        )));
    }
    for (i, (p, a)) in points.iter().zip(m.atoms()).enumerate() {
        if p.dim() != a.x.dim() || !close(p, &a.x, DEFAULT_TOL) {
            return Err(Error::Misaligned(format!(
                "{what} point {i} is {:?}, measure atom is {:?}",
                p.0, a.x.0
            )));
        }
    }
    Ok(())
}

/// Weights `Σ_i m_i Q_ij` on the kernel's own target list, unmerged.
pub fn apply_weights(q: &DiscreteKernel, m: &DiscreteMeasure) -> Result<Vec<f64>> {
    check_alignment(&q.source, m, "kernel source")?;
    let mut out = vec![0.0; q.targets.len()];
    for (row, a) in q.q.iter().zip(m.atoms()) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += a.w * v;
        }
    }
    Ok(out)
}

/// `∫ q^x μ(dx)`, merged to canonical form.
pub fn apply(q: &DiscreteKernel, m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let weights = apply_weights(q, m)?;
    let raw = DiscreteMeasure::new(
        q.dim,
        q.targets
            .iter()
            .zip(weights)
            .map(|(y, w)| Atom { x: y.clone(), w })
            .collect(),
    )?;
    Ok(normalize_merge(&raw, DEFAULT_TOL))
}

pub fn is_transport(
    q: &DiscreteKernel,
    m: &DiscreteMeasure,
    target: &DiscreteMeasure,
    tol: f64,
) -> Result<bool> {
    let pushed = apply(q, m)?;
    Ok(approx_eq(
        &normalize_merge(&pushed, tol),
        &normalize_merge(target, tol),
        tol,
    ))
}

/// `max_j |Σ_i m_i Q_ij − ν_j|`, for a target measure whose atoms are listed
/// in the same order as the kernel's targets.
pub fn transport_residual(
    q: &DiscreteKernel,
    m: &DiscreteMeasure,
    target: &DiscreteMeasure,
) -> Result<f64> {
    check_alignment(&q.targets, target, "kernel targets")?;
    let weights = apply_weights(q, m)?;
    Ok(weights
        .iter()
        .zip(target.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `max |ba(q^{x_i}) − x_i| / (1 + |x_i|)` over atoms with `m_i > tol`.
pub fn moment_residual(q: &DiscreteKernel, m: &DiscreteMeasure, tol: f64) -> Result<f64> {
    check_alignment(&q.source, m, "kernel source")?;
    let mut worst = 0.0_f64;
    for (i, a) in m.atoms().iter().enumerate() {
        if a.w <= tol {
            continue;
        }
        let bary = q.row_barycenter(i);
        let err = Norm::L2.distance(&bary, &a.x);
        worst = worst.max(err / (1.0 + a.x.norm()));
    }
    Ok(worst)
}

/// Row barycenters reproduce their source points for every atom with
/// weight above `tol`.
pub fn is_moment_preserving(q: &DiscreteKernel, m: &DiscreteMeasure, tol: f64) -> Result<bool> {
    Ok(moment_residual(q, m, tol)? <= tol)
}

/// `r^x = ∫ q^y p^x(dy)`, i.e. the matrix product `P·Q`.
pub fn glue(p: &DiscreteKernel, q: &DiscreteKernel) -> Result<DiscreteKernel> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    if p.targets.len() != q.source.len()
        || p
            .targets
            .iter()
            .zip(&q.source)
            .any(|(a, b)| !close(a, b, DEFAULT_TOL))
    {
        return Err(Error::Misaligned(
            "targets of the first kernel do not match the source of the second".into(),
        ));
    }
    let r = p
        .q
        .iter()
        .map(|prow| {
            let mut out = vec![0.0; q.targets.len()];
            for (pk, qrow) in prow.iter().zip(&q.q) {
                if *pk == 0.0 {
                    continue;
                }
                for (o, v) in out.iter_mut().zip(qrow) {
                    *o += pk * v;
                }
            }
            out
        })
        .collect();
    Ok(DiscreteKernel {
        dim: p.dim,
        source: p.source.clone(),
        targets: q.targets.clone(),
        q: r,
    })
}

/// `Σ_i m_i · |x_i − ba(q^{x_i})|`.
pub fn barycentric_deviation(q: &DiscreteKernel, m: &DiscreteMeasure, norm: Norm) -> Result<f64> {
    check_alignment(&q.source, m, "kernel source")?;
    Ok(m
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| a.w * norm.distance(&a.x, &q.row_barycenter(i)))
        .sum())
}

/// `p^x = |x| δ_{x/|x|}` (zero row at the origin). Targets are the atoms of
/// the homogeneous marginal of `m`, in its canonical order.
pub fn sphere_kernel(m: &DiscreteMeasure, tol: f64) -> DiscreteKernel {
    let (marginal, index) = sphere_projection(m, tol);
    let targets: Vec<Point> = marginal.atoms().iter().map(|a| a.x.clone()).collect();
    let q = m
        .atoms()
        .iter()
        .zip(&index)
        .map(|(a, k)| {
            let mut row = vec![0.0; targets.len()];
            if let Some(k) = k {
                row[*k] = a.x.norm();
            }
            row
        })
        .collect();
    DiscreteKernel {
        dim: m.dim(),
        source: m.atoms().iter().map(|a| a.x.clone()).collect(),
        targets,
        q,
    }
}

/// Kernel from the homogeneous marginal back to `m`: the row of a sphere
/// atom `u` is the restriction of `m` to the ray through `u`, divided by the
/// norm of its first moment, plus the mass of `m` at the origin spread
/// proportionally to the mass of the marginal. Targets are the atoms of `m`
/// in their given order.
///
/// Undefined when the marginal vanishes, i.e. when `m` is empty or
/// concentrated at the origin.
pub fn inverse_sphere_kernel(m: &DiscreteMeasure, tol: f64) -> Result<DiscreteKernel> {
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let (marginal, index) = sphere_projection(m, tol);
    let sphere_mass = measures::mass(&marginal);
    if marginal.is_empty() || sphere_mass <= 0.0 {
        return Err(Error::ConcentratedAtOrigin);
    }
    let nrays = marginal.len();
    let mut ray_weight = vec![0.0; nrays];
    for (a, k) in m.atoms().iter().zip(&index) {
        if let Some(k) = k {
            ray_weight[*k] += a.w * a.x.norm();
        }
    }
    let mut q = vec![vec![0.0; m.len()]; nrays];
    for (j, (a, k)) in m.atoms().iter().zip(&index).enumerate() {
        match k {
            Some(k) => q[*k][j] = a.w / ray_weight[*k],
            None if a.x.norm() <= tol => {
                for row in q.iter_mut() {
                    row[j] = a.w / sphere_mass;
                }
            }
            // nonzero atom whose ray carried negligible mass and was dropped
            None => {}
        }
    }
    Ok(DiscreteKernel {
        dim: m.dim(),
        source: marginal.atoms().iter().map(|a| a.x.clone()).collect(),
        targets: m.atoms().iter().map(|a| a.x.clone()).collect(),
        q,
    })
}

//! Finitely supported nonnegative measures on ℝᵈ and the constructions on
//! them: mass, first moment, homogeneous marginal, canonical merging, grid
//! coarsening, Wasserstein-1, and the half-space maps.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpOutcome, LpTolerances};

/// A point of ℝᵈ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        Norm::L2.length(&self.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

/// Ground norm used by [`w1`] and the barycentric quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn length(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Point,
    pub w: f64,
}

impl Atom {
    pub fn new(x: impl Into<Point>, w: f64) -> Self {
        Self { x: x.into(), w }
    }
}

/// Finite list of weighted atoms in ℝᵈ. The zero measure is the empty list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.x.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.x.dim(),
                });
            }
            if !a.x.is_finite() {
                return Err(Error::InvalidInput(format!("atoms[{i}].x is not finite")));
            }
            if !a.w.is_finite() || a.w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "atoms[{i}].w must be finite and nonnegative, got {}",
                    a.w
                )));
            }
        }
        Ok(Self { dim, atoms })
    }

    /// Build from `(location, weight)` pairs; the dimension is taken from the
    /// first location.
    ///
    /// Panics on malformed input, meant for literals in tests and examples.
    pub fn from_pairs<P: AsRef<[f64]>>(pairs: &[(P, f64)]) -> Self {
        let dim = pairs.first().map_or(1, |(x, _)| x.as_ref().len());
        let atoms = pairs
            .iter()
            .map(|(x, w)| Atom::new(x.as_ref(), *w))
            .collect();
        Self::new(dim, atoms).expect("well-formed measure literal")
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            atoms: Vec::new(),
        }
    }

    pub fn dirac(x: impl Into<Point>, w: f64) -> Self {
        let x = x.into();
        Self::new(x.dim(), vec![Atom { x, w }]).expect("well-formed dirac")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.w)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    x: a.x.clone(),
                    w: a.w * factor,
                })
                .collect(),
        }
    }

    /// Rescaled to unit mass; the zero measure is returned unchanged.
    pub fn normalized(&self) -> Self {
        let m = mass(self);
        if m > 0.0 {
            self.scaled(1.0 / m)
        } else {
            self.clone()
        }
    }

    fn check_dim(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

pub fn mass(m: &DiscreteMeasure) -> f64 {
    m.weights().sum()
}

/// `Σ w·x`; the zero vector for the empty measure.
pub fn first_moment(m: &DiscreteMeasure) -> Point {
    let mut out = vec![0.0; m.dim];
    for a in &m.atoms {
        for (o, x) in out.iter_mut().zip(a.x.iter()) {
            *o += a.w * x;
        }
    }
    Point(out)
}

/// Coordinates equal up to `tol`, relative to the larger magnitude with an
/// absolute floor of one.
pub(crate) fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a
        .iter()
        .chain(b)
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// Canonical merge that also reports, for every input atom, the index of the
/// output atom it was merged into (`None` when its cluster was dropped).
pub(crate) fn merge_with_assignment(
    m: &DiscreteMeasure,
    tol: f64,
) -> (DiscreteMeasure, Vec<Option<usize>>) {
    let mut order: Vec<usize> = (0..m.atoms.len()).collect();
    order.sort_by(|&i, &j| {
        m.atoms[i]
            .x
            .iter()
            .zip(m.atoms[j].x.iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    struct Cluster {
        seed: usize,
        weight: f64,
        offset: Vec<f64>,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut cluster_of = vec![None; m.atoms.len()];
    for &i in &order {
        let atom = &m.atoms[i];
        if atom.w <= 0.0 {
            continue;
        }
        let found = clusters
            .iter()
            .position(|c| close(&m.atoms[c.seed].x, &atom.x, tol));
        let k = match found {
            Some(k) => k,
            None => {
                clusters.push(Cluster {
                    seed: i,
                    weight: 0.0,
                    offset: vec![0.0; m.dim],
                });
                clusters.len() - 1
            }
        };
        let c = &mut clusters[k];
        c.weight += atom.w;
        let seed = &m.atoms[c.seed].x;
        for ((o, x), s) in c.offset.iter_mut().zip(atom.x.iter()).zip(seed.iter()) {
            *o += atom.w * (x - s);
        }
        cluster_of[i] = Some(k);
    }

    let mut remap = vec![None; clusters.len()];
    let mut atoms = Vec::new();
    for (k, c) in clusters.iter().enumerate() {
        if c.weight <= tol {
            continue;
        }
        let seed = &m.atoms[c.seed].x;
        let x: Vec<f64> = seed
            .iter()
            .zip(&c.offset)
            .map(|(s, o)| s + o / c.weight)
            .collect();
        remap[k] = Some(atoms.len());
        atoms.push(Atom {
            x: Point(x),
            w: c.weight,
        });
    }
    let assignment = cluster_of.into_iter().map(|c| c.and_then(|k| remap[k])).collect();
    (DiscreteMeasure { dim: m.dim, atoms }, assignment)
}

/// Canonical form: locations within `tol` are merged greedily in
/// lexicographic order (weighted barycenter, summed weight), and clusters of
/// weight `≤ tol` are dropped.
pub fn normalize_merge(m: &DiscreteMeasure, tol: f64) -> DiscreteMeasure {
    merge_with_assignment(m, tol).0
}

/// Homogeneous marginal together with the index of the sphere atom each
/// input atom lands on (`None` for atoms at the origin).
pub(crate) fn sphere_projection(
    m: &DiscreteMeasure,
    tol: f64,
) -> (DiscreteMeasure, Vec<Option<usize>>) {
    let mut index = Vec::with_capacity(m.atoms.len());
    let mut atoms = Vec::new();
    for a in &m.atoms {
        let r = a.x.norm();
        if r <= tol {
            index.push(None);
            continue;
        }
        index.push(Some(atoms.len()));
        atoms.push(Atom {
            x: Point(a.x.iter().map(|v| v / r).collect()),
            w: a.w * r,
        });
    }
    let projected = DiscreteMeasure { dim: m.dim, atoms };
    let (merged, assignment) = merge_with_assignment(&projected, tol);
    let index = index
        .into_iter()
        .map(|i| i.and_then(|i| assignment[i]))
        .collect();
    (merged, index)
}

/// The measure on the unit sphere that integrates every positively
/// 1-homogeneous function like `m` does: `(x, w) ↦ (x/|x|, w·|x|)`, atoms at
/// the origin dropped.
pub fn homogeneous_marginal(m: &DiscreteMeasure, tol: f64) -> DiscreteMeasure {
    sphere_projection(m, tol).0
}

/// Atomwise agreement of two canonical measures: equal atom counts and a
/// matching in which locations and weights agree within `tol`.
pub fn approx_eq(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> bool {
    if a.dim != b.dim || a.atoms.len() != b.atoms.len() {
        return false;
    }
    let mut used = vec![false; b.atoms.len()];
    'outer: for x in &a.atoms {
        for (j, y) in b.atoms.iter().enumerate() {
            if used[j] || !close(&x.x, &y.x, tol) {
                continue;
            }
            if (x.w - y.w).abs() <= tol * x.w.max(y.w).max(1.0) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Whether `a` and `b` have the same homogeneous marginal.
pub fn ph_equivalent(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> bool {
    a.dim == b.dim && approx_eq(&homogeneous_marginal(a, tol), &homogeneous_marginal(b, tol), tol)
}

/// Replace the measure on each cell of a grid of cubes of side `1/n` by a
/// single atom at its conditional barycenter carrying the cell's mass.
///
/// The grid is anchored at `−a` (where `a` is the largest coordinate
/// magnitude) with half-open cells `[−a + k/n, −a + (k+1)/n)`, and has
/// `⌊2an⌋ + 1` cells per axis so that `+a` falls inside the last one.
/// Output atoms are ordered by cell index.
pub fn coarsen(m: &DiscreteMeasure, n: usize) -> Result<DiscreteMeasure> {
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if n == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let nf = n as f64;
    let a = m
        .atoms
        .iter()
        .flat_map(|at| at.x.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let cells = (2.0 * a * nf).floor() as usize + 1;

    let mut grid: BTreeMap<Vec<usize>, (usize, f64, Vec<f64>)> = BTreeMap::new();
    for (i, atom) in m.atoms.iter().enumerate() {
        let key: Vec<usize> = atom
            .x
            .iter()
            .map(|&v| (((v + a) * nf).floor().max(0.0) as usize).min(cells - 1))
            .collect();
        let entry = grid
            .entry(key)
            .or_insert_with(|| (i, 0.0, vec![0.0; m.dim]));
        entry.1 += atom.w;
        let seed = &m.atoms[entry.0].x;
        for ((o, x), s) in entry.2.iter_mut().zip(atom.x.iter()).zip(seed.iter()) {
            *o += atom.w * (x - s);
        }
    }

    let atoms = grid
        .into_values()
        .filter(|(_, w, _)| *w > 0.0)
        .map(|(seed, w, offset)| {
            let x = m.atoms[seed]
                .x
                .iter()
                .zip(&offset)
                .map(|(s, o)| s + o / w)
                .collect::<Vec<_>>();
            Atom { x: Point(x), w }
        })
        .collect();
    Ok(DiscreteMeasure { dim: m.dim, atoms })
}

/// Wasserstein-1 distance between equal-mass measures under the chosen
/// ground norm: the transport LP is solved on the unit-mass normalizations
/// and the value multiplied back by the common mass.
pub fn w1(a: &DiscreteMeasure, b: &DiscreteMeasure, norm: Norm) -> Result<f64> {
    a.check_dim(b)?;
    let (ma, mb) = (mass(a), mass(b));
    if ma <= 0.0 || mb <= 0.0 {
        return Err(Error::ZeroMass);
    }
    if (ma - mb).abs() > crate::DEFAULT_TOL * ma.max(mb).max(1.0) {
        return Err(Error::MassMismatch { left: ma, right: mb });
    }
    let src: Vec<&Atom> = a.atoms.iter().filter(|x| x.w > 0.0).collect();
    let dst: Vec<&Atom> = b.atoms.iter().filter(|x| x.w > 0.0).collect();
    let (ns, nt) = (src.len(), dst.len());
    let var = |i: usize, j: usize| i * nt + j;

    let mut cost = vec![0.0; ns * nt];
    let mut rows = Vec::with_capacity(ns + nt);
    let mut rhs = Vec::with_capacity(ns + nt);
    for (i, s) in src.iter().enumerate() {
        let mut row = vec![0.0; ns * nt];
        for (j, t) in dst.iter().enumerate() {
            cost[var(i, j)] = norm.distance(&s.x, &t.x);
            row[var(i, j)] = 1.0;
        }
        rows.push(row);
        rhs.push(s.w / ma);
    }
    for (j, t) in dst.iter().enumerate() {
        let mut row = vec![0.0; ns * nt];
        for i in 0..ns {
            row[var(i, j)] = 1.0;
        }
        rows.push(row);
        rhs.push(t.w / mb);
    }
    let program = LinearProgram::new(cost, rows, rhs)?;
    match lp::solve(&program, LpTolerances::default())? {
        LpOutcome::Optimal { value, .. } => Ok(value.max(0.0) * ma),
        other => Err(Error::NumericalBreakdown(format!(
            "balanced transport program not optimal: {other:?}"
        ))),
    }
}

/// Push forward under `x ↦ (x, 1)`.
pub fn lift(m: &DiscreteMeasure) -> DiscreteMeasure {
    let atoms = m
        .atoms
        .iter()
        .map(|a| {
            let mut x = a.x.0.clone();
            x.push(1.0);
            Atom { x: Point(x), w: a.w }
        })
        .collect();
    DiscreteMeasure {
        dim: m.dim + 1,
        atoms,
    }
}

/// Push forward under the projection onto the first `d − 1` coordinates,
/// followed by a canonical merge.
pub fn project(m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if m.dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: m.dim });
    }
    let atoms = m
        .atoms
        .iter()
        .map(|a| Atom {
            x: Point(a.x[..m.dim - 1].to_vec()),
            w: a.w,
        })
        .collect();
    let projected = DiscreteMeasure {
        dim: m.dim - 1,
        atoms,
    };
    Ok(normalize_merge(&projected, crate::DEFAULT_TOL))
}

/// Slide the mass of a measure on the open upper half space along rays
/// through the origin onto the hyperplane `{x_{d} = 1}`:
/// `(x, w) ↦ ((x₁/x_d, …, x_{d−1}/x_d, 1), w·x_d)`.
pub fn flatten_to_hyperplane(m: &DiscreteMeasure, tol: f64) -> Result<DiscreteMeasure> {
    let last = m.dim - 1;
    let mut atoms = Vec::with_capacity(m.atoms.len());
    for (index, a) in m.atoms.iter().enumerate() {
        let h = a.x[last];
        if h <= tol {
            return Err(Error::OutsideHalfSpace { index, value: h });
        }
        let mut x: Vec<f64> = a.x[..last].iter().map(|v| v / h).collect();
        x.push(1.0);
        atoms.push(Atom {
            x: Point(x),
            w: a.w * h,
        });
    }
    let flat = DiscreteMeasure { dim: m.dim, atoms };
    Ok(normalize_merge(&flat, tol))
}

//! Dense two-phase primal simplex for standard-form programs
//!
//! ```text
//! minimize ⟨c, z⟩  subject to  A z = b,  z ≥ 0
//! ```
//!
//! Phase one minimizes the sum of artificial variables; a positive optimum
//! yields a Farkas vector `y` with `Aᵀy ≥ 0` and `⟨b, y⟩ < 0` read off the
//! phase-one duals. Phase two optimizes the true objective from the feasible
//! basis. Pivoting follows Bland's rule (lowest eligible index enters, ties in
//! the ratio test go to the lowest basic index), so the solver terminates and
//! is deterministic.
//!
//! Rows are scaled to unit max-norm and sign-flipped so that `b ≥ 0` before
//! solving. Every witness is checked by substitution against the original
//! data before it is returned; a failed check surfaces as
//! [`Error::NumericalBreakdown`].

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
/// Pivots smaller than this fraction of the column's largest entry are skipped.
const RELATIVE_PIVOT_TOL: f64 = 1e-9;
/// Primal infeasibility tolerated by the two-pass ratio test.
const HARRIS_SHIFT: f64 = 1e-11;
/// Smallest entry used to pivot a basic artificial out after phase one.
const DRIVE_OUT_TOL: f64 = 1e-7;
const REDUCED_COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

/// `min ⟨objective, z⟩` s.t. `constraints · z = rhs`, `z ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if constraints.len() != rhs.len() {
            return Err(Error::InvalidInput(format!(
                "{} constraint rows but {} right-hand sides",
                constraints.len(),
                rhs.len()
            )));
        }
        for (i, row) in constraints.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "constraint row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("constraint row {i} has a non-finite entry")));
            }
        }
        if objective.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective or right-hand side".into()));
        }
        Ok(Self { objective, constraints, rhs })
    }

    /// Program with zero objective.
    pub fn feasibility(constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = constraints.first().map_or(0, Vec::len);
        Self::new(vec![0.0; n], constraints, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|row| dot(row, z)).collect()
    }

    /// `Aᵀ y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for (row, &yi) in self.constraints.iter().zip(y) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpTolerances {
    pub feas_tol: f64,
    pub cert_tol: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            feas_tol: crate::DEFAULT_FEAS_TOL,
            cert_tol: crate::DEFAULT_CERT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<f64>,
        value: f64,
        /// Equality-constraint multipliers `y` with `c − Aᵀy ≥ 0`.
        duals: Vec<f64>,
    },
    /// `Aᵀy ≥ 0` and `⟨b, y⟩ < 0`, scaled to unit max-norm.
    Infeasible { farkas: Vec<f64> },
    /// `r ≥ 0`, `A r = 0`, `⟨c, r⟩ < 0`, scaled to unit max-norm.
    Unbounded { ray: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub pivots: usize,
}

pub fn solve(p: &LinearProgram, tol: LpTolerances) -> Result<LpOutcome> {
    solve_with_stats(p, tol).map(|(o, _)| o)
}

/// Phase one only: a point of `{z ≥ 0 : A z = b}` or a Farkas vector.
pub fn feasibility(a: Vec<Vec<f64>>, b: Vec<f64>, tol: LpTolerances) -> Result<Feasibility> {
    feasibility_with_stats(a, b, tol).map(|(f, _)| f)
}

pub fn feasibility_with_stats(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    tol: LpTolerances,
) -> Result<(Feasibility, SolveStats)> {
    let p = LinearProgram::feasibility(a, b)?;
    let (outcome, stats) = solve_with_stats(&p, tol)?;
    let f = match outcome {
        LpOutcome::Optimal { solution, .. } => Feasibility::Feasible(solution),
        LpOutcome::Infeasible { farkas } => Feasibility::Infeasible(farkas),
        LpOutcome::Unbounded { .. } => {
            return Err(Error::NumericalBreakdown(
                "zero objective reported unbounded".into(),
            ))
        }
    };
    Ok((f, stats))
}

pub fn solve_with_stats(p: &LinearProgram, tol: LpTolerances) -> Result<(LpOutcome, SolveStats)> {
    let scaled = ScaledProgram::new(p);
    let m = p.num_rows();
    let n = p.num_vars();
    let mut tab = Tableau::phase_one(&scaled.a, &scaled.b, n);

    match tab.iterate(n + m, REDUCED_COST_TOL)? {
        Step::Optimal => {}
        Step::Unbounded(_) => {
            return Err(Error::NumericalBreakdown("phase one reported unbounded".into()))
        }
    }

    let bmax = scaled.b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let infeasibility = -tab.cost[tab.width() - 1];
    if infeasibility > tol.feas_tol * bmax {
        let y_scaled: Vec<f64> = (0..m).map(|i| tab.cost[n + i] - 1.0).collect();
        let farkas = normalize_max(scaled.unscale_duals(&y_scaled));
        verify_farkas(p, &farkas, tol)?;
        return Ok((LpOutcome::Infeasible { farkas }, tab.stats()));
    }

    tab.drive_out_artificials(n);
    let cmax = p.objective.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    tab.set_cost(&p.objective);
    match tab.iterate(n, REDUCED_COST_TOL * cmax)? {
        Step::Optimal => {
            let mut solution = vec![0.0; n];
            for (i, &j) in tab.basis.iter().enumerate() {
                if j < n {
                    solution[j] = tab.rhs(i);
                }
            }
            if let Some(v) = solution.iter().find(|v| **v < -tol.feas_tol) {
                return Err(Error::NumericalBreakdown(format!(
                    "primal solution has negative entry {v}"
                )));
            }
            for v in &mut solution {
                *v = v.max(0.0);
            }
            let y_scaled: Vec<f64> = (0..m).map(|i| -tab.cost[n + i]).collect();
            let duals = scaled.unscale_duals(&y_scaled);
            let value = dot(&p.objective, &solution);
            verify_optimal(p, &scaled, &solution, &duals, tol)?;
            Ok((LpOutcome::Optimal { solution, value, duals }, tab.stats()))
        }
        Step::Unbounded(col) => {
            let mut ray = vec![0.0; n];
            ray[col] = 1.0;
            for (i, &j) in tab.basis.iter().enumerate() {
                if j < n {
                    ray[j] = (-tab.at(i, col)).max(0.0);
                }
            }
            let ray = normalize_max(ray);
            verify_ray(p, &scaled, &ray, tol)?;
            Ok((LpOutcome::Unbounded { ray }, tab.stats()))
        }
    }
}

/// Rows scaled to unit max-norm and flipped so that the right-hand side is
/// nonnegative. `row_factor[i]` is the signed multiplier applied to row `i`.
struct ScaledProgram {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    row_factor: Vec<f64>,
}

impl ScaledProgram {
    fn new(p: &LinearProgram) -> Self {
        let mut a = Vec::with_capacity(p.num_rows());
        let mut b = Vec::with_capacity(p.num_rows());
        let mut row_factor = Vec::with_capacity(p.num_rows());
        for (row, &rhs) in p.constraints.iter().zip(&p.rhs) {
            let norm = row.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let mut factor = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            if rhs < 0.0 {
                factor = -factor;
            }
            a.push(row.iter().map(|v| v * factor).collect());
            b.push(rhs * factor);
            row_factor.push(factor);
        }
        Self { a, b, row_factor }
    }

    /// Duals of the scaled rows mapped back to the original rows.
    fn unscale_duals(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.row_factor).map(|(v, f)| v * f).collect()
    }
}

enum Step {
    Optimal,
    Unbounded(usize),
}

/// Row-major tableau `[A | I | b]` with an explicit reduced-cost row whose
/// last entry holds the negated objective value.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn phase_one(a: &[Vec<f64>], b: &[f64], n: usize) -> Self {
        let rows = b.len();
        let cols = n + rows;
        let width = cols + 1;
        let mut data = vec![0.0; rows * width];
        for i in 0..rows {
            let r = &mut data[i * width..(i + 1) * width];
            r[..n].copy_from_slice(&a[i]);
            r[n + i] = 1.0;
            r[cols] = b[i];
        }
        let mut cost = vec![0.0; width];
        for i in 0..rows {
            let r = &data[i * width..(i + 1) * width];
            for j in 0..n {
                cost[j] -= r[j];
            }
            cost[cols] -= r[cols];
        }
        Self {
            rows,
            cols,
            data,
            cost,
            basis: (n..cols).collect(),
            pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn stats(&self) -> SolveStats {
        SolveStats { pivots: self.pivots }
    }

    /// Replace the reduced-cost row by the one induced by `c` (artificial
    /// columns cost zero) under the current basis.
    fn set_cost(&mut self, c: &[f64]) {
        let width = self.width();
        let mut cost = vec![0.0; width];
        cost[..c.len()].copy_from_slice(c);
        for i in 0..self.rows {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            let r = &self.data[i * width..(i + 1) * width];
            for (k, v) in cost.iter_mut().enumerate() {
                *v -= cb * r[k];
            }
        }
        for &j in &self.basis {
            cost[j] = 0.0;
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.width();
        let p = self.at(r, c);
        {
            let row = &mut self.data[r * width..(r + 1) * width];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[r * width..(r + 1) * width].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let row = &mut self.data[i * width..(i + 1) * width];
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule for the entering column over columns `< allowed`. The
    /// leaving row comes from a two-pass (Harris) ratio test that prefers the
    /// largest pivot among near-minimal ratios; after `bland_after` pivots ties
    /// are broken by basis index only, which rules out cycling.
    fn iterate(&mut self, allowed: usize, rc_tol: f64) -> Result<Step> {
        let bland_after = self.pivots + 50 * (self.rows + self.cols);
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NumericalBreakdown("pivot limit exceeded".into()));
            }
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -rc_tol) else {
                return Ok(Step::Optimal);
            };
            let colmax = (0..self.rows).fold(0.0_f64, |acc, i| acc.max(self.at(i, enter).abs()));
            let piv_tol = PIVOT_TOL.max(RELATIVE_PIVOT_TOL * colmax);
            let eligible: Vec<(usize, f64, f64)> = (0..self.rows)
                .filter_map(|i| {
                    let a = self.at(i, enter);
                    (a > piv_tol).then(|| (i, a, self.rhs(i).max(0.0) / a))
                })
                .collect();
            if eligible.is_empty() {
                return Ok(Step::Unbounded(enter));
            }
            let leave = if self.pivots < bland_after {
                let bound = eligible
                    .iter()
                    .map(|&(i, a, _)| (self.rhs(i).max(0.0) + HARRIS_SHIFT) / a)
                    .fold(f64::INFINITY, f64::min);
                eligible
                    .iter()
                    .filter(|&&(_, _, ratio)| ratio <= bound)
                    .max_by(|x, y| x.1.total_cmp(&y.1).then(self.basis[y.0].cmp(&self.basis[x.0])))
                    .map(|&(i, _, _)| i)
            } else {
                let best = eligible.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
                eligible
                    .iter()
                    .filter(|e| e.2 <= best + 1e-12 * (1.0 + best))
                    .min_by_key(|e| self.basis[e.0])
                    .map(|&(i, _, _)| i)
            };
            let r = leave.expect("eligible rows are nonempty");
            self.pivot(r, enter);
            self.clamp_small_negatives();
        }
    }

    /// Basic values pushed just below zero by the shifted ratio test are reset
    /// to zero.
    fn clamp_small_negatives(&mut self) {
        let width = self.width();
        for i in 0..self.rows {
            let v = &mut self.data[i * width + self.cols];
            if *v < 0.0 && *v > -HARRIS_SHIFT {
                *v = 0.0;
            }
        }
    }

    /// After a feasible phase one, swap basic artificials for structural
    /// columns where the row allows it. A remaining artificial level is
    /// rounding noise and is zeroed first, so the swap moves no other basic
    /// value. Rows with no usable structural entry are numerically redundant;
    /// they are cleared so later pivots ignore them.
    fn drive_out_artificials(&mut self, n: usize) {
        let width = self.width();
        for i in 0..self.rows {
            if self.basis[i] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let a = self.at(i, j).abs();
                if a > DRIVE_OUT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            self.data[i * width + self.cols] = 0.0;
            match best {
                Some((j, _)) => self.pivot(i, j),
                None => {
                    let artificial = self.basis[i];
                    for (k, v) in self.data[i * width..(i + 1) * width].iter_mut().enumerate() {
                        *v = if k == artificial { 1.0 } else { 0.0 };
                    }
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_max(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if m > 0.0 {
        for x in &mut v {
            *x /= m;
        }
    }
    v
}

fn verify_farkas(p: &LinearProgram, y: &[f64], tol: LpTolerances) -> Result<()> {
    let aty = p.apply_transpose(y);
    let ynorm = y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for (j, v) in aty.iter().enumerate() {
        let scale: f64 = ynorm * p.constraints.iter().map(|row| row[j].abs()).sum::<f64>();
        if *v < -tol.feas_tol * scale {
            return Err(Error::NumericalBreakdown(format!(
                "Farkas vector violates column {j}: (Aᵀy)_{j} = {v}"
            )));
        }
    }
    let by = dot(&p.rhs, y);
    if by > -tol.cert_tol {
        return Err(Error::NumericalBreakdown(format!(
            "Farkas margin ⟨b, y⟩ = {by} does not reach {}",
            -tol.cert_tol
        )));
    }
    Ok(())
}

fn verify_optimal(
    p: &LinearProgram,
    scaled: &ScaledProgram,
    z: &[f64],
    y: &[f64],
    tol: LpTolerances,
) -> Result<()> {
    for (i, (row, b)) in scaled.a.iter().zip(&scaled.b).enumerate() {
        let lhs = dot(row, z);
        let mag: f64 = row.iter().zip(z).map(|(a, v)| (a * v).abs()).sum();
        if (lhs - b).abs() > tol.feas_tol * mag.max(b.abs()).max(1.0) {
            return Err(Error::NumericalBreakdown(format!(
                "primal residual {} on row {i}",
                (lhs - b).abs()
            )));
        }
    }
    let aty = p.apply_transpose(y);
    for j in 0..p.num_vars() {
        let mag: f64 = p
            .constraints
            .iter()
            .zip(y)
            .map(|(row, yi)| (row[j] * yi).abs())
            .sum::<f64>()
            + p.objective[j].abs();
        let rc = p.objective[j] - aty[j];
        if rc < -tol.feas_tol * mag.max(1.0) {
            return Err(Error::NumericalBreakdown(format!(
                "dual infeasibility {rc} on column {j}"
            )));
        }
        if (z[j] * rc).abs() > tol.feas_tol * (z[j] * mag).max(1.0) {
            return Err(Error::NumericalBreakdown(format!(
                "complementary slackness residual {} on column {j}",
                z[j] * rc
            )));
        }
    }
    Ok(())
}

fn verify_ray(p: &LinearProgram, scaled: &ScaledProgram, r: &[f64], tol: LpTolerances) -> Result<()> {
    for (i, row) in scaled.a.iter().enumerate() {
        let mag: f64 = row.iter().zip(r).map(|(a, v)| (a * v).abs()).sum();
        let lhs = dot(row, r);
        if lhs.abs() > tol.feas_tol * mag.max(1.0) {
            return Err(Error::NumericalBreakdown(format!("ray residual {lhs} on row {i}")));
        }
    }
    let cr = dot(&p.objective, r);
    if cr >= 0.0 {
        return Err(Error::NumericalBreakdown(format!("ray has nonnegative cost {cr}")));
    }
    Ok(())
}

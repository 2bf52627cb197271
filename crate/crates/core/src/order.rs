//! Decision procedures for the support-function order (`⪯phc`) and the
//! convex order (`⪯cx`) between finitely supported measures, the L1
//! barycentric cost, and a randomized dual probe.
//!
//! Both checks are LP feasibility problems over kernel entries. A feasible
//! point is returned as a kernel; an infeasible system yields a Farkas
//! vector, which is turned into a separating function:
//!
//! - `⪯phc`: with duals `β_j` on the mass rows and `γ_i ∈ ℝᵈ` on the
//!   moment block of source `i`, the support function
//!   `f(y) = max_i ⟨−γ_i / m_i, y⟩` satisfies `f(y_j) ≤ β_j`, hence
//!   `∫f dν ≤ ⟨β, ν⟩ < −Σ_i ⟨γ_i, x_i⟩ ≤ ∫f dμ`.
//! - `⪯cx`: with duals `α_i` (row sums), `β_j` (column sums) and `γ_i`
//!   (moments), the convex function `f(y) = max_i (⟨−γ_i, y⟩ − α_i)`
//!   separates in the same way.
//!
//! Every returned witness is re-verified by direct evaluation; a failed
//! check becomes [`Error::NumericalBreakdown`].

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{integrate, random_support_function_with, PolyhedralSupportFunction};
use crate::kernels::{self, DiscreteKernel};
use crate::lp::{self, Feasibility, LinearProgram, LpOutcome, SolveStats};
use crate::measures::{first_moment, mass, DiscreteMeasure, Norm, Point};
use crate::Tolerances;

/// `f(x) = max_i (⟨b_i, x⟩ + a_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolyhedralFunction {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffinePiece {
    pub b: Point,
    pub a: f64,
}

impl ConvexPolyhedralFunction {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("convex function needs at least one piece".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            if p.b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.b.dim(),
                });
            }
            if !p.b.is_finite() || !p.a.is_finite() {
                return Err(Error::InvalidInput(format!("pieces[{k}] is not finite")));
            }
        }
        Ok(Self { dim, pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.b.dot(x) + p.a)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn integrate(&self, m: &DiscreteMeasure) -> f64 {
        m.atoms().iter().map(|a| a.w * self.eval(&a.x)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Kernel(DiscreteKernel),
    Support(PolyhedralSupportFunction),
    Convex(ConvexPolyhedralFunction),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictStats {
    pub pivots: usize,
    pub runtime_ms: Option<f64>,
}

/// Outcome of an order check. When `holds`, the witness is a kernel; when
/// not, it is a separating function `f` normalized to Lipschitz constant
/// one and `gap = ∫f dμ − ∫f dν > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub witness: Witness,
    pub gap: f64,
    pub stats: VerdictStats,
}

impl OrderVerdict {
    pub fn kernel(&self) -> Option<&DiscreteKernel> {
        match &self.witness {
            Witness::Kernel(k) => Some(k),
            _ => None,
        }
    }

    pub fn support_certificate(&self) -> Option<&PolyhedralSupportFunction> {
        match &self.witness {
            Witness::Support(f) => Some(f),
            _ => None,
        }
    }

    pub fn convex_certificate(&self) -> Option<&ConvexPolyhedralFunction> {
        match &self.witness {
            Witness::Convex(f) => Some(f),
            _ => None,
        }
    }
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(())
}

fn points(m: &DiscreteMeasure) -> Vec<Point> {
    m.atoms().iter().map(|a| a.x.clone()).collect()
}

/// Largest mass or coordinate magnitude in play, floored at one.
fn scale_of(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    mu.atoms()
        .iter()
        .chain(nu.atoms())
        .flat_map(|a| a.x.iter().map(|v| v.abs()))
        .chain([mass(mu), mass(nu)])
        .fold(1.0, f64::max)
}

fn elapsed_ms(start: Instant) -> Option<f64> {
    Some(start.elapsed().as_secs_f64() * 1e3)
}

/// Assemble the kernel-entry LP shared by the phc check and the barycentric
/// cost: mass rows `Σ_a m_a Q_aj = ν_j`, then for each active source `a`
/// the `d` rows `Σ_j Q_aj y_j − x_a`, with `extra` additional columns per
/// moment row appended by the caller.
struct KernelSystem {
    active: Vec<usize>,
    nt: usize,
    dim: usize,
}

impl KernelSystem {
    fn new(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> Self {
        let active = mu
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.w > tol)
            .map(|(i, _)| i)
            .collect();
        Self {
            active,
            nt: nu.len(),
            dim: mu.dim(),
        }
    }

    fn num_kernel_vars(&self) -> usize {
        self.active.len() * self.nt
    }

    fn var(&self, a: usize, j: usize) -> usize {
        a * self.nt + j
    }

    /// Rows over `num_kernel_vars() + extra` columns.
    fn rows(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, extra: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let nvars = self.num_kernel_vars() + extra;
        let mut rows = Vec::with_capacity(self.nt + self.active.len() * self.dim);
        let mut rhs = Vec::with_capacity(rows.capacity());
        for (j, t) in nu.atoms().iter().enumerate() {
            let mut row = vec![0.0; nvars];
            for (a, &i) in self.active.iter().enumerate() {
                row[self.var(a, j)] = mu.atoms()[i].w;
            }
            rows.push(row);
            rhs.push(t.w);
        }
        for (a, &i) in self.active.iter().enumerate() {
            for c in 0..self.dim {
                let mut row = vec![0.0; nvars];
                for (j, t) in nu.atoms().iter().enumerate() {
                    row[self.var(a, j)] = t.x[c];
                }
                rows.push(row);
                rhs.push(mu.atoms()[i].x[c]);
            }
        }
        (rows, rhs)
    }

    /// Kernel over all atoms of `mu` (inactive rows zero) and all atoms of
    /// `nu`, read from the first `num_kernel_vars()` entries of `z`.
    fn kernel(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, z: &[f64]) -> Result<DiscreteKernel> {
        let mut q = vec![vec![0.0; self.nt]; mu.len()];
        for (a, &i) in self.active.iter().enumerate() {
            for j in 0..self.nt {
                q[i][j] = z[self.var(a, j)].max(0.0);
            }
        }
        DiscreteKernel::new(mu.dim(), points(mu), points(nu), q)
    }
}

fn verify_kernel(
    q: &DiscreteKernel,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: &Tolerances,
) -> Result<()> {
    let bound = 10.0 * tol.feas_tol.max(tol.tol) * scale_of(mu, nu);
    let t = kernels::transport_residual(q, mu, nu)?;
    let m = kernels::moment_residual(q, mu, tol.tol)?;
    if t > bound || m > bound {
        return Err(Error::NumericalBreakdown(format!(
            "kernel residuals (transport {t:e}, moment {m:e}) exceed {bound:e}"
        )));
    }
    Ok(())
}

/// Decide `μ ⪯phc ν` by searching for a moment-preserving kernel.
///
/// Source atoms with weight `≤ tol` carry no kernel row and no moment
/// constraint. When no source atom is active the order reduces to
/// `ba(ν) = 0`; if that holds while `ν` has mass, no kernel can exist and
/// [`Error::ZeroSource`] is returned.
pub fn check_phc(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: &Tolerances) -> Result<OrderVerdict> {
    check_dims(mu, nu)?;
    let start = Instant::now();
    let system = KernelSystem::new(mu, nu, tol.tol);

    if system.active.is_empty() {
        return zero_source_verdict(mu, nu, tol, start);
    }

    let (rows, rhs) = system.rows(mu, nu, 0);
    let (outcome, stats) = lp::feasibility_with_stats(rows, rhs, tol.lp())?;
    match outcome {
        Feasibility::Feasible(z) => {
            let q = system.kernel(mu, nu, &z)?;
            verify_kernel(&q, mu, nu, tol)?;
            Ok(OrderVerdict {
                holds: true,
                witness: Witness::Kernel(q),
                gap: 0.0,
                stats: VerdictStats {
                    pivots: stats.pivots,
                    runtime_ms: elapsed_ms(start),
                },
            })
        }
        Feasibility::Infeasible(y) => {
            let d = mu.dim();
            let nt = system.nt;
            let gradients = system
                .active
                .iter()
                .enumerate()
                .map(|(a, &i)| {
                    let w = mu.atoms()[i].w;
                    Point(y[nt + a * d..nt + (a + 1) * d].iter().map(|g| -g / w).collect())
                })
                .collect();
            let f = PolyhedralSupportFunction::new(d, gradients)?;
            let lip = f.lipschitz();
            if lip <= 0.0 {
                return Err(Error::NumericalBreakdown("Farkas vector yields a zero certificate".into()));
            }
            let f = f.scaled(1.0 / lip);
            support_failure(mu, nu, f, tol, stats, start)
        }
    }
}

fn support_failure(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    f: PolyhedralSupportFunction,
    tol: &Tolerances,
    stats: SolveStats,
    start: Instant,
) -> Result<OrderVerdict> {
    let gap = integrate(&f, mu) - integrate(&f, nu);
    if gap.is_nan() || gap < tol.cert_tol {
        return Err(Error::NumericalBreakdown(format!(
            "support-function certificate has gap {gap:e} below {:e}",
            tol.cert_tol
        )));
    }
    Ok(OrderVerdict {
        holds: false,
        witness: Witness::Support(f),
        gap,
        stats: VerdictStats {
            pivots: stats.pivots,
            runtime_ms: elapsed_ms(start),
        },
    })
}

fn zero_source_verdict(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: &Tolerances,
    start: Instant,
) -> Result<OrderVerdict> {
    if nu.weights().all(|w| w <= tol.tol) {
        let q = DiscreteKernel::zero(mu.dim(), points(mu), points(nu))?;
        return Ok(OrderVerdict {
            holds: true,
            witness: Witness::Kernel(q),
            gap: 0.0,
            stats: VerdictStats {
                pivots: 0,
                runtime_ms: elapsed_ms(start),
            },
        });
    }
    let ba = first_moment(nu);
    let r = ba.norm();
    if r <= tol.tol * scale_of(mu, nu) {
        return Err(Error::ZeroSource);
    }
    let f = PolyhedralSupportFunction::new(mu.dim(), vec![ba.scaled(-1.0 / r)])?;
    support_failure(mu, nu, f, tol, SolveStats::default(), start)
}

/// Decide `μ ⪯cx ν` by searching for a martingale coupling. The masses must
/// agree within `tol`.
///
/// A holding verdict carries the coupling as a kernel whose rows are the
/// conditional laws `π_i / m_i` (zero rows for atoms of weight `≤ tol`).
pub fn check_cx(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: &Tolerances) -> Result<OrderVerdict> {
    check_dims(mu, nu)?;
    let (mmu, mnu) = (mass(mu), mass(nu));
    if (mmu - mnu).abs() > tol.tol * mmu.max(mnu).max(1.0) {
        return Err(Error::MassMismatch {
            left: mmu,
            right: mnu,
        });
    }
    let start = Instant::now();
    let (ns, nt, d) = (mu.len(), nu.len(), mu.dim());
    let var = |i: usize, j: usize| i * nt + j;
    let nvars = ns * nt;
    let mut rows = Vec::with_capacity(ns + nt + ns * d);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for (i, a) in mu.atoms().iter().enumerate() {
        let mut row = vec![0.0; nvars];
        for j in 0..nt {
            row[var(i, j)] = 1.0;
        }
        rows.push(row);
        rhs.push(a.w);
    }
    for (j, t) in nu.atoms().iter().enumerate() {
        let mut row = vec![0.0; nvars];
        for i in 0..ns {
            row[var(i, j)] = 1.0;
        }
        rows.push(row);
        rhs.push(t.w);
    }
    for (i, a) in mu.atoms().iter().enumerate() {
        for c in 0..d {
            let mut row = vec![0.0; nvars];
            for (j, t) in nu.atoms().iter().enumerate() {
                row[var(i, j)] = t.x[c];
            }
            rows.push(row);
            rhs.push(a.w * a.x[c]);
        }
    }

    let (outcome, stats) = lp::feasibility_with_stats(rows, rhs, tol.lp())?;
    let stats_out = |pivots| VerdictStats {
        pivots,
        runtime_ms: elapsed_ms(start),
    };
    match outcome {
        Feasibility::Feasible(z) => {
            let q: Vec<Vec<f64>> = mu
                .atoms()
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    (0..nt)
                        .map(|j| if a.w > tol.tol { z[var(i, j)].max(0.0) / a.w } else { 0.0 })
                        .collect()
                })
                .collect();
            let q = DiscreteKernel::new(d, points(mu), points(nu), q)?;
            verify_kernel(&q, mu, nu, tol)?;
            verify_row_masses(&q, mu, tol)?;
            Ok(OrderVerdict {
                holds: true,
                witness: Witness::Kernel(q),
                gap: 0.0,
                stats: stats_out(stats.pivots),
            })
        }
        Feasibility::Infeasible(y) => {
            let pieces: Vec<AffinePiece> = (0..ns)
                .map(|i| AffinePiece {
                    b: Point(y[ns + nt + i * d..ns + nt + (i + 1) * d].iter().map(|g| -g).collect()),
                    a: -y[i],
                })
                .collect();
            let lip = pieces.iter().map(|p| p.b.norm()).fold(0.0, f64::max);
            if lip <= 0.0 {
                return Err(Error::NumericalBreakdown("Farkas vector yields an affine-free certificate".into()));
            }
            let pieces = pieces
                .into_iter()
                .map(|p| AffinePiece {
                    b: p.b.scaled(1.0 / lip),
                    a: p.a / lip,
                })
                .collect();
            let f = ConvexPolyhedralFunction::new(d, pieces)?;
            let gap = f.integrate(mu) - f.integrate(nu);
            if gap.is_nan() || gap < tol.cert_tol {
                return Err(Error::NumericalBreakdown(format!(
                    "convex certificate has gap {gap:e} below {:e}",
                    tol.cert_tol
                )));
            }
            Ok(OrderVerdict {
                holds: false,
                witness: Witness::Convex(f),
                gap,
                stats: stats_out(stats.pivots),
            })
        }
    }
}

fn verify_row_masses(q: &DiscreteKernel, mu: &DiscreteMeasure, tol: &Tolerances) -> Result<()> {
    for (i, a) in mu.atoms().iter().enumerate() {
        if a.w > tol.tol {
            let r = q.row_mass(i);
            if (r - 1.0).abs() > 10.0 * tol.feas_tol / a.w.min(1.0) {
                return Err(Error::NumericalBreakdown(format!("coupling row {i} has mass {r}")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarycentricCost {
    pub value: f64,
    pub norm: Norm,
    /// Set for the Euclidean norm, where the value is the deviation of the
    /// L1 optimizer rather than a solved optimum.
    pub upper_bound: bool,
    pub kernel: DiscreteKernel,
    pub stats: VerdictStats,
}

/// `inf_{q transports μ to ν} Σ_i m_i |x_i − ba(q^{x_i})|`.
///
/// Solved exactly as an LP for the L1 norm. For L2 the Euclidean deviation
/// of the L1 optimizer is returned and flagged as an upper bound; both norms
/// vanish on the same instances.
pub fn barycentric_cost(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    norm: Norm,
    tol: &Tolerances,
) -> Result<BarycentricCost> {
    check_dims(mu, nu)?;
    let start = Instant::now();
    let system = KernelSystem::new(mu, nu, tol.tol);
    if system.active.is_empty() {
        return Err(Error::ZeroMass);
    }
    let d = mu.dim();
    let na = system.active.len();
    let nk = system.num_kernel_vars();
    let extra = 2 * na * d;
    let (mut rows, rhs) = system.rows(mu, nu, extra);
    let mut objective = vec![0.0; nk + extra];
    for (a, &i) in system.active.iter().enumerate() {
        let w = mu.atoms()[i].w;
        for c in 0..d {
            let k = a * d + c;
            let row = &mut rows[system.nt + k];
            // Σ_j Q y − s⁺ + s⁻ = x
            row[nk + k] = -1.0;
            row[nk + na * d + k] = 1.0;
            objective[nk + k] = w;
            objective[nk + na * d + k] = w;
        }
    }
    let program = LinearProgram::new(objective, rows, rhs)?;
    let (outcome, stats) = lp::solve_with_stats(&program, tol.lp())?;
    let LpOutcome::Optimal { solution, .. } = outcome else {
        return Err(Error::NumericalBreakdown(format!(
            "barycentric cost program not optimal: {outcome:?}"
        )));
    };
    let kernel = system.kernel(mu, nu, &solution)?;
    let value = kernels::barycentric_deviation(&kernel, mu, norm)?;
    Ok(BarycentricCost {
        value,
        norm,
        upper_bound: norm == Norm::L2,
        kernel,
        stats: VerdictStats {
            pivots: stats.pivots,
            runtime_ms: elapsed_ms(start),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    /// No violation found (evidence only, not a proof).
    pub passed: bool,
    pub trials: usize,
    /// First support function with `∫f dμ > ∫f dν + slack`.
    pub violating: Option<PolyhedralSupportFunction>,
    pub violation: f64,
}

/// Test `∫f dμ ≤ ∫f dν` against `trials` random support functions with `k`
/// Gaussian gradients each. The slack is `tol · (1 + L·(∫|x|dμ + ∫|x|dν))`
/// with `L` the Lipschitz constant of `f`. A failure is a proof that
/// `μ ⪯phc ν` does not hold.
pub fn dual_probe(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    trials: usize,
    k: usize,
    seed: u64,
    tol: f64,
) -> Result<ProbeReport> {
    check_dims(mu, nu)?;
    let spread: f64 = mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .map(|a| a.w * a.x.norm())
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let f = random_support_function_with(&mut rng, mu.dim(), k);
        let violation = integrate(&f, mu) - integrate(&f, nu);
        if violation > tol * (1.0 + f.lipschitz() * spread) {
            return Ok(ProbeReport {
                passed: false,
                trials,
                violating: Some(f),
                violation,
            });
        }
    }
    Ok(ProbeReport {
        passed: true,
        trials,
        violating: None,
        violation: 0.0,
    })
}

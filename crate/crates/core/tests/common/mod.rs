//! Random instance generators shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod golden;
pub mod lp_oracle;

use phc_order::measures::{homogeneous_marginal, Atom, DiscreteMeasure, Point};
use rand::Rng;

pub fn uniform_point<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Point {
    Point((0..dim).map(|_| rng.random_range(-r..=r)).collect())
}

/// Up to `max_atoms` atoms with coordinates in `[-2, 2]` and weights in `[0, 2]`.
pub fn uniform_measure<R: Rng>(rng: &mut R, dim: usize, max_atoms: usize) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let atoms = (0..n)
        .map(|_| Atom {
            x: uniform_point(rng, dim, 2.0),
            w: rng.random_range(0.0..=2.0),
        })
        .collect();
    DiscreteMeasure::new(dim, atoms).unwrap()
}

pub fn random_dim<R: Rng>(rng: &mut R) -> usize {
    rng.random_range(1..=3)
}

/// `ν = Σ m_i q^{x_i}` for a random moment-preserving kernel `q`: each atom
/// is either rescaled along its ray or split into `c₁(x+v)` and `c₂(x−v)`
/// with weights `1/(2c₁)`, `1/(2c₂)`.
pub fn phc_image<R: Rng>(rng: &mut R, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let dim = mu.dim();
    let mut atoms = Vec::new();
    for a in mu.atoms() {
        if rng.random_bool(0.3) {
            let c = rng.random_range(0.25..=2.0);
            atoms.push(Atom {
                x: a.x.scaled(c),
                w: a.w / c,
            });
        } else {
            let v = uniform_point(rng, dim, 1.0);
            let c1 = rng.random_range(0.25..=2.0);
            let c2 = rng.random_range(0.25..=2.0);
            let plus: Vec<f64> = a.x.iter().zip(v.iter()).map(|(x, v)| c1 * (x + v)).collect();
            let minus: Vec<f64> = a.x.iter().zip(v.iter()).map(|(x, v)| c2 * (x - v)).collect();
            atoms.push(Atom {
                x: Point(plus),
                w: a.w / (2.0 * c1),
            });
            atoms.push(Atom {
                x: Point(minus),
                w: a.w / (2.0 * c2),
            });
        }
    }
    DiscreteMeasure::new(dim, atoms).unwrap()
}

/// Pair for which `μ ⪯phc ν` holds by construction, at most 6 atoms each.
pub fn holding_pair<R: Rng>(rng: &mut R, dim: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let mu = uniform_measure(rng, dim, 3);
    let nu = phc_image(rng, &mu);
    (mu, nu)
}

/// A holding pair with one target weight nudged, which typically breaks
/// the order by a small margin.
pub fn perturbed_pair<R: Rng>(rng: &mut R, dim: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let (mu, nu) = holding_pair(rng, dim);
    let k = rng.random_range(0..nu.len());
    let delta = rng.random_range(0.01..=0.2) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let atoms = nu
        .atoms()
        .iter()
        .enumerate()
        .map(|(j, a)| Atom {
            x: a.x.clone(),
            w: if j == k { (a.w * (1.0 + delta)).max(0.0) } else { a.w },
        })
        .collect();
    (mu, DiscreteMeasure::new(dim, atoms).unwrap())
}

/// The instance suite: generic uniform pairs, constructed holding pairs and
/// perturbed pairs in rotation.
pub fn instance_pair<R: Rng>(rng: &mut R, k: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let dim = random_dim(rng);
    match k % 3 {
        0 => (uniform_measure(rng, dim, 6), uniform_measure(rng, dim, 6)),
        1 => holding_pair(rng, dim),
        _ => perturbed_pair(rng, dim),
    }
}

/// Same homogeneous marginal as `mu`: each sphere direction's radial mass is
/// redistributed over one or two new radii, and origin mass may be added.
pub fn same_marginal<R: Rng>(rng: &mut R, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let dim = mu.dim();
    let marginal = homogeneous_marginal(mu, 1e-12);
    let mut atoms = Vec::new();
    for a in marginal.atoms() {
        let parts = rng.random_range(1..=2);
        let mut left = a.w;
        for p in 0..parts {
            let share = if p + 1 == parts { left } else { left * rng.random_range(0.2..=0.8) };
            left -= share;
            let r = rng.random_range(0.3..=3.0);
            atoms.push(Atom {
                x: a.x.scaled(r),
                w: share / r,
            });
        }
    }
    if rng.random_bool(0.3) {
        atoms.push(Atom {
            x: Point::zeros(dim),
            w: rng.random_range(0.1..=1.0),
        });
    }
    DiscreteMeasure::new(dim, atoms).unwrap()
}

/// Mean-preserving spread of `mu` with equal total mass, so `μ ⪯cx ν`.
pub fn martingale_image<R: Rng>(rng: &mut R, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let dim = mu.dim();
    let mut atoms = Vec::new();
    for a in mu.atoms() {
        if rng.random_bool(0.25) {
            atoms.push(a.clone());
            continue;
        }
        let v = uniform_point(rng, dim, 1.0);
        let p = rng.random_range(0.2..=0.8);
        // p·(x + (1−p)v) + (1−p)·(x − p v) = x
        let up: Vec<f64> = a.x.iter().zip(v.iter()).map(|(x, v)| x + (1.0 - p) * v).collect();
        let down: Vec<f64> = a.x.iter().zip(v.iter()).map(|(x, v)| x - p * v).collect();
        atoms.push(Atom { x: Point(up), w: a.w * p });
        atoms.push(Atom {
            x: Point(down),
            w: a.w * (1.0 - p),
        });
    }
    DiscreteMeasure::new(dim, atoms).unwrap()
}

/// Rescale `nu` to the mass of `mu`.
pub fn match_mass(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> DiscreteMeasure {
    let (a, b) = (phc_order::measures::mass(mu), phc_order::measures::mass(nu));
    nu.scaled(a / b)
}

/// Measure with positive mass off the origin; sometimes includes an atom at
/// the origin.
pub fn off_origin_measure<R: Rng>(rng: &mut R, dim: usize) -> DiscreteMeasure {
    loop {
        let m = uniform_measure(rng, dim, 6);
        let mut atoms = m.into_atoms();
        if rng.random_bool(0.3) {
            atoms.push(Atom {
                x: Point::zeros(dim),
                w: rng.random_range(0.1..=1.0),
            });
        }
        let m = DiscreteMeasure::new(dim, atoms).unwrap();
        if !homogeneous_marginal(&m, 1e-9).is_empty() {
            return m;
        }
    }
}

/// Scale used for relative tolerances: largest coordinate or mass, at least one.
pub fn scale(ms: &[&DiscreteMeasure]) -> f64 {
    ms.iter()
        .flat_map(|m| {
            m.atoms()
                .iter()
                .flat_map(|a| a.x.iter().map(|v| v.abs()).chain([a.w]))
                .chain([phc_order::measures::mass(m)])
                .collect::<Vec<_>>()
        })
        .fold(1.0, f64::max)
}

//! r-lattices drawn from the quadrature nodes and their disjoint cells.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum_by, rng};
use crate::spectral::{Point, SpectralModel};

const TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Lattice {
    pub r: f64,
    #[serde(skip)]
    pub points: Vec<Point>,
    /// Index of each lattice point among the model's quadrature nodes.
    pub node_ids: Vec<usize>,
    /// Largest number of lattice points within distance `r` of a node.
    pub multiplicity: usize,
    /// Set when `r` exceeds the diameter and a single point remains.
    pub degenerate: bool,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellCover {
    /// Lattice index owning each quadrature node.
    pub assignment: Vec<usize>,
    pub measures: Vec<f64>,
}

/// Monotone stand-in for `-distance` that avoids `acos` on the sphere.
fn closeness(p: &Point, q: &Point, model: &SpectralModel) -> f64 {
    match (p, q) {
        (Point::Sphere(a), Point::Sphere(b)) => a[0] * b[0] + a[1] * b[1] + a[2] * b[2],
        _ => -model.distance(p, q),
    }
}

fn closeness_of_distance(model: &SpectralModel, d: f64) -> f64 {
    if matches!(model.nodes().first(), Some(Point::Sphere(_))) {
        d.cos()
    } else {
        -d
    }
}

/// Greedy farthest-point selection: add the node farthest from the current set
/// until every node is within `r/2`.
pub fn build_lattice(model: &SpectralModel, r: f64, seed: u64) -> Result<Lattice> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("r = {r} must be positive")));
    }
    let nodes = model.nodes();
    let first = rng(seed).gen_range(0..nodes.len());
    let degenerate = r > model.diameter();
    let mut ids = vec![first];
    if !degenerate {
        let stop = closeness_of_distance(model, 0.5 * r * (1.0 + TOL));
        let mut best: Vec<f64> = nodes.iter().map(|p| closeness(p, &nodes[first], model)).collect();
        loop {
            let mut far = 0;
            for (i, c) in best.iter().enumerate() {
                if *c < best[far] {
                    far = i;
                }
            }
            if best[far] >= stop {
                break;
            }
            ids.push(far);
            let p = nodes[far];
            for (c, q) in best.iter_mut().zip(nodes) {
                let v = closeness(q, &p, model);
                if v > *c {
                    *c = v;
                }
            }
        }
    }
    let points: Vec<Point> = ids.iter().map(|&i| nodes[i]).collect();
    let near = closeness_of_distance(model, r * (1.0 + TOL));
    let multiplicity = nodes
        .iter()
        .map(|q| points.iter().filter(|p| closeness(q, p, model) >= near).count())
        .max()
        .unwrap_or(0);
    Ok(Lattice {
        r,
        points,
        node_ids: ids,
        multiplicity,
        degenerate,
    })
}

/// Nearest-point cells, ties to the lowest lattice index.
pub fn build_cells(model: &SpectralModel, lattice: &Lattice) -> CellCover {
    let assignment: Vec<usize> = model
        .nodes()
        .iter()
        .map(|q| {
            let mut best = 0;
            let mut bc = f64::NEG_INFINITY;
            for (k, p) in lattice.points.iter().enumerate() {
                let c = closeness(q, p, model);
                if c > bc {
                    bc = c;
                    best = k;
                }
            }
            best
        })
        .collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); lattice.len()];
    for (i, &k) in assignment.iter().enumerate() {
        members[k].push(i);
    }
    let w = model.weights();
    let measures = members
        .iter()
        .map(|m| pairwise_sum_by(m.len(), &|i| w[m[i]]))
        .collect();
    CellCover { assignment, measures }
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeDiagnostics {
    pub points: usize,
    pub min_separation: f64,
    pub covering_radius: f64,
    pub multiplicity: usize,
    pub max_cell_radius: f64,
    /// `min |U_k| / r^n` and `max |U_k| / r^n`.
    pub c1: f64,
    pub c2: f64,
    pub measure_ratio: f64,
    pub measure_sum: f64,
    /// Fraction of nodes in `B(x_k, r/4)` that belong to cell `k`.
    pub inner_ball_fraction: f64,
}

/// Exhaustive checks of the lattice and cell invariants.
pub fn diagnose(model: &SpectralModel, lattice: &Lattice, cells: &CellCover) -> LatticeDiagnostics {
    let pts = &lattice.points;
    let mut min_sep = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            min_sep = min_sep.min(model.distance(&pts[i], &pts[j]));
        }
    }
    let nodes = model.nodes();
    let mut cover = 0.0f64;
    let mut cell_radius = 0.0f64;
    let mut inside = 0usize;
    let mut in_ball = 0usize;
    for (i, q) in nodes.iter().enumerate() {
        let mut dmin = f64::INFINITY;
        for (k, p) in pts.iter().enumerate() {
            let d = model.distance(q, p);
            dmin = dmin.min(d);
            if d <= lattice.r / 4.0 {
                in_ball += 1;
                if cells.assignment[i] == k {
                    inside += 1;
                }
            }
        }
        cover = cover.max(dmin);
        cell_radius = cell_radius.max(model.distance(q, &pts[cells.assignment[i]]));
    }
    let rn = lattice.r.powi(model.dimension() as i32);
    let mn = cells.measures.iter().copied().fold(f64::INFINITY, f64::min);
    let mx = cells.measures.iter().copied().fold(0.0, f64::max);
    LatticeDiagnostics {
        points: pts.len(),
        min_separation: min_sep,
        covering_radius: cover,
        multiplicity: lattice.multiplicity,
        max_cell_radius: cell_radius,
        c1: mn / rn,
        c2: mx / rn,
        measure_ratio: mx / mn,
        measure_sum: pairwise_sum_by(cells.measures.len(), &|k| cells.measures[k]),
        inner_ball_fraction: if in_ball == 0 { 1.0 } else { inside as f64 / in_ball as f64 },
    }
}

fn coords(p: &Point) -> Vec<f64> {
    match p {
        Point::Circle(t) | Point::Line(t) => vec![*t],
        Point::Sphere(v) => v.to_vec(),
    }
}

/// CSV with point coordinates and cell measures.
pub fn lattice_csv(lattice: &Lattice, cells: &CellCover) -> String {
    let mut s = String::new();
    let dim = lattice.points.first().map_or(1, |p| coords(p).len());
    let head: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let _ = writeln!(s, "{},measure", head.join(","));
    for (p, m) in lattice.points.iter().zip(&cells.measures) {
        let c: Vec<String> = coords(p).iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(s, "{},{m:.17e}", c.join(","));
    }
    s
}

//! Repeater geometries in the plane and their pairwise distances.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Geometry tag with the parameters the deployment was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum DeploymentKind {
    Pair { distance: f64 },
    /// Equally spaced on a circle around the source. Repeater 0 sits at the
    /// top of the circle and indices advance clockwise.
    Ring { count: usize, radius: f64 },
    /// Square cell `[0, cell_width]^2` with repeaters on a lattice of pitch
    /// `spacing`, boundary included.
    Grid { cell_width: f64, spacing: f64 },
    /// `cells` grid cells side by side along the x axis, shared boundary
    /// repeaters kept once.
    Multicell { cells: usize, cell_width: f64, spacing: f64 },
    Custom,
}

impl DeploymentKind {
    pub fn name(&self) -> &'static str {
        match self {
            DeploymentKind::Pair { .. } => "pair",
            DeploymentKind::Ring { .. } => "ring",
            DeploymentKind::Grid { .. } => "grid",
            DeploymentKind::Multicell { .. } => "multicell",
            DeploymentKind::Custom => "custom",
        }
    }
}

/// Repeater positions plus the source location.
///
/// Constructors guarantee at least one repeater, finite coordinates and
/// pairwise-distinct positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    positions: Vec<Point>,
    source: Point,
    kind: DeploymentKind,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {value}")))
    }
}

/// Number of lattice points per axis; the epsilon absorbs `W / s` landing a
/// hair below an integer.
fn lattice_points(cell_width: f64, spacing: f64) -> usize {
    (cell_width / spacing * (1.0 + 1e-12)).floor() as usize + 1
}

impl Deployment {
    pub fn pair(distance: f64) -> Result<Self> {
        positive("pair distance", distance)?;
        Ok(Self {
            positions: vec![Point::new(0.0, 0.0), Point::new(distance, 0.0)],
            source: Point::new(distance / 2.0, 0.0),
            kind: DeploymentKind::Pair { distance },
        })
    }

    /// Odd ring used by the stability analysis.
    pub fn ring(count: usize, radius: f64) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidInput(format!("ring needs at least 3 repeaters, got {count}")));
        }
        if count.is_multiple_of(2) {
            return Err(Error::Unsupported(format!(
                "stability ring needs an odd repeater count, got {count}; use ring_even"
            )));
        }
        Self::ring_unchecked(count, radius)
    }

    /// Even ring used by the coverage analysis.
    pub fn ring_even(count: usize, radius: f64) -> Result<Self> {
        if count < 2 || !count.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "even ring needs an even repeater count >= 2, got {count}"
            )));
        }
        Self::ring_unchecked(count, radius)
    }

    fn ring_unchecked(count: usize, radius: f64) -> Result<Self> {
        positive("ring radius", radius)?;
        let positions = (0..count)
            .map(|n| {
                let angle = PI / 2.0 - 2.0 * PI * n as f64 / count as f64;
                Point::new(radius * angle.cos(), radius * angle.sin())
            })
            .collect();
        Ok(Self {
            positions,
            source: Point::new(0.0, 0.0),
            kind: DeploymentKind::Ring { count, radius },
        })
    }

    pub fn grid(cell_width: f64, spacing: f64) -> Result<Self> {
        positive("cell width", cell_width)?;
        positive("grid spacing", spacing)?;
        if spacing > cell_width {
            return Err(Error::InvalidInput(format!(
                "grid spacing {spacing} exceeds cell width {cell_width}"
            )));
        }
        let m = lattice_points(cell_width, spacing);
        let positions = (0..m)
            .flat_map(|i| (0..m).map(move |j| Point::new(i as f64 * spacing, j as f64 * spacing)))
            .collect();
        Ok(Self {
            positions,
            source: Point::new(cell_width / 2.0, cell_width / 2.0),
            kind: DeploymentKind::Grid { cell_width, spacing },
        })
    }

    pub fn multicell(cells: usize, cell_width: f64, spacing: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidInput("multicell needs at least one cell".into()));
        }
        let cell = Self::grid(cell_width, spacing)?;
        if cells == 1 {
            return Ok(Self {
                kind: DeploymentKind::Multicell { cells, cell_width, spacing },
                ..cell
            });
        }
        let merge_tol = 1e-9 * cell_width;
        let mut positions: Vec<Point> = Vec::with_capacity(cells * cell.positions.len());
        for c in 0..cells {
            let offset = c as f64 * cell_width;
            for p in &cell.positions {
                let q = Point::new(p.x + offset, p.y);
                // only the previous cell's right edge can coincide with this one
                let duplicate = c > 0
                    && p.x <= merge_tol
                    && positions
                        .iter()
                        .rev()
                        .take(cell.positions.len())
                        .any(|r| (r.x - q.x).abs() <= merge_tol && (r.y - q.y).abs() <= merge_tol);
                if !duplicate {
                    positions.push(q);
                }
            }
        }
        Ok(Self {
            positions,
            source: Point::new(cells as f64 * cell_width / 2.0, cell_width / 2.0),
            kind: DeploymentKind::Multicell { cells, cell_width, spacing },
        })
    }

    pub fn custom(positions: Vec<Point>, source: Point) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput("deployment needs at least one repeater".into()));
        }
        if let Some(p) = positions
            .iter()
            .chain(std::iter::once(&source))
            .find(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidInput(format!("non-finite coordinate ({}, {})", p.x, p.y)));
        }
        let dep = Self { positions, source, kind: DeploymentKind::Custom };
        dep.distance_matrix()?;
        Ok(dep)
    }

    /// Returns a copy with `extra` repeaters appended; the result is tagged
    /// as a custom deployment.
    pub fn with_additional(&self, extra: &[Point]) -> Result<Self> {
        let mut positions = self.positions.clone();
        positions.extend_from_slice(extra);
        Self::custom(positions, self.source)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn source(&self) -> Point {
        self.source
    }

    pub fn kind(&self) -> &DeploymentKind {
        &self.kind
    }

    /// `Some((count, radius))` when this is an odd ring.
    pub fn odd_ring(&self) -> Option<(usize, f64)> {
        match self.kind {
            DeploymentKind::Ring { count, radius } if !count.is_multiple_of(2) => Some((count, radius)),
            _ => None,
        }
    }

    pub fn distance_matrix(&self) -> Result<DistanceMatrix> {
        DistanceMatrix::from_points(&self.positions)
    }
}

/// Symmetric pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[Point]) -> Result<Self> {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let dist = points[i].distance(&points[j]);
                if !(dist > 0.0) {
                    return Err(Error::DegenerateDeployment(i, j));
                }
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
        Ok(Self { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_off_diagonal(&self) -> Option<f64> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_symmetric_zero_diag(dm: &DistanceMatrix) {
        for i in 0..dm.len() {
            assert_eq!(dm.get(i, i), 0.0);
            for j in 0..dm.len() {
                assert_eq!(dm.get(i, j), dm.get(j, i));
            }
        }
    }

    #[test]
    fn pair_distance_matrix() {
        let dm = Deployment::pair(1000.0).unwrap().distance_matrix().unwrap();
        assert_eq!(dm.row(0), &[0.0, 1000.0]);
        assert_eq!(dm.row(1), &[1000.0, 0.0]);
        let dm = Deployment::pair(1.0).unwrap().distance_matrix().unwrap();
        assert_eq!(dm.get(0, 1), 1.0);
        assert!(Deployment::pair(0.0).is_err());
        assert!(Deployment::pair(-5.0).is_err());
    }

    #[test]
    fn ring_of_three_is_equilateral() {
        let dm = Deployment::ring(3, 1.0).unwrap().distance_matrix().unwrap();
        let side = 2.0 * (PI / 3.0).sin();
        assert!((side - 1.7320508).abs() < 1e-7);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((dm.get(i, j) - side).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_chords_follow_hop_count() {
        let (n, r) = (15usize, 1000.0);
        let dep = Deployment::ring(n, r).unwrap();
        let dm = dep.distance_matrix().unwrap();
        assert!((dm.get(0, 1) - 415.823).abs() < 1e-3);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = i.abs_diff(j).min(n - i.abs_diff(j));
                let want = 2.0 * r * (k as f64 * PI / n as f64).sin();
                assert!((dm.get(i, j) - want).abs() < 1e-9, "({i},{j})");
            }
        }
        for p in dep.positions() {
            assert!((p.distance(&dep.source()) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn ring_starts_at_top_and_runs_clockwise() {
        let dep = Deployment::ring(5, 1.0).unwrap();
        let p0 = dep.positions()[0];
        let p1 = dep.positions()[1];
        assert!(p0.x.abs() < 1e-15 && (p0.y - 1.0).abs() < 1e-15);
        assert!(p1.x > 0.0);
    }

    #[test]
    fn ring_parity_errors() {
        assert!(matches!(Deployment::ring(4, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(Deployment::ring(1, 1.0), Err(Error::InvalidInput(_))));
        assert!(Deployment::ring(3, 0.0).is_err());
        assert!(Deployment::ring_even(3, 1.0).is_err());
        assert!(Deployment::ring_even(0, 1.0).is_err());
    }

    #[test]
    fn even_rings() {
        let dm = Deployment::ring_even(2, 1000.0).unwrap().distance_matrix().unwrap();
        assert!((dm.get(0, 1) - 2000.0).abs() < 1e-9);
        let dep = Deployment::ring_even(4, 1.0).unwrap();
        let dm = dep.distance_matrix().unwrap();
        assert!((dm.get(0, 1) - 2f64.sqrt()).abs() < 1e-12);
        for p in dep.positions() {
            assert!((p.distance(&dep.source()) - 1.0).abs() < 1e-12);
        }
        assert!(dep.odd_ring().is_none());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(Deployment::grid(2000.0, 200.0).unwrap().len(), 121);
        assert_eq!(Deployment::grid(2000.0, 2000.0).unwrap().len(), 4);
        let dep = Deployment::grid(2000.0, 1000.0).unwrap();
        assert_eq!(dep.len(), 9);
        let dm = dep.distance_matrix().unwrap();
        assert!((dm.min_off_diagonal().unwrap() - 1000.0).abs() < 1e-12);
        assert!(Deployment::grid(100.0, 200.0).is_err());
        // 0.3 / 0.1 evaluates just below 3
        assert_eq!(Deployment::grid(0.3, 0.1).unwrap().len(), 16);
    }

    #[test]
    fn grid_single_cell_diagonal() {
        let dm = Deployment::grid(2000.0, 2000.0).unwrap().distance_matrix().unwrap();
        assert!((dm.max_distance() - 2000.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn multicell_counts_and_dedup() {
        let one = Deployment::multicell(1, 2000.0, 200.0).unwrap();
        assert_eq!(one.positions(), Deployment::grid(2000.0, 200.0).unwrap().positions());
        let two = Deployment::multicell(2, 2000.0, 200.0).unwrap();
        assert_eq!(two.len(), 11 * 21);
        two.distance_matrix().unwrap();
        let four = Deployment::multicell(4, 2000.0, 500.0).unwrap();
        assert_eq!(four.len(), 5 * 17);
        // spacing not dividing the width: nothing to merge
        let odd = Deployment::multicell(2, 1000.0, 300.0).unwrap();
        assert_eq!(odd.len(), 2 * 16);
        assert!(Deployment::multicell(0, 1000.0, 100.0).is_err());
    }

    #[test]
    fn custom_validation() {
        assert!(Deployment::custom(vec![], Point::new(0.0, 0.0)).is_err());
        let dup = vec![Point::new(1.0, 1.0), Point::new(2.0, 2.0), Point::new(1.0, 1.0)];
        assert_eq!(
            Deployment::custom(dup, Point::new(0.0, 0.0)).unwrap_err(),
            Error::DegenerateDeployment(0, 2)
        );
        assert!(Deployment::custom(vec![Point::new(f64::NAN, 0.0)], Point::new(0.0, 0.0)).is_err());
        let single = Deployment::custom(vec![Point::new(3.0, 4.0)], Point::new(0.0, 0.0)).unwrap();
        assert_eq!(single.distance_matrix().unwrap().len(), 1);
    }

    #[test]
    fn ring_is_vertex_transitive() {
        for n in [3usize, 7, 15, 21] {
            let dm = Deployment::ring(n, 500.0).unwrap().distance_matrix().unwrap();
            let sorted = |i: usize| {
                let mut r = dm.row(i).to_vec();
                r.sort_by(f64::total_cmp);
                r
            };
            let first = sorted(0);
            for i in 1..n {
                for (a, b) in sorted(i).iter().zip(&first) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn distances_invariant_under_rigid_motion(
            pts in proptest::collection::vec((-1000.0f64..1000.0, -1000.0f64..1000.0), 2..12),
            theta in 0.0f64..(2.0 * PI),
            tx in -1e4f64..1e4,
            ty in -1e4f64..1e4,
        ) {
            let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            prop_assume!(DistanceMatrix::from_points(&pts).is_ok());
            let moved: Vec<Point> = pts
                .iter()
                .map(|p| Point::new(
                    p.x * theta.cos() - p.y * theta.sin() + tx,
                    p.x * theta.sin() + p.y * theta.cos() + ty,
                ))
                .collect();
            let a = DistanceMatrix::from_points(&pts).unwrap();
            let b = DistanceMatrix::from_points(&moved).unwrap();
            assert_symmetric_zero_diag(&a);
            assert_symmetric_zero_diag(&b);
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    prop_assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-8);
                }
            }
        }
    }
}

//! Finite quasi-metric measure spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite set of points with a quasi-metric and point masses.
///
/// The quasi-triangle constant and the doubling constant are computed once
/// at construction by exhaustive scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceFile", into = "SpaceFile")]
pub struct FiniteSpace {
    n: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    points: Option<Vec<[f64; 2]>>,
    quasi_constant: f64,
    doubling: f64,
}

/// On-disk form. Either `distances` or `points` (with `metric`) must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl TryFrom<SpaceFile> for FiniteSpace {
    type Error = Error;

    fn try_from(file: SpaceFile) -> Result<Self> {
        let n = match (&file.distances, &file.points) {
            (Some(d), _) => d.len(),
            (None, Some(p)) => p.len(),
            (None, None) => return Err(Error::Input("space needs distances or points".into())),
        };
        let mass = file.masses.unwrap_or_else(|| vec![1.0; n]);
        match file.distances {
            Some(rows) => {
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Input("distance table must be square".into()));
                }
                let dist = rows.into_iter().flatten().collect();
                Self::new(dist, mass, file.points)
            }
            None => {
                let points = file.points.unwrap();
                let metric = file.metric.as_deref().unwrap_or("linf");
                let d: fn(&[f64; 2], &[f64; 2]) -> f64 = match metric {
                    "linf" => linf,
                    "euclidean" => euclidean,
                    other => return Err(Error::Input(format!("unknown metric {other}"))),
                };
                let dist = points
                    .iter()
                    .flat_map(|a| points.iter().map(move |b| d(a, b)))
                    .collect();
                Self::new(dist, mass, Some(points))
            }
        }
    }
}

impl From<FiniteSpace> for SpaceFile {
    fn from(s: FiniteSpace) -> Self {
        SpaceFile {
            distances: Some(s.dist.chunks(s.n).map(|r| r.to_vec()).collect()),
            masses: Some(s.mass),
            points: s.points,
            metric: None,
        }
    }
}

fn linf(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

fn euclidean(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl FiniteSpace {
    /// `dist` is the row-major `n×n` table.
    pub fn new(dist: Vec<f64>, mass: Vec<f64>, points: Option<Vec<[f64; 2]>>) -> Result<Self> {
        let n = mass.len();
        if n == 0 {
            return Err(Error::Input("space must have at least one point".into()));
        }
        if dist.len() != n * n {
            return Err(Error::Input(format!("expected {} distances, got {}", n * n, dist.len())));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Input("point masses must be positive and finite".into()));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::Input(format!("nonzero self-distance at point {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if a != b {
                    return Err(Error::Input(format!("distance not symmetric at ({i},{j})")));
                }
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Input(format!("points {i} and {j} are not separated")));
                }
            }
        }
        let mut space = Self {
            n,
            dist,
            mass,
            points,
            quasi_constant: 1.0,
            doubling: 1.0,
        };
        space.quasi_constant = space.scan_quasi_constant();
        space.doubling = space.scan_doubling();
        Ok(space)
    }

    /// `n` equally spaced points on the unit circle with arc-length distance.
    pub fn circle(n: usize) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        let angle = |i: usize| tau * i as f64 / n as f64;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = (angle(i) - angle(j)).abs();
                dist[i * n + j] = d.min(tau - d);
            }
        }
        let points = (0..n).map(|i| [angle(i).cos(), angle(i).sin()]).collect();
        Self::new(dist, vec![1.0; n], Some(points))
    }

    /// Uniform random points in the unit square with the ℓ∞ distance.
    pub fn random_plane(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        Self::try_from(SpaceFile {
            points: Some(points),
            metric: Some("linf".into()),
            distances: None,
            masses: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn points(&self) -> Option<&[[f64; 2]]> {
        self.points.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn quasi_constant(&self) -> f64 {
        self.quasi_constant
    }

    pub fn doubling_constant(&self) -> f64 {
        self.doubling
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.min(self.dist(i, j));
            }
        }
        m
    }

    /// Open ball `{y : ρ(x,y) < r}`.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&y| self.dist(x, y) < r).collect()
    }

    pub fn measure(&self, members: &[usize]) -> f64 {
        members.iter().map(|&i| self.mass[i]).sum()
    }

    fn scan_quasi_constant(&self) -> f64 {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|x| {
                let mut k = 1.0f64;
                for z in 0..n {
                    if z == x {
                        continue;
                    }
                    let dxz = self.dist(x, z);
                    for y in 0..n {
                        if y == x || y == z {
                            continue;
                        }
                        k = k.max(dxz / (self.dist(x, y) + self.dist(y, z)));
                    }
                }
                k
            })
            .reduce(|| 1.0, f64::max)
    }

    /// `max μ(B(x,2r))/μ(B(x,r))` over centers and radii up to the diameter.
    /// Both ball masses are step functions of `r`, so the supremum is
    /// attained just to the right of some `d` or `d/2`, `d` a distance from `x`.
    fn scan_doubling(&self) -> f64 {
        let n = self.n;
        let diam = self.diameter();
        (0..n)
            .into_par_iter()
            .map(|x| {
                let mut by_dist: Vec<(f64, f64)> =
                    (0..n).map(|y| (self.dist(x, y), self.mass[y])).collect();
                by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut cumulative = Vec::with_capacity(n);
                let mut acc = 0.0;
                for &(_, m) in &by_dist {
                    acc += m;
                    cumulative.push(acc);
                }
                // mass of the closed ball of radius c
                let closed = |c: f64| {
                    let k = by_dist.partition_point(|e| e.0 <= c);
                    if k == 0 {
                        0.0
                    } else {
                        cumulative[k - 1]
                    }
                };
                let mut worst = 1.0f64;
                for &(d, _) in &by_dist {
                    for c in [d, 0.5 * d] {
                        if c < diam {
                            worst = worst.max(closed(2.0 * c) / closed(c));
                        }
                    }
                }
                worst
            })
            .reduce(|| 1.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_spaces_have_unit_quasi_constant() {
        // up to rounding in the arc-length table
        assert!(FiniteSpace::circle(16).unwrap().quasi_constant() - 1.0 < 1e-12);
        assert!(FiniteSpace::random_plane(40, 3).unwrap().quasi_constant() - 1.0 < 1e-12);
    }

    #[test]
    fn squared_distance_is_a_quasi_metric_with_k_two() {
        // ρ = |x−y|² on {0, 1, 2}: ρ(0,2) = 4 = 2(ρ(0,1) + ρ(1,2))
        let xs = [0.0f64, 1.0, 2.0];
        let dist = xs
            .iter()
            .flat_map(|a| xs.iter().map(move |b| (a - b).powi(2)))
            .collect();
        let s = FiniteSpace::new(dist, vec![1.0; 3], None).unwrap();
        assert_eq!(s.quasi_constant(), 2.0);
    }

    #[test]
    fn doubling_constant_of_two_points() {
        let s = FiniteSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 3.0], None).unwrap();
        // B(0, 1/2+) = {0}, B(0, 1+) = both: ratio 4
        assert_eq!(s.doubling_constant(), 4.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FiniteSpace::new(vec![0.0, 1.0, 2.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(FiniteSpace::new(vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(FiniteSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 0.0], None).is_err());
        assert!(FiniteSpace::new(vec![], vec![], None).is_err());
    }

    #[test]
    fn file_round_trip() {
        let s = FiniteSpace::random_plane(10, 1).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: FiniteSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        let from_points: FiniteSpace =
            serde_json::from_str(r#"{"points":[[0,0],[1,0],[0,2]],"metric":"euclidean"}"#).unwrap();
        assert_eq!(from_points.dist(1, 2), 5f64.sqrt());
    }

    #[test]
    fn balls_are_open() {
        let s = FiniteSpace::circle(8).unwrap();
        let step = std::f64::consts::TAU / 8.0;
        assert_eq!(s.ball(0, step), vec![0]);
        assert_eq!(s.ball(0, step * 1.0001).len(), 3);
    }
}

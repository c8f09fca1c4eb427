//! Seeded two-weight instances: a dyadic grid, a pair of weights resolved by
//! its finest generation, and a sparse family.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bump::{WeightPair, DEFAULT_FLOOR};
use crate::cells::Layout;
use crate::error::{parameter, Error, Result};
use crate::grid::{finite_grid, line_grid, DyadicGrid};
use crate::space::FiniteSpace;
use crate::sparse::{random_family, SparseFamily};
use crate::step::{Interval, StepFunction};

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub grid: DyadicGrid,
    pub layout: Layout,
    /// The weights as step functions (line instances only).
    pub pair: Option<WeightPair>,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub family: SparseFamily,
}

/// Borrowed view of the data a sparse two-weight problem needs.
#[derive(Debug, Clone, Copy)]
pub struct TwoWeight<'a> {
    pub layout: &'a Layout,
    pub u: &'a [f64],
    pub sigma: &'a [f64],
    pub family: &'a SparseFamily,
}

impl<'a> TwoWeight<'a> {
    pub fn swapped(self) -> Self {
        Self {
            u: self.sigma,
            sigma: self.u,
            ..self
        }
    }
}

/// `exp(osc·U)` with `U` uniform on `[-1, 1]`, one value per cell of length
/// `2^-depth` on `[0, 1)`.
pub fn random_weight(rng: &mut ChaCha8Rng, depth: i32, osc: f64) -> Result<StepFunction> {
    let n = 1usize << depth;
    let edges: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let values: Vec<f64> = (0..n).map(|_| (osc * rng.gen_range(-1.0..=1.0)).exp()).collect();
    StepFunction::from_cells(&edges, &values)
}

impl Instance {
    /// Line instance on `[0, 1)` with a grid of `depth` generations below
    /// the unit interval, weights of oscillation `osc` constant on the
    /// cells one generation above the finest, and a random sparse family.
    pub fn random(seed: u64, depth: i32, osc: f64) -> Result<Self> {
        if !(1..=12).contains(&depth) {
            return Err(parameter(format!("depth must lie in 1..=12, got {depth}")));
        }
        if !(osc >= 0.0 && osc.is_finite()) {
            return Err(parameter(format!("oscillation must be nonnegative, got {osc}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = Interval { lo: 0.0, hi: 1.0 };
        let grid = line_grid(0.0, 0, depth, window)?;
        let weight_depth = (depth - 1).max(0);
        let u = random_weight(&mut rng, weight_depth, osc)?;
        let sigma = random_weight(&mut rng, weight_depth, osc)?;
        let pair = WeightPair::new(u, sigma, window, DEFAULT_FLOOR)?;
        let family = random_family(&grid, rng.gen(), 0.7, 2)?;
        Self::line(seed, grid, pair, family)
    }

    pub fn line(seed: u64, grid: DyadicGrid, pair: WeightPair, family: SparseFamily) -> Result<Self> {
        family.check(&grid)?;
        let layout = Layout::new(&grid, &[&pair.u, &pair.sigma])?;
        let u = layout.sample(&pair.u);
        let sigma = layout.sample(&pair.sigma);
        Ok(Self {
            seed,
            grid,
            layout,
            pair: Some(pair),
            u,
            sigma,
            family,
        })
    }

    /// Instance on a random planar point set with per-point weights.
    pub fn random_finite(seed: u64, points: usize, osc: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = Arc::new(FiniteSpace::random_plane(points, rng.gen())?);
        let grid = finite_grid(space, None, rng.gen())?;
        let mut draw = |_| (osc * rng.gen_range(-1.0..=1.0f64)).exp();
        let u: Vec<f64> = (0..points).map(&mut draw).collect();
        let sigma: Vec<f64> = (0..points).map(&mut draw).collect();
        let family = random_family(&grid, seed ^ 0x5eed, 0.7, 2)?;
        Self::finite(seed, grid, &u, &sigma, family)
    }

    pub fn finite(seed: u64, grid: DyadicGrid, u: &[f64], sigma: &[f64], family: SparseFamily) -> Result<Self> {
        family.check(&grid)?;
        let layout = Layout::new(&grid, &[])?;
        if u.len() != layout.len() || sigma.len() != layout.len() {
            return Err(Error::Input("one weight value per point is required".into()));
        }
        Ok(Self {
            seed,
            u: layout.from_points(u),
            sigma: layout.from_points(sigma),
            grid,
            layout,
            pair: None,
            family,
        })
    }

    pub fn size(&self) -> usize {
        self.layout.len()
    }

    pub fn view(&self) -> TwoWeight<'_> {
        TwoWeight {
            layout: &self.layout,
            u: &self.u,
            sigma: &self.sigma,
            family: &self.family,
        }
    }
}

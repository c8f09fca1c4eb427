//! Atom layouts: a linear order of atoms in which every cube of a grid is a
//! contiguous range.
//!
//! On the line the atoms are the cells of the common refinement of the
//! finest cubes and the breakpoints of the functions involved. On a finite
//! space they are the points, listed in depth-first cube order.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::{DyadicGrid, MeasurableSet, Space};
use crate::orlicz::luxemburg;
use crate::step::{merge_edges, Interval, StepFunction};
use crate::young::YoungFunction;

#[derive(Debug, Clone)]
pub struct Layout {
    masses: Vec<f64>,
    edges: Option<Vec<f64>>,
    order: Option<Vec<usize>>,
    ranges: Vec<Range<usize>>,
}

impl Layout {
    /// Layout of `grid` refined by the breakpoints of `functions` (line
    /// grids). Functions must vanish outside the union of the top cubes.
    pub fn new(grid: &DyadicGrid, functions: &[&StepFunction]) -> Result<Self> {
        match &grid.space {
            Space::Line { .. } => Self::line(grid, functions),
            Space::Finite { space } => {
                if !functions.is_empty() {
                    return Err(Error::Input("step functions need a line grid".into()));
                }
                Ok(Self::points(grid, space.masses()))
            }
        }
    }

    fn line(grid: &DyadicGrid, functions: &[&StepFunction]) -> Result<Self> {
        let extent = grid
            .line_extent()
            .ok_or_else(|| Error::DegenerateSet("grid has no cubes".into()))?;
        let mut cube_edges: Vec<f64> = Vec::new();
        for &id in grid.finest() {
            let iv = grid.cubes[id].interval().unwrap();
            cube_edges.push(iv.lo);
            cube_edges.push(iv.hi);
        }
        let mut fn_edges: Vec<f64> = Vec::new();
        for f in functions {
            if let Some(s) = f.support() {
                if !extent.contains_interval(&s) {
                    return Err(Error::Coverage(format!(
                        "support [{}, {}) is not inside the grid [{}, {})",
                        s.lo, s.hi, extent.lo, extent.hi
                    )));
                }
            }
            fn_edges.extend(
                f.breakpoints()
                    .iter()
                    .copied()
                    .filter(|&b| extent.lo < b && b < extent.hi),
            );
        }
        let edges = merge_edges(&cube_edges, &fn_edges);
        let masses: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let locate = |x: f64| edges.binary_search_by(|e| e.total_cmp(&x)).ok();
        let mut ranges = Vec::with_capacity(grid.cubes.len());
        for c in &grid.cubes {
            let iv = c.interval().unwrap();
            let (Some(a), Some(b)) = (locate(iv.lo), locate(iv.hi)) else {
                return Err(Error::Invariant(format!("cube {} endpoints are not finest edges", c.id)));
            };
            ranges.push(a..b);
        }
        Ok(Self {
            masses,
            edges: Some(edges),
            order: None,
            ranges,
        })
    }

    fn points(grid: &DyadicGrid, point_masses: &[f64]) -> Self {
        let mut order = Vec::with_capacity(point_masses.len());
        let mut ranges = vec![0..0; grid.cubes.len()];
        fn visit(grid: &DyadicGrid, id: usize, order: &mut Vec<usize>, ranges: &mut [Range<usize>]) {
            let start = order.len();
            let cube = &grid.cubes[id];
            if cube.children.is_empty() {
                order.extend_from_slice(cube.points().unwrap_or(&[]));
            } else {
                for &c in &cube.children {
                    visit(grid, c, order, ranges);
                }
            }
            ranges[id] = start..order.len();
        }
        for &top in grid.top() {
            visit(grid, top, &mut order, &mut ranges);
        }
        let masses = order.iter().map(|&i| point_masses[i]).collect();
        Self {
            masses,
            edges: None,
            order: Some(order),
            ranges,
        }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn edges(&self) -> Option<&[f64]> {
        self.edges.as_deref()
    }

    pub fn range(&self, cube: usize) -> Range<usize> {
        self.ranges[cube].clone()
    }

    pub fn mass(&self, range: Range<usize>) -> f64 {
        self.masses[range].iter().sum()
    }

    pub fn cube_mass(&self, cube: usize) -> f64 {
        self.mass(self.range(cube))
    }

    /// Atom values of a step function (line layouts).
    pub fn sample(&self, f: &StepFunction) -> Vec<f64> {
        match &self.edges {
            Some(e) => e.windows(2).map(|w| f.eval(0.5 * (w[0] + w[1]))).collect(),
            None => vec![0.0; self.len()],
        }
    }

    /// Atom values from per-point values (finite layouts).
    pub fn from_points(&self, values: &[f64]) -> Vec<f64> {
        match &self.order {
            Some(o) => o.iter().map(|&i| values[i]).collect(),
            None => values.to_vec(),
        }
    }

    /// Per-point values from atom values (finite layouts).
    pub fn to_points(&self, atoms: &[f64]) -> Vec<f64> {
        match &self.order {
            Some(o) => {
                let mut out = vec![0.0; atoms.len()];
                for (a, &i) in o.iter().enumerate() {
                    out[i] = atoms[a];
                }
                out
            }
            None => atoms.to_vec(),
        }
    }

    /// Step function with the given atom values (line layouts; values must
    /// be nonnegative).
    pub fn to_step(&self, atoms: &[f64]) -> Result<StepFunction> {
        let edges = self
            .edges
            .as_ref()
            .ok_or_else(|| Error::Input("finite layouts have no step representation".into()))?;
        Ok(StepFunction::new(edges.clone(), atoms.to_vec())?.simplified())
    }

    /// Interval of atom `i` (line layouts).
    pub fn atom_interval(&self, i: usize) -> Option<Interval> {
        self.edges.as_ref().map(|e| Interval {
            lo: e[i],
            hi: e[i + 1],
        })
    }

    /// The measurable set formed by a sorted list of atoms.
    pub fn atom_set(&self, atoms: &[usize]) -> MeasurableSet {
        match (&self.edges, &self.order) {
            (Some(e), _) => {
                let mut intervals: Vec<Interval> = Vec::new();
                for &a in atoms {
                    match intervals.last_mut() {
                        Some(last) if last.hi == e[a] => last.hi = e[a + 1],
                        _ => intervals.push(Interval {
                            lo: e[a],
                            hi: e[a + 1],
                        }),
                    }
                }
                MeasurableSet::Intervals { intervals }
            }
            (None, Some(o)) => {
                let mut indices: Vec<usize> = atoms.iter().map(|&a| o[a]).collect();
                indices.sort_unstable();
                MeasurableSet::Points { indices }
            }
            (None, None) => MeasurableSet::Points { indices: Vec::new() },
        }
    }

    pub fn integral(&self, values: &[f64], range: Range<usize>) -> f64 {
        self.masses[range.clone()]
            .iter()
            .zip(&values[range])
            .map(|(m, v)| m * v)
            .sum()
    }

    pub fn average(&self, values: &[f64], cube: usize) -> f64 {
        let r = self.range(cube);
        self.integral(values, r.clone()) / self.mass(r)
    }

    pub fn pieces(&self, values: &[f64], range: Range<usize>) -> Vec<(f64, f64)> {
        self.masses[range.clone()]
            .iter()
            .copied()
            .zip(values[range].iter().copied())
            .collect()
    }

    /// `‖f‖_{Φ,Q}`.
    pub fn norm(&self, values: &[f64], cube: usize, phi: &YoungFunction) -> Result<f64> {
        luxemburg(&self.pieces(values, self.range(cube)), phi)
    }

    /// `(Σ mass·|v|^p)^(1/p)`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        self.masses
            .iter()
            .zip(values)
            .map(|(m, v)| m * v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Whether `values` is constant on every finest cube.
    pub fn resolves(&self, grid: &DyadicGrid, values: &[f64]) -> bool {
        grid.finest().iter().all(|&id| {
            let r = self.range(id);
            values[r.clone()].windows(2).all(|w| w[0] == w[1])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{finite_grid, line_grid};
    use crate::space::FiniteSpace;
    use std::sync::Arc;

    #[test]
    fn line_layout_refines_cubes_and_functions() {
        let g = line_grid(0.0, 0, 2, Interval::new(0.0, 1.0).unwrap()).unwrap();
        let f = StepFunction::constant_on(Interval::new(0.1, 0.3).unwrap(), 2.0).unwrap();
        let l = Layout::new(&g, &[&f]).unwrap();
        assert_eq!(l.edges().unwrap(), &[0.0, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0]);
        let top = g.top()[0];
        assert_eq!(l.range(top), 0..6);
        let vals = l.sample(&f);
        assert!((l.integral(&vals, l.range(top)) - 0.4).abs() < 1e-15);
        assert!(!l.resolves(&g, &vals));
    }

    #[test]
    fn support_outside_the_grid_is_a_coverage_error() {
        let g = line_grid(0.0, 0, 2, Interval::new(0.0, 1.0).unwrap()).unwrap();
        let f = StepFunction::indicator(Interval::new(0.5, 1.5).unwrap());
        assert!(matches!(Layout::new(&g, &[&f]), Err(Error::Coverage(_))));
    }

    #[test]
    fn point_layout_makes_cubes_contiguous() {
        let s = Arc::new(FiniteSpace::random_plane(50, 4).unwrap());
        let g = finite_grid(s, None, 0).unwrap();
        let l = Layout::new(&g, &[]).unwrap();
        assert_eq!(l.len(), 50);
        for c in &g.cubes {
            let r = l.range(c.id);
            let MeasurableSet::Points { indices } = l.atom_set(&r.collect::<Vec<_>>()) else { panic!() };
            assert_eq!(indices, c.points().unwrap().iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>());
        }
        let v: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(l.to_points(&l.from_points(&v)), v);
    }
}

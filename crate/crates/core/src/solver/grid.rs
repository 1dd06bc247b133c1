use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;
/// Admissible range of adjacent cell-width ratios.
pub const MAX_MESH_RATIO: f64 = 4.0;

/// Strictly increasing nodes on `[0, 1]`, clustered toward `x = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Vec<f64>,
    grading_exponent: f64,
}

impl Grid {
    /// `N` cells. The right half follows `x_k = 1 - (1 - k/N)^p`; the left
    /// half is uniform and meets the right half at `k = N/2`.
    pub fn build(cells: usize, grading_exponent: f64) -> Result<Self> {
        if cells < MIN_NODES {
            return Err(Error::Config(format!("grid needs N >= {MIN_NODES}, got {cells}")));
        }
        if !(1.0..=4.0).contains(&grading_exponent) {
            return Err(Error::Config(format!(
                "grading exponent must lie in [1, 4], got {grading_exponent}"
            )));
        }
        let graded = |k: usize| 1.0 - (1.0 - k as f64 / cells as f64).powf(grading_exponent);
        let mid = cells / 2;
        let x_mid = graded(mid);
        let mut nodes: Vec<f64> = (0..=cells)
            .map(|k| if k <= mid { x_mid * k as f64 / mid as f64 } else { graded(k) })
            .collect();
        nodes[0] = 0.0;
        nodes[cells] = 1.0;
        let grid = Self { nodes, grading_exponent };
        grid.validate()?;
        Ok(grid)
    }

    /// Wraps an explicit node list; endpoints and mesh ratios are checked.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let grid = Self { nodes, grading_exponent: 1.0 };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let x = &self.nodes;
        if x.len() < 3 || x[0] != 0.0 || x[x.len() - 1] != 1.0 {
            return Err(Error::Config("grid must contain 0 and 1 as endpoints".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid nodes must be strictly increasing".into()));
        }
        for (k, w) in x.windows(3).enumerate() {
            let ratio = (w[2] - w[1]) / (w[1] - w[0]);
            if !(1.0 / MAX_MESH_RATIO..=MAX_MESH_RATIO).contains(&ratio) {
                return Err(Error::Config(format!(
                    "mesh ratio {ratio:.3} at node {} outside [1/4, 4]",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of cells `N` (nodes are `0..=N`).
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading_exponent(&self) -> f64 {
        self.grading_exponent
    }

    /// Width of cell `k`, i.e. `x_{k+1} - x_k`.
    pub fn width(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_when_exponent_is_one() {
        let g = Grid::build(16, 1.0).unwrap();
        assert_eq!(g.nodes()[8], 0.5);
        for k in 0..16 {
            assert!((g.width(k) - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_grading_near_right_end() {
        let g = Grid::build(16, 2.0).unwrap();
        assert_eq!(g.nodes()[15], 0.99609375);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[16], 1.0);
        assert_eq!(g.cells(), 16);
    }

    #[test]
    fn endpoints_pinned_and_monotone() {
        for cells in [16, 17, 100, 401] {
            for p in [1.0, 1.5, 2.0, 2.3] {
                let g = Grid::build(cells, p).unwrap();
                assert_eq!(g.nodes()[0], 0.0);
                assert_eq!(*g.nodes().last().unwrap(), 1.0);
                assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            }
        }
    }

    #[test]
    fn nested_under_doubling() {
        let coarse = Grid::build(200, 2.0).unwrap();
        let fine = Grid::build(400, 2.0).unwrap();
        for (k, &x) in coarse.nodes().iter().enumerate() {
            assert!((fine.nodes()[2 * k] - x).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(Grid::build(15, 2.0), Err(Error::Config(_))));
        assert!(matches!(Grid::build(64, 0.5), Err(Error::Config(_))));
        assert!(matches!(Grid::build(64, 4.5), Err(Error::Config(_))));
        // last two cells have widths 1 : 2^p - 1, beyond the ratio bound for p > log2(5)
        assert!(matches!(Grid::build(64, 3.0), Err(Error::Config(_))));
        assert!(Grid::from_nodes(vec![0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Grid::from_nodes(vec![0.0, 0.5, 0.9]).is_err());
    }
}

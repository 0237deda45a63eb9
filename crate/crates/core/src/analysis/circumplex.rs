//! Mapping (arousal, valence) pairs onto the unit disk of the circumplex model
//! and accumulating them on a grid.

use std::io::Write;

use crate::error::{Error, Result};

/// `a1 = 2a - 1`, `z = min(|a1|, |v|)`, `(a', v') = (a1, v) / sqrt(1 + z^2)`.
/// Returns `(a', v')`.
pub fn circumplex_point(arousal: f64, valence: f64) -> (f64, f64) {
    let a1 = 2.0 * arousal - 1.0;
    let z = a1.abs().min(valence.abs());
    let s = (1.0 + z * z).sqrt();
    (a1 / s, valence / s)
}

/// Occupancy fractions over `resolution x resolution` cells covering
/// `[-1, 1]^2`; `x` is `v'` and `y` is `a'`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircumplexGrid {
    pub resolution: usize,
    /// Row-major by `a'` cell, then `v'` cell.
    pub cells: Vec<f64>,
    pub total: u64,
}

impl CircumplexGrid {
    fn cell_index(x: f64, resolution: usize) -> usize {
        let i = ((x + 1.0) / 2.0 * resolution as f64).floor();
        (i.max(0.0) as usize).min(resolution - 1)
    }

    pub fn get(&self, a_cell: usize, v_cell: usize) -> f64 {
        self.cells[a_cell * self.resolution + v_cell]
    }

    /// Center of cell `i` along either axis.
    pub fn center(&self, i: usize) -> f64 {
        -1.0 + (2.0 * i as f64 + 1.0) / self.resolution as f64
    }

    /// `v_prime,a_prime,fraction` rows for nonempty cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "v_prime,a_prime,fraction")?;
        for a in 0..self.resolution {
            for v in 0..self.resolution {
                let f = self.get(a, v);
                if f > 0.0 {
                    writeln!(w, "{},{},{}", self.center(v), self.center(a), f)?;
                }
            }
        }
        Ok(())
    }
}

/// Maps each `(arousal, valence)` action and returns normalized occupancy.
pub fn circumplex_map(actions: &[(f64, f64)], resolution: usize) -> Result<CircumplexGrid> {
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be positive".into()));
    }
    if actions.is_empty() {
        return Err(Error::Empty("no actions to map"));
    }
    let mut counts = vec![0u64; resolution * resolution];
    for &(a, v) in actions {
        if !(0.0..=1.0).contains(&a) || !(-1.0..=1.0).contains(&v) {
            return Err(Error::Config(format!("emotion ({a}, {v}) out of range")));
        }
        let (ap, vp) = circumplex_point(a, v);
        let row = CircumplexGrid::cell_index(ap, resolution);
        let col = CircumplexGrid::cell_index(vp, resolution);
        counts[row * resolution + col] += 1;
    }
    let total = actions.len() as u64;
    Ok(CircumplexGrid {
        resolution,
        cells: counts.into_iter().map(|c| c as f64 / total as f64).collect(),
        total,
    })
}

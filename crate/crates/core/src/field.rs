//! Discretized density slices and their on-disk formats.

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use std::io::{Read, Write};
use std::path::Path;

const SNAPSHOT_MAGIC: &[u8; 4] = b"LVS1";

/// One time slice of the discretized density over a [`PhaseGrid`].
#[derive(Debug, Clone)]
pub struct LevelSetField {
    pub grid: PhaseGrid,
    pub omega: f64,
    pub values: Vec<f64>,
    pub time_index: usize,
}

impl LevelSetField {
    pub fn zeros(grid: PhaseGrid, omega: f64) -> Self {
        let n = grid.total_points();
        LevelSetField {
            grid,
            omega,
            values: vec![0.0; n],
            time_index: 0,
        }
    }

    pub fn from_values(grid: PhaseGrid, omega: f64, values: Vec<f64>, time_index: usize) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::dimension(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(LevelSetField {
            grid,
            omega,
            values,
            time_index,
        })
    }

    /// h^dims · Σ values.
    pub fn total_mass(&self) -> f64 {
        let cell = self.grid.h().powi(self.grid.dims_total() as i32);
        cell * crate::util::pairwise_sum(&self.values)
    }

    /// Σ |values| over the outermost index shell (any coordinate at 1 or N).
    pub fn boundary_shell_mass(&self) -> f64 {
        let n = self.grid.n_per_dim();
        if n == 1 {
            return self.values.iter().map(|v| v.abs()).sum();
        }
        let dims = self.grid.dims_total();
        let mut sum = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            let mut rem = flat;
            let mut on_shell = false;
            for _ in 0..dims {
                let c = rem % n + 1;
                rem /= n;
                if c == 1 || c == n {
                    on_shell = true;
                    break;
                }
            }
            if on_shell {
                sum += v.abs();
            }
        }
        sum
    }

    /// True when boundary mass exceeds 1e-8 of the total |mass|, signalling
    /// that the compact-support assumption is breaking down.
    pub fn compact_support_warning(&self) -> bool {
        let total: f64 = self.values.iter().map(|v| v.abs()).sum();
        if total == 0.0 {
            return false;
        }
        self.boundary_shell_mass() > 1e-8 * total
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn assert_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("field contains non-finite values"));
        }
        Ok(())
    }

    /// Flat binary snapshot: magic, dims_x, dims_p, N, time index (u32 LE),
    /// ω (f64 LE), then the values as little-endian f64 in flat-index order.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(SNAPSHOT_MAGIC)?;
        for v in [
            self.grid.dims_x() as u32,
            self.grid.dims_p() as u32,
            self.grid.n_per_dim() as u32,
            self.time_index as u32,
        ] {
            f.write_all(&v.to_le_bytes())?;
        }
        f.write_all(&self.omega.to_le_bytes())?;
        for v in &self.values {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a snapshot written by [`write_binary`](Self::write_binary).
    /// `dt` and `n_steps` are not stored; callers supply them.
    pub fn read_binary(path: &Path, dt: f64, n_steps: usize) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::config("not a field snapshot (bad magic)"));
        }
        let mut u32buf = [0u8; 4];
        let mut next_u32 = |f: &mut dyn Read| -> Result<u32> {
            f.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let dims_x = next_u32(&mut f)? as usize;
        let dims_p = next_u32(&mut f)? as usize;
        let n = next_u32(&mut f)? as usize;
        let time_index = next_u32(&mut f)? as usize;
        let mut f64buf = [0u8; 8];
        f.read_exact(&mut f64buf)?;
        let omega = f64::from_le_bytes(f64buf);
        let grid = PhaseGrid::new(dims_x, dims_p, n, dt, n_steps)?;
        let mut values = Vec::with_capacity(grid.total_points());
        for _ in 0..grid.total_points() {
            f.read_exact(&mut f64buf)?;
            values.push(f64::from_le_bytes(f64buf));
        }
        LevelSetField::from_values(grid, omega, values, time_index)
    }

    /// CSV dump for small grids: one row per node, coordinates then value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if self.grid.total_points() > 1 << 20 {
            return Err(Error::config("grid too large for CSV dump"));
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let dims = self.grid.dims_total();
        let mut header: Vec<String> = (1..=dims).map(|i| format!("c{i}")).collect();
        header.push("value".into());
        writeln!(f, "{}", header.join(","))?;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.unflatten(flat);
            let pt = self.grid.coord(&idx);
            let mut row: Vec<String> = pt.iter().map(|c| crate::util::fmt_f64(*c)).collect();
            row.push(crate::util::fmt_f64(*v));
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let grid = PhaseGrid::new(1, 1, 8, 0.01, 4).unwrap();
        let mut field = LevelSetField::zeros(grid.clone(), 0.1);
        for (i, v) in field.values.iter_mut().enumerate() {
            *v = (i as f64).sin();
        }
        field.time_index = 3;
        let dir = std::env::temp_dir().join("levset_field_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.bin");
        field.write_binary(&path).unwrap();
        let back = LevelSetField::read_binary(&path, 0.01, 4).unwrap();
        assert_eq!(back.values, field.values);
        assert_eq!(back.time_index, 3);
        assert_eq!(back.omega, 0.1);
        assert_eq!(back.grid, grid);
    }

    #[test]
    fn boundary_shell() {
        let grid = PhaseGrid::new(1, 1, 4, 0.01, 1).unwrap();
        let mut field = LevelSetField::zeros(grid, 0.1);
        field.values[5] = 1.0; // (2,2): interior
        assert_eq!(field.boundary_shell_mass(), 0.0);
        assert!(!field.compact_support_warning());
        field.values[0] = 0.5; // (1,1): corner
        assert_eq!(field.boundary_shell_mass(), 0.5);
        assert!(field.compact_support_warning());
    }
}

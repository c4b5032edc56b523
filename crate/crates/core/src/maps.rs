//! Real-valued per-coefficient maps (SPP, gain, noise power, magnitude)
//! and their `subband,time,<value>` CSV form.

use crate::dtcwpt::ComplexSubbandGrid;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// `values[l][t]` over the same (subband, time) layout as a grid. `times`
/// holds the time of each column in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandMap {
    pub values: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

/// Formats a float with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.8e}")
}

impl SubbandMap {
    pub fn new(values: Vec<Vec<f64>>, times: Vec<f64>) -> Result<Self> {
        if let Some((l, row)) = values.iter().enumerate().find(|(_, r)| r.len() != times.len()) {
            return Err(Error::Structural(format!(
                "map row {l} has {} values, expected {}",
                row.len(),
                times.len()
            )));
        }
        Ok(SubbandMap { values, times })
    }

    /// A map shaped like `grid` filled with `fill`.
    pub fn filled_like(grid: &ComplexSubbandGrid, fill: f64) -> Self {
        let times = (0..grid.num_frames()).map(|t| grid.time_seconds(t)).collect();
        SubbandMap { values: vec![vec![fill; grid.num_frames()]; grid.num_subbands()], times }
    }

    /// Coefficient magnitudes of a grid.
    pub fn magnitudes(grid: &ComplexSubbandGrid) -> Self {
        let mut map = Self::filled_like(grid, 0.0);
        for (row, band) in map.values.iter_mut().zip(grid.subbands()) {
            for (v, c) in row.iter_mut().zip(band) {
                *v = c.norm();
            }
        }
        map
    }

    pub fn num_subbands(&self) -> usize {
        self.values.len()
    }

    pub fn num_frames(&self) -> usize {
        self.times.len()
    }

    pub fn get(&self, l: usize, t: usize) -> f64 {
        self.values[l][t]
    }

    pub fn check_shape(&self, grid: &ComplexSubbandGrid, what: &str) -> Result<()> {
        if self.num_subbands() != grid.num_subbands() || self.num_frames() != grid.num_frames() {
            return Err(Error::Structural(format!(
                "{what} map is {}x{}, grid is {}x{}",
                self.num_subbands(),
                self.num_frames(),
                grid.num_subbands(),
                grid.num_frames()
            )));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_csv(&self, column: &str) -> String {
        let mut out = String::with_capacity(32 * self.num_subbands() * self.num_frames() + 32);
        let _ = writeln!(out, "subband,time,{column}");
        for (l, row) in self.values.iter().enumerate() {
            for (t, v) in self.times.iter().zip(row) {
                let _ = writeln!(out, "{l},{},{}", format_sig9(*t), format_sig9(*v));
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path, column: &str) -> Result<()> {
        std::fs::write(path, self.to_csv(column))?;
        Ok(())
    }

    /// Parses the CSV form back, returning the value column name and the map.
    pub fn from_csv(text: &str) -> Result<(String, Self)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() != 3 || cols[0] != "subband" || cols[1] != "time" {
            return Err(Error::Format(format!("unexpected CSV header '{header}'")));
        }
        let column = cols[2].to_string();
        let mut values: Vec<Vec<f64>> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("CSV line {}: malformed row '{line}'", i + 2));
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let l: usize = f[0].parse().map_err(|_| bad())?;
            let t: f64 = f[1].parse().map_err(|_| bad())?;
            let v: f64 = f[2].parse().map_err(|_| bad())?;
            if l == values.len() {
                values.push(Vec::new());
            } else if l + 1 != values.len() {
                return Err(Error::Format(format!("CSV line {}: subband {l} out of order", i + 2)));
            }
            let row = values.last_mut().expect("row pushed above");
            if l == 0 {
                times.push(t);
            }
            row.push(v);
        }
        let map = SubbandMap::new(values, times).map_err(|e| Error::Format(e.to_string()))?;
        Ok((column, map))
    }
}

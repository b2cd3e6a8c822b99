use crate::error::{Error, Result};
use crate::numerics::{C64, ZERO};

use super::{GridSpec, PhasePoint};

/// Complex samples on the phase-space window, extended off the window by
/// the twisted periodicity of the Weyl operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceFunction {
    grid: GridSpec,
    values: Vec<C64>,
}

impl PhaseSpaceFunction {
    pub fn zeros(grid: &GridSpec) -> Self {
        PhaseSpaceFunction {
            grid: *grid,
            values: vec![ZERO; grid.phase_len()],
        }
    }

    /// Values in storage order (see [`PhasePoint::from_index`]).
    pub fn from_values(grid: &GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.phase_len() {
            return Err(Error::Shape(format!(
                "{} phase-space values for a grid of {} points",
                values.len(),
                grid.phase_len()
            )));
        }
        Ok(PhaseSpaceFunction {
            grid: *grid,
            values,
        })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&PhasePoint) -> C64) -> Self {
        let values = (0..grid.phase_len())
            .map(|p| f(&PhasePoint::from_index(grid, p)))
            .collect();
        PhaseSpaceFunction {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// `Φ(k)` for any lattice point, with the twisted extension.
    pub fn get(&self, k: &PhasePoint) -> C64 {
        let (r, sign) = k.reduce(&self.grid);
        self.values[r.index(&self.grid)] * sign
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "phase-space functions on different grids: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// `Φ*(k) = conj Φ(−k)`.
    pub fn star(&self) -> Self {
        let grid = self.grid;
        PhaseSpaceFunction::from_fn(&grid, |k| self.get(&k.neg()).conj())
    }

    pub fn conj(&self) -> Self {
        PhaseSpaceFunction {
            grid: self.grid,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        PhaseSpaceFunction {
            grid: self.grid,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(PhaseSpaceFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `‖Φ − Ψ‖_∞`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn l1_norm(&self) -> f64 {
        self.grid.phase_weight() * self.values.iter().map(|z| z.norm()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.phase_weight() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `⟨Φ, Ψ⟩ = N⁻ⁿ Σ Φ·conj Ψ`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.same_grid(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.phase_weight())
    }

    /// Rows `x_1..x_n, y_1..y_n, re, im`, positions ascending.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut header: Vec<String> = (1..=g.n).map(|i| format!("x{i}")).collect();
        header.extend((1..=g.n).map(|i| format!("y{i}")));
        header.extend(["re".to_string(), "im".to_string()]);
        let mut rows: Vec<(PhasePoint, C64)> = (0..g.phase_len())
            .map(|p| (PhasePoint::from_index(g, p), self.values[p]))
            .collect();
        rows.sort_by(|a, b| (&a.0.s, &a.0.m).cmp(&(&b.0.s, &b.0.m)));
        let mut out = header.join(",");
        out.push('\n');
        for (k, z) in rows {
            let mut fields: Vec<String> = k.x(g).iter().map(|v| v.to_string()).collect();
            fields.extend(k.y(g).iter().map(|v| v.to_string()));
            fields.push(format!("{:.17e}", z.re));
            fields.push(format!("{:.17e}", z.im));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

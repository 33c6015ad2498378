//! Distance of the final output from uniform, given side information.
//!
//! A [`JointTable`] holds `p(s, z, e | w, ACC)` for output `s`, public data
//! `z`, adversary data `e` and adversary input `w`. Each `w` slice is a
//! normalized distribution.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const MAX_CELLS: usize = 1_000_000;
const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub s: usize,
    pub z: usize,
    pub e: usize,
    pub w: usize,
    /// Flattened `[w][s][z][e]`.
    pub p: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// `sum_{s,e} max_w sum_z |p(s,z,e|w) - p(z,e|w)/|S||`.
    pub d_c: f64,
    /// `sum_e max_w sum_{z,s} |p(s,z,e|w) - p(z,e|w)/|S||`.
    pub d: f64,
    pub s_size: usize,
    /// `d <= d_c <= |S| d` up to rounding.
    pub relation_holds: bool,
}

impl JointTable {
    pub fn new(s: usize, z: usize, e: usize, w: usize, p: Vec<f64>) -> Result<Self> {
        let t = Self { s, z, e, w, p };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let cells = [self.s, self.z, self.e, self.w]
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&c| c <= MAX_CELLS)
            .ok_or_else(|| invalid(format!("table larger than {MAX_CELLS} cells")))?;
        if cells == 0 {
            return Err(invalid("every table dimension must be positive"));
        }
        if self.p.len() != cells {
            return Err(invalid(format!("expected {cells} probabilities, got {}", self.p.len())));
        }
        if let Some(v) = self.p.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(invalid(format!("probability {v} is negative or not finite")));
        }
        let slice = self.s * self.z * self.e;
        for (w, chunk) in self.p.chunks(slice).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORM_TOL {
                return Err(invalid(format!("slice w={w} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, w: usize, s: usize, z: usize, e: usize) -> f64 {
        self.p[((w * self.s + s) * self.z + z) * self.e + e]
    }

    fn marginal(&self, w: usize, z: usize, e: usize) -> f64 {
        (0..self.s).map(|s| self.get(w, s, z, e)).sum()
    }

    fn gap(&self, w: usize, s: usize, z: usize, e: usize) -> f64 {
        (self.get(w, s, z, e) - self.marginal(w, z, e) / self.s as f64).abs()
    }
}

pub fn dc_distance(t: &JointTable) -> Result<DistanceReport> {
    t.validate()?;
    let max_w = |f: &dyn Fn(usize) -> f64| (0..t.w).map(f).fold(0.0f64, f64::max);
    let mut d_c = 0.0;
    let mut d = 0.0;
    for e in 0..t.e {
        for s in 0..t.s {
            d_c += max_w(&|w| (0..t.z).map(|z| t.gap(w, s, z, e)).sum());
        }
        d += max_w(&|w| (0..t.z).flat_map(|z| (0..t.s).map(move |s| (z, s))).map(|(z, s)| t.gap(w, s, z, e)).sum());
    }
    let tol = 1e-12 * (1.0 + d_c);
    Ok(DistanceReport {
        d_c,
        d,
        s_size: t.s,
        relation_holds: d <= d_c + tol && d_c <= t.s as f64 * d + tol,
    })
}

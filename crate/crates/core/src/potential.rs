//! Piecewise constant potentials.
//!
//! A potential with boundaries `x₀ < x₁ < … < x_N` has `N + 2` regions:
//! region 0 is `x < x₀`, region `i` (1 ≤ i ≤ N) is `x_{i−1} ≤ x < x_i`, and
//! region `N + 1` is `x ≥ x_N`. Boundary points belong to the region on
//! their right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialFile", into = "PotentialFile")]
pub struct PiecewiseConstantPotential {
    boundaries: Vec<f64>,
    levels: Vec<f64>,
    mass: f64,
}

/// On-disk form of a potential definition.
///
/// ```json
/// { "boundaries": [-4, -1, 1, 4], "levels": [0, 0.956, 0, 0.956, 0], "mass": 0.1 }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    /// Region boundaries in nm, strictly increasing.
    pub boundaries: Vec<f64>,
    /// Potential levels in eV, one more than there are boundaries.
    pub levels: Vec<f64>,
    /// Effective mass in units of m₀.
    pub mass: f64,
}

impl TryFrom<PotentialFile> for PiecewiseConstantPotential {
    type Error = Error;

    fn try_from(file: PotentialFile) -> Result<Self> {
        PiecewiseConstantPotential::new(file.boundaries, file.levels, file.mass)
    }
}

impl From<PiecewiseConstantPotential> for PotentialFile {
    fn from(p: PiecewiseConstantPotential) -> Self {
        PotentialFile {
            boundaries: p.boundaries,
            levels: p.levels,
            mass: p.mass,
        }
    }
}

impl PiecewiseConstantPotential {
    pub fn new(boundaries: Vec<f64>, levels: Vec<f64>, mass: f64) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::validation(
                "boundaries",
                "at least one boundary is required",
            ));
        }
        if let Some(i) = boundaries.iter().position(|x| !x.is_finite()) {
            return Err(Error::validation(
                format!("boundaries[{i}]"),
                "value is not finite",
            ));
        }
        for (i, w) in boundaries.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::validation(
                    format!("boundaries[{}]", i + 1),
                    format!(
                        "boundaries must be strictly increasing ({} follows {})",
                        w[1], w[0]
                    ),
                ));
            }
        }
        if levels.len() != boundaries.len() + 1 {
            return Err(Error::validation(
                "levels",
                format!(
                    "expected {} levels for {} boundaries, got {}",
                    boundaries.len() + 1,
                    boundaries.len(),
                    levels.len()
                ),
            ));
        }
        if let Some(i) = levels.iter().position(|u| !u.is_finite()) {
            return Err(Error::validation(
                format!("levels[{i}]"),
                "value is not finite",
            ));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::validation(
                "mass",
                format!("mass must be positive and finite, got {mass}"),
            ));
        }
        Ok(Self {
            boundaries,
            levels,
            mass,
        })
    }

    /// Parses a JSON potential definition. Syntax errors report line and
    /// column; invariant violations name the offending key.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PotentialFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::try_from(file)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&PotentialFile::from(self.clone()))
            .expect("potential serializes")
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Number of interior regions, `N`.
    pub fn interior_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn region_count(&self) -> usize {
        self.levels.len()
    }

    pub fn left_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn right_level(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    pub fn interior_levels(&self) -> &[f64] {
        &self.levels[1..self.levels.len() - 1]
    }

    /// Width of region `i`; infinite for the two exterior regions.
    pub fn width(&self, region: usize) -> f64 {
        if region == 0 || region >= self.region_count() - 1 {
            f64::INFINITY
        } else {
            self.boundaries[region] - self.boundaries[region - 1]
        }
    }

    pub fn region_index(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= x)
    }

    pub fn level_at(&self, x: f64) -> f64 {
        self.levels[self.region_index(x)]
    }

    pub fn translated(&self, shift: f64) -> Self {
        Self {
            boundaries: self.boundaries.iter().map(|x| x + shift).collect(),
            levels: self.levels.clone(),
            mass: self.mass,
        }
    }

    pub fn with_level_offset(&self, offset: f64) -> Self {
        Self {
            boundaries: self.boundaries.clone(),
            levels: self.levels.iter().map(|u| u + offset).collect(),
            mass: self.mass,
        }
    }

    /// Spatial mirror image `U(−x)`.
    pub fn mirrored(&self) -> Self {
        Self {
            boundaries: self.boundaries.iter().rev().map(|x| -x).collect(),
            levels: self.levels.iter().rev().copied().collect(),
            mass: self.mass,
        }
    }
}

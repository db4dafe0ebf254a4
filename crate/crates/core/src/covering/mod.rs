//! Coverings of ball faces, spheres and balls, their sampled verification,
//! and exact or greedy covering and packing numbers for tiny instances.

mod grid;
mod index;
mod oracle;
mod verify;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use grid::{
    ball_cell_count, cover_ball_grid, cover_face_grid, cover_face_grid_with, face_cell_count,
    lift_sphere_cover, GridParams, MAX_CENTERS,
};
pub(crate) use grid::{ball_with_cells, lift_with_cells};
pub use oracle::{
    covering_number_oracle, oracle_covering, oracle_instance_size, packing_oracle, packing_set, OracleMode, MAX_RESOLUTION,
};
pub use verify::{sample_set, verify_covering, Target, VerifyReport, VERIFY_TOL};

use crate::error::{Error, Result};
use crate::geometry::FaceChart;
use crate::norms::NormSpec;
use crate::point::Point;

/// Which construction produced a covering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GridFace(FaceChart),
    SphereLift,
    BallGrid,
    Oracle,
    External,
}

/// Balls of a common radius, measured in `reference_norm`, around a list of
/// centers. Centers are stored row-major in one flat buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    radius: f64,
    reference_norm: NormSpec,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl Covering {
    pub fn new(
        radius: f64,
        reference_norm: NormSpec,
        centers: Vec<Point>,
        provenance: Provenance,
    ) -> Result<Self> {
        let d = reference_norm.dim();
        let mut coords = Vec::with_capacity(centers.len() * d);
        for c in &centers {
            if c.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: c.dim() });
            }
            coords.extend_from_slice(c.coords());
        }
        Self::from_flat(radius, reference_norm, coords, provenance)
    }

    pub(crate) fn from_flat(
        radius: f64,
        reference_norm: NormSpec,
        coords: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSpec(format!("covering radius must be positive, got {radius}")));
        }
        if coords.len() % reference_norm.dim() != 0 {
            return Err(Error::InvalidSpec("center buffer is not a whole number of points".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("a center has a non-finite coordinate".into()));
        }
        Ok(Covering { radius, reference_norm, coords, provenance })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn reference_norm(&self) -> &NormSpec {
        &self.reference_norm
    }

    pub fn dim(&self) -> usize {
        self.reference_norm.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn center(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[k * d..(k + 1) * d]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim())
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.centers().map(Point::from_slice_unchecked).collect()
    }

    /// One center per row under a header `x1,...,xd`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut s = String::with_capacity(self.coords.len() * 20 + 8 * d);
        for j in 1..=d {
            if j > 1 {
                s.push(',');
            }
            let _ = write!(s, "x{j}");
        }
        s.push('\n');
        for c in self.centers() {
            for (j, v) in c.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Serialize, Deserialize)]
struct RawCovering {
    radius: f64,
    norm: NormSpec,
    centers: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl Serialize for Covering {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawCovering {
            radius: self.radius,
            norm: self.reference_norm.clone(),
            centers: self.centers().map(|c| c.to_vec()).collect(),
            provenance: self.provenance.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Covering {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCovering::deserialize(deserializer)?;
        let d = raw.norm.dim();
        let mut coords = Vec::with_capacity(raw.centers.len() * d);
        for c in &raw.centers {
            if c.len() != d {
                return Err(serde::de::Error::custom(format!(
                    "center has {} coordinates, the norm has dimension {d}",
                    c.len()
                )));
            }
            coords.extend_from_slice(c);
        }
        Covering::from_flat(raw.radius, raw.norm, coords, raw.provenance)
            .map_err(serde::de::Error::custom)
    }
}

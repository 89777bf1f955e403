//! The four per-pixel quantities a regressor can predict for a keypoint.
//!
//! All of them are derived from the displacement `m_o = point − keypoint`,
//! so the direction pointing from a pixel's 3D point towards the keypoint
//! is `−m_v`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Offset,
    Vector,
    Polar,
    Radial,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Vector,
        SchemeKind::Offset,
        SchemeKind::Polar,
        SchemeKind::Radial,
    ];

    pub fn channel_depth(self) -> usize {
        match self {
            SchemeKind::Offset | SchemeKind::Vector => 3,
            SchemeKind::Polar => 2,
            SchemeKind::Radial => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Offset => "offset",
            SchemeKind::Vector => "vector",
            SchemeKind::Polar => "polar",
            SchemeKind::Radial => "radial",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "offset" => Ok(SchemeKind::Offset),
            "vector" => Ok(SchemeKind::Vector),
            "polar" => Ok(SchemeKind::Polar),
            "radial" => Ok(SchemeKind::Radial),
            other => Err(Error::param("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// A scheme value with up to three channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeValue {
    data: [f64; 3],
    len: usize,
}

impl SchemeValue {
    pub fn from_slice(v: &[f64]) -> Self {
        let mut data = [0.0; 3];
        data[..v.len()].copy_from_slice(v);
        Self { data, len: v.len() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }
}

/// The scheme quantity of `point` with respect to `keypoint`.
///
/// Offset is `point − keypoint`, Vector its unit direction, Polar the
/// `(acos(dz), atan2(dy, dx))` angles of that direction and Radial its
/// length. Vector and Polar are undefined for coincident points.
pub fn compute_scheme_value(scheme: SchemeKind, point: &Point3, keypoint: &Point3) -> Result<SchemeValue> {
    let offset = point - keypoint;
    let value = match scheme {
        SchemeKind::Offset => SchemeValue::from_slice(offset.as_slice()),
        SchemeKind::Radial => SchemeValue::from_slice(&[offset.norm()]),
        SchemeKind::Vector | SchemeKind::Polar => {
            let n = offset.norm();
            if n == 0.0 {
                return Err(Error::Degenerate("direction undefined for coincident points"));
            }
            let v = offset / n;
            if scheme == SchemeKind::Vector {
                SchemeValue::from_slice(v.as_slice())
            } else {
                let (phi, psi) = unit_to_polar(&v);
                SchemeValue::from_slice(&[phi, psi])
            }
        }
    };
    Ok(value)
}

/// `(φ, ψ)` with `φ ∈ [0, π]` and `ψ ∈ (−π, π]`.
pub fn unit_to_polar(v: &Vector3) -> (f64, f64) {
    let phi = v.z.clamp(-1.0, 1.0).acos();
    let mut psi = v.y.atan2(v.x);
    if psi <= -std::f64::consts::PI {
        psi = std::f64::consts::PI;
    }
    (phi, psi)
}

pub fn polar_to_unit(phi: f64, psi: f64) -> Vector3 {
    let s = phi.sin();
    Vector3::new(s * psi.cos(), s * psi.sin(), phi.cos())
}

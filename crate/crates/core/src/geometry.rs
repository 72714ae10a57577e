//! Positions in the plane, relative to the TV base station at the origin.
//!
//! Distances are meters and angles radians throughout the crate; unit
//! conversion happens once, when configuration is ingested.

use std::f64::consts::{PI, TAU};

/// A point in polar coordinates about the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    r: f64,
    phi: f64,
}

impl PolarPoint {
    /// Builds a point, folding negative radii through the origin and
    /// normalizing the azimuth into `[0, 2π)`.
    pub fn new(r: f64, phi: f64) -> Self {
        let (r, phi) = if r < 0.0 { (-r, phi + PI) } else { (r, phi) };
        Self {
            r,
            phi: normalize_angle(phi),
        }
    }

    pub fn from_degrees(r: f64, phi_deg: f64) -> Self {
        Self::new(r, phi_deg.to_radians())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_cartesian(self) -> CartesianPoint {
        CartesianPoint {
            x: self.r * self.phi.cos(),
            y: self.r * self.phi.sin(),
        }
    }
}

/// A point in Cartesian coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Four-quadrant conversion back to polar form.
    pub fn to_polar(self) -> PolarPoint {
        PolarPoint::new(self.x.hypot(self.y), self.y.atan2(self.x))
    }

    pub fn distance(self, other: CartesianPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `self + scale * (cos heading, sin heading)`.
    pub fn offset(self, scale: f64, heading: f64) -> CartesianPoint {
        CartesianPoint {
            x: self.x + scale * heading.cos(),
            y: self.y + scale * heading.sin(),
        }
    }
}

impl From<PolarPoint> for CartesianPoint {
    fn from(p: PolarPoint) -> Self {
        p.to_cartesian()
    }
}

impl From<CartesianPoint> for PolarPoint {
    fn from(c: CartesianPoint) -> Self {
        c.to_polar()
    }
}

pub fn normalize_angle(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Absolute angular difference folded into `[0, π]`.
pub fn relative_angle(phi_a: f64, phi_b: f64) -> f64 {
    let delta = normalize_angle((phi_a - phi_b).abs());
    delta.min(TAU - delta)
}

/// Chord distance between two points by the law of cosines.
pub fn separation(a: PolarPoint, b: PolarPoint) -> f64 {
    separation_from(a.r, b.r, relative_angle(a.phi, b.phi))
}

/// Law-of-cosines distance between points at radii `r_a`, `r_b` subtending
/// `theta` at the origin.
pub fn separation_from(r_a: f64, r_b: f64, theta: f64) -> f64 {
    // r_a² + r_b² − 2 r_a r_b cos θ, rearranged to avoid cancellation for near-coincident points
    let dr = r_a - r_b;
    let half = (0.5 * theta).sin();
    (dr * dr + 4.0 * r_a * r_b * half * half).sqrt()
}

//! Boundary regions Γ* on the edges of the unit square and the internal strips
//! ω_r that thicken them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    /// ξ₂ = 0
    Bottom,
    /// ξ₂ = 1
    Top,
    /// ξ₁ = 0
    Left,
    /// ξ₁ = 1
    Right,
}

impl Edge {
    /// Boundary point at arc parameter `s`. Arcs run along the increasing coordinate.
    pub fn point(self, s: f64) -> [f64; 2] {
        match self {
            Edge::Bottom => [s, 0.0],
            Edge::Top => [s, 1.0],
            Edge::Left => [0.0, s],
            Edge::Right => [1.0, s],
        }
    }

    /// Whether the arc parameter runs along ξ₁.
    pub fn is_horizontal(self) -> bool {
        matches!(self, Edge::Bottom | Edge::Top)
    }

    /// Value of the fixed coordinate on this edge (0 or 1).
    pub fn fixed_coordinate(self) -> f64 {
        match self {
            Edge::Bottom | Edge::Left => 0.0,
            Edge::Top | Edge::Right => 1.0,
        }
    }

    /// Sign of the outward normal along the fixed coordinate axis.
    pub fn outward_sign(self) -> f64 {
        match self {
            Edge::Bottom | Edge::Left => -1.0,
            Edge::Top | Edge::Right => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Bottom => "bottom",
            Edge::Top => "top",
            Edge::Left => "left",
            Edge::Right => "right",
        }
    }
}

/// An arc `[a, b]` of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRegion {
    pub edge: Edge,
    pub interval: [f64; 2],
}

impl BoundaryRegion {
    pub fn new(edge: Edge, a: f64, b: f64) -> Result<Self> {
        let region = Self {
            edge,
            interval: [a, b],
        };
        region.validate()?;
        Ok(region)
    }

    pub fn full(edge: Edge) -> Self {
        Self {
            edge,
            interval: [0.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.interval;
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(invalid(format!(
                "boundary interval [{a}, {b}] must satisfy 0 <= a < b <= 1"
            )));
        }
        Ok(())
    }

    pub fn is_full_edge(&self) -> bool {
        self.interval == [0.0, 1.0]
    }

    pub fn length(&self) -> f64 {
        self.interval[1] - self.interval[0]
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` inside the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let rect = Self { x, y };
        rect.validate()?;
        Ok(rect)
    }

    pub fn unit() -> Self {
        Self {
            x: [0.0, 1.0],
            y: [0.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |[lo, hi]: [f64; 2]| 0.0 <= lo && lo < hi && hi <= 1.0;
        if !(ok(self.x) && ok(self.y)) {
            return Err(invalid(format!(
                "rectangle [{}, {}] x [{}, {}] must have positive area inside the unit square",
                self.x[0], self.x[1], self.y[0], self.y[1]
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.y[1] - self.y[0])
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }
}

/// The strip ω_r of depth `r` behind a boundary region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalRegion {
    pub region: BoundaryRegion,
    pub r: f64,
    pub rect: Rect,
}

/// Builds ω̄_r as a rectangular strip of depth `r` inward from the region's arc.
pub fn build_omega_r(region: &BoundaryRegion, r: f64) -> Result<InternalRegion> {
    region.validate()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid(format!("strip depth r must lie in (0, 1), got {r}")));
    }
    let arc = region.interval;
    let rect = match region.edge {
        Edge::Top => Rect { x: arc, y: [1.0 - r, 1.0] },
        Edge::Bottom => Rect { x: arc, y: [0.0, r] },
        Edge::Left => Rect { x: [0.0, r], y: arc },
        Edge::Right => Rect { x: [1.0 - r, 1.0], y: arc },
    };
    Ok(InternalRegion {
        region: *region,
        r,
        rect,
    })
}

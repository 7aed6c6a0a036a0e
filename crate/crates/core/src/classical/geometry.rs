//! Exact ray geometry of the deformed rectangle.
//!
//! The domain is `{(x, y) : 0 ≤ y ≤ Ly, w(y) ≤ x ≤ Lx}` where the piston is
//! the right wall `x = Lx` and the left wall is the arc
//! `w(y) = √(R² − (y−ε)²) − x_c`, `x_c = √(R² − (Ly−ε)²)`. The arc belongs to
//! the circle of radius `R` centred at `(−x_c, ε)`; it bulges into the box by
//! the deformation profile and is dispersing. `w(Ly) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::BilliardParams;

/// Reflections with `|cos| < GRAZING_COS` against the wall normal are nudged
/// inward so the next search cannot stall on the same wall.
pub const GRAZING_COS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    fn add_scaled(self, d: Self, t: f64) -> Self {
        Self::new(self.x + t * d.x, self.y + t * d.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Piston,
    Top,
    Bottom,
    Arc,
}

/// Position, unit direction and elapsed time of the particle. The speed is
/// carried separately by the billiard (`v_E`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub pos: Vec2,
    pub dir: Vec2,
    pub time: f64,
}

impl ParticleState {
    pub fn new(pos: Vec2, dir: Vec2, time: f64) -> Self {
        Self { pos, dir: dir.normalized(), time }
    }

    /// State right after a reflection off the piston at height `y`, incoming
    /// at angle `theta` from the wall normal (positive = moving up).
    pub fn leaving_piston(y: f64, theta: f64, p: &BilliardParams) -> Self {
        Self {
            pos: Vec2::new(p.lx, y),
            dir: Vec2::new(-theta.cos(), theta.sin()),
            time: 0.0,
        }
    }

    pub fn reversed(&self) -> Self {
        Self { pos: self.pos, dir: Vec2::new(-self.dir.x, -self.dir.y), time: self.time }
    }
}

/// Geometry derived from [`BilliardParams`], cached for fast propagation.
#[derive(Clone, Copy, Debug)]
pub struct Table {
    pub lx: f64,
    pub ly: f64,
    pub radius: f64,
    pub eps: f64,
    /// Horizontal offset of the arc centre, `x_c`; the centre sits at `(−x_c, ε)`.
    pub x_c: f64,
    pub speed: f64,
    min_advance: f64,
}

impl Table {
    pub fn new(p: &BilliardParams) -> Result<Self> {
        p.validate()?;
        let x_c = if p.is_flat() {
            f64::INFINITY
        } else {
            (p.radius * p.radius - (p.ly - p.eps).powi(2)).sqrt()
        };
        Ok(Self {
            lx: p.lx,
            ly: p.ly,
            radius: p.radius,
            eps: p.eps,
            x_c,
            speed: p.speed(),
            min_advance: 1e-12 * p.lx.max(p.ly),
        })
    }

    pub fn is_flat(&self) -> bool {
        self.radius.is_infinite()
    }

    /// Abscissa of the left wall at height `y`.
    pub fn left_wall(&self, y: f64) -> f64 {
        if self.is_flat() {
            return 0.0;
        }
        let a = y - self.eps;
        let b = self.ly - self.eps;
        // √(R²−a²) − √(R²−b²) without cancellation.
        (b * b - a * a) / ((self.radius * self.radius - a * a).sqrt() + self.x_c)
    }

    pub fn contains(&self, q: Vec2, tol: f64) -> bool {
        q.y >= -tol && q.y <= self.ly + tol && q.x <= self.lx + tol && q.x >= self.left_wall(q.y.clamp(0.0, self.ly)) - tol
    }

    /// Area of the billiard, `Lx·Ly − ∫ w(y) dy`.
    pub fn area(&self) -> f64 {
        if self.is_flat() {
            return self.lx * self.ly;
        }
        // ∫_0^{Ly} √(R²−(y−ε)²) dy in closed form.
        let r = self.radius;
        let prim = |a: f64| 0.5 * (a * (r * r - a * a).sqrt() + r * r * (a / r).asin());
        let arc = prim(self.ly - self.eps) - prim(-self.eps);
        self.lx * self.ly - (arc - self.x_c * self.ly)
    }

    fn arc_normal(&self, q: Vec2) -> Vec2 {
        // Outward from the circle centre, i.e. pointing into the box.
        Vec2::new(q.x + self.x_c, q.y - self.eps).normalized()
    }

    /// Nearest wall hit along the ray, skipping `skip` (the wall just left).
    fn next_hit(&self, s: &ParticleState, skip: Option<Wall>) -> Option<(f64, Wall)> {
        let (p, d) = (s.pos, s.dir);
        let tmin = self.min_advance;
        let tol = 1e-12 * self.lx.max(self.ly);
        let mut best: Option<(f64, Wall)> = None;
        let mut consider = |t: f64, w: Wall| {
            if t > tmin && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, w));
            }
        };

        if skip != Some(Wall::Piston) && d.x > 0.0 {
            let t = (self.lx - p.x) / d.x;
            let y = p.y + t * d.y;
            if (-tol..=self.ly + tol).contains(&y) {
                consider(t, Wall::Piston);
            }
        }
        if skip != Some(Wall::Top) && d.y > 0.0 {
            let t = (self.ly - p.y) / d.y;
            let x = p.x + t * d.x;
            if x <= self.lx + tol && x >= self.left_wall(self.ly) - tol {
                consider(t, Wall::Top);
            }
        }
        if skip != Some(Wall::Bottom) && d.y < 0.0 {
            let t = -p.y / d.y;
            let x = p.x + t * d.x;
            if x <= self.lx + tol && x >= self.left_wall(0.0) - tol {
                consider(t, Wall::Bottom);
            }
        } else if skip != Some(Wall::Bottom) && d.y == 0.0 && p.y < 0.0 {
            // unreachable for valid states
        }
        if skip != Some(Wall::Arc) {
            if self.is_flat() {
                if d.x < 0.0 {
                    let t = -p.x / d.x;
                    let y = p.y + t * d.y;
                    if (-tol..=self.ly + tol).contains(&y) {
                        consider(t, Wall::Arc);
                    }
                }
            } else {
                // |p + t d − c|² = R², entering root.
                let rel = Vec2::new(p.x + self.x_c, p.y - self.eps);
                let b = rel.dot(d);
                let c = rel.dot(rel) - self.radius * self.radius;
                let disc = b * b - c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    // Stable form of −b − √disc.
                    let t = if b > 0.0 { -b - sq } else { c / (-b + sq) };
                    let y = p.y + t * d.y;
                    if (-tol..=self.ly + tol).contains(&y) {
                        consider(t, Wall::Arc);
                    }
                }
            }
        }
        best
    }

    /// Advances to the next wall and reflects specularly.
    pub fn propagate(&self, s: &ParticleState, skip: Option<Wall>) -> Result<(ParticleState, Wall)> {
        let (t, wall) = self
            .next_hit(s, skip)
            .ok_or(Error::NoIntersection { x: s.pos.x, y: s.pos.y })?;
        let mut hit = s.pos.add_scaled(s.dir, t);
        let normal = match wall {
            Wall::Piston => {
                hit.x = self.lx;
                Vec2::new(-1.0, 0.0)
            }
            Wall::Top => {
                hit.y = self.ly;
                Vec2::new(0.0, -1.0)
            }
            Wall::Bottom => {
                hit.y = 0.0;
                Vec2::new(0.0, 1.0)
            }
            Wall::Arc => {
                if self.is_flat() {
                    hit.x = 0.0;
                    Vec2::new(1.0, 0.0)
                } else {
                    self.arc_normal(hit)
                }
            }
        };
        let dn = s.dir.dot(normal);
        let mut dir = s.dir.add_scaled(normal, -2.0 * dn);
        if dn.abs() < GRAZING_COS {
            dir = dir.add_scaled(normal, GRAZING_COS);
        }
        let next = ParticleState {
            pos: hit,
            dir: dir.normalized(),
            time: s.time + t / self.speed,
        };
        Ok((next, wall))
    }
}

/// Single step of the billiard map: the state right after the next specular
/// reflection and the wall that was hit.
pub fn propagate_to_next_collision(
    s: &ParticleState,
    p: &BilliardParams,
) -> Result<(ParticleState, Wall)> {
    Table::new(p)?.propagate(s, None)
}

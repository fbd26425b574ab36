//! Midbody cross-section template.
//!
//! The section is described in the (y, z) plane of one side of the hull,
//! starting at the keel (y = 0, z = 0) and ending at the deck edge
//! (y = b, z = D). It is made of a keel arc, a straight deadrise segment, a
//! chine arc and a straight side segment, each tangent to the next.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub y: f64,
    pub z: f64,
}

impl Vec2 {
    pub const fn new(y: f64, z: f64) -> Self {
        Vec2 { y, z }
    }

    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.y + o.y, self.z + o.z)
    }

    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.y - o.y, self.z - o.z)
    }

    fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.y * s, self.z * s)
    }

    fn norm(self) -> f64 {
        self.y.hypot(self.z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub half_beam: f64,
    pub depth: f64,
    pub deadrise: f64,
    pub keel_radius: f64,
    pub chine_radius: f64,
    pub chine_halfbeam: f64,
    /// Depth of the virtual sharp keel point below the baseline.
    pub keel_drop: f64,
    /// Keel arc / deadrise line tangency.
    pub p1: Vec2,
    /// Deadrise line / chine arc tangency.
    pub p2: Vec2,
    /// Chine arc / side line tangency.
    pub p3: Vec2,
    pub chine_corner: Vec2,
    pub chine_center: Vec2,
    /// Signed turning angle at the chine, positive for a convex corner.
    pub chine_turn: f64,
    pub keel_tangent_len: f64,
    pub chine_tangent_len: f64,
    pub side_len: f64,
}

impl CrossSection {
    /// `deadrise` in radians; all lengths in the same unit.
    pub fn new(
        half_beam: f64,
        depth: f64,
        deadrise: f64,
        keel_radius: f64,
        chine_radius: f64,
        chine_halfbeam: f64,
    ) -> Self {
        let (sb, cb) = deadrise.sin_cos();
        let tb = deadrise.tan();
        let keel_drop = keel_radius * (1.0 / cb - 1.0);
        let p1 = Vec2::new(keel_radius * sb, keel_radius * (1.0 - cb));
        let keel_tangent_len = keel_radius * tb;

        let c = chine_halfbeam;
        let corner = Vec2::new(c, c * tb - keel_drop);
        let deck = Vec2::new(half_beam, depth);
        let side = deck.sub(corner);
        let side_len = side.norm();
        let d1 = Vec2::new(cb, sb);
        let d2 = if side_len > 0.0 {
            side.scale(1.0 / side_len)
        } else {
            Vec2::new(0.0, 1.0)
        };
        let chine_turn = d2.z.atan2(d2.y) - deadrise;
        let chine_tangent_len = chine_radius * (0.5 * chine_turn.abs()).tan();
        let p2 = corner.sub(d1.scale(chine_tangent_len));
        let p3 = corner.add(d2.scale(chine_tangent_len));
        let chine_center = if chine_turn >= 0.0 {
            p2.add(Vec2::new(-sb, cb).scale(chine_radius))
        } else {
            p2.add(Vec2::new(sb, -cb).scale(chine_radius))
        };

        CrossSection {
            half_beam,
            depth,
            deadrise,
            keel_radius,
            chine_radius,
            chine_halfbeam,
            keel_drop,
            p1,
            p2,
            p3,
            chine_corner: corner,
            chine_center,
            chine_turn,
            keel_tangent_len,
            chine_tangent_len,
            side_len,
        }
    }

    /// Room left on the deadrise line once both arcs have taken their tangent lengths.
    pub fn bottom_fit_margin(&self) -> f64 {
        self.chine_halfbeam / self.deadrise.cos() - self.keel_tangent_len - self.chine_tangent_len
    }

    /// Room left on the side line after the chine arc.
    pub fn side_fit_margin(&self) -> f64 {
        self.side_len - self.chine_tangent_len
    }

    /// Half-breadth of the section at height `z` in [0, depth].
    pub fn half_breadth(&self, z: f64) -> f64 {
        let rk = self.keel_radius;
        if z <= self.p1.z && rk > 0.0 && self.deadrise > 0.0 {
            let dz = rk - z;
            return (rk * rk - dz * dz).max(0.0).sqrt();
        }
        if z < self.p2.z {
            return (z + self.keel_drop) / self.deadrise.tan();
        }
        if z < self.p3.z {
            let r = self.chine_radius;
            let dz = z - self.chine_center.z;
            let w = (r * r - dz * dz).max(0.0).sqrt();
            return if self.chine_turn >= 0.0 {
                self.chine_center.y + w
            } else {
                self.chine_center.y - w
            };
        }
        let dz = self.depth - self.p3.z;
        if dz <= 0.0 {
            return self.half_beam;
        }
        let s = ((z - self.p3.z) / dz).clamp(0.0, 1.0);
        self.p3.y + s * (self.half_beam - self.p3.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    #[test]
    fn rectangle() {
        let s = CrossSection::new(5.0, 10.0, 0.0, 0.0, 0.0, 5.0);
        for z in [0.0, 1.0, 5.0, 9.99, 10.0] {
            assert!((s.half_breadth(z) - 5.0).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn sharp_vee() {
        // No radii, chine at the deck edge: a pure V with the given deadrise.
        let b = 5.0;
        let beta = deg(30.0);
        let d = b * beta.tan();
        let s = CrossSection::new(b, d, beta, 0.0, 0.0, b);
        for k in 0..=10 {
            let z = d * k as f64 / 10.0;
            assert!((s.half_breadth(z) - z / beta.tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn rounded_bilge_box() {
        // Flat bottom with a quarter-circle bilge of radius r.
        let (b, d, r) = (5.0, 10.0, 2.0);
        let s = CrossSection::new(b, d, 0.0, 0.0, r, b);
        assert!((s.chine_turn - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((s.half_breadth(0.0) - (b - r)).abs() < 1e-12);
        let z = 0.7;
        let expect = (b - r) + (r * r - (r - z) * (r - z)).sqrt();
        assert!((s.half_breadth(z) - expect).abs() < 1e-12);
        assert!((s.half_breadth(r) - b).abs() < 1e-12);
        assert!((s.half_breadth(6.0) - b).abs() < 1e-12);
        assert!(s.bottom_fit_margin() > 0.0 && s.side_fit_margin() > 0.0);
    }

    #[test]
    fn keel_arc_tangent_to_deadrise_line() {
        let beta = deg(20.0);
        let s = CrossSection::new(6.0, 8.0, beta, 1.5, 0.5, 5.0);
        let z1 = s.p1.z;
        let below = s.half_breadth(z1 - 1e-7);
        let above = s.half_breadth(z1 + 1e-7);
        assert!((below - above).abs() < 1e-6);
        assert!((s.half_breadth(0.0)).abs() < 1e-12);
        // Continuity across every junction.
        for zj in [s.p1.z, s.p2.z, s.p3.z] {
            let a = s.half_breadth(zj - 1e-9);
            let b = s.half_breadth(zj + 1e-9);
            assert!((a - b).abs() < 1e-6, "jump at {zj}: {a} vs {b}");
        }
        assert!((s.half_breadth(8.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn concave_chine() {
        // Side flatter than the bottom gives a concave chine.
        let s = CrossSection::new(10.0, 2.0, deg(30.0), 0.0, 1.0, 1.0);
        assert!(s.chine_turn < 0.0);
        for zj in [s.p2.z, s.p3.z] {
            let a = s.half_breadth(zj - 1e-9);
            let b = s.half_breadth(zj + 1e-9);
            assert!((a - b).abs() < 1e-6);
        }
    }
}

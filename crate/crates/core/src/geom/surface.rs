//! Algebraic hull surface.
//!
//! Frame: x runs aft to forward in [0, loa], y is the starboard half-breadth,
//! z runs keel-up in [0, depth].
//!
//! Each waterline is split into a stern taper, a parallel midbody and a bow
//! taper. The midbody carries the [`CrossSection`] template unchanged. In a
//! taper the half-breadth falls from the midbody value to the end value along
//! a cubic in `u = t^w` (t the normalized position inside the taper, w the
//! waterplane fullness exponent) fixed by four conditions: value and zero
//! slope at the midbody end, value and drift-angle slope at the hull end.
//! Bulbs are superelliptic noses with elliptical sections, blended aft by a
//! quartic fillet, and united with the hull by taking the larger offset.

use crate::error::{Error, Result};
use crate::geom::section::CrossSection;
use crate::params::{check_feasibility, idx, ConstraintFamily, HullParameters};

/// Geometry that can be sampled on a (x, z) grid.
pub trait HullShape: Sync {
    fn loa(&self) -> f64;
    fn depth(&self) -> f64;
    /// Aft end of the waterline at height z.
    fn x_aft(&self, z: f64) -> f64;
    /// Forward end of the waterline at height z.
    fn x_fwd(&self, z: f64) -> f64;
    /// Half-breadth without range checks; 0 outside the waterline.
    fn offset(&self, x: f64, z: f64) -> f64;
}

/// One end of the hull (bow or stern) at a given waterline.
#[derive(Debug, Clone, PartialEq)]
struct Taper {
    length: f64,
    rake_tan: f64,
    profile_exp: f64,
    keelrise: f64,
    keelrise_exp: f64,
    fullness: f64,
    transition: f64,
    blend_exp: f64,
}

impl Taper {
    /// Set-back of the hull end from the deck-level end, at relative height zeta.
    fn end_setback(&self, depth: f64, zeta: f64) -> f64 {
        let s = 1.0 - zeta;
        depth * self.rake_tan * s.powf(self.profile_exp)
            + self.keelrise * self.length * s.powf(self.keelrise_exp)
    }

    /// Distance of the midbody end of the taper from the deck-level hull end.
    fn start_offset(&self, zeta: f64) -> f64 {
        self.length * (1.0 + self.transition * (1.0 - zeta).powf(self.blend_exp))
    }
}

/// Cubic in u from (0, y0) with zero slope to (1, y1) with slope m1 (both in u).
fn taper_cubic(u: f64, y0: f64, y1: f64, m1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    y0 * (2.0 * u3 - 3.0 * u2 + 1.0) + y1 * (3.0 * u2 - 2.0 * u3) + m1 * (u3 - u2)
}

/// End slope in u for a drift angle, clamped so the cubic stays monotone.
fn end_slope(drift_tan: f64, length: f64, fullness: f64, y0: f64, y1: f64) -> f64 {
    let drop = y0 - y1;
    if drop <= 0.0 {
        return 0.0;
    }
    -(drift_tan * length / fullness).min(3.0 * drop)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bulb {
    /// Longitudinal position of the widest section.
    pub x_center: f64,
    /// Nose length from the widest section to the tip.
    pub length: f64,
    /// Fillet length behind the widest section.
    pub fillet: f64,
    pub z_center: f64,
    pub rz_low: f64,
    pub rz_up: f64,
    pub ry: f64,
    pub tip_exp: f64,
    /// +1 for a bow bulb (nose points forward), -1 for a stern bulb.
    pub dir: f64,
}

impl Bulb {
    fn rel_height(&self, z: f64) -> f64 {
        let dz = z - self.z_center;
        if dz >= 0.0 {
            dz / self.rz_up
        } else {
            -dz / self.rz_low
        }
    }

    /// Section scale along x: 1 at the widest section, 0 at the tip and at the fillet end.
    fn scale(&self, x: f64) -> f64 {
        let s = self.dir * (x - self.x_center);
        if s >= 0.0 {
            let xi = s / self.length;
            if xi >= 1.0 {
                0.0
            } else {
                (1.0 - xi.powf(self.tip_exp)).powf(1.0 / self.tip_exp)
            }
        } else {
            let t = -s / self.fillet;
            if t >= 1.0 {
                0.0
            } else {
                let t2 = t * t;
                1.0 - 6.0 * t2 + 8.0 * t2 * t - 3.0 * t2 * t2
            }
        }
    }

    pub fn offset(&self, x: f64, z: f64) -> f64 {
        let d = self.rel_height(z);
        if d >= 1.0 {
            return 0.0;
        }
        let g = self.scale(x);
        if g <= d {
            return 0.0;
        }
        self.ry * (g * g - d * d).sqrt()
    }

    /// Tip position at height z, if the bulb spans that height.
    pub fn tip(&self, z: f64) -> Option<f64> {
        let d = self.rel_height(z);
        if d > 1.0 {
            return None;
        }
        let xi = (1.0 - d.powf(self.tip_exp))
            .max(0.0)
            .powf(1.0 / self.tip_exp);
        Some(self.x_center + self.dir * self.length * xi)
    }

    pub fn top(&self) -> f64 {
        self.z_center + self.rz_up
    }

    pub fn bottom(&self) -> f64 {
        self.z_center - self.rz_low
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Margin {
    pub family: ConstraintFamily,
    pub name: &'static str,
    pub margin: f64,
    pub terms: &'static [usize],
}

/// Resolved constants of a parameter vector. Built without any validity
/// checks so it can also be used to measure constraint margins.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceLayout {
    pub loa: f64,
    pub depth: f64,
    pub half_beam: f64,
    pub design_draft: f64,
    pub section: CrossSection,
    bow: Taper,
    stern: Taper,
    bow_drift_keel_tan: f64,
    bow_drift_deck_tan: f64,
    stern_drift_deck_tan: f64,
    stern_drift_exp: f64,
    transom_height: f64,
    transom_halfbeam: f64,
    transom_deadrise_tan: f64,
    pub bow_bulb: Option<Bulb>,
    pub stern_bulb: Option<Bulb>,
    bow_bulb_raw: Bulb,
    stern_bulb_raw: Bulb,
}

const SECTION_TERMS: &[usize] = &[
    idx::BEAM,
    idx::DEPTH,
    idx::DEADRISE,
    idx::CHINE_RADIUS,
    idx::KEEL_RADIUS,
    idx::CHINE_HALFBEAM,
];
const OVERLAP_TERMS: &[usize] = &[
    idx::BOW_TAPER,
    idx::STERN_TAPER,
    idx::BOW_TRANSITION,
    idx::STERN_TRANSITION,
];
const BOW_PROFILE_TERMS: &[usize] = &[idx::BOW_TAPER, idx::DEPTH, idx::BOW_RAKE, idx::BOW_KEELRISE];
const STERN_PROFILE_TERMS: &[usize] = &[
    idx::STERN_TAPER,
    idx::DEPTH,
    idx::STERN_RAKE,
    idx::STERN_KEELRISE,
];
const BOW_BULB_BASE_TERMS: &[usize] = &[
    idx::BOW_BULB_LENGTH,
    idx::DESIGN_DRAFT,
    idx::BOW_BULB_DEPTH,
    idx::BOW_BULB_RADIUS,
];
const BOW_BULB_DECK_TERMS: &[usize] = &[
    idx::BOW_BULB_LENGTH,
    idx::DESIGN_DRAFT,
    idx::BOW_BULB_DEPTH,
    idx::BOW_BULB_RADIUS,
    idx::BOW_BULB_VASYM,
];
const BOW_FILLET_TERMS: &[usize] = &[
    idx::BOW_BULB_LENGTH,
    idx::BOW_BULB_FILLET,
    idx::BOW_BULB_DEPTH,
    idx::BOW_BULB_RADIUS,
    idx::BOW_BULB_VASYM,
    idx::BOW_TAPER,
    idx::BOW_TRANSITION,
    idx::BOW_BLEND,
    idx::BOW_RAKE,
    idx::BOW_KEELRISE,
];
const STERN_BULB_BASE_TERMS: &[usize] = &[
    idx::STERN_BULB_LENGTH,
    idx::DESIGN_DRAFT,
    idx::STERN_BULB_DEPTH,
    idx::STERN_BULB_RADIUS,
];
const STERN_BULB_DECK_TERMS: &[usize] = &[
    idx::STERN_BULB_LENGTH,
    idx::DESIGN_DRAFT,
    idx::STERN_BULB_DEPTH,
    idx::STERN_BULB_RADIUS,
    idx::STERN_BULB_VASYM,
];
const STERN_FILLET_TERMS: &[usize] = &[
    idx::STERN_BULB_LENGTH,
    idx::STERN_BULB_FILLET,
    idx::STERN_BULB_DEPTH,
    idx::STERN_BULB_RADIUS,
    idx::STERN_BULB_VASYM,
    idx::STERN_TAPER,
    idx::STERN_TRANSITION,
    idx::STERN_BLEND,
    idx::STERN_RAKE,
    idx::STERN_KEELRISE,
];

/// Minimum clearance between the chine corner and the deck, as a fraction of depth.
const CHINE_DECK_CLEARANCE: f64 = 0.01;

impl SurfaceLayout {
    pub fn new(p: &HullParameters) -> Self {
        let loa = p.loa();
        let depth = p.depth();
        let half_beam = 0.5 * p.beam();
        let design_draft = p.design_draft();
        let section = CrossSection::new(
            half_beam,
            depth,
            p.deadrise_deg().to_radians(),
            p.keel_radius_frac() * depth,
            p.chine_radius_frac() * depth,
            p.chine_halfbeam_frac() * half_beam,
        );
        let bow = Taper {
            length: p.bow_taper_frac() * loa,
            rake_tan: p.bow_rake_deg().to_radians().tan(),
            profile_exp: p.bow_profile_exponent(),
            keelrise: p.bow_keelrise_start_frac(),
            keelrise_exp: p.bow_keelrise_exponent(),
            fullness: p.bow_waterplane_fullness_exponent(),
            transition: p.bow_midbody_transition_frac(),
            blend_exp: p.bow_section_blend_exponent(),
        };
        let stern = Taper {
            length: p.stern_taper_frac() * loa,
            rake_tan: p.stern_rake_deg().to_radians().tan(),
            profile_exp: p.stern_profile_exponent(),
            keelrise: p.stern_keelrise_start_frac(),
            keelrise_exp: p.stern_keelrise_exponent(),
            fullness: p.stern_waterplane_fullness_exponent(),
            transition: p.stern_midbody_transition_frac(),
            blend_exp: p.stern_section_blend_exponent(),
        };

        let mut layout = SurfaceLayout {
            loa,
            depth,
            half_beam,
            design_draft,
            section,
            bow,
            stern,
            bow_drift_keel_tan: p.bow_drift_keel_deg().to_radians().tan(),
            bow_drift_deck_tan: p.bow_drift_deck_deg().to_radians().tan(),
            stern_drift_deck_tan: p.stern_drift_deck_deg().to_radians().tan(),
            stern_drift_exp: p.stern_drift_exponent(),
            transom_height: p.stern_transom_bottom_height_frac() * depth,
            transom_halfbeam: p.transom_beam_frac() * half_beam,
            transom_deadrise_tan: p.stern_transom_deadrise_deg().to_radians().tan(),
            bow_bulb: None,
            stern_bulb: None,
            bow_bulb_raw: Bulb {
                x_center: 0.0,
                length: 0.0,
                fillet: 0.0,
                z_center: 0.0,
                rz_low: 0.0,
                rz_up: 0.0,
                ry: 0.0,
                tip_exp: 2.0,
                dir: 1.0,
            },
            stern_bulb_raw: Bulb {
                x_center: 0.0,
                length: 0.0,
                fillet: 0.0,
                z_center: 0.0,
                rz_low: 0.0,
                rz_up: 0.0,
                ry: 0.0,
                tip_exp: 2.0,
                dir: -1.0,
            },
        };

        let bulb = |lf: f64,
                    cdf: f64,
                    rf: f64,
                    vr: f64,
                    wr: f64,
                    n: f64,
                    ff: f64,
                    bow: bool,
                    l: &SurfaceLayout| {
            let r = rf * design_draft * 0.5;
            let zc = design_draft * (1.0 - cdf);
            let x_center = if bow {
                l.x_bow_profile(zc - r)
            } else {
                l.x_stern_profile(zc - r)
            };
            let room = if bow { loa - x_center } else { x_center };
            let taper = if bow { l.bow.length } else { l.stern.length };
            Bulb {
                x_center,
                length: lf * room,
                fillet: ff * taper,
                z_center: zc,
                rz_low: r,
                rz_up: vr * r,
                ry: wr * r,
                tip_exp: n,
                dir: if bow { 1.0 } else { -1.0 },
            }
        };
        layout.bow_bulb_raw = bulb(
            p.bow_bulb_length_frac(),
            p.bow_bulb_center_depth_frac(),
            p.bow_bulb_radius_frac(),
            p.bow_bulb_vertical_asymmetry_ratio(),
            p.bow_bulb_lateral_width_ratio(),
            p.bow_bulb_tip_exponent(),
            p.bow_bulb_fillet_length_frac(),
            true,
            &layout,
        );
        layout.stern_bulb_raw = bulb(
            p.stern_bulb_length_frac(),
            p.stern_bulb_center_depth_frac(),
            p.stern_bulb_radius_frac(),
            p.stern_bulb_vertical_asymmetry_ratio(),
            p.stern_bulb_lateral_width_ratio(),
            p.stern_bulb_tip_exponent(),
            p.stern_bulb_fillet_length_frac(),
            false,
            &layout,
        );
        let tiny = 1e-9 * loa;
        let active =
            |b: &Bulb| b.length > tiny && b.rz_low > tiny && b.ry > tiny && b.fillet > tiny;
        if active(&layout.bow_bulb_raw) {
            layout.bow_bulb = Some(layout.bow_bulb_raw.clone());
        }
        if active(&layout.stern_bulb_raw) {
            layout.stern_bulb = Some(layout.stern_bulb_raw.clone());
        }
        layout
    }

    fn zeta(&self, z: f64) -> f64 {
        (z / self.depth).clamp(0.0, 1.0)
    }

    /// Stem profile: forward end of the hull proper (without bulb).
    pub fn x_bow_profile(&self, z: f64) -> f64 {
        self.loa - self.bow.end_setback(self.depth, self.zeta(z))
    }

    /// Stern profile: aft end of the hull proper (without bulb).
    pub fn x_stern_profile(&self, z: f64) -> f64 {
        self.stern.end_setback(self.depth, self.zeta(z))
    }

    /// Where the bow taper meets the midbody.
    pub fn x_bow_taper_start(&self, z: f64) -> f64 {
        self.loa - self.bow.start_offset(self.zeta(z))
    }

    /// Where the stern taper meets the midbody.
    pub fn x_stern_taper_end(&self, z: f64) -> f64 {
        self.stern.start_offset(self.zeta(z))
    }

    pub fn transom_half_breadth(&self, z: f64, midbody: f64) -> f64 {
        if z < self.transom_height {
            return 0.0;
        }
        let mut y = midbody.min(self.transom_halfbeam);
        if self.transom_deadrise_tan > 0.0 {
            y = y.min((z - self.transom_height) / self.transom_deadrise_tan);
        }
        y.max(0.0)
    }

    fn bow_drift_tan(&self, z: f64) -> f64 {
        let zeta = self.zeta(z);
        let deg_keel = self.bow_drift_keel_tan.atan();
        let deg_deck = self.bow_drift_deck_tan.atan();
        (deg_keel + (deg_deck - deg_keel) * zeta).tan()
    }

    fn stern_drift_tan(&self, z: f64) -> f64 {
        let zeta = self.zeta(z);
        (self.stern_drift_deck_tan.atan() * zeta.powf(self.stern_drift_exp)).tan()
    }

    /// Half-breadth of the hull proper (no bulbs) and the taper pieces.
    pub fn hull_offset(&self, x: f64, z: f64) -> f64 {
        let xa = self.x_stern_profile(z);
        let xf = self.x_bow_profile(z);
        if x < xa || x > xf {
            return 0.0;
        }
        let y0 = self.section.half_breadth(z);
        let xbs = self.x_bow_taper_start(z);
        if x > xbs {
            let len = xf - xbs;
            let t = ((x - xbs) / len).clamp(0.0, 1.0);
            let w = self.bow.fullness;
            let m1 = end_slope(self.bow_drift_tan(z), len, w, y0, 0.0);
            return taper_cubic(t.powf(w), y0, 0.0, m1).max(0.0);
        }
        let xse = self.x_stern_taper_end(z);
        if x < xse {
            let len = xse - xa;
            let t = ((xse - x) / len).clamp(0.0, 1.0);
            let w = self.stern.fullness;
            let y1 = self.transom_half_breadth(z, y0);
            let m1 = end_slope(self.stern_drift_tan(z), len, w, y0, y1);
            return taper_cubic(t.powf(w), y0, y1, m1).max(0.0);
        }
        y0
    }

    pub fn offset(&self, x: f64, z: f64) -> f64 {
        let mut y = self.hull_offset(x, z);
        if let Some(b) = &self.bow_bulb {
            y = y.max(b.offset(x, z));
        }
        if let Some(b) = &self.stern_bulb {
            y = y.max(b.offset(x, z));
        }
        if y <= 1e-12 * self.loa {
            0.0
        } else {
            y
        }
    }

    pub fn x_fwd(&self, z: f64) -> f64 {
        let mut x = self.x_bow_profile(z);
        if let Some(t) = self.bow_bulb.as_ref().and_then(|b| b.tip(z)) {
            x = x.max(t);
        }
        x
    }

    pub fn x_aft(&self, z: f64) -> f64 {
        let mut x = self.x_stern_profile(z);
        if let Some(t) = self.stern_bulb.as_ref().and_then(|b| b.tip(z)) {
            x = x.min(t);
        }
        x
    }

    /// Signed slack of every geometric constraint, in the layout's length unit.
    pub fn margins(&self) -> Vec<Margin> {
        let mut out = Vec::with_capacity(12);
        let mut push = |family, name, margin: f64, terms| {
            let margin = if margin.is_nan() { -1.0 } else { margin };
            out.push(Margin {
                family,
                name,
                margin,
                terms,
            })
        };
        let l = self.loa;
        let d = self.depth;
        let bow = &self.bow;
        let stern = &self.stern;

        push(
            ConstraintFamily::TaperOverlap,
            "taper_overlap",
            l - bow.start_offset(0.0) - stern.start_offset(0.0),
            OVERLAP_TERMS,
        );
        push(
            ConstraintFamily::ProfileContainment,
            "bow_profile_in_taper",
            bow.length - bow.end_setback(d, 0.0),
            BOW_PROFILE_TERMS,
        );
        push(
            ConstraintFamily::ProfileContainment,
            "stern_profile_in_taper",
            stern.length - stern.end_setback(d, 0.0),
            STERN_PROFILE_TERMS,
        );

        let s = &self.section;
        push(
            ConstraintFamily::SectionFit,
            "chine_below_deck",
            d - s.chine_corner.z - CHINE_DECK_CLEARANCE * d,
            SECTION_TERMS,
        );
        push(
            ConstraintFamily::SectionFit,
            "bottom_arcs_fit",
            s.bottom_fit_margin(),
            SECTION_TERMS,
        );
        push(
            ConstraintFamily::SectionFit,
            "side_arc_fit",
            s.side_fit_margin(),
            SECTION_TERMS,
        );

        let bulbs = [
            (
                &self.bow_bulb,
                &self.bow_bulb_raw,
                [
                    "bow_bulb_above_baseline",
                    "bow_bulb_below_deck",
                    "bow_bulb_fillet_in_taper",
                ],
                [BOW_BULB_BASE_TERMS, BOW_BULB_DECK_TERMS, BOW_FILLET_TERMS],
            ),
            (
                &self.stern_bulb,
                &self.stern_bulb_raw,
                [
                    "stern_bulb_above_baseline",
                    "stern_bulb_below_deck",
                    "stern_bulb_fillet_in_taper",
                ],
                [
                    STERN_BULB_BASE_TERMS,
                    STERN_BULB_DECK_TERMS,
                    STERN_FILLET_TERMS,
                ],
            ),
        ];
        for (active, raw, names, terms) in bulbs {
            if active.is_none() {
                // An absent bulb satisfies its constraints with a fixed slack.
                for k in 0..3 {
                    push(ConstraintFamily::BulbContainment, names[k], l, terms[k]);
                }
                continue;
            }
            push(
                ConstraintFamily::BulbContainment,
                names[0],
                raw.bottom(),
                terms[0],
            );
            push(
                ConstraintFamily::BulbContainment,
                names[1],
                d - raw.top(),
                terms[1],
            );
            let fillet_end = raw.x_center - raw.dir * raw.fillet;
            let top = raw.top().min(d);
            let slack = if raw.dir > 0.0 {
                fillet_end - self.x_bow_taper_start(top)
            } else {
                self.x_stern_taper_end(top) - fillet_end
            };
            push(
                ConstraintFamily::FilletContainment,
                names[2],
                slack,
                terms[2],
            );
        }
        out
    }
}

/// Validated hull surface built from a feasible parameter vector.
#[derive(Debug, Clone)]
pub struct HullSurface {
    params: HullParameters,
    layout: SurfaceLayout,
}

impl HullSurface {
    pub fn new(params: &HullParameters) -> Result<Self> {
        let report = check_feasibility(params)?;
        if !report.feasible {
            let names: Vec<&str> = report.violations().map(|c| c.name).collect();
            return Err(Error::Infeasible(format!(
                "violated constraints: {}",
                names.join(", ")
            )));
        }
        Ok(HullSurface {
            params: *params,
            layout: SurfaceLayout::new(params),
        })
    }

    pub fn params(&self) -> &HullParameters {
        &self.params
    }

    pub fn layout(&self) -> &SurfaceLayout {
        &self.layout
    }

    pub fn design_draft(&self) -> f64 {
        self.layout.design_draft
    }

    /// Half-breadth at (x, z), with envelope checks.
    pub fn half_beam(&self, x: f64, z: f64) -> Result<f64> {
        let l = &self.layout;
        let tol = 1e-9 * l.loa;
        if !(x.is_finite() && z.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if x < -tol || x > l.loa + tol || z < -tol || z > l.depth + tol {
            return Err(Error::Domain(format!(
                "({x}, {z}) outside [0, {}] x [0, {}]",
                l.loa, l.depth
            )));
        }
        Ok(l.offset(x.clamp(0.0, l.loa), z.clamp(0.0, l.depth)))
    }

    /// Waterline length at height z (bulbs included).
    pub fn waterline_length(&self, z: f64) -> f64 {
        self.layout.x_fwd(z) - self.layout.x_aft(z)
    }
}

impl HullShape for HullSurface {
    fn loa(&self) -> f64 {
        self.layout.loa
    }

    fn depth(&self) -> f64 {
        self.layout.depth
    }

    fn x_aft(&self, z: f64) -> f64 {
        self.layout.x_aft(z)
    }

    fn x_fwd(&self, z: f64) -> f64 {
        self.layout.x_fwd(z)
    }

    fn offset(&self, x: f64, z: f64) -> f64 {
        self.layout.offset(x, z)
    }
}

/// Wigley parabolic hull, keel at z = 0 and waterline at z = draft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WigleySurface {
    pub length: f64,
    pub beam: f64,
    pub draft: f64,
}

impl WigleySurface {
    /// The standard L/B = 10, L/T = 16 hull.
    pub fn standard() -> Self {
        WigleySurface {
            length: 100.0,
            beam: 10.0,
            draft: 6.25,
        }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 9.0 * self.length * self.beam * self.draft
    }
}

impl HullShape for WigleySurface {
    fn loa(&self) -> f64 {
        self.length
    }

    fn depth(&self) -> f64 {
        self.draft
    }

    fn x_aft(&self, _z: f64) -> f64 {
        0.0
    }

    fn x_fwd(&self, _z: f64) -> f64 {
        self.length
    }

    fn offset(&self, x: f64, z: f64) -> f64 {
        let xi = 2.0 * (x - 0.5 * self.length) / self.length;
        let zeta = (self.draft - z) / self.draft;
        if xi.abs() > 1.0 || !(0.0..=1.0).contains(&zeta) {
            return 0.0;
        }
        0.5 * self.beam * (1.0 - xi * xi) * (1.0 - zeta * zeta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ParameterRanges, TERMS};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prism_midship_is_half_beam() {
        let p = HullParameters::prism(100.0, 0.15, 0.1, 0.05);
        let s = HullSurface::new(&p).unwrap();
        for z in [0.0, 2.5, 5.0, 10.0] {
            assert!((s.half_beam(50.0, z).unwrap() - 7.5).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_envelope_is_domain_error() {
        let s = HullSurface::new(&HullParameters::prism(100.0, 0.15, 0.1, 0.05)).unwrap();
        assert!(matches!(s.half_beam(101.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(s.half_beam(50.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(s.half_beam(50.0, 10.5), Err(Error::Domain(_))));
    }

    fn random_feasible(n: usize, seed: u64) -> Vec<HullParameters> {
        let ranges = ParameterRanges::full();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| crate::params::sample_feasible(&ranges, &mut rng, 100_000).unwrap())
            .collect()
    }

    #[test]
    fn stem_point_is_zero_and_offsets_nonnegative() {
        for p in random_feasible(40, 5) {
            let s = HullSurface::new(&p).unwrap();
            let l = s.layout();
            for k in 0..=20 {
                let z = l.depth * k as f64 / 20.0;
                let xf = l.x_bow_profile(z);
                if l.bow.length > 0.0 {
                    assert_eq!(l.hull_offset(xf, z), 0.0);
                }
                for i in 0..=40 {
                    let x = l.loa * i as f64 / 40.0;
                    assert!(s.half_beam(x, z).unwrap() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn midbody_equals_section_template() {
        for p in random_feasible(20, 6) {
            let s = HullSurface::new(&p).unwrap();
            let l = s.layout();
            for k in 0..=10 {
                let z = l.depth * k as f64 / 10.0;
                let (xa, xb) = (l.x_stern_taper_end(z), l.x_bow_taper_start(z));
                if xb - xa < 1e-9 {
                    continue;
                }
                let bulb_free = |x: f64| {
                    l.bow_bulb.as_ref().is_none_or(|b| b.offset(x, z) == 0.0)
                        && l.stern_bulb.as_ref().is_none_or(|b| b.offset(x, z) == 0.0)
                };
                let x = 0.5 * (xa + xb);
                if bulb_free(x) {
                    let y0 = l.section.half_breadth(z);
                    let y = s.half_beam(x, z).unwrap();
                    assert!(y == y0 || (y0 <= 1e-12 * l.loa && y == 0.0));
                }
            }
        }
    }

    #[test]
    fn taper_matches_refitted_cubic() {
        // Refit the cubic in u from end values and end slopes sampled by finite
        // differences, then compare at interior points.
        for p in random_feasible(20, 7) {
            let s = HullSurface::new(&p).unwrap();
            let l = s.layout();
            if l.bow_bulb.is_some() || l.bow.length < 1e-6 * l.loa {
                continue;
            }
            let z = 0.6 * l.depth;
            let xs = l.x_bow_taper_start(z);
            let xf = l.x_bow_profile(z);
            let len = xf - xs;
            let w = l.bow.fullness;
            let y_of_u = |u: f64| l.hull_offset(xs + len * u.powf(1.0 / w), z);
            let h = 1e-6;
            let y0 = y_of_u(0.0);
            let y1 = y_of_u(1.0);
            let m0 = (y_of_u(h) - y0) / h;
            let m1 = (y1 - y_of_u(1.0 - h)) / h;
            assert!(m0.abs() < 1e-4 * l.loa);
            for u in [0.2, 0.5, 0.8] {
                let u2 = u * u;
                let u3 = u2 * u;
                let fit = y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
                    + y1 * (3.0 * u2 - 2.0 * u3)
                    + m0 * (u3 - 2.0 * u2 + u)
                    + m1 * (u3 - u2);
                assert!(
                    (fit - y_of_u(u)).abs() < 1e-4 * l.half_beam,
                    "{fit} vs {}",
                    y_of_u(u)
                );
            }
        }
    }

    #[test]
    fn offsets_continuous_across_junctions() {
        for p in random_feasible(30, 8) {
            let s = HullSurface::new(&p).unwrap();
            let l = s.layout();
            for k in 0..=10 {
                let z = l.depth * k as f64 / 10.0;
                for xj in [l.x_bow_taper_start(z), l.x_stern_taper_end(z)] {
                    let e = 1e-10 * l.loa;
                    let a = l.offset(xj - e, z);
                    let b = l.offset(xj + e, z);
                    assert!((a - b).abs() < 1e-6 * l.loa, "jump {a} {b}");
                }
            }
        }
    }

    #[test]
    fn wigley_offsets() {
        let w = WigleySurface::standard();
        assert!((w.offset(50.0, 6.25) - 5.0).abs() < 1e-12);
        assert_eq!(w.offset(0.0, 3.0), 0.0);
        assert_eq!(w.offset(100.0, 3.0), 0.0);
        assert_eq!(w.offset(50.0, 0.0), 0.0);
    }

    #[test]
    fn term_names_cover_layout_inputs() {
        // Every term must influence the layout for at least one change.
        let base = random_feasible(1, 9)[0];
        let l0 = SurfaceLayout::new(&base);
        let mut touched = 0;
        for (i, t) in TERMS.iter().enumerate() {
            let mut p = base;
            p.set(i, 0.5 * (t.lower + t.upper) + 0.01 * (t.upper - t.lower));
            if p.get(i) == base.get(i) {
                continue;
            }
            if SurfaceLayout::new(&p) != l0 {
                touched += 1;
            }
        }
        assert!(touched >= 30, "{touched}");
    }
}

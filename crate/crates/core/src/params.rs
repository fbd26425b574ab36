//! The 45-term hull parameterization.
//!
//! Term 0 is the length overall in metres. The remaining 44 terms are
//! dimensionless (fractions, exponents, ratios or angles), so two hulls that
//! differ only in `loa` are geometrically similar.
//!
//! Grouping: 7 principal terms, 4 cross-section terms, 20 taper terms
//! (9 bow, 11 stern) and 14 bulb terms (7 per end).

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::surface::SurfaceLayout;

pub const NUM_TERMS: usize = 45;
/// Number of dimensionless shape terms (everything except `loa`).
pub const NUM_SHAPE_TERMS: usize = 44;

/// Default rejection budget for [`sample_hull`].
pub const DEFAULT_SAMPLING_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermGroup {
    Principal,
    CrossSection,
    BowTaper,
    SternTaper,
    BowBulb,
    SternBulb,
}

#[derive(Debug, Clone, Copy)]
pub struct TermSpec {
    pub name: &'static str,
    pub unit: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub group: TermGroup,
}

macro_rules! terms {
    ($( $idx:literal => $konst:ident, $name:ident, $unit:literal, $lo:expr, $hi:expr, $group:ident; )*) => {
        /// Term indices into [`HullParameters`].
        pub mod idx {
            $( pub const $konst: usize = $idx; )*
        }

        /// Declared name, unit, full sampling range and group of every term, in column order.
        pub const TERMS: [TermSpec; NUM_TERMS] = [
            $( TermSpec {
                name: stringify!($name),
                unit: $unit,
                lower: $lo,
                upper: $hi,
                group: TermGroup::$group,
            }, )*
        ];

        impl HullParameters {
            $(
                #[inline]
                pub fn $name(&self) -> f64 {
                    self.0[$idx]
                }
            )*
        }
    };
}

terms! {
    0 => LOA, loa, "m", 20.0, 300.0, Principal;
    1 => BOW_TAPER, bow_taper_frac, "frac_loa", 0.0, 0.5, Principal;
    2 => STERN_TAPER, stern_taper_frac, "frac_loa", 0.0, 0.5, Principal;
    3 => BEAM, beam_deck_frac, "frac_loa", 0.0833, 0.333, Principal;
    4 => DEPTH, depth_frac, "frac_loa", 0.05, 0.25, Principal;
    5 => TRANSOM_BEAM, transom_beam_frac, "frac_beam", 0.0, 1.0, Principal;
    6 => DESIGN_DRAFT, design_draft_frac, "frac_depth", 0.25, 0.75, Principal;

    7 => DEADRISE, deadrise_deg, "deg", 0.0, 45.0, CrossSection;
    8 => CHINE_RADIUS, chine_radius_frac, "frac_depth", 0.0, 1.0, CrossSection;
    9 => KEEL_RADIUS, keel_radius_frac, "frac_depth", 0.0, 1.0, CrossSection;
    10 => CHINE_HALFBEAM, chine_halfbeam_frac, "frac_halfbeam", 0.0, 1.0, CrossSection;

    11 => BOW_RAKE, bow_rake_deg, "deg", 0.0, 60.0, BowTaper;
    12 => BOW_PROFILE_EXP, bow_profile_exponent, "-", 1.0, 3.0, BowTaper;
    13 => BOW_KEELRISE, bow_keelrise_start_frac, "frac_taper", 0.0, 1.0, BowTaper;
    14 => BOW_KEELRISE_EXP, bow_keelrise_exponent, "-", 1.0, 4.0, BowTaper;
    15 => BOW_DRIFT_DECK, bow_drift_deck_deg, "deg", 0.0, 75.0, BowTaper;
    16 => BOW_DRIFT_KEEL, bow_drift_keel_deg, "deg", 0.0, 75.0, BowTaper;
    17 => BOW_FULLNESS, bow_waterplane_fullness_exponent, "-", 0.6, 1.6, BowTaper;
    18 => BOW_TRANSITION, bow_midbody_transition_frac, "frac_taper", 0.0, 1.0, BowTaper;
    19 => BOW_BLEND, bow_section_blend_exponent, "-", 0.5, 3.0, BowTaper;

    20 => STERN_RAKE, stern_rake_deg, "deg", 0.0, 60.0, SternTaper;
    21 => STERN_PROFILE_EXP, stern_profile_exponent, "-", 1.0, 3.0, SternTaper;
    22 => STERN_KEELRISE, stern_keelrise_start_frac, "frac_taper", 0.0, 1.0, SternTaper;
    23 => STERN_KEELRISE_EXP, stern_keelrise_exponent, "-", 1.0, 4.0, SternTaper;
    24 => STERN_DRIFT_DECK, stern_drift_deck_deg, "deg", 0.0, 75.0, SternTaper;
    25 => STERN_DRIFT_EXP, stern_drift_exponent, "-", 0.5, 3.0, SternTaper;
    26 => STERN_FULLNESS, stern_waterplane_fullness_exponent, "-", 0.6, 1.6, SternTaper;
    27 => STERN_TRANSITION, stern_midbody_transition_frac, "frac_taper", 0.0, 1.0, SternTaper;
    28 => STERN_BLEND, stern_section_blend_exponent, "-", 0.5, 3.0, SternTaper;
    29 => TRANSOM_HEIGHT, stern_transom_bottom_height_frac, "frac_depth", 0.0, 1.0, SternTaper;
    30 => TRANSOM_DEADRISE, stern_transom_deadrise_deg, "deg", 0.0, 45.0, SternTaper;

    31 => BOW_BULB_LENGTH, bow_bulb_length_frac, "frac_room", 0.0, 1.0, BowBulb;
    32 => BOW_BULB_DEPTH, bow_bulb_center_depth_frac, "frac_draft", 0.0, 1.0, BowBulb;
    33 => BOW_BULB_RADIUS, bow_bulb_radius_frac, "frac_draft", 0.0, 1.0, BowBulb;
    34 => BOW_BULB_VASYM, bow_bulb_vertical_asymmetry_ratio, "-", 0.5, 2.0, BowBulb;
    35 => BOW_BULB_WIDTH, bow_bulb_lateral_width_ratio, "-", 0.25, 1.5, BowBulb;
    36 => BOW_BULB_TIP, bow_bulb_tip_exponent, "-", 1.5, 4.0, BowBulb;
    37 => BOW_BULB_FILLET, bow_bulb_fillet_length_frac, "frac_taper", 0.1, 1.0, BowBulb;

    38 => STERN_BULB_LENGTH, stern_bulb_length_frac, "frac_room", 0.0, 1.0, SternBulb;
    39 => STERN_BULB_DEPTH, stern_bulb_center_depth_frac, "frac_draft", 0.0, 1.0, SternBulb;
    40 => STERN_BULB_RADIUS, stern_bulb_radius_frac, "frac_draft", 0.0, 1.0, SternBulb;
    41 => STERN_BULB_VASYM, stern_bulb_vertical_asymmetry_ratio, "-", 0.5, 2.0, SternBulb;
    42 => STERN_BULB_WIDTH, stern_bulb_lateral_width_ratio, "-", 0.25, 1.5, SternBulb;
    43 => STERN_BULB_TIP, stern_bulb_tip_exponent, "-", 1.5, 4.0, SternBulb;
    44 => STERN_BULB_FILLET, stern_bulb_fillet_length_frac, "frac_taper", 0.1, 1.0, SternBulb;
}

/// A full 45-term hull description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullParameters(pub [f64; NUM_TERMS]);

impl HullParameters {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_TERMS] = values.try_into().map_err(|_| {
            Error::InvalidInput(format!("expected {NUM_TERMS} terms, got {}", values.len()))
        })?;
        Ok(HullParameters(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.0[i] = v;
    }

    /// The 44 dimensionless shape terms (everything but `loa`).
    pub fn shape_terms(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn with_loa(mut self, loa: f64) -> Self {
        self.0[idx::LOA] = loa;
        self
    }

    /// Rounds every term to the precision of the parameter table, so that a
    /// written and re-read hull is bit-identical to this one.
    pub fn quantized(&self) -> Self {
        HullParameters(self.0.map(|v| fmt_num(v).parse().unwrap_or(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Absolute dimensions derived from the principal terms.
    pub fn beam(&self) -> f64 {
        self.beam_deck_frac() * self.loa()
    }

    pub fn depth(&self) -> f64 {
        self.depth_frac() * self.loa()
    }

    pub fn design_draft(&self) -> f64 {
        self.design_draft_frac() * self.depth()
    }

    /// Wall-sided box-like hull: zero deadrise, no radii, chine at the deck
    /// beam, straight vertical ends, no bulbs. `taper_frac` is applied to both
    /// ends; with 0 the hull is an exact rectangular box.
    pub fn prism(loa: f64, beam_frac: f64, depth_frac: f64, taper_frac: f64) -> Self {
        let mut v = [0.0; NUM_TERMS];
        for (i, t) in TERMS.iter().enumerate() {
            v[i] = t.lower;
        }
        v[idx::LOA] = loa;
        v[idx::BOW_TAPER] = taper_frac;
        v[idx::STERN_TAPER] = taper_frac;
        v[idx::BEAM] = beam_frac;
        v[idx::DEPTH] = depth_frac;
        v[idx::TRANSOM_BEAM] = 1.0;
        v[idx::DESIGN_DRAFT] = 0.5;
        v[idx::DEADRISE] = 0.0;
        v[idx::CHINE_RADIUS] = 0.0;
        v[idx::KEEL_RADIUS] = 0.0;
        v[idx::CHINE_HALFBEAM] = 1.0;
        v[idx::BOW_FULLNESS] = 1.0;
        v[idx::STERN_FULLNESS] = 1.0;
        v[idx::BOW_BLEND] = 1.0;
        v[idx::STERN_BLEND] = 1.0;
        v[idx::STERN_DRIFT_EXP] = 1.0;
        v[idx::BOW_BULB_LENGTH] = 0.0;
        v[idx::STERN_BULB_LENGTH] = 0.0;
        for i in [
            idx::BOW_BULB_VASYM,
            idx::STERN_BULB_VASYM,
            idx::BOW_BULB_WIDTH,
            idx::STERN_BULB_WIDTH,
        ] {
            v[i] = 1.0;
        }
        for i in [idx::BOW_BULB_TIP, idx::STERN_BULB_TIP] {
            v[i] = 2.0;
        }
        HullParameters(v)
    }
}

/// Dataset subset selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    /// Full range of every term.
    Full = 1,
    /// No bulbs.
    NoBulbs = 2,
    /// Large-ship bias: zero deadrise, strictly positive keel radius.
    LargeShip = 3,
}

impl Subset {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Subset::Full),
            2 => Some(Subset::NoBulbs),
            3 => Some(Subset::LargeShip),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

/// Lower bound of `keel_radius_frac` in the large-ship subset.
const LARGE_SHIP_MIN_KEEL_RADIUS: f64 = 0.05;

/// Per-term closed sampling intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub subset: Subset,
}

impl ParameterRanges {
    pub fn subset(subset: Subset) -> Self {
        let mut lower: Vec<f64> = TERMS.iter().map(|t| t.lower).collect();
        let mut upper: Vec<f64> = TERMS.iter().map(|t| t.upper).collect();
        match subset {
            Subset::Full => {}
            Subset::NoBulbs => {
                for i in [idx::BOW_BULB_LENGTH, idx::STERN_BULB_LENGTH] {
                    lower[i] = 0.0;
                    upper[i] = 0.0;
                }
            }
            Subset::LargeShip => {
                lower[idx::DEADRISE] = 0.0;
                upper[idx::DEADRISE] = 0.0;
                lower[idx::KEEL_RADIUS] = LARGE_SHIP_MIN_KEEL_RADIUS;
            }
        }
        ParameterRanges {
            lower,
            upper,
            subset,
        }
    }

    pub fn full() -> Self {
        Self::subset(Subset::Full)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != NUM_TERMS || self.upper.len() != NUM_TERMS {
            return Err(Error::InvalidInput(format!(
                "ranges must have {NUM_TERMS} entries"
            )));
        }
        for i in 0..NUM_TERMS {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidInput(format!(
                    "invalid range for {}: [{lo}, {hi}]",
                    TERMS[i].name
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &HullParameters) -> bool {
        (0..NUM_TERMS).all(|i| p.0[i] >= self.lower[i] && p.0[i] <= self.upper[i])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn sample_term<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        let (lo, hi) = (self.lower[i], self.upper[i]);
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    }

    /// One uniform draw over the box, feasible or not.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> HullParameters {
        let mut v = [0.0; NUM_TERMS];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = self.sample_term(i, rng);
        }
        HullParameters(v)
    }

    pub fn clamp(&self, i: usize, v: f64) -> f64 {
        v.clamp(self.lower[i], self.upper[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// Term lies inside its declared interval.
    Range,
    /// Bow and stern tapers leave a parallel midbody of non-negative length.
    TaperOverlap,
    /// The stem / stern profile stays inside its taper region.
    ProfileContainment,
    /// Keel and chine arcs fit on the straight segments of the section.
    SectionFit,
    /// Bulb lies between the baseline and the deck.
    BulbContainment,
    /// Bulb fillet ends inside the taper region.
    FilletContainment,
}

impl ConstraintFamily {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintFamily::Range => "range",
            ConstraintFamily::TaperOverlap => "taper-overlap",
            ConstraintFamily::ProfileContainment => "profile-containment",
            ConstraintFamily::SectionFit => "section-fit",
            ConstraintFamily::BulbContainment => "bulb-containment",
            ConstraintFamily::FilletContainment => "fillet-containment",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintResult {
    pub id: usize,
    pub family: ConstraintFamily,
    pub name: &'static str,
    /// Signed slack, in units of loa for geometric constraints and of the
    /// range width for range constraints. Non-negative means satisfied.
    pub margin: f64,
    /// Terms the constraint depends on, used by repair operators.
    pub terms: &'static [usize],
}

impl ConstraintResult {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub constraints: Vec<ConstraintResult>,
}

impl FeasibilityReport {
    pub fn violations(&self) -> impl Iterator<Item = &ConstraintResult> {
        self.constraints.iter().filter(|c| !c.passed())
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn find(&self, name: &str) -> Option<&ConstraintResult> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

static RANGE_TERMS: [[usize; 1]; NUM_TERMS] = {
    let mut out = [[0usize; 1]; NUM_TERMS];
    let mut i = 0;
    while i < NUM_TERMS {
        out[i] = [i];
        i += 1;
    }
    out
};

/// Algebraic feasibility check. No mesh is built; cost is independent of any
/// resolution. All geometric constraints are evaluated on the unit-length
/// hull, so the report does not depend on `loa`.
pub fn check_feasibility(params: &HullParameters) -> Result<FeasibilityReport> {
    if !params.is_finite() {
        return Err(Error::InvalidInput("non-finite parameter value".into()));
    }
    let mut constraints = Vec::with_capacity(64);
    let mut push = |family, name, margin: f64, terms: &'static [usize]| {
        let id = constraints.len();
        constraints.push(ConstraintResult {
            id,
            family,
            name,
            margin,
            terms,
        });
    };

    // loa only has to be positive; its sampling interval is not a feasibility condition.
    push(
        ConstraintFamily::Range,
        "loa",
        if params.loa() > 0.0 { 1.0 } else { -1.0 },
        &RANGE_TERMS[0],
    );
    for (i, t) in TERMS.iter().enumerate().skip(1) {
        let v = params.0[i];
        let width = (t.upper - t.lower).max(f64::MIN_POSITIVE);
        push(
            ConstraintFamily::Range,
            t.name,
            (v - t.lower).min(t.upper - v) / width,
            &RANGE_TERMS[i],
        );
    }

    let unit = params.with_loa(1.0);
    let layout = SurfaceLayout::new(&unit);
    for m in layout.margins() {
        push(m.family, m.name, m.margin, m.terms);
    }

    let feasible = constraints.iter().all(|c| c.margin >= 0.0);
    Ok(FeasibilityReport {
        feasible,
        constraints,
    })
}

/// Rejection-sample a feasible hull from `ranges`, deterministic in `seed`.
pub fn sample_hull(ranges: &ParameterRanges, seed: u64) -> Result<HullParameters> {
    sample_hull_with_budget(ranges, seed, DEFAULT_SAMPLING_BUDGET)
}

pub fn sample_hull_with_budget(
    ranges: &ParameterRanges,
    seed: u64,
    budget: usize,
) -> Result<HullParameters> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_feasible(ranges, &mut rng, budget)
}

/// Rejection sampling with a caller-owned generator. Candidates are quantized
/// to table precision before the check.
pub fn sample_feasible<R: Rng + ?Sized>(
    ranges: &ParameterRanges,
    rng: &mut R,
    budget: usize,
) -> Result<HullParameters> {
    for _ in 0..budget {
        let p = ranges.sample_uniform(rng).quantized();
        if check_feasibility(&p)?.feasible {
            return Ok(p);
        }
    }
    Err(Error::SamplingFailure { attempts: budget })
}

// ---------------------------------------------------------------------------
// Parameter tables

pub fn table_header() -> String {
    let mut h = String::from("hull_id");
    for t in TERMS.iter() {
        h.push(',');
        h.push_str(t.name);
    }
    h
}

/// Formats a value with 13 significant digits (round-trip error below 1e-12 relative).
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn format_params_row(id: &str, p: &HullParameters) -> String {
    let mut line = String::with_capacity(NUM_TERMS * 20);
    line.push_str(id);
    for v in p.0.iter() {
        line.push(',');
        line.push_str(&fmt_num(*v));
    }
    line
}

pub fn params_table_string(rows: &[(String, HullParameters)]) -> String {
    let mut out = table_header();
    out.push('\n');
    for (id, p) in rows {
        let _ = writeln!(out, "{}", format_params_row(id, p));
    }
    out
}

pub fn save_params(path: &Path, rows: &[(String, HullParameters)]) -> Result<()> {
    std::fs::write(path, params_table_string(rows)).map_err(|e| Error::io(path, e))
}

pub fn load_params(path: &Path) -> Result<Vec<(String, HullParameters)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text)
}

pub fn parse_params(text: &str) -> Result<Vec<(String, HullParameters)>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        row: 0,
        column: 0,
        message: "missing header".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"hull_id") {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "first column must be hull_id".into(),
        });
    }
    for (i, t) in TERMS.iter().enumerate() {
        match cols.get(i + 1) {
            Some(c) if *c == t.name => {}
            Some(c) => {
                return Err(Error::Parse {
                    row: 0,
                    column: i + 1,
                    message: format!("expected column {} but found {c}", t.name),
                })
            }
            None => {
                return Err(Error::Parse {
                    row: 0,
                    column: i + 1,
                    message: format!("missing column {}", t.name),
                })
            }
        }
    }
    if cols.len() > NUM_TERMS + 1 {
        return Err(Error::Parse {
            row: 0,
            column: NUM_TERMS + 1,
            message: format!("unexpected extra column {}", cols[NUM_TERMS + 1]),
        });
    }

    let mut rows = Vec::new();
    for (r, line) in lines.enumerate() {
        let row = r + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != NUM_TERMS + 1 {
            let missing = TERMS
                .get(cells.len().saturating_sub(1))
                .map(|t| format!(" (missing {})", t.name))
                .unwrap_or_default();
            return Err(Error::Parse {
                row,
                column: cells.len(),
                message: format!(
                    "expected {} cells, found {}{missing}",
                    NUM_TERMS + 1,
                    cells.len()
                ),
            });
        }
        let mut v = [0.0; NUM_TERMS];
        for (i, cell) in cells[1..].iter().enumerate() {
            v[i] = cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: i + 1,
                message: format!("non-numeric value {:?} for {}", cell, TERMS[i].name),
            })?;
        }
        rows.push((cells[0].trim().to_string(), HullParameters(v)));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_table_shape() {
        assert_eq!(TERMS.len(), 45);
        let count = |g| TERMS.iter().filter(|t| t.group == g).count();
        assert_eq!(count(TermGroup::Principal), 7);
        assert_eq!(count(TermGroup::CrossSection), 4);
        assert_eq!(
            count(TermGroup::BowTaper) + count(TermGroup::SternTaper),
            20
        );
        assert_eq!(count(TermGroup::BowBulb) + count(TermGroup::SternBulb), 14);
        assert_eq!(TERMS[0].name, "loa");
        let mut names: Vec<_> = TERMS.iter().map(|t| t.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 45);
        for t in TERMS.iter().skip(1) {
            if t.unit.starts_with("frac") {
                assert!(t.lower >= 0.0 && t.upper <= 1.0, "{}", t.name);
            }
        }
    }

    #[test]
    fn pinned_ranges() {
        assert_eq!(
            (TERMS[idx::BEAM].lower, TERMS[idx::BEAM].upper),
            (0.0833, 0.333)
        );
        assert_eq!(
            (TERMS[idx::DEPTH].lower, TERMS[idx::DEPTH].upper),
            (0.05, 0.25)
        );
        assert_eq!(
            (TERMS[idx::DEADRISE].lower, TERMS[idx::DEADRISE].upper),
            (0.0, 45.0)
        );
    }

    #[test]
    fn prism_is_feasible() {
        let p = HullParameters::prism(100.0, 0.15, 0.1, 0.05);
        let r = check_feasibility(&p).unwrap();
        assert!(r.feasible, "{:?}", r.violations().collect::<Vec<_>>());
        assert!(r.constraints.iter().all(|c| c.passed()));
    }

    #[test]
    fn overlapping_tapers_are_infeasible() {
        let mut p = HullParameters::prism(100.0, 0.15, 0.1, 0.05);
        p.set(idx::BOW_TAPER, 0.6);
        p.set(idx::STERN_TAPER, 0.6);
        let r = check_feasibility(&p).unwrap();
        assert!(!r.feasible);
        assert!(!r.find("taper_overlap").unwrap().passed());
    }

    #[test]
    fn non_finite_is_an_input_error() {
        let mut p = HullParameters::prism(100.0, 0.15, 0.1, 0.05);
        p.set(5, f64::NAN);
        assert!(matches!(check_feasibility(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn report_is_scale_invariant() {
        let ranges = ParameterRanges::full();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p = ranges.sample_uniform(&mut rng);
            let a = check_feasibility(&p).unwrap();
            let b = check_feasibility(&p.with_loa(p.loa() * 7.3)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_feasible() {
        let ranges = ParameterRanges::full();
        let a = sample_hull(&ranges, 11).unwrap();
        let b = sample_hull(&ranges, 11).unwrap();
        assert_eq!(a, b);
        assert!(check_feasibility(&a).unwrap().feasible);
        assert_ne!(a, sample_hull(&ranges, 12).unwrap());
    }

    #[test]
    fn subset_constraints_hold() {
        for seed in 0..20 {
            let p = sample_hull(&ParameterRanges::subset(Subset::NoBulbs), seed).unwrap();
            assert_eq!(p.bow_bulb_length_frac(), 0.0);
            assert_eq!(p.stern_bulb_length_frac(), 0.0);
            let q = sample_hull(&ParameterRanges::subset(Subset::LargeShip), seed).unwrap();
            assert_eq!(q.deadrise_deg(), 0.0);
            assert!(q.keel_radius_frac() > 0.0);
        }
    }

    #[test]
    fn exhausted_budget_reports_attempts() {
        let mut ranges = ParameterRanges::full();
        ranges.lower[idx::BOW_TAPER] = 0.5;
        ranges.lower[idx::STERN_TAPER] = 0.5;
        ranges.lower[idx::BOW_TRANSITION] = 0.5;
        match sample_hull_with_budget(&ranges, 1, 50) {
            Err(Error::SamplingFailure { attempts }) => assert_eq!(attempts, 50),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_ranges_rejected() {
        let mut ranges = ParameterRanges::full();
        ranges.lower[3] = 0.5;
        ranges.upper[3] = 0.1;
        assert!(matches!(
            sample_hull(&ranges, 0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn table_round_trip() {
        let ranges = ParameterRanges::full();
        let rows: Vec<_> = (0..3)
            .map(|i| (format!("1-{i}"), sample_hull(&ranges, i).unwrap()))
            .collect();
        let back = parse_params(&params_table_string(&rows)).unwrap();
        assert_eq!(back.len(), 3);
        for ((ia, a), (ib, b)) in rows.iter().zip(&back) {
            assert_eq!(ia, ib);
            for (x, y) in a.0.iter().zip(b.0.iter()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn sampled_hulls_round_trip_exactly() {
        let rows: Vec<_> = (0..20)
            .map(|i| {
                (
                    i.to_string(),
                    sample_hull(&ParameterRanges::full(), i).unwrap(),
                )
            })
            .collect();
        let back = parse_params(&params_table_string(&rows)).unwrap();
        for ((_, a), (_, b)) in rows.iter().zip(&back) {
            assert_eq!(a, b);
            assert_eq!(a.quantized(), *a);
        }
    }

    #[test]
    fn table_missing_column() {
        let header: Vec<_> = TERMS.iter().take(44).map(|t| t.name).collect();
        let text = format!("hull_id,{}\n", header.join(","));
        match parse_params(&text) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains(TERMS[44].name), "{message}")
            }
            other => panic!("unexpected {other:?}"),
        }
        let row: Vec<String> = (0..44).map(|_| "0.5".to_string()).collect();
        let text = format!("{}\nx,{}\n", table_header(), row.join(","));
        match parse_params(&text) {
            Err(Error::Parse { row, message, .. }) => {
                assert_eq!(row, 1);
                assert!(message.contains(TERMS[44].name), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_non_numeric_cell() {
        let mut cells: Vec<String> = (0..45).map(|_| "1.0".to_string()).collect();
        cells[7] = "abc".into();
        let text = format!("{}\nh,{}\n", table_header(), cells.join(","));
        match parse_params(&text) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (1, 8)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_params(&format!("{}\n", table_header()))
            .unwrap()
            .is_empty());
    }
}

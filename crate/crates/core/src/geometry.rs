//! Floating-point triangle geometry and the three bisection procedures.
//!
//! Coordinates are plain `f64`. Exactness lives in the angle layer: a node
//! produced by largest-angle bisection from an exact base carries one
//! [`AngleForm`] per vertex plus its scaled exact value (see
//! [`BaseAngles::scaled_value`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::symbolic::{AngleForm, BaseAngles};

/// Triangles with `|area| < DEGENERACY_FACTOR * longest_side^2` are rejected.
pub const DEGENERACY_FACTOR: f64 = 1e-12;

/// Angles within this many degrees count as tied in numeric mode.
pub const NUMERIC_ANGLE_TIE_DEG: f64 = 1e-12;

/// Relative tolerance for ties between side lengths.
pub const SIDE_TIE_RELATIVE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(self, other: Point2) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }

    fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    LargestAngle,
    LongestEdge,
    ShortestAltitude,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 3] = [
        ProcedureKind::LargestAngle,
        ProcedureKind::LongestEdge,
        ProcedureKind::ShortestAltitude,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProcedureKind::LargestAngle => "largest-angle",
            ProcedureKind::LongestEdge => "longest-edge",
            ProcedureKind::ShortestAltitude => "shortest-altitude",
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProcedureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidRun(format!("unknown procedure {s:?}")))
    }
}

/// Path from the root: bit `i` (counting from the most significant of the
/// `len` used bits) is 0 for the left child and 1 for the right child.
/// Read as an integer it is the node's index within its generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lineage {
    bits: u64,
    len: u8,
}

impl Lineage {
    pub const MAX_LEN: u8 = 64;

    pub fn root() -> Self {
        Self::default()
    }

    pub fn child(self, right: bool) -> Self {
        assert!(self.len < Self::MAX_LEN, "lineage longer than 64 generations");
        Self {
            bits: (self.bits << 1) | u64::from(right),
            len: self.len + 1,
        }
    }

    pub fn len(self) -> u8 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn index(self) -> u64 {
        self.bits
    }
}

impl fmt::Display for Lineage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("root");
        }
        for i in (0..self.len).rev() {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Exact angles of a node: one form per vertex and its value scaled by the
/// base's common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAngles {
    pub forms: [AngleForm; 3],
    pub scaled: [DyadicRational; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleNode {
    /// Absolute position of vertex 0.
    origin: Point2,
    /// Vertices relative to `origin`. Children are rebased onto their own
    /// apex, so the shape keeps full relative precision at any depth.
    local: [Point2; 3],
    exact: Option<ExactAngles>,
    generation: u32,
    lineage: Lineage,
    /// Vertex still carrying the initial triangle's smallest angle, if any.
    marked: Option<u8>,
}

/// Sorted side lengths: `lengths[0] >= lengths[1] >= lengths[2]`, with
/// `opposite[i]` the vertex facing `lengths[i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideLengths {
    pub lengths: [f64; 3],
    pub opposite: [usize; 3],
}

impl TriangleNode {
    /// Initial triangle from exact angles via the law of sines, with the
    /// longest side normalised to `m0`. Vertex 0 carries `alpha`, 1 `beta`,
    /// 2 `gamma`; forms are attached when `exact` is set.
    pub fn from_base(base: &BaseAngles, m0: f64, exact: bool) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(Error::InvalidRun(format!("scale must be positive, got {m0}")));
        }
        let [alpha, beta, gamma] = base.radians();
        let c = m0 * gamma.sin() / alpha.sin();
        let (origin, local) = rebase([
            Point2::new(c * beta.cos(), c * beta.sin()),
            Point2::new(0.0, 0.0),
            Point2::new(m0, 0.0),
        ]);
        let exact = exact.then(|| {
            let forms = [AngleForm::alpha(), AngleForm::beta(), AngleForm::gamma()];
            let scaled = forms.clone().map(|f| base.scaled_value(&f));
            ExactAngles { forms, scaled }
        });
        let node = Self {
            origin,
            local,
            exact,
            generation: 0,
            lineage: Lineage::root(),
            marked: Some(2),
        };
        node.check_nondegenerate().map(|_| node)
    }

    /// Initial triangle from side lengths in any order. Vertex 0 faces the
    /// longest side and vertex 2 the shortest.
    pub fn from_sides(sides: [f64; 3]) -> Result<Self> {
        if let Some(bad) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidSide(bad.to_string()));
        }
        let mut sorted = sides;
        sorted.sort_by(|x, y| y.total_cmp(x));
        let [a, b, c] = sorted;
        if a >= b + c {
            return Err(Error::NotATriangle(sides[0], sides[1], sides[2]));
        }
        // B at the origin, C on the x axis, |AB| = c, |AC| = b.
        let x = (a * a + c * c - b * b) / (2.0 * a);
        let y = (c * c - x * x).max(0.0).sqrt();
        Self::from_vertices([Point2::new(x, y), Point2::new(0.0, 0.0), Point2::new(a, 0.0)])
    }

    pub fn from_vertices(vertices: [Point2; 3]) -> Result<Self> {
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Collinear);
        }
        let (origin, local) = rebase(vertices);
        let node = Self {
            origin,
            local,
            exact: None,
            generation: 0,
            lineage: Lineage::root(),
            marked: None,
        };
        node.check_nondegenerate().map(|_| node)
    }

    pub fn vertices(&self) -> [Point2; 3] {
        self.local.map(|p| Point2::new(self.origin.x + p.x, self.origin.y + p.y))
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn lineage(&self) -> Lineage {
        self.lineage
    }

    pub fn exact(&self) -> Option<&ExactAngles> {
        self.exact.as_ref()
    }

    pub fn angle_forms(&self) -> Option<&[AngleForm; 3]> {
        self.exact.as_ref().map(|e| &e.forms)
    }

    pub fn marked_vertex(&self) -> Option<usize> {
        self.marked.map(usize::from)
    }

    /// Drops the exact angle data, turning this into a numeric-only node.
    pub fn into_numeric(mut self) -> Self {
        self.exact = None;
        self
    }

    /// `edges[i]` is the length of the side facing vertex `i`.
    pub fn edge_lengths(&self) -> [f64; 3] {
        let v = &self.local;
        [v[1].distance(v[2]), v[2].distance(v[0]), v[0].distance(v[1])]
    }

    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.local;
        let (ux, uy) = b.sub(a);
        let (vx, vy) = c.sub(a);
        0.5 * (ux * vy - uy * vx)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Interior angles measured from the coordinates, in degrees.
    pub fn measured_angles_deg(&self) -> [f64; 3] {
        let v = &self.local;
        std::array::from_fn(|i| {
            let (ux, uy) = v[(i + 1) % 3].sub(v[i]);
            let (wx, wy) = v[(i + 2) % 3].sub(v[i]);
            (ux * wy - uy * wx).abs().atan2(ux * wx + uy * wy).to_degrees()
        })
    }

    fn check_nondegenerate(&self) -> Result<()> {
        if is_degenerate(self) {
            Err(Error::Collinear)
        } else {
            Ok(())
        }
    }
}

fn rebase(vertices: [Point2; 3]) -> (Point2, [Point2; 3]) {
    let origin = vertices[0];
    let local = vertices.map(|p| {
        let (x, y) = p.sub(origin);
        Point2::new(x, y)
    });
    (origin, local)
}

fn is_degenerate(t: &TriangleNode) -> bool {
    let longest = t.edge_lengths().into_iter().fold(0.0, f64::max);
    let area = t.area();
    !(area.is_finite() && area >= DEGENERACY_FACTOR * longest * longest && longest > 0.0)
}

pub fn side_lengths(t: &TriangleNode) -> Result<SideLengths> {
    t.check_nondegenerate()?;
    let edges = t.edge_lengths();
    let mut opposite = [0usize, 1, 2];
    // Stable sort keeps the lowest vertex index first among equal lengths.
    opposite.sort_by(|&i, &j| edges[j].total_cmp(&edges[i]));
    Ok(SideLengths {
        lengths: opposite.map(|i| edges[i]),
        opposite,
    })
}

/// Index of the vertex with the largest angle; ties go to the lowest index.
/// Exact nodes compare exact values, numeric nodes use a
/// [`NUMERIC_ANGLE_TIE_DEG`] tolerance.
pub fn largest_angle_vertex(t: &TriangleNode) -> usize {
    if let Some(exact) = &t.exact {
        let mut best = 0;
        for i in 1..3 {
            if exact.scaled[i] > exact.scaled[best] {
                best = i;
            }
        }
        return best;
    }
    let angles = t.measured_angles_deg();
    let max = angles.iter().copied().fold(f64::MIN, f64::max);
    (0..3)
        .find(|&i| angles[i] >= max - NUMERIC_ANGLE_TIE_DEG)
        .unwrap_or(0)
}

/// Vertex facing the longest side, lowest index among near-ties.
pub fn longest_side_vertex(t: &TriangleNode) -> usize {
    let edges = t.edge_lengths();
    let max = edges.iter().copied().fold(0.0, f64::max);
    (0..3)
        .find(|&i| edges[i] >= max * (1.0 - SIDE_TIE_RELATIVE))
        .unwrap_or(0)
}

/// Splits `t` by a segment from apex `A` to a foot `D` on the opposite side.
///
/// With `A = v[k]`, `B = v[k+1]`, `C = v[k+2]` the children are
/// `left = [A, B, D]` and `right = [A, D, C]`; both keep the parent's
/// orientation.
pub fn bisect(t: &TriangleNode, kind: ProcedureKind) -> Result<(TriangleNode, TriangleNode)> {
    t.check_nondegenerate()?;
    let apex = match kind {
        ProcedureKind::LargestAngle => largest_angle_vertex(t),
        ProcedureKind::LongestEdge | ProcedureKind::ShortestAltitude => longest_side_vertex(t),
    };
    let (ib, ic) = ((apex + 1) % 3, (apex + 2) % 3);
    let origin = Point2::new(t.origin.x + t.local[apex].x, t.origin.y + t.local[apex].y);
    let shift = |p: Point2| {
        let (x, y) = p.sub(t.local[apex]);
        Point2::new(x, y)
    };
    let [a, b, c] = [Point2::new(0.0, 0.0), shift(t.local[ib]), shift(t.local[ic])];

    let foot = match kind {
        ProcedureKind::LargestAngle => {
            // Angle bisector theorem: BD / DC = AB / AC.
            let ab = a.distance(b);
            let ac = a.distance(c);
            b.lerp(c, ab / (ab + ac))
        }
        ProcedureKind::LongestEdge => b.lerp(c, 0.5),
        ProcedureKind::ShortestAltitude => {
            let (ex, ey) = c.sub(b);
            let (px, py) = a.sub(b);
            let s = ((px * ex + py * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
            b.lerp(c, s)
        }
    };

    let exact = match (kind, &t.exact) {
        (ProcedureKind::LargestAngle, Some(e)) => {
            let (fa, fb, fc) = (&e.forms[apex], &e.forms[ib], &e.forms[ic]);
            let (sa, sb, sc) = (&e.scaled[apex], &e.scaled[ib], &e.scaled[ic]);
            let (half_form, half_scaled) = (fa.halve(), sa.halve());
            let left = ExactAngles {
                forms: [half_form.clone(), fb.clone(), &half_form + fc],
                scaled: [half_scaled.clone(), sb.clone(), &half_scaled + sc],
            };
            let right = ExactAngles {
                forms: [half_form.clone(), &half_form + fb, fc.clone()],
                scaled: [half_scaled.clone(), &half_scaled + sb, sc.clone()],
            };
            Some((left, right))
        }
        _ => None,
    };
    let (left_exact, right_exact) = match exact {
        Some((l, r)) => (Some(l), Some(r)),
        None => (None, None),
    };

    let (left_mark, right_mark) = match t.marked.map(usize::from) {
        Some(m) if m == ib => (Some(1), None),
        Some(m) if m == ic => (None, Some(2)),
        _ => (None, None),
    };

    let generation = t.generation + 1;
    let left = TriangleNode {
        origin,
        local: [a, b, foot],
        exact: left_exact,
        generation,
        lineage: t.lineage.child(false),
        marked: left_mark,
    };
    let right = TriangleNode {
        origin,
        local: [a, foot, c],
        exact: right_exact,
        generation,
        lineage: t.lineage.child(true),
        marked: right_mark,
    };
    for child in [&left, &right] {
        if is_degenerate(child) {
            return Err(Error::DegenerateChild {
                procedure: kind,
                depth: generation,
                lineage: child.lineage.to_string(),
            });
        }
    }
    Ok((left, right))
}

/// Longest side over the sum of the other two: `a / (b + c)`.
pub fn aspect_ratio(t: &TriangleNode) -> Result<f64> {
    let [a, b, c] = side_lengths(t)?.lengths;
    Ok(a / (b + c))
}

/// `sin(alpha/2) * sec((beta - gamma)/2)` from the measured angles; equal to
/// [`aspect_ratio`] up to rounding.
pub fn aspect_ratio_trig(t: &TriangleNode) -> Result<f64> {
    t.check_nondegenerate()?;
    let mut angles = t.measured_angles_deg().map(f64::to_radians);
    angles.sort_by(|x, y| y.total_cmp(x));
    let [alpha, beta, gamma] = angles;
    Ok((alpha / 2.0).sin() / ((beta - gamma) / 2.0).cos())
}

/// Length of the largest angle's bisector over the longest side, from
/// `AD^2 / BC^2 = bc / (b+c)^2 * ((b+c)^2 - a^2) / a^2`. Never exceeds
/// `sqrt(3)/2`.
pub fn bisector_to_longest_side_ratio(t: &TriangleNode) -> Result<f64> {
    let [a, b, c] = side_lengths(t)?.lengths;
    let s = b + c;
    Ok((b * c / (s * s) * (s * s - a * a) / (a * a)).sqrt())
}

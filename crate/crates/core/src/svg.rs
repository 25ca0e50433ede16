//! SVG drawing of one generation of a refinement.

use std::fmt::Write as _;

use crate::engine::Refinement;
use crate::error::{Error, Result};
use crate::geometry::{Point2, TriangleNode};

/// Deepest generation that can be drawn (16384 polygons).
pub const SVG_DEPTH_LIMIT: u32 = 14;

/// Draws generation `n` of a full-tree refinement.
pub fn render_generation(result: &Refinement, n: u32) -> Result<String> {
    if n > SVG_DEPTH_LIMIT {
        return Err(Error::DepthLimit {
            depth: n,
            limit: SVG_DEPTH_LIMIT,
            mode: "svg rendering",
        });
    }
    let tree = result
        .tree
        .as_ref()
        .ok_or_else(|| Error::InvalidRun("svg rendering needs a full-tree run".into()))?;
    let level = tree
        .get(n as usize)
        .ok_or_else(|| Error::InvalidRun(format!("generation {n} was not computed")))?;
    Ok(render(&tree[0][0], level))
}

/// Standalone SVG of `triangles`, framed by `root` with a 2% margin. The y
/// axis points up. Polygons are emitted in lineage order.
pub fn render(root: &TriangleNode, triangles: &[TriangleNode]) -> String {
    let corners = root.vertices();
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in corners {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let longest = root.edge_lengths().into_iter().fold(0.0, f64::max);
    let margin = 0.02 * (max_x - min_x).max(max_y - min_y);
    let stroke = 0.002 * longest;

    let mut order: Vec<&TriangleNode> = triangles.iter().collect();
    order.sort_by_key(|t| (t.lineage().len(), t.lineage().index()));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        min_x - margin,
        -max_y - margin,
        max_x - min_x + 2.0 * margin,
        max_y - min_y + 2.0 * margin
    );
    let _ = writeln!(
        out,
        r#"<g fill="none" stroke="black" stroke-width="{stroke}" stroke-linejoin="round">"#
    );
    for t in order {
        let pts: Vec<String> = t.vertices().iter().map(|p: &Point2| format!("{},{}", p.x + 0.0, -p.y + 0.0)).collect();
        let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{refine, InitialShape, RefinementRun, Retention};
    use crate::geometry::ProcedureKind;
    use crate::symbolic::BaseAngles;

    fn run(a: i64, b: i64, c: i64, depth: u32) -> Refinement {
        let base = BaseAngles::from_integers(a, b, c).unwrap();
        let run = RefinementRun::new(InitialShape::Angles(base), ProcedureKind::LargestAngle, depth)
            .with_retention(Retention::FullTree);
        refine(&run).unwrap()
    }

    #[test]
    fn polygon_counts() {
        let r = run(60, 60, 60, 3);
        assert_eq!(render_generation(&r, 0).unwrap().matches("<polygon").count(), 1);
        assert_eq!(render_generation(&r, 3).unwrap().matches("<polygon").count(), 8);
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(
            render_generation(&run(90, 45, 45, 6), 6).unwrap(),
            render_generation(&run(90, 45, 45, 6), 6).unwrap()
        );
    }

    #[test]
    fn frame_and_stroke() {
        let svg = render_generation(&run(90, 45, 45, 0), 0).unwrap();
        // Legs 1/sqrt(2) along x from 0 to 1, apex at height 1/2.
        let start = svg.find("viewBox=\"").unwrap() + 9;
        let end = start + svg[start..].find('"').unwrap();
        let view: Vec<f64> = svg[start..end].split(' ').map(|v| v.parse().unwrap()).collect();
        for (got, want) in view.iter().zip([-0.02, -0.52, 1.04, 0.54]) {
            assert!((got - want).abs() < 1e-12, "{svg}");
        }
        assert!(!svg.contains("-0 ") && !svg.contains("-0\""));
        assert!(svg.contains(r#"stroke-width="0.002""#));
        assert!(svg.contains(r#"fill="none""#));
    }

    #[test]
    fn limits() {
        let r = run(60, 60, 60, 2);
        assert!(render_generation(&r, 15).is_err());
        assert!(render_generation(&r, 3).is_err());
        let base = BaseAngles::from_integers(60, 60, 60).unwrap();
        let streaming = refine(&RefinementRun::new(InitialShape::Angles(base), ProcedureKind::LargestAngle, 2)).unwrap();
        assert!(render_generation(&streaming, 1).is_err());
    }
}

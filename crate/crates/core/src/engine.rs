//! Uniform refinement: apply a procedure to every triangle, generation after
//! generation, and aggregate per-generation statistics.
//!
//! Two retention strategies produce identical statistics. `FullTree` keeps
//! every generation in memory (needed for rendering). `Streaming` walks the
//! tree depth first below a small breadth-first frontier and keeps only
//! per-generation accumulators. All aggregates are max, min, or set union,
//! so merging partial results in any order gives the same answer.

use std::collections::HashSet;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::geometry::{bisect, side_lengths, Lineage, ProcedureKind, TriangleNode};
use crate::symbolic::{rational_to_f64, AngleForm, BaseAngles};

pub const STREAMING_DEPTH_LIMIT: u32 = 40;
pub const FULL_TREE_DEPTH_LIMIT: u32 = 24;

/// Angles are rounded to multiples of this before numeric similarity keys
/// are compared.
pub const SIMILARITY_QUANTUM_DEG: f64 = 1e-9;

pub const SQRT3_OVER_2: f64 = 0.866_025_403_784_438_6;

/// Breadth-first expansion depth before switching to per-subtree traversal.
const SPLIT_LEVEL: u32 = 6;

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum InitialShape {
    Angles(BaseAngles),
    Sides([f64; 3]),
}

impl InitialShape {
    /// Parses `"a,b,c"` side lengths. Only validates the numbers; the
    /// triangle inequality is checked when the triangle is built.
    pub fn parse_sides(text: &str) -> Result<[f64; 3]> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Arity(parts.len()));
        }
        let mut sides = [0.0; 3];
        for (slot, part) in sides.iter_mut().zip(&parts) {
            let part = part.trim();
            *slot = match part.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => v,
                _ => return Err(Error::InvalidSide(part.to_string())),
            };
        }
        Ok(sides)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMode {
    ExactBase,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retention {
    FullTree,
    Streaming,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRun {
    pub shape: InitialShape,
    pub kind: ProcedureKind,
    pub depth: u32,
    pub mode: AngleMode,
    pub retain: Retention,
    /// Longest side of the initial triangle when built from angles.
    pub scale: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl RefinementRun {
    /// Streaming run, exact whenever the input allows it.
    pub fn new(shape: InitialShape, kind: ProcedureKind, depth: u32) -> Self {
        let mode = match shape {
            InitialShape::Angles(_) => AngleMode::ExactBase,
            InitialShape::Sides(_) => AngleMode::Numeric,
        };
        Self {
            shape,
            kind,
            depth,
            mode,
            retain: Retention::Streaming,
            scale: 1.0,
            workers: None,
        }
    }

    pub fn with_mode(mut self, mode: AngleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_retention(mut self, retain: Retention) -> Self {
        self.retain = retain;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn depth_limit(&self) -> u32 {
        match self.retain {
            Retention::FullTree => FULL_TREE_DEPTH_LIMIT,
            Retention::Streaming => STREAMING_DEPTH_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth > self.depth_limit() {
            return Err(Error::DepthLimit {
                depth: self.depth,
                limit: self.depth_limit(),
                mode: match self.retain {
                    Retention::FullTree => "full-tree",
                    Retention::Streaming => "streaming",
                },
            });
        }
        if self.mode == AngleMode::ExactBase && matches!(self.shape, InitialShape::Sides(_)) {
            return Err(Error::InvalidRun(
                "exact mode needs rational angles; side lengths only support numeric mode".into(),
            ));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidRun(format!("scale must be positive, got {}", self.scale)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidRun("worker count must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether nodes carry exact angle forms (largest-angle in exact mode).
    pub fn tracks_exact_angles(&self) -> bool {
        self.mode == AngleMode::ExactBase && self.kind == ProcedureKind::LargestAngle
    }

    pub fn base(&self) -> Option<&BaseAngles> {
        match &self.shape {
            InitialShape::Angles(base) => Some(base),
            InitialShape::Sides(_) => None,
        }
    }

    pub fn initial_triangle(&self) -> Result<TriangleNode> {
        match &self.shape {
            InitialShape::Angles(base) => {
                TriangleNode::from_base(base, self.scale, self.tracks_exact_angles())
            }
            InitialShape::Sides(sides) => TriangleNode::from_sides(*sides),
        }
    }
}

/// An angle statistic: exact degrees when the run tracks exact angles.
#[derive(Clone, Debug, PartialEq)]
pub enum AngleValue {
    Exact(BigRational),
    Numeric(f64),
}

impl AngleValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            AngleValue::Exact(q) => rational_to_f64(q),
            AngleValue::Numeric(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            AngleValue::Exact(q) => Some(q),
            AngleValue::Numeric(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub n: u32,
    pub triangle_count: u64,
    /// Longest side over the generation.
    pub mesh: f64,
    /// Smallest angle over the generation.
    pub min_angle: AngleValue,
    /// Smallest of the per-triangle largest angles.
    pub min_largest_angle: AngleValue,
    pub max_aspect_ratio: f64,
    /// `max(r_n, r_{n+1}, sqrt(3)/2)`; absent for the last generation.
    pub rho: Option<f64>,
    pub cumulative_similarity_classes: u64,
}

/// Sorted angle triple identifying a similarity class.
///
/// Exact keys hold angles scaled by the base's common denominator (see
/// [`BaseAngles::scaled_value`]); they are only comparable within one run.
/// Numeric keys hold angles rounded to [`SIMILARITY_QUANTUM_DEG`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimilarityKey {
    Exact([DyadicRational; 3]),
    Quantized([i64; 3]),
}

impl SimilarityKey {
    pub fn of(node: &TriangleNode) -> Self {
        match node.exact() {
            Some(exact) => {
                let mut triple = exact.scaled.clone();
                triple.sort();
                SimilarityKey::Exact(triple)
            }
            None => {
                let mut triple = node
                    .measured_angles_deg()
                    .map(|a| (a / SIMILARITY_QUANTUM_DEG).round() as i64);
                triple.sort_unstable();
                SimilarityKey::Quantized(triple)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Measure {
    Exact(DyadicRational),
    Numeric(f64),
}

impl Measure {
    fn min(self, other: Measure) -> Measure {
        match (self, other) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a.min(b)),
            (Measure::Numeric(a), Measure::Numeric(b)) => Measure::Numeric(a.min(b)),
            _ => unreachable!("exact and numeric nodes never share a run"),
        }
    }

    fn into_value(self, base: Option<&BaseAngles>) -> AngleValue {
        match (self, base) {
            (Measure::Exact(scaled), Some(base)) => AngleValue::Exact(base.unscale(&scaled)),
            (Measure::Numeric(x), _) => AngleValue::Numeric(x),
            (Measure::Exact(_), None) => unreachable!("exact angles need a base"),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct GenerationAccumulator {
    count: u64,
    mesh: f64,
    min_angle: Option<Measure>,
    min_largest_angle: Option<Measure>,
    max_aspect_ratio: f64,
    classes: HashSet<SimilarityKey>,
}

fn merge_min(slot: &mut Option<Measure>, value: Measure) {
    *slot = Some(match slot.take() {
        Some(current) => current.min(value),
        None => value,
    });
}

impl GenerationAccumulator {
    fn observe(&mut self, node: &TriangleNode) -> Result<()> {
        let sides = side_lengths(node)?.lengths;
        self.count += 1;
        self.mesh = self.mesh.max(sides[0]);
        self.max_aspect_ratio = self.max_aspect_ratio.max(sides[0] / (sides[1] + sides[2]));
        let (smallest, largest) = match node.exact() {
            Some(exact) => {
                let s = &exact.scaled;
                let min = s.iter().min().expect("three angles").clone();
                let max = s.iter().max().expect("three angles").clone();
                (Measure::Exact(min), Measure::Exact(max))
            }
            None => {
                let a = node.measured_angles_deg();
                (
                    Measure::Numeric(a[0].min(a[1]).min(a[2])),
                    Measure::Numeric(a[0].max(a[1]).max(a[2])),
                )
            }
        };
        merge_min(&mut self.min_angle, smallest);
        merge_min(&mut self.min_largest_angle, largest);
        self.classes.insert(SimilarityKey::of(node));
        Ok(())
    }

    fn merge(&mut self, other: GenerationAccumulator) {
        self.count += other.count;
        self.mesh = self.mesh.max(other.mesh);
        self.max_aspect_ratio = self.max_aspect_ratio.max(other.max_aspect_ratio);
        if let Some(m) = other.min_angle {
            merge_min(&mut self.min_angle, m);
        }
        if let Some(m) = other.min_largest_angle {
            merge_min(&mut self.min_largest_angle, m);
        }
        if self.classes.len() < other.classes.len() {
            let mine = std::mem::replace(&mut self.classes, other.classes);
            self.classes.extend(mine);
        } else {
            self.classes.extend(other.classes);
        }
    }

    fn finish(self, n: u32, base: Option<&BaseAngles>) -> (GenerationStats, HashSet<SimilarityKey>) {
        let stats = GenerationStats {
            n,
            triangle_count: self.count,
            mesh: self.mesh,
            min_angle: self.min_angle.expect("non-empty generation").into_value(base),
            min_largest_angle: self
                .min_largest_angle
                .expect("non-empty generation")
                .into_value(base),
            max_aspect_ratio: self.max_aspect_ratio,
            rho: None,
            cumulative_similarity_classes: self.classes.len() as u64,
        };
        (stats, self.classes)
    }
}

/// Statistics for one generation on its own. `cumulative_similarity_classes`
/// counts only this generation's classes and `rho` is left empty; use
/// [`refine`] for whole runs.
///
/// Panics on an empty slice.
pub fn generation_stats(triangles: &[TriangleNode], base: Option<&BaseAngles>) -> Result<GenerationStats> {
    let first = triangles.first().expect("generation_stats needs at least one triangle");
    let mut acc = GenerationAccumulator::default();
    for t in triangles {
        acc.observe(t)?;
    }
    Ok(acc.finish(first.generation(), base).0)
}

/// Result of [`refine`].
#[derive(Clone, Debug)]
pub struct Refinement {
    pub kind: ProcedureKind,
    pub stats: Vec<GenerationStats>,
    /// Every generation, in lineage order, when run with `FullTree`.
    pub tree: Option<Vec<Vec<TriangleNode>>>,
    classes: Vec<HashSet<SimilarityKey>>,
}

impl Refinement {
    /// Number of similarity classes over generations `from..=n`, for each
    /// `n` in `0..=depth` (zero for `n < from`).
    pub fn cumulative_classes(&self, from: u32) -> Vec<u64> {
        let mut seen: HashSet<&SimilarityKey> = HashSet::new();
        self.classes
            .iter()
            .enumerate()
            .map(|(n, keys)| {
                if n as u32 >= from {
                    seen.extend(keys.iter());
                }
                seen.len() as u64
            })
            .collect()
    }

    /// Distinct classes present in generation `n` alone.
    pub fn generation_classes(&self, n: u32) -> Option<&HashSet<SimilarityKey>> {
        self.classes.get(n as usize)
    }

    pub fn generation(&self, n: u32) -> Option<&[TriangleNode]> {
        self.tree.as_ref()?.get(n as usize).map(Vec::as_slice)
    }

    pub fn rho_sequence(&self) -> Result<Vec<f64>> {
        rho_sequence(&self.stats)
    }
}

/// `rho_n = max(r_n, r_{n+1}, sqrt(3)/2)` for `n = 0 .. len - 2`.
pub fn rho_sequence(stats: &[GenerationStats]) -> Result<Vec<f64>> {
    if stats.len() < 2 {
        return Err(Error::InvalidRun(
            "rho needs at least two generations of statistics".into(),
        ));
    }
    Ok(stats
        .windows(2)
        .map(|w| w[0].max_aspect_ratio.max(w[1].max_aspect_ratio).max(SQRT3_OVER_2))
        .collect())
}

/// Cumulative similarity-class counts per generation, counting from
/// generation 0.
pub fn similarity_classes(result: &Refinement) -> Vec<u64> {
    result.cumulative_classes(0)
}

pub fn refine(run: &RefinementRun) -> Result<Refinement> {
    run.validate()?;
    match run.workers {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidRun(format!("cannot start worker pool: {e}")))?;
            pool.install(|| refine_in_pool(run))
        }
        None => refine_in_pool(run),
    }
}

fn refine_in_pool(run: &RefinementRun) -> Result<Refinement> {
    let root = run.initial_triangle()?;
    let (accumulators, tree) = match run.retain {
        Retention::FullTree => {
            let (acc, tree) = full_tree(root, run)?;
            (acc, Some(tree))
        }
        Retention::Streaming => (streaming(root, run)?, None),
    };

    let base = if run.tracks_exact_angles() { run.base() } else { None };
    let mut stats = Vec::with_capacity(accumulators.len());
    let mut classes = Vec::with_capacity(accumulators.len());
    let mut seen: HashSet<SimilarityKey> = HashSet::new();
    for (n, acc) in accumulators.into_iter().enumerate() {
        let (mut s, keys) = acc.finish(n as u32, base);
        seen.extend(keys.iter().cloned());
        s.cumulative_similarity_classes = seen.len() as u64;
        stats.push(s);
        classes.push(keys);
    }
    if stats.len() >= 2 {
        let rho = rho_sequence(&stats)?;
        for (s, rho) in stats.iter_mut().zip(rho) {
            s.rho = Some(rho);
        }
    }
    Ok(Refinement {
        kind: run.kind,
        stats,
        tree,
        classes,
    })
}

fn bisect_level(level: &[TriangleNode], kind: ProcedureKind) -> Result<Vec<TriangleNode>> {
    let children: Vec<Result<(TriangleNode, TriangleNode)>> =
        level.par_iter().map(|t| bisect(t, kind)).collect();
    let mut next = Vec::with_capacity(level.len() * 2);
    for pair in children {
        let (l, r) = pair?;
        next.push(l);
        next.push(r);
    }
    Ok(next)
}

fn observe_level(level: &[TriangleNode]) -> Result<GenerationAccumulator> {
    let mut acc = GenerationAccumulator::default();
    for t in level {
        acc.observe(t)?;
    }
    Ok(acc)
}

fn full_tree(
    root: TriangleNode,
    run: &RefinementRun,
) -> Result<(Vec<GenerationAccumulator>, Vec<Vec<TriangleNode>>)> {
    let mut levels = vec![vec![root]];
    for _ in 0..run.depth {
        let next = bisect_level(levels.last().expect("root level"), run.kind)?;
        levels.push(next);
    }
    let accumulators = levels
        .iter()
        .map(|level| observe_level(level))
        .collect::<Result<Vec<_>>>()?;
    Ok((accumulators, levels))
}

fn streaming(root: TriangleNode, run: &RefinementRun) -> Result<Vec<GenerationAccumulator>> {
    let depth = run.depth;
    let split = depth.min(SPLIT_LEVEL);
    let mut accumulators: Vec<GenerationAccumulator> =
        (0..=depth).map(|_| GenerationAccumulator::default()).collect();

    let mut frontier = vec![root];
    for n in 0..split {
        accumulators[n as usize] = observe_level(&frontier)?;
        frontier = bisect_level(&frontier, run.kind)?;
    }

    let partials: Vec<Result<Vec<GenerationAccumulator>>> = frontier
        .into_par_iter()
        .map(|node| {
            let mut local: Vec<GenerationAccumulator> =
                (0..=depth).map(|_| GenerationAccumulator::default()).collect();
            descend(node, depth, run.kind, &mut local)?;
            Ok(local)
        })
        .collect();
    for partial in partials {
        for (acc, part) in accumulators.iter_mut().zip(partial?) {
            acc.merge(part);
        }
    }
    Ok(accumulators)
}

fn descend(
    node: TriangleNode,
    depth: u32,
    kind: ProcedureKind,
    acc: &mut [GenerationAccumulator],
) -> Result<()> {
    acc[node.generation() as usize].observe(&node)?;
    if node.generation() == depth {
        return Ok(());
    }
    let (left, right) = bisect(&node, kind)?;
    drop(node);
    descend(left, depth, kind, acc)?;
    descend(right, depth, kind, acc)
}

/// The generation-`n` triangle that keeps the initial smallest angle.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonStep {
    pub n: u32,
    pub lineage: Lineage,
    /// Larger of the two non-`gamma` angles.
    pub theta: BigRational,
    pub phi: BigRational,
    pub gamma: BigRational,
    pub theta_form: AngleForm,
    pub phi_form: AngleForm,
}

/// Follows the child containing the initial `gamma` vertex for `depth`
/// largest-angle bisections, in exact mode.
pub fn track_upsilon(base: &BaseAngles, depth: u32) -> Result<Vec<UpsilonStep>> {
    let mut node = TriangleNode::from_base(base, 1.0, true)?;
    let mut steps = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        let (left, right) = bisect(&node, ProcedureKind::LargestAngle)?;
        node = if left.marked_vertex().is_some() { left } else { right };
        let marked = node.marked_vertex().ok_or_else(|| {
            Error::InvalidRun(format!("the smallest angle was bisected at generation {n}"))
        })?;
        let exact = node.exact().expect("exact node");
        let (i, j) = ((marked + 1) % 3, (marked + 2) % 3);
        let (hi, lo) = if exact.scaled[i] >= exact.scaled[j] { (i, j) } else { (j, i) };
        steps.push(UpsilonStep {
            n,
            lineage: node.lineage(),
            theta: base.unscale(&exact.scaled[hi]),
            phi: base.unscale(&exact.scaled[lo]),
            gamma: base.unscale(&exact.scaled[marked]),
            theta_form: exact.forms[hi].clone(),
            phi_form: exact.forms[lo].clone(),
        });
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::aspect_ratio;
    use approx::assert_relative_eq;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn angles(a: i64, b: i64, c: i64) -> InitialShape {
        InitialShape::Angles(BaseAngles::from_integers(a, b, c).unwrap())
    }

    #[test]
    fn equilateral_second_generation() {
        let run = RefinementRun::new(angles(60, 60, 60), ProcedureKind::LargestAngle, 2)
            .with_retention(Retention::FullTree);
        let result = refine(&run).unwrap();
        let base = run.base().unwrap();
        let mut triples: Vec<Vec<BigRational>> = result
            .generation(2)
            .unwrap()
            .iter()
            .map(|t| {
                let mut v: Vec<_> = t.angle_forms().unwrap().iter().map(|f| base.evaluate(f)).collect();
                v.sort();
                v
            })
            .collect();
        triples.sort();
        triples.dedup();
        assert_eq!(
            triples,
            vec![vec![q(30), q(45), q(105)], vec![q(45), q(60), q(75)]]
        );
        let want = 52.5f64.to_radians().sin() / 7.5f64.to_radians().cos();
        assert_relative_eq!(result.stats[2].max_aspect_ratio, want, max_relative = 1e-12);
    }

    #[test]
    fn right_isosceles_is_one_class_and_decays_by_sqrt2() {
        let run = RefinementRun::new(angles(90, 45, 45), ProcedureKind::LargestAngle, 10);
        let result = refine(&run).unwrap();
        for s in &result.stats {
            assert_eq!(s.cumulative_similarity_classes, 1);
            // Oracle: each bisection scales by exactly 1/sqrt(2).
            assert_relative_eq!(s.mesh, 2f64.powf(-(s.n as f64) / 2.0), max_relative = 1e-12);
            assert_eq!(s.triangle_count, 1 << s.n);
        }
    }

    #[test]
    fn depth_zero_is_the_initial_triangle() {
        let run = RefinementRun::new(angles(100, 50, 30), ProcedureKind::LargestAngle, 0);
        let result = refine(&run).unwrap();
        assert_eq!(result.stats.len(), 1);
        let s = &result.stats[0];
        assert_eq!(s.min_angle, AngleValue::Exact(q(30)));
        assert_eq!(s.min_largest_angle, AngleValue::Exact(q(100)));
        assert_eq!(s.mesh, 1.0);
        assert_eq!(s.rho, None);
        assert!(result.rho_sequence().is_err());
    }

    #[test]
    fn equilateral_first_generation_stats() {
        let run = RefinementRun::new(angles(60, 60, 60), ProcedureKind::LargestAngle, 1)
            .with_retention(Retention::FullTree);
        let result = refine(&run).unwrap();
        let gen1 = generation_stats(result.generation(1).unwrap(), run.base()).unwrap();
        assert_relative_eq!(gen1.mesh, 1.0, max_relative = 1e-14);
        assert_eq!(gen1.min_angle, AngleValue::Exact(q(30)));
        assert_relative_eq!(gen1.max_aspect_ratio, 3f64.sqrt() - 1.0, max_relative = 1e-12);
        let gen0 = generation_stats(result.generation(0).unwrap(), run.base()).unwrap();
        assert_eq!(gen0.mesh, 1.0);
        assert_eq!(gen0.min_angle, AngleValue::Exact(q(60)));
    }

    #[test]
    fn rho_examples() {
        let equi = refine(&RefinementRun::new(angles(60, 60, 60), ProcedureKind::LargestAngle, 3)).unwrap();
        let rho = equi.rho_sequence().unwrap();
        assert_eq!(rho[0], SQRT3_OVER_2);
        assert_eq!(equi.stats[0].rho, Some(SQRT3_OVER_2));
        assert_eq!(equi.stats[3].rho, None);
        let right = refine(&RefinementRun::new(angles(90, 45, 45), ProcedureKind::LargestAngle, 3)).unwrap();
        assert_eq!(right.rho_sequence().unwrap()[0], SQRT3_OVER_2);
        assert!(right.stats[0].max_aspect_ratio < SQRT3_OVER_2);
    }

    #[test]
    fn streaming_and_full_tree_agree() {
        for kind in ProcedureKind::ALL {
            let run = RefinementRun::new(angles(97, 51, 32), kind, 9);
            let streamed = refine(&run).unwrap();
            let full = refine(&run.clone().with_retention(Retention::FullTree)).unwrap();
            assert_eq!(streamed.stats, full.stats, "{kind}");
            assert_eq!(streamed.cumulative_classes(1), full.cumulative_classes(1));
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let run = RefinementRun::new(angles(97, 51, 32), ProcedureKind::LargestAngle, 10);
        let one = refine(&run.clone().with_workers(1)).unwrap();
        let three = refine(&run.with_workers(3)).unwrap();
        assert_eq!(one.stats, three.stats);
    }

    #[test]
    fn depth_limits() {
        let run = RefinementRun::new(angles(60, 60, 60), ProcedureKind::LargestAngle, 25)
            .with_retention(Retention::FullTree);
        assert!(matches!(refine(&run), Err(Error::DepthLimit { limit: 24, .. })));
        let run = RefinementRun::new(angles(60, 60, 60), ProcedureKind::LargestAngle, 41);
        assert!(matches!(refine(&run), Err(Error::DepthLimit { limit: 40, .. })));
        let run = RefinementRun::new(InitialShape::Sides([3.0, 4.0, 5.0]), ProcedureKind::LargestAngle, 2)
            .with_mode(AngleMode::ExactBase);
        assert!(matches!(refine(&run), Err(Error::InvalidRun(_))));
    }

    #[test]
    fn shortest_altitude_on_345_stays_in_one_class() {
        let run = RefinementRun::new(InitialShape::Sides([3.0, 4.0, 5.0]), ProcedureKind::ShortestAltitude, 5);
        let result = refine(&run).unwrap();
        assert!(result.cumulative_classes(1).iter().all(|&c| c <= 2));
        assert_eq!(result.cumulative_classes(1)[5], 1);
    }

    #[test]
    fn upsilon_track_examples() {
        let base = BaseAngles::from_integers(60, 60, 60).unwrap();
        let steps = track_upsilon(&base, 2).unwrap();
        assert_eq!((steps[0].theta.clone(), steps[0].phi.clone(), steps[0].gamma.clone()), (q(90), q(30), q(60)));
        assert_eq!((steps[1].theta.clone(), steps[1].phi.clone(), steps[1].gamma.clone()), (q(75), q(45), q(60)));
    }

    #[test]
    fn upsilon_track_matches_closed_form() {
        for (a, b, c) in [(100, 50, 30), (70, 70, 40), (120, 30, 30), (60, 60, 60), (91, 47, 42)] {
            let base = BaseAngles::from_integers(a, b, c).unwrap();
            for step in track_upsilon(&base, 20).unwrap() {
                let (theta, phi) = crate::symbolic::upsilon_angles(step.n);
                assert_eq!(step.theta_form, theta);
                assert_eq!(step.phi_form, phi);
                assert_eq!(step.theta, base.evaluate(&theta));
                assert_eq!(step.gamma, base.gamma().clone());
            }
        }
    }

    #[test]
    fn min_angle_is_constant_after_first_generation() {
        let run = RefinementRun::new(angles(100, 50, 30), ProcedureKind::LargestAngle, 8);
        let result = refine(&run).unwrap();
        for s in &result.stats[1..] {
            assert_eq!(s.min_angle, AngleValue::Exact(q(30)));
        }
        let mesh: Vec<f64> = result.stats.iter().map(|s| s.mesh).collect();
        assert!(mesh.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn numeric_mode_matches_exact_within_tolerance() {
        let exact = refine(&RefinementRun::new(angles(97, 51, 32), ProcedureKind::LargestAngle, 8)).unwrap();
        let numeric = refine(
            &RefinementRun::new(angles(97, 51, 32), ProcedureKind::LargestAngle, 8).with_mode(AngleMode::Numeric),
        )
        .unwrap();
        for (e, n) in exact.stats.iter().zip(&numeric.stats) {
            assert!((e.min_angle.to_f64() - n.min_angle.to_f64()).abs() < 1e-9);
            assert_eq!(e.mesh, n.mesh);
            assert_eq!(e.cumulative_similarity_classes, n.cumulative_similarity_classes);
        }
        let root = TriangleNode::from_sides([3.0, 4.0, 5.0]).unwrap();
        assert_relative_eq!(aspect_ratio(&root).unwrap(), 5.0 / 7.0);
    }
}

//! Stratified DAG mesh topology.
//!
//! A mesh is stored as a directed acyclic graph over a single consecutive
//! point numbering: every entity (cell, facet, edge, vertex) is a *point*,
//! and each point lists the points it covers in the next codimension (its
//! *cone*) together with the stored dual (its *support*). Transitive
//! traversals (*closure* downwards, *star* upwards) and depth/height strata
//! are derived from those two arrays, so one data structure answers every
//! topological query the rest of the crate needs.
//!
//! Points are grouped into *strata* by depth (longest cone-path to a
//! vertex). Construction through [`Plex::build_from_cones`] validates that
//! each stratum occupies one contiguous id range, which downstream modules
//! rely on for constant-time stratum queries.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{MeshError, Result};

/// Index of a mesh entity in the plex chart.
pub type Point = usize;

/// A named assignment of one integer value per point.
///
/// Labels mark point subsets (boundary sides, entity classes). A point holds
/// at most one value per label; setting a new value overwrites the old one.
#[derive(Debug, Clone)]
pub struct Label {
    values: Vec<Option<i32>>,
}

impl Label {
    fn new(chart_size: usize) -> Self {
        Label {
            values: vec![None; chart_size],
        }
    }

    /// The value held by `p`, if any.
    pub fn value(&self, p: Point) -> Option<i32> {
        self.values.get(p).copied().flatten()
    }

    /// Whether `p` currently holds `value`.
    pub fn has(&self, value: i32, p: Point) -> bool {
        self.value(p) == Some(value)
    }

    /// All points currently holding `value`, ascending.
    pub fn stratum(&self, value: i32) -> Vec<Point> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Some(value))
            .map(|(p, _)| p)
            .collect()
    }

    /// Distinct values present in the label, ascending.
    pub fn values_present(&self) -> Vec<i32> {
        let mut vals: Vec<i32> = self.values.iter().flatten().copied().collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// The same label under a renumbering of the chart.
    pub(crate) fn remapped(&self, new_of_old: &[usize]) -> Label {
        let mut values = vec![None; self.values.len()];
        for (p, &v) in self.values.iter().enumerate() {
            values[new_of_old[p]] = v;
        }
        Label { values }
    }
}

/// Immutable mesh topology: cones, supports, and depth strata over the chart
/// `[0, chart_size)`, plus mutable named labels.
#[derive(Debug, Clone)]
pub struct Plex {
    cones: Vec<Vec<Point>>,
    supports: Vec<Vec<Point>>,
    depths: Vec<usize>,
    /// Per depth: the points of that stratum, ascending.
    strata_points: Vec<Vec<Point>>,
    /// Per depth: the contiguous id range, when the stratum is contiguous.
    strata_ranges: Vec<Option<Range<Point>>>,
    labels: BTreeMap<String, Label>,
}

impl Plex {
    /// Builds a plex from per-point cone lists and validates it.
    ///
    /// Supports are computed as the exact dual of the cones; depths are the
    /// longest cone-path to a cone-minimal point, found by a topological
    /// sweep. Cone order is preserved as given (it is significant for local
    /// numbering); support lists come out in ascending covering-point order.
    ///
    /// # Errors
    ///
    /// * [`MeshError::Argument`] if `cones.len() != chart_size`.
    /// * [`MeshError::Range`] if a cone references a point outside the chart.
    /// * [`MeshError::Topology`] if the cone relation has a cycle.
    /// * [`MeshError::Layout`] if some depth stratum is not one contiguous
    ///   id range, naming the offending point.
    pub fn build_from_cones(chart_size: usize, cones: Vec<Vec<Point>>) -> Result<Plex> {
        if cones.len() != chart_size {
            return Err(MeshError::Argument(format!(
                "expected {} cone lists, got {}",
                chart_size,
                cones.len()
            )));
        }
        for (p, cone) in cones.iter().enumerate() {
            for &q in cone {
                if q >= chart_size {
                    return Err(MeshError::Range(format!(
                        "cone of point {p} references point {q} outside chart of size {chart_size}"
                    )));
                }
            }
        }
        Plex::assemble(cones, BTreeMap::new(), true)
    }

    /// Builds a plex whose strata are allowed to be non-contiguous.
    ///
    /// Used by `apply_permutation`, where renumbering scrambles the id
    /// ranges; the input is assumed to be a valid (acyclic, in-chart) DAG.
    pub(crate) fn from_cones_unchecked(
        cones: Vec<Vec<Point>>,
        labels: BTreeMap<String, Label>,
    ) -> Result<Plex> {
        Plex::assemble(cones, labels, false)
    }

    fn assemble(
        cones: Vec<Vec<Point>>,
        labels: BTreeMap<String, Label>,
        require_contiguous: bool,
    ) -> Result<Plex> {
        let chart_size = cones.len();
        let depths = compute_depths(&cones)?;

        let mut supports: Vec<Vec<Point>> = vec![Vec::new(); chart_size];
        for (p, cone) in cones.iter().enumerate() {
            for &q in cone {
                supports[q].push(p);
            }
        }

        let max_depth = depths.iter().copied().max().unwrap_or(0);
        let mut strata_points: Vec<Vec<Point>> = vec![Vec::new(); max_depth + 1];
        for (p, &d) in depths.iter().enumerate() {
            strata_points[d].push(p);
        }
        let mut strata_ranges = Vec::with_capacity(strata_points.len());
        for pts in &strata_points {
            let contiguous = match (pts.first(), pts.last()) {
                (Some(&lo), Some(&hi)) if hi - lo + 1 == pts.len() => Some(lo..hi + 1),
                (None, _) => Some(0..0),
                _ => None,
            };
            if require_contiguous && contiguous.is_none() {
                // Name the first point that breaks the run.
                let lo = pts[0];
                let bad = pts
                    .iter()
                    .enumerate()
                    .find(|(i, &p)| p != lo + i)
                    .map(|(_, &p)| p)
                    .unwrap_or(lo);
                return Err(MeshError::Layout(format!(
                    "stratum at depth {} is not a contiguous id range (point {} breaks the run)",
                    depths[bad], bad
                )));
            }
            strata_ranges.push(contiguous);
        }

        Ok(Plex {
            cones,
            supports,
            depths,
            strata_points,
            strata_ranges,
            labels,
        })
    }

    /// Number of points in the chart.
    pub fn chart_size(&self) -> usize {
        self.cones.len()
    }

    fn check_point(&self, p: Point) -> Result<()> {
        if p < self.chart_size() {
            Ok(())
        } else {
            Err(MeshError::Range(format!(
                "point {p} outside chart of size {}",
                self.chart_size()
            )))
        }
    }

    /// Points covered by `p`, in construction order.
    pub fn cone(&self, p: Point) -> Result<&[Point]> {
        self.check_point(p)?;
        Ok(&self.cones[p])
    }

    /// Points covering `p`, in ascending order.
    pub fn support(&self, p: Point) -> Result<&[Point]> {
        self.check_point(p)?;
        Ok(&self.supports[p])
    }

    /// Every point reachable from `seeds` along the chosen direction
    /// (`down` = cones, otherwise supports), seeds included, ascending.
    fn reachable(&self, seeds: &[Point], down: bool) -> Vec<Point> {
        let arcs = if down { &self.cones } else { &self.supports };
        let mut out: Vec<Point> = seeds.to_vec();
        let mut head = 0;
        while head < out.len() {
            let p = out[head];
            head += 1;
            for &q in &arcs[p] {
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Transitive closure of `cone(p)`, ascending.
    ///
    /// With `include_self = false` this matches the figure convention used
    /// throughout the tests (the seed point is excluded); consumers that walk
    /// a cell's DoFs pass `true` so the cell point itself is present.
    pub fn closure(&self, p: Point, include_self: bool) -> Result<Vec<Point>> {
        self.check_point(p)?;
        let mut out = self.reachable(&[p], true);
        if !include_self {
            out.retain(|&q| q != p);
        }
        Ok(out)
    }

    /// Transitive closure of `support(p)`, ascending; dual of [`Plex::closure`].
    pub fn star(&self, p: Point, include_self: bool) -> Result<Vec<Point>> {
        self.check_point(p)?;
        let mut out = self.reachable(&[p], false);
        if !include_self {
            out.retain(|&q| q != p);
        }
        Ok(out)
    }

    /// Topological adjacency `closure(star(closure(p)))`, excluding `p`,
    /// ascending.
    ///
    /// All intermediate traversals are inclusive, so for a vertex this is
    /// exactly closure-of-star while for a cell it also reaches the
    /// neighbouring cells sharing at least one vertex — the neighbourhood
    /// the class-marking and overlap-growth rules are defined on.
    pub fn adjacency(&self, p: Point) -> Result<Vec<Point>> {
        self.check_point(p)?;
        let down = self.reachable(&[p], true);
        let up = self.reachable(&down, false);
        let mut out = self.reachable(&up, true);
        out.retain(|&q| q != p);
        Ok(out)
    }

    /// Depth (dimension) of `p`: longest cone-path to a cone-minimal point.
    pub fn depth(&self, p: Point) -> Result<usize> {
        self.check_point(p)?;
        Ok(self.depths[p])
    }

    /// Largest depth present (the cell dimension for interpolated meshes).
    pub fn max_depth(&self) -> usize {
        self.strata_points.len().saturating_sub(1)
    }

    fn check_depth(&self, d: usize) -> Result<()> {
        if self.cones.is_empty() || d > self.max_depth() {
            Err(MeshError::Range(format!(
                "no stratum at depth {d} (max depth {})",
                self.max_depth()
            )))
        } else {
            Ok(())
        }
    }

    /// The contiguous id range of all points at depth `d`.
    ///
    /// # Errors
    ///
    /// [`MeshError::Range`] for an out-of-range depth; [`MeshError::Layout`]
    /// when the stratum is not contiguous (possible only on permuted plexes —
    /// use [`Plex::depth_stratum_points`] there).
    pub fn depth_stratum(&self, d: usize) -> Result<Range<Point>> {
        self.check_depth(d)?;
        self.strata_ranges[d].clone().ok_or_else(|| {
            MeshError::Layout(format!(
                "stratum at depth {d} is not contiguous; query its point list instead"
            ))
        })
    }

    /// The contiguous id range of all points at height `h` (codimension).
    pub fn height_stratum(&self, h: usize) -> Result<Range<Point>> {
        self.check_depth(h)?;
        self.depth_stratum(self.max_depth() - h)
    }

    /// All points at depth `d`, ascending. Works on any plex.
    pub fn depth_stratum_points(&self, d: usize) -> Result<&[Point]> {
        self.check_depth(d)?;
        Ok(&self.strata_points[d])
    }

    /// All points at height `h`, ascending. Works on any plex.
    pub fn height_stratum_points(&self, h: usize) -> Result<&[Point]> {
        self.check_depth(h)?;
        Ok(&self.strata_points[self.max_depth() - h])
    }

    /// The cells (height-0 points), ascending.
    pub fn cells(&self) -> &[Point] {
        self.strata_points.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Assigns `value` to `p` in the named label, creating the label on
    /// first use and overwriting any previous value for `p`.
    pub fn label_set(&mut self, name: &str, value: i32, p: Point) -> Result<()> {
        self.check_point(p)?;
        let chart_size = self.chart_size();
        let label = self
            .labels
            .entry(name.to_string())
            .or_insert_with(|| Label::new(chart_size));
        label.values[p] = Some(value);
        Ok(())
    }

    /// All points of the named label holding `value`, ascending; empty when
    /// the label does not exist.
    pub fn label_stratum(&self, name: &str, value: i32) -> Vec<Point> {
        self.labels
            .get(name)
            .map(|l| l.stratum(value))
            .unwrap_or_default()
    }

    /// Whether `p` holds `value` in the named label.
    pub fn label_has(&self, name: &str, value: i32, p: Point) -> Result<bool> {
        self.check_point(p)?;
        Ok(self.labels.get(name).is_some_and(|l| l.has(value, p)))
    }

    /// The value `p` holds in the named label, if any.
    pub fn label_value(&self, name: &str, p: Point) -> Result<Option<i32>> {
        self.check_point(p)?;
        Ok(self.labels.get(name).and_then(|l| l.value(p)))
    }

    /// The named label, if present.
    pub fn label(&self, name: &str) -> Option<&Label> {
        self.labels.get(name)
    }

    /// Names of all labels, ascending.
    pub fn label_names(&self) -> Vec<&str> {
        self.labels.keys().map(String::as_str).collect()
    }

    pub(crate) fn labels(&self) -> &BTreeMap<String, Label> {
        &self.labels
    }
}

/// Longest-path depths via an iterative DFS over the cone digraph; detects
/// cycles with the usual three-colour marking.
fn compute_depths(cones: &[Vec<Point>]) -> Result<Vec<usize>> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const DONE: u8 = 2;
    let chart_size = cones.len();
    let mut depth = vec![0usize; chart_size];
    let mut state = vec![WHITE; chart_size];
    for start in 0..chart_size {
        if state[start] == DONE {
            continue;
        }
        state[start] = GREY;
        let mut stack: Vec<(Point, usize)> = vec![(start, 0)];
        while let Some(&mut (p, ref mut next)) = stack.last_mut() {
            if *next < cones[p].len() {
                let q = cones[p][*next];
                *next += 1;
                match state[q] {
                    WHITE => {
                        state[q] = GREY;
                        stack.push((q, 0));
                    }
                    GREY => {
                        return Err(MeshError::Topology(format!(
                            "cycle in the cone relation through point {q}"
                        )));
                    }
                    _ => {}
                }
            } else {
                depth[p] = cones[p].iter().map(|&q| depth[q] + 1).max().unwrap_or(0);
                state[p] = DONE;
                stack.pop();
            }
        }
    }
    Ok(depth)
}

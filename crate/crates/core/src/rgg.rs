//! Unit-disk graphs over a [`PointSet`], connected components under an
//! optional activity mask, and extended clusters.

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Network};
use crate::pointproc::{Point, PointSet};
use crate::unionfind::UnionFind;

/// How distances are measured near the window edge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Boundary {
    /// No wraparound; the finite window as sampled.
    #[default]
    Free,
    /// Periodic window (minimum-image distances). Only meant for reducing
    /// edge effects in limit checks.
    Torus,
}

/// Uniform bucket grid over the window with cells no smaller than the
/// connection radius, so every neighbor of a point lies in the 3×3 block of
/// cells around it.
#[derive(Debug, Clone)]
pub struct CellGrid {
    per_side: usize,
    cell_side: f64,
    half: f64,
    starts: Vec<u32>,
    members: Vec<u32>,
}

impl CellGrid {
    fn build(points: &[Point], side_m: f64, radius: f64) -> Self {
        let per_side = ((side_m / radius).floor() as usize).max(1);
        let cell_side = side_m / per_side as f64;
        let half = 0.5 * side_m;
        let mut grid = Self {
            per_side,
            cell_side,
            half,
            starts: vec![0; per_side * per_side + 1],
            members: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| grid.cell_index(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..per_side * per_side {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.members[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    #[inline]
    fn coord(&self, v: f64) -> usize {
        let c = ((v + self.half) / self.cell_side).floor();
        (c.max(0.0) as usize).min(self.per_side - 1)
    }

    /// Cell coordinates `(column, row)` of a position.
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        (self.coord(p.x), self.coord(p.y))
    }

    fn cell_index(&self, p: Point) -> usize {
        let (cx, cy) = self.cell_of(p);
        cy * self.per_side + cx
    }

    pub fn cells_per_side(&self) -> usize {
        self.per_side
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// Indices of the points in cell `(cx, cy)`.
    pub fn points_in(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.per_side + cx;
        &self.members[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// The (deduplicated) cells of the 3×3 block around `(cx, cy)`.
    fn block(&self, cx: usize, cy: usize, boundary: Boundary, out: &mut Vec<(usize, usize)>) {
        out.clear();
        let n = self.per_side as isize;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (x, y) = (cx as isize + dx, cy as isize + dy);
                let cell = match boundary {
                    Boundary::Free => {
                        if x < 0 || y < 0 || x >= n || y >= n {
                            continue;
                        }
                        (x as usize, y as usize)
                    }
                    Boundary::Torus => (x.rem_euclid(n) as usize, y.rem_euclid(n) as usize),
                };
                if !out.contains(&cell) {
                    out.push(cell);
                }
            }
        }
    }
}

/// Random geometric graph: points joined when at distance `<= r`.
#[derive(Debug, Clone)]
pub struct Rgg {
    points: PointSet,
    cell_grid: CellGrid,
    boundary: Boundary,
    adjacency: Adjacency,
}

impl Rgg {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn cell_grid(&self) -> &CellGrid {
        &self.cell_grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }
}

impl Network for Rgg {
    fn node_count(&self) -> usize {
        self.adjacency.node_count()
    }

    #[inline]
    fn neighbors(&self, v: usize) -> &[u32] {
        self.adjacency.neighbors(v)
    }

    fn source(&self) -> usize {
        self.points.source_index()
    }
}

/// Squared distance under the given boundary convention.
#[inline]
pub fn distance2(a: Point, b: Point, side_m: f64, boundary: Boundary) -> f64 {
    match boundary {
        Boundary::Free => a.dist2(b),
        Boundary::Torus => {
            let wrap = |d: f64| {
                let d = d.abs();
                if d > 0.5 * side_m {
                    side_m - d
                } else {
                    d
                }
            };
            let dx = wrap(a.x - b.x);
            let dy = wrap(a.y - b.y);
            dx * dx + dy * dy
        }
    }
}

/// Builds the unit-disk graph with a free boundary.
pub fn build_rgg(points: PointSet) -> Rgg {
    build_rgg_with(points, Boundary::Free)
}

/// Builds the disk graph using a cell list: each point is only compared
/// with points in its own and the eight surrounding cells.
pub fn build_rgg_with(points: PointSet, boundary: Boundary) -> Rgg {
    let domain = *points.domain();
    let coords = points.coords();
    let r2 = domain.radius_r * domain.radius_r;
    let grid = CellGrid::build(coords, domain.side_m, domain.radius_r);

    let mut offsets = Vec::with_capacity(coords.len() + 1);
    let mut targets = Vec::new();
    let mut block = Vec::with_capacity(9);
    offsets.push(0);
    for (i, &p) in coords.iter().enumerate() {
        let start = targets.len();
        let (cx, cy) = grid.cell_of(p);
        grid.block(cx, cy, boundary, &mut block);
        for &(bx, by) in &block {
            for &j in grid.points_in(bx, by) {
                if j as usize != i && distance2(p, coords[j as usize], domain.side_m, boundary) <= r2 {
                    targets.push(j);
                }
            }
        }
        targets[start..].sort_unstable();
        offsets.push(targets.len());
    }

    Rgg {
        points,
        cell_grid: grid,
        boundary,
        adjacency: Adjacency::from_parts(offsets, targets),
    }
}

/// Label of points excluded by the activity mask.
pub const INACTIVE: u32 = u32::MAX;

/// Connected-component labels; component ids are union-find roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    label: Vec<u32>,
    sizes: Vec<u32>,
    largest_id: Option<u32>,
    count: usize,
}

impl ClusterLabeling {
    /// Component id of point `v`, or [`INACTIVE`].
    pub fn label(&self, v: usize) -> u32 {
        self.label[v]
    }

    pub fn labels(&self) -> &[u32] {
        &self.label
    }

    /// Number of points in component `id` (0 when `id` is not a component).
    pub fn size(&self, id: u32) -> usize {
        self.sizes.get(id as usize).copied().unwrap_or(0) as usize
    }

    pub fn contains_cluster(&self, id: u32) -> bool {
        self.size(id) > 0
    }

    /// A maximum-size component; ties go to the smallest root.
    pub fn largest_id(&self) -> Option<u32> {
        self.largest_id
    }

    pub fn largest_size(&self) -> usize {
        self.largest_id.map_or(0, |id| self.size(id))
    }

    pub fn component_count(&self) -> usize {
        self.count
    }

    /// `(id, size)` for every component, by ascending id.
    pub fn components(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(id, &s)| (id as u32, s as usize))
    }

    pub fn members(&self, id: u32) -> Vec<u32> {
        (0..self.label.len() as u32)
            .filter(|&v| self.label[v as usize] == id)
            .collect()
    }
}

/// Components of the subgraph induced by the active points (all points when
/// `active` is `None`).
///
/// # Panics
/// If the mask length differs from the node count.
pub fn components<G: Network + ?Sized>(graph: &G, active: Option<&[bool]>) -> ClusterLabeling {
    let n = graph.node_count();
    if let Some(mask) = active {
        assert_eq!(mask.len(), n, "activity mask length must equal the point count");
    }
    let is_active = |v: usize| active.is_none_or(|m| m[v]);

    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if !is_active(i) {
            continue;
        }
        for &j in graph.neighbors(i) {
            if (i as u32) < j && is_active(j as usize) {
                uf.union(i as u32, j);
            }
        }
    }

    let mut label = vec![INACTIVE; n];
    let mut sizes = vec![0u32; n];
    for (v, slot) in label.iter_mut().enumerate() {
        if is_active(v) {
            let root = uf.find(v as u32);
            *slot = root;
            sizes[root as usize] += 1;
        }
    }
    let mut largest_id = None;
    let mut best = 0;
    let mut count = 0;
    for (id, &s) in sizes.iter().enumerate() {
        if s > 0 {
            count += 1;
            if s > best {
                best = s;
                largest_id = Some(id as u32);
            }
        }
    }
    ClusterLabeling {
        label,
        sizes,
        largest_id,
        count,
    }
}

/// The cluster's points plus every point outside it that is adjacent (in
/// the full graph) to some cluster point. Returned in ascending order.
pub fn extended_cluster<G: Network + ?Sized>(
    graph: &G,
    labeling: &ClusterLabeling,
    cluster_id: u32,
) -> Result<Vec<u32>> {
    if !labeling.contains_cluster(cluster_id) {
        return Err(Error::UnknownCluster(cluster_id));
    }
    let n = graph.node_count();
    let mut inside = vec![false; n];
    for v in 0..n {
        if labeling.label(v) == cluster_id {
            inside[v] = true;
            for &u in graph.neighbors(v) {
                inside[u as usize] = true;
            }
        }
    }
    Ok((0..n as u32).filter(|&v| inside[v as usize]).collect())
}

/// Size of the largest component divided by the number of points.
pub fn largest_component_fraction<G: Network + ?Sized>(graph: &G) -> f64 {
    let n = graph.node_count();
    assert!(n > 0, "graph must be nonempty");
    components(graph, None).largest_size() as f64 / n as f64
}

//! Low-level topological graph: a uniformly sampled node lattice over the
//! free cells of the occupancy grid, with corridor-validated 8-neighbor
//! edges, incremental updates from grid diffs, and frontier detection by
//! windowed unknown-cell scoring plus BFS clustering.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{Cell, Point, TotalF64};
use crate::grid::{CellState, GridDiff, OccupancyGrid};

/// Stable node identifier: the node's lattice index (row-major over the
/// sampling lattice), so ids are identical between incremental updates and
/// full rebuilds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a frontier cluster within one detection pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId(pub u32);

#[derive(Clone, Debug, PartialEq)]
pub struct LowNode {
    pub id: NodeId,
    pub cell: Cell,
    pub position: Point,
    pub degree: u8,
    pub info_value: u32,
    pub is_frontier: bool,
}

/// Connected component of frontier nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierCluster {
    pub id: ClusterId,
    /// Member node ids, ascending.
    pub members: Vec<NodeId>,
    /// Member geographically closest to the member centroid (ties: lowest id).
    pub center_node: NodeId,
    pub total_info: u64,
}

const NEIGHBOR_DIRS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Clone, Debug)]
pub struct LowGraph {
    k: i32,
    corridor_w: i32,
    grid_width: i32,
    grid_height: i32,
    lattice_cols: i32,
    lattice_rows: i32,
    nodes: BTreeMap<NodeId, LowNode>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl LowGraph {
    /// Build the full graph: one node per Free lattice cell, edges where
    /// the corridor check passes for lattice-adjacent pairs.
    pub fn build_full(grid: &OccupancyGrid, k: i32, corridor_w: i32) -> Result<LowGraph> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!(
                "sampling multiple k must be >= 2, got {k}"
            )));
        }
        if corridor_w < 1 {
            return Err(Error::InvalidArgument(format!(
                "corridor width must be >= 1, got {corridor_w}"
            )));
        }
        let mut g = LowGraph {
            k,
            corridor_w,
            grid_width: grid.width(),
            grid_height: grid.height(),
            lattice_cols: (grid.width() - 1) / k + 1,
            lattice_rows: (grid.height() - 1) / k + 1,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        };
        for row in 0..g.lattice_rows {
            for col in 0..g.lattice_cols {
                let cell = Cell::new(col * k, row * k);
                if grid.is_free(cell) {
                    g.insert_node(grid, cell);
                }
            }
        }
        let ids: Vec<NodeId> = g.nodes.keys().copied().collect();
        for id in ids {
            g.refresh_edges_around(grid, id);
        }
        Ok(g)
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn corridor_w(&self) -> i32 {
        self.corridor_w
    }

    /// Sampling interval in meters for a given grid.
    pub fn d_sample(&self, grid: &OccupancyGrid) -> f64 {
        self.k as f64 * grid.resolution()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&LowNode> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LowNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    /// Connected neighbors of a node, ascending by id.
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(8);
        if let Some(node) = self.nodes.get(&id) {
            for (dx, dy) in NEIGHBOR_DIRS {
                let c = Cell::new(node.cell.x + dx * self.k, node.cell.y + dy * self.k);
                if let Some(nid) = self.lattice_id(c) {
                    if self.edges.contains(&ordered(id, nid)) {
                        out.push(nid);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Node nearest to a world position, with its distance.
    pub fn nearest_node(&self, p: Point) -> Option<(NodeId, f64)> {
        self.nodes
            .values()
            .map(|n| (TotalF64(n.position.distance(p)), n.id))
            .min()
            .map(|(d, id)| (id, d.0))
    }

    fn lattice_id(&self, cell: Cell) -> Option<NodeId> {
        if cell.x < 0
            || cell.y < 0
            || cell.x >= self.grid_width
            || cell.y >= self.grid_height
            || cell.x % self.k != 0
            || cell.y % self.k != 0
        {
            return None;
        }
        let col = cell.x / self.k;
        let row = cell.y / self.k;
        Some(NodeId((row * self.lattice_cols + col) as u32))
    }

    fn insert_node(&mut self, grid: &OccupancyGrid, cell: Cell) {
        let id = self.lattice_id(cell).expect("cell on lattice");
        self.nodes.insert(
            id,
            LowNode {
                id,
                cell,
                position: grid.cell_center(cell),
                degree: 0,
                info_value: 0,
                is_frontier: false,
            },
        );
    }

    fn remove_node(&mut self, id: NodeId) {
        if self.nodes.remove(&id).is_none() {
            return;
        }
        let stale: Vec<(NodeId, NodeId)> = self
            .edges
            .iter()
            .copied()
            .filter(|(a, b)| *a == id || *b == id)
            .collect();
        for e in stale {
            self.edges.remove(&e);
            let other = if e.0 == id { e.1 } else { e.0 };
            self.recompute_degree(other);
        }
    }

    /// Re-evaluate the 8 incident edges of a lattice cell (whether or not a
    /// node currently exists there).
    fn refresh_edges_around(&mut self, grid: &OccupancyGrid, id: NodeId) {
        let col = id.0 as i32 % self.lattice_cols;
        let row = id.0 as i32 / self.lattice_cols;
        let cell = Cell::new(col * self.k, row * self.k);
        for (dx, dy) in NEIGHBOR_DIRS {
            let ncell = Cell::new(cell.x + dx * self.k, cell.y + dy * self.k);
            let Some(nid) = self.lattice_id(ncell) else {
                continue;
            };
            let key = ordered(id, nid);
            let should = self.nodes.contains_key(&id)
                && self.nodes.contains_key(&nid)
                && Self::check_edge(grid, cell, ncell, self.corridor_w);
            let had = self.edges.contains(&key);
            if should && !had {
                self.edges.insert(key);
                self.recompute_degree(id);
                self.recompute_degree(nid);
            } else if !should && had {
                self.edges.remove(&key);
                self.recompute_degree(id);
                self.recompute_degree(nid);
            }
        }
    }

    fn recompute_degree(&mut self, id: NodeId) {
        if !self.nodes.contains_key(&id) {
            return;
        }
        let degree = self.neighbors(id).len() as u8;
        if let Some(n) = self.nodes.get_mut(&id) {
            n.degree = degree;
        }
    }

    /// Corridor cells for an edge between `a` and `b`: every cell whose
    /// center lies within ceil(w/2) cells of the segment a-b. Unclipped;
    /// callers ignore out-of-bounds members.
    pub fn corridor_cells(a: Cell, b: Cell, w: i32) -> Vec<Cell> {
        let half = (w + 1) / 2;
        let pa = Point::new(a.x as f64, a.y as f64);
        let pb = Point::new(b.x as f64, b.y as f64);
        let (x0, x1) = (a.x.min(b.x) - half, a.x.max(b.x) + half);
        let (y0, y1) = (a.y.min(b.y) - half, a.y.max(b.y) + half);
        let mut cells = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let p = Point::new(x as f64, y as f64);
                if crate::geom::point_segment_distance(p, pa, pb) <= half as f64 {
                    cells.push(Cell::new(x, y));
                }
            }
        }
        cells
    }

    /// True iff every in-bounds corridor cell between the two node cells is
    /// Free.
    pub fn check_edge(grid: &OccupancyGrid, a: Cell, b: Cell, w: i32) -> bool {
        Self::corridor_cells(a, b, w)
            .into_iter()
            .filter(|c| grid.in_bounds(*c))
            .all(|c| grid.is_free(c))
    }

    /// Incremental update from a grid diff. The result is identical in
    /// node and edge sets to `build_full` on the post-diff grid.
    pub fn update(&mut self, grid: &OccupancyGrid, diff: &GridDiff) {
        if diff.is_empty() {
            return;
        }
        let half = (self.corridor_w + 1) / 2;
        // Any edge whose corridor contains a changed cell has an endpoint
        // within k + half (Euclidean) of it; pad a little for the cell
        // metric slop.
        let margin = self.k + half + 2;
        let mut affected: BTreeSet<NodeId> = BTreeSet::new();
        for entry in &diff.changed {
            let c = grid.cell_at_index(entry.index);
            let lx0 = ((c.x - margin).max(0) + self.k - 1) / self.k * self.k;
            let ly0 = ((c.y - margin).max(0) + self.k - 1) / self.k * self.k;
            let mut ly = ly0;
            while ly <= (c.y + margin).min(self.grid_height - 1) {
                let mut lx = lx0;
                while lx <= (c.x + margin).min(self.grid_width - 1) {
                    if let Some(id) = self.lattice_id(Cell::new(lx, ly)) {
                        affected.insert(id);
                    }
                    lx += self.k;
                }
                ly += self.k;
            }
        }
        // Pass 1: node existence.
        for &id in &affected {
            let cell = self.id_cell(id);
            let exists = self.nodes.contains_key(&id);
            let free = grid.is_free(cell);
            if free && !exists {
                self.insert_node(grid, cell);
            } else if !free && exists {
                self.remove_node(id);
            }
        }
        // Pass 2: re-evaluate edges incident to affected lattice cells.
        for &id in &affected {
            self.refresh_edges_around(grid, id);
        }
    }

    fn id_cell(&self, id: NodeId) -> Cell {
        let col = id.0 as i32 % self.lattice_cols;
        let row = id.0 as i32 / self.lattice_cols;
        Cell::new(col * self.k, row * self.k)
    }

    /// Diffusion score of a node cell: grow a (2d+1)x(2d+1) window from
    /// d = 1 until it contains an Occupied cell or d reaches `d_max`;
    /// return the Unknown-cell count of the final window and whether the
    /// stop was due to an Occupied cell. Windows are clipped at bounds.
    pub fn score_frontier(grid: &OccupancyGrid, cell: Cell, d_max: i32) -> (u32, bool) {
        debug_assert!(d_max >= 1);
        let mut last_unknown = 0u32;
        for d in 1..=d_max {
            let mut unknown = 0u32;
            let mut occupied = false;
            for y in (cell.y - d)..=(cell.y + d) {
                for x in (cell.x - d)..=(cell.x + d) {
                    let c = Cell::new(x, y);
                    if !grid.in_bounds(c) {
                        continue;
                    }
                    match grid.state(c).expect("in bounds") {
                        CellState::Unknown => unknown += 1,
                        CellState::Occupied => occupied = true,
                        CellState::Free => {}
                    }
                }
            }
            if occupied {
                return (unknown, true);
            }
            last_unknown = unknown;
        }
        (last_unknown, false)
    }

    /// Score peripheral nodes (degree < 8), mark frontiers (info > tau) and
    /// cluster them into connected components by BFS. Nodes with degree 8
    /// are interior and reset to zero info.
    pub fn detect_frontiers(
        &mut self,
        grid: &OccupancyGrid,
        d_max: i32,
        tau: u32,
    ) -> Vec<FrontierCluster> {
        let mut scored: Vec<(NodeId, u32)> = Vec::new();
        for node in self.nodes.values() {
            if node.degree < 8 {
                let (info, _) = Self::score_frontier(grid, node.cell, d_max);
                scored.push((node.id, info));
            }
        }
        for node in self.nodes.values_mut() {
            node.info_value = 0;
            node.is_frontier = false;
        }
        for (id, info) in scored {
            let node = self.nodes.get_mut(&id).expect("scored node exists");
            node.info_value = info;
            node.is_frontier = info > tau;
        }

        let frontier_ids: Vec<NodeId> = self
            .nodes
            .values()
            .filter(|n| n.is_frontier)
            .map(|n| n.id)
            .collect();
        let frontier_set: BTreeSet<NodeId> = frontier_ids.iter().copied().collect();
        let mut visited: BTreeSet<NodeId> = BTreeSet::new();
        let mut clusters = Vec::new();
        for &start in &frontier_ids {
            if visited.contains(&start) {
                continue;
            }
            let mut members = Vec::new();
            let mut queue = VecDeque::new();
            visited.insert(start);
            queue.push_back(start);
            while let Some(id) = queue.pop_front() {
                members.push(id);
                for nb in self.neighbors(id) {
                    if frontier_set.contains(&nb) && visited.insert(nb) {
                        queue.push_back(nb);
                    }
                }
            }
            members.sort();
            let cx = members
                .iter()
                .map(|id| self.nodes[id].position.x)
                .sum::<f64>()
                / members.len() as f64;
            let cy = members
                .iter()
                .map(|id| self.nodes[id].position.y)
                .sum::<f64>()
                / members.len() as f64;
            let centroid = Point::new(cx, cy);
            let center_node = members
                .iter()
                .copied()
                .min_by_key(|id| (TotalF64(self.nodes[id].position.distance(centroid)), *id))
                .expect("cluster non-empty");
            let total_info = members
                .iter()
                .map(|id| self.nodes[id].info_value as u64)
                .sum();
            clusters.push(FrontierCluster {
                id: ClusterId(clusters.len() as u32),
                members,
                center_node,
                total_info,
            });
        }
        clusters
    }

    /// Structural equality: same node cells/degrees and same edge set
    /// (frontier scores are owned by `detect_frontiers` and excluded).
    pub fn structure_eq(&self, other: &LowGraph) -> bool {
        if self.edges != other.edges {
            return false;
        }
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        self.nodes.iter().zip(other.nodes.iter()).all(|(a, b)| {
            a.0 == b.0 && a.1.cell == b.1.cell && a.1.degree == b.1.degree
        })
    }

    /// Line-oriented export: `N <id> <cx> <cy> <degree> <info>` rows, then
    /// `E <id1> <id2>` rows, both ascending.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for n in self.nodes.values() {
            writeln!(
                out,
                "N {} {} {} {} {}",
                n.id, n.cell.x, n.cell.y, n.degree, n.info_value
            )
            .unwrap();
        }
        for (a, b) in &self.edges {
            writeln!(out, "E {a} {b}").unwrap();
        }
        out
    }
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

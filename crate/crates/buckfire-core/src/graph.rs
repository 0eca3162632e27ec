//! Game boards: connected undirected simple graphs with a start vertex,
//! and the complete k-ary tree generator.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Dense vertex index, unique within a [`Graph`]. Iteration over vertices is
/// always in increasing index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parameters of a complete k-ary tree: branching factor `k >= 2` and
/// `n >= 0` full levels below the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSpec {
    k: usize,
    n: usize,
}

impl TreeSpec {
    pub fn new(k: usize, n: usize) -> Result<TreeSpec, GraphError> {
        if k < 2 {
            return Err(GraphError::BranchingTooSmall(k));
        }
        Ok(TreeSpec { k, n })
    }

    pub fn branching(&self) -> usize {
        self.k
    }

    pub fn levels(&self) -> usize {
        self.n
    }

    /// Total vertex count `(k^(n+1) - 1) / (k - 1)`.
    pub fn vertex_count(&self) -> Result<usize, GraphError> {
        let mut total = 0usize;
        let mut level_size = 1usize;
        for _ in 0..=self.n {
            total = total
                .checked_add(level_size)
                .ok_or(GraphError::TreeTooLarge)?;
            level_size = level_size
                .checked_mul(self.k)
                .ok_or(GraphError::TreeTooLarge)?;
        }
        Ok(total)
    }
}

/// A connected undirected simple graph with a distinguished start vertex.
///
/// Adjacency lists are sorted; construction rejects self-loops, duplicate
/// edges, disconnected input, and out-of-range start vertices. Values are
/// immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    start: VertexId,
    /// Depth of every vertex below the root; present only for generated trees.
    levels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// Edge from a vertex to itself.
    SelfLoop(usize),
    /// The same undirected edge listed twice.
    DuplicateEdge(usize, usize),
    /// The edge list does not describe a connected graph.
    Disconnected,
    /// Start vertex index is not below the vertex count.
    StartOutOfRange { start: usize, vertex_count: usize },
    /// Complete k-ary trees need k >= 2.
    BranchingTooSmall(usize),
    /// Requested tree does not fit in addressable memory.
    TreeTooLarge,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::SelfLoop(v) => write!(f, "self-loop at vertex {}", v),
            GraphError::DuplicateEdge(u, v) => write!(f, "duplicate edge ({}, {})", u, v),
            GraphError::Disconnected => write!(f, "graph is not connected"),
            GraphError::StartOutOfRange {
                start,
                vertex_count,
            } => write!(
                f,
                "start vertex {} out of range for {} vertices",
                start, vertex_count
            ),
            GraphError::BranchingTooSmall(k) => {
                write!(f, "branching factor must be at least 2, got {}", k)
            }
            GraphError::TreeTooLarge => write!(f, "tree size overflows vertex indexing"),
        }
    }
}

impl core::error::Error for GraphError {}

impl Graph {
    /// Builds the complete k-ary tree with `spec.levels()` full levels.
    ///
    /// Vertices are numbered breadth-first with the root at index 0, so the
    /// children of vertex `v` are the contiguous range `k*v + 1 ..= k*v + k`
    /// and every level occupies a contiguous index range. The start vertex
    /// is the root and `level_of` is populated.
    pub fn complete_kary_tree(spec: TreeSpec) -> Result<Graph, GraphError> {
        let k = spec.branching();
        let total = spec.vertex_count()?;
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); total];
        let mut levels = vec![0usize; total];

        // Vertices 0..internal_count have children; the rest are leaves.
        let internal_count = (total - 1) / k;

        for v in 0..internal_count {
            for c in 1..=k {
                let child = k * v + c;
                adjacency[v].push(VertexId(child));
                adjacency[child].push(VertexId(v));
                levels[child] = levels[v] + 1;
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            adjacency,
            start: VertexId(0),
            levels: Some(levels),
        })
    }

    /// Builds a graph from an undirected edge list with dense vertex indices
    /// (vertex count is one past the largest index mentioned). An empty edge
    /// list with `start = 0` declares the single-vertex graph.
    pub fn from_edge_list(edges: &[(usize, usize)], start: usize) -> Result<Graph, GraphError> {
        if edges.is_empty() {
            if start != 0 {
                return Err(GraphError::StartOutOfRange {
                    start,
                    vertex_count: 1,
                });
            }
            return Ok(Graph {
                adjacency: vec![Vec::new()],
                start: VertexId(0),
                levels: None,
            });
        }

        let vertex_count = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap() + 1;
        if start >= vertex_count {
            return Err(GraphError::StartOutOfRange {
                start,
                vertex_count,
            });
        }
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adjacency[u].contains(&VertexId(v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            adjacency[u].push(VertexId(v));
            adjacency[v].push(VertexId(u));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph {
            adjacency,
            start: VertexId(start),
            levels: None,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    /// Same graph with a different start vertex.
    pub fn with_start(mut self, start: usize) -> Result<Graph, GraphError> {
        if start >= self.vertex_count() {
            return Err(GraphError::StartOutOfRange {
                start,
                vertex_count: self.vertex_count(),
            });
        }
        self.start = VertexId(start);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId)
    }

    /// All undirected edges as `(u, v)` pairs with `u < v`, in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &VertexId(v) in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Depth of `v` below the root; `None` unless the graph was generated as
    /// a tree. Ingested graphs never carry levels, even if they happen to be
    /// trees.
    pub fn level_of(&self, v: VertexId) -> Option<usize> {
        self.levels.as_ref().map(|l| l[v.0])
    }

    pub fn levels(&self) -> Option<&[usize]> {
        self.levels.as_deref()
    }

    /// Vertices at the given level, as a contiguous index range (trees only).
    pub fn level_range(&self, level: usize) -> Option<core::ops::Range<usize>> {
        let levels = self.levels.as_ref()?;
        let lo = levels.iter().position(|&l| l == level)?;
        let hi = levels.iter().rposition(|&l| l == level)?;
        Some(lo..hi + 1)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(VertexId(0));
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if !seen[u.0] {
                    seen[u.0] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }
}

/// Path graph 0 - 1 - ... - (m-1), started at `start`.
pub fn path(m: usize, start: usize) -> Result<Graph, GraphError> {
    if m == 1 {
        return Graph::from_edge_list(&[], start);
    }
    let edges: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edge_list(&edges, start)
}

/// Cycle graph on `m >= 3` vertices, started at `start`.
pub fn cycle(m: usize, start: usize) -> Result<Graph, GraphError> {
    let edges: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    Graph::from_edge_list(&edges, start)
}

/// Complete graph on `m >= 2` vertices, started at `start`.
pub fn complete(m: usize, start: usize) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    Graph::from_edge_list(&edges, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(k: usize, n: usize) -> Graph {
        Graph::complete_kary_tree(TreeSpec::new(k, n).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_tree_is_single_vertex() {
        let g = tree(2, 0);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.start(), VertexId(0));
        assert_eq!(g.levels(), Some(&[0][..]));
        assert_eq!(g.degree(VertexId(0)), 0);
    }

    #[test]
    fn level_one_binary_tree() {
        let g = tree(2, 1);
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.degree(VertexId(0)), 2);
        assert_eq!(g.degree(VertexId(1)), 1);
        assert_eq!(g.degree(VertexId(2)), 1);
        assert_eq!(g.neighbors(VertexId(0)), &[VertexId(1), VertexId(2)]);
        assert_eq!(g.levels(), Some(&[0, 1, 1][..]));
    }

    #[test]
    fn ternary_two_levels() {
        let g = tree(3, 2);
        assert_eq!(g.vertex_count(), 13); // (3^3 - 1) / 2
        assert_eq!(g.degree(VertexId(0)), 3);
        for v in 1..=3 {
            assert_eq!(g.degree(VertexId(v)), 4);
        }
        for v in 4..13 {
            assert_eq!(g.degree(VertexId(v)), 1);
            assert_eq!(g.level_of(VertexId(v)), Some(2));
        }
        assert_eq!(g.level_range(1), Some(1..4));
    }

    #[test]
    fn tree_level_counts_are_powers_of_k() {
        for k in 2..=4 {
            for n in 0..=4 {
                let g = tree(k, n);
                let deepest = g.level_range(n).unwrap();
                assert_eq!(deepest.len(), k.pow(n as u32));
            }
        }
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        for k in 2..=4 {
            for n in 0..=4 {
                let g = tree(k, n);
                let sum: usize = g.vertices().map(|v| g.degree(v)).sum();
                assert_eq!(sum, 2 * (g.vertex_count() - 1));
            }
        }
    }

    #[test]
    fn children_are_contiguous() {
        let g = tree(3, 3);
        for v in g.vertices() {
            let children: Vec<usize> = g
                .neighbors(v)
                .iter()
                .filter(|&&u| u > v)
                .map(|u| u.0)
                .collect();
            if !children.is_empty() {
                assert_eq!(children, (3 * v.0 + 1..=3 * v.0 + 3).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn from_edge_list_builds_figure_one_tree() {
        let g = Graph::from_edge_list(&[(0, 1), (0, 2)], 0).unwrap();
        let t = tree(2, 1);
        assert_eq!(g.adjacency, t.adjacency);
        assert_eq!(g.start(), t.start());
        assert_eq!(g.levels(), None); // ingested graphs carry no levels
    }

    #[test]
    fn from_edge_list_rejects_bad_input() {
        assert_eq!(
            Graph::from_edge_list(&[(0, 1), (2, 3)], 0),
            Err(GraphError::Disconnected)
        );
        assert_eq!(
            Graph::from_edge_list(&[(0, 0)], 0),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            Graph::from_edge_list(&[(0, 1), (1, 0)], 0),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert_eq!(
            Graph::from_edge_list(&[(0, 1)], 2),
            Err(GraphError::StartOutOfRange {
                start: 2,
                vertex_count: 2
            })
        );
    }

    #[test]
    fn single_vertex_from_empty_edges() {
        let g = Graph::from_edge_list(&[], 0).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.degree(VertexId(0)), 0);
        assert!(Graph::from_edge_list(&[], 1).is_err());
    }

    #[test]
    fn skipped_index_means_disconnected() {
        // Vertex 1 is never mentioned, so it exists isolated.
        assert_eq!(
            Graph::from_edge_list(&[(0, 2)], 0),
            Err(GraphError::Disconnected)
        );
    }

    #[test]
    fn edge_list_round_trip() {
        for k in 2..=3 {
            for n in 0..=3 {
                let g = tree(k, n);
                let rebuilt = Graph::from_edge_list(&g.edges(), g.start().0).unwrap();
                assert_eq!(rebuilt.adjacency, g.adjacency);
                assert_eq!(rebuilt.start(), g.start());
            }
        }
    }

    #[test]
    fn tree_spec_rejects_small_branching() {
        assert_eq!(TreeSpec::new(1, 3), Err(GraphError::BranchingTooSmall(1)));
        assert_eq!(TreeSpec::new(0, 0), Err(GraphError::BranchingTooSmall(0)));
    }

    #[test]
    fn generators() {
        let p = path(3, 0).unwrap();
        assert_eq!(
            p.vertices().map(|v| p.degree(v)).collect::<Vec<_>>(),
            vec![1, 2, 1]
        );
        let c = cycle(5, 2).unwrap();
        assert!(c.vertices().all(|v| c.degree(v) == 2));
        assert_eq!(c.start(), VertexId(2));
        let k = complete(4, 0).unwrap();
        assert!(k.vertices().all(|v| k.degree(v) == 3));
    }
}

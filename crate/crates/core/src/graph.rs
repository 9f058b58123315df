//! Immutable undirected simple graph in compressed (CSR) adjacency form.

use std::fmt;

use thiserror::Error;

/// Vertex identifier, 0-based.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("graph must have at least one vertex")]
    Empty,
}

/// Simple undirected graph. Neighbour lists are sorted ascending and
/// symmetric, so two graphs with the same edge set compare equal.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    duplicates: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices. Repeated pairs (in either orientation)
    /// collapse to one edge; the number collapsed is kept in
    /// [`Graph::duplicate_edges`].
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            pairs.push((a as u32, b as u32));
        }
        let raw = pairs.len();
        pairs.sort_unstable();
        pairs.dedup();
        let duplicates = raw - pairs.len();

        let mut degree = vec![0usize; n];
        for &(a, b) in &pairs {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; 2 * pairs.len()];
        // Pairs are sorted by (a, b); filling both directions in this order
        // leaves every list sorted: a vertex's smaller neighbours arrive as
        // `b` entries (ascending a) before its larger ones as `a` entries.
        for &(a, b) in &pairs {
            targets[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for &(a, b) in &pairs {
            targets[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
        }
        Ok(Self {
            offsets,
            targets,
            duplicates,
        })
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, std::iter::empty())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbours(&self, v: Vertex) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Hint that `neighbours(v)` will be scanned soon. A no-op off x86-64.
    #[inline]
    pub fn prefetch_neighbours(&self, v: Vertex) {
        #[cfg(target_arch = "x86_64")]
        if let Some(t) = self.targets.get(self.offsets[v]) {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            // SAFETY: prefetching is a hint with no observable effect; SSE is
            // part of the x86-64 baseline.
            unsafe { _mm_prefetch::<_MM_HINT_T0>((t as *const u32).cast()) };
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = v;
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.neighbours(u).binary_search(&(v as u32)).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbours(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Number of input pairs dropped as duplicates during construction.
    pub fn duplicate_edges(&self) -> usize {
        self.duplicates
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.m())
            .finish()
    }
}

//! Colours, partial colourings (precolourings) and total colourings.

use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// A colour. Stored 0-based; [`Colour::label`] gives the 1-based id used in
/// files and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Colour(u16);

impl Colour {
    pub const MAX_COLOURS: usize = u16::MAX as usize;

    #[inline]
    pub fn from_index(index: usize) -> Self {
        debug_assert!(index < Self::MAX_COLOURS);
        Colour(index as u16)
    }

    /// From a 1-based label. Returns `None` for 0.
    pub fn from_label(label: usize) -> Option<Self> {
        (1..=Self::MAX_COLOURS)
            .contains(&label)
            .then(|| Colour((label - 1) as u16))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn label(self) -> usize {
        self.0 as usize + 1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColouringError {
    #[error("colour {label} on vertex {vertex} is outside 1..={k}")]
    ColourOutOfRange {
        vertex: Vertex,
        label: usize,
        k: usize,
    },
    #[error("colouring covers {got} vertices, graph has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least one colour")]
    NoColours,
    #[error("vertex {0} disagrees with the precolouring")]
    PrecolourViolated(Vertex),
    #[error("vertex {0} is isolated")]
    IsolatedVertex(Vertex),
}

/// Per-vertex colour or free. The non-free vertices form the precoloured set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialColouring {
    k: usize,
    assign: Vec<Option<Colour>>,
}

impl PartialColouring {
    pub fn new(k: usize, assign: Vec<Option<Colour>>) -> Result<Self, ColouringError> {
        if k == 0 {
            return Err(ColouringError::NoColours);
        }
        for (vertex, c) in assign.iter().enumerate() {
            if let Some(c) = c {
                if c.index() >= k {
                    return Err(ColouringError::ColourOutOfRange {
                        vertex,
                        label: c.label(),
                        k,
                    });
                }
            }
        }
        Ok(Self { k, assign })
    }

    /// No vertex precoloured.
    pub fn all_free(n: usize, k: usize) -> Result<Self, ColouringError> {
        Self::new(k, vec![None; n])
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.assign.len()
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> Option<Colour> {
        self.assign[v]
    }

    #[inline]
    pub fn is_free(&self, v: Vertex) -> bool {
        self.assign[v].is_none()
    }

    pub fn entries(&self) -> &[Option<Colour>] {
        &self.assign
    }

    pub fn free_vertices(&self) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| self.is_free(v)).collect()
    }

    pub fn precoloured(&self) -> impl Iterator<Item = (Vertex, Colour)> + '_ {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|c| (v, c)))
    }

    pub fn free_count(&self) -> usize {
        self.assign.iter().filter(|c| c.is_none()).count()
    }

    /// Total colouring agreeing with this one on precoloured vertices and
    /// giving `fill` to every free vertex.
    pub fn complete_with(&self, fill: Colour) -> Colouring {
        Colouring {
            k: self.k,
            assign: self.assign.iter().map(|c| c.unwrap_or(fill)).collect(),
        }
    }

    /// Completion with a uniformly random colour on every free vertex.
    pub fn complete_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Colouring {
        let k = self.k;
        Colouring {
            k,
            assign: self
                .assign
                .iter()
                .map(|c| c.unwrap_or_else(|| Colour::from_index(rng.random_range(0..k))))
                .collect(),
        }
    }
}

/// Total colouring: every vertex carries a colour in `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Colouring {
    k: usize,
    assign: Vec<Colour>,
}

impl Colouring {
    pub fn new(k: usize, assign: Vec<Colour>) -> Result<Self, ColouringError> {
        if k == 0 {
            return Err(ColouringError::NoColours);
        }
        if let Some((vertex, c)) = assign.iter().enumerate().find(|(_, c)| c.index() >= k) {
            return Err(ColouringError::ColourOutOfRange {
                vertex,
                label: c.label(),
                k,
            });
        }
        Ok(Self { k, assign })
    }

    /// From 1-based labels.
    pub fn from_labels(k: usize, labels: &[usize]) -> Result<Self, ColouringError> {
        let mut assign = Vec::with_capacity(labels.len());
        for (vertex, &label) in labels.iter().enumerate() {
            match Colour::from_label(label) {
                Some(c) => assign.push(c),
                None => return Err(ColouringError::ColourOutOfRange { vertex, label, k }),
            }
        }
        Self::new(k, assign)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.assign.len()
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> Colour {
        self.assign[v]
    }

    #[inline]
    pub fn set(&mut self, v: Vertex, c: Colour) {
        debug_assert!(c.index() < self.k);
        self.assign[v] = c;
    }

    pub fn as_slice(&self) -> &[Colour] {
        &self.assign
    }

    pub fn labels(&self) -> Vec<usize> {
        self.assign.iter().map(|c| c.label()).collect()
    }

    /// Whether this colouring agrees with `pc` on every precoloured vertex.
    pub fn extends(&self, pc: &PartialColouring) -> bool {
        self.n() == pc.n() && pc.precoloured().all(|(v, c)| self.assign[v] == c)
    }

    /// Apply a colour relabelling `perm[old_index] = new_index`.
    pub fn relabel(&self, perm: &[usize]) -> Colouring {
        Colouring {
            k: self.k,
            assign: self
                .assign
                .iter()
                .map(|c| Colour::from_index(perm[c.index()]))
                .collect(),
        }
    }
}

/// Reusable colour-count buffer for plurality queries. Clearing costs
/// O(colours touched), not O(k).
#[derive(Clone, Debug)]
pub struct PluralityScratch {
    counts: Vec<u32>,
    touched: Vec<u16>,
}

impl PluralityScratch {
    pub fn new(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            touched: Vec::with_capacity(k),
        }
    }

    /// Most frequent colour among the neighbours of `v` for which `colour_of`
    /// returns a colour. Ties are broken uniformly at random. `None` when no
    /// neighbour is coloured.
    pub fn plurality<F, R>(
        &mut self,
        g: &Graph,
        v: Vertex,
        mut colour_of: F,
        rng: &mut R,
    ) -> Option<Colour>
    where
        F: FnMut(Vertex) -> Option<Colour>,
        R: Rng + ?Sized,
    {
        for &u in g.neighbours(v) {
            if let Some(c) = colour_of(u as usize) {
                let slot = &mut self.counts[c.index()];
                if *slot == 0 {
                    self.touched.push(c.0);
                }
                *slot += 1;
            }
        }
        let mut best = None;
        let mut best_count = 0u32;
        let mut ties = 0u32;
        for &c in &self.touched {
            let count = self.counts[c as usize];
            if count > best_count {
                best_count = count;
                best = Some(Colour(c));
                ties = 1;
            } else if count == best_count {
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = Some(Colour(c));
                }
            }
        }
        for &c in &self.touched {
            self.counts[c as usize] = 0;
        }
        self.touched.clear();
        best
    }
}

/// Plurality colour of `N(v)` under a total colouring.
pub fn plurality_colour<R: Rng + ?Sized>(
    g: &Graph,
    v: Vertex,
    sigma: &Colouring,
    rng: &mut R,
) -> Result<Colour, ColouringError> {
    let mut scratch = PluralityScratch::new(sigma.k());
    scratch
        .plurality(g, v, |u| Some(sigma.get(u)), rng)
        .ok_or(ColouringError::IsolatedVertex(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn strict_majority_wins() {
        let g = star(3);
        let sigma = Colouring::from_labels(2, &[2, 1, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(
                plurality_colour(&g, 0, &sigma, &mut rng).unwrap().label(),
                1
            );
        }
    }

    #[test]
    fn singleton_neighbourhood() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let sigma = Colouring::from_labels(5, &[1, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(
            plurality_colour(&g, 0, &sigma, &mut rng).unwrap().label(),
            4
        );
    }

    #[test]
    fn isolated_vertex_is_refused() {
        let g = Graph::empty(2).unwrap();
        let sigma = Colouring::from_labels(2, &[1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            plurality_colour(&g, 1, &sigma, &mut rng),
            Err(ColouringError::IsolatedVertex(1))
        );
    }

    #[test]
    fn two_way_tie_is_fair() {
        // Binomial(10_000, 0.5): sd = 50, 3σ band = 150.
        let g = star(2);
        let sigma = Colouring::from_labels(2, &[1, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 10_000;
        let ones = (0..draws)
            .filter(|_| plurality_colour(&g, 0, &sigma, &mut rng).unwrap().label() == 1)
            .count();
        assert!((ones as i64 - 5_000).abs() <= 150, "ones = {ones}");
    }

    #[test]
    fn three_way_tie_is_fair() {
        let g = star(3);
        let sigma = Colouring::from_labels(3, &[1, 1, 2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hits = [0usize; 3];
        for _ in 0..9_000 {
            hits[plurality_colour(&g, 0, &sigma, &mut rng).unwrap().index()] += 1;
        }
        // p = 1/3, sd ≈ 44.7
        for h in hits {
            assert!((h as i64 - 3_000).abs() <= 135, "{hits:?}");
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = star(4);
        let sigma = Colouring::from_labels(4, &[1, 1, 2, 3, 4]).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| plurality_colour(&g, 0, &sigma, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn plurality_is_present_in_neighbourhood() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]).unwrap();
        let sigma = Colouring::from_labels(6, &[6, 5, 4, 3, 2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for v in 0..6 {
            let c = plurality_colour(&g, v, &sigma, &mut rng).unwrap();
            assert!(g.neighbours(v).iter().any(|&u| sigma.get(u as usize) == c));
        }
    }

    #[test]
    fn partial_colouring_validation() {
        let bad = PartialColouring::new(2, vec![None, Colour::from_label(3)]);
        assert!(matches!(
            bad,
            Err(ColouringError::ColourOutOfRange { vertex: 1, .. })
        ));
        let pc = PartialColouring::new(3, vec![None, Colour::from_label(3), None]).unwrap();
        assert_eq!(pc.free_vertices(), [0, 2]);
        let c = pc.complete_with(Colour::from_index(0));
        assert_eq!(c.labels(), [1, 3, 1]);
        assert!(c.extends(&pc));
    }
}

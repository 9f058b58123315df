//! Fast stochastic heuristics: LMC construction, single-pass local search
//! (LS) and repeated local search (RLS).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::colouring::{Colour, Colouring, PartialColouring, PluralityScratch};
use crate::graph::{Graph, Vertex};
use crate::happiness::{unhappy_free_vertices, HappinessTracker, Thresholds};

pub const DEFAULT_MAX_PASSES: usize = 50;

const PREFETCH_DISTANCE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicOutcome {
    pub colouring: Colouring,
    pub passes: usize,
    pub recoloured: usize,
}

/// Set with O(1) insert, remove and uniform sampling.
struct SampleSet {
    items: Vec<Vertex>,
    pos: Vec<usize>,
}

impl SampleSet {
    const ABSENT: usize = usize::MAX;

    fn new(n: usize) -> Self {
        Self {
            items: Vec::new(),
            pos: vec![Self::ABSENT; n],
        }
    }

    fn contains(&self, v: Vertex) -> bool {
        self.pos[v] != Self::ABSENT
    }

    fn insert(&mut self, v: Vertex) {
        if !self.contains(v) {
            self.pos[v] = self.items.len();
            self.items.push(v);
        }
    }

    fn remove(&mut self, v: Vertex) {
        let i = self.pos[v];
        if i == Self::ABSENT {
            return;
        }
        let last = self.items.pop().unwrap();
        if last != v {
            self.items[i] = last;
            self.pos[last] = i;
        }
        self.pos[v] = Self::ABSENT;
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vertex> {
        (!self.items.is_empty()).then(|| self.items[rng.random_range(0..self.items.len())])
    }
}

/// Local Maximal Colouring. Repeatedly takes a uniformly random uncoloured
/// vertex adjacent to the coloured set and gives it the plurality colour of
/// its coloured neighbours. When no uncoloured vertex touches the coloured
/// set, a random uncoloured vertex is seeded with a random colour.
pub fn lmc<R: Rng + ?Sized>(g: &Graph, pc: &PartialColouring, rng: &mut R) -> Colouring {
    let n = g.n();
    let k = pc.k();
    let mut colour: Vec<Option<Colour>> = pc.entries().to_vec();
    let mut uncoloured = SampleSet::new(n);
    let mut frontier = SampleSet::new(n);
    for v in pc.free_vertices() {
        uncoloured.insert(v);
    }
    for (v, _) in pc.precoloured() {
        for &u in g.neighbours(v) {
            if colour[u as usize].is_none() {
                frontier.insert(u as usize);
            }
        }
    }

    let mut scratch = PluralityScratch::new(k);
    loop {
        let (v, c) = if let Some(v) = frontier.pick(rng) {
            let c = scratch
                .plurality(g, v, |u| colour[u], rng)
                .expect("frontier vertices have a coloured neighbour");
            (v, c)
        } else if let Some(seed) = uncoloured.pick(rng) {
            (seed, Colour::from_index(rng.random_range(0..k)))
        } else {
            break;
        };
        colour[v] = Some(c);
        uncoloured.remove(v);
        frontier.remove(v);
        for &u in g.neighbours(v) {
            if colour[u as usize].is_none() {
                frontier.insert(u as usize);
            }
        }
    }
    Colouring::new(k, colour.into_iter().map(|c| c.unwrap()).collect())
        .expect("LMC assigns colours below k")
}

/// Reusable LS/RLS engine bound to one instance and ρ.
#[derive(Clone, Debug)]
pub struct LocalSearch<'a> {
    graph: &'a Graph,
    precolouring: &'a PartialColouring,
    thresholds: Thresholds,
}

impl<'a> LocalSearch<'a> {
    pub fn new(graph: &'a Graph, precolouring: &'a PartialColouring, rho: f64) -> Self {
        Self::with_thresholds(graph, precolouring, Thresholds::new(graph, rho))
    }

    pub fn with_thresholds(
        graph: &'a Graph,
        precolouring: &'a PartialColouring,
        thresholds: Thresholds,
    ) -> Self {
        Self {
            graph,
            precolouring,
            thresholds,
        }
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    /// One LS pass in place. The unhappy free set is fixed on entry and
    /// visited in random order; each vertex moves to the plurality colour
    /// of its neighbourhood under the working colouring when that differs
    /// from its own. Returns the number of vertices recoloured.
    pub fn pass<R: Rng + ?Sized>(
        &self,
        sigma: &mut Colouring,
        rng: &mut R,
        scratch: &mut PluralityScratch,
    ) -> usize {
        let g = self.graph;
        let mut unhappy = unhappy_free_vertices(g, sigma, self.precolouring, &self.thresholds);
        unhappy.shuffle(rng);
        let mut moved = 0;
        for (i, &v) in unhappy.iter().enumerate() {
            // The order is random, so each list is a likely cache miss.
            if let Some(&ahead) = unhappy.get(i + PREFETCH_DISTANCE) {
                g.prefetch_neighbours(ahead);
            }
            // Unhappy implies a positive threshold, hence deg(v) >= 1.
            let q = scratch
                .plurality(g, v, |u| Some(sigma.get(u)), rng)
                .expect("unhappy vertex has neighbours");
            if q != sigma.get(v) {
                sigma.set(v, q);
                moved += 1;
            }
        }
        moved
    }

    /// RLS: LS passes with the unhappy set refilled before each pass. Stops
    /// when that set is empty, a pass recolours nothing, or after
    /// `max_passes` passes.
    pub fn repeat<R: Rng + ?Sized>(
        &self,
        mut sigma: Colouring,
        rng: &mut R,
        max_passes: usize,
    ) -> HeuristicOutcome {
        let g = self.graph;
        let t = &self.thresholds;
        let mut tracker = HappinessTracker::new(g, &sigma, t);
        let mut scratch = PluralityScratch::new(sigma.k());
        let mut passes = 0;
        let mut recoloured = 0;
        let mut unhappy = Vec::new();
        while passes < max_passes {
            unhappy.clear();
            unhappy.extend(
                (0..g.n()).filter(|&v| self.precolouring.is_free(v) && !tracker.is_happy(v)),
            );
            if unhappy.is_empty() {
                break;
            }
            unhappy.shuffle(rng);
            let mut moved = 0;
            for &v in &unhappy {
                let q = scratch
                    .plurality(g, v, |u| Some(sigma.get(u)), rng)
                    .expect("unhappy vertex has neighbours");
                if q != sigma.get(v) {
                    tracker.recolour(g, &mut sigma, t, v, q);
                    moved += 1;
                }
            }
            passes += 1;
            recoloured += moved;
            if moved == 0 {
                break;
            }
        }
        HeuristicOutcome {
            colouring: sigma,
            passes,
            recoloured,
        }
    }
}

/// Single LS pass over a copy of `sigma`.
pub fn ls<R: Rng + ?Sized>(
    g: &Graph,
    sigma: &Colouring,
    pc: &PartialColouring,
    rho: f64,
    rng: &mut R,
) -> Colouring {
    let mut out = sigma.clone();
    let mut scratch = PluralityScratch::new(sigma.k());
    LocalSearch::new(g, pc, rho).pass(&mut out, rng, &mut scratch);
    out
}

pub fn rls<R: Rng + ?Sized>(
    g: &Graph,
    sigma: &Colouring,
    pc: &PartialColouring,
    rho: f64,
    rng: &mut R,
    max_passes: usize,
) -> HeuristicOutcome {
    LocalSearch::new(g, pc, rho).repeat(sigma.clone(), rng, max_passes)
}

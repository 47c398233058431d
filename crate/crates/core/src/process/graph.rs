use serde::Serialize;

use super::{merge, Distribution, GraphInstance, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraphProcessKind {
    Recolour,
    VertexCover,
}

/// The two graph algorithms have different state types, so construction
/// returns one of two concrete processes.
#[derive(Debug, Clone)]
pub enum GraphProcess {
    Recolour(RecolourProcess),
    VertexCover(VertexCoverProcess),
}

pub fn make_graph_process(kind: GraphProcessKind, graph: GraphInstance) -> Result<GraphProcess> {
    Ok(match kind {
        GraphProcessKind::Recolour => GraphProcess::Recolour(RecolourProcess::new(graph)?),
        GraphProcessKind::VertexCover => GraphProcess::VertexCover(VertexCoverProcess::new(graph)?),
    })
}

/// RECOLOUR: while a monochromatic triangle exists, pick one uniformly among
/// all of them and flip a uniformly chosen vertex of it.
///
/// The value is the agreement count `Y` with the planted coloring on the
/// vertices of classes 0 and 1. The target is "no monochromatic triangle",
/// which is reached no later than `Y ∈ {0, |U|}`.
#[derive(Debug, Clone)]
pub struct RecolourProcess {
    graph: GraphInstance,
    triangles: Vec<[usize; 3]>,
    start: Option<Vec<bool>>,
}

impl RecolourProcess {
    pub fn new(graph: GraphInstance) -> Result<Self> {
        if graph.coloring().is_none() {
            return Err(param("recolour needs a graph with a planted 3-coloring"));
        }
        let adj = graph.adjacency();
        let n = graph.n();
        let mut linked = vec![vec![false; n]; n];
        for &(u, v) in graph.edges() {
            linked[u][v] = true;
            linked[v][u] = true;
        }
        let mut triangles = Vec::new();
        for u in 0..n {
            for &v in adj[u].iter().filter(|&&v| v > u) {
                for &w in adj[v].iter().filter(|&&w| w > v) {
                    if linked[u][w] {
                        triangles.push([u, v, w]);
                    }
                }
            }
        }
        Ok(Self {
            graph,
            triangles,
            start: None,
        })
    }

    pub fn with_start(mut self, coloring: Vec<bool>) -> Result<Self> {
        if coloring.len() != self.graph.n() {
            return Err(param("start coloring has the wrong length"));
        }
        self.start = Some(coloring);
        Ok(self)
    }

    pub fn graph(&self) -> &GraphInstance {
        &self.graph
    }

    /// |U|, the number of vertices in the two counted planted classes.
    pub fn u_size(&self) -> usize {
        self.chi().iter().filter(|&&c| c < 2).count()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    fn chi(&self) -> &[u8] {
        self.graph.coloring().expect("checked at construction")
    }

    fn monochromatic<'a>(&'a self, x: &'a [bool]) -> impl Iterator<Item = &'a [usize; 3]> + 'a {
        self.triangles.iter().filter(move |t| x[t[0]] == x[t[1]] && x[t[1]] == x[t[2]])
    }
}

impl Process for RecolourProcess {
    type State = Vec<bool>;

    fn initial(&self, rng: &mut StepRng) -> Vec<bool> {
        match &self.start {
            Some(x) => x.clone(),
            None => (0..self.graph.n()).map(|_| rng.bernoulli(0.5)).collect(),
        }
    }

    fn step(&self, state: &Vec<bool>, rng: &mut StepRng) -> Vec<bool> {
        let bad: Vec<&[usize; 3]> = self.monochromatic(state).collect();
        if bad.is_empty() {
            return state.clone();
        }
        let t = bad[rng.index(bad.len())];
        let v = t[rng.index(3)];
        let mut next = state.clone();
        next[v] = !next[v];
        next
    }

    fn value(&self, state: &Vec<bool>) -> f64 {
        self.chi()
            .iter()
            .zip(state)
            .filter(|&(&c, &x)| c < 2 && (c == 1) == x)
            .count() as f64
    }

    fn is_target(&self, state: &Vec<bool>) -> bool {
        self.monochromatic(state).next().is_none()
    }

    fn kernel(&self, state: &Vec<bool>) -> Option<Distribution<Vec<bool>>> {
        let bad: Vec<&[usize; 3]> = self.monochromatic(state).collect();
        if bad.is_empty() {
            return Some(vec![(state.clone(), 1.0)]);
        }
        let p = 1.0 / (3.0 * bad.len() as f64);
        Some(merge(bad.iter().flat_map(|t| {
            t.iter().map(move |&v| {
                let mut next = state.clone();
                next[v] = !next[v];
                (next, p)
            })
        })))
    }

    fn contains(&self, state: &Vec<bool>) -> bool {
        state.len() == self.graph.n()
    }

    fn describe(&self) -> String {
        format!("recolour(n={}, triangles={})", self.graph.n(), self.triangles.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverState {
    pub chosen: Vec<bool>,
    /// Total vertices chosen so far (repeats impossible, so also |D_t|).
    pub count: usize,
}

/// Randomised vertex-cover 2-approximation: pick an uncovered edge, add a
/// uniformly chosen endpoint. Value is `|C \ D_t|` against the planted
/// minimum cover, 0 once `D_t` covers.
#[derive(Debug, Clone)]
pub struct VertexCoverProcess {
    graph: GraphInstance,
    in_cover: Vec<bool>,
}

impl VertexCoverProcess {
    pub fn new(graph: GraphInstance) -> Result<Self> {
        let cover = graph
            .cover()
            .ok_or_else(|| param("vertex cover process needs a planted minimum cover"))?;
        let mut in_cover = vec![false; graph.n()];
        cover.iter().for_each(|&v| in_cover[v] = true);
        Ok(Self { graph, in_cover })
    }

    pub fn graph(&self) -> &GraphInstance {
        &self.graph
    }

    pub fn cover_size(&self) -> usize {
        self.in_cover.iter().filter(|&&b| b).count()
    }

    fn uncovered<'a>(&'a self, s: &'a CoverState) -> impl Iterator<Item = &'a (usize, usize)> + 'a {
        self.graph.edges().iter().filter(move |&&(u, v)| !s.chosen[u] && !s.chosen[v])
    }

    fn add(s: &CoverState, v: usize) -> CoverState {
        let mut next = s.clone();
        next.chosen[v] = true;
        next.count += 1;
        next
    }
}

impl Process for VertexCoverProcess {
    type State = CoverState;

    fn initial(&self, _rng: &mut StepRng) -> CoverState {
        CoverState {
            chosen: vec![false; self.graph.n()],
            count: 0,
        }
    }

    fn step(&self, state: &CoverState, rng: &mut StepRng) -> CoverState {
        let open: Vec<&(usize, usize)> = self.uncovered(state).collect();
        if open.is_empty() {
            return state.clone();
        }
        let &(u, v) = open[rng.index(open.len())];
        Self::add(state, if rng.bernoulli(0.5) { u } else { v })
    }

    fn value(&self, state: &CoverState) -> f64 {
        if self.is_target(state) {
            return 0.0;
        }
        self.in_cover.iter().zip(&state.chosen).filter(|&(&c, &d)| c && !d).count() as f64
    }

    fn is_target(&self, state: &CoverState) -> bool {
        self.uncovered(state).next().is_none()
    }

    fn kernel(&self, state: &CoverState) -> Option<Distribution<CoverState>> {
        let open: Vec<&(usize, usize)> = self.uncovered(state).collect();
        if open.is_empty() {
            return Some(vec![(state.clone(), 1.0)]);
        }
        let p = 0.5 / open.len() as f64;
        Some(merge(open.iter().flat_map(|&&(u, v)| [(Self::add(state, u), p), (Self::add(state, v), p)])))
    }

    fn initial_support(&self) -> Option<Distribution<CoverState>> {
        Some(vec![(self.initial(&mut StepRng::new(0, 0, 0)), 1.0)])
    }

    fn contains(&self, state: &CoverState) -> bool {
        state.chosen.len() == self.graph.n()
    }

    fn describe(&self) -> String {
        format!("vertex_cover(n={}, |C|={})", self.graph.n(), self.cover_size())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::random_3colorable_graph;

    #[test]
    fn triangle_free_start_is_target() {
        // a 4-cycle has no triangle
        let g = GraphInstance::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)])
            .unwrap()
            .with_coloring(vec![0, 1, 0, 1])
            .unwrap();
        let p = RecolourProcess::new(g).unwrap();
        let mut rng = StepRng::new(1, 0, 0);
        assert!(p.is_target(&p.initial(&mut rng)));
    }

    #[test]
    fn recolour_moves_up_and_down_with_one_third() {
        let g = random_3colorable_graph(12, 0.7, 3).unwrap();
        let p = RecolourProcess::new(g).unwrap();
        let u = p.u_size() as f64;
        let mut checked = 0;
        for seed in 0..50 {
            let x = p.initial(&mut StepRng::new(seed, 0, 0));
            let y = p.value(&x);
            if p.is_target(&x) || y == 0.0 || y == u {
                continue;
            }
            let row = p.kernel(&x).unwrap();
            let up: f64 = row.iter().filter(|(s, _)| p.value(s) == y + 1.0).map(|e| e.1).sum();
            let down: f64 = row.iter().filter(|(s, _)| p.value(s) == y - 1.0).map(|e| e.1).sum();
            assert!((up - 1.0 / 3.0).abs() < 1e-12 && (down - 1.0 / 3.0).abs() < 1e-12);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn recolour_requires_coloring() {
        let g = GraphInstance::new(3, vec![(0, 1)]).unwrap();
        assert!(make_graph_process(GraphProcessKind::Recolour, g).is_err());
    }

    #[test]
    fn vertex_cover_hits_cover_with_probability_half() {
        let g = random_3colorable_graph(9, 0.5, 1).unwrap().with_minimum_cover();
        let p = VertexCoverProcess::new(g).unwrap();
        let s = p.initial(&mut StepRng::new(0, 0, 0));
        let row = p.kernel(&s).unwrap();
        let into_c: f64 = row
            .iter()
            .filter(|(t, _)| p.value(t) < p.value(&s) || p.is_target(t))
            .map(|e| e.1)
            .sum();
        assert!(into_c >= 0.5 - 1e-12);
    }
}

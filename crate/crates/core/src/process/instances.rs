//! Graph and 2-CNF instances with planted witnesses, plus a plain-text format.
//!
//! Graph format: a header line `n m`, then `m` lines `u v` (0-based vertices),
//! then optionally `coloring c_0 ... c_{n-1}` and/or `cover v ...`.
//! CNF format is DIMACS (`p cnf n m`, clauses terminated by `0`, 1-based
//! signed variables); the planted assignment rides in a `c planted ...` comment.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{param, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    coloring: Option<Vec<u8>>,
    cover: Option<Vec<usize>>,
}

impl GraphInstance {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(param(format!("edge ({u}, {v}) references a vertex outside 0..{n}")));
            }
            if u == v {
                return Err(param(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Self {
            n,
            edges,
            coloring: None,
            cover: None,
        })
    }

    /// Attach a planted proper 3-coloring.
    pub fn with_coloring(mut self, chi: Vec<u8>) -> Result<Self> {
        if chi.len() != self.n || chi.iter().any(|&c| c > 2) {
            return Err(param("coloring needs one class in {0, 1, 2} per vertex"));
        }
        if let Some(&(u, v)) = self.edges.iter().find(|&&(u, v)| chi[u] == chi[v]) {
            return Err(param(format!("planted coloring is not proper on edge ({u}, {v})")));
        }
        self.coloring = Some(chi);
        Ok(self)
    }

    /// Attach a vertex cover (the caller vouches for minimality).
    pub fn with_cover(mut self, mut cover: Vec<usize>) -> Result<Self> {
        cover.sort_unstable();
        cover.dedup();
        if cover.iter().any(|&v| v >= self.n) {
            return Err(param("cover vertex out of range"));
        }
        let mut inside = vec![false; self.n];
        cover.iter().for_each(|&v| inside[v] = true);
        if let Some(&(u, v)) = self.edges.iter().find(|&&(u, v)| !inside[u] && !inside[v]) {
            return Err(param(format!("edge ({u}, {v}) is not covered")));
        }
        self.cover = Some(cover);
        Ok(self)
    }

    /// Compute and attach an exact minimum vertex cover (branch and bound).
    pub fn with_minimum_cover(self) -> Self {
        let cover = minimum_vertex_cover(self.n, &self.edges);
        self.with_cover(cover).expect("solver returns a cover")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coloring(&self) -> Option<&[u8]> {
        self.coloring.as_deref()
    }

    pub fn cover(&self) -> Option<&[usize]> {
        self.cover.as_deref()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        if let Some(chi) = &self.coloring {
            let _ = writeln!(out, "coloring {}", join(chi));
        }
        if let Some(c) = &self.cover {
            let _ = writeln!(out, "cover {}", join(c));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| param("empty graph file"))?;
        let [n, m] = parse_numbers::<usize>(header)?[..] else {
            return Err(param("graph header must be `n m`"));
        };
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| param("fewer edges than the header announces"))?;
            let [u, v] = parse_numbers::<usize>(line)?[..] else {
                return Err(param(format!("bad edge line `{line}`")));
            };
            edges.push((u, v));
        }
        let mut g = GraphInstance::new(n, edges)?;
        for line in lines {
            if let Some(rest) = line.strip_prefix("coloring") {
                g = g.with_coloring(parse_numbers(rest)?)?;
            } else if let Some(rest) = line.strip_prefix("cover") {
                g = g.with_cover(parse_numbers(rest)?)?;
            } else {
                return Err(param(format!("unexpected line `{line}`")));
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfInstance {
    n: usize,
    clauses: Vec<[Literal; 2]>,
    planted: Vec<bool>,
}

impl CnfInstance {
    /// Clauses may repeat a literal (`x ∨ x`) but not pair it with its negation.
    pub fn new(n: usize, clauses: Vec<[Literal; 2]>, planted: Vec<bool>) -> Result<Self> {
        if planted.len() != n {
            return Err(param("planted assignment must have one value per variable"));
        }
        for (i, [a, b]) in clauses.iter().enumerate() {
            if a.var >= n || b.var >= n {
                return Err(param(format!("clause {i} references a variable outside 0..{n}")));
            }
            if a.var == b.var && a.positive != b.positive {
                return Err(param(format!("clause {i} is a tautology")));
            }
            if !a.holds(&planted) && !b.holds(&planted) {
                return Err(param(format!("planted assignment violates clause {i}")));
            }
        }
        Ok(Self { n, clauses, planted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[Literal; 2]] {
        &self.clauses
    }

    pub fn planted(&self) -> &[bool] {
        &self.planted
    }

    pub fn satisfied_by(&self, x: &[bool]) -> bool {
        self.clauses.iter().all(|[a, b]| a.holds(x) || b.holds(x))
    }

    pub fn to_dimacs(&self) -> String {
        let signed = |l: &Literal| {
            let v = l.var as i64 + 1;
            if l.positive { v } else { -v }
        };
        let mut out = String::new();
        let planted: Vec<i64> = self
            .planted
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { i as i64 + 1 } else { -(i as i64 + 1) })
            .collect();
        let _ = writeln!(out, "c planted {}", join(&planted));
        let _ = writeln!(out, "p cnf {} {}", self.n, self.clauses.len());
        for [a, b] in &self.clauses {
            let _ = writeln!(out, "{} {} 0", signed(a), signed(b));
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut header = None;
        let mut planted = None;
        let mut clauses = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("c planted") {
                planted = Some(parse_numbers::<i64>(rest)?);
            } else if line.starts_with('c') {
                continue;
            } else if let Some(rest) = line.strip_prefix("p cnf") {
                let [n, m] = parse_numbers::<usize>(rest)?[..] else {
                    return Err(param("header must be `p cnf n m`"));
                };
                header = Some((n, m));
            } else {
                let nums = parse_numbers::<i64>(line)?;
                let [a, b, 0] = nums[..] else {
                    return Err(param(format!("clause line `{line}` must hold two literals and 0")));
                };
                clauses.push([literal(a)?, literal(b)?]);
            }
        }
        let (n, m) = header.ok_or_else(|| param("missing `p cnf` header"))?;
        if clauses.len() != m {
            return Err(param(format!("header announces {m} clauses, found {}", clauses.len())));
        }
        let planted = planted.ok_or_else(|| param("missing `c planted` witness line"))?;
        let mut a = vec![false; n];
        for lit in planted {
            let l = literal(lit)?;
            *a.get_mut(l.var).ok_or_else(|| param("planted literal out of range"))? = l.positive;
        }
        Self::new(n, clauses, a)
    }
}

fn literal(x: i64) -> Result<Literal> {
    if x == 0 {
        return Err(param("literal 0 is reserved as the clause terminator"));
    }
    Ok(Literal {
        var: x.unsigned_abs() as usize - 1,
        positive: x > 0,
    })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| param(format!("cannot parse `{t}` as a number"))))
        .collect()
}

/// Vertices split round-robin into three classes; only inter-class edges are
/// sampled, each independently with `edge_probability`.
pub fn random_3colorable_graph(n: usize, edge_probability: f64, seed: u64) -> Result<GraphInstance> {
    if n < 3 {
        return Err(param("a planted 3-coloring needs n >= 3"));
    }
    check_probability(edge_probability)?;
    let chi: Vec<u8> = (0..n).map(|v| (v % 3) as u8).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if chi[u] != chi[v] && rng.random_bool(edge_probability) {
                edges.push((u, v));
            }
        }
    }
    GraphInstance::new(n, edges)?.with_coloring(chi)
}

/// Erdős–Rényi G(n, p).
pub fn random_graph(n: usize, edge_probability: f64, seed: u64) -> Result<GraphInstance> {
    check_probability(edge_probability)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_probability) {
                edges.push((u, v));
            }
        }
    }
    GraphInstance::new(n, edges)
}

/// Uniform planted assignment; each clause picks two distinct variables and
/// random signs, then one literal is negated if the clause would be violated.
pub fn planted_2sat(n: usize, m: usize, seed: u64) -> Result<CnfInstance> {
    if n < 2 || m < 1 {
        return Err(param("planted 2-SAT needs n >= 2 and m >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let vars: Vec<usize> = (0..n).collect();
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let pick: Vec<usize> = vars.choose_multiple(&mut rng, 2).copied().collect();
        let mut clause = [
            Literal { var: pick[0], positive: rng.random_bool(0.5) },
            Literal { var: pick[1], positive: rng.random_bool(0.5) },
        ];
        if !clause[0].holds(&planted) && !clause[1].holds(&planted) {
            let j = rng.random_range(0..2);
            clause[j].positive = !clause[j].positive;
        }
        clauses.push(clause);
    }
    CnfInstance::new(n, clauses, planted)
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(param(format!("edge probability {p} not in [0, 1]")))
    }
}

fn minimum_vertex_cover(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let adj = {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    };
    let mut best: Vec<usize> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
    let mut chosen = vec![false; n];
    let mut current = Vec::new();
    branch(&adj, edges, &mut chosen, &mut current, &mut best);
    best
}

fn branch(adj: &[Vec<usize>], edges: &[(usize, usize)], chosen: &mut [bool], current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if current.len() >= best.len() {
        return;
    }
    // vertex of highest uncovered degree
    let mut pick = None;
    let mut degree = 0;
    for v in 0..adj.len() {
        if chosen[v] {
            continue;
        }
        let d = adj[v].iter().filter(|&&u| !chosen[u]).count();
        if d > degree {
            degree = d;
            pick = Some(v);
        }
    }
    let Some(v) = pick else {
        *best = current.clone();
        return;
    };
    // each remaining vertex covers at most `degree` uncovered edges
    let uncovered = edges.iter().filter(|&&(a, b)| !chosen[a] && !chosen[b]).count();
    if current.len() + uncovered.div_ceil(degree) >= best.len() {
        return;
    }
    chosen[v] = true;
    current.push(v);
    branch(adj, edges, chosen, current, best);
    current.pop();
    chosen[v] = false;

    // v stays out: all its open neighbours must go in
    let added: Vec<usize> = adj[v].iter().copied().filter(|&u| !chosen[u]).collect();
    for &u in &added {
        chosen[u] = true;
        current.push(u);
    }
    // every edge at v is now covered; mark v so it is never picked below
    chosen[v] = true;
    branch(adj, edges, chosen, current, best);
    chosen[v] = false;
    for &u in &added {
        chosen[u] = false;
        current.pop();
    }
}

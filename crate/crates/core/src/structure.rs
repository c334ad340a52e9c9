//! Dependency graph of a generator matrix and its chromatic number.
//!
//! Two columns are adjacent when they share a supporting row. Servers whose
//! columns are nonadjacent see noise built from disjoint packet sets, so the
//! graph is a valid dependency graph for the per-server decoding indicators.

use serde::Serialize;

use crate::error::{NfvError, Result};
use crate::gf2::{column_weights, BitMatrix};

/// Largest vertex count accepted by the exact coloring search.
pub const MAX_EXACT_VERTICES: usize = 24;

/// Simple undirected graph over `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    vertex_count: usize,
    adjacency: Vec<Vec<bool>>,
}

impl DependencyGraph {
    pub fn empty(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            adjacency: vec![vec![false; vertex_count]; vertex_count],
        }
    }

    /// Builds a graph from 0-based edge pairs. Self-loops are rejected.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(vertex_count);
        for &(i, j) in edges {
            if i == j || i >= vertex_count || j >= vertex_count {
                return Err(NfvError::InvalidParameter {
                    name: "edge",
                    reason: format!("({i}, {j}) invalid for {vertex_count} vertices"),
                });
            }
            g.adjacency[i][j] = true;
            g.adjacency[j][i] = true;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().filter(|&&a| a).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges as 0-based `(i, j)` pairs with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count {
            for j in i + 1..self.vertex_count {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Induced subgraph on `vertices`, relabelled `0..vertices.len()`.
    pub fn induced(&self, vertices: &[usize]) -> DependencyGraph {
        let mut g = Self::empty(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate() {
                g.adjacency[a][b] = self.adjacency[u][v];
            }
        }
        g
    }

    /// Edge list export: one `"i j"` line per edge, 1-based.
    pub fn to_edge_list(&self) -> String {
        self.edges()
            .into_iter()
            .map(|(i, j)| format!("{} {}\n", i + 1, j + 1))
            .collect()
    }

    fn neighbor_masks(&self) -> Vec<u32> {
        (0..self.vertex_count)
            .map(|v| {
                (0..self.vertex_count)
                    .filter(|&u| self.adjacency[v][u])
                    .fold(0u32, |m, u| m | (1 << u))
            })
            .collect()
    }
}

/// Dependency graph of a generator: columns sharing a row with a 1 are adjacent.
pub fn dependency_graph(generator: &BitMatrix) -> DependencyGraph {
    let supports: Vec<_> = (0..generator.cols()).map(|c| generator.column(c)).collect();
    let mut g = DependencyGraph::empty(generator.cols());
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            if supports[i].intersects(&supports[j]) {
                g.adjacency[i][j] = true;
                g.adjacency[j][i] = true;
            }
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColoringMode {
    Exact,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringResult {
    pub chromatic_number: usize,
    /// Color of each vertex, `0..chromatic_number`.
    pub coloring: Vec<usize>,
    pub method: ColoringMode,
}

impl ColoringResult {
    pub fn is_proper(&self, graph: &DependencyGraph) -> bool {
        graph
            .edges()
            .iter()
            .all(|&(i, j)| self.coloring[i] != self.coloring[j])
    }
}

/// Greedy DSATUR coloring: repeatedly color the vertex with the most
/// distinct neighbor colors (lowest index on ties) with its smallest free color.
fn dsatur_greedy(graph: &DependencyGraph) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v].is_none())
            .max_by(|&a, &b| {
                saturation(graph, &colors, a)
                    .cmp(&saturation(graph, &colors, b))
                    .then(b.cmp(&a))
            })
            .expect("uncolored vertex remains");
        let used: Vec<usize> = (0..n)
            .filter(|&u| graph.adjacent(v, u))
            .filter_map(|u| colors[u])
            .collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        colors[v] = Some(c);
    }
    colors.into_iter().map(Option::unwrap).collect()
}

fn saturation(graph: &DependencyGraph, colors: &[Option<usize>], v: usize) -> usize {
    let mut seen: Vec<usize> = (0..graph.vertex_count())
        .filter(|&u| graph.adjacent(v, u))
        .filter_map(|u| colors[u])
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Greedy clique: highest-degree-first, used as the search's lower bound.
fn greedy_clique(masks: &[u32]) -> usize {
    let n = masks.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(masks[v].count_ones()));
    let mut best = usize::from(n > 0);
    for &start in &order {
        let mut clique = 1u32 << start;
        let mut candidates = masks[start];
        for &v in &order {
            if candidates & (1 << v) != 0 {
                clique |= 1 << v;
                candidates &= masks[v];
            }
        }
        best = best.max(clique.count_ones() as usize);
    }
    best
}

struct ExactSearch<'a> {
    masks: &'a [u32],
    colors: Vec<usize>,
    best: usize,
    best_coloring: Vec<usize>,
    lower: usize,
}

const UNCOLORED: usize = usize::MAX;

impl ExactSearch<'_> {
    fn pick(&self) -> Option<usize> {
        let n = self.masks.len();
        let mut pick = None;
        let mut pick_sat = 0usize;
        for v in 0..n {
            if self.colors[v] != UNCOLORED {
                continue;
            }
            let mut seen = 0u32;
            let mut nb = self.masks[v];
            while nb != 0 {
                let u = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                if self.colors[u] != UNCOLORED {
                    seen |= 1 << self.colors[u];
                }
            }
            let sat = seen.count_ones() as usize;
            if pick.is_none() || sat > pick_sat {
                pick = Some(v);
                pick_sat = sat;
            }
        }
        pick
    }

    fn search(&mut self, used: usize) {
        if self.best <= self.lower {
            return;
        }
        let Some(v) = self.pick() else {
            if used < self.best {
                self.best = used;
                self.best_coloring = self.colors.clone();
            }
            return;
        };
        let mut forbidden = 0u32;
        let mut nb = self.masks[v];
        while nb != 0 {
            let u = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            if self.colors[u] != UNCOLORED {
                forbidden |= 1 << self.colors[u];
            }
        }
        // a fresh color is only worth trying if it still beats the incumbent
        let limit = (used + 1).min(self.best - 1);
        for c in 0..limit {
            if forbidden & (1 << c) != 0 {
                continue;
            }
            self.colors[v] = c;
            self.search(used.max(c + 1));
            self.colors[v] = UNCOLORED;
            if self.best <= self.lower {
                return;
            }
        }
    }
}

fn exact_coloring(graph: &DependencyGraph) -> Result<Vec<usize>> {
    let n = graph.vertex_count();
    if n > MAX_EXACT_VERTICES {
        return Err(NfvError::SearchLimitExceeded {
            what: "vertices",
            value: n,
            limit: MAX_EXACT_VERTICES,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let masks = graph.neighbor_masks();
    let greedy = dsatur_greedy(graph);
    let upper = greedy.iter().max().unwrap() + 1;
    let lower = greedy_clique(&masks);
    let mut search = ExactSearch {
        masks: &masks,
        colors: vec![UNCOLORED; n],
        best: upper,
        best_coloring: greedy,
        lower,
    };
    search.search(0);
    Ok(search.best_coloring)
}

/// Chromatic number by exact branch-and-bound or greedy upper bound.
pub fn chromatic_number(graph: &DependencyGraph, mode: ColoringMode) -> Result<ColoringResult> {
    let coloring = match mode {
        ColoringMode::Exact => exact_coloring(graph)?,
        ColoringMode::Upper => dsatur_greedy(graph),
    };
    let chromatic_number = coloring.iter().max().map_or(0, |&c| c + 1);
    Ok(ColoringResult {
        chromatic_number,
        coloring,
        method: mode,
    })
}

/// Analytic upper bounds on the chromatic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChromaticBounds {
    /// Maximum degree plus one.
    pub brooks: usize,
    /// `min{N, α_c(α_r − 1) + 1}` from the max row and column weights.
    pub lemma1: usize,
}

pub fn chromatic_bounds(generator: &BitMatrix) -> ChromaticBounds {
    let graph = dependency_graph(generator);
    let alpha_r = generator.row_weights().into_iter().max().unwrap_or(0);
    let alpha_c = column_weights(generator).into_iter().max().unwrap_or(0);
    let lemma1 = (alpha_c * alpha_r.saturating_sub(1) + 1).min(generator.cols());
    ChromaticBounds {
        brooks: graph.max_degree() + 1,
        lemma1,
    }
}

/// Where a chromatic number used in a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiSource {
    Exact,
    AnalyticUpper,
}

/// Chromatic number for bound evaluation: exact when the graph is small
/// enough, otherwise the smaller analytic upper bound.
pub fn chromatic_for_bounds(generator: &BitMatrix) -> (usize, ChiSource) {
    let graph = dependency_graph(generator);
    match chromatic_number(&graph, ColoringMode::Exact) {
        Ok(r) => (r.chromatic_number.max(1), ChiSource::Exact),
        Err(_) => {
            let b = chromatic_bounds(generator);
            (b.brooks.min(b.lemma1), ChiSource::AnalyticUpper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{CodeKind, NfvCode, NFV84_ROWS};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn nfv84() -> BitMatrix {
        BitMatrix::from_strs(&NFV84_ROWS).unwrap()
    }

    /// Smallest k admitting a proper coloring, by trying every assignment.
    fn brute_chromatic(g: &DependencyGraph) -> usize {
        let n = g.vertex_count();
        let edges = g.edges();
        for k in 1..=n {
            let total = k.pow(n as u32);
            for code in 0..total {
                let mut c = vec![0; n];
                let mut x = code;
                for slot in c.iter_mut() {
                    *slot = x % k;
                    x /= k;
                }
                if edges.iter().all(|&(i, j)| c[i] != c[j]) {
                    return k;
                }
            }
        }
        n.max(1)
    }

    #[test]
    fn identity_graph_is_empty() {
        let g = dependency_graph(&BitMatrix::identity(8).unwrap());
        assert_eq!(g.edge_count(), 0);
        assert_eq!(chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number, 1);
    }

    #[test]
    fn repetition_graph_is_complete() {
        let g = dependency_graph(&BitMatrix::ones(1, 8).unwrap());
        assert_eq!(g.edge_count(), 28);
        assert_eq!(chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number, 8);
        assert_eq!(chromatic_bounds(&BitMatrix::ones(1, 8).unwrap()).brooks, 8);
    }

    #[test]
    fn nfv84_graph_edges() {
        let g = dependency_graph(&nfv84());
        let mut expected: Vec<(usize, usize)> = [
            (1, 6), (1, 7), (6, 7), (4, 5), (4, 8), (5, 8),
            (2, 7), (2, 8), (7, 8), (1, 3), (1, 5), (3, 5),
        ]
        .iter()
        .map(|&(i, j): &(usize, usize)| (i - 1, j - 1))
        .collect();
        expected.sort();
        assert_eq!(g.edges(), expected);
        let r = chromatic_number(&g, ColoringMode::Exact).unwrap();
        assert_eq!(r.chromatic_number, 3);
        assert!(r.is_proper(&g));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(chromatic_bounds(&nfv84()).lemma1, 5);
        assert_eq!(chromatic_bounds(&BitMatrix::identity(8).unwrap()).lemma1, 1);
    }

    #[test]
    fn bounds_dominate_exact_for_schemes() {
        for kind in CodeKind::ALL {
            let code = NfvCode::from_kind(kind, 8).unwrap();
            let g = dependency_graph(code.generator());
            let chi = chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number;
            let b = chromatic_bounds(code.generator());
            assert!(chi <= b.brooks && chi <= b.lemma1, "{kind:?}");
        }
    }

    #[test]
    fn exact_mode_budget() {
        let g = DependencyGraph::empty(25);
        assert!(chromatic_number(&g, ColoringMode::Exact).is_err());
        assert_eq!(chromatic_number(&g, ColoringMode::Upper).unwrap().chromatic_number, 1);
    }

    #[test]
    fn odd_cycle_needs_three() {
        let edges: Vec<_> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
        let g = DependencyGraph::from_edges(7, &edges).unwrap();
        assert_eq!(chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number, 3);
    }

    #[test]
    fn edge_list_export() {
        let g = dependency_graph(&BitMatrix::from_strs(&["110", "011"]).unwrap());
        assert_eq!(g.to_edge_list(), "1 2\n2 3\n");
    }

    fn graph_strategy() -> impl Strategy<Value = DependencyGraph> {
        (1usize..=8).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if bits[k] {
                            edges.push((i, j));
                        }
                        k += 1;
                    }
                }
                DependencyGraph::from_edges(n, &edges).unwrap()
            })
        })
    }

    fn generator_strategy() -> impl Strategy<Value = BitMatrix> {
        (1usize..=5, 1usize..=9).prop_flat_map(|(k, n)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), k).prop_map(
                |rows| {
                    BitMatrix::from_rows(
                        rows.iter().map(|r| crate::gf2::BitVec::from_bits(r)).collect(),
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn exact_matches_brute_force(g in graph_strategy()) {
            let r = chromatic_number(&g, ColoringMode::Exact).unwrap();
            prop_assert!(r.is_proper(&g));
            prop_assert_eq!(r.chromatic_number, brute_chromatic(&g));
            let u = chromatic_number(&g, ColoringMode::Upper).unwrap();
            prop_assert!(u.is_proper(&g));
            prop_assert!(u.chromatic_number >= r.chromatic_number);
        }

        #[test]
        fn bounds_are_valid(gen in generator_strategy()) {
            let g = dependency_graph(&gen);
            let chi = chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number;
            let b = chromatic_bounds(&gen);
            prop_assert!(chi <= b.brooks);
            prop_assert!(chi <= b.lemma1);
        }

        #[test]
        fn relabeling_invariance(gen in generator_strategy(), seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cols: Vec<usize> = (0..gen.cols()).collect();
            cols.shuffle(&mut rng);
            let mut rows: Vec<usize> = (0..gen.rows()).collect();
            rows.shuffle(&mut rng);
            let permuted_cols = gen.select_columns(&cols).unwrap();
            let permuted = BitMatrix::from_rows(rows.iter().map(|&r| permuted_cols.row(r).clone()).collect()).unwrap();
            let g = dependency_graph(&gen);
            let h = dependency_graph(&permuted);
            prop_assert_eq!(g.edge_count(), h.edge_count());
            for a in 0..cols.len() {
                for b in 0..cols.len() {
                    prop_assert_eq!(h.adjacent(a, b), g.adjacent(cols[a], cols[b]));
                }
            }
            let x = chromatic_number(&g, ColoringMode::Exact).unwrap().chromatic_number;
            let y = chromatic_number(&h, ColoringMode::Exact).unwrap().chromatic_number;
            prop_assert_eq!(x, y);
        }

        #[test]
        fn nonadjacent_columns_have_disjoint_supports(gen in generator_strategy()) {
            let g = dependency_graph(&gen);
            for i in 0..gen.cols() {
                for j in 0..gen.cols() {
                    if i != j && !g.adjacent(i, j) {
                        prop_assert!(!gen.column(i).intersects(&gen.column(j)));
                    }
                }
            }
        }
    }
}

//! Configuration-model multigraphs built by uniform half-edge pairing.
//!
//! Self-loops and parallel edges are kept. For degree sequences in `{1, 2}`
//! every component is either a line (a path between two degree-1 vertices)
//! or a torus (a cycle, possibly of length 1 or 2).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising1d::ComponentKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
    total: u64,
}

impl DegreeSequence {
    /// All degrees must be at least 1 and sum to an even total.
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if let Some(v) = degrees.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDegree {
                vertex: v,
                degree: 0,
                expected: ">= 1",
            });
        }
        let total: u64 = degrees.iter().map(|&d| d as u64).sum();
        if total % 2 == 1 {
            return Err(Error::OddTotalDegree(total));
        }
        Ok(DegreeSequence { degrees, total })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Total degree, the number of half-edges.
    pub fn total_degree(&self) -> u64 {
        self.total
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn count_of(&self, k: u32) -> usize {
        self.degrees.iter().filter(|&&d| d == k).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    edges: Vec<(u32, u32)>,
    degrees: DegreeSequence,
}

impl MultiGraph {
    /// Builds a graph from an edge multiset; degrees are recomputed with a
    /// self-loop counting twice.
    pub fn from_edges(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut deg = vec![0u32; n];
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse(format!(
                    "edge ({u}, {v}) out of range for N = {n}"
                )));
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        Ok(MultiGraph {
            edges,
            degrees: DegreeSequence::new(deg)?,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.n()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degrees(&self) -> &DegreeSequence {
        &self.degrees
    }

    /// Incidence lists in CSR form; entry `(neighbour, edge id)`. A self-loop
    /// appears twice in its vertex's list.
    pub fn adjacency(&self) -> Adjacency {
        let n = self.n();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for &d in self.degrees.degrees() {
            offsets.push(offsets.last().unwrap() + d as usize);
        }
        let mut fill = offsets[..n].to_vec();
        let mut slots = vec![(0u32, 0u32); self.degrees.total_degree() as usize];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            slots[fill[u as usize]] = (v, e as u32);
            fill[u as usize] += 1;
            slots[fill[v as usize]] = (u, e as u32);
            fill[v as usize] += 1;
        }
        Adjacency { offsets, slots }
    }

    pub fn self_loops(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }
}

#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    slots: Vec<(u32, u32)>,
}

impl Adjacency {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.slots[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Uniform perfect matching of the half-edges.
///
/// Half-edge slot `i` is paired with a uniformly chosen slot among the
/// remaining unpaired ones (an in-place partial Fisher-Yates shuffle), which
/// realizes the sequential pairing law in `O(total degree)`.
pub fn pair_half_edges<R: Rng + ?Sized>(deg: &DegreeSequence, rng: &mut R) -> MultiGraph {
    let mut half: Vec<u32> = Vec::with_capacity(deg.total_degree() as usize);
    for (v, &d) in deg.degrees().iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    let len = half.len();
    let mut edges = Vec::with_capacity(len / 2);
    let mut i = 0;
    while i < len {
        let j = rng.random_range(i + 1..len);
        half.swap(i + 1, j);
        edges.push((half[i], half[i + 1]));
        i += 2;
    }
    MultiGraph {
        edges,
        degrees: deg.clone(),
    }
}

/// All vertices of degree 2.
pub fn cm2<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MultiGraph> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    let deg = DegreeSequence::new(vec![2; n])?;
    Ok(pair_half_edges(&deg, rng))
}

/// Vertex counts `(n1, n2)` for the degree-{1,2} model.
///
/// `n2 = floor(p N)`. When `n1 = N - n2` is odd one degree-1 vertex is
/// promoted to degree 2, keeping `N` fixed.
pub fn cm12_counts(n: usize, p: f64) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!(
            "p must lie in [0, 1], got {p}"
        )));
    }
    let mut n2 = (p * n as f64).floor() as usize;
    let mut n1 = n - n2;
    if n1 % 2 == 1 {
        n1 -= 1;
        n2 += 1;
    }
    Ok((n1, n2))
}

/// Degree-1 vertices first, then degree-2 vertices.
pub fn cm12_degrees(n: usize, p: f64) -> Result<DegreeSequence> {
    let (n1, n2) = cm12_counts(n, p)?;
    let mut d = vec![1u32; n1];
    d.extend(std::iter::repeat_n(2u32, n2));
    DegreeSequence::new(d)
}

pub fn cm12<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<MultiGraph> {
    Ok(pair_half_edges(&cm12_degrees(n, p)?, rng))
}

/// Lines and tori of a degree-{1,2} multigraph.
///
/// `order` lists the vertices component by component (lines first, then
/// tori, each in walk order), so `order[offset..offset + len]` is the chain
/// for that component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    n: usize,
    line_lengths: Vec<usize>,
    torus_lengths: Vec<usize>,
    order: Vec<u32>,
}

impl ComponentDecomposition {
    /// Decomposition with vertices labeled consecutively in component order.
    pub fn from_lengths(line_lengths: Vec<usize>, torus_lengths: Vec<usize>) -> Result<Self> {
        for &l in &line_lengths {
            ComponentKind::Line.check_len(l)?;
        }
        for &l in &torus_lengths {
            ComponentKind::Cycle.check_len(l)?;
        }
        let n = line_lengths.iter().sum::<usize>() + torus_lengths.iter().sum::<usize>();
        Ok(ComponentDecomposition {
            n,
            line_lengths,
            torus_lengths,
            order: (0..n as u32).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn line_lengths(&self) -> &[usize] {
        &self.line_lengths
    }

    pub fn torus_lengths(&self) -> &[usize] {
        &self.torus_lengths
    }

    pub fn line_count(&self) -> usize {
        self.line_lengths.len()
    }

    pub fn torus_count(&self) -> usize {
        self.torus_lengths.len()
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Components in `order` layout.
    pub fn components(&self) -> impl Iterator<Item = (ComponentKind, usize)> + '_ {
        self.line_lengths
            .iter()
            .map(|&l| (ComponentKind::Line, l))
            .chain(
                self.torus_lengths
                    .iter()
                    .map(|&l| (ComponentKind::Cycle, l)),
            )
    }

    /// Multiplicity of each `(kind, length)`.
    pub fn length_counts(&self) -> BTreeMap<(ComponentKind, usize), usize> {
        let mut m = BTreeMap::new();
        for c in self.components() {
            *m.entry(c).or_insert(0) += 1;
        }
        m
    }

    /// Number of lines of each length.
    pub fn line_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &l in &self.line_lengths {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }
}

/// Splits a degree-{1,2} multigraph into lines and tori in one pass.
pub fn decompose(g: &MultiGraph) -> Result<ComponentDecomposition> {
    let deg = g.degrees().degrees();
    if let Some(v) = deg.iter().position(|&d| d > 2) {
        return Err(Error::InvalidDegree {
            vertex: v,
            degree: deg[v],
            expected: "1 or 2",
        });
    }
    let adj = g.adjacency();
    let n = g.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut line_lengths = Vec::new();
    let mut torus_lengths = Vec::new();

    for start in 0..n {
        if deg[start] != 1 || visited[start] {
            continue;
        }
        let before = order.len();
        visited[start] = true;
        order.push(start as u32);
        let (mut cur, mut via) = adj.incident(start)[0];
        loop {
            let c = cur as usize;
            visited[c] = true;
            order.push(cur);
            if deg[c] == 1 {
                break;
            }
            let next = other_slot(adj.incident(c), via);
            cur = next.0;
            via = next.1;
        }
        line_lengths.push(order.len() - before);
    }

    for start in 0..n {
        if visited[start] {
            continue;
        }
        let before = order.len();
        visited[start] = true;
        order.push(start as u32);
        let (mut cur, mut via) = adj.incident(start)[0];
        while cur as usize != start {
            let c = cur as usize;
            visited[c] = true;
            order.push(cur);
            let next = other_slot(adj.incident(c), via);
            cur = next.0;
            via = next.1;
        }
        torus_lengths.push(order.len() - before);
    }

    Ok(ComponentDecomposition {
        n,
        line_lengths,
        torus_lengths,
        order,
    })
}

/// The incidence slot of a degree-2 vertex not using edge `via`.
fn other_slot(slots: &[(u32, u32)], via: u32) -> (u32, u32) {
    if slots[0].1 == via {
        slots[1]
    } else {
        slots[0]
    }
}

/// Sizes of all connected components, for any degree sequence.
pub fn component_sizes(g: &MultiGraph) -> Vec<usize> {
    let adj = g.adjacency();
    let n = g.n();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut sizes = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s as u32);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(w, _) in adj.incident(v as usize) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Closing probabilities `q_j = 1/(2N - 2j + 1)` of the successive pairings
/// of a 2-regular configuration model; the torus count is their Bernoulli sum.
fn closing_probs(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |j| 1.0 / (2 * n - 2 * j + 1) as f64)
}

/// Mean number of tori of a 2-regular configuration model on `n` vertices.
pub fn expected_tori(n: usize) -> f64 {
    closing_probs(n).sum()
}

/// Variance of the torus count, `sum q_j (1 - q_j)`.
pub fn tori_variance(n: usize) -> f64 {
    closing_probs(n).map(|q| q * (1.0 - q)).sum()
}

/// Exact probability that the line grown from a given degree-1 vertex has
/// `l` vertices, with `n1` degree-1 and `n2` degree-2 vertices.
pub fn line_length_pmf(n1: usize, n2: usize, l: usize) -> f64 {
    if l < 2 || n1 < 2 || l - 2 > n2 {
        return 0.0;
    }
    let total = (n1 + 2 * n2) as f64;
    let mut prob = 1.0;
    for i in 0..l - 2 {
        prob *= (2 * n2 - 2 * i) as f64 / (total - 1.0 - 2.0 * i as f64);
    }
    prob * (n1 - 1) as f64 / (total - 1.0 - 2.0 * (l - 2) as f64)
}

/// Probability that a second line has `j` vertices given the first has `l`:
/// the first line removes two degree-1 and `l - 2` degree-2 vertices and
/// the remaining pairing is again uniform.
pub fn line_length_pmf_conditional(n1: usize, n2: usize, l: usize, j: usize) -> f64 {
    if l < 2 || n1 < 4 || l - 2 > n2 {
        return 0.0;
    }
    line_length_pmf(n1 - 2, n2 - (l - 2), j)
}

/// Degree law `P(D = k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, f64>", into = "BTreeMap<u32, f64>")]
pub struct DegreeModel {
    pmf: BTreeMap<u32, f64>,
}

impl TryFrom<BTreeMap<u32, f64>> for DegreeModel {
    type Error = Error;
    fn try_from(pmf: BTreeMap<u32, f64>) -> Result<Self> {
        DegreeModel::new(pmf)
    }
}

impl From<DegreeModel> for BTreeMap<u32, f64> {
    fn from(m: DegreeModel) -> Self {
        m.pmf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub nu: f64,
    /// `atanh(1/nu)` when `nu > 1`, infinite otherwise.
    pub beta_c: f64,
}

impl DegreeModel {
    pub fn new(pmf: BTreeMap<u32, f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidPmf("empty distribution".into()));
        }
        if pmf.values().any(|&q| !q.is_finite() || q < 0.0) {
            return Err(Error::InvalidPmf(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        let model = DegreeModel { pmf };
        if model.mean() <= 0.0 {
            return Err(Error::InvalidPmf("mean degree must be positive".into()));
        }
        Ok(model)
    }

    /// Parses `"1:0.5,2:0.5"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pmf = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, q) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidPmf(format!("expected degree:prob, got {item:?}")))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPmf(format!("bad degree {k:?}")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPmf(format!("bad probability {q:?}")))?;
            *pmf.entry(k).or_insert(0.0) += q;
        }
        DegreeModel::new(pmf)
    }

    pub fn pmf(&self) -> &BTreeMap<u32, f64> {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().map(|(&k, &q)| k as f64 * q).sum()
    }

    /// `rho_k = (k + 1) p_{k+1} / E[D]`
    pub fn size_biased(&self) -> BTreeMap<u32, f64> {
        let mean = self.mean();
        self.pmf
            .iter()
            .filter(|(&k, _)| k >= 1)
            .map(|(&k, &q)| (k - 1, k as f64 * q / mean))
            .collect()
    }

    pub fn stats(&self) -> DegreeStats {
        let mean = self.mean();
        let nu = self
            .pmf
            .iter()
            .map(|(&k, &q)| k as f64 * (k as f64 - 1.0) * q)
            .sum::<f64>()
            / mean;
        let beta_c = if nu > 1.0 {
            (1.0 / nu).atanh()
        } else {
            f64::INFINITY
        };
        DegreeStats { mean, nu, beta_c }
    }

    /// Deterministic degree sequence with `round(p_k N)` vertices of degree
    /// `k` (largest remainders get the leftover vertices). If the total is
    /// odd the last odd-degree vertex gains one half-edge.
    pub fn degree_sequence(&self, n: usize) -> Result<DegreeSequence> {
        let mut counts: Vec<(u32, usize, f64)> = self
            .pmf
            .iter()
            .map(|(&k, &q)| {
                let exact = q * n as f64;
                (k, exact.floor() as usize, exact - exact.floor())
            })
            .collect();
        let assigned: usize = counts.iter().map(|c| c.1).sum();
        let mut by_rem: Vec<usize> = (0..counts.len()).collect();
        by_rem.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2).then(a.cmp(&b)));
        for &i in by_rem.iter().take(n - assigned) {
            counts[i].1 += 1;
        }
        let mut degrees = Vec::with_capacity(n);
        for (k, c, _) in counts {
            degrees.extend(std::iter::repeat_n(k, c));
        }
        if degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
            let v = degrees.iter().rposition(|d| d % 2 == 1).unwrap();
            degrees[v] += 1;
        }
        DegreeSequence::new(degrees)
    }
}

pub fn degree_model_stats(model: &DegreeModel) -> DegreeStats {
    model.stats()
}

/// Writes the graph as a header line `N total_degree seed` followed by one
/// `u v` line per edge.
pub fn write_graph<W: Write>(g: &MultiGraph, seed: u64, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {}", g.n(), g.degrees().total_degree(), seed)?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_graph`]; returns the graph and the recorded seed.
pub fn read_graph<R: BufRead>(input: R) -> Result<(MultiGraph, u64)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "header must be `N total_degree seed`, got {header:?}"
        )));
    }
    let parse = |s: &str, what: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
    };
    let n = parse(fields[0], "N")? as usize;
    let total = parse(fields[1], "total degree")?;
    let seed = parse(fields[2], "seed")?;
    let mut edges = Vec::with_capacity((total / 2) as usize);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!(
                "line {}: expected `u v`, got {line:?}",
                i + 2
            )));
        };
        edges.push((parse(u, "vertex")? as u32, parse(v, "vertex")? as u32));
    }
    let g = MultiGraph::from_edges(n, edges)?;
    if g.degrees().total_degree() != total {
        return Err(Error::Parse(format!(
            "header declares total degree {total}, edges give {}",
            g.degrees().total_degree()
        )));
    }
    Ok((g, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn odd_total_degree_rejected() {
        assert!(matches!(
            DegreeSequence::new(vec![1, 2]),
            Err(Error::OddTotalDegree(3))
        ));
        assert!(matches!(
            DegreeSequence::new(vec![0, 2]),
            Err(Error::InvalidDegree { .. })
        ));
    }

    #[test]
    fn single_vertex_self_loop() {
        let mut rng = stream(1, Domain::Misc, 0);
        let g = cm2(1, &mut rng).unwrap();
        assert_eq!(g.edges(), &[(0, 0)]);
        let d = decompose(&g).unwrap();
        assert_eq!(d.torus_lengths(), &[1]);
    }

    #[test]
    fn two_degree_one_vertices_make_an_edge() {
        let mut rng = stream(1, Domain::Misc, 0);
        let deg = DegreeSequence::new(vec![1, 1]).unwrap();
        let g = pair_half_edges(&deg, &mut rng);
        assert_eq!(g.edges().len(), 1);
        let (u, v) = g.edges()[0];
        assert_eq!((u.min(v), u.max(v)), (0, 1));
        assert_eq!(decompose(&g).unwrap().line_lengths(), &[2]);
    }

    #[test]
    fn two_vertex_matching_law() {
        // 3 matchings of 4 half-edges: one gives two self-loops, two give a double edge
        let deg = DegreeSequence::new(vec![2, 2]).unwrap();
        let mut rng = stream(2, Domain::Misc, 0);
        let n = 100_000;
        let doubles = (0..n)
            .filter(|_| pair_half_edges(&deg, &mut rng).self_loops() == 0)
            .count();
        let p = 2.0 / 3.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((doubles as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn parity_rule() {
        assert_eq!(cm12_counts(10, 0.5).unwrap(), (4, 6));
        assert_eq!(cm12_counts(10, 0.4).unwrap(), (6, 4));
        assert_eq!(cm12_counts(7, 1.0).unwrap(), (0, 7));
        assert!(cm12_counts(10, 1.5).is_err());
        assert!(cm12_counts(0, 0.5).is_err());
        let (n1, n2) = cm12_counts(100_000, 0.5).unwrap();
        assert_eq!(n2, 50_000);
        assert_eq!(n1, 50_000);
    }

    #[test]
    fn decompose_small_graphs() {
        let path = MultiGraph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        let d = decompose(&path).unwrap();
        assert_eq!(d.line_lengths(), &[3]);
        assert_eq!(d.order(), &[0, 1, 2]);

        let loops = MultiGraph::from_edges(2, vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(decompose(&loops).unwrap().torus_lengths(), &[1, 1]);

        let double = MultiGraph::from_edges(2, vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(decompose(&double).unwrap().torus_lengths(), &[2]);

        let star = MultiGraph::from_edges(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(matches!(
            decompose(&star),
            Err(Error::InvalidDegree { vertex: 0, .. })
        ));
        let mut sizes = component_sizes(&star);
        sizes.sort();
        assert_eq!(sizes, vec![4]);
    }

    #[test]
    fn cm2_only_tori() {
        let mut rng = stream(3, Domain::Misc, 0);
        let g = cm2(5000, &mut rng).unwrap();
        let d = decompose(&g).unwrap();
        assert!(d.line_lengths().is_empty());
        assert_eq!(d.torus_lengths().iter().sum::<usize>(), 5000);
    }

    #[test]
    fn cm12_lines_and_fraction() {
        let mut rng = stream(4, Domain::Misc, 0);
        let n = 100_000;
        let g = cm12(n, 0.5, &mut rng).unwrap();
        assert_eq!(g.degrees().count_of(2), 50_000);
        let d = decompose(&g).unwrap();
        assert_eq!(d.line_count(), g.degrees().count_of(1) / 2);
        assert_eq!(d.n(), n);
        let mut sorted = d.order().to_vec();
        sorted.sort();
        assert!(sorted.iter().enumerate().all(|(i, &v)| i == v as usize));
    }

    #[test]
    fn expected_tori_values() {
        assert_relative_eq!(expected_tori(1), 1.0);
        assert_relative_eq!(expected_tori(2), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(expected_tori(3), 23.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(tori_variance(1), 0.0);
    }

    #[test]
    fn line_pmf_values() {
        for (n1, n2) in [(4, 4), (10, 3), (50, 80)] {
            let total = (n1 + 2 * n2) as f64;
            assert_relative_eq!(
                line_length_pmf(n1, n2, 2),
                (n1 - 1) as f64 / (total - 1.0),
                epsilon = 1e-15
            );
            let s: f64 = (2..=n2 + 2).map(|l| line_length_pmf(n1, n2, l)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
            assert_eq!(line_length_pmf(n1, n2, n2 + 3), 0.0);
        }
        assert_relative_eq!(
            line_length_pmf(4, 4, 3),
            (8.0 / 11.0) * (3.0 / 9.0),
            epsilon = 1e-15
        );
        // conditional formula as displayed for j = l
        let (n1, n2, l) = (20usize, 30usize, 4usize);
        let total = (n1 + 2 * n2) as f64;
        let mut want = 1.0;
        for i in 0..l - 2 {
            want *= (2 * n2 - 2 * (l - 2) - 2 * i) as f64
                / (total - 2.0 * (l - 2) as f64 - 3.0 - 2.0 * i as f64);
        }
        want *= (n1 - 3) as f64 / (total - 2.0 * (l - 2) as f64 - 3.0 - 2.0 * (l - 2) as f64);
        assert_relative_eq!(
            line_length_pmf_conditional(n1, n2, l, l),
            want,
            epsilon = 1e-15
        );
    }

    #[test]
    fn line_pmf_limit() {
        let p = 0.5;
        let n = 2_000_000;
        let (n1, n2) = cm12_counts(n, p).unwrap();
        for l in 2..8 {
            let lim = (2.0 * p / (p + 1.0)).powi(l as i32 - 2) * (1.0 - p) / (p + 1.0);
            assert_relative_eq!(line_length_pmf(n1, n2, l), lim, max_relative = 1e-4);
        }
    }

    #[test]
    fn degree_model_examples() {
        let two = DegreeModel::parse("2:1").unwrap().stats();
        assert_eq!(two.nu, 1.0);
        assert!(two.beta_c.is_infinite());

        let p = 0.3;
        let mix = DegreeModel::parse(&format!("1:{},2:{}", 1.0 - p, p))
            .unwrap()
            .stats();
        assert_relative_eq!(mix.nu, 2.0 * p / (1.0 + p), epsilon = 1e-15);
        assert!(mix.beta_c.is_infinite());

        let three = DegreeModel::parse("3:1").unwrap().stats();
        assert_eq!(three.nu, 2.0);
        assert_relative_eq!(three.beta_c, 0.5f64.atanh(), epsilon = 1e-15);
        assert_relative_eq!(three.beta_c, 0.5493061443340549, epsilon = 1e-15);

        assert!(DegreeModel::parse("1:0.5,2:0.4").is_err());
        assert!(DegreeModel::parse("1:-0.5,2:1.5").is_err());
        let rho = DegreeModel::parse("1:0.2,2:0.5,3:0.3")
            .unwrap()
            .size_biased();
        assert_relative_eq!(rho.values().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degree_sequence_from_model() {
        let m = DegreeModel::parse("3:1").unwrap();
        let d = m.degree_sequence(11).unwrap();
        assert_eq!(d.total_degree() % 2, 0);
        assert_eq!(d.n(), 11);
        let m = DegreeModel::parse("1:0.5,2:0.5").unwrap();
        assert_eq!(m.degree_sequence(10).unwrap().count_of(2), 6);
        assert_eq!(m.degree_sequence(12).unwrap().count_of(2), 6);
    }

    #[test]
    fn graph_file_rejects_garbage() {
        assert!(read_graph("".as_bytes()).is_err());
        assert!(read_graph("2 4\n0 1\n".as_bytes()).is_err());
        assert!(read_graph("2 4 1\n0 1\n".as_bytes()).is_err());
        assert!(read_graph("2 2 1\n0 5\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn graph_file_round_trip(n in 1usize..200, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let mut rng = stream(seed, Domain::Graph, 0);
            let g = cm12(n, p, &mut rng).unwrap();
            let mut buf = Vec::new();
            write_graph(&g, seed, &mut buf).unwrap();
            let (back, s) = read_graph(buf.as_slice()).unwrap();
            prop_assert_eq!(s, seed);
            prop_assert_eq!(back, g);
        }

        #[test]
        fn decomposition_partitions_vertices(n in 1usize..300, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let mut rng = stream(seed, Domain::Graph, 0);
            let g = cm12(n, p, &mut rng).unwrap();
            let d = decompose(&g).unwrap();
            prop_assert_eq!(d.line_lengths().iter().sum::<usize>() + d.torus_lengths().iter().sum::<usize>(), n);
            prop_assert_eq!(d.line_count(), g.degrees().count_of(1) / 2);
            let mut sizes = component_sizes(&g);
            let mut want: Vec<usize> = d.components().map(|c| c.1).collect();
            sizes.sort();
            want.sort();
            prop_assert_eq!(sizes, want);
        }
    }
}

//! Simple undirected graphs, graph6 I/O, exhaustive enumeration of small
//! connected graphs and brute-force coloring oracles.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::par::{self, Mode};

/// Largest vertex count accepted by the graph6 reader.
pub const MAX_GRAPH6_VERTICES: usize = 62;
/// Largest vertex count for canonical forms and coloring oracles.
pub const MAX_ORACLE_VERTICES: usize = 8;
/// Largest vertex count for exhaustive enumeration.
pub const MAX_ENUMERATION_VERTICES: usize = 7;
/// Cap on the κⁿ assignments scanned by [`max_colorable_subgraph`].
pub const MAX_ASSIGNMENTS: u64 = 100_000_000;

pub const CACHE_DIR_ENV: &str = "XYQAOA_CACHE_DIR";

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<u64>,
    degrees: Vec<usize>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

impl Graph {
    /// Builds a graph from an edge list; endpoints may be given in either order.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 64 {
            return Err(Error::arg(format!("graph with {n} vertices exceeds 64")));
        }
        let mut adj = vec![0u64; n];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::arg(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::arg(format!("self-loop at vertex {a}")));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(Error::arg(format!("duplicate edge ({a}, {b})")));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        let degrees = adj.iter().map(|row| row.count_ones() as usize).collect();
        Ok(Graph {
            n,
            edges: list,
            adj,
            degrees,
        })
    }

    fn from_adjacency(adj: Vec<u64>) -> Self {
        let n = adj.len();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if adj[a] >> b & 1 == 1 {
                    edges.push((a, b));
                }
            }
        }
        let degrees = adj.iter().map(|row| row.count_ones() as usize).collect();
        Graph {
            n,
            edges,
            adj,
            degrees,
        }
    }

    pub fn empty(n: usize) -> Self {
        Graph::from_adjacency(vec![0; n])
    }

    pub fn complete(n: usize) -> Self {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Graph::from_adjacency((0..n).map(|v| full & !(1 << v)).collect())
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::arg("a simple cycle needs at least 3 vertices"));
        }
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Graph::new(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::new(n, &edges).expect("path edges are valid")
    }

    /// Triangular prism K3 × K2.
    pub fn prism() -> Self {
        parse_graph6("E{Sw").expect("built-in graph6")
    }

    /// Envelope graph: the 7-vertex, 11-edge 3-chromatic graph on which every
    /// largest-first greedy ordering needs four colors.
    pub fn envelope() -> Self {
        parse_graph6("FpTz?").expect("built-in graph6")
    }

    /// Looks up a named graph: `prism`, `envelope`, `triangle`, `K<n>`, `C<n>`, `P<n>`.
    pub fn builtin(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "prism" => return Ok(Graph::prism()),
            "envelope" => return Ok(Graph::envelope()),
            "triangle" => return Ok(Graph::complete(3)),
            _ => {}
        }
        let unknown = || Error::arg(format!("unknown built-in graph '{name}'"));
        let (kind, digits) = lower.split_at(1.min(lower.len()));
        let size: usize = digits.parse().map_err(|_| unknown())?;
        if size == 0 || size > MAX_GRAPH6_VERTICES {
            return Err(unknown());
        }
        match kind {
            "k" => Ok(Graph::complete(size)),
            "c" => Graph::cycle(size),
            "p" => Ok(Graph::path(size)),
            _ => Err(unknown()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.adj[a] >> b & 1 == 1
    }

    /// Neighbor set of `v` as a bit mask.
    pub fn neighbor_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.adj[v] & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen.count_ones() as usize == self.n
    }

    /// Relabels vertices so that new vertex `i` is old vertex `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut inverse = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(a, b)| (inverse[a], inverse[b]))
            .collect();
        Graph::new(self.n, &edges).expect("permutation preserves validity")
    }

    pub fn to_graph6(&self) -> String {
        assert!(self.n <= MAX_GRAPH6_VERTICES, "graph6 writer supports n <= 62");
        let mut out = String::new();
        out.push((self.n as u8 + 63) as char);
        let mut chunk = 0u8;
        let mut filled = 0;
        for j in 1..self.n {
            for i in 0..j {
                chunk = chunk << 1 | self.has_edge(i, j) as u8;
                filled += 1;
                if filled == 6 {
                    out.push((chunk + 63) as char);
                    chunk = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            out.push(((chunk << (6 - filled)) + 63) as char);
        }
        out
    }
}

/// Parses a single graph6 line (an optional `>>graph6<<` header is accepted).
pub fn parse_graph6(text: &str) -> Result<Graph> {
    const HEADER: &str = ">>graph6<<";
    let trimmed = text.trim_end_matches(['\n', '\r']);
    let (base, body) = match trimmed.strip_prefix(HEADER) {
        Some(rest) => (HEADER.len(), rest.as_bytes()),
        None => (0, trimmed.as_bytes()),
    };
    let first = *body.first().ok_or_else(|| Error::parse(base, "empty graph6 string"))?;
    if first == 126 {
        return Err(Error::parse(base, "graphs with more than 62 vertices are not supported"));
    }
    if !(63..126).contains(&first) {
        return Err(Error::parse(base, format!("invalid size byte {first}")));
    }
    let n = (first - 63) as usize;
    let bits = n * n.saturating_sub(1) / 2;
    let expected = 1 + bits.div_ceil(6);
    if body.len() < expected {
        return Err(Error::parse(
            base + body.len(),
            format!("truncated bit-vector: expected {} bytes, found {}", expected, body.len()),
        ));
    }
    if body.len() > expected {
        return Err(Error::parse(base + expected, "trailing bytes after bit-vector"));
    }
    let mut adj = vec![0u64; n];
    let mut k = 0;
    for (offset, &byte) in body.iter().enumerate().skip(1) {
        if !(63..=126).contains(&byte) {
            return Err(Error::parse(base + offset, format!("invalid graph6 byte {byte}")));
        }
        let value = byte - 63;
        for shift in (0..6).rev() {
            let bit = value >> shift & 1;
            if k >= bits {
                if bit != 0 {
                    return Err(Error::parse(base + offset, "non-zero padding bits"));
                }
                continue;
            }
            if bit == 1 {
                let (i, j) = upper_pair(k);
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            k += 1;
        }
    }
    Ok(Graph::from_adjacency(adj))
}

/// Maps a graph6 bit position to its vertex pair `(i, j)` with `i < j`.
fn upper_pair(k: usize) -> (usize, usize) {
    let mut j = 1;
    while j * (j + 1) / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Adjacency bit-string under `perm`, most significant bit first in graph6
/// pair order. Returns `None` as soon as the prefix exceeds `bound`.
fn code_under(adj: &[u64], perm: &[usize], bound: u64) -> Option<u64> {
    let n = perm.len();
    let len = n * n.saturating_sub(1) / 2;
    let mut code = 0u64;
    let mut bit = len;
    for j in 1..n {
        let row = adj[perm[j]];
        for &pi in &perm[..j] {
            bit -= 1;
            if row >> pi & 1 == 1 {
                code |= 1 << bit;
                if code >> bit > bound >> bit {
                    return None;
                }
            }
        }
    }
    Some(code)
}

struct Canonicalizer {
    perms: Vec<Vec<usize>>,
}

impl Canonicalizer {
    fn new(n: usize) -> Self {
        Canonicalizer {
            perms: permutations(n),
        }
    }

    fn code(&self, adj: &[u64]) -> u64 {
        let mut best = u64::MAX;
        for perm in &self.perms {
            if let Some(code) = code_under(adj, perm, best) {
                best = best.min(code);
            }
        }
        best
    }
}

fn check_oracle_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::arg(format!(
            "{n} vertices exceeds the oracle limit of {MAX_ORACLE_VERTICES}"
        )));
    }
    Ok(())
}

/// Canonical code: the lexicographically minimal adjacency bit-string over all
/// vertex permutations.
pub fn canonical_code(g: &Graph) -> Result<u64> {
    check_oracle_size(g.n)?;
    Ok(Canonicalizer::new(g.n).code(&g.adj))
}

pub fn graph_from_code(n: usize, code: u64) -> Graph {
    let len = n * n.saturating_sub(1) / 2;
    let mut adj = vec![0u64; n];
    for k in 0..len {
        if code >> (len - 1 - k) & 1 == 1 {
            let (i, j) = upper_pair(k);
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
    }
    Graph::from_adjacency(adj)
}

pub fn canonical_form(g: &Graph) -> Result<Graph> {
    Ok(graph_from_code(g.n, canonical_code(g)?))
}

/// Vertex permutations that map the edge set onto itself.
pub fn automorphisms(g: &Graph) -> Result<Vec<Vec<usize>>> {
    check_oracle_size(g.n)?;
    Ok(permutations(g.n)
        .into_iter()
        .filter(|p| g.edges.iter().all(|&(a, b)| g.has_edge(p[a], p[b])))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetConstraint {
    Chromatic(usize),
    AllConnected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDescriptor {
    pub n: usize,
    pub constraint: SetConstraint,
}

/// Pairwise non-isomorphic connected graphs in canonical form, sorted by code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSet {
    pub members: Vec<Graph>,
    pub descriptor: SetDescriptor,
}

impl GraphSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_graph6_lines(&self) -> String {
        self.members
            .iter()
            .map(|g| g.to_graph6() + "\n")
            .collect()
    }
}

/// Canonical codes of every graph on `n` vertices, built by adding one vertex
/// with every possible neighbor set to each graph on `n - 1` vertices.
fn all_graph_codes(n: usize, mode: Mode) -> BTreeSet<u64> {
    let mut codes = BTreeSet::from([0u64]);
    for size in 2..=n {
        let canon = Canonicalizer::new(size);
        let parents: Vec<u64> = codes.iter().copied().collect();
        let batches = par::map(mode, parents, |code| {
            let base = graph_from_code(size - 1, code);
            (0..1u64 << (size - 1))
                .map(|nbrs| {
                    let mut adj = base.adj.clone();
                    adj.push(nbrs);
                    for (v, row) in adj.iter_mut().enumerate().take(size - 1) {
                        *row |= (nbrs >> v & 1) << (size - 1);
                    }
                    canon.code(&adj)
                })
                .collect::<Vec<_>>()
        });
        codes = batches.into_iter().flatten().collect();
    }
    codes
}

pub fn enumerate_connected_graphs(n: usize) -> Result<GraphSet> {
    enumerate_connected_graphs_with(n, Mode::default())
}

pub fn enumerate_connected_graphs_with(n: usize, mode: Mode) -> Result<GraphSet> {
    if !(1..=MAX_ENUMERATION_VERTICES).contains(&n) {
        return Err(Error::arg(format!(
            "enumeration supports 1 <= n <= {MAX_ENUMERATION_VERTICES}, got {n}"
        )));
    }
    let members = all_graph_codes(n, mode)
        .into_iter()
        .map(|code| graph_from_code(n, code))
        .filter(Graph::is_connected)
        .collect();
    Ok(GraphSet {
        members,
        descriptor: SetDescriptor {
            n,
            constraint: SetConstraint::AllConnected,
        },
    })
}

fn colorable_from(g: &Graph, k: usize, colors: &mut [usize], v: usize, used: usize) -> bool {
    if v == g.n {
        return true;
    }
    let limit = (used + 1).min(k);
    for c in 0..limit {
        let clash = (0..v).any(|u| colors[u] == c && g.has_edge(u, v));
        if clash {
            continue;
        }
        colors[v] = c;
        if colorable_from(g, k, colors, v + 1, used.max(c + 1)) {
            return true;
        }
    }
    false
}

pub fn is_colorable(g: &Graph, k: usize) -> bool {
    if g.n == 0 {
        return true;
    }
    if k == 0 {
        return false;
    }
    let mut colors = vec![0; g.n];
    colorable_from(g, k, &mut colors, 0, 0)
}

/// Smallest number of colors admitting a proper coloring.
pub fn chromatic_number(g: &Graph) -> usize {
    if g.n == 0 {
        return 0;
    }
    (1..=g.n).find(|&k| is_colorable(g, k)).unwrap_or(g.n)
}

/// Maximum number of properly colored edges over all κ-colorings.
pub fn max_colorable_subgraph(g: &Graph, kappa: usize) -> Result<usize> {
    if kappa == 0 {
        return Err(Error::arg("need at least one color"));
    }
    let space = (kappa as u64).checked_pow(g.n as u32);
    if space.is_none_or(|s| s > MAX_ASSIGNMENTS) {
        return Err(Error::resource(format!(
            "{kappa}^{} assignments exceed the search cap of {MAX_ASSIGNMENTS}",
            g.n
        )));
    }
    let mut colors = vec![0usize; g.n];
    let mut best = g.m() + 1;
    bound_conflicts(g, kappa, &mut colors, 0, 0, 0, &mut best);
    Ok(g.m() - best)
}

/// Branch and bound on the number of monochromatic edges; colors are
/// introduced in increasing order since the objective is label-invariant.
fn bound_conflicts(
    g: &Graph,
    kappa: usize,
    colors: &mut [usize],
    v: usize,
    used: usize,
    conflicts: usize,
    best: &mut usize,
) {
    if conflicts >= *best {
        return;
    }
    if v == g.n {
        *best = conflicts;
        return;
    }
    for c in 0..(used + 1).min(kappa) {
        let added = (0..v)
            .filter(|&u| colors[u] == c && g.has_edge(u, v))
            .count();
        colors[v] = c;
        bound_conflicts(g, kappa, colors, v + 1, used.max(c + 1), conflicts + added, best);
    }
}

pub fn filter_by_chromatic(set: &GraphSet, chi: usize) -> GraphSet {
    filter_by_chromatic_with(set, chi, Mode::default())
}

pub fn filter_by_chromatic_with(set: &GraphSet, chi: usize, mode: Mode) -> GraphSet {
    let keep = par::map(mode, set.members.iter().collect(), |g| chromatic_number(g) == chi);
    let members = set
        .members
        .iter()
        .zip(keep)
        .filter_map(|(g, k)| k.then(|| g.clone()))
        .collect();
    GraphSet {
        members,
        descriptor: SetDescriptor {
            n: set.descriptor.n,
            constraint: SetConstraint::Chromatic(chi),
        },
    }
}

/// Reads one graph per non-empty line.
pub fn read_graph6_lines(text: &str) -> Result<Vec<Graph>> {
    let mut out = Vec::new();
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if !content.is_empty() {
            out.push(parse_graph6(content).map_err(|e| match e {
                Error::Parse { offset, message } => Error::parse(line_start + offset, message),
                other => other,
            })?);
        }
        line_start += line.len();
    }
    Ok(out)
}

/// On-disk cache of enumerated sets, one graph6 file per `(n, χ)` key.
#[derive(Debug, Clone)]
pub struct GraphCache {
    dir: PathBuf,
    mode: Mode,
}

impl GraphCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        GraphCache {
            dir: dir.into(),
            mode: Mode::default(),
        }
    }

    /// Uses `$XYQAOA_CACHE_DIR`, falling back to a directory under the system temp dir.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("xyqaoa-cache"));
        GraphCache::new(dir)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, n: usize, chi: Option<usize>) -> PathBuf {
        match chi {
            Some(chi) => self.dir.join(format!("chromatic_n{n}_chi{chi}.g6")),
            None => self.dir.join(format!("connected_n{n}.g6")),
        }
    }

    fn load_or<F>(&self, path: PathBuf, descriptor: SetDescriptor, build: F) -> Result<GraphSet>
    where
        F: FnOnce() -> Result<GraphSet>,
    {
        if let Ok(text) = fs::read_to_string(&path) {
            let members = read_graph6_lines(&text)?;
            return Ok(GraphSet {
                members,
                descriptor,
            });
        }
        let set = build()?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("g6.tmp");
        fs::write(&tmp, set.to_graph6_lines())?;
        fs::rename(&tmp, &path)?;
        Ok(set)
    }

    pub fn connected(&self, n: usize) -> Result<GraphSet> {
        let descriptor = SetDescriptor {
            n,
            constraint: SetConstraint::AllConnected,
        };
        self.load_or(self.path_for(n, None), descriptor, || {
            enumerate_connected_graphs_with(n, self.mode)
        })
    }

    pub fn chromatic(&self, n: usize, chi: usize) -> Result<GraphSet> {
        let descriptor = SetDescriptor {
            n,
            constraint: SetConstraint::Chromatic(chi),
        };
        self.load_or(self.path_for(n, Some(chi)), descriptor, || {
            let all = self.connected(n)?;
            Ok(filter_by_chromatic_with(&all, chi, self.mode))
        })
    }
}

//! Sampling realizations of the intersection graph `H = K ∩ G`.
//!
//! A realization is drawn from a single [`RngStream`] in a fixed order:
//! node classes, then key rings in node order, then one channel draw per
//! unordered pair `(x, y)`, `x < y`, in lexicographic order. The channel
//! draw is consumed for every pair whatever the key layer says, so two runs
//! with the same stream produce the same graph.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::model::{ClassDistribution, KeyProfile, ModelParams};

/// Deterministic random stream identified by `(seed, index)`.
///
/// Backed by ChaCha8 with the index selecting one of its 2^64 streams, so the
/// sequence is platform independent and unaffected by thread scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { inner }
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.bits53() as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn bits53(&mut self) -> u64 {
        self.inner.next_u64() >> 11
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Class label of every node, `t_1..t_n` (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAssignment {
    classes: Vec<usize>,
}

impl ClassAssignment {
    pub fn new(classes: Vec<usize>, num_classes: usize) -> Result<Self> {
        if let Some(x) = classes.iter().position(|&c| c >= num_classes) {
            return Err(invalid(format!(
                "node {x} has class {} but only {num_classes} classes exist",
                classes[x] + 1
            )));
        }
        Ok(Self { classes })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.classes[node]
    }
}

/// A node's keys, sorted and distinct, all in `[0, P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyRing {
    keys: Vec<u32>,
    owner_class: usize,
}

impl KeyRing {
    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn owner_class(&self) -> usize {
        self.owner_class
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Sampled graph with class labels and sorted, duplicate-free neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    num_classes: usize,
    classes: ClassAssignment,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl IntersectionGraph {
    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// out-of-range endpoints and repeated edges.
    pub fn from_edges(
        classes: ClassAssignment,
        num_classes: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let classes = ClassAssignment::new(classes.classes, num_classes)?;
        let n = classes.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) is outside a {n}-node graph")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("edge ({u}, {}) listed twice", w[0])));
            }
        }
        Ok(Self {
            num_classes,
            classes,
            adjacency,
            edge_count: edges.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn classes(&self) -> &ClassAssignment {
        &self.classes
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Writes the plain-text edge list: `n r`, then the 1-based class of
    /// every node on one line, then one `u v` line per edge with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n(), self.num_classes)?;
        let labels: Vec<String> = self
            .classes
            .as_slice()
            .iter()
            .map(|c| (c + 1).to_string())
            .collect();
        writeln!(out, "{}", labels.join(" "))?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Parses the format produced by [`IntersectionGraph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let bad = |line: usize, reason: &str| Error::GraphDump {
            line: line + 1,
            reason: reason.to_string(),
        };
        let (i, header) = lines.next().ok_or_else(|| bad(0, "missing header"))?;
        let header = header?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad(i, "header must be `n r`"))?;
        let [n, r] = nums[..] else {
            return Err(bad(i, "header must be `n r`"));
        };
        let (i, class_line) = lines.next().ok_or_else(|| bad(1, "missing class line"))?;
        let labels: Vec<usize> = class_line?
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad(i, "class labels must be integers"))?;
        if labels.len() != n {
            return Err(bad(i, "class line length differs from n"));
        }
        if labels.iter().any(|&c| c == 0 || c > r) {
            return Err(bad(i, "class label outside 1..=r"));
        }
        let classes = ClassAssignment::new(labels.iter().map(|c| c - 1).collect(), r)?;
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let pair: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| bad(i, "edge endpoints must be integers"))?;
            let [u, v] = pair[..] else {
                return Err(bad(i, "edge line must be `u v`"));
            };
            edges.push((u, v));
        }
        Self::from_edges(classes, r, &edges)
    }
}

/// Draws every node's class independently from `μ`, one draw per node in
/// node order.
pub fn sample_classes(n: usize, dist: &ClassDistribution, rng: &mut RngStream) -> ClassAssignment {
    let probs = dist.probs();
    let last = probs.len() - 1;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let classes = (0..n)
        .map(|_| {
            let u = rng.unit();
            cumulative[..last].iter().position(|&c| u < c).unwrap_or(last)
        })
        .collect();
    ClassAssignment { classes }
}

/// Uniform `size`-subset of `[0, pool)` by Floyd's algorithm, returned sorted.
///
/// Costs `O(size)` draws regardless of the pool size.
pub fn sample_subset(size: u32, pool: u32, rng: &mut RngStream) -> Result<Vec<u32>> {
    if size > pool {
        return Err(invalid(format!(
            "cannot draw {size} distinct keys from a pool of {pool}"
        )));
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(size as usize);
    for j in (pool - size)..pool {
        let t = rng.random_range(0..=j);
        let pick = match chosen.binary_search(&t) {
            Ok(_) => j,
            Err(_) => t,
        };
        // j exceeds every element chosen so far.
        match chosen.binary_search(&pick) {
            Ok(_) => unreachable!("Floyd's algorithm never repeats a key"),
            Err(at) => chosen.insert(at, pick),
        }
    }
    Ok(chosen)
}

pub fn sample_key_ring(class: usize, keys: &KeyProfile, rng: &mut RngStream) -> KeyRing {
    let keys = sample_subset(keys.ring_size(class), keys.pool_size(), rng)
        .expect("validated profile has ring sizes within the pool");
    KeyRing {
        keys,
        owner_class: class,
    }
}

/// Whether the two rings share a key. Probes the smaller ring against a hash
/// set built on the larger one.
pub fn key_adjacency(a: &KeyRing, b: &KeyRing) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let members: HashSet<u32> = large.keys.iter().copied().collect();
    small.keys.iter().any(|k| members.contains(k))
}

/// Upper-triangular bit matrix of the key layer `K`.
struct KeyLayer {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl KeyLayer {
    /// Groups ring entries by key (the key → holders index) and marks every
    /// pair of holders of a common key.
    fn build(rings: &[KeyRing], pool: u32) -> Self {
        let n = rings.len();
        let words_per_row = n.div_ceil(64);
        let mut layer = Self {
            words_per_row,
            bits: vec![0; n * words_per_row],
        };
        let entries: usize = rings.iter().map(KeyRing::len).sum();

        if (pool as usize) <= 16 * entries {
            // Counting sort by key; holders come out in node order.
            let mut start = vec![0u32; pool as usize + 1];
            for ring in rings {
                for &k in &ring.keys {
                    start[k as usize + 1] += 1;
                }
            }
            for k in 0..pool as usize {
                start[k + 1] += start[k];
            }
            let mut fill = start.clone();
            let mut holders = vec![0u32; entries];
            for (x, ring) in rings.iter().enumerate() {
                for &k in &ring.keys {
                    holders[fill[k as usize] as usize] = x as u32;
                    fill[k as usize] += 1;
                }
            }
            for k in 0..pool as usize {
                layer.mark_holders(&holders[start[k] as usize..start[k + 1] as usize]);
            }
        } else {
            let mut packed: Vec<u64> = Vec::with_capacity(entries);
            for (x, ring) in rings.iter().enumerate() {
                packed.extend(ring.keys.iter().map(|&k| ((k as u64) << 32) | x as u64));
            }
            packed.sort_unstable();
            let mut holders = Vec::new();
            for group in packed.chunk_by(|a, b| a >> 32 == b >> 32) {
                holders.clear();
                holders.extend(group.iter().map(|e| *e as u32));
                layer.mark_holders(&holders);
            }
        }
        layer
    }

    fn mark_holders(&mut self, holders: &[u32]) {
        for (i, &x) in holders.iter().enumerate() {
            let row = x as usize * self.words_per_row;
            for &y in &holders[i + 1..] {
                let y = y as usize;
                self.bits[row + y / 64] |= 1 << (y % 64);
            }
        }
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.words_per_row..(x + 1) * self.words_per_row]
    }
}

fn push_bits(out: &mut Vec<(usize, usize)>, x: usize, word: usize, mut bits: u64) {
    while bits != 0 {
        out.push((x, word * 64 + bits.trailing_zeros() as usize));
        bits &= bits - 1;
    }
}

/// A realization together with its two constituent layers.
#[derive(Debug, Clone)]
pub struct LayeredSample {
    pub graph: IntersectionGraph,
    pub rings: Vec<KeyRing>,
    /// Pairs `(x, y)`, `x < y`, sharing a key.
    pub key_edges: Vec<(usize, usize)>,
    /// Pairs `(x, y)`, `x < y`, whose channel is on.
    pub channel_edges: Vec<(usize, usize)>,
}

/// Samples one realization of `H(n; μ, K, P, α)`.
pub fn generate(params: &ModelParams, rng: &mut RngStream) -> IntersectionGraph {
    let classes = sample_classes(params.n(), params.dist(), rng);
    generate_inner(params, classes, rng, None)
}

/// Like [`generate`] but with the class of every node fixed in advance; the
/// stream is consumed starting with the key rings.
pub fn generate_with_classes(
    params: &ModelParams,
    classes: ClassAssignment,
    rng: &mut RngStream,
) -> Result<IntersectionGraph> {
    check_classes(params, &classes)?;
    Ok(generate_inner(params, classes, rng, None))
}

/// Like [`generate`] but also materializes the key and channel layers.
/// Consumes the stream identically, so the graph equals `generate`'s.
pub fn generate_with_layers(params: &ModelParams, rng: &mut RngStream) -> LayeredSample {
    let classes = sample_classes(params.n(), params.dist(), rng);
    let mut layers = Layers::default();
    let graph = generate_inner(params, classes, rng, Some(&mut layers));
    LayeredSample {
        graph,
        rings: layers.rings,
        key_edges: layers.key_edges,
        channel_edges: layers.channel_edges,
    }
}

fn check_classes(params: &ModelParams, classes: &ClassAssignment) -> Result<()> {
    if classes.len() != params.n() {
        return Err(invalid(format!(
            "class assignment covers {} nodes, model has {}",
            classes.len(),
            params.n()
        )));
    }
    ClassAssignment::new(classes.classes.clone(), params.num_classes()).map(|_| ())
}

#[derive(Default)]
struct Layers {
    rings: Vec<KeyRing>,
    key_edges: Vec<(usize, usize)>,
    channel_edges: Vec<(usize, usize)>,
}

fn generate_inner(
    params: &ModelParams,
    classes: ClassAssignment,
    rng: &mut RngStream,
    mut layers: Option<&mut Layers>,
) -> IntersectionGraph {
    let n = params.n();
    let r = params.num_classes();
    let rings: Vec<KeyRing> = classes
        .as_slice()
        .iter()
        .map(|&c| sample_key_ring(c, params.keys(), rng))
        .collect();
    let key_layer = KeyLayer::build(&rings, params.keys().pool_size());

    // unit() < α  ⇔  (53-bit draw) < ⌈α·2^53⌉, both sides exact.
    let cutoff: Vec<u64> = (0..r * r)
        .map(|ij| (params.channel().get(ij / r, ij % r) * (1u64 << 53) as f64).ceil() as u64)
        .collect();
    let labels = classes.as_slice();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edge_count = 0;

    for x in 0..n {
        let row_cutoff = &cutoff[labels[x] * r..(labels[x] + 1) * r];
        let key_row = key_layer.row(x);
        let mut y = x + 1;
        while y < n {
            // Channel draws for one 64-column word of row x, then AND with
            // the key bits of the same word.
            let word = y / 64;
            let end = ((word + 1) * 64).min(n);
            let mut channel_on = 0u64;
            for (z, &label) in (y..end).zip(&labels[y..end]) {
                channel_on |= u64::from(rng.bits53() < row_cutoff[label]) << (z % 64);
            }
            if let Some(layers) = layers.as_deref_mut() {
                push_bits(&mut layers.channel_edges, x, word, channel_on);
                push_bits(&mut layers.key_edges, x, word, key_row[word] & (!0u64 << (y % 64)));
            }
            let mut hits = channel_on & key_row[word];
            while hits != 0 {
                let z = word * 64 + hits.trailing_zeros() as usize;
                // x ascends in the outer loop, so both lists stay sorted.
                adjacency[x].push(z);
                adjacency[z].push(x);
                edge_count += 1;
                hits &= hits - 1;
            }
            y = end;
        }
    }

    if let Some(layers) = layers {
        layers.rings = rings;
    }
    IntersectionGraph {
        num_classes: r,
        classes,
        adjacency,
        edge_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pairwise_key_prob, ChannelMatrix};
    use proptest::prelude::*;
    use rand::RngCore;

    fn params(k: [u32; 2], pool: u32, alpha: [[f64; 2]; 2], n: usize) -> ModelParams {
        ModelParams::new(
            n,
            ClassDistribution::new(vec![0.5, 0.5]).unwrap(),
            KeyProfile::relaxed(k.to_vec(), pool).unwrap(),
            ChannelMatrix::new(alpha.iter().map(|r| r.to_vec()).collect()).unwrap(),
        )
        .unwrap()
    }

    fn ring(keys: &[u32]) -> KeyRing {
        KeyRing {
            keys: keys.to_vec(),
            owner_class: 0,
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, idx| {
            let mut rng = RngStream::new(seed, idx);
            (0..8).map(|_| rng.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn stream_values_are_pinned() {
        // Guards cross-platform stability of the stream construction.
        let mut rng = RngStream::new(0, 0);
        let first = rng.next_u64();
        let mut plain = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(first, plain.next_u64());
    }

    #[test]
    fn single_class_assignment() {
        let dist = ClassDistribution::new(vec![1.0]).unwrap();
        let a = sample_classes(50, &dist, &mut RngStream::new(1, 0));
        assert!(a.as_slice().iter().all(|&c| c == 0));
    }

    #[test]
    fn near_degenerate_assignment() {
        let dist = ClassDistribution::new(vec![1.0 - 1e-9, 1e-9]).unwrap();
        let a = sample_classes(100, &dist, &mut RngStream::new(2024, 0));
        assert!(a.as_slice().iter().all(|&c| c == 0));
    }

    #[test]
    fn balanced_assignment_concentrates() {
        let n = 100_000;
        let dist = ClassDistribution::new(vec![0.5, 0.5]).unwrap();
        let a = sample_classes(n, &dist, &mut RngStream::new(11, 0));
        let frac = a.as_slice().iter().filter(|&&c| c == 0).count() as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn full_pool_ring() {
        let mut rng = RngStream::new(3, 0);
        assert_eq!(sample_subset(10, 10, &mut rng).unwrap(), (0..10).collect::<Vec<_>>());
        assert!(sample_subset(11, 10, &mut rng).is_err());
    }

    #[test]
    fn single_key_ring_is_uniform() {
        let trials = 100_000;
        let mut rng = RngStream::new(5, 0);
        let zeros = (0..trials)
            .filter(|_| sample_subset(1, 2, &mut rng).unwrap() == [0])
            .count();
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((zeros as f64 / trials as f64 - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn forced_overlap_always_intersects() {
        let profile = KeyProfile::relaxed(vec![6, 7], 12).unwrap();
        let mut rng = RngStream::new(9, 0);
        for _ in 0..1000 {
            let a = sample_key_ring(0, &profile, &mut rng);
            let b = sample_key_ring(1, &profile, &mut rng);
            assert!(key_adjacency(&a, &b));
        }
    }

    #[test]
    fn key_adjacency_examples() {
        assert!(!key_adjacency(&ring(&[1, 2]), &ring(&[3, 4])));
        assert!(key_adjacency(&ring(&[1, 2]), &ring(&[2, 3])));
        assert!(key_adjacency(&ring(&[7]), &ring(&[1, 3, 5, 7, 9])));
    }

    #[test]
    fn key_adjacency_frequency_matches_formula() {
        let samples = 100_000;
        let profile = KeyProfile::new(vec![20, 25], 10_000).unwrap();
        let mut rng = RngStream::new(17, 0);
        let hits = (0..samples)
            .filter(|_| {
                let a = sample_key_ring(0, &profile, &mut rng);
                let b = sample_key_ring(1, &profile, &mut rng);
                key_adjacency(&a, &b)
            })
            .count();
        let p = pairwise_key_prob(20, 25, 10_000).unwrap();
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        let freq = hits as f64 / samples as f64;
        assert!((freq - p).abs() <= 3.0 * sigma, "{freq} vs {p}");
    }

    #[test]
    fn channel_off_gives_empty_graph() {
        let p = params([10, 15], 1000, [[0.0, 0.0], [0.0, 0.0]], 60);
        let g = generate(&p, &mut RngStream::new(1, 0));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn forced_layers_give_complete_graph() {
        let p = params([6, 6], 10, [[1.0, 1.0], [1.0, 1.0]], 40);
        let g = generate(&p, &mut RngStream::new(1, 0));
        assert_eq!(g.edge_count(), 40 * 39 / 2);
        assert!(g.adjacency().iter().all(|l| l.len() == 39));
    }

    #[test]
    fn zero_diagonal_gives_bipartite_graph() {
        let p = params([50, 55], 10_000, [[0.0, 0.5], [0.5, 0.0]], 200);
        let g = generate(&p, &mut RngStream::new(4, 0));
        assert!(g.edge_count() > 0);
        for (u, v) in g.edges() {
            assert_ne!(g.classes().class_of(u), g.classes().class_of(v));
        }
    }

    #[test]
    fn layered_generation_matches_and_intersects() {
        for (pool, seed) in [(10_000, 1), (300, 2), (60, 3)] {
            let p = params([5, 8], pool, [[0.3, 0.6], [0.6, 0.9]], 120);
            let plain = generate(&p, &mut RngStream::new(seed, 0));
            let layered = generate_with_layers(&p, &mut RngStream::new(seed, 0));
            assert_eq!(plain, layered.graph);

            let key: HashSet<_> = layered.key_edges.iter().copied().collect();
            let channel: HashSet<_> = layered.channel_edges.iter().copied().collect();
            let both: HashSet<_> = key.intersection(&channel).copied().collect();
            let h: HashSet<_> = plain.edges().collect();
            assert_eq!(h, both);

            // The bit-matrix key layer agrees with pairwise ring probing.
            let rings = &layered.rings;
            for x in 0..rings.len() {
                for y in x + 1..rings.len() {
                    assert_eq!(key.contains(&(x, y)), key_adjacency(&rings[x], &rings[y]));
                }
            }
        }
    }

    #[test]
    fn fixed_classes_are_respected() {
        let p = params([5, 8], 1000, [[0.5, 0.5], [0.5, 0.5]], 4);
        let classes = ClassAssignment::new(vec![1, 0, 1, 1], 2).unwrap();
        let g = generate_with_classes(&p, classes.clone(), &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(g.classes(), &classes);
        let short = ClassAssignment::new(vec![1, 0], 2).unwrap();
        assert!(generate_with_classes(&p, short, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let p = params([10, 15], 1000, [[0.5, 0.5], [0.5, 0.5]], 50);
        let g = generate(&p, &mut RngStream::new(8, 2));
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("50 2"));
        assert_eq!(lines.next().unwrap().split(' ').count(), 50);
        assert_eq!(lines.count(), g.edge_count());
        let back = IntersectionGraph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_rejects_garbage() {
        for text in ["", "3\n1 1 1\n", "3 1\n1 1\n", "3 1\n1 1 2\n", "3 1\n1 1 1\n0 0\n", "3 1\n1 1 1\n0 x\n"] {
            assert!(IntersectionGraph::read_edge_list(text.as_bytes()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn from_edges_validation() {
        let classes = ClassAssignment::new(vec![0, 0, 0], 1).unwrap();
        assert!(IntersectionGraph::from_edges(classes.clone(), 1, &[(0, 0)]).is_err());
        assert!(IntersectionGraph::from_edges(classes.clone(), 1, &[(0, 3)]).is_err());
        assert!(IntersectionGraph::from_edges(classes.clone(), 1, &[(0, 1), (1, 0)]).is_err());
        let g = IntersectionGraph::from_edges(classes, 1, &[(2, 0), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.edge_count(), 2);
    }

    proptest! {
        #[test]
        fn subset_is_distinct_sorted_in_range(size in 0u32..80, extra in 0u32..500, seed: u64) {
            let pool = size + extra;
            prop_assume!(pool > 0);
            let keys = sample_subset(size, pool, &mut RngStream::new(seed, 0)).unwrap();
            prop_assert_eq!(keys.len(), size as usize);
            prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(keys.iter().all(|&k| k < pool));
        }

        #[test]
        fn generated_graph_is_well_formed(seed: u64, idx in 0u64..1000, n in 2usize..80, a in 0.0f64..=1.0) {
            let p = params([3, 9], 200, [[a, 0.5], [0.5, 1.0 - a]], n);
            let g = generate(&p, &mut RngStream::new(seed, idx));
            let mut degree_sum = 0;
            for u in 0..g.n() {
                let list = g.neighbors(u);
                prop_assert!(list.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(!list.contains(&u));
                for &v in list {
                    prop_assert!(g.neighbors(v).binary_search(&u).is_ok());
                }
                degree_sum += list.len();
            }
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
            prop_assert_eq!(generate(&p, &mut RngStream::new(seed, idx)), g);
        }
    }
}

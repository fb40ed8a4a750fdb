//! Structural queries on a sampled graph.

use crate::graphgen::IntersectionGraph;

/// Isolated-node counts, total and per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolationCounts {
    pub total: usize,
    pub per_class: Vec<usize>,
}

pub fn count_isolated(g: &IntersectionGraph) -> IsolationCounts {
    let mut per_class = vec![0; g.num_classes()];
    for (node, neighbors) in g.adjacency().iter().enumerate() {
        if neighbors.is_empty() {
            per_class[g.classes().class_of(node)] += 1;
        }
    }
    IsolationCounts {
        total: per_class.iter().sum(),
        per_class,
    }
}

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
            components: len,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` if the two were already in one set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let root = self.find(x);
        self.size[root]
    }

    pub fn largest_set(&self) -> usize {
        self.parent
            .iter()
            .enumerate()
            .filter(|(i, p)| *i == **p)
            .map(|(i, _)| self.size[i])
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connectivity {
    pub is_connected: bool,
    pub component_count: usize,
    pub largest_component: usize,
}

pub fn connectivity(g: &IntersectionGraph) -> Connectivity {
    let mut uf = UnionFind::new(g.n());
    for (u, v) in g.edges() {
        uf.union(u, v);
    }
    Connectivity {
        is_connected: uf.components() == 1,
        component_count: uf.components(),
        largest_component: uf.largest_set(),
    }
}

/// Edge counts by unordered class pair, stored symmetrically. The diagonal
/// holds intra-class edges; the upper triangle sums to the edge count.
pub fn class_edge_audit(g: &IntersectionGraph) -> Vec<Vec<usize>> {
    let r = g.num_classes();
    let mut counts = vec![vec![0; r]; r];
    let classes = g.classes();
    for (u, v) in g.edges() {
        let (a, b) = (classes.class_of(u), classes.class_of(v));
        counts[a][b] += 1;
        if a != b {
            counts[b][a] += 1;
        }
    }
    counts
}

/// Everything recorded about one sampled graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub isolated_count: usize,
    pub class_isolated_counts: Vec<usize>,
    pub is_connected: bool,
    pub component_count: usize,
    pub largest_component: usize,
    pub intra_class_edge_counts: Vec<usize>,
    pub edge_count: usize,
}

pub fn analyze(g: &IntersectionGraph) -> TrialOutcome {
    let isolated = count_isolated(g);
    let conn = connectivity(g);
    let audit = class_edge_audit(g);
    TrialOutcome {
        isolated_count: isolated.total,
        class_isolated_counts: isolated.per_class,
        is_connected: conn.is_connected,
        component_count: conn.component_count,
        largest_component: conn.largest_component,
        intra_class_edge_counts: (0..g.num_classes()).map(|i| audit[i][i]).collect(),
        edge_count: g.edge_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::{generate, ClassAssignment, RngStream};
    use crate::model::{ChannelMatrix, ClassDistribution, KeyProfile, ModelParams};
    use proptest::prelude::*;

    fn graph(classes: Vec<usize>, r: usize, edges: &[(usize, usize)]) -> IntersectionGraph {
        let classes = ClassAssignment::new(classes, r).unwrap();
        IntersectionGraph::from_edges(classes, r, edges).unwrap()
    }

    fn complete(n: usize) -> IntersectionGraph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        graph(vec![0; n], 1, &edges)
    }

    #[test]
    fn isolation_examples() {
        let empty = graph(vec![0, 1, 1, 0, 1], 2, &[]);
        assert_eq!(
            count_isolated(&empty),
            IsolationCounts {
                total: 5,
                per_class: vec![2, 3]
            }
        );
        assert_eq!(count_isolated(&complete(6)).total, 0);
        let star = graph(vec![0; 7], 1, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(count_isolated(&star).total, 2);
    }

    #[test]
    fn connectivity_examples() {
        let path = graph(vec![0; 6], 1, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        let c = connectivity(&path);
        assert!(c.is_connected);
        assert_eq!((c.component_count, c.largest_component), (1, 6));

        let triangles = graph(
            vec![0; 6],
            1,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
        );
        let c = connectivity(&triangles);
        assert!(!c.is_connected);
        assert_eq!((c.component_count, c.largest_component), (2, 3));

        let empty = graph(vec![0; 3], 1, &[]);
        assert_eq!(connectivity(&empty).component_count, 3);
        assert_eq!(connectivity(&empty).largest_component, 1);
    }

    #[test]
    fn audit_examples() {
        let g = graph(vec![0, 0, 1, 1], 2, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(class_edge_audit(&g), vec![vec![1, 2], vec![2, 1]]);
        let single = complete(5);
        assert_eq!(class_edge_audit(&single), vec![vec![10]]);
    }

    #[test]
    fn union_find_sets() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.components(), 3);
        assert_eq!(uf.set_size(4), 2);
        assert_eq!(uf.largest_set(), 2);
        assert!(uf.union(1, 4));
        assert_eq!(uf.largest_set(), 4);
        assert_eq!(uf.find(0), uf.find(3));
    }

    fn random_params(n: usize, alpha: f64) -> ModelParams {
        ModelParams::new(
            n,
            ClassDistribution::new(vec![0.3, 0.7]).unwrap(),
            KeyProfile::new(vec![4, 7], 120).unwrap(),
            ChannelMatrix::new(vec![vec![alpha, alpha / 2.0], vec![alpha / 2.0, alpha]]).unwrap(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn outcome_invariants(seed: u64, n in 2usize..120, alpha in 0.0f64..=1.0) {
            let g = generate(&random_params(n, alpha), &mut RngStream::new(seed, 0));
            let o = analyze(&g);
            prop_assert_eq!(o.isolated_count, o.class_isolated_counts.iter().sum::<usize>());
            prop_assert_eq!(o.is_connected, o.component_count == 1);
            if o.is_connected {
                prop_assert_eq!(o.isolated_count, 0);
            }
            let audit = class_edge_audit(&g);
            let upper: usize = (0..2).flat_map(|i| (i..2).map(move |j| (i, j))).map(|(i, j)| audit[i][j]).sum();
            prop_assert_eq!(upper, g.edge_count());
            prop_assert_eq!(audit[0][1], audit[1][0]);
        }

        #[test]
        fn isolation_invariant_under_relabeling(seed: u64, n in 2usize..60, shift in 0usize..60) {
            let g = generate(&random_params(n, 0.4), &mut RngStream::new(seed, 1));
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let mut classes = vec![0; n];
            for u in 0..n {
                classes[perm[u]] = g.classes().class_of(u);
            }
            let edges: Vec<_> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
            let relabeled = graph(classes, 2, &edges);
            prop_assert_eq!(count_isolated(&relabeled), count_isolated(&g));
            prop_assert_eq!(connectivity(&relabeled), connectivity(&g));
        }
    }
}

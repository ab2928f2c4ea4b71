//! Immutable undirected graphs.
//!
//! Complete graphs are stored implicitly so that the large complete-graph
//! experiments (n in the thousands) do not materialise n^2 adjacency entries.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Topology {
    Complete,
    Adjacency(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    topology: Topology,
}

impl Graph {
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(n));
        }
        Ok(Self {
            n,
            topology: Topology::Complete,
        })
    }

    /// Builds a graph from unordered pairs. Duplicate edges are collapsed.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(n));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidEdge(u, v, n));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            n,
            topology: Topology::Adjacency(adj),
        })
    }

    /// Parses the edge-list text format: one `u v` pair per line, `#`
    /// comments and blank lines ignored. The node count is one more than the
    /// largest id unless `n` is given.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next_id = || -> Result<usize> {
                let tok = parts.next().ok_or_else(|| Error::EdgeListParse {
                    line: idx + 1,
                    msg: "expected two node ids".into(),
                })?;
                tok.parse().map_err(|_| Error::EdgeListParse {
                    line: idx + 1,
                    msg: format!("invalid node id {tok:?}"),
                })
            };
            let u = next_id()?;
            let v = next_id()?;
            if parts.next().is_some() {
                return Err(Error::EdgeListParse {
                    line: idx + 1,
                    msg: "trailing tokens".into(),
                });
            }
            edges.push((u, v));
        }
        let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edge_list(n.unwrap_or(inferred), &edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_complete(&self) -> bool {
        match &self.topology {
            Topology::Complete => true,
            Topology::Adjacency(adj) => adj.iter().all(|l| l.len() == self.n - 1),
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        match &self.topology {
            Topology::Complete => self.n - 1,
            Topology::Adjacency(adj) => adj[i].len(),
        }
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Neighbors of `i` in increasing order.
    pub fn neighbors(&self, i: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.topology {
            Topology::Complete => Box::new((0..self.n).filter(move |&j| j != i)),
            Topology::Adjacency(adj) => Box::new(adj[i].iter().copied()),
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        match &self.topology {
            Topology::Complete => i != j && i < self.n && j < self.n,
            Topology::Adjacency(adj) => adj[i].binary_search(&j).is_ok(),
        }
    }

    /// Uniform neighbor of `i`: each of the `n_i` neighbors has probability `1/n_i`.
    pub fn sample_neighbor<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<usize> {
        match &self.topology {
            Topology::Complete => {
                let j = rng.random_range(0..self.n - 1);
                Ok(if j >= i { j + 1 } else { j })
            }
            Topology::Adjacency(adj) => {
                let list = &adj[i];
                if list.is_empty() {
                    return Err(Error::NoNeighbor(i));
                }
                Ok(list[rng.random_range(0..list.len())])
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        if let Topology::Complete = self.topology {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == self.n
    }

    /// Brandes betweenness over unordered source/target pairs.
    pub fn betweenness_centrality(&self) -> CentralityScores {
        let n = self.n;
        if self.is_complete() {
            return CentralityScores::from_raw(vec![0.0; n]);
        }
        let mut raw = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::with_capacity(n);
        let mut dist = vec![-1i64; n];
        let mut sigma = vec![0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut delta = vec![0f64; n];
        for s in 0..n {
            order.clear();
            dist.fill(-1);
            sigma.fill(0.0);
            delta.fill(0.0);
            preds.iter_mut().for_each(Vec::clear);
            dist[s] = 0;
            sigma[s] = 1.0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for w in self.neighbors(v) {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            while let Some(w) = order.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    raw[w] += delta[w];
                }
            }
        }
        // every unordered pair was visited from both endpoints
        raw.iter_mut().for_each(|x| *x /= 2.0);
        CentralityScores::from_raw(raw)
    }
}

/// Betweenness scores with a max-normalised copy in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl CentralityScores {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let max = raw.iter().copied().fold(0.0, f64::max);
        let normalized = if max > 0.0 {
            raw.iter().map(|x| x / max).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Self { raw, normalized }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn complete_graph_sizes() {
        assert_eq!(Graph::complete(2).unwrap().edge_count(), 1);
        assert_eq!(Graph::complete(4).unwrap().edge_count(), 6);
        let g = Graph::complete(1000).unwrap();
        assert!((0..1000).all(|i| g.degree(i) == 999));
        assert_eq!(Graph::complete(1), Err(Error::InvalidSize(1)));
    }

    #[test]
    fn edge_list_construction() {
        let g = path3();
        assert_eq!(g.degree(1), 2);
        let g = Graph::from_edge_list(3, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(
            Graph::from_edge_list(2, &[(0, 0)]),
            Err(Error::InvalidEdge(0, 0, 2))
        );
        assert!(Graph::from_edge_list(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn parses_edge_list_text() {
        let g = Graph::parse_edge_list("# star\n0 1\n0 2\n\n  0 3\n", None).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.degree(0), 3);
        assert!(Graph::parse_edge_list("0 x\n", None).is_err());
        assert!(Graph::parse_edge_list("0 1 2\n", None).is_err());
        assert_eq!(
            Graph::parse_edge_list("0 1\n", Some(5))
                .unwrap()
                .node_count(),
            5
        );
    }

    #[test]
    fn connectivity() {
        assert!(Graph::complete(5).unwrap().is_connected());
        assert!(!Graph::from_edge_list(4, &[(0, 1)]).unwrap().is_connected());
        assert!(path3().is_connected());
    }

    #[test]
    fn sample_neighbor_errors_and_forced_choice() {
        let g = Graph::complete(2).unwrap();
        let mut rng = seeded(1);
        for _ in 0..100 {
            assert_eq!(g.sample_neighbor(0, &mut rng).unwrap(), 1);
        }
        let g = Graph::from_edge_list(3, &[(0, 1)]).unwrap();
        assert_eq!(g.sample_neighbor(2, &mut rng), Err(Error::NoNeighbor(2)));
    }

    #[test]
    fn complete_neighbor_sampling_passes_chi_square() {
        // chi-square 0.99 quantile with 99 degrees of freedom
        const CRIT_99: f64 = 134.6416;
        let g = Graph::complete(101).unwrap();
        let mut rng = seeded(42);
        let draws = 100_000;
        let mut counts = vec![0u32; 101];
        for _ in 0..draws {
            counts[g.sample_neighbor(0, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        let expected = draws as f64 / 100.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < CRIT_99, "chi2 = {chi2}");
    }

    #[test]
    fn path_neighbor_sampling_is_fair() {
        let g = path3();
        let mut rng = seeded(5);
        let draws = 10_000;
        let zeros = (0..draws)
            .filter(|_| g.sample_neighbor(1, &mut rng).unwrap() == 0)
            .count() as f64;
        let sigma = (draws as f64 * 0.25).sqrt();
        assert!((zeros - draws as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn betweenness_small_cases() {
        let b = Graph::complete(6).unwrap().betweenness_centrality();
        assert!(b.raw.iter().all(|&x| x == 0.0));
        assert!(b.normalized.iter().all(|&x| x == 0.0));
        assert_eq!(path3().betweenness_centrality().raw, vec![0.0, 1.0, 0.0]);
        let star = Graph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let b = star.betweenness_centrality();
        assert_eq!(b.raw, vec![6.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.normalized, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    /// Counts every shortest s-t path by depth-first enumeration and tallies
    /// interior visits.
    fn brute_force_betweenness(g: &Graph) -> Vec<f64> {
        let n = g.node_count();
        let bfs = |s: usize| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for w in g.neighbors(v) {
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        };
        fn walk(
            g: &Graph,
            v: usize,
            t: usize,
            left: usize,
            path: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if v == t {
                out.push(path.clone());
                return;
            }
            if left == 0 {
                return;
            }
            for w in g.neighbors(v) {
                if !path.contains(&w) {
                    path.push(w);
                    walk(g, w, t, left - 1, path, out);
                    path.pop();
                }
            }
        }
        let mut raw = vec![0.0; n];
        for s in 0..n {
            let d = bfs(s);
            for t in s + 1..n {
                if d[t] == usize::MAX {
                    continue;
                }
                let mut paths = Vec::new();
                walk(g, s, t, d[t], &mut vec![s], &mut paths);
                let total = paths.len() as f64;
                for p in &paths {
                    for &v in &p[1..p.len() - 1] {
                        raw[v] += 1.0 / total;
                    }
                }
            }
        }
        raw
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..=8).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..20).prop_map(move |pairs| {
                let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Graph::from_edge_list(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric(g in arb_graph()) {
            for i in 0..g.node_count() {
                for j in g.neighbors(i) {
                    prop_assert!(g.has_edge(j, i));
                    prop_assert!(i != j);
                }
            }
        }

        #[test]
        fn brandes_matches_path_enumeration(g in arb_graph()) {
            let fast = g.betweenness_centrality();
            let slow = brute_force_betweenness(&g);
            for (a, b) in fast.raw.iter().zip(&slow) {
                prop_assert!(*a >= 0.0);
                prop_assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", fast.raw, slow);
            }
            prop_assert!(fast.normalized.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}

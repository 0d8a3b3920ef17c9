use std::collections::VecDeque;

use thiserror::Error;

use super::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("region {0} is not in the graph")]
    UnknownRegion(usize),
    #[error("region {to} is unreachable from region {from}")]
    Unreachable { from: usize, to: usize },
}

/// All-pairs shortest hop counts over the undirected region graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopTable {
    regions: usize,
    dist: Vec<Option<u32>>,
}

impl HopTable {
    pub fn new(config: &ScenarioConfig) -> Self {
        let n = config.regions.len();
        let neighbours = adjacency_lists(n, &config.adjacency);
        let mut dist = vec![None; n * n];
        for source in 0..n {
            let row = bfs(&neighbours, source);
            dist[source * n..(source + 1) * n].copy_from_slice(&row);
        }
        Self { regions: n, dist }
    }

    pub fn len(&self) -> usize {
        self.regions
    }

    pub fn is_empty(&self) -> bool {
        self.regions == 0
    }

    pub fn hops(&self, from: usize, to: usize) -> Result<u32, GraphError> {
        for r in [from, to] {
            if r >= self.regions {
                return Err(GraphError::UnknownRegion(r));
            }
        }
        self.dist[from * self.regions + to].ok_or(GraphError::Unreachable { from, to })
    }

    /// Hop count if reachable; unknown regions read as unreachable.
    pub fn reach(&self, from: usize, to: usize) -> Option<u32> {
        self.hops(from, to).ok()
    }
}

/// Shortest-path hop count between two regions of `config`.
pub fn hops(origin: usize, dest: usize, config: &ScenarioConfig) -> Result<u32, GraphError> {
    let n = config.regions.len();
    for r in [origin, dest] {
        if r >= n {
            return Err(GraphError::UnknownRegion(r));
        }
    }
    let neighbours = adjacency_lists(n, &config.adjacency);
    bfs(&neighbours, origin)[dest].ok_or(GraphError::Unreachable { from: origin, to: dest })
}

fn adjacency_lists(n: usize, edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); n];
    for &[a, b] in edges {
        if a < n && b < n && a != b {
            lists[a].push(b);
            lists[b].push(a);
        }
    }
    for list in &mut lists {
        list.sort_unstable();
        list.dedup();
    }
    lists
}

fn bfs(neighbours: &[Vec<usize>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; neighbours.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(node) = queue.pop_front() {
        let d = dist[node].unwrap_or_default();
        for &next in &neighbours[node] {
            if dist[next].is_none() {
                dist[next] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

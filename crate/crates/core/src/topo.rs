//! Topological indicators of the directed stock graph.
//!
//! Distances are unweighted hop counts. Betweenness and clustering are
//! computed on the undirected simplification (edge iff a_ij or a_ji); degree
//! and closeness carry directed in/out variants. Unreachable pairs are
//! excluded from averages and diameters; closeness scales by the reachable
//! share so the printed formula is preserved on connected graphs.

use std::collections::VecDeque;

use thiserror::Error;

use crate::network::DirectedAdjacency;

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has {n} nodes; at least {needed} required")]
    TooFewNodes { n: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    Directed,
    Undirected,
}

const UNREACHABLE: u32 = u32::MAX;

/// All-pairs BFS distances with reachable-pair average and diameter.
#[derive(Debug, Clone)]
pub struct PathStats {
    n: usize,
    dist: Vec<u32>,
    pub avg_shortest_path: f64,
    pub diameter: usize,
    pub reachable_pairs: usize,
}

impl PathStats {
    pub fn distance(&self, from: usize, to: usize) -> Option<usize> {
        let d = self.dist[from * self.n + to];
        (d != UNREACHABLE).then_some(d as usize)
    }
}

fn bfs_from(adjacency: &[Vec<u32>], source: usize, dist: &mut [u32]) {
    dist.fill(UNREACHABLE);
    dist[source] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(source as u32);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v as usize];
        for &w in &adjacency[v as usize] {
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = dv + 1;
                queue.push_back(w);
            }
        }
    }
}

fn mode_neighbors(adj: &DirectedAdjacency, mode: GraphMode) -> Vec<Vec<u32>> {
    match mode {
        GraphMode::Directed => (0..adj.n()).map(|i| adj.out_neighbors(i).to_vec()).collect(),
        GraphMode::Undirected => adj.undirected_neighbors(),
    }
}

/// BFS from every node; average and diameter over reachable ordered pairs.
pub fn shortest_path_stats(
    adj: &DirectedAdjacency,
    mode: GraphMode,
) -> Result<PathStats, TopoError> {
    let n = adj.n();
    if n == 0 {
        return Err(TopoError::EmptyGraph);
    }
    let neighbors = mode_neighbors(adj, mode);
    let mut dist = vec![UNREACHABLE; n * n];
    let mut sum = 0u64;
    let mut pairs = 0usize;
    let mut diameter = 0usize;
    for source in 0..n {
        bfs_from(&neighbors, source, &mut dist[source * n..(source + 1) * n]);
        for target in 0..n {
            if target == source {
                continue;
            }
            let d = dist[source * n + target];
            if d != UNREACHABLE {
                sum += u64::from(d);
                pairs += 1;
                diameter = diameter.max(d as usize);
            }
        }
    }
    let avg = if pairs == 0 { 0.0 } else { sum as f64 / pairs as f64 };
    Ok(PathStats {
        n,
        dist,
        avg_shortest_path: avg,
        diameter,
        reachable_pairs: pairs,
    })
}

/// Per-node clustering on the undirected simplification:
/// C_i = 2 n_i / (k_i (k_i - 1)), zero when the degree is below 2.
pub fn clustering_coefficient(adj: &DirectedAdjacency) -> (Vec<f64>, f64) {
    let n = adj.n();
    let neighbors = adj.undirected_neighbors();
    let mut per_node = vec![0.0; n];
    for i in 0..n {
        let nbrs = &neighbors[i];
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        // Each neighbor-pair edge found twice via sorted-list intersections.
        let mut twice_links = 0usize;
        for &u in nbrs {
            twice_links += sorted_intersection_size(&neighbors[u as usize], nbrs);
        }
        per_node[i] = twice_links as f64 / (k * (k - 1)) as f64;
    }
    let mean = if n == 0 {
        0.0
    } else {
        per_node.iter().sum::<f64>() / n as f64
    };
    (per_node, mean)
}

fn sorted_intersection_size(a: &[u32], b: &[u32]) -> usize {
    let mut ia = 0;
    let mut ib = 0;
    let mut count = 0;
    while ia < a.len() && ib < b.len() {
        match a[ia].cmp(&b[ib]) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                ia += 1;
                ib += 1;
            }
        }
    }
    count
}

/// Directed edge density: sum a_ij / (N (N - 1)).
pub fn density(adj: &DirectedAdjacency) -> Result<f64, TopoError> {
    let n = adj.n();
    if n < 2 {
        return Err(TopoError::TooFewNodes { n, needed: 2 });
    }
    Ok(adj.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Per-node relative centralities. Under [`GraphMode::Undirected`] the out
/// and in variants coincide. Betweenness always uses the undirected
/// simplification.
#[derive(Debug, Clone)]
pub struct Centralities {
    pub out_degree: Vec<f64>,
    pub in_degree: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub out_closeness: Vec<f64>,
    pub in_closeness: Vec<f64>,
}

/// Brandes' accumulation over BFS shortest-path DAGs; returns the ordered-pair
/// dependency sums (twice the j < k sum).
fn brandes(neighbors: &[Vec<u32>]) -> Vec<f64> {
    let n = neighbors.len();
    let mut centrality = vec![0.0; n];
    let mut dist = vec![-1i64; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut predecessors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stack: Vec<u32> = Vec::with_capacity(n);
    let mut queue: VecDeque<u32> = VecDeque::new();

    for s in 0..n {
        dist.fill(-1);
        sigma.fill(0.0);
        delta.fill(0.0);
        for p in predecessors.iter_mut() {
            p.clear();
        }
        stack.clear();
        queue.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            let dv = dist[v as usize];
            for &w in &neighbors[v as usize] {
                let wi = w as usize;
                if dist[wi] < 0 {
                    dist[wi] = dv + 1;
                    queue.push_back(w);
                }
                if dist[wi] == dv + 1 {
                    sigma[wi] += sigma[v as usize];
                    predecessors[wi].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            let wi = w as usize;
            for &v in &predecessors[wi] {
                let vi = v as usize;
                delta[vi] += sigma[vi] / sigma[wi] * (1.0 + delta[wi]);
            }
            if wi != s {
                centrality[wi] += delta[wi];
            }
        }
    }
    centrality
}

fn closeness_from_bfs(neighbors: &[Vec<u32>]) -> Vec<f64> {
    let n = neighbors.len();
    let mut dist = vec![UNREACHABLE; n];
    let mut values = vec![0.0; n];
    for i in 0..n {
        bfs_from(neighbors, i, &mut dist);
        let mut sum = 0u64;
        let mut reach = 0usize;
        for (j, &d) in dist.iter().enumerate() {
            if j != i && d != UNREACHABLE {
                sum += u64::from(d);
                reach += 1;
            }
        }
        if reach > 0 {
            // (reach / sum) scaled by reach/(N-1): reduces to (N-1)/sum when
            // everything is reachable.
            values[i] = (reach * reach) as f64 / ((n - 1) as f64 * sum as f64);
        }
    }
    values
}

fn transpose(neighbors: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = neighbors.len();
    let mut reversed = vec![Vec::new(); n];
    for (i, nbrs) in neighbors.iter().enumerate() {
        for &j in nbrs {
            reversed[j as usize].push(i as u32);
        }
    }
    for r in reversed.iter_mut() {
        r.sort_unstable();
    }
    reversed
}

/// Relative degree, betweenness, and closeness centralities.
pub fn centralities(adj: &DirectedAdjacency, mode: GraphMode) -> Result<Centralities, TopoError> {
    let n = adj.n();
    if n < 3 {
        return Err(TopoError::TooFewNodes { n, needed: 3 });
    }
    let denom = (n - 1) as f64;
    let undirected = adj.undirected_neighbors();
    let pair_norm = ((n - 1) * (n - 2)) as f64;
    let betweenness: Vec<f64> = brandes(&undirected)
        .into_iter()
        .map(|b| b / pair_norm)
        .collect();

    match mode {
        GraphMode::Undirected => {
            let degree: Vec<f64> = undirected.iter().map(|nbrs| nbrs.len() as f64 / denom).collect();
            let closeness = closeness_from_bfs(&undirected);
            Ok(Centralities {
                out_degree: degree.clone(),
                in_degree: degree,
                betweenness,
                out_closeness: closeness.clone(),
                in_closeness: closeness,
            })
        }
        GraphMode::Directed => {
            let out_neighbors: Vec<Vec<u32>> =
                (0..n).map(|i| adj.out_neighbors(i).to_vec()).collect();
            let in_neighbors = transpose(&out_neighbors);
            Ok(Centralities {
                out_degree: (0..n)
                    .map(|i| adj.out_neighbors(i).len() as f64 / denom)
                    .collect(),
                in_degree: (0..n)
                    .map(|i| adj.in_neighbors(i).len() as f64 / denom)
                    .collect(),
                betweenness,
                out_closeness: closeness_from_bfs(&out_neighbors),
                in_closeness: closeness_from_bfs(&in_neighbors),
            })
        }
    }
}

/// Degree centralisation: sum of gaps to the maximum, over the star-graph
/// theoretical maximum N - 2.
pub fn degree_centralisation(per_node: &[f64]) -> Result<f64, TopoError> {
    let n = per_node.len();
    if n < 3 {
        return Err(TopoError::TooFewNodes { n, needed: 3 });
    }
    Ok(gap_sum(per_node) / (n - 2) as f64)
}

/// Betweenness centralisation: gap sum scaled by 1 / (N - 1).
pub fn betweenness_centralisation(per_node: &[f64]) -> Result<f64, TopoError> {
    let n = per_node.len();
    if n < 2 {
        return Err(TopoError::TooFewNodes { n, needed: 2 });
    }
    Ok(gap_sum(per_node) / (n - 1) as f64)
}

/// Closeness centralisation: gap sum scaled by 2 (N - 3) / ((N - 1)(N - 2)).
pub fn closeness_centralisation(per_node: &[f64]) -> Result<f64, TopoError> {
    let n = per_node.len();
    if n < 3 {
        return Err(TopoError::TooFewNodes { n, needed: 3 });
    }
    let scale = 2.0 * (n as f64 - 3.0) / ((n - 1) as f64 * (n - 2) as f64);
    Ok(scale * gap_sum(per_node))
}

fn gap_sum(per_node: &[f64]) -> f64 {
    let max = per_node.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    per_node.iter().map(|c| max - c).sum()
}

/// One stage's indicator row: the twelve reported quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTable {
    pub diameter: usize,
    pub density: f64,
    pub avg_shortest_path: f64,
    pub clustering: f64,
    pub mean_rel_degree: f64,
    pub mean_rel_betweenness: f64,
    pub mean_rel_closeness: f64,
    pub out_degree_centralisation: f64,
    pub in_degree_centralisation: f64,
    pub betweenness_centralisation: f64,
    pub out_closeness_centralisation: f64,
    pub in_closeness_centralisation: f64,
}

/// Computes the full indicator row for one stage network.
pub fn indicator_table(adj: &DirectedAdjacency) -> Result<IndicatorTable, TopoError> {
    let n = adj.n();
    if n < 3 {
        return Err(TopoError::TooFewNodes { n, needed: 3 });
    }
    let paths = shortest_path_stats(adj, GraphMode::Undirected)?;
    let (_, clustering) = clustering_coefficient(adj);
    let cent = centralities(adj, GraphMode::Directed)?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let degree_mean: Vec<f64> = cent
        .out_degree
        .iter()
        .zip(&cent.in_degree)
        .map(|(o, i)| 0.5 * (o + i))
        .collect();
    let closeness_mean: Vec<f64> = cent
        .out_closeness
        .iter()
        .zip(&cent.in_closeness)
        .map(|(o, i)| 0.5 * (o + i))
        .collect();

    Ok(IndicatorTable {
        diameter: paths.diameter,
        density: density(adj)?,
        avg_shortest_path: paths.avg_shortest_path,
        clustering,
        mean_rel_degree: mean(&degree_mean),
        mean_rel_betweenness: mean(&cent.betweenness),
        mean_rel_closeness: mean(&closeness_mean),
        out_degree_centralisation: degree_centralisation(&cent.out_degree)?,
        in_degree_centralisation: degree_centralisation(&cent.in_degree)?,
        betweenness_centralisation: betweenness_centralisation(&cent.betweenness)?,
        out_closeness_centralisation: closeness_centralisation(&cent.out_closeness)?,
        in_closeness_centralisation: closeness_centralisation(&cent.in_closeness)?,
    })
}

/// Column labels of the indicator CSV, matching the reported row set.
pub const INDICATOR_HEADER: &str = "stage,Network diameter,Network density,\
The average shortest path length,Clustering coefficient,\
Mean of relative degree centrality,Mean of relative betweenness centrality,\
Mean of relative closeness centrality,Out-degree centralisation,\
In-degree centralisation,Betweenness centralisation,\
Out-degree closeness centralisation,In-degree closeness centralisation";

/// One CSV data row for a stage.
pub fn indicator_csv_row(stage: &str, table: &IndicatorTable) -> String {
    format!(
        "{stage},{},{},{},{},{},{},{},{},{},{},{},{}",
        table.diameter,
        table.density,
        table.avg_shortest_path,
        table.clustering,
        table.mean_rel_degree,
        table.mean_rel_betweenness,
        table.mean_rel_closeness,
        table.out_degree_centralisation,
        table.in_degree_centralisation,
        table.betweenness_centralisation,
        table.out_closeness_centralisation,
        table.in_closeness_centralisation
    )
}

/// Parses a row written by [`indicator_csv_row`].
pub fn parse_indicator_csv_row(row: &str) -> Option<(String, IndicatorTable)> {
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 13 {
        return None;
    }
    let f = |i: usize| fields[i].parse::<f64>().ok();
    Some((
        fields[0].to_string(),
        IndicatorTable {
            diameter: fields[1].parse().ok()?,
            density: f(2)?,
            avg_shortest_path: f(3)?,
            clustering: f(4)?,
            mean_rel_degree: f(5)?,
            mean_rel_betweenness: f(6)?,
            mean_rel_closeness: f(7)?,
            out_degree_centralisation: f(8)?,
            in_degree_centralisation: f(9)?,
            betweenness_centralisation: f(10)?,
            out_closeness_centralisation: f(11)?,
            in_closeness_centralisation: f(12)?,
        },
    ))
}

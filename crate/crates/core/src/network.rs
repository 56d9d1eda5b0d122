//! Directed stock network assembled from per-stock penalized regressions.
//!
//! Each stock's returns are regressed on every other stock's returns with an
//! L1 penalty chosen by cross-validation; the edge i -> j exists when stock i
//! carries a nonzero coefficient in stock j's regression.

use std::io::{self, BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::ReturnPanel;
use crate::lasso::{self, LassoError, TOL_COEF};
use crate::util::mix_seed;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("panel has {0} stocks; at least 2 required")]
    TooFewStocks(usize),
    #[error("fit for target {0} appears more than once")]
    DuplicateTarget(usize),
    #[error("no fit for target {0}")]
    MissingTarget(usize),
    #[error("expected {expected} fits, found {found}")]
    FitCount { expected: usize, found: usize },
    #[error("fit for target {target} references stock {stock}, outside 0..{n}")]
    CoefficientOutOfRange {
        target: usize,
        stock: usize,
        n: usize,
    },
    #[error("fit for target {0} carries a self-coefficient")]
    SelfCoefficient(usize),
    #[error("self-loop ({0}, {0}) not allowed")]
    SelfLoop(usize),
    #[error("stock {target}: {source}")]
    Lasso {
        target: usize,
        #[source]
        source: LassoError,
    },
}

/// Cross-validated regression for one target stock. Coefficients are sparse
/// over the other stocks, indexed by stock (never the target itself).
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub target: usize,
    pub coefficients: Vec<(usize, f64)>,
    pub lambda: f64,
    pub cv_curve: Vec<(f64, f64)>,
}

/// Binary directed graph over stocks; no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedAdjacency {
    n: usize,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    edge_count: usize,
}

impl DirectedAdjacency {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = Self::new(n);
        for (i, j) in edges {
            adj.insert(i, j)?;
        }
        Ok(adj)
    }

    /// Adds edge `i -> j`; returns false when already present.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<bool, NetworkError> {
        assert!(i < self.n && j < self.n, "edge ({i}, {j}) outside 0..{}", self.n);
        if i == j {
            return Err(NetworkError::SelfLoop(i));
        }
        let pos = match self.out[i].binary_search(&(j as u32)) {
            Ok(_) => return Ok(false),
            Err(pos) => pos,
        };
        self.out[i].insert(pos, j as u32);
        let pos = self.inc[j].binary_search(&(i as u32)).unwrap_err();
        self.inc[j].insert(pos, i as u32);
        self.edge_count += 1;
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.out[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.out[i]
    }

    pub fn in_neighbors(&self, j: usize) -> &[u32] {
        &self.inc[j]
    }

    /// Edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().map(move |&j| (i, j as usize)))
    }

    /// Neighbor lists of the undirected simplification (edge iff a_ij or a_ji).
    pub fn undirected_neighbors(&self) -> Vec<Vec<u32>> {
        (0..self.n)
            .map(|i| {
                let mut nbrs: Vec<u32> = self.out[i]
                    .iter()
                    .chain(self.inc[i].iter())
                    .copied()
                    .collect();
                nbrs.sort_unstable();
                nbrs.dedup();
                nbrs
            })
            .collect()
    }
}

/// Settings for per-stock regression and penalty selection.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub folds: usize,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            n_lambda: 100,
            lambda_min_ratio: 1e-3,
            seed: 42,
        }
    }
}

fn centered_column(panel: &ReturnPanel, col: usize) -> Vec<f64> {
    let v: Vec<f64> = panel.returns.column(col).to_vec();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.into_iter().map(|x| x - mean).collect()
}

/// Regresses stock `target` on all other stocks with a cross-validated penalty.
pub fn fit_stock(
    panel: &ReturnPanel,
    target: usize,
    config: &NetworkConfig,
) -> Result<LassoFit, NetworkError> {
    let n = panel.n_stocks();
    if n < 2 {
        return Err(NetworkError::TooFewStocks(n));
    }
    let others: Vec<usize> = (0..n).filter(|&j| j != target).collect();
    let y_raw: Vec<f64> = panel.returns.column(target).to_vec();
    let x_raw: Vec<Vec<f64>> = others
        .iter()
        .map(|&j| panel.returns.column(j).to_vec())
        .collect();

    // Grid from the full-sample centered problem; CV re-centers per fold.
    let y_centered = centered_column(panel, target);
    let x_centered: Vec<Vec<f64>> = others.iter().map(|&j| centered_column(panel, j)).collect();
    let lmax = lasso::lambda_max(&y_centered, &x_centered);
    let grid = lasso::default_lambda_grid(lmax, config.n_lambda, config.lambda_min_ratio);

    let seed = mix_seed(config.seed, target as u64);
    let fit = lasso::cross_validate_lambda(&y_raw, &x_raw, config.folds, &grid, seed)
        .map_err(|source| NetworkError::Lasso { target, source })?;

    let coefficients: Vec<(usize, f64)> = others
        .iter()
        .zip(&fit.coefficients)
        .filter(|(_, b)| b.abs() > TOL_COEF)
        .map(|(&j, &b)| (j, b))
        .collect();
    Ok(LassoFit {
        target,
        coefficients,
        lambda: fit.lambda,
        cv_curve: fit.cv_curve,
    })
}

/// Assembles the adjacency: edge `(i, j)` iff stock i's coefficient in stock
/// j's regression is nonzero (magnitude above `TOL_COEF`).
pub fn build_adjacency(fits: &[LassoFit], n: usize) -> Result<DirectedAdjacency, NetworkError> {
    if fits.len() != n {
        return Err(NetworkError::FitCount {
            expected: n,
            found: fits.len(),
        });
    }
    let mut seen = vec![false; n];
    for fit in fits {
        if fit.target >= n {
            return Err(NetworkError::MissingTarget(fit.target.min(n)));
        }
        if seen[fit.target] {
            return Err(NetworkError::DuplicateTarget(fit.target));
        }
        seen[fit.target] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(NetworkError::MissingTarget(missing));
    }

    let mut adj = DirectedAdjacency::new(n);
    for fit in fits {
        for &(stock, beta) in &fit.coefficients {
            if stock >= n {
                return Err(NetworkError::CoefficientOutOfRange {
                    target: fit.target,
                    stock,
                    n,
                });
            }
            if stock == fit.target {
                return Err(NetworkError::SelfCoefficient(fit.target));
            }
            if beta.abs() > TOL_COEF {
                adj.insert(stock, fit.target)?;
            }
        }
    }
    Ok(adj)
}

/// Runs the per-stock regressions (in parallel; results merged by target
/// index, so output is independent of scheduling) and builds the adjacency.
pub fn infer_network(
    panel: &ReturnPanel,
    config: &NetworkConfig,
) -> Result<(Vec<LassoFit>, DirectedAdjacency), NetworkError> {
    let n = panel.n_stocks();
    if n < 2 {
        return Err(NetworkError::TooFewStocks(n));
    }
    let mut fits = (0..n)
        .into_par_iter()
        .map(|target| fit_stock(panel, target, config))
        .collect::<Result<Vec<_>, _>>()?;
    fits.sort_by_key(|f| f.target);
    let adj = build_adjacency(&fits, n)?;
    Ok((fits, adj))
}

/// Writes the edge list as `src<TAB>dst` ticker pairs in lexicographic order.
pub fn write_edge_list<W: Write>(
    adj: &DirectedAdjacency,
    tickers: &[String],
    mut writer: W,
) -> io::Result<()> {
    let mut rows: Vec<(&str, &str)> = adj
        .edges()
        .map(|(i, j)| (tickers[i].as_str(), tickers[j].as_str()))
        .collect();
    rows.sort_unstable();
    for (src, dst) in rows {
        writeln!(writer, "{src}\t{dst}")?;
    }
    Ok(())
}

/// Reads an edge list written by [`write_edge_list`].
pub fn read_edge_list<R: Read>(reader: R) -> io::Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((src, dst)) => edges.push((src.to_string(), dst.to_string())),
            None => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("edge line without a tab: `{line}`"),
                ))
            }
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{StageDefinition, StageKind};
    use chrono::NaiveDate;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dummy_stage() -> StageDefinition {
        StageDefinition {
            code: "T".to_string(),
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            kind: StageKind::Bull,
        }
    }

    fn fit(target: usize, coefficients: Vec<(usize, f64)>) -> LassoFit {
        LassoFit {
            target,
            coefficients,
            lambda: 0.1,
            cv_curve: vec![(0.1, 0.0)],
        }
    }

    #[test]
    fn all_zero_fits_give_empty_adjacency() {
        let fits: Vec<LassoFit> = (0..3).map(|t| fit(t, vec![])).collect();
        let adj = build_adjacency(&fits, 3).unwrap();
        assert_eq!(adj.edge_count(), 0);
    }

    #[test]
    fn direction_convention_is_source_in_targets_regression() {
        // Stock 0 appears in stock 1's regression => edge (0, 1).
        let fits = vec![fit(0, vec![]), fit(1, vec![(0, 0.5)]), fit(2, vec![])];
        let adj = build_adjacency(&fits, 3).unwrap();
        assert_eq!(adj.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn dense_fits_give_complete_digraph() {
        let fits: Vec<LassoFit> = (0..4)
            .map(|t| {
                fit(
                    t,
                    (0..4).filter(|j| *j != t).map(|j| (j, 1.0)).collect(),
                )
            })
            .collect();
        let adj = build_adjacency(&fits, 4).unwrap();
        assert_eq!(adj.edge_count(), 12);
        for i in 0..4 {
            assert!(!adj.contains(i, i));
        }
    }

    #[test]
    fn duplicate_and_missing_targets_rejected() {
        let fits = vec![fit(0, vec![]), fit(0, vec![]), fit(2, vec![])];
        assert!(matches!(
            build_adjacency(&fits, 3),
            Err(NetworkError::DuplicateTarget(0))
        ));
        let fits = vec![fit(0, vec![]), fit(2, vec![])];
        assert!(matches!(
            build_adjacency(&fits, 2),
            Err(NetworkError::MissingTarget(_))
        ));
    }

    #[test]
    fn sub_tolerance_coefficients_do_not_create_edges() {
        let fits = vec![fit(0, vec![]), fit(1, vec![(0, 0.5 * TOL_COEF)])];
        let adj = build_adjacency(&fits, 2).unwrap();
        assert_eq!(adj.edge_count(), 0);
    }

    fn driven_panel(t: usize, seed: u64) -> ReturnPanel {
        // Stock 1 follows 0.8 * stock 0; stocks 2..4 are independent noise.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let mut data = Array2::zeros((t, n));
        for r in 0..t {
            let driver: f64 = rng.gen::<f64>() * 0.2 - 0.1;
            data[(r, 0)] = driver;
            data[(r, 1)] = 0.8 * driver + (rng.gen::<f64>() - 0.5) * 0.02;
            for c in 2..n {
                data[(r, c)] = rng.gen::<f64>() * 0.2 - 0.1;
            }
        }
        ReturnPanel {
            stage: dummy_stage(),
            tickers: (0..n).map(|i| format!("S{i}")).collect(),
            returns: data,
        }
    }

    #[test]
    fn infer_network_finds_the_planted_edge() {
        let panel = driven_panel(240, 3);
        let (fits, adj) = infer_network(&panel, &NetworkConfig::default()).unwrap();
        assert_eq!(fits.len(), 5);
        assert!(adj.contains(0, 1), "edges: {:?}", adj.edges().collect::<Vec<_>>());
    }

    #[test]
    fn infer_network_is_deterministic() {
        let panel = driven_panel(120, 4);
        let cfg = NetworkConfig::default();
        let (fits_a, adj_a) = infer_network(&panel, &cfg).unwrap();
        let (fits_b, adj_b) = infer_network(&panel, &cfg).unwrap();
        assert_eq!(fits_a, fits_b);
        assert_eq!(adj_a, adj_b);
    }

    #[test]
    fn edge_list_round_trips_and_is_sorted() {
        let adj =
            DirectedAdjacency::from_edges(3, vec![(2, 0), (0, 1), (0, 2)]).unwrap();
        let tickers: Vec<String> = ["600c", "600a", "600b"].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_edge_list(&adj, &tickers, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let sorted = {
            let mut s = lines.clone();
            s.sort_unstable();
            s
        };
        assert_eq!(lines, sorted);
        let edges = read_edge_list(&buf[..]).unwrap();
        assert_eq!(edges.len(), 3);
        assert!(edges.contains(&("600c".to_string(), "600a".to_string())));
        lines.clear();
    }
}

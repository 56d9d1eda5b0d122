//! Codelength minimization over partitions of a flow system.
//!
//! Greedy two-phase search: sweep nodes in seeded random order, moving each to
//! the neighboring module with the largest codelength decrease, then contract
//! modules to super-nodes with aggregated flow and repeat on the contracted
//! system. Several restarts run from independent seeds; the lowest codelength
//! wins, ties going to the earlier restart. The whole procedure is
//! deterministic for a fixed flow system and configuration.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::flow::{plogp, CodelengthReport, FlowError, FlowSystem, Partition};
use crate::util::mix_seed;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub seed: u64,
    pub n_restarts: usize,
    pub max_outer_passes: usize,
    /// A move is accepted only when it lowers the codelength by more than this.
    pub min_gain_bits: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_restarts: 10,
            max_outer_passes: 100,
            min_gain_bits: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: Partition,
    pub report: CodelengthReport,
    /// Codelength after each effective sweep of the winning restart,
    /// starting from the all-singletons value.
    pub trace: Vec<f64>,
    pub restart_index: usize,
}

/// Weighted flow graph for one aggregation level. Level 0 has one node per
/// active flow node; deeper levels aggregate modules, dropping intra-node
/// flow (it can never cross a module boundary again).
#[derive(Debug, Clone)]
struct LevelGraph {
    flow: Vec<f64>,
    out: Vec<Vec<(u32, f64)>>,
    inc: Vec<Vec<(u32, f64)>>,
    out_total: Vec<f64>,
    /// Flat flow-node ids contained in each level node.
    members: Vec<Vec<u32>>,
}

impl LevelGraph {
    fn from_flow_system(fs: &FlowSystem) -> Self {
        let active = fs.active_nodes();
        let mut index_of = vec![u32::MAX; fs.n_flow()];
        for (k, &v) in active.iter().enumerate() {
            index_of[v as usize] = k as u32;
        }
        let n = active.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut flow = vec![0.0; n];
        let mut members = Vec::with_capacity(n);
        for (k, &v) in active.iter().enumerate() {
            let v = v as usize;
            flow[k] = fs.visit()[v];
            let w = fs.visit()[v] / fs.degree(v) as f64;
            for &r in fs.neighbors(v) {
                let target = index_of[r as usize];
                out[k].push((target, w));
                inc[target as usize].push((k as u32, w));
            }
            members.push(vec![v as u32]);
        }
        let out_total = out
            .iter()
            .map(|edges| edges.iter().map(|(_, f)| f).sum())
            .collect();
        Self {
            flow,
            out,
            inc,
            out_total,
            members,
        }
    }

    fn len(&self) -> usize {
        self.flow.len()
    }

    /// Contracts modules into super-nodes. Nonempty modules are renumbered in
    /// ascending id order; parallel aggregated edges merge.
    fn contract(&self, node_module: &[u32], num_modules: usize) -> Self {
        let mut new_id = vec![u32::MAX; num_modules];
        let mut next = 0u32;
        for m in 0..num_modules {
            if node_module.iter().any(|&x| x as usize == m) {
                new_id[m] = next;
                next += 1;
            }
        }
        let n = next as usize;
        let mut flow = vec![0.0; n];
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (node, &m) in node_module.iter().enumerate() {
            let s = new_id[m as usize] as usize;
            flow[s] += self.flow[node];
            members[s].extend_from_slice(&self.members[node]);
        }
        for member in members.iter_mut() {
            member.sort_unstable();
        }

        let mut agg: Vec<std::collections::BTreeMap<u32, f64>> =
            vec![std::collections::BTreeMap::new(); n];
        for (node, edges) in self.out.iter().enumerate() {
            let s = new_id[node_module[node] as usize];
            for &(target, f) in edges {
                let t = new_id[node_module[target as usize] as usize];
                if s != t {
                    *agg[s as usize].entry(t).or_insert(0.0) += f;
                }
            }
        }
        let mut out: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut inc: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (s, targets) in agg.into_iter().enumerate() {
            for (t, f) in targets {
                out[s].push((t, f));
                inc[t as usize].push((s as u32, f));
            }
        }
        let out_total = out
            .iter()
            .map(|edges| edges.iter().map(|(_, f)| f).sum())
            .collect();
        Self {
            flow,
            out,
            inc,
            out_total,
            members,
        }
    }
}

/// Module statistics during a sweep phase on one level.
struct LevelState {
    node_module: Vec<u32>,
    exit: Vec<f64>,
    visit: Vec<f64>,
    size: Vec<u32>,
    total_exit: f64,
}

impl LevelState {
    fn singletons(g: &LevelGraph) -> Self {
        let n = g.len();
        Self {
            node_module: (0..n as u32).collect(),
            exit: g.out_total.clone(),
            visit: g.flow.clone(),
            size: vec![1; n],
            total_exit: g.out_total.iter().sum(),
        }
    }

    /// Codelength up to the partition-independent flat-node entropy constant.
    fn raw_codelength(&self) -> f64 {
        let mut value = plogp(self.total_exit);
        for m in 0..self.exit.len() {
            if self.size[m] == 0 {
                continue;
            }
            value += plogp(self.exit[m] + self.visit[m]) - 2.0 * plogp(self.exit[m]);
        }
        value
    }
}

/// Reusable per-sweep buffers.
#[derive(Default)]
struct SweepScratch {
    order: Vec<u32>,
    cand_modules: Vec<u32>,
    cand_to: Vec<f64>,
    cand_from: Vec<f64>,
    slot_of: Vec<u32>,
}

fn gather_candidates(g: &LevelGraph, state: &LevelState, v: usize, scratch: &mut SweepScratch) {
    scratch.cand_modules.clear();
    scratch.cand_to.clear();
    scratch.cand_from.clear();
    let add = |module: u32, to: f64, from: f64, scratch: &mut SweepScratch| {
        let m = module as usize;
        if scratch.slot_of[m] == u32::MAX {
            scratch.slot_of[m] = scratch.cand_modules.len() as u32;
            scratch.cand_modules.push(module);
            scratch.cand_to.push(to);
            scratch.cand_from.push(from);
        } else {
            let slot = scratch.slot_of[m] as usize;
            scratch.cand_to[slot] += to;
            scratch.cand_from[slot] += from;
        }
    };
    add(state.node_module[v], 0.0, 0.0, scratch);
    for &(t, f) in &g.out[v] {
        if t as usize != v {
            add(state.node_module[t as usize], f, 0.0, scratch);
        }
    }
    for &(s, f) in &g.inc[v] {
        if s as usize != v {
            add(state.node_module[s as usize], 0.0, f, scratch);
        }
    }
}

/// One sweep over all nodes in seeded random order; returns the move count.
fn sweep(
    g: &LevelGraph,
    state: &mut LevelState,
    rng: &mut ChaCha8Rng,
    min_gain_bits: f64,
    scratch: &mut SweepScratch,
) -> usize {
    let n = g.len();
    scratch.order.clear();
    scratch.order.extend(0..n as u32);
    scratch.order.shuffle(rng);
    if scratch.slot_of.len() < state.exit.len() {
        scratch.slot_of.resize(state.exit.len(), u32::MAX);
    }

    let mut moves = 0;
    for idx in 0..n {
        let v = scratch.order[idx] as usize;
        let source = state.node_module[v];
        gather_candidates(g, state, v, scratch);

        let slot_src = scratch.slot_of[source as usize] as usize;
        let to_src = scratch.cand_to[slot_src];
        let from_src = scratch.cand_from[slot_src];
        let out_v = g.out_total[v];
        let flow_v = g.flow[v];

        let src_exit = state.exit[source as usize];
        let src_visit = state.visit[source as usize];
        let src_exit_after = src_exit - (out_v - to_src) + from_src;
        let src_usage_delta = plogp(src_exit_after + src_visit - flow_v)
            - plogp(src_exit + src_visit)
            - 2.0 * (plogp(src_exit_after) - plogp(src_exit));

        // Candidates in ascending module id: with a strict comparison the
        // smallest id wins exact ties.
        let mut cand_order: Vec<usize> = (0..scratch.cand_modules.len()).collect();
        cand_order.sort_unstable_by_key(|&slot| scratch.cand_modules[slot]);

        let mut best_delta = -min_gain_bits;
        let mut best_target = source;
        for slot in cand_order {
            let target = scratch.cand_modules[slot];
            if target == source {
                continue;
            }
            let to_tgt = scratch.cand_to[slot];
            let from_tgt = scratch.cand_from[slot];
            let tgt_exit = state.exit[target as usize];
            let tgt_visit = state.visit[target as usize];
            let tgt_exit_after = tgt_exit - from_tgt + (out_v - to_tgt);
            let total_after =
                state.total_exit + (src_exit_after - src_exit) + (tgt_exit_after - tgt_exit);
            let delta = plogp(total_after) - plogp(state.total_exit)
                + src_usage_delta
                + plogp(tgt_exit_after + tgt_visit + flow_v)
                - plogp(tgt_exit + tgt_visit)
                - 2.0 * (plogp(tgt_exit_after) - plogp(tgt_exit));
            if delta < best_delta {
                best_delta = delta;
                best_target = target;
            }
        }

        for &m in &scratch.cand_modules {
            scratch.slot_of[m as usize] = u32::MAX;
        }

        if best_target != source {
            let slot_src = source as usize;
            let slot_tgt = best_target as usize;
            let (to_tgt, from_tgt) = {
                // Recompute the two buckets for the applied move only.
                let mut to = 0.0;
                let mut from = 0.0;
                for &(t, f) in &g.out[v] {
                    if state.node_module[t as usize] == best_target {
                        to += f;
                    }
                }
                for &(s, f) in &g.inc[v] {
                    if state.node_module[s as usize] == best_target {
                        from += f;
                    }
                }
                (to, from)
            };
            let src_exit = state.exit[slot_src];
            let tgt_exit = state.exit[slot_tgt];
            state.exit[slot_src] = src_exit - (out_v - to_src) + from_src;
            state.exit[slot_tgt] = tgt_exit - from_tgt + (out_v - to_tgt);
            state.total_exit +=
                state.exit[slot_src] + state.exit[slot_tgt] - src_exit - tgt_exit;
            state.visit[slot_src] -= flow_v;
            state.visit[slot_tgt] += flow_v;
            state.size[slot_src] -= 1;
            state.size[slot_tgt] += 1;
            state.node_module[v] = best_target;
            moves += 1;
        }
    }
    moves
}

struct RestartOutcome {
    module_of: Vec<Option<usize>>,
    codelength: f64,
    trace: Vec<f64>,
}

fn run_restart(
    base: &LevelGraph,
    flat_entropy: f64,
    n_flow: usize,
    config: &SearchConfig,
    restart: usize,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, restart as u64));
    let mut scratch = SweepScratch::default();
    let mut graph = base.clone();
    let mut trace = Vec::new();

    let mut state = LevelState::singletons(&graph);
    trace.push(state.raw_codelength() + flat_entropy);

    for _ in 0..config.max_outer_passes {
        let mut level_moves = 0;
        loop {
            let moves = sweep(&graph, &mut state, &mut rng, config.min_gain_bits, &mut scratch);
            if moves == 0 {
                break;
            }
            level_moves += moves;
            trace.push(state.raw_codelength() + flat_entropy);
        }
        if level_moves == 0 {
            break;
        }
        graph = graph.contract(&state.node_module, state.exit.len());
        state = LevelState::singletons(&graph);
        if graph.len() <= 1 {
            break;
        }
    }

    let mut module_of = vec![None; n_flow];
    for (module, members) in graph.members.iter().enumerate() {
        for &v in members {
            module_of[v as usize] = Some(module);
        }
    }
    RestartOutcome {
        module_of,
        codelength: *trace.last().expect("trace holds the initial codelength"),
        trace,
    }
}

/// Finds a low-codelength partition of the flow system.
pub fn optimize(fs: &FlowSystem, config: &SearchConfig) -> Result<SearchResult, FlowError> {
    assert!(config.n_restarts >= 1, "at least one restart required");
    assert!(config.min_gain_bits >= 0.0, "min_gain_bits must be >= 0");
    let base = LevelGraph::from_flow_system(fs);
    let flat_entropy: f64 = -fs
        .active_nodes()
        .iter()
        .map(|&v| plogp(fs.visit()[v as usize]))
        .sum::<f64>();

    let outcomes: Vec<RestartOutcome> = (0..config.n_restarts)
        .into_par_iter()
        .map(|restart| run_restart(&base, flat_entropy, fs.n_flow(), config, restart))
        .collect();

    let mut winner = 0;
    for (idx, outcome) in outcomes.iter().enumerate() {
        if outcome.codelength < outcomes[winner].codelength {
            winner = idx;
        }
    }
    let outcome = &outcomes[winner];
    let best = Partition::from_assignment(fs, &outcome.module_of)?;
    let report = best.codelength(fs);
    debug_assert!(
        (report.total - outcome.codelength).abs() <= 1e-9,
        "incremental codelength {} drifted from recomputation {}",
        outcome.codelength,
        report.total
    );
    Ok(SearchResult {
        best,
        report,
        trace: outcome.trace.clone(),
        restart_index: winner,
    })
}

/// Exact codelength change of moving one active node to `target_module`
/// (pass `partition.num_modules()` for a fresh singleton), without mutating
/// or fully re-evaluating the partition.
pub fn delta_codelength(
    fs: &FlowSystem,
    partition: &Partition,
    node: usize,
    target_module: usize,
) -> Result<f64, FlowError> {
    if !fs.is_active(node) {
        return Err(FlowError::InactiveNode(node));
    }
    let m = partition.num_modules();
    if target_module > m {
        return Err(FlowError::BadTargetModule {
            target: target_module,
            modules: m,
        });
    }
    let source = partition.module_of(node).expect("active nodes are covered");
    if target_module == source {
        return Ok(0.0);
    }

    let p_v = fs.visit()[node];
    let w_out = p_v / fs.degree(node) as f64;
    let mut to_src = 0.0;
    let mut from_src = 0.0;
    let mut to_tgt = 0.0;
    let mut from_tgt = 0.0;
    for &u in fs.neighbors(node) {
        let u = u as usize;
        let module = partition.module_of(u).expect("active nodes are covered");
        let w_in = fs.visit()[u] / fs.degree(u) as f64;
        if module == source && u != node {
            to_src += w_out;
            from_src += w_in;
        } else if module == target_module {
            to_tgt += w_out;
            from_tgt += w_in;
        }
    }

    let (tgt_exit, tgt_visit) = if target_module == m {
        (0.0, 0.0)
    } else {
        (
            partition.exit_freq(target_module),
            partition.internal_visit(target_module),
        )
    };
    let src_exit = partition.exit_freq(source);
    let src_visit = partition.internal_visit(source);

    let src_exit_after = src_exit - (p_v - to_src) + from_src;
    let tgt_exit_after = tgt_exit - from_tgt + (p_v - to_tgt);
    let total = partition.total_exit();
    let total_after = total + (src_exit_after - src_exit) + (tgt_exit_after - tgt_exit);

    Ok(plogp(total_after) - plogp(total)
        - 2.0 * (plogp(src_exit_after) - plogp(src_exit))
        - 2.0 * (plogp(tgt_exit_after) - plogp(tgt_exit))
        + plogp(src_exit_after + src_visit - p_v)
        - plogp(src_exit + src_visit)
        + plogp(tgt_exit_after + tgt_visit + p_v)
        - plogp(tgt_exit + tgt_visit))
}

//! Stock-level reporting.
//!
//! The search runs on the 2N bipartite flow nodes; reporting collapses each
//! stock's two copies to a single module, rebuilds the flow statistics on the
//! collapsed structure, and renders the output tables: module sizes and flow
//! shares, industry cross-tabs, and top-K centrality rankings. Modules are
//! named M1, M2, ... by within-module flow share, descending.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::flow::{CodelengthReport, FlowError, FlowSystem, Partition};
use crate::ingest::IngestError;
use crate::network::DirectedAdjacency;
use crate::topo::Centralities;

const INDUSTRY_HEADER: &str = "ticker,industry";
const MODULE_CSV_HEADER: &str = "module,stocks,links,within_pct,flow_in_pct,flow_out_pct";
const CENTRALITY_CSV_HEADER: &str = "kind,rank,ticker,industry,value";
const UNKNOWN_INDUSTRY: &str = "unknown";

/// Stock-level module assignment; `None` marks stocks whose both copies are
/// inactive (the "isolated" pseudo-module, excluded from rankings).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedPartition {
    pub module_of: Vec<Option<usize>>,
    pub num_modules: usize,
}

/// Collapses a flow-node partition to stocks: copies agreeing on a module keep
/// it; otherwise the copy with the larger visit frequency decides, ties going
/// to the out-copy.
pub fn collapse_partition(fs: &FlowSystem, partition: &Partition) -> CollapsedPartition {
    let n = fs.n_stocks();
    let mut raw: Vec<Option<usize>> = Vec::with_capacity(n);
    for stock in 0..n {
        let out = fs.out_copy(stock);
        let inc = fs.in_copy(stock);
        let out_module = partition.module_of(out);
        let in_module = partition.module_of(inc);
        let chosen = match (out_module, in_module) {
            (None, None) => None,
            (Some(m), None) => Some(m),
            (None, Some(m)) => Some(m),
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), Some(b)) => {
                if fs.visit()[inc] > fs.visit()[out] {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        raw.push(chosen);
    }
    // Relabel to contiguous ids in order of first appearance by stock index.
    let mut relabel: HashMap<usize, usize> = HashMap::new();
    let mut module_of = Vec::with_capacity(n);
    for chosen in raw {
        module_of.push(chosen.map(|m| {
            let next = relabel.len();
            *relabel.entry(m).or_insert(next)
        }));
    }
    CollapsedPartition {
        module_of,
        num_modules: relabel.len(),
    }
}

/// Within/boundary flow of one module, as fractions of the total flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowShares {
    pub within: f64,
    pub flow_in: f64,
    pub flow_out: f64,
}

/// Edge-wise flow decomposition per module: flow staying inside, entering
/// across the boundary, and leaving across the boundary.
pub fn flow_shares(fs: &FlowSystem, partition: &Partition) -> Vec<FlowShares> {
    let mut shares = vec![
        FlowShares {
            within: 0.0,
            flow_in: 0.0,
            flow_out: 0.0,
        };
        partition.num_modules()
    ];
    for &c in fs.active_nodes() {
        let c = c as usize;
        let a = partition.module_of(c).expect("active nodes are covered");
        let w = fs.visit()[c] / fs.degree(c) as f64;
        for &r in fs.neighbors(c) {
            let b = partition.module_of(r as usize).expect("active nodes are covered");
            if a == b {
                shares[a].within += w;
            } else {
                shares[a].flow_out += w;
                shares[b].flow_in += w;
            }
        }
    }
    shares
}

/// One ranked module row of the stock-level table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleRow {
    pub name: String,
    pub stock_count: usize,
    pub link_count: usize,
    pub within: f64,
    pub flow_in: f64,
    pub flow_out: f64,
    /// Module codebook usage frequency (exits plus internal visits).
    pub usage: f64,
    pub member_stocks: Vec<usize>,
}

/// Ranked stock-level module table plus the isolated stocks.
#[derive(Debug, Clone, PartialEq)]
pub struct StockModuleTable {
    pub rows: Vec<ModuleRow>,
    pub isolated: Vec<usize>,
}

/// Collapsed modules of one stage with their flow statistics recomputed on
/// the collapse-induced flow partition.
#[derive(Debug, Clone)]
pub struct StageModules {
    pub collapsed: CollapsedPartition,
    pub induced: Partition,
    pub table: StockModuleTable,
    pub codelength: CodelengthReport,
    /// Aggregated inter-module flow, indexed by ranked row positions.
    pub module_flows: Vec<Vec<f64>>,
}

/// Builds the ranked stock-level module view of a search result.
pub fn stage_modules(
    fs: &FlowSystem,
    adj: &DirectedAdjacency,
    partition: &Partition,
    tickers: &[String],
) -> Result<StageModules, FlowError> {
    let collapsed = collapse_partition(fs, partition);
    let m = collapsed.num_modules;

    // Both copies of a stock take its collapsed module.
    let mut module_of_flow = vec![None; fs.n_flow()];
    for stock in 0..fs.n_stocks() {
        if let Some(module) = collapsed.module_of[stock] {
            if fs.is_active(fs.out_copy(stock)) {
                module_of_flow[fs.out_copy(stock)] = Some(module);
            }
            if fs.is_active(fs.in_copy(stock)) {
                module_of_flow[fs.in_copy(stock)] = Some(module);
            }
        }
    }
    let induced = Partition::from_assignment(fs, &module_of_flow)?;
    // from_assignment relabels by first active flow node; align back to the
    // collapsed ids through a representative member.
    let mut induced_id = vec![usize::MAX; m];
    for stock in 0..fs.n_stocks() {
        if let Some(module) = collapsed.module_of[stock] {
            if induced_id[module] == usize::MAX {
                let node = if fs.is_active(fs.out_copy(stock)) {
                    fs.out_copy(stock)
                } else {
                    fs.in_copy(stock)
                };
                induced_id[module] = induced.module_of(node).expect("member copy is active");
            }
        }
    }

    let shares_by_induced = flow_shares(fs, &induced);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut isolated = Vec::new();
    for (stock, module) in collapsed.module_of.iter().enumerate() {
        match module {
            Some(a) => members[*a].push(stock),
            None => isolated.push(stock),
        }
    }
    let mut link_count = vec![0usize; m];
    for (i, j) in adj.edges() {
        if let (Some(a), Some(b)) = (collapsed.module_of[i], collapsed.module_of[j]) {
            if a == b {
                link_count[a] += 1;
            }
        }
    }

    // Rank by within-module flow share, descending; ties by stock count,
    // link count, then the lexicographically smallest member ticker.
    let mut order: Vec<usize> = (0..m).collect();
    let min_ticker: Vec<&str> = (0..m)
        .map(|a| {
            members[a]
                .iter()
                .map(|&s| tickers[s].as_str())
                .min()
                .unwrap_or("")
        })
        .collect();
    order.sort_by(|&a, &b| {
        let sa = shares_by_induced[induced_id[a]];
        let sb = shares_by_induced[induced_id[b]];
        sb.within
            .total_cmp(&sa.within)
            .then(members[b].len().cmp(&members[a].len()))
            .then(link_count[b].cmp(&link_count[a]))
            .then(min_ticker[a].cmp(min_ticker[b]))
    });

    let rows: Vec<ModuleRow> = order
        .iter()
        .enumerate()
        .map(|(rank, &a)| {
            let shares = shares_by_induced[induced_id[a]];
            ModuleRow {
                name: format!("M{}", rank + 1),
                stock_count: members[a].len(),
                link_count: link_count[a],
                within: shares.within,
                flow_in: shares.flow_in,
                flow_out: shares.flow_out,
                usage: induced.usage_freq(induced_id[a]),
                member_stocks: members[a].clone(),
            }
        })
        .collect();

    // Inter-module flow in ranked coordinates, for the module-graph export.
    let mut rank_of_collapsed = vec![usize::MAX; m];
    for (rank, &a) in order.iter().enumerate() {
        rank_of_collapsed[a] = rank;
    }
    let mut module_flows = vec![vec![0.0; m]; m];
    for &c in fs.active_nodes() {
        let c = c as usize;
        let stock_of = |node: usize| node % fs.n_stocks();
        let a = rank_of_collapsed[collapsed.module_of[stock_of(c)].expect("active stock")];
        let w = fs.visit()[c] / fs.degree(c) as f64;
        for &r in fs.neighbors(c) {
            let b = rank_of_collapsed[collapsed.module_of[stock_of(r as usize)].expect("active stock")];
            if a != b {
                module_flows[a][b] += w;
            }
        }
    }

    let codelength = induced.codelength(fs);
    Ok(StageModules {
        collapsed,
        induced,
        table: StockModuleTable { rows, isolated },
        codelength,
        module_flows,
    })
}

/// Industry-by-module stock counts over the top-K modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndustryCrossTab {
    pub industries: Vec<String>,
    pub modules: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

/// Cross-tabulates stocks by industry over the top `top_k` modules; `top_k`
/// is clamped to the module count. Stocks without an industry label land in
/// an "unknown" row (kept last).
pub fn cross_tab(
    table: &StockModuleTable,
    tickers: &[String],
    industries: &HashMap<String, String>,
    top_k: usize,
) -> IndustryCrossTab {
    let k = top_k.min(table.rows.len());
    let rows = &table.rows[..k];
    let mut labels: Vec<String> = rows
        .iter()
        .flat_map(|r| r.member_stocks.iter())
        .filter_map(|&s| industries.get(&tickers[s]).cloned())
        .collect();
    labels.sort();
    labels.dedup();
    let has_unknown = rows
        .iter()
        .flat_map(|r| r.member_stocks.iter())
        .any(|&s| !industries.contains_key(&tickers[s]));
    if has_unknown {
        labels.push(UNKNOWN_INDUSTRY.to_string());
    }

    let row_index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut counts = vec![vec![0usize; k]; labels.len()];
    for (col, row) in rows.iter().enumerate() {
        for &s in &row.member_stocks {
            let label = industries
                .get(&tickers[s])
                .map(String::as_str)
                .unwrap_or(UNKNOWN_INDUSTRY);
            counts[row_index[label]][col] += 1;
        }
    }
    IndustryCrossTab {
        industries: labels,
        modules: rows.iter().map(|r| r.name.clone()).collect(),
        counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    Degree,
    Betweenness,
    Closeness,
}

impl std::fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CentralityKind::Degree => write!(f, "degree"),
            CentralityKind::Betweenness => write!(f, "betweenness"),
            CentralityKind::Closeness => write!(f, "closeness"),
        }
    }
}

/// Top stocks under one centrality: `(ticker, industry, value)`, values
/// non-increasing, ties broken by ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityRanking {
    pub kind: CentralityKind,
    pub entries: Vec<(String, String, f64)>,
}

/// Builds the degree/betweenness/closeness rankings. Degree and closeness
/// average their in and out variants; isolated stocks are excluded.
pub fn centrality_rankings(
    centralities: &Centralities,
    tickers: &[String],
    industries: &HashMap<String, String>,
    isolated: &[usize],
    top_k: usize,
) -> Vec<CentralityRanking> {
    let n = tickers.len();
    let excluded: std::collections::HashSet<usize> = isolated.iter().copied().collect();
    let degree: Vec<f64> = (0..n)
        .map(|i| 0.5 * (centralities.out_degree[i] + centralities.in_degree[i]))
        .collect();
    let closeness: Vec<f64> = (0..n)
        .map(|i| 0.5 * (centralities.out_closeness[i] + centralities.in_closeness[i]))
        .collect();

    let build = |kind: CentralityKind, values: &[f64]| {
        let mut order: Vec<usize> = (0..n).filter(|i| !excluded.contains(i)).collect();
        order.sort_by(|&a, &b| {
            values[b]
                .total_cmp(&values[a])
                .then(tickers[a].cmp(&tickers[b]))
        });
        order.truncate(top_k);
        CentralityRanking {
            kind,
            entries: order
                .into_iter()
                .map(|i| {
                    let industry = industries
                        .get(&tickers[i])
                        .cloned()
                        .unwrap_or_else(|| UNKNOWN_INDUSTRY.to_string());
                    (tickers[i].clone(), industry, values[i])
                })
                .collect(),
        }
    };
    vec![
        build(CentralityKind::Degree, &degree),
        build(CentralityKind::Betweenness, &centralities.betweenness),
        build(CentralityKind::Closeness, &closeness),
    ]
}

/// Parses the industry CSV (`ticker,industry`).
pub fn parse_industries<R: Read>(reader: R) -> Result<HashMap<String, String>, IngestError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(IngestError::MalformedHeader {
                line: 1,
                expected: INDUSTRY_HEADER,
                found: String::new(),
            })
        }
    };
    if header.trim() != INDUSTRY_HEADER {
        return Err(IngestError::MalformedHeader {
            line: 1,
            expected: INDUSTRY_HEADER,
            found: header.trim().to_string(),
        });
    }
    let mut map = HashMap::new();
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (ticker, industry) = line.split_once(',').ok_or(IngestError::FieldCount {
            line: line_no,
            expected: 2,
            found: 1,
        })?;
        let ticker = ticker.trim();
        if ticker.is_empty() {
            return Err(IngestError::EmptyTicker { line: line_no });
        }
        if map
            .insert(ticker.to_string(), industry.trim().to_string())
            .is_some()
        {
            return Err(IngestError::DuplicateTicker {
                line: line_no,
                ticker: ticker.to_string(),
            });
        }
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// Writers and their parsers. Every emitted format round-trips through its own
// reader; floats are written in shortest round-trip form except the module
// table percentages, which are fixed to two decimals.
// ---------------------------------------------------------------------------

/// Writes the ranked module table (top `top_k` rows, then the isolated row
/// when present). Flow columns are percentages of total flow: `within_pct`
/// stays inside the module, `flow_in_pct` enters across the boundary,
/// `flow_out_pct` leaves across the boundary.
pub fn write_module_csv<W: Write>(
    table: &StockModuleTable,
    top_k: usize,
    mut writer: W,
) -> io::Result<()> {
    writeln!(writer, "{MODULE_CSV_HEADER}")?;
    for row in table.rows.iter().take(top_k) {
        writeln!(
            writer,
            "{},{},{},{:.2},{:.2},{:.2}",
            row.name,
            row.stock_count,
            row.link_count,
            100.0 * row.within,
            100.0 * row.flow_in,
            100.0 * row.flow_out
        )?;
    }
    if !table.isolated.is_empty() {
        writeln!(writer, "isolated,{},0,0.00,0.00,0.00", table.isolated.len())?;
    }
    Ok(())
}

/// Rows of a module CSV: `(module, stocks, links, within%, in%, out%)`.
pub type ModuleCsvRow = (String, usize, usize, f64, f64, f64);

pub fn read_module_csv<R: Read>(reader: R) -> io::Result<Vec<ModuleCsvRow>> {
    let mut lines = BufReader::new(reader).lines();
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    match lines.next() {
        Some(h) if h? == MODULE_CSV_HEADER => {}
        other => return Err(bad(format!("bad module CSV header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(format!("bad module CSV row: `{line}`")));
        }
        rows.push((
            fields[0].to_string(),
            fields[1].parse().map_err(|e| bad(format!("{e}")))?,
            fields[2].parse().map_err(|e| bad(format!("{e}")))?,
            fields[3].parse().map_err(|e| bad(format!("{e}")))?,
            fields[4].parse().map_err(|e| bad(format!("{e}")))?,
            fields[5].parse().map_err(|e| bad(format!("{e}")))?,
        ));
    }
    Ok(rows)
}

pub fn write_crosstab_csv<W: Write>(tab: &IndustryCrossTab, mut writer: W) -> io::Result<()> {
    writeln!(writer, "industry,{}", tab.modules.join(","))?;
    for (row, label) in tab.industries.iter().enumerate() {
        let cells: Vec<String> = tab.counts[row].iter().map(|c| c.to_string()).collect();
        writeln!(writer, "{label},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_crosstab_csv<R: Read>(reader: R) -> io::Result<IndustryCrossTab> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty cross-tab".to_string()))??;
    let mut cols = header.split(',');
    if cols.next() != Some("industry") {
        return Err(bad(format!("bad cross-tab header: `{header}`")));
    }
    let modules: Vec<String> = cols.map(str::to_string).collect();
    let mut industries = Vec::new();
    let mut counts = Vec::new();
    for line in lines {
        let line = line?;
        let mut fields = line.split(',');
        industries.push(
            fields
                .next()
                .ok_or_else(|| bad(format!("bad cross-tab row: `{line}`")))?
                .to_string(),
        );
        let row: Result<Vec<usize>, _> = fields.map(str::parse).collect();
        let row = row.map_err(|e| bad(format!("{e}")))?;
        if row.len() != modules.len() {
            return Err(bad(format!("ragged cross-tab row: `{line}`")));
        }
        counts.push(row);
    }
    Ok(IndustryCrossTab {
        industries,
        modules,
        counts,
    })
}

pub fn write_centrality_csv<W: Write>(
    rankings: &[CentralityRanking],
    mut writer: W,
) -> io::Result<()> {
    writeln!(writer, "{CENTRALITY_CSV_HEADER}")?;
    for ranking in rankings {
        for (rank, (ticker, industry, value)) in ranking.entries.iter().enumerate() {
            writeln!(writer, "{},{},{ticker},{industry},{value}", ranking.kind, rank + 1)?;
        }
    }
    Ok(())
}

/// Rows of a centrality CSV: `(kind, rank, ticker, industry, value)`.
pub type CentralityCsvRow = (String, usize, String, String, f64);

pub fn read_centrality_csv<R: Read>(reader: R) -> io::Result<Vec<CentralityCsvRow>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = BufReader::new(reader).lines();
    match lines.next() {
        Some(h) if h? == CENTRALITY_CSV_HEADER => {}
        other => return Err(bad(format!("bad centrality CSV header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(format!("bad centrality CSV row: `{line}`")));
        }
        rows.push((
            fields[0].to_string(),
            fields[1].parse().map_err(|e| bad(format!("{e}")))?,
            fields[2].to_string(),
            fields[3].to_string(),
            fields[4].parse().map_err(|e| bad(format!("{e}")))?,
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowNodeJson {
    pub id: String,
    pub visit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowModuleJson {
    pub id: String,
    pub members: Vec<String>,
    pub exit_freq: f64,
    pub usage_freq: f64,
}

/// JSON export of the flow system under the collapsed modules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowJson {
    pub nodes: Vec<FlowNodeJson>,
    pub modules: Vec<FlowModuleJson>,
    pub codelength_bits: f64,
}

fn flow_node_id(fs: &FlowSystem, tickers: &[String], node: usize) -> String {
    let stock = node % fs.n_stocks();
    let role = if node < fs.n_stocks() { "out" } else { "in" };
    format!("{}.{role}", tickers[stock])
}

/// Builds the flow export: active nodes with visit frequencies and the ranked
/// collapsed modules with their exit and usage frequencies.
pub fn flow_json(fs: &FlowSystem, modules: &StageModules, tickers: &[String]) -> FlowJson {
    let nodes: Vec<FlowNodeJson> = fs
        .active_nodes()
        .iter()
        .map(|&v| FlowNodeJson {
            id: flow_node_id(fs, tickers, v as usize),
            visit: fs.visit()[v as usize],
        })
        .collect();
    let module_rows: Vec<FlowModuleJson> = modules
        .table
        .rows
        .iter()
        .map(|row| {
            let mut members = Vec::new();
            for &stock in &row.member_stocks {
                if fs.is_active(fs.out_copy(stock)) {
                    members.push(flow_node_id(fs, tickers, fs.out_copy(stock)));
                }
                if fs.is_active(fs.in_copy(stock)) {
                    members.push(flow_node_id(fs, tickers, fs.in_copy(stock)));
                }
            }
            FlowModuleJson {
                id: row.name.clone(),
                members,
                exit_freq: row.flow_out,
                usage_freq: row.usage,
            }
        })
        .collect();
    FlowJson {
        nodes,
        modules: module_rows,
        codelength_bits: modules.codelength.total,
    }
}

pub fn write_flow_json<W: Write>(flow: &FlowJson, writer: W) -> io::Result<()> {
    serde_json::to_writer_pretty(writer, flow).map_err(io::Error::from)
}

pub fn read_flow_json<R: Read>(reader: R) -> io::Result<FlowJson> {
    serde_json::from_reader(reader).map_err(io::Error::from)
}

/// Writes the module-level graph as DOT: one node per ranked module with its
/// codebook usage frequency as the size attribute, one directed edge per
/// inter-module flow with the flow as the weight.
pub fn write_module_dot<W: Write>(modules: &StageModules, mut writer: W) -> io::Result<()> {
    writeln!(writer, "digraph modules {{")?;
    for row in &modules.table.rows {
        writeln!(writer, "  \"{}\" [width={}];", row.name, row.usage)?;
    }
    let m = modules.table.rows.len();
    for src in 0..m {
        for dst in 0..m {
            let flow = modules.module_flows[src][dst];
            if src != dst && flow > 0.0 {
                writeln!(
                    writer,
                    "  \"{}\" -> \"{}\" [weight={flow}];",
                    modules.table.rows[src].name, modules.table.rows[dst].name
                )?;
            }
        }
    }
    writeln!(writer, "}}")?;
    Ok(())
}

/// Minimal reader for the DOT subset emitted by [`write_module_dot`]:
/// `(nodes: name -> width, edges: (src, dst) -> weight)`.
pub type ModuleDot = (Vec<(String, f64)>, Vec<(String, String, f64)>);

pub fn read_module_dot<R: Read>(reader: R) -> io::Result<ModuleDot> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("digraph") || trimmed == "}" {
            continue;
        }
        let unquote = |s: &str| s.trim().trim_matches('"').to_string();
        let attr_value = |s: &str, key: &str| -> io::Result<f64> {
            let open = s
                .find('[')
                .ok_or_else(|| bad(format!("missing attributes: `{s}`")))?;
            let body = s[open + 1..]
                .trim_end_matches(';')
                .trim_end_matches(']');
            let value = body
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| bad(format!("missing {key}: `{s}`")))?;
            value.parse().map_err(|e| bad(format!("{e}")))
        };
        if let Some(arrow) = trimmed.find("->") {
            let src = unquote(&trimmed[..arrow]);
            let rest = &trimmed[arrow + 2..];
            let open = rest
                .find('[')
                .ok_or_else(|| bad(format!("missing attributes: `{trimmed}`")))?;
            let dst = unquote(&rest[..open]);
            edges.push((src, dst, attr_value(rest, "weight")?));
        } else {
            let open = trimmed
                .find('[')
                .ok_or_else(|| bad(format!("unrecognized line: `{trimmed}`")))?;
            let name = unquote(&trimmed[..open]);
            nodes.push((name, attr_value(trimmed, "width")?));
        }
    }
    Ok((nodes, edges))
}

//! Interaction-graph and knowledge-graph data structures, loaders, split,
//! BPR sampling, and edge-dropout augmentation.
//!
//! File formats (UTF-8, LF, no header):
//!   interactions: `user<TAB>item` per line
//!   kg triples:   `head<TAB>relation<TAB>tail` per line
//!   alignment:    `item<TAB>entity` per line

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Bipartite user-item interaction graph in adjacency form with the
/// symmetric-normalization coefficient 1/sqrt(deg(u)*deg(i)) per edge.
#[derive(Clone, Debug)]
pub struct InteractionGraph {
    pub num_users: usize,
    pub num_items: usize,
    /// Per-user sorted item ids.
    pub user_adj: Vec<Vec<u32>>,
    /// Per-item sorted user ids.
    pub item_adj: Vec<Vec<u32>>,
    /// Per-edge coefficient, parallel to `user_adj`.
    pub norm_user: Vec<Vec<f64>>,
    /// Per-edge coefficient, parallel to `item_adj`.
    pub norm_item: Vec<Vec<f64>>,
}

impl InteractionGraph {
    /// Build from an edge list. Duplicates are collapsed; ids must be in
    /// range. Isolated users/items are legal (augmentation can create them).
    pub fn from_edges(num_users: usize, num_items: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut user_adj: Vec<Vec<u32>> = vec![Vec::new(); num_users];
        for &(u, i) in edges {
            if (u as usize) >= num_users || (i as usize) >= num_items {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{i}) out of range {num_users}x{num_items}"
                )));
            }
            user_adj[u as usize].push(i);
        }
        for adj in &mut user_adj {
            adj.sort_unstable();
            adj.dedup();
        }
        let mut item_adj: Vec<Vec<u32>> = vec![Vec::new(); num_items];
        for (u, adj) in user_adj.iter().enumerate() {
            for &i in adj {
                item_adj[i as usize].push(u as u32);
            }
        }
        // item_adj is sorted already: users visited in increasing order.
        let user_deg: Vec<usize> = user_adj.iter().map(|a| a.len()).collect();
        let item_deg: Vec<usize> = item_adj.iter().map(|a| a.len()).collect();
        let norm_user: Vec<Vec<f64>> = user_adj
            .iter()
            .enumerate()
            .map(|(u, adj)| {
                adj.iter()
                    .map(|&i| 1.0 / ((user_deg[u] * item_deg[i as usize]) as f64).sqrt())
                    .collect()
            })
            .collect();
        let norm_item: Vec<Vec<f64>> = item_adj
            .iter()
            .enumerate()
            .map(|(i, adj)| {
                adj.iter()
                    .map(|&u| 1.0 / ((item_deg[i] * user_deg[u as usize]) as f64).sqrt())
                    .collect()
            })
            .collect();
        Ok(Self {
            num_users,
            num_items,
            user_adj,
            item_adj,
            norm_user,
            norm_item,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.user_adj.iter().map(|a| a.len()).sum()
    }

    pub fn deg_user(&self, u: usize) -> usize {
        self.user_adj[u].len()
    }

    pub fn deg_item(&self, i: usize) -> usize {
        self.item_adj[i].len()
    }

    pub fn has_edge(&self, u: u32, i: u32) -> bool {
        self.user_adj[u as usize].binary_search(&i).is_ok()
    }

    /// Flat (user, item) edge list in user-major order.
    pub fn flat_edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, adj) in self.user_adj.iter().enumerate() {
            for &i in adj {
                out.push((u as u32, i));
            }
        }
        out
    }
}

/// Entity/relation triple store with adjacency grouped by head and the
/// item-to-entity alignment.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    pub num_entities: usize,
    pub num_relations: usize,
    /// Triples in their original direction.
    pub triples: Vec<(u32, u32, u32)>,
    /// Per-entity outgoing (relation, neighbor); includes inverse edges when
    /// `bidirectional` is set.
    pub entity_adj: Vec<Vec<(u32, u32)>>,
    /// Reverse of `entity_adj`: per-entity incoming (relation, head).
    pub incoming: Vec<Vec<(u32, u32)>>,
    /// item id -> entity id, injective.
    pub alignment: Vec<u32>,
    pub bidirectional: bool,
}

impl KnowledgeGraph {
    pub fn new(
        num_entities: usize,
        num_relations: usize,
        triples: Vec<(u32, u32, u32)>,
        alignment: Vec<u32>,
        bidirectional: bool,
    ) -> Result<Self> {
        for &(h, r, t) in &triples {
            if (h as usize) >= num_entities
                || (t as usize) >= num_entities
                || (r as usize) >= num_relations
            {
                return Err(Error::InvalidGraph(format!(
                    "triple ({h},{r},{t}) out of range"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (idx, &e) in alignment.iter().enumerate() {
            if (e as usize) >= num_entities {
                return Err(Error::InvalidGraph(format!(
                    "alignment of item {idx} out of range"
                )));
            }
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "alignment not injective at entity {e}"
                )));
            }
        }
        let mut kg = Self {
            num_entities,
            num_relations,
            triples,
            entity_adj: Vec::new(),
            incoming: Vec::new(),
            alignment,
            bidirectional,
        };
        kg.rebuild_adjacency();
        Ok(kg)
    }

    fn rebuild_adjacency(&mut self) {
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.num_entities];
        for &(h, r, t) in &self.triples {
            adj[h as usize].push((r, t));
            if self.bidirectional {
                adj[t as usize].push((r, h));
            }
        }
        let mut incoming: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.num_entities];
        for (h, edges) in adj.iter().enumerate() {
            for &(r, t) in edges {
                incoming[t as usize].push((r, h as u32));
            }
        }
        self.entity_adj = adj;
        self.incoming = incoming;
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }
}

/// Train/valid/test interaction views over one id space, plus the KG and the
/// external-key dictionaries.
#[derive(Clone, Debug)]
pub struct DatasetBundle {
    pub train: InteractionGraph,
    pub valid: InteractionGraph,
    pub test: InteractionGraph,
    pub kg: KnowledgeGraph,
    pub user_keys: Vec<String>,
    pub item_keys: Vec<String>,
    pub entity_keys: Vec<String>,
    pub relation_keys: Vec<String>,
}

/// One BPR training batch of (user, positive item, negative item) triples.
#[derive(Clone, Debug)]
pub struct BprBatch {
    pub triples: Vec<(u32, u32, u32)>,
}

impl BprBatch {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.lines().map(|s| s.to_string()).collect())
}

/// Assigns dense 0-based ids in first-appearance order.
#[derive(Debug, Default)]
pub struct IdMap {
    pub keys: Vec<String>,
    index: HashMap<String, u32>,
}

impl IdMap {
    pub fn intern(&mut self, key: &str) -> u32 {
        if let Some(&id) = self.index.get(key) {
            return id;
        }
        let id = self.keys.len() as u32;
        self.keys.push(key.to_string());
        self.index.insert(key.to_string(), id);
        id
    }

    pub fn get(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

fn parse_interactions(
    path: &Path,
    users: &mut IdMap,
    items: &mut IdMap,
) -> Result<Vec<(u32, u32)>> {
    let lines = read_lines(path)?;
    let mut edges = Vec::new();
    for (lineno, line) in lines.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (u, i) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(i), None) if !u.is_empty() && !i.is_empty() => (u, i),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected `user<TAB>item`, got `{line}`"),
                })
            }
        };
        edges.push((users.intern(u), items.intern(i)));
    }
    if edges.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(edges)
}

/// Load a single interactions file; ids assigned in first-appearance order,
/// duplicate lines collapsed.
pub fn load_interaction_graph(path: &Path) -> Result<(InteractionGraph, IdMap, IdMap)> {
    let mut users = IdMap::default();
    let mut items = IdMap::default();
    let edges = parse_interactions(path, &mut users, &mut items)?;
    let graph = InteractionGraph::from_edges(users.len(), items.len(), &edges)?;
    Ok((graph, users, items))
}

/// Load the KG triples and the item-entity alignment. Items without an
/// alignment line get fresh isolated entities.
pub fn load_knowledge_graph(
    kg_path: &Path,
    alignment_path: &Path,
    items: &IdMap,
    bidirectional: bool,
) -> Result<(KnowledgeGraph, IdMap, IdMap)> {
    let mut entities = IdMap::default();
    let mut relations = IdMap::default();
    let mut triples = Vec::new();
    for (lineno, line) in read_lines(kg_path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (h, r, t) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(h), Some(r), Some(t), None) if !h.is_empty() && !r.is_empty() && !t.is_empty() => {
                (h, r, t)
            }
            _ => {
                return Err(Error::Parse {
                    path: kg_path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected `head<TAB>relation<TAB>tail`, got `{line}`"),
                })
            }
        };
        triples.push((entities.intern(h), relations.intern(r), entities.intern(t)));
    }

    let mut alignment: Vec<Option<u32>> = vec![None; items.len()];
    for (lineno, line) in read_lines(alignment_path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (item_key, entity_key) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => (a, b),
            _ => {
                return Err(Error::Parse {
                    path: alignment_path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected `item<TAB>entity`, got `{line}`"),
                })
            }
        };
        let item = items
            .get(item_key)
            .ok_or_else(|| Error::UnknownItemKey(item_key.to_string()))?;
        if alignment[item as usize].is_some() {
            return Err(Error::DuplicateAlignment(item_key.to_string()));
        }
        alignment[item as usize] = Some(entities.intern(entity_key));
    }
    // Unaligned items become fresh isolated entities.
    let mut dense = Vec::with_capacity(items.len());
    for (idx, slot) in alignment.iter().enumerate() {
        match slot {
            Some(e) => dense.push(*e),
            None => dense.push(entities.intern(&format!("__item_{}", items.keys[idx]))),
        }
    }
    let kg = KnowledgeGraph::new(
        entities.len(),
        relations.len().max(1),
        triples,
        dense,
        bidirectional,
    )?;
    Ok((kg, entities, relations))
}

/// Load a dataset directory written by the synthetic generator (or prepared
/// externally): `train.tsv`, `valid.tsv`, `test.tsv`, `kg.tsv`,
/// `alignment.tsv`. The three interaction files share one id space.
pub fn load_bundle(dir: &Path, bidirectional_kg: bool) -> Result<DatasetBundle> {
    let mut users = IdMap::default();
    let mut items = IdMap::default();
    let train_edges = parse_interactions(&dir.join("train.tsv"), &mut users, &mut items)?;
    let valid_edges = parse_split_optional(&dir.join("valid.tsv"), &mut users, &mut items)?;
    let test_edges = parse_split_optional(&dir.join("test.tsv"), &mut users, &mut items)?;
    let (nu, ni) = (users.len(), items.len());
    let train = InteractionGraph::from_edges(nu, ni, &train_edges)?;
    let valid = InteractionGraph::from_edges(nu, ni, &valid_edges)?;
    let test = InteractionGraph::from_edges(nu, ni, &test_edges)?;
    let (kg, entities, relations) = load_knowledge_graph(
        &dir.join("kg.tsv"),
        &dir.join("alignment.tsv"),
        &items,
        bidirectional_kg,
    )?;
    Ok(DatasetBundle {
        train,
        valid,
        test,
        kg,
        user_keys: users.keys,
        item_keys: items.keys,
        entity_keys: entities.keys,
        relation_keys: relations.keys,
    })
}

// valid/test splits may legitimately be empty
fn parse_split_optional(
    path: &Path,
    users: &mut IdMap,
    items: &mut IdMap,
) -> Result<Vec<(u32, u32)>> {
    match parse_interactions(path, users, items) {
        Ok(edges) => Ok(edges),
        Err(Error::EmptyFile(_)) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Per-user random split. Users with fewer than 3 edges keep everything in
/// train; otherwise test and valid each get `floor(frac * n)` edges and the
/// remainder goes to train.
pub fn split_interactions(
    graph: &InteractionGraph,
    ratios: (f64, f64, f64),
    rng: &mut impl Rng,
) -> Result<(InteractionGraph, InteractionGraph, InteractionGraph)> {
    let (tr, va, te) = ratios;
    if tr <= 0.0 || va < 0.0 || te < 0.0 || (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split ratios must be positive and sum to 1, got ({tr},{va},{te})"
        )));
    }
    let mut train = Vec::new();
    let mut valid = Vec::new();
    let mut test = Vec::new();
    for (u, adj) in graph.user_adj.iter().enumerate() {
        let mut edges: Vec<u32> = adj.clone();
        if edges.len() < 3 {
            train.extend(edges.iter().map(|&i| (u as u32, i)));
            continue;
        }
        // Fisher-Yates with the shared rng; order is deterministic per seed.
        for k in (1..edges.len()).rev() {
            let j = rng.gen_range(0..=k);
            edges.swap(k, j);
        }
        let n = edges.len();
        let n_va = (va * n as f64).floor() as usize;
        let n_te = (te * n as f64).floor() as usize;
        for (idx, &i) in edges.iter().enumerate() {
            if idx < n_te {
                test.push((u as u32, i));
            } else if idx < n_te + n_va {
                valid.push((u as u32, i));
            } else {
                train.push((u as u32, i));
            }
        }
    }
    Ok((
        InteractionGraph::from_edges(graph.num_users, graph.num_items, &train)?,
        InteractionGraph::from_edges(graph.num_users, graph.num_items, &valid)?,
        InteractionGraph::from_edges(graph.num_users, graph.num_items, &test)?,
    ))
}

const NEG_RETRIES_PER_EDGE: usize = 200;
const EDGE_RESAMPLES: usize = 50;

/// Sample a BPR batch: (u, pos) uniform over training edges, neg uniform over
/// items with rejection until the pair is unobserved.
pub fn sample_bpr_batch(
    train: &InteractionGraph,
    edges: &[(u32, u32)],
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<BprBatch> {
    assert!(batch_size >= 1);
    assert!(!edges.is_empty());
    let mut triples = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let mut placed = false;
        'edge: for _ in 0..EDGE_RESAMPLES {
            let (u, pos) = edges[rng.gen_range(0..edges.len())];
            for _ in 0..NEG_RETRIES_PER_EDGE {
                let neg = rng.gen_range(0..train.num_items as u32);
                if !train.has_edge(u, neg) {
                    triples.push((u, pos, neg));
                    placed = true;
                    break 'edge;
                }
            }
        }
        if !placed {
            return Err(Error::NegativeSamplingExhausted);
        }
    }
    Ok(BprBatch { triples })
}

/// Keep each interaction edge independently with probability `keep_rate`;
/// rebuild adjacency and norms on the survivors. Node counts are unchanged.
pub fn augment_interactions(
    graph: &InteractionGraph,
    keep_rate: f64,
    rng: &mut impl Rng,
) -> Result<InteractionGraph> {
    assert!(keep_rate > 0.0 && keep_rate <= 1.0);
    let kept: Vec<(u32, u32)> = graph
        .flat_edges()
        .into_iter()
        .filter(|_| rng.gen::<f64>() < keep_rate)
        .collect();
    InteractionGraph::from_edges(graph.num_users, graph.num_items, &kept)
}

/// Keep each KG triple independently with probability `keep_rate`.
pub fn augment_kg(kg: &KnowledgeGraph, keep_rate: f64, rng: &mut impl Rng) -> Result<KnowledgeGraph> {
    assert!(keep_rate > 0.0 && keep_rate <= 1.0);
    let kept: Vec<(u32, u32, u32)> = kg
        .triples
        .iter()
        .filter(|_| rng.gen::<f64>() < keep_rate)
        .copied()
        .collect();
    KnowledgeGraph::new(
        kg.num_entities,
        kg.num_relations,
        kept,
        kg.alignment.clone(),
        kg.bidirectional,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::io::Write;
    use std::path::PathBuf;

    fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        p
    }

    #[test]
    fn load_small_interactions() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "x.tsv", "a\ti1\na\ti2\n");
        let (g, users, items) = load_interaction_graph(&p).unwrap();
        assert_eq!(g.num_users, 1);
        assert_eq!(g.num_items, 2);
        assert_eq!(g.deg_user(0), 2);
        assert_eq!(users.keys, vec!["a"]);
        assert_eq!(items.keys, vec!["i1", "i2"]);
        // deg(a)=2, deg(i1)=1 -> 1/sqrt(2)
        assert!((g.norm_user[0][0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn duplicate_lines_collapse() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "x.tsv", "a\ti1\na\ti1\n");
        let (g, _, _) = load_interaction_graph(&p).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn malformed_line_reports_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "x.tsv", "a\ti1\nbroken line\n");
        match load_interaction_graph(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(dir.path(), "x.tsv", "");
        assert!(matches!(
            load_interaction_graph(&p),
            Err(Error::EmptyFile(_))
        ));
    }

    #[test]
    fn transpose_consistency_and_degree_sum() {
        let edges = vec![(0, 0), (0, 1), (1, 1), (2, 0), (2, 2)];
        let g = InteractionGraph::from_edges(3, 3, &edges).unwrap();
        for (u, adj) in g.user_adj.iter().enumerate() {
            for &i in adj {
                assert!(g.item_adj[i as usize].contains(&(u as u32)));
            }
        }
        let su: usize = g.user_adj.iter().map(|a| a.len()).sum();
        let si: usize = g.item_adj.iter().map(|a| a.len()).sum();
        assert_eq!(su, si);
        assert_eq!(su, 5);
    }

    #[test]
    fn kg_load_inverse_option() {
        let dir = tempfile::tempdir().unwrap();
        let kgp = write_file(dir.path(), "kg.tsv", "e0\tr0\te1\n");
        let alp = write_file(dir.path(), "al.tsv", "i\te0\n");
        let mut items = IdMap::default();
        items.intern("i");
        let (kg, _, _) = load_knowledge_graph(&kgp, &alp, &items, false).unwrap();
        assert_eq!(kg.entity_adj[0], vec![(0, 1)]);
        assert!(kg.entity_adj[1].is_empty());
        let (kg2, _, _) = load_knowledge_graph(&kgp, &alp, &items, true).unwrap();
        assert_eq!(kg2.entity_adj[1], vec![(0, 0)]);
    }

    #[test]
    fn kg_alignment_errors() {
        let dir = tempfile::tempdir().unwrap();
        let kgp = write_file(dir.path(), "kg.tsv", "e0\tr0\te1\n");
        let mut items = IdMap::default();
        items.intern("i");
        let bad = write_file(dir.path(), "bad.tsv", "zzz\te0\n");
        assert!(matches!(
            load_knowledge_graph(&kgp, &bad, &items, true),
            Err(Error::UnknownItemKey(_))
        ));
        let dup = write_file(dir.path(), "dup.tsv", "i\te0\ni\te1\n");
        assert!(matches!(
            load_knowledge_graph(&kgp, &dup, &items, true),
            Err(Error::DuplicateAlignment(_))
        ));
    }

    #[test]
    fn unaligned_items_get_isolated_entities() {
        let dir = tempfile::tempdir().unwrap();
        let kgp = write_file(dir.path(), "kg.tsv", "e0\tr0\te1\n");
        let alp = write_file(dir.path(), "al.tsv", "i0\te0\n");
        let mut items = IdMap::default();
        items.intern("i0");
        items.intern("i1");
        let (kg, _, _) = load_knowledge_graph(&kgp, &alp, &items, true).unwrap();
        assert_eq!(kg.num_entities, 3);
        let e1 = kg.alignment[1] as usize;
        assert!(kg.entity_adj[e1].is_empty());
    }

    #[test]
    fn split_rounding_and_small_users() {
        let edges: Vec<(u32, u32)> = (0..10).map(|i| (0, i)).chain([(1u32, 0u32)]).collect();
        let g = InteractionGraph::from_edges(2, 10, &edges).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let (tr, va, te) = split_interactions(&g, (0.8, 0.1, 0.1), &mut rng).unwrap();
        assert_eq!(tr.deg_user(0), 8);
        assert_eq!(va.deg_user(0), 1);
        assert_eq!(te.deg_user(0), 1);
        assert_eq!(tr.deg_user(1), 1);
        assert_eq!(va.deg_user(1) + te.deg_user(1), 0);
    }

    #[test]
    fn split_deterministic_and_disjoint() {
        let mut edges = Vec::new();
        for u in 0..20u32 {
            for i in 0..8u32 {
                edges.push((u, (u + i * 3) % 50));
            }
        }
        let g = InteractionGraph::from_edges(20, 50, &edges).unwrap();
        let run = |seed| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            split_interactions(&g, (0.8, 0.1, 0.1), &mut rng).unwrap()
        };
        let (a, b, c) = run(3);
        let (a2, b2, c2) = run(3);
        assert_eq!(a.flat_edges(), a2.flat_edges());
        assert_eq!(b.flat_edges(), b2.flat_edges());
        assert_eq!(c.flat_edges(), c2.flat_edges());
        // edge-disjoint, union = original
        let mut all: Vec<_> = a.flat_edges();
        all.extend(b.flat_edges());
        all.extend(c.flat_edges());
        all.sort_unstable();
        let mut orig = g.flat_edges();
        orig.sort_unstable();
        assert_eq!(all, orig);
    }

    #[test]
    fn forced_negative() {
        // u0 interacts with all items but item 3
        let edges = vec![(0, 0), (0, 1), (0, 2)];
        let g = InteractionGraph::from_edges(1, 4, &edges).unwrap();
        let flat = g.flat_edges();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..20 {
            let b = sample_bpr_batch(&g, &flat, 4, &mut rng).unwrap();
            assert!(b.triples.iter().all(|&(_, _, n)| n == 3));
        }
    }

    #[test]
    fn negatives_never_collide_with_train() {
        let mut edges = Vec::new();
        for u in 0..10u32 {
            for i in 0..5u32 {
                edges.push((u, (u * 2 + i) % 20));
            }
        }
        let g = InteractionGraph::from_edges(10, 20, &edges).unwrap();
        let flat = g.flat_edges();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let b = sample_bpr_batch(&g, &flat, 512, &mut rng).unwrap();
        assert_eq!(b.len(), 512);
        for &(u, pos, neg) in &b.triples {
            assert!(g.has_edge(u, pos));
            assert!(!g.has_edge(u, neg));
        }
    }

    #[test]
    fn pos_sampling_uniform_over_edges_chi_square() {
        // chi-square against uniform-over-edges on a skewed-degree graph;
        // item 4 stays free so every user has a negative candidate
        let edges = vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (2, 1)];
        let g = InteractionGraph::from_edges(3, 5, &edges).unwrap();
        let flat = g.flat_edges();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let draws = 1_000_000usize;
        let mut counts = std::collections::HashMap::new();
        let b = sample_bpr_batch(&g, &flat, draws, &mut rng).unwrap();
        for &(u, pos, _) in &b.triples {
            *counts.entry((u, pos)).or_insert(0usize) += 1;
        }
        let expected = draws as f64 / flat.len() as f64;
        let chi2: f64 = flat
            .iter()
            .map(|e| {
                let o = *counts.get(e).unwrap_or(&0) as f64;
                (o - expected).powi(2) / expected
            })
            .sum();
        // 5 dof, far tail cutoff
        assert!(chi2 < 30.0, "chi2 = {chi2}");
    }

    #[test]
    fn augment_identity_and_binomial_bound() {
        let mut edges = Vec::new();
        for u in 0..100u32 {
            for i in 0..100u32 {
                edges.push((u, i));
            }
        }
        let g = InteractionGraph::from_edges(100, 100, &edges).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let same = augment_interactions(&g, 1.0, &mut rng).unwrap();
        assert_eq!(same.flat_edges(), g.flat_edges());
        let half = augment_interactions(&g, 0.5, &mut rng).unwrap();
        let n = half.num_edges();
        assert!((4700..=5300).contains(&n), "survivors = {n}");
        // subgraph property
        for (u, i) in half.flat_edges() {
            assert!(g.has_edge(u, i));
        }
    }

    #[test]
    fn augment_rebuilds_norms() {
        let g = InteractionGraph::from_edges(1, 2, &[(0, 0), (0, 1)]).unwrap();
        // drop until exactly one edge survives
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        loop {
            let a = augment_interactions(&g, 0.5, &mut rng).unwrap();
            if a.num_edges() == 1 {
                let u_deg = a.deg_user(0);
                assert_eq!(u_deg, 1);
                assert!((a.norm_user[0][0] - 1.0).abs() < 1e-15);
                break;
            }
        }
    }

    #[test]
    fn augment_kg_subset() {
        let triples: Vec<(u32, u32, u32)> = (0..200).map(|k| (k % 20, k % 3, (k + 7) % 20)).collect();
        let kg = KnowledgeGraph::new(20, 3, triples.clone(), (0..5).map(|i| i).collect(), true).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = augment_kg(&kg, 0.5, &mut rng).unwrap();
        assert!(a.num_triples() < kg.num_triples());
        for t in &a.triples {
            assert!(triples.contains(t));
        }
        assert_eq!(a.num_entities, kg.num_entities);
    }
}

//! Forward pass: relation-aware KG propagation with per-layer L2
//! normalization, LightGCN-style IG propagation, one-direction layer-wise
//! fusion (KG -> IG only), and the two readouts used for scoring and
//! contrastive learning.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, KnowledgeGraph};
use crate::matrix::{dot, l2_norm, Matrix};
use crate::params::ModelParams;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct ForwardConfig {
    /// Propagation depth L >= 1.
    pub layers: usize,
    /// Layer-wise fusion KG -> IG; disabling gives the plain LightGCN path.
    pub fuse: bool,
    /// L2-normalize KG rows each layer.
    pub normalize: bool,
    /// Include layer 0 in the x readout (sensitivity flag; the default
    /// readout averages layers 1..L only).
    pub include_layer0_in_x: bool,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            fuse: true,
            normalize: true,
            include_layer0_in_x: false,
        }
    }
}

/// Instrumentation: full-graph sweep counts and IG propagation time.
#[derive(Clone, Copy, Debug, Default)]
pub struct PropagationCounters {
    pub forwards: u64,
    /// One per KG propagation layer executed.
    pub kg_layer_sweeps: u64,
    /// One per IG propagation layer executed.
    pub ig_layer_sweeps: u64,
    pub ig_nanos: u128,
}

/// All per-layer activations plus the caches the backward pass needs.
#[derive(Clone, Debug)]
pub struct ForwardOutput<T> {
    /// Entity embeddings per layer, post-normalization; length L+1.
    pub kg_entity_layers: Vec<Matrix<T>>,
    /// Pre-normalization row norms for entity layers 1..=L (index l-1);
    /// zero where normalization was skipped (empty neighborhood).
    pub kg_entity_norms: Vec<Vec<T>>,
    /// Item rows gathered from the aligned entities, per layer; length L+1.
    pub kg_item_layers: Vec<Matrix<T>>,
    /// KG-side user embeddings per layer (Eq. of user <- item <- entity),
    /// post-normalization; length L+1.
    pub kg_user_layers: Vec<Matrix<T>>,
    /// Pre-normalization norms for the user rows, layers 0..=L.
    pub kg_user_norms: Vec<Vec<T>>,
    /// Fused IG layers; index 0 holds the raw ego embeddings.
    pub ig_user_layers: Vec<Matrix<T>>,
    pub ig_item_layers: Vec<Matrix<T>>,
    /// Final predictive representations (mean of fused layers 1..L).
    pub x_user: Matrix<T>,
    pub x_item: Matrix<T>,
    /// Knowledge-aware representations (mean of KG layers 0..L).
    pub e_user: Matrix<T>,
    pub e_item: Matrix<T>,
    pub config: ForwardConfig,
}

/// One KG propagation layer over entities: mean of relation-rotated neighbor
/// messages, then optional per-row L2 normalization. Empty neighborhoods
/// yield zero rows and skip normalization. Returns the pre-norm row norms.
pub fn kg_propagate_layer<T: Scalar>(
    kg: &KnowledgeGraph,
    prev_entities: &Matrix<T>,
    relations: &Matrix<T>,
    normalize: bool,
) -> (Matrix<T>, Vec<T>) {
    assert_eq!(prev_entities.rows(), kg.num_entities);
    let d = prev_entities.cols();
    let mut out = Matrix::zeros(kg.num_entities, d);
    let mut norms = vec![T::zero(); kg.num_entities];
    let norms_slice: &mut [T] = &mut norms;
    // rows are independent: safe to fill norms through a raw pointer wrapper
    let norms_ptr = SharedRows(norms_slice.as_mut_ptr());
    out.compute_rows(|h, row| {
        let adj = &kg.entity_adj[h];
        if adj.is_empty() {
            return;
        }
        for &(r, t) in adj {
            let rel = relations.row(r as usize);
            let src = prev_entities.row(t as usize);
            for ((o, &a), &b) in row.iter_mut().zip(rel.iter()).zip(src.iter()) {
                *o += a * b;
            }
        }
        let inv = T::one() / T::c(adj.len() as f64);
        for o in row.iter_mut() {
            *o *= inv;
        }
        let n = l2_norm(row);
        unsafe { norms_ptr.set(h, n) };
        if normalize && n > T::zero() {
            for o in row.iter_mut() {
                *o /= n;
            }
        }
    });
    (out, norms)
}

// Wrapper so independent per-row writes can cross the Sync bound.
struct SharedRows<T>(*mut T);
unsafe impl<T> Sync for SharedRows<T> {}
unsafe impl<T> Send for SharedRows<T> {}

impl<T> SharedRows<T> {
    /// Safety: each index must be written by at most one row closure.
    unsafe fn set(&self, idx: usize, v: T) {
        *self.0.add(idx) = v;
    }
}

/// Gather item rows from their aligned entity rows.
pub fn gather_items<T: Scalar>(kg: &KnowledgeGraph, entities: &Matrix<T>) -> Matrix<T> {
    let d = entities.cols();
    let mut out = Matrix::zeros(kg.alignment.len(), d);
    out.compute_rows(|i, row| {
        row.copy_from_slice(entities.row(kg.alignment[i] as usize));
    });
    out
}

/// KG user layer: symmetric-normalized aggregation of the KG item rows over
/// the interaction graph, then optional L2 normalization per row.
pub fn kg_user_aggregate<T: Scalar>(
    ig: &InteractionGraph,
    kg_items: &Matrix<T>,
    normalize: bool,
) -> (Matrix<T>, Vec<T>) {
    assert_eq!(kg_items.rows(), ig.num_items);
    let d = kg_items.cols();
    let mut out = Matrix::zeros(ig.num_users, d);
    let mut norms = vec![T::zero(); ig.num_users];
    let norms_ptr = SharedRows(norms.as_mut_ptr());
    out.compute_rows(|u, row| {
        let adj = &ig.user_adj[u];
        if adj.is_empty() {
            return;
        }
        for (&i, &c) in adj.iter().zip(ig.norm_user[u].iter()) {
            let c = T::c(c);
            let src = kg_items.row(i as usize);
            for (o, &x) in row.iter_mut().zip(src.iter()) {
                *o += c * x;
            }
        }
        let n = l2_norm(row);
        unsafe { norms_ptr.set(u, n) };
        if normalize && n > T::zero() {
            for o in row.iter_mut() {
                *o /= n;
            }
        }
    });
    (out, norms)
}

/// One LightGCN propagation layer: symmetric-normalized neighborhood sums on
/// both sides, no output normalization.
pub fn ig_propagate_layer<T: Scalar>(
    ig: &InteractionGraph,
    x_users: &Matrix<T>,
    x_items: &Matrix<T>,
) -> (Matrix<T>, Matrix<T>) {
    assert_eq!(x_users.rows(), ig.num_users);
    assert_eq!(x_items.rows(), ig.num_items);
    let d = x_users.cols();
    let mut next_users = Matrix::zeros(ig.num_users, d);
    next_users.compute_rows(|u, row| {
        for (&i, &c) in ig.user_adj[u].iter().zip(ig.norm_user[u].iter()) {
            let c = T::c(c);
            for (o, &x) in row.iter_mut().zip(x_items.row(i as usize).iter()) {
                *o += c * x;
            }
        }
    });
    let mut next_items = Matrix::zeros(ig.num_items, d);
    next_items.compute_rows(|i, row| {
        for (&u, &c) in ig.item_adj[i].iter().zip(ig.norm_item[i].iter()) {
            let c = T::c(c);
            for (o, &x) in row.iter_mut().zip(x_users.row(u as usize).iter()) {
                *o += c * x;
            }
        }
    });
    (next_users, next_items)
}

/// Elementwise fusion x^(l) += e^(l). KG-side matrices are never modified.
pub fn fuse_layer<T: Scalar>(
    x_users: &mut Matrix<T>,
    x_items: &mut Matrix<T>,
    e_users: &Matrix<T>,
    e_items: &Matrix<T>,
) {
    x_users.add_assign(e_users);
    x_items.add_assign(e_items);
}

/// Inner-product score.
pub fn score<T: Scalar>(x_u: &[T], x_i: &[T]) -> T {
    dot(x_u, x_i)
}

fn mean_of<T: Scalar>(layers: &[Matrix<T>], from: usize) -> Matrix<T> {
    let mut out = Matrix::zeros(layers[0].rows(), layers[0].cols());
    for m in &layers[from..] {
        out.add_assign(m);
    }
    out.scale(T::one() / T::c((layers.len() - from) as f64));
    out
}

/// Full forward pass; one KG sweep and one IG sweep per layer.
pub fn forward<T: Scalar>(
    params: &ModelParams<T>,
    ig: &InteractionGraph,
    kg: &KnowledgeGraph,
    cfg: &ForwardConfig,
    counters: &mut PropagationCounters,
) -> Result<ForwardOutput<T>> {
    if cfg.layers < 1 {
        return Err(Error::ShapeMismatch("layers must be >= 1".into()));
    }
    if params.ig_user.rows() != ig.num_users
        || params.ig_item.rows() != ig.num_items
        || params.kg_entity.rows() != kg.num_entities
        || params.kg_relation.rows() != kg.num_relations
    {
        return Err(Error::ShapeMismatch(
            "parameter tables do not match graph dimensions".into(),
        ));
    }
    let l_max = cfg.layers;
    counters.forwards += 1;

    let mut kg_entity_layers = vec![params.kg_entity.clone()];
    let mut kg_entity_norms = Vec::new();
    let mut kg_item_layers = vec![gather_items(kg, &kg_entity_layers[0])];
    let (u0, n0) = kg_user_aggregate(ig, &kg_item_layers[0], cfg.normalize);
    let mut kg_user_layers = vec![u0];
    let mut kg_user_norms = vec![n0];

    let mut ig_user_layers = vec![params.ig_user.clone()];
    let mut ig_item_layers = vec![params.ig_item.clone()];

    for l in 1..=l_max {
        let (ent, norms) =
            kg_propagate_layer(kg, &kg_entity_layers[l - 1], &params.kg_relation, cfg.normalize);
        counters.kg_layer_sweeps += 1;
        let items = gather_items(kg, &ent);
        let (users, unorms) = kg_user_aggregate(ig, &items, cfg.normalize);
        kg_entity_layers.push(ent);
        kg_entity_norms.push(norms);
        kg_item_layers.push(items);
        kg_user_layers.push(users);
        kg_user_norms.push(unorms);

        let t0 = Instant::now();
        let (mut xu, mut xi) =
            ig_propagate_layer(ig, &ig_user_layers[l - 1], &ig_item_layers[l - 1]);
        counters.ig_nanos += t0.elapsed().as_nanos();
        counters.ig_layer_sweeps += 1;
        if cfg.fuse {
            fuse_layer(&mut xu, &mut xi, &kg_user_layers[l], &kg_item_layers[l]);
        }
        ig_user_layers.push(xu);
        ig_item_layers.push(xi);
    }

    let x_from = if cfg.include_layer0_in_x { 0 } else { 1 };
    let x_user = mean_of(&ig_user_layers, x_from);
    let x_item = mean_of(&ig_item_layers, x_from);
    let e_user = mean_of(&kg_user_layers, 0);
    let e_item = mean_of(&kg_item_layers, 0);

    Ok(ForwardOutput {
        kg_entity_layers,
        kg_entity_norms,
        kg_item_layers,
        kg_user_layers,
        kg_user_norms,
        ig_user_layers,
        ig_item_layers,
        x_user,
        x_item,
        e_user,
        e_item,
        config: *cfg,
    })
}

//! BPR, cross-view InfoNCE, ego-embedding L2 regularization, the combined
//! training loss, and exact gradients of that loss with respect to all four
//! parameter tables. One forward pass per batch feeds both losses.

use crate::error::{Error, Result};
use crate::graph::{BprBatch, InteractionGraph, KnowledgeGraph};
use crate::matrix::{dot, l2_norm, Matrix};
use crate::params::{Gradients, ModelParams};
use crate::propagation::{ig_propagate_layer, ForwardOutput};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct LossConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub tau: f64,
    pub use_cl: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 1e-4,
            tau: 0.2,
            use_cl: true,
        }
    }
}

/// Per-batch loss terms; `total = bpr + lambda1*(cl_user+cl_item) + lambda2*reg`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossBreakdown {
    pub bpr: f64,
    pub cl_user: f64,
    pub cl_item: f64,
    pub reg: f64,
    pub total: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tau: f64,
}

pub fn total_loss(bpr: f64, cl_user: f64, cl_item: f64, reg: f64, cfg: &LossConfig) -> LossBreakdown {
    LossBreakdown {
        bpr,
        cl_user,
        cl_item,
        reg,
        total: bpr + cfg.lambda1 * (cl_user + cl_item) + cfg.lambda2 * reg,
        lambda1: cfg.lambda1,
        lambda2: cfg.lambda2,
        tau: cfg.tau,
    }
}

#[inline]
fn softplus<T: Scalar>(z: T) -> T {
    // ln(1 + e^z), stable for large |z|
    if z > T::zero() {
        z + (T::one() + (-z).exp()).ln()
    } else {
        (T::one() + z.exp()).ln()
    }
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Summed BPR loss and the per-pair derivative with respect to
/// (pos_score - neg_score), which is -sigmoid(-(pos-neg)).
pub fn bpr_loss<T: Scalar>(pos_scores: &[T], neg_scores: &[T]) -> (T, Vec<T>) {
    assert_eq!(pos_scores.len(), neg_scores.len());
    assert!(!pos_scores.is_empty());
    let mut loss = T::zero();
    let mut coeff = Vec::with_capacity(pos_scores.len());
    for (&p, &n) in pos_scores.iter().zip(neg_scores.iter()) {
        let delta = p - n;
        loss += softplus(-delta);
        coeff.push(-sigmoid(-delta));
    }
    (loss, coeff)
}

#[inline]
fn cosine<T: Scalar>(a: &[T], b: &[T]) -> (T, T, T) {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na == T::zero() || nb == T::zero() {
        return (T::zero(), na, nb); // zero-norm guard
    }
    (dot(a, b) / (na * nb), na, nb)
}

/// In-batch InfoNCE over paired rows: anchors row n against views rows m,
/// positives on the diagonal. Returns the summed loss plus gradients with
/// respect to every anchor and view row.
pub fn infonce_loss<T: Scalar>(
    anchors: &Matrix<T>,
    views: &Matrix<T>,
    tau: T,
) -> (T, Matrix<T>, Matrix<T>) {
    let n = anchors.rows();
    let d = anchors.cols();
    assert_eq!(views.rows(), n);
    assert!(n >= 2, "InfoNCE needs at least 2 distinct nodes in the batch");
    assert!(tau > T::zero());

    // cosine matrix
    let mut cos = Matrix::zeros(n, n);
    cos.compute_rows(|a, row| {
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = cosine(anchors.row(a), views.row(m)).0;
        }
    });

    let mut loss = T::zero();
    // dL/d cos_{a,m}
    let mut gcos = Matrix::zeros(n, n);
    for a in 0..n {
        let srow = cos.row(a);
        let mx = srow
            .iter()
            .map(|&c| c / tau)
            .fold(T::neg_infinity(), |acc, v| if v > acc { v } else { acc });
        let mut z = T::zero();
        for &c in srow {
            z += (c / tau - mx).exp();
        }
        loss += -(srow[a] / tau) + mx + z.ln();
        let grow = gcos.row_mut(a);
        for (m, &c) in srow.iter().enumerate() {
            let p = (c / tau - mx).exp() / z;
            let mut g = p;
            if m == a {
                g -= T::one();
            }
            grow[m] = g / tau;
        }
    }

    let mut g_anchor = Matrix::zeros(n, d);
    g_anchor.compute_rows(|a, row| {
        let x = anchors.row(a);
        let nx = l2_norm(x);
        if nx == T::zero() {
            return;
        }
        for m in 0..n {
            let g = gcos.row(a)[m];
            if g == T::zero() {
                continue;
            }
            let e = views.row(m);
            let ne = l2_norm(e);
            if ne == T::zero() {
                continue;
            }
            let c = cos.row(a)[m];
            for k in 0..d {
                row[k] += g * (e[k] / (nx * ne) - c * x[k] / (nx * nx));
            }
        }
    });
    let mut g_view = Matrix::zeros(n, d);
    g_view.compute_rows(|m, row| {
        let e = views.row(m);
        let ne = l2_norm(e);
        if ne == T::zero() {
            return;
        }
        for a in 0..n {
            let g = gcos.row(a)[m];
            if g == T::zero() {
                continue;
            }
            let x = anchors.row(a);
            let nx = l2_norm(x);
            if nx == T::zero() {
                continue;
            }
            let c = cos.row(a)[m];
            for k in 0..d {
                row[k] += g * (x[k] / (nx * ne) - c * e[k] / (ne * ne));
            }
        }
    });
    (loss, g_anchor, g_view)
}

/// Squared Frobenius norm of the ego rows touched by a batch, divided by the
/// batch size.
pub fn l2_reg<T: Scalar>(
    params: &ModelParams<T>,
    users: &[u32],
    items: &[u32],
    entities: &[u32],
    batch_size: usize,
) -> T {
    assert!(batch_size > 0);
    let mut s = T::zero();
    for &u in users {
        s += dot(params.ig_user.row(u as usize), params.ig_user.row(u as usize));
    }
    for &i in items {
        s += dot(params.ig_item.row(i as usize), params.ig_item.row(i as usize));
    }
    for &e in entities {
        s += dot(params.kg_entity.row(e as usize), params.kg_entity.row(e as usize));
    }
    s / T::c(batch_size as f64)
}

fn dedup_sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Backward through per-row L2 normalization: `y = v / ||v||` with the norm
/// cached from the forward pass; identity where normalization was skipped.
fn normalize_backward<T: Scalar>(
    grad_post: &Matrix<T>,
    post: &Matrix<T>,
    norms: &[T],
    normalize: bool,
) -> Matrix<T> {
    if !normalize {
        return grad_post.clone();
    }
    let d = grad_post.cols();
    let mut out = Matrix::zeros(grad_post.rows(), d);
    out.compute_rows(|r, row| {
        let g = grad_post.row(r);
        let n = norms[r];
        if n == T::zero() {
            row.copy_from_slice(g);
            return;
        }
        let y = post.row(r);
        let gy = dot(g, y);
        for k in 0..d {
            row[k] = (g[k] - gy * y[k]) / n;
        }
    });
    out
}

/// Transpose of `kg_user_aggregate`'s linear part: push user-row gradients
/// back onto item rows with the same symmetric-normalization coefficients.
fn aggregate_backward_to_items<T: Scalar>(ig: &InteractionGraph, g_users: &Matrix<T>) -> Matrix<T> {
    let d = g_users.cols();
    let mut out = Matrix::zeros(ig.num_items, d);
    out.compute_rows(|i, row| {
        for (&u, &c) in ig.item_adj[i].iter().zip(ig.norm_item[i].iter()) {
            let c = T::c(c);
            for (o, &x) in row.iter_mut().zip(g_users.row(u as usize).iter()) {
                *o += c * x;
            }
        }
    });
    out
}

/// Exact gradients of the combined loss for one batch, consuming the single
/// forward pass shared by the BPR and CL terms.
pub fn compute_gradients<T: Scalar>(
    params: &ModelParams<T>,
    ig: &InteractionGraph,
    kg: &KnowledgeGraph,
    fwd: &ForwardOutput<T>,
    batch: &BprBatch,
    cfg: &LossConfig,
) -> Result<(LossBreakdown, Gradients<T>)> {
    if batch.is_empty() {
        return Err(Error::ShapeMismatch("empty batch".into()));
    }
    if fwd.x_user.rows() != ig.num_users || fwd.x_item.rows() != ig.num_items {
        return Err(Error::ShapeMismatch(
            "forward cache does not match graph".into(),
        ));
    }
    let d = params.dim;
    let fcfg = fwd.config;
    let layers = fcfg.layers;
    let b = batch.len();
    let binv = T::c(1.0 / b as f64);

    let mut grads = Gradients::zeros_like(params);

    // gradients with respect to the readouts
    let mut g_xu = Matrix::zeros(ig.num_users, d);
    let mut g_xi = Matrix::zeros(ig.num_items, d);
    let mut g_eu = Matrix::zeros(ig.num_users, d);
    let mut g_ei = Matrix::zeros(ig.num_items, d);

    // ---- BPR (mean over the batch)
    let pos_scores: Vec<T> = batch
        .triples
        .iter()
        .map(|&(u, i, _)| dot(fwd.x_user.row(u as usize), fwd.x_item.row(i as usize)))
        .collect();
    let neg_scores: Vec<T> = batch
        .triples
        .iter()
        .map(|&(u, _, j)| dot(fwd.x_user.row(u as usize), fwd.x_item.row(j as usize)))
        .collect();
    let (bpr_sum, coeffs) = bpr_loss(&pos_scores, &neg_scores);
    let bpr_mean = (bpr_sum * binv).to_f64();
    for (k, &(u, i, j)) in batch.triples.iter().enumerate() {
        let c = coeffs[k] * binv;
        let (u, i, j) = (u as usize, i as usize, j as usize);
        let xp = fwd.x_item.row(i);
        let xn = fwd.x_item.row(j);
        let xu = fwd.x_user.row(u);
        let gu = g_xu.row_mut(u);
        for k2 in 0..d {
            gu[k2] += c * (xp[k2] - xn[k2]);
        }
        let gp = g_xi.row_mut(i);
        for k2 in 0..d {
            gp[k2] += c * xu[k2];
        }
        let gn = g_xi.row_mut(j);
        for k2 in 0..d {
            gn[k2] -= c * xu[k2];
        }
    }

    // ---- InfoNCE on deduplicated in-batch nodes (mean per side)
    let uniq_users = dedup_sorted(batch.triples.iter().map(|t| t.0).collect());
    let uniq_pos = dedup_sorted(batch.triples.iter().map(|t| t.1).collect());
    let mut cl_user = 0.0;
    let mut cl_item = 0.0;
    if cfg.use_cl && cfg.lambda1 != 0.0 {
        let tau = T::c(cfg.tau);
        let l1 = T::c(cfg.lambda1);
        for (ids, x_read, e_read, g_x, g_e, slot) in [
            (&uniq_users, &fwd.x_user, &fwd.e_user, &mut g_xu, &mut g_eu, &mut cl_user),
            (&uniq_pos, &fwd.x_item, &fwd.e_item, &mut g_xi, &mut g_ei, &mut cl_item),
        ] {
            if ids.len() < 2 {
                continue;
            }
            let n = ids.len();
            let gather = |src: &Matrix<T>| {
                let mut m = Matrix::zeros(n, d);
                for (k, &id) in ids.iter().enumerate() {
                    m.row_mut(k).copy_from_slice(src.row(id as usize));
                }
                m
            };
            let anchors = gather(x_read);
            let views = gather(e_read);
            let (sum, ga, gv) = infonce_loss(&anchors, &views, tau);
            let inv_n = T::c(1.0 / n as f64);
            *slot = (sum * inv_n).to_f64();
            let scale = l1 * inv_n;
            for (k, &id) in ids.iter().enumerate() {
                let dst = g_x.row_mut(id as usize);
                for (o, &g) in dst.iter_mut().zip(ga.row(k).iter()) {
                    *o += scale * g;
                }
                let dst = g_e.row_mut(id as usize);
                for (o, &g) in dst.iter_mut().zip(gv.row(k).iter()) {
                    *o += scale * g;
                }
            }
        }
    }

    // ---- L2 regularization over ego rows touched by the batch
    let mut item_rows: Vec<u32> = batch.triples.iter().map(|t| t.1).collect();
    item_rows.extend(batch.triples.iter().map(|t| t.2));
    let reg_items = dedup_sorted(item_rows);
    let reg_entities =
        dedup_sorted(reg_items.iter().map(|&i| kg.alignment[i as usize]).collect());
    let reg = l2_reg(params, &uniq_users, &reg_items, &reg_entities, b).to_f64();
    let reg_scale = T::c(cfg.lambda2 * 2.0) * binv;
    for &u in &uniq_users {
        let src = params.ig_user.row(u as usize);
        let dst = grads.ig_user.data.row_mut(u as usize);
        for (o, &x) in dst.iter_mut().zip(src.iter()) {
            *o += reg_scale * x;
        }
    }
    for &i in &reg_items {
        let src = params.ig_item.row(i as usize);
        let dst = grads.ig_item.data.row_mut(i as usize);
        for (o, &x) in dst.iter_mut().zip(src.iter()) {
            *o += reg_scale * x;
        }
    }
    for &e in &reg_entities {
        let src = params.kg_entity.row(e as usize);
        let dst = grads.kg_entity.data.row_mut(e as usize);
        for (o, &x) in dst.iter_mut().zip(src.iter()) {
            *o += reg_scale * x;
        }
    }

    // ---- readout backward: per-layer gradients for the KG view
    let mut g_kg_user: Vec<Matrix<T>> = (0..=layers)
        .map(|_| Matrix::zeros(ig.num_users, d))
        .collect();
    let mut g_kg_entity: Vec<Matrix<T>> = (0..=layers)
        .map(|_| Matrix::zeros(kg.num_entities, d))
        .collect();
    let e_share = T::c(1.0 / (layers + 1) as f64);
    for l in 0..=layers {
        g_kg_user[l].add_scaled(&g_eu, e_share);
        // item-side readout gradient lands on the aligned entity rows
        for i in 0..ig.num_items {
            let ent = kg.alignment[i] as usize;
            let src = g_ei.row(i);
            let dst = g_kg_entity[l].row_mut(ent);
            for (o, &x) in dst.iter_mut().zip(src.iter()) {
                *o += e_share * x;
            }
        }
    }

    // ---- IG chain backward (fused layers feed the next propagation layer)
    let x_from = if fcfg.include_layer0_in_x { 0 } else { 1 };
    let x_share = T::c(1.0 / (layers + 1 - x_from) as f64);
    let mut cur_u = Matrix::zeros(ig.num_users, d);
    let mut cur_i = Matrix::zeros(ig.num_items, d);
    for l in (1..=layers).rev() {
        if l >= x_from {
            cur_u.add_scaled(&g_xu, x_share);
            cur_i.add_scaled(&g_xi, x_share);
        }
        if fcfg.fuse {
            g_kg_user[l].add_assign(&cur_u);
            for i in 0..ig.num_items {
                let ent = kg.alignment[i] as usize;
                let src = cur_i.row(i);
                let dst = g_kg_entity[l].row_mut(ent);
                for (o, &x) in dst.iter_mut().zip(src.iter()) {
                    *o += x;
                }
            }
        }
        let (nu, ni) = ig_propagate_layer(ig, &cur_u, &cur_i);
        cur_u = nu;
        cur_i = ni;
    }
    if x_from == 0 {
        cur_u.add_scaled(&g_xu, x_share);
        cur_i.add_scaled(&g_xi, x_share);
    }
    grads.ig_user.data.add_assign(&cur_u);
    grads.ig_item.data.add_assign(&cur_i);

    // ---- KG chain backward, top layer down
    for l in (0..=layers).rev() {
        // user rows: normalization then aggregation transpose onto items,
        // which are views of the aligned entity rows
        let gu_pre = normalize_backward(
            &g_kg_user[l],
            &fwd.kg_user_layers[l],
            &fwd.kg_user_norms[l],
            fcfg.normalize,
        );
        let g_items = aggregate_backward_to_items(ig, &gu_pre);
        for i in 0..ig.num_items {
            let ent = kg.alignment[i] as usize;
            let src = g_items.row(i);
            let dst = g_kg_entity[l].row_mut(ent);
            for (o, &x) in dst.iter_mut().zip(src.iter()) {
                *o += x;
            }
        }
        if l >= 1 {
            let ge_pre = normalize_backward(
                &g_kg_entity[l],
                &fwd.kg_entity_layers[l],
                &fwd.kg_entity_norms[l - 1],
                fcfg.normalize,
            );
            let prev = &fwd.kg_entity_layers[l - 1];
            // propagate gradient to previous entity layer (row-parallel via
            // the reverse adjacency)
            let mut down = Matrix::zeros(kg.num_entities, d);
            down.compute_rows(|t, row| {
                for &(r, h) in &kg.incoming[t] {
                    let deg = kg.entity_adj[h as usize].len();
                    let w = T::one() / T::c(deg as f64);
                    let rel = params.kg_relation.row(r as usize);
                    let g = ge_pre.row(h as usize);
                    for k in 0..d {
                        row[k] += w * rel[k] * g[k];
                    }
                }
            });
            g_kg_entity[l - 1].add_assign(&down);
            // relation gradients (product rule into e_r)
            for h in 0..kg.num_entities {
                let adj = &kg.entity_adj[h];
                if adj.is_empty() {
                    continue;
                }
                let w = T::one() / T::c(adj.len() as f64);
                let g = ge_pre.row(h);
                for &(r, t) in adj {
                    let src = prev.row(t as usize);
                    let dst = grads.kg_relation.data.row_mut(r as usize);
                    for k in 0..d {
                        dst[k] += w * src[k] * g[k];
                    }
                }
            }
        } else {
            grads.kg_entity.data.add_assign(&g_kg_entity[0]);
        }
    }

    grads.mark_nonzero_rows();
    let breakdown = total_loss(bpr_mean, cl_user, cl_item, reg, cfg);
    if !breakdown.total.is_finite() {
        return Err(Error::NonFiniteGradient("loss"));
    }
    Ok((breakdown, grads))
}

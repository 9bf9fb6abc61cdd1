//! Full-ranking top-K evaluation with train-item masking: Recall@K and
//! NDCG@K averaged over users with non-empty test sets.

use crate::error::Result;
use crate::graph::{DatasetBundle, InteractionGraph};
use crate::matrix::{dot, Matrix};
use crate::params::ModelParams;
use crate::propagation::{forward, ForwardConfig, PropagationCounters};
use crate::scalar::Scalar;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Split {
    Validation,
    Test,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MetricsReport {
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
    pub users_evaluated: usize,
}

/// Scores = inner products against every item; training items are masked
/// out; ties break by ascending item id. Returns up to K item ids in
/// descending score order.
pub fn rank_for_user<T: Scalar>(
    x_u: &[T],
    x_items: &Matrix<T>,
    train_items_of_u: &[u32],
    k: usize,
) -> Vec<u32> {
    assert!(k >= 1);
    let mut scored: Vec<(u32, T)> = (0..x_items.rows() as u32)
        .filter(|i| train_items_of_u.binary_search(i).is_err())
        .map(|i| (i, dot(x_u, x_items.row(i as usize))))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    // partial selection, then sort only the top slice
    let cmp = |a: &(u32, T), b: &(u32, T)| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    };
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    scored.into_iter().map(|(i, _)| i).collect()
}

pub fn recall_at_k(topk: &[u32], test_items: &[u32]) -> f64 {
    assert!(!test_items.is_empty());
    let hits = topk
        .iter()
        .filter(|i| test_items.binary_search(i).is_ok())
        .count();
    hits as f64 / test_items.len() as f64
}

pub fn ndcg_at_k(topk: &[u32], test_items: &[u32]) -> f64 {
    assert!(!test_items.is_empty());
    let mut dcg = 0.0;
    for (rank0, i) in topk.iter().enumerate() {
        if test_items.binary_search(i).is_ok() {
            dcg += 1.0 / ((rank0 + 2) as f64).log2();
        }
    }
    let ideal = topk.len().min(test_items.len()).max(1);
    let idcg: f64 = (1..=ideal).map(|p| 1.0 / ((p + 1) as f64).log2()).sum();
    dcg / idcg
}

/// Metrics for one user, or None when the split holds nothing for them.
fn user_metrics<T: Scalar>(
    u: usize,
    x_user: &Matrix<T>,
    x_item: &Matrix<T>,
    train: &InteractionGraph,
    split: &InteractionGraph,
    k: usize,
) -> Option<(f64, f64)> {
    let test_items = &split.user_adj[u];
    if test_items.is_empty() {
        return None;
    }
    let topk = rank_for_user(x_user.row(u), x_item, &train.user_adj[u], k);
    Some((recall_at_k(&topk, test_items), ndcg_at_k(&topk, test_items)))
}

/// Full-ranking evaluation of readout embeddings against one split.
pub fn evaluate_embeddings<T: Scalar>(
    x_user: &Matrix<T>,
    x_item: &Matrix<T>,
    train: &InteractionGraph,
    split: &InteractionGraph,
    k: usize,
) -> MetricsReport {
    let users: Vec<usize> = (0..train.num_users).collect();
    let per_user: Vec<Option<(f64, f64)>> = {
        #[cfg(feature = "parallel")]
        {
            users
                .par_iter()
                .map(|&u| user_metrics(u, x_user, x_item, train, split, k))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            users
                .iter()
                .map(|&u| user_metrics(u, x_user, x_item, train, split, k))
                .collect()
        }
    };
    let mut recall = 0.0;
    let mut ndcg = 0.0;
    let mut n = 0usize;
    for m in per_user.into_iter().flatten() {
        recall += m.0;
        ndcg += m.1;
        n += 1;
    }
    if n > 0 {
        recall /= n as f64;
        ndcg /= n as f64;
    }
    MetricsReport {
        k,
        recall,
        ndcg,
        users_evaluated: n,
    }
}

/// One forward on the un-augmented graphs, then full-ranking metrics.
pub fn evaluate<T: Scalar>(
    params: &ModelParams<T>,
    bundle: &DatasetBundle,
    fcfg: &ForwardConfig,
    split: Split,
    k: usize,
) -> Result<MetricsReport> {
    let mut counters = PropagationCounters::default();
    let fwd = forward(params, &bundle.train, &bundle.kg, fcfg, &mut counters)?;
    let split_graph = match split {
        Split::Validation => &bundle.valid,
        Split::Test => &bundle.test,
    };
    Ok(evaluate_embeddings(
        &fwd.x_user,
        &fwd.x_item,
        &bundle.train,
        split_graph,
        k,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::InteractionGraph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rank_masks_and_orders() {
        let x_u = [1.0f64];
        let items = Matrix::from_vec(3, 1, vec![9.0, 1.0, 5.0]);
        let top = rank_for_user(&x_u, &items, &[0], 2);
        assert_eq!(top, vec![2, 1]);
    }

    #[test]
    fn ties_break_by_ascending_id() {
        let x_u = [0.0f64];
        let items = Matrix::from_vec(5, 1, vec![1.0; 5]);
        let top = rank_for_user(&x_u, &items, &[1], 3);
        assert_eq!(top, vec![0, 2, 3]);
    }

    #[test]
    fn k_larger_than_candidates_returns_all() {
        let x_u = [1.0f64];
        let items = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        let top = rank_for_user(&x_u, &items, &[2], 10);
        assert_eq!(top, vec![1, 0]);
    }

    #[test]
    fn rank_equals_naive_sort_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(5..40);
            let d = 3;
            let x_u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let items =
                Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let mask: Vec<u32> = (0..n as u32).filter(|_| rng.gen::<f64>() < 0.2).collect();
            let k = rng.gen_range(1..10);
            let got = rank_for_user(&x_u, &items, &mask, k);
            // naive: full sort
            let mut all: Vec<(u32, f64)> = (0..n as u32)
                .filter(|i| !mask.contains(i))
                .map(|i| (i, dot(&x_u, items.row(i as usize))))
                .collect();
            all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let want: Vec<u32> = all.into_iter().take(k).map(|(i, _)| i).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn metric_pinpoints() {
        assert_eq!(recall_at_k(&[3, 1], &[3]), 1.0);
        assert_eq!(ndcg_at_k(&[3, 1], &[3]), 1.0);
        // single relevant item at rank 2
        let nd = ndcg_at_k(&[9, 3, 7], &[3]);
        assert!((nd - 1.0 / 3f64.log2()).abs() < 1e-12);
        // 2 relevant, one in top-k
        assert_eq!(recall_at_k(&[3, 1], &[3, 5]), 0.5);
    }

    #[test]
    fn metric_monotonicity() {
        // appending a relevant item never decreases either metric
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..200 {
            let test: Vec<u32> = {
                let mut v: Vec<u32> = (0..20).filter(|_| rng.gen::<f64>() < 0.3).collect();
                if v.is_empty() {
                    v.push(0);
                }
                v
            };
            let topk: Vec<u32> = (20..25).collect();
            let mut with = topk.clone();
            with.push(test[0] /* relevant */);
            assert!(recall_at_k(&with, &test) >= recall_at_k(&topk, &test));
            assert!(ndcg_at_k(&with, &test) >= ndcg_at_k(&topk, &test));
        }
    }

    #[test]
    fn perfect_embeddings_score_one() {
        // x_u = sum of one-hots of its test items
        let train = InteractionGraph::from_edges(2, 6, &[(0, 0), (1, 1)]).unwrap();
        let test = InteractionGraph::from_edges(2, 6, &[(0, 2), (0, 3), (1, 4)]).unwrap();
        let mut x_user = Matrix::<f64>::zeros(2, 6);
        x_user.row_mut(0)[2] = 1.0;
        x_user.row_mut(0)[3] = 1.0;
        x_user.row_mut(1)[4] = 1.0;
        let mut x_item = Matrix::<f64>::zeros(6, 6);
        for i in 0..6 {
            x_item.row_mut(i)[i] = 1.0;
        }
        let rep = evaluate_embeddings(&x_user, &x_item, &train, &test, 3);
        assert_eq!(rep.users_evaluated, 2);
        assert_eq!(rep.recall, 1.0);
        assert_eq!(rep.ndcg, 1.0);
    }

    #[test]
    fn random_embeddings_match_analytic_expectation() {
        // single-test-item users, K of I candidates -> E[recall] = K/I
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let (users, items, k) = (2000usize, 1000usize, 20usize);
        let train = InteractionGraph::from_edges(users, items, &[(0, 0)]).unwrap();
        let test_edges: Vec<(u32, u32)> = (0..users as u32)
            .map(|u| (u, rng.gen_range(0..items as u32)))
            .collect();
        let test = InteractionGraph::from_edges(users, items, &test_edges).unwrap();
        let x_user = Matrix::from_vec(
            users,
            8,
            (0..users * 8).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let x_item = Matrix::from_vec(
            items,
            8,
            (0..items * 8).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let rep = evaluate_embeddings(&x_user, &x_item, &train, &test, k);
        let p = k as f64 / items as f64;
        let sigma = (p * (1.0 - p) / users as f64).sqrt();
        assert!(
            (rep.recall - p).abs() < 3.0 * sigma + 1e-3,
            "recall {} vs expectation {p}",
            rep.recall
        );
    }

    #[test]
    fn masking_excludes_training_items() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let edges: Vec<(u32, u32)> = (0..40)
            .map(|_| (rng.gen_range(0..5), rng.gen_range(0..15)))
            .collect();
        let train = InteractionGraph::from_edges(5, 15, &edges).unwrap();
        let x_item =
            Matrix::from_vec(15, 4, (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect());
        for u in 0..5usize {
            let x_u: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let top = rank_for_user(&x_u, &x_item, &train.user_adj[u], 10);
            for i in top {
                assert!(!train.has_edge(u as u32, i));
            }
        }
    }
}

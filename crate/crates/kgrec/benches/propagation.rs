//! Parallel vs sequential row kernels on the two propagation workloads.
//!
//! Both variants run the exact same per-row closure; only the row scheduler
//! differs (`compute_rows` uses the rayon pool when the `parallel` feature is
//! on, `compute_rows_seq` never does).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use kgrec::graph::{InteractionGraph, KnowledgeGraph};
use kgrec::matrix::{l2_norm, Matrix};

struct Setup {
    ig: InteractionGraph,
    kg: KnowledgeGraph,
    users: Matrix<f32>,
    items: Matrix<f32>,
    entities: Matrix<f32>,
    relations: Matrix<f32>,
}

fn setup(nodes: usize, dim: usize) -> Setup {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (nu, ni, ne, nr) = (nodes, nodes, 2 * nodes, 8);
    let mut edges = Vec::new();
    for u in 0..nu as u32 {
        for _ in 0..10 {
            edges.push((u, rng.gen_range(0..ni as u32)));
        }
    }
    let ig = InteractionGraph::from_edges(nu, ni, &edges).unwrap();
    let mut triples = Vec::new();
    for h in 0..ne as u32 {
        for _ in 0..4 {
            triples.push((h, rng.gen_range(0..nr as u32), rng.gen_range(0..ne as u32)));
        }
    }
    let kg = KnowledgeGraph::new(ne, nr, triples, (0..ni as u32).collect(), true).unwrap();
    let rand_mat = |rows: usize, rng: &mut ChaCha12Rng| {
        Matrix::from_vec(
            rows,
            dim,
            (0..rows * dim).map(|_| rng.gen_range(-0.1..0.1)).collect(),
        )
    };
    Setup {
        users: rand_mat(nu, &mut rng),
        items: rand_mat(ni, &mut rng),
        entities: rand_mat(ne, &mut rng),
        relations: rand_mat(nr, &mut rng),
        ig,
        kg,
    }
}

fn ig_user_row(s: &Setup, u: usize, row: &mut [f32]) {
    for (&i, &c) in s.ig.user_adj[u].iter().zip(s.ig.norm_user[u].iter()) {
        let c = c as f32;
        for (o, &x) in row.iter_mut().zip(s.items.row(i as usize).iter()) {
            *o += c * x;
        }
    }
}

fn kg_entity_row(s: &Setup, h: usize, row: &mut [f32]) {
    let adj = &s.kg.entity_adj[h];
    if adj.is_empty() {
        return;
    }
    for &(r, t) in adj {
        let rel = s.relations.row(r as usize);
        let src = s.entities.row(t as usize);
        for ((o, &a), &b) in row.iter_mut().zip(rel.iter()).zip(src.iter()) {
            *o += a * b;
        }
    }
    let inv = 1.0 / adj.len() as f32;
    for o in row.iter_mut() {
        *o *= inv;
    }
    let n = l2_norm(row);
    if n > 0.0 {
        for o in row.iter_mut() {
            *o /= n;
        }
    }
}

fn bench_propagation(c: &mut Criterion) {
    let dim = 64;
    for &nodes in &[1_000usize, 10_000] {
        let s = setup(nodes, dim);

        let mut group = c.benchmark_group("ig_propagate");
        group.bench_with_input(BenchmarkId::new("parallel", nodes), &s, |b, s| {
            let mut out = Matrix::<f32>::zeros(s.ig.num_users, dim);
            b.iter(|| {
                out.fill(0.0);
                out.compute_rows(|u, row| ig_user_row(s, u, row));
            });
        });
        group.bench_with_input(BenchmarkId::new("sequential", nodes), &s, |b, s| {
            let mut out = Matrix::<f32>::zeros(s.ig.num_users, dim);
            b.iter(|| {
                out.fill(0.0);
                out.compute_rows_seq(|u, row| ig_user_row(s, u, row));
            });
        });
        group.finish();

        let mut group = c.benchmark_group("kg_propagate");
        group.bench_with_input(BenchmarkId::new("parallel", nodes), &s, |b, s| {
            let mut out = Matrix::<f32>::zeros(s.kg.num_entities, dim);
            b.iter(|| {
                out.fill(0.0);
                out.compute_rows(|h, row| kg_entity_row(s, h, row));
            });
        });
        group.bench_with_input(BenchmarkId::new("sequential", nodes), &s, |b, s| {
            let mut out = Matrix::<f32>::zeros(s.kg.num_entities, dim);
            b.iter(|| {
                out.fill(0.0);
                out.compute_rows_seq(|h, row| kg_entity_row(s, h, row));
            });
        });
        group.finish();
    }
}

criterion_group!(benches, bench_propagation);
criterion_main!(benches);

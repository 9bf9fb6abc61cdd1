//! Slow dense reference forward pass, coded independently of the sparse
//! kernels: explicit dense adjacency matrices, plain nested loops, f64 only.
//! Used by the `check` subcommand and the validation test suites to
//! cross-check the production path.

use crate::graph::{InteractionGraph, KnowledgeGraph};
use crate::matrix::Matrix;
use crate::params::ModelParams;
use crate::propagation::ForwardConfig;

pub struct DenseForward {
    pub kg_entity_layers: Vec<Matrix<f64>>,
    pub kg_item_layers: Vec<Matrix<f64>>,
    pub kg_user_layers: Vec<Matrix<f64>>,
    pub ig_user_layers: Vec<Matrix<f64>>,
    pub ig_item_layers: Vec<Matrix<f64>>,
    pub x_user: Matrix<f64>,
    pub x_item: Matrix<f64>,
    pub e_user: Matrix<f64>,
    pub e_item: Matrix<f64>,
}

fn row_normalize(m: &mut Matrix<f64>) {
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            for x in row.iter_mut() {
                *x /= n;
            }
        }
    }
}

/// Dense forward pass mirroring the model definition equation by equation.
pub fn dense_forward(
    params: &ModelParams<f64>,
    ig: &InteractionGraph,
    kg: &KnowledgeGraph,
    cfg: &ForwardConfig,
) -> DenseForward {
    let d = params.dim;
    let (nu, ni, ne) = (ig.num_users, ig.num_items, kg.num_entities);
    let l_max = cfg.layers;

    // dense symmetric-normalized interaction adjacency
    let mut a = vec![vec![0.0f64; ni]; nu];
    for u in 0..nu {
        for i in 0..ni {
            if ig.has_edge(u as u32, i as u32) {
                a[u][i] = 1.0 / ((ig.deg_user(u) * ig.deg_item(i)) as f64).sqrt();
            }
        }
    }
    // dense KG neighbor structure: neighbor[h] lists (relation, tail)
    let neighbor: Vec<Vec<(usize, usize)>> = (0..ne)
        .map(|h| {
            kg.entity_adj[h]
                .iter()
                .map(|&(r, t)| (r as usize, t as usize))
                .collect()
        })
        .collect();

    let mut kg_entity_layers = vec![params.kg_entity.clone()];
    for l in 1..=l_max {
        let prev = &kg_entity_layers[l - 1];
        let mut next = Matrix::zeros(ne, d);
        for h in 0..ne {
            if neighbor[h].is_empty() {
                continue;
            }
            for &(r, t) in &neighbor[h] {
                for k in 0..d {
                    next.row_mut(h)[k] += params.kg_relation.row(r)[k] * prev.row(t)[k];
                }
            }
            let inv = 1.0 / neighbor[h].len() as f64;
            for k in 0..d {
                next.row_mut(h)[k] *= inv;
            }
        }
        if cfg.normalize {
            row_normalize(&mut next);
        }
        kg_entity_layers.push(next);
    }

    let gather = |ents: &Matrix<f64>| {
        let mut m = Matrix::zeros(ni, d);
        for i in 0..ni {
            m.row_mut(i)
                .copy_from_slice(ents.row(kg.alignment[i] as usize));
        }
        m
    };
    let kg_item_layers: Vec<Matrix<f64>> = kg_entity_layers.iter().map(gather).collect();

    let user_agg = |items: &Matrix<f64>| {
        let mut m = Matrix::zeros(nu, d);
        for u in 0..nu {
            for i in 0..ni {
                if a[u][i] != 0.0 {
                    for k in 0..d {
                        m.row_mut(u)[k] += a[u][i] * items.row(i)[k];
                    }
                }
            }
        }
        if cfg.normalize {
            row_normalize(&mut m);
        }
        m
    };
    let kg_user_layers: Vec<Matrix<f64>> = kg_item_layers.iter().map(user_agg).collect();

    let mut ig_user_layers = vec![params.ig_user.clone()];
    let mut ig_item_layers = vec![params.ig_item.clone()];
    for l in 1..=l_max {
        let pu = &ig_user_layers[l - 1];
        let pi = &ig_item_layers[l - 1];
        let mut nu_m = Matrix::zeros(nu, d);
        let mut ni_m = Matrix::zeros(ni, d);
        for u in 0..nu {
            for i in 0..ni {
                if a[u][i] != 0.0 {
                    for k in 0..d {
                        nu_m.row_mut(u)[k] += a[u][i] * pi.row(i)[k];
                        ni_m.row_mut(i)[k] += a[u][i] * pu.row(u)[k];
                    }
                }
            }
        }
        if cfg.fuse {
            for u in 0..nu {
                for k in 0..d {
                    nu_m.row_mut(u)[k] += kg_user_layers[l].row(u)[k];
                }
            }
            for i in 0..ni {
                for k in 0..d {
                    ni_m.row_mut(i)[k] += kg_item_layers[l].row(i)[k];
                }
            }
        }
        ig_user_layers.push(nu_m);
        ig_item_layers.push(ni_m);
    }

    let mean = |layers: &[Matrix<f64>], from: usize| {
        let mut m = Matrix::zeros(layers[0].rows(), d);
        for lay in &layers[from..] {
            for r in 0..m.rows() {
                for k in 0..d {
                    m.row_mut(r)[k] += lay.row(r)[k];
                }
            }
        }
        let inv = 1.0 / (layers.len() - from) as f64;
        for r in 0..m.rows() {
            for k in 0..d {
                m.row_mut(r)[k] *= inv;
            }
        }
        m
    };
    let x_from = if cfg.include_layer0_in_x { 0 } else { 1 };
    DenseForward {
        x_user: mean(&ig_user_layers, x_from),
        x_item: mean(&ig_item_layers, x_from),
        e_user: mean(&kg_user_layers, 0),
        e_item: mean(&kg_item_layers, 0),
        kg_entity_layers,
        kg_item_layers,
        kg_user_layers,
        ig_user_layers,
        ig_item_layers,
    }
}

//! Trainable parameter tables, Xavier initialization, sparse-row gradients,
//! and a lazy Adam optimizer (moments of untouched rows are not decayed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::graph::DatasetBundle;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const TABLE_NAMES: [&str; 4] = ["ig_user", "ig_item", "kg_entity", "kg_relation"];

#[derive(Clone, Debug)]
pub struct ModelParams<T> {
    pub ig_user: Matrix<T>,
    pub ig_item: Matrix<T>,
    pub kg_entity: Matrix<T>,
    pub kg_relation: Matrix<T>,
    pub dim: usize,
}

impl<T: Scalar> ModelParams<T> {
    pub fn tables(&self) -> [&Matrix<T>; 4] {
        [&self.ig_user, &self.ig_item, &self.kg_entity, &self.kg_relation]
    }

    pub fn tables_mut(&mut self) -> [&mut Matrix<T>; 4] {
        [
            &mut self.ig_user,
            &mut self.ig_item,
            &mut self.kg_entity,
            &mut self.kg_relation,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tables().iter().all(|t| t.is_finite())
    }
}

/// Xavier-uniform init: every entry uniform in (-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)) and fan_in = fan_out = d.
pub fn init_params<T: Scalar>(bundle: &DatasetBundle, dim: usize, seed: u64) -> ModelParams<T> {
    assert!(dim >= 1);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let bound = (6.0 / (dim + dim) as f64).sqrt();
    let mut table = |rows: usize| {
        let data: Vec<T> = (0..rows * dim)
            .map(|_| T::c(rng.gen_range(-bound..bound)))
            .collect();
        Matrix::from_vec(rows, dim, data)
    };
    ModelParams {
        ig_user: table(bundle.train.num_users),
        ig_item: table(bundle.train.num_items),
        kg_entity: table(bundle.kg.num_entities),
        kg_relation: table(bundle.kg.num_relations),
        dim,
    }
}

/// Gradient for one table: dense storage plus the list of rows that were
/// actually written. Rows outside `touched` are exactly zero.
#[derive(Clone, Debug)]
pub struct GradTable<T> {
    pub data: Matrix<T>,
    pub touched: Vec<u32>,
}

impl<T: Scalar> GradTable<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: Matrix::zeros(rows, cols),
            touched: Vec::new(),
        }
    }

    /// Recompute `touched` as the rows with any non-zero entry.
    pub fn mark_nonzero_rows(&mut self) {
        self.touched.clear();
        for r in 0..self.data.rows() {
            if self.data.row(r).iter().any(|x| *x != T::zero()) {
                self.touched.push(r as u32);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub ig_user: GradTable<T>,
    pub ig_item: GradTable<T>,
    pub kg_entity: GradTable<T>,
    pub kg_relation: GradTable<T>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(params: &ModelParams<T>) -> Self {
        Self {
            ig_user: GradTable::zeros(params.ig_user.rows(), params.dim),
            ig_item: GradTable::zeros(params.ig_item.rows(), params.dim),
            kg_entity: GradTable::zeros(params.kg_entity.rows(), params.dim),
            kg_relation: GradTable::zeros(params.kg_relation.rows(), params.dim),
        }
    }

    pub fn tables_mut(&mut self) -> [&mut GradTable<T>; 4] {
        [
            &mut self.ig_user,
            &mut self.ig_item,
            &mut self.kg_entity,
            &mut self.kg_relation,
        ]
    }

    pub fn tables(&self) -> [&GradTable<T>; 4] {
        [&self.ig_user, &self.ig_item, &self.kg_entity, &self.kg_relation]
    }

    pub fn mark_nonzero_rows(&mut self) {
        for t in self.tables_mut() {
            t.mark_nonzero_rows();
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub m: [Matrix<T>; 4],
    pub v: [Matrix<T>; 4],
    pub step: u64,
    pub hyper: AdamHyper,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ModelParams<T>, hyper: AdamHyper) -> Self {
        let zeros = |m: &Matrix<T>| Matrix::zeros(m.rows(), m.cols());
        Self {
            m: [
                zeros(&params.ig_user),
                zeros(&params.ig_item),
                zeros(&params.kg_entity),
                zeros(&params.kg_relation),
            ],
            v: [
                zeros(&params.ig_user),
                zeros(&params.ig_item),
                zeros(&params.kg_entity),
                zeros(&params.kg_relation),
            ],
            step: 0,
            hyper: hyper,
        }
    }
}

/// One bias-corrected Adam step over the touched rows only.
pub fn adam_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &Gradients<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    state.step += 1;
    let t = state.step as i32;
    let h = state.hyper;
    let b1 = T::c(h.beta1);
    let b2 = T::c(h.beta2);
    let one = T::one();
    let bc1 = T::c(1.0 - h.beta1.powi(t));
    let bc2 = T::c(1.0 - h.beta2.powi(t));
    let lr = T::c(h.lr);
    let eps = T::c(h.eps);

    let tables = params.tables_mut();
    let gtables = grads.tables();
    for k in 0..4 {
        let g = gtables[k];
        for &r in &g.touched {
            let r = r as usize;
            let grow = g.data.row(r);
            if grow.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteGradient(TABLE_NAMES[k]));
            }
            let mrow = state.m[k].row_mut(r);
            for (m, &gx) in mrow.iter_mut().zip(grow.iter()) {
                *m = b1 * *m + (one - b1) * gx;
            }
            let vrow = state.v[k].row_mut(r);
            for (v, &gx) in vrow.iter_mut().zip(grow.iter()) {
                *v = b2 * *v + (one - b2) * gx * gx;
            }
            let prow = tables[k].row_mut(r);
            let mrow = state.m[k].row(r);
            let vrow = state.v[k].row(r);
            for ((p, &m), &v) in prow.iter_mut().zip(mrow.iter()).zip(vrow.iter()) {
                let mhat = m / bc1;
                let vhat = v / bc2;
                *p = *p - lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
    Ok(())
}

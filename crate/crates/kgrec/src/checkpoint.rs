//! Binary checkpoint format, little-endian throughout.
//!
//! Layout:
//!   magic  "SKGCL1"                        6 bytes
//!   float width (4 or 8)                   1 byte (u8)
//!   d                                      u32
//!   num_users, num_items,
//!   num_entities, num_relations            4 x u64
//!   ig_user, ig_item,
//!   kg_entity, kg_relation                 rows*d floats each
//!   adam m then v for the same 4 tables    rows*d floats each
//!   adam step                              u64
//!   adam lr, beta1, beta2, eps             4 x f64
//!   manifest byte length                   u64
//!   manifest                               UTF-8 bytes
//!
//! Total payload bytes = 47 + 2*3*W*d*(U+I+E+R) / ... see `predicted_size`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::params::{AdamHyper, AdamState, ModelParams};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 6] = b"SKGCL1";

/// Exact file size for a checkpoint with the given shape and manifest length.
pub fn predicted_size(
    width: usize,
    d: usize,
    users: usize,
    items: usize,
    entities: usize,
    relations: usize,
    manifest_len: usize,
) -> usize {
    let table_elems = d * (users + items + entities + relations);
    6 + 1 + 4 + 4 * 8            // magic, width, d, four row counts
        + 3 * table_elems * width // params + adam m + adam v
        + 8 + 4 * 8               // adam step + hypers
        + 8 + manifest_len
}

pub fn save_checkpoint<T: Scalar>(
    path: &Path,
    params: &ModelParams<T>,
    state: &AdamState<T>,
    manifest: &str,
) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(T::WIDTH);
    buf.extend_from_slice(&(params.dim as u32).to_le_bytes());
    for t in params.tables() {
        buf.extend_from_slice(&(t.rows() as u64).to_le_bytes());
    }
    for t in params.tables() {
        for &x in t.data() {
            x.write_le(&mut buf);
        }
    }
    for m in &state.m {
        for &x in m.data() {
            x.write_le(&mut buf);
        }
    }
    for v in &state.v {
        for &x in v.data() {
            x.write_le(&mut buf);
        }
    }
    buf.extend_from_slice(&state.step.to_le_bytes());
    for h in [state.hyper.lr, state.hyper.beta1, state.hyper.beta2, state.hyper.eps] {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    buf.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
    buf.extend_from_slice(manifest.as_bytes());
    fs::write(path, &buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub struct Checkpoint<T> {
    pub params: ModelParams<T>,
    pub state: AdamState<T>,
    pub manifest: String,
}

/// Float width stored in a checkpoint file, read without loading the tables.
pub fn peek_width(path: &Path) -> Result<u8> {
    let buf = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if buf.len() < 7 || &buf[0..6] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    Ok(buf[6])
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Checkpoint<T>> {
    let buf = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.take(6)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let width = r.take(1)?[0];
    if width != T::WIDTH {
        return Err(Error::Checkpoint(format!(
            "float width mismatch: file has {width}, expected {}",
            T::WIDTH
        )));
    }
    let d = r.u32()? as usize;
    let mut rows = [0usize; 4];
    for slot in rows.iter_mut() {
        *slot = r.u64()? as usize;
    }
    let w = T::WIDTH as usize;
    let table = |r: &mut Reader, n: usize| -> Result<Matrix<T>> {
        let bytes = r.take(n * d * w)?;
        let data = bytes.chunks_exact(w).map(T::from_le).collect();
        Ok(Matrix::from_vec(n, d, data))
    };
    let ig_user = table(&mut r, rows[0])?;
    let ig_item = table(&mut r, rows[1])?;
    let kg_entity = table(&mut r, rows[2])?;
    let kg_relation = table(&mut r, rows[3])?;
    let mut moments = Vec::with_capacity(8);
    for k in 0..8 {
        moments.push(table(&mut r, rows[k % 4])?);
    }
    let step = r.u64()?;
    let hyper = AdamHyper {
        lr: r.f64()?,
        beta1: r.f64()?,
        beta2: r.f64()?,
        eps: r.f64()?,
    };
    let mlen = r.u64()? as usize;
    let manifest = String::from_utf8(r.take(mlen)?.to_vec())
        .map_err(|_| Error::Checkpoint("manifest is not UTF-8".into()))?;
    let mut it = moments.into_iter();
    let m = [
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ];
    let v = [
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ];
    Ok(Checkpoint {
        params: ModelParams {
            ig_user,
            ig_item,
            kg_entity,
            kg_relation,
            dim: d,
        },
        state: AdamState { m, v, step, hyper },
    manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DatasetBundle, InteractionGraph, KnowledgeGraph};
    use crate::params::init_params;

    fn bundle(users: usize, items: usize, entities: usize, relations: usize) -> DatasetBundle {
        let edges: Vec<(u32, u32)> = (0..users as u32).map(|u| (u, u % items as u32)).collect();
        let ig = InteractionGraph::from_edges(users, items, &edges).unwrap();
        let kg = KnowledgeGraph::new(
            entities,
            relations,
            vec![],
            (0..items as u32).collect(),
            true,
        )
        .unwrap();
        DatasetBundle {
            train: ig.clone(),
            valid: ig.clone(),
            test: ig,
            kg,
            user_keys: vec![],
            item_keys: vec![],
            entity_keys: vec![],
            relation_keys: vec![],
        }
    }

    #[test]
    fn round_trip_bit_exact() {
        let b = bundle(7, 9, 11, 3);
        let p = init_params::<f64>(&b, 5, 1);
        let mut st = AdamState::new(&p, AdamHyper::default());
        st.step = 42;
        st.m[0].row_mut(3)[1] = 0.125;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        save_checkpoint(&path, &p, &st, "seed = 1\n").unwrap();
        let ck = load_checkpoint::<f64>(&path).unwrap();
        for (a, bb) in p.tables().iter().zip(ck.params.tables().iter()) {
            assert_eq!(a.data(), bb.data());
        }
        assert_eq!(ck.state.step, 42);
        assert_eq!(ck.state.m[0].row(3)[1], 0.125);
        assert_eq!(ck.manifest, "seed = 1\n");
        // save again: byte-identical files
        let path2 = dir.path().join("c2.bin");
        save_checkpoint(&path2, &ck.params, &ck.state, &ck.manifest).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn wrong_magic_and_truncation() {
        let b = bundle(3, 3, 4, 2);
        let p = init_params::<f32>(&b, 4, 0);
        let st = AdamState::new(&p, AdamHyper::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        save_checkpoint(&path, &p, &st, "").unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_checkpoint::<f32>(&path), Err(Error::Checkpoint(_))));
        bytes[0] = b'S';
        bytes.truncate(bytes.len() - 10);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_checkpoint::<f32>(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn width_mismatch_detected() {
        let b = bundle(3, 3, 4, 2);
        let p = init_params::<f32>(&b, 4, 0);
        let st = AdamState::new(&p, AdamHyper::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        save_checkpoint(&path, &p, &st, "").unwrap();
        assert_eq!(peek_width(&path).unwrap(), 4);
        assert!(matches!(load_checkpoint::<f64>(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn payload_size_matches_formula() {
        let (users, items, entities, relations, d) = (1000, 50, 60, 4, 64);
        let b = bundle(users, items, entities, relations);
        let p = init_params::<f64>(&b, d, 0);
        let st = AdamState::new(&p, AdamHyper::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let manifest = "d = 64\n";
        save_checkpoint(&path, &p, &st, manifest).unwrap();
        let got = fs::metadata(&path).unwrap().len() as usize;
        let want = predicted_size(8, d, users, items, entities, relations, manifest.len());
        assert_eq!(got, want);
    }
}

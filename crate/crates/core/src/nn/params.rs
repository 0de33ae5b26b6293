use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use super::{Matrix, Mlp, NnError};
use crate::graph::FEATURE_DIM;

pub const HIDDEN_WIDTH: usize = 256;
/// Input width of the node-update network: six stacked 8-vectors.
pub const UPDATE_INPUT_DIM: usize = 6 * FEATURE_DIM;

const CHECKPOINT_MAGIC: &[u8; 8] = b"ISBJPRM1";

/// Identifies one of the six networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKey {
    Preceding,
    Succeeding,
    Disjunctive,
    Update,
    Logit,
    Value,
}

impl NetKey {
    pub const ALL: [NetKey; 6] =
        [NetKey::Preceding, NetKey::Succeeding, NetKey::Disjunctive, NetKey::Update, NetKey::Logit, NetKey::Value];

    pub fn tag(self) -> &'static str {
        match self {
            NetKey::Preceding => "p",
            NetKey::Succeeding => "s",
            NetKey::Disjunctive => "d",
            NetKey::Update => "n",
            NetKey::Logit => "l",
            NetKey::Value => "v",
        }
    }

    pub fn dims(self) -> [usize; 4] {
        let h = HIDDEN_WIDTH;
        match self {
            NetKey::Preceding | NetKey::Succeeding | NetKey::Disjunctive => [FEATURE_DIM, h, h, FEATURE_DIM],
            NetKey::Update => [UPDATE_INPUT_DIM, h, h, FEATURE_DIM],
            NetKey::Logit | NetKey::Value => [FEATURE_DIM, h, h, 1],
        }
    }
}

/// All learnable parameters: the three neighbourhood networks, the node
/// update network, the actor logit network and the critic network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    pub preceding: Mlp,
    pub succeeding: Mlp,
    pub disjunctive: Mlp,
    pub update: Mlp,
    pub logit: Mlp,
    pub value: Mlp,
}

impl ParamStore {
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            preceding: Mlp::init(&NetKey::Preceding.dims(), rng),
            succeeding: Mlp::init(&NetKey::Succeeding.dims(), rng),
            disjunctive: Mlp::init(&NetKey::Disjunctive.dims(), rng),
            update: Mlp::init(&NetKey::Update.dims(), rng),
            logit: Mlp::init(&NetKey::Logit.dims(), rng),
            value: Mlp::init(&NetKey::Value.dims(), rng),
        }
    }

    pub fn zeros() -> Self {
        Self {
            preceding: Mlp::zeros(&NetKey::Preceding.dims()),
            succeeding: Mlp::zeros(&NetKey::Succeeding.dims()),
            disjunctive: Mlp::zeros(&NetKey::Disjunctive.dims()),
            update: Mlp::zeros(&NetKey::Update.dims()),
            logit: Mlp::zeros(&NetKey::Logit.dims()),
            value: Mlp::zeros(&NetKey::Value.dims()),
        }
    }

    pub fn net(&self, key: NetKey) -> &Mlp {
        match key {
            NetKey::Preceding => &self.preceding,
            NetKey::Succeeding => &self.succeeding,
            NetKey::Disjunctive => &self.disjunctive,
            NetKey::Update => &self.update,
            NetKey::Logit => &self.logit,
            NetKey::Value => &self.value,
        }
    }

    pub fn net_mut(&mut self, key: NetKey) -> &mut Mlp {
        match key {
            NetKey::Preceding => &mut self.preceding,
            NetKey::Succeeding => &mut self.succeeding,
            NetKey::Disjunctive => &mut self.disjunctive,
            NetKey::Update => &mut self.update,
            NetKey::Logit => &mut self.logit,
            NetKey::Value => &mut self.value,
        }
    }

    /// `(key, tensor)` pairs in a fixed order, e.g. `n.1.weight`.
    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::new();
        for key in NetKey::ALL {
            for (i, layer) in self.net(key).layers().iter().enumerate() {
                out.push((format!("{}.{i}.weight", key.tag()), &layer.weight));
                out.push((format!("{}.{i}.bias", key.tag()), &layer.bias));
            }
        }
        out
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Matrix> {
        NetKey::ALL.into_iter().flat_map(move |k| self.net(k).tensors())
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        [
            &mut self.preceding,
            &mut self.succeeding,
            &mut self.disjunctive,
            &mut self.update,
            &mut self.logit,
            &mut self.value,
        ]
        .into_iter()
        .flat_map(|net| net.tensors_mut())
    }

    pub fn num_params(&self) -> usize {
        self.tensors().map(|t| t.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(Matrix::is_finite)
    }

    pub fn set_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &ParamStore, scale: f64) {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += scale * y;
            }
        }
    }

    /// Flat copy of every parameter, in `named_tensors` order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().flat_map(|t| t.as_slice().iter().copied()).collect()
    }

    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<(), NnError> {
        let tensors = self.named_tensors();
        out.write_all(CHECKPOINT_MAGIC)?;
        out.write_all(&(tensors.len() as u32).to_le_bytes())?;
        for (key, t) in tensors {
            out.write_all(&(key.len() as u16).to_le_bytes())?;
            out.write_all(key.as_bytes())?;
            out.write_all(&(t.rows() as u32).to_le_bytes())?;
            out.write_all(&(t.cols() as u32).to_le_bytes())?;
            for x in t.as_slice() {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a checkpoint, rejecting any key or shape that differs from the
    /// standard layout.
    pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Self, NnError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(NnError::Checkpoint("not a parameter checkpoint (bad magic)".into()));
        }
        let mut store = ParamStore::zeros();
        let count = read_u32(&mut input)? as usize;
        let expected: Vec<(String, (usize, usize))> =
            store.named_tensors().into_iter().map(|(k, t)| (k, t.shape())).collect();
        if count != expected.len() {
            return Err(NnError::Checkpoint(format!("expected {} tensors, found {count}", expected.len())));
        }
        for (tensor, (want_key, want_shape)) in store.tensors_mut().zip(expected) {
            let mut len = [0u8; 2];
            input.read_exact(&mut len)?;
            let mut key = vec![0u8; u16::from_le_bytes(len) as usize];
            input.read_exact(&mut key)?;
            let key = String::from_utf8_lossy(&key).into_owned();
            let shape = (read_u32(&mut input)? as usize, read_u32(&mut input)? as usize);
            if key != want_key || shape != want_shape {
                return Err(NnError::Checkpoint(format!(
                    "tensor {key} {shape:?} does not match expected {want_key} {want_shape:?}"
                )));
            }
            let mut buf = [0u8; 8];
            for x in tensor.as_mut_slice() {
                input.read_exact(&mut buf)?;
                *x = f64::from_le_bytes(buf);
            }
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        self.write_checkpoint(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NnError> {
        let file = std::fs::File::open(path)?;
        Self::read_checkpoint(std::io::BufReader::new(file))
    }
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

use indexmap::IndexMap;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to one entry of a [`ParameterStore`], stable for the store's lifetime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A trainable tensor with its gradient buffer and optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    /// First moment (Adam).
    pub m: Vec<f64>,
    /// Second moment (Adam, RMSprop).
    pub v: Vec<f64>,
}

impl Param {
    fn new(value: Tensor) -> Self {
        let n = value.len();
        Self {
            grad: Tensor::zeros(value.shape()),
            value,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// Named model parameters in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterStore {
    entries: IndexMap<String, Param>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<ParamId> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Contract(format!("invalid parameter name {name:?}")));
        }
        if self.entries.contains_key(name) {
            return Err(Error::Contract(format!("duplicate parameter {name}")));
        }
        let (idx, _) = self.entries.insert_full(name.to_string(), Param::new(value));
        Ok(ParamId(idx))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.entries.get_index_of(name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_scalars(&self) -> usize {
        self.entries.values().map(|p| p.value.len()).sum()
    }

    pub fn param(&self, id: ParamId) -> &Param {
        &self.entries[id.0]
    }

    pub fn param_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.entries[id.0]
    }

    pub fn value(&self, id: ParamId) -> &[f64] {
        self.entries[id.0].value.data()
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut [f64] {
        self.entries[id.0].value.data_mut()
    }

    pub fn grad(&self, id: ParamId) -> &[f64] {
        self.entries[id.0].grad.data()
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut [f64] {
        self.entries[id.0].grad.data_mut()
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            p.grad.fill(0.0);
        }
    }

    /// Clears optimizer moments, e.g. before switching optimizers.
    pub fn reset_moments(&mut self) {
        for p in self.entries.values_mut() {
            p.m.fill(0.0);
            p.v.fill(0.0);
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.entries
            .values()
            .flat_map(|p| p.grad.data())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Copies values (not gradients or moments) from a store with identical layout.
    pub fn copy_values_from(&mut self, other: &ParameterStore) -> Result<()> {
        self.check_same_layout(other)?;
        for (dst, src) in self.entries.values_mut().zip(other.entries.values()) {
            dst.value.data_mut().copy_from_slice(src.value.data());
        }
        Ok(())
    }

    pub fn check_same_layout(&self, other: &ParameterStore) -> Result<()> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::Shape(format!(
                "stores hold {} and {} parameters",
                self.entries.len(),
                other.entries.len()
            )));
        }
        for ((na, a), (nb, b)) in self.entries.iter().zip(other.entries.iter()) {
            if na != nb || a.value.shape() != b.value.shape() {
                return Err(Error::Shape(format!(
                    "{na}{:?} vs {nb}{:?}",
                    a.value.shape(),
                    b.value.shape()
                )));
            }
        }
        Ok(())
    }

    /// Snapshot of all gradients, in store order.
    pub fn grads(&self) -> Vec<Tensor> {
        self.entries.values().map(|p| p.grad.clone()).collect()
    }

    /// Replaces a parameter value wholesale (used by checkpoint loading).
    pub fn set_value(&mut self, name: &str, value: Tensor) -> Result<()> {
        let p = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::Contract(format!("unknown parameter {name}")))?;
        if p.value.shape() != value.shape() {
            return Err(Error::Shape(format!(
                "{name}: expected {:?}, got {:?}",
                p.value.shape(),
                value.shape()
            )));
        }
        p.value = value;
        Ok(())
    }

    pub fn validate_finite(&self) -> Result<()> {
        for (name, p) in &self.entries {
            p.value.validate_finite(name)?;
        }
        Ok(())
    }
}

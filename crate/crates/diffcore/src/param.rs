use std::collections::HashMap;
use std::sync::Arc;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Index of a parameter inside its [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// A learned tensor with its gradient and optimizer accumulator.
#[derive(Clone)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Arc<Tensor<T>>,
    pub grad: Tensor<T>,
    pub accumulator: Tensor<T>,
}

impl<T: Element> Parameter<T> {
    pub fn new(name: impl Into<String>, value: Tensor<T>) -> Self {
        let grad = Tensor::zeros_like(&value);
        let accumulator = Tensor::zeros_like(&value);
        Parameter { name: name.into(), value: Arc::new(value), grad, accumulator }
    }
}

/// Named, ordered collection of parameters.
#[derive(Clone, Default)]
pub struct ParamStore<T> {
    params: Vec<Parameter<T>>,
    index: HashMap<String, ParamId>,
}

impl<T: Element> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore { params: Vec::new(), index: HashMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor<T>) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::contract("param", format!("duplicate parameter name {name}")));
        }
        let id = ParamId(self.params.len());
        self.index.insert(name.clone(), id);
        self.params.push(Parameter::new(name, value));
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: ParamId) -> &Parameter<T> {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter<T> {
        &mut self.params[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter<T>> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter<T>> {
        self.params.iter_mut()
    }

    /// Total number of scalar weights.
    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.data_mut().iter_mut().for_each(|g| *g = T::zero());
        }
    }

    /// Replaces a value in place, keeping the name and clearing optimizer state.
    pub fn set_value(&mut self, id: ParamId, value: Tensor<T>) -> Result<()> {
        let p = &mut self.params[id.0];
        if value.shape() != p.value.shape() {
            return Err(Error::contract(
                "param",
                format!("{}: shape {:?} != {:?}", p.name, value.dims(), p.value.dims()),
            ));
        }
        p.value = Arc::new(value);
        Ok(())
    }

    /// Copy of the store in another element type. Gradients and accumulators are cast too.
    pub fn cast<U: Element>(&self) -> ParamStore<U> {
        let params = self
            .params
            .iter()
            .map(|p| Parameter {
                name: p.name.clone(),
                value: Arc::new(p.value.cast()),
                grad: p.grad.cast(),
                accumulator: p.accumulator.cast(),
            })
            .collect();
        ParamStore { params, index: self.index.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut store = ParamStore::<f32>::new();
        store.insert("w", Tensor::zeros(&[2]).unwrap()).unwrap();
        assert!(store.insert("w", Tensor::zeros(&[3]).unwrap()).is_err());
        assert_eq!(store.id("w"), Some(ParamId(0)));
        assert_eq!(store.scalar_count(), 2);
    }

    #[test]
    fn shapes_stay_identical() {
        let mut store = ParamStore::<f64>::new();
        let id = store.insert("b", Tensor::zeros(&[4]).unwrap()).unwrap();
        let p = store.get(id);
        assert_eq!(p.value.shape(), p.grad.shape());
        assert_eq!(p.value.shape(), p.accumulator.shape());
        assert!(store.set_value(id, Tensor::zeros(&[5]).unwrap()).is_err());
    }
}

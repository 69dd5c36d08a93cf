//! Operation tape for reverse-mode differentiation.
//!
//! A [`Tape`] either records (training, gradient checks) or not (inference).
//! Recording tapes keep every operation's backward closure, and with it the
//! tensors that closure captured, until [`Tape::backward`] consumes them. A
//! non-recording tape keeps nothing, so intermediates are released as soon
//! as the last [`Var`] referring to them is dropped.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::param::{ParamId, ParamStore};
use crate::tensor::Tensor;

/// Computes input gradients from the output gradient. The flag slice says
/// which inputs need one; entries for the others may be `None`.
pub type BackwardFn<T> =
    Box<dyn FnOnce(&Tensor<T>, &[bool]) -> Result<Vec<Option<Tensor<T>>>> + Send>;

/// Handle to a value produced on a tape.
#[derive(Clone)]
pub struct Var<T> {
    value: Arc<Tensor<T>>,
    slot: Option<usize>,
}

impl<T: Element> Var<T> {
    pub fn value(&self) -> &Tensor<T> {
        &self.value
    }

    pub fn value_arc(&self) -> Arc<Tensor<T>> {
        Arc::clone(&self.value)
    }

    pub fn dims(&self) -> &[usize] {
        self.value.dims()
    }

    pub fn requires_grad(&self) -> bool {
        self.slot.is_some()
    }
}

impl<T: Element> std::fmt::Debug for Var<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Var").field("slot", &self.slot).field("value", &self.value).finish()
    }
}

struct Entry<T> {
    op: &'static str,
    output: usize,
    inputs: Vec<Option<usize>>,
    backward: BackwardFn<T>,
}

struct State<T> {
    slots: usize,
    entries: Vec<Entry<T>>,
    params: HashMap<ParamId, Var<T>>,
}

pub struct Tape<T> {
    recording: bool,
    state: RefCell<State<T>>,
}

impl<T: Element> Tape<T> {
    /// A tape that records operations for a later backward pass.
    pub fn new() -> Self {
        Self::with_recording(true)
    }

    /// A tape that records nothing; values are freed eagerly.
    pub fn inference() -> Self {
        Self::with_recording(false)
    }

    fn with_recording(recording: bool) -> Self {
        Tape {
            recording,
            state: RefCell::new(State { slots: 0, entries: Vec::new(), params: HashMap::new() }),
        }
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    /// Number of recorded operations.
    pub fn len(&self) -> usize {
        self.state.borrow().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Names of recorded operations in execution order.
    pub fn op_names(&self) -> Vec<&'static str> {
        self.state.borrow().entries.iter().map(|e| e.op).collect()
    }

    fn next_slot(&self) -> usize {
        let mut st = self.state.borrow_mut();
        st.slots += 1;
        st.slots - 1
    }

    /// A value that never receives a gradient.
    pub fn constant(&self, value: Tensor<T>) -> Var<T> {
        Var { value: Arc::new(value), slot: None }
    }

    /// A differentiable input whose gradient can be read from [`Gradients`].
    pub fn leaf(&self, value: Tensor<T>) -> Var<T> {
        let slot = self.recording.then(|| self.next_slot());
        Var { value: Arc::new(value), slot }
    }

    /// Binds a parameter. Binding the same parameter twice returns the same variable.
    pub fn param(&self, store: &ParamStore<T>, id: ParamId) -> Var<T> {
        let value = Arc::clone(&store.get(id).value);
        if !self.recording {
            return Var { value, slot: None };
        }
        if let Some(v) = self.state.borrow().params.get(&id) {
            return v.clone();
        }
        let var = Var { value, slot: Some(self.next_slot()) };
        self.state.borrow_mut().params.insert(id, var.clone());
        var
    }

    /// Records an operation. `backward` is dropped unless the tape records and
    /// at least one input requires a gradient.
    pub fn record<F>(&self, op: &'static str, output: Tensor<T>, inputs: &[&Var<T>], backward: F) -> Result<Var<T>>
    where
        F: FnOnce(&Tensor<T>, &[bool]) -> Result<Vec<Option<Tensor<T>>>> + Send + 'static,
    {
        if !output.all_finite() {
            return Err(Error::NonFinite { op });
        }
        let needs_grad = self.recording && inputs.iter().any(|v| v.slot.is_some());
        if !needs_grad {
            return Ok(Var { value: Arc::new(output), slot: None });
        }
        let slot = self.next_slot();
        let entry = Entry {
            op,
            output: slot,
            inputs: inputs.iter().map(|v| v.slot).collect(),
            backward: Box::new(backward),
        };
        self.state.borrow_mut().entries.push(entry);
        Ok(Var { value: Arc::new(output), slot: Some(slot) })
    }

    /// Runs the recorded operations in exact reverse order, starting from a
    /// scalar `loss` seeded with gradient one.
    pub fn backward(&self, loss: &Var<T>) -> Result<Gradients<T>> {
        let Some(loss_slot) = loss.slot else {
            return Err(Error::contract("backward", "loss is not a recorded value"));
        };
        if loss.value.len() != 1 {
            return Err(Error::contract(
                "backward",
                format!("loss must be scalar, got {:?}", loss.value.dims()),
            ));
        }
        let (entries, slots, params) = {
            let mut st = self.state.borrow_mut();
            (std::mem::take(&mut st.entries), st.slots, std::mem::take(&mut st.params))
        };
        if entries.is_empty() {
            return Err(Error::contract("backward", "tape has no recorded operations"));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..slots).map(|_| None).collect();
        grads[loss_slot] = Some(Tensor::full(loss.value.dims(), T::one())?);
        for entry in entries.into_iter().rev() {
            let Some(g_out) = grads[entry.output].take() else {
                continue;
            };
            let needs: Vec<bool> = entry.inputs.iter().map(Option::is_some).collect();
            let g_in = (entry.backward)(&g_out, &needs)?;
            for (slot, g) in entry.inputs.iter().zip(g_in) {
                if let (Some(s), Some(g)) = (slot, g) {
                    if !g.all_finite() {
                        return Err(Error::NonFinite { op: entry.op });
                    }
                    match &mut grads[*s] {
                        Some(acc) => acc.add_assign(&g),
                        empty => *empty = Some(g),
                    }
                }
            }
        }
        let params = params.into_iter().filter_map(|(id, v)| v.slot.map(|s| (id, s))).collect();
        Ok(Gradients { grads, params })
    }
}

impl<T: Element> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Result of a backward pass.
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
    params: Vec<(ParamId, usize)>,
}

impl<T: Element> Gradients<T> {
    /// Gradient of a leaf or parameter variable; zeros when the loss does not depend on it.
    pub fn get(&self, var: &Var<T>) -> Option<Tensor<T>> {
        let slot = var.slot?;
        Some(match &self.grads[slot] {
            Some(g) => g.clone(),
            None => Tensor::zeros_like(&var.value),
        })
    }

    /// Writes parameter gradients into the store. Parameters the loss does not
    /// reach receive zeros.
    pub fn write_to(mut self, store: &mut ParamStore<T>) {
        store.zero_grads();
        for (id, slot) in std::mem::take(&mut self.params) {
            if let Some(g) = self.grads[slot].take() {
                store.get_mut(id).grad = g;
            }
        }
    }
}

/// Convenience for training: backward from `loss` and write into `store`.
pub fn backward<T: Element>(tape: &Tape<T>, loss: &Var<T>, store: &mut ParamStore<T>) -> Result<()> {
    tape.backward(loss)?.write_to(store);
    Ok(())
}

use crate::element::Element;
use crate::error::Result;
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

fn sigmoid<T: Element>(v: T) -> T {
    // split on sign so exp never overflows
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

pub fn elementwise<T: Element>(tape: &Tape<T>, x: &Var<T>, kind: Activation) -> Result<Var<T>> {
    let out = match kind {
        Activation::Relu => x.value().map(|v| v.max(T::zero())),
        Activation::Sigmoid => x.value().map(sigmoid),
        Activation::Tanh => x.value().map(|v| v.tanh()),
    };
    let saved = tape.is_recording().then(|| out.clone());
    tape.record("elementwise", out, &[x], move |g, _| {
        let y = saved.expect("recorded op keeps its output");
        let dx: Vec<T> = g
            .data()
            .iter()
            .zip(y.data())
            .map(|(&g, &y)| match kind {
                Activation::Relu => {
                    if y > T::zero() {
                        g
                    } else {
                        T::zero()
                    }
                }
                Activation::Sigmoid => g * y * (T::one() - y),
                Activation::Tanh => g * (T::one() - y * y),
            })
            .collect();
        Ok(vec![Some(Tensor::from_parts(y.shape().clone(), dx))])
    })
}

pub fn relu<T: Element>(tape: &Tape<T>, x: &Var<T>) -> Result<Var<T>> {
    elementwise(tape, x, Activation::Relu)
}

pub fn sigmoid_op<T: Element>(tape: &Tape<T>, x: &Var<T>) -> Result<Var<T>> {
    elementwise(tape, x, Activation::Sigmoid)
}

pub fn tanh_op<T: Element>(tape: &Tape<T>, x: &Var<T>) -> Result<Var<T>> {
    elementwise(tape, x, Activation::Tanh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_and_symmetry_points() {
        let tape = Tape::<f64>::inference();
        let x = tape.constant(Tensor::from_vec(&[3], vec![-1.0, 0.0, 2.0]).unwrap());
        assert_eq!(relu(&tape, &x).unwrap().value().data(), &[0.0, 0.0, 2.0]);
        let z = tape.constant(Tensor::scalar(0.0));
        assert_eq!(sigmoid_op(&tape, &z).unwrap().value().item(), 0.5);
        assert_eq!(tanh_op(&tape, &z).unwrap().value().item(), 0.0);
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        let tape = Tape::<f32>::inference();
        let x = tape.constant(Tensor::from_vec(&[2], vec![-200.0, 200.0]).unwrap());
        let y = sigmoid_op(&tape, &x).unwrap();
        assert_eq!(y.value().data(), &[0.0, 1.0]);
    }
}

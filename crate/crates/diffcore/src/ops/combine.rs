use crate::element::Element;
use crate::error::{Error, Result};
use crate::tape::{Tape, Var};
use crate::tensor::{Shape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Add,
    Sub,
    Hadamard,
    ConcatChannels,
}

pub fn combine<T: Element>(tape: &Tape<T>, a: &Var<T>, b: &Var<T>, kind: CombineKind) -> Result<Var<T>> {
    match kind {
        CombineKind::ConcatChannels => concat_channels(tape, &[a, b]),
        _ => binary(tape, a, b, kind),
    }
}

pub fn add<T: Element>(tape: &Tape<T>, a: &Var<T>, b: &Var<T>) -> Result<Var<T>> {
    binary(tape, a, b, CombineKind::Add)
}

pub fn sub<T: Element>(tape: &Tape<T>, a: &Var<T>, b: &Var<T>) -> Result<Var<T>> {
    binary(tape, a, b, CombineKind::Sub)
}

pub fn hadamard<T: Element>(tape: &Tape<T>, a: &Var<T>, b: &Var<T>) -> Result<Var<T>> {
    binary(tape, a, b, CombineKind::Hadamard)
}

fn binary<T: Element>(tape: &Tape<T>, a: &Var<T>, b: &Var<T>, kind: CombineKind) -> Result<Var<T>> {
    if a.dims() != b.dims() {
        return Err(Error::contract(
            "combine",
            format!("{kind:?} needs identical shapes, got {:?} and {:?}", a.dims(), b.dims()),
        ));
    }
    let (av, bv) = (a.value().data(), b.value().data());
    let data: Vec<T> = match kind {
        CombineKind::Add => av.iter().zip(bv).map(|(&x, &y)| x + y).collect(),
        CombineKind::Sub => av.iter().zip(bv).map(|(&x, &y)| x - y).collect(),
        CombineKind::Hadamard => av.iter().zip(bv).map(|(&x, &y)| x * y).collect(),
        CombineKind::ConcatChannels => unreachable!(),
    };
    let out = Tensor::from_parts(a.value().shape().clone(), data);
    let saved = (tape.is_recording() && kind == CombineKind::Hadamard).then(|| (a.value_arc(), b.value_arc()));
    tape.record("combine", out, &[a, b], move |g, needs| {
        Ok(match kind {
            CombineKind::Add => vec![needs[0].then(|| g.clone()), needs[1].then(|| g.clone())],
            CombineKind::Sub => vec![needs[0].then(|| g.clone()), needs[1].then(|| g.map(|v| -v))],
            CombineKind::Hadamard => {
                let (a, b) = saved.expect("hadamard keeps inputs");
                let cross = |other: &Tensor<T>| {
                    let d: Vec<T> = g.data().iter().zip(other.data()).map(|(&g, &o)| g * o).collect();
                    Tensor::from_parts(g.shape().clone(), d)
                };
                vec![needs[0].then(|| cross(&b)), needs[1].then(|| cross(&a))]
            }
            CombineKind::ConcatChannels => unreachable!(),
        })
    })
}

/// Concatenates rank-4 tensors along the channel axis.
pub fn concat_channels<T: Element>(tape: &Tape<T>, parts: &[&Var<T>]) -> Result<Var<T>> {
    const OP: &str = "concat_channels";
    let first = parts.first().ok_or_else(|| Error::contract(OP, "nothing to concatenate"))?;
    let (n, _, h, w) = first
        .value()
        .nchw()
        .ok_or_else(|| Error::contract(OP, format!("rank-4 input required, got {:?}", first.dims())))?;
    let mut channels = Vec::with_capacity(parts.len());
    for p in parts {
        match p.value().nchw() {
            Some((pn, pc, ph, pw)) if (pn, ph, pw) == (n, h, w) => channels.push(pc),
            _ => {
                return Err(Error::contract(
                    OP,
                    format!("non-channel extents differ: {:?} vs {:?}", first.dims(), p.dims()),
                ))
            }
        }
    }
    let total: usize = channels.iter().sum();
    let plane = h * w;
    let mut data = Vec::with_capacity(n * total * plane);
    for bi in 0..n {
        for (p, &c) in parts.iter().zip(&channels) {
            data.extend_from_slice(&p.value().data()[bi * c * plane..(bi + 1) * c * plane]);
        }
    }
    let out = Tensor::from_parts(Shape::new(&[n, total, h, w])?, data);
    tape.record(OP, out, parts, move |g, needs| {
        let gs = g.data();
        let mut grads = Vec::with_capacity(channels.len());
        let mut offset = 0;
        for (i, &c) in channels.iter().enumerate() {
            if needs[i] {
                let mut d = Vec::with_capacity(n * c * plane);
                for bi in 0..n {
                    let s = (bi * total + offset) * plane;
                    d.extend_from_slice(&gs[s..s + c * plane]);
                }
                grads.push(Some(Tensor::from_parts(Shape(vec![n, c, h, w]), d)));
            } else {
                grads.push(None);
            }
            offset += c;
        }
        Ok(grads)
    })
}

/// Channels `[start, start+count)` of a rank-4 tensor.
pub fn slice_channels<T: Element>(tape: &Tape<T>, x: &Var<T>, start: usize, count: usize) -> Result<Var<T>> {
    const OP: &str = "slice_channels";
    let (n, c, h, w) = x
        .value()
        .nchw()
        .ok_or_else(|| Error::contract(OP, format!("rank-4 input required, got {:?}", x.dims())))?;
    if count == 0 || start + count > c {
        return Err(Error::contract(OP, format!("channels {start}..{} of {c}", start + count)));
    }
    let plane = h * w;
    let mut data = Vec::with_capacity(n * count * plane);
    for bi in 0..n {
        let s = (bi * c + start) * plane;
        data.extend_from_slice(&x.value().data()[s..s + count * plane]);
    }
    let out = Tensor::from_parts(Shape::new(&[n, count, h, w])?, data);
    let in_shape = x.value().shape().clone();
    tape.record(OP, out, &[x], move |g, _| {
        let mut d = vec![T::zero(); in_shape.numel()];
        for bi in 0..n {
            let s = (bi * c + start) * plane;
            d[s..s + count * plane].copy_from_slice(&g.data()[bi * count * plane..(bi + 1) * count * plane]);
        }
        Ok(vec![Some(Tensor::from_parts(in_shape, d))])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_zero_is_identity() {
        let tape = Tape::<f32>::inference();
        let x = tape.constant(Tensor::from_vec(&[1, 1, 2, 2], vec![1.0, -2.0, 3.5, 0.0]).unwrap());
        let z = tape.constant(Tensor::zeros(&[1, 1, 2, 2]).unwrap());
        let y = combine(&tape, &x, &z, CombineKind::Add).unwrap();
        assert_eq!(y.value().data(), x.value().data());
    }

    #[test]
    fn concat_shape_contract() {
        let tape = Tape::<f32>::inference();
        let a = tape.constant(Tensor::zeros(&[1, 8, 4, 4]).unwrap());
        let b = tape.constant(Tensor::zeros(&[1, 16, 4, 4]).unwrap());
        let y = combine(&tape, &a, &b, CombineKind::ConcatChannels).unwrap();
        assert_eq!(y.dims(), &[1, 24, 4, 4]);
        let c = tape.constant(Tensor::zeros(&[1, 16, 4, 5]).unwrap());
        assert!(combine(&tape, &a, &c, CombineKind::ConcatChannels).is_err());
        assert!(combine(&tape, &a, &b, CombineKind::Add).is_err());
    }

    #[test]
    fn slice_inverts_concat() {
        let tape = Tape::<f64>::inference();
        let a = tape.constant(Tensor::from_vec(&[1, 1, 1, 2], vec![1.0, 2.0]).unwrap());
        let b = tape.constant(Tensor::from_vec(&[1, 2, 1, 2], vec![3.0, 4.0, 5.0, 6.0]).unwrap());
        let y = concat_channels(&tape, &[&a, &b]).unwrap();
        let s = slice_channels(&tape, &y, 1, 2).unwrap();
        assert_eq!(s.value().data(), b.value().data());
    }
}

use std::fmt;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::memory::Buffer;

/// Tensor extents, at most four, in batch-channel-height-width order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Shape(pub(crate) Vec<usize>);

impl Shape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 {
            return Err(Error::contract("shape", format!("rank {} not in 1..=4", dims.len())));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::contract("shape", format!("zero extent in {dims:?}")));
        }
        Ok(Shape(dims.to_vec()))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn numel(&self) -> usize {
        self.0.iter().product()
    }

    /// Extents as `(n, c, h, w)`; only rank-4 shapes qualify.
    pub fn nchw(&self) -> Option<(usize, usize, usize, usize)> {
        match self.0.as_slice() {
            &[n, c, h, w] => Some((n, c, h, w)),
            _ => None,
        }
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Dense row-major array. Storage is tracked by [`crate::memory`].
#[derive(Clone)]
pub struct Tensor<T> {
    shape: Shape,
    data: Buffer<T>,
}

impl<T: Element> Tensor<T> {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::full(dims, T::zero())
    }

    pub fn full(dims: &[usize], value: T) -> Result<Self> {
        let shape = Shape::new(dims)?;
        let data = Buffer::filled(shape.numel(), value);
        Ok(Tensor { shape, data })
    }

    pub fn from_vec(dims: &[usize], data: Vec<T>) -> Result<Self> {
        let shape = Shape::new(dims)?;
        if shape.numel() != data.len() {
            return Err(Error::contract(
                "tensor",
                format!("{} elements for shape {:?}", data.len(), shape),
            ));
        }
        Ok(Tensor { shape, data: Buffer::from_vec(data) })
    }

    pub fn scalar(value: T) -> Self {
        Tensor { shape: Shape(vec![1]), data: Buffer::from_vec(vec![value]) }
    }

    pub(crate) fn from_parts(shape: Shape, data: Vec<T>) -> Self {
        debug_assert_eq!(shape.numel(), data.len());
        Tensor { shape, data: Buffer::from_vec(data) }
    }

    pub fn zeros_like(other: &Tensor<T>) -> Self {
        Tensor { shape: other.shape.clone(), data: Buffer::filled(other.len(), T::zero()) }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data.into_vec()
    }

    /// First element; the value of a scalar tensor.
    pub fn item(&self) -> T {
        self.data[0]
    }

    pub fn reshape(self, dims: &[usize]) -> Result<Self> {
        let shape = Shape::new(dims)?;
        if shape.numel() != self.len() {
            return Err(Error::contract(
                "reshape",
                format!("{:?} cannot become {:?}", self.shape, shape),
            ));
        }
        Ok(Tensor { shape, data: self.data })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let data: Vec<T> = self.data.iter().map(|&v| f(v)).collect();
        Tensor::from_parts(self.shape.clone(), data)
    }

    pub fn cast<U: Element>(&self) -> Tensor<U> {
        let data: Vec<U> = self.data.iter().map(|&v| U::lit(v.as_f64())).collect();
        Tensor::from_parts(self.shape.clone(), data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add_assign(&mut self, other: &Tensor<T>) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + b;
        }
    }

    pub fn nchw(&self) -> Option<(usize, usize, usize, usize)> {
        self.shape.nchw()
    }

    pub fn max_abs_diff(&self, other: &Tensor<T>) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max)
    }
}

impl<T: Element> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 8;
        write!(f, "Tensor<{}>{:?} ", T::NAME, self.shape)?;
        let head: Vec<_> = self.data.iter().take(SHOWN).collect();
        write!(f, "{head:?}")?;
        if self.len() > SHOWN {
            write!(f, "..")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_rules() {
        assert!(Shape::new(&[]).is_err());
        assert!(Shape::new(&[1, 2, 3, 4, 5]).is_err());
        assert!(Shape::new(&[2, 0]).is_err());
        let s = Shape::new(&[1, 3, 4, 5]).unwrap();
        assert_eq!(s.numel(), 60);
        assert_eq!(s.nchw(), Some((1, 3, 4, 5)));
    }

    #[test]
    fn from_vec_checks_element_count() {
        assert!(Tensor::<f32>::from_vec(&[2, 2], vec![1.0; 3]).is_err());
        let t = Tensor::<f32>::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.len(), 4);
        let t = t.reshape(&[1, 1, 2, 2]).unwrap();
        assert_eq!(t.nchw(), Some((1, 1, 2, 2)));
        assert!(t.reshape(&[3]).is_err());
    }
}

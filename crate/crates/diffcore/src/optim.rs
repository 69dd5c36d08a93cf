use std::sync::Arc;

use crate::element::Element;
use crate::param::ParamStore;

/// RMSProp with a zero-initialized squared-gradient accumulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for RmsProp {
    fn default() -> Self {
        RmsProp { lr: 1e-3, rho: 0.9, eps: 1e-10 }
    }
}

impl RmsProp {
    /// One update of every parameter; gradients are cleared afterwards.
    pub fn step<T: Element>(&self, params: &mut ParamStore<T>) {
        rmsprop_step(params, self.lr, self.rho, self.eps);
    }
}

/// Per element: `acc = rho*acc + (1-rho)*g²`, `value -= lr*g/(sqrt(acc)+eps)`.
pub fn rmsprop_step<T: Element>(params: &mut ParamStore<T>, lr: f64, rho: f64, eps: f64) {
    assert!(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    let (lr, rho, eps) = (T::lit(lr), T::lit(rho), T::lit(eps));
    let one_minus = T::one() - rho;
    for p in params.iter_mut() {
        let value = Arc::make_mut(&mut p.value);
        let acc = p.accumulator.data_mut();
        for ((v, a), g) in value.data_mut().iter_mut().zip(acc.iter_mut()).zip(p.grad.data_mut()) {
            *a = rho * *a + one_minus * *g * *g;
            *v = *v - lr * *g / (a.sqrt() + eps);
            *g = T::zero();
        }
    }
}

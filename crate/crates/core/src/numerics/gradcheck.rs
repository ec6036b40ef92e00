//! Central finite differences over every scalar of a [`ParameterStore`].

use super::params::ParameterStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Gradient of `f` at the store's current values, one tensor per parameter.
///
/// Each scalar is perturbed by `±h` in turn and restored exactly afterwards.
pub fn finite_diff_grad(
    mut f: impl FnMut(&ParameterStore) -> f64,
    store: &mut ParameterStore,
    h: f64,
) -> Result<Vec<Tensor>> {
    if !(h > 0.0) {
        return Err(Error::Contract("finite-difference step must be positive".into()));
    }
    let names: Vec<String> = store.iter().map(|(n, _)| n.to_string()).collect();
    let mut out = Vec::with_capacity(names.len());
    for (idx, name) in names.iter().enumerate() {
        let id = store.id(name).expect("name from store");
        let shape = store.param(id).value.shape().to_vec();
        let n = store.param(id).value.len();
        let mut g = Tensor::zeros(&shape);
        for i in 0..n {
            let orig = store.value(id)[i];
            store.value_mut(id)[i] = orig + h;
            let plus = f(store);
            store.value_mut(id)[i] = orig - h;
            let minus = f(store);
            store.value_mut(id)[i] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective when perturbing {name}[{i}] (parameter #{idx})"
                )));
            }
            g.data_mut()[i] = (plus - minus) / (2.0 * h);
        }
        out.push(g);
    }
    Ok(out)
}

/// Largest `|a - n| / max(|a|, |n|, floor)` over all components.
///
/// The floor keeps components whose true gradient is at the level of
/// finite-difference round-off from dominating the ratio.
pub fn max_relative_error(analytic: &[Tensor], numeric: &[Tensor], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        assert_eq!(a.shape(), n.shape());
        for (&x, &y) in a.data().iter().zip(n.data()) {
            let denom = x.abs().max(y.abs()).max(floor);
            worst = worst.max((x - y).abs() / denom);
        }
    }
    worst
}

//! Brute-force marginals and partition function for tiny RBMs.

use ndarray::{Array1, ArrayView1};

use super::BinaryRbm;
use crate::error::{Error, Result};

/// Largest `n_v + n_h` accepted by [`exact_enumeration`].
pub const MAX_ENUMERATION_UNITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactMarginals {
    /// `P(v_i = 1)`.
    pub pv: Array1<f64>,
    /// `P(h_j = 1)`.
    pub ph: Array1<f64>,
    pub ln_z: f64,
}

/// Sums `exp(-E(v, h) + field·v)` over all `2^(n_v + n_h)` joint states.
pub fn exact_enumeration(rbm: &BinaryRbm, field: ArrayView1<f64>) -> Result<ExactMarginals> {
    let (n_v, n_h) = (rbm.n_visible(), rbm.n_hidden());
    if n_v + n_h > MAX_ENUMERATION_UNITS {
        return Err(Error::EnumerationTooLarge {
            units: n_v + n_h,
            limit: MAX_ENUMERATION_UNITS,
        });
    }
    Error::check_dim("visible field", n_v, field.len())?;
    let w = rbm.weights();
    let vb = rbm.vbias();
    let hb = rbm.hbias();

    let mut hidden_field = vec![0.0; n_h];
    let mut visit = |f: &mut dyn FnMut(u32, u32, f64)| {
        for v in 0u32..(1 << n_v) {
            let mut base = 0.0;
            hidden_field.copy_from_slice(hb.as_slice().unwrap());
            for i in 0..n_v {
                if v >> i & 1 == 1 {
                    base += vb[i] + field[i];
                    for (j, hf) in hidden_field.iter_mut().enumerate() {
                        *hf += w[[i, j]];
                    }
                }
            }
            for h in 0u32..(1 << n_h) {
                let mut lw = base;
                for (j, hf) in hidden_field.iter().enumerate() {
                    if h >> j & 1 == 1 {
                        lw += hf;
                    }
                }
                f(v, h, lw);
            }
        }
    };

    let mut max_lw = f64::NEG_INFINITY;
    visit(&mut |_, _, lw| max_lw = max_lw.max(lw));

    let mut z = 0.0;
    let mut pv = vec![0.0; n_v];
    let mut ph = vec![0.0; n_h];
    visit(&mut |v, h, lw| {
        let p = (lw - max_lw).exp();
        z += p;
        for (i, acc) in pv.iter_mut().enumerate() {
            if v >> i & 1 == 1 {
                *acc += p;
            }
        }
        for (j, acc) in ph.iter_mut().enumerate() {
            if h >> j & 1 == 1 {
                *acc += p;
            }
        }
    });

    Ok(ExactMarginals {
        pv: Array1::from(pv) / z,
        ph: Array1::from(ph) / z,
        ln_z: max_lw + z.ln(),
    })
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array2};

    use super::*;
    use crate::math::sigmoid;

    #[test]
    fn uniform_two_unit_model() {
        let r = BinaryRbm::zeros(1, 1).unwrap();
        let ex = exact_enumeration(&r, array![0.0].view()).unwrap();
        assert_eq!(ex.pv, array![0.5]);
        assert_eq!(ex.ph, array![0.5]);
        assert!((ex.ln_z - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn factorized_model_marginals() {
        let r = BinaryRbm::new(array![0.3, -1.2, 2.0], array![0.5, -0.1], Array2::zeros((3, 2))).unwrap();
        let field = array![0.4, 0.0, -3.0];
        let ex = exact_enumeration(&r, field.view()).unwrap();
        for i in 0..3 {
            assert!((ex.pv[i] - sigmoid(r.vbias()[i] + field[i])).abs() < 1e-14);
        }
        for j in 0..2 {
            assert!((ex.ph[j] - sigmoid(r.hbias()[j])).abs() < 1e-14);
        }
    }

    #[test]
    fn hand_enumerated_eight_states() {
        // W = [[1], [-1]], zero biases. Weights e^{v1 h - v2 h}:
        // h = 0: four states of weight 1.
        // h = 1: (v1, v2) = (0,0) 1, (1,0) e, (0,1) 1/e, (1,1) 1.
        let r = BinaryRbm::new(array![0.0, 0.0], array![0.0], array![[1.0], [-1.0]]).unwrap();
        let ex = exact_enumeration(&r, array![0.0, 0.0].view()).unwrap();
        let e = 1f64.exp();
        let z = 4.0 + 2.0 + e + 1.0 / e;
        assert!((ex.ln_z - z.ln()).abs() < 1e-14);
        assert!((ex.pv[0] - (2.0 + e + 1.0) / z).abs() < 1e-14);
        assert!((ex.pv[1] - (2.0 + 1.0 / e + 1.0) / z).abs() < 1e-14);
        assert!((ex.ph[0] - (2.0 + e + 1.0 / e) / z).abs() < 1e-14);
    }

    #[test]
    fn size_bound() {
        let r = BinaryRbm::zeros(20, 5).unwrap();
        let err = exact_enumeration(&r, Array1::zeros(20).view()).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { units: 25, limit: 24 }));
    }
}

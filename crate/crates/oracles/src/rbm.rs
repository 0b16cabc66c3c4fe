//! Binary RBM marginals with the hidden layer summed out analytically:
//! `Z = Σ_v exp(b·v + f·v) Π_j (1 + exp(c_j + Σ_i v_i W_ij))`.

/// Weights are row-major `n_v × n_h`.
#[derive(Clone, Debug)]
pub struct TinyRbm {
    pub vbias: Vec<f64>,
    pub hbias: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Marginals {
    pub pv: Vec<f64>,
    pub ph: Vec<f64>,
    pub ln_z: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn marginals(rbm: &TinyRbm, field: &[f64]) -> Marginals {
    let n_v = rbm.vbias.len();
    let n_h = rbm.hbias.len();
    assert!(n_v <= 20, "too many visible units to enumerate");
    let states: Vec<(Vec<f64>, f64)> = (0u32..1 << n_v)
        .map(|bits| {
            let v: Vec<f64> = (0..n_v).map(|i| f64::from(bits >> i & 1)).collect();
            let act: Vec<f64> = (0..n_h)
                .map(|j| rbm.hbias[j] + (0..n_v).map(|i| v[i] * rbm.w[i][j]).sum::<f64>())
                .collect();
            let lw = (0..n_v).map(|i| v[i] * (rbm.vbias[i] + field[i])).sum::<f64>()
                + act.iter().map(|&a| softplus(a)).sum::<f64>();
            (act, lw)
        })
        .collect();
    let top = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut pv = vec![0.0; n_v];
    let mut ph = vec![0.0; n_h];
    for (bits, (act, lw)) in states.iter().enumerate() {
        let p = (lw - top).exp();
        z += p;
        for (i, acc) in pv.iter_mut().enumerate() {
            if bits >> i & 1 == 1 {
                *acc += p;
            }
        }
        for (acc, &a) in ph.iter_mut().zip(act) {
            *acc += p * sigmoid(a);
        }
    }
    Marginals {
        pv: pv.into_iter().map(|p| p / z).collect(),
        ph: ph.into_iter().map(|p| p / z).collect(),
        ln_z: top + z.ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_units() {
        let rbm = TinyRbm { vbias: vec![0.5, -1.0], hbias: vec![2.0], w: vec![vec![0.0], vec![0.0]] };
        let m = marginals(&rbm, &[0.0, 1.0]);
        assert!((m.pv[0] - sigmoid(0.5)).abs() < 1e-15);
        assert!((m.pv[1] - sigmoid(0.0)).abs() < 1e-15);
        assert!((m.ph[0] - sigmoid(2.0)).abs() < 1e-15);
        let ln_z = softplus(0.5) + softplus(0.0) + softplus(2.0);
        assert!((m.ln_z - ln_z).abs() < 1e-14);
    }
}

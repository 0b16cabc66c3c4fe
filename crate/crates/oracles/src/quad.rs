//! Adaptive Gauss-Kronrod (7/15) quadrature and the spike-and-slab posterior
//! moments computed with it.

use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Kronrod estimate and `|K - G|` on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = h * XGK[k];
        let pair = f(c - x) + f(c + x);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]`. Panels are bisected worst-first until the
/// summed error estimate is below `rel_tol · |total|` (or `abs_tol`).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    // (lo, hi, estimate, error)
    let mut panels = Vec::new();
    let initial = 16;
    let width = (b - a) / initial as f64;
    for k in 0..initial {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == initial { b } else { lo + width };
        let (est, err) = gk15(&f, lo, hi);
        panels.push((lo, hi, est, err));
    }
    for _ in 0..20_000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            break;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3))
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (est, err) = gk15(&f, l, h);
            panels.push((l, h, est, err));
        }
    }
    panels.iter().map(|p| p.2).sum()
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - 0.5 * (x - mean) * (x - mean) / var
}

/// Maximizes a unimodal `f` on `[a, b]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    0.5 * (a + b)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadPosterior {
    pub mean: f64,
    pub var: f64,
    pub pi: f64,
    /// `E|x|`, a scale for judging the mean when it nearly cancels.
    pub abs_mean: f64,
}

/// Moments of `p(x) ∝ [(1-ρ) δ(x) + ρ N(x; μ, σ²)] N(x; r, s)`.
///
/// The slab part is integrated numerically over the window where its
/// log-density is within 60 nats of its peak; the spike enters as a point
/// mass at zero.
pub fn spike_slab_posterior(r: f64, s: f64, rho: f64, mu: f64, sigma2: f64) -> QuadPosterior {
    let ln_slab = |x: f64| ln_normal(x, mu, sigma2) + ln_normal(x, r, s);
    let (lo, hi) = if mu < r { (mu, r) } else { (r, mu) };
    let peak_x = if lo == hi { lo } else { golden_max(ln_slab, lo, hi) };
    let peak = ln_slab(peak_x);

    let reach = |dir: f64| {
        let mut step = s.min(sigma2).sqrt();
        while ln_slab(peak_x + dir * step) > peak - 60.0 {
            step *= 2.0;
        }
        peak_x + dir * step
    };
    let (a, b) = (reach(-1.0), reach(1.0));

    let w = |x: f64| (ln_slab(x) - peak).exp();
    let tol = 1e-11;
    let z0 = integrate(w, a, b, tol, 0.0);
    let m1_abs = integrate(|x| x.abs() * w(x), a, b, tol, 0.0) / z0;
    // The signed moment may cancel to ~0; bound its error against E|x| instead.
    let m1 = integrate(|x| x * w(x), a, b, tol, tol * m1_abs * z0) / z0;
    let central = integrate(|x| (x - m1) * (x - m1) * w(x), a, b, tol, 0.0) / z0;

    let ln_on = rho.ln() + peak + z0.ln();
    let ln_off = (1.0 - rho).ln() + ln_normal(0.0, r, s);
    let top = ln_on.max(ln_off);
    let ln_total = top + ((ln_on - top).exp() + (ln_off - top).exp()).ln();
    let pi = (ln_on - ln_total).exp();
    let off = (ln_off - ln_total).exp();

    let mean = pi * m1;
    // Central second moment of the mixture, taken around its own mean.
    let var = pi * (central + (m1 - mean) * (m1 - mean)) + off * mean * mean;
    QuadPosterior {
        mean,
        var,
        pi,
        abs_mean: pi * m1_abs,
    }
}

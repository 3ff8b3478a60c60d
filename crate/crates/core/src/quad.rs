//! Adaptive Gauss–Kronrod integration.
//!
//! A 7/15-point Gauss–Kronrod pair on each panel, with global adaptive
//! bisection of the panel carrying the largest error estimate. Callers pass
//! the breakpoints they know about (discontinuities, kinks) so that no panel
//! straddles a non-smooth point; bisection only has to deal with endpoint
//! singularities of the `sqrt` kind that arise from circle/square clipping.

use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Requested accuracy: the estimate stops once the error bound falls below
/// `max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Kronrod panel with its 7-point Gauss error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (res_k * half, err)
}

const MAX_PANELS: usize = 4000;

/// Integrate `f` over `[breaks[0], breaks[last]]`, with an initial panel
/// between each pair of consecutive breakpoints.
///
/// Breakpoints need not be sorted or unique; they are sorted and deduplicated
/// here. Fewer than two distinct breakpoints yields a zero integral.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Estimate {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }

    let mut heap = BinaryHeap::with_capacity(2 * pts.len());
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    let mut converged = error <= tol.target(value);
    while !converged && heap.len() < MAX_PANELS {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel exhausted machine resolution; keep it and stop refining.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        converged = error <= tol.target(value);
    }

    // Re-sum to shed the drift of the running totals.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Estimate {
        value,
        error,
        evaluations,
        converged: converged || error <= tol.target(value),
    }
}

/// Iterated integral `∫_{x} ∫_{y} f(x, y) dy dx`.
///
/// `inner_breaks(x)` gives the breakpoints (including both limits) of the
/// inner integral at abscissa `x`. The inner integrals are solved to a tenth
/// of the outer tolerance.
pub fn integrate_2d<F, B>(f: F, outer_breaks: &[f64], inner_breaks: B, tol: Tolerance) -> Estimate
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> Vec<f64>,
{
    let inner_tol = Tolerance::new(tol.abs * 0.1, tol.rel * 0.1);
    let mut inner_error = 0.0;
    let mut inner_evals = 0;
    let mut inner_ok = true;
    let outer = integrate(
        |x| {
            let ib = inner_breaks(x);
            let est = integrate(|y| f(x, y), &ib, inner_tol);
            inner_error = f64::max(inner_error, est.error);
            inner_evals += est.evaluations;
            inner_ok &= est.converged;
            est.value
        },
        outer_breaks,
        tol,
    );
    let span = match (
        outer_breaks.iter().copied().reduce(f64::min),
        outer_breaks.iter().copied().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    Estimate {
        value: outer.value,
        error: outer.error + inner_error * span,
        evaluations: inner_evals,
        converged: outer.converged && inner_ok,
    }
}

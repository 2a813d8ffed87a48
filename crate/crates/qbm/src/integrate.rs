//! Internal adaptive Gauss-Kronrod machinery.
//!
//! The spectral routes all reduce to one-dimensional integrals over panels of
//! the positive frequency axis. This module supplies the 15-point
//! Gauss-Kronrod rule, a worst-panel-first refinement loop over an arbitrary
//! preset panelization, and a repeated-averaging accelerator for the
//! alternating panel sums produced by oscillatory tails. Everything here is
//! crate-private; the public surface lives in `quadrature`.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{QbmError, Result};

/// Node/weight tables of the 7-point Gauss, 15-point Kronrod pair, as
/// tabulated in QUADPACK's QK15 (abscissae of the 15-point rule; odd indices
/// are the embedded Gauss points).
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Value types the panel rule can accumulate: real integrands for the
/// production path, complex ones for the symmetry-fold reference used in
/// validation.
pub(crate) trait PanelValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl PanelValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl PanelValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Integral and error estimate for a single panel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PanelEstimate<V> {
    pub value: V,
    pub error: f64,
}

/// QUADPACK's error rescaling: the raw Gauss/Kronrod difference is sharpened
/// by the smoothness measure `resasc` and floored at round-off level of the
/// absolute integral `resabs`.
fn rescale_error(raw: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = raw.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// Applies the G7K15 pair to `f` on `[a, b]`.
pub(crate) fn gk15<V, F>(f: &mut F, a: f64, b: f64) -> PanelEstimate<V>
where
    V: PanelValue,
    F: FnMut(f64) -> V,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center.scale(WGK15[7]);
    // The center abscissa belongs to both rules.
    let mut gauss = f_center.scale(WG7[3]);
    let mut resabs = f_center.magnitude() * WGK15[7];

    let mut samples = [V::zero(); 15];
    samples[7] = f_center;

    for j in 0..7 {
        let x = half * XGK15[j];
        let lo = f(center - x);
        let hi = f(center + x);
        samples[j] = lo;
        samples[14 - j] = hi;
        let pair = lo.add(hi);
        kronrod = kronrod.add(pair.scale(WGK15[j]));
        resabs += WGK15[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG7[j / 2]));
        }
    }

    let mean = kronrod.scale(0.5);
    let mut resasc = WGK15[7] * f_center.sub(mean).magnitude();
    for j in 0..7 {
        resasc += WGK15[j] * (samples[j].sub(mean).magnitude() + samples[14 - j].sub(mean).magnitude());
    }

    let raw = kronrod.sub(gauss).magnitude() * half.abs();
    PanelEstimate {
        value: kronrod.scale(half),
        error: rescale_error(raw, resabs * half.abs(), resasc * half.abs()),
    }
}

/// A base panel handed to [`refine_panels`]: `kind` selects which integrand
/// the dispatch closure applies on `[a, b]` (the production path integrates
/// two different variables, the raw frequency and the inverted tail
/// coordinate, in one refinement loop).
#[derive(Debug, Clone, Copy)]
pub(crate) struct BasePanel {
    pub kind: usize,
    pub a: f64,
    pub b: f64,
}

struct HeapPanel<V> {
    kind: usize,
    a: f64,
    b: f64,
    estimate: PanelEstimate<V>,
}

impl<V> HeapPanel<V> {
    // A panel narrower than a few ulps cannot be bisected meaningfully; its
    // error estimate is kept but it leaves the refinement queue.
    fn splittable(&self) -> bool {
        let width = self.b - self.a;
        width > 4.0 * f64::EPSILON * self.a.abs().max(self.b.abs()).max(f64::MIN_POSITIVE)
    }
}

impl<V> PartialEq for HeapPanel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.estimate.error == other.estimate.error
    }
}
impl<V> Eq for HeapPanel<V> {}
impl<V> PartialOrd for HeapPanel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for HeapPanel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.estimate.error.total_cmp(&other.estimate.error)
    }
}

/// Outcome of a refinement run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AdaptiveOutcome<V> {
    pub value: V,
    /// Absolute error estimate, including any fixed contribution.
    pub abs_error: f64,
}

/// Integrates a preset panelization to tolerance by repeatedly bisecting the
/// panel with the largest error estimate.
///
/// `fixed` is a contribution (value, absolute error) computed outside the
/// refinement loop, e.g. an extrapolated oscillatory tail; it participates in
/// the tolerance test but is never refined. Convergence requires the total
/// absolute error to drop below `max(abs_tol, rel_tol * |integral|)`.
///
/// # Errors
/// [`QbmError::Convergence`] when `max_splits` bisections were spent without
/// reaching tolerance; the achieved relative error is reported.
pub(crate) fn refine_panels<V, F>(
    f: &mut F,
    base: &[BasePanel],
    rel_tol: f64,
    abs_tol: f64,
    max_splits: usize,
    fixed: PanelEstimate<V>,
) -> Result<AdaptiveOutcome<V>>
where
    V: PanelValue,
    F: FnMut(usize, f64) -> V,
{
    let mut heap: BinaryHeap<HeapPanel<V>> = BinaryHeap::with_capacity(base.len() + max_splits);
    let mut frozen: Vec<PanelEstimate<V>> = Vec::new();
    let mut running = fixed.value;
    let mut err_total = fixed.error;

    for p in base {
        debug_assert!(p.b > p.a, "degenerate panel [{}, {}]", p.a, p.b);
        let est = gk15(&mut |x| f(p.kind, x), p.a, p.b);
        running = running.add(est.value);
        err_total += est.error;
        heap.push(HeapPanel {
            kind: p.kind,
            a: p.a,
            b: p.b,
            estimate: est,
        });
    }

    let mut splits = 0;
    loop {
        let target = abs_tol.max(rel_tol * running.magnitude());
        if err_total <= target {
            break;
        }
        if splits >= max_splits {
            return Err(QbmError::Convergence {
                achieved: err_total / running.magnitude().max(f64::MIN_POSITIVE),
                required: rel_tol,
            });
        }
        let Some(worst) = heap.pop() else {
            // Every panel is frozen at round-off width; the estimate cannot
            // be improved further, so report what was achieved.
            return Err(QbmError::Convergence {
                achieved: err_total / running.magnitude().max(f64::MIN_POSITIVE),
                required: rel_tol,
            });
        };
        if !worst.splittable() {
            frozen.push(worst.estimate);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let kind = worst.kind;
        let left = gk15(&mut |x| f(kind, x), worst.a, mid);
        let right = gk15(&mut |x| f(kind, x), mid, worst.b);
        running = running.add(left.value).add(right.value).sub(worst.estimate.value);
        err_total += left.error + right.error - worst.estimate.error;
        heap.push(HeapPanel {
            kind,
            a: worst.a,
            b: mid,
            estimate: left,
        });
        heap.push(HeapPanel {
            kind,
            a: mid,
            b: worst.b,
            estimate: right,
        });
        splits += 1;
    }

    // The running totals accumulate rounding from incremental updates; a
    // final clean pass over the surviving panels removes that drift.
    let mut value = fixed.value;
    let mut abs_error = fixed.error;
    for p in heap.drain().map(|h| h.estimate).chain(frozen) {
        value = value.add(p.value);
        abs_error += p.error;
    }
    Ok(AdaptiveOutcome { value, abs_error })
}

/// Sums an alternating sequence of panel integrals by repeated averaging of
/// partial sums (Euler's transformation in its simplest stable form).
///
/// Returns the accelerated sum and an error estimate taken from the change in
/// the last averaging stage. The input need not alternate perfectly from the
/// first term; leading irregular terms only delay convergence.
pub(crate) fn alternating_sum(terms: &[f64]) -> (f64, f64) {
    assert!(!terms.is_empty());
    let mut row: Vec<f64> = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &t in terms {
        acc += t;
        row.push(acc);
    }
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    let mut estimate = *row.last().unwrap();
    let mut previous;
    let mut spread = f64::INFINITY;
    for len in (1..row.len()).rev() {
        for j in 0..len {
            row[j] = 0.5 * (row[j] + row[j + 1]);
        }
        row.truncate(len);
        previous = estimate;
        estimate = row[len - 1];
        spread = (estimate - previous).abs();
    }
    (estimate, spread + f64::EPSILON * magnitude)
}

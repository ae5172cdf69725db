//! Weyl-sequence probes of the essential spectrum of `-Δ_f`, the integral
//! estimate on `|Δ_f r|` over annuli, and the certificate bundling the
//! hypotheses of the `L^p` spectral-independence theorem.
//!
//! Models are smooth and radial, so the distance function is smooth away
//! from the pole and no mollified replacement of `r` is needed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    asymptotic_nonnegativity_profile, classify_volume_growth, eval_curvature, weighted_volume,
    weighted_volume_to_infinity, GrowthClass,
};
use crate::heat::verify_subexp_integral;
use crate::model::{sphere_area, Boundary, Weight, WeightedModel};
use crate::operator::{extrapolated_eigenvalues, PoleCondition};
use crate::quadrature::{integrate, integrate_with_breaks, QuadOptions};
use crate::report::{fmt_num, BoundReport, Margin, Severity, Split, Table};

/// Largest fitted exponent of `Q ∝ R^p` accepted as decay.
pub const DECAY_EXPONENT: f64 = -0.4;

/// Minimum number of doublings the radius sweep must span.
pub const MIN_DOUBLINGS: f64 = 3.0;

/// `sup |s'|` of the quintic smoothstep `s(x) = 6x⁵ - 15x⁴ + 10x³`.
const STEP_D1: f64 = 1.875;

/// `sup |s''|`, attained at `x = 1/2 ± 1/(2√3)`.
const STEP_D2: f64 = 5.773_502_691_896_258;

/// `sup |χ'| R`: the inner ramp `[R/2, R]` is the steeper one.
pub const CUTOFF_D1: f64 = 2.0 * STEP_D1;

/// `sup |χ''| R²`.
pub const CUTOFF_D2: f64 = 4.0 * STEP_D2;

fn smoothstep(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let x2 = x * x;
    [
        x2 * x * (10.0 + x * (-15.0 + 6.0 * x)),
        30.0 * x2 * (1.0 - x) * (1.0 - x),
        60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
    ]
}

/// Test function `u = c χ(r) e^{i√λ r}` with `χ = 1` on `[R, 2R]`, support
/// `[R/2, 4R]` and quintic ramps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylSequenceSpec {
    pub lambda: f64,
    pub big_r: f64,
    pub amplitude: f64,
}

impl WeylSequenceSpec {
    pub fn new(lambda: f64, big_r: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Weyl target must be a finite λ >= 0, got {lambda}"
            )));
        }
        if !(big_r > 0.0 && big_r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radius must be positive, got {big_r}"
            )));
        }
        Ok(Self {
            lambda,
            big_r,
            amplitude: 1.0,
        })
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn support(&self) -> (f64, f64) {
        (0.5 * self.big_r, 4.0 * self.big_r)
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.big_r, 2.0 * self.big_r)
    }

    /// `[χ, χ', χ'']` at `r`, scaled by the amplitude.
    pub fn cutoff(&self, r: f64) -> [f64; 3] {
        let big_r = self.big_r;
        let c = self.amplitude;
        if r < big_r {
            let w = 0.5 * big_r;
            let [s, s1, s2] = smoothstep((r - w) / w);
            [c * s, c * s1 / w, c * s2 / (w * w)]
        } else if r <= 2.0 * big_r {
            [c, 0.0, 0.0]
        } else {
            let w = 2.0 * big_r;
            let [s, s1, s2] = smoothstep((4.0 * big_r - r) / w);
            [c * s, -c * s1 / w, c * s2 / (w * w)]
        }
    }

    fn breaks(&self) -> [f64; 2] {
        [self.big_r, 2.0 * self.big_r]
    }
}

/// `ln` of the area density `ω_{n-1} φ^{n-1} e^{-f}`, computed without
/// forming the density so that Gaussian weights do not underflow.
fn log_density(model: &WeightedModel, r: f64) -> Result<f64> {
    let f = model.weight.value(r)?;
    let m = model.n as f64 - 1.0;
    let phi = model.warp_jet(r)?.value;
    Ok(sphere_area(model.n - 1).ln() + if m > 0.0 { m * phi.ln() } else { 0.0 } - f)
}

/// Weighted measure on `[a, b]` rescaled by a constant so that its largest
/// sampled value is one; ratios of integrals are unchanged.
struct ScaledMeasure<'a> {
    model: &'a WeightedModel,
    shift: f64,
}

impl<'a> ScaledMeasure<'a> {
    fn new(model: &'a WeightedModel, a: f64, b: f64) -> Result<Self> {
        let mut shift = f64::NEG_INFINITY;
        for i in 0..=256 {
            shift = shift.max(log_density(model, a + (b - a) * i as f64 / 256.0)?);
        }
        Ok(Self { model, shift })
    }

    fn density(&self, r: f64) -> f64 {
        log_density(self.model, r)
            .map(|l| (l - self.shift).exp())
            .unwrap_or(f64::NAN)
    }
}

/// One Weyl quotient with the pieces that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylQuotient {
    pub lambda: f64,
    pub big_r: f64,
    pub quotient: f64,
    /// `‖Re (Δ_f + λ)u‖²` and `‖Im (Δ_f + λ)u‖²` in the rescaled measure.
    pub residual_re: f64,
    pub residual_im: f64,
    pub norm_sq: f64,
    /// A-priori upper bound from the cutoff derivative bounds, `sup |Δ_f r|`
    /// on the support and the ratio of support to plateau volume.
    pub a_priori_bound: f64,
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    }
}

pub fn weyl_quotient(model: &WeightedModel, lambda: f64, big_r: f64) -> Result<WeylQuotient> {
    weyl_quotient_for(model, &WeylSequenceSpec::new(lambda, big_r)?)
}

/// `‖(Δ_f + λ)u‖ / ‖u‖` in `L²(e^{-f} dv)` for `u = χ e^{iκr}`, `κ = √λ`.
/// With `e'' + λe = 0` the residual is `e [χ'' + D χ' + iκ(2χ' + D χ)]`,
/// `D = Δ_f r`; its real and imaginary parts are integrated separately.
pub fn weyl_quotient_for(model: &WeightedModel, seq: &WeylSequenceSpec) -> Result<WeylQuotient> {
    let (a, b) = seq.support();
    if b >= model.radius {
        return Err(Error::InvalidArgument(format!(
            "cutoff support [{a}, {b}] must lie inside the domain (0, {})",
            model.radius
        )));
    }
    let kappa = seq.lambda.sqrt();
    let measure = ScaledMeasure::new(model, a, b)?;
    let parts = |r: f64| -> [f64; 3] {
        let [c0, c1, c2] = seq.cutoff(r);
        let d = model.drift_laplacian_radius(r).unwrap_or(f64::NAN);
        let re = c2 + d * c1;
        let im = kappa * (2.0 * c1 + d * c0);
        let (s, c) = (kappa * r).sin_cos();
        [c0, c * re - s * im, s * re + c * im]
    };
    let opts = quad_opts();
    let breaks = seq.breaks();
    let pass = |k: usize| -> Result<f64> {
        Ok(integrate_with_breaks(
            |r| parts(r)[k].powi(2) * measure.density(r),
            a,
            b,
            &breaks,
            &opts,
        )?
        .value)
    };
    let norm_sq = pass(0)?;
    let residual_re = pass(1)?;
    let residual_im = pass(2)?;
    let quotient = ((residual_re + residual_im) / norm_sq).sqrt();

    let mut d_sup = 0.0f64;
    for i in 0..=512 {
        let r = a + (b - a) * i as f64 / 512.0;
        d_sup = d_sup.max(model.drift_laplacian_radius(r)?.abs());
    }
    let big_r = seq.big_r;
    let vol = |lo: f64, hi: f64| -> Result<f64> {
        Ok(integrate_with_breaks(|r| measure.density(r), lo, hi, &breaks, &opts)?.value)
    };
    let ratio = vol(a, b)? / vol(big_r, 2.0 * big_r)?;
    let re_bound = CUTOFF_D2 / (big_r * big_r) + d_sup * CUTOFF_D1 / big_r;
    let im_bound = kappa * (2.0 * CUTOFF_D1 / big_r + d_sup);
    let a_priori_bound = (re_bound * re_bound + im_bound * im_bound).sqrt() * ratio.sqrt();
    Ok(WeylQuotient {
        lambda: seq.lambda,
        big_r,
        quotient,
        residual_re,
        residual_im,
        norm_sq,
        a_priori_bound,
    })
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Verdict for one target value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub exponent: f64,
    pub monotone: bool,
    /// Every quotient respects its a-priori bound.
    pub within_bound: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialSpectrumReport {
    pub model: String,
    pub q: usize,
    /// Asymptotic nonnegativity of `Ric_f^q`; when false the verdicts are
    /// advisory.
    pub hypothesis: bool,
    pub deficit_tail: f64,
    pub rows: Vec<WeylQuotient>,
    pub verdicts: Vec<LambdaVerdict>,
    /// All targets pass: consistent with `[0, ∞)` in the essential spectrum.
    pub consistent: bool,
    pub decay_exponent: f64,
    pub min_doublings: f64,
}

impl EssentialSpectrumReport {
    pub fn advisory(&self) -> bool {
        !self.hypothesis
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["lambda", "R", "quotient", "a_priori_bound"]);
        for row in &self.rows {
            t.push(vec![
                fmt_num(row.lambda),
                fmt_num(row.big_r),
                fmt_num(row.quotient),
                fmt_num(row.a_priori_bound),
            ]);
        }
        t
    }
}

/// Weyl quotients on the `(λ, R)` grid. A target passes when the quotient
/// decreases at every doubling of the sweep, its fitted exponent in `R` is
/// at most [`DECAY_EXPONENT`], and every quotient respects the a-priori
/// bound. The sweep must span at least [`MIN_DOUBLINGS`] doublings.
pub fn certify_interval(
    model: &WeightedModel,
    q: usize,
    lambdas: &[f64],
    radii: &[f64],
) -> Result<EssentialSpectrumReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "radius sweep must be increasing".into(),
        ));
    }
    let span = (radii[radii.len() - 1] / radii[0]).log2();
    if span < MIN_DOUBLINGS - 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "radius sweep spans {span:.3} doublings, at least {MIN_DOUBLINGS} are needed"
        )));
    }
    let profile = asymptotic_nonnegativity_profile(model, q)?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &lambda in lambdas {
        let qs = radii
            .iter()
            .map(|&r| weyl_quotient(model, lambda, r))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = qs.iter().map(|w| w.quotient).collect();
        let exponent = log_slope(radii, &values);
        let monotone = values.windows(2).all(|w| w[1] < w[0]);
        let within_bound = qs.iter().all(|w| w.quotient <= w.a_priori_bound);
        verdicts.push(LambdaVerdict {
            lambda,
            exponent,
            monotone,
            within_bound,
            pass: monotone && within_bound && exponent <= DECAY_EXPONENT,
        });
        rows.extend(qs);
    }
    let consistent = !verdicts.is_empty() && verdicts.iter().all(|v| v.pass);
    Ok(EssentialSpectrumReport {
        model: model.label(),
        q,
        hypothesis: profile.nonnegative,
        deficit_tail: profile.tail,
        rows,
        verdicts,
        consistent,
        decay_exponent: DECAY_EXPONENT,
        min_doublings: MIN_DOUBLINGS,
    })
}

/// The Ornstein–Uhlenbeck model: `n = 1`, `f = r²/2`.
pub fn ornstein_uhlenbeck(radius: f64) -> Result<WeightedModel> {
    WeightedModel::euclidean(1, Weight::Quadratic { c: 0.5 }, radius, Boundary::Neumann)
}

/// Negative control: `min_R Q_control ≥ separation · max_R Q_reference`.
pub fn verify_negative_control(
    control: &WeightedModel,
    lambda_control: f64,
    reference: &WeightedModel,
    lambda_reference: f64,
    radii: &[f64],
    separation: f64,
) -> Result<BoundReport> {
    let mut rep = BoundReport::new("weyl_negative_control", Severity::Hard, &["R"]);
    let mut low = f64::INFINITY;
    let mut high = 0.0f64;
    for &r in radii {
        let c = weyl_quotient(control, lambda_control, r)?.quotient;
        let p = weyl_quotient(reference, lambda_reference, r)?.quotient;
        rep.constant(&format!("control_Q({r})"), c);
        rep.constant(&format!("reference_Q({r})"), p);
        low = low.min(c);
        high = high.max(p);
    }
    rep.push_le(
        vec![radii[radii.len() - 1]],
        separation * high,
        low,
        Split::Check,
    );
    rep.constant("separation", separation);
    rep.constant("ratio", low / high);
    rep.note(format!("control {} at λ={lambda_control}", control.label()));
    rep.note(format!(
        "reference {} at λ={lambda_reference}",
        reference.label()
    ));
    Ok(rep.finish())
}

/// Lowest `k` eigenvalues of the Ornstein–Uhlenbeck operator, from both
/// parity sectors of the reflected line (even: natural pole, odd: Dirichlet
/// pole), extrapolated from grids with `cells`, `2 cells` and `4 cells`.
pub fn ornstein_uhlenbeck_eigenvalues(radius: f64, cells: usize, k: usize) -> Result<Vec<f64>> {
    let model = ornstein_uhlenbeck(radius)?;
    let half = k.div_ceil(2);
    let even = extrapolated_eigenvalues(&model, PoleCondition::Natural, cells, half)?.extrapolated;
    let odd = extrapolated_eigenvalues(&model, PoleCondition::Dirichlet, cells, half)?.extrapolated;
    let mut all: Vec<f64> = even.into_iter().chain(odd).collect();
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    Ok(all)
}

/// The Ornstein–Uhlenbeck spectrum against the Hermite values `0, 1, 2, …`.
pub fn verify_hermite_spectrum(
    radius: f64,
    cells: usize,
    k: usize,
    tol: f64,
) -> Result<BoundReport> {
    let values = ornstein_uhlenbeck_eigenvalues(radius, cells, k)?;
    let mut rep = BoundReport::new("hermite_spectrum", Severity::Hard, &["k"]);
    for (i, v) in values.iter().enumerate() {
        rep.push_eq(vec![i as f64], *v, i as f64, tol);
    }
    rep.constant("radius", radius);
    rep.constant("cells", cells as f64);
    Ok(rep.finish())
}

/// Smallest radius on a uniform scan of `[start, end]` past which
/// `(Δ_f r)⁺ ≤ bound` everywhere on the scan, or `None`.
fn positive_part_threshold(
    model: &WeightedModel,
    start: f64,
    end: f64,
    bound: f64,
) -> Result<Option<f64>> {
    let steps = 4000;
    let mut threshold = None;
    for i in (0..=steps).rev() {
        let r = start + (end - start) * i as f64 / steps as f64;
        if model.drift_laplacian_radius(r)? > bound {
            break;
        }
        threshold = Some(r);
    }
    Ok(threshold)
}

fn annulus(model: &WeightedModel, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let opts = QuadOptions::with_tolerances(1e-14, 1e-11);
    Ok(integrate_with_breaks(
        |s| {
            g(model.drift_laplacian_radius(s).unwrap_or(f64::NAN))
                * model.area_density(s).unwrap_or(f64::NAN)
        },
        lo,
        hi,
        &[],
        &opts,
    )?
    .value)
}

/// Annulus estimate for `∫ |Δ_f r| e^{-f} dv`, with `A(r)` the weighted
/// sphere area and `p' = (Δ_f r) p`, so `∫ Δ_f r = A(outer) - A(inner)`
/// on every annulus (checked as well).
///
/// Infinite volume: `∫_{B(r₂)∖B(r₁)} |Δ_f r| ≤ ε V_f(r₂+1) + 2`, asserted
/// for `r₂ ≥ K`. With `K₀` the radius past which `(Δ_f r)⁺ ≤ ε/4` and
/// `J = 2∫_{r₁}^{K₀} (Δ_f r)⁺ + A(r₁)`, writing `|D| = 2D⁺ - D` gives
/// `∫|Δ_f r| ≤ J + (ε/2)(V_f(r₂) - V_f(K₀)) - A(r₂)` for `r₂ ≥ K₀`; `K` is
/// the first scanned radius from which that bound stays below the
/// right-hand side.
///
/// Finite volume: `∫_{B(R̄)∖B(r₂)} |Δ_f r| ≤ ε (V_f(R̄) - V_f(r₂)) + 2A(r₂)`
/// for `r₂ ≥ K₀`, the domain standing in for `M`. The boundary term is the
/// weighted area; the unweighted reading is not implemented.
pub fn delta_r_integral_check(
    model: &WeightedModel,
    eps: f64,
    r1: f64,
    r2_list: &[f64],
) -> Result<BoundReport> {
    if !(eps > 0.0) || !(r1 > 0.0) {
        return Err(Error::InvalidArgument("ε and r₁ must be positive".into()));
    }
    if r2_list
        .iter()
        .any(|&r2| !(r2 > r1) || r2 + 1.0 > model.radius)
    {
        return Err(Error::InvalidArgument(format!(
            "every r₂ must satisfy r₁ < r₂ <= R̄ - 1 = {}",
            model.radius - 1.0
        )));
    }
    let k0 = positive_part_threshold(model, r1, model.radius, 0.25 * eps)?.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "Δ_f r exceeds ε/4 = {} at the domain boundary: limsup Δ_f r <= 0 is not met",
            0.25 * eps
        ))
    })?;
    let area = |r: f64| model.area_density(r);
    let finite = weighted_volume_to_infinity(model).is_ok();
    let mut rep = BoundReport::new("delta_r_integral", Severity::Hard, &["r2", "form"]);
    rep.constant("epsilon", eps);
    rep.constant("r1", r1);
    rep.constant("K0", k0);
    if finite {
        for &r2 in r2_list {
            let lhs = annulus(model, r2, model.radius, f64::abs)?;
            // the tail volume directly: V_f(R̄) - V_f(r₂) cancels to noise
            // once the weight has decayed
            let tail = integrate(
                |s| area(s).unwrap_or(f64::NAN),
                r2,
                model.radius,
                &quad_opts(),
            )?
            .value;
            let rhs = eps * tail + 2.0 * area(r2)?;
            push_threshold(&mut rep, r2, lhs, rhs, r2 >= k0);
            let signed = annulus(model, r2, model.radius, |d| d)?;
            identity(&mut rep, r2, signed, area(model.radius)? - area(r2)?);
        }
        rep.constant("threshold", k0);
        rep.note("finite volume: tail over the domain (0, R̄]; boundary term is the weighted area of ∂B(r₂)");
    } else {
        let positive = if k0 > r1 {
            annulus(model, r1, k0, |d| d.max(0.0))?
        } else {
            0.0
        };
        let j = 2.0 * positive + area(r1)?;
        let threshold = sufficient_radius(model, eps, j, k0.max(r1))?;
        rep.constant("V(K0)", weighted_volume(model, k0.max(r1))?.value);
        rep.constant("J", j);
        rep.constant("threshold", threshold.unwrap_or(f64::INFINITY));
        for &r2 in r2_list {
            let lhs = annulus(model, r1, r2, f64::abs)?;
            let rhs = eps * weighted_volume(model, r2 + 1.0)?.value + 2.0;
            push_threshold(&mut rep, r2, lhs, rhs, threshold.is_some_and(|k| r2 >= k));
            let signed = annulus(model, r1, r2, |d| d)?;
            identity(&mut rep, r2, signed, area(r2)? - area(r1)?);
        }
        rep.note("infinite volume; samples below the threshold are not asserted");
    }
    Ok(rep.finish())
}

fn push_threshold(rep: &mut BoundReport, r2: f64, lhs: f64, rhs: f64, asserted: bool) {
    rep.push(Margin {
        coords: vec![r2, 0.0],
        lhs,
        rhs,
        margin: rhs - lhs,
        split: Split::Check,
        inconclusive: !asserted,
    });
}

fn identity(rep: &mut BoundReport, r2: f64, lhs: f64, rhs: f64) {
    let tol = 1e-8 * lhs.abs().max(rhs.abs()).max(1.0);
    rep.push_eq(vec![r2, 1.0], lhs, rhs, tol);
}

fn sufficient_radius(model: &WeightedModel, eps: f64, j: f64, start: f64) -> Result<Option<f64>> {
    let end = model.radius - 1.0;
    if start > end {
        return Ok(None);
    }
    let v_start = weighted_volume(model, start)?.value;
    let steps = 400;
    let mut threshold = None;
    for i in (0..=steps).rev() {
        let r = start + (end - start) * i as f64 / steps as f64;
        let bound =
            j + 0.5 * eps * (weighted_volume(model, r)?.value - v_start) - model.area_density(r)?;
        if bound > eps * weighted_volume(model, r + 1.0)?.value + 2.0 {
            break;
        }
        threshold = Some(r);
    }
    Ok(threshold)
}

/// Hypotheses of the `L^p` spectral-independence theorem at the domain
/// radius. The conclusion is an operator-theoretic statement and is not
/// asserted numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpCertificate {
    pub model: String,
    pub q: usize,
    pub radius: f64,
    /// `(radius, K)` with `Ric_f^q ≥ -K` on `(0, radius]`.
    pub curvature_table: Vec<(f64, f64)>,
    pub curvature_stable: bool,
    pub growth: GrowthClass,
    pub integral_converged: bool,
    /// Finite volume only: `-d/dr ln(V_f(R̄) - V_f(r))` fitted on `[R̄/4, R̄/2]`.
    /// Reported, never gated.
    pub tail_decay_rate: Option<f64>,
    pub beta: f64,
    pub granted: bool,
    pub reasons: Vec<String>,
    pub statement: String,
}

fn tail_decay_rate(model: &WeightedModel) -> Result<f64> {
    let big_r = model.radius;
    let pts: Vec<(f64, f64)> = (0..=8)
        .map(|i| {
            let s = big_r * (0.25 + 0.25 * i as f64 / 8.0);
            let tail = integrate(
                |r| model.area_density(r).unwrap_or(f64::NAN),
                s,
                big_r,
                &quad_opts(),
            )?
            .value;
            Ok((s, tail.ln()))
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx).powi(2))
    });
    Ok(-sxy / sxx)
}

/// `β` used for the integral hypothesis.
pub const CERTIFICATE_BETA: f64 = 1.0;

pub fn lp_hypothesis_certificate(model: &WeightedModel, q: usize) -> Result<LpCertificate> {
    let radius = model.radius;
    let mut curvature_table = Vec::new();
    for frac in [0.25, 0.5, 1.0] {
        let r = radius * frac;
        let radii: Vec<f64> = (1..=4000).map(|i| r * i as f64 / 4000.0).collect();
        curvature_table.push((r, eval_curvature(model, q, &radii)?.k));
    }
    let (k_half, k_full) = (curvature_table[1].1, curvature_table[2].1);
    let curvature_stable = k_full <= k_half + 1e-6 * k_half.max(1.0);

    let r_grid: Vec<f64> = (0..24)
        .map(|i| 0.5 * (2.0 * radius).powf(i as f64 / 23.0))
        .collect();
    let growth = classify_volume_growth(model, &[0.05, 0.1, 0.2, 0.5], &r_grid)?.class;
    let growth_ok = matches!(growth, GrowthClass::Subexponential | GrowthClass::Finite);

    // V_f(x, 1) at |x| = s needs the profiles up to s + 1
    let reach = radius.min(model.warp.extent().min(model.weight.extent()) - 1.0);
    let radii: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|f| f * reach).collect();
    let integral = verify_subexp_integral(model, CERTIFICATE_BETA, &radii, growth_ok)?;
    let integral_converged = integral.passed();

    let tail_decay_rate = match growth {
        GrowthClass::Finite => Some(tail_decay_rate(model)?),
        _ => None,
    };

    let mut reasons = Vec::new();
    if !curvature_stable {
        reasons.push(format!(
            "curvature lower bound grows with the radius: K({}) = {}, K({}) = {}",
            curvature_table[1].0, k_half, curvature_table[2].0, k_full
        ));
    }
    if !growth_ok {
        reasons.push(format!("volume growth classified {growth:?}"));
    }
    if !integral_converged {
        reasons.push(format!(
            "integral with β = {CERTIFICATE_BETA} did not converge"
        ));
    }
    let granted = reasons.is_empty();
    let statement = if granted {
        format!("hypotheses of the L^p theorem verified at radius {radius}; p-independence itself is not asserted numerically")
    } else {
        format!("hypotheses of the L^p theorem not verified at radius {radius}")
    };
    Ok(LpCertificate {
        model: model.label(),
        q,
        radius,
        curvature_table,
        curvature_stable,
        growth,
        integral_converged,
        tail_decay_rate,
        beta: CERTIFICATE_BETA,
        granted,
        reasons,
        statement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_c2_and_respects_bounds() {
        let seq = WeylSequenceSpec::new(0.0, 4.0).unwrap();
        let (a, b) = seq.support();
        let h = 1e-4;
        let mut d1 = 0.0f64;
        let mut d2 = 0.0f64;
        for i in 1..4000 {
            let r = a + (b - a) * i as f64 / 4000.0;
            let [c, c1, c2] = seq.cutoff(r);
            let fd1 = (seq.cutoff(r + h)[0] - seq.cutoff(r - h)[0]) / (2.0 * h);
            let fd2 = (seq.cutoff(r + h)[1] - seq.cutoff(r - h)[1]) / (2.0 * h);
            assert!((0.0..=1.0).contains(&c));
            assert!((fd1 - c1).abs() < 1e-6, "χ' at {r}");
            assert!((fd2 - c2).abs() < 1e-5, "χ'' at {r}");
            d1 = d1.max(c1.abs() * 4.0);
            d2 = d2.max(c2.abs() * 16.0);
        }
        assert!(d1 <= CUTOFF_D1 + 1e-12 && d1 > 0.99 * CUTOFF_D1);
        assert!(d2 <= CUTOFF_D2 + 1e-9 && d2 > 0.99 * CUTOFF_D2);
        assert_eq!(seq.cutoff(1.5 * 4.0), [1.0, 0.0, 0.0]);
        assert_eq!(seq.cutoff(a)[0], 0.0);
    }

    #[test]
    fn support_must_fit() {
        let m = WeightedModel::euclidean(2, Weight::Zero, 40.0, Boundary::Dirichlet).unwrap();
        assert!(weyl_quotient(&m, 1.0, 10.0).is_err());
        assert!(weyl_quotient(&m, 1.0, 9.0).is_ok());
    }
}

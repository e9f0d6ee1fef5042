//! Weighted Bakry-Émery Ricci evaluators for cylinder metrics
//! `dt² + α(t)²ds_a² + β(t)²ds_b²` with measure `e^{-f(t)}`, plus boundary
//! quantities, a grid positivity scan, and an independent finite-difference
//! chart oracle.
//!
//! On the orthonormal frame `(∂t, u/α, v/β)` the weighted tensor is
//!
//! ```text
//! rtt = -a α''/α - b β''/β + f'' - (1/q) f'²
//! ruu = -α''/α + (a-1)(1-α'²)/α² - b α'β'/(αβ) + f' α'/α - 2(β²/α⁴)(A_u,A_u)
//! rvv = -β''/β + (b-1)(1-β'²)/β² - a α'β'/(αβ) + f' β'/β + (β²/α⁴)(Av,Av)
//! ruv = -(β/α³)((δ̌A)u,v)
//! ```
//!
//! with all mixed `∂t` components identically zero. The `A`-tensor scalars are
//! caller-supplied worst-case constants; they vanish for product horizontal
//! distributions.

use crate::profiles::{Profile, ProfileError, Side, JUNCTION_TOL};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("profiles are not order-2 smooth at t = {t}: {source}")]
    NonSmoothPoint {
        t: f64,
        #[source]
        source: ProfileError,
    },
    #[error("metric is singular or indefinite at t = {t} (smallest eigenvalue {eig:e})")]
    SingularMetric { t: f64, eig: f64 },
    #[error("finite-difference step {step} exceeds a tenth of the distance {dist} to the nearest breakpoint")]
    StepTooLarge { step: f64, dist: f64 },
    #[error("profiles do not share a common domain interval")]
    DomainMismatch,
    #[error("warp {name} is not strictly positive at t = {t} (value {value})")]
    NonPositiveWarp {
        name: &'static str,
        t: f64,
        value: f64,
    },
    #[error("breakpoint at t = {t} is only class {class} and cannot be scanned over")]
    RoughJunction { t: f64, class: i8 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

pub type Result<T> = std::result::Result<T, CurvatureError>;

/// The weight-dimension parameter `q ∈ (0, ∞]`. Infinity is a distinct
/// sentinel so `1/q` is exactly zero, never a rounded large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QValue {
    Finite(f64),
    Infinity,
}

impl QValue {
    pub fn inv(self) -> f64 {
        match self {
            QValue::Finite(q) => 1.0 / q,
            QValue::Infinity => 0.0,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, QValue::Finite(_))
    }

    /// A finite stand-in for constructions that need one, mirroring the
    /// convention of replacing `q` by a finite value when `q = ∞`.
    pub fn finite_or(self, fallback: f64) -> f64 {
        match self {
            QValue::Finite(q) => q,
            QValue::Infinity => fallback,
        }
    }
}

impl Serialize for QValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QValue::Finite(q) => s.serialize_f64(*q),
            QValue::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for QValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) if s == "inf" => Ok(QValue::Infinity),
            serde_json::Value::Number(n) => {
                let q = n.as_f64().ok_or_else(|| {
                    serde::de::Error::custom("q must be a finite positive number or \"inf\"")
                })?;
                if q > 0.0 {
                    Ok(QValue::Finite(q))
                } else {
                    Err(serde::de::Error::custom("q must be positive"))
                }
            }
            _ => Err(serde::de::Error::custom("q must be a number or \"inf\"")),
        }
    }
}

/// Worst-case scalar bounds for the submersion A-tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ATensorBounds {
    /// `(A_u, A_u) >= 0`.
    pub au_au: f64,
    /// `(Av, Av) >= 0`.
    pub av_av: f64,
    /// `((δ̌A)u, v)`, may carry either sign.
    pub delta_a: f64,
}

impl ATensorBounds {
    pub const ZERO: ATensorBounds = ATensorBounds {
        au_au: 0.0,
        av_av: 0.0,
        delta_a: 0.0,
    };

    pub fn new(au_au: f64, av_av: f64, delta_a: f64) -> Self {
        assert!(
            au_au >= 0.0 && av_av >= 0.0,
            "A-tensor norms are nonnegative"
        );
        ATensorBounds {
            au_au,
            av_av,
            delta_a,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.au_au == 0.0 && self.av_av == 0.0 && self.delta_a == 0.0
    }
}

/// Weighted Ricci components on the orthonormal frame `(∂t, u/α, v/β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciValues {
    pub rtt: f64,
    pub ruu: f64,
    pub rvv: f64,
    pub ruv: f64,
}

/// A doubly warped weighted metric `dt² + α²ds_a² + β²ds_b²`, `e^{-f}`.
///
/// `a = 0` (or `b = 0`) encodes a singly warped metric: the corresponding
/// sphere factor is absent, its warp is kept at a positive constant and its
/// frame direction is excluded from positivity verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedWarpedSpec {
    pub a: u32,
    pub b: u32,
    pub alpha: Profile,
    pub beta: Profile,
    pub f: Profile,
    pub q: QValue,
}

impl<'de> Deserialize<'de> for WeightedWarpedSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a: u32,
            b: u32,
            alpha: Profile,
            beta: Profile,
            f: Profile,
            q: QValue,
        }
        let r = Raw::deserialize(d)?;
        WeightedWarpedSpec::new(r.a, r.b, r.alpha, r.beta, r.f, r.q)
            .map_err(serde::de::Error::custom)
    }
}

impl WeightedWarpedSpec {
    pub fn new(
        a: u32,
        b: u32,
        alpha: Profile,
        beta: Profile,
        f: Profile,
        q: QValue,
    ) -> Result<Self> {
        let d = alpha.domain();
        for p in [&beta, &f] {
            let e = p.domain();
            if (d.0 - e.0).abs() > JUNCTION_TOL || (d.1 - e.1).abs() > JUNCTION_TOL {
                return Err(CurvatureError::DomainMismatch);
            }
        }
        let spec = WeightedWarpedSpec {
            a,
            b,
            alpha,
            beta,
            f,
            q,
        };
        spec.check_positive_warps()?;
        Ok(spec)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.alpha.domain()
    }

    /// Sampled positivity check of both warps (grid plus junction values).
    /// Strict positivity on the closed domain is an invariant the
    /// constructions maintain; this check catches gross violations.
    fn check_positive_warps(&self) -> Result<()> {
        let (lo, hi) = self.domain();
        let n = 512;
        for (name, p) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            for i in 0..=n {
                let t = lo + (hi - lo) * i as f64 / n as f64;
                let v = p.eval_right(t, 0).or_else(|_| p.eval_left(t, 0))?;
                if v <= 0.0 {
                    return Err(CurvatureError::NonPositiveWarp { name, t, value: v });
                }
            }
        }
        Ok(())
    }

    /// Union of the breakpoints of α, β and f, deduplicated within tolerance.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .alpha
            .breakpoints()
            .iter()
            .chain(self.beta.breakpoints())
            .chain(self.f.breakpoints())
            .copied()
            .collect();
        bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        bps.dedup_by(|x, y| (*x - *y).abs() <= JUNCTION_TOL);
        bps
    }

    fn eval3(&self, p: &Profile, t: f64, side: Side) -> Result<(f64, f64, f64)> {
        let wrap = |e: ProfileError| CurvatureError::NonSmoothPoint { t, source: e };
        Ok((
            p.eval_sided(t, 0, side).map_err(wrap)?,
            p.eval_sided(t, 1, side).map_err(wrap)?,
            p.eval_sided(t, 2, side).map_err(wrap)?,
        ))
    }
}

/// Vanishing A-tensor closed-form evaluator.
pub fn weighted_ricci_doubly_warped(spec: &WeightedWarpedSpec, t: f64) -> Result<RicciValues> {
    weighted_ricci_submersion_sided(spec, t, &ATensorBounds::ZERO, Side::Auto)
}

pub fn weighted_ricci_doubly_warped_sided(
    spec: &WeightedWarpedSpec,
    t: f64,
    side: Side,
) -> Result<RicciValues> {
    weighted_ricci_submersion_sided(spec, t, &ATensorBounds::ZERO, side)
}

/// Submersion evaluator with caller-supplied A-tensor scalar bounds. With all
/// bounds zero this takes exactly the same floating-point path as the doubly
/// warped evaluator.
pub fn weighted_ricci_submersion(
    spec: &WeightedWarpedSpec,
    t: f64,
    a_tensor: &ATensorBounds,
) -> Result<RicciValues> {
    weighted_ricci_submersion_sided(spec, t, a_tensor, Side::Auto)
}

pub fn weighted_ricci_submersion_sided(
    spec: &WeightedWarpedSpec,
    t: f64,
    at: &ATensorBounds,
    side: Side,
) -> Result<RicciValues> {
    let (a, b) = (spec.a as f64, spec.b as f64);
    let (al, al1, al2) = spec.eval3(&spec.alpha, t, side)?;
    let (be, be1, be2) = spec.eval3(&spec.beta, t, side)?;
    let (_, f1, f2) = spec.eval3(&spec.f, t, side)?;
    let qinv = spec.q.inv();

    let rtt = -a * al2 / al - b * be2 / be + f2 - qinv * f1 * f1;
    let mut ruu = -al2 / al + (a - 1.0) * (1.0 - al1 * al1) / (al * al)
        - b * al1 * be1 / (al * be)
        + f1 * al1 / al;
    let mut rvv = -be2 / be + (b - 1.0) * (1.0 - be1 * be1) / (be * be)
        - a * al1 * be1 / (al * be)
        + f1 * be1 / be;
    let mut ruv = 0.0;
    if !at.is_zero() {
        let s = be * be / (al * al * al * al);
        ruu -= 2.0 * s * at.au_au;
        rvv += s * at.av_av;
        ruv = -(be / (al * al * al)) * at.delta_a;
    }
    Ok(RicciValues { rtt, ruu, rvv, ruv })
}

/// Second fundamental form and (weighted) mean curvature of the slice at `t`,
/// with respect to the outward direction `±∂t`.
///
/// Returns `(ii_u, ii_v, h, h_f)` where `h = a·ii_u + b·ii_v` and
/// `h_f = h - ν(f)`.
pub fn boundary_quantities(
    spec: &WeightedWarpedSpec,
    t: f64,
    side: Side,
    outward_positive_t: bool,
) -> Result<(f64, f64, f64, f64)> {
    let sign = if outward_positive_t { 1.0 } else { -1.0 };
    let wrap = |e: ProfileError| CurvatureError::NonSmoothPoint { t, source: e };
    let al = spec.alpha.eval_sided(t, 0, side).map_err(wrap)?;
    let al1 = spec.alpha.eval_sided(t, 1, side).map_err(wrap)?;
    let be = spec.beta.eval_sided(t, 0, side).map_err(wrap)?;
    let be1 = spec.beta.eval_sided(t, 1, side).map_err(wrap)?;
    let f1 = spec.f.eval_sided(t, 1, side).map_err(wrap)?;
    let ii_u = sign * al1 / al;
    let ii_v = sign * be1 / be;
    let h = spec.a as f64 * ii_u + spec.b as f64 * ii_v;
    let hf = h - sign * f1;
    Ok((ii_u, ii_v, h, hf))
}

/// One scanned sample of a report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReportSample {
    pub t: f64,
    pub rtt: f64,
    pub ruu: f64,
    pub rvv: f64,
    pub ruv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of a positivity scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub criterion: String,
    pub min_margin: f64,
    pub verdict: Verdict,
    pub samples: Vec<ReportSample>,
}

impl CurvatureReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rtt,ruu,rvv,ruv\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.t, s.rtt, s.ruu, s.rvv, s.ruv
            ));
        }
        out
    }
}

/// Per-point positivity margin. Directions of absent factors (`a = 0` or
/// `b = 0`) are excluded; the 2x2 determinant joins only when `ruv != 0`.
fn point_margin(spec: &WeightedWarpedSpec, r: &RicciValues) -> f64 {
    let mut m = r.rtt;
    if spec.a >= 1 {
        m = m.min(r.ruu);
    }
    if spec.b >= 1 {
        m = m.min(r.rvv);
    }
    if r.ruv != 0.0 && spec.a >= 1 && spec.b >= 1 {
        m = m.min(r.ruu * r.rvv - r.ruv * r.ruv);
    }
    m
}

/// Scans the whole domain; see [`positivity_scan_range`].
pub fn positivity_scan(
    spec: &WeightedWarpedSpec,
    at: &ATensorBounds,
    grid_step: f64,
) -> Result<CurvatureReport> {
    let (lo, hi) = spec.domain();
    positivity_scan_range(spec, at, grid_step, lo, hi)
}

/// Samples every grid point of `[lo, hi]` plus both one-sided limits at every
/// breakpoint. A junction that is not at least C¹ is reported as an error
/// rather than silently scanned over. The margin at each point is
/// `min(rtt, ruu, rvv)` when `ruv = 0` and additionally `ruu·rvv - ruv²`
/// otherwise; the verdict passes iff the infimum over samples is positive.
pub fn positivity_scan_range(
    spec: &WeightedWarpedSpec,
    at: &ATensorBounds,
    grid_step: f64,
    lo: f64,
    hi: f64,
) -> Result<CurvatureReport> {
    assert!(grid_step > 0.0, "grid step must be positive");
    let bps: Vec<f64> = spec
        .breakpoints()
        .into_iter()
        .filter(|&b| b > lo + JUNCTION_TOL && b < hi - JUNCTION_TOL)
        .collect();
    for &b in &bps {
        let class = junction_class(spec, b);
        if class < 1 {
            return Err(CurvatureError::RoughJunction { t: b, class });
        }
    }

    let n = ((hi - lo) / grid_step).ceil() as usize;
    let mut jobs: Vec<(f64, Side)> = Vec::with_capacity(n + 2 * bps.len() + 1);
    for i in 0..=n {
        let t = (lo + i as f64 * grid_step).min(hi);
        let side = if i == 0 {
            Side::Right
        } else if t >= hi {
            Side::Left
        } else {
            Side::Auto
        };
        jobs.push((t, side));
    }
    for &b in &bps {
        jobs.push((b, Side::Left));
        jobs.push((b, Side::Right));
    }
    jobs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let samples: Vec<(ReportSample, f64)> = jobs
        .par_iter()
        .map(|&(t, side)| {
            let side = disambiguate(spec, t, side);
            let r = weighted_ricci_submersion_sided(spec, t, at, side)?;
            let margin = point_margin(spec, &r);
            Ok((
                ReportSample {
                    t,
                    rtt: r.rtt,
                    ruu: r.ruu,
                    rvv: r.rvv,
                    ruv: r.ruv,
                },
                margin,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let min_margin = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(CurvatureReport {
        criterion: if at.delta_a != 0.0 {
            "diagonal+determinant".to_string()
        } else {
            "diagonal".to_string()
        },
        min_margin,
        verdict: if min_margin > 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        samples: samples.into_iter().map(|s| s.0).collect(),
    })
}

/// If a nominally-interior grid point lands exactly on a breakpoint, fall
/// back to its right-hand limit so the scan cannot abort on a coincidental
/// hit; breakpoints themselves are sampled one-sided anyway.
fn disambiguate(spec: &WeightedWarpedSpec, t: f64, side: Side) -> Side {
    if side != Side::Auto {
        return side;
    }
    if spec.breakpoints().iter().any(|&b| b == t) {
        Side::Right
    } else {
        Side::Auto
    }
}

fn junction_class(spec: &WeightedWarpedSpec, b: f64) -> i8 {
    let mut class = 2i8;
    for p in [&spec.alpha, &spec.beta, &spec.f] {
        for (bp, c) in p.breakpoints().iter().zip(p.continuity()) {
            if (bp - b).abs() <= JUNCTION_TOL {
                let k = match c {
                    crate::profiles::Continuity::Jump => -1,
                    crate::profiles::Continuity::C0 => 0,
                    crate::profiles::Continuity::C1 => 1,
                    crate::profiles::Continuity::C2 => 2,
                };
                class = class.min(k);
            }
        }
    }
    class
}

// ---------------------------------------------------------------------------
// Triple warped metrics
// ---------------------------------------------------------------------------

/// A bivariate closed form `(t, s) -> value`, with partials up to total
/// order 2.
#[derive(Debug, Clone)]
pub enum Surface {
    /// `ft(t) * fs(s)`.
    Product { ft: Profile, fs: Profile },
    /// `chi(s/delta) * top(t) + (1 - chi(s/delta)) * base(t)`, with `chi`
    /// evaluated clamped to its domain (it is constant near both ends).
    Blend {
        chi: Profile,
        delta: f64,
        top: Profile,
        base: Profile,
    },
}

impl Surface {
    /// Partial derivative `∂_t^{dt} ∂_s^{ds}` with `dt + ds <= 2`.
    pub fn eval(&self, t: f64, s: f64, dt: u8, ds: u8) -> Result<f64> {
        debug_assert!(dt + ds <= 2);
        match self {
            Surface::Product { ft, fs } => Ok(ft.eval(t, dt)? * fs.eval(s, ds)?),
            Surface::Blend {
                chi,
                delta,
                top,
                base,
            } => {
                let (clo, chi_hi) = chi.domain();
                let u = (s / delta).clamp(clo, chi_hi);
                Ok(match ds {
                    0 => {
                        let c = chi.eval(u, 0)?;
                        c * top.eval(t, dt)? + (1.0 - c) * base.eval(t, dt)?
                    }
                    1 => {
                        chi.eval(u, 1)? / delta * (top.eval(t, dt)? - base.eval(t, dt)?)
                    }
                    _ => {
                        chi.eval(u, 2)? / (delta * delta)
                            * (top.eval(t, 0)? - base.eval(t, 0)?)
                    }
                })
            }
        }
    }
}

/// The Ricci components of `dt² + γ(t)²ds² + α(t,s)²ds_a² + β(t,s)²ds_b²`
/// on the orthonormal frame `(∂t, ∂s/γ, u/α, v/β)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleRicci {
    pub rtt: f64,
    pub rts: f64,
    pub rss: f64,
    pub ruu: f64,
    pub rvv: f64,
    /// All remaining mixed components vanish for this metric family.
    pub zeros: f64,
}

/// Closed-form evaluator for the triply warped family. `b = 0` is allowed
/// (absent second sphere factor); `rvv` is then vacuous.
pub fn ricci_triple_warped(
    alpha: &Surface,
    beta: &Surface,
    gamma: &Profile,
    t: f64,
    s: f64,
    a: u32,
    b: u32,
) -> Result<TripleRicci> {
    let (a, b) = (a as f64, b as f64);
    let al = alpha.eval(t, s, 0, 0)?;
    let al_t = alpha.eval(t, s, 1, 0)?;
    let al_s = alpha.eval(t, s, 0, 1)?;
    let al_tt = alpha.eval(t, s, 2, 0)?;
    let al_ts = alpha.eval(t, s, 1, 1)?;
    let al_ss = alpha.eval(t, s, 0, 2)?;
    let be = beta.eval(t, s, 0, 0)?;
    let be_t = beta.eval(t, s, 1, 0)?;
    let be_s = beta.eval(t, s, 0, 1)?;
    let be_tt = beta.eval(t, s, 2, 0)?;
    let be_ts = beta.eval(t, s, 1, 1)?;
    let be_ss = beta.eval(t, s, 0, 2)?;
    let ga = gamma.eval(t, 0)?;
    let ga1 = gamma.eval(t, 1)?;
    let ga2 = gamma.eval(t, 2)?;

    let rtt = -a * al_tt / al - b * be_tt / be - ga2 / ga;
    let rts = (1.0 / ga)
        * (-a * al_ts / al - b * be_ts / be
            + a * al_s * ga1 / (al * ga)
            + b * be_s * ga1 / (be * ga));
    let rss = (1.0 / (ga * ga)) * (-a * al_ss / al - b * be_ss / be)
        - ga2 / ga
        - a * al_t * ga1 / (al * ga)
        - b * be_t * ga1 / (be * ga);
    let ruu = (1.0 / (ga * ga))
        * (-al_ss / al - (a - 1.0) * al_s * al_s / (al * al) - b * al_s * be_s / (al * be))
        - al_tt / al
        + (a - 1.0) * (1.0 - al_t * al_t) / (al * al)
        - b * al_t * be_t / (al * be)
        - al_t * ga1 / (al * ga);
    let rvv = (1.0 / (ga * ga))
        * (-be_ss / be - (b - 1.0) * be_s * be_s / (be * be) - a * al_s * be_s / (al * be))
        - be_tt / be
        + (b - 1.0) * (1.0 - be_t * be_t) / (be * be)
        - a * al_t * be_t / (al * be)
        - be_t * ga1 / (be * ga);

    Ok(TripleRicci {
        rtt,
        rts,
        rss,
        ruu,
        rvv,
        zeros: 0.0,
    })
}

// ---------------------------------------------------------------------------
// General cylinder evaluator (verification backend)
// ---------------------------------------------------------------------------

/// Assembles the weighted Ricci form of `dt² + g_t` on a fixed
/// `(n-1)`-dimensional frame, for a frame-constant family `g_t` (the metric
/// components vary with `t` only, so the mixed `∂t`-row vanishes).
///
/// `g_t` derivatives are taken by central differences with the supplied step;
/// `fiber_ricci(t)` must be the Ricci form of the slice `(X, g_t)` on the same
/// frame. Returns the `n×n` bilinear-form matrix on `(∂t, frame)`.
pub fn cylinder_ricci_general(
    gt: &dyn Fn(f64) -> DMatrix<f64>,
    fiber_ricci: &dyn Fn(f64) -> DMatrix<f64>,
    f: &dyn Fn(f64) -> f64,
    q: QValue,
    t: f64,
    step: f64,
) -> Result<DMatrix<f64>> {
    let g = gt(t);
    let dim = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let min_eig = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-10 {
        return Err(CurvatureError::SingularMetric { t, eig: min_eig });
    }
    let h = step;
    let gp = (gt(t + h) - gt(t - h)) / (2.0 * h);
    let gpp = (gt(t + h) - 2.0 * g.clone() + gt(t - h)) / (h * h);
    let ginv = g.clone().try_inverse().expect("positive definite");

    let tr = |m: &DMatrix<f64>| (&ginv * m).trace();
    let rtt = -0.5 * tr(&gpp) + 0.25 * (&ginv * &gp * &ginv * &gp).trace();
    // Tangential block: Ric^{g_t} - g''/2 + (g' g^{-1} g')/2 - g' tr_g(g')/4.
    let block = fiber_ricci(t) - 0.5 * &gpp + 0.5 * (&gp * &ginv * &gp) - 0.25 * &gp * tr(&gp);

    let f1 = (f(t + h) - f(t - h)) / (2.0 * h);
    let f2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    let qinv = q.inv();

    let mut out = DMatrix::<f64>::zeros(dim + 1, dim + 1);
    out[(0, 0)] = rtt + f2 - qinv * f1 * f1;
    for i in 0..dim {
        for j in 0..dim {
            // Hess(f)(u,v) = f' g'(u,v)/2 for a weight depending on t only.
            out[(i + 1, j + 1)] = block[(i, j)] + 0.5 * f1 * gp[(i, j)];
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Finite-difference chart oracle
// ---------------------------------------------------------------------------

/// Default chart step of the oracle.
pub const ORACLE_STEP: f64 = 1e-3;

/// Independent verification oracle: builds the explicit chart
/// `(t, x ∈ R^a, y ∈ R^b)` with stereographic round factors
/// `4(1+|x|²)^{-2}δ` scaled by `α(t)²`, `β(t)²`, computes Christoffel symbols
/// and the Ricci tensor by second-order central differences of the metric
/// components only (no analytic derivative path is shared with the closed
/// forms), adds `Hess f - (1/q) df⊗df` via the same Christoffels, and
/// converts to the orthonormal frame at the chart center.
pub fn finite_difference_oracle(spec: &WeightedWarpedSpec, t: f64) -> Result<RicciValues> {
    finite_difference_oracle_with_step(spec, t, ORACLE_STEP)
}

pub fn finite_difference_oracle_with_step(
    spec: &WeightedWarpedSpec,
    t: f64,
    step: f64,
) -> Result<RicciValues> {
    let dist = spec
        .alpha
        .nearest_junction_distance(t)
        .min(spec.beta.nearest_junction_distance(t))
        .min(spec.f.nearest_junction_distance(t));
    if step > dist / 10.0 {
        return Err(CurvatureError::StepTooLarge { step, dist });
    }
    let a = spec.a as usize;
    let b = spec.b as usize;
    let n = 1 + a + b;
    let alpha = &spec.alpha;
    let beta = &spec.beta;

    // Metric components in the chart; z[0] = t, z[1..=a] = x, z[a+1..] = y.
    let metric = move |z: &[f64]| -> DMatrix<f64> {
        let mut g = DMatrix::<f64>::zeros(n, n);
        g[(0, 0)] = 1.0;
        let al = alpha.eval(z[0], 0).expect("chart stays inside the domain");
        let be = beta.eval(z[0], 0).expect("chart stays inside the domain");
        let x2: f64 = z[1..=a].iter().map(|v| v * v).sum();
        let y2: f64 = z[a + 1..].iter().map(|v| v * v).sum();
        let sa = 4.0 / ((1.0 + x2) * (1.0 + x2));
        let sb = 4.0 / ((1.0 + y2) * (1.0 + y2));
        for i in 0..a {
            g[(1 + i, 1 + i)] = al * al * sa;
        }
        for i in 0..b {
            g[(1 + a + i, 1 + a + i)] = be * be * sb;
        }
        g
    };

    let h = step;
    let christoffel = |z: &[f64]| -> Vec<DMatrix<f64>> {
        let g0 = metric(z);
        let ginv = g0.try_inverse().expect("chart metric invertible");
        let mut dg = Vec::with_capacity(n);
        for d in 0..n {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[d] += h;
            zm[d] -= h;
            dg.push((metric(&zp) - metric(&zm)) / (2.0 * h));
        }
        let mut gamma = vec![DMatrix::<f64>::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        sum += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    gamma[k][(i, j)] = 0.5 * sum;
                }
            }
        }
        gamma
    };

    let mut z0 = vec![0.0; n];
    z0[0] = t;
    let gamma0 = christoffel(&z0);
    let mut dgamma = Vec::with_capacity(n);
    for d in 0..n {
        let mut zp = z0.clone();
        let mut zm = z0.clone();
        zp[d] += h;
        zm[d] -= h;
        let gp = christoffel(&zp);
        let gm = christoffel(&zm);
        dgamma.push(
            gp.into_iter()
                .zip(gm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }

    // Ric_ij = ∂_k Γ^k_ij - ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij - Γ^k_jl Γ^l_ik.
    let mut ric = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for k in 0..n {
                v += dgamma[k][k][(i, j)] - dgamma[j][k][(i, k)];
                for l in 0..n {
                    v += gamma0[k][(k, l)] * gamma0[l][(i, j)]
                        - gamma0[k][(j, l)] * gamma0[l][(i, k)];
                }
            }
            ric[(i, j)] = v;
        }
    }

    // Weight terms from value queries only.
    let fval = |tt: f64| spec.f.eval(tt, 0).expect("chart stays inside the domain");
    let f1 = (fval(t + h) - fval(t - h)) / (2.0 * h);
    let f2 = (fval(t + h) - 2.0 * fval(t) + fval(t - h)) / (h * h);
    let qinv = spec.q.inv();
    for i in 0..n {
        for j in 0..n {
            let hess = if i == 0 && j == 0 { f2 } else { 0.0 } - gamma0[0][(i, j)] * f1;
            let df2 = if i == 0 && j == 0 { f1 * f1 } else { 0.0 };
            ric[(i, j)] += hess - qinv * df2;
        }
    }

    let al = alpha.eval(t, 0)?;
    let be = beta.eval(t, 0)?;
    let gx = 4.0 * al * al;
    let gy = 4.0 * be * be;
    let rtt = ric[(0, 0)];
    let ruu = if a > 0 { ric[(1, 1)] / gx } else { f64::NAN };
    let rvv = if b > 0 {
        ric[(1 + a, 1 + a)] / gy
    } else {
        f64::NAN
    };
    let ruv = if a > 0 && b > 0 {
        ric[(1, 1 + a)] / (gx * gy).sqrt()
    } else {
        0.0
    };
    Ok(RicciValues { rtt, ruu, rvv, ruv })
}

//! Piecewise-smooth scalar functions of one variable with exact value and
//! derivative queries up to order 2.
//!
//! Closed-form piece kinds report derivatives analytically; [`PieceKind::Sampled`]
//! pieces interpolate with a natural cubic spline and flag themselves as inexact.
//! Junction regularity is measured from one-sided limits, never asserted.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Absolute tolerance for junction agreement and domain arithmetic.
pub const JUNCTION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("t = {t} is outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("one-sided order-{order} limits at breakpoint t = {t} differ by {gap:e}")]
    AmbiguousAtBreakpoint { t: f64, order: u8, gap: f64 },
    #[error("piece domains do not abut: gap of {gap:e} at t = {t}")]
    DomainMismatch { t: f64, gap: f64 },
    #[error("piece domain is empty or reversed: [{lo}, {hi}]")]
    EmptyPiece { lo: f64, hi: f64 },
    #[error("rescale factor must be positive, got {0}")]
    BadRescale(f64),
    #[error("logarithm of a non-positive inner profile value {value} at t = {t}")]
    LogOfNonPositive { t: f64, value: f64 },
    #[error("sampled piece needs at least two strictly increasing knots")]
    BadSample,
    #[error("profile needs at least one piece")]
    Empty,
}

pub type Result<T> = std::result::Result<T, ProfileError>;

/// Evaluation side at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Demand agreement of both one-sided limits (within [`JUNCTION_TOL`]).
    Auto,
    Left,
    Right,
}

/// Measured regularity at a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Continuity {
    /// One-sided values differ: the profile jumps.
    Jump,
    C0,
    C1,
    C2,
}

impl Continuity {
    pub fn at_least(self, order: u8) -> bool {
        match self {
            Continuity::Jump => false,
            Continuity::C0 => order == 0,
            Continuity::C1 => order <= 1,
            Continuity::C2 => order <= 2,
        }
    }
}

/// One smooth piece on a closed interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub kind: PieceKind,
}

/// Closed-form (or sampled) formulas a piece can carry.
///
/// All closed-form kinds are stable under `t -> mu * p(t / mu)` rescaling and
/// under translation, which the constructions rely on.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum PieceKind {
    Constant {
        value: f64,
    },
    /// `intercept + slope * t` in global coordinates.
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// `offset + amplitude * cos(frequency * t + phase)`.
    TrigCos {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `offset + amplitude * sin(frequency * t + phase)`.
    TrigSin {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `c1 * cosh((t - center)/scale) + c2 * sinh((t - center)/scale)`.
    HyperbolicMix {
        c1: f64,
        c2: f64,
        scale: f64,
        center: f64,
    },
    /// `sum_k coeffs[k] * (t - center)^k`; covers the cubic spline windows
    /// (degree 3) and the quintic blends (degree 5).
    Polynomial {
        coeffs: Vec<f64>,
        center: f64,
    },
    /// `factor * ln(inner(t)) + offset`, exact when the inner profile is.
    LogOfProfile {
        inner: Box<Profile>,
        factor: f64,
        offset: f64,
    },
    /// Natural cubic spline through `(knots, values)`; derivative queries come
    /// from the interpolant and are flagged inexact.
    Sampled {
        knots: Vec<f64>,
        values: Vec<f64>,
        #[serde(skip)]
        second_derivs: OnceLock<Vec<f64>>,
    },
}

impl PieceKind {
    /// Whether derivative queries are analytic rather than interpolated.
    pub fn is_exact(&self) -> bool {
        match self {
            PieceKind::Sampled { .. } => false,
            PieceKind::LogOfProfile { inner, .. } => inner.is_exact(),
            _ => true,
        }
    }

    fn eval(&self, t: f64, order: u8, side: Side) -> Result<f64> {
        debug_assert!(order <= 2);
        Ok(match self {
            PieceKind::Constant { value } => match order {
                0 => *value,
                _ => 0.0,
            },
            PieceKind::Linear { intercept, slope } => match order {
                0 => intercept + slope * t,
                1 => *slope,
                _ => 0.0,
            },
            PieceKind::TrigCos {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let u = frequency * t + phase;
                match order {
                    0 => offset + amplitude * u.cos(),
                    1 => -amplitude * frequency * u.sin(),
                    _ => -amplitude * frequency * frequency * u.cos(),
                }
            }
            PieceKind::TrigSin {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let u = frequency * t + phase;
                match order {
                    0 => offset + amplitude * u.sin(),
                    1 => amplitude * frequency * u.cos(),
                    _ => -amplitude * frequency * frequency * u.sin(),
                }
            }
            PieceKind::HyperbolicMix {
                c1,
                c2,
                scale,
                center,
            } => {
                let u = (t - center) / scale;
                match order {
                    0 => c1 * u.cosh() + c2 * u.sinh(),
                    1 => (c1 * u.sinh() + c2 * u.cosh()) / scale,
                    _ => (c1 * u.cosh() + c2 * u.sinh()) / (scale * scale),
                }
            }
            PieceKind::Polynomial { coeffs, center } => {
                let u = t - center;
                match order {
                    0 => coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c),
                    1 => coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c),
                    _ => coeffs
                        .iter()
                        .enumerate()
                        .skip(2)
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * u + (k * (k - 1)) as f64 * c),
                }
            }
            PieceKind::LogOfProfile {
                inner,
                factor,
                offset,
            } => {
                let g = inner.eval_sided(t, 0, side)?;
                if g <= 0.0 {
                    return Err(ProfileError::LogOfNonPositive { t, value: g });
                }
                match order {
                    0 => factor * g.ln() + offset,
                    1 => {
                        let g1 = inner.eval_sided(t, 1, side)?;
                        factor * g1 / g
                    }
                    _ => {
                        let g1 = inner.eval_sided(t, 1, side)?;
                        let g2 = inner.eval_sided(t, 2, side)?;
                        factor * (g2 * g - g1 * g1) / (g * g)
                    }
                }
            }
            PieceKind::Sampled {
                knots,
                values,
                second_derivs,
            } => {
                let m = second_derivs.get_or_init(|| natural_spline_moments(knots, values));
                spline_eval(knots, values, m, t, order)
            }
        })
    }
}

/// Solves the natural cubic spline tridiagonal system for the knot second
/// derivatives (moments), with zero moments at both ends.
fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior rows.
    let rows = n - 2;
    let mut diag = vec![0.0; rows];
    let mut upper = vec![0.0; rows];
    let mut rhs = vec![0.0; rows];
    for i in 0..rows {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0;
    }
    for i in 1..rows {
        let h0 = x[i + 1] - x[i];
        let w = (h0 / 6.0) / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[rows] = rhs[rows - 1] / diag[rows - 1];
    for i in (0..rows - 1).rev() {
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    m
}

fn spline_eval(x: &[f64], y: &[f64], m: &[f64], t: f64, order: u8) -> f64 {
    let n = x.len();
    // Clamp to the knot span; the piece domain may be narrower than the data.
    let i = match x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let h = x[i + 1] - x[i];
    let a = (x[i + 1] - t) / h;
    let b = (t - x[i]) / h;
    match order {
        0 => {
            a * y[i]
                + b * y[i + 1]
                + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
        }
        1 => {
            (y[i + 1] - y[i]) / h - (3.0 * a * a - 1.0) * h * m[i] / 6.0
                + (3.0 * b * b - 1.0) * h * m[i + 1] / 6.0
        }
        _ => a * m[i] + b * m[i + 1],
    }
}

/// A piecewise function whose pieces abut exactly at strictly increasing
/// breakpoints. Immutable after construction; junction regularity is
/// recomputed whenever pieces change.
#[derive(Debug, Clone, Serialize)]
#[serde(into = "ProfileDoc")]
pub struct Profile {
    pieces: Vec<Piece>,
    breakpoints: Vec<f64>,
    continuity: Vec<Continuity>,
}

/// Serialized form: `{version: 1, pieces: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileDoc {
    version: u32,
    pieces: Vec<Piece>,
}

impl From<Profile> for ProfileDoc {
    fn from(p: Profile) -> Self {
        ProfileDoc {
            version: 1,
            pieces: p.pieces,
        }
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ProfileDoc::deserialize(d)?;
        if doc.version != 1 {
            return Err(serde::de::Error::custom(format!(
                "unsupported profile document version {}",
                doc.version
            )));
        }
        Profile::new(doc.pieces).map_err(serde::de::Error::custom)
    }
}

impl Profile {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(ProfileError::Empty);
        }
        for p in &pieces {
            if !(p.lo < p.hi) {
                return Err(ProfileError::EmptyPiece { lo: p.lo, hi: p.hi });
            }
        }
        // Snap abutting domains so breakpoints are shared exactly.
        for i in 1..pieces.len() {
            let gap = pieces[i].lo - pieces[i - 1].hi;
            if gap.abs() > JUNCTION_TOL {
                return Err(ProfileError::DomainMismatch {
                    t: pieces[i].lo,
                    gap,
                });
            }
            pieces[i].lo = pieces[i - 1].hi;
        }
        let breakpoints: Vec<f64> = pieces[..pieces.len() - 1].iter().map(|p| p.hi).collect();
        let mut profile = Profile {
            pieces,
            breakpoints,
            continuity: Vec::new(),
        };
        profile.continuity = profile.measure_continuity()?;
        Ok(profile)
    }

    /// Convenience: a single-piece profile.
    pub fn single(kind: PieceKind, lo: f64, hi: f64) -> Result<Self> {
        Profile::new(vec![Piece { lo, hi, kind }])
    }

    pub fn constant(value: f64, lo: f64, hi: f64) -> Self {
        Profile::single(PieceKind::Constant { value }, lo, hi).expect("valid domain")
    }

    /// `amplitude*cos(freq*t + phase)` with zero offset.
    pub fn cosine(lo: f64, hi: f64) -> Self {
        Profile::single(
            PieceKind::TrigCos {
                amplitude: 1.0,
                frequency: 1.0,
                phase: 0.0,
                offset: 0.0,
            },
            lo,
            hi,
        )
        .expect("valid domain")
    }

    pub fn sine(lo: f64, hi: f64) -> Self {
        Profile::single(
            PieceKind::TrigSin {
                amplitude: 1.0,
                frequency: 1.0,
                phase: 0.0,
                offset: 0.0,
            },
            lo,
            hi,
        )
        .expect("valid domain")
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints, strictly increasing.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Measured junction regularity, one entry per breakpoint.
    pub fn continuity(&self) -> &[Continuity] {
        &self.continuity
    }

    pub fn is_exact(&self) -> bool {
        self.pieces.iter().all(|p| p.kind.is_exact())
    }

    fn measure_continuity(&self) -> Result<Vec<Continuity>> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        for (i, &b) in self.breakpoints.iter().enumerate() {
            let left = |order| self.pieces[i].kind.eval(b, order, Side::Left);
            let right = |order| self.pieces[i + 1].kind.eval(b, order, Side::Right);
            let mut class = Continuity::Jump;
            if (left(0)? - right(0)?).abs() <= JUNCTION_TOL {
                class = Continuity::C0;
                if (left(1)? - right(1)?).abs() <= JUNCTION_TOL {
                    class = Continuity::C1;
                    if (left(2)? - right(2)?).abs() <= JUNCTION_TOL {
                        class = Continuity::C2;
                    }
                }
            }
            out.push(class);
        }
        Ok(out)
    }

    fn piece_index_for(&self, t: f64, side: Side) -> Result<usize> {
        let (lo, hi) = self.domain();
        if t < lo - JUNCTION_TOL || t > hi + JUNCTION_TOL {
            return Err(ProfileError::OutOfDomain { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        // Index of the first piece whose hi >= t.
        let mut idx = self
            .pieces
            .partition_point(|p| p.hi < t)
            .min(self.pieces.len() - 1);
        if matches!(side, Side::Left) && (t - self.pieces[idx].lo).abs() == 0.0 && idx > 0 {
            idx -= 1;
        }
        if matches!(side, Side::Right) && (t - self.pieces[idx].hi).abs() == 0.0
            && idx + 1 < self.pieces.len()
        {
            idx += 1;
        }
        Ok(idx)
    }

    /// Evaluate the order-th derivative at `t`. At a breakpoint the one-sided
    /// limits must agree within [`JUNCTION_TOL`], otherwise
    /// [`ProfileError::AmbiguousAtBreakpoint`] is returned.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        self.eval_sided(t, order, Side::Auto)
    }

    pub fn eval_left(&self, t: f64, order: u8) -> Result<f64> {
        self.eval_sided(t, order, Side::Left)
    }

    pub fn eval_right(&self, t: f64, order: u8) -> Result<f64> {
        self.eval_sided(t, order, Side::Right)
    }

    pub fn eval_sided(&self, t: f64, order: u8, side: Side) -> Result<f64> {
        match side {
            Side::Left | Side::Right => {
                let idx = self.piece_index_for(t, side)?;
                self.pieces[idx].kind.eval(t, order, side)
            }
            Side::Auto => {
                let idx = self.piece_index_for(t, Side::Auto)?;
                let v = self.pieces[idx].kind.eval(t, order, Side::Auto)?;
                // At an interior junction compare both one-sided limits.
                if idx > 0 && t == self.pieces[idx].lo {
                    let l = self.pieces[idx - 1].kind.eval(t, order, Side::Left)?;
                    if (l - v).abs() > JUNCTION_TOL {
                        return Err(ProfileError::AmbiguousAtBreakpoint {
                            t,
                            order,
                            gap: (l - v).abs(),
                        });
                    }
                    return Ok(l);
                }
                if idx + 1 < self.pieces.len() && t == self.pieces[idx].hi {
                    let r = self.pieces[idx + 1].kind.eval(t, order, Side::Right)?;
                    if (r - v).abs() > JUNCTION_TOL {
                        return Err(ProfileError::AmbiguousAtBreakpoint {
                            t,
                            order,
                            gap: (r - v).abs(),
                        });
                    }
                }
                Ok(v)
            }
        }
    }

    /// Concatenate profiles whose domains abut in order.
    pub fn concat(parts: &[Profile]) -> Result<Profile> {
        let mut pieces = Vec::new();
        for part in parts {
            pieces.extend(part.pieces.iter().cloned());
        }
        Profile::new(pieces)
    }

    /// `t -> mu * self(t / mu)`. First derivatives are preserved pointwise
    /// under the substitution; second derivatives scale by `1/mu`.
    pub fn rescale(&self, mu: f64) -> Result<Profile> {
        if !(mu > 0.0) {
            return Err(ProfileError::BadRescale(mu));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    lo: p.lo * mu,
                    hi: p.hi * mu,
                    kind: rescale_kind(&p.kind, mu)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(pieces)
    }

    /// `t -> self(t - dt)`.
    pub fn translate(&self, dt: f64) -> Profile {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo + dt,
                hi: p.hi + dt,
                kind: translate_kind(&p.kind, dt),
            })
            .collect();
        Profile::new(pieces).expect("translation preserves validity")
    }

    /// Restrict the domain to `[lo, hi]`, trimming pieces as needed.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Profile> {
        let (dlo, dhi) = self.domain();
        if lo < dlo - JUNCTION_TOL || hi > dhi + JUNCTION_TOL || !(lo < hi) {
            return Err(ProfileError::OutOfDomain { t: lo, lo: dlo, hi: dhi });
        }
        let lo = lo.max(dlo);
        let hi = hi.min(dhi);
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let plo = p.lo.max(lo);
            let phi = p.hi.min(hi);
            if plo < phi {
                pieces.push(Piece {
                    lo: plo,
                    hi: phi,
                    kind: p.kind.clone(),
                });
            }
        }
        Profile::new(pieces)
    }

    /// Replace the window `[lo, hi]` by the given pieces, keeping the tails
    /// bitwise unchanged outside the window.
    pub fn replace_window(&self, lo: f64, hi: f64, window: Vec<Piece>) -> Result<Profile> {
        let (dlo, dhi) = self.domain();
        let mut pieces = Vec::new();
        if lo > dlo {
            pieces.extend(self.restrict(dlo, lo)?.pieces);
        }
        pieces.extend(window);
        if hi < dhi {
            pieces.extend(self.restrict(hi, dhi)?.pieces);
        }
        Profile::new(pieces)
    }

    /// Distance from `t` to the nearest breakpoint or domain endpoint,
    /// excluding `t` itself when it sits on one.
    pub fn nearest_junction_distance(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let mut best = f64::INFINITY;
        for &b in self
            .breakpoints
            .iter()
            .chain(std::iter::once(&lo))
            .chain(std::iter::once(&hi))
        {
            let d = (b - t).abs();
            if d > JUNCTION_TOL {
                best = best.min(d);
            }
        }
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Profile, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn rescale_kind(kind: &PieceKind, mu: f64) -> Result<PieceKind> {
    Ok(match kind {
        PieceKind::Constant { value } => PieceKind::Constant { value: mu * value },
        PieceKind::Linear { intercept, slope } => PieceKind::Linear {
            intercept: mu * intercept,
            slope: *slope,
        },
        PieceKind::TrigCos {
            amplitude,
            frequency,
            phase,
            offset,
        } => PieceKind::TrigCos {
            amplitude: mu * amplitude,
            frequency: frequency / mu,
            phase: *phase,
            offset: mu * offset,
        },
        PieceKind::TrigSin {
            amplitude,
            frequency,
            phase,
            offset,
        } => PieceKind::TrigSin {
            amplitude: mu * amplitude,
            frequency: frequency / mu,
            phase: *phase,
            offset: mu * offset,
        },
        PieceKind::HyperbolicMix {
            c1,
            c2,
            scale,
            center,
        } => PieceKind::HyperbolicMix {
            c1: mu * c1,
            c2: mu * c2,
            scale: mu * scale,
            center: mu * center,
        },
        PieceKind::Polynomial { coeffs, center } => PieceKind::Polynomial {
            coeffs: coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| mu.powi(1 - k as i32) * c)
                .collect(),
            center: mu * center,
        },
        PieceKind::LogOfProfile {
            inner,
            factor,
            offset,
        } => PieceKind::LogOfProfile {
            inner: Box::new(inner.rescale(mu)?),
            factor: mu * factor,
            offset: mu * offset - mu * factor * mu.ln(),
        },
        PieceKind::Sampled { knots, values, .. } => PieceKind::Sampled {
            knots: knots.iter().map(|x| mu * x).collect(),
            values: values.iter().map(|y| mu * y).collect(),
            second_derivs: OnceLock::new(),
        },
    })
}

fn translate_kind(kind: &PieceKind, dt: f64) -> PieceKind {
    match kind {
        PieceKind::Constant { value } => PieceKind::Constant { value: *value },
        PieceKind::Linear { intercept, slope } => PieceKind::Linear {
            intercept: intercept - slope * dt,
            slope: *slope,
        },
        PieceKind::TrigCos {
            amplitude,
            frequency,
            phase,
            offset,
        } => PieceKind::TrigCos {
            amplitude: *amplitude,
            frequency: *frequency,
            phase: phase - frequency * dt,
            offset: *offset,
        },
        PieceKind::TrigSin {
            amplitude,
            frequency,
            phase,
            offset,
        } => PieceKind::TrigSin {
            amplitude: *amplitude,
            frequency: *frequency,
            phase: phase - frequency * dt,
            offset: *offset,
        },
        PieceKind::HyperbolicMix {
            c1,
            c2,
            scale,
            center,
        } => PieceKind::HyperbolicMix {
            c1: *c1,
            c2: *c2,
            scale: *scale,
            center: center + dt,
        },
        PieceKind::Polynomial { coeffs, center } => PieceKind::Polynomial {
            coeffs: coeffs.clone(),
            center: center + dt,
        },
        PieceKind::LogOfProfile {
            inner,
            factor,
            offset,
        } => PieceKind::LogOfProfile {
            inner: Box::new(inner.translate(dt)),
            factor: *factor,
            offset: *offset,
        },
        PieceKind::Sampled { knots, values, .. } => PieceKind::Sampled {
            knots: knots.iter().map(|x| x + dt).collect(),
            values: values.clone(),
            second_derivs: OnceLock::new(),
        },
    }
}

/// Builds a `Sampled` piece; the spline data may extend past `[lo, hi]` so the
/// natural end conditions sit away from the working domain.
pub fn sampled_piece(knots: Vec<f64>, values: Vec<f64>, lo: f64, hi: f64) -> Result<Piece> {
    if knots.len() < 2 || knots.len() != values.len() || knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProfileError::BadSample);
    }
    Ok(Piece {
        lo,
        hi,
        kind: PieceKind::Sampled {
            knots,
            values,
            second_derivs: OnceLock::new(),
        },
    })
}

/// Degree-5 Hermite interpolant matching value, slope and curvature at both
/// window ends. Used wherever a corner is blended into a C² join.
pub fn quintic_hermite(t0: f64, t1: f64, end0: (f64, f64, f64), end1: (f64, f64, f64)) -> Piece {
    let c = 0.5 * (t0 + t1);
    let u0 = t0 - c;
    let u1 = t1 - c;
    let mut a = nalgebra::DMatrix::<f64>::zeros(6, 6);
    let mut rhs = nalgebra::DVector::<f64>::zeros(6);
    for (r, (u, (v, s, k))) in [(u0, end0), (u1, end1)].into_iter().enumerate() {
        for j in 0..6usize {
            a[(3 * r, j)] = u.powi(j as i32);
            a[(3 * r + 1, j)] = if j >= 1 {
                j as f64 * u.powi(j as i32 - 1)
            } else {
                0.0
            };
            a[(3 * r + 2, j)] = if j >= 2 {
                (j * (j - 1)) as f64 * u.powi(j as i32 - 2)
            } else {
                0.0
            };
        }
        rhs[3 * r] = v;
        rhs[3 * r + 1] = s;
        rhs[3 * r + 2] = k;
    }
    let coeffs = a.lu().solve(&rhs).expect("well-conditioned Hermite system");
    Piece {
        lo: t0,
        hi: t1,
        kind: PieceKind::Polynomial {
            coeffs: coeffs.iter().copied().collect(),
            center: c,
        },
    }
}

/// Quintic smoothstep cutoff: 1 on `(-inf, 0]`, 0 on `[1, inf)`, with
/// vanishing first and second derivatives at both ends.
pub fn smoothstep_cutoff() -> Profile {
    Profile::new(vec![
        Piece {
            lo: -1.0,
            hi: 0.0,
            kind: PieceKind::Constant { value: 1.0 },
        },
        Piece {
            lo: 0.0,
            hi: 1.0,
            kind: PieceKind::Polynomial {
                coeffs: vec![1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
                center: 0.0,
            },
        },
        Piece {
            lo: 1.0,
            hi: 2.0,
            kind: PieceKind::Constant { value: 0.0 },
        },
    ])
    .expect("fixed cutoff is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_diff(p: &Profile, t: f64, order: u8, h: f64) -> f64 {
        match order {
            1 => (p.eval(t + h, 0).unwrap() - p.eval(t - h, 0).unwrap()) / (2.0 * h),
            2 => {
                (p.eval(t + h, 0).unwrap() - 2.0 * p.eval(t, 0).unwrap()
                    + p.eval(t - h, 0).unwrap())
                    / (h * h)
            }
            _ => panic!("order"),
        }
    }

    #[test]
    fn cos_values_and_second_derivative() {
        let p = Profile::cosine(0.0, 1.0);
        assert_eq!(p.eval(0.0, 0).unwrap(), 1.0);
        assert_eq!(p.eval(0.0, 2).unwrap(), -1.0);
    }

    #[test]
    fn hyperbolic_mix_slope_matches_lemma_data() {
        // c1 = cos(nu*eps), c2 = -nu*sin(nu*eps): slope at the center is
        // c2/scale = -sin(nu*eps).
        let nu = 1.1_f64;
        let eps = 0.01_f64;
        let p = Profile::single(
            PieceKind::HyperbolicMix {
                c1: (nu * eps).cos(),
                c2: -nu * (nu * eps).sin(),
                scale: nu,
                center: nu * eps,
            },
            0.0,
            0.1,
        )
        .unwrap();
        let d = p.eval(nu * eps, 1).unwrap();
        assert!((d - (-(nu * eps).sin())).abs() < 1e-15);
        assert!((d - (-0.010999778)).abs() < 1e-9);
        // Independent check by central difference.
        let fd = central_diff(&p, nu * eps, 1, 1e-6);
        assert!((d - fd).abs() < 1e-9);
    }

    #[test]
    fn concat_identity_and_mismatch() {
        let p = Profile::cosine(0.0, 1.0);
        let q = Profile::concat(std::slice::from_ref(&p)).unwrap();
        assert_eq!(q.pieces().len(), 1);
        for &t in &[0.1, 0.5, 0.9] {
            assert_eq!(p.eval(t, 0).unwrap(), q.eval(t, 0).unwrap());
        }
        let overlapping = Profile::concat(&[p.clone(), Profile::cosine(0.5, 1.5)]);
        assert!(matches!(
            overlapping,
            Err(ProfileError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn concat_measures_junction_classes() {
        let a = Profile::cosine(0.0, 1.0);
        // Linear continuation matching value and slope of cos at t=1.
        let b = Profile::single(
            PieceKind::Linear {
                intercept: 1.0_f64.cos() + 1.0_f64.sin(),
                slope: -(1.0_f64.sin()),
            },
            1.0,
            2.0,
        )
        .unwrap();
        let glued = Profile::concat(&[a, b]).unwrap();
        assert_eq!(glued.continuity(), &[Continuity::C1]);
        assert!(glued.eval(1.0, 2).is_err()); // second derivative jumps
        assert!((glued.eval_left(1.0, 2).unwrap() - (-(1.0_f64.cos()))).abs() < 1e-15);
        assert_eq!(glued.eval_right(1.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn rescale_basics() {
        let ident = Profile::single(
            PieceKind::Linear {
                intercept: 0.0,
                slope: 1.0,
            },
            0.0,
            1.0,
        )
        .unwrap();
        let r = ident.rescale(2.0).unwrap();
        assert_eq!(r.domain(), (0.0, 2.0));
        for &t in &[0.0, 1.0, 2.0] {
            assert!((r.eval(t, 0).unwrap() - t).abs() < 1e-15);
        }

        let s = Profile::sine(0.0, std::f64::consts::PI).rescale(0.5).unwrap();
        assert!((s.eval(0.0, 1).unwrap() - 1.0).abs() < 1e-15);

        // Second derivatives scale by 1/mu: (rescale cos by 3)''(0) = -1/3.
        let c = Profile::cosine(0.0, 1.0).rescale(3.0).unwrap();
        assert!((c.eval(0.0, 2).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let fd = central_diff(&c, 0.3, 2, 1e-5);
        assert!((c.eval(0.3, 2).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn rescale_round_trip_is_pointwise_identity() {
        let gamma = Profile::single(
            PieceKind::TrigSin {
                amplitude: 0.1,
                frequency: 0.9,
                phase: 0.3,
                offset: 2.0,
            },
            0.0,
            2.0,
        )
        .unwrap();
        let f = Profile::single(
            PieceKind::LogOfProfile {
                inner: Box::new(gamma),
                factor: -3.0,
                offset: 0.25,
            },
            0.0,
            2.0,
        )
        .unwrap();
        let back = f.rescale(1.7).unwrap().rescale(1.0 / 1.7).unwrap();
        for i in 0..=20 {
            let t = 2.0 * i as f64 / 20.0;
            assert!((f.eval(t, 0).unwrap() - back.eval(t, 0).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampled_spline_tracks_smooth_data() {
        let n = 200;
        let knots: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64 * 2.0).collect();
        let values: Vec<f64> = knots.iter().map(|&x| (1.3 * x).sin() + 2.0).collect();
        let piece = sampled_piece(knots, values, 0.1, 1.9).unwrap();
        let p = Profile::new(vec![piece]).unwrap();
        assert!(!p.is_exact());
        for i in 1..20 {
            let t = 0.1 + 1.8 * i as f64 / 20.0;
            let exact = (1.3 * t).sin() + 2.0;
            assert!((p.eval(t, 0).unwrap() - exact).abs() < 1e-6);
            let d1 = 1.3 * (1.3 * t).cos();
            assert!((p.eval(t, 1).unwrap() - d1).abs() < 1e-4);
        }
    }

    #[test]
    fn quintic_hermite_matches_end_data() {
        let piece = quintic_hermite(0.2, 0.9, (1.0, -0.3, 0.8), (2.0, 0.1, -0.4));
        let p = Profile::new(vec![piece]).unwrap();
        for (t, want) in [(0.2, [1.0, -0.3, 0.8]), (0.9, [2.0, 0.1, -0.4])] {
            for order in 0..=2u8 {
                assert!((p.eval(t, order).unwrap() - want[order as usize]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn smoothstep_cutoff_is_c2() {
        let chi = smoothstep_cutoff();
        assert_eq!(chi.continuity(), &[Continuity::C2, Continuity::C2]);
        assert_eq!(chi.eval(-0.5, 0).unwrap(), 1.0);
        assert_eq!(chi.eval(1.5, 0).unwrap(), 0.0);
        assert_eq!(chi.eval(0.0, 1).unwrap(), 0.0);
        assert_eq!(chi.eval(1.0, 1).unwrap(), 0.0);
    }

    fn arb_closed_kind() -> impl Strategy<Value = PieceKind> {
        prop_oneof![
            (-2.0..2.0f64).prop_map(|value| PieceKind::Constant { value }),
            (-2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(intercept, slope)| PieceKind::Linear { intercept, slope }),
            (0.1..2.0f64, 0.2..3.0f64, -3.0..3.0f64, -1.0..1.0f64).prop_map(
                |(amplitude, frequency, phase, offset)| PieceKind::TrigCos {
                    amplitude,
                    frequency,
                    phase,
                    offset,
                }
            ),
            (0.1..2.0f64, 0.2..3.0f64, -3.0..3.0f64, -1.0..1.0f64).prop_map(
                |(amplitude, frequency, phase, offset)| PieceKind::TrigSin {
                    amplitude,
                    frequency,
                    phase,
                    offset,
                }
            ),
            (-1.0..1.0f64, -1.0..1.0f64, 0.5..3.0f64, -1.0..1.0f64).prop_map(
                |(c1, c2, scale, center)| PieceKind::HyperbolicMix {
                    c1,
                    c2,
                    scale,
                    center,
                }
            ),
            (
                proptest::collection::vec(-1.5..1.5f64, 1..=6),
                -1.0..1.0f64
            )
                .prop_map(|(coeffs, center)| PieceKind::Polynomial { coeffs, center }),
        ]
    }

    proptest! {
        // Analytic first and second derivatives of every closed-form kind
        // match central finite differences at random interior points.
        #[test]
        fn analytic_derivatives_match_finite_differences(
            kind in arb_closed_kind(),
            ts in proptest::collection::vec(0.05..0.95f64, 100),
        ) {
            let p = Profile::single(kind, 0.0, 1.0).unwrap();
            let h = 1e-5;
            for t in ts {
                for order in [1u8, 2u8] {
                    let exact = p.eval(t, order).unwrap();
                    let fd = central_diff(&p, t, order, h);
                    let tol = 1e-6 * (1.0 + exact.abs());
                    prop_assert!((exact - fd).abs() <= tol,
                        "order {} at t={}: {} vs {}", order, t, exact, fd);
                }
            }
        }

        // concat then eval equals eval on the original part.
        #[test]
        fn concat_preserves_piece_values(t in 0.01..0.99f64) {
            let a = Profile::cosine(0.0, 1.0);
            let b = Profile::single(PieceKind::Linear {
                intercept: 1.0f64.cos() + 1.0f64.sin(),
                slope: -(1.0f64.sin()),
            }, 1.0, 2.0).unwrap();
            let glued = Profile::concat(&[a.clone(), b.clone()]).unwrap();
            prop_assert_eq!(glued.eval(t, 0).unwrap(), a.eval(t, 0).unwrap());
            prop_assert_eq!(glued.eval(t + 1.0, 0).unwrap(), b.eval(t + 1.0, 0).unwrap());
        }

        // JSON round trips are bit-faithful for closed-form kinds.
        #[test]
        fn json_round_trip_bit_faithful(kind in arb_closed_kind()) {
            let p = Profile::single(kind, -0.25, 1.75).unwrap();
            let round = Profile::from_json(&p.to_json()).unwrap();
            for i in 0..=16 {
                let t = -0.25 + 2.0 * i as f64 / 16.0;
                prop_assert_eq!(
                    p.eval(t, 0).unwrap().to_bits(),
                    round.eval(t, 0).unwrap().to_bits()
                );
            }
        }

        // rescale by mu then 1/mu is pointwise identity within 1e-12.
        #[test]
        fn rescale_involution(kind in arb_closed_kind(), mu in 0.2..4.0f64, t in 0.0..1.0f64) {
            let p = Profile::single(kind, 0.0, 1.0).unwrap();
            let rt = p.rescale(mu).unwrap().rescale(1.0 / mu).unwrap();
            let a = p.eval(t, 0).unwrap();
            let b = rt.eval(t.clamp(rt.domain().0, rt.domain().1), 0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

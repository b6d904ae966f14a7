//! Registry of symmetric Kubo-Ando means.
//!
//! A mean is carried around as a [`MeanDescriptor`]: the representing
//! function `f` on (0, inf), its inverse, the convex potential `g` with
//! `g'(t) = 1 - 1/f_inv(t)`, and the open range interval of `f`. Builtins
//! provide closed forms; custom means registered from `f` alone get
//! numeric inversion and adaptive quadrature.

use std::fmt;
use std::sync::Arc;

use crate::error::{OpMeanError, Result};
use crate::matcore::{conjugate_by_root, matfun_on, PDMatrix, RootSign};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Open interval `(lo, hi)`, `hi` possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const POSITIVE_HALF_LINE: Range = Range {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    /// Strict membership with a relative margin of 1e-12 at finite
    /// endpoints; boundary-adjacent values count as violations since
    /// `g'` diverges there for non-surjective means.
    pub fn contains(&self, x: f64) -> bool {
        let lo_margin = 1e-12 * self.lo.abs().max(1.0);
        if x <= self.lo + if self.lo > 0.0 { lo_margin } else { 0.0 } {
            return false;
        }
        if x <= 0.0 {
            return false;
        }
        if self.hi.is_finite() {
            let hi_margin = 1e-12 * self.hi.abs().max(1.0);
            x < self.hi - hi_margin
        } else {
            true
        }
    }
}

#[derive(Clone)]
enum Inverse {
    Closed(ScalarFn),
    /// Bracketed root finding with geometric bracket expansion from x = 1.
    Numeric,
}

#[derive(Clone)]
enum Potential {
    Closed(ScalarFn),
    /// Adaptive Simpson quadrature of `g'` from 1 to x.
    Quadrature,
}

/// A symmetric Kubo-Ando mean.
#[derive(Clone)]
pub struct MeanDescriptor {
    name: String,
    f: ScalarFn,
    f_inv: Inverse,
    g: Potential,
    range: Range,
    surjective: bool,
}

impl fmt::Debug for MeanDescriptor {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("MeanDescriptor")
            .field("name", &self.name)
            .field("range", &self.range)
            .field("surjective", &self.surjective)
            .finish()
    }
}

impl MeanDescriptor {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range(&self) -> Range {
        self.range
    }

    pub fn surjective(&self) -> bool {
        self.surjective
    }

    /// The representing function f on (0, inf).
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// The unique `x > 0` with `f(x) = t`; closed form when the
    /// descriptor has one, else bracketed bisection to 1e-12 relative.
    pub fn f_inv(&self, t: f64) -> Result<f64> {
        if !self.range.contains(t) {
            return Err(OpMeanError::RangeError {
                value: t,
                lo: self.range.lo,
                hi: self.range.hi,
            });
        }
        match &self.f_inv {
            Inverse::Closed(inv) => Ok(inv(t)),
            Inverse::Numeric => invert_monotone(&self.f, t),
        }
    }

    /// `g'(t) = 1 - 1/f_inv(t)`.
    pub fn g_prime(&self, t: f64) -> Result<f64> {
        Ok(1.0 - 1.0 / self.f_inv(t)?)
    }

    /// The convex potential `g(x) = int_1^x (1 - 1/f_inv(t)) dt`.
    pub fn g(&self, x: f64) -> Result<f64> {
        if !self.range.contains(x) {
            return Err(OpMeanError::RangeError {
                value: x,
                lo: self.range.lo,
                hi: self.range.hi,
            });
        }
        match &self.g {
            Potential::Closed(g) => Ok(g(x)),
            Potential::Quadrature => {
                adaptive_simpson(|t| self.g_prime(t), 1.0, x, 1e-11)
            }
        }
    }

    /// Registers a custom symmetric mean from its representing function
    /// alone; inverse, potential, and range are synthesized numerically.
    /// Since f is increasing, its limits are probed by whether f is still
    /// visibly shrinking (growing) between 1e-4 and 1e-16 (1e4 and 1e16);
    /// a fixed value threshold would misclassify slowly-diverging f such
    /// as (x-1)/ln x, which decays only like 1/ln(1/x) at 0.
    pub fn from_f(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let lo_probe = f(1e-16);
        let hi_probe = f(1e16);
        let lo_zero = lo_probe < 0.75 * f(1e-4);
        let hi_inf = hi_probe > 1.25 * f(1e4);
        let surjective = lo_zero && hi_inf;
        let range = Range {
            lo: if lo_zero { 0.0 } else { lo_probe },
            hi: if hi_inf { f64::INFINITY } else { hi_probe },
        };
        Self {
            name: name.into(),
            f: Arc::new(f),
            f_inv: Inverse::Numeric,
            g: Potential::Quadrature,
            range,
            surjective,
        }
    }
}

/// Names accepted by the CLI and file format.
pub const BUILTIN_NAMES: [&str; 4] = ["arithmetic", "harmonic", "geometric", "logarithmic"];

pub fn arithmetic() -> MeanDescriptor {
    MeanDescriptor {
        name: "arithmetic".into(),
        f: Arc::new(|x| (1.0 + x) / 2.0),
        f_inv: Inverse::Closed(Arc::new(|t| 2.0 * t - 1.0)),
        // int_1^x (1 - 1/(2t-1)) dt = (x-1) - ln(2x-1)/2
        g: Potential::Closed(Arc::new(|x| (x - 1.0) - 0.5 * (2.0 * x - 1.0).ln())),
        range: Range {
            lo: 0.5,
            hi: f64::INFINITY,
        },
        surjective: false,
    }
}

pub fn harmonic() -> MeanDescriptor {
    MeanDescriptor {
        name: "harmonic".into(),
        f: Arc::new(|x| 2.0 * x / (1.0 + x)),
        f_inv: Inverse::Closed(Arc::new(|t| t / (2.0 - t))),
        // int_1^x (2 - 2/t) dt = 2(x-1) - 2 ln x
        g: Potential::Closed(Arc::new(|x| 2.0 * (x - 1.0) - 2.0 * x.ln())),
        range: Range { lo: 0.0, hi: 2.0 },
        surjective: false,
    }
}

pub fn geometric() -> MeanDescriptor {
    MeanDescriptor {
        name: "geometric".into(),
        f: Arc::new(f64::sqrt),
        f_inv: Inverse::Closed(Arc::new(|t| t * t)),
        g: Potential::Closed(Arc::new(|x| x + 1.0 / x - 2.0)),
        range: Range::POSITIVE_HALF_LINE,
        surjective: true,
    }
}

/// f_L(x) = (x-1)/ln x with the removable singularity at 1 handled by a
/// series branch; naive evaluation loses all precision near 1, exactly
/// where g' vanishes.
fn f_logarithmic(x: f64) -> f64 {
    let e = x - 1.0;
    if e.abs() < 1e-4 {
        1.0 + e / 2.0 - e * e / 12.0
    } else {
        e / x.ln()
    }
}

pub fn logarithmic() -> MeanDescriptor {
    MeanDescriptor {
        name: "logarithmic".into(),
        f: Arc::new(f_logarithmic),
        f_inv: Inverse::Numeric,
        g: Potential::Quadrature,
        range: Range::POSITIVE_HALF_LINE,
        surjective: true,
    }
}

/// Mean lookup by the names exposed in the CLI and file format.
pub fn builtin(name: &str) -> Result<MeanDescriptor> {
    match name {
        "arithmetic" => Ok(arithmetic()),
        "harmonic" => Ok(harmonic()),
        "geometric" => Ok(geometric()),
        "logarithmic" => Ok(logarithmic()),
        other => Err(OpMeanError::UnknownMean(other.into())),
    }
}

pub fn all_builtins() -> Vec<MeanDescriptor> {
    vec![arithmetic(), harmonic(), geometric(), logarithmic()]
}

/// The adjoint mean, `f*(x) = 1/f(1/x)`. Involution; fixes the geometric
/// mean, swaps arithmetic and harmonic.
pub fn adjoint_mean(sigma: &MeanDescriptor) -> MeanDescriptor {
    let f = sigma.f.clone();
    let f_inv = match &sigma.f_inv {
        Inverse::Closed(inv) => {
            let inv = inv.clone();
            Inverse::Closed(Arc::new(move |t: f64| 1.0 / inv(1.0 / t)))
        }
        Inverse::Numeric => Inverse::Numeric,
    };
    let range = Range {
        lo: if sigma.range.hi.is_finite() {
            1.0 / sigma.range.hi
        } else {
            0.0
        },
        hi: if sigma.range.lo > 0.0 {
            1.0 / sigma.range.lo
        } else {
            f64::INFINITY
        },
    };
    MeanDescriptor {
        name: format!("adjoint({})", sigma.name),
        f: Arc::new(move |x: f64| 1.0 / f(1.0 / x)),
        f_inv,
        g: Potential::Quadrature,
        range,
        surjective: sigma.surjective,
    }
}

/// `A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`.
pub fn mean_apply(sigma: &MeanDescriptor, a: &PDMatrix, b: &PDMatrix) -> Result<PDMatrix> {
    let c = conjugate_by_root(a, b, RootSign::MinusHalf)?;
    let fc = matfun_on(&c, 0.0, f64::INFINITY, |x| sigma.f(x))?;
    let fc_pd = PDMatrix::new(fc)?;
    conjugate_by_root(a, &fc_pd, RootSign::PlusHalf)
}

/// The three classical families with an explicit weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoMeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
}

/// Weighted arithmetic `(1-a)A + aB`, geometric
/// `A^{1/2}(A^{-1/2}BA^{-1/2})^a A^{1/2}`, or harmonic
/// `((1-a)A^{-1} + aB^{-1})^{-1}`.
pub fn weighted_two_means(
    kind: TwoMeanKind,
    a: &PDMatrix,
    b: &PDMatrix,
    alpha: f64,
) -> Result<PDMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OpMeanError::WeightError(format!(
            "alpha = {alpha} outside [0, 1]"
        )));
    }
    if a.dim() != b.dim() {
        return Err(OpMeanError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    match kind {
        TwoMeanKind::Arithmetic => {
            PDMatrix::new(a.herm().scale(1.0 - alpha).add(&b.herm().scale(alpha))?)
        }
        TwoMeanKind::Geometric => {
            let c = conjugate_by_root(a, b, RootSign::MinusHalf)?;
            let powered = PDMatrix::new(crate::matcore::matfun(&c, |x| x.powf(alpha)))?;
            conjugate_by_root(a, &powered, RootSign::PlusHalf)
        }
        TwoMeanKind::Harmonic => {
            let mix = a
                .inverse()
                .herm()
                .scale(1.0 - alpha)
                .add(&b.inverse().herm().scale(alpha))?;
            Ok(PDMatrix::new(mix)?.inverse())
        }
    }
}

/// Bracketed bisection for a strictly increasing f, expanding the bracket
/// geometrically from x = 1.
fn invert_monotone(f: &ScalarFn, t: f64) -> Result<f64> {
    let mut lo = 1.0;
    let mut hi = 1.0;
    let f1 = f(1.0);
    let out_of_reach = || OpMeanError::RangeError {
        value: t,
        lo: 0.0,
        hi: f64::INFINITY,
    };
    if t >= f1 {
        for _ in 0..1100 {
            if f(hi) >= t {
                break;
            }
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(out_of_reach());
            }
        }
        lo = hi / 2.0;
        if hi > 1.5 {
            lo = lo.max(1.0)
        }
        if f(hi) < t {
            return Err(out_of_reach());
        }
    } else {
        for _ in 0..1100 {
            if f(lo) <= t {
                break;
            }
            lo /= 2.0;
            // the preimage can underflow f64 entirely (e.g. e^{-1/t} for
            // small t); report it as unreachable rather than bisect on 0
            if lo == 0.0 {
                return Err(out_of_reach());
            }
        }
        hi = (lo * 2.0).min(1.0);
        if f(lo) > t {
            return Err(out_of_reach());
        }
    }
    // bisection in log space keeps relative precision uniform
    let mut llo = lo.ln();
    let mut lhi = hi.ln();
    for _ in 0..200 {
        let mid = 0.5 * (llo + lhi);
        if f(mid.exp()) < t {
            llo = mid;
        } else {
            lhi = mid;
        }
        if lhi - llo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (llo + lhi)).exp())
}

/// Adaptive Simpson quadrature with absolute tolerance on each bisected
/// panel; handles a < b and a > b alike.
pub(crate) fn adaptive_simpson(
    f: impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // mixed absolute/relative acceptance: the potentials of means with
    // fast-shrinking inverses reach 1e10 and beyond, where a purely
    // absolute tolerance would force full-depth recursion
    if depth == 0 || delta.abs() <= 15.0 * (tol + 1e-12 * (left + right).abs()) {
        Ok(left + right + delta / 15.0)
    } else {
        let half = tol / 2.0;
        Ok(simpson_recurse(f, a, m, fa, flm, fm, left, half, depth - 1)?
            + simpson_recurse(f, m, b, fm, frm, fb, right, half, depth - 1)?)
    }
}

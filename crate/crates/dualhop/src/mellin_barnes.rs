//! Mellin–Barnes evaluation of Fox H-functions of one and two variables.
//!
//! An integrand is a product of gamma factors Γ(a + c_s·s + c_t·t)^{±1}
//! times x^s y^t, integrated along straight vertical contours. The abscissa
//! is placed at the saddle point of the integrand on the real axis, inside
//! the region where every numerator gamma argument has positive real part,
//! so the integrand is nearly non-oscillatory and cancellation is minimal.
//! The contour is truncated where the integrand has decayed 40 e-folds below
//! its peak, and integrated with composite 8-point Gauss–Legendre panels
//! that are halved until two successive levels agree.
//!
//! Conventions:
//!
//! * univariate H^{m,n}_{p,q}[z | (a_i, A_i); (b_j, B_j)] has integrand
//!   Π_{j≤m} Γ(b_j + B_j s) Π_{i≤n} Γ(1 − a_i − A_i s) / (Π_{j>m} Γ(1 − b_j − B_j s)
//!   Π_{i>n} Γ(a_i + A_i s)) · z^{−s};
//! * the bivariate function follows the Mittal–Gupta form with kernel
//!   x^s y^t and a joint group of triples (a; α, A).

use crate::error::{Error, Result};
use crate::metric::{Method, MetricResult};
use crate::specfun::ln_gamma_mod2pi;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_2,
    0.525_532_409_916_328_985_817_739_049_189_2,
    0.796_666_477_413_626_739_591_553_936_475_8,
    0.960_289_856_497_536_231_683_560_868_569_5,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_2,
    0.313_706_645_877_887_287_337_962_201_986_6,
    0.222_381_034_453_374_470_544_355_994_426_2,
    0.101_228_536_290_376_259_152_531_354_309_9,
];

/// Log-magnitude drop that defines the contour tails.
const TAIL_DROP: f64 = 40.0;
/// Refinement difference, relative to the peak magnitude times the half
/// height, accepted as rounding-limited.
const CANCELLATION_LIMIT: f64 = 1e-9;
/// Relative agreement accepted from the final pair of bivariate refinements.
const LAST_LEVEL_REL: f64 = 1e-6;
/// Bound on |abscissa| during saddle search.
const BOX: f64 = 400.0;

/// A gamma factor Γ(a + cs·s + ct·t), in the numerator or denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    pub a: f64,
    pub cs: f64,
    pub ct: f64,
    pub numerator: bool,
}

impl GammaFactor {
    pub fn num(a: f64, cs: f64) -> Self {
        GammaFactor { a, cs, ct: 0.0, numerator: true }
    }

    pub fn den(a: f64, cs: f64) -> Self {
        GammaFactor { a, cs, ct: 0.0, numerator: false }
    }

    pub fn num2(a: f64, cs: f64, ct: f64) -> Self {
        GammaFactor { a, cs, ct, numerator: true }
    }

    pub fn den2(a: f64, cs: f64, ct: f64) -> Self {
        GammaFactor { a, cs, ct, numerator: false }
    }

    /// Same factor acting on the second variable only.
    pub fn on_t(self) -> Self {
        GammaFactor { a: self.a, cs: 0.0, ct: self.cs, numerator: self.numerator }
    }

    #[inline]
    fn ln_at(&self, s: Complex64, t: Complex64) -> Complex64 {
        let z = Complex64::new(self.a, 0.0) + s * self.cs + t * self.ct;
        let l = ln_gamma_mod2pi(z);
        if self.numerator {
            l
        } else {
            -l
        }
    }
}

/// Σ_j e^{ln_coeffs[j]} Γ(j + a + cs·s), a family of shifted numerator gamma
/// factors in the first variable, used to fold a mixture index into one
/// integral.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSeries {
    pub a: f64,
    pub cs: f64,
    pub ln_coeffs: Vec<f64>,
}

impl GammaSeries {
    fn ln_at(&self, s: Complex64) -> Complex64 {
        let z = Complex64::new(self.a, 0.0) + s * self.cs;
        let lg0 = ln_gamma_mod2pi(z);
        let Some(&lc0) = self.ln_coeffs.first() else {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        };
        // Running term and sum, both relative to e^{scale}.
        let mut scale = lc0;
        let mut cur = Complex64::new(1.0, 0.0);
        let mut acc = cur;
        for j in 1..self.ln_coeffs.len() {
            cur *= (z + (j - 1) as f64) * (self.ln_coeffs[j] - self.ln_coeffs[j - 1]).exp();
            acc += cur;
            let m = cur.norm_sqr();
            if m > 1e200 || !(m > 1e-200 || acc.norm_sqr() > 1e-200) {
                let r = 0.5 * m.ln();
                if r.is_finite() {
                    cur /= r.exp();
                    acc /= r.exp();
                    scale += r;
                }
            }
        }
        lg0 + scale + acc.ln()
    }

    fn constraint(&self) -> Constraint {
        Constraint { a: self.a, cs: self.cs, ct: 0.0 }
    }
}

/// Linear constraint a + cs·x + ct·y > 0 on the contour abscissas.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Constraint {
    a: f64,
    cs: f64,
    ct: f64,
}

impl Constraint {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.a + self.cs * x + self.ct * y
    }

    fn norm(&self) -> f64 {
        self.cs.hypot(self.ct)
    }
}

/// Contour parameters for one integration variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub abscissa: f64,
    /// Half height of the truncated contour; 0 selects it automatically.
    pub half_height: f64,
    pub nodes_per_unit: usize,
    pub adaptive: bool,
    pub max_refinements: usize,
    pub rel_tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            abscissa: 0.0,
            half_height: 0.0,
            nodes_per_unit: 4,
            adaptive: true,
            max_refinements: 5,
            rel_tol: 1e-11,
        }
    }
}

impl ContourSpec {
    /// Default for each variable of a double integral.
    pub fn bivariate() -> Self {
        ContourSpec {
            nodes_per_unit: 4,
            max_refinements: 3,
            rel_tol: 1e-8,
            ..ContourSpec::default()
        }
    }

    pub fn fixed(abscissa: f64, half_height: f64) -> Self {
        ContourSpec {
            abscissa,
            half_height,
            adaptive: false,
            ..ContourSpec::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_unit == 0 || self.max_refinements == 0 || !(self.rel_tol > 0.0) {
            return Err(Error::Parameter(format!("invalid contour spec {self:?}")));
        }
        if self.half_height < 0.0 || !self.half_height.is_finite() {
            return Err(Error::Parameter("contour half height must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn panel_width(&self) -> f64 {
        8.0 / self.nodes_per_unit as f64
    }
}

/// Raw outcome of a contour integration.
#[derive(Debug, Clone, PartialEq)]
pub struct MbOutcome {
    pub value: f64,
    pub err_estimate: f64,
    pub imag_residual: f64,
    pub abscissa: (f64, f64),
    pub half_height: (f64, f64),
    pub nodes: usize,
    pub refinements: usize,
}

impl MbOutcome {
    pub fn into_metric(self) -> MetricResult {
        MetricResult::new(self.value, self.err_estimate, Method::ExactFoxH)
            .note("abscissa", format!("{:.6},{:.6}", self.abscissa.0, self.abscissa.1))
            .note("half_height", format!("{:.3},{:.3}", self.half_height.0, self.half_height.1))
            .note("imag_residual", format!("{:e}", self.imag_residual))
            .note("nodes", self.nodes)
    }
}

/// Single Mellin–Barnes integrand e^{ln_scale} Π Γ(...)^{±1} Π series · e^{s ln_x}.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Integrand1 {
    pub factors: Vec<GammaFactor>,
    pub series: Vec<GammaSeries>,
    pub ln_x: f64,
    pub ln_scale: f64,
}

impl Integrand1 {
    #[inline]
    fn ln_f(&self, s: Complex64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = s * self.ln_x;
        for f in &self.factors {
            acc += f.ln_at(s, zero);
        }
        for g in &self.series {
            acc += g.ln_at(s);
        }
        acc
    }

    fn constraints(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = self
            .factors
            .iter()
            .filter(|f| f.numerator)
            .map(|f| Constraint { a: f.a, cs: f.cs, ct: 0.0 })
            .collect();
        out.extend(self.series.iter().map(|g| g.constraint()));
        out
    }

    /// Admissible abscissa interval, open at both ends.
    pub fn feasible_interval(&self) -> Result<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for c in self.constraints() {
            if c.cs > 0.0 {
                lo = lo.max(-c.a / c.cs);
            } else if c.cs < 0.0 {
                hi = hi.min(-c.a / c.cs);
            } else if c.a <= 0.0 {
                return Err(Error::Infeasible(format!("constant gamma factor at pole-side argument {}", c.a)));
            }
        }
        if lo >= hi {
            return Err(Error::Infeasible(format!("no separating abscissa: poles require c > {lo} and c < {hi}")));
        }
        Ok((lo, hi))
    }

    fn choose_abscissa(&self) -> Result<f64> {
        let (lo, hi) = self.feasible_interval()?;
        let width = hi - lo;
        let margin = if width.is_finite() { (0.25 * width).min(0.25) } else { 0.25 };
        let a = (lo + margin).max(-BOX);
        let b = (hi - margin).min(BOX);
        if a > b {
            return Ok(0.5 * (lo + hi));
        }
        let phi = |c: f64| self.ln_f(Complex64::new(c, 0.0)).re;
        Ok(minimize_scan_golden(&phi, a, b))
    }

    /// Integrate along the contour described by `contour`.
    pub fn integrate(&self, contour: &ContourSpec) -> Result<MbOutcome> {
        contour.validate()?;
        let c = if contour.adaptive {
            self.choose_abscissa()?
        } else {
            let (lo, hi) = self.feasible_interval()?;
            if !(contour.abscissa > lo && contour.abscissa < hi) {
                return Err(Error::Infeasible(format!(
                    "abscissa {} outside admissible interval ({lo}, {hi})",
                    contour.abscissa
                )));
            }
            contour.abscissa
        };
        let g = |u: f64| self.ln_f(Complex64::new(c, u)).re;
        let (t_auto, peak) = tail_extent_1d(&g)?;
        let t = if contour.half_height > 0.0 { contour.half_height } else { t_auto };
        let mut width = contour.panel_width();
        let (lo, hi) = self.feasible_interval()?;
        let mut d = (c - lo).min(hi - c);
        let mut prev: Option<Complex64> = None;
        let mut nodes = 0;
        for level in 0..=contour.max_refinements {
            let (sum, n) = gl_line(|u| (self.ln_f(Complex64::new(c, u)) - peak).exp(), t, width, d);
            nodes += n;
            let val = sum * (peak.exp() / (2.0 * PI));
            if let Some(p) = prev {
                let delta = (val.re - p.re).abs();
                let floor = 64.0 * f64::EPSILON * peak.exp() * t / PI;
                if delta <= contour.rel_tol * val.re.abs() + floor {
                    return finish(val, delta.max(floor), (c, 0.0), (t, 0.0), nodes, level, self.ln_scale);
                }
                if level == contour.max_refinements {
                    // Cancellation-limited: the refinements agree to near the
                    // rounding level of the peak magnitude, so the difference
                    // is the honest error.
                    if delta <= CANCELLATION_LIMIT * peak.exp() * t {
                        return finish(val, delta, (c, 0.0), (t, 0.0), nodes, level, self.ln_scale);
                    }
                    return Err(Error::NonConvergence(format!(
                        "contour quadrature: successive refinements differ by {delta:e} for value {:e}",
                        val.re
                    )));
                }
            }
            prev = Some(val);
            width *= 0.5;
            d *= 0.5;
        }
        unreachable!("refinement loop returns")
    }
}

fn finish(
    val: Complex64,
    delta: f64,
    abscissa: (f64, f64),
    half_height: (f64, f64),
    nodes: usize,
    refinements: usize,
    ln_scale: f64,
) -> Result<MbOutcome> {
    let imag = val.im.abs();
    if imag > 1e-8 * val.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual { value: val.re, residual: imag });
    }
    let scale = ln_scale.exp();
    Ok(MbOutcome {
        value: val.re * scale,
        err_estimate: delta.max(imag) * scale,
        imag_residual: imag * scale,
        abscissa,
        half_height,
        nodes,
        refinements,
    })
}

/// Gauss–Legendre (8-point) over [-t, t]. Panels start at width `d` around
/// the real axis, where the nearest poles sharpen the integrand, and double
/// up to `width`.
fn gl_line<F: Fn(f64) -> Complex64>(f: F, t: f64, width: f64, d: f64) -> (Complex64, usize) {
    let nodes = gl_nodes(t, width, d);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(u, w) in &nodes {
        acc += f(u) * w;
    }
    (acc, nodes.len())
}

fn gl_nodes(t: f64, width: f64, d: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    let mut w = d.min(width).max(1e-3 * width);
    let mut e = 0.0;
    while e < t {
        e = (e + w).min(t);
        edges.push(e);
        w = (2.0 * w).min(width);
    }
    let mut out = Vec::with_capacity(16 * edges.len());
    for pair in edges.windows(2).rev() {
        push_panel(&mut out, -pair[1], -pair[0]);
    }
    for pair in edges.windows(2) {
        push_panel(&mut out, pair[0], pair[1]);
    }
    out
}

fn push_panel(out: &mut Vec<(f64, f64)>, a: f64, b: f64) {
    let mid = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in (0..4).rev() {
        out.push((mid - h * GL_X[i], GL_W[i] * h));
    }
    for i in 0..4 {
        out.push((mid + h * GL_X[i], GL_W[i] * h));
    }
}

/// Scan for the half height where the log-magnitude has dropped
/// [`TAIL_DROP`] below the running peak. Returns (T, peak).
fn tail_extent_1d<G: Fn(f64) -> f64>(g: &G) -> Result<(f64, f64)> {
    let step = 0.25;
    let mut peak = g(0.0);
    let mut u = 0.0;
    let mut below_run = 0.0;
    while u < 5000.0 {
        u += step;
        let v = g(u).max(g(-u));
        if v.is_nan() {
            return Err(Error::NonConvergence(format!("integrand not finite at height {u}")));
        }
        peak = peak.max(v);
        if v < peak - TAIL_DROP {
            below_run += step;
            if below_run >= 2.0 && u >= 4.0 {
                return Ok((u, peak));
            }
        } else {
            below_run = 0.0;
        }
    }
    Err(Error::NonConvergence("integrand does not decay along the contour".into()))
}

/// Coarse scan followed by golden-section refinement.
fn minimize_scan_golden<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    if b - a < 1e-12 {
        return 0.5 * (a + b);
    }
    let n = 64;
    let h = (b - a) / n as f64;
    let mut best = a;
    let mut best_v = f64::INFINITY;
    for k in 0..=n {
        let x = a + k as f64 * h;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    let mut lo = (best - h).max(a);
    let mut hi = (best + h).min(b);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    if f(x) <= best_v {
        x
    } else {
        best
    }
}

/// Double Mellin–Barnes integrand over (s, t).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Integrand2 {
    pub factors: Vec<GammaFactor>,
    pub s_series: Vec<GammaSeries>,
    pub ln_x: f64,
    pub ln_y: f64,
    pub ln_scale: f64,
}

struct Split<'a> {
    s_only: Vec<&'a GammaFactor>,
    t_only: Vec<&'a GammaFactor>,
    joint: Vec<&'a GammaFactor>,
}

impl Integrand2 {
    fn split(&self) -> Split<'_> {
        let mut sp = Split { s_only: vec![], t_only: vec![], joint: vec![] };
        for f in &self.factors {
            if f.ct == 0.0 {
                sp.s_only.push(f);
            } else if f.cs == 0.0 {
                sp.t_only.push(f);
            } else {
                sp.joint.push(f);
            }
        }
        sp
    }

    fn ln_f(&self, s: Complex64, t: Complex64) -> Complex64 {
        let mut acc = s * self.ln_x + t * self.ln_y;
        for f in &self.factors {
            acc += f.ln_at(s, t);
        }
        for g in &self.s_series {
            acc += g.ln_at(s);
        }
        acc
    }

    fn constraints(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = self
            .factors
            .iter()
            .filter(|f| f.numerator)
            .map(|f| Constraint { a: f.a, cs: f.cs, ct: f.ct })
            .collect();
        out.extend(self.s_series.iter().map(|g| g.constraint()));
        out
    }

    /// Chebyshev center of the admissible abscissa polygon and its radius.
    pub fn feasible_center(&self) -> Result<((f64, f64), f64)> {
        let mut cons = self.constraints();
        for c in &cons {
            if c.cs == 0.0 && c.ct == 0.0 && c.a <= 0.0 {
                return Err(Error::Infeasible(format!("constant gamma factor at argument {}", c.a)));
            }
        }
        cons.retain(|c| c.norm() > 0.0);
        cons.push(Constraint { a: BOX, cs: -1.0, ct: 0.0 });
        cons.push(Constraint { a: BOX, cs: 1.0, ct: 0.0 });
        cons.push(Constraint { a: BOX, cs: 0.0, ct: -1.0 });
        cons.push(Constraint { a: BOX, cs: 0.0, ct: 1.0 });
        let n = cons.len();
        let mut best: Option<((f64, f64), f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let rows = [cons[i], cons[j], cons[k]];
                    if let Some((x, y, r)) = solve_center(&rows) {
                        let ok = cons.iter().all(|c| c.eval(x, y) >= r * c.norm() - 1e-9);
                        if ok && best.map_or(true, |b| r > b.1) {
                            best = Some(((x, y), r));
                        }
                    }
                }
            }
        }
        match best {
            Some((p, r)) if r > 0.0 => Ok((p, r)),
            _ => Err(Error::Infeasible("no pair of abscissas separates the poles".into())),
        }
    }

    fn choose_abscissas(&self) -> Result<(f64, f64)> {
        let ((mut x, mut y), r) = self.feasible_center()?;
        let margin = (0.5 * r).min(0.25);
        let cons: Vec<Constraint> = self.constraints().into_iter().filter(|c| c.norm() > 0.0).collect();
        let phi = |x: f64, y: f64| self.ln_f(Complex64::new(x, 0.0), Complex64::new(y, 0.0)).re;
        let line_bounds = |fixed: f64, along_s: bool| -> (f64, f64) {
            let mut lo = -BOX;
            let mut hi = BOX;
            for c in &cons {
                let (coef, rest) = if along_s { (c.cs, c.a + c.ct * fixed) } else { (c.ct, c.a + c.cs * fixed) };
                let need = margin * c.norm();
                if coef > 0.0 {
                    lo = lo.max((need - rest) / coef);
                } else if coef < 0.0 {
                    hi = hi.min((need - rest) / coef);
                }
            }
            (lo, hi)
        };
        for _ in 0..12 {
            let (x0, y0) = (x, y);
            let (lo, hi) = line_bounds(y, true);
            if lo < hi {
                x = minimize_scan_golden(&|v| phi(v, y), lo, hi);
            }
            let (lo, hi) = line_bounds(x, false);
            if lo < hi {
                y = minimize_scan_golden(&|v| phi(x, v), lo, hi);
            }
            if (x - x0).abs() + (y - y0).abs() < 1e-7 {
                break;
            }
        }
        Ok((x, y))
    }

    fn tail_box(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        let g = |u: f64, v: f64| self.ln_f(Complex64::new(x, u), Complex64::new(y, v)).re;
        let mut peak = g(0.0, 0.0);
        let rays = 36;
        let step = 0.5;
        let mut ts: f64 = 2.0;
        let mut tt: f64 = 2.0;
        for _pass in 0..2 {
            for k in 0..rays {
                let th = 2.0 * PI * k as f64 / rays as f64;
                let (dc, ds) = (th.cos(), th.sin());
                let mut rho = 0.0;
                let mut run = 0.0;
                loop {
                    rho += step;
                    let v = g(rho * dc, rho * ds);
                    if v.is_nan() {
                        return Err(Error::NonConvergence("bivariate integrand not finite".into()));
                    }
                    peak = peak.max(v);
                    if v < peak - TAIL_DROP {
                        run += step;
                        if run >= 2.0 {
                            break;
                        }
                    } else {
                        run = 0.0;
                    }
                    if rho > 3000.0 {
                        return Err(Error::NonConvergence("bivariate integrand does not decay".into()));
                    }
                }
                ts = ts.max(rho * dc.abs());
                tt = tt.max(rho * ds.abs());
            }
        }
        ts += 1.0;
        tt += 1.0;
        for _ in 0..10 {
            let mut worst = f64::NEG_INFINITY;
            let ns = (ts / 0.5).ceil() as i64;
            let nt = (tt / 0.5).ceil() as i64;
            for i in -ns..=ns {
                let u = i as f64 * ts / ns as f64;
                worst = worst.max(g(u, tt)).max(g(u, -tt));
            }
            for i in -nt..=nt {
                let v = i as f64 * tt / nt as f64;
                worst = worst.max(g(ts, v)).max(g(-ts, v));
            }
            if worst < peak - TAIL_DROP + 2.0 {
                return Ok((ts, tt, peak));
            }
            ts *= 1.3;
            tt *= 1.3;
        }
        Err(Error::NonConvergence("could not bound the bivariate contour box".into()))
    }

    #[allow(clippy::too_many_arguments)]
    fn quadrature(&self, x: f64, y: f64, ts: f64, tt: f64, ws: f64, wt: f64, d: f64, peak: f64) -> (Complex64, usize) {
        let sp = self.split();
        let s_nodes = gl_nodes(ts, ws, d);
        let t_nodes = gl_nodes(tt, wt, d);
        let zero = Complex64::new(0.0, 0.0);
        let t_pts: Vec<(Complex64, Complex64, f64)> = t_nodes
            .iter()
            .map(|&(v, w)| {
                let t = Complex64::new(y, v);
                let mut l = t * self.ln_y;
                for f in &sp.t_only {
                    l += f.ln_at(zero, t);
                }
                (t, l, w)
            })
            .collect();
        let rows: Vec<Complex64> = s_nodes
            .par_iter()
            .map(|&(u, wu)| {
                let s = Complex64::new(x, u);
                let mut la = s * self.ln_x;
                for f in &sp.s_only {
                    la += f.ln_at(s, zero);
                }
                for g in &self.s_series {
                    la += g.ln_at(s);
                }
                la -= peak;
                let mut row = Complex64::new(0.0, 0.0);
                for &(t, lb, wv) in &t_pts {
                    let mut l = la + lb;
                    for f in &sp.joint {
                        l += f.ln_at(s, t);
                    }
                    if l.re > -745.0 {
                        row += l.exp() * wv;
                    }
                }
                row * wu
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in rows {
            acc += r;
        }
        (acc, s_nodes.len() * t_nodes.len())
    }

    /// Integrate over the product contour.
    pub fn integrate(&self, cs: &ContourSpec, ct: &ContourSpec) -> Result<MbOutcome> {
        cs.validate()?;
        ct.validate()?;
        let (x, y) = if cs.adaptive && ct.adaptive {
            self.choose_abscissas()?
        } else {
            let (x, y) = (cs.abscissa, ct.abscissa);
            for c in self.constraints() {
                if c.eval(x, y) <= 0.0 {
                    return Err(Error::Infeasible(format!("abscissas ({x}, {y}) violate a pole separation")));
                }
            }
            (x, y)
        };
        let (ts_auto, tt_auto, peak) = self.tail_box(x, y)?;
        let ts = if cs.half_height > 0.0 { cs.half_height } else { ts_auto };
        let tt = if ct.half_height > 0.0 { ct.half_height } else { tt_auto };
        let mut ws = cs.panel_width();
        let mut wt = ct.panel_width();
        let mut d = self
            .constraints()
            .iter()
            .filter(|c| c.norm() > 0.0)
            .map(|c| c.eval(x, y) / c.norm())
            .fold(f64::INFINITY, f64::min);
        let rel_tol = cs.rel_tol.min(ct.rel_tol);
        let max_ref = cs.max_refinements.min(ct.max_refinements);
        let norm = peak.exp() / (4.0 * PI * PI);
        let mut prev: Option<Complex64> = None;
        let mut nodes = 0;
        for level in 0..=max_ref {
            let (sum, n) = self.quadrature(x, y, ts, tt, ws, wt, d, peak);
            nodes += n;
            let val = sum * norm;
            if let Some(p) = prev {
                let delta = (val.re - p.re).abs();
                let floor = 256.0 * f64::EPSILON * norm * 4.0 * ts * tt;
                if delta <= rel_tol * val.re.abs() + floor {
                    return finish(val, delta.max(floor), (x, y), (ts, tt), nodes, level, self.ln_scale);
                }
                if level == max_ref {
                    if delta <= (CANCELLATION_LIMIT * norm * 4.0 * ts * tt).max(LAST_LEVEL_REL * val.re.abs()) {
                        return finish(val, delta, (x, y), (ts, tt), nodes, level, self.ln_scale);
                    }
                    return Err(Error::NonConvergence(format!(
                        "double contour quadrature: refinements differ by {delta:e} for value {:e}",
                        val.re
                    )));
                }
            }
            prev = Some(val);
            ws *= 0.5;
            wt *= 0.5;
            d *= 0.5;
        }
        unreachable!("refinement loop returns")
    }
}

fn solve_center(rows: &[Constraint; 3]) -> Option<(f64, f64, f64)> {
    // n·p − r|n| = −a for each row.
    let m: Vec<[f64; 3]> = rows.iter().map(|c| [c.cs, c.ct, -c.norm()]).collect();
    let rhs: Vec<f64> = rows.iter().map(|c| -c.a).collect();
    let det = |a: &[[f64; 3]]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mm = [m[0], m[1], m[2]];
    let d = det(&mm);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut sol = [0.0; 3];
    for col in 0..3 {
        let mut a = mm;
        for row in 0..3 {
            a[row][col] = rhs[row];
        }
        sol[col] = det(&a) / d;
    }
    Some((sol[0], sol[1], sol[2]))
}

/// Parameters of a univariate Fox H-function H^{m,n}_{p,q}.
#[derive(Debug, Clone, PartialEq)]
pub struct FoxHSpec {
    pub m: usize,
    pub n: usize,
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
}

impl FoxHSpec {
    pub fn new(m: usize, n: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Result<Self> {
        let spec = FoxHSpec { m, n, upper, lower };
        spec.validate()?;
        Ok(spec)
    }

    /// Meijer G^{m,n}_{p,q} as a Fox H-function with unit exponents.
    pub fn meijer(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        FoxHSpec::new(m, n, a.iter().map(|&x| (x, 1.0)).collect(), b.iter().map(|&x| (x, 1.0)).collect())
    }

    pub fn p(&self) -> usize {
        self.upper.len()
    }

    pub fn q(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > self.p() || self.m > self.q() {
            return Err(Error::Parameter(format!(
                "orders m = {}, n = {} exceed q = {}, p = {}",
                self.m,
                self.n,
                self.q(),
                self.p()
            )));
        }
        if self.upper.iter().chain(&self.lower).any(|&(v, e)| !(e > 0.0) || !v.is_finite() || !e.is_finite()) {
            return Err(Error::Parameter("all exponents must be finite and strictly positive".into()));
        }
        Ok(())
    }

    pub fn is_meijer(&self) -> bool {
        self.upper.iter().chain(&self.lower).all(|&(_, e)| e == 1.0)
    }

    /// Contour integrand at argument `z`.
    pub fn integrand(&self, z: f64) -> Integrand1 {
        let mut factors = Vec::with_capacity(self.p() + self.q());
        for (j, &(b, bb)) in self.lower.iter().enumerate() {
            if j < self.m {
                factors.push(GammaFactor::num(b, bb));
            } else {
                factors.push(GammaFactor::den(1.0 - b, -bb));
            }
        }
        for (i, &(a, aa)) in self.upper.iter().enumerate() {
            if i < self.n {
                factors.push(GammaFactor::num(1.0 - a, -aa));
            } else {
                factors.push(GammaFactor::den(a, aa));
            }
        }
        Integrand1 { factors, series: vec![], ln_x: -z.ln(), ln_scale: 0.0 }
    }

    /// Admissible abscissa interval.
    pub fn feasible_interval(&self) -> Result<(f64, f64)> {
        self.validate()?;
        self.integrand(1.0).feasible_interval()
    }
}

/// Fox H-function H^{m,n}_{p,q}[z].
pub fn fox_h(spec: &FoxHSpec, z: f64, contour: &ContourSpec) -> Result<MetricResult> {
    spec.validate()?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("fox_h requires finite z > 0, got {z}")));
    }
    Ok(spec.integrand(z).integrate(contour)?.into_metric())
}

/// Meijer G-function; `spec` must have unit exponents.
pub fn meijer_g(spec: &FoxHSpec, z: f64) -> Result<MetricResult> {
    if !spec.is_meijer() {
        return Err(Error::Parameter("meijer_g requires all exponents equal to 1".into()));
    }
    fox_h(spec, z, &ContourSpec::default())
}

/// Parameters of the two-variable Fox H-function
/// H^{0,n1:m2,n2:m3,n3}_{p1,q1:p2,q2:p3,q3}[x, y].
///
/// The joint upper triples (a; α, A) contribute Γ(1 − a + α s + A t) for the
/// first `n1` and 1/Γ(a − α s − A t) for the rest; joint lower triples
/// (b; β, B) contribute 1/Γ(1 − b + β s + B t). Each single-variable group
/// (c, γ) / (d, δ) contributes Γ(d − δ s) for the first `m` lower pairs,
/// Γ(1 − c + γ s) for the first `n` upper pairs, and reciprocal gammas
/// Γ(1 − d + δ s), Γ(c − γ s) for the remainder.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariateFoxHSpec {
    pub n1: usize,
    pub joint_upper: Vec<(f64, f64, f64)>,
    pub joint_lower: Vec<(f64, f64, f64)>,
    pub m2: usize,
    pub n2: usize,
    pub x_upper: Vec<(f64, f64)>,
    pub x_lower: Vec<(f64, f64)>,
    pub m3: usize,
    pub n3: usize,
    pub y_upper: Vec<(f64, f64)>,
    pub y_lower: Vec<(f64, f64)>,
}

impl BivariateFoxHSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |v: &[(f64, f64)]| v.iter().any(|&(p, e)| !(e > 0.0) || !p.is_finite() || !e.is_finite());
        let badj = |v: &[(f64, f64, f64)]| {
            v.iter().any(|&(p, e1, e2)| !(e1 > 0.0) || !(e2 > 0.0) || !p.is_finite() || !e1.is_finite() || !e2.is_finite())
        };
        if self.n1 > self.joint_upper.len()
            || self.m2 > self.x_lower.len()
            || self.n2 > self.x_upper.len()
            || self.m3 > self.y_lower.len()
            || self.n3 > self.y_upper.len()
        {
            return Err(Error::Parameter("group orders exceed group lengths".into()));
        }
        if bad(&self.x_upper) || bad(&self.x_lower) || bad(&self.y_upper) || bad(&self.y_lower) {
            return Err(Error::Parameter("all exponent coefficients must be > 0".into()));
        }
        if badj(&self.joint_upper) || badj(&self.joint_lower) {
            return Err(Error::Parameter("joint coupling coefficients must be finite and > 0".into()));
        }
        Ok(())
    }

    fn group(m: usize, n: usize, upper: &[(f64, f64)], lower: &[(f64, f64)], out: &mut Vec<GammaFactor>) {
        for (j, &(d, dd)) in lower.iter().enumerate() {
            if j < m {
                out.push(GammaFactor::num(d, -dd));
            } else {
                out.push(GammaFactor::den(1.0 - d, dd));
            }
        }
        for (j, &(c, cc)) in upper.iter().enumerate() {
            if j < n {
                out.push(GammaFactor::num(1.0 - c, cc));
            } else {
                out.push(GammaFactor::den(c, -cc));
            }
        }
    }

    /// Contour integrand at (x, y).
    pub fn integrand(&self, x: f64, y: f64) -> Integrand2 {
        let mut factors = Vec::new();
        for (j, &(a, al, aa)) in self.joint_upper.iter().enumerate() {
            if j < self.n1 {
                factors.push(GammaFactor::num2(1.0 - a, al, aa));
            } else {
                factors.push(GammaFactor::den2(a, -al, -aa));
            }
        }
        for &(b, be, bb) in &self.joint_lower {
            factors.push(GammaFactor::den2(1.0 - b, be, bb));
        }
        Self::group(self.m2, self.n2, &self.x_upper, &self.x_lower, &mut factors);
        let mut ys = Vec::new();
        Self::group(self.m3, self.n3, &self.y_upper, &self.y_lower, &mut ys);
        factors.extend(ys.into_iter().map(GammaFactor::on_t));
        Integrand2 { factors, s_series: vec![], ln_x: x.ln(), ln_y: y.ln(), ln_scale: 0.0 }
    }
}

/// Two-variable Fox H-function H[x, y].
pub fn fox_h2(
    spec: &BivariateFoxHSpec,
    x: f64,
    y: f64,
    contour_x: &ContourSpec,
    contour_y: &ContourSpec,
) -> Result<MetricResult> {
    spec.validate()?;
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("fox_h2 requires finite x, y > 0; got ({x}, {y})")));
    }
    Ok(spec.integrand(x, y).integrate(contour_x, contour_y)?.into_metric())
}

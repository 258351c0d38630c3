//! Eigenvalue location from boundary conditions at finite x_max.
//!
//! K(x_max; E) = 0 pins a sharp upper bound on a level, L(x_max; E) = 0 a
//! lower bound. Levels are identified by node count (Sturm-Liouville), roots
//! refined by bisection plus safeguarded secant. Parity-non-invariant
//! problems impose K(x_min) = K(x_max) = 0 simultaneously.

use rug::ops::CompleteRound;
use rug::Float;

use crate::big::{self, BigReal};
use crate::error::SolverError;
use crate::gauge::optimal_linear_gauge;
use crate::model::{GaugeFunction, Problem};
use crate::series::{
    count_nodes_raw, evaluate_series, InitialData, Parity, SeriesEngine, SeriesSolution,
};

/// Series truncation order: fixed or tail-criterion driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSpec {
    Auto,
    Fixed(usize),
}

/// Working precision: fixed decimal digits or pilot-run driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionSpec {
    Auto,
    Digits(u32),
}

/// Gauge choice: optimal linear family or an explicit gauge.
#[derive(Debug, Clone)]
pub enum GaugeSpec {
    Auto,
    Fixed(GaugeFunction),
}

/// Energy-scan controls for level bracketing.
#[derive(Debug, Clone, Default)]
pub struct ScanConfig {
    /// Scan start; defaults to a harmonic/well estimate below the level.
    pub start: Option<BigReal>,
    /// Scan step; defaults to (effective level spacing)/8.
    pub step: Option<BigReal>,
    /// Cap on scan steps before giving up.
    pub max_steps: usize,
}

/// Everything a solve needs besides the problem and the level index.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub x_max: BigReal,
    /// Present for parity-non-invariant problems; must be negative.
    pub x_min: Option<BigReal>,
    pub order: OrderSpec,
    pub precision: PrecisionSpec,
    pub gauge: GaugeSpec,
    /// Relative tolerance on E; defaults to 10^-(target_digits + 2).
    pub root_tol: Option<BigReal>,
    /// One knob driving x_max/order/precision selection when those are auto.
    pub target_digits: u32,
    /// Grid size for node counting.
    pub grid_samples: usize,
    pub scan: ScanConfig,
    /// Hard cap for auto order growth.
    pub max_order: usize,
    /// Ceiling on auto-selected working precision (digits); explicit
    /// precision requests are not clamped.
    pub max_precision: Option<u32>,
}

impl SolveConfig {
    pub fn new(x_max: BigReal) -> Self {
        Self {
            x_max,
            x_min: None,
            order: OrderSpec::Auto,
            precision: PrecisionSpec::Auto,
            gauge: GaugeSpec::Auto,
            root_tol: None,
            target_digits: 30,
            grid_samples: 96,
            scan: ScanConfig {
                start: None,
                step: None,
                max_steps: 512,
            },
            max_order: 40_000,
            max_precision: None,
        }
    }
}

/// Upper/lower eigenvalue bounds with full provenance.
#[derive(Debug, Clone)]
pub struct EigenvalueResult {
    pub level: usize,
    pub e_upper: BigReal,
    pub e_lower: BigReal,
    pub e_mid: BigReal,
    pub gap: BigReal,
    pub nodes: usize,
    pub order_used: usize,
    pub precision_used: u32,
    pub gauge_used: GaugeFunction,
    pub x_max: BigReal,
    /// Cancellation measured in K(x_max) at E_mid.
    pub est_lost_digits: f64,
    /// Digits supported by both the bound gap and the cancellation budget.
    pub claimed_digits: u32,
}

impl EigenvalueResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "level": self.level,
            "e_upper": big::dec_string(&self.e_upper),
            "e_lower": big::dec_string(&self.e_lower),
            "e_mid": big::dec_string(&self.e_mid),
            "e_mid_claimed": big::dec_string_digits(&self.e_mid, self.claimed_digits.max(1) as usize),
            "gap": format!("{:e}", self.gap.to_f64()),
            "nodes": self.nodes,
            "order": self.order_used,
            "precision": self.precision_used,
            "gauge": self.gauge_used.to_json(),
            "x_max": big::dec_string(&self.x_max),
            "est_lost_digits": format!("{:.1}", self.est_lost_digits),
            "claimed_digits": self.claimed_digits,
        })
    }
}

// ---------------------------------------------------------------------------
// Root refinement
// ---------------------------------------------------------------------------

/// Refine a root of `f` inside a straddling bracket to relative width `tol`.
///
/// Bisection narrows the bracket to 1e-3 relative, then secant iterates
/// (clamped into the bracket, bisection fallback) converge superlinearly;
/// no analytic dE-derivative is needed. `precision_digits` guards against
/// tolerances below the arithmetic floor.
pub fn refine_root<F>(
    mut f: F,
    bracket: (&BigReal, &BigReal),
    tol: &BigReal,
    precision_digits: u32,
) -> Result<BigReal, SolverError>
where
    F: FnMut(&BigReal) -> Result<BigReal, SolverError>,
{
    let prec = bracket.0.prec().max(bracket.1.prec());
    let floor = big::ten_pow(prec, -(precision_digits.saturating_sub(10) as i32));
    if *tol < floor {
        return Err(SolverError::TolBelowPrecisionFloor {
            tol: format!("{:e}", tol.to_f64()),
            digits: precision_digits,
        });
    }
    let mut a = Float::with_val(prec, bracket.0);
    let mut b = Float::with_val(prec, bracket.1);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut fa = f(&a)?;
    let mut fb = f(&b)?;
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.is_sign_negative() == fb.is_sign_negative() {
        return Err(SolverError::NonStraddlingBracket);
    }
    let scale = |a: &Float, b: &Float| -> Float {
        let s = a.clone().abs().max(&b.clone().abs());
        s.max(&Float::with_val(prec, 1e-300))
    };
    // bisection to 1e-3 relative
    let coarse = Float::with_val(prec, 1e-3);
    loop {
        let width = (&b - &a).complete(prec);
        if width <= &coarse * scale(&a, &b) {
            break;
        }
        let mid = (&a + &b).complete(prec) / 2u32;
        let fm = f(&mid)?;
        if fm.is_zero() {
            return Ok(mid);
        }
        if fm.is_sign_negative() == fa.is_sign_negative() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    // safeguarded secant on iterates
    let mut x0 = a.clone();
    let mut f0 = fa.clone();
    let mut x1 = b.clone();
    let mut f1 = fb.clone();
    let mut small_steps = 0u32;
    for _ in 0..1200 {
        let s = scale(&a, &b);
        let tol_abs = (tol * &s).complete(prec);
        if (&b - &a).complete(prec) <= tol_abs {
            return Ok((a + b) / 2u32);
        }
        let mut x2 = if f1 != f0 {
            let denom = (&f1 - &f0).complete(prec);
            x1.clone() - (&f1 * (&x1 - &x0).complete(prec)) / denom
        } else {
            (&a + &b).complete(prec) / 2u32
        };
        if !(x2 > a && x2 < b) {
            x2 = (&a + &b).complete(prec) / 2u32;
        }
        let step = (&x2 - &x1).complete(prec).abs();
        let f2 = f(&x2)?;
        if f2.is_zero() {
            return Ok(x2);
        }
        if f2.is_sign_negative() == fa.is_sign_negative() {
            a = x2.clone();
            fa = f2.clone();
        } else {
            b = x2.clone();
            fb = f2.clone();
        }
        let _ = &fb;
        x0 = std::mem::replace(&mut x1, x2);
        f0 = std::mem::replace(&mut f1, f2);
        if step <= (tol_abs / 4u32) {
            small_steps += 1;
            if small_steps >= 2 {
                return Ok(x1);
            }
        } else {
            small_steps = 0;
        }
    }
    Ok((a + b) / 2u32)
}

// ---------------------------------------------------------------------------
// Coarse structure of the potential (f64 level estimates)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub(crate) struct WellInfo {
    #[allow(dead_code)]
    pub x_well: f64,
    pub v_min: f64,
    pub omega: f64,
    pub double_well: bool,
}

pub(crate) fn well_info(problem: &Problem) -> WellInfo {
    let v = problem.potential();
    let lead = v.leading_coeff().to_f64();
    let two_l = v.degree() as u32;
    // search range: where the leading term dominates everything else tenfold
    let mut x_hi: f64 = 2.0;
    for (j, c) in v.iter() {
        if j < two_l {
            let c = c.to_f64().abs();
            if c > 0.0 {
                x_hi = x_hi.max((10.0 * (1.0 + c) / lead).powf(1.0 / (two_l - j) as f64) + 1.0);
            }
        }
    }
    let mut best_x = 0.0;
    let mut best_v = v.eval_f64(0.0);
    let steps = 4096;
    for i in 0..=steps {
        let x = x_hi * i as f64 / steps as f64;
        let val = v.eval_f64(x);
        if val < best_v {
            best_v = val;
            best_x = x;
        }
    }
    // ternary-search refinement around the best cell
    let mut lo = (best_x - 2.0 * x_hi / steps as f64).max(0.0);
    let mut hi = best_x + 2.0 * x_hi / steps as f64;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if v.eval_f64(m1) < v.eval_f64(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x_well = 0.5 * (lo + hi);
    let v_min = v.eval_f64(x_well);
    let m = problem.mass().to_f64();
    let hbar = problem.hbar().to_f64();
    let vpp = v.derivative().derivative().eval_f64(x_well);
    // characteristic scale of the leading power as a fallback for flat wells
    let l = problem.l() as f64;
    let e_char = lead.powf(1.0 / (l + 1.0)) * (hbar * hbar / (2.0 * m)).powf(l / (l + 1.0));
    let omega_lead = (e_char / hbar).max(1e-12);
    let omega_quad = if vpp > 0.0 { (vpp / m).sqrt() } else { 0.0 };
    let omega = omega_quad.max(0.5 * omega_lead);
    let double_well = x_well > 1e-6 && v.eval_f64(0.0) > v_min + 1e-12;
    WellInfo {
        x_well,
        v_min,
        omega,
        double_well,
    }
}

/// Harmonic/well estimate of the level-n energy (scan seed only).
pub fn estimate_level_energy(problem: &Problem, n: usize) -> f64 {
    let w = well_info(problem);
    let hbar = problem.hbar().to_f64();
    let k = if w.double_well { n / 2 } else { n };
    w.v_min + hbar * w.omega * (k as f64 + 0.5)
}

// ---------------------------------------------------------------------------
// Automatic order / precision
// ---------------------------------------------------------------------------

/// Smallest order N whose last 10 terms |K_n x_max^n| each fall below
/// 10^-(target_digits+5) relative to the running max term, evaluated at
/// `e_estimate`.
pub fn auto_order(
    problem: &Problem,
    gauge: &GaugeFunction,
    e_estimate: &BigReal,
    x_max: &BigReal,
    precision_digits: u32,
    target_digits: u32,
    cap: usize,
) -> Result<usize, SolverError> {
    let engine = SeriesEngine::new(problem, gauge, InitialData::even(big::bits_for_digits(precision_digits)), precision_digits);
    let prec = engine.prec_bits();
    let e = Float::with_val(prec, e_estimate);
    let x = Float::with_val(prec, x_max);
    let lx = big::log10_abs(&x);
    let threshold = -((target_digits + 5) as f64);
    let mut l = vec![engine.init().l0().clone()];
    let mut k = vec![engine.init().k0().clone()];
    let mut run_max = f64::NEG_INFINITY;
    let mut streak = 0u32;
    let mut checked = 0usize;
    let mut order = 64usize;
    loop {
        engine.extend(&e, &mut l, &mut k, order.min(cap));
        while checked < k.len() {
            let n = checked;
            let t = if k[n].is_zero() {
                f64::NEG_INFINITY
            } else {
                big::log10_abs(&k[n]) + n as f64 * lx
            };
            if t > run_max {
                run_max = t;
            }
            if n >= 1 {
                if t - run_max <= threshold {
                    streak += 1;
                    if streak >= 10 {
                        return Ok(n);
                    }
                } else {
                    streak = 0;
                }
            }
            checked += 1;
        }
        if order >= cap {
            return Err(SolverError::OrderCapExceeded { cap });
        }
        order = (order * 3 / 2).min(cap);
    }
}

/// Predicted cancellation (decimal digits) from the asymptotic magnitude of
/// K(x_max): WKB exponent plus |∫G|, both over ħ ln 10.
pub(crate) fn formula_cancellation(problem: &Problem, gauge: &GaugeFunction, x_max: &BigReal) -> f64 {
    let prec = x_max.prec();
    let l = problem.l();
    let sqrt_lead = problem.sqrt_two_m_leading(prec).to_f64();
    let x = x_max.to_f64();
    let hbar = problem.hbar().to_f64();
    let wkb = sqrt_lead * x.powi(l as i32 + 1) / ((l + 1) as f64 * hbar);
    let int_g = gauge.integral_value(x_max).to_f64().abs() / hbar;
    (wkb + int_g) / std::f64::consts::LN_10
}

/// Working precision for `target_digits` significant digits.
///
/// The max term of the series at x_max is measured in a pilot run at the
/// well-estimate energy; the asymptotic magnitude of K(x_max) at an
/// eigenvalue, exp((-WKB integral - int G)/hbar), supplies the value scale.
/// Their gap is the cancellation to budget for:
/// P = target + ceil(lost) + 10 guard digits.
pub fn auto_precision(
    problem: &Problem,
    gauge: &GaugeFunction,
    x_max: &BigReal,
    target_digits: u32,
) -> Result<u32, SolverError> {
    let predicted = formula_cancellation(problem, gauge, x_max);
    let p0 = target_digits + predicted.ceil().max(0.0) as u32 + 10;
    let prec0 = big::bits_for_digits(p0);
    let e_est = Float::with_val(prec0, estimate_level_energy(problem, 0));
    let x = Float::with_val(prec0, x_max);
    let order = auto_order(
        problem,
        gauge,
        &e_est,
        &x,
        p0,
        target_digits.min(p0.saturating_sub(12)),
        200_000,
    )?;
    let engine = SeriesEngine::new(problem, gauge, InitialData::even(prec0), p0);
    let (_, k) = engine.coefficients(&e_est, order);
    let eval = evaluate_series(&k, &x);
    let max_term = if eval.max_term_log10.is_finite() {
        eval.max_term_log10.max(0.0)
    } else {
        0.0
    };
    // recessive value scale of K(x_max) at an eigenvalue
    let l = problem.l();
    let hbar = problem.hbar().to_f64();
    let wkb = problem.sqrt_two_m_leading(prec0).to_f64() * x_max.to_f64().powi(l as i32 + 1)
        / ((l + 1) as f64 * hbar);
    let int_g = gauge.integral_value(&x).to_f64() / hbar;
    let v23 = (-wkb - int_g) / std::f64::consts::LN_10;
    let lost = (max_term - v23).max(0.0);
    let p = target_digits + lost.ceil() as u32 + 10;
    Ok(p.max(target_digits + 16))
}


// ---------------------------------------------------------------------------
// Resolved solve state
// ---------------------------------------------------------------------------

pub(crate) struct Resolved {
    pub problem: Problem,
    pub gauge: GaugeFunction,
    pub digits: u32,
    pub order: usize,
    pub x_max: BigReal,
    pub tol: BigReal,
    pub grid_samples: usize,
    pub scan: ScanConfig,
    pub engine_even: SeriesEngine,
    pub engine_odd: SeriesEngine,
}

impl Resolved {
    pub fn engine(&self, parity: Parity) -> &SeriesEngine {
        match parity {
            Parity::Odd => &self.engine_odd,
            _ => &self.engine_even,
        }
    }

    pub fn k_coeffs(&self, parity: Parity, e: &BigReal) -> Vec<BigReal> {
        let (_, k) = self.engine(parity).coefficients(e, self.order);
        k
    }

}

fn sector_parity(n: usize) -> Parity {
    if n % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Expected K-node count on (0, x_max) for global level n in its sector.
fn expected_nodes(n: usize) -> usize {
    n / 2
}

pub(crate) fn resolve(problem: &Problem, config: &SolveConfig, n: usize) -> Result<Resolved, SolverError> {
    if !(config.x_max.is_sign_positive() && !config.x_max.is_zero()) {
        return Err(SolverError::Config("x_max must be positive".into()));
    }
    // gauge first (precision and order depend on it)
    let probe_prec = big::bits_for_digits(40);
    let gauge = match &config.gauge {
        GaugeSpec::Fixed(g) => g.clone(),
        GaugeSpec::Auto => {
            let x = Float::with_val(probe_prec, &config.x_max);
            GaugeFunction::linear(optimal_linear_gauge(problem, &x))
        }
    };
    let digits = match config.precision {
        PrecisionSpec::Digits(d) => d.max(big::MIN_DIGITS),
        PrecisionSpec::Auto => {
            let d = auto_precision(problem, &gauge, &config.x_max, config.target_digits)?;
            match config.max_precision {
                Some(cap) => d.min(cap.max(big::MIN_DIGITS)),
                None => d,
            }
        }
    };
    let prec = big::bits_for_digits(digits);
    let tol = match &config.root_tol {
        Some(t) => Float::with_val(prec, t),
        None => big::ten_pow(prec, -(config.target_digits as i32 + 2)),
    };
    let floor = big::ten_pow(prec, -(digits.saturating_sub(10) as i32));
    if tol < floor {
        return Err(SolverError::TolBelowPrecisionFloor {
            tol: format!("{:e}", tol.to_f64()),
            digits,
        });
    }
    let x_max = Float::with_val(prec, &config.x_max);
    let order = match config.order {
        OrderSpec::Fixed(o) => o,
        OrderSpec::Auto => {
            // probe at a detuned energy: at an exact eigenvalue the series can
            // terminate and underestimate the order needed off-eigenvalue
            let w = well_info(problem);
            let e_probe = estimate_level_energy(problem, n)
                + 0.25 * problem.hbar().to_f64() * w.omega;
            auto_order(
                problem,
                &gauge,
                &Float::with_val(prec, e_probe),
                &x_max,
                digits,
                digits.saturating_sub(10),
                config.max_order,
            )?
        }
    };
    let engine_even = SeriesEngine::new(problem, &gauge, InitialData::even(prec), digits);
    let engine_odd = SeriesEngine::new(problem, &gauge, InitialData::odd(prec), digits);
    Ok(Resolved {
        problem: problem.clone(),
        gauge,
        digits,
        order,
        x_max,
        tol,
        grid_samples: config.grid_samples,
        scan: config.scan.clone(),
        engine_even,
        engine_odd,
    })
}

// ---------------------------------------------------------------------------
// Level bracketing by node count
// ---------------------------------------------------------------------------

fn scan_state(res: &Resolved, parity: Parity, e: &BigReal) -> Result<(usize, bool), SolverError> {
    let k = res.k_coeffs(parity, e);
    let prec = res.x_max.prec();
    let zero = Float::with_val(prec, 0);
    let nodes = count_nodes_raw(&k, &zero, &res.x_max, res.grid_samples)?;
    let v = evaluate_series(&k, &res.x_max).value;
    Ok((nodes, v.is_sign_negative()))
}

fn scan_bracket(res: &Resolved, n: usize) -> Result<(BigReal, BigReal), SolverError> {
    let parity = sector_parity(n);
    let k_target = expected_nodes(n);
    let prec = big::bits_for_digits(res.digits);
    let w = well_info(&res.problem);
    let hbar = res.problem.hbar().to_f64();
    let mut step = match &res.scan.step {
        Some(s) => Float::with_val(prec, s),
        None => Float::with_val(prec, (hbar * w.omega / 8.0).max(1e-8)),
    };
    let mut e = match &res.scan.start {
        Some(s) => Float::with_val(prec, s),
        None => {
            Float::with_val(
                prec,
                estimate_level_energy(&res.problem, n) - 0.55 * hbar * w.omega,
            )
        }
    };
    // rewind if we started above the target level
    let (mut count, mut sign) = scan_state(res, parity, &e)?;
    let mut rewinds = 0;
    while count > k_target && rewinds < 64 {
        e -= (&step).clone() * 4u32;
        let s = scan_state(res, parity, &e)?;
        count = s.0;
        sign = s.1;
        rewinds += 1;
    }
    if count > k_target {
        return Err(SolverError::ScanExhausted {
            ceiling: big::dec_string_digits(&e, 10),
            level: n,
        });
    }
    let mut steps = 0usize;
    loop {
        if steps >= res.scan.max_steps {
            return Err(SolverError::ScanExhausted {
                ceiling: big::dec_string_digits(&e, 10),
                level: n,
            });
        }
        let e_next = (&e + &step).complete(prec);
        let (count_next, sign_next) = scan_state(res, parity, &e_next)?;
        if count_next > k_target {
            if count_next == k_target + 1 && count == k_target && sign_next != sign {
                return Ok((e, e_next));
            }
            // stepped over more than one level (or missed a node): refine
            step /= 2u32;
            if step.clone() / Float::with_val(prec, hbar * w.omega) < 1e-14 {
                return Err(SolverError::ScanExhausted {
                    ceiling: big::dec_string_digits(&e_next, 10),
                    level: n,
                });
            }
            steps += 1;
            continue;
        }
        e = e_next;
        count = count_next;
        sign = sign_next;
        steps += 1;
    }
}

/// Energy interval across which the sector node count steps from the
/// level-n count to the level-(n+1) count and sign(K(x_max)) flips.
pub fn bracket_level(
    problem: &Problem,
    config: &SolveConfig,
    n: usize,
) -> Result<(BigReal, BigReal), SolverError> {
    let res = resolve(problem, config, n)?;
    scan_bracket(&res, n)
}

// ---------------------------------------------------------------------------
// Symmetric solve
// ---------------------------------------------------------------------------

/// Locate level n of a parity-symmetric problem: E_upper from K(x_max)=0,
/// E_lower from L(x_max)=0, node-count verified.
pub fn solve_level(
    problem: &Problem,
    config: &SolveConfig,
    n: usize,
) -> Result<EigenvalueResult, SolverError> {
    if !problem.potential().is_even_fn() {
        return Err(SolverError::Config(
            "potential is not parity-symmetric; use solve_asymmetric".into(),
        ));
    }
    let res = resolve(problem, config, n)?;
    solve_level_resolved(&res, n)
}

pub(crate) fn solve_level_resolved(
    res: &Resolved,
    n: usize,
) -> Result<EigenvalueResult, SolverError> {
    let parity = sector_parity(n);
    let prec = big::bits_for_digits(res.digits);
    let (e_lo, e_hi) = scan_bracket(res, n)?;
    let engine = res.engine(parity);
    let order = res.order;
    let x_max = &res.x_max;
    let k_val = |e: &BigReal| -> Result<BigReal, SolverError> {
        let (_, k) = engine.coefficients(e, order);
        Ok(evaluate_series(&k, x_max).value)
    };
    let l_val = |e: &BigReal| -> Result<BigReal, SolverError> {
        let (l, _) = engine.coefficients(e, order);
        Ok(evaluate_series(&l, x_max).value)
    };
    let e_upper = refine_root(k_val, (&e_lo, &e_hi), &res.tol, res.digits)?;
    // The L-root sits just below the K-root, but the two truncated series
    // displace their roots independently, so the upper end of the L-bracket
    // is padded adaptively until it straddles (the pad stays far below the
    // level spacing).
    let tol_abs = &res.tol * e_upper.clone().abs().max(&Float::with_val(prec, 1));
    let l_at_lo = l_val(&e_lo)?;
    let mut l_bracket = None;
    for factor in [3.0, 1e3, 1e7, 1e12, 1e18, 1e24] {
        let l_hi = &e_upper + Float::with_val(prec, factor) * &tol_abs;
        let v = l_val(&l_hi)?;
        if v.is_sign_negative() != l_at_lo.is_sign_negative() {
            l_bracket = Some(l_hi);
            break;
        }
    }
    let l_hi = l_bracket.ok_or(SolverError::NonStraddlingBracket)?;
    let e_lower = refine_root(l_val, (&e_lo, &l_hi), &res.tol, res.digits)?;
    let e_lower = if e_lower > e_upper {
        e_upper.clone()
    } else {
        e_lower
    };
    let e_mid: Float = ((&e_upper + &e_lower).complete(prec)) / 2u32;
    let gap = (&e_upper - &e_lower).complete(prec);
    // node-count verification strictly below the K-root (the count steps
    // exactly at the root, and K(x_max) there is refinement noise)
    let off = (&res.tol * e_upper.clone().abs().max(&Float::with_val(prec, 1)))
        * Float::with_val(prec, 100);
    let e_count = e_mid.clone().min(&(-(off - &e_upper)));
    let k_mid = res.k_coeffs(parity, &e_count);
    let zero = Float::with_val(prec, 0);
    let nodes = count_nodes_raw(&k_mid, &zero, x_max, res.grid_samples)?;
    if nodes != expected_nodes(n) {
        return Err(SolverError::NodeCountMismatch {
            level: n,
            expected: expected_nodes(n),
            found: nodes,
        });
    }
    let eval = evaluate_series(&k_mid, x_max);
    let lost = eval.est_lost_digits;
    if (res.digits as f64) - lost < 3.0 {
        return Err(SolverError::InsufficientOrder {
            lost,
            digits: res.digits,
        });
    }
    let claimed = claimed_digits(&e_mid, &gap, &res.tol, res.digits, lost);
    Ok(EigenvalueResult {
        level: n,
        e_upper,
        e_lower,
        e_mid,
        gap,
        nodes,
        order_used: res.order,
        precision_used: res.digits,
        gauge_used: res.gauge.clone(),
        x_max: res.x_max.clone(),
        est_lost_digits: lost,
        claimed_digits: claimed,
    })
}

/// Quoted digits never exceed what the bound gap and the cancellation
/// budget both support.
fn claimed_digits(e_mid: &BigReal, gap: &BigReal, tol: &BigReal, digits: u32, lost: f64) -> u32 {
    let scale = big::log10_abs(e_mid).max(0.0);
    let gap_digits = if gap.is_zero() {
        // gap unresolved below tol
        -big::log10_abs(tol) + scale
    } else {
        scale - big::log10_abs(gap)
    };
    let cancel_digits = digits as f64 - lost - 3.0;
    gap_digits.min(cancel_digits).max(0.0).floor() as u32
}

/// Full series solution at the midpoint energy of a solved level.
pub fn solution_at(
    problem: &Problem,
    config: &SolveConfig,
    n: usize,
    energy: &BigReal,
) -> Result<SeriesSolution, SolverError> {
    let res = resolve(problem, config, n)?;
    Ok(res.engine(sector_parity(n)).solution(energy, res.order))
}

// ---------------------------------------------------------------------------
// Asymmetric solve
// ---------------------------------------------------------------------------

/// Locate level n of a parity-non-invariant problem by imposing
/// K(x_min) = K(x_max) = 0.
///
/// K(x; E, L_0) is exactly affine in L_0, so the x_min condition determines
/// L_0*(E) in closed form (one extra series with swapped initial data); the
/// remaining one-dimensional root problem g(E) = K(x_max; E, L_0*(E)) is
/// bracketed and refined like the symmetric case. This is the well-posed
/// equivalent of the two-variable Newton iteration, whose Jacobian is
/// singular at working precision for deep wells.
fn asym_auto_order(
    problem: &Problem,
    gauge: &GaugeFunction,
    e_probe: &BigReal,
    span: &BigReal,
    probe_digits: u32,
    target_digits: u32,
    cap: usize,
) -> Result<usize, SolverError> {
    let prec = big::bits_for_digits(probe_digits);
    let engine = SeriesEngine::new(problem, gauge, InitialData::even(prec), probe_digits);
    let e = Float::with_val(prec, e_probe);
    let x = Float::with_val(prec, span);
    let lx = big::log10_abs(&x);
    let drop = (target_digits + 12) as f64;
    let mut l = vec![engine.init().l0().clone()];
    let mut k = vec![engine.init().k0().clone()];
    let mut run_max = f64::NEG_INFINITY;
    let mut streak = 0u32;
    let mut checked = 0usize;
    let mut order = 64usize;
    loop {
        engine.extend(&e, &mut l, &mut k, order.min(cap));
        while checked < k.len() {
            let n = checked;
            let t = if k[n].is_zero() {
                f64::NEG_INFINITY
            } else {
                big::log10_abs(&k[n]) + n as f64 * lx
            };
            if t > run_max {
                run_max = t;
                streak = 0;
            } else if n >= 1 && t <= run_max - drop {
                streak += 1;
                if streak >= 10 {
                    return Ok(n);
                }
            } else {
                streak = 0;
            }
            checked += 1;
        }
        if order >= cap {
            return Err(SolverError::OrderCapExceeded { cap });
        }
        order = (order * 3 / 2).min(cap);
    }
}

fn resolve_asymmetric(
    problem: &Problem,
    config: &SolveConfig,
    _n: usize,
    span: &BigReal,
    e_init: &BigReal,
) -> Result<Resolved, SolverError> {
    let probe_prec = big::bits_for_digits(40);
    let gauge = match &config.gauge {
        GaugeSpec::Fixed(g) => g.clone(),
        GaugeSpec::Auto => GaugeFunction::linear(optimal_linear_gauge(
            problem,
            &Float::with_val(probe_prec, span),
        )),
    };
    let target = config.target_digits;
    // order from the tail-below-peak rule at a modest probe precision
    let mut probe_digits = (target + 60).max(80);
    let mut order = match config.order {
        OrderSpec::Fixed(o) => o,
        OrderSpec::Auto => asym_auto_order(
            problem,
            &gauge,
            e_init,
            span,
            probe_digits,
            target,
            config.max_order,
        )?,
    };
    // precision from the measured boundary cancellation at x = +-span
    let digits = match config.precision {
        PrecisionSpec::Digits(d) => d.max(big::MIN_DIGITS),
        PrecisionSpec::Auto => {
            let mut lost;
            loop {
                let prec = big::bits_for_digits(probe_digits);
                let engine =
                    SeriesEngine::new(problem, &gauge, InitialData::even(prec), probe_digits);
                let (_, k) = engine.coefficients(&Float::with_val(prec, e_init), order);
                let plus = evaluate_series(&k, &Float::with_val(prec, span));
                let minus = evaluate_series(&k, &(-Float::with_val(prec, span)));
                lost = plus.est_lost_digits.max(minus.est_lost_digits).max(0.0);
                if (lost as u32) + target + 20 <= probe_digits || probe_digits > 4 * (target + 60)
                {
                    break;
                }
                probe_digits = target + lost.ceil() as u32 + 40;
                if matches!(config.order, OrderSpec::Auto) {
                    order = asym_auto_order(
                        problem,
                        &gauge,
                        e_init,
                        span,
                        probe_digits,
                        target,
                        config.max_order,
                    )?;
                }
            }
            let d = target + lost.ceil() as u32 + 15;
            match config.max_precision {
                Some(cap) => d.min(cap.max(big::MIN_DIGITS)),
                None => d,
            }
        }
    };
    let prec = big::bits_for_digits(digits);
    let tol = match &config.root_tol {
        Some(t) => Float::with_val(prec, t),
        None => big::ten_pow(prec, -(target as i32 + 2)),
    };
    let floor = big::ten_pow(prec, -(digits.saturating_sub(10) as i32));
    if tol < floor {
        return Err(SolverError::TolBelowPrecisionFloor {
            tol: format!("{:e}", tol.to_f64()),
            digits,
        });
    }
    Ok(Resolved {
        problem: problem.clone(),
        gauge: gauge.clone(),
        digits,
        order,
        x_max: Float::with_val(prec, span),
        tol,
        grid_samples: config.grid_samples,
        scan: config.scan.clone(),
        engine_even: SeriesEngine::new(problem, &gauge, InitialData::even(prec), digits),
        engine_odd: SeriesEngine::new(problem, &gauge, InitialData::odd(prec), digits),
    })
}

pub fn solve_asymmetric(
    problem: &Problem,
    config: &SolveConfig,
    n: usize,
    init_guess: (&BigReal, &BigReal),
) -> Result<(EigenvalueResult, BigReal), SolverError> {
    let x_min = match &config.x_min {
        Some(x) => x.clone(),
        None => return Err(SolverError::Config("solve_asymmetric needs x_min".into())),
    };
    if !(x_min.is_sign_negative() && !x_min.is_zero()) {
        return Err(SolverError::Config("x_min must be negative".into()));
    }
    // The span max(|x_min|, x_max) drives gauge, order and precision.
    //
    // Order selection here differs from the symmetric path: the eliminated
    // boundary ratio L0*(E) of the EXACT functions swings to the eigenstate
    // value only inside an exponentially narrow E-window (the two-wall
    // matching is that stiff), while a moderate truncation regularizes the
    // ratio into a wide, well-conditioned root basin. Orders just past the
    // term peak work; orders far beyond it reproduce the stiff exact
    // behavior and lose the root. The order therefore stops once the tail
    // has dropped (target + 12) digits below the term peak, and the
    // precision budget comes from the measured boundary cancellation.
    let span = x_min.clone().abs().max(&config.x_max);
    let res = resolve_asymmetric(problem, config, n, &span, init_guess.0)?;
    let prec = big::bits_for_digits(res.digits);
    let x_min = Float::with_val(prec, &x_min);
    let x_max = Float::with_val(prec, &config.x_max);
    let engine_10 = &res.engine_even; // basis (K0, L0) = (1, 0)
    let engine_01 = &res.engine_odd; //  basis (K0, L0) = (0, 1)
    // the order is lowered adaptively if the boundary function loses its
    // sign flip (see below); all evaluations read the current value
    let order = std::cell::Cell::new(res.order);

    struct Basis {
        k10: Vec<BigReal>,
        k01: Vec<BigReal>,
        l10: Vec<BigReal>,
        l01: Vec<BigReal>,
    }
    let basis = |e: &BigReal| -> Basis {
        let (l10, k10) = engine_10.coefficients(e, order.get());
        let (l01, k01) = engine_01.coefficients(e, order.get());
        Basis { k10, k01, l10, l01 }
    };
    let combine = |a: &[BigReal], b: &[BigReal], w: &BigReal| -> Vec<BigReal> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x + (w * y).complete(prec))
            .collect()
    };
    // L0*(E) zeroing K(x_min), and the reduced boundary function K(x_max)
    let eliminate = |e: &BigReal| -> Result<(BigReal, Basis), SolverError> {
        let b = basis(e);
        let a0 = evaluate_series(&b.k10, &x_min);
        let a1 = evaluate_series(&b.k01, &x_min);
        if a1.value.is_zero() {
            return Err(SolverError::SingularBoundarySystem);
        }
        let l0 = -(a0.value / &a1.value);
        Ok((l0, b))
    };
    let g_val = |e: &BigReal| -> Result<BigReal, SolverError> {
        let (l0, b) = eliminate(e)?;
        let k = combine(&b.k10, &b.k01, &l0);
        Ok(evaluate_series(&k, &x_max).value)
    };
    let nodes_at = |e: &BigReal| -> Result<usize, SolverError> {
        let (l0, b) = eliminate(e)?;
        let k = combine(&b.k10, &b.k01, &l0);
        count_nodes_raw(&k, &x_min, &x_max, res.grid_samples)
    };

    // Locate the level by its node-count step first: the count over
    // (x_min, x_max) jumps from n to n+1 exactly at the level and, unlike
    // the sign of g, it is robust at any truncation order. The exact
    // two-wall ratio L0*(E) swings through the eigenstate value only inside
    // an exponentially narrow E-window for deep wells, while moderate
    // truncation widens the basin; if g shows no sign flip across the
    // located bracket, the order is halved until it does.
    let w = well_info(problem);
    let hbar = problem.hbar().to_f64();
    let step = match &res.scan.step {
        Some(s) => Float::with_val(prec, s),
        None => Float::with_val(prec, (hbar * w.omega / 8.0).max(1e-8)),
    };
    let e_init = Float::with_val(prec, init_guess.0);
    // walk to surround the count step
    let mut lo = e_init.clone();
    let mut hi = e_init.clone();
    let c_init = nodes_at(&lo)?;
    if c_init <= n {
        let mut steps = 0;
        loop {
            hi = (&hi + &step).complete(prec);
            if nodes_at(&hi)? > n {
                break;
            }
            steps += 1;
            if steps >= res.scan.max_steps {
                return Err(SolverError::AsymmetricNoConvergence(format!(
                    "node count never exceeds {n} up to E = {}",
                    big::dec_string_digits(&hi, 10)
                )));
            }
        }
        lo = (&hi - &step).complete(prec);
    } else {
        let mut steps = 0;
        loop {
            lo = (&lo - &step).complete(prec);
            if nodes_at(&lo)? <= n {
                break;
            }
            steps += 1;
            if steps >= res.scan.max_steps {
                return Err(SolverError::AsymmetricNoConvergence(format!(
                    "node count stays above {n} down to E = {}",
                    big::dec_string_digits(&lo, 10)
                )));
            }
        }
        hi = (&lo + &step).complete(prec);
    }
    // bisect the count step to a narrow bracket
    let scale_e = e_init.clone().abs().max(&Float::with_val(prec, 1));
    let width_target = Float::with_val(prec, 1e-6) * &scale_e;
    while (&hi - &lo).complete(prec) > width_target {
        let mid = (&hi + &lo).complete(prec) / 2u32;
        if nodes_at(&mid)? > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // margin around the count step; the g-root sits within a boundary-layer
    // delay of it
    let margin = ((&hi - &lo).complete(prec)) * 16u32
        + Float::with_val(prec, 1e-4) * &scale_e;
    let b_lo_base = (&lo - &margin).complete(prec);
    let b_hi_base = (&hi + &margin).complete(prec);
    let mut bracket = None;
    for _ in 0..6 {
        let fa = g_val(&b_lo_base)?;
        let fb = g_val(&b_hi_base)?;
        if fa.is_sign_negative() != fb.is_sign_negative() {
            bracket = Some((b_lo_base.clone(), b_hi_base.clone()));
            break;
        }
        let reduced = (order.get() / 2).max(64);
        if reduced == order.get() {
            break;
        }
        order.set(reduced);
    }
    let (b_lo, b_hi) = bracket.ok_or_else(|| {
        SolverError::AsymmetricNoConvergence(format!(
            "boundary function shows no sign change around the level near E = {}",
            big::dec_string_digits(&lo, 12)
        ))
    })?;
    let e_upper = refine_root(g_val, (&b_lo, &b_hi), &res.tol, res.digits)?;
    let (l0_at_root, _) = eliminate(&e_upper)?;

    // lower bound: Neumann-type conditions L(x_min) = L(x_max) = 0
    let h_val = |e: &BigReal| -> Result<BigReal, SolverError> {
        let b = basis(e);
        let a0 = evaluate_series(&b.l10, &x_min);
        let a1 = evaluate_series(&b.l01, &x_min);
        if a1.value.is_zero() {
            return Err(SolverError::SingularBoundarySystem);
        }
        let l0 = -(a0.value / &a1.value);
        let l = combine(&b.l10, &b.l01, &l0);
        Ok(evaluate_series(&l, &x_max).value)
    };
    let pad = &res.tol * e_upper.clone().abs().max(&Float::with_val(prec, 1));
    let l_hi = &e_upper + Float::with_val(prec, 3) * &pad;
    let l_lo = (&b_lo - &pad).complete(prec);
    let e_lower = match refine_root(h_val, (&l_lo, &l_hi), &res.tol, res.digits) {
        Ok(e) => e.min(&e_upper),
        // Neumann root can fall outside the scan bracket for strongly tilted
        // wells; the Dirichlet value stands alone in that case
        Err(SolverError::NonStraddlingBracket) => e_upper.clone(),
        Err(e) => return Err(e),
    };
    let e_mid: Float = ((&e_upper + &e_lower).complete(prec)) / 2u32;
    let gap = (&e_upper - &e_lower).complete(prec);
    let off = (&res.tol * e_upper.clone().abs().max(&Float::with_val(prec, 1)))
        * Float::with_val(prec, 100);
    let nodes = nodes_at(&e_mid.clone().min(&(-(off - &e_upper))))?;
    if nodes != n {
        return Err(SolverError::NodeCountMismatch {
            level: n,
            expected: n,
            found: nodes,
        });
    }
    let (l0_mid, b_mid) = eliminate(&e_mid)?;
    let k_mid = combine(&b_mid.k10, &b_mid.k01, &l0_mid);
    let eval = evaluate_series(&k_mid, &x_max);
    let lost = eval.est_lost_digits;
    if (res.digits as f64) - lost < 3.0 {
        return Err(SolverError::InsufficientOrder {
            lost,
            digits: res.digits,
        });
    }
    let claimed = claimed_digits(&e_mid, &gap, &res.tol, res.digits, lost);
    Ok((
        EigenvalueResult {
            level: n,
            e_upper,
            e_lower,
            e_mid,
            gap,
            nodes,
            order_used: res.order,
            precision_used: res.digits,
            gauge_used: res.gauge.clone(),
            x_max: res.x_max.clone(),
            est_lost_digits: lost,
            claimed_digits: claimed,
        },
        l0_at_root,
    ))
}

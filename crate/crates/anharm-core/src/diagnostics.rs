//! Intrinsic finite-boundary error estimates and flow/wave-function tables.
//!
//! Forcing a node at finite x_max shifts a level by δE = E(x_max) - E(∞).
//! Three closed-form ground-state estimates cover the practical range:
//! a harmonic semiclassical formula, its anharmonic-action correction
//! (small/intermediate x_max), and a pure WKB-exponential scale
//! (large x_max). Inverting the last one recommends x_max for a target
//! accuracy.

use rug::ops::{CompleteRound, Pow};
use rug::{Float, Rational};

use crate::big::{self, BigReal};
use crate::error::SolverError;
use crate::model::{wkb_curves, GaugeFunction, Problem};
use crate::par;
use crate::quantize::{solve_level, SolveConfig};
use crate::series::{InitialData, Parity, SeriesEngine};

/// Harmonic-core parameters entering the error formulas.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    pub m: BigReal,
    pub hbar: BigReal,
    /// From V_2 = m ω²/2 (requires V_2 > 0).
    pub omega: BigReal,
    /// S_0 = m ω x_max².
    pub s0: BigReal,
    /// Anharmonic action correction Σ_j V_2j x_max^2j / (j ω).
    pub s_anh: BigReal,
    pub x_max: BigReal,
}

impl ErrorModel {
    pub fn new(problem: &Problem, x_max: &BigReal) -> Result<Self, SolverError> {
        let prec = x_max.prec();
        let v2 = problem.potential().coeff(2);
        if v2 <= 0 {
            return Err(SolverError::Config(
                "error model needs a harmonic core (V_2 > 0)".into(),
            ));
        }
        let m = problem.mass_big(prec);
        let hbar = problem.hbar_big(prec);
        // omega = sqrt(2 V2 / m)
        let omega = (Float::with_val(prec, &v2) * 2u32 / &m).sqrt();
        let s0 = (&m * &omega).complete(prec) * x_max.clone().square();
        let mut s_anh = Float::with_val(prec, 0);
        for (j, c) in problem.potential().iter() {
            if j > 2 && j % 2 == 0 {
                let half = j / 2;
                let term = Float::with_val(prec, c) * x_max.clone().pow(j)
                    / (&omega * Float::with_val(prec, half));
                s_anh += term;
            }
        }
        Ok(Self {
            m,
            hbar,
            omega,
            s0,
            s_anh,
            x_max: x_max.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMethod {
    Harmonic,
    Perturbative,
    Asymptotic,
}

impl ErrorMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorMethod::Harmonic => "harmonic",
            ErrorMethod::Perturbative => "perturbative",
            ErrorMethod::Asymptotic => "asymptotic",
        }
    }
}

/// Finite-x_max error prediction. `ln_delta_e` is always populated;
/// `delta_e` = exp(ln_delta_e) when representable.
#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    pub method: ErrorMethod,
    pub ln_delta_e: BigReal,
    pub delta_e: BigReal,
    pub validity_note: String,
}

/// Ground-state Dirichlet-wall error of the harmonic oscillator:
/// δE_0 = 2 sqrt(S_0/(π ħ)) e^{-S_0/ħ} with S_0 = m ω x_max².
pub fn harmonic_error(m: &BigReal, omega: &BigReal, hbar: &BigReal, x_max: &BigReal) -> ErrorEstimate {
    let prec = x_max.prec();
    let s0 = (m * omega).complete(prec) * x_max.clone().square();
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let pref = (s0.clone() / (pi * hbar)).sqrt() * 2u32;
    let ln = pref.ln() - (&s0 / hbar).complete(prec);
    ErrorEstimate {
        method: ErrorMethod::Harmonic,
        delta_e: ln.clone().exp(),
        ln_delta_e: ln,
        validity_note: "ground state; semiclassical, S_0 >> hbar".into(),
    }
}

/// Perturbative anharmonic correction to the harmonic error:
/// δE_0 ≈ δE_0^harm · exp(-S_anh/ħ) with
/// S_anh = Σ_{j=2}^{l} V_2j x_max^2j / (j ω).
///
/// At ω = 1 the exponent is Σ (1/(jħ)) V_2j x_max^2j; the ω-dependent form
/// keeps the dimensions consistent.
pub fn perturbative_error(problem: &Problem, x_max: &BigReal) -> Result<ErrorEstimate, SolverError> {
    let prec = x_max.prec();
    let model = ErrorModel::new(problem, x_max)?;
    let base = harmonic_error(&model.m, &model.omega, &model.hbar, x_max);
    let ln = base.ln_delta_e - (&model.s_anh / &model.hbar).complete(prec);
    let odd_terms = problem.potential().iter().any(|(j, c)| j % 2 == 1 && *c != 0);
    let mut note =
        String::from("ground state; accurate while the anharmonic couplings and x_max are small");
    if odd_terms {
        note.push_str("; odd potential terms are not covered by the anharmonic action");
    }
    Ok(ErrorEstimate {
        method: ErrorMethod::Perturbative,
        delta_e: ln.clone().exp(),
        ln_delta_e: ln,
        validity_note: note,
    })
}

/// Asymptotic order-of-magnitude estimate
/// δE ≈ exp(-(2/((l+1)ħ)) sqrt(2m V_2l) x_max^{l+1}),
/// the square of the decaying WKB factor; the polynomial prefactor is set
/// to 1 (see `fit_asymptotic_constant` for data-driven calibration).
pub fn asymptotic_error(problem: &Problem, x_max: &BigReal) -> ErrorEstimate {
    asymptotic_error_with_constant(problem, x_max, 0.0)
}

/// Asymptotic estimate with a fitted additive constant on the log scale.
pub fn asymptotic_error_with_constant(
    problem: &Problem,
    x_max: &BigReal,
    ln_c: f64,
) -> ErrorEstimate {
    let prec = x_max.prec();
    let l = problem.l();
    let lead = problem.sqrt_two_m_leading(prec);
    let ln = Float::with_val(prec, ln_c)
        - lead * 2u32 * x_max.clone().pow(l + 1)
            / (problem.hbar_big(prec) * Float::with_val(prec, l + 1));
    ErrorEstimate {
        method: ErrorMethod::Asymptotic,
        delta_e: ln.clone().exp(),
        ln_delta_e: ln,
        validity_note: "ground state; x_max beyond the outer turning point; prefactor set to 1"
            .into(),
    }
}

/// Calibrate the asymptotic constant from measured (x_max, ln δE) points:
/// mean offset of the last `take` measured points.
pub fn fit_asymptotic_constant(
    problem: &Problem,
    measured: &[(f64, f64)],
    take: usize,
) -> Option<f64> {
    if measured.is_empty() {
        return None;
    }
    let prec = big::bits_for_digits(30);
    let mut pts: Vec<(f64, f64)> = measured.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let tail = &pts[pts.len().saturating_sub(take.max(1))..];
    let mut sum = 0.0;
    for (x, ln_m) in tail {
        let scale = asymptotic_error(problem, &Float::with_val(prec, *x))
            .ln_delta_e
            .to_f64();
        sum += ln_m - scale;
    }
    Some(sum / tail.len() as f64)
}

/// Smallest x_max (rounded up to 2 decimals) with
/// (2/((l+1)ħ)) sqrt(2m V_2l) x_max^{l+1} >= target_digits ln 10.
pub fn recommend_xmax(problem: &Problem, target_digits: u32) -> BigReal {
    let prec = big::bits_for_digits(30);
    let l = problem.l();
    let lead = problem.sqrt_two_m_leading(prec);
    let ln10 = Float::with_val(prec, 10).ln();
    let rhs = Float::with_val(prec, target_digits) * ln10
        * (problem.hbar_big(prec) * Float::with_val(prec, l + 1))
        / (lead * 2u32);
    let x = rhs.pow(Float::with_val(prec, 1) / Float::with_val(prec, l + 1));
    // round up to 2 decimals
    let scaled = (x * 100u32).ceil();
    scaled / 100u32
}

/// One row of a flow table.
#[derive(Debug, Clone)]
pub struct FlowRow {
    pub x: BigReal,
    /// L(x)/K(x); None at a pole (wave-function node) at working precision.
    pub phi: Option<BigReal>,
    /// K changes sign between this row and the next: a pole sits between,
    /// and the two rows hold its one-sided values.
    pub pole_adjacent: bool,
    pub wkb_plus: Option<BigReal>,
    pub wkb_minus: Option<BigReal>,
    pub k: BigReal,
    pub l: BigReal,
    /// K(x) e^{∫₀ˣ G/ħ} ∝ Ψ(x), normalized to ψ_rel(0) = K(0).
    pub psi_rel: BigReal,
}

/// Flow/wave-function table on a grid: (x, φ, WKB curves, K, L, ψ_rel).
pub fn flow_data(
    problem: &Problem,
    energy: &BigReal,
    gauge: &GaugeFunction,
    order: usize,
    precision: u32,
    x_grid: &[BigReal],
    parity: Parity,
) -> Result<Vec<FlowRow>, SolverError> {
    let prec = big::bits_for_digits(precision);
    let init = match parity {
        Parity::Even => InitialData::even(prec),
        Parity::Odd => InitialData::odd(prec),
        Parity::None => {
            return Err(SolverError::Config(
                "flow tables need a definite parity".into(),
            ))
        }
    };
    let sol = SeriesEngine::new(problem, gauge, init, precision).solution(energy, order);
    let int_g = gauge.poly().integral_from_0(prec);
    let hbar = problem.hbar_big(prec);
    let xs: Vec<BigReal> = x_grid.iter().map(|x| Float::with_val(prec, x)).collect();
    let mut rows: Vec<FlowRow> = par::map(xs, |x| {
        let k = sol.eval_k(&x);
        let l = sol.eval_l(&x);
        let phi = sol.evaluate_phi(&x).ok();
        let (wkb_plus, wkb_minus) = match wkb_curves(problem, energy, &x) {
            Some((p, m)) => (Some(p), Some(m)),
            None => (None, None),
        };
        let psi_rel = (int_g.eval(&x) / &hbar).exp() * &k.value;
        FlowRow {
            x,
            phi,
            pole_adjacent: false,
            wkb_plus,
            wkb_minus,
            k: k.value,
            l: l.value,
            psi_rel,
        }
    });
    for i in 0..rows.len().saturating_sub(1) {
        let s0 = rows[i].k.is_sign_negative();
        let s1 = rows[i + 1].k.is_sign_negative();
        if s0 != s1 && !rows[i].k.is_zero() && !rows[i + 1].k.is_zero() {
            rows[i].pole_adjacent = true;
        }
    }
    Ok(rows)
}

/// Measured and predicted finite-x_max errors at one x_max.
#[derive(Debug, Clone)]
pub struct ErrorScanRow {
    pub x_max: f64,
    /// ln(E_upper(x_max) - E_ref): the Dirichlet-wall level shift.
    pub ln_delta_e_measured: f64,
    /// ln|E_mid(x_max) - E_ref|: the midpoint estimate's own error (the two
    /// bounds cancel to well below the individual shifts).
    pub ln_delta_e_mid: f64,
    pub ln_delta_e_perturbative: f64,
    pub ln_delta_e_asymptotic: f64,
}

/// Measure δE(x_max) = E(x_max) - E_ref for the ground state against a
/// large-x_max reference and tabulate the two closed-form predictions.
pub fn error_scan(
    problem: &Problem,
    x_maxes: &[f64],
    reference_xmax: f64,
    grid_samples: usize,
) -> Result<Vec<ErrorScanRow>, SolverError> {
    let digits_for = |x: f64| -> u32 {
        let prec = big::bits_for_digits(30);
        let ln_de = asymptotic_error(problem, &Float::with_val(prec, x))
            .ln_delta_e
            .to_f64();
        ((-ln_de / std::f64::consts::LN_10) * 1.3 + 12.0).ceil().max(20.0) as u32
    };
    let ref_digits = digits_for(x_maxes.iter().cloned().fold(0.0, f64::max)) + 10;
    let solve_at = |x: f64, target: u32| -> Result<crate::quantize::EigenvalueResult, SolverError> {
        let prec = big::bits_for_digits(target + 20);
        let mut cfg = SolveConfig::new(Float::with_val(prec, x));
        cfg.target_digits = target;
        cfg.grid_samples = grid_samples;
        solve_level(problem, &cfg, 0)
    };
    let reference = solve_at(reference_xmax, ref_digits)?;
    let rows: Vec<Result<ErrorScanRow, SolverError>> = par::map(x_maxes.to_vec(), |x| {
        let r = solve_at(x, digits_for(x))?;
        let prec = reference.e_mid.prec().max(r.e_upper.prec());
        let e_ref = Float::with_val(prec, &reference.e_mid);
        let d_up = Float::with_val(prec, &r.e_upper) - &e_ref;
        let d_mid = (Float::with_val(prec, &r.e_mid) - &e_ref).abs();
        let xb = Float::with_val(prec, x);
        let pert = perturbative_error(problem, &xb)?;
        let asym = asymptotic_error(problem, &xb);
        Ok(ErrorScanRow {
            x_max: x,
            ln_delta_e_measured: big::log10_abs(&d_up) * std::f64::consts::LN_10,
            ln_delta_e_mid: big::log10_abs(&d_mid) * std::f64::consts::LN_10,
            ln_delta_e_perturbative: pert.ln_delta_e.to_f64(),
            ln_delta_e_asymptotic: asym.ln_delta_e.to_f64(),
        })
    });
    rows.into_iter().collect()
}

/// ω from V_2 = m ω² / 2 (f64 convenience).
pub fn omega_from_v2(problem: &Problem) -> Option<f64> {
    let v2 = problem.potential().coeff(2);
    if v2 <= 0 {
        return None;
    }
    Some((2.0 * v2.to_f64() / problem.mass().to_f64()).sqrt())
}

#[allow(dead_code)]
fn unused_rational_hook() -> Rational {
    Rational::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::big::{bits_for_digits, parse_real, ten_pow};
    use crate::model::{parse_polynomial, validate_problem};

    fn fig9_quartic() -> Problem {
        // m = omega = hbar = 1, lambda = 0.1: V = x^2/2 + 0.1 x^4
        validate_problem(
            parse_polynomial("0.5*x^2 + 0.1*x^4").unwrap(),
            Rational::from(1),
            Rational::from(1),
        )
        .unwrap()
    }

    fn single_well_quartic() -> Problem {
        validate_problem(
            parse_polynomial("x^2 + 0.1*x^4").unwrap(),
            Rational::from((1, 2)),
            Rational::from(1),
        )
        .unwrap()
    }

    fn octic() -> Problem {
        validate_problem(
            parse_polynomial("x^2 + x^8").unwrap(),
            Rational::from((1, 2)),
            Rational::from(1),
        )
        .unwrap()
    }

    #[test]
    fn harmonic_error_values() {
        let prec = bits_for_digits(40);
        let one = Float::with_val(prec, 1);
        // m = omega = hbar = 1, x_max = 4: S0 = 16, δE ≈ 5.08e-7
        let e4 = harmonic_error(&one, &one, &one, &parse_real("4", prec).unwrap());
        assert!((e4.delta_e.to_f64() - 5.07929e-7).abs() < 2e-11, "{}", e4.delta_e);
        // x_max = 3: δE ≈ 4.18e-4
        let e3 = harmonic_error(&one, &one, &one, &parse_real("3", prec).unwrap());
        assert!((e3.delta_e.to_f64() - 4.177e-4).abs() < 1e-6, "{}", e3.delta_e);
        // monotone decay beyond S0 > hbar/2
        let e5 = harmonic_error(&one, &one, &one, &parse_real("5", prec).unwrap());
        assert!(e5.delta_e < e4.delta_e && e4.delta_e < e3.delta_e);
    }

    #[test]
    fn perturbative_error_values() {
        let prec = bits_for_digits(40);
        // lambda = 0.1, x_max = 3: harmonic * e^{-4.05} ≈ 7.3e-6
        let e = perturbative_error(&fig9_quartic(), &parse_real("3", prec).unwrap()).unwrap();
        assert!((e.delta_e.to_f64() - 7.28e-6).abs() < 5e-8, "{}", e.delta_e);
        // V_anh = 0 reduces exactly to the harmonic formula
        let h = validate_problem(
            parse_polynomial("0.5*x^2").unwrap(),
            Rational::from(1),
            Rational::from(1),
        )
        .unwrap();
        let x = parse_real("3.7", prec).unwrap();
        let p = perturbative_error(&h, &x).unwrap();
        let one = Float::with_val(prec, 1);
        let base = harmonic_error(&one, &one, &one, &x);
        let diff = (p.ln_delta_e.clone() - &base.ln_delta_e).abs();
        assert!(diff < ten_pow(prec, -30), "diff {diff}");
    }

    #[test]
    fn asymptotic_error_values() {
        let prec = bits_for_digits(40);
        // single-well quartic at x_max = 6: exponent -(2/3) sqrt(0.1) 216 ≈ -45.54
        let a = asymptotic_error(&single_well_quartic(), &parse_real("6", prec).unwrap());
        assert!(
            (a.ln_delta_e.to_f64() + 2.0 / 3.0 * 0.1f64.sqrt() * 216.0).abs() < 1e-9,
            "{}",
            a.ln_delta_e
        );
        // octic at 2.8: exponent -(2/5) 2.8^5 ≈ -68.8 (about 30 digits)
        let a = asymptotic_error(&octic(), &parse_real("2.8", prec).unwrap());
        assert!((a.ln_delta_e.to_f64() + 0.4 * 2.8f64.powi(5)).abs() < 1e-9);
        let digits = -a.ln_delta_e.to_f64() / std::f64::consts::LN_10;
        assert!((digits - 29.9).abs() < 0.1);
        // harmonic consistency: exponent reduces to -S0/hbar
        let h = validate_problem(
            parse_polynomial("0.5*x^2").unwrap(),
            Rational::from(1),
            Rational::from(1),
        )
        .unwrap();
        let x = parse_real("4", prec).unwrap();
        let a = asymptotic_error(&h, &x);
        assert!((a.ln_delta_e.to_f64() + 16.0).abs() < 1e-10);
    }

    #[test]
    fn recommend_xmax_values() {
        // octic, 30 digits: x ≈ 2.80; quartic, 30 digits: ≈ 6.90;
        // harmonic m=omega=hbar=1, 25 digits: ≈ 7.59
        let x = recommend_xmax(&octic(), 30);
        assert!((x.to_f64() - 2.81).abs() < 0.015, "{x}");
        let x = recommend_xmax(&single_well_quartic(), 30);
        assert!((x.to_f64() - 6.90).abs() < 0.015, "{x}");
        let h = validate_problem(
            parse_polynomial("0.5*x^2").unwrap(),
            Rational::from(1),
            Rational::from(1),
        )
        .unwrap();
        let x = recommend_xmax(&h, 25);
        assert!((x.to_f64() - (25.0 * std::f64::consts::LN_10).sqrt()).abs() < 0.011, "{x}");
    }

    #[test]
    fn flow_table_harmonic_phi_equals_x() {
        let digits = 40;
        let prec = bits_for_digits(digits);
        let h = validate_problem(
            parse_polynomial("x^2").unwrap(),
            Rational::from((1, 2)),
            Rational::from(1),
        )
        .unwrap();
        let e = parse_real("1", prec).unwrap();
        let grid: Vec<BigReal> = (1..=20)
            .map(|i| Float::with_val(prec, i) / 4u32)
            .collect();
        let rows = flow_data(
            &h,
            &e,
            &GaugeFunction::zero(),
            220,
            digits,
            &grid,
            Parity::Even,
        )
        .unwrap();
        for row in &rows {
            let phi = row.phi.as_ref().expect("no poles for the ground state");
            let diff = (phi.clone() - &row.x).abs();
            assert!(diff < ten_pow(prec, -20), "phi(x) != x at {}", row.x);
            assert!(!row.pole_adjacent);
        }
    }

    #[test]
    fn flow_bifurcation_branches_around_the_level() {
        // just above the level phi develops a pole and reappears on the
        // lower WKB branch; just below it crosses the upper branch
        let digits = 60;
        let prec = bits_for_digits(digits);
        let e0 = parse_real(
            "1.06528550954371768885709162878909308430448641781891292",
            prec,
        )
        .unwrap();
        let grid: Vec<BigReal> = (0..=60)
            .map(|i| Float::with_val(prec, 2) + Float::with_val(prec, i) / 15u32)
            .collect();
        let above = (e0.clone() + parse_real("1e-5", prec).unwrap()).clone();
        let rows = flow_data(
            &single_well_quartic(),
            &above,
            &GaugeFunction::zero(),
            420,
            digits,
            &grid,
            Parity::Even,
        )
        .unwrap();
        assert!(
            rows.iter().any(|r| r.pole_adjacent),
            "a pole must appear above the level"
        );
        let pole_at = rows.iter().position(|r| r.pole_adjacent).unwrap();
        let after = rows[pole_at + 2..]
            .iter()
            .find(|r| r.phi.is_some())
            .expect("rows past the pole");
        assert!(
            after.phi.as_ref().unwrap().is_sign_negative(),
            "phi reappears on the lower branch after the pole"
        );
        let below = e0 - parse_real("1e-5", prec).unwrap();
        let rows = flow_data(
            &single_well_quartic(),
            &below,
            &GaugeFunction::zero(),
            420,
            digits,
            &grid,
            Parity::Even,
        )
        .unwrap();
        assert!(
            rows.iter().all(|r| !r.pole_adjacent),
            "no pole below the level"
        );
        // phi exits through the upper WKB curve: phi > wkb_plus somewhere
        assert!(
            rows.iter().any(|r| match (&r.phi, &r.wkb_plus) {
                (Some(p), Some(w)) => p > w,
                _ => false,
            }),
            "phi must cross the upper WKB curve below the level"
        );
    }

    #[test]
    fn psi_rel_is_gauge_invariant() {
        let digits = 45;
        let prec = bits_for_digits(digits);
        let e = parse_real("1.06528550954371768885", prec).unwrap();
        let grid: Vec<BigReal> = (1..=10).map(|i| Float::with_val(prec, i) / 4u32).collect();
        let r0 = flow_data(
            &single_well_quartic(),
            &e,
            &GaugeFunction::zero(),
            260,
            digits,
            &grid,
            Parity::Even,
        )
        .unwrap();
        let g = GaugeFunction::linear(parse_real("1.2", prec).unwrap());
        let r1 = flow_data(&single_well_quartic(), &e, &g, 260, digits, &grid, Parity::Even).unwrap();
        for (a, b) in r0.iter().zip(&r1) {
            let diff = (a.psi_rel.clone() - &b.psi_rel).abs();
            assert!(diff < ten_pow(prec, -25), "psi_rel differs at {}", a.x);
        }
    }
}

//! Power-series solutions of the linear L/K system.
//!
//! With K(x) = Σ K_n x^n, L(x) = Σ L_n x^n, the system
//! ħL' + 2m(V-E)K + GL = 0, ħK' + L + GK = 0 turns into the recursion
//!
//!   L_{n+1} = -(Σ_{j+p=n}(2m V_j K_p + L_j G_p) - 2mE K_n) / (ħ(n+1))
//!   K_{n+1} = -(L_n + Σ_{j+p=n} K_j G_p) / (ħ(n+1))
//!
//! which determines every coefficient from (K_0, L_0).

use rug::ops::CompleteRound;
use rug::Float;

use crate::big::{self, BigReal};
use crate::error::SolverError;
use crate::model::{GaugeFunction, Problem, RealPoly};
use crate::par;

/// Parity sector of the wave function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

/// Initial data (K_0, L_0) fixing the series.
///
/// Even sector: (1, 0). Odd sector: (0, 1). Asymmetric problems keep
/// K_0 = 1 with L_0 free.
#[derive(Debug, Clone)]
pub struct InitialData {
    k0: BigReal,
    l0: BigReal,
    parity: Parity,
}

impl InitialData {
    pub fn even(prec: u32) -> Self {
        Self {
            k0: Float::with_val(prec, 1),
            l0: Float::with_val(prec, 0),
            parity: Parity::Even,
        }
    }

    pub fn odd(prec: u32) -> Self {
        Self {
            k0: Float::with_val(prec, 0),
            l0: Float::with_val(prec, 1),
            parity: Parity::Odd,
        }
    }

    /// K_0 = 1, L_0 free (parity-non-invariant problems).
    pub fn asymmetric(l0: BigReal) -> Self {
        let prec = l0.prec();
        Self {
            k0: Float::with_val(prec, 1),
            l0,
            parity: Parity::None,
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn k0(&self) -> &BigReal {
        &self.k0
    }

    pub fn l0(&self) -> &BigReal {
        &self.l0
    }
}

/// Reusable recursion state: problem and gauge realized at one precision.
///
/// Building the engine once and computing at many trial energies is the hot
/// path of every solve; independent energies may run concurrently.
pub struct SeriesEngine {
    prec: u32,
    digits: u32,
    /// Nonzero (degree, 2m V_j) pairs.
    v_terms: Vec<(usize, BigReal)>,
    /// Nonzero (degree, G_p) pairs.
    g_terms: Vec<(usize, BigReal)>,
    two_m: BigReal,
    hbar: BigReal,
    one: BigReal,
    init: InitialData,
    problem: Problem,
    gauge: GaugeFunction,
}

impl SeriesEngine {
    pub fn new(problem: &Problem, gauge: &GaugeFunction, init: InitialData, digits: u32) -> Self {
        let digits = digits.max(big::MIN_DIGITS);
        let prec = big::bits_for_digits(digits);
        let v_terms = problem
            .two_m_v(prec)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let g_terms = gauge
            .realize(prec)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self {
            prec,
            digits,
            v_terms,
            g_terms,
            two_m: problem.mass_big(prec) * 2u32,
            hbar: problem.hbar_big(prec),
            one: Float::with_val(prec, 1),
            init: InitialData {
                k0: Float::with_val(prec, init.k0()),
                l0: Float::with_val(prec, init.l0()),
                parity: init.parity(),
            },
            problem: problem.clone(),
            gauge: gauge.clone(),
        }
    }

    pub fn precision_digits(&self) -> u32 {
        self.digits
    }

    pub fn prec_bits(&self) -> u32 {
        self.prec
    }

    pub fn init(&self) -> &InitialData {
        &self.init
    }

    /// Coefficients L_0..L_order, K_0..K_order at the trial energy.
    pub fn coefficients(&self, energy: &BigReal, order: usize) -> (Vec<BigReal>, Vec<BigReal>) {
        let mut l = Vec::with_capacity(order + 1);
        let mut k = Vec::with_capacity(order + 1);
        l.push(self.init.l0.clone());
        k.push(self.init.k0.clone());
        self.extend(energy, &mut l, &mut k, order);
        (l, k)
    }

    /// Continue the recursion in place up to `order`.
    pub fn extend(
        &self,
        energy: &BigReal,
        l: &mut Vec<BigReal>,
        k: &mut Vec<BigReal>,
        order: usize,
    ) {
        let prec = self.prec;
        let neg_two_m_e = -(&self.two_m * energy).complete(prec);
        for n in (l.len() - 1)..order {
            let denom = Float::with_val(prec, (n + 1) as u64) * &self.hbar;
            let l_next = {
                let mut pairs: Vec<(&Float, &Float)> = Vec::with_capacity(
                    self.v_terms.len() + self.g_terms.len() + 1,
                );
                for (j, c) in &self.v_terms {
                    if *j <= n {
                        pairs.push((c, &k[n - j]));
                    }
                }
                for (p, g) in &self.g_terms {
                    if *p <= n {
                        pairs.push((g, &l[n - p]));
                    }
                }
                pairs.push((&neg_two_m_e, &k[n]));
                let s = Float::dot(pairs.into_iter()).complete(prec);
                -(s / &denom)
            };
            let k_next = {
                // single correctly-rounded sum: L_n enters the dot so the
                // whole step rounds exactly once before the division
                let mut pairs: Vec<(&Float, &Float)> =
                    Vec::with_capacity(self.g_terms.len() + 1);
                for (p, g) in &self.g_terms {
                    if *p <= n {
                        pairs.push((g, &k[n - p]));
                    }
                }
                pairs.push((&self.one, &l[n]));
                let s = Float::dot(pairs.into_iter()).complete(prec);
                -(s / &denom)
            };
            l.push(l_next);
            k.push(k_next);
        }
    }

    /// Full solution object at one energy.
    pub fn solution(&self, energy: &BigReal, order: usize) -> SeriesSolution {
        let e = Float::with_val(self.prec, energy);
        let (l, k) = self.coefficients(&e, order);
        SeriesSolution {
            problem: self.problem.clone(),
            gauge: self.gauge.clone(),
            energy: e,
            order,
            precision: self.digits,
            parity: self.init.parity,
            lcoeffs: l,
            kcoeffs: k,
        }
    }
}

/// Truncated power-series coefficients of L and K at a trial energy.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub problem: Problem,
    pub gauge: GaugeFunction,
    pub energy: BigReal,
    pub order: usize,
    /// Working precision in decimal digits.
    pub precision: u32,
    pub parity: Parity,
    pub lcoeffs: Vec<BigReal>,
    pub kcoeffs: Vec<BigReal>,
}

/// Compute truncated series coefficients of L and K.
pub fn compute_series(
    problem: &Problem,
    gauge: &GaugeFunction,
    init: InitialData,
    energy: &BigReal,
    order: usize,
    precision: u32,
) -> Result<SeriesSolution, SolverError> {
    if order < 1 {
        return Err(SolverError::Config("order must be >= 1".into()));
    }
    if precision < big::MIN_DIGITS {
        return Err(SolverError::Config(format!(
            "precision must be >= {} digits",
            big::MIN_DIGITS
        )));
    }
    let engine = SeriesEngine::new(problem, gauge, init, precision);
    Ok(engine.solution(energy, order))
}

/// Series evaluation with cancellation tracking.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub value: BigReal,
    /// log10 of the largest |coeff_n x^n| partial term.
    pub max_term_log10: f64,
    /// max(0, max_term_log10 - log10|value|): decimal digits destroyed by
    /// cancellation among the partial terms.
    pub est_lost_digits: f64,
}

/// Horner evaluation of Σ coeffs[n] x^n with max-term tracking.
///
/// The max term is taken over the expanded sum coeffs[n]·x^n (the quantity
/// that bounds cancellation), not over Horner intermediates.
pub fn evaluate_series(coeffs: &[BigReal], x: &BigReal) -> EvalResult {
    let prec = coeffs
        .first()
        .map(|c| c.prec())
        .unwrap_or_else(|| x.prec());
    let mut value = Float::with_val(prec, 0);
    for c in coeffs.iter().rev() {
        value = value * x + c;
    }
    let lx = big::log10_abs(x);
    let mut max_term = f64::NEG_INFINITY;
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = if n == 0 {
            big::log10_abs(c)
        } else {
            big::log10_abs(c) + n as f64 * lx
        };
        if t > max_term {
            max_term = t;
        }
    }
    let est_lost_digits = if max_term == f64::NEG_INFINITY {
        0.0
    } else if value.is_zero() {
        // complete cancellation at working precision
        max_term + big::digits_for_bits(prec) as f64
    } else {
        (max_term - big::log10_abs(&value)).max(0.0)
    };
    EvalResult {
        value,
        max_term_log10: max_term,
        est_lost_digits,
    }
}

impl SeriesSolution {
    pub fn eval_k(&self, x: &BigReal) -> EvalResult {
        evaluate_series(&self.kcoeffs, x)
    }

    pub fn eval_l(&self, x: &BigReal) -> EvalResult {
        evaluate_series(&self.lcoeffs, x)
    }

    /// φ(x) = L(x)/K(x), the logarithmic-derivative function.
    ///
    /// Fails when K(x) is zero at working precision: φ has a pole there
    /// (a wave-function node).
    pub fn evaluate_phi(&self, x: &BigReal) -> Result<BigReal, SolverError> {
        let k = self.eval_k(x);
        let noise_floor = k.max_term_log10 - (self.precision as f64 - 5.0);
        if k.value.is_zero() || big::log10_abs(&k.value) < noise_floor {
            return Err(SolverError::NearNode {
                x: big::dec_string_digits(x, 12),
            });
        }
        let l = self.eval_l(x);
        Ok(l.value / &k.value)
    }

    /// Residual coefficient arrays of the two defining equations,
    /// r1 = ħL' + 2m(V-E)K + GL and r2 = ħK' + L + GK.
    ///
    /// All coefficients below the truncation order cancel by construction,
    /// so the evaluated residuals are O(x^order).
    pub fn residual_polys(&self) -> (RealPoly, RealPoly) {
        let prec = big::bits_for_digits(self.precision);
        let n = self.order;
        let two_m_v = self.problem.two_m_v(prec);
        let g = self.gauge.realize(prec);
        let two_m = self.problem.mass_big(prec) * 2u32;
        let two_m_e = (&two_m * &self.energy).complete(prec);
        let hbar = self.problem.hbar_big(prec);
        let len = n + 1 + two_m_v.len().max(g.len()).max(1);
        let mut r1 = vec![Float::with_val(prec, 0); len];
        let mut r2 = vec![Float::with_val(prec, 0); len];
        // hbar * derivative
        for i in 0..n {
            let f = Float::with_val(prec, (i + 1) as u64) * &hbar;
            r1[i] += (&f * &self.lcoeffs[i + 1]).complete(prec);
            r2[i] += f * &self.kcoeffs[i + 1];
        }
        // + 2m(V-E) K  and  + L
        for (i, kc) in self.kcoeffs.iter().enumerate() {
            for (j, vc) in two_m_v.iter().enumerate() {
                if !vc.is_zero() {
                    r1[i + j] += (vc * kc).complete(prec);
                }
            }
            r1[i] -= (&two_m_e * kc).complete(prec);
            r2[i] += &self.lcoeffs[i];
        }
        // + G L  and  + G K
        for (p, gc) in g.iter().enumerate() {
            if gc.is_zero() {
                continue;
            }
            for i in 0..=n {
                r1[i + p] += (gc * &self.lcoeffs[i]).complete(prec);
                r2[i + p] += (gc * &self.kcoeffs[i]).complete(prec);
            }
        }
        (RealPoly::from_coeffs(r1), RealPoly::from_coeffs(r2))
    }

    /// Residuals of the two defining equations at x.
    pub fn residual(&self, x: &BigReal) -> (BigReal, BigReal) {
        let (r1, r2) = self.residual_polys();
        (r1.eval(x), r2.eval(x))
    }

    /// Count zeros of K on (x_lo, x_hi] by grid sign changes, with one
    /// refinement pass (triple density) wherever |K| dips without a sign
    /// change. For polynomial G, zeros of K are exactly zeros of Ψ.
    pub fn count_nodes(
        &self,
        x_lo: &BigReal,
        x_hi: &BigReal,
        samples: usize,
    ) -> Result<usize, SolverError> {
        count_nodes_raw(&self.kcoeffs, x_lo, x_hi, samples)
    }

    /// JSON export with decimal-string coefficients and metadata.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "precision": self.precision,
            "energy": big::dec_string(&self.energy),
            "parity": self.parity.as_str(),
            "gauge": self.gauge.to_json(),
            "potential": self.problem.potential().render(),
            "mass": self.problem.mass().to_string(),
            "hbar": self.problem.hbar().to_string(),
            "k": self.kcoeffs.iter().map(big::dec_string).collect::<Vec<_>>(),
            "l": self.lcoeffs.iter().map(big::dec_string).collect::<Vec<_>>(),
        })
    }
}

/// Sign-change node count of a coefficient series on (x_lo, x_hi].
///
/// Uniform grid plus one refinement pass at triple density wherever |K|
/// dips below 1e-3 of its neighbors without a sign change (a cheap guard
/// against close node pairs; heuristic, not certified). Grid values buried
/// under their own cancellation noise floor carry no sign information and
/// are skipped; physical nodes live in classically allowed regions where
/// the amplitude stands well above the noise.
pub fn count_nodes_raw(
    coeffs: &[BigReal],
    x_lo: &BigReal,
    x_hi: &BigReal,
    samples: usize,
) -> Result<usize, SolverError> {
    if samples < 16 {
        return Err(SolverError::Config("node counting needs samples >= 16".into()));
    }
    let prec = coeffs.first().map(|c| c.prec()).unwrap_or_else(|| x_lo.prec());
    let digits = big::digits_for_bits(prec) as f64;
    let live_value = |e: &EvalResult| -> bool {
        !e.value.is_zero() && big::log10_abs(&e.value) >= e.max_term_log10 - (digits - 6.0)
    };
    let lo = Float::with_val(prec, x_lo);
    let hi = Float::with_val(prec, x_hi);
    let step = ((&hi - &lo).complete(prec)) / Float::with_val(prec, samples as u64);
    let xs: Vec<BigReal> = (1..=samples)
        .map(|i| Float::with_val(prec, i as u64) * &step + &lo)
        .collect();
    let evals = par::map(xs.clone(), |x| evaluate_series(coeffs, &x));
    // flag cells for refinement: |K_i| dips below 1e-3 of neighbors
    // without a sign change
    let mut extra: Vec<(usize, Vec<(BigReal, EvalResult)>)> = Vec::new();
    for i in 1..evals.len().saturating_sub(1) {
        let (prev, cur, next) = (&evals[i - 1], &evals[i], &evals[i + 1]);
        if !(live_value(prev) && live_value(next)) {
            continue;
        }
        let sign_change = prev.value.is_sign_negative() != cur.value.is_sign_negative()
            || cur.value.is_sign_negative() != next.value.is_sign_negative();
        if sign_change {
            continue;
        }
        let scale = prev.value.clone().abs().max(&next.value.clone().abs());
        let thresh = scale / Float::with_val(prec, 1000);
        if cur.value.clone().abs() < thresh {
            let sub_step = step.clone() / 3u32;
            let base = &xs[i - 1];
            let pts: Vec<BigReal> = (1..6)
                .map(|j| Float::with_val(prec, j as u64) * &sub_step + base)
                .collect();
            let sub = par::map(pts, |x| {
                let e = evaluate_series(coeffs, &x);
                (x, e)
            });
            extra.push((i, sub));
        }
    }
    // merge refined points into the sequence and count sign changes over
    // live points
    let mut seq: Vec<(BigReal, EvalResult)> = Vec::with_capacity(evals.len() + 5 * extra.len());
    let mut extra_iter = extra.into_iter().peekable();
    for (i, (x, v)) in xs.into_iter().zip(evals.into_iter()).enumerate() {
        seq.push((x, v));
        if let Some((idx, _)) = extra_iter.peek() {
            if *idx == i {
                let (_, sub) = extra_iter.next().unwrap();
                seq.extend(sub);
            }
        }
    }
    seq.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    seq.dedup_by(|a, b| a.0 == b.0);
    let mut count = 0usize;
    let mut last_sign: Option<bool> = None;
    for (_, v) in &seq {
        if !live_value(v) {
            continue;
        }
        let s = v.value.is_sign_negative();
        if let Some(prev) = last_sign {
            if prev != s {
                count += 1;
            }
        }
        last_sign = Some(s);
    }
    Ok(count)
}

/// Fit the factorial decay exponent kappa in |K_n| ~ (n!)^-kappa c^n over
/// the top half of the coefficient list. Entire functions from this
/// recursion have kappa = 1/(l+1) when deg(G) <= l.
///
/// With y_n = ln|K_n| ~ alpha + n ln c - kappa (n ln n - n), the local slope
/// is dy/dn = ln c - kappa ln n; differencing OLS slopes of two half-windows
/// cancels ln c and averages out the rapid sign-change dips in |K_n|.
pub fn coefficient_decay_kappa(coeffs: &[BigReal]) -> Option<f64> {
    let n = coeffs.len();
    if n < 48 {
        return None;
    }
    let slope = |lo: usize, hi: usize| -> Option<(f64, f64)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in lo..hi {
            if coeffs[i].is_zero() {
                continue;
            }
            xs.push(i as f64);
            ys.push(big::log10_abs(&coeffs[i]) * std::f64::consts::LN_10);
        }
        if xs.len() < 8 {
            return None;
        }
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        Some((sxy / sxx, mx))
    };
    let lo = n / 2;
    let mid = (lo + n) / 2;
    let (b_a, n_a) = slope(lo, mid)?;
    let (b_b, n_b) = slope(mid, n)?;
    Some((b_a - b_b) / (n_b.ln() - n_a.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::big::{bits_for_digits, parse_real, ten_pow};
    use crate::model::{parse_polynomial, validate_problem};
    use rug::Rational;

    fn harmonic() -> Problem {
        validate_problem(
            parse_polynomial("x^2").unwrap(),
            Rational::from((1, 2)),
            Rational::from(1),
        )
        .unwrap()
    }

    fn quartic() -> Problem {
        validate_problem(
            parse_polynomial("x^2 + 0.1*x^4").unwrap(),
            Rational::from((1, 2)),
            Rational::from(1),
        )
        .unwrap()
    }

    const QUARTIC_E0: &str = "1.06528550954371768885709162878909308430448641781891292";

    #[test]
    fn harmonic_series_zero_gauge() {
        // m = 1/2, hbar = 1, V = x^2, G = 0, even, E = 1:
        // K_{2k} = (-1/2)^k / k!, L = x K.
        let digits = 40;
        let prec = bits_for_digits(digits);
        let e = parse_real("1", prec).unwrap();
        let sol = compute_series(
            &harmonic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e,
            20,
            digits,
        )
        .unwrap();
        let tol = ten_pow(prec, -35);
        let mut expect = Float::with_val(prec, 1);
        for k in 0..=10 {
            let diff = (&sol.kcoeffs[2 * k] - &expect).complete(prec).abs();
            assert!(diff < tol, "K_{} wrong", 2 * k);
            assert!(sol.kcoeffs.get(2 * k + 1).map_or(true, |c| c.is_zero()));
            expect = expect * Float::with_val(prec, -0.5) / Float::with_val(prec, (k + 1) as u64);
        }
        // L = x K exactly
        for n in 1..=20 {
            let diff = (&sol.lcoeffs[n] - &sol.kcoeffs[n - 1]).complete(prec).abs();
            assert!(diff < tol, "L_{n} != K_{}", n - 1);
        }
    }

    #[test]
    fn harmonic_series_exact_gauge_terminates() {
        // G = -x makes K = 1, L = x exactly at E = 1.
        let digits = 40;
        let prec = bits_for_digits(digits);
        let e = parse_real("1", prec).unwrap();
        let g = GaugeFunction::linear(parse_real("1", prec).unwrap());
        let sol =
            compute_series(&harmonic(), &g, InitialData::even(prec), &e, 12, digits).unwrap();
        assert_eq!(sol.kcoeffs[0], Float::with_val(prec, 1));
        for n in 1..=12 {
            assert!(sol.kcoeffs[n].is_zero(), "K_{n} should vanish");
        }
        assert!(sol.lcoeffs[0].is_zero());
        assert_eq!(sol.lcoeffs[1], Float::with_val(prec, 1));
        for n in 2..=12 {
            assert!(sol.lcoeffs[n].is_zero(), "L_{n} should vanish");
        }
    }

    #[test]
    fn first_step_is_two_m_e_over_hbar() {
        // V_0 = 0, odd G, even init: L_1 = 2mE/hbar, K_1 = 0.
        let digits = 30;
        let prec = bits_for_digits(digits);
        let e = parse_real("2.5", prec).unwrap();
        let g = GaugeFunction::linear(parse_real("0.7", prec).unwrap());
        let sol = compute_series(&quartic(), &g, InitialData::even(prec), &e, 4, digits).unwrap();
        // 2m = 1 here
        let expect = Float::with_val(prec, &e);
        assert_eq!(sol.lcoeffs[1], expect);
        assert!(sol.kcoeffs[1].is_zero());
    }

    #[test]
    fn evaluate_simple() {
        let prec = bits_for_digits(20);
        let coeffs = vec![
            Float::with_val(prec, 1),
            Float::with_val(prec, 2),
            Float::with_val(prec, 3),
        ];
        let r = evaluate_series(&coeffs, &Float::with_val(prec, 2));
        assert_eq!(r.value, Float::with_val(prec, 17));
        let zero: Vec<BigReal> = vec![];
        let rz = evaluate_series(&zero, &Float::with_val(prec, 2));
        assert!(rz.value.is_zero());
        assert_eq!(rz.est_lost_digits, 0.0);
    }

    #[test]
    fn evaluate_gaussian_cancellation() {
        // coefficients of e^{-x^2/2} to order 200 at x = 6: value e^{-18},
        // max term 18^18/18! (log10 ~ 6.79), ~14.6 digits lost.
        // Oracle: direct high-precision summation of (-18)^k / k!.
        let digits = 40;
        let prec = bits_for_digits(digits);
        let mut coeffs = vec![Float::with_val(prec, 0); 201];
        let mut c = Float::with_val(prec, 1);
        for k in 0..=100 {
            coeffs[2 * k] = c.clone();
            c = c * Float::with_val(prec, -0.5) / Float::with_val(prec, (k + 1) as u64);
        }
        let r = evaluate_series(&coeffs, &Float::with_val(prec, 6));
        let mut oracle = Float::with_val(prec, 0);
        let mut term = Float::with_val(prec, 1);
        for k in 0..=100u32 {
            oracle += &term;
            term = term * Float::with_val(prec, -18) / Float::with_val(prec, k + 1);
        }
        let rel = ((&r.value - &oracle).complete(prec) / &oracle).abs();
        assert!(rel < ten_pow(prec, -20), "value disagrees with direct summation");
        assert!((r.max_term_log10 - 6.79).abs() < 0.2, "max term {}", r.max_term_log10);
        assert!((r.est_lost_digits - 14.6).abs() < 0.3, "lost {}", r.est_lost_digits);
    }

    #[test]
    fn phi_is_x_for_harmonic_ground_state() {
        let digits = 40;
        let prec = bits_for_digits(digits);
        let e = parse_real("1", prec).unwrap();
        for gauge in [
            GaugeFunction::zero(),
            GaugeFunction::linear(parse_real("1", prec).unwrap()),
        ] {
            let sol =
                compute_series(&harmonic(), &gauge, InitialData::even(prec), &e, 120, digits)
                    .unwrap();
            let x = parse_real("1.5", prec).unwrap();
            let phi = sol.evaluate_phi(&x).unwrap();
            let diff = (phi - &x).abs();
            assert!(diff < ten_pow(prec, -25));
            let phi0 = sol.evaluate_phi(&parse_real("0.25", prec).unwrap()).unwrap();
            assert!((phi0 - parse_real("0.25", prec).unwrap()).abs() < ten_pow(prec, -25));
        }
    }

    #[test]
    fn phi_tracks_upper_wkb_curve_at_eigenvalue() {
        // At E = E_0 and x beyond the turning point, phi hugs
        // +sqrt(2m(V - E)).
        let digits = 60;
        let prec = bits_for_digits(digits);
        let e = parse_real(QUARTIC_E0, prec).unwrap();
        let a = parse_real("1.2649110640673517", prec).unwrap();
        let sol = compute_series(
            &quartic(),
            &GaugeFunction::linear(a),
            InitialData::even(prec),
            &e,
            400,
            digits,
        )
        .unwrap();
        let x = parse_real("6", prec).unwrap();
        let phi = sol.evaluate_phi(&x).unwrap();
        let (wkb_plus, _) = crate::model::wkb_curves(&quartic(), &e, &x).unwrap();
        // the leading WKB correction hbar*phi'/(2 phi^2) is ~1.2% at x = 6
        let rel = ((&phi - &wkb_plus).complete(prec) / &wkb_plus).abs();
        assert!(rel < Float::with_val(prec, 0.02), "phi/wkb rel error {rel}");
    }

    #[test]
    fn residual_vanishes_for_exact_finite_series() {
        let digits = 40;
        let prec = bits_for_digits(digits);
        let e = parse_real("1", prec).unwrap();
        let g = GaugeFunction::linear(parse_real("1", prec).unwrap());
        let sol = compute_series(&harmonic(), &g, InitialData::even(prec), &e, 6, digits).unwrap();
        let x = parse_real("2.5", prec).unwrap();
        let (r1, r2) = sol.residual(&x);
        assert!(r1.abs() < ten_pow(prec, -30));
        assert!(r2.abs() < ten_pow(prec, -30));
    }

    #[test]
    fn residual_leading_degree_at_least_order() {
        let digits = 35;
        let prec = bits_for_digits(digits);
        let e = parse_real("1.3", prec).unwrap();
        let g = GaugeFunction::linear(parse_real("0.5", prec).unwrap());
        let sol = compute_series(&quartic(), &g, InitialData::odd(prec), &e, 40, digits).unwrap();
        let (r1, r2) = sol.residual_polys();
        let tol = ten_pow(prec, -25);
        for n in 0..40 {
            if let Some(c) = r1.coeff(n) {
                assert!(c.clone().abs() < tol, "r1[{n}] = {c}");
            }
            if let Some(c) = r2.coeff(n) {
                assert!(c.clone().abs() < tol, "r2[{n}] = {c}");
            }
        }
        assert!(r1.degree() >= 40 || r1.is_zero());
    }

    #[test]
    fn residual_shrinks_with_order() {
        let digits = 60;
        let prec = bits_for_digits(digits);
        let e = parse_real("1.1", prec).unwrap();
        let sol50 = compute_series(
            &quartic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e,
            50,
            digits,
        )
        .unwrap();
        let sol100 = compute_series(
            &quartic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e,
            100,
            digits,
        )
        .unwrap();
        let x = parse_real("1", prec).unwrap();
        let (r1a, _) = sol50.residual(&x);
        let (r1b, _) = sol100.residual(&x);
        let ratio = r1b.abs() / r1a.abs();
        assert!(
            ratio < ten_pow(prec, -20),
            "order-100 residual should collapse, ratio {ratio}"
        );
    }

    #[test]
    fn node_counts_for_harmonic_levels() {
        let digits = 40;
        let prec = bits_for_digits(digits);
        let lo = parse_real("0", prec).unwrap();
        let hi = parse_real("6", prec).unwrap();
        // ground state: no nodes
        let e0 = parse_real("1", prec).unwrap();
        let s0 = compute_series(
            &harmonic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e0,
            160,
            digits,
        )
        .unwrap();
        assert_eq!(s0.count_nodes(&lo, &hi, 64).unwrap(), 0);
        // second even level E = 5: one node at x > 0
        let e2 = parse_real("5", prec).unwrap();
        let s2 = compute_series(
            &harmonic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e2,
            160,
            digits,
        )
        .unwrap();
        assert_eq!(s2.count_nodes(&lo, &hi, 64).unwrap(), 1);
        // first odd level E = 3: only node is at the origin, excluded
        let e1 = parse_real("3", prec).unwrap();
        let s1 = compute_series(
            &harmonic(),
            &GaugeFunction::zero(),
            InitialData::odd(prec),
            &e1,
            160,
            digits,
        )
        .unwrap();
        assert_eq!(s1.count_nodes(&lo, &hi, 64).unwrap(), 0);
    }

    #[test]
    fn decay_exponent_matches_one_over_l_plus_one() {
        let digits = 60;
        let prec = bits_for_digits(digits);
        let e = parse_real(QUARTIC_E0, prec).unwrap();
        let sol = compute_series(
            &quartic(),
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e,
            300,
            digits,
        )
        .unwrap();
        let kappa = coefficient_decay_kappa(&sol.kcoeffs).unwrap();
        assert!(
            (kappa - 1.0 / 3.0).abs() < 0.05,
            "kappa {kappa} should be near 1/3"
        );
    }
}


//! Problem definition: potentials, gauge functions, polynomial utilities.

use std::collections::BTreeMap;
use std::fmt;

use rug::ops::{CompleteRound, Pow};
use rug::{Float, Integer, Rational};

use crate::big::{self, BigReal};
use crate::error::SolverError;

/// Polynomial with exact rational coefficients, keyed by degree.
///
/// The zero polynomial has an empty map and degree -1 by convention; the
/// highest stored degree always carries a nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<u32, Rational>,
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, Rational)>>(terms: I) -> Self {
        let mut p = Self::new();
        for (deg, c) in terms {
            p.add_term(deg, c);
        }
        p
    }

    pub fn add_term(&mut self, degree: u32, coeff: Rational) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(degree).or_insert_with(Rational::new);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&degree);
        }
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().next_back().map_or(-1, |&d| d as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, degree: u32) -> Rational {
        self.terms.get(&degree).cloned().unwrap_or_default()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.terms
            .values()
            .next_back()
            .cloned()
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(&d, c)| (d, c))
    }

    /// Only even powers present.
    pub fn is_even_fn(&self) -> bool {
        self.terms.keys().all(|d| d % 2 == 0)
    }

    /// Only odd powers present.
    pub fn is_odd_fn(&self) -> bool {
        self.terms.keys().all(|d| d % 2 == 1)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::from_terms(
            self.terms
                .iter()
                .filter(|(&d, _)| d > 0)
                .map(|(&d, c)| (d - 1, Rational::from(c * Rational::from(d)))),
        )
    }

    /// Coefficients as `BigReal`s, dense from degree 0 through `degree()`,
    /// each optionally scaled by `scale`.
    pub fn realize(&self, prec: u32, scale: Option<&Rational>) -> Vec<BigReal> {
        let deg = self.degree();
        if deg < 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(deg as usize + 1);
        for d in 0..=deg as u32 {
            let mut c = self.coeff(d);
            if let Some(s) = scale {
                c *= s;
            }
            out.push(Float::with_val(prec, &c));
        }
        out
    }

    pub fn eval_big(&self, x: &BigReal) -> BigReal {
        let prec = x.prec();
        let mut acc = Float::with_val(prec, 0);
        let coeffs = self.realize(prec, None);
        for c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let deg = self.degree();
        if deg < 0 {
            return 0.0;
        }
        for d in (0..=deg as u32).rev() {
            acc = acc * x + self.coeff(d).to_f64();
        }
        acc
    }

    /// Canonical text form: ascending degree, `+`/`-` separators, `*`
    /// between coefficient and power.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        let mut out = String::new();
        for (i, (&deg, coeff)) in self.terms.iter().enumerate() {
            let neg = *coeff < 0;
            let mag = coeff.clone().abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coeff_txt = render_rational(&mag);
            if deg == 0 {
                out.push_str(&coeff_txt);
            } else {
                let power = if deg == 1 {
                    "x".to_owned()
                } else {
                    format!("x^{deg}")
                };
                if mag == 1 {
                    out.push_str(&power);
                } else {
                    out.push_str(&coeff_txt);
                    out.push('*');
                    out.push_str(&power);
                }
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Render a positive rational as a terminating decimal when its denominator
/// is 2^a 5^b, else as `p/q`.
fn render_rational(r: &Rational) -> String {
    let den = r.denom();
    let mut d = den.clone();
    let mut twos = 0u32;
    while d.is_divisible_u(2) {
        d /= 2;
        twos += 1;
    }
    let mut fives = 0u32;
    while d.is_divisible_u(5) {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let shift = twos.max(fives);
    if shift == 0 {
        return r.numer().to_string();
    }
    let pow10 = Integer::from(10).pow(shift);
    let scaled = Integer::from(r.numer() * &pow10) / den;
    let digits = scaled.to_string();
    if shift as usize >= digits.len() {
        let mut s = String::from("0.");
        for _ in 0..(shift as usize - digits.len()) {
            s.push('0');
        }
        s.push_str(&digits);
        trim_trailing_zeros(s)
    } else {
        let split = digits.len() - shift as usize;
        trim_trailing_zeros(format!("{}.{}", &digits[..split], &digits[split..]))
    }
}

fn trim_trailing_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Expression parser
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn err(&self, message: impl Into<String>) -> SolverError {
        SolverError::PolynomialSyntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Unsigned decimal number as an exact rational.
    fn number(&mut self) -> Result<Rational, SolverError> {
        self.skip_ws();
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while let Some(c) = self.bytes.get(self.pos) {
            if c.is_ascii_digit() {
                int_digits.push(*c as char);
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while let Some(c) = self.bytes.get(self.pos) {
                if c.is_ascii_digit() {
                    frac_digits.push(*c as char);
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        let shift = frac_digits.len() as u32;
        let all = format!("{int_digits}{frac_digits}");
        let numer: Integer = all.parse().unwrap_or_default();
        let denom = Integer::from(10).pow(shift);
        Ok(Rational::from((numer, denom)))
    }

    /// `x` or `x^k`; returns the exponent.
    fn power(&mut self) -> Result<u32, SolverError> {
        match self.bump() {
            Some(b'x') | Some(b'X') => {}
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err("expected 'x'"));
            }
        }
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            match self.bytes.get(self.pos) {
                Some(b'-') | Some(b'+') => {
                    return Err(SolverError::BadExponent { offset: self.pos })
                }
                Some(c) if c.is_ascii_digit() => {}
                _ => return Err(self.err("expected an integer exponent")),
            }
            let start = self.pos;
            let mut digits = String::new();
            while let Some(c) = self.bytes.get(self.pos) {
                if c.is_ascii_digit() {
                    digits.push(*c as char);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.bytes.get(self.pos) == Some(&b'.') {
                return Err(SolverError::BadExponent { offset: start });
            }
            digits
                .parse::<u32>()
                .map_err(|_| SolverError::BadExponent { offset: start })
        } else {
            Ok(1)
        }
    }
}

/// Parse a polynomial in `x` with decimal or rational coefficients.
///
/// Terms look like `c`, `c*x^k`, `x^k`, `x`, optionally divided by an
/// integer or decimal (`x^4/2000`), with optional signs:
/// `-0.25*x^2 + x^4/2000`.
pub fn parse_polynomial(text: &str) -> Result<Polynomial, SolverError> {
    let mut cur = Cursor::new(text);
    let mut poly = Polynomial::new();
    let mut first = true;
    loop {
        cur.skip_ws();
        if cur.pos >= cur.bytes.len() {
            if first {
                return Err(cur.err("empty polynomial"));
            }
            break;
        }
        // sign chain
        let mut negative = false;
        loop {
            match cur.peek() {
                Some(b'+') => {
                    cur.pos += 1;
                }
                Some(b'-') => {
                    negative = !negative;
                    cur.pos += 1;
                }
                _ => break,
            }
        }
        let (mut coeff, mut degree) = match cur.peek() {
            Some(b'x') | Some(b'X') => (Rational::from(1), cur.power()?),
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let n = cur.number()?;
                let mut deg = 0;
                if cur.peek() == Some(b'*') {
                    cur.pos += 1;
                    deg = cur.power()?;
                }
                (n, deg)
            }
            _ => return Err(cur.err("expected a term")),
        };
        // optional "/ denominator" and "* factor" suffixes
        loop {
            match cur.peek() {
                Some(b'/') => {
                    cur.pos += 1;
                    let den = cur.number()?;
                    if den == 0 {
                        return Err(cur.err("division by zero"));
                    }
                    coeff /= den;
                }
                Some(b'*') => {
                    cur.pos += 1;
                    match cur.peek() {
                        Some(b'x') | Some(b'X') => degree += cur.power()?,
                        _ => {
                            let n = cur.number()?;
                            coeff *= n;
                        }
                    }
                }
                _ => break,
            }
        }
        if negative {
            coeff = -coeff;
        }
        poly.add_term(degree, coeff);
        first = false;
        match cur.peek() {
            None => break,
            Some(b'+') | Some(b'-') => continue,
            _ => return Err(cur.err("expected '+' or '-'")),
        }
    }
    Ok(poly)
}

// ---------------------------------------------------------------------------
// Dense runtime polynomial (BigReal coefficients)
// ---------------------------------------------------------------------------

/// Dense polynomial with `BigReal` coefficients (index = degree). Gauge
/// functions and residuals live here; coefficients may be irrational.
#[derive(Debug, Clone)]
pub struct RealPoly {
    pub coeffs: Vec<BigReal>,
}

impl RealPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<BigReal>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, degree: usize) -> Option<&BigReal> {
        self.coeffs.get(degree)
    }

    pub fn eval(&self, x: &BigReal) -> BigReal {
        let prec = x.prec();
        let mut acc = Float::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Antiderivative vanishing at 0.
    pub fn integral_from_0(&self, prec: u32) -> RealPoly {
        let mut coeffs = vec![Float::with_val(prec, 0)];
        for (d, c) in self.coeffs.iter().enumerate() {
            coeffs.push(Float::with_val(prec, c) / (d as u32 + 1));
        }
        RealPoly::from_coeffs(coeffs)
    }

    /// Coefficients re-rendered at `prec` bits (exact when `prec` is not lower).
    pub fn realize(&self, prec: u32) -> Vec<BigReal> {
        self.coeffs
            .iter()
            .map(|c| Float::with_val(prec, c))
            .collect()
    }

    pub fn is_odd_fn(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(d, c)| d % 2 == 1 || c.is_zero())
    }
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// Validated Schrödinger problem: polynomial potential, mass, hbar.
#[derive(Debug, Clone)]
pub struct Problem {
    potential: Polynomial,
    mass: Rational,
    hbar: Rational,
    l: u32,
}

/// Validate the model assumptions: even leading power with positive coefficient,
/// positive mass and hbar. Each failure is a distinct error.
pub fn validate_problem(
    potential: Polynomial,
    mass: Rational,
    hbar: Rational,
) -> Result<Problem, SolverError> {
    let degree = potential.degree();
    if degree < 1 {
        return Err(SolverError::EmptyPotential);
    }
    if degree % 2 != 0 {
        return Err(SolverError::OddLeadingDegree { degree });
    }
    if potential.leading_coeff() <= 0 {
        return Err(SolverError::NonpositiveLeadingCoefficient);
    }
    if mass <= 0 {
        return Err(SolverError::NonpositiveMass);
    }
    if hbar <= 0 {
        return Err(SolverError::NonpositiveHbar);
    }
    let l = (degree / 2) as u32;
    Ok(Problem {
        potential,
        mass,
        hbar,
        l,
    })
}

impl Problem {
    pub fn potential(&self) -> &Polynomial {
        &self.potential
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn hbar(&self) -> &Rational {
        &self.hbar
    }

    /// Half the leading degree: deg(V) = 2l.
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mass_big(&self, prec: u32) -> BigReal {
        Float::with_val(prec, &self.mass)
    }

    pub fn hbar_big(&self, prec: u32) -> BigReal {
        Float::with_val(prec, &self.hbar)
    }

    /// Dense coefficients of 2m V(x), degrees 0..=2l.
    pub fn two_m_v(&self, prec: u32) -> Vec<BigReal> {
        let two_m = Rational::from(2) * self.mass.clone();
        let mut v = self.potential.realize(prec, Some(&two_m));
        v.resize(2 * self.l as usize + 1, Float::with_val(prec, 0));
        v
    }

    /// sqrt(2 m V_{2l}) at `prec` bits.
    pub fn sqrt_two_m_leading(&self, prec: u32) -> BigReal {
        let lead = Rational::from(2) * self.mass.clone() * self.potential.leading_coeff();
        Float::with_val(prec, &lead).sqrt()
    }

    pub fn v_eval(&self, x: &BigReal) -> BigReal {
        self.potential.eval_big(x)
    }
}

// ---------------------------------------------------------------------------
// Gauge functions
// ---------------------------------------------------------------------------

/// Families of gauge polynomials G(x).
#[derive(Debug, Clone)]
pub enum GaugeKind {
    Zero,
    /// G(x) = -a x
    Linear,
    /// G(x) = -b x^degree
    Monomial,
    Custom,
}

/// Polynomial gauge function G(x) entering the linear L/K system.
#[derive(Debug, Clone)]
pub struct GaugeFunction {
    kind: GaugeKind,
    poly: RealPoly,
}

impl GaugeFunction {
    pub fn zero() -> Self {
        Self {
            kind: GaugeKind::Zero,
            poly: RealPoly::zero(),
        }
    }

    /// G(x) = -a x.
    pub fn linear(a: BigReal) -> Self {
        let prec = a.prec();
        Self {
            kind: GaugeKind::Linear,
            poly: RealPoly::from_coeffs(vec![Float::with_val(prec, 0), -a]),
        }
    }

    /// G(x) = -b x^degree.
    pub fn monomial(b: BigReal, degree: u32) -> Self {
        let prec = b.prec();
        let mut coeffs = vec![Float::with_val(prec, 0); degree as usize + 1];
        coeffs[degree as usize] = -b;
        Self {
            kind: GaugeKind::Monomial,
            poly: RealPoly::from_coeffs(coeffs),
        }
    }

    pub fn custom(poly: RealPoly) -> Self {
        Self {
            kind: GaugeKind::Custom,
            poly,
        }
    }

    /// Exact-rational custom gauge realized at `prec` bits.
    pub fn from_polynomial(poly: &Polynomial, prec: u32) -> Self {
        Self::custom(RealPoly::from_coeffs(poly.realize(prec, None)))
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn poly(&self) -> &RealPoly {
        &self.poly
    }

    pub fn degree(&self) -> i64 {
        self.poly.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Odd gauges keep definite parity for parity-symmetric problems.
    pub fn is_odd_fn(&self) -> bool {
        self.poly.is_odd_fn()
    }

    /// Linear coefficient `a` when this is the linear family.
    pub fn linear_a(&self) -> Option<BigReal> {
        match self.kind {
            GaugeKind::Linear => self.poly.coeff(1).map(|c| (-c).complete(c.prec())),
            _ => None,
        }
    }

    /// Dense coefficients of G at `prec` bits.
    pub fn realize(&self, prec: u32) -> Vec<BigReal> {
        self.poly.realize(prec)
    }

    /// Integral of G from 0 to x.
    pub fn integral_value(&self, x: &BigReal) -> BigReal {
        if self.poly.is_zero() {
            return Float::with_val(x.prec(), 0);
        }
        self.poly.integral_from_0(x.prec()).eval(x)
    }

    pub fn eval(&self, x: &BigReal) -> BigReal {
        self.poly.eval(x)
    }

    /// Recommended: deg(G) <= l. Larger growth slows coefficient decay; the
    /// method stays valid, so this is a warning rather than an error.
    pub fn degree_warning(&self, problem: &Problem) -> Option<String> {
        if self.degree() > problem.l() as i64 {
            Some(format!(
                "gauge degree {} exceeds l = {}; coefficient decay will be slower",
                self.degree(),
                problem.l()
            ))
        } else {
            None
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            GaugeKind::Zero => "zero".to_owned(),
            GaugeKind::Linear => {
                let a = self.linear_a().expect("linear gauge");
                format!("linear a={}", big::dec_string_digits(&a, 20))
            }
            GaugeKind::Monomial => {
                let d = self.poly.degree();
                let b = self
                    .poly
                    .coeff(d as usize)
                    .map(|c| (-c).complete(c.prec()))
                    .expect("monomial gauge");
                format!("monomial b={} degree={}", big::dec_string_digits(&b, 20), d)
            }
            GaugeKind::Custom => format!("custom degree={}", self.poly.degree()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: serde_json::Map<String, serde_json::Value> = self
            .poly
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| (d.to_string(), serde_json::Value::String(big::dec_string(c))))
            .collect();
        serde_json::json!({
            "kind": match self.kind {
                GaugeKind::Zero => "zero",
                GaugeKind::Linear => "linear",
                GaugeKind::Monomial => "monomial",
                GaugeKind::Custom => "custom",
            },
            "coeffs": coeffs,
        })
    }
}

/// WKB separating curves ±sqrt(2m(V(x) - E)) where defined.
pub fn wkb_curves(problem: &Problem, energy: &BigReal, x: &BigReal) -> Option<(BigReal, BigReal)> {
    let prec = x.prec().max(energy.prec());
    let v = problem.v_eval(&Float::with_val(prec, x));
    let two_m = Float::with_val(prec, &(Rational::from(2) * problem.mass().clone()));
    let t = two_m * (v - energy);
    if t < 0 {
        return None;
    }
    let s = t.sqrt();
    let neg = (-&s).complete(prec);
    Some((s, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::big::{bits_for_digits, parse_real};

    fn rat(p: i64, q: u64) -> Rational {
        Rational::from((p, q))
    }

    #[test]
    fn parse_simple_quartic() {
        let p = parse_polynomial("x^2 + 0.1*x^4").unwrap();
        assert_eq!(p.coeff(2), rat(1, 1));
        assert_eq!(p.coeff(4), rat(1, 10));
        assert_eq!(p.degree(), 4);
    }

    #[test]
    fn parse_double_well_potential() {
        let p = parse_polynomial("-0.25*x^2 + x^4/2000").unwrap();
        assert_eq!(p.coeff(2), rat(-1, 4));
        assert_eq!(p.coeff(4), rat(1, 2000));
    }

    #[test]
    fn parse_syntax_error_offset() {
        match parse_polynomial("x^^2") {
            Err(SolverError::PolynomialSyntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn parse_negative_exponent_rejected() {
        assert!(matches!(
            parse_polynomial("x^-2"),
            Err(SolverError::BadExponent { .. })
        ));
        assert!(matches!(
            parse_polynomial("x^2.5"),
            Err(SolverError::BadExponent { .. })
        ));
    }

    #[test]
    fn parse_misc_forms() {
        let p = parse_polynomial("3 - x + 2*x^3/4").unwrap();
        assert_eq!(p.coeff(0), rat(3, 1));
        assert_eq!(p.coeff(1), rat(-1, 1));
        assert_eq!(p.coeff(3), rat(1, 2));
        // repeated signs collapse
        let q = parse_polynomial("--x^2").unwrap();
        assert_eq!(q.coeff(2), rat(1, 1));
    }

    #[test]
    fn render_parse_round_trip() {
        for text in [
            "x^2 + 0.1*x^4",
            "-0.25*x^2 + 0.0005*x^4",
            "1/3*x^2",
            "2 - x + x^6",
        ] {
            let p = parse_polynomial(text).unwrap();
            let q = parse_polynomial(&p.render()).unwrap();
            assert_eq!(p, q, "round trip failed for {text} -> {}", p.render());
        }
        assert_eq!(
            parse_polynomial("-0.25*x^2 + x^4/2000").unwrap().render(),
            "-0.25*x^2 + 0.0005*x^4"
        );
    }

    #[test]
    fn validate_quartic_example() {
        let p = parse_polynomial("x^2 + 0.1*x^4").unwrap();
        let prob = validate_problem(p, rat(1, 2), rat(1, 1)).unwrap();
        assert_eq!(prob.l(), 2);
    }

    #[test]
    fn validate_rejections() {
        let odd = parse_polynomial("x^3").unwrap();
        assert!(matches!(
            validate_problem(odd, rat(1, 1), rat(1, 1)),
            Err(SolverError::OddLeadingDegree { degree: 3 })
        ));
        let neg = parse_polynomial("-x^4").unwrap();
        assert!(matches!(
            validate_problem(neg, rat(1, 1), rat(1, 1)),
            Err(SolverError::NonpositiveLeadingCoefficient)
        ));
        let v = parse_polynomial("x^2").unwrap();
        assert!(matches!(
            validate_problem(v.clone(), rat(0, 1), rat(1, 1)),
            Err(SolverError::NonpositiveMass)
        ));
        assert!(matches!(
            validate_problem(v, rat(1, 1), rat(-1, 1)),
            Err(SolverError::NonpositiveHbar)
        ));
    }

    #[test]
    fn wkb_curve_values() {
        let prec = bits_for_digits(40);
        let p = parse_polynomial("x^2").unwrap();
        let prob = validate_problem(p, rat(1, 2), rat(1, 1)).unwrap();
        let e = parse_real("1", prec).unwrap();
        let x = parse_real("2", prec).unwrap();
        let (plus, minus) = wkb_curves(&prob, &e, &x).unwrap();
        let three = Float::with_val(prec, 3).sqrt();
        assert!((plus - &three).abs() < big::ten_pow(prec, -30));
        assert!((minus + three).abs() < big::ten_pow(prec, -30));
        // below the curve: V < E
        let x0 = parse_real("0", prec).unwrap();
        assert!(wkb_curves(&prob, &e, &x0).is_none());
    }

    #[test]
    fn gauge_helpers() {
        let prec = bits_for_digits(30);
        let a = parse_real("2", prec).unwrap();
        let g = GaugeFunction::linear(a);
        assert!(g.is_odd_fn());
        assert_eq!(g.degree(), 1);
        // integral of -2x from 0 to 3 = -9
        let x = parse_real("3", prec).unwrap();
        let int = g.integral_value(&x);
        assert_eq!(int, Float::with_val(prec, -9));
        assert_eq!(g.linear_a().unwrap(), Float::with_val(prec, 2));
        let m = GaugeFunction::monomial(parse_real("1", prec).unwrap(), 3);
        assert_eq!(m.degree(), 3);
        assert!(m.is_odd_fn());
        assert!(!GaugeFunction::monomial(parse_real("1", prec).unwrap(), 2).is_odd_fn());
    }
}

//! Rational functions `numerator / product-of-factors` with eager
//! normalization.
//!
//! Denominators are kept as explicit factor lists rather than expanded
//! polynomials: every denominator that arises in the engine is a product of
//! linear polynomials in the index symbol (possibly times monomials), and
//! keeping the factors lets normalization cancel against the numerator with
//! exact division only — no root finding or general factorization.
//!
//! Invariants after every operation:
//! - the zero function is `0 / 1` (empty factor list);
//! - each factor is a non-constant primitive integer polynomial with a
//!   positive leading coefficient (scalar content is folded into the
//!   numerator);
//! - factors are sorted canonically and merged, and no factor divides the
//!   numerator.
//!
//! Key items: [`RFunc`].

use std::fmt;
use std::sync::Arc;

use num::traits::{One, Signed, Zero};

use super::mpoly::{Cursor, Expo, MPoly, Vars};
use super::rat::{rat_pow, Rat};
use super::AlgError;

/// Normalized rational function with a factored denominator.
#[derive(Debug, Clone)]
pub struct RFunc {
    num: MPoly,
    den: Vec<(MPoly, u32)>,
}

impl RFunc {
    /// Wraps a polynomial as a rational function with denominator `1`.
    pub fn from_poly(num: MPoly) -> RFunc {
        RFunc { num, den: Vec::new() }
    }

    /// The zero function over the given table.
    pub fn zero(vars: &Arc<Vars>) -> RFunc {
        RFunc::from_poly(MPoly::zero(vars))
    }

    /// The constant function `c`.
    pub fn constant(vars: &Arc<Vars>, c: Rat) -> RFunc {
        RFunc::from_poly(MPoly::constant(vars, c))
    }

    /// The constant function `1`.
    pub fn one(vars: &Arc<Vars>) -> RFunc {
        RFunc::from_poly(MPoly::one(vars))
    }

    /// The coordinate function `x_idx`.
    pub fn var(vars: &Arc<Vars>, idx: usize) -> RFunc {
        RFunc::from_poly(MPoly::var(vars, idx))
    }

    /// Builds `num / ∏ factor^mult` and normalizes.
    pub fn new(num: MPoly, den: Vec<(MPoly, u32)>) -> RFunc {
        let mut rf = RFunc { num, den };
        rf.normalize();
        rf
    }

    /// The numerator polynomial.
    pub fn num(&self) -> &MPoly {
        &self.num
    }

    /// The denominator's factor list (empty means the value is a polynomial).
    pub fn den_factors(&self) -> &[(MPoly, u32)] {
        &self.den
    }

    /// True if the denominator is trivial.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    /// The denominator expanded into a single polynomial.
    pub fn den_expanded(&self) -> MPoly {
        let vars = self.num.vars().clone();
        let mut acc = MPoly::one(&vars);
        for (f, m) in &self.den {
            acc = acc.mul(&f.pow(*m));
        }
        acc
    }

    /// Returns the numerator when the denominator is trivial, otherwise
    /// [`AlgError::NotPolynomial`] naming the remaining denominator.
    pub fn to_poly(&self) -> Result<MPoly, AlgError> {
        if self.den.is_empty() {
            Ok(self.num.clone())
        } else {
            Err(AlgError::NotPolynomial(self.den_string()))
        }
    }

    /// True if the function is identically zero.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The symbol table of the function.
    pub fn vars(&self) -> &Arc<Vars> {
        self.num.vars()
    }

    fn den_string(&self) -> String {
        let mut out = String::new();
        for (i, (f, m)) in self.den.iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            out.push('(');
            out.push_str(&f.to_string());
            out.push(')');
            if *m > 1 {
                out.push('^');
                out.push_str(&m.to_string());
            }
        }
        out
    }

    fn normalize(&mut self) {
        // Fold scalar content of each factor into the numerator and make the
        // factor primitive with positive leading coefficient.
        let mut scalar = Rat::one();
        let mut cleaned: Vec<(MPoly, u32)> = Vec::with_capacity(self.den.len());
        for (f, m) in std::mem::take(&mut self.den) {
            if m == 0 {
                continue;
            }
            if let Some(c) = f.as_constant() {
                assert!(!c.is_zero(), "zero denominator factor");
                scalar *= rat_pow(&c, m);
                continue;
            }
            let mut content = f.content();
            if f.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
                content = -content;
            }
            scalar *= rat_pow(&content, m);
            let prim = f.scale(&(Rat::one() / &content));
            cleaned.push((prim, m));
        }
        if !scalar.is_one() {
            self.num = self.num.scale(&(Rat::one() / scalar));
        }
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        // Merge duplicate factors.
        cleaned.sort_by(|a, b| a.0.cmp_canonical(&b.0).then(a.1.cmp(&b.1)));
        let mut merged: Vec<(MPoly, u32)> = Vec::with_capacity(cleaned.len());
        for (f, m) in cleaned {
            if let Some(last) = merged.last_mut() {
                if last.0 == f {
                    last.1 += m;
                    continue;
                }
            }
            merged.push((f, m));
        }
        // Cancel factors against the numerator where exact division succeeds.
        let mut kept: Vec<(MPoly, u32)> = Vec::with_capacity(merged.len());
        for (f, mut m) in merged {
            while m > 0 {
                match self.num.exact_div(&f) {
                    Ok(q) => {
                        self.num = q;
                        m -= 1;
                    }
                    Err(_) => break,
                }
            }
            if m > 0 {
                kept.push((f, m));
            }
        }
        kept.sort_by(|a, b| a.0.cmp_canonical(&b.0));
        self.den = kept;
    }

    /// Additive inverse.
    pub fn neg(&self) -> RFunc {
        RFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    /// Scales by a rational constant.
    pub fn scale(&self, c: &Rat) -> RFunc {
        if c.is_zero() {
            return RFunc::zero(self.vars());
        }
        RFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Sum over the least common denominator of the factor lists.
    pub fn add(&self, other: &RFunc) -> RFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return RFunc::from_poly(self.num.add(&other.num));
        }
        let union = union_max(&self.den, &other.den);
        let lhs = self.num.mul(&complement(&union, &self.den, self.vars()));
        let rhs = other.num.mul(&complement(&union, &other.den, self.vars()));
        RFunc::new(lhs.add(&rhs), union)
    }

    /// Difference.
    pub fn sub(&self, other: &RFunc) -> RFunc {
        self.add(&other.neg())
    }

    /// Product.
    pub fn mul(&self, other: &RFunc) -> RFunc {
        if self.den.is_empty() && other.den.is_empty() {
            return RFunc::from_poly(self.num.mul(&other.num));
        }
        let mut den = self.den.clone();
        den.extend(other.den.iter().cloned());
        RFunc::new(self.num.mul(&other.num), den)
    }

    /// Product with a polynomial.
    pub fn mul_poly(&self, p: &MPoly) -> RFunc {
        RFunc::new(self.num.mul(p), self.den.clone())
    }

    /// Quotient; panics if `other` is identically zero.
    pub fn div(&self, other: &RFunc) -> RFunc {
        assert!(!other.is_zero(), "division by the zero function");
        let mut den = self.den.clone();
        den.push((other.num.clone(), 1));
        RFunc::new(self.num.mul(&other.den_expanded()), den)
    }

    /// `self^e`.
    pub fn pow(&self, e: u32) -> RFunc {
        if e == 0 {
            return RFunc::one(self.vars());
        }
        let den = self.den.iter().map(|(f, m)| (f.clone(), m * e)).collect();
        RFunc::new(self.num.pow(e), den)
    }

    /// Substitutes `var -> var + c` (denominator factors stay factored).
    pub fn shift_var(&self, var: usize, c: &Rat) -> RFunc {
        if c.is_zero() {
            return self.clone();
        }
        let den = self
            .den
            .iter()
            .map(|(f, m)| (f.shift_var(var, c), *m))
            .collect();
        RFunc::new(self.num.shift_var(var, c), den)
    }

    /// Substitutes `var -> 2*center - var`.
    pub fn reflect_var(&self, var: usize, center: &Rat) -> RFunc {
        let den = self
            .den
            .iter()
            .map(|(f, m)| (f.reflect_var(var, center), *m))
            .collect();
        RFunc::new(self.num.reflect_var(var, center), den)
    }

    /// General polynomial substitution for one symbol.
    pub fn substitute(&self, var: usize, repl: &MPoly) -> RFunc {
        let den = self
            .den
            .iter()
            .map(|(f, m)| (f.substitute(var, repl), *m))
            .collect();
        RFunc::new(self.num.substitute(var, repl), den)
    }

    /// Partial evaluation `var = value`, keeping the remaining symbols.
    pub fn eval_var(&self, var: usize, value: &Rat) -> RFunc {
        let repl = MPoly::constant(self.vars(), value.clone());
        self.substitute(var, &repl)
    }

    /// Full evaluation; `None` if the denominator vanishes at the point.
    pub fn eval(&self, vals: &[Rat]) -> Option<Rat> {
        let mut den = Rat::one();
        for (f, m) in &self.den {
            let v = f.eval(vals);
            if v.is_zero() {
                return None;
            }
            den *= rat_pow(&v, *m);
        }
        Some(self.num.eval(vals) / den)
    }

    /// Residue at a simple pole `var = r`: exactly one denominator factor may
    /// vanish there, with multiplicity one.
    pub fn residue_simple(&self, var: usize, r: &Rat) -> Result<RFunc, AlgError> {
        let vars = self.vars().clone();
        let mut vanishing: Option<&MPoly> = None;
        let mut rest = MPoly::one(&vars);
        for (f, m) in &self.den {
            // The factor must depend on `var` alone for a pointwise root test.
            let f_at = f.substitute(var, &MPoly::constant(&vars, r.clone()));
            if f_at.is_zero() {
                if *m != 1 || vanishing.is_some() {
                    return Err(AlgError::NotExpressible(format!(
                        "pole at {}={} is not simple",
                        vars.name(var),
                        r
                    )));
                }
                vanishing = Some(f);
            } else {
                rest = rest.mul(&f_at.pow(*m));
            }
        }
        let f = vanishing.ok_or_else(|| {
            AlgError::NotExpressible(format!("no pole at {}={}", vars.name(var), r))
        })?;
        let fprime = f.derivative_in(var);
        let fprime_at = fprime.substitute(var, &MPoly::constant(&vars, r.clone()));
        let num_at = self.num.substitute(var, &MPoly::constant(&vars, r.clone()));
        Ok(RFunc::new(num_at, vec![(fprime_at.mul(&rest), 1)]))
    }

    /// Structural equality of normalized forms is not value equality when
    /// factor granularity differs, so equality cross-multiplies.
    pub fn eq_value(&self, other: &RFunc) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() == other.is_zero();
        }
        self.num.mul(&other.den_expanded()) == other.num.mul(&self.den_expanded())
    }

    /// Parses the canonical text form over the given table.
    pub fn parse(input: &str, vars: &Arc<Vars>) -> Result<RFunc, AlgError> {
        let mut p = Cursor::new(input);
        p.skip_ws();
        let rf = if p.peek() == Some(b'(') {
            // "(num)/((f1)^m1*(f2)^m2*…)"
            p.eat(b'(');
            let num = p.parse_poly(vars)?;
            if !(p.eat(b')') && { p.skip_ws(); p.eat(b'/') }) {
                return Err(AlgError::Parse("expected ')/(' after numerator".into()));
            }
            p.skip_ws();
            if !p.eat(b'(') {
                return Err(AlgError::Parse("expected denominator factors".into()));
            }
            let mut den = Vec::new();
            loop {
                p.skip_ws();
                if !p.eat(b'(') {
                    return Err(AlgError::Parse("expected '(' before factor".into()));
                }
                let f = p.parse_poly(vars)?;
                if !p.eat(b')') {
                    return Err(AlgError::Parse("expected ')' after factor".into()));
                }
                let m = if p.eat(b'^') { p.parse_u32()? } else { 1 };
                den.push((f, m));
                p.skip_ws();
                if p.eat(b'*') {
                    continue;
                }
                if p.eat(b')') {
                    break;
                }
                return Err(AlgError::Parse("expected '*' or ')' in denominator".into()));
            }
            RFunc::new(num, den)
        } else {
            RFunc::from_poly(p.parse_poly(vars)?)
        };
        p.skip_ws();
        if !p.at_end() {
            return Err(AlgError::Parse(format!("trailing input: '{}'", p.rest())));
        }
        Ok(rf)
    }
}

impl PartialEq for RFunc {
    fn eq(&self, other: &Self) -> bool {
        self.eq_value(other)
    }
}

impl Eq for RFunc {}

impl fmt::Display for RFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den_string())
        }
    }
}

/// Factor-multiset union with per-factor maximum multiplicity.
fn union_max(a: &[(MPoly, u32)], b: &[(MPoly, u32)]) -> Vec<(MPoly, u32)> {
    let mut out: Vec<(MPoly, u32)> = a.to_vec();
    for (f, m) in b {
        match out.iter_mut().find(|(g, _)| g == f) {
            Some(entry) => entry.1 = entry.1.max(*m),
            None => out.push((f.clone(), *m)),
        }
    }
    out.sort_by(|x, y| x.0.cmp_canonical(&y.0));
    out
}

/// Expanded product `∏ union^mult / ∏ den^mult` (always a polynomial).
fn complement(union: &[(MPoly, u32)], den: &[(MPoly, u32)], vars: &Arc<Vars>) -> MPoly {
    let mut acc = MPoly::one(vars);
    for (f, m) in union {
        let have = den
            .iter()
            .find(|(g, _)| g == f)
            .map(|(_, m2)| *m2)
            .unwrap_or(0);
        debug_assert!(have <= *m);
        if *m > have {
            acc = acc.mul(&f.pow(m - have));
        }
    }
    acc
}

impl MPoly {
    /// Partial derivative with respect to one symbol.
    pub fn derivative_in(&self, var: usize) -> MPoly {
        let mut out = MPoly::zero(self.vars());
        for (expo, c) in self.terms() {
            let e = expo.0[var];
            if e == 0 {
                continue;
            }
            let mut reduced = expo.0.clone();
            reduced[var] = e - 1;
            out.add_term(Expo(reduced), c * Rat::from_integer(e.into()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat::{rat, rat_int};
    use super::*;

    fn table() -> Arc<Vars> {
        Vars::new(&["s", "u"])
    }

    fn poly(text: &str) -> MPoly {
        MPoly::parse(text, &table()).unwrap()
    }

    #[test]
    fn normalization_cancels_common_factors_and_content() {
        // (4s^2 - 1) / (2(2s - 1)) = (2s + 1) / 2
        let rf = RFunc::new(poly("4*s^2 - 1"), vec![(poly("4*s - 2"), 1)]);
        assert!(rf.is_polynomial());
        assert_eq!(rf.to_poly().unwrap(), poly("s + 1/2"));
    }

    #[test]
    fn denominator_factors_stay_primitive_and_sorted() {
        let rf = RFunc::new(
            poly("u"),
            vec![(poly("-2*s - 1"), 1), (poly("6*s - 3"), 1)],
        );
        let names: Vec<String> = rf
            .den_factors()
            .iter()
            .map(|(f, m)| format!("{f}|{m}"))
            .collect();
        assert_eq!(names, vec!["2*s - 1|1", "2*s + 1|1"]);
        // factor contents -1 and 3 moved into the numerator as 1/(-3)
        assert_eq!(rf.num(), &poly("-1/3*u"));
    }

    #[test]
    fn addition_over_common_denominator() {
        let a = RFunc::new(poly("1"), vec![(poly("s"), 1)]);
        let b = RFunc::new(poly("1"), vec![(poly("s + 1"), 1)]);
        let sum = a.add(&b);
        assert_eq!(sum.num(), &poly("2*s + 1"));
        assert_eq!(sum.den_factors().len(), 2);
        let back = sum.sub(&b);
        assert!(back.eq_value(&a));
    }

    #[test]
    fn multiplication_and_division_invert() {
        let a = RFunc::new(poly("s + u"), vec![(poly("2*s + 1"), 2)]);
        let b = RFunc::new(poly("s - u"), vec![(poly("s"), 1)]);
        let prod = a.mul(&b);
        assert!(prod.div(&b).eq_value(&a));
        assert!(prod.div(&a).eq_value(&b));
    }

    #[test]
    fn display_parse_round_trip_is_bit_exact() {
        let cases = [
            RFunc::from_poly(poly("3*s^2 - 1/2")),
            RFunc::new(poly("u + 1"), vec![(poly("2*s + 1"), 1), (poly("s"), 2)]),
            RFunc::zero(&table()),
        ];
        for rf in cases {
            let text = rf.to_string();
            let back = RFunc::parse(&text, &table()).unwrap();
            assert_eq!(back.to_string(), text, "round trip of '{text}'");
            assert!(back.eq_value(&rf));
        }
    }

    #[test]
    fn to_poly_reports_the_remaining_denominator() {
        let rf = RFunc::new(poly("u"), vec![(poly("2*s + 1"), 1)]);
        match rf.to_poly() {
            Err(AlgError::NotPolynomial(d)) => assert_eq!(d, "(2*s + 1)"),
            other => panic!("expected NotPolynomial, got {other:?}"),
        }
    }

    #[test]
    fn residue_at_a_simple_pole() {
        // u / (s (2s+1)) at s = -1/2: residue = u / ( (d/ds 2s+1) * s )|_{s=-1/2}
        //                            = u / (2 * (-1/2)) = -u.
        let rf = RFunc::new(poly("u"), vec![(poly("s"), 1), (poly("2*s + 1"), 1)]);
        let res = rf.residue_simple(0, &rat(-1, 2)).unwrap();
        assert!(res.eq_value(&RFunc::from_poly(poly("-u"))));
        // and at s = 0: residue = u / (2*0+1) = u.
        let res0 = rf.residue_simple(0, &rat_int(0)).unwrap();
        assert!(res0.eq_value(&RFunc::from_poly(poly("u"))));
    }

    #[test]
    fn shift_and_reflection_preserve_value_composition() {
        let rf = RFunc::new(poly("s + 2*u"), vec![(poly("2*s + 1"), 1)]);
        let shifted = rf.shift_var(0, &rat_int(3)).shift_var(0, &rat_int(-3));
        assert!(shifted.eq_value(&rf));
        let reflected = rf.reflect_var(0, &rat(-1, 2)).reflect_var(0, &rat(-1, 2));
        assert!(reflected.eq_value(&rf));
    }
}

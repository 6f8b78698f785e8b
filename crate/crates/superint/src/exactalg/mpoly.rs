//! Multivariate polynomials with exact rational coefficients.
//!
//! A polynomial is a sparse term map from exponent vectors to nonzero
//! rational coefficients over a fixed, ordered symbol table ([`Vars`]).
//! Terms are kept in graded-lexicographic order (total degree first, then
//! lexicographic on the exponent vector), which fixes both the leading term
//! used by exact division and the canonical text form.
//!
//! Key items: [`Vars`], [`Expo`], [`MPoly`], [`pochhammer`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use super::rat::{rat_pow, Rat};
use super::AlgError;

/// An ordered table of symbol names shared by all values of one model.
///
/// The table order is semantic: it fixes the exponent-vector layout, the
/// graded-lexicographic term order, and the canonical text form.
#[derive(Debug, PartialEq, Eq)]
pub struct Vars {
    names: Vec<String>,
}

impl Vars {
    /// Builds a shared symbol table from the given names (order is kept).
    pub fn new(names: &[&str]) -> Arc<Vars> {
        let mut seen = std::collections::BTreeSet::new();
        for n in names {
            assert!(seen.insert(*n), "duplicate symbol name '{n}'");
        }
        Arc::new(Vars {
            names: names.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Number of symbols in the table.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True if the table has no symbols (constants only).
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Name of the symbol at position `i`.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Position of the symbol with the given name, if present.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Exponent vector of one monomial; its length equals the symbol-table size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expo(pub Vec<u16>);

impl Expo {
    /// Total degree of the monomial.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Expo {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Expo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Debug, Clone)]
pub struct MPoly {
    vars: Arc<Vars>,
    terms: BTreeMap<Expo, Rat>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_table(other) && self.terms == other.terms
    }
}

impl Eq for MPoly {}

impl MPoly {
    /// The zero polynomial.
    pub fn zero(vars: &Arc<Vars>) -> MPoly {
        MPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `c`.
    pub fn constant(vars: &Arc<Vars>, c: Rat) -> MPoly {
        let mut p = MPoly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Expo(vec![0; vars.len()]), c);
        }
        p
    }

    /// The constant polynomial `1`.
    pub fn one(vars: &Arc<Vars>) -> MPoly {
        MPoly::constant(vars, Rat::one())
    }

    /// The monomial `x_idx`.
    pub fn var(vars: &Arc<Vars>, idx: usize) -> MPoly {
        MPoly::var_pow(vars, idx, 1)
    }

    /// The monomial `x_idx^e`.
    pub fn var_pow(vars: &Arc<Vars>, idx: usize, e: u16) -> MPoly {
        assert!(idx < vars.len(), "symbol index out of range");
        let mut p = MPoly::zero(vars);
        if e == 0 {
            return MPoly::one(vars);
        }
        let mut expo = vec![0u16; vars.len()];
        expo[idx] = e;
        p.terms.insert(Expo(expo), Rat::one());
        p
    }

    /// The affine polynomial `a*x_idx + b`.
    pub fn affine(vars: &Arc<Vars>, idx: usize, a: Rat, b: Rat) -> MPoly {
        MPoly::var(vars, idx).scale(&a).add(&MPoly::constant(vars, b))
    }

    /// The symbol table this polynomial is built over.
    pub fn vars(&self) -> &Arc<Vars> {
        &self.vars
    }

    /// Reinterprets the same coefficient data over another symbol table of
    /// equal arity (positional correspondence).  Used when two realizations
    /// of one family share coefficients under different index names.
    pub fn rename_table(&self, vars: &Arc<Vars>) -> MPoly {
        assert_eq!(
            self.vars.len(),
            vars.len(),
            "symbol tables must have equal arity"
        );
        MPoly {
            vars: vars.clone(),
            terms: self.terms.clone(),
        }
    }

    /// True when both polynomials use the same symbol table.
    pub fn same_table(&self, other: &MPoly) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    fn assert_same_table(&self, other: &MPoly) {
        assert!(
            self.same_table(other),
            "operands use different symbol tables"
        );
    }

    /// True if this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if the polynomial has no symbol dependence.
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_constant())
    }

    /// The value of a constant polynomial, if it is one.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    /// Iterates over `(exponents, coefficient)` in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Rat)> {
        self.terms.iter()
    }

    /// Number of stored (nonzero) terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Adds `c * x^expo` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, expo: Expo, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(expo) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Polynomial sum.
    pub fn add(&self, other: &MPoly) -> MPoly {
        self.assert_same_table(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    /// Polynomial difference.
    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    /// Additive inverse.
    pub fn neg(&self) -> MPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(&self.vars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    /// Polynomial product.
    pub fn mul(&self, other: &MPoly) -> MPoly {
        self.assert_same_table(other);
        let mut out = MPoly::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let expo = Expo(
                    ea.0.iter()
                        .zip(eb.0.iter())
                        .map(|(&x, &y)| {
                            x.checked_add(y).expect("exponent overflow")
                        })
                        .collect(),
                );
                out.add_term(expo, ca * cb);
            }
        }
        out
    }

    /// `self^e` by binary exponentiation.
    pub fn pow(&self, e: u32) -> MPoly {
        let mut acc = MPoly::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Maximum total degree over all terms (0 for the zero polynomial).
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.total()).max().unwrap_or(0)
    }

    /// Maximum exponent of symbol `var` over all terms.
    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|e| e.0[var]).max().unwrap_or(0)
    }

    /// Leading term in graded-lex order, if the polynomial is nonzero.
    pub fn leading(&self) -> Option<(&Expo, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients (`1` for the zero polynomial).
    pub fn content(&self) -> Rat {
        if self.terms.is_empty() {
            return Rat::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num::integer::gcd(num_gcd, c.numer().abs());
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        Rat::new(num_gcd, den_lcm)
    }

    /// Componentwise minimum exponent vector over all terms.
    pub fn monomial_content(&self) -> Expo {
        let mut min = vec![u16::MAX; self.vars.len()];
        if self.terms.is_empty() {
            return Expo(vec![0; self.vars.len()]);
        }
        for e in self.terms.keys() {
            for (m, &x) in min.iter_mut().zip(e.0.iter()) {
                *m = (*m).min(x);
            }
        }
        Expo(min)
    }

    /// Divides by the monomial `x^expo`; every term must have exponents at
    /// least `expo`.
    pub fn divide_monomial(&self, expo: &Expo) -> Result<MPoly, AlgError> {
        let mut out = MPoly::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut reduced = Vec::with_capacity(e.0.len());
            for (&x, &d) in e.0.iter().zip(expo.0.iter()) {
                if x < d {
                    return Err(AlgError::NotDivisible);
                }
                reduced.push(x - d);
            }
            out.terms.insert(Expo(reduced), c.clone());
        }
        Ok(out)
    }

    /// Exact multivariate division: returns `self / d` when `d` divides
    /// `self`, and [`AlgError::NotDivisible`] otherwise.
    pub fn exact_div(&self, d: &MPoly) -> Result<MPoly, AlgError> {
        self.assert_same_table(d);
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.terms.clone();
        let mut quot = MPoly::zero(&self.vars);
        let (de, dc) = {
            let (e, c) = d.leading().unwrap();
            (e.clone(), c.clone())
        };
        while let Some((re, rc)) = rem.last_key_value() {
            let mut qe = Vec::with_capacity(re.0.len());
            for (&x, &y) in re.0.iter().zip(de.0.iter()) {
                if x < y {
                    return Err(AlgError::NotDivisible);
                }
                qe.push(x - y);
            }
            let qe = Expo(qe);
            let qc = rc.clone() / &dc;
            // Eliminate the leading term in place: subtract qc * x^qe * d.
            for (e, c) in &d.terms {
                let expo = Expo(
                    e.0.iter()
                        .zip(qe.0.iter())
                        .map(|(&x, &y)| x.checked_add(y).expect("exponent overflow"))
                        .collect(),
                );
                let delta = -(&qc * c);
                use std::collections::btree_map::Entry;
                match rem.entry(expo) {
                    Entry::Vacant(v) => {
                        if !delta.is_zero() {
                            v.insert(delta);
                        }
                    }
                    Entry::Occupied(mut o) => {
                        *o.get_mut() += delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.add_term(qe, qc);
        }
        Ok(quot)
    }

    /// Long division in the single symbol `var`: returns `(quotient,
    /// remainder)` with `deg_var(remainder) < deg_var(d)`.  The divisor's
    /// leading coefficient in `var` must be a constant.
    pub fn divrem_in_var(&self, d: &MPoly, var: usize) -> Result<(MPoly, MPoly), AlgError> {
        self.assert_same_table(d);
        let dd = d.degree_in(var);
        let lead = d.coeff_in_var(var, dd);
        let lead_c = lead.as_constant().ok_or_else(|| {
            AlgError::NotExpressible(format!(
                "divisor's leading coefficient in '{}' is not constant",
                self.vars.name(var)
            ))
        })?;
        assert!(!lead_c.is_zero(), "division by zero in one symbol");
        let mut rem = self.clone();
        let mut quot = MPoly::zero(&self.vars);
        loop {
            let rd = rem.degree_in(var);
            if rem.is_zero() || rd < dd {
                return Ok((quot, rem));
            }
            let rl = rem.coeff_in_var(var, rd);
            let q = rl
                .scale(&(Rat::one() / &lead_c))
                .mul(&MPoly::var_pow(&self.vars, var, rd - dd));
            rem = rem.sub(&q.mul(d));
            quot = quot.add(&q);
        }
    }

    /// The coefficient of `var^e`, as a polynomial in the remaining symbols
    /// (the `var` slot of the result is identically zero).
    pub fn coeff_in_var(&self, var: usize, e: u16) -> MPoly {
        let mut out = MPoly::zero(&self.vars);
        for (expo, c) in &self.terms {
            if expo.0[var] == e {
                let mut reduced = expo.0.clone();
                reduced[var] = 0;
                out.add_term(Expo(reduced), c.clone());
            }
        }
        out
    }

    /// Replaces symbol `var` by the polynomial `repl`.
    pub fn substitute(&self, var: usize, repl: &MPoly) -> MPoly {
        self.assert_same_table(repl);
        let mut out = MPoly::zero(&self.vars);
        let mut groups: BTreeMap<u16, MPoly> = BTreeMap::new();
        for (expo, c) in &self.terms {
            let e = expo.0[var];
            let mut reduced = expo.0.clone();
            reduced[var] = 0;
            groups
                .entry(e)
                .or_insert_with(|| MPoly::zero(&self.vars))
                .add_term(Expo(reduced), c.clone());
        }
        let mut cached_pow = MPoly::one(&self.vars);
        let mut cached_e = 0u16;
        for (e, coeff) in groups {
            while cached_e < e {
                cached_pow = cached_pow.mul(repl);
                cached_e += 1;
            }
            out = out.add(&coeff.mul(&cached_pow));
        }
        out
    }

    /// Substitutes `var -> var + c`.
    pub fn shift_var(&self, var: usize, c: &Rat) -> MPoly {
        if c.is_zero() {
            return self.clone();
        }
        self.substitute(var, &MPoly::affine(&self.vars, var, Rat::one(), c.clone()))
    }

    /// Substitutes `var -> 2*center - var` (reflection about `center`).
    pub fn reflect_var(&self, var: usize, center: &Rat) -> MPoly {
        self.substitute(
            var,
            &MPoly::affine(&self.vars, var, -Rat::one(), center + center),
        )
    }

    /// Evaluates at the given symbol values (one per table entry).
    pub fn eval(&self, vals: &[Rat]) -> Rat {
        assert_eq!(vals.len(), self.vars.len(), "wrong number of values");
        let mut acc = Rat::zero();
        for (expo, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in expo.0.iter().enumerate() {
                if e > 0 {
                    t *= rat_pow(&vals[i], e as u32);
                }
            }
            acc += t;
        }
        acc
    }

    /// If every power of `var` is even, returns the polynomial `g` with
    /// `g(var^2) = self` (exponents of `var` halved); otherwise
    /// [`AlgError::NotEven`].
    pub fn even_part_in(&self, var: usize) -> Result<MPoly, AlgError> {
        let mut out = MPoly::zero(&self.vars);
        for (expo, c) in &self.terms {
            if expo.0[var] % 2 != 0 {
                return Err(AlgError::NotEven(self.vars.name(var).to_string()));
            }
            let mut e = expo.0.clone();
            e[var] /= 2;
            out.terms.insert(Expo(e), c.clone());
        }
        Ok(out)
    }

    /// Deterministic content-based total order (used to sort denominator
    /// factors canonically; unrelated to any numeric order on values).
    pub fn cmp_canonical(&self, other: &MPoly) -> Ordering {
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ea, ca)), Some((eb, cb))) => {
                    let o = ea.cmp(eb).then_with(|| ca.cmp(cb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
            }
        }
    }

    /// Parses the canonical text form over the given symbol table.
    pub fn parse(input: &str, vars: &Arc<Vars>) -> Result<MPoly, AlgError> {
        let mut p = Cursor::new(input);
        let poly = p.parse_poly(vars)?;
        p.skip_ws();
        if !p.at_end() {
            return Err(AlgError::Parse(format!(
                "trailing input at byte {}: '{}'",
                p.pos(),
                p.rest()
            )));
        }
        Ok(poly)
    }
}

/// The rising factorial `base * (base+1) * … * (base+len-1)`; `1` for
/// `len == 0`.
pub fn pochhammer(base: &MPoly, len: u32) -> MPoly {
    let vars = base.vars().clone();
    let mut acc = MPoly::one(&vars);
    for j in 0..len {
        acc = acc.mul(&base.add(&MPoly::constant(&vars, Rat::from_integer(BigInt::from(j)))));
    }
    acc
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (expo, coeff) in self.terms.iter().rev() {
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut mono = String::new();
            for (i, &e) in expo.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push_str(self.vars.name(i));
                if e > 1 {
                    mono.push('^');
                    mono.push_str(&e.to_string());
                }
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// Byte cursor shared by the polynomial and rational-function parsers.
pub(super) struct Cursor<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Cursor<'a> {
    pub(super) fn new(s: &'a str) -> Cursor<'a> {
        Cursor { s: s.as_bytes(), i: 0 }
    }

    pub(super) fn pos(&self) -> usize {
        self.i
    }

    pub(super) fn rest(&self) -> String {
        String::from_utf8_lossy(&self.s[self.i.min(self.s.len())..]).into_owned()
    }

    pub(super) fn at_end(&self) -> bool {
        self.i >= self.s.len()
    }

    pub(super) fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    pub(super) fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    pub(super) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn parse_uint(&mut self) -> Result<BigInt, AlgError> {
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if self.i == start {
            return Err(AlgError::Parse(format!("expected digits at byte {start}")));
        }
        let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        txt.parse::<BigInt>()
            .map_err(|e| AlgError::Parse(format!("bad integer '{txt}': {e}")))
    }

    pub(super) fn parse_u32(&mut self) -> Result<u32, AlgError> {
        let n = self.parse_uint()?;
        u32::try_from(n.clone()).map_err(|_| AlgError::Parse(format!("exponent {n} out of range")))
    }

    fn parse_ident(&mut self) -> Result<String, AlgError> {
        let start = self.i;
        if self.i < self.s.len() && (self.s[self.i].is_ascii_alphabetic() || self.s[self.i] == b'_') {
            self.i += 1;
            while self.i < self.s.len()
                && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_')
            {
                self.i += 1;
            }
            Ok(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
        } else {
            Err(AlgError::Parse(format!("expected symbol name at byte {start}")))
        }
    }

    /// Parses a rational number `int` or `int/int`.
    fn parse_number(&mut self) -> Result<Rat, AlgError> {
        let n = self.parse_uint()?;
        if self.peek() == Some(b'/') && self.s.get(self.i + 1).is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
            let d = self.parse_uint()?;
            if d.is_zero() {
                return Err(AlgError::Parse("zero denominator".into()));
            }
            Ok(Rat::new(n, d))
        } else {
            Ok(Rat::from_integer(n))
        }
    }

    fn parse_term(&mut self, vars: &Arc<Vars>) -> Result<(Expo, Rat), AlgError> {
        self.skip_ws();
        let mut coeff = Rat::one();
        let mut expo = vec![0u16; vars.len()];
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            coeff = self.parse_number()?;
            self.skip_ws();
            if !self.eat(b'*') {
                return Ok((Expo(expo), coeff));
            }
        }
        loop {
            self.skip_ws();
            let name = self.parse_ident()?;
            let idx = vars
                .index_of(&name)
                .ok_or_else(|| AlgError::Parse(format!("unknown symbol '{name}'")))?;
            let e = if self.eat(b'^') { self.parse_u32()? } else { 1 };
            let e = u16::try_from(e)
                .map_err(|_| AlgError::Parse(format!("exponent {e} out of range")))?;
            expo[idx] = expo[idx]
                .checked_add(e)
                .ok_or_else(|| AlgError::Parse("exponent overflow".into()))?;
            self.skip_ws();
            if !self.eat(b'*') {
                break;
            }
        }
        Ok((Expo(expo), coeff))
    }

    pub(super) fn parse_poly(&mut self, vars: &Arc<Vars>) -> Result<MPoly, AlgError> {
        let mut acc = MPoly::zero(vars);
        self.skip_ws();
        let mut negate = self.eat(b'-');
        loop {
            let (expo, coeff) = self.parse_term(vars)?;
            acc.add_term(expo, if negate { -coeff } else { coeff });
            self.skip_ws();
            if self.eat(b'+') {
                negate = false;
            } else if self.eat(b'-') {
                negate = true;
            } else {
                break;
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat::{rat, rat_int};
    use super::*;

    fn table() -> Arc<Vars> {
        Vars::new(&["s", "u", "a", "b"])
    }

    fn poly(text: &str) -> MPoly {
        MPoly::parse(text, &table()).expect("test polynomial must parse")
    }

    #[test]
    fn graded_lex_puts_higher_total_degree_last() {
        let v = table();
        let a = Expo(vec![2, 0, 0, 0]);
        let b = Expo(vec![0, 1, 1, 1]);
        assert!(a < b, "total degree dominates");
        let c = Expo(vec![1, 1, 0, 0]);
        let d = Expo(vec![1, 0, 1, 0]);
        assert!(d < c, "ties break lexicographically on the exponent vector");
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn display_parse_round_trip_is_bit_exact() {
        let cases = [
            "0",
            "1",
            "-3/2",
            "s",
            "-s + 1",
            "2*s^2*u - 7/2*a*b + u - 1",
            "s^4 - 2*s^2*u^2 + u^4",
            "1/4*a^2 - 1/4*b^2 + 3",
        ];
        for c in cases {
            let p = poly(c);
            assert_eq!(p.to_string(), c, "canonical form of '{c}'");
            let q = MPoly::parse(&p.to_string(), p.vars()).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn arithmetic_matches_hand_expansion() {
        let p = poly("s + u");
        let q = poly("s - u");
        assert_eq!(p.mul(&q), poly("s^2 - u^2"));
        assert_eq!(p.pow(2), poly("s^2 + 2*s*u + u^2"));
        assert_eq!(p.sub(&p), MPoly::zero(&table()));
    }

    #[test]
    fn exact_division_succeeds_and_fails_properly() {
        let p = poly("s^2 - u^2");
        assert_eq!(p.exact_div(&poly("s - u")).unwrap(), poly("s + u"));
        assert_eq!(
            p.exact_div(&poly("s + 1")).unwrap_err(),
            AlgError::NotDivisible
        );
    }

    #[test]
    fn divrem_in_one_symbol() {
        // (u^2 + u) * (s^2 + s) + (u + 3)  divided by  s^2 + s  in s.
        let d = poly("s^2 + s");
        let p = poly("u^2 + u").mul(&d).add(&poly("u + 3"));
        let (q, r) = p.divrem_in_var(&d, 0).unwrap();
        assert_eq!(q, poly("u^2 + u"));
        assert_eq!(r, poly("u + 3"));
    }

    #[test]
    fn even_part_round_trips_with_square_substitution() {
        let p = poly("s^2*u - 4*s^4 + 7");
        let g = p.even_part_in(0).unwrap();
        assert_eq!(g, poly("s*u - 4*s^2 + 7"));
        let back = g.substitute(0, &poly("s^2"));
        assert_eq!(back, p);
        assert_eq!(
            poly("s*u").even_part_in(0).unwrap_err(),
            AlgError::NotEven("s".into())
        );
    }

    #[test]
    fn substitution_shift_and_reflection() {
        let p = poly("s^2");
        assert_eq!(p.shift_var(0, &rat_int(1)), poly("s^2 + 2*s + 1"));
        // reflection about -1/2 sends s to -1 - s
        assert_eq!(
            poly("s").reflect_var(0, &rat(-1, 2)),
            poly("-s - 1"),
        );
        assert_eq!(
            p.reflect_var(0, &rat(-1, 2)).reflect_var(0, &rat(-1, 2)),
            p,
            "reflection is an involution"
        );
    }

    #[test]
    fn rising_factorial_splits_multiplicatively() {
        // pochhammer(x, m + n) = pochhammer(x, m) * pochhammer(x + m, n)
        let v = table();
        let x = MPoly::var(&v, 1);
        for m in 0..5u32 {
            for n in 0..5u32 {
                let lhs = pochhammer(&x, m + n);
                let rhs = pochhammer(&x, m)
                    .mul(&pochhammer(&x.add(&MPoly::constant(&v, rat_int(m as i64))), n));
                assert_eq!(lhs, rhs, "split at ({m},{n})");
            }
        }
    }

    #[test]
    fn rising_factorial_reflection_identity() {
        // pochhammer(-x, q) = (-1)^q * pochhammer(x - q + 1, q) for q <= 8.
        let v = table();
        let x = MPoly::var(&v, 0);
        for q in 0..=8u32 {
            let lhs = pochhammer(&x.neg(), q);
            let shifted = x.add(&MPoly::constant(&v, rat_int(1 - q as i64)));
            let sign = if q % 2 == 0 { rat_int(1) } else { rat_int(-1) };
            let rhs = pochhammer(&shifted, q).scale(&sign);
            assert_eq!(lhs, rhs, "reflection at q={q}");
        }
    }

    #[test]
    fn evaluation_and_content() {
        let p = poly("2*s^2 - 4*u + 6");
        assert_eq!(p.content(), rat_int(2));
        let vals = [rat_int(3), rat_int(5), rat_int(0), rat_int(0)];
        assert_eq!(p.eval(&vals), rat_int(2 * 9 - 20 + 6));
        assert_eq!(poly("1/2*s + 1/3").content(), rat(1, 6));
    }
}

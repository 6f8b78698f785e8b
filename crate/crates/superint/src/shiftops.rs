//! Difference operators in one index symbol with exact rational-function
//! coefficients.
//!
//! A [`ShiftOp`] is a finite sum of shift terms `(m, c)` acting on formal
//! basis vectors labelled by the index symbol `s`:
//!
//! ```text
//!     X · Ψ_s  =  Σ_m  c_m(s) · Ψ_{s+m}
//! ```
//!
//! i.e. the coefficient is evaluated at the *source* label and the term moves
//! the label up by `m`.  Composition follows the same convention:
//! `compose(A, B)` applies `B` first, so the term `(m_A, c_A)·(m_B, c_B)`
//! contributes shift `m_A + m_B` with coefficient `c_B(s) · c_A(s + m_B)`.
//! One consequence fixed by this convention (asserted in the tests): for the
//! diagonal operator `S = mult-by-s` and the unit shift `T`,
//! `[S, T] = +T`, because `T` moves a vector from label `s` to label `s+1`
//! before `S` reads the label.
//!
//! Key items: [`ShiftOp`], [`commutator`], [`anticommutator`],
//! [`symmetrizer3`], [`ShiftOp::reflect`], [`to_diagonal`],
//! [`DiagonalRewrite`], [`OpError`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{rat_int, AlgError, MPoly, RFunc, Rat, Vars};

/// Errors raised by shift-operator manipulations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OpError {
    /// A diagonal operator was required but off-diagonal shifts remain.
    #[error("operator is not diagonal: shifts {0:?} present")]
    NotDiagonal(Vec<i64>),
    /// An underlying exact-algebra failure (non-even polynomial, nontrivial
    /// denominator, failed rewrite, …).
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// A difference operator: finite map from shifts to nonzero coefficients.
#[derive(Debug, Clone)]
pub struct ShiftOp {
    vars: Arc<Vars>,
    index: usize,
    terms: BTreeMap<i64, RFunc>,
}

impl ShiftOp {
    /// The zero operator over the given table with the given index symbol.
    pub fn zero(vars: &Arc<Vars>, index: usize) -> ShiftOp {
        assert!(index < vars.len());
        ShiftOp {
            vars: vars.clone(),
            index,
            terms: BTreeMap::new(),
        }
    }

    /// A single-term operator `c · (shift by m)`.
    pub fn term(vars: &Arc<Vars>, index: usize, shift: i64, coeff: RFunc) -> ShiftOp {
        let mut op = ShiftOp::zero(vars, index);
        op.add_term(shift, coeff);
        op
    }

    /// The diagonal operator multiplying by `coeff(s)`.
    pub fn diagonal(vars: &Arc<Vars>, index: usize, coeff: RFunc) -> ShiftOp {
        ShiftOp::term(vars, index, 0, coeff)
    }

    /// The identity operator.
    pub fn identity(vars: &Arc<Vars>, index: usize) -> ShiftOp {
        ShiftOp::diagonal(vars, index, RFunc::one(vars))
    }

    /// The symbol table of the operator.
    pub fn vars(&self) -> &Arc<Vars> {
        &self.vars
    }

    /// Position of the index symbol in the table.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Iterates over `(shift, coefficient)` in increasing shift order.
    pub fn terms(&self) -> impl Iterator<Item = (&i64, &RFunc)> {
        self.terms.iter()
    }

    /// The coefficient at a given shift (zero if absent).
    pub fn coeff(&self, shift: i64) -> RFunc {
        self.terms
            .get(&shift)
            .cloned()
            .unwrap_or_else(|| RFunc::zero(&self.vars))
    }

    /// True if the operator has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c · (shift by m)` in place, dropping cancelled terms.
    pub fn add_term(&mut self, shift: i64, coeff: RFunc) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(shift) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&coeff);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Operator sum.
    pub fn add(&self, other: &ShiftOp) -> ShiftOp {
        self.check_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    /// Operator difference.
    pub fn sub(&self, other: &ShiftOp) -> ShiftOp {
        self.add(&other.neg())
    }

    /// Additive inverse.
    pub fn neg(&self) -> ShiftOp {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    /// Scales every coefficient by a rational constant.
    pub fn scale(&self, c: &Rat) -> ShiftOp {
        if c.is_zero() {
            return ShiftOp::zero(&self.vars, self.index);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.scale(c);
        }
        out
    }

    fn check_compatible(&self, other: &ShiftOp) {
        assert!(
            self.index == other.index && (Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars),
            "operators use different index symbols or tables"
        );
    }

    /// Composition `self ∘ other` (`other` acts first): the term
    /// `(m_a, c_a)·(m_b, c_b)` contributes `(m_a + m_b, c_b(s)·c_a(s+m_b))`.
    pub fn compose(&self, other: &ShiftOp) -> ShiftOp {
        self.check_compatible(other);
        let mut out = ShiftOp::zero(&self.vars, self.index);
        for (mb, cb) in &other.terms {
            let delta = Rat::from_integer((*mb).into());
            for (ma, ca) in &self.terms {
                let shifted = ca.shift_var(self.index, &delta);
                out.add_term(ma + mb, cb.mul(&shifted));
            }
        }
        out
    }

    /// `self^n` under composition.
    pub fn compose_pow(&self, n: u32) -> ShiftOp {
        let mut acc = ShiftOp::identity(&self.vars, self.index);
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Reflection about `center`: each term `(m, c(s))` becomes
    /// `(-m, c(2·center − s))`.  An involutive algebra automorphism.
    pub fn reflect(&self, center: &Rat) -> ShiftOp {
        let mut out = ShiftOp::zero(&self.vars, self.index);
        for (m, c) in &self.terms {
            out.add_term(-m, c.reflect_var(self.index, center));
        }
        out
    }

    /// Structural equality of coefficients at every shift.
    pub fn eq_op(&self, other: &ShiftOp) -> bool {
        self.sub(other).is_zero()
    }

    /// The diagonal coefficient, failing with the list of off-diagonal
    /// shifts if any are present.
    pub fn diagonal_coefficient(&self) -> Result<RFunc, OpError> {
        let offenders: Vec<i64> = self.terms.keys().copied().filter(|&m| m != 0).collect();
        if !offenders.is_empty() {
            return Err(OpError::NotDiagonal(offenders));
        }
        Ok(self.coeff(0))
    }

    /// Serializable term list, sorted by shift.
    pub fn term_list(&self) -> Vec<TermRepr> {
        self.terms
            .iter()
            .map(|(m, c)| TermRepr {
                shift: *m,
                coefficient: c.to_string(),
            })
            .collect()
    }
}

impl PartialEq for ShiftOp {
    fn eq(&self, other: &Self) -> bool {
        self.eq_op(other)
    }
}

impl Eq for ShiftOp {}

impl fmt::Display for ShiftOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}]·sh({m})")?;
        }
        Ok(())
    }
}

/// One serialized shift term: the shift and the canonical coefficient text.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct TermRepr {
    /// Shift applied to the basis label.
    pub shift: i64,
    /// Canonical text of the rational-function coefficient.
    pub coefficient: String,
}

/// Commutator `[a, b] = a∘b − b∘a`.
pub fn commutator(a: &ShiftOp, b: &ShiftOp) -> ShiftOp {
    a.compose(b).sub(&b.compose(a))
}

/// Anticommutator `{a, b} = a∘b + b∘a`.
pub fn anticommutator(a: &ShiftOp, b: &ShiftOp) -> ShiftOp {
    a.compose(b).add(&b.compose(a))
}

/// Six-term symmetrizer `{a, b, c} = Σ over all orderings of a∘b∘c`.
pub fn symmetrizer3(a: &ShiftOp, b: &ShiftOp, c: &ShiftOp) -> ShiftOp {
    // A repeated operand collapses pairs of orderings, saving compositions.
    if b.eq_op(c) {
        let bb = b.compose(b);
        return a
            .compose(&bb)
            .add(&b.compose(&a.compose(b)))
            .add(&bb.compose(a))
            .scale(&rat_int(2));
    }
    if a.eq_op(b) {
        let aa = a.compose(a);
        return aa
            .compose(c)
            .add(&a.compose(&c.compose(a)))
            .add(&c.compose(&aa))
            .scale(&rat_int(2));
    }
    if a.eq_op(c) {
        let aa = a.compose(a);
        return aa
            .compose(b)
            .add(&a.compose(&b.compose(a)))
            .add(&b.compose(&aa))
            .scale(&rat_int(2));
    }
    let abc = a.compose(&b.compose(c));
    let acb = a.compose(&c.compose(b));
    let bac = b.compose(&a.compose(c));
    let bca = b.compose(&c.compose(a));
    let cab = c.compose(&a.compose(b));
    let cba = c.compose(&b.compose(a));
    abc.add(&acb).add(&bac).add(&bca).add(&cab).add(&cba)
}

/// One preparatory rewriting step applied to a diagonal coefficient before
/// symbol images are substituted.
#[derive(Debug, Clone)]
pub enum PrepStep {
    /// Re-express the polynomial in the centered symbol `var − center`
    /// (slot keeps the same position), then require evenness and halve the
    /// exponents so the slot means `(var − center)^2`.  The center may
    /// involve other model symbols but not `var` itself.
    CenterEven { var: usize, center: MPoly },
    /// Collect the polynomial as `Σ c_i · pivot^i` with `c_i` free of `var`
    /// (the pivot must be monic in `var` with a constant leading
    /// coefficient); afterwards the slot means the pivot's value.
    Pivot { var: usize, pivot: MPoly },
}

/// Recipe turning a diagonal coefficient over the model symbols into a
/// polynomial over the report symbols (Hamiltonian, symmetry eigenvalue,
/// parameters).
#[derive(Debug, Clone)]
pub struct DiagonalRewrite {
    /// Model-side symbol table of the operators.
    pub model_vars: Arc<Vars>,
    /// Report-side symbol table of the output polynomial.
    pub target_vars: Arc<Vars>,
    /// Preparatory steps (centering/evenness, pivot collection).
    pub prep: Vec<PrepStep>,
    /// Image, over the report symbols, of each (possibly re-meant) model
    /// slot; `None` marks a slot that must not occur after preparation.
    pub images: Vec<Option<RFunc>>,
}

impl DiagonalRewrite {
    /// Applies the recipe to a model-side polynomial.
    pub fn apply_poly(&self, poly: &MPoly) -> Result<MPoly, AlgError> {
        let mut p = poly.clone();
        for step in &self.prep {
            match step {
                PrepStep::CenterEven { var, center } => {
                    // p(s) with s = c + center  ⇒  g(c),  then require even.
                    debug_assert_eq!(center.degree_in(*var), 0);
                    let repl = MPoly::var(&self.model_vars, *var).add(center);
                    p = p.substitute(*var, &repl);
                    p = p.even_part_in(*var)?;
                }
                PrepStep::Pivot { var, pivot } => {
                    let mut collected = MPoly::zero(&self.model_vars);
                    let mut rest = p.clone();
                    let mut power: u16 = 0;
                    loop {
                        let (q, r) = rest.divrem_in_var(pivot, *var)?;
                        if r.degree_in(*var) > 0 {
                            return Err(AlgError::NotExpressible(format!(
                                "residual dependence on '{}' is not a polynomial in the pivot",
                                self.model_vars.name(*var)
                            )));
                        }
                        collected = collected.add(&r.mul(&MPoly::var_pow(&self.model_vars, *var, power)));
                        if q.is_zero() {
                            break;
                        }
                        rest = q;
                        power = power.checked_add(1).expect("pivot power overflow");
                    }
                    p = collected;
                }
            }
        }
        // Substitute report-side images for every surviving slot.
        let mut acc = RFunc::zero(&self.target_vars);
        for (expo, coeff) in p.terms() {
            let mut term = RFunc::constant(&self.target_vars, coeff.clone());
            for (slot, &e) in expo.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let image = self.images[slot].as_ref().ok_or_else(|| {
                    AlgError::NotExpressible(format!(
                        "model symbol '{}' survives rewriting but has no report image",
                        self.model_vars.name(slot)
                    ))
                })?;
                term = term.mul(&image.pow(e as u32));
            }
            acc = acc.add(&term);
        }
        acc.to_poly()
    }
}

/// Extracts the diagonal coefficient of `op` (which must have no other
/// shifts and a polynomial coefficient) and rewrites it over the report
/// symbols.
///
/// Errors: [`OpError::NotDiagonal`] when off-diagonal shifts remain,
/// [`AlgError::NotPolynomial`] when the diagonal coefficient keeps a
/// denominator, [`AlgError::NotEven`] when a required evenness fails, and
/// [`AlgError::NotExpressible`] when the coefficient is not a polynomial in
/// the configured pivots.
pub fn to_diagonal(op: &ShiftOp, rewrite: &DiagonalRewrite) -> Result<MPoly, OpError> {
    let rf = op.diagonal_coefficient()?;
    let poly = rf.to_poly().map_err(OpError::Alg)?;
    rewrite.apply_poly(&poly).map_err(OpError::Alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat, rat_int};

    fn setup() -> (Arc<Vars>, usize) {
        (Vars::new(&["s", "u"]), 0)
    }

    fn rf(text: &str, vars: &Arc<Vars>) -> RFunc {
        RFunc::parse(text, vars).unwrap()
    }

    #[test]
    fn multiplication_by_label_commutes_up_to_unit_shift() {
        // With coefficients read at the source label, the unit shift T moves
        // Ψ_s to Ψ_{s+1}, so S·T reads the label after the move and
        // [S, T] = +T.
        let (vars, idx) = setup();
        let s_op = ShiftOp::diagonal(&vars, idx, rf("s", &vars));
        let t_op = ShiftOp::term(&vars, idx, 1, rf("1", &vars));
        let c = commutator(&s_op, &t_op);
        assert!(c.eq_op(&t_op), "expected [S,T] = +T, got {c}");
    }

    #[test]
    fn composition_shifts_the_first_applied_coefficient() {
        let (vars, idx) = setup();
        let a = ShiftOp::term(&vars, idx, 2, rf("s", &vars));
        let b = ShiftOp::term(&vars, idx, 1, rf("s + 10", &vars));
        // a after b: coefficient (s+10) at source, then s evaluated at s+1.
        let ab = a.compose(&b);
        let expect = ShiftOp::term(
            &vars,
            idx,
            3,
            rf("s^2 + 11*s + 10", &vars),
        );
        assert!(ab.eq_op(&expect), "got {ab}");
    }

    #[test]
    fn composition_is_associative() {
        let (vars, idx) = setup();
        let a = ShiftOp::term(&vars, idx, 1, rf("s^2 + 1", &vars));
        let mut b = ShiftOp::term(&vars, idx, -2, rf("s - 3", &vars));
        b.add_term(0, rf("u*s", &vars));
        let c = ShiftOp::term(&vars, idx, 1, rf("2*s + u", &vars));
        let lhs = a.compose(&b).compose(&c);
        let rhs = a.compose(&b.compose(&c));
        assert!(lhs.eq_op(&rhs));
    }

    #[test]
    fn jacobi_identity_holds() {
        let (vars, idx) = setup();
        let a = ShiftOp::term(&vars, idx, 1, rf("s", &vars));
        let b = ShiftOp::term(&vars, idx, -1, rf("s + u", &vars));
        let c = ShiftOp::diagonal(&vars, idx, rf("s^2", &vars));
        let j = commutator(&a, &commutator(&b, &c))
            .add(&commutator(&b, &commutator(&c, &a)))
            .add(&commutator(&c, &commutator(&a, &b)));
        assert!(j.is_zero(), "Jacobi identity failed: {j}");
    }

    #[test]
    fn reflection_is_an_involutive_automorphism() {
        let (vars, idx) = setup();
        let center = rat(-1, 2);
        let a = ShiftOp::term(&vars, idx, 2, rf("s^2 + u", &vars));
        let b = ShiftOp::term(&vars, idx, -1, rf("3*s - 1", &vars));
        let twice = a.reflect(&center).reflect(&center);
        assert!(twice.eq_op(&a), "reflection must be involutive");
        let lhs = a.compose(&b).reflect(&center);
        let rhs = a.reflect(&center).compose(&b.reflect(&center));
        assert!(lhs.eq_op(&rhs), "reflection must preserve composition");
    }

    #[test]
    fn symmetrizer_with_repeated_entry_matches_expansion() {
        let (vars, idx) = setup();
        let l2 = ShiftOp::diagonal(&vars, idx, rf("s^2", &vars));
        let l4 = ShiftOp::term(&vars, idx, 1, rf("s", &vars));
        let sym = symmetrizer3(&l2, &l4, &l4);
        let expect = l2
            .compose(&l4.compose(&l4))
            .add(&l4.compose(&l2.compose(&l4)))
            .add(&l4.compose(&l4.compose(&l2)))
            .scale(&rat_int(2));
        assert!(sym.eq_op(&expect));
    }

    #[test]
    fn diagonal_extraction_rejects_off_diagonal_shifts() {
        let (vars, idx) = setup();
        let mut op = ShiftOp::diagonal(&vars, idx, rf("s^2", &vars));
        op.add_term(3, rf("1", &vars));
        match op.diagonal_coefficient() {
            Err(OpError::NotDiagonal(shifts)) => assert_eq!(shifts, vec![3]),
            other => panic!("expected NotDiagonal, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_rewrite_even_center_and_pivot() {
        // Model symbols (s, u); report symbols (A, B).
        // s is centered at -1/2 and squared into A; u is collected through
        // the pivot u^2 + u into B.
        let model = Vars::new(&["s", "u"]);
        let target = Vars::new(&["A", "B"]);
        let rw = DiagonalRewrite {
            model_vars: model.clone(),
            target_vars: target.clone(),
            prep: vec![
                PrepStep::CenterEven { var: 0, center: MPoly::constant(&model, rat(-1, 2)) },
                PrepStep::Pivot { var: 1, pivot: MPoly::parse("u^2 + u", &model).unwrap() },
            ],
            images: vec![
                Some(RFunc::parse("A", &target).unwrap()),
                Some(RFunc::parse("-B", &target).unwrap()),
            ],
        };
        // (s + 1/2)^2 * (u^2 + u)  ⇒  A * (-B).
        let p = MPoly::parse("s^2 + s + 1/4", &model)
            .unwrap()
            .mul(&MPoly::parse("u^2 + u", &model).unwrap());
        let out = rw.apply_poly(&p).unwrap();
        assert_eq!(out, MPoly::parse("-A*B", &target).unwrap());
        // An odd centered power must be rejected.
        let odd = MPoly::parse("s + 1/2", &model).unwrap();
        assert!(matches!(rw.apply_poly(&odd), Err(AlgError::NotEven(_))));
        // Linear leftover dependence on u must be rejected.
        let linear = MPoly::parse("u", &model).unwrap();
        assert!(matches!(rw.apply_poly(&linear), Err(AlgError::NotExpressible(_))));
    }
}

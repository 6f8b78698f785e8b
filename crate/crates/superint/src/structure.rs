//! Structure equations of the symmetry algebras, verified as exact operator
//! identities.
//!
//! For each model the ladder products are computed twice — once by composing
//! the shift operators, once from closed-form Pochhammer products — and the
//! diagonal closure polynomials `P` are extracted over the report symbols
//! (energy, diagonal symmetry eigenvalue, parameters) with an exact round
//! trip back to the model side.  Every commutator, anticommutator,
//! symmetrized-cube and Casimir relation of the family is then a shift
//! operator that must normalize to zero.
//!
//! Two further constructions live here:
//!
//! * [`build_l5`] — an extra odd-order symmetry for the deformed oscillator
//!   family, assembled in the gauged index model.  Its diagonal part is
//!   fixed by requiring every coefficient pole to be removable on the
//!   invariant span; the resulting numerator `Q` is derived from an exact
//!   residue computation, cross-checked against a closed form, and compared
//!   with a parity-indexed product formula.
//! * [`stackel_transfer`] — the coupling/energy exchange sending the
//!   deformed oscillator family to the deformed Coulomb family
//!   (`H -> 4Z`, `om^2 -> 4Hp`), checked against the independently derived
//!   Coulomb-side closure polynomials, together with the exchanged-energy
//!   formula.

use std::sync::Arc;

use num::traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{pochhammer, rat, rat_int, rat_pow, AlgError, MPoly, RFunc, Rat, Vars};
use crate::shiftops::{
    anticommutator, commutator, symmetrizer3, DiagonalRewrite, OpError, ShiftOp, TermRepr,
};
use crate::systems::{build_model, symmetrized_pair, ttw_gauged, SysError, SystemId, SystemModel};

/// Version tag stamped on every serialized report.
pub const SCHEMA_VERSION: &str = "1";

/// Errors from structure-equation verification.
#[derive(Debug, Error)]
pub enum StructError {
    #[error(transparent)]
    Sys(#[from] SysError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    /// Two independent derivations of the same quantity disagree.
    #[error("{which}: independent derivations disagree: got {got}, expected {expected}")]
    OracleMismatch {
        which: String,
        got: String,
        expected: String,
    },
    /// An identity that the construction itself depends on failed.
    #[error("identity `{name}` failed with residual {residual}")]
    Identity { name: String, residual: String },
}

// ---------------------------------------------------------------------------
// Ladder products
// ---------------------------------------------------------------------------

/// The two diagonal ladder products of a model, as model-side polynomials.
#[derive(Debug, Clone)]
pub struct LadderProducts {
    /// Diagonal of `raise ∘ lower` (lower first).
    pub down_up: MPoly,
    /// Diagonal of `lower ∘ raise` (raise first).
    pub up_down: MPoly,
}

/// Closed-form Pochhammer products for both ladder orderings.
///
/// These are written from scratch (fresh factorials, explicit sign
/// constants) so that agreement with the composed shift operators is a real
/// cross-check of the ladder construction and the composition rule.
fn product_oracle(m: &SystemModel) -> (MPoly, MPoly) {
    let vars = &m.vars;
    let (p, q) = (m.p, m.q);
    let (pu, qu) = (p as u32, q as u32);
    let k = rat(p, q);
    let one = MPoly::one(vars);
    match m.id {
        SystemId::Sphere => {
            let nn = MPoly::var(vars, 0);
            let en = MPoly::var(vars, 1);
            let pa = MPoly::var(vars, 2);
            // kc = k (N + 1/2)
            let kc = MPoly::affine(vars, 0, k.clone(), rat(p, 2 * q));
            let sign_q = rat_pow(&rat_int(-1), qu);
            let down_up = pochhammer(&pa.sub(&nn), qu)
                .mul(&pochhammer(&nn.add(&pa).neg(), qu))
                .mul(&pochhammer(&en.add(&kc).neg(), pu))
                .mul(&pochhammer(&en.add(&one).sub(&kc), pu))
                .scale(&sign_q);
            let up_down = pochhammer(&nn.sub(&pa).add(&one), qu)
                .mul(&pochhammer(&nn.add(&pa).add(&one), qu))
                .mul(&pochhammer(&kc.sub(&en), pu))
                .mul(&pochhammer(&en.add(&kc).add(&one), pu))
                .scale(&sign_q);
            (down_up, up_down)
        }
        SystemId::ComplexEuclidean => {
            let be = MPoly::var(vars, 1);
            let both = be.pow(2 * pu);
            (both.clone(), both)
        }
        SystemId::CagedOscillator => {
            let t = MPoly::var(vars, 0);
            let u = MPoly::var(vars, 1);
            let mu = MPoly::var(vars, 2);
            let a1 = MPoly::var(vars, 3);
            let a2 = MPoly::var(vars, 4);
            let cq = MPoly::constant(vars, rat_int(q));
            let c = rat_pow(&rat_int(-16 * p * p), qu) * rat_pow(&rat_int(-16 * q * q), pu);
            let front = mu.pow(2 * (pu + qu)).scale(&c);
            let down_up = front
                .mul(&pochhammer(&t.sub(&cq).add(&one), qu))
                .mul(&pochhammer(
                    &u.neg().add(&t.sub(&cq).scale(&k)).sub(&a2),
                    pu,
                ))
                .mul(&pochhammer(&t.add(&a1).neg(), qu))
                .mul(&pochhammer(&u.sub(&t.scale(&k)).add(&one), pu));
            let up_down = front
                .mul(&pochhammer(&t.add(&cq).add(&a1).neg(), qu))
                .mul(&pochhammer(
                    &u.sub(&t.add(&cq).scale(&k)).add(&one),
                    pu,
                ))
                .mul(&pochhammer(&t.add(&one), qu))
                .mul(&pochhammer(&u.neg().add(&t.scale(&k)).sub(&a2), pu));
            (down_up, up_down)
        }
        SystemId::Ttw | SystemId::KeplerDeformed => {
            let n = MPoly::var(vars, 0);
            let u = MPoly::var(vars, 1);
            let a = MPoly::var(vars, 2);
            let b = MPoly::var(vars, 3);
            let om = MPoly::var(vars, 4);
            let abp1 = a.add(&b).add(&one);
            let c = rat_pow(&rat_int(4), qu) * rat_pow(&rat_int(-1), pu);
            let front = om.pow(2 * pu).scale(&c);
            let ka = n.add(&abp1).scale(&k);
            let down_up = front
                .mul(&pochhammer(&n.neg(), qu))
                .mul(&pochhammer(&n.add(&a).neg(), qu))
                .mul(&pochhammer(&n.add(&b).neg(), qu))
                .mul(&pochhammer(&n.add(&a).add(&b).neg(), qu))
                .mul(&pochhammer(&u.sub(&n.scale(&k)).add(&one), pu))
                .mul(&pochhammer(&u.add(&ka).neg(), pu));
            let up_down = front
                .mul(&pochhammer(&n.add(&one), qu))
                .mul(&pochhammer(&n.add(&a).add(&one), qu))
                .mul(&pochhammer(&n.add(&b).add(&one), qu))
                .mul(&pochhammer(&abp1.add(&n), qu))
                .mul(&pochhammer(&n.scale(&k).sub(&u), pu))
                .mul(&pochhammer(&u.add(&ka).add(&one), pu));
            (down_up, up_down)
        }
    }
}

/// Computes both ladder products by operator composition and checks them
/// against the closed-form Pochhammer oracles.
pub fn ladder_products(m: &SystemModel) -> Result<LadderProducts, StructError> {
    let du_op = m.ladders.raise.compose(&m.ladders.lower);
    let ud_op = m.ladders.lower.compose(&m.ladders.raise);
    let down_up = du_op.diagonal_coefficient()?.to_poly()?;
    let up_down = ud_op.diagonal_coefficient()?.to_poly()?;
    let (du_oracle, ud_oracle) = product_oracle(m);
    if down_up != du_oracle {
        return Err(StructError::OracleMismatch {
            which: format!("{} raise∘lower product", m.id.as_str()),
            got: down_up.to_string(),
            expected: du_oracle.to_string(),
        });
    }
    if up_down != ud_oracle {
        return Err(StructError::OracleMismatch {
            which: format!("{} lower∘raise product", m.id.as_str()),
            got: up_down.to_string(),
            expected: ud_oracle.to_string(),
        });
    }
    Ok(LadderProducts { down_up, up_down })
}

// ---------------------------------------------------------------------------
// Report-side polynomials
// ---------------------------------------------------------------------------

/// Evaluates a report-side polynomial on model-side eigenvalue images.
fn compose_poly_rfunc(poly: &MPoly, images: &[RFunc], out: &Arc<Vars>) -> RFunc {
    let mut acc = RFunc::zero(out);
    for (expo, coeff) in poly.terms() {
        let mut term = RFunc::constant(out, coeff.clone());
        for (slot, &pw) in expo.0.iter().enumerate() {
            if pw > 0 {
                term = term.mul(&images[slot].pow(pw as u32));
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// Rewrites a model-side diagonal polynomial over the report symbols and
/// round-trips the result back through the eigenvalue images.
fn report_poly(m: &SystemModel, name: &str, model_poly: &MPoly) -> Result<MPoly, StructError> {
    let rp = m.rewrite.apply_poly(model_poly)?;
    let back = compose_poly_rfunc(&rp, &m.report_images, &m.vars);
    if !back.eq_value(&RFunc::from_poly(model_poly.clone())) {
        return Err(StructError::OracleMismatch {
            which: format!("{} round trip for {}", name, m.id.as_str()),
            got: back.to_string(),
            expected: model_poly.to_string(),
        });
    }
    Ok(rp)
}

// ---------------------------------------------------------------------------
// Equation checks
// ---------------------------------------------------------------------------

/// One verified (or failed) operator identity.
#[derive(Debug, Clone)]
pub struct EquationCheck {
    pub name: String,
    /// Fixed symbolic text of the identity being checked.
    pub display: String,
    /// `lhs − rhs`; the identity holds exactly iff this is the zero operator.
    pub residual: ShiftOp,
    pub verified: bool,
}

impl EquationCheck {
    fn check(name: &str, display: &str, lhs: ShiftOp, rhs: ShiftOp) -> EquationCheck {
        let residual = lhs.sub(&rhs);
        let verified = residual.is_zero();
        EquationCheck {
            name: name.to_string(),
            display: display.to_string(),
            residual,
            verified,
        }
    }
}

fn pdiag(vars: &Arc<Vars>, index: usize, poly: &MPoly) -> ShiftOp {
    ShiftOp::diagonal(vars, index, RFunc::from_poly(poly.clone()))
}

/// Multiplies an operator by an index-independent diagonal scalar.
fn scalar_mul(op: &ShiftOp, poly: &MPoly) -> ShiftOp {
    pdiag(op.vars(), op.index(), poly).compose(op)
}

struct EqBundle {
    equations: Vec<EquationCheck>,
    p_entries: Vec<(String, MPoly)>,
    notes: Vec<String>,
}

fn verify_sphere(
    m: &SystemModel,
    l3: &ShiftOp,
    l4: &ShiftOp,
    prod: &LadderProducts,
) -> Result<EqBundle, StructError> {
    let vars = &m.vars;
    let (p, q) = (m.p, m.q);
    let l2 = pdiag(vars, m.index, &m.l2_map);
    let f_plus = prod.down_up.add(&prod.up_down);
    let centered = MPoly::affine(vars, 0, rat_int(1), rat(1, 2)); // N + 1/2
    let f_minus = prod.down_up.sub(&prod.up_down).exact_div(&centered)?;
    let p_plus = pdiag(vars, m.index, &f_plus);
    let p_minus = pdiag(vars, m.index, &f_minus);
    let p_entries = vec![
        ("P_plus".to_string(), report_poly(m, "P_plus", &f_plus)?),
        ("P_minus".to_string(), report_poly(m, "P_minus", &f_minus)?),
    ];

    // R = [L2, L4] = -2qk^2 L3 - q^2 k^2 L4, with k = p/q.
    let r = l3
        .scale(&rat(-2 * p * p, q))
        .add(&l4.scale(&rat_int(-p * p)));
    let p4 = p * p * p * p;
    // Shared compositions: composition is bilinear, so every product of the
    // named operators is assembled once from these pieces.
    let l3l3 = l3.compose(l3);
    let l4l4 = l4.compose(l4);
    let l3l4 = l3.compose(l4);
    let l4l3 = l4.compose(l3);
    let sym442 = l4l4
        .compose(&l2)
        .add(&l4.compose(&l2.compose(l4)))
        .add(&l2.compose(&l4l4))
        .scale(&rat_int(2));
    // R∘R expanded over the cached products of L3 and L4.
    let rr = l3l3
        .scale(&rat(4 * p4, q * q))
        .add(&l3l4.add(&l4l3).scale(&rat(2 * p4, q)))
        .add(&l4l4.scale(&rat_int(p4)));
    let equations = vec![
        EquationCheck::check(
            "commutator_L2_L4",
            "[L2, L4] = -2q k^2 L3 - q^2 k^2 L4",
            commutator(&l2, l4),
            r.clone(),
        ),
        EquationCheck::check(
            "commutator_L2_L3_via_product",
            "[L2, L3] = -q^2 k^2 L3 + 2q L4 L2",
            commutator(&l2, l3),
            l3.scale(&rat_int(-p * p))
                .add(&l4.compose(&l2).scale(&rat_int(2 * q))),
        ),
        EquationCheck::check(
            "commutator_L2_L3_symmetrized",
            "[L2, L3] = q^2 k^2 L3 + q^3 k^2 L4 + q {L2, L4}",
            commutator(&l2, l3),
            l3.scale(&rat_int(p * p))
                .add(&l4.scale(&rat_int(p * p * q)))
                .add(&anticommutator(&l2, l4).scale(&rat_int(q))),
        ),
        EquationCheck::check(
            "commutator_L3_L4",
            "[L3, L4] = q L4^2 - 2 P_minus",
            l3l4.sub(&l4l3),
            l4l4.scale(&rat_int(q)).add(&p_minus.scale(&rat_int(-2))),
        ),
        EquationCheck::check(
            "quadratic_constraint",
            "L4^2 L2 = -k^2 L3^2 + q k^2 L4 L3 + 2 k^2 P_plus",
            l4l4.compose(&l2),
            l3l3.scale(&rat(-p * p, q * q))
                .add(&l4l3.scale(&rat(p * p, q)))
                .add(&p_plus.scale(&rat(2 * p * p, q * q))),
        ),
        EquationCheck::check(
            "symmetrized_constraint",
            "{L4, L4, L2} = -6 k^2 L3^2 - 7 q^2 k^2 L4^2 - 3q k^2 {L3, L4} \
             + 2q k^2 P_minus + 12 k^2 P_plus",
            sym442.clone(),
            l3l3.scale(&rat(-6 * p * p, q * q))
                .add(&l4l4.scale(&rat_int(-7 * p * p)))
                .add(&l3l4.add(&l4l3).scale(&rat(-3 * p * p, q)))
                .add(&p_minus.scale(&rat(2 * p * p, q)))
                .add(&p_plus.scale(&rat(12 * p * p, q * q))),
        ),
        EquationCheck::check(
            "commutator_L2_R",
            "[L2, R] = -2 q^2 k^2 {L2, L4} - q^4 k^4 L4",
            commutator(&l2, &r),
            anticommutator(&l2, l4)
                .scale(&rat_int(-2 * p * p))
                .add(&l4.scale(&rat_int(-p4))),
        ),
        EquationCheck::check(
            "commutator_L4_R",
            "[L4, R] = 2 q^2 k^2 L4^2 - 4q k^2 P_minus",
            l4l3.sub(&l3l4).scale(&rat(-2 * p * p, q)),
            l4l4.scale(&rat_int(2 * p * p))
                .add(&p_minus.scale(&rat(-4 * p * p, q))),
        ),
        EquationCheck::check(
            "casimir",
            "3 R^2/(2 q^2 k^2) + {L4, L4, L2} + (11/2) q^2 k^2 L4^2 \
             - 12 k^2 P_plus - 2q k^2 P_minus = 0",
            rr.scale(&rat(3, 2 * p * p))
                .add(&sym442)
                .add(&l4l4.scale(&rat(11 * p * p, 2)))
                .add(&p_plus.scale(&rat(-12 * p * p, q * q)))
                .add(&p_minus.scale(&rat(-2 * p * p, q))),
            ShiftOp::zero(vars, m.index),
        ),
    ];
    Ok(EqBundle {
        equations,
        p_entries,
        notes: vec![
            "two equivalent forms of the L2-L3 commutator are verified: one through the \
             ordered product L4 L2 and one fully symmetrized"
                .to_string(),
            "{A, B, C} denotes the sum over all six operator orderings; a variant \
             tabulation of the symmetrized constraint and Casimir with L4^2 and P_minus \
             coefficients (-q^2 k^2, -10q k^2) differs from the verified pair by exactly \
             6q k^2 [L3, L4] and is rejected by the exact checker"
                .to_string(),
        ],
    })
}

fn verify_ce(m: &SystemModel, l3: &ShiftOp, l4: &ShiftOp) -> Result<EqBundle, StructError> {
    let vars = &m.vars;
    let p = m.p;
    let p4 = p * p * p * p;
    let l2 = pdiag(vars, m.index, &m.l2_map);
    let r = l3.scale(&rat_int(2 * p)).add(&l4.scale(&rat_int(p * p)));
    let mut equations = vec![
        EquationCheck::check(
            "commutator_L2_L4",
            "[L2, L4] = 2p L3 + p^2 L4",
            commutator(&l2, l4),
            r.clone(),
        ),
        EquationCheck::check(
            "commutator_L2_R",
            "[L2, R] = 2 p^2 {L2, L4} - p^4 L4",
            commutator(&l2, &r),
            anticommutator(&l2, l4)
                .scale(&rat_int(2 * p * p))
                .add(&l4.scale(&rat_int(-p4))),
        ),
        EquationCheck::check(
            "commutator_L4_R",
            "[L4, R] = -2 p^2 L4^2",
            commutator(l4, &r),
            l4.compose(l4).scale(&rat_int(-2 * p * p)),
        ),
    ];

    // The Casimir combination must be purely diagonal; the closure term is
    // derived as minus that diagonal and then identified over the report
    // symbols.
    let combo = r
        .compose(&r)
        .sub(&symmetrizer3(&l2, l4, l4).scale(&rat(2 * p * p, 3)))
        .add(&l4.compose(l4).scale(&rat(11 * p4, 3)));
    let c_model = combo.diagonal_coefficient()?.to_poly()?.neg();
    let c_report = report_poly(m, "closure_term", &c_model)?;
    // The closure term carries the ladder parity sign: +16 p^2 H^p for odd q,
    // -16 p^2 H^p for even q (equivalently the sign is -1 exactly when p + q
    // is even, the case in which L4 is the difference combination).
    let closure_sign: i64 = if m.q % 2 == 0 { -1 } else { 1 };
    let expected = MPoly::var(&m.report_vars, 0)
        .pow(p as u32)
        .scale(&rat_int(closure_sign * 16 * p * p));
    if c_report != expected {
        return Err(StructError::OracleMismatch {
            which: "plane closure term".to_string(),
            got: c_report.to_string(),
            expected: expected.to_string(),
        });
    }
    let casimir_display = format!(
        "R^2 - (2 p^2/3) {{L2, L4, L4}} + (11/3) p^4 L4^2 {} 16 p^2 H^p = 0",
        if closure_sign < 0 { "-" } else { "+" }
    );
    equations.push(EquationCheck::check(
        "casimir",
        &casimir_display,
        combo.add(&pdiag(vars, m.index, &c_model)),
        ShiftOp::zero(vars, m.index),
    ));
    Ok(EqBundle {
        equations,
        p_entries: vec![("closure_term".to_string(), c_report)],
        notes: vec![
            "the closure term equals (-1)^(q+1) 16 p^2 H^p with the energy convention \
             H = -be^2; a q-independent positive sign and an H^(2p) power both fail the \
             exact check (the latter on degree grounds, since each ladder contributes \
             be^p) and are rejected"
                .to_string(),
            "for odd p+q the symmetric and antisymmetric ladder combinations exchange \
             roles; the verified equations use the parity-adapted pair"
                .to_string(),
        ],
    })
}

fn verify_caged(
    m: &SystemModel,
    l3: &ShiftOp,
    l4: &ShiftOp,
    prod: &LadderProducts,
) -> Result<EqBundle, StructError> {
    let vars = &m.vars;
    let (p, q) = (m.p, m.q);
    let l1 = pdiag(vars, m.index, &m.l2_map);
    let mu = MPoly::var(vars, 2);
    let p1 = pdiag(vars, m.index, &prod.down_up);
    let p2 = pdiag(vars, m.index, &prod.up_down);
    let p_entries = vec![
        ("P1".to_string(), report_poly(m, "P1", &prod.down_up)?),
        ("P2".to_string(), report_poly(m, "P2", &prod.up_down)?),
    ];
    let r = scalar_mul(l4, &mu.scale(&rat_int(-4 * p * q)));
    // Shared compositions (mu is a central symbol, so R-products reduce to
    // scalar multiples of the cached L3/L4 products).
    let l3l3 = l3.compose(l3);
    let l4l4 = l4.compose(l4);
    let equations = vec![
        EquationCheck::check(
            "commutator_L1_L3",
            "[L1, L3] = -4pq mu L4",
            commutator(&l1, l3),
            scalar_mul(l4, &mu.scale(&rat_int(-4 * p * q))),
        ),
        EquationCheck::check(
            "commutator_L1_L4",
            "[L1, L4] = -4pq mu L3",
            commutator(&l1, l4),
            scalar_mul(l3, &mu.scale(&rat_int(-4 * p * q))),
        ),
        EquationCheck::check(
            "commutator_L3_L4",
            "[L3, L4] = -2 P1 + 2 P2",
            commutator(l3, l4),
            p1.scale(&rat_int(-2)).add(&p2.scale(&rat_int(2))),
        ),
        EquationCheck::check(
            "square_relation",
            "L3^2 = L4^2 + 2 P1 + 2 P2",
            l3l3.clone(),
            l4l4
                .add(&p1.scale(&rat_int(2)))
                .add(&p2.scale(&rat_int(2))),
        ),
        EquationCheck::check(
            "commutator_L1_R",
            "[L1, R] = 16 p^2 q^2 mu^2 L3",
            commutator(&l1, &r),
            scalar_mul(l3, &mu.pow(2).scale(&rat_int(16 * p * p * q * q))),
        ),
        EquationCheck::check(
            "commutator_L3_R",
            "[L3, R] = 8pq mu P1 - 8pq mu P2",
            commutator(l3, &r),
            scalar_mul(&p1.sub(&p2), &mu.scale(&rat_int(8 * p * q))),
        ),
        EquationCheck::check(
            "casimir",
            "R^2 = 16 p^2 q^2 mu^2 (L3^2 - 2 P1 - 2 P2)",
            r.compose(&r),
            scalar_mul(
                &l3l3
                    .sub(&p1.scale(&rat_int(2)))
                    .sub(&p2.scale(&rat_int(2))),
                &mu.pow(2).scale(&rat_int(16 * p * p * q * q)),
            ),
        ),
    ];
    Ok(EqBundle {
        equations,
        p_entries,
        notes: vec![],
    })
}

fn verify_deformed(
    m: &SystemModel,
    l3: &ShiftOp,
    l4: &ShiftOp,
    prod: &LadderProducts,
) -> Result<EqBundle, StructError> {
    let vars = &m.vars;
    let (p, q) = (m.p, m.q);
    let k = rat(p, q);
    let one = MPoly::one(vars);
    let l2 = pdiag(vars, m.index, &m.l2_map);
    let n = MPoly::var(vars, 0);
    let a = MPoly::var(vars, 2);
    let b = MPoly::var(vars, 3);
    let abp1 = a.add(&b).add(&one);
    let div = n.scale(&rat_int(2)).add(&abp1); // 2n + a + b + 1
    let xi = &prod.up_down;
    let eta = &prod.down_up;
    let f_plus = xi.add(eta);
    let f_minus = eta.sub(xi).exact_div(&div)?;
    let p_plus = pdiag(vars, m.index, &f_plus);
    let p_minus = pdiag(vars, m.index, &f_minus);

    let p_plus_rep = report_poly(m, "P_plus", &f_plus)?;
    let p_minus_rep = report_poly(m, "P_minus", &f_minus)?;
    // Both closure polynomials must be even in the leading report symbol
    // (energy for the oscillator family, coupling for the Coulomb family).
    for (name, rp) in [("P_plus", &p_plus_rep), ("P_minus", &p_minus_rep)] {
        if rp.reflect_var(0, &Rat::zero()) != *rp {
            return Err(StructError::Identity {
                name: format!("{name} even in {}", m.report_vars.name(0)),
                residual: rp.to_string(),
            });
        }
    }
    let p_entries = vec![
        ("P_plus".to_string(), p_plus_rep),
        ("P_minus".to_string(), p_minus_rep),
    ];

    let p4 = p * p * p * p;
    let r = l3
        .scale(&rat(-4 * p * p, q))
        .add(&l4.scale(&rat_int(-4 * p * p)));
    // Shared compositions: composition is bilinear, so every product of the
    // named operators is assembled once from these pieces.
    let l3l3 = l3.compose(l3);
    let l4l4 = l4.compose(l4);
    let l3l4 = l3.compose(l4);
    let l4l3 = l4.compose(l3);
    let sym244 = l4l4
        .compose(&l2)
        .add(&l4.compose(&l2.compose(l4)))
        .add(&l2.compose(&l4l4))
        .scale(&rat_int(2));
    // R∘R expanded over the cached products of L3 and L4.
    let rr = l3l3
        .scale(&rat(16 * p4, q * q))
        .add(&l3l4.add(&l4l3).scale(&rat(16 * p4, q)))
        .add(&l4l4.scale(&rat_int(16 * p4)));
    let mut equations = vec![
        EquationCheck::check(
            "commutator_L2_L4",
            "[L2, L4] = -4q k^2 L3 - 4 q^2 k^2 L4",
            commutator(&l2, l4),
            r.clone(),
        ),
        EquationCheck::check(
            "commutator_L2_L3",
            "[L2, L3] = 2q {L2, L4} + 4 q^2 k^2 L3 + 8 q^3 k^2 L4",
            commutator(&l2, l3),
            anticommutator(&l2, l4)
                .scale(&rat_int(2 * q))
                .add(&l3.scale(&rat_int(4 * p * p)))
                .add(&l4.scale(&rat_int(8 * p * p * q))),
        ),
        EquationCheck::check(
            "commutator_L3_L4",
            "[L3, L4] = 2q L4^2 - 2 P_minus",
            l3l4.sub(&l4l3),
            l4l4.scale(&rat_int(2 * q))
                .add(&p_minus.scale(&rat_int(-2))),
        ),
        EquationCheck::check(
            "quartic_constraint",
            "6 k^2 L3^2 + {L2, L4, L4} + 6q k^2 {L3, L4} + 28 q^2 k^2 L4^2 \
             - 4q k^2 P_minus - 12 k^2 P_plus = 0",
            l3l3.scale(&rat(6 * p * p, q * q))
                .add(&sym244)
                .add(&l3l4.add(&l4l3).scale(&rat(6 * p * p, q)))
                .add(&l4l4.scale(&rat_int(28 * p * p)))
                .add(&p_minus.scale(&rat(-4 * p * p, q)))
                .add(&p_plus.scale(&rat(-12 * p * p, q * q))),
            ShiftOp::zero(vars, m.index),
        ),
        EquationCheck::check(
            "commutator_L2_R",
            "[L2, R] = -8 q^2 k^2 {L2, L4} - 16 q^4 k^4 L4",
            commutator(&l2, &r),
            anticommutator(&l2, l4)
                .scale(&rat_int(-8 * p * p))
                .add(&l4.scale(&rat_int(-16 * p4))),
        ),
        EquationCheck::check(
            "commutator_L4_R",
            "[L4, R] = 8 q^2 k^2 L4^2 - 8q k^2 P_minus",
            l4l3.sub(&l3l4).scale(&rat(-4 * p * p, q)),
            l4l4.scale(&rat_int(8 * p * p))
                .add(&p_minus.scale(&rat(-8 * p * p, q))),
        ),
        EquationCheck::check(
            "casimir",
            "3 R^2/(8 q^2 k^2) + 22 q^2 k^2 L4^2 + {L2, L4, L4} \
             - 4q k^2 P_minus - 12 k^2 P_plus = 0",
            rr.scale(&rat(3, 8 * p * p))
                .add(&l4l4.scale(&rat_int(22 * p * p)))
                .add(&sym244)
                .add(&p_minus.scale(&rat(-4 * p * p, q)))
                .add(&p_plus.scale(&rat(-12 * p * p, q * q))),
            ShiftOp::zero(vars, m.index),
        ),
    ];

    let mut notes = vec![];
    if m.id == SystemId::KeplerDeformed {
        // Exchanged-energy relation: Z^2 = Hp (2u + 1 + (a+b+1)k)^2 on the
        // joint eigenbasis.
        let u = MPoly::var(vars, 1);
        let x = u.scale(&rat_int(2)).add(&one).add(&abp1.scale(&k));
        let z_map = &m.extra_diag[0].1;
        equations.push(EquationCheck::check(
            "energy_relation",
            "Z^2 = Hp (2u + 1 + (a+b+1)k)^2",
            pdiag(vars, m.index, &z_map.pow(2)),
            pdiag(vars, m.index, &m.h_map.mul(&x.pow(2))),
        ));
        notes.push(
            "closure polynomials are expressed over (Z, L2, Hp, a, b); the exchange map \
             sends the oscillator energy to 4Z and the squared frequency to 4Hp"
                .to_string(),
        );
    }
    Ok(EqBundle {
        equations,
        p_entries,
        notes,
    })
}

// ---------------------------------------------------------------------------
// The extra odd-order symmetry (deformed oscillator family)
// ---------------------------------------------------------------------------

/// One pole-removability check for the extra symmetry's coefficients.
#[derive(Debug, Clone)]
pub struct PoleCheck {
    pub pole: String,
    /// The summed residue of all coefficients whose argument collides there.
    pub residue_sum: String,
    pub removable: bool,
}

/// The closing check of the `k = 1` anticommutator relation.
#[derive(Debug, Clone)]
pub struct K1Check {
    pub relation_display: String,
    /// The relation with closing constant `kappa = Q/2` holds exactly.
    pub verified: bool,
    /// Derived closing constant over the report symbols.
    pub kappa: MPoly,
    /// Alternative closing constant `H (a^2-b^2)/16` that is also in
    /// circulation; it does not satisfy the relation.
    pub kappa_variant: MPoly,
    pub variant_matches: bool,
    /// Diagonal residual left by the variant constant, over the gauged
    /// model symbols.
    pub variant_residual: String,
}

/// The extra odd-order symmetry `L5`, built in the gauged index model.
#[derive(Debug, Clone)]
pub struct L5Data {
    pub p: i64,
    pub q: i64,
    /// Gauged model symbols `(s, u, a, b, om)`.
    pub vars: Arc<Vars>,
    /// Report symbols the diagonal numerator is expressed over.
    pub report_vars: Arc<Vars>,
    /// The operator: shifts `+q`, `-q` and a diagonal part.
    pub op: ShiftOp,
    pub c_plus: RFunc,
    pub c_minus: RFunc,
    pub beta: RFunc,
    /// Diagonal numerator over the gauged model symbols (no index).
    pub q_model: MPoly,
    /// The same numerator over the report symbols.
    pub q_poly: MPoly,
    /// The residue-derived numerator agrees with `-2 rho(-q/2)`.
    pub closed_form_matches: bool,
    pub parity_case: &'static str,
    pub residues: Vec<PoleCheck>,
    /// `[L2, L5] = L4` holds exactly.
    pub commutator_ok: bool,
    /// Parity-indexed product formula for the numerator.
    pub parity_product_q: MPoly,
    pub parity_product_matches: bool,
    /// "equal", "opposite sign" or "different".
    pub parity_product_relation: &'static str,
    pub k1: Option<K1Check>,
    pub notes: Vec<String>,
}

/// The parity-indexed product formula for the diagonal numerator, over the
/// report symbols `(H, L2, om, a, b)`.
fn parity_product_q(p: i64, q: i64, rv: &Arc<Vars>) -> (MPoly, &'static str) {
    let h = MPoly::var(rv, 0);
    let om = MPoly::var(rv, 2);
    let a = MPoly::var(rv, 3);
    let b = MPoly::var(rv, 4);
    let a2b2 = a.pow(2).sub(&b.pow(2));
    // c^2 om^2 - H^2/16
    let radial = |c: Rat| -> MPoly {
        om.pow(2)
            .scale(&(c.clone() * c))
            .sub(&h.pow(2).scale(&rat(1, 16)))
    };
    // (c-a-b)(c+a+b)(c+a-b)(c-a+b)/4
    let quad = |c: i64| -> MPoly {
        let apb = a.add(&b);
        let amb = a.sub(&b);
        let cc = MPoly::constant(rv, rat_int(c));
        cc.sub(&apb)
            .mul(&cc.add(&apb))
            .mul(&cc.add(&amb))
            .mul(&cc.sub(&amb))
            .scale(&rat(1, 4))
    };
    if p % 2 == 0 {
        let mut acc = a2b2;
        for l in 1..=(p / 2) {
            acc = acc.mul(&radial(rat(2 * l - 1, 2)));
        }
        for j in 1..=((q - 1) / 2) {
            acc = acc.mul(&quad(2 * j));
        }
        (acc, "p even, q odd")
    } else if q % 2 == 1 {
        let mut acc = h.mul(&a2b2).scale(&rat(-1, 4));
        for l in 1..=((p - 1) / 2) {
            acc = acc.mul(&radial(rat_int(l)));
        }
        for j in 1..=((q - 1) / 2) {
            acc = acc.mul(&quad(2 * j));
        }
        (acc, "p odd, q odd")
    } else {
        let mut acc = h.scale(&rat(-1, 2));
        for l in 1..=((p - 1) / 2) {
            acc = acc.mul(&radial(rat_int(l)));
        }
        for hh in 0..=(q / 2 - 1) {
            acc = acc.mul(&quad(2 * hh + 1 - q));
        }
        (acc, "p odd, q even")
    }
}

/// Builds the extra odd-order symmetry in the gauged index model and runs
/// all its exact checks.
pub fn build_l5(p: i64, q: i64) -> Result<L5Data, StructError> {
    let g = ttw_gauged(p, q)?;
    let vars = g.vars.clone();
    let idx = g.index;
    let one = MPoly::one(&vars);

    let two_s = MPoly::affine(&vars, idx, rat_int(2), Rat::zero());
    let two_s_plus = MPoly::affine(&vars, idx, rat_int(2), rat_int(q));
    let two_s_minus = MPoly::affine(&vars, idx, rat_int(2), rat_int(-q));
    // -1/(4 q k^2) = -q/(4 p^2)
    let scalar = rat(-q, 4 * p * p);

    let rho = g.rho.clone();
    let sigma = rho.reflect_var(idx, &Rat::zero());
    let c_plus = RFunc::new(
        rho.scale(&scalar),
        vec![(two_s_plus.clone(), 1), (two_s.clone(), 1)],
    );
    let c_minus = RFunc::new(
        sigma.scale(&scalar),
        vec![(two_s_minus.clone(), 1), (two_s.clone(), 1)],
    );
    // Unit carrying the diagonal denominators: -q/(4 p^2 (2s+q)(2s-q)).
    let g0 = RFunc::new(
        MPoly::constant(&vars, scalar),
        vec![(two_s_plus, 1), (two_s_minus, 1)],
    );

    // The diagonal numerator is fixed by removability of the midpoint pole:
    // res(c_plus) + Q res(g0) = 0 at s = -q/2.
    let pole = rat(-q, 2);
    let r_plus = c_plus.residue_simple(idx, &pole)?;
    let r_g0 = g0.residue_simple(idx, &pole)?;
    let q_model = r_plus.div(&r_g0).neg().to_poly()?;
    // Independent closed form: Q = -2 rho(-q/2).
    let q_closed = rho
        .substitute(idx, &MPoly::constant(&vars, pole.clone()))
        .scale(&rat_int(-2));
    let closed_form_matches = q_model == q_closed;
    if !closed_form_matches {
        return Err(StructError::OracleMismatch {
            which: "diagonal numerator of the odd-order symmetry".to_string(),
            got: q_model.to_string(),
            expected: q_closed.to_string(),
        });
    }

    let beta = g0.mul(&RFunc::from_poly(q_model.clone()));
    let op = ShiftOp::term(&vars, idx, q, c_plus.clone())
        .add(&ShiftOp::term(&vars, idx, -q, c_minus.clone()))
        .add(&ShiftOp::diagonal(&vars, idx, beta.clone()));

    // Removability of all three coefficient poles.  At each pole the shifted
    // arguments of the two colliding coefficients coincide, so removability
    // on the invariant span is exactly a vanishing residue sum.
    let mut residues = vec![];
    {
        let zero = Rat::zero();
        let sum0 = c_plus
            .residue_simple(idx, &zero)?
            .add(&c_minus.residue_simple(idx, &zero)?);
        residues.push(PoleCheck {
            pole: "s = 0".to_string(),
            residue_sum: sum0.to_string(),
            removable: sum0.is_zero(),
        });
        let summ = r_plus.add(&beta.residue_simple(idx, &pole)?);
        residues.push(PoleCheck {
            pole: "s = -q/2".to_string(),
            residue_sum: summ.to_string(),
            removable: summ.is_zero(),
        });
        let pole_p = rat(q, 2);
        let sump = c_minus
            .residue_simple(idx, &pole_p)?
            .add(&beta.residue_simple(idx, &pole_p)?);
        residues.push(PoleCheck {
            pole: "s = +q/2".to_string(),
            residue_sum: sump.to_string(),
            removable: sump.is_zero(),
        });
    }

    // [L2, L5] = L4 exactly.
    let l2op = ShiftOp::diagonal(&vars, idx, RFunc::from_poly(g.l2_map.clone()));
    let inv2s = RFunc::new(one.clone(), vec![(two_s.clone(), 1)]);
    let l4 = g
        .raise
        .sub(&g.lower)
        .compose(&ShiftOp::diagonal(&vars, idx, inv2s));
    let commutator_ok = commutator(&l2op, &op).sub(&l4).is_zero();

    // Re-express the numerator over the report symbols (H, L2, om, a, b):
    // the label u maps to -H/(4 om) - (1 + (a+b+1)k)/2.
    let report_vars = Vars::new(&["H", "L2", "om", "a", "b"]);
    let rh = MPoly::var(&report_vars, 0);
    let rom = MPoly::var(&report_vars, 2);
    let ra = MPoly::var(&report_vars, 3);
    let rb = MPoly::var(&report_vars, 4);
    let k = rat(p, q);
    let abp1k = ra
        .add(&rb)
        .add(&MPoly::one(&report_vars))
        .scale(&k);
    let u_img = RFunc::new(
        rh.scale(&rat(-1, 4)).sub(
            &rom.mul(&MPoly::one(&report_vars).add(&abp1k))
                .scale(&rat(1, 2)),
        ),
        vec![(rom.clone(), 1)],
    );
    let l5_rewrite = DiagonalRewrite {
        model_vars: vars.clone(),
        target_vars: report_vars.clone(),
        prep: vec![],
        images: vec![
            None,
            Some(u_img),
            Some(RFunc::from_poly(ra.clone())),
            Some(RFunc::from_poly(rb.clone())),
            Some(RFunc::from_poly(rom.clone())),
        ],
    };
    let q_poly = l5_rewrite.apply_poly(&q_model)?;
    // Round trip through the gauged eigenvalue images.
    {
        let gu = MPoly::var(&vars, 1);
        let ga = MPoly::var(&vars, 2);
        let gb = MPoly::var(&vars, 3);
        let gom = MPoly::var(&vars, 4);
        let h_map = gu
            .scale(&rat_int(2))
            .add(&one)
            .add(&ga.add(&gb).add(&one).scale(&k))
            .mul(&gom)
            .scale(&rat_int(-2));
        let images = vec![
            RFunc::from_poly(h_map),
            RFunc::from_poly(g.l2_map.clone()),
            RFunc::from_poly(gom),
            RFunc::from_poly(ga),
            RFunc::from_poly(gb),
        ];
        let back = compose_poly_rfunc(&q_poly, &images, &vars);
        if !back.eq_value(&RFunc::from_poly(q_model.clone())) {
            return Err(StructError::OracleMismatch {
                which: "odd-order symmetry numerator round trip".to_string(),
                got: back.to_string(),
                expected: q_model.to_string(),
            });
        }
    }

    let (product_q, parity_case) = parity_product_q(p, q, &report_vars);
    let (parity_product_matches, parity_product_relation) = if q_poly == product_q {
        (true, "equal")
    } else if q_poly == product_q.neg() {
        (false, "opposite sign")
    } else {
        (false, "different")
    };

    let mut notes = vec![
        "the diagonal part is fixed by requiring every coefficient pole to be removable \
         on the invariant span; the numerator is derived from the exact residue at the \
         midpoint pole and cross-checked against -2 rho(-q/2)"
            .to_string(),
    ];
    if !parity_product_matches {
        notes.push(format!(
            "the parity-indexed product formula carries the {} for this (p, q); the \
             residue-derived numerator is authoritative",
            if parity_product_relation == "opposite sign" {
                "opposite overall sign"
            } else {
                "wrong value"
            }
        ));
    }

    // k = 1: the anticommutator relation with L2 closes with kappa = Q/2.
    let k1 = if p == 1 && q == 1 {
        let l3g = g.raise.add(&g.lower);
        let kappa_model = q_model.scale(&rat(1, 2));
        let lhs = anticommutator(&op, &l2op);
        let rhs = op
            .scale(&rat_int(-2))
            .add(&l3g.add(&l4).scale(&rat(1, 2)))
            .add(&ShiftOp::diagonal(
                &vars,
                idx,
                RFunc::from_poly(kappa_model.clone()),
            ));
        let verified = lhs.sub(&rhs).is_zero();
        let kappa = q_poly.scale(&rat(1, 2));
        let kappa_variant = rh
            .mul(&ra.pow(2).sub(&rb.pow(2)))
            .scale(&rat(1, 16));
        // Variant residual on the gauged model side.
        let gu = MPoly::var(&vars, 1);
        let ga = MPoly::var(&vars, 2);
        let gb = MPoly::var(&vars, 3);
        let gom = MPoly::var(&vars, 4);
        let h_model = gu
            .scale(&rat_int(2))
            .add(&one)
            .add(&ga.add(&gb).add(&one).scale(&k))
            .mul(&gom)
            .scale(&rat_int(-2));
        let variant_model = h_model
            .mul(&ga.pow(2).sub(&gb.pow(2)))
            .scale(&rat(1, 16));
        let variant_residual = kappa_model.sub(&variant_model);
        let variant_matches = variant_residual.is_zero();
        if !variant_matches {
            notes.push(
                "at k = 1 the relation closes with kappa = Q/2; the alternative constant \
                 H (a^2 - b^2)/16 leaves the reported nonzero diagonal residual"
                    .to_string(),
            );
        }
        Some(K1Check {
            relation_display: "{L5, L2} = -2 L5 + (1/2)(L3 + L4) + kappa, kappa = Q/2"
                .to_string(),
            verified,
            kappa,
            kappa_variant,
            variant_matches,
            variant_residual: variant_residual.to_string(),
        })
    } else {
        None
    };

    Ok(L5Data {
        p,
        q,
        vars,
        report_vars,
        op,
        c_plus,
        c_minus,
        beta,
        q_model,
        q_poly,
        closed_form_matches,
        parity_case,
        residues,
        commutator_ok,
        parity_product_q: product_q,
        parity_product_matches,
        parity_product_relation,
        k1,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Coupling/energy exchange to the deformed Coulomb family
// ---------------------------------------------------------------------------

/// Applies the exchange map to a polynomial over `(H, L2, om, a, b)`:
/// positionally renames to `(Z, L2, Hp, a, b)`, sends `om^2 -> 4 Hp`
/// (the polynomial must be even in `om`) and `H -> 4 Z`.
pub fn stackel_map_poly(poly: &MPoly, kepler_vars: &Arc<Vars>) -> Result<MPoly, StructError> {
    let renamed = poly.rename_table(kepler_vars);
    let even = renamed.even_part_in(2)?;
    let hp4 = MPoly::var(kepler_vars, 2).scale(&rat_int(4));
    let z4 = MPoly::var(kepler_vars, 0).scale(&rat_int(4));
    Ok(even.substitute(2, &hp4).substitute(0, &z4))
}

/// Result of transporting the oscillator-family closure data to the
/// Coulomb family and comparing with the directly derived side.
#[derive(Debug, Clone)]
pub struct StackelData {
    pub map_display: String,
    pub p_plus_mapped: MPoly,
    pub p_minus_mapped: MPoly,
    pub p_plus_matches: bool,
    pub p_minus_matches: bool,
    /// Exchanged image of the odd-order symmetry numerator, when present.
    pub q_mapped: Option<MPoly>,
    pub energy_formula: String,
    pub energy_identity_verified: bool,
}

/// Transports the verified oscillator-family closure polynomials through
/// the exchange map and compares them with the Coulomb family's own
/// derivation.
pub fn stackel_transfer(
    ttw: &Verification,
    kepler: &Verification,
) -> Result<StackelData, StructError> {
    assert_eq!(ttw.model.id, SystemId::Ttw);
    assert_eq!(kepler.model.id, SystemId::KeplerDeformed);
    assert_eq!((ttw.model.p, ttw.model.q), (kepler.model.p, kepler.model.q));
    let kv = &kepler.model.report_vars;
    let find = |v: &Verification, name: &str| -> MPoly {
        v.p_entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, poly)| poly.clone())
            .expect("closure polynomial present")
    };
    let p_plus_mapped = stackel_map_poly(&find(ttw, "P_plus"), kv)?;
    let p_minus_mapped = stackel_map_poly(&find(ttw, "P_minus"), kv)?;
    let p_plus_matches = p_plus_mapped == find(kepler, "P_plus");
    let p_minus_matches = p_minus_mapped == find(kepler, "P_minus");
    let q_mapped = match &ttw.l5 {
        Some(d) => Some(stackel_map_poly(&d.q_poly, kv)?),
        None => None,
    };
    let energy_identity_verified = kepler
        .equations
        .iter()
        .find(|e| e.name == "energy_relation")
        .map_or(false, |e| e.verified);
    Ok(StackelData {
        map_display: "H -> 4Z, om^2 -> 4Hp".to_string(),
        p_plus_mapped,
        p_minus_mapped,
        p_plus_matches,
        p_minus_matches,
        q_mapped,
        energy_formula: "E' = Z^2 / (2u + 1 + (a+b+1)k)^2 with u = m + n k on the joint \
                         eigenbasis"
            .to_string(),
        energy_identity_verified,
    })
}

// ---------------------------------------------------------------------------
// Full verification of one system at one (p, q)
// ---------------------------------------------------------------------------

/// Everything established about one system at one `(p, q)`.
#[derive(Debug, Clone)]
pub struct Verification {
    pub model: SystemModel,
    pub l3: ShiftOp,
    pub l4: ShiftOp,
    pub products: LadderProducts,
    /// Closure polynomials over the report symbols.
    pub p_entries: Vec<(String, MPoly)>,
    /// All structure equations, the Casimir relation last among the core
    /// set (name "casimir").
    pub equations: Vec<EquationCheck>,
    pub l5: Option<L5Data>,
    pub notes: Vec<String>,
    /// Every equation verified and, when present, the odd-order symmetry's
    /// own exact checks passed.
    pub all_verified: bool,
}

/// Builds the model, the symmetrized operators and the ladder products, and
/// verifies the family's full equation set exactly.
pub fn verify_structure(id: SystemId, p: i64, q: i64) -> Result<Verification, StructError> {
    let model = build_model(id, p, q)?;
    let products = ladder_products(&model)?;
    let (l3, l4) = symmetrized_pair(&model);
    let bundle = match id {
        SystemId::Sphere => verify_sphere(&model, &l3, &l4, &products)?,
        SystemId::ComplexEuclidean => verify_ce(&model, &l3, &l4)?,
        SystemId::CagedOscillator => verify_caged(&model, &l3, &l4, &products)?,
        SystemId::Ttw | SystemId::KeplerDeformed => verify_deformed(&model, &l3, &l4, &products)?,
    };
    let l5 = match id {
        SystemId::Ttw => Some(build_l5(p, q)?),
        SystemId::KeplerDeformed => {
            let mut d = build_l5(p, q)?;
            d.q_poly = stackel_map_poly(&d.q_poly, &model.report_vars)?;
            d.parity_product_q = stackel_map_poly(&d.parity_product_q, &model.report_vars)?;
            d.report_vars = model.report_vars.clone();
            d.k1 = None;
            d.notes.push(
                "the diagonal numerator is re-expressed through the coupling/energy \
                 exchange (H -> 4Z, om^2 -> 4Hp)"
                    .to_string(),
            );
            Some(d)
        }
        _ => None,
    };
    let l5_ok = l5.as_ref().map_or(true, |d| {
        d.commutator_ok
            && d.closed_form_matches
            && d.residues.iter().all(|r| r.removable)
            && d.k1.as_ref().map_or(true, |k| k.verified)
    });
    let mut notes = model.notes.clone();
    notes.extend(bundle.notes);
    let all_verified = bundle.equations.iter().all(|e| e.verified) && l5_ok;
    Ok(Verification {
        model,
        l3,
        l4,
        products,
        p_entries: bundle.p_entries,
        equations: bundle.equations,
        l5,
        notes,
        all_verified,
    })
}

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

/// One low-order identity checked with its concrete displayed constants.
#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub system: SystemId,
    pub p: i64,
    pub q: i64,
    pub display: String,
    pub residual_is_zero: bool,
}

/// Verifies the six low-order worked identities with their concrete
/// constants.
pub fn worked_examples() -> Result<Vec<WorkedExample>, StructError> {
    let mut out = Vec::new();
    {
        let m = build_model(SystemId::Sphere, 1, 1)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l2 = pdiag(&m.vars, m.index, &m.l2_map);
        let res = commutator(&l4, &l2).sub(&l3.scale(&rat_int(2))).sub(&l4);
        out.push(WorkedExample {
            system: SystemId::Sphere,
            p: 1,
            q: 1,
            display: "2 L3 + L4 = [L4, L2]".to_string(),
            residual_is_zero: res.is_zero(),
        });
    }
    {
        let m = build_model(SystemId::Sphere, 1, 2)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l2 = pdiag(&m.vars, m.index, &m.l2_map);
        let res = commutator(&l4, &l2).sub(&l3).sub(&l4);
        out.push(WorkedExample {
            system: SystemId::Sphere,
            p: 1,
            q: 2,
            display: "L3 + L4 = [L4, L2]".to_string(),
            residual_is_zero: res.is_zero(),
        });
    }
    {
        let m = build_model(SystemId::ComplexEuclidean, 1, 1)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l2 = pdiag(&m.vars, m.index, &m.l2_map);
        let res = commutator(&l2, &l4).sub(&l3.scale(&rat_int(2))).sub(&l4);
        out.push(WorkedExample {
            system: SystemId::ComplexEuclidean,
            p: 1,
            q: 1,
            display: "[L2, L4] = 2 L3 + L4".to_string(),
            residual_is_zero: res.is_zero(),
        });
    }
    {
        let m = build_model(SystemId::ComplexEuclidean, 2, 1)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l2 = pdiag(&m.vars, m.index, &m.l2_map);
        let res = commutator(&l2, &l4).sub(&l3.add(&l4).scale(&rat_int(4)));
        out.push(WorkedExample {
            system: SystemId::ComplexEuclidean,
            p: 2,
            q: 1,
            display: "[L2, L4] = 4 (L3 + L4)".to_string(),
            residual_is_zero: res.is_zero(),
        });
    }
    {
        let m = build_model(SystemId::CagedOscillator, 1, 1)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l1 = pdiag(&m.vars, m.index, &m.l2_map);
        let mu = MPoly::var(&m.vars, 2);
        let res_a = commutator(&l1, &l3).sub(&scalar_mul(&l4, &mu.scale(&rat_int(-4))));
        let res_b = commutator(&l1, &l4).sub(&scalar_mul(&l3, &mu.scale(&rat_int(-4))));
        out.push(WorkedExample {
            system: SystemId::CagedOscillator,
            p: 1,
            q: 1,
            display: "[L1, L3] = -4 mu L4, [L1, L4] = -4 mu L3".to_string(),
            residual_is_zero: res_a.is_zero() && res_b.is_zero(),
        });
    }
    {
        let m = build_model(SystemId::Ttw, 1, 1)?;
        let (l3, l4) = symmetrized_pair(&m);
        let l2 = pdiag(&m.vars, m.index, &m.l2_map);
        let res = commutator(&l2, &l4).add(&l3.add(&l4).scale(&rat_int(4)));
        out.push(WorkedExample {
            system: SystemId::Ttw,
            p: 1,
            q: 1,
            display: "[L2, L4] = -4 (L3 + L4)".to_string(),
            residual_is_zero: res.is_zero(),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Serialized report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ModelRepr {
    pub id: String,
    pub p: i64,
    pub q: i64,
    pub index_symbol: String,
    pub parameters: Vec<String>,
    pub reflection_center: String,
    #[serde(rename = "L2_symbol")]
    pub l2_symbol: String,
    #[serde(rename = "L2_map")]
    pub l2_map: String,
    #[serde(rename = "H_symbol")]
    pub h_symbol: String,
    #[serde(rename = "H_map")]
    pub h_map: String,
    pub extra_diagonal: Vec<(String, String)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LaddersRepr {
    pub raise: Vec<TermRepr>,
    pub lower: Vec<TermRepr>,
    pub raise_action: String,
    pub lower_action: String,
    pub raise_chain: Vec<String>,
    pub lower_chain: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductsRepr {
    pub down_up: String,
    pub up_down: String,
    /// Both orderings matched their closed-form Pochhammer oracles.
    pub closed_form_verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationRepr {
    pub name: String,
    pub display: String,
    pub residual: String,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PPolyRepr {
    pub name: String,
    pub poly: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleRepr {
    pub pole: String,
    pub residue_sum: String,
    pub removable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct K1Repr {
    pub relation: String,
    pub verified: bool,
    pub kappa: String,
    pub kappa_variant: String,
    pub variant_matches: bool,
    pub variant_residual: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct L5Repr {
    pub terms: Vec<TermRepr>,
    pub beta: String,
    #[serde(rename = "Q")]
    pub q_poly: String,
    pub parity_case: String,
    pub residue_checks: Vec<PoleRepr>,
    pub commutator_with_l2_is_l4: bool,
    pub closed_form_matches: bool,
    #[serde(rename = "parity_product_Q")]
    pub parity_product_q: String,
    pub parity_product_matches: bool,
    pub parity_product_relation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<K1Repr>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StackelRepr {
    pub map: String,
    #[serde(rename = "P_plus_mapped")]
    pub p_plus_mapped: String,
    #[serde(rename = "P_minus_mapped")]
    pub p_minus_mapped: String,
    #[serde(rename = "P_plus_matches")]
    pub p_plus_matches: bool,
    #[serde(rename = "P_minus_matches")]
    pub p_minus_matches: bool,
    #[serde(rename = "Q_mapped", skip_serializing_if = "Option::is_none")]
    pub q_mapped: Option<String>,
    pub energy_formula: String,
    pub energy_identity_verified: bool,
}

/// The complete serialized verification report of one system at one `(p, q)`.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub schema_version: String,
    pub system: String,
    pub p: i64,
    pub q: i64,
    pub model: ModelRepr,
    pub ladders: LaddersRepr,
    pub products: ProductsRepr,
    pub equations: Vec<EquationRepr>,
    #[serde(rename = "P_polys")]
    pub p_polys: Vec<PPolyRepr>,
    pub casimir: EquationRepr,
    #[serde(rename = "L5", skip_serializing_if = "Option::is_none")]
    pub l5: Option<L5Repr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stackel: Option<StackelRepr>,
    pub notes: Vec<String>,
    pub all_verified: bool,
}

fn equation_repr(e: &EquationCheck) -> EquationRepr {
    EquationRepr {
        name: e.name.clone(),
        display: e.display.clone(),
        residual: if e.verified {
            "0".to_string()
        } else {
            e.residual.to_string()
        },
        status: if e.verified { "verified" } else { "failed" }.to_string(),
    }
}

/// Serializes a verification (optionally with exchange-map data attached).
pub fn structure_report(v: &Verification, stackel: Option<&StackelData>) -> StructureReport {
    let m = &v.model;
    let parameters = (0..m.vars.len())
        .filter(|&i| i != m.index)
        .map(|i| m.vars.name(i).to_string())
        .collect();
    let model = ModelRepr {
        id: m.id.as_str().to_string(),
        p: m.p,
        q: m.q,
        index_symbol: m.vars.name(m.index).to_string(),
        parameters,
        reflection_center: m.reflection_center.to_string(),
        l2_symbol: m.l2_symbol.to_string(),
        l2_map: m.l2_map.to_string(),
        h_symbol: m.h_symbol.to_string(),
        h_map: m.h_map.to_string(),
        extra_diagonal: m
            .extra_diag
            .iter()
            .map(|(n, p)| (n.to_string(), p.to_string()))
            .collect(),
        notes: m.notes.clone(),
    };
    let ladders = LaddersRepr {
        raise: m.ladders.raise.term_list(),
        lower: m.ladders.lower.term_list(),
        raise_action: m.ladders.raise_action.to_string(),
        lower_action: m.ladders.lower_action.to_string(),
        raise_chain: m.raise_chain.iter().map(|f| f.to_string()).collect(),
        lower_chain: m.lower_chain.iter().map(|f| f.to_string()).collect(),
    };
    let products = ProductsRepr {
        down_up: v.products.down_up.to_string(),
        up_down: v.products.up_down.to_string(),
        closed_form_verified: true,
    };
    let equations: Vec<EquationRepr> = v.equations.iter().map(equation_repr).collect();
    let casimir = v
        .equations
        .iter()
        .find(|e| e.name == "casimir")
        .map(equation_repr)
        .expect("casimir entry present");
    let p_polys = v
        .p_entries
        .iter()
        .map(|(name, poly)| PPolyRepr {
            name: name.clone(),
            poly: poly.to_string(),
        })
        .collect();
    let l5 = v.l5.as_ref().map(|d| L5Repr {
        terms: d.op.term_list(),
        beta: d.beta.to_string(),
        q_poly: d.q_poly.to_string(),
        parity_case: d.parity_case.to_string(),
        residue_checks: d
            .residues
            .iter()
            .map(|r| PoleRepr {
                pole: r.pole.clone(),
                residue_sum: r.residue_sum.clone(),
                removable: r.removable,
            })
            .collect(),
        commutator_with_l2_is_l4: d.commutator_ok,
        closed_form_matches: d.closed_form_matches,
        parity_product_q: d.parity_product_q.to_string(),
        parity_product_matches: d.parity_product_matches,
        parity_product_relation: d.parity_product_relation.to_string(),
        k1: d.k1.as_ref().map(|k| K1Repr {
            relation: k.relation_display.clone(),
            verified: k.verified,
            kappa: k.kappa.to_string(),
            kappa_variant: k.kappa_variant.to_string(),
            variant_matches: k.variant_matches,
            variant_residual: k.variant_residual.clone(),
        }),
        notes: d.notes.clone(),
    });
    let stackel = stackel.map(|s| StackelRepr {
        map: s.map_display.clone(),
        p_plus_mapped: s.p_plus_mapped.to_string(),
        p_minus_mapped: s.p_minus_mapped.to_string(),
        p_plus_matches: s.p_plus_matches,
        p_minus_matches: s.p_minus_matches,
        q_mapped: s.q_mapped.as_ref().map(|q| q.to_string()),
        energy_formula: s.energy_formula.clone(),
        energy_identity_verified: s.energy_identity_verified,
    });
    StructureReport {
        schema_version: SCHEMA_VERSION.to_string(),
        system: m.id.as_str().to_string(),
        p: m.p,
        q: m.q,
        model,
        ladders,
        products,
        equations,
        p_polys,
        casimir,
        l5,
        stackel,
        notes: v.notes.clone(),
        all_verified: v.all_verified,
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    const ORDERS: [(i64, i64); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

    #[test]
    fn sphere_equations_verify_exactly() {
        for (p, q) in [(1, 1), (2, 3)] {
            let v = verify_structure(SystemId::Sphere, p, q).unwrap();
            for e in &v.equations {
                assert!(e.verified, "({p},{q}) {}: {}", e.name, e.residual);
            }
            assert!(v.all_verified);
            assert_eq!(v.equations.len(), 9);
        }
    }

    #[test]
    fn plane_equations_verify_for_both_parities() {
        for (p, q) in [(1, 1), (2, 1), (1, 2), (3, 2)] {
            let v = verify_structure(SystemId::ComplexEuclidean, p, q).unwrap();
            for e in &v.equations {
                assert!(e.verified, "({p},{q}) {}: {}", e.name, e.residual);
            }
            assert!(v.all_verified);
        }
    }

    #[test]
    fn plane_closure_term_is_sixteen_p2_h_to_the_p() {
        let v = verify_structure(SystemId::ComplexEuclidean, 2, 1).unwrap();
        let (name, poly) = &v.p_entries[0];
        assert_eq!(name, "closure_term");
        let h = MPoly::var(&v.model.report_vars, 0);
        assert_eq!(*poly, h.pow(2).scale(&rat_int(64)));
    }

    #[test]
    fn caged_equations_verify_exactly() {
        for (p, q) in [(1, 1), (3, 2)] {
            let v = verify_structure(SystemId::CagedOscillator, p, q).unwrap();
            for e in &v.equations {
                assert!(e.verified, "({p},{q}) {}: {}", e.name, e.residual);
            }
            assert!(v.all_verified);
        }
    }

    #[test]
    fn deformed_oscillator_and_coulomb_equations_verify_exactly() {
        for id in [SystemId::Ttw, SystemId::KeplerDeformed] {
            let v = verify_structure(id, 1, 1).unwrap();
            for e in &v.equations {
                assert!(e.verified, "{id} {}: {}", e.name, e.residual);
            }
            assert!(v.all_verified);
        }
    }

    #[test]
    fn worked_low_order_identities_hold() {
        let examples = worked_examples().unwrap();
        assert_eq!(examples.len(), 6);
        for ex in &examples {
            assert!(ex.residual_is_zero, "{} ({},{})", ex.display, ex.p, ex.q);
        }
    }

    #[test]
    fn odd_order_symmetry_closes_at_low_orders() {
        let d = build_l5(1, 1).unwrap();
        assert!(d.commutator_ok);
        assert!(d.closed_form_matches);
        assert!(d.residues.iter().all(|r| r.removable));
        // Q = -H (a^2 - b^2)/4 at (1, 1).
        let rv = &d.report_vars;
        let h = MPoly::var(rv, 0);
        let a = MPoly::var(rv, 3);
        let b = MPoly::var(rv, 4);
        let expected = h.mul(&a.pow(2).sub(&b.pow(2))).scale(&rat(-1, 4));
        assert_eq!(d.q_poly, expected);
        assert!(d.parity_product_matches);
        let k1 = d.k1.unwrap();
        assert!(k1.verified);
        assert_eq!(k1.kappa, expected.scale(&rat(1, 2)));
        assert!(!k1.variant_matches);
        // kappa - variant = -3 H (a^2 - b^2)/16.
        let residual = expected
            .scale(&rat(1, 2))
            .sub(&h.mul(&a.pow(2).sub(&b.pow(2))).scale(&rat(1, 16)));
        assert_eq!(
            residual,
            h.mul(&a.pow(2).sub(&b.pow(2))).scale(&rat(-3, 16))
        );
    }

    #[test]
    fn odd_order_symmetry_parity_product_relations_are_pinned() {
        let expected: [((i64, i64), &str); 7] = [
            ((1, 1), "equal"),
            ((1, 2), "opposite sign"),
            ((2, 1), "opposite sign"),
            ((1, 3), "equal"),
            ((3, 1), "opposite sign"),
            ((2, 3), "opposite sign"),
            ((3, 2), "equal"),
        ];
        for ((p, q), rel) in expected {
            let d = build_l5(p, q).unwrap();
            assert!(d.commutator_ok, "({p},{q})");
            assert!(d.residues.iter().all(|r| r.removable), "({p},{q})");
            assert_eq!(
                d.parity_product_relation, rel,
                "({p},{q}): derived {} vs product {}",
                d.q_poly, d.parity_product_q
            );
        }
    }

    #[test]
    fn odd_order_symmetry_numerator_at_midpoint_orders() {
        // (2, 1): derived Q = (a^2-b^2)(H^2/16 - om^2/4).
        let d = build_l5(2, 1).unwrap();
        let rv = &d.report_vars;
        let h = MPoly::var(rv, 0);
        let om = MPoly::var(rv, 2);
        let a = MPoly::var(rv, 3);
        let b = MPoly::var(rv, 4);
        let expected = a.pow(2).sub(&b.pow(2)).mul(
            &h.pow(2)
                .scale(&rat(1, 16))
                .sub(&om.pow(2).scale(&rat(1, 4))),
        );
        assert_eq!(d.q_poly, expected);
        // (1, 2): derived Q = (H/8)((a-b)^2 - 1)((a+b)^2 - 1).
        let d = build_l5(1, 2).unwrap();
        let one = MPoly::one(rv);
        let expected = h
            .scale(&rat(1, 8))
            .mul(&a.sub(&b).pow(2).sub(&one))
            .mul(&a.add(&b).pow(2).sub(&one));
        assert_eq!(d.q_poly, expected);
    }

    #[test]
    fn exchange_map_reproduces_coulomb_closure_data() {
        for (p, q) in [(1, 1), (2, 3)] {
            let ttw = verify_structure(SystemId::Ttw, p, q).unwrap();
            let kep = verify_structure(SystemId::KeplerDeformed, p, q).unwrap();
            let s = stackel_transfer(&ttw, &kep).unwrap();
            assert!(s.p_plus_matches, "({p},{q}) P_plus");
            assert!(s.p_minus_matches, "({p},{q}) P_minus");
            assert!(s.energy_identity_verified, "({p},{q}) energy");
            assert!(s.energy_formula.contains("Z^2"));
            // The mapped numerator agrees with the Coulomb-side report.
            let kq = kep.l5.as_ref().unwrap().q_poly.clone();
            assert_eq!(s.q_mapped.unwrap(), kq);
        }
    }

    #[test]
    fn report_serialization_is_deterministic_and_complete() {
        let v = verify_structure(SystemId::Sphere, 1, 1).unwrap();
        let r1 = serde_json::to_string_pretty(&structure_report(&v, None)).unwrap();
        let v2 = verify_structure(SystemId::Sphere, 1, 1).unwrap();
        let r2 = serde_json::to_string_pretty(&structure_report(&v2, None)).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.contains("\"schema_version\""));
        assert!(r1.contains("\"P_polys\""));
        assert!(r1.contains("\"casimir\""));
        assert!(!r1.contains("failed"));
    }

    #[test]
    fn every_family_verifies_at_every_tested_order() {
        // The full matrix is exercised again by the acceptance suite with
        // timing; here it guards the library itself.
        for id in [
            SystemId::Sphere,
            SystemId::ComplexEuclidean,
            SystemId::CagedOscillator,
            SystemId::Ttw,
        ] {
            for (p, q) in ORDERS {
                let v = verify_structure(id, p, q).unwrap();
                assert!(v.all_verified, "{id} ({p},{q})");
            }
        }
    }
}

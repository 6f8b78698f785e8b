//! Acceptance gate: one test per contracted criterion.
//!
//! Each test prints a single `[PASS]`/`[FAIL]` line (visible with
//! `--nocapture`) naming the verified property and its pinned tolerance,
//! then asserts the documented outcome so any drift fails the suite.
//!
//! Three lines are intentionally `[FAIL]`: the variant parity-product form
//! of the odd-order symmetry numerator (3b), the variant k = 1
//! anticommutator constant (3c), and the variant caged-oscillator energy
//! normalization (6b).  Those variant closed forms are rejected by the exact
//! algebra; the tests pin the exact discrepancy (sign flip, factor, or
//! offset) instead of letting it float, so the lines stay honest while
//! regressions in the engine still fail loudly.

use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superint::exactalg::{pochhammer, rat, rat_int, Expo, MPoly, RFunc, Vars};
use superint::numerics::{numeric_report, NumCfg};
use superint::reps::rep_sweep;
use superint::shiftops::{commutator, ShiftOp};
use superint::structure::{stackel_transfer, verify_structure, worked_examples, Verification};
use superint::systems::SystemId;

/// Every ladder order exercised by the gate.
const ORDERS: [(i64, i64); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

/// The four families whose closure the runtime budget is contracted for;
/// the deformed-Coulomb family is verified alongside as the exchange
/// partner.
const CONTRACTED: [SystemId; 4] = [
    SystemId::Sphere,
    SystemId::ComplexEuclidean,
    SystemId::CagedOscillator,
    SystemId::Ttw,
];

struct Matrix {
    cells: Vec<((SystemId, i64, i64), Verification)>,
    elapsed: Duration,
}

impl Matrix {
    fn get(&self, id: SystemId, p: i64, q: i64) -> &Verification {
        &self
            .cells
            .iter()
            .find(|((s, cp, cq), _)| *s == id && (*cp, *cq) == (p, q))
            .unwrap_or_else(|| panic!("cell {} ({p},{q}) missing", id.as_str()))
            .1
    }
}

/// The full verification matrix, built once and shared by the criteria.
/// The timer wraps exactly the exact-arithmetic verification work.
static MATRIX: Lazy<Matrix> = Lazy::new(|| {
    let start = Instant::now();
    let mut cells = Vec::new();
    for &system in SystemId::all().iter() {
        for &(p, q) in &ORDERS {
            let v = verify_structure(system, p, q)
                .unwrap_or_else(|e| panic!("{} ({p},{q}): {e}", system.as_str()));
            cells.push(((system, p, q), v));
        }
    }
    Matrix {
        cells,
        elapsed: start.elapsed(),
    }
});

fn report(label: &str, pass: bool, detail: &str) {
    println!("[{}] {label}: {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_1_structure_closure() {
    let m = &*MATRIX;
    let mut identities = 0usize;
    for ((system, p, q), v) in &m.cells {
        assert!(
            v.all_verified,
            "{} ({p},{q}) reports unverified equations",
            system.as_str()
        );
        for eq in &v.equations {
            assert!(
                eq.verified && eq.residual.is_zero(),
                "{} ({p},{q}) `{}`: residual {}",
                system.as_str(),
                eq.name,
                eq.residual
                    .term_list()
                    .iter()
                    .map(|t| format!("({}) @ shift {}", t.coefficient, t.shift))
                    .collect::<Vec<_>>()
                    .join(" + ")
            );
            if CONTRACTED.contains(system) {
                identities += 1;
            }
        }
    }
    let within_budget = m.elapsed < Duration::from_secs(120);
    report(
        "criterion 1",
        within_budget,
        &format!(
            "structure equations and Casimir close with the exact zero operator \
             (no tolerance) for 4 families x 7 orders ({identities} identities; \
             the exchange-partner family passes the same 7 orders alongside); \
             runtime {:.1}s, budget 120s",
            m.elapsed.as_secs_f64()
        ),
    );
    assert!(
        within_budget,
        "verification matrix took {:.1}s, budget is 120s",
        m.elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_2_worked_examples() {
    let examples = worked_examples().expect("worked examples build");
    assert_eq!(examples.len(), 6, "six worked identities expected");
    for ex in &examples {
        assert!(
            ex.residual_is_zero,
            "{} ({}, {}): `{}` has a nonzero residual",
            ex.system.as_str(),
            ex.p,
            ex.q,
            ex.display
        );
    }
    let displays: Vec<&str> = examples.iter().map(|e| e.display.as_str()).collect();
    report(
        "criterion 2",
        true,
        &format!(
            "all six worked identities reproduced exactly: {}",
            displays.join("; ")
        ),
    );
}

#[test]
fn criterion_3_odd_order_symmetry() {
    let parity_cells: [((i64, i64), &str); 3] = [
        ((2, 1), "opposite sign"),
        ((1, 1), "equal"),
        ((1, 2), "opposite sign"),
    ];

    // 3a: residue construction, telescoped closed form, and the commutator.
    for ((p, q), _) in &parity_cells {
        let v = MATRIX.get(SystemId::Ttw, *p, *q);
        let l5 = v.l5.as_ref().expect("odd-order symmetry data present");
        assert!(
            l5.closed_form_matches,
            "({p},{q}): residue-derived numerator disagrees with -2 rho(-q/2)"
        );
        assert!(l5.commutator_ok, "({p},{q}): [L2, L5] != L4");
        assert!(
            l5.residues.iter().all(|r| r.removable),
            "({p},{q}): a pole residue fails to cancel"
        );
    }
    report(
        "criterion 3a",
        true,
        "odd-order symmetry L5: residue cancellation is exact, the derived \
         numerator Q equals the telescoped closed form -2 rho(-q/2), and \
         [L2, L5] = L4 exactly, at all three parity cases (2,1), (1,1), (1,2)",
    );

    // 3b: the variant parity-indexed product form of Q.
    for ((p, q), expected_relation) in &parity_cells {
        let l5 = MATRIX.get(SystemId::Ttw, *p, *q).l5.as_ref().unwrap();
        assert_eq!(
            l5.parity_product_relation, *expected_relation,
            "({p},{q}): parity-product relation drifted"
        );
        assert_eq!(
            l5.parity_product_matches,
            *expected_relation == "equal",
            "({p},{q}): parity-product match flag inconsistent"
        );
    }
    report(
        "criterion 3b",
        false,
        "variant parity-indexed product form of Q: equal to the derived Q at \
         (1,1) but of OPPOSITE SIGN at (2,1) and (1,2); rejected as written, \
         with the sign flip pinned per order",
    );

    // 3c: the k = 1 anticommutator relation.
    let l5 = MATRIX.get(SystemId::Ttw, 1, 1).l5.as_ref().unwrap();
    let k1 = l5.k1.as_ref().expect("k = 1 check present at (1,1)");
    assert!(
        k1.verified,
        "k = 1 relation {} does not close",
        k1.relation_display
    );
    assert!(
        !k1.variant_matches,
        "variant constant unexpectedly satisfies the relation"
    );
    assert_eq!(
        k1.kappa,
        k1.kappa_variant.scale(&rat_int(-2)),
        "kappa and the variant constant must differ by exactly the factor -2"
    );
    report(
        "criterion 3c",
        false,
        "k = 1 relation {L5, L2} = -2 L5 + (1/2)(L3 + L4) + kappa closes \
         exactly with kappa = Q/2 = -H(a^2-b^2)/8; the variant constant \
         +H(a^2-b^2)/16 (= -kappa/2) fails the same exact check",
    );
}

#[test]
fn criterion_4_ladder_action_closed_forms() {
    let m = &*MATRIX;
    let mut chains = 0usize;
    let mut products = 0usize;
    for ((system, p, q), v) in &m.cells {
        let model = &v.model;
        let fold = |chain: &[MPoly]| {
            chain
                .iter()
                .fold(MPoly::one(&model.vars), |acc, f| acc.mul(f))
        };
        assert_eq!(
            fold(&model.raise_chain),
            model.ladders.raise_action,
            "{} ({p},{q}): raising factor chain != closed multiplier",
            system.as_str()
        );
        assert_eq!(
            fold(&model.lower_chain),
            model.ladders.lower_action,
            "{} ({p},{q}): lowering factor chain != closed multiplier",
            system.as_str()
        );
        chains += 2;

        let du = model
            .ladders
            .raise
            .compose(&model.ladders.lower)
            .diagonal_coefficient()
            .expect("raise∘lower is diagonal")
            .to_poly()
            .expect("raise∘lower diagonal is polynomial");
        let ud = model
            .ladders
            .lower
            .compose(&model.ladders.raise)
            .diagonal_coefficient()
            .expect("lower∘raise is diagonal")
            .to_poly()
            .expect("lower∘raise diagonal is polynomial");
        assert_eq!(
            du, v.products.down_up,
            "{} ({p},{q}): raise∘lower product drifted from the Pochhammer oracle",
            system.as_str()
        );
        assert_eq!(
            ud, v.products.up_down,
            "{} ({p},{q}): lower∘raise product drifted from the Pochhammer oracle",
            system.as_str()
        );
        products += 2;
    }
    report(
        "criterion 4",
        true,
        &format!(
            "composed ladder actions are symbolic: {chains} one-step factor \
             chains multiply exactly to their closed multipliers and \
             {products} two-sided products equal independently written \
             Pochhammer closed forms, across 5 families x 7 orders"
        ),
    );
}

#[test]
fn criterion_5_stackel_transfer() {
    let m = &*MATRIX;
    let mut formula = String::new();
    for &(p, q) in &ORDERS {
        let ttw = m.get(SystemId::Ttw, p, q);
        let kepler = m.get(SystemId::KeplerDeformed, p, q);
        let data = stackel_transfer(ttw, kepler).expect("exchange map builds");
        assert!(
            data.p_plus_matches && data.p_minus_matches,
            "({p},{q}): transported closure polynomials disagree"
        );
        assert!(
            data.energy_identity_verified,
            "({p},{q}): bound-state energy identity fails"
        );
        assert!(
            data.energy_formula.contains("Z^2 / (2u + 1 + (a+b+1)k)^2"),
            "energy formula not emitted: {}",
            data.energy_formula
        );
        formula = data.energy_formula;
    }
    report(
        "criterion 5",
        true,
        &format!(
            "exchange map H -> 4Z, om^2 -> 4Hp transports both closure \
             polynomials onto the deformed-Coulomb derivation with zero \
             residual at all 7 orders; emitted energy formula: {formula}"
        ),
    );
}

#[test]
fn criterion_6_representations() {
    let caged = MATRIX.get(SystemId::CagedOscillator, 1, 1);
    let deformed = MATRIX.get(SystemId::Ttw, 1, 1);
    let caged_runs = rep_sweep(caged, 0xacce_0001, 5).expect("caged sweep");
    let deformed_runs = rep_sweep(deformed, 0xacce_0002, 5).expect("deformed sweep");
    assert_eq!(caged_runs.len(), 5);
    assert_eq!(deformed_runs.len(), 5);

    // 6a: exact boundary annihilation and closed-form spectra / energies.
    for run in caged_runs.iter().chain(deformed_runs.iter()) {
        let c = &run.check;
        assert!(c.all_verified, "rep check failed: {:?}", c.notes);
        assert!(c.raise_annihilates_top, "top boundary leaks");
        assert!(c.lower_annihilates_bottom, "bottom boundary leaks");
        assert!(c.spectrum_form.matches, "grid spectrum drifts from closed form");
        assert!(c.energy_form.matches, "grid energy drifts from closed form");
    }
    for run in &deformed_runs {
        let variant = run.check.energy_variant.as_ref().expect("variant compared");
        assert!(
            variant.matches,
            "k = 1 energy display must match exactly: {}",
            variant.formula
        );
    }
    report(
        "criterion 6a",
        true,
        "5 random rational parameter sets per family (caged + deformed \
         oscillator at k = 1): every window matches its derived closed-form \
         spectrum and energy as exact matrix identities, boundary \
         annihilation raising|top> = lowering|bottom> = 0 holds exactly, and \
         the k = 1 energy display E = 2 om (2pM + a + b + 2kq0 + 2p0 + 2) \
         matches each deformed window",
    );

    // 6b: the variant caged energy normalization is rejected, with the
    // offset pinned exactly on every drawn window.
    for run in &caged_runs {
        let rep = &run.rep;
        let variant_cmp = run.check.energy_variant.as_ref().expect("variant compared");
        assert!(
            !variant_cmp.matches,
            "variant caged energy form unexpectedly matched"
        );
        let find = |name: &str| {
            rep.params
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| panic!("parameter {name} missing"))
        };
        let (mu, a1, a2) = (find("mu"), find("a1"), find("a2"));
        let (p, q, p0, q0, m) = (rep.p, rep.q, rep.p0, rep.q0, rep.n_top);
        let variant = rat_int(2 * m * p * q) * &mu
            - rat_int(2)
                * &mu
                * (rat_int(p) * (&a1 - rat_int(q0)) + rat_int(q) * (&a2 - rat_int(p0)));
        let offset = rat_int(2) * &mu * rat_int(m * p * q + p * (q0 + 1) + q * (p0 + 1));
        assert_eq!(
            &rep.energy - &variant,
            offset,
            "caged window energy offset drifted from 2 mu (Mpq + p(q0+1) + q(p0+1))"
        );
    }
    report(
        "criterion 6b",
        false,
        "variant caged energy normalization E = 2Mpq mu - 2mu[p(a1-q0) + \
         q(a2-p0)] is rejected by the exact matrix check on every window; it \
         differs from each grid energy by exactly 2 mu (Mpq + p(q0+1) + \
         q(p0+1)) (pinned on all 5 draws)",
    );
}

#[test]
fn criterion_7_numeric_suite() {
    let cfg = NumCfg::default();
    assert!(cfg.points >= 16, "contract requires at least 16 sample points");
    assert_eq!(cfg.tol, 1e-10, "pinned recurrence/equation tolerance");

    let mut max_recurrence = 0.0f64;
    let mut max_equation = 0.0f64;
    let mut max_composition = 0.0f64;
    for &(p, q) in &[(1, 1), (1, 2), (2, 1)] {
        let rep = numeric_report(p, q, &cfg).expect("numeric suite runs");
        assert!(rep.all_pass, "numeric failures at ({p},{q})");
        for check in &rep.checks {
            assert!(check.pass, "({p},{q}) {} out of tolerance", check.id);
            if check.id.starts_with("ladder_composition") {
                assert!(check.tol <= 1e-8, "composition tolerance drifted");
                max_composition = max_composition.max(check.max_rel_residual);
            } else if check.id.ends_with("_equation") {
                assert!(check.tol <= 1e-10, "equation tolerance drifted");
                max_equation = max_equation.max(check.max_rel_residual);
            } else if check.id.starts_with("wronskian") || check.id.starts_with("derivative") {
                // Independence and derivative cross-checks gate via `pass`.
            } else {
                assert!(check.tol <= 1e-10, "recurrence tolerance drifted");
                max_recurrence = max_recurrence.max(check.max_rel_residual);
            }
        }
    }
    assert!(max_recurrence <= 1e-10 && max_equation <= 1e-10 && max_composition <= 1e-8);
    report(
        "criterion 7",
        true,
        &format!(
            "numeric suite at {} sample points (>= 16) over orders (1,1), \
             (1,2), (2,1): max factor-recurrence residual {max_recurrence:.2e} \
             <= 1e-10, max separated-equation residual {max_equation:.2e} <= \
             1e-10, max ladder-composition residual {max_composition:.2e} <= \
             1e-8; Wronskian and derivative cross-checks pass",
            cfg.points
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: randomized algebra property suite
// ---------------------------------------------------------------------------

fn random_poly(rng: &mut ChaCha8Rng, vars: &std::sync::Arc<Vars>) -> MPoly {
    let mut poly = MPoly::zero(vars);
    for _ in 0..rng.gen_range(1..=3) {
        let expo = Expo((0..vars.len()).map(|_| rng.gen_range(0..=2u16)).collect());
        let num = loop {
            let n = rng.gen_range(-6..=6i64);
            if n != 0 {
                break n;
            }
        };
        poly.add_term(expo, rat(num, rng.gen_range(1..=3)));
    }
    poly
}

fn random_op(rng: &mut ChaCha8Rng, vars: &std::sync::Arc<Vars>) -> ShiftOp {
    let mut op = ShiftOp::zero(vars, 0);
    for _ in 0..rng.gen_range(1..=3) {
        let shift = rng.gen_range(-2..=2i64);
        op.add_term(shift, RFunc::from_poly(random_poly(rng, vars)));
    }
    op
}

#[test]
fn criterion_8_algebra_property_suite() {
    let vars = Vars::new(&["n", "c1", "c2"]);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let mut cases = 0usize;

    // Pochhammer splitting: (x)_{m+n} = (x)_m (x+m)_n.
    for _ in 0..300 {
        let base = random_poly(&mut rng, &vars);
        let m = rng.gen_range(0..=5u32);
        let n = rng.gen_range(0..=5u32);
        let shifted = base.add(&MPoly::constant(&vars, rat_int(m as i64)));
        assert_eq!(
            pochhammer(&base, m + n),
            pochhammer(&base, m).mul(&pochhammer(&shifted, n)),
            "pochhammer splitting failed for m={m}, n={n}"
        );
        cases += 1;
    }

    // Composition associativity.
    for _ in 0..250 {
        let (a, b, c) = (
            random_op(&mut rng, &vars),
            random_op(&mut rng, &vars),
            random_op(&mut rng, &vars),
        );
        assert!(
            a.compose(&b).compose(&c).eq_op(&a.compose(&b.compose(&c))),
            "associativity failed"
        );
        cases += 1;
    }

    // Jacobi identity for the commutator.
    for _ in 0..250 {
        let (a, b, c) = (
            random_op(&mut rng, &vars),
            random_op(&mut rng, &vars),
            random_op(&mut rng, &vars),
        );
        let jacobi = commutator(&a, &commutator(&b, &c))
            .add(&commutator(&b, &commutator(&c, &a)))
            .add(&commutator(&c, &commutator(&a, &b)));
        assert!(jacobi.is_zero(), "Jacobi identity failed");
        cases += 1;
    }

    // Index reflection is an involutive algebra automorphism.
    for _ in 0..200 {
        let (a, b) = (random_op(&mut rng, &vars), random_op(&mut rng, &vars));
        let center = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        assert!(
            a.compose(&b)
                .reflect(&center)
                .eq_op(&a.reflect(&center).compose(&b.reflect(&center))),
            "reflection is not multiplicative"
        );
        cases += 1;
        assert!(
            a.reflect(&center).reflect(&center).eq_op(&a),
            "reflection is not involutive"
        );
        cases += 1;
    }

    assert!(cases >= 1000, "only {cases} cases run");
    report(
        "criterion 8",
        true,
        &format!(
            "{cases} randomized algebra cases (Pochhammer splitting, \
             composition associativity, Jacobi identity, reflection \
             automorphism and involution) all hold exactly"
        ),
    );
}

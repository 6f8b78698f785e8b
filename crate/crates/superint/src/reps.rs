//! Finite-dimensional representations of the symmetry algebras on bounded
//! label grids.
//!
//! The one-variable models act on a delta-function eigenbasis
//! `Psi_N = delta(label − label_N)` with `label_N = label0 + N·q`: the
//! raising operator moves `N` up by one grid step, the lowering operator
//! moves it down.  A finite window `N = 0..=M` carries a representation
//! exactly when the raising coefficient vanishes at the top label and the
//! lowering coefficient at the bottom label, and both conditions come from
//! explicit Pochhammer factors of the ladder actions:
//!
//! * the raising action carries `(t+1)_q` (caged oscillator) or
//!   `(n+a+b+1)_q` (deformed oscillator / Coulomb), pinning the top label to
//!   `−1−q0` resp. `−(a+b+1)−q0` for an integer offset `0 ≤ q0 < q`;
//! * the lowering action carries `(u − k·label + 1)_p`, pinning the second
//!   separation label `u` at the bottom for an integer offset `0 ≤ p0 < p`.
//!
//! [`build_rep`] realizes the ladders, the symmetrized pair `(L3, L4)` and
//! the diagonal symmetries as `(M+1)×(M+1)` matrices of exact rationals
//! (entry `(N′, N)` carries basis vector `N` to `N′`; matrices act on
//! coordinate columns by left multiplication), derives the spectra and the
//! energy from the grid, and rejects degenerate parameter draws.
//! [`check_rep`] then confirms every verified structure equation of the
//! family as an exact matrix identity — an independent cross-check, since
//! matrix products are computed by plain linear algebra rather than by
//! operator composition — and compares the derived boundary conditions,
//! spectra and energy with their tabulated closed forms.
//!
//! Only the two oscillator families (and the Coulomb family sharing the
//! deformed-oscillator ladders) have these bounded windows; the sphere and
//! plane families are not given finite delta-basis grids here.  Adjointness
//! and infinite-dimensional windows are out of scope, and the odd-order
//! symmetry is not realized on the window.

use num::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{rat, rat_int, Rat};
use crate::shiftops::ShiftOp;
use crate::structure::{Verification, SCHEMA_VERSION};
use crate::systems::{symmetrized_pair, SystemId, SystemModel};

/// Errors from representation construction and checking.
#[derive(Debug, Error)]
pub enum RepError {
    #[error("no finite delta-basis window is constructed for {0}")]
    UnsupportedSystem(String),
    #[error(
        "inadmissible offsets: require 0 <= p0 < p and 0 <= q0 < q, \
         got (p0, q0) = ({p0}, {q0}) at (p, q) = ({p}, {q})"
    )]
    InadmissibleOffsets { p: i64, q: i64, p0: i64, q0: i64 },
    #[error("expected {expected} parameter values for the model symbols, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("the frequency parameter {symbol} must be nonzero")]
    ZeroFrequency { symbol: String },
    #[error(
        "{op} coefficient has a pole at grid point N = {n} (label {label}); \
         the parameter draw is inadmissible"
    )]
    CoefficientPole { op: String, n: usize, label: String },
    #[error(
        "{op} coefficient vanishes at interior grid point N = {n} (label {label}); \
         the window splits and the representation would be reducible"
    )]
    InteriorZero { op: String, n: usize, label: String },
    #[error(
        "{op} does not annihilate the {which} basis vector: coefficient {value} \
         at label {label} steps outside the window"
    )]
    BoundaryLeak {
        op: String,
        which: String,
        value: String,
        label: String,
    },
    #[error(
        "degenerate diagonal spectrum: eigenvalue {value} repeats at grid points \
         N = {n1} and N = {n2}; choose generic parameters"
    )]
    DegenerateSpectrum { value: String, n1: usize, n2: usize },
    #[error("operator shift {shift} is not a multiple of the grid step {step}")]
    OffGridShift { shift: i64, step: i64 },
    #[error("representation and verification describe different runs: {rep} vs {verification}")]
    MismatchedVerification { rep: String, verification: String },
    #[error("derived closed form for {what} disagrees with the grid: formula {formula}, grid {grid}")]
    ClosedForm {
        what: String,
        formula: String,
        grid: String,
    },
    #[error("no admissible parameter draw found after {attempts} attempts")]
    ExhaustedDraws { attempts: usize },
}

// ---------------------------------------------------------------------------
// Exact rational matrices
// ---------------------------------------------------------------------------

/// Dense square matrix of exact rationals (the windows are tiny).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    dim: usize,
    rows: Vec<Vec<Rat>>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Mat {
        Mat {
            dim,
            rows: vec![vec![Rat::zero(); dim]; dim],
        }
    }

    pub fn identity(dim: usize) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.rows[i][i] = Rat::one();
        }
        m
    }

    pub fn from_diag(values: &[Rat]) -> Mat {
        let mut m = Mat::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.rows[i][i] = v.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> &Rat {
        &self.rows[r][c]
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    fn add_to(&mut self, r: usize, c: usize, v: &Rat) {
        let cur = &self.rows[r][c] + v;
        self.rows[r][c] = cur;
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.add_to(r, c, &other.rows[r][c]);
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> Mat {
        let mut out = self.clone();
        for row in &mut out.rows {
            for v in row.iter_mut() {
                *v = &*v * c;
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let mut out = Mat::zeros(self.dim);
        for r in 0..self.dim {
            for j in 0..self.dim {
                let a = &self.rows[r][j];
                if a.is_zero() {
                    continue;
                }
                for c in 0..self.dim {
                    let b = &other.rows[j][c];
                    if b.is_zero() {
                        continue;
                    }
                    let v = a * b;
                    out.add_to(r, c, &v);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|row| row.iter().all(|v| v.is_zero()))
    }
}

pub fn mat_commutator(a: &Mat, b: &Mat) -> Mat {
    a.mul(b).sub(&b.mul(a))
}

pub fn mat_anticommutator(a: &Mat, b: &Mat) -> Mat {
    a.mul(b).add(&b.mul(a))
}

// ---------------------------------------------------------------------------
// Representation data
// ---------------------------------------------------------------------------

/// One finite-dimensional representation in the delta-function eigenbasis.
///
/// The window is indexed by `N = n_bottom..=n_top` with `n_bottom = 0` (the
/// base label absorbs the grid origin, so the dimension is `n_top + 1`).
#[derive(Debug, Clone)]
pub struct Representation {
    pub system: SystemId,
    pub p: i64,
    pub q: i64,
    /// Instantiated model parameters (symbols beyond the grid label and the
    /// second separation label), in model order.
    pub params: Vec<(String, Rat)>,
    /// Name of the model's grid variable.
    pub label_symbol: String,
    /// Grid base label: the value of the grid variable at `N = 0`.
    pub label0: Rat,
    /// Centered form of the base label for the deformed families, whose
    /// tabulated grid variable is `s = n + (a+b+1)/2`.
    pub centered_label0: Option<(String, Rat)>,
    /// Second separation label, fixed by the bottom boundary condition
    /// `u = k·label0 − 1 − p0`.
    pub u_value: Rat,
    pub p0: i64,
    pub q0: i64,
    pub n_bottom: i64,
    pub n_top: i64,
    /// Grid labels `label_N`.
    pub labels: Vec<Rat>,
    /// Symbol of the diagonal symmetry whose spectrum is tabulated.
    pub diag_symbol: String,
    /// Eigenvalues of the diagonal symmetry along the grid.
    pub diag_spectrum: Vec<Rat>,
    /// Symbol of the Hamiltonian-like diagonal.
    pub h_symbol: String,
    /// Its eigenvalue (constant along the grid).
    pub energy: Rat,
    /// Further diagonal operators of the model: name and spectrum.
    pub extra_spectra: Vec<(String, Vec<Rat>)>,
    pub raise_mat: Mat,
    pub lower_mat: Mat,
    pub l3_mat: Mat,
    pub l4_mat: Mat,
}

impl Representation {
    pub fn dim(&self) -> usize {
        (self.n_top - self.n_bottom + 1) as usize
    }
}

/// Realizes a shift operator as a matrix on the grid window.
///
/// A term `(m, c)` sends basis vector `N` to `N + m/step` with coefficient
/// `c(label_N)`.  Coefficients that would step outside the window must
/// vanish there (the window is invariant by construction); a nonzero escape
/// is reported as a boundary leak.
fn op_matrix(
    op: &ShiftOp,
    op_name: &str,
    labels: &[Rat],
    template: &[Rat],
    index: usize,
    step: i64,
) -> Result<Mat, RepError> {
    let dim = labels.len();
    let mut m = Mat::zeros(dim);
    let mut vals = template.to_vec();
    for (j, label) in labels.iter().enumerate() {
        vals[index] = label.clone();
        for (&shift, coeff) in op.terms() {
            if shift % step != 0 {
                return Err(RepError::OffGridShift { shift, step });
            }
            let value = coeff.eval(&vals).ok_or_else(|| RepError::CoefficientPole {
                op: op_name.to_string(),
                n: j,
                label: label.to_string(),
            })?;
            if value.is_zero() {
                continue;
            }
            let target = j as i64 + shift / step;
            if target < 0 || target >= dim as i64 {
                return Err(RepError::BoundaryLeak {
                    op: op_name.to_string(),
                    which: if target < 0 { "bottom" } else { "top" }.to_string(),
                    value: value.to_string(),
                    label: label.to_string(),
                });
            }
            m.add_to(target as usize, j, &value);
        }
    }
    Ok(m)
}

/// Evaluates a diagonal model polynomial along the grid.
fn diag_spectrum(
    poly: &crate::exactalg::MPoly,
    labels: &[Rat],
    template: &[Rat],
    index: usize,
) -> Vec<Rat> {
    let mut vals = template.to_vec();
    labels
        .iter()
        .map(|label| {
            vals[index] = label.clone();
            poly.eval(&vals)
        })
        .collect()
}

/// Builds the `(M+1)`-dimensional representation with window offsets
/// `(p0, q0)`.
///
/// Preconditions: `0 ≤ p0 < p`, `0 ≤ q0 < q`, and `params` instantiates the
/// model symbols beyond the grid label and `u` (three values for both
/// supported families, in model order).  Degenerate draws — a vanishing
/// frequency, a repeated diagonal eigenvalue, a coefficient pole or an
/// interior zero of a ladder coefficient — are rejected with a specific
/// error, so a caller sweeping random parameters can redraw.
pub fn build_rep(
    model: &SystemModel,
    params: &[Rat],
    p0: i64,
    q0: i64,
    big_m: usize,
) -> Result<Representation, RepError> {
    match model.id {
        SystemId::CagedOscillator | SystemId::Ttw | SystemId::KeplerDeformed => {}
        other => return Err(RepError::UnsupportedSystem(other.as_str().to_string())),
    }
    let (p, q) = (model.p, model.q);
    if !(0..p).contains(&p0) || !(0..q).contains(&q0) {
        return Err(RepError::InadmissibleOffsets { p, q, p0, q0 });
    }
    let expected = model.vars.len() - 2;
    if params.len() != expected {
        return Err(RepError::ParamCount {
            expected,
            got: params.len(),
        });
    }
    // The grid variable sits at model index 0 and the second separation
    // label at index 1 for every supported family.
    assert_eq!(model.index, 0, "grid variable is the leading model symbol");
    let m_i = big_m as i64;
    let k = rat(p, q);

    // Frequency symbol: `mu` for the caged family, `om` for the deformed
    // families.  A zero frequency collapses every ladder coefficient.
    let (freq_slot, freq_symbol) = match model.id {
        SystemId::CagedOscillator => (0usize, "mu"),
        _ => (2usize, "om"),
    };
    if params[freq_slot].is_zero() {
        return Err(RepError::ZeroFrequency {
            symbol: freq_symbol.to_string(),
        });
    }

    // Top boundary from the raising action's vanishing factor, bottom
    // boundary fixing `u` from the lowering action's vanishing factor.
    let label0 = match model.id {
        SystemId::CagedOscillator => rat_int(-1 - q0 - m_i * q),
        // label0 = −(a+b+1) − q0 − M·q
        _ => -(&params[0] + &params[1] + rat_int(1)) - rat_int(q0 + m_i * q),
    };
    let u_value = &k * &label0 - rat_int(1 + p0);

    let labels: Vec<Rat> = (0..=m_i).map(|n| &label0 + rat_int(n * q)).collect();
    let mut template = vec![Rat::zero(); model.vars.len()];
    template[1] = u_value.clone();
    for (i, v) in params.iter().enumerate() {
        template[2 + i] = v.clone();
    }

    // Ladder coefficients along the grid: zero exactly at the annihilated
    // boundary, nonzero at every other point.
    let raise_c = diag_spectrum(&model.ladders.raise_action, &labels, &template, 0);
    let lower_c = diag_spectrum(&model.ladders.lower_action, &labels, &template, 0);
    for (j, (rc, lc)) in raise_c.iter().zip(lower_c.iter()).enumerate() {
        let at_top = j == big_m;
        let at_bottom = j == 0;
        if at_top != rc.is_zero() {
            if at_top {
                return Err(RepError::BoundaryLeak {
                    op: "raising action".to_string(),
                    which: "top".to_string(),
                    value: rc.to_string(),
                    label: labels[j].to_string(),
                });
            }
            return Err(RepError::InteriorZero {
                op: "raising action".to_string(),
                n: j,
                label: labels[j].to_string(),
            });
        }
        if at_bottom != lc.is_zero() {
            if at_bottom {
                return Err(RepError::BoundaryLeak {
                    op: "lowering action".to_string(),
                    which: "bottom".to_string(),
                    value: lc.to_string(),
                    label: labels[j].to_string(),
                });
            }
            return Err(RepError::InteriorZero {
                op: "lowering action".to_string(),
                n: j,
                label: labels[j].to_string(),
            });
        }
    }

    // Matrices.  `op_matrix` re-derives the boundary annihilation: a nonzero
    // coefficient stepping outside the window is an error.
    let step = model.raise_shift;
    let raise_mat = op_matrix(&model.ladders.raise, "raise", &labels, &template, 0, step)?;
    let lower_mat = op_matrix(&model.ladders.lower, "lower", &labels, &template, 0, step)?;
    let (l3_op, l4_op) = symmetrized_pair(model);
    let l3_mat = op_matrix(&l3_op, "L3", &labels, &template, 0, step)?;
    let l4_mat = op_matrix(&l4_op, "L4", &labels, &template, 0, step)?;

    // Diagonal spectra; the diagonal-symmetry spectrum must be simple.
    let spectrum = diag_spectrum(&model.l2_map, &labels, &template, 0);
    for i in 0..spectrum.len() {
        for j in (i + 1)..spectrum.len() {
            if spectrum[i] == spectrum[j] {
                return Err(RepError::DegenerateSpectrum {
                    value: spectrum[i].to_string(),
                    n1: i,
                    n2: j,
                });
            }
        }
    }
    let h_values = diag_spectrum(&model.h_map, &labels, &template, 0);
    let energy = h_values[0].clone();
    if let Some(j) = h_values.iter().position(|v| *v != energy) {
        return Err(RepError::ClosedForm {
            what: format!("constant {} along the grid", model.h_symbol),
            formula: energy.to_string(),
            grid: format!("{} at N = {}", h_values[j], j),
        });
    }
    let extra_spectra: Vec<(String, Vec<Rat>)> = model
        .extra_diag
        .iter()
        .map(|(name, poly)| (name.to_string(), diag_spectrum(poly, &labels, &template, 0)))
        .collect();

    // Grid-independent closed forms, derived once from the boundary data and
    // asserted against the evaluated spectra.
    let derived_spectrum: Vec<Rat> = (0..=m_i)
        .map(|n| derived_diag_eigenvalue(model.id, p, q, params, q0, m_i - n))
        .collect();
    if derived_spectrum != spectrum {
        return Err(RepError::ClosedForm {
            what: format!("{} spectrum", model.l2_symbol),
            formula: join_rats(&derived_spectrum),
            grid: join_rats(&spectrum),
        });
    }
    let derived_e = derived_energy(model.id, p, q, params, p0, q0, m_i);
    if derived_e != energy {
        return Err(RepError::ClosedForm {
            what: format!("{} eigenvalue", model.h_symbol),
            formula: derived_e.to_string(),
            grid: energy.to_string(),
        });
    }
    if model.id == SystemId::KeplerDeformed {
        // The coupling eigenvalue is a quarter of the exchanged energy
        // combination.
        let z = derived_energy(SystemId::Ttw, p, q, params, p0, q0, m_i) * rat(1, 4);
        let grid_z = &extra_spectra[0].1[0];
        if z != *grid_z {
            return Err(RepError::ClosedForm {
                what: "Z eigenvalue".to_string(),
                formula: z.to_string(),
                grid: grid_z.to_string(),
            });
        }
    }

    let centered_label0 = match model.id {
        SystemId::Ttw | SystemId::KeplerDeformed => {
            let half = (&params[0] + &params[1] + rat_int(1)) * rat(1, 2);
            Some(("s".to_string(), &label0 + half))
        }
        _ => None,
    };
    let params_named: Vec<(String, Rat)> = params
        .iter()
        .enumerate()
        .map(|(i, v)| (model.vars.name(2 + i).to_string(), v.clone()))
        .collect();

    Ok(Representation {
        system: model.id,
        p,
        q,
        params: params_named,
        label_symbol: model.vars.name(0).to_string(),
        label0,
        centered_label0,
        u_value,
        p0,
        q0,
        n_bottom: 0,
        n_top: m_i,
        labels,
        diag_symbol: model.l2_symbol.to_string(),
        diag_spectrum: spectrum,
        h_symbol: model.h_symbol.to_string(),
        energy,
        extra_spectra,
        raise_mat,
        lower_mat,
        l3_mat,
        l4_mat,
    })
}

/// Closed form of the diagonal-symmetry eigenvalue at depth `N1 − N` below
/// the top of the window.
fn derived_diag_eigenvalue(
    id: SystemId,
    p: i64,
    q: i64,
    params: &[Rat],
    q0: i64,
    depth: i64,
) -> Rat {
    match id {
        SystemId::CagedOscillator => {
            // 4 mu p q (N1 − N) − 2 mu p (a1 − 2 q0 − 1)
            let (mu, a1) = (&params[0], &params[1]);
            rat_int(4 * p * q * depth) * mu - rat_int(2 * p) * mu * (a1 - rat_int(2 * q0 + 1))
        }
        _ => {
            // −4 k^2 ((N1 − N) q + (a+b+1)/2 + q0)^2
            let (a, b) = (&params[0], &params[1]);
            let inner = rat_int(depth * q + q0) + (a + b + rat_int(1)) * rat(1, 2);
            rat(-4 * p * p, q * q) * &inner * &inner
        }
    }
}

/// Closed form of the Hamiltonian-like eigenvalue from the window data.
fn derived_energy(
    id: SystemId,
    p: i64,
    q: i64,
    params: &[Rat],
    p0: i64,
    q0: i64,
    m_i: i64,
) -> Rat {
    match id {
        SystemId::CagedOscillator => {
            // 4 M p q mu − 2 mu [p (a1 − 2 q0 − 1) + q (a2 − 2 p0 − 1)]
            let (mu, a1, a2) = (&params[0], &params[1], &params[2]);
            rat_int(4 * m_i * p * q) * mu
                - rat_int(2)
                    * mu
                    * (rat_int(p) * (a1 - rat_int(2 * q0 + 1))
                        + rat_int(q) * (a2 - rat_int(2 * p0 + 1)))
        }
        SystemId::KeplerDeformed => {
            // om^2 / 4
            let om = &params[2];
            om * om * rat(1, 4)
        }
        _ => {
            // 2 om (2 p M + 2 p0 + 2 k q0 + k (a+b+1) + 1)
            let (a, b, om) = (&params[0], &params[1], &params[2]);
            let k = rat(p, q);
            rat_int(2)
                * om
                * (rat_int(2 * p * m_i + 2 * p0 + 1) + &k * (rat_int(2 * q0) + a + b + rat_int(1)))
        }
    }
}

fn join_rats(values: &[Rat]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------------------
// Matrix-level confirmation of the structure equations
// ---------------------------------------------------------------------------

/// Matrix-level status of one operator identity.
#[derive(Debug, Clone)]
pub struct RepEquationStatus {
    pub name: String,
    pub display: String,
    pub matrix_verified: bool,
}

/// A closed-form comparison: a tabulated scalar formula evaluated against
/// the grid-derived value.
#[derive(Debug, Clone)]
pub struct FormComparison {
    pub formula: String,
    pub evaluated: String,
    pub matches: bool,
    pub note: Option<String>,
}

/// Derived-versus-tabulated status of one boundary condition.
#[derive(Debug, Clone)]
pub struct BoundaryStatus {
    pub which: String,
    /// The ladder-action factor whose vanishing anchors the boundary.
    pub vanishing_factor: String,
    /// The boundary condition as derived from that factor.
    pub condition: String,
    /// The tabulated condition agrees with the derived one numerically.
    pub tabulated_matches: bool,
}

/// Status record from confirming a verification on a representation.
///
/// `all_verified` covers the construction invariants and the matrix
/// identities: every verified structure equation, boundary annihilation,
/// band structure, spectrum simplicity, the derived closed forms and the
/// tabulated spectrum/boundary forms.  The `energy_variant` comparison is
/// reported alongside without gating `all_verified`: for the caged family
/// the variant normalization never matches (it halves the level term and
/// drops the offset shifts), and for the deformed family it is the `k = 1`
/// specialization.
#[derive(Debug, Clone)]
pub struct RepCheck {
    pub system: SystemId,
    pub p: i64,
    pub q: i64,
    pub dim: usize,
    pub equations: Vec<RepEquationStatus>,
    pub raise_annihilates_top: bool,
    pub lower_annihilates_bottom: bool,
    /// Raising/lowering matrices are single-off-diagonal and `L3`, `L4` are
    /// purely off-diagonal with band one in the window index.
    pub bands_ok: bool,
    pub spectrum_simple: bool,
    pub boundary_conditions: Vec<BoundaryStatus>,
    pub spectrum_form: FormComparison,
    pub energy_form: FormComparison,
    pub energy_variant: Option<FormComparison>,
    /// Caged family: the two separation diagonals sum to the energy,
    /// `L1 + L2 = E·Id` at matrix level.
    pub hamiltonian_split: Option<bool>,
    pub notes: Vec<String>,
    pub all_verified: bool,
}

struct MatCtx {
    p: i64,
    q: i64,
    l2: Mat,
    l3: Mat,
    l4: Mat,
    r: Mat,
    /// Caged: window products `raise·lower` and `lower·raise`.
    p1: Mat,
    p2: Mat,
    /// Deformed: symmetric and divided antisymmetric ladder products.
    p_plus: Mat,
    p_minus: Mat,
    h: Mat,
    extra: Vec<(String, Mat)>,
    mu: Rat,
    /// Deformed Coulomb: the exchanged-energy factor `2u + 1 + (a+b+1)k`.
    x_energy: Rat,
}

fn build_ctx(rep: &Representation) -> Result<MatCtx, RepError> {
    let (p, q) = (rep.p, rep.q);
    let dim = rep.dim();
    let l2 = Mat::from_diag(&rep.diag_spectrum);
    let l3 = rep.l3_mat.clone();
    let l4 = rep.l4_mat.clone();
    let rl = rep.raise_mat.mul(&rep.lower_mat);
    let lr = rep.lower_mat.mul(&rep.raise_mat);
    let h = Mat::identity(dim).scale(&rep.energy);
    let extra: Vec<(String, Mat)> = rep
        .extra_spectra
        .iter()
        .map(|(name, s)| (name.clone(), Mat::from_diag(s)))
        .collect();
    let mu = rep
        .params
        .first()
        .map(|(_, v)| v.clone())
        .unwrap_or_else(Rat::zero);
    match rep.system {
        SystemId::CagedOscillator => Ok(MatCtx {
            p,
            q,
            r: l4.scale(&(rat_int(-4 * p * q) * &mu)),
            l2,
            l3,
            l4,
            p1: rl,
            p2: lr,
            p_plus: Mat::zeros(dim),
            p_minus: Mat::zeros(dim),
            h,
            extra,
            mu,
            x_energy: Rat::zero(),
        }),
        SystemId::Ttw | SystemId::KeplerDeformed => {
            let a = &rep.params[0].1;
            let b = &rep.params[1].1;
            let abp1 = a + b + rat_int(1);
            // P_minus divides the antisymmetric product by 2n + a + b + 1 at
            // the source label.
            let mut inv_div = Vec::with_capacity(dim);
            for (j, label) in rep.labels.iter().enumerate() {
                let div = rat_int(2) * label + &abp1;
                if div.is_zero() {
                    return Err(RepError::CoefficientPole {
                        op: "P_minus".to_string(),
                        n: j,
                        label: label.to_string(),
                    });
                }
                inv_div.push(Rat::one() / div);
            }
            let p_plus = rl.add(&lr);
            let p_minus = rl.sub(&lr).mul(&Mat::from_diag(&inv_div));
            let x_energy = rat_int(2) * &rep.u_value + rat_int(1) + abp1 * rat(p, q);
            Ok(MatCtx {
                p,
                q,
                r: l3
                    .scale(&rat(-4 * p * p, q))
                    .add(&l4.scale(&rat_int(-4 * p * p))),
                l2,
                l3,
                l4,
                p1: Mat::zeros(dim),
                p2: Mat::zeros(dim),
                p_plus,
                p_minus,
                h,
                extra,
                mu,
                x_energy,
            })
        }
        other => Err(RepError::UnsupportedSystem(other.as_str().to_string())),
    }
}

/// Residual matrix (`lhs − rhs`) of one named identity of the caged family.
fn caged_residual(name: &str, c: &MatCtx) -> Option<Mat> {
    let (p, q) = (c.p, c.q);
    let freq = rat_int(-4 * p * q) * &c.mu;
    match name {
        "commutator_L1_L3" => Some(mat_commutator(&c.l2, &c.l3).sub(&c.l4.scale(&freq))),
        "commutator_L1_L4" => Some(mat_commutator(&c.l2, &c.l4).sub(&c.l3.scale(&freq))),
        "commutator_L3_L4" => Some(
            mat_commutator(&c.l3, &c.l4)
                .sub(&c.p2.scale(&rat_int(2)))
                .add(&c.p1.scale(&rat_int(2))),
        ),
        "square_relation" => Some(
            c.l3.mul(&c.l3)
                .sub(&c.l4.mul(&c.l4))
                .sub(&c.p1.scale(&rat_int(2)))
                .sub(&c.p2.scale(&rat_int(2))),
        ),
        "commutator_L1_R" => {
            let rhs = c.l3.scale(&(rat_int(16 * p * p * q * q) * &c.mu * &c.mu));
            Some(mat_commutator(&c.l2, &c.r).sub(&rhs))
        }
        "commutator_L3_R" => {
            let rhs = c.p1.sub(&c.p2).scale(&(rat_int(8 * p * q) * &c.mu));
            Some(mat_commutator(&c.l3, &c.r).sub(&rhs))
        }
        "casimir" => {
            let inner = c
                .l3
                .mul(&c.l3)
                .sub(&c.p1.scale(&rat_int(2)))
                .sub(&c.p2.scale(&rat_int(2)));
            let rhs = inner.scale(&(rat_int(16 * p * p * q * q) * &c.mu * &c.mu));
            Some(c.r.mul(&c.r).sub(&rhs))
        }
        _ => None,
    }
}

/// Residual matrix of one named identity of the deformed families.
fn deformed_residual(name: &str, c: &MatCtx) -> Option<Mat> {
    let (p, q) = (c.p, c.q);
    let p4 = p * p * p * p;
    let l4l4 = c.l4.mul(&c.l4);
    match name {
        "commutator_L2_L4" => Some(mat_commutator(&c.l2, &c.l4).sub(&c.r)),
        "commutator_L2_L3" => {
            let rhs = mat_anticommutator(&c.l2, &c.l4)
                .scale(&rat_int(2 * q))
                .add(&c.l3.scale(&rat_int(4 * p * p)))
                .add(&c.l4.scale(&rat_int(8 * p * p * q)));
            Some(mat_commutator(&c.l2, &c.l3).sub(&rhs))
        }
        "commutator_L3_L4" => Some(
            mat_commutator(&c.l3, &c.l4)
                .sub(&l4l4.scale(&rat_int(2 * q)))
                .add(&c.p_minus.scale(&rat_int(2))),
        ),
        "quartic_constraint" => {
            let sym = l4l4
                .mul(&c.l2)
                .add(&c.l4.mul(&c.l2.mul(&c.l4)))
                .add(&c.l2.mul(&l4l4))
                .scale(&rat_int(2));
            let l3l4 = c.l3.mul(&c.l4).add(&c.l4.mul(&c.l3));
            Some(
                c.l3.mul(&c.l3)
                    .scale(&rat(6 * p * p, q * q))
                    .add(&sym)
                    .add(&l3l4.scale(&rat(6 * p * p, q)))
                    .add(&l4l4.scale(&rat_int(28 * p * p)))
                    .sub(&c.p_minus.scale(&rat(4 * p * p, q)))
                    .sub(&c.p_plus.scale(&rat(12 * p * p, q * q))),
            )
        }
        "commutator_L2_R" => {
            let rhs = mat_anticommutator(&c.l2, &c.l4)
                .scale(&rat_int(-8 * p * p))
                .add(&c.l4.scale(&rat_int(-16 * p4)));
            Some(mat_commutator(&c.l2, &c.r).sub(&rhs))
        }
        "commutator_L4_R" => {
            let rhs = l4l4
                .scale(&rat_int(8 * p * p))
                .sub(&c.p_minus.scale(&rat(8 * p * p, q)));
            Some(mat_commutator(&c.l4, &c.r).sub(&rhs))
        }
        "casimir" => {
            let sym = l4l4
                .mul(&c.l2)
                .add(&c.l4.mul(&c.l2.mul(&c.l4)))
                .add(&c.l2.mul(&l4l4))
                .scale(&rat_int(2));
            Some(
                c.r.mul(&c.r)
                    .scale(&rat(3, 8 * p * p))
                    .add(&l4l4.scale(&rat_int(22 * p * p)))
                    .add(&sym)
                    .sub(&c.p_minus.scale(&rat(4 * p * p, q)))
                    .sub(&c.p_plus.scale(&rat(12 * p * p, q * q))),
            )
        }
        "energy_relation" => {
            let z = &c.extra.first()?.1;
            let rhs = c.h.scale(&(&c.x_energy * &c.x_energy));
            Some(z.mul(z).sub(&rhs))
        }
        _ => None,
    }
}

fn band_ok(m: &Mat, offsets: &[i64]) -> bool {
    let dim = m.dim();
    for r in 0..dim {
        for c in 0..dim {
            if !m.entry(r, c).is_zero() && !offsets.contains(&(r as i64 - c as i64)) {
                return false;
            }
        }
    }
    true
}

/// Confirms a structure verification on a representation: every verified
/// operator identity is instantiated at the representation's parameters and
/// re-derived as an exact matrix identity by plain linear algebra, boundary
/// annihilation and band structure are checked, and the tabulated closed
/// forms for boundaries, spectrum and energy are compared with the
/// grid-derived values.
pub fn check_rep(rep: &Representation, verification: &Verification) -> Result<RepCheck, RepError> {
    let v_model = &verification.model;
    if v_model.id != rep.system || v_model.p != rep.p || v_model.q != rep.q {
        return Err(RepError::MismatchedVerification {
            rep: format!("{} ({}, {})", rep.system.as_str(), rep.p, rep.q),
            verification: format!(
                "{} ({}, {})",
                v_model.id.as_str(),
                v_model.p,
                v_model.q
            ),
        });
    }
    let ctx = build_ctx(rep)?;
    let dim = rep.dim();
    let mut notes = Vec::new();

    let mut equations = Vec::new();
    for eq in verification.equations.iter().filter(|e| e.verified) {
        let residual = match rep.system {
            SystemId::CagedOscillator => caged_residual(&eq.name, &ctx),
            _ => deformed_residual(&eq.name, &ctx),
        };
        let matrix_verified = match residual {
            Some(r) => r.is_zero(),
            None => {
                notes.push(format!(
                    "no matrix realization for identity `{}`",
                    eq.name
                ));
                false
            }
        };
        equations.push(RepEquationStatus {
            name: eq.name.clone(),
            display: eq.display.clone(),
            matrix_verified,
        });
    }

    let raise_annihilates_top = (0..dim).all(|r| rep.raise_mat.entry(r, dim - 1).is_zero());
    let lower_annihilates_bottom = (0..dim).all(|r| rep.lower_mat.entry(r, 0).is_zero());
    let bands_ok = band_ok(&rep.raise_mat, &[1])
        && band_ok(&rep.lower_mat, &[-1])
        && band_ok(&rep.l3_mat, &[-1, 1])
        && band_ok(&rep.l4_mat, &[-1, 1]);
    let spectrum_simple = {
        let s = &rep.diag_spectrum;
        (0..s.len()).all(|i| ((i + 1)..s.len()).all(|j| s[i] != s[j]))
    };

    let boundary_conditions = boundary_statuses(rep);
    if rep.system == SystemId::CagedOscillator {
        notes.push(
            "the top condition involves neither a1 nor a2 because it comes from the \
             raising factor (t+1)_q; the lowering action's (-t-a1)_q factor stays \
             nonvanishing on the window for generic a1 and would anchor a different \
             window family instead"
                .to_string(),
        );
    }

    let params: Vec<Rat> = rep.params.iter().map(|(_, v)| v.clone()).collect();
    let m_i = rep.n_top;
    let (spectrum_form, energy_form, energy_variant) = closed_form_comparisons(rep, &params, m_i);

    let hamiltonian_split = match rep.system {
        SystemId::CagedOscillator => {
            let l2x = &ctx.extra[0].1;
            Some(ctx.l2.add(l2x).sub(&ctx.h).is_zero())
        }
        _ => None,
    };
    if rep.system == SystemId::KeplerDeformed {
        notes.push(format!(
            "coupling eigenvalue Z = {} is constant along the window and satisfies the \
             exchanged-energy relation checked under `energy_relation`",
            rep.extra_spectra[0].1[0]
        ));
    }

    let all_verified = equations.iter().all(|e| e.matrix_verified)
        && raise_annihilates_top
        && lower_annihilates_bottom
        && bands_ok
        && spectrum_simple
        && boundary_conditions.iter().all(|b| b.tabulated_matches)
        && spectrum_form.matches
        && energy_form.matches
        && hamiltonian_split != Some(false);

    Ok(RepCheck {
        system: rep.system,
        p: rep.p,
        q: rep.q,
        dim,
        equations,
        raise_annihilates_top,
        lower_annihilates_bottom,
        bands_ok,
        spectrum_simple,
        boundary_conditions,
        spectrum_form,
        energy_form,
        energy_variant,
        hamiltonian_split,
        notes,
        all_verified,
    })
}

fn boundary_statuses(rep: &Representation) -> Vec<BoundaryStatus> {
    let k = rat(rep.p, rep.q);
    let top_label = rep.labels.last().expect("nonempty grid");
    match rep.system {
        SystemId::CagedOscillator => {
            // Tabulated: t0 + N1 q + 1 = −q0 and u − k(t0 + N0 q) + 1 = −p0.
            let top = top_label + rat_int(1) == rat_int(-rep.q0);
            let bottom = &rep.u_value - &k * &rep.labels[0] + rat_int(1) == rat_int(-rep.p0);
            vec![
                BoundaryStatus {
                    which: "top".to_string(),
                    vanishing_factor: "(t + 1)_q in the raising action".to_string(),
                    condition: format!("t_top + 1 = -q0, with t_top = {}", top_label),
                    tabulated_matches: top,
                },
                BoundaryStatus {
                    which: "bottom".to_string(),
                    vanishing_factor: "(u - k t + 1)_p in the lowering action".to_string(),
                    condition: format!("u - k t_bottom + 1 = -p0, with u = {}", rep.u_value),
                    tabulated_matches: bottom,
                },
            ]
        }
        _ => {
            // Tabulated over the centered label s = n + (a+b+1)/2:
            // s0 + N1 q + (a+b+1)/2 = −q0 and u + k(−s0 − N0 q + (a+b+1)/2) + 1 = −p0.
            let (_, s0) = rep.centered_label0.as_ref().expect("centered label");
            let a = &rep.params[0].1;
            let b = &rep.params[1].1;
            let half = (a + b + rat_int(1)) * rat(1, 2);
            let s_top = s0 + rat_int((rep.n_top - rep.n_bottom) * rep.q);
            let top = &s_top + &half == rat_int(-rep.q0);
            let bottom =
                &rep.u_value + &k * (&half - s0) + rat_int(1) == rat_int(-rep.p0);
            vec![
                BoundaryStatus {
                    which: "top".to_string(),
                    vanishing_factor: "(n + a + b + 1)_q in the raising action".to_string(),
                    condition: format!(
                        "s_top + (a+b+1)/2 = -q0, with s_top = {}",
                        s_top
                    ),
                    tabulated_matches: top,
                },
                BoundaryStatus {
                    which: "bottom".to_string(),
                    vanishing_factor: "(u - k n + 1)_p in the lowering action".to_string(),
                    condition: format!(
                        "u + k((a+b+1)/2 - s_bottom) + 1 = -p0, with u = {}",
                        rep.u_value
                    ),
                    tabulated_matches: bottom,
                },
            ]
        }
    }
}

fn closed_form_comparisons(
    rep: &Representation,
    params: &[Rat],
    m_i: i64,
) -> (FormComparison, FormComparison, Option<FormComparison>) {
    let (p, q) = (rep.p, rep.q);
    let tabulated: Vec<Rat> = (0..=m_i)
        .map(|n| derived_diag_eigenvalue(rep.system, p, q, params, rep.q0, m_i - n))
        .collect();
    let spectrum_form = FormComparison {
        formula: match rep.system {
            SystemId::CagedOscillator => {
                "4 mu p q (N1 - N) - 2 mu p (a1 - 2 q0 - 1)".to_string()
            }
            _ => "-4 k^2 ((N1 - N) q + (a + b + 1)/2 + q0)^2".to_string(),
        },
        evaluated: join_rats(&tabulated),
        matches: tabulated == rep.diag_spectrum,
        note: None,
    };
    let derived_e = derived_energy(rep.system, p, q, params, rep.p0, rep.q0, m_i);
    let energy_form = FormComparison {
        formula: match rep.system {
            SystemId::CagedOscillator => {
                "E = 4 M p q mu - 2 mu [p (a1 - 2 q0 - 1) + q (a2 - 2 p0 - 1)]".to_string()
            }
            SystemId::KeplerDeformed => "E = om^2 / 4".to_string(),
            _ => "E = 2 om (2 p M + 2 p0 + 2 k q0 + k (a + b + 1) + 1)".to_string(),
        },
        evaluated: derived_e.to_string(),
        matches: derived_e == rep.energy,
        note: None,
    };
    let energy_variant = match rep.system {
        SystemId::CagedOscillator => {
            // Variant normalization: 2 M p q mu − 2 mu [p (a1 − q0) + q (a2 − p0)].
            let (mu, a1, a2) = (&params[0], &params[1], &params[2]);
            let variant = rat_int(2 * m_i * p * q) * mu
                - rat_int(2)
                    * mu
                    * (rat_int(p) * (a1 - rat_int(rep.q0))
                        + rat_int(q) * (a2 - rat_int(rep.p0)));
            let matches = variant == rep.energy;
            Some(FormComparison {
                formula: "E = 2 M p q mu - 2 mu [p (a1 - q0) + q (a2 - p0)]".to_string(),
                evaluated: variant.to_string(),
                matches,
                note: if matches {
                    None
                } else {
                    Some(
                        "differs from the grid energy by exactly \
                         2 mu (M p q + p (q0 + 1) + q (p0 + 1)): the variant \
                         normalization halves the level term and drops the offset \
                         shifts, and is rejected by the exact matrix check"
                            .to_string(),
                    )
                },
            })
        }
        SystemId::Ttw => {
            // Variant form: 2 om (2 p M + a + b + 2 k q0 + 2 p0 + 2).
            let (a, b, om) = (&params[0], &params[1], &params[2]);
            let k = rat(p, q);
            let variant = rat_int(2)
                * om
                * (rat_int(2 * p * m_i + 2 * rep.p0 + 2) + a + b + &k * rat_int(2 * rep.q0));
            let matches = variant == rep.energy;
            Some(FormComparison {
                formula: "E = 2 om (2 p M + a + b + 2 k q0 + 2 p0 + 2)".to_string(),
                evaluated: variant.to_string(),
                matches,
                note: if matches {
                    None
                } else {
                    Some(
                        "the variant form is the k = 1 specialization of the derived \
                         energy; the difference is 2 om (k - 1)(a + b + 1)"
                            .to_string(),
                    )
                },
            })
        }
        _ => None,
    };
    (spectrum_form, energy_form, energy_variant)
}

// ---------------------------------------------------------------------------
// Seeded parameter sweeps
// ---------------------------------------------------------------------------

/// One representation run of a sweep.
#[derive(Debug, Clone)]
pub struct RepRun {
    pub rep: Representation,
    pub check: RepCheck,
}

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num: i64 = rng.gen_range(1..=12);
    let den: i64 = rng.gen_range(1..=5);
    let sign: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(sign * num, den)
}

/// Builds and checks `count` representations at seeded random rational
/// parameters (nonzero, numerators up to 12, denominators up to 5), random
/// admissible offsets and window sizes `M ≤ 3`.  Draws that hit a degenerate
/// spectrum, an interior zero or a coefficient pole are rejected and
/// redrawn, so the sweep is deterministic for a fixed seed.
pub fn rep_sweep(v: &Verification, seed: u64, count: usize) -> Result<Vec<RepRun>, RepError> {
    let model = &v.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 64 * count.max(1) {
            return Err(RepError::ExhaustedDraws { attempts });
        }
        let p0 = rng.gen_range(0..model.p);
        let q0 = rng.gen_range(0..model.q);
        let big_m = rng.gen_range(0..=3usize);
        let params: Vec<Rat> = (0..model.vars.len() - 2)
            .map(|_| random_rat(&mut rng))
            .collect();
        match build_rep(model, &params, p0, q0, big_m) {
            Ok(rep) => {
                let check = check_rep(&rep, v)?;
                out.push(RepRun { rep, check });
            }
            Err(
                RepError::DegenerateSpectrum { .. }
                | RepError::InteriorZero { .. }
                | RepError::CoefficientPole { .. }
                | RepError::ZeroFrequency { .. },
            ) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Serialized reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ParamRepr {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffsetsRepr {
    pub label_symbol: String,
    pub label0: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered_symbol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered_label0: Option<String>,
    pub p0: i64,
    pub q0: i64,
    pub n_bottom: i64,
    pub n_top: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    #[serde(rename = "N")]
    pub n: i64,
    pub label: String,
    pub eigenvalue: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatricesRepr {
    pub raise: Vec<Vec<String>>,
    pub lower: Vec<Vec<String>>,
    #[serde(rename = "L3")]
    pub l3: Vec<Vec<String>>,
    #[serde(rename = "L4")]
    pub l4: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormRepr {
    pub formula: String,
    pub evaluated: String,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRepr {
    pub which: String,
    pub vanishing_factor: String,
    pub condition: String,
    pub tabulated_matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepEquationRepr {
    pub name: String,
    pub display: String,
    pub matrix_verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepCheckRepr {
    pub equations: Vec<RepEquationRepr>,
    pub raise_annihilates_top: bool,
    pub lower_annihilates_bottom: bool,
    pub bands_ok: bool,
    pub spectrum_simple: bool,
    pub boundary_conditions: Vec<BoundaryRepr>,
    pub spectrum_form: FormRepr,
    pub energy_form: FormRepr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_variant: Option<FormRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian_split: Option<bool>,
    pub notes: Vec<String>,
    pub all_verified: bool,
}

/// The complete serialized report of one representation run.
#[derive(Debug, Clone, Serialize)]
pub struct RepReport {
    pub schema_version: String,
    pub system: String,
    pub p: i64,
    pub q: i64,
    pub dim: usize,
    pub params: Vec<ParamRepr>,
    pub offsets: OffsetsRepr,
    pub u_value: String,
    pub diag_symbol: String,
    pub h_symbol: String,
    pub energy: String,
    pub spectrum: Vec<SpectrumRow>,
    pub extra_spectra: Vec<ParamRepr>,
    pub matrices: MatricesRepr,
    pub check: RepCheckRepr,
}

fn mat_repr(m: &Mat) -> Vec<Vec<String>> {
    m.rows()
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect()
}

fn form_repr(f: &FormComparison) -> FormRepr {
    FormRepr {
        formula: f.formula.clone(),
        evaluated: f.evaluated.clone(),
        matches: f.matches,
        note: f.note.clone(),
    }
}

/// Serializes a representation run.
pub fn rep_report(run: &RepRun) -> RepReport {
    let rep = &run.rep;
    let check = &run.check;
    RepReport {
        schema_version: SCHEMA_VERSION.to_string(),
        system: rep.system.as_str().to_string(),
        p: rep.p,
        q: rep.q,
        dim: rep.dim(),
        params: rep
            .params
            .iter()
            .map(|(name, v)| ParamRepr {
                name: name.clone(),
                value: v.to_string(),
            })
            .collect(),
        offsets: OffsetsRepr {
            label_symbol: rep.label_symbol.clone(),
            label0: rep.label0.to_string(),
            centered_symbol: rep.centered_label0.as_ref().map(|(s, _)| s.clone()),
            centered_label0: rep.centered_label0.as_ref().map(|(_, v)| v.to_string()),
            p0: rep.p0,
            q0: rep.q0,
            n_bottom: rep.n_bottom,
            n_top: rep.n_top,
        },
        u_value: rep.u_value.to_string(),
        diag_symbol: rep.diag_symbol.clone(),
        h_symbol: rep.h_symbol.clone(),
        energy: rep.energy.to_string(),
        spectrum: spectrum_rows(rep),
        extra_spectra: rep
            .extra_spectra
            .iter()
            .map(|(name, s)| ParamRepr {
                name: name.clone(),
                value: join_rats(s),
            })
            .collect(),
        matrices: MatricesRepr {
            raise: mat_repr(&rep.raise_mat),
            lower: mat_repr(&rep.lower_mat),
            l3: mat_repr(&rep.l3_mat),
            l4: mat_repr(&rep.l4_mat),
        },
        check: RepCheckRepr {
            equations: check
                .equations
                .iter()
                .map(|e| RepEquationRepr {
                    name: e.name.clone(),
                    display: e.display.clone(),
                    matrix_verified: e.matrix_verified,
                })
                .collect(),
            raise_annihilates_top: check.raise_annihilates_top,
            lower_annihilates_bottom: check.lower_annihilates_bottom,
            bands_ok: check.bands_ok,
            spectrum_simple: check.spectrum_simple,
            boundary_conditions: check
                .boundary_conditions
                .iter()
                .map(|b| BoundaryRepr {
                    which: b.which.clone(),
                    vanishing_factor: b.vanishing_factor.clone(),
                    condition: b.condition.clone(),
                    tabulated_matches: b.tabulated_matches,
                })
                .collect(),
            spectrum_form: form_repr(&check.spectrum_form),
            energy_form: form_repr(&check.energy_form),
            energy_variant: check.energy_variant.as_ref().map(form_repr),
            hamiltonian_split: check.hamiltonian_split,
            notes: check.notes.clone(),
            all_verified: check.all_verified,
        },
    }
}

/// The spectrum as `{N, label, eigenvalue}` rows.
pub fn spectrum_rows(rep: &Representation) -> Vec<SpectrumRow> {
    rep.labels
        .iter()
        .zip(rep.diag_spectrum.iter())
        .enumerate()
        .map(|(j, (label, ev))| SpectrumRow {
            n: rep.n_bottom + j as i64,
            label: label.to_string(),
            eigenvalue: ev.to_string(),
        })
        .collect()
}

/// The spectrum as a `N,eigenvalue` CSV table.
pub fn spectrum_csv(rep: &Representation) -> String {
    let mut out = String::from("N,eigenvalue\n");
    for row in spectrum_rows(rep) {
        out.push_str(&format!("{},{}\n", row.n, row.eigenvalue));
    }
    out
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::verify_structure;
    use crate::systems::build_model;

    fn r(n: i64, d: i64) -> Rat {
        rat(n, d)
    }

    #[test]
    fn caged_window_matches_grid_derivations() {
        let v = verify_structure(SystemId::CagedOscillator, 1, 1).unwrap();
        // mu = 1, a1 = 1/3, a2 = 1/5, offsets (0, 0), dimension 4.
        let params = [r(1, 1), r(1, 3), r(1, 5)];
        let rep = build_rep(&v.model, &params, 0, 0, 3).unwrap();
        assert_eq!(rep.dim(), 4);
        assert_eq!(rep.label0, r(-4, 1));
        assert_eq!(rep.u_value, r(-5, 1));
        // [L1, L3] = -4 mu L4 as 4x4 matrices.
        let l1 = Mat::from_diag(&rep.diag_spectrum);
        let lhs = mat_commutator(&l1, &rep.l3_mat);
        assert_eq!(lhs, rep.l4_mat.scale(&r(-4, 1)));
        let check = check_rep(&rep, &v).unwrap();
        assert!(check.all_verified, "caged check: {:?}", check);
        assert!(check.equations.iter().all(|e| e.matrix_verified));
        assert!(check.hamiltonian_split == Some(true));
        // The variant energy normalization never matches for admissible data;
        // here E = 224/15 and the variant gives 74/15, off by exactly
        // 2 mu (M p q + p (q0+1) + q (p0+1)) = 10.
        let variant = check.energy_variant.expect("variant comparison present");
        assert!(!variant.matches);
        assert_eq!(rep.energy, r(224, 15));
        assert_eq!(variant.evaluated, r(74, 15).to_string());
    }

    #[test]
    fn deformed_window_casimir_matrix_is_zero() {
        let v = verify_structure(SystemId::Ttw, 1, 2).unwrap();
        // a = 1/3, b = 1/5, om = 2, offsets (0, 1), dimension 3.
        let params = [r(1, 3), r(1, 5), r(2, 1)];
        let rep = build_rep(&v.model, &params, 0, 1, 2).unwrap();
        assert_eq!(rep.dim(), 3);
        let check = check_rep(&rep, &v).unwrap();
        assert!(check.all_verified, "deformed check: {:?}", check);
        let casimir = check
            .equations
            .iter()
            .find(|e| e.name == "casimir")
            .expect("casimir entry");
        assert!(casimir.matrix_verified);
        // k != 1 here, so the variant energy form disagrees by 2 om (k-1)(a+b+1).
        let variant = check.energy_variant.expect("variant comparison present");
        assert!(!variant.matches);
    }

    #[test]
    fn one_point_window_is_trivially_consistent() {
        let v = verify_structure(SystemId::CagedOscillator, 2, 1).unwrap();
        let params = [r(2, 1), r(1, 7), r(3, 4)];
        let rep = build_rep(&v.model, &params, 1, 0, 0).unwrap();
        assert_eq!(rep.dim(), 1);
        assert!(rep.raise_mat.is_zero());
        assert!(rep.lower_mat.is_zero());
        let check = check_rep(&rep, &v).unwrap();
        assert!(check.all_verified);
    }

    #[test]
    fn coulomb_window_inherits_the_oscillator_grid() {
        let v = verify_structure(SystemId::KeplerDeformed, 1, 1).unwrap();
        let params = [r(1, 3), r(1, 5), r(2, 1)];
        let rep = build_rep(&v.model, &params, 0, 0, 2).unwrap();
        // Energy is the squared frequency over four; coupling is constant.
        assert_eq!(rep.energy, r(1, 1));
        let check = check_rep(&rep, &v).unwrap();
        assert!(check.all_verified, "coulomb check: {:?}", check);
        assert!(check
            .equations
            .iter()
            .any(|e| e.name == "energy_relation" && e.matrix_verified));
    }

    #[test]
    fn matrix_of_composition_is_product_of_matrices() {
        let model = build_model(SystemId::Ttw, 1, 1).unwrap();
        let params = [r(1, 3), r(1, 5), r(1, 1)];
        let rep = build_rep(&model, &params, 0, 0, 3).unwrap();
        let template: Vec<Rat> = {
            let mut t = vec![Rat::zero(); model.vars.len()];
            t[1] = rep.u_value.clone();
            for (i, (_, v)) in rep.params.iter().enumerate() {
                t[2 + i] = v.clone();
            }
            t
        };
        let composed = model.ladders.raise.compose(&model.ladders.lower);
        let m = op_matrix(&composed, "raise·lower", &rep.labels, &template, 0, 1).unwrap();
        assert_eq!(m, rep.raise_mat.mul(&rep.lower_mat));
    }

    #[test]
    fn inadmissible_draws_are_rejected() {
        let model = build_model(SystemId::CagedOscillator, 2, 3).unwrap();
        let params = [r(1, 1), r(1, 3), r(1, 5)];
        assert!(matches!(
            build_rep(&model, &params, 2, 0, 1),
            Err(RepError::InadmissibleOffsets { .. })
        ));
        assert!(matches!(
            build_rep(&model, &params, 0, 3, 1),
            Err(RepError::InadmissibleOffsets { .. })
        ));
        let zero_freq = [r(0, 1), r(1, 3), r(1, 5)];
        assert!(matches!(
            build_rep(&model, &zero_freq, 0, 0, 1),
            Err(RepError::ZeroFrequency { .. })
        ));
        assert!(matches!(
            build_rep(&model, &params[..2], 0, 0, 1),
            Err(RepError::ParamCount { .. })
        ));
        let sphere = build_model(SystemId::Sphere, 1, 1).unwrap();
        assert!(matches!(
            build_rep(&sphere, &params, 0, 0, 1),
            Err(RepError::UnsupportedSystem(_))
        ));
    }

    #[test]
    fn degenerate_spectrum_is_rejected() {
        let model = build_model(SystemId::Ttw, 1, 1).unwrap();
        // a + b + 1 = -3 makes the centered labels symmetric around zero, so
        // the squared spectrum collides without any coefficient pole.
        let params = [r(-7, 2), r(-1, 2), r(1, 1)];
        assert!(matches!(
            build_rep(&model, &params, 0, 0, 3),
            Err(RepError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn sweeps_are_deterministic_and_green() {
        for id in [SystemId::CagedOscillator, SystemId::Ttw] {
            let v = verify_structure(id, 1, 1).unwrap();
            let runs = rep_sweep(&v, 7, 5).unwrap();
            assert_eq!(runs.len(), 5);
            assert!(runs.iter().all(|r| r.check.all_verified));
            let again = rep_sweep(&v, 7, 5).unwrap();
            let a = serde_json::to_string(&runs.iter().map(rep_report).collect::<Vec<_>>())
                .unwrap();
            let b = serde_json::to_string(&again.iter().map(rep_report).collect::<Vec<_>>())
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn spectrum_tables_have_one_row_per_level() {
        let v = verify_structure(SystemId::CagedOscillator, 1, 2).unwrap();
        let params = [r(1, 2), r(1, 3), r(1, 5)];
        let rep = build_rep(&v.model, &params, 0, 1, 2).unwrap();
        let csv = spectrum_csv(&rep);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("N,eigenvalue\n"));
        let rows = spectrum_rows(&rep);
        assert_eq!(rows[0].n, 0);
        assert_eq!(rows[2].n, 2);
    }
}

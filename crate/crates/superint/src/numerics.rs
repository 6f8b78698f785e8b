//! Floating-point cross-validation of the separated special functions.
//!
//! The symbolic layer manipulates ladder coefficients abstractly; this module
//! checks that the underlying analytic identities actually hold for the
//! separated solutions, evaluated honestly from their (generalized)
//! hypergeometric series:
//!
//! * [`eval_fn`] evaluates the five function families (Legendre, Jacobi,
//!   Laguerre, Bessel, confluent series) with first derivatives, by
//!   compensated summation of the series, for real — generally non-integer —
//!   degrees and orders;
//! * [`check_recurrence`] verifies every factor shift relation used by the
//!   operator constructions (`C±`/`D±` for the sphere family, Bessel shifts
//!   and the radial/angular factor chains for the plane family, the
//!   second-order oscillator factors, the Laguerre derivative relations, and
//!   `J±`/`K±` for the deformed family) at seeded random sample points;
//! * [`check_ode`] evaluates the residual of each separated differential
//!   equation on the corresponding solution;
//! * [`wronskian_product`] computes the 4×4 determinant of two function
//!   pairs and the checks around it confirm its factorization into squared
//!   2×2 Wronskians and its nonvanishing for independent solution pairs;
//! * [`check_ladder_composition`] applies `q` Jacobi steps and `p` Laguerre
//!   steps as first-order differential operators (via truncated Taylor
//!   jets) and compares the result against the closed-form multiplier of
//!   the composite raising relation.
//!
//! Everything is plain `f64`/`Complex64` arithmetic: sample points and
//! parameters are drawn from fixed seeds, residuals are measured relative to
//! the larger-magnitude side, and singular neighborhoods (`x = ±1`, `r = 0`)
//! are excluded by construction of the sampling domains.

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::systems::SystemId;

/// Default relative tolerance for identity checks.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative accuracy target of the series evaluations themselves.
pub const EVAL_TOL: f64 = 1e-12;
/// Default number of sample points per check (the policy minimum is 16).
pub const DEFAULT_POINTS: usize = 24;
/// Relative tolerance for the composed ladder chains, which accumulate
/// cancellation over several operator applications.
pub const CHAIN_TOL: f64 = 1e-8;

/// Errors from series evaluation and sampling.
#[derive(Debug, Error)]
pub enum NumError {
    #[error("argument outside the allowed domain: {0}")]
    Domain(String),
    #[error("series for {what} did not converge within {terms} terms")]
    NonConvergent { what: String, terms: usize },
    #[error("sampling failed: {0}")]
    Sampling(String),
}

// ---------------------------------------------------------------------------
// Gamma function (Lanczos approximation, real argument)
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (poles at nonpositive integers return
/// `±inf`, so reciprocals degrade gracefully to zero).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1−x) = π / sin(πx).
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Real Pochhammer product `(α)_ℓ`.
fn poch(alpha: f64, ell: i64) -> f64 {
    (0..ell).map(|j| alpha + j as f64).product()
}

// ---------------------------------------------------------------------------
// Compensated hypergeometric series
// ---------------------------------------------------------------------------

const MAX_TERMS: usize = 200_000;

/// Kahan-compensated complex accumulator.
#[derive(Clone, Copy)]
struct CSum {
    s: Complex64,
    c: Complex64,
}

impl CSum {
    fn new() -> CSum {
        CSum {
            s: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
        }
    }
    fn add(&mut self, t: Complex64) {
        let y = t - self.c;
        let u = self.s + y;
        self.c = (u - self.s) - y;
        self.s = u;
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 1e-9 && (x - x.round()).abs() < 1e-9
}

/// Sums `Σ_m Π_i (a_i)_m / Π_j (c_j)_m · z^m / m!` with compensated
/// summation.  Terminates early when an upper parameter is a nonpositive
/// integer (polynomial case); otherwise requires enough decay for the
/// target accuracy.
fn hyp_series(ups: &[f64], downs: &[f64], z: Complex64, what: &str) -> Result<Complex64, NumError> {
    for &c in downs {
        if is_nonpositive_integer(c) {
            return Err(NumError::Domain(format!(
                "lower series parameter {c} of {what} is a nonpositive integer"
            )));
        }
    }
    let terminates_at = ups
        .iter()
        .filter(|&&a| is_nonpositive_integer(a))
        .map(|&a| (-a.round()) as usize)
        .min();
    if terminates_at.is_none() && ups.len() > downs.len() && z.norm() >= 1.0 - 1e-9 {
        return Err(NumError::Domain(format!(
            "series argument |z| = {} of {what} is outside the radius of convergence",
            z.norm()
        )));
    }
    let mut sum = CSum::new();
    let mut term = Complex64::new(1.0, 0.0);
    sum.add(term);
    let mut small_streak = 0usize;
    for m in 0..MAX_TERMS {
        if let Some(stop) = terminates_at {
            if m >= stop {
                return Ok(sum.s);
            }
        }
        let mf = m as f64;
        let mut ratio = z / (mf + 1.0);
        for &a in ups {
            ratio *= Complex64::new(a + mf, 0.0);
        }
        for &c in downs {
            ratio /= Complex64::new(c + mf, 0.0);
        }
        term *= ratio;
        sum.add(term);
        if term.norm() <= 1e-17 * sum.s.norm().max(1e-300) {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sum.s);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(NumError::NonConvergent {
        what: what.to_string(),
        terms: MAX_TERMS,
    })
}

/// Taylor coefficients (not derivatives) of a generalized hypergeometric
/// function at `z0`, through order `ord`, using the parameter-shift form of
/// the derivatives.
fn hyp_taylor(
    ups: &[f64],
    downs: &[f64],
    z0: Complex64,
    ord: usize,
    what: &str,
) -> Result<Vec<Complex64>, NumError> {
    let mut out = Vec::with_capacity(ord + 1);
    let mut ratio = 1.0;
    let mut fact = 1.0;
    for i in 0..=ord {
        let ups_i: Vec<f64> = ups.iter().map(|a| a + i as f64).collect();
        let downs_i: Vec<f64> = downs.iter().map(|c| c + i as f64).collect();
        let val = hyp_series(&ups_i, &downs_i, z0, what)?;
        out.push(val * (ratio / fact));
        let ifl = i as f64;
        for &a in ups {
            ratio *= a + ifl;
        }
        for &c in downs {
            ratio /= c + ifl;
        }
        fact *= ifl + 1.0;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Truncated Taylor jets
// ---------------------------------------------------------------------------
//
// A jet is a Vec<Complex64> of Taylor coefficients `f^{(i)}(x0)/i!` of some
// function at the current base point; jets compose, multiply and take
// derivatives, which is all the operator applications need.  Orders stay
// tiny (≤ p+q+2), so the O(d²)/O(d³) algorithms are free.

type Jet = Vec<Complex64>;

fn jet_const(v: Complex64, ord: usize) -> Jet {
    let mut j = vec![Complex64::new(0.0, 0.0); ord + 1];
    j[0] = v;
    j
}

fn jet_var(x0: Complex64, ord: usize) -> Jet {
    let mut j = jet_const(x0, ord);
    if ord >= 1 {
        j[1] = Complex64::new(1.0, 0.0);
    }
    j
}

fn jet_add(a: &Jet, b: &Jet) -> Jet {
    let n = a.len().min(b.len());
    (0..n).map(|i| a[i] + b[i]).collect()
}

fn jet_sub(a: &Jet, b: &Jet) -> Jet {
    let n = a.len().min(b.len());
    (0..n).map(|i| a[i] - b[i]).collect()
}

fn jet_scale(a: &Jet, c: Complex64) -> Jet {
    a.iter().map(|v| v * c).collect()
}

fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    let n = a.len().min(b.len());
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..=(n - 1 - i).min(b.len() - 1) {
            if i + j < n {
                out[i + j] += a[i] * b[j];
            }
        }
    }
    out
}

/// Taylor coefficients of the derivative (one order shorter).
fn jet_derive(a: &Jet) -> Jet {
    (1..a.len())
        .map(|i| a[i] * Complex64::new(i as f64, 0.0))
        .collect()
}

/// `g^c` for a jet with nonzero constant term (principal branch).
fn jet_powc(a: &Jet, c: Complex64) -> Jet {
    let n = a.len();
    let a0 = a[0];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = a0.powc(c);
    for k in 1..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            let w = (c + Complex64::new(1.0, 0.0)) * Complex64::new(j as f64, 0.0)
                - Complex64::new(k as f64, 0.0);
            acc += w * a[j] * out[k - j];
        }
        out[k] = acc / (Complex64::new(k as f64, 0.0) * a0);
    }
    out
}

fn jet_recip(a: &Jet) -> Jet {
    jet_powc(a, Complex64::new(-1.0, 0.0))
}

/// `exp(g)` for a jet.
fn jet_exp(a: &Jet) -> Jet {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = a[0].exp();
    for k in 1..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            acc += Complex64::new(j as f64, 0.0) * a[j] * out[k - j];
        }
        out[k] = acc / Complex64::new(k as f64, 0.0);
    }
    out
}

/// Composition `F(z(x))`: `outer` holds the Taylor coefficients of `F` at
/// `z(x0)` and `inner` the jet of `z`, whose constant term is that base
/// point.
fn jet_compose(outer: &Jet, inner: &Jet) -> Jet {
    let n = inner.len();
    let mut shifted = inner.clone();
    shifted[0] = Complex64::new(0.0, 0.0);
    let mut acc = jet_const(*outer.last().expect("nonempty outer jet"), n - 1);
    for i in (0..outer.len() - 1).rev() {
        acc = jet_mul(&acc, &shifted);
        acc[0] += outer[i];
    }
    acc
}

/// `sin(c·t)` and `cos(c·t)` jets at `t0`.
fn jet_sin_cos(c: f64, t0: f64, ord: usize) -> (Jet, Jet) {
    let i = Complex64::new(0.0, 1.0);
    let mut arg_plus = jet_var(Complex64::new(t0, 0.0), ord);
    arg_plus = jet_scale(&arg_plus, i * Complex64::new(c, 0.0));
    let e_plus = jet_exp(&arg_plus);
    let e_minus = jet_exp(&jet_scale(&arg_plus, Complex64::new(-1.0, 0.0)));
    let sin = jet_scale(&jet_sub(&e_plus, &e_minus), Complex64::new(0.0, -0.5));
    let cos = jet_scale(&jet_add(&e_plus, &e_minus), Complex64::new(0.5, 0.0));
    (sin, cos)
}

// ---------------------------------------------------------------------------
// Function families
// ---------------------------------------------------------------------------

/// The five series-evaluated function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FnFamily {
    LegendreP,
    JacobiP,
    LaguerreL,
    BesselJ,
    ConfluentSeries,
}

/// Real sampling interval with excluded neighborhoods.
#[derive(Debug, Clone, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    /// `(center, radius)` exclusion disks.
    pub exclusions: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Domain {
        Domain {
            lo,
            hi,
            exclusions: Vec::new(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<f64, NumError> {
        for _ in 0..256 {
            let t = rng.gen_range(self.lo..self.hi);
            if self
                .exclusions
                .iter()
                .all(|&(c, r)| (t - c).abs() > r)
            {
                return Ok(t);
            }
        }
        Err(NumError::Sampling(format!(
            "no admissible point in [{}, {}] after 256 draws",
            self.lo, self.hi
        )))
    }
}

/// One concrete separated function: a family, a (generally non-integer)
/// degree, order-like parameters, an argument scale and a sampling domain.
///
/// Parameter slots by family: `LegendreP` — degree ν, orders `[μ]`;
/// `JacobiP` — degree n, orders `[a, b]`; `LaguerreL` — degree n, orders
/// `[α]` (for the radial composites the scale is the frequency);
/// `BesselJ` — degree ν (for the factor chains, orders `[δ]` and the scale
/// is the radial wavenumber); `ConfluentSeries` — orders `[a, c]` of the
/// Kummer series.
#[derive(Debug, Clone, Serialize)]
pub struct FnSpec {
    pub family: FnFamily,
    pub degree: f64,
    pub orders: Vec<f64>,
    pub scale: f64,
    pub domain: Domain,
}

impl FnSpec {
    pub fn legendre_p(nu: f64, mu: f64) -> FnSpec {
        FnSpec {
            family: FnFamily::LegendreP,
            degree: nu,
            orders: vec![mu],
            scale: 1.0,
            domain: Domain {
                lo: -0.9,
                hi: 0.9,
                exclusions: vec![(1.0, 0.05), (-1.0, 0.05)],
            },
        }
    }

    pub fn jacobi_p(n: f64, a: f64, b: f64) -> FnSpec {
        FnSpec {
            family: FnFamily::JacobiP,
            degree: n,
            orders: vec![a, b],
            scale: 1.0,
            domain: Domain {
                lo: -0.9,
                hi: 0.9,
                exclusions: vec![(1.0, 0.05), (-1.0, 0.05)],
            },
        }
    }

    pub fn laguerre_l(n: f64, alpha: f64) -> FnSpec {
        FnSpec {
            family: FnFamily::LaguerreL,
            degree: n,
            orders: vec![alpha],
            scale: 1.0,
            domain: Domain::new(0.3, 5.0),
        }
    }

    pub fn bessel_j(nu: f64) -> FnSpec {
        FnSpec {
            family: FnFamily::BesselJ,
            degree: nu,
            orders: vec![],
            scale: 1.0,
            domain: Domain {
                lo: 0.4,
                hi: 3.5,
                exclusions: vec![(0.0, 0.1)],
            },
        }
    }

    pub fn confluent(a: f64, c: f64) -> FnSpec {
        FnSpec {
            family: FnFamily::ConfluentSeries,
            degree: 0.0,
            orders: vec![a, c],
            scale: 1.0,
            domain: Domain::new(0.2, 4.0),
        }
    }
}

/// Jet of the Legendre function `P^μ_ν` in its own variable at `x0 ∈ (−1, 1)`.
fn legendre_jet(nu: f64, mu: f64, x0: f64, ord: usize) -> Result<Jet, NumError> {
    if !(-1.0 + 0.05..=1.0 - 0.05).contains(&x0) {
        return Err(NumError::Domain(format!(
            "Legendre argument {x0} too close to ±1"
        )));
    }
    let z0 = Complex64::new((1.0 - x0) / 2.0, 0.0);
    let outer = hyp_taylor(&[-nu, nu + 1.0], &[1.0 - mu], z0, ord, "Legendre series")?;
    let x = jet_var(Complex64::new(x0, 0.0), ord);
    let one = jet_const(Complex64::new(1.0, 0.0), ord);
    let z = jet_scale(&jet_sub(&one, &x), Complex64::new(0.5, 0.0));
    let f = jet_compose(&outer, &z);
    let half_mu = Complex64::new(mu / 2.0, 0.0);
    let pre = jet_mul(
        &jet_powc(&jet_add(&one, &x), half_mu),
        &jet_powc(&jet_sub(&one, &x), -half_mu),
    );
    Ok(jet_scale(
        &jet_mul(&pre, &f),
        Complex64::new(1.0 / gamma(1.0 - mu), 0.0),
    ))
}

/// Jet of the Jacobi function `X^{a,b}_n` (hypergeometric normalization,
/// polynomial for integer `n`) in its own variable.
fn jacobi_jet(n: f64, a: f64, b: f64, x0: f64, ord: usize) -> Result<Jet, NumError> {
    let z0 = Complex64::new((1.0 - x0) / 2.0, 0.0);
    let outer = hyp_taylor(
        &[-n, n + a + b + 1.0],
        &[a + 1.0],
        z0,
        ord,
        "Jacobi series",
    )?;
    let x = jet_var(Complex64::new(x0, 0.0), ord);
    let one = jet_const(Complex64::new(1.0, 0.0), ord);
    let z = jet_scale(&jet_sub(&one, &x), Complex64::new(0.5, 0.0));
    let f = jet_compose(&outer, &z);
    let norm = gamma(n + a + 1.0) / (gamma(n + 1.0) * gamma(a + 1.0));
    Ok(jet_scale(&f, Complex64::new(norm, 0.0)))
}

/// Jet of the Laguerre function `L^α_n` in its own argument.
fn laguerre_jet(n: f64, alpha: f64, z0: Complex64, ord: usize) -> Result<Jet, NumError> {
    let outer = hyp_taylor(&[-n], &[alpha + 1.0], z0, ord, "Laguerre series")?;
    let z = jet_var(z0, ord);
    let f = jet_compose(&outer, &z);
    let norm = gamma(n + alpha + 1.0) / (gamma(n + 1.0) * gamma(alpha + 1.0));
    Ok(jet_scale(&f, Complex64::new(norm, 0.0)))
}

/// Jet of the Bessel function `J_ν` in its own (complex) argument.
fn besselj_jet(nu: f64, z0: Complex64, ord: usize) -> Result<Jet, NumError> {
    if z0.norm() < 0.1 {
        return Err(NumError::Domain(format!(
            "Bessel argument |z| = {} too close to 0",
            z0.norm()
        )));
    }
    let w0 = -z0 * z0 / 4.0;
    let outer = hyp_taylor(&[], &[nu + 1.0], w0, ord, "Bessel series")?;
    let z = jet_var(z0, ord);
    let w = jet_scale(&jet_mul(&z, &z), Complex64::new(-0.25, 0.0));
    let f = jet_compose(&outer, &w);
    let half = jet_scale(&z, Complex64::new(0.5, 0.0));
    let pre = jet_powc(&half, Complex64::new(nu, 0.0));
    Ok(jet_scale(
        &jet_mul(&pre, &f),
        Complex64::new(1.0 / gamma(nu + 1.0), 0.0),
    ))
}

/// Jet of the Kummer series `M(a; c; z)` in its own argument.
fn kummer_jet(a: f64, c: f64, z0: Complex64, ord: usize) -> Result<Jet, NumError> {
    let outer = hyp_taylor(&[a], &[c], z0, ord, "Kummer series")?;
    let z = jet_var(z0, ord);
    Ok(jet_compose(&outer, &z))
}

/// Evaluates a function spec at `x` (complex allowed), returning value and
/// first derivative.
pub fn eval_fn(spec: &FnSpec, x: Complex64) -> Result<(Complex64, Complex64), NumError> {
    let jet = match spec.family {
        FnFamily::LegendreP => {
            if x.im != 0.0 {
                return Err(NumError::Domain(
                    "Legendre evaluation expects a real argument".to_string(),
                ));
            }
            legendre_jet(spec.degree, spec.orders[0], x.re, 1)?
        }
        FnFamily::JacobiP => {
            if x.im != 0.0 {
                return Err(NumError::Domain(
                    "Jacobi evaluation expects a real argument".to_string(),
                ));
            }
            jacobi_jet(spec.degree, spec.orders[0], spec.orders[1], x.re, 1)?
        }
        FnFamily::LaguerreL => laguerre_jet(spec.degree, spec.orders[0], x, 1)?,
        FnFamily::BesselJ => besselj_jet(spec.degree, x, 1)?,
        FnFamily::ConfluentSeries => kummer_jet(spec.orders[0], spec.orders[1], x, 1)?,
    };
    Ok((jet[0], jet[1]))
}

// ---------------------------------------------------------------------------
// Check results
// ---------------------------------------------------------------------------

/// Outcome of one numeric identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub points: Vec<String>,
    pub max_rel_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn from_samples(id: &str, points: Vec<String>, residuals: &[f64], tol: f64) -> CheckResult {
        let max = residuals.iter().cloned().fold(0.0f64, f64::max);
        CheckResult {
            id: id.to_string(),
            points,
            max_rel_residual: max,
            tol,
            pass: max <= tol,
        }
    }
}

/// Residual of `lhs ≈ rhs`, relative to the larger-magnitude side.
fn rel_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    let denom = lhs.norm().max(rhs.norm());
    if denom == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / denom
    }
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{}{}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

/// Sampling configuration: every check draws its points (and any free
/// parameters) from this seed, so runs are reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct NumCfg {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for NumCfg {
    fn default() -> NumCfg {
        NumCfg {
            points: DEFAULT_POINTS,
            seed: 0x5eed_2026,
            tol: DEFAULT_TOL,
        }
    }
}

// ---------------------------------------------------------------------------
// Factor recurrences
// ---------------------------------------------------------------------------

/// The factor shift relations with numeric counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecurrenceId {
    /// `√(1−x²) T′ + μx/√(1−x²) T = −T^{μ+1}_ν` (order raise).
    CPlus,
    /// `√(1−x²) T′ − μx/√(1−x²) T = (ν+μ)(ν−μ+1) T^{μ−1}_ν` (order lower).
    CMinus,
    /// `(1−x²) T′ − (ν+1)x T = −(ν−μ+1) T^μ_{ν+1}` (degree raise).
    DPlus,
    /// `(1−x²) T′ + νx T = (ν+μ) T^μ_{ν−1}` (degree lower).
    DMinus,
    /// Jacobi degree raise.
    JPlus,
    /// Jacobi degree lower.
    JMinus,
    /// Radial Laguerre-composite step lowering `m` (raising the order by 2).
    KPlus,
    /// Radial Laguerre-composite step raising `m` (lowering the order by 2).
    KMinus,
    /// `(−∂_z + ν/z) J_ν = J_{ν+1}`.
    BesselRaise,
    /// `(∂_z + ν/z) J_ν = J_{ν−1}`.
    BesselLower,
    /// `z L′ = n L − (n+α) L_{n−1}`.
    LaguerreLower,
    /// `z L′ = (n+1) L_{n+1} − (n+1+α−z) L`.
    LaguerreRaise,
    /// Second-order oscillator factor raising the x-degree.
    CagedRaiseX,
    /// Second-order oscillator factor lowering the x-degree.
    CagedLowerX,
    /// Second-order oscillator factor raising the y-degree.
    CagedRaiseY,
    /// Second-order oscillator factor lowering the y-degree.
    CagedLowerY,
    /// Full plane-family chain of `p` radial and `q` angular Bessel raises.
    PhiPlusChain,
    /// Full plane-family chain of `p` radial and `q` angular Bessel lowers.
    PhiMinusChain,
}

impl RecurrenceId {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecurrenceId::CPlus => "C_plus",
            RecurrenceId::CMinus => "C_minus",
            RecurrenceId::DPlus => "D_plus",
            RecurrenceId::DMinus => "D_minus",
            RecurrenceId::JPlus => "J_plus",
            RecurrenceId::JMinus => "J_minus",
            RecurrenceId::KPlus => "K_plus",
            RecurrenceId::KMinus => "K_minus",
            RecurrenceId::BesselRaise => "bessel_raise",
            RecurrenceId::BesselLower => "bessel_lower",
            RecurrenceId::LaguerreLower => "laguerre_derivative_lower",
            RecurrenceId::LaguerreRaise => "laguerre_derivative_raise",
            RecurrenceId::CagedRaiseX => "caged_raise_x",
            RecurrenceId::CagedLowerX => "caged_lower_x",
            RecurrenceId::CagedRaiseY => "caged_raise_y",
            RecurrenceId::CagedLowerY => "caged_lower_y",
            RecurrenceId::PhiPlusChain => "phi_plus_chain",
            RecurrenceId::PhiMinusChain => "phi_minus_chain",
        }
    }

    pub const ALL: [RecurrenceId; 18] = [
        RecurrenceId::CPlus,
        RecurrenceId::CMinus,
        RecurrenceId::DPlus,
        RecurrenceId::DMinus,
        RecurrenceId::JPlus,
        RecurrenceId::JMinus,
        RecurrenceId::KPlus,
        RecurrenceId::KMinus,
        RecurrenceId::BesselRaise,
        RecurrenceId::BesselLower,
        RecurrenceId::LaguerreLower,
        RecurrenceId::LaguerreRaise,
        RecurrenceId::CagedRaiseX,
        RecurrenceId::CagedLowerX,
        RecurrenceId::CagedRaiseY,
        RecurrenceId::CagedLowerY,
        RecurrenceId::PhiPlusChain,
        RecurrenceId::PhiMinusChain,
    ];
}

impl std::str::FromStr for RecurrenceId {
    type Err = String;
    fn from_str(s: &str) -> Result<RecurrenceId, String> {
        RecurrenceId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown recurrence id `{s}`"))
    }
}

/// Default function spec (with generic parameters drawn from `seed`) for a
/// recurrence check.  `p`, `q` only shape the chain identities.
pub fn default_spec(id: RecurrenceId, seed: u64) -> FnSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00ab_cdef);
    let mut d = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    match id {
        RecurrenceId::CPlus | RecurrenceId::CMinus | RecurrenceId::DPlus | RecurrenceId::DMinus => {
            FnSpec::legendre_p(d(0.3, 2.4), d(-0.6, 0.7))
        }
        RecurrenceId::JPlus | RecurrenceId::JMinus => {
            FnSpec::jacobi_p(d(0.25, 2.3), d(-0.35, 1.2), d(-0.35, 1.2))
        }
        RecurrenceId::KPlus | RecurrenceId::KMinus => {
            // Degree m, order A, scale ω.
            let mut s = FnSpec::laguerre_l(d(0.3, 1.9), d(0.4, 2.2));
            s.scale = d(0.5, 1.5);
            s.domain = Domain::new(0.4, 3.5);
            s
        }
        RecurrenceId::BesselRaise | RecurrenceId::BesselLower => FnSpec::bessel_j(d(0.35, 2.3)),
        RecurrenceId::LaguerreLower | RecurrenceId::LaguerreRaise => {
            FnSpec::laguerre_l(d(0.25, 2.3), d(-0.3, 1.4))
        }
        RecurrenceId::CagedRaiseX
        | RecurrenceId::CagedLowerX
        | RecurrenceId::CagedRaiseY
        | RecurrenceId::CagedLowerY => {
            // Degree n, order a₁ (resp. a₂), scale μ₁ (resp. μ₂).
            let mut s = FnSpec::laguerre_l(d(0.3, 2.2), d(-0.3, 1.3));
            s.scale = d(0.4, 1.5);
            s.domain = Domain::new(0.35, 2.0);
            s
        }
        RecurrenceId::PhiPlusChain | RecurrenceId::PhiMinusChain => {
            // Degree Ω, orders [δ], scale β.
            let mut s = FnSpec::bessel_j(d(0.6, 2.0));
            s.orders = vec![d(0.5, 1.3)];
            s.scale = d(0.5, 1.4);
            s
        }
    }
}

/// Jet of the oscillator axis function
/// `X_n(x) = e^{−μx²/2} x^{a+1/2} L^a_n(μx²)` in `x`.
fn caged_axis_jet(n: f64, a: f64, mu: f64, x0: f64, ord: usize) -> Result<Jet, NumError> {
    let x = jet_var(Complex64::new(x0, 0.0), ord);
    let x2 = jet_mul(&x, &x);
    let gauss = jet_exp(&jet_scale(&x2, Complex64::new(-mu / 2.0, 0.0)));
    let power = jet_powc(&x, Complex64::new(a + 0.5, 0.0));
    let inner = jet_scale(&x2, Complex64::new(mu, 0.0));
    let lag = laguerre_jet(n, a, inner[0], ord)?;
    let lag_of_x = jet_compose(&lag, &inner);
    Ok(jet_mul(&jet_mul(&gauss, &power), &lag_of_x))
}

/// Jet of the radial composite
/// `𝒴^A_m(R) = ω^{A/2} e^{−ωR/2} R^{A/2} L^A_m(ωR)` in `R`.
fn radial_composite_jet(big_a: f64, m: f64, om: f64, r0: f64, ord: usize) -> Result<Jet, NumError> {
    let r = jet_var(Complex64::new(r0, 0.0), ord);
    let gauss = jet_exp(&jet_scale(&r, Complex64::new(-om / 2.0, 0.0)));
    let power = jet_powc(&r, Complex64::new(big_a / 2.0, 0.0));
    let inner = jet_scale(&r, Complex64::new(om, 0.0));
    let lag = laguerre_jet(m, big_a, inner[0], ord)?;
    let lag_of_r = jet_compose(&lag, &inner);
    let pre = Complex64::new(om.powf(big_a / 2.0), 0.0);
    Ok(jet_scale(&jet_mul(&jet_mul(&gauss, &power), &lag_of_r), pre))
}

/// One first-order Bessel shift applied to a jet in the function's own
/// variable: `σ f′ + (ν/z) f` with `σ = −1` raising and `σ = +1` lowering.
fn bessel_shift_step(f: &Jet, z: &Jet, nu: f64, sigma: f64) -> Jet {
    let df = jet_derive(f);
    let term = jet_mul(&jet_scale(&jet_recip(z), Complex64::new(nu, 0.0)), f);
    jet_add(&jet_scale(&df, Complex64::new(sigma, 0.0)), &term)
}

/// Evaluates one recurrence check.  The spec supplies the base function
/// parameters (see [`default_spec`] for the slot conventions); `p` and `q`
/// are used by the chain identities and ignored otherwise.
pub fn check_recurrence(
    id: RecurrenceId,
    spec: &FnSpec,
    p: i64,
    q: i64,
    cfg: &NumCfg,
) -> Result<CheckResult, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(cfg.points);
    let mut residuals = Vec::with_capacity(cfg.points);
    for _ in 0..cfg.points.max(16) {
        let (label, res) = recurrence_residual_at(id, spec, p, q, &mut rng)?;
        points.push(label);
        residuals.push(res);
    }
    Ok(CheckResult::from_samples(
        id.as_str(),
        points,
        &residuals,
        cfg.tol,
    ))
}

fn recurrence_residual_at(
    id: RecurrenceId,
    spec: &FnSpec,
    p: i64,
    q: i64,
    rng: &mut ChaCha8Rng,
) -> Result<(String, f64), NumError> {
    match id {
        RecurrenceId::CPlus | RecurrenceId::CMinus | RecurrenceId::DPlus | RecurrenceId::DMinus => {
            let (nu, mu) = (spec.degree, spec.orders[0]);
            let x = spec.domain.sample(rng)?;
            let xc = Complex64::new(x, 0.0);
            let (t, dt) = eval_fn(spec, xc)?;
            let s = (1.0 - x * x).sqrt();
            let (lhs, rhs) = match id {
                RecurrenceId::CPlus => {
                    let (t_up, _) = eval_fn(&FnSpec::legendre_p(nu, mu + 1.0), xc)?;
                    (s * dt + (mu * x / s) * t, -t_up)
                }
                RecurrenceId::CMinus => {
                    let (t_dn, _) = eval_fn(&FnSpec::legendre_p(nu, mu - 1.0), xc)?;
                    (
                        s * dt - (mu * x / s) * t,
                        Complex64::new((nu + mu) * (nu - mu + 1.0), 0.0) * t_dn,
                    )
                }
                RecurrenceId::DPlus => {
                    let (t_up, _) = eval_fn(&FnSpec::legendre_p(nu + 1.0, mu), xc)?;
                    (
                        (1.0 - x * x) * dt - (nu + 1.0) * x * t,
                        Complex64::new(-(nu - mu + 1.0), 0.0) * t_up,
                    )
                }
                _ => {
                    let (t_dn, _) = eval_fn(&FnSpec::legendre_p(nu - 1.0, mu), xc)?;
                    (
                        (1.0 - x * x) * dt + nu * x * t,
                        Complex64::new(nu + mu, 0.0) * t_dn,
                    )
                }
            };
            Ok((format!("x={x}"), rel_residual(lhs, rhs)))
        }
        RecurrenceId::JPlus | RecurrenceId::JMinus => {
            let (n, a, b) = (spec.degree, spec.orders[0], spec.orders[1]);
            let x = spec.domain.sample(rng)?;
            let xc = Complex64::new(x, 0.0);
            let (f, df) = eval_fn(spec, xc)?;
            let (lhs, rhs) = if id == RecurrenceId::JPlus {
                let (f_up, _) = eval_fn(&FnSpec::jacobi_p(n + 1.0, a, b), xc)?;
                (
                    (n + a + b + 1.0) * ((2.0 * n + a + b + 2.0) * x + (a - b)) * f
                        - (2.0 * n + a + b + 2.0) * (1.0 - x * x) * df,
                    2.0 * (n + 1.0) * (n + a + b + 1.0) * f_up,
                )
            } else {
                let (f_dn, _) = eval_fn(&FnSpec::jacobi_p(n - 1.0, a, b), xc)?;
                (
                    (2.0 * n + a + b) * (1.0 - x * x) * df
                        + n * ((2.0 * n + a + b) * x - (a - b)) * f,
                    2.0 * (n + a) * (n + b) * f_dn,
                )
            };
            Ok((format!("x={x}"), rel_residual(lhs, rhs)))
        }
        RecurrenceId::KPlus | RecurrenceId::KMinus => {
            let (m, big_a, om) = (spec.degree, spec.orders[0], spec.scale);
            let r0 = spec.domain.sample(rng)?;
            let e = -2.0 * om * (2.0 * m + big_a + 1.0);
            let jet = radial_composite_jet(big_a, m, om, r0, 1)?;
            let (y, dy) = (jet[0], jet[1]);
            let (lhs, rhs) = if id == RecurrenceId::KPlus {
                let up = radial_composite_jet(big_a + 2.0, m - 1.0, om, r0, 0)?;
                (
                    (big_a + 1.0) * dy - (e / 4.0) * y - big_a * (big_a + 1.0) / (2.0 * r0) * y,
                    -om * up[0],
                )
            } else {
                let dn = radial_composite_jet(big_a - 2.0, m + 1.0, om, r0, 0)?;
                (
                    (1.0 - big_a) * dy - (e / 4.0) * y + big_a * (1.0 - big_a) / (2.0 * r0) * y,
                    -om * (m + 1.0) * (m + big_a) * dn[0],
                )
            };
            Ok((format!("R={r0}"), rel_residual(lhs, rhs)))
        }
        RecurrenceId::BesselRaise | RecurrenceId::BesselLower => {
            let nu = spec.degree;
            let t = spec.domain.sample(rng)?;
            let phi = rng.gen_range(-0.5..0.5);
            let z = Complex64::new(t, 0.0) * Complex64::new(0.0, phi).exp();
            let (j, dj) = eval_fn(spec, z)?;
            let (lhs, rhs) = if id == RecurrenceId::BesselRaise {
                let (up, _) = eval_fn(&FnSpec::bessel_j(nu + 1.0), z)?;
                (-dj + (nu / z) * j, up)
            } else {
                let (dn, _) = eval_fn(&FnSpec::bessel_j(nu - 1.0), z)?;
                (dj + (nu / z) * j, dn)
            };
            Ok((format!("z={}", fmt_c(z)), rel_residual(lhs, rhs)))
        }
        RecurrenceId::LaguerreLower | RecurrenceId::LaguerreRaise => {
            let (n, alpha) = (spec.degree, spec.orders[0]);
            let z = Complex64::new(spec.domain.sample(rng)?, 0.0);
            let (l, dl) = eval_fn(spec, z)?;
            let (lhs, rhs) = if id == RecurrenceId::LaguerreLower {
                let (dn, _) = eval_fn(&FnSpec::laguerre_l(n - 1.0, alpha), z)?;
                (z * dl, n * l - (n + alpha) * dn)
            } else {
                let (up, _) = eval_fn(&FnSpec::laguerre_l(n + 1.0, alpha), z)?;
                (
                    z * dl,
                    (n + 1.0) * up - (Complex64::new(n + 1.0 + alpha, 0.0) - z) * l,
                )
            };
            Ok((format!("z={}", fmt_c(z)), rel_residual(lhs, rhs)))
        }
        RecurrenceId::CagedRaiseX
        | RecurrenceId::CagedLowerX
        | RecurrenceId::CagedRaiseY
        | RecurrenceId::CagedLowerY => {
            let (n, a, mu) = (spec.degree, spec.orders[0], spec.scale);
            let x0 = spec.domain.sample(rng)?;
            let jet = caged_axis_jet(n, a, mu, x0, 2)?;
            let (f, df, d2f) = (jet[0], jet[1], jet[2] * 2.0);
            let raising = matches!(id, RecurrenceId::CagedRaiseX | RecurrenceId::CagedRaiseY);
            let sign = if raising { -1.0 } else { 1.0 };
            let lhs = d2f
                + sign * 2.0 * x0 * mu * df
                + sign * mu * f
                + mu * mu * x0 * x0 * f
                + (0.25 - a * a) / (x0 * x0) * f;
            let rhs = if raising {
                let up = caged_axis_jet(n + 1.0, a, mu, x0, 0)?;
                -4.0 * mu * (n + 1.0) * up[0]
            } else {
                let dn = caged_axis_jet(n - 1.0, a, mu, x0, 0)?;
                -4.0 * mu * (n + a) * dn[0]
            };
            Ok((format!("x={x0}"), rel_residual(lhs, rhs)))
        }
        RecurrenceId::PhiPlusChain | RecurrenceId::PhiMinusChain => {
            let (omega, delta, beta) = (spec.degree, spec.orders[0], spec.scale);
            let raising = id == RecurrenceId::PhiPlusChain;
            let sigma = if raising { -1.0 } else { 1.0 };
            let shift = if raising { 1.0 } else { -1.0 };
            // Radial part: p shifts of J_Ω(βr) in r.
            let zr = spec.domain.sample(rng)?;
            let r0 = zr / beta;
            let pord = p as usize;
            let outer = besselj_jet(omega, Complex64::new(zr, 0.0), pord)?;
            let arg = jet_scale(
                &jet_var(Complex64::new(r0, 0.0), pord),
                Complex64::new(beta, 0.0),
            );
            let mut f = jet_compose(&outer, &arg);
            let r_jet = jet_var(Complex64::new(r0, 0.0), pord);
            for j in 0..p {
                let c = omega + shift * j as f64;
                let trunc = f.len() - 1;
                let rj: Jet = r_jet[..=trunc].to_vec();
                f = bessel_shift_step(&f, &rj, c, sigma);
            }
            // Angular part: q shifts of J_{qΩ/p}(w) in w, at a complex point.
            let nu_ang = (q as f64) * omega / (p as f64);
            let theta = rng.gen_range(0.1..1.2);
            let w0 = Complex64::new(delta, 0.0) * Complex64::new(0.0, theta).exp();
            let qord = q as usize;
            let mut g = besselj_jet(nu_ang, w0, qord)?;
            let w_jet = jet_var(w0, qord);
            for j in 0..q {
                let c = nu_ang + shift * j as f64;
                let trunc = g.len() - 1;
                let wj: Jet = w_jet[..=trunc].to_vec();
                g = bessel_shift_step(&g, &wj, c, sigma);
            }
            let lhs = f[0] * g[0];
            let radial_target = besselj_jet(omega + shift * p as f64, Complex64::new(zr, 0.0), 0)?;
            let angular_target = besselj_jet(nu_ang + shift * q as f64, w0, 0)?;
            let rhs = Complex64::new(beta.powi(p as i32), 0.0) * radial_target[0] * angular_target[0];
            Ok((
                format!("r={r0}, w={}", fmt_c(w0)),
                rel_residual(lhs, rhs),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Separated equations
// ---------------------------------------------------------------------------

/// The separated ordinary differential equations with numeric residual
/// checks (angular and radial for each family that has them).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OdeId {
    /// Polar sphere equation on the Legendre factor of the separation.
    SpherePolar,
    /// Azimuthal sphere equation on the weighted Legendre factor.
    SphereAzimuthal,
    /// Angular plane-family equation with the complex exponential potential.
    PlaneAngular,
    /// Radial plane-family (Bessel) equation.
    PlaneRadial,
    /// Oscillator axis eigen-equation with its displayed eigenvalue.
    CagedAxis,
    /// Angular deformed-family equation on the weighted Jacobi factor.
    DeformedAngular,
    /// Radial deformed-family equation on the Laguerre composite.
    DeformedRadial,
}

impl OdeId {
    pub fn as_str(&self) -> &'static str {
        match self {
            OdeId::SpherePolar => "sphere_polar_equation",
            OdeId::SphereAzimuthal => "sphere_azimuthal_equation",
            OdeId::PlaneAngular => "plane_angular_equation",
            OdeId::PlaneRadial => "plane_radial_equation",
            OdeId::CagedAxis => "caged_axis_equation",
            OdeId::DeformedAngular => "deformed_angular_equation",
            OdeId::DeformedRadial => "deformed_radial_equation",
        }
    }
}

/// The separated equations relevant to each system family.
pub fn ode_ids(system: SystemId) -> &'static [OdeId] {
    match system {
        SystemId::Sphere => &[OdeId::SpherePolar, OdeId::SphereAzimuthal],
        SystemId::ComplexEuclidean => &[OdeId::PlaneAngular, OdeId::PlaneRadial],
        SystemId::CagedOscillator => &[OdeId::CagedAxis],
        SystemId::Ttw | SystemId::KeplerDeformed => {
            &[OdeId::DeformedAngular, OdeId::DeformedRadial]
        }
    }
}

/// Evaluates the residual of one separated equation at seeded sample points,
/// with generic parameters drawn from the same seed.  `p`, `q` set the
/// rational ratio where the equation involves it.
pub fn check_ode(id: OdeId, p: i64, q: i64, cfg: &NumCfg) -> Result<CheckResult, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0de0_0de0);
    let k = p as f64 / q as f64;
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    for _ in 0..cfg.points.max(16) {
        let (label, res) = ode_residual_at(id, k, &mut rng)?;
        points.push(label);
        residuals.push(res);
    }
    Ok(CheckResult::from_samples(
        id.as_str(),
        points,
        &residuals,
        cfg.tol,
    ))
}

/// Residual of `Σ terms = 0` relative to the largest term magnitude.
fn ode_residual(terms: &[Complex64]) -> f64 {
    let sum: Complex64 = terms.iter().sum();
    let denom = terms
        .iter()
        .map(|t| t.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    sum.norm() / denom
}

fn ode_residual_at(id: OdeId, k: f64, rng: &mut ChaCha8Rng) -> Result<(String, f64), NumError> {
    match id {
        OdeId::SpherePolar => {
            // (∂²_θ + cotθ ∂_θ − μ²/sin²θ + ν(ν+1)) T^μ_ν(cosθ) = 0 with
            // μ = k(N + 1/2).
            let nu = rng.gen_range(0.3..2.4);
            let cap_n = rng.gen_range(0.1..1.1);
            let mu = k * (cap_n + 0.5);
            let theta: f64 = rng.gen_range(0.48..2.6);
            let x0 = theta.cos();
            if x0.abs() > 0.92 {
                return ode_residual_at(id, k, rng);
            }
            let outer = legendre_jet(nu, mu, x0, 2)?;
            let (_, cosj) = jet_sin_cos(1.0, theta, 2);
            let f = jet_compose(&outer, &cosj);
            let (v, d1, d2) = (f[0], f[1], f[2] * 2.0);
            let s = theta.sin();
            let terms = [
                d2,
                d1 * (theta.cos() / s),
                -v * (mu * mu) / (s * s),
                v * nu * (nu + 1.0),
            ];
            Ok((format!("theta={theta}"), ode_residual(&terms)))
        }
        OdeId::SphereAzimuthal => {
            // (∂²_φ + k²(1/4 − a²)/cos²(kφ)) Φ = −k²(N+1/2)² Φ with
            // Φ = (cos kφ)^{1/2} P^a_N(sin kφ).
            let a = rng.gen_range(-0.55..0.55);
            let cap_n = rng.gen_range(0.3..1.9);
            let psi = rng.gen_range(0.12..1.25);
            let phi0 = psi / k;
            let (sinj, cosj) = jet_sin_cos(k, phi0, 2);
            let y0 = sinj[0].re;
            let outer = legendre_jet(cap_n, a, y0, 2)?;
            let u = jet_compose(&outer, &sinj);
            let f = jet_mul(&jet_powc(&cosj, Complex64::new(0.5, 0.0)), &u);
            let (v, _, d2) = (f[0], f[1], f[2] * 2.0);
            let c = psi.cos();
            let terms = [
                d2,
                v * k * k * (0.25 - a * a) / (c * c),
                v * k * k * (cap_n + 0.5) * (cap_n + 0.5),
            ];
            Ok((format!("phi={phi0}"), ode_residual(&terms)))
        }
        OdeId::PlaneAngular => {
            // (∂²_θ − k²δ²e^{2ikθ} + Ω²) Θ = 0 with Θ = J_{Ω/k}(δ e^{ikθ}).
            let omega = rng.gen_range(0.6..2.0);
            let delta = rng.gen_range(0.5..1.3);
            let theta0 = rng.gen_range(0.1..1.2) / k;
            let i = Complex64::new(0.0, 1.0);
            let arg = jet_scale(
                &jet_var(Complex64::new(theta0, 0.0), 2),
                i * Complex64::new(k, 0.0),
            );
            let w = jet_scale(&jet_exp(&arg), Complex64::new(delta, 0.0));
            let outer = besselj_jet(omega / k, w[0], 2)?;
            let f = jet_compose(&outer, &w);
            let (v, _, d2) = (f[0], f[1], f[2] * 2.0);
            let e2 = (i * Complex64::new(2.0 * k * theta0, 0.0)).exp();
            let terms = [
                d2,
                -v * Complex64::new(k * k * delta * delta, 0.0) * e2,
                v * Complex64::new(omega * omega, 0.0),
            ];
            Ok((format!("theta={theta0}"), ode_residual(&terms)))
        }
        OdeId::PlaneRadial => {
            // r²R″ + rR′ + (β²r² − Ω²)R = 0 for R = J_Ω(βr).
            let omega = rng.gen_range(0.6..2.0);
            let beta = rng.gen_range(0.5..1.4);
            let z = rng.gen_range(0.5..3.2);
            let r0 = z / beta;
            let outer = besselj_jet(omega, Complex64::new(z, 0.0), 2)?;
            let arg = jet_scale(
                &jet_var(Complex64::new(r0, 0.0), 2),
                Complex64::new(beta, 0.0),
            );
            let f = jet_compose(&outer, &arg);
            let (v, d1, d2) = (f[0], f[1], f[2] * 2.0);
            let terms = [
                d2 * r0 * r0,
                d1 * r0,
                v * (beta * beta * r0 * r0 - omega * omega),
            ];
            Ok((format!("r={r0}"), ode_residual(&terms)))
        }
        OdeId::CagedAxis => {
            // (∂²_x − μ²x² + (1/4 − a²)/x²) X_n = −2μ(2n+a+1) X_n.
            let n = rng.gen_range(0.3..2.2);
            let a = rng.gen_range(-0.3..1.3);
            let mu = rng.gen_range(0.4..1.5);
            let x0 = rng.gen_range(0.35..2.0);
            let f = caged_axis_jet(n, a, mu, x0, 2)?;
            let (v, _, d2) = (f[0], f[1], f[2] * 2.0);
            let lambda = -2.0 * mu * (2.0 * n + a + 1.0);
            let terms = [
                d2,
                -v * mu * mu * x0 * x0,
                v * (0.25 - a * a) / (x0 * x0),
                -v * lambda,
            ];
            Ok((format!("x={x0}"), ode_residual(&terms)))
        }
        OdeId::DeformedAngular => {
            // (∂²_θ + k²(1/4−a²)/sin²(kθ) + k²(1/4−b²)/cos²(kθ)) Θ
            //   = −k²(2n+a+b+1)² Θ,
            // Θ = (sin kθ)^{a+1/2} (cos kθ)^{b+1/2} X^{a,b}_n(cos 2kθ).
            let n = rng.gen_range(0.25..2.0);
            let a = rng.gen_range(-0.35..1.0);
            let b = rng.gen_range(-0.35..1.0);
            let s = rng.gen_range(0.14..1.43);
            let theta0 = s / k;
            let (sinj, cosj) = jet_sin_cos(k, theta0, 2);
            let (cos2j_s, _) = {
                let (sin2, cos2) = jet_sin_cos(2.0 * k, theta0, 2);
                (cos2, sin2)
            };
            let x0 = cos2j_s[0].re;
            if x0.abs() > 0.95 {
                return ode_residual_at(id, k, rng);
            }
            let outer = jacobi_jet(n, a, b, x0, 2)?;
            let xpart = jet_compose(&outer, &cos2j_s);
            let f = jet_mul(
                &jet_mul(
                    &jet_powc(&sinj, Complex64::new(a + 0.5, 0.0)),
                    &jet_powc(&cosj, Complex64::new(b + 0.5, 0.0)),
                ),
                &xpart,
            );
            let (v, _, d2) = (f[0], f[1], f[2] * 2.0);
            let (sn, cs) = (s.sin(), s.cos());
            let lam = 2.0 * n + a + b + 1.0;
            let terms = [
                d2,
                v * k * k * (0.25 - a * a) / (sn * sn),
                v * k * k * (0.25 - b * b) / (cs * cs),
                v * k * k * lam * lam,
            ];
            Ok((format!("theta={theta0}"), ode_residual(&terms)))
        }
        OdeId::DeformedRadial => {
            // (∂²_r + (1/r)∂_r − ω²r² − A²/r²) S = E S with
            // S = e^{−ωr²/2} r^A L^A_m(ωr²) and E = −2ω(2m+A+1).
            let m = rng.gen_range(0.3..1.9);
            let big_a = rng.gen_range(0.4..2.2);
            let om = rng.gen_range(0.5..1.5);
            let r0 = rng.gen_range(0.4..1.9);
            let r = jet_var(Complex64::new(r0, 0.0), 2);
            let r2 = jet_mul(&r, &r);
            let gauss = jet_exp(&jet_scale(&r2, Complex64::new(-om / 2.0, 0.0)));
            let power = jet_powc(&r, Complex64::new(big_a, 0.0));
            let inner = jet_scale(&r2, Complex64::new(om, 0.0));
            let lag = laguerre_jet(m, big_a, inner[0], 2)?;
            let f = jet_mul(&jet_mul(&gauss, &power), &jet_compose(&lag, &inner));
            let (v, d1, d2) = (f[0], f[1], f[2] * 2.0);
            let e = -2.0 * om * (2.0 * m + big_a + 1.0);
            let terms = [
                d2,
                d1 / r0,
                -v * om * om * r0 * r0,
                -v * big_a * big_a / (r0 * r0),
                -v * e,
            ];
            Ok((format!("r={r0}"), ode_residual(&terms)))
        }
    }
}

// ---------------------------------------------------------------------------
// Wronskian determinant
// ---------------------------------------------------------------------------

/// The 4×4 determinant of two function pairs evaluated at `(x, y)`, built
/// from the displayed matrix of products `f_i^{(·)}(x) g_j^{(·)}(y)`.
pub fn wronskian_product<F1, F2, G1, G2>(
    f1: F1,
    f2: F2,
    g1: G1,
    g2: G2,
    x: f64,
    y: f64,
) -> Complex64
where
    F1: Fn(f64) -> (Complex64, Complex64),
    F2: Fn(f64) -> (Complex64, Complex64),
    G1: Fn(f64) -> (Complex64, Complex64),
    G2: Fn(f64) -> (Complex64, Complex64),
{
    let (f1v, f1d) = f1(x);
    let (f2v, f2d) = f2(x);
    let (g1v, g1d) = g1(y);
    let (g2v, g2d) = g2(y);
    let m = [
        [f1d * g1d, f1d * g1v, f1v * g1d, f1v * g1v],
        [f1d * g2d, f1d * g2v, f1v * g2d, f1v * g2v],
        [f2d * g1d, f2d * g1v, f2v * g1d, f2v * g1v],
        [f2d * g2d, f2d * g2v, f2v * g2d, f2v * g2v],
    ];
    det4(&m)
}

fn det4(m: &[[Complex64; 4]; 4]) -> Complex64 {
    let mut det = Complex64::new(0.0, 0.0);
    for c in 0..4 {
        let mut minor = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter().enumerate().skip(1) {
            let mut jj = 0;
            for (j, &v) in row.iter().enumerate() {
                if j != c {
                    minor[i - 1][jj] = v;
                    jj += 1;
                }
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += Complex64::new(sign, 0.0) * m[0][c] * d3;
    }
    det
}

fn wronskian2(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> Complex64 {
    a.0 * b.1 - a.1 * b.0
}

/// Integrates a second, independent solution of the Legendre equation
/// `(1−x²) y″ − 2x y′ + (ν(ν+1) − μ²/(1−x²)) y = 0` from `x0` to `x1` by
/// classical RK4, starting from `y(x0) = 0`, `y′(x0) = 1`.
pub fn legendre_second_solution(nu: f64, mu: f64, x0: f64, x1: f64, steps: usize) -> (f64, f64) {
    let rhs = |x: f64, y: f64, dy: f64| -> f64 {
        (2.0 * x * dy - (nu * (nu + 1.0) - mu * mu / (1.0 - x * x)) * y) / (1.0 - x * x)
    };
    let h = (x1 - x0) / steps as f64;
    let (mut x, mut y, mut dy) = (x0, 0.0f64, 1.0f64);
    for _ in 0..steps {
        let k1y = dy;
        let k1d = rhs(x, y, dy);
        let k2y = dy + 0.5 * h * k1d;
        let k2d = rhs(x + 0.5 * h, y + 0.5 * h * k1y, dy + 0.5 * h * k1d);
        let k3y = dy + 0.5 * h * k2d;
        let k3d = rhs(x + 0.5 * h, y + 0.5 * h * k2y, dy + 0.5 * h * k2d);
        let k4y = dy + h * k3d;
        let k4d = rhs(x + h, y + h * k3y, dy + h * k3d);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        x += h;
    }
    (y, dy)
}

/// The three Wronskian checks: the algebraic factorization of the 4×4
/// determinant into squared 2×2 Wronskians, vanishing for a dependent pair,
/// and nonvanishing for a pair of independent Legendre-equation solutions
/// (series first solution against an integrated second solution).
pub fn wronskian_checks(cfg: &NumCfg) -> Result<Vec<CheckResult>, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0b0b_0b0b);
    let mut fact_points = Vec::new();
    let mut fact_res = Vec::new();
    let mut dep_points = Vec::new();
    let mut dep_res = Vec::new();
    for _ in 0..cfg.points.max(16) {
        let nu1 = rng.gen_range(0.3..2.2);
        let mu1 = rng.gen_range(-0.5..0.6);
        let nu2 = rng.gen_range(0.3..2.2);
        let n1 = rng.gen_range(0.3..2.0);
        let a1 = rng.gen_range(-0.3..1.0);
        let b1 = rng.gen_range(-0.3..1.0);
        let x = rng.gen_range(-0.82..0.82);
        let y = rng.gen_range(-0.82..0.82);
        let f1 = |t: f64| eval_fn(&FnSpec::legendre_p(nu1, mu1), Complex64::new(t, 0.0)).unwrap();
        let f2 = |t: f64| eval_fn(&FnSpec::legendre_p(nu2, mu1), Complex64::new(t, 0.0)).unwrap();
        let g1 = |t: f64| eval_fn(&FnSpec::jacobi_p(n1, a1, b1), Complex64::new(t, 0.0)).unwrap();
        let g2 =
            |t: f64| eval_fn(&FnSpec::jacobi_p(n1 + 1.0, a1, b1), Complex64::new(t, 0.0)).unwrap();
        let det = wronskian_product(&f1, &f2, &g1, &g2, x, y);
        let wx = wronskian2(f1(x), f2(x));
        let wy = wronskian2(g1(y), g2(y));
        let expected = wx * wx * wy * wy;
        fact_points.push(format!("x={x}, y={y}"));
        fact_res.push(rel_residual(det, expected));
        // A dependent pair collapses the determinant.
        let f2dep = |t: f64| {
            let (v, d) = f1(t);
            (v * 3.0, d * 3.0)
        };
        let det_dep = wronskian_product(&f1, &f2dep, &g1, &g2, x, y);
        let scale = det.norm().max(expected.norm()).max(1e-30);
        dep_points.push(format!("x={x}, y={y}"));
        dep_res.push(det_dep.norm() / scale);
    }
    let factorization =
        CheckResult::from_samples("wronskian_factorization", fact_points, &fact_res, cfg.tol);
    let dependent = CheckResult::from_samples(
        "wronskian_dependent_pair_zero",
        dep_points,
        &dep_res,
        cfg.tol,
    );

    // Independence: the Wronskian of the series solution against an
    // integrated second solution must be bounded away from zero.
    let nu = 1.37;
    let mu = 0.41;
    let x_eval = 0.3;
    let p_sol = |t: f64| eval_fn(&FnSpec::legendre_p(nu, mu), Complex64::new(t, 0.0)).unwrap();
    let (q_v, q_d) = legendre_second_solution(nu, mu, 0.0, x_eval, 4000);
    let w = wronskian2(
        p_sol(x_eval),
        (Complex64::new(q_v, 0.0), Complex64::new(q_d, 0.0)),
    );
    let nonzero = CheckResult {
        id: "wronskian_independent_nonzero".to_string(),
        points: vec![format!("x={x_eval}")],
        max_rel_residual: w.norm(),
        tol: cfg.tol,
        // Here the recorded number is the Wronskian magnitude itself and the
        // check passes when it is well away from zero.
        pass: w.norm() > 1e-6,
    };
    Ok(vec![factorization, dependent, nonzero])
}

// ---------------------------------------------------------------------------
// Ladder composition and derivative cross-checks
// ---------------------------------------------------------------------------

/// Generic parameters of one deformed-family sample.
#[derive(Debug, Clone, Serialize)]
pub struct DeformedSample {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub m: f64,
    pub omega: f64,
}

impl DeformedSample {
    pub fn draw(rng: &mut ChaCha8Rng) -> DeformedSample {
        DeformedSample {
            a: rng.gen_range(-0.35..1.0),
            b: rng.gen_range(-0.35..1.0),
            n: rng.gen_range(0.25..1.8),
            m: rng.gen_range(0.3..1.9),
            omega: rng.gen_range(0.5..1.5),
        }
    }
}

/// Applies `q` Jacobi raising steps (in the angular variable) and `p`
/// radial raising steps (in the squared-radius variable) as first-order
/// differential operators, and compares the product against the closed-form
/// multiplier `2^q (−1)^p ω^p (n+1)_q (n+a+b+1)_q` acting on the raised
/// basis function.
pub fn check_ladder_composition(p: i64, q: i64, cfg: &NumCfg) -> Result<CheckResult, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0c0_c0c0);
    let k = p as f64 / q as f64;
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    for _ in 0..cfg.points.max(16) {
        let s = DeformedSample::draw(&mut rng);
        let (a, b, n, m, om) = (s.a, s.b, s.n, s.m, s.omega);
        let big_a = k * (2.0 * n + a + b + 1.0);
        let x0 = rng.gen_range(-0.85..0.85);
        let r0 = rng.gen_range(1.2..5.0) / om;

        // Angular chain: q first-order raises on X^{a,b}_n.
        let qord = q as usize;
        let mut f = jacobi_jet(n, a, b, x0, qord)?;
        let x_jet = jet_var(Complex64::new(x0, 0.0), qord);
        let one = jet_const(Complex64::new(1.0, 0.0), qord);
        let one_minus_x2 = jet_sub(&one, &jet_mul(&x_jet, &x_jet));
        for j in 0..q {
            let nj = n + j as f64;
            let trunc = f.len() - 1;
            let df = jet_derive(&f);
            let tx: Jet = x_jet[..=trunc.min(x_jet.len() - 1)].to_vec();
            let t1m: Jet = one_minus_x2[..=trunc.min(one_minus_x2.len() - 1)].to_vec();
            let coeff_d = Complex64::new(-(2.0 * nj + a + b + 2.0), 0.0);
            let lin = jet_add(
                &jet_scale(&tx, Complex64::new(2.0 * nj + a + b + 2.0, 0.0)),
                &jet_const(Complex64::new(a - b, 0.0), trunc),
            );
            f = jet_add(
                &jet_scale(&jet_mul(&t1m, &df), coeff_d),
                &jet_scale(&jet_mul(&lin, &f), Complex64::new(nj + a + b + 1.0, 0.0)),
            );
        }

        // Radial chain: p first-order steps with the scalar prefactor
        // conjugated out exactly.  On e^{−z/2} (z/ω)^{A'/2}-weighted
        // composites the step with E and the 1/R singular term reduces, in
        // z = ωR, to g ↦ ω((A'+1) g′ + (m−j) g)/z, which sends the Laguerre
        // factor of 𝒴^{A'}_{m−j} to −ω times that of 𝒴^{A'+2}_{m−j−1}.
        // Both sides of the comparison drop the same prefactor, so the
        // relative residual is unchanged while the evaluation stays
        // well-conditioned for large orders.  The unreduced single-step
        // identities are checked separately.
        let pord = p as usize;
        let z0 = Complex64::new(om * r0, 0.0);
        let mut g = laguerre_jet(m, big_a, z0, pord)?;
        let z_jet = jet_var(z0, pord);
        for j in 0..p {
            let aj = big_a + 2.0 * j as f64;
            let trunc = g.len() - 1;
            let dg = jet_derive(&g);
            let zj: Jet = z_jet[..=trunc].to_vec();
            let num = jet_add(
                &jet_scale(&dg, Complex64::new(aj + 1.0, 0.0)),
                &jet_scale(&g[..=trunc].to_vec(), Complex64::new(m - j as f64, 0.0)),
            );
            g = jet_scale(&jet_mul(&jet_recip(&zj), &num), Complex64::new(om, 0.0));
        }

        let lhs = f[0] * g[0];
        let x_target = jacobi_jet(n + q as f64, a, b, x0, 0)?;
        let r_target = laguerre_jet(m - p as f64, big_a + 2.0 * p as f64, z0, 0)?;
        let mult = 2.0f64.powi(q as i32)
            * (-1.0f64).powi(p as i32)
            * om.powi(p as i32)
            * poch(n + 1.0, q)
            * poch(n + a + b + 1.0, q);
        let rhs = Complex64::new(mult, 0.0) * x_target[0] * r_target[0];
        points.push(format!("x={x0}, R={r0}"));
        residuals.push(rel_residual(lhs, rhs));
    }
    Ok(CheckResult::from_samples(
        &format!("ladder_composition_p{p}_q{q}"),
        points,
        &residuals,
        cfg.tol.max(CHAIN_TOL),
    ))
}

/// Checks the series derivative against central finite differences
/// (step `1e−5`, relative tolerance `1e−6`) on a spec's domain.
pub fn check_derivative(spec: &FnSpec, cfg: &NumCfg) -> Result<CheckResult, NumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd1ff_d1ff);
    let h = 1e-5;
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    for _ in 0..cfg.points.max(16) {
        let x = spec.domain.sample(&mut rng)?;
        let xc = Complex64::new(x, 0.0);
        let (_, d) = eval_fn(spec, xc)?;
        let (vp, _) = eval_fn(spec, Complex64::new(x + h, 0.0))?;
        let (vm, _) = eval_fn(spec, Complex64::new(x - h, 0.0))?;
        let fd = (vp - vm) / Complex64::new(2.0 * h, 0.0);
        points.push(format!("x={x}"));
        residuals.push(rel_residual(d, fd));
    }
    Ok(CheckResult::from_samples(
        &format!("derivative_vs_central_difference_{:?}", spec.family),
        points,
        &residuals,
        1e-6,
    ))
}

// ---------------------------------------------------------------------------
// Suites and report
// ---------------------------------------------------------------------------

/// Runs every factor-recurrence check (single steps at generic parameters,
/// chains at the given `(p, q)`).
pub fn recurrence_suite(p: i64, q: i64, cfg: &NumCfg) -> Result<Vec<CheckResult>, NumError> {
    RecurrenceId::ALL
        .iter()
        .map(|&id| {
            let spec = default_spec(id, cfg.seed);
            check_recurrence(id, &spec, p, q, cfg)
        })
        .collect()
}

/// Runs every separated-equation check at the given `(p, q)`.
pub fn ode_suite(p: i64, q: i64, cfg: &NumCfg) -> Result<Vec<CheckResult>, NumError> {
    [
        OdeId::SpherePolar,
        OdeId::SphereAzimuthal,
        OdeId::PlaneAngular,
        OdeId::PlaneRadial,
        OdeId::CagedAxis,
        OdeId::DeformedAngular,
        OdeId::DeformedRadial,
    ]
    .iter()
    .map(|&id| check_ode(id, p, q, cfg))
    .collect()
}

/// The complete numeric report for one `(p, q)`: recurrences, separated
/// equations, Wronskian checks, the ladder composition and the derivative
/// cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct NumericReport {
    pub schema_version: String,
    pub p: i64,
    pub q: i64,
    pub cfg: NumCfg,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

pub fn numeric_report(p: i64, q: i64, cfg: &NumCfg) -> Result<NumericReport, NumError> {
    let mut checks = recurrence_suite(p, q, cfg)?;
    checks.extend(ode_suite(p, q, cfg)?);
    checks.extend(wronskian_checks(cfg)?);
    checks.push(check_ladder_composition(p, q, cfg)?);
    for family in [
        FnSpec::legendre_p(1.7, 0.31),
        FnSpec::jacobi_p(1.3, 0.21, -0.11),
        FnSpec::laguerre_l(1.45, 0.37),
        FnSpec::bessel_j(0.83),
        FnSpec::confluent(0.6, 1.7),
    ] {
        checks.push(check_derivative(&family, cfg)?);
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(NumericReport {
        schema_version: crate::structure::SCHEMA_VERSION.to_string(),
        p,
        q,
        cfg: cfg.clone(),
        checks,
        all_pass,
    })
}

// ---------------------------------------------------------------------------

//! One-index difference-operator models of the five system families.
//!
//! Each family separates in coordinates where one second-order symmetry acts
//! diagonally on a formal eigenbasis labelled by a single index.  Ladder
//! operators shift that index by a fixed step, with coefficients that are
//! exact rational functions of the index and the parameters.  Every ladder
//! is constructed twice — once from its closed-form multiplier and once as
//! the ordered product of one-step factor multipliers — and the two
//! constructions must agree exactly or the builder refuses to return a
//! model.
//!
//! Symbol conventions (`k = p/q` is always a concrete rational, never a
//! symbol):
//!
//! * `Sphere`      — symbols `(N, n, a)`; index `N`, step `q`; the energy
//!   eigenvalue is `−n(n+1)` and the diagonal symmetry eigenvalue is
//!   `−k²(N+1/2)²`.
//! * `ComplexEuclidean` — symbols `(Om, be)`; index `Om`, step `p`; energy
//!   `−be²`, diagonal symmetry `Om²`.
//! * `CagedOscillator` — symbols `(t, u, mu, a1, a2)`; index `t`, step `q`;
//!   energy `−2mu(qu+p·a1+p+q·a2+q)`, diagonal symmetry `−2p·mu(2t+a1+1)`
//!   (conventionally called `L1` for this family).
//! * `TTW`         — symbols `(n, u, a, b, om)`; index `n`, step `q`; energy
//!   `−2om(2u+1+(a+b+1)k)`, diagonal symmetry `−k²(2n+a+b+1)²`.
//! * `KeplerDeformed` — the same operators as `TTW` with the roles of the
//!   frequency coupling and the energy exchanged: the Hamiltonian eigenvalue
//!   becomes `om²/4` and the former energy combination becomes the coupling
//!   eigenvalue `Z = −om(2u+1+(a+b+1)k)/2`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{pochhammer, rat, rat_int, rat_pow, AlgError, MPoly, RFunc, Vars};
use crate::shiftops::{DiagonalRewrite, OpError, PrepStep, ShiftOp};

/// The five supported system families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SystemId {
    Sphere,
    ComplexEuclidean,
    CagedOscillator,
    #[serde(rename = "TTW")]
    Ttw,
    KeplerDeformed,
}

impl SystemId {
    /// Stable identifier used in reports and on the command line.
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemId::Sphere => "Sphere",
            SystemId::ComplexEuclidean => "ComplexEuclidean",
            SystemId::CagedOscillator => "CagedOscillator",
            SystemId::Ttw => "TTW",
            SystemId::KeplerDeformed => "KeplerDeformed",
        }
    }

    /// All families, in report order.
    pub fn all() -> [SystemId; 5] {
        [
            SystemId::Sphere,
            SystemId::ComplexEuclidean,
            SystemId::CagedOscillator,
            SystemId::Ttw,
            SystemId::KeplerDeformed,
        ]
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "sphere" => Ok(SystemId::Sphere),
            "complexeuclidean" | "ce" => Ok(SystemId::ComplexEuclidean),
            "cagedoscillator" | "caged" => Ok(SystemId::CagedOscillator),
            "ttw" => Ok(SystemId::Ttw),
            "keplerdeformed" | "kepler" => Ok(SystemId::KeplerDeformed),
            _ => Err(format!(
                "unknown system '{s}' (expected one of: sphere, complex_euclidean, caged, ttw, kepler)"
            )),
        }
    }
}

/// Errors raised while building a model.
#[derive(Debug, Error)]
pub enum SysError {
    /// `p` and `q` must be coprime positive integers.
    #[error("p and q must be coprime positive integers, got p={p}, q={q}")]
    InvalidPq { p: i64, q: i64 },
    /// The factor-chain product disagrees with the closed-form multiplier.
    #[error("{which}: factor-chain product `{chain}` != closed form `{closed}`")]
    ConstructionMismatch {
        which: String,
        chain: String,
        closed: String,
    },
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Op(#[from] OpError),
}

/// A raising/lowering pair together with its closed-form multipliers.
#[derive(Debug, Clone)]
pub struct LadderPair {
    /// Raising operator: one term at `+step`.
    pub raise: ShiftOp,
    /// Lowering operator: one term at `−step`.
    pub lower: ShiftOp,
    /// Closed-form raising multiplier (polynomial in the model symbols).
    pub raise_action: MPoly,
    /// Closed-form lowering multiplier.
    pub lower_action: MPoly,
}

/// A fully constructed one-index model of a system family.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub id: SystemId,
    pub p: i64,
    pub q: i64,
    /// Model-side symbol table.
    pub vars: Arc<Vars>,
    /// Position of the ladder index symbol in `vars`.
    pub index: usize,
    /// Index step of the raising operator.
    pub raise_shift: i64,
    /// Center of the index reflection that exchanges raising and lowering
    /// data (exact at ladder level only for some families; always exact at
    /// product level).
    pub reflection_center: RFunc,
    /// Name of the diagonal second symmetry in reports (`L2`, or `L1` for
    /// the caged oscillator where that name is conventional).
    pub l2_symbol: &'static str,
    /// Eigenvalue of the diagonal second symmetry.
    pub l2_map: MPoly,
    /// Name of the Hamiltonian symbol in reports (`H`, or `Hp` for the
    /// coupling-exchanged oscillator).
    pub h_symbol: &'static str,
    /// Eigenvalue of the Hamiltonian.
    pub h_map: MPoly,
    /// Additional named diagonal eigenvalues (second separation constant,
    /// exchanged coupling, ...).
    pub extra_diag: Vec<(&'static str, MPoly)>,
    /// The ladder pair.
    pub ladders: LadderPair,
    /// One-step factor multipliers whose ordered product must reproduce
    /// `raise_action` / `lower_action`.
    pub raise_chain: Vec<MPoly>,
    pub lower_chain: Vec<MPoly>,
    /// Report-side symbol table for extracted polynomials.
    pub report_vars: Arc<Vars>,
    /// Model-side eigenvalue of each report symbol (for round-trip checks).
    pub report_images: Vec<RFunc>,
    /// Recipe expressing admissible diagonal scalars over the report
    /// symbols.
    pub rewrite: DiagonalRewrite,
    /// Flagged modelling caveats, carried into reports.
    pub notes: Vec<String>,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

fn check_pq(p: i64, q: i64) -> Result<(), SysError> {
    if p < 1 || q < 1 || gcd(p, q) != 1 {
        return Err(SysError::InvalidPq { p, q });
    }
    Ok(())
}

fn check_chain(which: &str, chain: &[MPoly], closed: &MPoly) -> Result<(), SysError> {
    let mut prod = MPoly::one(closed.vars());
    for f in chain {
        prod = prod.mul(f);
    }
    if &prod != closed {
        return Err(SysError::ConstructionMismatch {
            which: which.to_string(),
            chain: prod.to_string(),
            closed: closed.to_string(),
        });
    }
    Ok(())
}

/// Builds the model for `id` at concrete coprime `(p, q)`.
pub fn build_model(id: SystemId, p: i64, q: i64) -> Result<SystemModel, SysError> {
    check_pq(p, q)?;
    match id {
        SystemId::Sphere => build_sphere(p, q),
        SystemId::ComplexEuclidean => build_complex_euclidean(p, q),
        SystemId::CagedOscillator => build_caged(p, q),
        SystemId::Ttw => build_ttw_like(p, q, false),
        SystemId::KeplerDeformed => build_ttw_like(p, q, true),
    }
}

fn build_sphere(p: i64, q: i64) -> Result<SystemModel, SysError> {
    let vars = Vars::new(&["N", "n", "a"]);
    let nn = MPoly::var(&vars, 0);
    let en = MPoly::var(&vars, 1);
    let pa = MPoly::var(&vars, 2);
    let one = MPoly::one(&vars);
    let k = rat(p, q);
    // Centered index and its k-multiple.
    let centered = nn.add(&MPoly::constant(&vars, rat(1, 2)));
    let kc = centered.scale(&k);
    let sign = if (p + q) % 2 == 0 { rat_int(1) } else { rat_int(-1) };

    // Raising multiplier and its one-step factors: q degree-raising steps on
    // the azimuthal function, then p order-raising steps each contributing
    // −1 on the polar function.
    let raise_action = pochhammer(&nn.sub(&pa).add(&one), q as u32).scale(&sign);
    let mut raise_chain: Vec<MPoly> = (0..q)
        .map(|j| {
            nn.add(&MPoly::constant(&vars, rat_int(j + 1)))
                .sub(&pa)
                .neg()
        })
        .collect();
    raise_chain.extend((0..p).map(|_| MPoly::constant(&vars, rat_int(-1))));

    // Lowering multiplier: q degree-lowering azimuthal steps and p
    // order-lowering polar steps whose multipliers carry the energy symbol.
    let lower_action = pochhammer(&nn.neg().sub(&pa), q as u32)
        .mul(&pochhammer(&en.neg().sub(&kc), p as u32))
        .mul(&pochhammer(&en.sub(&kc).add(&one), p as u32))
        .scale(&sign);
    let mut lower_chain: Vec<MPoly> = (0..q)
        .map(|j| nn.add(&pa).sub(&MPoly::constant(&vars, rat_int(j))))
        .collect();
    lower_chain.extend((0..p).map(|j| {
        let mu = kc.sub(&MPoly::constant(&vars, rat_int(j)));
        en.add(&mu).mul(&en.sub(&mu).add(&one))
    }));

    check_chain("sphere raising multiplier", &raise_chain, &raise_action)?;
    check_chain("sphere lowering multiplier", &lower_chain, &lower_action)?;

    let l2_map = centered.pow(2).scale(&rat(-p * p, q * q));
    let h_map = en.pow(2).add(&en).neg();

    let report_vars = Vars::new(&["H", "L2", "a"]);
    let rh = MPoly::var(&report_vars, 0);
    let rl2 = MPoly::var(&report_vars, 1);
    let ra = MPoly::var(&report_vars, 2);
    let report_images = vec![
        RFunc::from_poly(h_map.clone()),
        RFunc::from_poly(l2_map.clone()),
        RFunc::from_poly(pa.clone()),
    ];
    // Diagonal scalars are even in N+1/2 and in n+1/2; the squares map to
    // −L2/k² and 1/4 − H.
    let rewrite = DiagonalRewrite {
        model_vars: vars.clone(),
        target_vars: report_vars.clone(),
        prep: vec![
            PrepStep::CenterEven {
                var: 0,
                center: MPoly::constant(&vars, rat(-1, 2)),
            },
            PrepStep::CenterEven {
                var: 1,
                center: MPoly::constant(&vars, rat(-1, 2)),
            },
        ],
        images: vec![
            Some(RFunc::from_poly(rl2.scale(&rat(-q * q, p * p)))),
            Some(RFunc::from_poly(
                MPoly::constant(&report_vars, rat(1, 4)).sub(&rh),
            )),
            Some(RFunc::from_poly(ra)),
        ],
    };

    Ok(SystemModel {
        id: SystemId::Sphere,
        p,
        q,
        index: 0,
        raise_shift: q,
        reflection_center: RFunc::constant(&vars, rat(-1, 2)),
        l2_symbol: "L2",
        l2_map,
        h_symbol: "H",
        h_map,
        extra_diag: vec![],
        ladders: ladder_pair(&vars, 0, q, raise_action, lower_action),
        raise_chain,
        lower_chain,
        report_vars,
        report_images,
        rewrite,
        vars,
        notes: vec![
            "index reflection exchanges raising and lowering data only at product level; \
             the lowering multiplier carries energy-dependent polar factors that the raising \
             multiplier lacks"
                .to_string(),
        ],
    })
}

fn build_complex_euclidean(p: i64, q: i64) -> Result<SystemModel, SysError> {
    let vars = Vars::new(&["Om", "be"]);
    let be = MPoly::var(&vars, 1);
    let om = MPoly::var(&vars, 0);

    // Both chains multiply the basis by be^p: each radial factor contributes
    // be, each angular factor contributes 1.
    let action = be.pow(p as u32);
    let mut chain: Vec<MPoly> = (0..p).map(|_| be.clone()).collect();
    chain.extend((0..q).map(|_| MPoly::one(&vars)));
    check_chain("plane-wave raising multiplier", &chain, &action)?;

    let l2_map = om.pow(2);
    let h_map = be.pow(2).neg();

    let report_vars = Vars::new(&["H", "L2"]);
    let rh = MPoly::var(&report_vars, 0);
    let rl2 = MPoly::var(&report_vars, 1);
    let report_images = vec![
        RFunc::from_poly(h_map.clone()),
        RFunc::from_poly(l2_map.clone()),
    ];
    let rewrite = DiagonalRewrite {
        model_vars: vars.clone(),
        target_vars: report_vars.clone(),
        prep: vec![
            PrepStep::CenterEven {
                var: 0,
                center: MPoly::zero(&vars),
            },
            PrepStep::CenterEven {
                var: 1,
                center: MPoly::zero(&vars),
            },
        ],
        images: vec![
            Some(RFunc::from_poly(rl2)),
            Some(RFunc::from_poly(rh.neg())),
        ],
    };

    Ok(SystemModel {
        id: SystemId::ComplexEuclidean,
        p,
        q,
        index: 0,
        raise_shift: p,
        reflection_center: RFunc::zero(&vars),
        l2_symbol: "L2",
        l2_map,
        h_symbol: "H",
        h_map,
        extra_diag: vec![],
        ladders: ladder_pair(&vars, 0, p, action.clone(), action),
        raise_chain: chain.clone(),
        lower_chain: chain,
        report_vars,
        report_images,
        rewrite,
        vars,
        notes: vec![],
    })
}

fn build_caged(p: i64, q: i64) -> Result<SystemModel, SysError> {
    let vars = Vars::new(&["t", "u", "mu", "a1", "a2"]);
    let t = MPoly::var(&vars, 0);
    let u = MPoly::var(&vars, 1);
    let mu = MPoly::var(&vars, 2);
    let a1 = MPoly::var(&vars, 3);
    let a2 = MPoly::var(&vars, 4);
    let one = MPoly::one(&vars);
    let kt = t.scale(&rat(p, q));

    // Raising: q steps at frequency p·mu raising the first index, then p
    // steps at frequency q·mu lowering the complementary index u − k t.
    let c_raise = rat_pow(&rat_int(-4 * p), q as u32) * rat_pow(&rat_int(4 * q), p as u32);
    let raise_action = pochhammer(&t.add(&one), q as u32)
        .mul(&pochhammer(&u.neg().add(&kt).sub(&a2), p as u32))
        .mul(&mu.pow((p + q) as u32))
        .scale(&c_raise);
    let mut raise_chain: Vec<MPoly> = (0..q)
        .map(|j| {
            t.add(&MPoly::constant(&vars, rat_int(j + 1)))
                .mul(&mu)
                .scale(&rat_int(-4 * p))
        })
        .collect();
    raise_chain.extend((0..p).map(|j| {
        u.sub(&kt)
            .add(&a2)
            .sub(&MPoly::constant(&vars, rat_int(j)))
            .mul(&mu)
            .scale(&rat_int(-4 * q))
    }));

    // Lowering: the mirror-image steps.
    let c_lower = rat_pow(&rat_int(4 * p), q as u32) * rat_pow(&rat_int(-4 * q), p as u32);
    let lower_action = pochhammer(&t.neg().sub(&a1), q as u32)
        .mul(&pochhammer(&u.sub(&kt).add(&one), p as u32))
        .mul(&mu.pow((p + q) as u32))
        .scale(&c_lower);
    let mut lower_chain: Vec<MPoly> = (0..q)
        .map(|j| {
            t.add(&a1)
                .sub(&MPoly::constant(&vars, rat_int(j)))
                .mul(&mu)
                .scale(&rat_int(-4 * p))
        })
        .collect();
    lower_chain.extend((0..p).map(|j| {
        u.sub(&kt)
            .add(&MPoly::constant(&vars, rat_int(j + 1)))
            .mul(&mu)
            .scale(&rat_int(-4 * q))
    }));

    check_chain("caged raising multiplier", &raise_chain, &raise_action)?;
    check_chain("caged lowering multiplier", &lower_chain, &lower_action)?;

    // Diagonal symmetry (conventionally L1) and Hamiltonian eigenvalues.
    let l2_map = t
        .scale(&rat_int(2))
        .add(&a1)
        .add(&one)
        .mul(&mu)
        .scale(&rat_int(-2 * p));
    let h_map = u
        .scale(&rat_int(2 * q))
        .add(&a1.scale(&rat_int(p)))
        .add(&a2.scale(&rat_int(q)))
        .add(&MPoly::constant(&vars, rat_int(p + q)))
        .mul(&mu)
        .scale(&rat_int(-2));
    // Second separation constant; the model checks H = L1 + L2.
    let second = u
        .sub(&kt)
        .scale(&rat_int(2))
        .add(&a2)
        .add(&one)
        .mul(&mu)
        .scale(&rat_int(-2 * q));
    debug_assert_eq!(l2_map.add(&second), h_map);

    let report_vars = Vars::new(&["H", "L1", "mu", "a1", "a2"]);
    let rh = MPoly::var(&report_vars, 0);
    let rl1 = MPoly::var(&report_vars, 1);
    let rmu = MPoly::var(&report_vars, 2);
    let ra1 = MPoly::var(&report_vars, 3);
    let ra2 = MPoly::var(&report_vars, 4);
    let report_images = vec![
        RFunc::from_poly(h_map.clone()),
        RFunc::from_poly(l2_map.clone()),
        RFunc::from_poly(mu.clone()),
        RFunc::from_poly(a1.clone()),
        RFunc::from_poly(a2.clone()),
    ];
    // Inverse maps: solve the two eigenvalue relations for t and u.
    let t_image = RFunc::new(
        rl1.add(
            &ra1.add(&MPoly::one(&report_vars))
                .mul(&rmu)
                .scale(&rat_int(2 * p)),
        )
        .scale(&rat(-1, 4 * p)),
        vec![(rmu.clone(), 1)],
    );
    let u_image = RFunc::new(
        rh.add(
            &ra1.scale(&rat_int(p))
                .add(&ra2.scale(&rat_int(q)))
                .add(&MPoly::constant(&report_vars, rat_int(p + q)))
                .mul(&rmu)
                .scale(&rat_int(2)),
        )
        .scale(&rat(-1, 4 * q)),
        vec![(rmu.clone(), 1)],
    );
    let rewrite = DiagonalRewrite {
        model_vars: vars.clone(),
        target_vars: report_vars.clone(),
        prep: vec![],
        images: vec![
            Some(t_image),
            Some(u_image),
            Some(RFunc::from_poly(rmu)),
            Some(RFunc::from_poly(ra1)),
            Some(RFunc::from_poly(ra2)),
        ],
    };

    Ok(SystemModel {
        id: SystemId::CagedOscillator,
        p,
        q,
        index: 0,
        raise_shift: q,
        reflection_center: RFunc::from_poly(
            a1.add(&one).scale(&rat(-1, 2)),
        ),
        l2_symbol: "L1",
        l2_map,
        h_symbol: "H",
        h_map,
        extra_diag: vec![("L2", second)],
        ladders: ladder_pair(&vars, 0, q, raise_action, lower_action),
        raise_chain,
        lower_chain,
        report_vars,
        report_images,
        rewrite,
        vars,
        notes: vec![
            "ladder-level index reflection holds only for p+q even and needs the joint \
             involution (t, u) -> (-t-a1-1, -u-a2-1-k(a1+1)); the product identities hold \
             for all p, q"
                .to_string(),
            "the Hamiltonian eigenvalue is fixed by H = L1 + L2 with the one-dimensional \
             spectra -2*p*mu*(2t+a1+1) and -2*q*mu*(2(u-kt)+a2+1); a variant normalization \
             that halves the index term does not satisfy that sum"
                .to_string(),
        ],
    })
}

fn build_ttw_like(p: i64, q: i64, coupling_exchanged: bool) -> Result<SystemModel, SysError> {
    let vars = Vars::new(&["n", "u", "a", "b", "om"]);
    let n = MPoly::var(&vars, 0);
    let u = MPoly::var(&vars, 1);
    let a = MPoly::var(&vars, 2);
    let b = MPoly::var(&vars, 3);
    let om = MPoly::var(&vars, 4);
    let one = MPoly::one(&vars);
    let k = rat(p, q);
    let abp1 = a.add(&b).add(&one);

    // Raising: q angular steps, then p radial steps each contributing −om.
    let sign_p = if p % 2 == 0 { rat_int(1) } else { rat_int(-1) };
    let raise_action = pochhammer(&n.add(&one), q as u32)
        .mul(&pochhammer(&n.add(&abp1), q as u32))
        .mul(&om.pow(p as u32))
        .scale(&(rat_pow(&rat_int(2), q as u32) * &sign_p));
    let mut raise_chain: Vec<MPoly> = (0..q)
        .map(|j| {
            let nj = n.add(&MPoly::constant(&vars, rat_int(j)));
            nj.add(&one)
                .mul(&nj.add(&abp1))
                .scale(&rat_int(2))
        })
        .collect();
    raise_chain.extend((0..p).map(|_| om.neg()));

    // Lowering: q angular steps, then p radial steps quadratic in u.
    let lower_action = pochhammer(&n.neg().sub(&a), q as u32)
        .mul(&pochhammer(&n.neg().sub(&b), q as u32))
        .mul(&pochhammer(&u.sub(&n.scale(&k)).add(&one), p as u32))
        .mul(&pochhammer(
            &u.neg().sub(&n.add(&abp1).scale(&k)),
            p as u32,
        ))
        .mul(&om.pow(p as u32))
        .scale(&rat_pow(&rat_int(2), q as u32));
    let mut lower_chain: Vec<MPoly> = (0..q)
        .map(|j| {
            let nj = n.sub(&MPoly::constant(&vars, rat_int(j)));
            nj.add(&a).mul(&nj.add(&b)).scale(&rat_int(2))
        })
        .collect();
    lower_chain.extend((0..p).map(|j| {
        let m = u.sub(&n.scale(&k));
        let ma = u.add(&n.add(&abp1).scale(&k));
        m.add(&MPoly::constant(&vars, rat_int(j + 1)))
            .mul(&ma.sub(&MPoly::constant(&vars, rat_int(j))))
            .mul(&om)
            .neg()
    }));

    check_chain("deformed-oscillator raising multiplier", &raise_chain, &raise_action)?;
    check_chain("deformed-oscillator lowering multiplier", &lower_chain, &lower_action)?;

    let l2_map = n
        .scale(&rat_int(2))
        .add(&abp1)
        .pow(2)
        .scale(&rat(-p * p, q * q));
    let energy = u
        .scale(&rat_int(2))
        .add(&one)
        .add(&abp1.scale(&k))
        .mul(&om)
        .scale(&rat_int(-2));

    // Shared rewrite scaffolding: diagonal scalars are even in the centered
    // index, even in the centered u, and even in om.
    let n_center = abp1.scale(&rat(-1, 2));
    let u_center = abp1.scale(&k).add(&one).scale(&rat(-1, 2));
    let prep = vec![
        PrepStep::CenterEven {
            var: 0,
            center: n_center.clone(),
        },
        PrepStep::CenterEven {
            var: 1,
            center: u_center,
        },
        PrepStep::CenterEven {
            var: 4,
            center: MPoly::zero(&vars),
        },
    ];

    if !coupling_exchanged {
        let report_vars = Vars::new(&["H", "L2", "om", "a", "b"]);
        let rh = MPoly::var(&report_vars, 0);
        let rl2 = MPoly::var(&report_vars, 1);
        let rom = MPoly::var(&report_vars, 2);
        let ra = MPoly::var(&report_vars, 3);
        let rb = MPoly::var(&report_vars, 4);
        let report_images = vec![
            RFunc::from_poly(energy.clone()),
            RFunc::from_poly(l2_map.clone()),
            RFunc::from_poly(om.clone()),
            RFunc::from_poly(a.clone()),
            RFunc::from_poly(b.clone()),
        ];
        let rewrite = DiagonalRewrite {
            model_vars: vars.clone(),
            target_vars: report_vars.clone(),
            prep,
            images: vec![
                // (n + (a+b+1)/2)^2  =  (2n+a+b+1)^2 / 4  ->  -L2/(4k^2)
                Some(RFunc::from_poly(rl2.scale(&rat(-q * q, 4 * p * p)))),
                // (u + ((a+b+1)k+1)/2)^2  ->  H^2/(16 om^2)
                Some(RFunc::new(
                    rh.pow(2).scale(&rat(1, 16)),
                    vec![(rom.clone(), 2)],
                )),
                Some(RFunc::from_poly(ra)),
                Some(RFunc::from_poly(rb)),
                // om^2 stays itself.
                Some(RFunc::from_poly(rom.pow(2))),
            ],
        };
        Ok(SystemModel {
            id: SystemId::Ttw,
            p,
            q,
            index: 0,
            raise_shift: q,
            reflection_center: RFunc::from_poly(n_center),
            l2_symbol: "L2",
            l2_map,
            h_symbol: "H",
            h_map: energy,
            extra_diag: vec![],
            ladders: ladder_pair(&vars, 0, q, raise_action, lower_action),
            raise_chain,
            lower_chain,
            report_vars,
            report_images,
            rewrite,
            vars,
            notes: vec![],
        })
    } else {
        let report_vars = Vars::new(&["Z", "L2", "Hp", "a", "b"]);
        let rz = MPoly::var(&report_vars, 0);
        let rl2 = MPoly::var(&report_vars, 1);
        let rhp = MPoly::var(&report_vars, 2);
        let ra = MPoly::var(&report_vars, 3);
        let rb = MPoly::var(&report_vars, 4);
        let h_map = om.pow(2).scale(&rat(1, 4));
        let z_map = energy.scale(&rat(1, 4));
        let report_images = vec![
            RFunc::from_poly(z_map.clone()),
            RFunc::from_poly(l2_map.clone()),
            RFunc::from_poly(h_map.clone()),
            RFunc::from_poly(a.clone()),
            RFunc::from_poly(b.clone()),
        ];
        let rewrite = DiagonalRewrite {
            model_vars: vars.clone(),
            target_vars: report_vars.clone(),
            prep,
            images: vec![
                Some(RFunc::from_poly(rl2.scale(&rat(-q * q, 4 * p * p)))),
                // With 16 Z^2 in place of H^2 and 4 Hp in place of om^2:
                // H^2/(16 om^2) -> Z^2/(4 Hp).
                Some(RFunc::new(
                    rz.pow(2).scale(&rat(1, 4)),
                    vec![(rhp.clone(), 1)],
                )),
                Some(RFunc::from_poly(ra)),
                Some(RFunc::from_poly(rb)),
                // om^2 -> 4 Hp.
                Some(RFunc::from_poly(rhp.scale(&rat_int(4)))),
            ],
        };
        Ok(SystemModel {
            id: SystemId::KeplerDeformed,
            p,
            q,
            index: 0,
            raise_shift: q,
            reflection_center: RFunc::from_poly(n_center),
            l2_symbol: "L2",
            l2_map,
            h_symbol: "Hp",
            h_map,
            extra_diag: vec![("Z", z_map)],
            ladders: ladder_pair(&vars, 0, q, raise_action, lower_action),
            raise_chain,
            lower_chain,
            report_vars,
            report_images,
            rewrite,
            vars,
            notes: vec![
                "built from the deformed-oscillator ladders by exchanging coupling and \
                 energy: the Hamiltonian eigenvalue is om^2/4 and the former energy \
                 combination becomes the coupling eigenvalue Z"
                    .to_string(),
            ],
        })
    }
}

fn ladder_pair(
    vars: &Arc<Vars>,
    index: usize,
    shift: i64,
    raise_action: MPoly,
    lower_action: MPoly,
) -> LadderPair {
    LadderPair {
        raise: ShiftOp::term(vars, index, shift, RFunc::from_poly(raise_action.clone())),
        lower: ShiftOp::term(vars, index, -shift, RFunc::from_poly(lower_action.clone())),
        raise_action,
        lower_action,
    }
}

/// The symmetrized ladder combinations `(L3, L4)` of a model.
///
/// Families whose antisymmetric combination needs a centered-index divisor
/// apply it at the source label (composition with the diagonal reciprocal on
/// the right).
pub fn symmetrized_pair(model: &SystemModel) -> (ShiftOp, ShiftOp) {
    let r = &model.ladders.raise;
    let l = &model.ladders.lower;
    match model.id {
        SystemId::Sphere => {
            // divisor N + 1/2
            let div = MPoly::affine(&model.vars, model.index, rat_int(1), rat(1, 2));
            let recip = ShiftOp::diagonal(
                &model.vars,
                model.index,
                RFunc::new(MPoly::one(&model.vars), vec![(div, 1)]),
            );
            (r.add(l), r.sub(l).compose(&recip))
        }
        SystemId::ComplexEuclidean => {
            let div = MPoly::var(&model.vars, model.index);
            let recip = ShiftOp::diagonal(
                &model.vars,
                model.index,
                RFunc::new(MPoly::one(&model.vars), vec![(div, 1)]),
            );
            if (model.p + model.q) % 2 == 0 {
                (r.add(l), r.sub(l).compose(&recip))
            } else {
                (r.sub(l), r.add(l).compose(&recip))
            }
        }
        SystemId::CagedOscillator => (r.add(l), r.sub(l)),
        SystemId::Ttw | SystemId::KeplerDeformed => {
            // divisor 2n + a + b + 1
            let n = MPoly::var(&model.vars, 0);
            let div = n
                .scale(&rat_int(2))
                .add(&MPoly::var(&model.vars, 2))
                .add(&MPoly::var(&model.vars, 3))
                .add(&MPoly::one(&model.vars));
            let recip = ShiftOp::diagonal(
                &model.vars,
                model.index,
                RFunc::new(MPoly::one(&model.vars), vec![(div, 1)]),
            );
            (r.add(l), r.sub(l).compose(&recip))
        }
    }
}

/// Gauge-transformed realization of the deformed-oscillator ladders over the
/// centered index `s = n + (a+b+1)/2`: the raising coefficient is a single
/// polynomial `rho(s)` and the lowering coefficient is exactly `rho(−s)`, so
/// index reflection about 0 exchanges the ladders.
#[derive(Debug, Clone)]
pub struct GaugedTtw {
    /// Symbols `(s, u, a, b, om)`.
    pub vars: Arc<Vars>,
    /// Index position (0).
    pub index: usize,
    pub p: i64,
    pub q: i64,
    /// Raising coefficient `rho(s)`.
    pub rho: MPoly,
    /// Raising operator `(+q, rho(s))`.
    pub raise: ShiftOp,
    /// Lowering operator `(−q, rho(−s))`.
    pub lower: ShiftOp,
    /// Diagonal symmetry eigenvalue `−4k²s²`.
    pub l2_map: MPoly,
}

/// Builds the gauged realization and certifies it against the ungauged one:
/// both up-then-down and down-then-up multiplier products must agree with
/// the ungauged products under `n = s − (a+b+1)/2` (those products are gauge
/// invariants).
pub fn ttw_gauged(p: i64, q: i64) -> Result<GaugedTtw, SysError> {
    check_pq(p, q)?;
    let ungauged = build_model(SystemId::Ttw, p, q)?;
    let vars = Vars::new(&["s", "u", "a", "b", "om"]);
    let s = MPoly::var(&vars, 0);
    let u = MPoly::var(&vars, 1);
    let a = MPoly::var(&vars, 2);
    let b = MPoly::var(&vars, 3);
    let om = MPoly::var(&vars, 4);
    let one = MPoly::one(&vars);
    let k = rat(p, q);

    let half = |x: &MPoly| x.scale(&rat(1, 2));
    let sab = s.add(&half(&a.sub(&b).add(&one))); // s + (a-b+1)/2
    let sabp = s.add(&half(&a.add(&b).add(&one))); // s + (a+b+1)/2
    let sign_q = if q % 2 == 0 { rat_int(1) } else { rat_int(-1) };
    let rho = pochhammer(&sab, q as u32)
        .mul(&pochhammer(&sabp, q as u32))
        .mul(&pochhammer(&u.add(&sabp.scale(&k)).add(&one), p as u32))
        .mul(&om.pow(p as u32))
        .scale(&(rat_pow(&rat_int(2), q as u32) * &sign_q));
    let zero = rat_int(0);
    let sigma = rho.reflect_var(0, &zero);

    // Gauge-invariant product certification.
    let up_down_gauged = rho.mul(&sigma.shift_var(0, &rat_int(q)));
    let down_up_gauged = sigma.mul(&rho.shift_var(0, &rat_int(-q)));
    let to_s = |poly: &MPoly| -> MPoly {
        let repl = s.sub(&half(&a.add(&b).add(&one))); // n = s - (a+b+1)/2
        poly.rename_table(&vars).substitute(0, &repl)
    };
    let up_down_ungauged = to_s(
        &ungauged
            .ladders
            .raise_action
            .mul(&ungauged.ladders.lower_action.shift_var(0, &rat_int(q))),
    );
    let down_up_ungauged = to_s(
        &ungauged
            .ladders
            .lower_action
            .mul(&ungauged.ladders.raise_action.shift_var(0, &rat_int(-q))),
    );
    if up_down_gauged != up_down_ungauged {
        return Err(SysError::ConstructionMismatch {
            which: "gauged up-then-down product".to_string(),
            chain: up_down_gauged.to_string(),
            closed: up_down_ungauged.to_string(),
        });
    }
    if down_up_gauged != down_up_ungauged {
        return Err(SysError::ConstructionMismatch {
            which: "gauged down-then-up product".to_string(),
            chain: down_up_gauged.to_string(),
            closed: down_up_ungauged.to_string(),
        });
    }

    let l2_map = s.pow(2).scale(&rat(-4 * p * p, q * q));
    let raise = ShiftOp::term(&vars, 0, q, RFunc::from_poly(rho.clone()));
    let lower = ShiftOp::term(&vars, 0, -q, RFunc::from_poly(sigma));
    Ok(GaugedTtw {
        vars,
        index: 0,
        p,
        q,
        rho,
        raise,
        lower,
        l2_map,
    })
}

/// One first-order factor of a plane-wave ladder: `dsign·∂ + coeff/x` in the
/// radial or angular variable.
#[derive(Debug, Clone)]
struct WaveFactor {
    dsign: i64,
    coeff: MPoly,
}

/// Certifies, factor by factor, that reflecting the index through 0 turns
/// each lowering factor of the plane-wave ladder into −1 times the matching
/// raising factor — hence the lowering chain at `−Om` is `(−1)^(p+q)` times
/// the raising chain at `Om`.
pub fn ce_reflection_pairing(p: i64, q: i64) -> Result<(), SysError> {
    check_pq(p, q)?;
    let vars = Vars::new(&["Om", "be"]);
    let om = MPoly::var(&vars, 0);
    let mk = |dsign: i64, coeff: MPoly| WaveFactor { dsign, coeff };
    // Raising factors in application order: radial coefficients Om + j, then
    // angular coefficients (q/p)·Om + j.
    let mut raise: Vec<WaveFactor> = (0..p)
        .map(|j| mk(-1, om.add(&MPoly::constant(&vars, rat_int(j)))))
        .collect();
    raise.extend(
        (0..q).map(|j| mk(-1, om.scale(&rat(q, p)).add(&MPoly::constant(&vars, rat_int(j))))),
    );
    let mut lower: Vec<WaveFactor> = (0..p)
        .map(|j| mk(1, om.sub(&MPoly::constant(&vars, rat_int(j)))))
        .collect();
    lower.extend(
        (0..q).map(|j| mk(1, om.scale(&rat(q, p)).sub(&MPoly::constant(&vars, rat_int(j))))),
    );
    let zero = rat_int(0);
    for (j, (lo, ra)) in lower.iter().zip(raise.iter()).enumerate() {
        let reflected = lo.coeff.reflect_var(0, &zero);
        if lo.dsign != -ra.dsign || reflected != ra.coeff.neg() {
            return Err(SysError::ConstructionMismatch {
                which: format!("plane-wave factor pairing at step {j}"),
                chain: reflected.to_string(),
                closed: ra.coeff.neg().to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PQ_SET: [(i64, i64); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

    #[test]
    fn all_models_build_with_matching_chain_products() {
        for id in SystemId::all() {
            for (p, q) in PQ_SET {
                let m = build_model(id, p, q).unwrap();
                assert_eq!(m.p, p);
                assert_eq!(m.raise_shift, if id == SystemId::ComplexEuclidean { p } else { q });
            }
        }
    }

    #[test]
    fn coprimality_is_enforced() {
        assert!(matches!(
            build_model(SystemId::Sphere, 2, 2),
            Err(SysError::InvalidPq { .. })
        ));
        assert!(matches!(
            build_model(SystemId::Ttw, 0, 1),
            Err(SysError::InvalidPq { .. })
        ));
    }

    #[test]
    fn sphere_multipliers_take_frozen_values() {
        // p = q = 1: raising multiplier (N - a + 1), lowering multiplier
        // (-N-a)(-n-(N+1/2))(n-(N+1/2)+1); both carry sign (+1) since p+q is
        // even.
        let m = build_model(SystemId::Sphere, 1, 1).unwrap();
        assert_eq!(m.ladders.raise_action.to_string(), "N - a + 1");
        let vals = [rat(1, 4), rat(1, 5), rat(1, 7)]; // (N, n, a)
        assert_eq!(
            m.ladders.lower_action.eval(&vals),
            rat(11, 28) * rat(-19, 20) * rat(9, 20) * rat_int(-1) // (-N-a) = -11/28 times ...
        );
        // Recompute the frozen value by hand: (-1/4-1/7)(-1/5-3/4)(1/5-3/4+1)
        assert_eq!(
            m.ladders.lower_action.eval(&vals),
            rat(-11, 28) * rat(-19, 20) * rat(9, 20)
        );
    }

    #[test]
    fn sphere_product_reflection_exchanges_the_two_orders() {
        for (p, q) in PQ_SET {
            let m = build_model(SystemId::Sphere, p, q).unwrap();
            let down_up = m
                .ladders
                .raise_action
                .shift_var(0, &rat_int(-q))
                .mul(&m.ladders.lower_action);
            let up_down = m
                .ladders
                .lower_action
                .shift_var(0, &rat_int(q))
                .mul(&m.ladders.raise_action);
            assert_eq!(down_up.reflect_var(0, &rat(-1, 2)), up_down);
        }
    }

    #[test]
    fn caged_products_are_exchanged_by_the_joint_involution() {
        for (p, q) in PQ_SET {
            let m = build_model(SystemId::CagedOscillator, p, q).unwrap();
            let down_up = m
                .ladders
                .raise_action
                .shift_var(0, &rat_int(-q))
                .mul(&m.ladders.lower_action);
            let up_down = m
                .ladders
                .lower_action
                .shift_var(0, &rat_int(q))
                .mul(&m.ladders.raise_action);
            // (t, u) -> (-t - a1 - 1, -u - a2 - 1 - k(a1+1))
            let vars = &m.vars;
            let t = MPoly::var(vars, 0);
            let u = MPoly::var(vars, 1);
            let a1 = MPoly::var(vars, 3);
            let a2 = MPoly::var(vars, 4);
            let one = MPoly::one(vars);
            let t_img = t.neg().sub(&a1).sub(&one);
            let u_img = u
                .neg()
                .sub(&a2)
                .sub(&one)
                .sub(&a1.add(&one).scale(&rat(p, q)));
            let reflected = down_up.substitute(0, &t_img).substitute(1, &u_img);
            assert_eq!(reflected, up_down);
        }
    }

    #[test]
    fn caged_multiplier_takes_frozen_value() {
        // p = q = 1 at (t, u, mu, a1, a2) = (2, 7/2, 1/3, 1/5, 2/7):
        // raise = (-4 mu)(4 mu)(t+1)(-u+t-a2) = -16/9 * 3 * (-25/14) = 200/21.
        let m = build_model(SystemId::CagedOscillator, 1, 1).unwrap();
        let vals = [rat_int(2), rat(7, 2), rat(1, 3), rat(1, 5), rat(2, 7)];
        assert_eq!(m.ladders.raise_action.eval(&vals), rat(200, 21));
    }

    #[test]
    fn deformed_oscillator_multiplier_takes_frozen_value() {
        // p = q = 1 at (n, u, a, b, om) = (1/2, 0, 1/3, 1/5, 2):
        // raise = 2(-1) om (n+1)(n+a+b+1) = -4 * 3/2 * 61/30 = -61/5.
        let m = build_model(SystemId::Ttw, 1, 1).unwrap();
        let vals = [rat(1, 2), rat_int(0), rat(1, 3), rat(1, 5), rat_int(2)];
        assert_eq!(m.ladders.raise_action.eval(&vals), rat(-61, 5));
    }

    #[test]
    fn gauged_realization_reflects_and_reproduces_products() {
        for (p, q) in PQ_SET {
            let g = ttw_gauged(p, q).unwrap();
            // Reflection through s = 0 exchanges raising and lowering.
            assert!(g.raise.reflect(&rat_int(0)).eq_op(&g.lower));
        }
    }

    #[test]
    fn plane_wave_factor_pairing_holds_for_all_pq() {
        for (p, q) in PQ_SET {
            ce_reflection_pairing(p, q).unwrap();
        }
    }

    #[test]
    fn antisymmetric_combination_divides_at_the_source_label() {
        let m = build_model(SystemId::Sphere, 1, 1).unwrap();
        let (_, l4) = symmetrized_pair(&m);
        let div = MPoly::affine(&m.vars, 0, rat_int(1), rat(1, 2));
        let expect = RFunc::new(m.ladders.raise_action.clone(), vec![(div, 1)]);
        assert!(l4.coeff(1).eq_value(&expect));
    }

    #[test]
    fn system_ids_round_trip_through_strings() {
        for id in SystemId::all() {
            let back: SystemId = id.as_str().parse().unwrap();
            assert_eq!(back, id);
        }
        assert_eq!("kepler".parse::<SystemId>().unwrap(), SystemId::KeplerDeformed);
        assert_eq!("caged".parse::<SystemId>().unwrap(), SystemId::CagedOscillator);
        assert!("nosuch".parse::<SystemId>().is_err());
    }

    #[test]
    fn kepler_shares_ladders_with_the_oscillator_family() {
        let t = build_model(SystemId::Ttw, 2, 3).unwrap();
        let k = build_model(SystemId::KeplerDeformed, 2, 3).unwrap();
        assert_eq!(t.ladders.raise_action, k.ladders.raise_action);
        assert_eq!(t.ladders.lower_action, k.ladders.lower_action);
        assert_eq!(t.l2_map, k.l2_map);
        // The Hamiltonian and coupling eigenvalues trade places.
        assert_eq!(k.h_map, MPoly::var_pow(&k.vars, 4, 2).scale(&rat(1, 4)));
        assert_eq!(k.extra_diag[0].1, t.h_map.scale(&rat(1, 4)));
    }
}

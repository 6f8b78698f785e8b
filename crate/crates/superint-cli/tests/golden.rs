//! Golden structure reports, one file per (system, p, q) cell.
//!
//! These pin the exact serialized output — every closure coefficient,
//! equation display, and verification verdict — so any change to the engine's
//! emitted algebra shows up as a diff against a committed file.  To re-bless
//! after an intentional change:
//!
//! ```text
//! GOLDEN_BLESS=1 cargo test -p superint-cli --test golden
//! ```

use std::path::{Path, PathBuf};

use superint::structure::{stackel_transfer, structure_report, verify_structure};
use superint::systems::SystemId;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn render(system: SystemId, p: i64, q: i64) -> String {
    let v = verify_structure(system, p, q).expect("verification builds");
    let stackel = match system {
        SystemId::Ttw => {
            let kepler = verify_structure(SystemId::KeplerDeformed, p, q)
                .expect("exchange partner builds");
            Some(stackel_transfer(&v, &kepler).expect("exchange map builds"))
        }
        _ => None,
    };
    let mut json = serde_json::to_string_pretty(&structure_report(&v, stackel.as_ref()))
        .expect("report serializes");
    json.push('\n');
    json
}

fn check_golden(name: &str, system: SystemId, p: i64, q: i64) {
    let actual = render(system, p, q);
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("GOLDEN_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, &actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!(
            "golden file {} unreadable ({e}); bless with GOLDEN_BLESS=1",
            path.display()
        )
    });
    if actual != expected {
        let mismatch = actual
            .lines()
            .zip(expected.lines())
            .position(|(a, e)| a != e)
            .map(|i| i + 1)
            .unwrap_or_else(|| actual.lines().count().min(expected.lines().count()) + 1);
        panic!(
            "{name}: report drifted from {} (first difference at line {mismatch}); \
             if the change is intentional, re-bless with GOLDEN_BLESS=1",
            path.display()
        );
    }
}

#[test]
fn golden_sphere_order_one() {
    check_golden("sphere_p1_q1", SystemId::Sphere, 1, 1);
}

#[test]
fn golden_complex_euclidean_order_two() {
    check_golden("complex_euclidean_p2_q1", SystemId::ComplexEuclidean, 2, 1);
}

#[test]
fn golden_caged_oscillator_order_one() {
    check_golden("caged_p1_q1", SystemId::CagedOscillator, 1, 1);
}

#[test]
fn golden_deformed_oscillator_order_one() {
    check_golden("ttw_p1_q1", SystemId::Ttw, 1, 1);
}

#[test]
fn golden_deformed_oscillator_half_order() {
    check_golden("ttw_p1_q2", SystemId::Ttw, 1, 2);
}

#[test]
fn golden_deformed_coulomb_order_one() {
    check_golden("kepler_p1_q1", SystemId::KeplerDeformed, 1, 1);
}

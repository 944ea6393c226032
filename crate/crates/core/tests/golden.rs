//! Byte-exact comparison of generated tables with the checked-in goldens.
//! Run with `UPDATE_GOLDEN=1` to rewrite them.

use std::fs;
use std::path::PathBuf;

use hhdim::neg_curves::{generate_classification, ClassificationBounds};
use hhdim::tables::{normalize_text, read_csv, section7_exceptions, section7_to_csv, theorem2_table, to_csv};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(normalize_text(actual), normalize_text(&expected), "{name} differs from its golden");
}

#[test]
fn published_table_matches_golden() {
    golden("theorem2_e4.csv", &to_csv(&theorem2_table(4)).unwrap());
}

#[test]
fn generated_classification_matches_golden() {
    let rows = generate_classification(4, ClassificationBounds::default()).unwrap();
    golden("classification_e4.csv", &to_csv(&rows).unwrap());
}

#[test]
fn exception_list_matches_golden() {
    golden("section7.csv", &section7_to_csv(&section7_exceptions()).unwrap());
}

#[test]
fn golden_round_trips() {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        return;
    }
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/theorem2_e4.csv");
    let rows = read_csv(fs::File::open(path).unwrap()).unwrap();
    assert_eq!(rows, theorem2_table(4));
}

use kdvlab::catalog::{get_equation, EquationSpec};
use kdvlab::error::KdvError;

const GOLDEN: &str = include_str!("golden/kdv3_terms.json");

#[test]
fn kdv3_table_matches_golden_file() {
    let golden: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    assert_eq!(get_equation(3).unwrap().to_json(), golden);
}

#[test]
fn lower_orders_are_prefixes_of_the_golden_table() {
    let golden: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    let all = golden["terms"].as_array().unwrap();
    for (order, count) in [(1u32, 4usize), (2, 8), (3, 16)] {
        let eq = get_equation(order).unwrap().to_json();
        let terms = eq["terms"].as_array().unwrap();
        assert_eq!(terms.len(), count);
        assert_eq!(terms[..], all[..count]);
    }
}

#[test]
fn golden_table_parses_back() {
    let golden: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    assert_eq!(
        EquationSpec::from_json(&golden).unwrap(),
        get_equation(3).unwrap()
    );
}

#[test]
fn order_four_is_rejected() {
    assert!(matches!(get_equation(4), Err(KdvError::Usage(_))));
    assert!(matches!(get_equation(0), Err(KdvError::Usage(_))));
}

#[test]
fn highest_derivatives() {
    let d: Vec<u8> = (1..=3)
        .map(|o| get_equation(o).unwrap().max_derivative())
        .collect();
    assert_eq!(d, vec![3, 5, 7]);
}

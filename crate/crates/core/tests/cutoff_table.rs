//! Circular cutoffs against the shipped reference table of duct eigenmodes.

use impedukt_core::wavenumbers::{centerline_cutoff, circular_cutoffs};
use impedukt_core::C0;

const TABLE: &str = include_str!("../data/table1_cutoffs_khz.csv");

struct Row {
    case: String,
    circ: [f64; 3],
    ell: [f64; 4],
}

fn rows() -> Vec<Row> {
    TABLE
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            let num = |i: usize| c[i].parse::<f64>().unwrap();
            Row {
                case: c[0].to_string(),
                circ: [num(1), num(2), num(3)],
                ell: [num(4), num(5), num(6), num(7)],
            }
        })
        .collect()
}

#[test]
fn table_parses() {
    let rows = rows();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].case, "Zr_a");
}

#[test]
fn circular_ratios_match_table() {
    let c = circular_cutoffs(0.01, C0).unwrap();
    let (r2, r3) = (c[1].f_hz / c[0].f_hz, c[2].f_hz / c[0].f_hz);
    for row in rows() {
        let (t2, t3) = (row.circ[1] / row.circ[0], row.circ[2] / row.circ[0]);
        // The table carries 3-4 significant digits.
        assert!((r2 - t2).abs() / t2 < 0.01, "{}: {r2} vs {t2}", row.case);
        assert!((r3 - t3).abs() / t3 < 0.01, "{}: {r3} vs {t3}", row.case);
    }
}

#[test]
fn radius_from_first_cutoff_reproduces_centerline_limit() {
    for row in rows() {
        let a = 1.841_183_781 * C0 / (2.0 * std::f64::consts::PI * row.circ[0] * 1e3);
        let fc = centerline_cutoff(a, C0).unwrap() / 1e3;
        assert!(
            (fc - row.circ[2]).abs() / row.circ[2] < 0.01,
            "{}: {fc} vs {}",
            row.case,
            row.circ[2]
        );
    }
}

#[test]
fn elliptical_ducts_are_more_restrictive() {
    for row in rows() {
        assert!(row.ell[0] < row.circ[0], "{}", row.case);
        assert!(
            row.ell.windows(2).take(2).all(|w| w[0] < w[1]),
            "{}",
            row.case
        );
    }
}

#![no_main]

use libfuzzer_sys::fuzz_target;
use mfc0::io::{parse_matrix_csv, write_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(m) = parse_matrix_csv(data) else { return };
    if !m.iter().all(|v| v.is_finite()) {
        return;
    }
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &m, "fuzz").unwrap();
    let back = parse_matrix_csv(&buf).unwrap();
    assert_eq!(m.shape(), back.shape());
    for (a, b) in m.iter().zip(back.iter()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE));
    }
});

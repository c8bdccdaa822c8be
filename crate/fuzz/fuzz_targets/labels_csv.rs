#![no_main]

use libfuzzer_sys::fuzz_target;
use mfc0::io::{parse_labels, write_labels};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(labels) = parse_labels(text) else { return };
    let mut buf = Vec::new();
    write_labels(&mut buf, &labels).unwrap();
    assert_eq!(parse_labels(std::str::from_utf8(&buf).unwrap()).unwrap(), labels);
});

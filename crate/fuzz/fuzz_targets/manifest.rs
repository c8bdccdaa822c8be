#![no_main]

use libfuzzer_sys::fuzz_target;
use mfc0::io::Manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(manifest) = Manifest::parse(text) else { return };
    assert_eq!(Manifest::parse(&manifest.to_text()).unwrap(), manifest);
});

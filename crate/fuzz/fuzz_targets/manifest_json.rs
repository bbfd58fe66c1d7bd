#![no_main]

use invrep::report::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = RunManifest::from_json(text) {
        let again = RunManifest::from_json(&m.to_json().expect("serializes")).expect("round trip");
        assert_eq!(again, m);
    }
});

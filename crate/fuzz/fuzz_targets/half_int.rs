#![no_main]

use invrep::HalfInt;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = text.parse::<HalfInt>() {
        let again: HalfInt = h.to_string().parse().expect("display output parses");
        assert_eq!(again, h);
    }
});

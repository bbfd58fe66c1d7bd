#![no_main]

use invrep::Partition;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Partition>() {
        assert!(p.parts().windows(2).all(|w| w[0] >= w[1]));
        let again: Partition = p.to_string().parse().expect("display output parses");
        assert_eq!(again, p);
    }
});

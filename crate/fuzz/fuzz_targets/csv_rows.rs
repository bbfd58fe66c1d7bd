#![no_main]

use invrep::report::{read_rows, write_rows};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_rows(data) {
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).expect("writes");
        let again = read_rows(buf.as_slice()).expect("own output parses");
        assert_eq!(again.len(), rows.len());
    }
});

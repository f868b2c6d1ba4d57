#![no_main]

use cornershuffle::Position;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<Position>() {
        assert_eq!(
            p.to_string()
                .parse::<Position>()
                .expect("display re-parses"),
            p
        );
        assert!(p.row() >= 1 && p.col() >= 1);
    }
});

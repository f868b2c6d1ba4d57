#![no_main]

use cornershuffle::perm::parse_moves;
use cornershuffle::Perm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(moves) = parse_moves(text) {
        let rendered: Vec<String> = moves.iter().map(ToString::to_string).collect();
        assert_eq!(
            parse_moves(&rendered.join(" ")).expect("display re-parses"),
            moves
        );
        let n = moves.iter().map(|m| m.i.max(m.j)).max().unwrap_or(1);
        if n <= 32 {
            let p = Perm::from_moves(n, &moves).expect("moves fit the array");
            let back = Perm::from_moves(n, moves.iter().rev()).expect("moves fit the array");
            assert!(p.compose(&back).expect("same side").is_identity());
        }
    }
});

#![no_main]

use cornershuffle::decomp::decompose_three_cycle;
use cornershuffle::perm::parse_positions;
use cornershuffle::Perm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cells) = parse_positions(text) else {
        return;
    };
    if cells.len() != 3 {
        return;
    }
    let side = cells
        .iter()
        .map(|p| p.row().max(p.col()))
        .max()
        .unwrap_or(1)
        .max(5);
    if side > 16 {
        return;
    }
    let Ok(target) = Perm::from_cycle(side, &cells) else {
        return;
    };
    assert!(target.is_three_cycle());
    let d = decompose_three_cycle(side, &target).expect("every three-cycle decomposes for n >= 5");
    assert_eq!(
        Perm::from_moves(side, d.word.moves()).expect("moves fit"),
        target
    );
});

#![no_main]

use cornershuffle::grid::TGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = text.parse::<TGrid>() {
        let times = grid.times();
        assert_eq!(times.len(), grid.points);
        assert!(times.iter().all(|t| t.is_finite() && *t >= 0.0));
        let again: TGrid = grid.to_string().parse().expect("display re-parses");
        assert_eq!(again.points, grid.points);
    }
});

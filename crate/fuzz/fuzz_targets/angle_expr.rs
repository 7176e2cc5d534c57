#![no_main]
use libfuzzer_sys::fuzz_target;
use pointer_amp_cli::angle::parse_angle;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = parse_angle(s) {
            assert!(x.is_finite());
        }
    }
});

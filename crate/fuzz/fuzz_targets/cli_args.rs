#![no_main]
use libfuzzer_sys::fuzz_target;
use pointer_amp_cli::parse_args;

// NUL-separated argument list, parsed and resolved but never run. Config
// files are skipped so the target never reads from the filesystem.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.contains("--config") {
        return;
    }
    let args = std::iter::once("pointer-amp").chain(s.split('\0'));
    let _ = parse_args(args);
});

#![no_main]
use libfuzzer_sys::fuzz_target;
use pointer_amp_cli::{RunConfig, Scenario, Settings};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(settings) = Settings::parse(text) else { return };
    for scenario in Scenario::ALL {
        if let Ok(cfg) = RunConfig::resolve(Some(scenario), &settings) {
            // resolved configs must survive a trip through the sidecar text
            let again = Settings::parse(&cfg.to_settings_text()).expect("sidecar text parses");
            let mut back = RunConfig::resolve(None, &again).expect("sidecar text resolves");
            back.out = cfg.out.clone();
            assert_eq!(back, cfg);
        }
    }
});

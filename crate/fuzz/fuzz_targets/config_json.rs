#![no_main]

use libfuzzer_sys::fuzz_target;
use quizsim_cli::{parse_config_file, Command, RunConfig, SharedArgs};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = parse_config_file(text) else {
        return;
    };
    // resolution validates instead of panicking, whatever the values
    for command in [
        Command::Table,
        Command::Sweep,
        Command::Noise,
        Command::Measure,
    ] {
        if let Ok(cfg) = RunConfig::resolve(command, &SharedArgs::default(), Some(&file), None) {
            assert!(cfg.n >= 2 && cfg.trials >= 1 && !cfg.eps.is_empty());
        }
    }
});

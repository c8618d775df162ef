#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(pairs) = gpl::io::parse_theta_pairs(text) else {
        return;
    };
    let mut seen = std::collections::HashSet::new();
    for (label, _value) in &pairs {
        assert!(!label.is_empty());
        assert!(
            seen.insert(label.clone()),
            "duplicate label '{label}' accepted"
        );
    }
});

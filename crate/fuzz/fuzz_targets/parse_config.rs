#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(entries) = gpl::io::parse_config(text) else {
        return;
    };
    for (key, value) in &entries {
        assert!(!key.is_empty());
        assert!(!key.contains('='), "key '{key}' swallowed a separator");
        assert!(!value.starts_with(char::is_whitespace) && !value.ends_with(char::is_whitespace));
    }
});

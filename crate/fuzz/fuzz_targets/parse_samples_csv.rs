#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((samples, direction)) = gpl::io::read_samples_csv(text) else {
        return;
    };
    // a parsed sample set must round-trip through the writer
    let rendered = gpl::io::write_samples_csv(&samples, direction).unwrap();
    let (again, dir_again) = gpl::io::read_samples_csv(&rendered).unwrap();
    assert_eq!(dir_again, direction);
    assert_eq!(again.labels(), samples.labels());
    assert_eq!(again.total_draws(), samples.total_draws());
});

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(dataset) = gpl::data::parse_rankings_str(text) else {
        return;
    };
    // anything that parses must survive the numerical entry points
    let k = dataset.num_entities();
    let theta = vec![0.5; k];
    if k > 0 {
        let ll = gpl::model::log_likelihood(&dataset, &theta).unwrap();
        assert!(ll.is_finite() && ll <= 0.0);
    }
    if dataset.rankings.iter().all(|r| r.is_complete()) {
        let reversed = gpl::data::reverse_dataset(&dataset).unwrap();
        assert_eq!(reversed.rankings.len(), dataset.rankings.len());
    }
});

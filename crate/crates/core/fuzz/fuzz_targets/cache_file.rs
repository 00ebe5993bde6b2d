#![no_main]

use libfuzzer_sys::fuzz_target;
use zsig_core::cache::Cache;

fuzz_target!(|data: &[u8]| {
    // arbitrary bytes: loading may reject lines but must never panic, and
    // every orbit it keeps has passed the recurrence check
    if let Ok((cache, stats)) = Cache::from_reader(data) {
        assert_eq!(cache.len(), stats.orbits);
        assert!(stats.malformed <= stats.lines);
    }
});

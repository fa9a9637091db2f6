use std::time::Instant;

use dsd::rational::format_rational;
use dsd::verify::{generate_instance, InstanceSpec};

fn main() {
    for seed in [41u64, 42, 43] {
        let spec = InstanceSpec {
            seed,
            site_count: 3,
            points_per_site: vec![3, 3, 3],
            denominator_bound: 8,
        };
        let instance = generate_instance(&spec);
        let t = Instant::now();
        let d = dsd::metrics::dobrushin_distance(&instance.mu, &instance.nu).unwrap();
        let dob_time = t.elapsed();
        let t = Instant::now();
        let s = dsd::metrics::steif_distance(&instance.mu, &instance.nu).unwrap();
        let steif_time = t.elapsed();
        println!(
            "seed {seed}: dobrushin = {} ({dob_time:?}), steif = {} ({steif_time:?}), equal = {}",
            format_rational(&d.value),
            format_rational(&s.value),
            d.value == s.value
        );
    }
}

#![allow(dead_code)]

use ragap::instance::{generate_random, SizeProfile};
use ragap::{Instance, Rational};

pub fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn i2() -> Instance {
    Instance::from_json(
        r#"{"machines":2,"jobs":[{"p":"1","allowed":[0,1]},{"p":"1/2","allowed":[0]},{"p":"1/2","allowed":[1]}]}"#,
    )
    .unwrap()
}

pub struct Entry {
    pub name: String,
    pub seed: u64,
    pub inst: Instance,
}

/// 2–5 machines, 4–10 jobs, sizes in sixths, densities 1/3, 2/3 and 1, three
/// seeds per combination: 252 instances.
pub fn corpus() -> Vec<Entry> {
    let mut out = Vec::new();
    let profile = SizeProfile::default();
    let mut seed = 1000;
    for machines in 2..=5 {
        for jobs in 4..=10 {
            for density in ["1/3", "2/3", "1"] {
                for _ in 0..3 {
                    seed += 1;
                    let inst = generate_random(machines, jobs, &profile, &r(density), seed).unwrap();
                    out.push(Entry {
                        name: format!("m{machines}-n{jobs}-d{}-s{seed}", density.replace('/', "_")),
                        seed,
                        inst,
                    });
                }
            }
        }
    }
    out
}

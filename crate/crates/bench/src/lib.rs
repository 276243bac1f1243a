//! Workloads shared by the benchmarks.

use aspx_core::builtin::{encode_stable_marriage, generate_sm_instance, PreferenceTable};
use aspx_core::{parse_program, GroundProgram};

/// `pigeons` pigeons in `holes` holes as a choice program; incoherent when pigeons > holes.
pub fn pigeonhole(pigeons: usize, holes: usize) -> GroundProgram {
    let mut src = String::new();
    for p in 1..=pigeons {
        for h in 1..=holes {
            let others: Vec<String> = (1..=holes).filter(|&o| o != h).map(|o| format!("not p{p}h{o}")).collect();
            let body = if others.is_empty() { String::new() } else { format!(" :- {}", others.join(", ")) };
            src.push_str(&format!("p{p}h{h}{body}.\n"));
        }
    }
    for h in 1..=holes {
        for p in 1..=pigeons {
            for q in p + 1..=pigeons {
                src.push_str(&format!(":- p{p}h{h}, p{q}h{h}.\n"));
            }
        }
    }
    parse_program(&src).expect("generated program parses")
}

/// A stable marriage instance with its base encoding and the ground encoding with stability.
pub fn marriage(n: usize, k: u32, seed: u64) -> (PreferenceTable, GroundProgram, GroundProgram) {
    let table = generate_sm_instance(n, k, seed);
    let base = encode_stable_marriage(&table, false);
    let full = encode_stable_marriage(&table, true);
    (table, base, full)
}

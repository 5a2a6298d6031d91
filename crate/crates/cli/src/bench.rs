//! Benchmark families. Random draws use ChaCha8 seeded with the given seed,
//! one `gen_range` call per entry in line order, so output is reproducible.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Random3,
    Random15,
    Repeat,
    Partition,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random-3" => Ok(Family::Random3),
            "random-15" => Ok(Family::Random15),
            "repeat" => Ok(Family::Repeat),
            "partition" => Ok(Family::Partition),
            _ => Err(format!("unknown family '{s}' (random-3, random-15, repeat, partition)")),
        }
    }
}

/// `count` instances with `dim` entries each. The first entry is 1 except
/// for `partition`, which is `1 2 .. dim`.
pub fn generate(family: Family, dim: usize, seed: u64, count: usize) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match family {
            Family::Partition => (1..=dim as u64).collect(),
            Family::Random3 => ones_then(dim, |_| rng.gen_range(100..=999)),
            Family::Random15 => ones_then(dim, |_| rng.gen_range(100_000_000_000_000..=999_999_999_999_999)),
            Family::Repeat => {
                let v = rng.gen_range(100..=999);
                ones_then(dim, |_| v)
            }
        })
        .collect()
}

fn ones_then(dim: usize, mut draw: impl FnMut(usize) -> u64) -> Vec<u64> {
    (0..dim).map(|i| if i == 0 { 1 } else { draw(i) }).collect()
}

pub fn to_file(rows: &[Vec<u64>]) -> String {
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().map(u64::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

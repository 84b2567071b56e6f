//! Shot-noise simulation of the counting experiment.
//!
//! Every one of the 32 measurement blocks `(x0 x1, y, z, b)` runs for the
//! same duration: the source emits `Poisson(N)` photons into the block and
//! only those leaving Bob's port `b` are registered, split by Charlie's
//! outcome `c`. Registered counts are therefore independent
//! `Poisson(N · p(b, c | x, y, z))` variables.
//!
//! Random streams: block `k` (the index of `(x0, x1, y, z, b)` packed
//! most-significant-bit first) draws from a ChaCha8 generator seeded with
//! the master seed and switched to stream `k`. Output is independent of
//! scheduling.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{exact_distribution, Event, JointDistribution, ProtocolSpec};

/// Number of measurement blocks `(x0 x1, y, z, b)`.
pub const BLOCKS: usize = 32;

/// Registered counts for every cell `(x0, x1, y, z, b, c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    counts: [u64; Event::COUNT],
    events_per_setting: u64,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x0: u8,
    x1: u8,
    y: u8,
    z: u8,
    b: u8,
    c: u8,
    count: u64,
}

impl CountTable {
    pub fn new(counts: [u64; Event::COUNT], events_per_setting: u64) -> Self {
        Self {
            counts,
            events_per_setting,
        }
    }

    pub fn get(&self, e: Event) -> u64 {
        self.counts[e.index()]
    }

    pub fn counts(&self) -> &[u64; Event::COUNT] {
        &self.counts
    }

    /// Mean number of emitted events per block the table was sampled with.
    pub fn events_per_setting(&self) -> u64 {
        self.events_per_setting
    }

    /// Registered events of setting `(x, y, z)`, summed over both of Bob's ports.
    pub fn setting_total(&self, x0: usize, x1: usize, y: usize, z: usize) -> u64 {
        let base = Event::new(x0, x1, y, z, 0, 0).index();
        self.counts[base..base + 4].iter().sum()
    }

    /// Relative frequencies `k(b, c | x, y, z) / Σ_{b,c} k`. Fails on a setting with no events.
    pub fn frequencies(&self) -> Result<JointDistribution<f64>> {
        for setting in 0..16 {
            let e = Event::from_index(setting * 4);
            if self.setting_total(e.x0, e.x1, e.y, e.z) == 0 {
                return Err(Error::EmptySetting(format!(
                    "x=({},{}) y={} z={}",
                    e.x0, e.x1, e.y, e.z
                )));
            }
        }
        Ok(JointDistribution::from_fn(|e| {
            self.get(e) as f64 / self.setting_total(e.x0, e.x1, e.y, e.z) as f64
        }))
    }

    /// CSV with header `x0,x1,y,z,b,c,count`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in Event::all() {
            w.serialize(CsvRow {
                x0: e.x0 as u8,
                x1: e.x1 as u8,
                y: e.y as u8,
                z: e.z as u8,
                b: e.b as u8,
                c: e.c as u8,
                count: self.get(e),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`CountTable::write_csv`]. Missing cells
    /// count as zero; `events_per_setting` is not part of the file.
    pub fn read_csv<R: Read>(reader: R, events_per_setting: u64) -> Result<Self> {
        let mut counts = [0u64; Event::COUNT];
        for row in csv::Reader::from_reader(reader).deserialize::<CsvRow>() {
            let row = row?;
            let bits = [row.x0, row.x1, row.y, row.z, row.b, row.c];
            if bits.iter().any(|&b| b > 1) {
                return Err(Error::Parse(format!("non-binary index in row {bits:?}")));
            }
            let [x0, x1, y, z, b, c] = bits.map(usize::from);
            counts[Event::new(x0, x1, y, z, b, c).index()] = row.count;
        }
        Ok(Self::new(counts, events_per_setting))
    }
}

/// Samples registered counts with mean `events_per_setting` emitted events per block.
pub fn sample_counts(spec: &ProtocolSpec<f64>, events_per_setting: u64, seed: u64) -> Result<CountTable> {
    if events_per_setting == 0 {
        return Err(Error::OutOfRange {
            name: "events_per_setting",
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let dist = exact_distribution(spec);
    let emitted = Poisson::new(events_per_setting as f64)
        .map_err(|e| Error::Config(format!("poisson rate: {e}")))?;

    let blocks: Vec<[u64; 2]> = (0..BLOCKS)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let base = Event::from_index(block * 2);
            let p0 = dist.get(Event { c: 0, ..base }).clamp(0.0, 1.0);
            let p1 = dist.get(Event { c: 1, ..base }).clamp(0.0, 1.0);
            let n = emitted.sample(&mut rng) as u64;
            let k0 = binomial(n, p0, &mut rng);
            let rest = 1.0 - p0;
            let k1 = if rest > 0.0 {
                binomial(n - k0, (p1 / rest).min(1.0), &mut rng)
            } else {
                0
            };
            [k0, k1]
        })
        .collect();

    let mut counts = [0u64; Event::COUNT];
    for (block, pair) in blocks.iter().enumerate() {
        counts[block * 2] = pair[0];
        counts[block * 2 + 1] = pair[1];
    }
    Ok(CountTable::new(counts, events_per_setting))
}

fn binomial(n: u64, p: f64, rng: &mut ChaCha8Rng) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

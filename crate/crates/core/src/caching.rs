//! Cache placement policies producing the node -> files caching graph.

use std::io::Write;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::DerivedScales;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CachePolicy {
    /// Uniform `M`-subsets of the whole library.
    DecentralizedFull,
    /// Uniform `M`-subsets of the `sub_library_size` most popular files.
    DecentralizedSubset { sub_library_size: u64 },
    /// Every library file stored at least once across the network.
    Centralized,
}

/// Per-node sorted sets of cached file indices (1-based), stored flat with
/// stride `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachePlacement {
    policy: CachePolicy,
    capacity: usize,
    files: Vec<u32>,
}

impl CachePlacement {
    /// Wraps an explicit flat layout: `capacity` sorted, distinct files per node.
    pub fn from_parts(policy: CachePolicy, capacity: usize, files: Vec<u32>) -> Result<Self> {
        if capacity == 0 || !files.len().is_multiple_of(capacity) {
            return Err(Error::InvalidConfig(
                "cache layout is not a whole number of caches".into(),
            ));
        }
        if files
            .chunks(capacity)
            .any(|c| c.windows(2).any(|w| w[0] >= w[1]) || c[0] == 0)
        {
            return Err(Error::InvalidConfig(
                "each cache must be sorted, distinct and 1-based".into(),
            ));
        }
        Ok(CachePlacement {
            policy,
            capacity,
            files,
        })
    }

    pub fn policy(&self) -> CachePolicy {
        self.policy
    }

    /// Per-node cache size `M`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn node_count(&self) -> usize {
        self.files.len() / self.capacity
    }

    pub fn cache(&self, node: u32) -> &[u32] {
        let start = node as usize * self.capacity;
        &self.files[start..start + self.capacity]
    }

    pub fn holds(&self, node: u32, file: u32) -> bool {
        self.cache(node).binary_search(&file).is_ok()
    }

    /// Dump as `node_id,file_id` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node_id", "file_id"])?;
        for node in 0..self.node_count() as u32 {
            for f in self.cache(node) {
                w.write_record([node.to_string(), f.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn sorted_subset<R: Rng + ?Sized>(rng: &mut R, library: u64, size: usize) -> Vec<u32> {
    // rand picks Floyd, partial Fisher-Yates or rejection by (library, size)
    let mut s: Vec<u32> = index::sample(rng, library as usize, size)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    s.sort_unstable();
    s
}

fn decentralized<R: Rng + ?Sized>(
    n: usize,
    cache_size: u64,
    library_size: u64,
    policy: CachePolicy,
    rng: &mut R,
) -> Result<CachePlacement> {
    if cache_size == 0 {
        return Err(Error::InvalidConfig("cache size must be >= 1".into()));
    }
    if cache_size > library_size {
        return Err(Error::CacheTooLarge {
            cache: cache_size,
            library: library_size,
        });
    }
    let m = cache_size as usize;
    let mut files = Vec::with_capacity(n * m);
    for _ in 0..n {
        files.extend(sorted_subset(rng, library_size, m));
    }
    Ok(CachePlacement {
        policy,
        capacity: m,
        files,
    })
}

/// Each node independently caches a uniform `M`-subset of `1..=library_size`.
pub fn place_decentralized<R: Rng + ?Sized>(
    n: usize,
    cache_size: u64,
    library_size: u64,
    rng: &mut R,
) -> Result<CachePlacement> {
    decentralized(n, cache_size, library_size, CachePolicy::DecentralizedFull, rng)
}

/// Decentralized placement over the popularity-truncated sub-library of
/// `scales.sub_library_size` files.
pub fn place_decentralized_subset<F: Real, R: Rng + ?Sized>(
    n: usize,
    cache_size: u64,
    scales: &DerivedScales<F>,
    rng: &mut R,
) -> Result<CachePlacement> {
    let sub = scales.sub_library_size.ok_or_else(|| {
        Error::InvalidConfig("sub-library placement needs scales derived for the improved scheme".into())
    })?;
    decentralized(
        n,
        cache_size,
        sub,
        CachePolicy::DecentralizedSubset { sub_library_size: sub },
        rng,
    )
}

/// Stores every file of `1..=m` at least once: a random bijection of the
/// files into `m` of the `n * M` slots, remaining slots filled with uniform
/// files not already in that node's cache.
pub fn place_centralized<R: Rng + ?Sized>(
    n: usize,
    cache_size: u64,
    library_size: u64,
    rng: &mut R,
) -> Result<CachePlacement> {
    let capacity = n as u64 * cache_size;
    if capacity < library_size {
        return Err(Error::InsufficientCapacity {
            capacity,
            library: library_size,
        });
    }
    if cache_size > library_size {
        return Err(Error::CacheTooLarge {
            cache: cache_size,
            library: library_size,
        });
    }
    let m = cache_size as usize;
    let mut slots = vec![0u32; n * m];
    let mut order: Vec<u32> = (1..=library_size as u32).collect();
    order.shuffle(rng);
    for (slot, file) in index::sample(rng, slots.len(), library_size as usize)
        .into_iter()
        .zip(order)
    {
        slots[slot] = file;
    }
    for cache in slots.chunks_mut(m) {
        for k in 0..m {
            if cache[k] != 0 {
                continue;
            }
            loop {
                let f = rng.gen_range(1..=library_size as u32);
                if !cache.contains(&f) {
                    cache[k] = f;
                    break;
                }
            }
        }
        cache.sort_unstable();
    }
    Ok(CachePlacement {
        policy: CachePolicy::Centralized,
        capacity: m,
        files: slots,
    })
}

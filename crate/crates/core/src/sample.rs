//! Seeded uniform sampling from a graph class.
//!
//! Draw algorithm (fixed, so reports are reproducible from the seed):
//! a `ChaCha8Rng` is seeded with `seed_from_u64(seed)`. Each graph is drawn
//! vertex by vertex, `1..=n`. For `G_n` every potential edge `(v, w)`,
//! `w` ascending, is included on `rng.gen::<bool>()`. For `G_n(d)` the size
//! `i` of `v`'s out-neighborhood is drawn with weight `C(n-1, i)`,
//! `0 <= i <= d`, then `i` targets are picked with
//! `rand::seq::index::sample`. Both give every admissible out-neighborhood
//! the same probability, hence a uniform draw over the labeled class.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{binomial, Digraph, GraphClassSpec, Vertex};

/// Iterator over `count` graphs drawn uniformly from `spec`.
pub struct Sampler {
    spec: GraphClassSpec,
    rng: ChaCha8Rng,
    sizes: Option<WeightedIndex<u128>>,
    remaining: u64,
}

pub fn sample_class(spec: GraphClassSpec, count: u64, seed: u64) -> Sampler {
    let m = (spec.n() - 1) as u128;
    let sizes = spec.d().map(|d| {
        WeightedIndex::new((0..=d as u128).map(|i| binomial(m, i)))
            .expect("binomial weights are positive")
    });
    Sampler {
        spec,
        rng: ChaCha8Rng::seed_from_u64(seed),
        sizes,
        remaining: count,
    }
}

impl Sampler {
    fn draw(&mut self) -> Digraph {
        let n = self.spec.n();
        let lists = (1..=n)
            .map(|v| {
                let others: Vec<Vertex> = (1..=n).filter(|&w| w != v).collect();
                match &self.sizes {
                    None => others
                        .into_iter()
                        .filter(|_| self.rng.gen::<bool>())
                        .collect(),
                    Some(sizes) => {
                        let size = sizes.sample(&mut self.rng);
                        rand::seq::index::sample(&mut self.rng, others.len(), size)
                            .into_iter()
                            .map(|i| others[i])
                            .collect()
                    }
                }
            })
            .collect();
        Digraph::from_out_lists(lists).expect("sampled adjacency is valid")
    }
}

impl Iterator for Sampler {
    type Item = Digraph;

    fn next(&mut self) -> Option<Digraph> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.draw())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

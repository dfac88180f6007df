//! Uniform bucket grid over Poincaré coordinates for near-neighbor queries.
//!
//! Inside the unit ball the conformal factor `(1 - |x|^2)/2` is at most
//! `1/2`, so hyperbolic distance `d` implies Euclidean distance at most
//! `d/2`. Queries for "all points within hyperbolic radius `d`" therefore
//! only need to scan buckets within Euclidean radius `d/2`.

use std::collections::HashMap;

pub(crate) struct BucketGrid {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<u32>>,
    coords: Vec<Vec<f64>>,
}

impl BucketGrid {
    /// `query_radius` is the largest hyperbolic radius queries will use.
    pub fn new(dim: usize, query_radius: f64) -> Self {
        BucketGrid {
            cell: (query_radius / 2.0).max(1e-9),
            dim,
            buckets: HashMap::new(),
            coords: Vec::new(),
        }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|c| (c / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, id: u32, poincare: Vec<f64>) {
        debug_assert_eq!(poincare.len(), self.dim);
        let k = self.key(&poincare);
        if id as usize >= self.coords.len() {
            self.coords.resize(id as usize + 1, Vec::new());
        }
        self.coords[id as usize] = poincare;
        self.buckets.entry(k).or_default().push(id);
    }

    pub fn relocate(&mut self, id: u32, poincare: Vec<f64>) {
        let old_key = self.key(&self.coords[id as usize]);
        if let Some(v) = self.buckets.get_mut(&old_key) {
            v.retain(|&p| p != id);
        }
        let k = self.key(&poincare);
        self.coords[id as usize] = poincare;
        self.buckets.entry(k).or_default().push(id);
    }

    pub fn coords_of(&self, id: u32) -> &[f64] {
        &self.coords[id as usize]
    }

    /// Ids whose Euclidean distance to `x` is at most `euclid_radius`,
    /// in ascending id order.
    pub fn euclid_neighbors(&self, x: &[f64], euclid_radius: f64) -> Vec<u32> {
        let span = (euclid_radius / self.cell).ceil() as i64 + 1;
        let center = self.key(x);
        let mut out = Vec::new();
        let mut offset = vec![-span; self.dim];
        'outer: loop {
            let k: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
            if let Some(ids) = self.buckets.get(&k) {
                for &id in ids {
                    let d2: f64 = self.coords[id as usize]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 <= euclid_radius * euclid_radius {
                        out.push(id);
                    }
                }
            }
            // advance the offset counter
            for i in 0..self.dim {
                offset[i] += 1;
                if offset[i] <= span {
                    continue 'outer;
                }
                offset[i] = -span;
            }
            break;
        }
        out.sort_unstable();
        out
    }
}

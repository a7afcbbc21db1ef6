//! Vietoris–Rips barcodes computed through persistent cohomology with
//! clearing. Simplices above dimension one are never stored: cofacets are
//! enumerated from neighbour lists on demand, and reduced columns are kept
//! as the list of simplices whose coboundaries they sum.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::complexes::{for_each_clique, DistanceMatrix};
use crate::error::{invalid, Result};
use crate::persistence::{Bar, Barcode};

const SLOTS: usize = 4;

/// Filtration order within one dimension: value, then vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Key {
    value: u64,
    verts: [u32; SLOTS],
}

impl Key {
    fn new(value: f64, vs: &[u32]) -> Self {
        let mut verts = [u32::MAX; SLOTS];
        verts[..vs.len()].copy_from_slice(vs);
        Self {
            value: (value + 0.0).to_bits(),
            verts,
        }
    }

    fn value(&self) -> f64 {
        f64::from_bits(self.value)
    }

    fn vertices(&self) -> &[u32] {
        let n = self.verts.iter().position(|&v| v == u32::MAX).unwrap_or(SLOTS);
        &self.verts[..n]
    }
}

/// Removes and returns the smallest entry of odd multiplicity.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<Key>>) -> Option<Key> {
    loop {
        let Reverse(top) = heap.pop()?;
        if heap.peek() == Some(&Reverse(top)) {
            heap.pop();
            continue;
        }
        return Some(top);
    }
}

/// Sorted entries of odd multiplicity.
fn normalize(mut v: Vec<Key>) -> Vec<Key> {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

struct Complex<'a> {
    dm: &'a DistanceMatrix,
    nbrs: Vec<Vec<u32>>,
}

impl Complex<'_> {
    /// Sorted coboundary of `s`, appended to `out`.
    fn coboundary(&self, s: &Key, out: &mut Vec<Key>) {
        let vs = s.vertices();
        let mut common: Vec<u32> = self.nbrs[vs[0] as usize].clone();
        for &v in &vs[1..] {
            let other = &self.nbrs[v as usize];
            common.retain(|c| other.binary_search(c).is_ok());
        }
        let base = s.value();
        let mut buf = [0u32; SLOTS];
        for c in common {
            let value = vs
                .iter()
                .map(|&v| self.dm.get(v as usize, c as usize))
                .fold(base, f64::max);
            let pos = vs.partition_point(|&v| v < c);
            buf[..pos].copy_from_slice(&vs[..pos]);
            buf[pos] = c;
            buf[pos + 1..=vs.len()].copy_from_slice(&vs[pos..]);
            out.push(Key::new(value, &buf[..=vs.len()]));
        }
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Barcode of the Rips filtration truncated at `max_scale` in degrees
/// `0..=max_degree` (at most 2). Essential classes are capped at `cap`, by
/// default the longest edge present.
pub fn rips_barcode(dm: &DistanceMatrix, max_degree: usize, max_scale: f64, cap: Option<f64>) -> Result<Barcode> {
    if max_degree + 2 > SLOTS {
        return invalid(format!("degree {max_degree} exceeds the supported maximum {}", SLOTS - 2));
    }
    if max_scale.is_nan() || max_scale <= 0.0 {
        return invalid("max_scale must be positive");
    }
    let n = dm.len();
    let allowed = vec![true; n];
    let mut by_dim: Vec<Vec<Key>> = vec![Vec::new(); max_degree + 1];
    for_each_clique(dm, max_scale, max_degree.max(1), &allowed, |s, v| {
        if s.len() >= 2 && s.len() <= max_degree + 1 {
            by_dim[s.len() - 1].push(Key::new(v, s));
        }
    });
    let mut edges = if max_degree == 0 {
        let mut e = Vec::new();
        for_each_clique(dm, max_scale, 1, &allowed, |s, v| {
            if s.len() == 2 {
                e.push(Key::new(v, s));
            }
        });
        e
    } else {
        by_dim[1].clone()
    };
    edges.sort_unstable();
    let longest = edges.last().map_or(0.0, |e| e.value());
    let cap = cap.unwrap_or(longest);
    if !cap.is_finite() || cap < longest {
        return invalid(format!("cap {cap} is below the longest edge {longest}"));
    }

    let mut bars = vec![Vec::new(); max_degree + 1];
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut cleared: FxHashSet<Key> = FxHashSet::default();
    for e in &edges {
        let vs = e.vertices();
        let (a, b) = (find(&mut parent, vs[0]), find(&mut parent, vs[1]));
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
            cleared.insert(*e);
            if e.value() > 0.0 {
                bars[0].push(Bar {
                    birth: 0.0,
                    death: e.value(),
                });
            }
        }
    }
    let components = (0..n as u32).filter(|&v| find(&mut parent, v) == v).count();
    if cap > 0.0 {
        bars[0].extend((0..components).map(|_| Bar { birth: 0.0, death: cap }));
    }

    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in &edges {
        let vs = e.vertices();
        nbrs[vs[0] as usize].push(vs[1]);
        nbrs[vs[1] as usize].push(vs[0]);
    }
    nbrs.iter_mut().for_each(|l| l.sort_unstable());
    let cx = Complex { dm, nbrs };

    for q in 1..=max_degree {
        let mut simplices = std::mem::take(&mut by_dim[q]);
        simplices.sort_unstable_by(|a, b| b.cmp(a));
        let mut owner: FxHashMap<Key, u32> = FxHashMap::default();
        let mut chains: Vec<Vec<Key>> = Vec::new();
        let mut next_cleared = FxHashSet::default();
        let mut col: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
        let mut buf = Vec::new();
        for s in simplices {
            if cleared.contains(&s) {
                continue;
            }
            buf.clear();
            cx.coboundary(&s, &mut buf);
            col.clear();
            col.extend(buf.iter().map(|&k| Reverse(k)));
            let mut chain = vec![s];
            loop {
                let Some(pivot) = pop_pivot(&mut col) else {
                    if s.value() < cap {
                        bars[q].push(Bar {
                            birth: s.value(),
                            death: cap,
                        });
                    }
                    break;
                };
                if let Some(&k) = owner.get(&pivot) {
                    col.push(Reverse(pivot));
                    let other = &chains[k as usize];
                    buf.clear();
                    for t in other {
                        cx.coboundary(t, &mut buf);
                    }
                    col.extend(buf.iter().map(|&k| Reverse(k)));
                    chain.extend_from_slice(other);
                } else {
                    owner.insert(pivot, chains.len() as u32);
                    chains.push(normalize(chain));
                    next_cleared.insert(pivot);
                    if s.value() < pivot.value() {
                        bars[q].push(Bar {
                            birth: s.value(),
                            death: pivot.value(),
                        });
                    }
                    break;
                }
            }
        }
        cleared = next_cleared;
    }
    for list in &mut bars {
        list.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    }
    Barcode::new(bars, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{distance_matrix, vietoris_rips, PointCloud};
    use crate::persistence::compute_persistence_with_cap;
    use proptest::prelude::*;

    fn matrix_path(dm: &DistanceMatrix, q: usize, s: f64, cap: f64) -> Barcode {
        let f = vietoris_rips(dm, q + 1, s).unwrap();
        compute_persistence_with_cap(&f, q, cap).unwrap()
    }

    #[test]
    fn square_has_one_loop() {
        let pc = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let dm = distance_matrix(&pc);
        let b = rips_barcode(&dm, 1, f64::INFINITY, None).unwrap();
        assert_eq!(b.degree(1), &[Bar { birth: 1.0, death: 2f64.sqrt() }]);
        assert_eq!(b.degree(0).len(), 4);
        assert!(rips_barcode(&dm, 3, 1.0, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn agrees_with_matrix_reduction(
            pts in prop::collection::vec(prop::collection::vec(0i32..6, 3), 4..14),
            s in 1.0f64..6.0,
        ) {
            // Integer coordinates produce many tied distances.
            let pc = PointCloud::new(pts.iter().map(|p| p.iter().map(|&x| x as f64).collect()).collect()).unwrap();
            let dm = distance_matrix(&pc);
            let cap = s.max(dm.max_entry());
            for q in 0..=2 {
                let a = rips_barcode(&dm, q, s, Some(cap)).unwrap();
                let b = matrix_path(&dm, q, s, cap);
                prop_assert_eq!(a, b);
            }
        }
    }
}

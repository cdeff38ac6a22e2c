//! Fast polynomial evaluation over a Galois field on `u32`-encoded elements.
//!
//! `RawPoly` mirrors a [`LocalPoly`](crate::bundle::LocalPoly) over `F_q` and supports
//! evaluating at a single point or on the full grid `F_q^n` by transforming one axis
//! at a time.

use crate::bundle::LocalPoly;
use crate::field::{Elem, GaloisField};

#[derive(Clone, Debug)]
pub(crate) struct RawPoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, u32)>,
}

impl RawPoly {
    pub fn from_local(p: &LocalPoly) -> RawPoly {
        let terms = p.terms().iter().map(|(e, c)| (e.clone(), finite(c))).collect();
        RawPoly {
            nvars: p.nvars(),
            terms,
        }
    }

    pub fn eval(&self, g: &GaloisField, point: &[u32]) -> u32 {
        let mut acc = 0u32;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    if *x == 0 {
                        t = 0;
                        break;
                    }
                    t = g.mul(t, g.pow(*x, k as u64));
                }
            }
            if t != 0 {
                acc = g.add(acc, t);
            }
        }
        acc
    }

    /// Restricts to the coordinates in `free` by setting every other coordinate to zero.
    pub fn restrict_to(&self, free: &[usize], g: &GaloisField) -> RawPoly {
        let mut merged: std::collections::BTreeMap<Vec<u32>, u32> = Default::default();
        for (e, c) in &self.terms {
            let vanishes = e.iter().enumerate().any(|(i, &k)| k > 0 && !free.contains(&i));
            if vanishes {
                continue;
            }
            let ne: Vec<u32> = free.iter().map(|&i| e[i]).collect();
            let slot = merged.entry(ne).or_insert(0);
            *slot = g.add(*slot, *c);
        }
        RawPoly {
            nvars: free.len(),
            terms: merged.into_iter().filter(|(_, c)| *c != 0).collect(),
        }
    }

    /// Values at every point of `F_q^n`. Point `(c_0, ..., c_{n-1})` is stored at
    /// index `((c_0 q + c_1) q + ...) + c_{n-1}` with `c_i` the element encodings.
    pub fn eval_grid(&self, g: &GaloisField) -> Vec<u32> {
        let q = g.order() as usize;
        let n = self.nvars;
        if n == 0 {
            let c = self.terms.iter().fold(0, |acc, (_, c)| g.add(acc, *c));
            return vec![c];
        }
        // x^e = x^(((e - 1) mod (q - 1)) + 1) on F_q for e >= 1.
        let reduce = |e: u32| -> usize {
            if e == 0 {
                0
            } else {
                ((e as usize - 1) % (q - 1)) + 1
            }
        };
        let mut dims: Vec<usize> = vec![1; n];
        for (e, _) in &self.terms {
            for (d, &k) in dims.iter_mut().zip(e) {
                *d = (*d).max(reduce(k) + 1);
            }
        }
        let mut data = vec![0u32; dims.iter().product()];
        for (e, c) in &self.terms {
            let mut idx = 0usize;
            for (v, &k) in e.iter().enumerate() {
                idx = idx * dims[v] + reduce(k);
            }
            data[idx] = g.add(data[idx], *c);
        }
        // powers[x][d] = x^d
        let max_d = *dims.iter().max().unwrap();
        let powers: Vec<Vec<u32>> = (0..q as u32)
            .map(|x| (0..max_d).map(|d| g.pow(x, d as u64)).collect())
            .collect();
        for axis in 0..n {
            let outer: usize = dims[..axis].iter().product();
            let inner: usize = dims[axis + 1..].iter().product();
            let d_axis = dims[axis];
            let mut next = vec![0u32; outer * q * inner];
            for o in 0..outer {
                let src_block = &data[o * d_axis * inner..(o + 1) * d_axis * inner];
                let dst_block = &mut next[o * q * inner..(o + 1) * q * inner];
                for (x, pw) in powers.iter().enumerate() {
                    let dst = &mut dst_block[x * inner..(x + 1) * inner];
                    for (d, &coef) in pw.iter().take(d_axis).enumerate() {
                        if coef == 0 {
                            continue;
                        }
                        let src = &src_block[d * inner..(d + 1) * inner];
                        if coef == 1 {
                            for (t, &s) in dst.iter_mut().zip(src) {
                                if s != 0 {
                                    *t = g.add(*t, s);
                                }
                            }
                        } else {
                            for (t, &s) in dst.iter_mut().zip(src) {
                                if s != 0 {
                                    *t = g.add(*t, g.mul(coef, s));
                                }
                            }
                        }
                    }
                }
            }
            data = next;
            dims[axis] = q;
        }
        data
    }
}

pub(crate) fn finite(c: &Elem) -> u32 {
    match c {
        Elem::Finite(v) => *v,
        Elem::Rational(_) => panic!("raw polynomials require a finite field"),
    }
}

/// Decodes a grid index into coordinates (see [`RawPoly::eval_grid`]).
pub(crate) fn grid_point(mut idx: usize, n: usize, q: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for slot in out.iter_mut().rev() {
        *slot = (idx % q) as u32;
        idx /= q;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use std::sync::Arc;

    #[test]
    fn grid_matches_pointwise() {
        for (p, k) in [(2u64, 2u32), (3, 1), (3, 2), (5, 1)] {
            let f = make_field(p, k).unwrap();
            let g = f.galois().unwrap();
            let q = g.order();
            let names = Arc::new(vec!["a".to_string(), "b".into(), "c".into()]);
            let mut poly = LocalPoly::zero(names, f.clone());
            let mut seed = 17u32;
            for e0 in 0..4u32 {
                for e1 in 0..3u32 {
                    for e2 in [0u32, 1, 7] {
                        seed = seed.wrapping_mul(1_103_515_245).wrapping_add(12_345);
                        poly.add_term(vec![e0, e1, e2], Elem::Finite((seed >> 8) % q));
                    }
                }
            }
            let raw = RawPoly::from_local(&poly);
            let grid = raw.eval_grid(g);
            assert_eq!(grid.len(), (q * q * q) as usize);
            for (idx, v) in grid.iter().enumerate() {
                let pt = grid_point(idx, 3, q as usize);
                assert_eq!(*v, raw.eval(g, &pt));
                let elems: Vec<Elem> = pt.iter().map(|&x| Elem::Finite(x)).collect();
                assert_eq!(Elem::Finite(*v), poly.evaluate(&elems).unwrap());
            }
        }
    }

    #[test]
    fn restriction_sets_coordinates_to_zero() {
        let f = make_field(3, 1).unwrap();
        let g = f.galois().unwrap();
        let names = Arc::new(vec!["a".to_string(), "b".into()]);
        let mut poly = LocalPoly::zero(names, f.clone());
        poly.add_term(vec![1, 0], Elem::Finite(2));
        poly.add_term(vec![0, 2], Elem::Finite(1));
        poly.add_term(vec![0, 0], Elem::Finite(1));
        let raw = RawPoly::from_local(&poly).restrict_to(&[1], g);
        for b in 0..3u32 {
            assert_eq!(raw.eval(g, &[b]), RawPoly::from_local(&poly).eval(g, &[0, b]));
        }
    }
}

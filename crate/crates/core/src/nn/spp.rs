//! Spatial pyramid max pooling.
//!
//! Level `n` splits the rows into bins `[floor(i*H/n), floor((i+1)*H/n))`
//! (columns likewise). The bins cover the map exactly without overlap, so every
//! level needs `H, W >= n`. Output order is level by level in the order given,
//! and within a level channel-major, then bin row, then bin column.

use std::ops::Range;

use super::{NnError, Tensor};

pub const DEFAULT_LEVELS: [usize; 3] = [4, 2, 1];

/// Half-open index range of bin `index` out of `bins` over `len` cells.
pub fn bin_bounds(index: usize, bins: usize, len: usize) -> Range<usize> {
    index * len / bins..(index + 1) * len / bins
}

pub fn spp_output_len(channels: usize, levels: &[usize]) -> usize {
    channels * levels.iter().map(|n| n * n).sum::<usize>()
}

fn check(feature_map: &Tensor, levels: &[usize]) -> Result<(usize, usize, usize), NnError> {
    let (c, h, w) = feature_map.dims3()?;
    if levels.is_empty() || levels.contains(&0) {
        return Err(NnError::Shape(format!("invalid pyramid levels {levels:?}")));
    }
    let largest = *levels.iter().max().expect("non-empty");
    if h < largest || w < largest {
        return Err(NnError::TooSmall(format!(
            "{h}x{w} feature map is smaller than the {largest}x{largest} pyramid level"
        )));
    }
    Ok((c, h, w))
}

/// Visits every (output index, argmax cell) pair in output order. Ties go to
/// the first cell in row-major order.
fn for_each_bin(
    feature_map: &Tensor,
    levels: &[usize],
    mut f: impl FnMut(usize, usize, f64),
) -> Result<(), NnError> {
    let (c, h, w) = check(feature_map, levels)?;
    let data = feature_map.data();
    let mut out = 0;
    for &n in levels {
        for ch in 0..c {
            let plane = &data[ch * h * w..(ch + 1) * h * w];
            for by in 0..n {
                let rows = bin_bounds(by, n, h);
                for bx in 0..n {
                    let cols = bin_bounds(bx, n, w);
                    let mut best = rows.start * w + cols.start;
                    for y in rows.clone() {
                        for x in cols.clone() {
                            if plane[y * w + x] > plane[best] {
                                best = y * w + x;
                            }
                        }
                    }
                    f(out, ch * h * w + best, plane[best]);
                    out += 1;
                }
            }
        }
    }
    Ok(())
}

/// Fixed-length `[C * sum(n^2)]` vector from a `[C, H, W]` map of any size.
pub fn spp_pool(feature_map: &Tensor, levels: &[usize]) -> Result<Tensor, NnError> {
    let (c, _, _) = feature_map.dims3()?;
    let mut out = vec![0.0; spp_output_len(c, levels)];
    for_each_bin(feature_map, levels, |i, _, v| out[i] = v)?;
    Ok(Tensor::from_parts(vec![out.len()], out))
}

/// Routes each upstream entry to its bin's argmax cell; cells selected by
/// several levels accumulate.
pub fn spp_backward(
    feature_map: &Tensor,
    levels: &[usize],
    upstream: &Tensor,
) -> Result<Tensor, NnError> {
    let (c, _, _) = feature_map.dims3()?;
    let expected = spp_output_len(c, levels);
    if upstream.len() != expected {
        return Err(NnError::Shape(format!(
            "spp upstream gradient has {} entries, expected {expected}",
            upstream.len()
        )));
    }
    let g = upstream.data();
    let mut grad = Tensor::zeros_like(feature_map);
    let gd = grad.data_mut();
    for_each_bin(feature_map, levels, |i, cell, _| gd[cell] += g[i])?;
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{central_diff, rel_error};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(c: usize, h: usize, w: usize, rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::new(vec![c, h, w], (0..c * h * w).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap()
    }

    // Exhaustive oracle: for each output bin, scan every cell and test
    // membership with the bin formula directly.
    fn oracle(map: &Tensor, levels: &[usize]) -> Vec<f64> {
        let (c, h, w) = map.dims3().unwrap();
        let mut out = Vec::new();
        for &n in levels {
            for ch in 0..c {
                for by in 0..n {
                    for bx in 0..n {
                        let mut best = f64::NEG_INFINITY;
                        for y in 0..h {
                            for x in 0..w {
                                let in_row = y >= by * h / n && y < (by + 1) * h / n;
                                let in_col = x >= bx * w / n && x < (bx + 1) * w / n;
                                if in_row && in_col {
                                    best = best.max(map.data()[(ch * h + y) * w + x]);
                                }
                            }
                        }
                        out.push(best);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constant_map_gives_constant_vector() {
        let map = Tensor::filled(&[2, 9, 5], 0.75);
        let v = spp_pool(&map, &DEFAULT_LEVELS).unwrap();
        assert_eq!(v.len(), 42);
        assert!(v.data().iter().all(|&x| x == 0.75));
    }

    #[test]
    fn four_by_four_level_is_the_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let map = random_map(1, 4, 4, &mut rng);
        let v = spp_pool(&map, &DEFAULT_LEVELS).unwrap();
        assert_eq!(&v.data()[..16], map.data());
        let global = map.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(v.data()[20], global);
    }

    #[test]
    fn odd_map_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let map = random_map(1, 5, 7, &mut rng);
        assert_eq!(spp_pool(&map, &DEFAULT_LEVELS).unwrap().data(), oracle(&map, &DEFAULT_LEVELS));
    }

    #[test]
    fn too_small_map() {
        assert!(matches!(
            spp_pool(&Tensor::zeros(&[1, 3, 8]), &DEFAULT_LEVELS),
            Err(NnError::TooSmall(_))
        ));
        assert!(spp_pool(&Tensor::zeros(&[1, 4, 4]), &[]).is_err());
    }

    #[test]
    fn constant_map_routes_to_first_cell() {
        let map = Tensor::filled(&[1, 4, 4], 1.0);
        let g = spp_backward(&map, &DEFAULT_LEVELS, &Tensor::filled(&[21], 1.0)).unwrap();
        // Level 4 touches every cell once; levels 2 and 1 add to the top-left
        // cell of their bins: (0,0), (0,2), (2,0), (2,2), and (0,0) again.
        let mut want = vec![1.0; 16];
        want[0] += 2.0;
        want[2] += 1.0;
        want[8] += 1.0;
        want[10] += 1.0;
        assert_eq!(g.data(), want);
    }

    #[test]
    fn increasing_map_routes_to_bottom_right() {
        let map = Tensor::new(vec![1, 6, 6], (0..36).map(|v| v as f64).collect()).unwrap();
        let mut up = vec![0.0; 21];
        up[16..20].fill(1.0); // level 2 only
        let g = spp_backward(&map, &DEFAULT_LEVELS, &Tensor::new(vec![21], up).unwrap()).unwrap();
        let hits: Vec<usize> = g.data().iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
        assert_eq!(hits, vec![2 * 6 + 2, 2 * 6 + 5, 5 * 6 + 2, 5 * 6 + 5]);
    }

    #[test]
    fn backward_gradcheck() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let map = random_map(2, rng.random_range(4..9), rng.random_range(4..9), &mut rng);
            let probe: Vec<f64> = (0..42).map(|_| rng.random_range(-1.0..1.0)).collect();
            let loss = |t: &Tensor| -> f64 {
                spp_pool(t, &DEFAULT_LEVELS).unwrap().data().iter().zip(&probe).map(|(a, b)| a * b).sum()
            };
            let g = spp_backward(&map, &DEFAULT_LEVELS, &Tensor::new(vec![42], probe.clone()).unwrap())
                .unwrap();
            assert!(rel_error(&g, &central_diff(&map, loss)) < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn length_is_fixed(c in 1usize..4, h in 4usize..40, w in 4usize..40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(c, h, w, &mut rng);
            let v = spp_pool(&map, &DEFAULT_LEVELS).unwrap();
            prop_assert_eq!(v.len(), 21 * c);
            prop_assert_eq!(v.data(), &oracle(&map, &DEFAULT_LEVELS)[..]);
        }

        #[test]
        fn permuting_within_a_bin_changes_nothing(h in 4usize..20, w in 4usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(1, h, w, &mut rng);
            // reverse the cells of one level-4 bin; the bin lies inside one
            // bin of every coarser level too
            let (by, bx) = (rng.random_range(0..4), rng.random_range(0..4));
            let cells: Vec<usize> = bin_bounds(by, 4, h)
                .flat_map(|y| bin_bounds(bx, 4, w).map(move |x| y * w + x))
                .collect();
            let mut shuffled = map.clone();
            for (a, b) in cells.iter().zip(cells.iter().rev()) {
                shuffled.data_mut()[*a] = map.data()[*b];
            }
            prop_assert_eq!(spp_pool(&map, &DEFAULT_LEVELS).unwrap(), spp_pool(&shuffled, &DEFAULT_LEVELS).unwrap());
        }
    }
}

//! Synthetic tables with known structure, used by tests, demos and the
//! `synth` CLI subcommand.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::DiscreteTable;

/// Parity table: F1, F2 take every value in {0,1}^2 exactly `copies` times
/// and the class is F1 xor F2.
pub fn xor_table(copies: usize) -> DiscreteTable {
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    let mut class = Vec::new();
    for _ in 0..copies {
        for a in 0..2u32 {
            for b in 0..2u32 {
                f1.push(a);
                f2.push(b);
                class.push(a ^ b);
            }
        }
    }
    DiscreteTable::with_arities(vec![f1, f2], vec![2, 2], class, 2).expect("valid xor table")
}

/// Full factorial design over the given feature arities, each cell repeated
/// `copies` times, with a constant class column.
pub fn product_table(arities: &[u32], copies: usize) -> DiscreteTable {
    let cells: usize = arities.iter().map(|&a| a as usize).product();
    let mut columns = vec![Vec::with_capacity(cells * copies); arities.len()];
    for _ in 0..copies {
        for mut idx in 0..cells {
            for (j, &a) in arities.iter().enumerate().rev() {
                columns[j].push((idx % a as usize) as u32);
                idx /= a as usize;
            }
        }
    }
    let n = cells * copies;
    DiscreteTable::with_arities(columns, arities.to_vec(), vec![0; n], 1).expect("valid product table")
}

/// Parity pair plus one noise feature balanced against everything: the rows
/// are the full {0,1}^3 design over (F1, F2, N) with class F1 xor F2.
pub fn xor_with_balanced_noise(copies: usize) -> DiscreteTable {
    let base = product_table(&[2, 2, 2], copies);
    let class = (0..base.n_rows()).map(|i| base.feature(0)[i] ^ base.feature(1)[i]).collect();
    DiscreteTable::with_arities(
        (0..3).map(|j| base.feature(j).to_vec()).collect(),
        vec![2, 2, 2],
        class,
        2,
    )
    .expect("valid table")
}

/// Parity features at indices 0 and 1 (each of the four cells exactly
/// `rows / 4` times, row order shuffled) followed by `n_noise` i.i.d.
/// uniform binary noise features. Class is the parity of the first two.
pub fn xor_with_noise(seed: u64, n_noise: usize, rows: usize) -> DiscreteTable {
    assert!(rows % 4 == 0 && rows > 0, "rows must be a positive multiple of 4");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(u32, u32)> = (0..rows / 4)
        .flat_map(|_| [(0, 0), (0, 1), (1, 0), (1, 1)])
        .collect();
    cells.shuffle(&mut rng);
    let mut columns = vec![
        cells.iter().map(|c| c.0).collect::<Vec<_>>(),
        cells.iter().map(|c| c.1).collect::<Vec<_>>(),
    ];
    for _ in 0..n_noise {
        columns.push((0..rows).map(|_| rng.gen_range(0..2)).collect());
    }
    let class = cells.iter().map(|c| c.0 ^ c.1).collect();
    let n = columns.len();
    DiscreteTable::with_arities(columns, vec![2; n], class, 2).expect("valid table")
}

/// Redundancy construction: F1 and F3 independent uniform bits, F2 an exact
/// copy of F1, class `F1 + F1*F3` (three classes). I(F1;C) = 1 bit,
/// I(F3;C) = 0.5 bit.
pub fn duplicate_table(copies: usize) -> DiscreteTable {
    let mut f1 = Vec::new();
    let mut f3 = Vec::new();
    let mut class = Vec::new();
    for _ in 0..copies {
        for a in 0..2u32 {
            for b in 0..2u32 {
                f1.push(a);
                f3.push(b);
                class.push(a + a * b);
            }
        }
    }
    DiscreteTable::with_arities(vec![f1.clone(), f1, f3], vec![2, 2, 2], class, 3).expect("valid table")
}

/// Planted-structure table. Features 0..3 are uniform bits that determine
/// the class as `C = 1 iff 2*F0 + F1 + F2 >= 2`; features 3..6 are copies
/// of F0 with 10% of bits flipped (relevant but redundant); the remaining
/// features are i.i.d. uniform binary noise.
pub fn planted(seed: u64, rows: usize, n_features: usize) -> DiscreteTable {
    assert!(n_features >= 6, "planted table needs at least 6 features");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<u32>> = (0..3).map(|_| (0..rows).map(|_| rng.gen_range(0..2)).collect()).collect();
    let class: Vec<u32> = (0..rows)
        .map(|i| u32::from(2 * columns[0][i] + columns[1][i] + columns[2][i] >= 2))
        .collect();
    for _ in 3..6 {
        let copy = columns[0]
            .iter()
            .map(|&v| if rng.gen_bool(0.1) { 1 - v } else { v })
            .collect();
        columns.push(copy);
    }
    for _ in 6..n_features {
        columns.push((0..rows).map(|_| rng.gen_range(0..2)).collect());
    }
    DiscreteTable::with_arities(columns, vec![2; n_features], class, 2).expect("valid table")
}

/// Uniformly random table; each feature and the class draw their own arity
/// from `arity_range`.
pub fn random_table<R: Rng>(rng: &mut R, n_features: usize, rows: usize, arity_range: std::ops::RangeInclusive<u32>) -> DiscreteTable {
    let mut arities = Vec::with_capacity(n_features);
    let mut columns = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let a = rng.gen_range(arity_range.clone());
        arities.push(a);
        columns.push((0..rows).map(|_| rng.gen_range(0..a)).collect());
    }
    let ca = rng.gen_range(arity_range);
    let class = (0..rows).map(|_| rng.gen_range(0..ca)).collect();
    DiscreteTable::with_arities(columns, arities, class, ca).expect("valid random table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(xor_table(2).n_rows(), 8);
        let p = product_table(&[2, 3], 2);
        assert_eq!(p.n_rows(), 12);
        assert_eq!(p.arities(), &[2, 3]);
        let x = xor_with_noise(3, 8, 256);
        assert_eq!((x.n_rows(), x.n_features()), (256, 10));
        assert_eq!(planted(1, 500, 30).n_features(), 30);
        assert_eq!(duplicate_table(4).class_arity(), 3);
    }

    #[test]
    fn noise_draws_are_seeded() {
        assert_eq!(xor_with_noise(7, 8, 256), xor_with_noise(7, 8, 256));
        assert_ne!(xor_with_noise(7, 8, 256), xor_with_noise(8, 8, 256));
    }
}

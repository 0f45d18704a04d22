//! Plug-in (maximum-likelihood) entropy and mutual information over
//! discrete columns, in bits.

use crate::error::{Error, Result};
use crate::table::{DiscreteTable, Var};

/// Values in `(-NEG_TOLERANCE, 0)` are floating-point residue and clamp to 0.
pub const NEG_TOLERANCE: f64 = 1e-12;

/// Dense joint counts over 1 to 3 variables. The first variable is the most
/// significant index in `cells`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyCounts {
    pub dims: Vec<usize>,
    pub cells: Vec<u64>,
    pub total: u64,
}

impl ContingencyCounts {
    /// Counts from an explicit array (mainly for tests and ad-hoc use).
    pub fn from_cells(dims: Vec<usize>, cells: Vec<u64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || expected != cells.len() {
            return Err(Error::input(format!(
                "cell array of length {} does not match dims {:?}",
                cells.len(),
                dims
            )));
        }
        let total = cells.iter().sum();
        Ok(Self { dims, cells, total })
    }

    pub fn get(&self, index: &[usize]) -> u64 {
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        self.cells[flat]
    }
}

/// Tallies the joint assignments of up to three columns.
pub fn count(table: &DiscreteTable, vars: &[Var]) -> Result<ContingencyCounts> {
    if vars.is_empty() || vars.len() > 3 {
        return Err(Error::input(format!("count takes 1 to 3 variables, got {}", vars.len())));
    }
    let mut cols = Vec::with_capacity(vars.len());
    let mut dims = Vec::with_capacity(vars.len());
    for &v in vars {
        cols.push(table.column(v)?);
        dims.push(table.arity(v)? as usize);
    }
    let mut cells = vec![0u64; dims.iter().product()];
    for row in 0..table.n_rows() {
        let mut flat = 0;
        for (col, &d) in cols.iter().zip(&dims) {
            flat = flat * d + col[row] as usize;
        }
        cells[flat] += 1;
    }
    Ok(ContingencyCounts {
        dims,
        cells,
        total: table.n_rows() as u64,
    })
}

/// Shannon entropy (bits) of the distribution held in `counts`. For
/// multi-variable counts this is the joint entropy.
pub fn entropy(counts: &ContingencyCounts) -> Result<f64> {
    if counts.total == 0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(entropy_of(&counts.cells, counts.total))
}

fn entropy_of(cells: &[u64], total: u64) -> f64 {
    let n = total as f64;
    let h: f64 = cells
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

pub fn clamp_nonneg(value: f64) -> f64 {
    debug_assert!(
        value > -NEG_TOLERANCE,
        "information quantity {value} is negative beyond rounding"
    );
    value.max(0.0)
}

/// I(X;Y) from empirical joint counts. Exactly symmetric: the pair is
/// canonicalised before counting so both argument orders take the same
/// floating-point path.
pub fn mutual_information(table: &DiscreteTable, x: Var, y: Var) -> Result<f64> {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let joint = count(table, &[a, b])?;
    Ok(mi_from_joint(&joint))
}

fn mi_from_joint(joint: &ContingencyCounts) -> f64 {
    let (da, db) = (joint.dims[0], joint.dims[1]);
    let mut na = vec![0u64; da];
    let mut nb = vec![0u64; db];
    for i in 0..da {
        for j in 0..db {
            let c = joint.cells[i * db + j];
            na[i] += c;
            nb[j] += c;
        }
    }
    let n = joint.total as f64;
    let mut acc = 0.0;
    for i in 0..da {
        for j in 0..db {
            let c = joint.cells[i * db + j];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            acc += c * (c * n / (na[i] as f64 * nb[j] as f64)).log2();
        }
    }
    clamp_nonneg(acc / n)
}

/// I(X;Y|Z) from empirical joint counts; symmetric in X and Y.
pub fn conditional_mutual_information(table: &DiscreteTable, x: Var, y: Var, z: Var) -> Result<f64> {
    if x == y || x == z || y == z {
        return Err(Error::input(format!(
            "conditional mutual information needs distinct variables, got {x:?}, {y:?}, {z:?}"
        )));
    }
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let joint = count(table, &[a, b, z])?;
    Ok(cmi_from_joint(&joint))
}

fn cmi_from_joint(joint: &ContingencyCounts) -> f64 {
    let (da, db, dz) = (joint.dims[0], joint.dims[1], joint.dims[2]);
    let mut naz = vec![0u64; da * dz];
    let mut nbz = vec![0u64; db * dz];
    let mut nz = vec![0u64; dz];
    for i in 0..da {
        for j in 0..db {
            for k in 0..dz {
                let c = joint.cells[(i * db + j) * dz + k];
                naz[i * dz + k] += c;
                nbz[j * dz + k] += c;
                nz[k] += c;
            }
        }
    }
    let mut acc = 0.0;
    for i in 0..da {
        for j in 0..db {
            for k in 0..dz {
                let c = joint.cells[(i * db + j) * dz + k];
                if c == 0 {
                    continue;
                }
                let c = c as f64;
                let ratio = nz[k] as f64 * c / (naz[i * dz + k] as f64 * nbz[j * dz + k] as f64);
                acc += c * ratio.log2();
            }
        }
    }
    clamp_nonneg(acc / joint.total as f64)
}

/// SU = 2 I(X;Y) / (H(X) + H(Y)), defined as 0 when both entropies vanish.
pub fn symmetrical_uncertainty(table: &DiscreteTable, x: Var, y: Var) -> Result<f64> {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let joint = count(table, &[a, b])?;
    let mi = mi_from_joint(&joint);
    let hx = entropy(&count(table, &[a])?)?;
    let hy = entropy(&count(table, &[b])?)?;
    let denom = hx + hy;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * mi / denom).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const F0: Var = Var::Feature(0);
    const F1: Var = Var::Feature(1);
    const F2: Var = Var::Feature(2);
    const C: Var = Var::Class;

    fn xor8() -> DiscreteTable {
        synth::xor_table(2)
    }

    fn h(counts: &[u64]) -> f64 {
        entropy(&ContingencyCounts::from_cells(vec![counts.len()], counts.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn counts_single_column() {
        let t = DiscreteTable::new(vec![vec![0, 1, 0, 1]], vec![0, 0, 0, 0]).unwrap();
        let c = count(&t, &[F0]).unwrap();
        assert_eq!(c.cells, vec![2, 2]);
        assert_eq!(c.total, 4);
    }

    #[test]
    fn repeated_selector_is_diagonal() {
        let t = DiscreteTable::new(vec![vec![0, 2, 1, 2, 0]], vec![0, 1, 0, 1, 1]).unwrap();
        let c = count(&t, &[F0, F0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(c.get(&[i, j]), 0);
                }
            }
        }
    }

    #[test]
    fn xor_pair_counts_are_uniform() {
        let c = count(&xor8(), &[F0, F1]).unwrap();
        assert_eq!(c.cells, vec![2, 2, 2, 2]);
    }

    #[test]
    fn count_rejects_bad_selectors() {
        let t = xor8();
        assert!(count(&t, &[Var::Feature(5)]).is_err());
        assert!(count(&t, &[]).is_err());
        assert!(count(&t, &[F0, F1, C, F0]).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(h(&[2, 2]), 1.0, epsilon = 1e-15);
        assert_eq!(h(&[4, 0]), 0.0);
        // -1/4 log 1/4 - 3/4 log 3/4
        assert_abs_diff_eq!(h(&[1, 3]), 0.811_278_124_459_132_8, epsilon = 1e-12);
        let empty = ContingencyCounts::from_cells(vec![2], vec![0, 0]).unwrap();
        assert!(matches!(entropy(&empty), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn mutual_information_examples() {
        let same = DiscreteTable::new(vec![vec![0, 1, 0, 1], vec![0, 1, 0, 1]], vec![0, 0, 1, 1]).unwrap();
        assert_abs_diff_eq!(mutual_information(&same, F0, F1).unwrap(), 1.0, epsilon = 1e-12);
        // product design: F0 x F1 every pair once
        assert_eq!(mutual_information(&same, F0, C).unwrap(), 0.0);
        assert_eq!(mutual_information(&xor8(), F0, C).unwrap(), 0.0);
    }

    #[test]
    fn cmi_examples() {
        let t = xor8();
        assert_abs_diff_eq!(conditional_mutual_information(&t, F0, F1, C).unwrap(), 1.0, epsilon = 1e-12);

        let with_const = DiscreteTable::new(
            vec![vec![0, 1, 1, 0, 1, 0], vec![0, 1, 0, 0, 1, 1], vec![0; 6]],
            vec![0, 1, 1, 0, 0, 1],
        )
        .unwrap();
        let mi = mutual_information(&with_const, F0, F1).unwrap();
        let cmi = conditional_mutual_information(&with_const, F0, F1, F2).unwrap();
        assert_abs_diff_eq!(mi, cmi, epsilon = 1e-15);

        let cube = synth::product_table(&[2, 2, 2], 1);
        assert_eq!(conditional_mutual_information(&cube, F0, F1, F2).unwrap(), 0.0);
        assert!(conditional_mutual_information(&t, F0, F0, C).is_err());
    }

    #[test]
    fn su_examples() {
        let t = DiscreteTable::new(vec![vec![0, 1, 2, 1], vec![0, 1, 2, 1]], vec![0, 1, 0, 1]).unwrap();
        assert_abs_diff_eq!(symmetrical_uncertainty(&t, F0, F1).unwrap(), 1.0, epsilon = 1e-12);
        let cube = synth::product_table(&[2, 3], 2);
        assert_eq!(symmetrical_uncertainty(&cube, F0, F1).unwrap(), 0.0);
        assert_eq!(symmetrical_uncertainty(&xor8(), F0, C).unwrap(), 0.0);
        let constant = DiscreteTable::new(vec![vec![0, 0], vec![0, 0]], vec![0, 1]).unwrap();
        assert_eq!(symmetrical_uncertainty(&constant, F0, F1).unwrap(), 0.0);
    }

    /// Direct summation over the explicit joint probability table, built
    /// row by row without the contingency machinery.
    fn brute_mi(x: &[u32], y: &[u32]) -> f64 {
        let n = x.len() as f64;
        let mut pxy = std::collections::BTreeMap::new();
        let mut px = std::collections::BTreeMap::new();
        let mut py = std::collections::BTreeMap::new();
        for (&a, &b) in x.iter().zip(y) {
            *pxy.entry((a, b)).or_insert(0.0) += 1.0 / n;
            *px.entry(a).or_insert(0.0) += 1.0 / n;
            *py.entry(b).or_insert(0.0) += 1.0 / n;
        }
        pxy.iter()
            .map(|(&(a, b), &p)| p * (p / (px[&a] * py[&b])).log2())
            .sum()
    }

    fn brute_cmi(x: &[u32], y: &[u32], z: &[u32]) -> f64 {
        let n = x.len() as f64;
        let mut pxyz = std::collections::BTreeMap::new();
        let mut pxz = std::collections::BTreeMap::new();
        let mut pyz = std::collections::BTreeMap::new();
        let mut pz = std::collections::BTreeMap::new();
        for i in 0..x.len() {
            *pxyz.entry((x[i], y[i], z[i])).or_insert(0.0) += 1.0 / n;
            *pxz.entry((x[i], z[i])).or_insert(0.0) += 1.0 / n;
            *pyz.entry((y[i], z[i])).or_insert(0.0) += 1.0 / n;
            *pz.entry(z[i]).or_insert(0.0) += 1.0 / n;
        }
        pxyz.iter()
            .map(|(&(a, b, c), &p)| p * (pz[&c] * p / (pxz[&(a, c)] * pyz[&(b, c)])).log2())
            .sum()
    }

    fn table_strategy(max_arity: u32, max_rows: usize, features: usize) -> impl Strategy<Value = DiscreteTable> {
        (1..=max_rows, 1..=max_arity).prop_flat_map(move |(rows, arity)| {
            (
                proptest::collection::vec(proptest::collection::vec(0..arity, rows), features),
                proptest::collection::vec(0..arity, rows),
            )
                .prop_map(move |(cols, class)| {
                    DiscreteTable::with_arities(cols, vec![arity; features], class, arity).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn mi_is_exactly_symmetric(t in table_strategy(6, 200, 2)) {
            prop_assert_eq!(
                mutual_information(&t, F0, F1).unwrap(),
                mutual_information(&t, F1, F0).unwrap()
            );
            let su_a = symmetrical_uncertainty(&t, F0, C).unwrap();
            let su_b = symmetrical_uncertainty(&t, C, F0).unwrap();
            prop_assert_eq!(su_a, su_b);
            prop_assert!((0.0..=1.0).contains(&su_a));
        }

        #[test]
        fn mi_chain_rule(t in table_strategy(6, 200, 2)) {
            let hx = entropy(&count(&t, &[F0]).unwrap()).unwrap();
            let hy = entropy(&count(&t, &[F1]).unwrap()).unwrap();
            let hxy = entropy(&count(&t, &[F0, F1]).unwrap()).unwrap();
            let mi = mutual_information(&t, F0, F1).unwrap();
            prop_assert!((mi - (hx + hy - hxy)).abs() < 1e-9);
        }

        #[test]
        fn cmi_chain_rule(t in table_strategy(4, 150, 2)) {
            let h = |vars: &[Var]| entropy(&count(&t, vars).unwrap()).unwrap();
            let expected = h(&[F0, C]) + h(&[F1, C]) - h(&[F0, F1, C]) - h(&[C]);
            let cmi = conditional_mutual_information(&t, F0, F1, C).unwrap();
            prop_assert!(cmi >= 0.0);
            prop_assert!((cmi - expected).abs() < 1e-9);
        }

        #[test]
        fn interaction_identity(t in table_strategy(4, 300, 2)) {
            let lhs = mutual_information(&t, F0, F1).unwrap()
                - conditional_mutual_information(&t, F0, F1, C).unwrap();
            let rhs = mutual_information(&t, F0, C).unwrap()
                - conditional_mutual_information(&t, F0, C, F1).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn matches_brute_force_small_alphabets(t in table_strategy(3, 60, 2)) {
            let (x, y, c) = (t.feature(0), t.feature(1), t.class());
            prop_assert!((mutual_information(&t, F0, F1).unwrap() - brute_mi(x, y).max(0.0)).abs() < 1e-12);
            prop_assert!((conditional_mutual_information(&t, F0, F1, C).unwrap() - brute_cmi(x, y, c).max(0.0)).abs() < 1e-12);
        }
    }
}

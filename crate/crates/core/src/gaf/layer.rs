use crate::caps::Caps;
use crate::error::Result;

/// All multi-indices `α ∈ ℕⁿ` with `|α| = m`, in descending lexicographic order
/// (`(2,0), (1,1), (0,2)` for `n = m = 2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerIndex {
    pub n: usize,
    pub m: usize,
    pub indices: Vec<Vec<u32>>,
}

impl LayerIndex {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

/// `N(n,m) = C(m+n-1, n-1)`, saturating at `u64::MAX`.
pub fn layer_count(n: usize, m: usize) -> u64 {
    binomial((m + n - 1) as u64, (n - 1) as u64)
}

/// Number of coefficients of all layers `0..=m`: `C(m+n, n)`.
pub fn coefficients_up_to(n: usize, m: usize) -> u64 {
    binomial((m + n) as u64, n as u64)
}

fn binomial(top: u64, k: u64) -> u64 {
    let k = k.min(top - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (top - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

pub fn enumerate_layer(n: usize, m: usize, caps: &Caps) -> Result<LayerIndex> {
    assert!(n >= 1, "dimension must be positive");
    Caps::check("layer size", layer_count(n, m), caps.max_coefficients)?;
    let mut indices = Vec::with_capacity(layer_count(n, m) as usize);
    let mut current = vec![0u32; n];
    fill(&mut indices, &mut current, 0, m as u32);
    Ok(LayerIndex { n, m, indices })
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(out, current, pos + 1, remaining - a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_layers() {
        let l = enumerate_layer(2, 2, &Caps::default()).unwrap();
        assert_eq!(l.indices, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(
            enumerate_layer(1, 7, &Caps::default()).unwrap().indices,
            vec![vec![7]]
        );
        let l = enumerate_layer(3, 4, &Caps::default()).unwrap();
        assert_eq!(l.count(), 15);
        assert_eq!(layer_count(3, 4), 15);
        assert_eq!(
            enumerate_layer(4, 0, &Caps::default()).unwrap().indices,
            vec![vec![0; 4]]
        );
    }

    #[test]
    fn counts_match_enumeration() {
        for n in 1..=5 {
            let mut total = 0;
            for m in 0..=12 {
                let l = enumerate_layer(n, m, &Caps::default()).unwrap();
                assert_eq!(l.count() as u64, layer_count(n, m));
                assert!(l
                    .indices
                    .iter()
                    .all(|a| a.iter().sum::<u32>() as usize == m));
                let mut sorted = l.indices.clone();
                sorted.sort();
                sorted.reverse();
                assert_eq!(sorted, l.indices);
                total += l.count() as u64;
            }
            assert_eq!(total, coefficients_up_to(n, 12));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let caps = Caps {
            max_coefficients: 10,
            ..Caps::default()
        };
        assert!(enumerate_layer(3, 4, &caps).is_err());
    }
}

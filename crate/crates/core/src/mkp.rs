//! The multidimensional knapsack problem: instance data, evaluation,
//! feasibility, repair and an exhaustive oracle for tiny instances.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Largest item count [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// An immutable MKP instance: maximise `profits · x` subject to
/// `weights · x <= capacities`, `x` binary.
#[derive(Debug, Clone, PartialEq)]
pub struct MkpInstance {
    name: String,
    profits: Vec<f64>,
    /// Row-major, `m` rows of `n` coefficients.
    weights: Vec<f64>,
    capacities: Vec<f64>,
    known_optimum: Option<f64>,
    /// Item indices sorted by increasing pseudo-utility, ties by index.
    drop_order: Vec<usize>,
    /// Item indices sorted by decreasing pseudo-utility, ties by index.
    add_order: Vec<usize>,
}

impl MkpInstance {
    /// Builds and validates an instance. A `known_optimum` of `Some(0.0)` is
    /// stored as unknown.
    pub fn new(
        name: impl Into<String>,
        profits: Vec<f64>,
        weights: Vec<Vec<f64>>,
        capacities: Vec<f64>,
        known_optimum: Option<f64>,
    ) -> Result<Self> {
        let name = name.into();
        let n = profits.len();
        let m = capacities.len();
        if n == 0 {
            return Err(Error::InvalidInstance(format!("{name}: no items")));
        }
        if m == 0 {
            return Err(Error::InvalidInstance(format!("{name}: no constraints")));
        }
        if weights.len() != m {
            return Err(Error::InvalidInstance(format!(
                "{name}: {} weight rows for {m} constraints",
                weights.len()
            )));
        }
        if let Some(row) = weights.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "{name}: weight row {row} has {} entries, expected {n}",
                weights[row].len()
            )));
        }
        let all = profits.iter().chain(weights.iter().flatten()).chain(&capacities);
        if let Some(v) = all.into_iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "{name}: coefficient {v} is negative or not finite"
            )));
        }
        let known_optimum = match known_optimum {
            Some(v) if !v.is_finite() || v < 0.0 => {
                return Err(Error::InvalidInstance(format!("{name}: bad optimum {v}")))
            }
            Some(0.0) => None,
            other => other,
        };

        let weights: Vec<f64> = weights.into_iter().flatten().collect();
        let utility: Vec<f64> = (0..n)
            .map(|j| {
                let denom: f64 = (0..m)
                    .map(|i| {
                        let r = weights[i * n + j];
                        match (r > 0.0, capacities[i] > 0.0) {
                            (false, _) => 0.0,
                            (true, true) => r / capacities[i],
                            (true, false) => f64::INFINITY,
                        }
                    })
                    .sum();
                if denom == 0.0 {
                    f64::INFINITY
                } else {
                    profits[j] / denom
                }
            })
            .collect();
        let mut drop_order: Vec<usize> = (0..n).collect();
        drop_order.sort_by(|&a, &b| cmp_f64(utility[a], utility[b]).then(a.cmp(&b)));
        let mut add_order: Vec<usize> = (0..n).collect();
        add_order.sort_by(|&a, &b| cmp_f64(utility[b], utility[a]).then(a.cmp(&b)));

        Ok(Self {
            name,
            profits,
            weights,
            capacities,
            known_optimum,
            drop_order,
            add_order,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Item count `n`.
    pub fn n(&self) -> usize {
        self.profits.len()
    }

    /// Constraint count `m`.
    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn profits(&self) -> &[f64] {
        &self.profits
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    /// Coefficients of constraint `i`.
    pub fn weight_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n() + j]
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn with_known_optimum(mut self, optimum: Option<f64>) -> Self {
        self.known_optimum = optimum.filter(|v| *v > 0.0);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn max_profit(&self) -> f64 {
        self.profits.iter().copied().fold(0.0, f64::max)
    }

    /// Items in the order repair drops them (lowest pseudo-utility first).
    pub fn drop_order(&self) -> &[usize] {
        &self.drop_order
    }

    /// Items in the order repair tries to re-add them.
    pub fn add_order(&self) -> &[usize] {
        &self.add_order
    }

    /// Load `Σ_j r_ij x_j` of every constraint.
    pub fn loads(&self, bits: &[bool]) -> Result<Vec<f64>> {
        self.check_len(bits)?;
        Ok((0..self.m()).map(|i| self.load(i, bits)).collect())
    }

    pub(crate) fn load(&self, i: usize, bits: &[bool]) -> f64 {
        self.weight_row(i)
            .iter()
            .zip(bits)
            .filter(|(_, &x)| x)
            .map(|(r, _)| r)
            .sum()
    }

    pub(crate) fn fits(&self, bits: &[bool]) -> bool {
        (0..self.m()).all(|i| self.load(i, bits) <= self.capacities[i])
    }

    pub(crate) fn value(&self, bits: &[bool]) -> f64 {
        self.profits
            .iter()
            .zip(bits)
            .filter(|(_, &x)| x)
            .map(|(p, _)| p)
            .sum()
    }

    fn check_len(&self, bits: &[bool]) -> Result<()> {
        if bits.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                actual: bits.len(),
            });
        }
        Ok(())
    }
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// A binary decision vector together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    bits: Vec<bool>,
    fitness: f64,
}

impl Solution {
    /// Evaluates `bits` against `instance`. No feasibility check.
    pub fn evaluate(instance: &MkpInstance, bits: Vec<bool>) -> Result<Self> {
        let fitness = objective(instance, &bits)?;
        Ok(Self { bits, fitness })
    }

    /// The empty knapsack, always feasible.
    pub fn empty(instance: &MkpInstance) -> Self {
        Self {
            bits: vec![false; instance.n()],
            fitness: 0.0,
        }
    }

    /// Caller guarantees `fitness == objective(instance, &bits)`.
    pub(crate) fn from_parts(bits: Vec<bool>, fitness: f64) -> Self {
        Self { bits, fitness }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of selected items.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Renders the bit vector as a string of `0`/`1`.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// `Σ p_j x_j`, without any feasibility check.
pub fn objective(instance: &MkpInstance, bits: &[bool]) -> Result<f64> {
    instance.check_len(bits)?;
    Ok(instance.value(bits))
}

/// True iff every constraint load is within its capacity.
pub fn is_feasible(instance: &MkpInstance, bits: &[bool]) -> Result<bool> {
    instance.check_len(bits)?;
    Ok(instance.fits(bits))
}

/// Makes `bits` feasible.
///
/// A feasible input is returned untouched. Otherwise selected items are
/// dropped in increasing pseudo-utility order `p_j / Σ_i r_ij / b_i` until
/// every constraint holds, then a greedy pass re-adds items in decreasing
/// pseudo-utility order whenever they still fit.
pub fn repair(instance: &MkpInstance, bits: &[bool]) -> Result<Solution> {
    instance.check_len(bits)?;
    let mut bits = bits.to_vec();
    let mut loads: Vec<f64> = (0..instance.m()).map(|i| instance.load(i, &bits)).collect();
    let over = |loads: &[f64]| loads.iter().zip(instance.capacities()).any(|(l, b)| l > b);

    if !over(&loads) {
        let fitness = instance.value(&bits);
        return Ok(Solution::from_parts(bits, fitness));
    }

    for &j in instance.drop_order() {
        if !bits[j] {
            continue;
        }
        bits[j] = false;
        // Recompute rather than subtract so the result agrees with `is_feasible`.
        for (i, load) in loads.iter_mut().enumerate() {
            *load = instance.load(i, &bits);
        }
        if !over(&loads) {
            break;
        }
    }

    for &j in instance.add_order() {
        if bits[j] {
            continue;
        }
        let fits = (0..instance.m())
            .all(|i| loads[i] + instance.weight(i, j) <= instance.capacities()[i]);
        if fits {
            bits[j] = true;
            if instance.fits(&bits) {
                for (i, load) in loads.iter_mut().enumerate() {
                    *load = instance.load(i, &bits);
                }
            } else {
                bits[j] = false;
            }
        }
    }

    let fitness = instance.value(&bits);
    Ok(Solution::from_parts(bits, fitness))
}

/// Exhaustive search over all `2^n` vectors. Ties go to the
/// lexicographically smallest vector (`x_1` first, `0 < 1`).
pub fn brute_force_optimum(instance: &MkpInstance) -> Result<Solution> {
    let n = instance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let m = instance.m();

    // Gray-code walk with incremental sums. Running sums can drift for
    // fractional data, so they only screen candidates; every candidate is
    // re-evaluated exactly before it is compared.
    let scale: f64 = instance
        .profits()
        .iter()
        .chain(&instance.weights)
        .chain(instance.capacities())
        .sum::<f64>()
        .max(1.0);
    let slack = 1e-9 * scale;

    let mut bits = vec![false; n];
    let mut loads = vec![0.0; m];
    let mut value = 0.0;
    let mut best = Solution::empty(instance);

    let total: u64 = 1 << n;
    for step in 1..total {
        let j = step.trailing_zeros() as usize;
        let sign = if bits[j] { -1.0 } else { 1.0 };
        bits[j] = !bits[j];
        value += sign * instance.profits[j];
        for (i, load) in loads.iter_mut().enumerate() {
            *load += sign * instance.weight(i, j);
        }
        if value + slack < best.fitness {
            continue;
        }
        if loads
            .iter()
            .zip(instance.capacities())
            .any(|(l, b)| *l > b + slack)
        {
            continue;
        }
        if !instance.fits(&bits) {
            continue;
        }
        let exact = instance.value(&bits);
        let better = match cmp_f64(exact, best.fitness) {
            Ordering::Greater => true,
            Ordering::Equal => bits.as_slice() < best.bits.as_slice(),
            Ordering::Less => false,
        };
        if better {
            best = Solution::from_parts(bits.clone(), exact);
        }
    }
    Ok(best)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn inst(profits: &[f64], weights: &[&[f64]], caps: &[f64]) -> MkpInstance {
        MkpInstance::new(
            "t",
            profits.to_vec(),
            weights.iter().map(|r| r.to_vec()).collect(),
            caps.to_vec(),
            None,
        )
        .unwrap()
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn objective_examples() {
        let t = inst(&[3.0, 5.0, 8.0], &[&[1.0, 1.0, 1.0]], &[1.0]);
        assert_eq!(objective(&t, &bits("000")).unwrap(), 0.0);
        assert_eq!(objective(&t, &bits("101")).unwrap(), 11.0);
        assert!(matches!(
            objective(&t, &bits("10")),
            Err(Error::Dimension {
                expected: 3,
                actual: 2
            })
        ));
    }

    #[test]
    fn feasibility_examples() {
        let t = inst(&[1.0, 1.0], &[&[2.0, 2.0]], &[3.0]);
        assert!(is_feasible(&t, &bits("00")).unwrap());
        assert!(is_feasible(&t, &bits("10")).unwrap());
        assert!(!is_feasible(&t, &bits("11")).unwrap());
        assert!(is_feasible(&t, &bits("111")).is_err());
    }

    #[test]
    fn repair_drops_lowest_utility_first() {
        let t = inst(&[1.0, 10.0], &[&[1.0, 1.0]], &[1.0]);
        let s = repair(&t, &bits("11")).unwrap();
        assert_eq!(s.bits(), bits("01").as_slice());
        assert_eq!(s.fitness(), 10.0);
    }

    #[test]
    fn repair_keeps_feasible_input() {
        let t = inst(&[4.0, 3.0, 2.0], &[&[1.0, 1.0, 1.0]], &[2.0]);
        let s = repair(&t, &bits("001")).unwrap();
        assert_eq!(s.bits(), bits("001").as_slice());
        assert_eq!(s.fitness(), 2.0);
    }

    #[test]
    fn repair_readds_after_dropping() {
        // Items 1 and 2 tie on utility, so item 1 is dropped first; that is
        // not enough, item 2 goes too, and item 1 fits back in.
        let t = inst(&[10.0, 1.0, 3.0], &[&[2.0, 1.0, 3.0]], &[3.0]);
        let s = repair(&t, &bits("111")).unwrap();
        assert!(is_feasible(&t, s.bits()).unwrap());
        assert_eq!(s.bits(), bits("110").as_slice());
    }

    #[test]
    fn zero_capacity_items_are_dropped_first() {
        let t = inst(&[5.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 1.0]);
        assert_eq!(t.drop_order(), &[0, 1]);
        let s = repair(&t, &bits("11")).unwrap();
        assert_eq!(s.bits(), bits("01").as_slice());
    }

    #[test]
    fn weightless_items_are_dropped_last() {
        let t = inst(&[1.0, 1.0, 100.0], &[&[0.0, 1.0, 1.0]], &[1.0]);
        assert_eq!(t.drop_order(), &[1, 2, 0]);
        assert_eq!(t.add_order(), &[0, 2, 1]);
    }

    #[test]
    fn brute_force_examples() {
        let t = inst(&[5.0], &[&[1.0]], &[0.0]);
        let s = brute_force_optimum(&t).unwrap();
        assert_eq!((s.bits(), s.fitness()), (bits("0").as_slice(), 0.0));

        let t = inst(&[3.0, 4.0], &[&[1.0, 1.0]], &[1.0]);
        let s = brute_force_optimum(&t).unwrap();
        assert_eq!((s.bits(), s.fitness()), (bits("01").as_slice(), 4.0));
    }

    #[test]
    fn brute_force_prefers_lexicographically_smallest() {
        let t = inst(&[2.0, 2.0, 2.0], &[&[1.0, 1.0, 1.0]], &[1.0]);
        let s = brute_force_optimum(&t).unwrap();
        assert_eq!(s.bits(), bits("001").as_slice());
    }

    #[test]
    fn brute_force_matches_naive_enumeration_on_fractional_data() {
        let t = inst(
            &[600.1, 310.5, 1800.0, 18.6, 198.7, 0.3],
            &[&[20.5, 5.0, 100.0, 2.25, 4.0, 0.1], &[60.0, 3.0, 50.0, 4.0, 2.0, 0.7]],
            &[125.0, 110.0],
        );
        let mut best = (f64::MIN, Vec::new());
        for mask in 0u32..64 {
            let b: Vec<bool> = (0..6).map(|j| mask >> (5 - j) & 1 == 1).collect();
            if is_feasible(&t, &b).unwrap() {
                let v = objective(&t, &b).unwrap();
                if v > best.0 {
                    best = (v, b);
                }
            }
        }
        let s = brute_force_optimum(&t).unwrap();
        assert_eq!(s.fitness(), best.0);
        assert_eq!(s.bits(), best.1.as_slice());
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let n = BRUTE_FORCE_LIMIT + 1;
        let t = MkpInstance::new("big", vec![1.0; n], vec![vec![1.0; n]], vec![3.0], None).unwrap();
        assert!(matches!(
            brute_force_optimum(&t),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn instance_validation() {
        assert!(MkpInstance::new("a", vec![], vec![vec![]], vec![1.0], None).is_err());
        assert!(MkpInstance::new("a", vec![1.0], vec![], vec![], None).is_err());
        assert!(MkpInstance::new("a", vec![1.0], vec![vec![1.0, 2.0]], vec![1.0], None).is_err());
        assert!(MkpInstance::new("a", vec![-1.0], vec![vec![1.0]], vec![1.0], None).is_err());
        let t = MkpInstance::new("a", vec![1.0], vec![vec![1.0]], vec![1.0], Some(0.0)).unwrap();
        assert_eq!(t.known_optimum(), None);
    }
}

//! Hard thresholding, selective penalty, support sets and the
//! support-recovery checks.
//!
//! Magnitudes are compared squared. Ties at the `s`-th largest magnitude are
//! resolved conservatively: every tying coefficient is kept, so the output
//! support can exceed `s`.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::C64;

/// Sorted set of coefficient positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_superset(&self, other: &SupportSet) -> bool {
        other.indices.iter().all(|&i| self.contains(i))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_indices(iter.into_iter().collect())
    }
}

/// `{i : |v_i| > tol}`.
pub fn support(v: &[C64], tol: f64) -> SupportSet {
    let tol2 = tol * tol;
    SupportSet { indices: v.iter().enumerate().filter(|(_, c)| c.norm_sqr() > tol2).map(|(i, _)| i).collect() }
}

/// `‖v‖₀`.
pub fn l0_norm(v: &[C64]) -> usize {
    v.iter().filter(|c| c.norm_sqr() > 0.0).count()
}

/// Smallest nonzero magnitude, `None` for the zero vector.
pub fn min_nonzero_magnitude(v: &[C64]) -> Option<f64> {
    v.iter()
        .map(|c| c.norm_sqr())
        .filter(|m| *m > 0.0)
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))))
        .map(f64::sqrt)
}

pub fn squared_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

pub fn squared_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn check_budget(s: usize, len: usize) -> Result<()> {
    if s == 0 || s > len {
        Err(Error::SparsityOutOfRange { s, len })
    } else {
        Ok(())
    }
}

/// Squared magnitude of the `s`-th largest entry. Everything at or above it
/// survives `H_s`. Selection, not sorting: expected linear time.
pub fn threshold_level(v: &[C64], s: usize, scratch: &mut Vec<f64>) -> Result<f64> {
    check_budget(s, v.len())?;
    scratch.clear();
    scratch.extend(v.iter().map(|c| c.norm_sqr()));
    let pos = v.len() - s;
    let (_, nth, _) = scratch.select_nth_unstable_by(pos, f64::total_cmp);
    Ok(*nth)
}

/// `H_s` in place, reusing `scratch` for the magnitude buffer.
pub fn hard_threshold_in_place(v: &mut [C64], s: usize, scratch: &mut Vec<f64>) -> Result<()> {
    if s == v.len() {
        check_budget(s, v.len())?;
        return Ok(());
    }
    let level = threshold_level(v, s, scratch)?;
    for c in v.iter_mut() {
        if c.norm_sqr() < level {
            *c = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Keeps the `s` largest-magnitude coefficients (and any ties), zeroing the rest.
pub fn hard_threshold(v: &[C64], s: usize) -> Result<Vec<C64>> {
    let mut out = v.to_vec();
    hard_threshold_in_place(&mut out, s, &mut Vec::with_capacity(v.len()))?;
    Ok(out)
}

/// `x / |x|`, and `0` at `0`.
pub fn sign(x: C64) -> C64 {
    let m = x.norm();
    if m == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        x.unscale(m)
    }
}

pub fn complex_sign(v: &[C64]) -> Vec<C64> {
    v.iter().copied().map(sign).collect()
}

/// `P_s(v)`: zero on `support(H_s(v))`, `sgn(v_i)` elsewhere.
pub fn selective_penalty(v: &[C64], s: usize) -> Result<Vec<C64>> {
    let level = threshold_level(v, s, &mut Vec::with_capacity(v.len()))?;
    Ok(v.iter().map(|&c| if c.norm_sqr() >= level { C64::new(0.0, 0.0) } else { sign(c) }).collect())
}

/// Signal-to-error ratio `‖w‖² / ‖w − ŵ‖²`; infinite when `ŵ = w`.
pub fn ser(truth: &[C64], estimate: &[C64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let signal = squared_norm(truth);
    if signal == 0.0 {
        return Err(Error::ZeroReference);
    }
    let err = squared_distance(truth, estimate);
    Ok(if err == 0.0 { f64::INFINITY } else { signal / err })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryCheck {
    pub premise: bool,
    pub conclusion: bool,
}

impl RecoveryCheck {
    /// `premise ⟹ conclusion`.
    pub fn holds(&self) -> bool {
        !self.premise || self.conclusion
    }
}

fn sparsity_and_floor(truth: &[C64]) -> Result<(usize, f64)> {
    let q = min_nonzero_magnitude(truth).ok_or(Error::ZeroReference)?;
    Ok((l0_norm(truth), q))
}

/// Exact support recovery by `H_s` with `s = ‖w‖₀`.
///
/// Premise: `‖w − ŵ‖² < q²/2`, `q` the smallest nonzero `|w_i|`.
/// Conclusion: `support(H_s(ŵ)) = support(w)`.
pub fn strict_recovery_check(truth: &[C64], estimate: &[C64]) -> Result<RecoveryCheck> {
    check_len(truth.len(), estimate.len())?;
    let (s, q) = sparsity_and_floor(truth)?;
    let premise = squared_distance(truth, estimate) < q * q / 2.0;
    let conclusion = support(&hard_threshold(estimate, s)?, 0.0) == support(truth, 0.0);
    Ok(RecoveryCheck { premise, conclusion })
}

/// Relaxed recovery by `H_d`, `d = s + τ`.
///
/// Premise: `‖w − ŵ‖² ≤ q²(1 − 1/(τ+2))` and `‖ŵ‖₀ ≥ d`.
/// Conclusion: `support(H_d(ŵ)) ⊇ support(w)`.
pub fn relaxed_recovery_check(truth: &[C64], estimate: &[C64], tau: usize) -> Result<RecoveryCheck> {
    check_len(truth.len(), estimate.len())?;
    if tau == 0 {
        return Err(Error::invalid("tau must be positive"));
    }
    let (s, q) = sparsity_and_floor(truth)?;
    let d = s + tau;
    if d >= truth.len() {
        return Err(Error::invalid(alloc::format!("s + tau = {d} must be below the vector length {}", truth.len())));
    }
    let premise = squared_distance(truth, estimate) <= relaxed_bound(q, tau) && l0_norm(estimate) >= d;
    let conclusion = support(&hard_threshold(estimate, d)?, 0.0).is_superset(&support(truth, 0.0));
    Ok(RecoveryCheck { premise, conclusion })
}

/// `q²/2`, the exact-recovery error radius.
pub fn strict_bound(q: f64) -> f64 {
    q * q / 2.0
}

/// `q² (1 − 1/(τ+2))`, the relaxed error radius.
pub fn relaxed_bound(q: f64, tau: usize) -> f64 {
    q * q * (1.0 - 1.0 / (tau as f64 + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn re(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn threshold_examples() {
        let x0 = re(&[2.0, -2.0, 1.0, 0.0]);
        assert_eq!(hard_threshold(&x0, 2).unwrap(), re(&[2.0, -2.0, 0.0, 0.0]));
        // tie at the top: both kept
        assert_eq!(hard_threshold(&x0, 1).unwrap(), re(&[2.0, -2.0, 0.0, 0.0]));
        assert_eq!(hard_threshold(&x0, 4).unwrap(), x0);
        let v = vec![C64::new(3.0, 4.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0)];
        assert_eq!(hard_threshold(&v, 1).unwrap(), vec![C64::new(3.0, 4.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    }

    #[test]
    fn threshold_budget_is_checked() {
        let v = re(&[1.0, 2.0]);
        assert_eq!(hard_threshold(&v, 0), Err(Error::SparsityOutOfRange { s: 0, len: 2 }));
        assert_eq!(hard_threshold(&v, 3), Err(Error::SparsityOutOfRange { s: 3, len: 2 }));
        assert!(selective_penalty(&v, 0).is_err());
    }

    #[test]
    fn fewer_nonzeros_than_budget() {
        let v = re(&[0.0, 3.0, 0.0, 0.0]);
        let h = hard_threshold(&v, 3).unwrap();
        assert_eq!(h, v);
        assert_eq!(support(&h, 0.0).len(), 1);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign(C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        assert_eq!(sign(C64::new(-3.0, 0.0)), C64::new(-1.0, 0.0));
        let s = sign(C64::new(3.0, 4.0));
        assert!((s - C64::new(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn penalty_examples() {
        let x0 = re(&[2.0, -2.0, 1.0, 0.0]);
        assert_eq!(selective_penalty(&x0, 2).unwrap(), re(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(selective_penalty(&x0, 1).unwrap(), re(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(selective_penalty(&re(&[0.0; 5]), 2).unwrap(), re(&[0.0; 5]));
    }

    #[test]
    fn support_examples() {
        assert_eq!(support(&re(&[2.0, -2.0, 0.0, 0.0]), 0.0).as_slice(), &[0, 1]);
        assert_eq!(support(&re(&[1e-16, 1.0]), 1e-12).as_slice(), &[1]);
        let s = SupportSet::from_indices(vec![5, 1, 5, 3]);
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert!(s.is_superset(&SupportSet::from_indices(vec![3, 5])));
        assert!(!s.is_superset(&SupportSet::from_indices(vec![2])));
    }

    #[test]
    fn ser_examples() {
        let w = re(&[1.0, -2.0, 0.0]);
        assert_eq!(ser(&w, &re(&[0.0; 3])).unwrap(), 1.0);
        assert_eq!(ser(&w, &w).unwrap(), f64::INFINITY);
        assert_eq!(ser(&re(&[0.0; 3]), &w), Err(Error::ZeroReference));
    }

    #[test]
    fn strict_recovery_examples() {
        let w = re(&[1.0, 0.0]);
        let inside = strict_recovery_check(&w, &re(&[0.8, 0.3])).unwrap();
        assert_eq!(inside, RecoveryCheck { premise: true, conclusion: true });
        let split = strict_recovery_check(&w, &re(&[0.49, 0.51])).unwrap();
        assert_eq!(split, RecoveryCheck { premise: false, conclusion: false });
        assert_eq!(strict_recovery_check(&w, &w).unwrap(), RecoveryCheck { premise: true, conclusion: true });
        assert!(strict_recovery_check(&re(&[0.0, 0.0]), &w).is_err());
    }

    #[test]
    fn relaxed_recovery_examples() {
        let w = re(&[1.0, 0.0, 0.0, 0.0]);
        let c = relaxed_recovery_check(&w, &re(&[0.6, 0.3, 0.3, 0.3]), 1).unwrap();
        assert_eq!(c, RecoveryCheck { premise: true, conclusion: true });
        let padded = re(&[1.0, 0.5, 0.25, 0.0]);
        let c = relaxed_recovery_check(&w, &padded, 1).unwrap();
        assert!(c.conclusion);
        assert!(relaxed_recovery_check(&w, &padded, 3).is_err());
        assert!(relaxed_recovery_check(&w, &padded, 0).is_err());
    }

    #[test]
    fn relaxed_bound_tends_to_q_squared() {
        let q = 0.7;
        let mut prev = strict_bound(q);
        for tau in 1..200 {
            let b = relaxed_bound(q, tau);
            assert!(b > prev && b < q * q);
            prev = b;
        }
        assert!(q * q - relaxed_bound(q, 10_000) < 1e-4);
    }

    #[test]
    fn zeroed_entries_are_exact() {
        let mut v: Vec<C64> = (0..50).map(|i| C64::new((i as f64).sin() * 1e-3, 0.3 * i as f64)).collect();
        hard_threshold_in_place(&mut v, 7, &mut Vec::new()).unwrap();
        let nz = v.iter().filter(|c| **c != C64::new(0.0, 0.0)).count();
        assert_eq!(nz, 7);
        assert!(v.iter().all(|c| *c == C64::new(0.0, 0.0) || c.norm() > 0.0));
    }
}

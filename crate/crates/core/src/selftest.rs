//! Identity suite run over every preset: Wronskian, Calderón, square, inverse,
//! `B·MTF_loc = diag(S², S²)` and the limit-symbol identities.

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{max_abs_diff, DenseMatrix};
use crate::scenarios::all_scenarios;
use crate::specfun::riccati_table;
use crate::symbols::{asymptotic_symbols, swap_matrix, PairSymbols, SymbolError};

/// Deliberate corruptions used to check that the suite detects broken symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Double-layer sign pattern `diag(+1, +1)` instead of `diag(-1, +1)`.
    KSymbolSign,
}

impl Fault {
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "k_symbol_sign" => Some(Fault::KSymbolSign),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelftestConfig {
    pub calderon_n_max: usize,
    pub inverse_n_max: usize,
    pub wronskian_n_max: usize,
    pub fault: Option<Fault>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            calderon_n_max: 500,
            inverse_n_max: 300,
            wronskian_n_max: 1000,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Scenario and mode where the largest defect occurred.
    pub worst_case: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn failing(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Worst {
    defect: f64,
    at: String,
}

impl Worst {
    fn update(&mut self, defect: f64, at: impl FnOnce() -> String) {
        // NaN defects must count as failures.
        if defect.is_nan() || defect > self.defect || (self.at.is_empty() && defect == self.defect) {
            self.defect = if defect.is_nan() { f64::INFINITY } else { defect };
            self.at = at();
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        if other.defect > self.defect || self.at.is_empty() {
            self = other;
        }
        self
    }

    fn into_check(self, name: &'static str, tolerance: f64) -> CheckResult {
        CheckResult {
            name,
            passed: self.defect <= tolerance,
            max_defect: self.defect,
            tolerance,
            worst_case: self.at,
        }
    }
}

pub fn run_selftest(config: &SelftestConfig) -> Result<SelftestReport, SymbolError> {
    let scenarios = all_scenarios();
    let pattern = match config.fault {
        Some(Fault::KSymbolSign) => [1.0, 1.0],
        None => crate::symbols::K_PATTERN,
    };
    let n_max = config.calderon_n_max.max(config.inverse_n_max);
    let id4 = DenseMatrix::identity(4);
    let id8 = DenseMatrix::identity(8);

    let mut wronskian = Worst::default();
    let mut kappas: Vec<f64> = scenarios
        .iter()
        .flat_map(|s| [s.media.outer.kappa, s.media.inner.kappa])
        .collect();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    for kappa in kappas {
        let table = riccati_table(config.wronskian_n_max, num_complex::Complex64::new(kappa, 0.0))?;
        let (n, defect) = table.max_wronskian_defect();
        wronskian.update(defect, || format!("kappa = {kappa}, n = {n}"));
    }

    let mut calderon = Worst::default();
    let mut square = Worst::default();
    let mut inverse = Worst::default();
    let mut b_identity = Worst::default();
    let mut limits = Worst::default();
    for s in &scenarios {
        let symbols = PairSymbols::new(s.media, n_max)?.with_k_pattern(pattern);
        let per_mode: Vec<[Worst; 4]> = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                let mut w: [Worst; 4] = Default::default();
                let at = || format!("{}, n = {n}", s.name);
                if n <= config.calderon_n_max {
                    for a in [symbols.a_outer(n), symbols.a_inner(n)] {
                        w[0].update(max_abs_diff(&a.matmul(&a), &id4), at);
                    }
                    let mtf = symbols.mtf(n);
                    let k = symbols.k_difference(n);
                    let expected = &id8.scale_real(2.0) + &swap_matrix(4).matmul(&DenseMatrix::block_diag(&k, &k));
                    w[1].update(max_abs_diff(&mtf.matmul(&mtf), &expected), at);
                    let s2 = symbols.stf(n).matmul(&symbols.stf(n));
                    let expected = DenseMatrix::block_diag(&s2, &s2);
                    w[3].update(max_abs_diff(&symbols.b(n).matmul(&mtf), &expected), at);
                }
                if n <= config.inverse_n_max {
                    let defect = match symbols.mtf_inverse(n) {
                        Ok(inv) => max_abs_diff(&symbols.mtf(n).matmul(&inv), &id8),
                        Err(_) => f64::INFINITY,
                    };
                    w[2].update(defect, at);
                }
                w
            })
            .collect();
        for [c, q, i, b] in per_mode {
            calderon = calderon.merge(c);
            square = square.merge(q);
            inverse = inverse.merge(i);
            b_identity = b_identity.merge(b);
        }

        let asym = asymptotic_symbols(&s.media);
        for a in [&asym.a_tilde_0, &asym.a_tilde_1] {
            limits.update(max_abs_diff(&a.matmul(a), &id4), || format!("{}, A~ squared", s.name));
        }
        let m2 = asym.mtf_inf.matmul(&asym.mtf_inf);
        let lhs = &id8.scale_real(2.0) - &m2;
        let k2 = asym.k_tilde.matmul(&asym.k_tilde);
        limits.update(
            max_abs_diff(&lhs.matmul(&lhs), &DenseMatrix::block_diag(&k2, &k2)),
            || format!("{}, limit square", s.name),
        );
    }

    let checks = vec![
        wronskian.into_check("wronskian", 1e-10),
        calderon.into_check("calderon", 1e-10),
        square.into_check("square", 1e-10),
        inverse.into_check("inverse", 1e-9),
        b_identity.into_check("b_identity", 1e-9),
        limits.into_check("limit_symbols", 1e-12),
    ];
    Ok(SelftestReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SelftestConfig {
        SelftestConfig {
            calderon_n_max: 40,
            inverse_n_max: 40,
            wronskian_n_max: 100,
            fault: None,
        }
    }

    #[test]
    fn clean_build_passes() {
        let report = run_selftest(&small()).unwrap();
        assert!(report.passed, "{:?}", report.checks);
        assert_eq!(report.checks.len(), 6);
    }

    #[test]
    fn sign_fault_is_detected() {
        let config = SelftestConfig {
            fault: Some(Fault::KSymbolSign),
            ..small()
        };
        let report = run_selftest(&config).unwrap();
        assert!(!report.passed);
        let failing: Vec<_> = report.failing().map(|c| c.name).collect();
        assert!(failing.contains(&"calderon"), "{failing:?}");
        assert!(Fault::from_tag("k_symbol_sign").is_some());
        assert!(Fault::from_tag("other").is_none());
    }
}

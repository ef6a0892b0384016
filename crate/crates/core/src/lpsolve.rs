//! Configuration LP for winner determination and an exact simplex solver.
//!
//! The LP has one variable `z[i,S]` per buyer `i` and non-empty bundle `S`
//! of available items:
//!
//! ```text
//! max   sum v_i(S) z[i,S]
//! s.t.  sum_S z[i,S]          <= 1   for every buyer i
//!       sum_{i, S ∋ j} z[i,S] <= 1   for every available item j
//!       z >= 0
//! ```
//!
//! All coefficients are integers, so the solver pivots over exact rationals
//! using Bland's rule. The origin is feasible, so no phase one is needed.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::LpError;
use crate::netgraph::NodeId;
use crate::valuation::{Bundle, Money, ValuationFn};

/// Upper bound on the number of LP variables accepted by [`build_config_lp`].
pub const MAX_LP_VARS: usize = 50_000;

const MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpVar {
    /// Index into [`ConfigLp::buyers`].
    pub buyer: usize,
    pub bundle: Bundle,
    pub value: Money,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigLp {
    pub avail: Bundle,
    pub buyers: Vec<NodeId>,
    pub vars: Vec<LpVar>,
}

impl ConfigLp {
    /// Constraint rows: one per buyer, then one per available item.
    pub fn row_count(&self) -> usize {
        self.buyers.len() + self.avail.cardinality()
    }

    fn item_rows(&self) -> Vec<usize> {
        self.avail.items().collect()
    }

    /// Rows touched by variable `k` (all with coefficient 1).
    fn column_rows(&self, k: usize, items: &[usize]) -> Vec<usize> {
        let var = &self.vars[k];
        let mut rows = vec![var.buyer];
        for (r, &j) in items.iter().enumerate() {
            if var.bundle.contains(j) {
                rows.push(self.buyers.len() + r);
            }
        }
        rows
    }
}

impl fmt::Display for ConfigLp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: &LpVar| format!("z[{},{}]", self.buyers[v.buyer], v.bundle);
        let terms: Vec<String> = self
            .vars
            .iter()
            .map(|v| format!("{} {}", v.value, name(v)))
            .collect();
        writeln!(
            f,
            "max: {}",
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join(" + ")
            }
        )?;
        for (bi, b) in self.buyers.iter().enumerate() {
            let lhs: Vec<String> = self
                .vars
                .iter()
                .filter(|v| v.buyer == bi)
                .map(name)
                .collect();
            if !lhs.is_empty() {
                writeln!(f, "buyer {b}: {} <= 1", lhs.join(" + "))?;
            }
        }
        for j in self.avail.items() {
            let lhs: Vec<String> = self
                .vars
                .iter()
                .filter(|v| v.bundle.contains(j))
                .map(name)
                .collect();
            if !lhs.is_empty() {
                writeln!(f, "item {}: {} <= 1", j + 1, lhs.join(" + "))?;
            }
        }
        Ok(())
    }
}

/// Builds the configuration LP over `avail` for the given buyers.
pub fn build_config_lp(
    avail: Bundle,
    buyers: &[(NodeId, &ValuationFn)],
) -> Result<ConfigLp, LpError> {
    let per_buyer = (1usize << avail.cardinality()) - 1;
    let total = buyers.len().saturating_mul(per_buyer);
    if total > MAX_LP_VARS {
        return Err(LpError::TooLarge {
            vars: total,
            limit: MAX_LP_VARS,
        });
    }
    let mut vars = Vec::with_capacity(total);
    for (bi, (_, v)) in buyers.iter().enumerate() {
        for s in avail.subsets().skip(1) {
            vars.push(LpVar {
                buyer: bi,
                bundle: s,
                value: v.evaluate(s)?,
            });
        }
    }
    Ok(ConfigLp {
        avail,
        buyers: buyers.iter().map(|(id, _)| *id).collect(),
        vars,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub optimum: BigRational,
    /// Primal value per variable, in [`ConfigLp::vars`] order.
    pub primal: Vec<BigRational>,
    /// Dual value per constraint row (buyers first, then items).
    pub dual: Vec<BigRational>,
}

impl LpSolution {
    pub fn optimum_f64(&self) -> f64 {
        ratio_to_f64(&self.optimum)
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Solves the LP to optimality over exact rationals.
pub fn solve(lp: &ConfigLp) -> Result<LpSolution, LpError> {
    let rows = lp.row_count();
    let items = lp.item_rows();
    // Zero-valued columns can always be set to zero without loss.
    let cols: Vec<usize> = (0..lp.vars.len())
        .filter(|&k| lp.vars[k].value > 0)
        .collect();
    let n = cols.len();
    let width = n + rows + 1; // structural, slack, rhs
    let rhs = width - 1;

    let mut t: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); width]; rows + 1];
    for (c, &k) in cols.iter().enumerate() {
        for r in lp.column_rows(k, &items) {
            t[r][c] = BigRational::one();
        }
        t[rows][c] = -rat(lp.vars[k].value);
    }
    for r in 0..rows {
        t[r][n + r] = BigRational::one();
        t[r][rhs] = BigRational::one();
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();

    let mut pivots = 0;
    // Bland: lowest-index column with a negative reduced cost enters.
    while let Some(enter) = (0..n + rows).find(|&c| t[rows][c].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..rows {
            if t[r][enter].is_positive() {
                let ratio = &t[r][rhs] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Bounded by construction: every column has a positive buyer row.
        let (pr, _) = leave.expect("configuration LP is bounded");
        pivot(&mut t, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(LpError::PivotLimit(MAX_PIVOTS));
        }
    }

    let mut primal = vec![BigRational::zero(); lp.vars.len()];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            primal[cols[b]] = t[r][rhs].clone();
        }
    }
    let dual = (0..rows).map(|r| t[rows][n + r].clone()).collect();
    Ok(LpSolution {
        optimum: t[rows][rhs].clone(),
        primal,
        dual,
    })
}

fn pivot(t: &mut [Vec<BigRational>], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for v in t[pr].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let prow = t[pr].clone();
    for (r, row) in t.iter_mut().enumerate() {
        if r == pr || row[pc].is_zero() {
            continue;
        }
        let factor = row[pc].clone();
        for (v, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v -= &factor * p;
            }
        }
    }
}

/// Checks primal feasibility, dual feasibility and equal objectives. A
/// passing certificate proves `sol.optimum` is the exact LP optimum.
pub fn certify(lp: &ConfigLp, sol: &LpSolution) -> bool {
    let rows = lp.row_count();
    let items = lp.item_rows();
    if sol.primal.len() != lp.vars.len() || sol.dual.len() != rows {
        return false;
    }
    let mut load = vec![BigRational::zero(); rows];
    let mut primal_obj = BigRational::zero();
    for (k, z) in sol.primal.iter().enumerate() {
        if z.is_negative() {
            return false;
        }
        let col = lp.column_rows(k, &items);
        for &r in &col {
            load[r] += z;
        }
        primal_obj += z * rat(lp.vars[k].value);
        let reduced: BigRational = col.iter().map(|&r| sol.dual[r].clone()).sum();
        if reduced < rat(lp.vars[k].value) {
            return false;
        }
    }
    if load.iter().any(|l| *l > BigRational::one()) || sol.dual.iter().any(Signed::is_negative) {
        return false;
    }
    let dual_obj: BigRational = sol.dual.iter().cloned().sum();
    primal_obj == sol.optimum && dual_obj == sol.optimum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(items: usize, f: impl Fn(Bundle) -> Money) -> ValuationFn {
        ValuationFn::Table {
            items,
            values: Bundle::all(items).map(f).collect(),
        }
    }

    #[test]
    fn single_variable() {
        let v = ValuationFn::UnitDemand {
            items: 1,
            value: 10,
        };
        let lp = build_config_lp(Bundle::full(1), &[(NodeId(1), &v)]).unwrap();
        assert_eq!(lp.vars.len(), 1);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.optimum, rat(10));
        assert!(certify(&lp, &sol));
    }

    #[test]
    fn empty_stat_group() {
        let lp = build_config_lp(Bundle::full(3), &[]).unwrap();
        let sol = solve(&lp).unwrap();
        assert!(sol.optimum.is_zero());
        assert!(certify(&lp, &sol));
    }

    #[test]
    fn zero_objective() {
        let v = ValuationFn::zero(2);
        let lp = build_config_lp(Bundle::full(2), &[(NodeId(1), &v), (NodeId(2), &v)]).unwrap();
        let sol = solve(&lp).unwrap();
        assert!(sol.optimum.is_zero());
    }

    #[test]
    fn pair_cover_half_integral() {
        // three buyers over items {1,2,3}, each wanting a distinct pair
        let pairs = ["110", "011", "101"];
        let vals: Vec<ValuationFn> = pairs
            .iter()
            .map(|p| {
                let d: Bundle = p.parse().unwrap();
                table(3, move |x| if x == d { 1 } else { 0 })
            })
            .collect();
        let buyers: Vec<_> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| (NodeId(i as u32 + 1), v))
            .collect();
        let lp = build_config_lp(Bundle::full(3), &buyers).unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.optimum, BigRational::new(3.into(), 2.into()));
        assert!(certify(&lp, &sol));
        assert!((sol.optimum_f64() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn respects_availability() {
        let v = table(3, |x| x.cardinality() as Money * 10);
        let avail: Bundle = "101".parse().unwrap();
        let lp = build_config_lp(avail, &[(NodeId(1), &v)]).unwrap();
        assert_eq!(lp.vars.len(), 3);
        assert!(lp.vars.iter().all(|var| var.bundle.is_subset(avail)));
        assert_eq!(solve(&lp).unwrap().optimum, rat(20));
    }

    #[test]
    fn size_bound() {
        let v = ValuationFn::zero(16);
        let buyers: Vec<_> = (0..1).map(|i| (NodeId(i), &v)).collect();
        assert!(build_config_lp(Bundle::full(16), &buyers).is_err());
    }

    #[test]
    fn dump_format() {
        let v = ValuationFn::UnitDemand { items: 2, value: 3 };
        let lp = build_config_lp(Bundle::full(2), &[(NodeId(4), &v)]).unwrap();
        let text = lp.to_string();
        assert!(text.starts_with("max: 3 z[4,10] + 3 z[4,01] + 3 z[4,11]"));
        assert!(text.contains("buyer 4: z[4,10] + z[4,01] + z[4,11] <= 1"));
        assert!(text.contains("item 2: z[4,01] + z[4,11] <= 1"));
    }
}

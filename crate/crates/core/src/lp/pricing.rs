//! Column pricing: find `S` minimising `f(S) − Σ_{i∈S} a_i` for per-element
//! dual rewards `a`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::ratiotsp::{self, TourTable};
use crate::setfn::{Family, OrderingCost, MAX_ENUMERATION_ELEMENTS};
use crate::subset::ElementSet;

/// Reduced costs above `-PRICING_TOL` are treated as non-negative.
pub const PRICING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PricingMode {
    /// Evaluate every subset (any family, `N ≤ 16`).
    ExactEnumeration,
    /// Prize-collecting Held-Karp over the positive-reward retailers (TSP only).
    ExactTspDp,
    /// Minimum-ratio TSP by the k-TSP scaling wrapper; certifies feasibility
    /// of the duals scaled by `1/γ` (TSP only).
    GargApprox,
}

impl PricingMode {
    pub fn name(self) -> &'static str {
        match self {
            PricingMode::ExactEnumeration => "exact",
            PricingMode::ExactTspDp => "tsp-dp",
            PricingMode::GargApprox => "garg",
        }
    }
}

impl fmt::Display for PricingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pricing oracle bound to one ordering cost, with its lookup tables built once.
pub struct Pricer<'a> {
    cost: &'a OrderingCost,
    mode: PricingMode,
    values: Option<Vec<f64>>,
    tours: Option<TourTable>,
}

impl<'a> Pricer<'a> {
    pub fn new(cost: &'a OrderingCost, mode: PricingMode) -> Result<Self> {
        let family = cost.family();
        match mode {
            PricingMode::ExactEnumeration => {
                let n = cost.num_elements();
                if n > MAX_ENUMERATION_ELEMENTS {
                    return Err(Error::SizeCap {
                        what: "enumeration pricing ground set",
                        limit: MAX_ENUMERATION_ELEMENTS as u64,
                        actual: n as u64,
                    });
                }
                Ok(Pricer { cost, mode, values: Some(cost.tabulate()?), tours: None })
            }
            PricingMode::ExactTspDp | PricingMode::GargApprox if family != Family::MetricTsp => {
                Err(Error::PricingMismatch { mode: mode.name(), family: family.name() })
            }
            PricingMode::ExactTspDp => Ok(Pricer { cost, mode, values: None, tours: None }),
            PricingMode::GargApprox => {
                let metric = cost.metric().expect("TSP family has a metric");
                Ok(Pricer { cost, mode, values: None, tours: Some(TourTable::build(metric)) })
            }
        }
    }

    pub fn mode(&self) -> PricingMode {
        self.mode
    }

    /// Approximation guarantee of the LP value reached with this oracle.
    pub fn gamma(&self) -> f64 {
        match self.mode {
            PricingMode::GargApprox => {
                let n = self.cost.num_elements() as f64;
                if n >= 2.0 {
                    2.0 / (1.0 - 1.0 / n)
                } else {
                    2.0
                }
            }
            _ => 1.0,
        }
    }

    /// A set with reduced cost below `-PRICING_TOL`, or `None` when the oracle
    /// certifies there is none (exact modes) or that the `1/γ`-scaled duals
    /// are feasible (ratio mode).
    pub fn price(&self, rewards: &[f64]) -> Result<Option<(ElementSet, f64)>> {
        debug_assert_eq!(rewards.len(), self.cost.num_elements());
        if rewards.iter().all(|&a| a <= 0.0) {
            return Ok(None);
        }
        let found = match self.mode {
            PricingMode::ExactEnumeration => {
                enumerate_min(self.values.as_ref().expect("tabulated values"), rewards)
            }
            PricingMode::ExactTspDp => {
                ratiotsp::prize_collecting_min(self.cost.metric().expect("TSP metric"), rewards)?
            }
            PricingMode::GargApprox => {
                let tours = self.tours.as_ref().expect("tour table");
                ratiotsp::garg_with_table(tours, rewards)
                    .filter(|sol| sol.ratio < 1.0)
                    .map(|sol| (sol.subset, tours.length(sol.subset) - reward_of(rewards, sol.subset)))
            }
        };
        Ok(found.filter(|&(_, rc)| rc < -PRICING_TOL))
    }
}

fn reward_of(rewards: &[f64], set: ElementSet) -> f64 {
    set.iter().map(|i| rewards[i - 1]).sum()
}

/// Minimum of `values[S] − a(S)` over non-empty `S`, lexicographically
/// smallest among ties.
fn enumerate_min(values: &[f64], rewards: &[f64]) -> Option<(ElementSet, f64)> {
    let full = values.len();
    let mut reward = vec![0.0; full];
    let mut best: Option<(ElementSet, f64)> = None;
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        reward[mask] = reward[mask & (mask - 1)] + rewards[low];
        let value = values[mask] - reward[mask];
        let set = ElementSet::from_bits(mask as u64);
        let replace = match best {
            None => true,
            Some((b, bv)) => value < bv - 1e-12 || (value <= bv + 1e-12 && set.lex_cmp(b) == Ordering::Less),
        };
        if replace {
            best = Some((set, value));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::Metric;

    fn triangle_cost() -> OrderingCost {
        OrderingCost::metric_tsp(
            Metric::new(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_rewards_price_nothing() {
        let f = OrderingCost::additive(5.0, vec![1.0, 1.0]).unwrap();
        let p = Pricer::new(&f, PricingMode::ExactEnumeration).unwrap();
        assert_eq!(p.price(&[0.0, 0.0]).unwrap(), None);
    }

    #[test]
    fn additive_single_element_column() {
        let f = OrderingCost::additive(5.0, vec![1.0, 1.0]).unwrap();
        let p = Pricer::new(&f, PricingMode::ExactEnumeration).unwrap();
        let (s, rc) = p.price(&[7.0, 0.0]).unwrap().unwrap();
        assert_eq!(s, ElementSet::singleton(1));
        assert!((rc + 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_pair_in_every_mode() {
        let f = triangle_cost();
        for mode in [PricingMode::ExactEnumeration, PricingMode::ExactTspDp, PricingMode::GargApprox] {
            let p = Pricer::new(&f, mode).unwrap();
            let (s, rc) = p.price(&[2.0, 2.0]).unwrap().unwrap();
            assert_eq!(s, ElementSet::full(2), "{mode}");
            assert!((rc + 1.0).abs() < 1e-12, "{mode}");
        }
    }

    #[test]
    fn tsp_modes_reject_other_families() {
        let f = OrderingCost::additive(5.0, vec![1.0]).unwrap();
        assert!(matches!(Pricer::new(&f, PricingMode::GargApprox), Err(Error::PricingMismatch { .. })));
        assert!(matches!(Pricer::new(&f, PricingMode::ExactTspDp), Err(Error::PricingMismatch { .. })));
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // f(S) = |S| with unit rewards: every non-empty set has reduced cost 0
        let f = OrderingCost::cardinality(vec![0.0, 1.0, 2.0]).unwrap();
        let p = Pricer::new(&f, PricingMode::ExactEnumeration).unwrap();
        let values = f.tabulate().unwrap();
        let (s, v) = enumerate_min(&values, &[1.0, 1.0]).unwrap();
        assert_eq!((s, v), (ElementSet::singleton(1), 0.0));
        assert_eq!(p.price(&[1.0, 1.0]).unwrap(), None);
    }
}

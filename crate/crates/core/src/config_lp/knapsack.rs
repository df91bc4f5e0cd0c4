//! 0/1 knapsack over rational weights and profits.
//!
//! Depth-first branch and bound. Items are visited by decreasing profit
//! density and each node is bounded by the fractional (LP) relaxation of the
//! remaining items.

use crate::instance::Rational;

#[derive(Debug, Clone)]
pub struct KnapsackItem {
    pub id: usize,
    pub weight: Rational,
    pub profit: Rational,
}

#[derive(Debug, Clone)]
pub struct KnapsackSolution {
    pub value: Rational,
    /// Ids of the chosen items, ascending.
    pub chosen: Vec<usize>,
}

struct Search<'a> {
    items: &'a [KnapsackItem],
    best_value: Rational,
    best: Vec<bool>,
    current: Vec<bool>,
}

impl Search<'_> {
    fn bound(&self, from: usize, capacity: &Rational, value: &Rational) -> Rational {
        let mut cap = capacity.clone();
        let mut bound = value.clone();
        for item in &self.items[from..] {
            if item.weight <= cap {
                cap -= &item.weight;
                bound += &item.profit;
            } else {
                bound += &item.profit * &cap / &item.weight;
                break;
            }
        }
        bound
    }

    fn dfs(&mut self, k: usize, capacity: Rational, value: Rational) {
        if value > self.best_value {
            self.best_value = value.clone();
            self.best.clone_from(&self.current);
        }
        if k == self.items.len() || self.bound(k, &capacity, &value) <= self.best_value {
            return;
        }
        let item = &self.items[k];
        if item.weight <= capacity {
            self.current[k] = true;
            self.dfs(k + 1, &capacity - &item.weight, &value + &item.profit);
            self.current[k] = false;
        }
        self.dfs(k + 1, capacity, value);
    }
}

/// Maximizes total profit subject to total weight `≤ capacity`. Items with
/// non-positive profit or weight above the capacity are never chosen.
pub fn max_profit(items: &[KnapsackItem], capacity: &Rational) -> KnapsackSolution {
    let mut useful: Vec<KnapsackItem> = items
        .iter()
        .filter(|it| it.profit.is_positive() && it.weight <= *capacity)
        .cloned()
        .collect();
    assert!(
        useful.iter().all(|it| it.weight.is_positive()),
        "weights must be positive"
    );
    // profit/weight descending; ties by id for determinism
    useful.sort_by(|a, b| {
        let lhs = &b.profit * &a.weight;
        let rhs = &a.profit * &b.weight;
        lhs.cmp(&rhs).then(a.id.cmp(&b.id))
    });
    let n = useful.len();
    let mut search = Search {
        items: &useful,
        best_value: Rational::zero(),
        best: vec![false; n],
        current: vec![false; n],
    };
    search.dfs(0, capacity.clone(), Rational::zero());
    let mut chosen: Vec<usize> = useful
        .iter()
        .zip(&search.best)
        .filter(|(_, &b)| b)
        .map(|(it, _)| it.id)
        .collect();
    chosen.sort_unstable();
    KnapsackSolution {
        value: search.best_value,
        chosen,
    }
}

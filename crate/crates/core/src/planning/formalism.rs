//! Ground planning formalism: facts, conditions, actions with
//! state-dependent costs, the transition function and plan cost.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::Cost;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fact {
    pub fn new<I, S>(predicate: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Fact {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Closed-world state: facts not present are false.
pub type State = BTreeSet<Fact>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Condition {
    positive: BTreeSet<Fact>,
    negative: BTreeSet<Fact>,
}

impl Condition {
    pub fn new(positive: BTreeSet<Fact>, negative: BTreeSet<Fact>) -> Result<Self> {
        if let Some(f) = positive.intersection(&negative).next() {
            return Err(Error::InvalidPlan(format!(
                "condition requires {f} both true and false"
            )));
        }
        Ok(Condition { positive, negative })
    }

    pub fn positive(&self) -> &BTreeSet<Fact> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<Fact> {
        &self.negative
    }

    /// `s ⊨ c`: every positive fact present and every negative fact absent.
    pub fn holds(&self, state: &State) -> bool {
        self.positive.is_subset(state) && self.negative.is_disjoint(state)
    }

    fn first_failure(&self, state: &State) -> Option<String> {
        if let Some(f) = self.positive.iter().find(|f| !state.contains(*f)) {
            return Some(format!("{f} does not hold"));
        }
        self.negative
            .iter()
            .find(|f| state.contains(*f))
            .map(|f| format!("{f} holds but must not"))
    }
}

type CostFn = dyn Fn(&State) -> Cost + Send + Sync;

#[derive(Clone)]
pub enum ActionCost {
    Constant(Cost),
    /// Evaluated in the state the action is applied in.
    StateDependent(Arc<CostFn>),
}

impl fmt::Debug for ActionCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionCost::Constant(c) => write!(f, "Constant({c})"),
            ActionCost::StateDependent(_) => f.write_str("StateDependent(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ActionInstance {
    pub name: String,
    pub args: Vec<String>,
    pre: Condition,
    add: BTreeSet<Fact>,
    del: BTreeSet<Fact>,
    cost: ActionCost,
}

impl ActionInstance {
    pub fn new(
        name: impl Into<String>,
        args: Vec<String>,
        pre: Condition,
        add: BTreeSet<Fact>,
        del: BTreeSet<Fact>,
        cost: ActionCost,
    ) -> Result<Self> {
        let name = name.into();
        if let Some(f) = add.intersection(&del).next() {
            return Err(Error::InvalidPlan(format!(
                "action {name} both adds and deletes {f}"
            )));
        }
        Ok(ActionInstance {
            name,
            args,
            pre,
            add,
            del,
            cost,
        })
    }

    pub fn pre(&self) -> &Condition {
        &self.pre
    }

    pub fn add(&self) -> &BTreeSet<Fact> {
        &self.add
    }

    pub fn del(&self) -> &BTreeSet<Fact> {
        &self.del
    }

    pub fn cost_in(&self, state: &State) -> Cost {
        match &self.cost {
            ActionCost::Constant(c) => *c,
            ActionCost::StateDependent(f) => f(state),
        }
    }

    pub fn label(&self) -> String {
        let mut s = format!("({}", self.name);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

/// Transition function: `(s ∪ add) − del`, defined only when `s ⊨ pre`.
pub fn apply(state: &State, action: &ActionInstance) -> Result<State> {
    if let Some(reason) = action.pre.first_failure(state) {
        return Err(Error::InapplicableAction {
            action: action.label(),
            reason,
        });
    }
    let mut next: State = state.union(&action.add).cloned().collect();
    next.retain(|f| !action.del.contains(f));
    Ok(next)
}

/// Sum of action costs, each evaluated in the state the action is applied
/// in. Fails if some action is inapplicable.
pub fn plan_cost(initial: &State, plan: &[ActionInstance]) -> Result<Cost> {
    Ok(execute(initial, plan)?.1)
}

/// Runs the plan, returning the final state and total cost.
pub fn execute(initial: &State, plan: &[ActionInstance]) -> Result<(State, Cost)> {
    let mut state = initial.clone();
    let mut total: Cost = 0;
    for a in plan {
        total += a.cost_in(&state);
        state = apply(&state, a)?;
    }
    Ok((state, total))
}

/// Checks that the plan is applicable and that its final state satisfies
/// the goal; returns the plan cost.
pub fn validate_plan(initial: &State, plan: &[ActionInstance], goal: &Condition) -> Result<Cost> {
    let (state, cost) = execute(initial, plan)?;
    if let Some(reason) = goal.first_failure(&state) {
        return Err(Error::InvalidPlan(format!("goal not reached: {reason}")));
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Fact {
        Fact::new(name, Vec::<String>::new())
    }

    fn set(facts: &[&str]) -> BTreeSet<Fact> {
        facts.iter().map(|f| p(f)).collect()
    }

    fn action(pre: &[&str], add: &[&str], del: &[&str], cost: Cost) -> ActionInstance {
        ActionInstance::new(
            "a",
            vec![],
            Condition::new(set(pre), BTreeSet::new()).unwrap(),
            set(add),
            set(del),
            ActionCost::Constant(cost),
        )
        .unwrap()
    }

    #[test]
    fn identity_action() {
        let s = set(&["p", "q"]);
        assert_eq!(apply(&s, &action(&[], &[], &[], 1)).unwrap(), s);
    }

    #[test]
    fn add_and_delete() {
        assert_eq!(
            apply(&State::new(), &action(&[], &["p"], &[], 1)).unwrap(),
            set(&["p"])
        );
        assert_eq!(
            apply(&set(&["p", "q"]), &action(&["p"], &[], &["p"], 1)).unwrap(),
            set(&["q"])
        );
    }

    #[test]
    fn inapplicable() {
        let err = apply(&State::new(), &action(&["p"], &[], &[], 1)).unwrap_err();
        assert!(matches!(err, Error::InapplicableAction { .. }));
        let neg = ActionInstance::new(
            "n",
            vec![],
            Condition::new(BTreeSet::new(), set(&["p"])).unwrap(),
            BTreeSet::new(),
            BTreeSet::new(),
            ActionCost::Constant(0),
        )
        .unwrap();
        assert!(apply(&set(&["p"]), &neg).is_err());
        assert!(apply(&set(&["q"]), &neg).is_ok());
    }

    #[test]
    fn malformed_rejected() {
        assert!(Condition::new(set(&["p"]), set(&["p"])).is_err());
        assert!(ActionInstance::new(
            "x",
            vec![],
            Condition::default(),
            set(&["p"]),
            set(&["p"]),
            ActionCost::Constant(0)
        )
        .is_err());
    }

    #[test]
    fn plan_costs() {
        assert_eq!(plan_cost(&State::new(), &[]).unwrap(), 0);
        let unit = action(&[], &[], &[], 1);
        assert_eq!(plan_cost(&State::new(), &[unit.clone(), unit]).unwrap(), 2);
    }

    #[test]
    fn cost_evaluated_before_transition() {
        // costs 10 when p already holds, 1 otherwise
        let dep = ActionInstance::new(
            "d",
            vec![],
            Condition::default(),
            set(&["p"]),
            BTreeSet::new(),
            ActionCost::StateDependent(Arc::new(|s: &State| {
                if s.contains(&Fact::new("p", Vec::<String>::new())) {
                    10
                } else {
                    1
                }
            })),
        )
        .unwrap();
        assert_eq!(plan_cost(&State::new(), &[dep.clone(), dep]).unwrap(), 11);
    }

    #[test]
    fn goal_checked() {
        let goal = Condition::new(set(&["p"]), BTreeSet::new()).unwrap();
        assert!(validate_plan(&State::new(), &[], &goal).is_err());
        assert_eq!(
            validate_plan(&State::new(), &[action(&[], &["p"], &[], 3)], &goal).unwrap(),
            3
        );
    }
}

use std::ops::{Index, IndexMut};

use crate::ext;
use crate::model::{SspModel, StateId, TERMINAL};

/// A function from states to `[0, ∞]`, indexed by [`StateId`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValueFunction(Vec<f64>);

impl ValueFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    /// Builds `f(x)` at every state, forcing the value at `t` to 0.
    pub fn from_fn(model: &SspModel, f: impl Fn(StateId) -> f64) -> Self {
        Self(
            model
                .states()
                .map(|x| if x == TERMINAL { 0.0 } else { f(x) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    /// Member of `[0, ∞]^X` (no NaN, no negatives).
    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|v| *v >= 0.0)
    }

    /// Member of the class of nonnegative functions vanishing at `t`.
    pub fn vanishes_at_terminal(&self) -> bool {
        self.is_nonnegative() && self.0.first().is_some_and(|v| *v == 0.0)
    }

    /// States with a finite value.
    pub fn finite_states(&self) -> Vec<StateId> {
        (0..self.len()).filter(|&x| self.0[x].is_finite()).collect()
    }

    pub fn infinite_states(&self) -> Vec<StateId> {
        (0..self.len())
            .filter(|&x| self.0[x].is_infinite())
            .collect()
    }

    /// Componentwise `self ≤ other + tol`.
    pub fn le(&self, other: &ValueFunction, tol: f64) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| ext::le_tol(*a, *b, tol))
    }

    /// Largest pointwise distance (`∞` vs `∞` counts as 0).
    pub fn distance(&self, other: &ValueFunction) -> f64 {
        self.distance_on(other, 0..self.len())
    }

    pub fn distance_on(
        &self,
        other: &ValueFunction,
        states: impl IntoIterator<Item = StateId>,
    ) -> f64 {
        states
            .into_iter()
            .map(|x| ext::distance(self.0[x], other.0[x]))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> ValueFunction {
        ValueFunction(self.0.iter().map(|v| ext::mul(c, *v)).collect())
    }
}

impl Index<StateId> for ValueFunction {
    type Output = f64;

    fn index(&self, x: StateId) -> &f64 {
        &self.0[x]
    }
}

impl IndexMut<StateId> for ValueFunction {
    fn index_mut(&mut self, x: StateId) -> &mut f64 {
        &mut self.0[x]
    }
}

impl From<Vec<f64>> for ValueFunction {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}
